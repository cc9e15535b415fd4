//! Scenario files: flat sectioned text, parsed strictly.
//!
//! ```text
//! [domain]
//! kind = sector
//! theta0 = 0.7pi
//!
//! [experiment]
//! kind = fan
//! z_in = 0.2pi
//! samples = 32
//!
//! [tolerances]
//! tol_geo = 1e-9
//!
//! [output]
//! dir = out
//! ```
//!
//! Rules: four known sections (`domain`, `experiment`, `tolerances`,
//! `output`); keys are lowercase snake_case; `#` or `;` start a full-line
//! comment; values may be numbers, angles with a `pi` suffix (`0.7pi`),
//! comma-separated lists, or bare words.  Unknown sections and unknown keys
//! are hard errors, so a typo cannot silently fall back to a default.
//! `--set section.key=value` overlays entries after the file is read.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use cornerwave::geometry::{make_sector, make_wedge3d, Domain};
use cornerwave::tol;

const SECTIONS: [&str; 4] = ["domain", "experiment", "tolerances", "output"];

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Raw key/value text of one section, with consumption tracking so the typed
/// extractors can reject keys nobody asked for.
#[derive(Debug, Default, Clone)]
pub struct Section {
    entries: BTreeMap<String, String>,
    taken: std::collections::BTreeSet<String>,
}

impl Section {
    fn insert(&mut self, key: String, value: String) {
        self.entries.insert(key, value);
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.get(key).map(|v| {
            self.taken.insert(key.to_string());
            v.clone()
        })
    }

    fn leftovers(&self) -> Vec<&str> {
        self.entries
            .keys()
            .filter(|k| !self.taken.contains(*k))
            .map(String::as_str)
            .collect()
    }
}

/// Parsed but untyped scenario file plus overlays.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    sections: BTreeMap<String, Section>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && k.starts_with(|c: char| c.is_ascii_lowercase())
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            config_err(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RawConfig::default();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| config_err(format!("line {lineno}: unterminated section header")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(config_err(format!(
                        "line {lineno}: unknown section [{name}] (known: {})",
                        SECTIONS.join(", ")
                    )));
                }
                current = Some(name.to_string());
                cfg.sections.entry(name.to_string()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                config_err(format!("line {lineno}: expected `key = value`, got `{line}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !valid_key(key) {
                return Err(config_err(format!(
                    "line {lineno}: key `{key}` is not lowercase snake_case"
                )));
            }
            let section = current.as_ref().ok_or_else(|| {
                config_err(format!("line {lineno}: `{key}` appears before any [section]"))
            })?;
            cfg.sections.get_mut(section).expect("section created on header").insert(
                key.to_string(),
                value.to_string(),
            );
        }
        Ok(cfg)
    }

    /// Apply one `--set section.key=value` overlay.
    pub fn set(&mut self, spec: &str) -> Result<(), CliError> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| config_err(format!("--set `{spec}`: expected section.key=value")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| config_err(format!("--set `{spec}`: expected section.key=value")))?;
        if !SECTIONS.contains(&section) {
            return Err(config_err(format!(
                "--set `{spec}`: unknown section `{section}` (known: {})",
                SECTIONS.join(", ")
            )));
        }
        if !valid_key(key) {
            return Err(config_err(format!(
                "--set `{spec}`: key `{key}` is not lowercase snake_case"
            )));
        }
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    fn section(&mut self, name: &str) -> Section {
        self.sections.remove(name).unwrap_or_default()
    }
}

/// Parse a number that may carry a `pi` suffix: `0.7pi`, `-pi`, `1.25`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim();
        let factor = match head {
            "" => 1.0,
            "-" => -1.0,
            _ => head.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?,
        };
        return Ok(factor * PI);
    }
    t.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("`{other}` is not `true` or `false`")),
    }
}

/// Typed view of one section; every getter records the key as consumed and
/// `finish` rejects whatever is left.
pub struct Ctx {
    name: &'static str,
    section: Section,
}

impl Ctx {
    fn new(name: &'static str, section: Section) -> Self {
        Ctx { name, section }
    }

    fn wrap<T>(&self, key: &str, r: Result<T, String>) -> Result<T, CliError> {
        r.map_err(|e| config_err(format!("[{}] {key}: {e}", self.name)))
    }

    pub fn opt_raw(&mut self, key: &str) -> Option<String> {
        self.section.take(key)
    }

    pub fn req_raw(&mut self, key: &str) -> Result<String, CliError> {
        self.section
            .take(key)
            .ok_or_else(|| config_err(format!("[{}] missing required key `{key}`", self.name)))
    }

    pub fn req_angle(&mut self, key: &str) -> Result<f64, CliError> {
        let v = self.req_raw(key)?;
        self.wrap(key, parse_angle(&v))
    }

    pub fn opt_angle(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.section.take(key) {
            Some(v) => self.wrap(key, parse_angle(&v)),
            None => Ok(default),
        }
    }

    pub fn req_f64(&mut self, key: &str) -> Result<f64, CliError> {
        let v = self.req_raw(key)?;
        self.wrap(key, parse_f64(&v))
    }

    pub fn opt_f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.section.take(key) {
            Some(v) => self.wrap(key, parse_f64(&v)),
            None => Ok(default),
        }
    }

    pub fn req_usize(&mut self, key: &str) -> Result<usize, CliError> {
        let v = self.req_raw(key)?;
        self.wrap(key, parse_usize(&v))
    }

    pub fn opt_usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.section.take(key) {
            Some(v) => self.wrap(key, parse_usize(&v)),
            None => Ok(default),
        }
    }

    pub fn opt_u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.section.take(key) {
            Some(v) => {
                self.wrap(key, v.trim().parse::<u64>().map_err(|_| format!("`{v}` is not a u64")))
            }
            None => Ok(default),
        }
    }

    pub fn opt_bool(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.section.take(key) {
            Some(v) => self.wrap(key, parse_bool(&v)),
            None => Ok(default),
        }
    }

    /// Comma-separated list of numbers, each allowing the `pi` suffix.
    pub fn opt_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.section.take(key) else { return Ok(None) };
        let mut out = Vec::new();
        for item in v.split(',') {
            out.push(self.wrap(key, parse_angle(item))?);
        }
        if out.is_empty() {
            return Err(config_err(format!("[{}] {key}: empty list", self.name)));
        }
        Ok(Some(out))
    }

    pub fn req_list(&mut self, key: &str) -> Result<Vec<f64>, CliError> {
        self.opt_list(key)?
            .ok_or_else(|| config_err(format!("[{}] missing required key `{key}`", self.name)))
    }

    pub fn finish(self) -> Result<(), CliError> {
        let left = self.section.leftovers();
        if left.is_empty() {
            Ok(())
        } else {
            Err(config_err(format!(
                "[{}] unknown key{} {}",
                self.name,
                if left.len() == 1 { "" } else { "s" },
                left.join(", ")
            )))
        }
    }
}

/// Domain half of a scenario.
#[derive(Debug, Clone)]
pub struct DomainCfg {
    pub kind: DomainKind,
    pub theta0: f64,
    pub sim_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Sector,
    Wedge3d,
}

impl DomainCfg {
    pub fn build(&self) -> Result<Domain, CliError> {
        let d = match self.kind {
            DomainKind::Sector => make_sector(self.theta0)?,
            DomainKind::Wedge3d => make_wedge3d(self.theta0)?,
        };
        Ok(match self.sim_radius {
            Some(r) => d.with_sim_radius(r),
            None => d,
        })
    }
}

/// Tolerance block; defaults mirror the library constants.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub tol_geo: f64,
    pub tol_char: f64,
    pub tol_class: f64,
    pub eps_kick: f64,
}

#[derive(Debug, Clone)]
pub struct OutputCfg {
    pub dir: PathBuf,
    pub prefix: String,
}

impl OutputCfg {
    /// Full path of an artifact, with the directory created on demand.
    pub fn path(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, &e))?;
        Ok(self.dir.join(format!("{}{name}", self.prefix)))
    }
}

/// A validated scenario: typed domain/tolerances/output blocks plus the raw
/// experiment section, which each subcommand consumes with its own key set.
pub struct Scenario {
    pub domain: DomainCfg,
    pub tolerances: Tolerances,
    pub output: OutputCfg,
    /// Parsed and overlaid by `--seed` so scenario files round-trip, but no
    /// current subcommand samples randomly; reserved for future modes.
    #[allow(dead_code)]
    pub seed: u64,
    pub experiment: Ctx,
}

pub struct Overrides<'a> {
    pub sets: &'a [String],
    pub out: Option<&'a Path>,
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn from_file(path: &Path, ov: &Overrides, subcommand: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::load(path)?;
        for s in ov.sets {
            raw.set(s)?;
        }

        let mut domain = Ctx::new("domain", raw.section("domain"));
        let kind = match domain.opt_raw("kind").as_deref().unwrap_or("sector") {
            "sector" => DomainKind::Sector,
            "wedge3d" => DomainKind::Wedge3d,
            other => {
                return Err(config_err(format!(
                    "[domain] kind: `{other}` is not `sector` or `wedge3d`"
                )))
            }
        };
        let theta0 = domain.req_angle("theta0")?;
        let sim_radius = match domain.opt_raw("sim_radius") {
            Some(v) => Some(
                parse_f64(&v).map_err(|e| config_err(format!("[domain] sim_radius: {e}")))?,
            ),
            None => None,
        };
        domain.finish()?;
        let domain = DomainCfg { kind, theta0, sim_radius };

        let mut tolc = Ctx::new("tolerances", raw.section("tolerances"));
        let tolerances = Tolerances {
            tol_geo: tolc.opt_f64("tol_geo", tol::TOL_GEO)?,
            tol_char: tolc.opt_f64("tol_char", tol::TOL_CHAR)?,
            tol_class: tolc.opt_f64("tol_class", tol::TOL_CLASS)?,
            eps_kick: tolc.opt_f64("eps_kick", tol::EPS_KICK)?,
        };
        tolc.finish()?;
        for (name, v) in [
            ("tol_geo", tolerances.tol_geo),
            ("tol_char", tolerances.tol_char),
            ("tol_class", tolerances.tol_class),
            ("eps_kick", tolerances.eps_kick),
        ] {
            if !(v > 0.0) {
                return Err(config_err(format!(
                    "[tolerances] {name}: must be positive, got {v}"
                )));
            }
        }

        let mut outc = Ctx::new("output", raw.section("output"));
        let dir = match ov.out {
            Some(p) => p.to_path_buf(),
            None => PathBuf::from(outc.opt_raw("dir").unwrap_or_else(|| ".".into())),
        };
        // Consume the key even when --out overrides it.
        let _ = outc.opt_raw("dir");
        let prefix = outc.opt_raw("prefix").unwrap_or_default();
        outc.finish()?;
        let output = OutputCfg { dir, prefix };

        let mut experiment = Ctx::new("experiment", raw.section("experiment"));
        if let Some(kind) = experiment.opt_raw("kind") {
            if kind != subcommand {
                return Err(config_err(format!(
                    "[experiment] kind = `{kind}` does not match subcommand `{subcommand}`"
                )));
            }
        }
        let seed = match ov.seed {
            Some(s) => {
                let _ = experiment.opt_raw("seed");
                s
            }
            None => experiment.opt_u64("seed", 0)?,
        };

        if let Some(stray) = raw.sections.keys().next() {
            return Err(config_err(format!("unknown section [{stray}]")));
        }

        Ok(Scenario { domain, tolerances, output, seed, experiment })
    }
}
