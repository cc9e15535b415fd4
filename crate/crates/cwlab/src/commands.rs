//! One runner per subcommand.  Each consumes the `[experiment]` section with
//! its own key vocabulary (leftover keys are config errors), validates the
//! operation's preconditions against the scenario tolerances, runs the
//! library call and writes the artifacts.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::PathBuf;

use cornerwave::geometry::{classify_base_point, BaseClass, Domain};
use cornerwave::hamiltonian::{char_residual, Covector, PhasePoint};
use cornerwave::regularity::{
    calibrate, front_transects, measure_fronts, FrontId, FrontScene, MeasureBudget,
};
use cornerwave::spectral::{propagate, write_cwlf, write_field_csv, Bc, GridSpec, Source};
use cornerwave::geometry::Point;
use cornerwave::tracer::exits::{diffracted_fan, geometric_exits};
use cornerwave::tracer::{near_miss_family, trace, CornerPolicy, Event, Side};

use crate::config::{Ctx, DomainKind, Scenario};
use crate::error::CliError;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Shortest-roundtrip decimal form; what every CSV field uses.
fn fmt(v: f64) -> String {
    format!("{v}")
}

fn write_file(path: &PathBuf, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::io(path, &e))
}

fn announce(path: &PathBuf) {
    println!("wrote: {}", path.display());
}

/// A corner-aimed incoming ray: starts at distance `r` from the corner in the
/// link direction `z_in` and moves straight toward the apex at unit speed.
/// `eta` is the conserved axial dual on a wedge (`None` on a sector).
fn aimed_ray(
    d: &Domain,
    corner_id: u32,
    z_in: f64,
    r: f64,
    eta: Option<f64>,
) -> Result<PhasePoint, CliError> {
    let chart = d.blowup_chart(corner_id)?;
    if !(z_in > 0.0 && z_in < chart.theta0) {
        return Err(config_err(format!(
            "z_in = {z_in} outside the open link (0, {})",
            chart.theta0
        )));
    }
    if !(r > 0.0) {
        return Err(config_err(format!("start_r must be positive, got {r}")));
    }
    let apex = d.corner(corner_id).expect("chart implies corner").apex;
    let g = chart.global_angle(z_in);
    let u = [g.cos(), g.sin()];
    let planar_speed = match eta {
        Some(e) => (1.0 - e * e).sqrt(),
        None => 1.0,
    };
    let base = match eta {
        Some(_) => Point::spatial(apex[0] + r * u[0], apex[1] + r * u[1], 0.0),
        None => Point::planar(apex[0] + r * u[0], apex[1] + r * u[1]),
    };
    let xi = match eta {
        Some(e) => Covector::spatial(-planar_speed * u[0], -planar_speed * u[1], e),
        None => Covector::planar(-u[0], -u[1]),
    };
    Ok(PhasePoint { base, t: 0.0, tau: 1.0, xi })
}

/// Axial dual for the current domain: required meaningful only on a wedge.
fn take_eta(c: &mut Ctx, kind: DomainKind) -> Result<Option<f64>, CliError> {
    let eta = c.opt_f64("eta", 0.0)?;
    match kind {
        DomainKind::Sector => {
            if eta != 0.0 {
                return Err(config_err("eta is only meaningful on a wedge3d domain"));
            }
            Ok(None)
        }
        DomainKind::Wedge3d => {
            if !(eta.abs() < 1.0) {
                return Err(config_err(format!("need |eta| < 1, got {eta}")));
            }
            Ok(Some(eta))
        }
    }
}

fn fan_csv(fan: &cornerwave::tracer::DiffractionFan) -> String {
    let mut out = String::from("corner_id,z_out,xi_hat,zeta_hat,eta_hat,tau,tag\n");
    for m in &fan.members {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fan.corner_id,
            fmt(m.z_out),
            fmt(m.xi_hat),
            fmt(m.zeta_hat),
            m.eta_hat.map(fmt).unwrap_or_default(),
            fmt(m.state.tau),
            m.tag,
        ));
    }
    out
}

pub fn run_trace(scn: Scenario) -> Result<(), CliError> {
    let mut c = scn.experiment;
    let start_r = c.req_f64("start_r")?;
    let start_theta = c.req_angle("start_theta")?;
    let dir = c.req_angle("dir")?;
    let duration = c.req_f64("duration")?;
    let eta = take_eta(&mut c, scn.domain.kind)?;
    let policy = match c.opt_raw("corner_policy").as_deref().unwrap_or("stop") {
        "stop" => CornerPolicy::StopAtCorner,
        "geometric_plus" => CornerPolicy::FollowGeometric(Side::Plus),
        "geometric_minus" => CornerPolicy::FollowGeometric(Side::Minus),
        "fan" => CornerPolicy::EmitFan(c.opt_usize("fan_samples", 16)?),
        other => {
            return Err(config_err(format!(
                "corner_policy `{other}` is not stop, geometric_plus, geometric_minus or fan"
            )))
        }
    };
    c.finish()?;

    let d = scn.domain.build()?;
    if !(duration > 0.0) {
        return Err(config_err(format!("duration must be positive, got {duration}")));
    }
    if start_r >= d.sim_radius {
        return Err(config_err(format!(
            "start_r = {start_r} outside the simulation box (radius {})",
            d.sim_radius
        )));
    }
    let planar_speed = eta.map_or(1.0, |e| (1.0 - e * e).sqrt());
    let base = match eta {
        Some(_) => Point::spatial(
            start_r * start_theta.cos(),
            start_r * start_theta.sin(),
            0.0,
        ),
        None => Point::planar(start_r * start_theta.cos(), start_r * start_theta.sin()),
    };
    let xi = match eta {
        Some(e) => Covector::spatial(planar_speed * dir.cos(), planar_speed * dir.sin(), e),
        None => Covector::planar(dir.cos(), dir.sin()),
    };
    let p0 = PhasePoint { base, t: 0.0, tau: 1.0, xi };
    if classify_base_point(&d, p0.base, scn.tolerances.tol_geo) != BaseClass::Interior {
        return Err(config_err(format!(
            "start point (r = {start_r}, theta = {start_theta}) is not interior to the domain"
        )));
    }
    let residual = char_residual(&p0).abs();
    if residual > scn.tolerances.tol_char {
        return Err(config_err(format!(
            "initial covector off the characteristic set (residual {residual:.3e})"
        )));
    }

    let path = trace(&d, &p0, duration, policy)?;

    let axial = d.axial;
    let mut csv = String::new();
    if axial {
        csv.push_str("event_index,event_type,t,x,y,z_axial,tau,xi1,xi2,xi3,surface_id\n");
    } else {
        csv.push_str("event_index,event_type,t,x,y,tau,xi1,xi2,surface_id\n");
    }
    let mut push_row = |idx: usize, kind: &str, p: &PhasePoint, surface: Option<u32>| {
        let sid = surface.map(|s| s.to_string()).unwrap_or_default();
        if axial {
            csv.push_str(&format!(
                "{idx},{kind},{},{},{},{},{},{},{},{},{sid}\n",
                fmt(p.t),
                fmt(p.base.xy[0]),
                fmt(p.base.xy[1]),
                fmt(p.base.axial.unwrap_or(0.0)),
                fmt(p.tau),
                fmt(p.xi.xy[0]),
                fmt(p.xi.xy[1]),
                fmt(p.xi.axial.unwrap_or(0.0)),
            ));
        } else {
            csv.push_str(&format!(
                "{idx},{kind},{},{},{},{},{},{},{sid}\n",
                fmt(p.t),
                fmt(p.base.xy[0]),
                fmt(p.base.xy[1]),
                fmt(p.tau),
                fmt(p.xi.xy[0]),
                fmt(p.xi.xy[1]),
            ));
        }
    };
    push_row(0, "Start", &p0, None);
    for (i, e) in path.events.iter().enumerate() {
        let (p, surface) = match e {
            Event::Segment { end, .. } => (end, None),
            Event::Reflection { surface, outgoing, .. } => (outgoing, Some(*surface)),
            Event::CornerHit { corner, incoming, .. } => (incoming, Some(*corner)),
            Event::GlancingStop { at, surface } => (at, Some(*surface)),
            Event::Exit { at } => (at, None),
        };
        push_row(i + 1, e.kind(), p, surface);
    }

    let path_csv = scn.output.path("raypath.csv")?;
    write_file(&path_csv, &csv)?;
    announce(&path_csv);
    if let Some(fan) = &path.fan {
        let fan_path = scn.output.path("fan.csv")?;
        write_file(&fan_path, &fan_csv(fan))?;
        announce(&fan_path);
    }
    Ok(())
}

pub fn run_fan(scn: Scenario) -> Result<(), CliError> {
    let mut c = scn.experiment;
    let corner_id = c.opt_usize("corner_id", 0)? as u32;
    let z_in = c.req_angle("z_in")?;
    let samples = c.req_usize("samples")?;
    let start_r = c.opt_f64("start_r", 1.0)?;
    let eta = take_eta(&mut c, scn.domain.kind)?;
    c.finish()?;

    if samples == 0 {
        return Err(config_err("samples must be at least 1"));
    }
    let d = scn.domain.build()?;
    let incoming = aimed_ray(&d, corner_id, z_in, start_r, eta)?;
    let fan = diffracted_fan(&d, corner_id, &incoming, samples)?;

    let path = scn.output.path("fan.csv")?;
    write_file(&path, &fan_csv(&fan))?;
    announce(&path);
    Ok(())
}

pub fn run_limit(scn: Scenario) -> Result<(), CliError> {
    let mut c = scn.experiment;
    let corner_id = c.opt_usize("corner_id", 0)? as u32;
    let z_in = c.req_angle("z_in")?;
    let eps_list = c.req_list("eps_list")?;
    let start_r = c.opt_f64("start_r", 1.0)?;
    c.finish()?;

    if scn.domain.kind != DomainKind::Sector {
        return Err(config_err("limit requires a sector domain"));
    }
    for &e in &eps_list {
        if !(e > 0.0 && e < start_r) {
            return Err(config_err(format!(
                "eps_list entries must lie in (0, start_r); got {e}"
            )));
        }
    }
    let d = scn.domain.build()?;
    let aim = aimed_ray(&d, corner_id, z_in, start_r, None)?;
    let family = near_miss_family(&d, corner_id, &aim, &eps_list)?;

    let mut csv = String::from("eps,swept,exit\n");
    for s in &family {
        csv.push_str(&format!("{},{},{}\n", fmt(s.eps), fmt(s.swept), fmt(s.exit_angle)));
    }
    let path = scn.output.path("nearmiss.csv")?;
    write_file(&path, &csv)?;
    announce(&path);
    Ok(())
}

/// Source keys shared by `sector-wave` and `measure`: `source` selects
/// pointlike or ring; a ring takes either explicit mode coefficients `phi`
/// or a bump profile via `ring_halfwidth` projected on `n_modes` modes.
fn take_source(
    c: &mut Ctx,
    bc: Bc,
    theta0: f64,
    n_modes: usize,
) -> Result<(Source, f64), CliError> {
    let kind = c.req_raw("source")?;
    let r0 = c.req_f64("r0")?;
    let sigma = c.req_f64("sigma")?;
    let src = match kind.as_str() {
        "pointlike" => {
            let theta_src = c.req_angle("theta_src")?;
            (Source::PointLike { r0, theta_src, sigma }, theta_src)
        }
        "ring" => {
            let theta_src = c.req_angle("theta_src")?;
            match (c.opt_list("phi")?, c.opt_raw("ring_halfwidth")) {
                (Some(phi), None) => (Source::Ring { r0, phi, sigma }, theta_src),
                (None, Some(hw)) => {
                    let hw = crate::config::parse_angle(&hw)
                        .map_err(|e| config_err(format!("[experiment] ring_halfwidth: {e}")))?;
                    let src =
                        Source::ring_bump(r0, theta_src, sigma, hw, bc, theta0, n_modes)?;
                    (src, theta_src)
                }
                (Some(_), Some(_)) => {
                    return Err(config_err("give either phi or ring_halfwidth, not both"))
                }
                (None, None) => {
                    return Err(config_err("ring needs phi or ring_halfwidth"))
                }
            }
        }
        other => {
            return Err(config_err(format!(
                "source `{other}` is not `pointlike` or `ring`"
            )))
        }
    };
    Ok(src)
}

fn take_bc(c: &mut Ctx) -> Result<Bc, CliError> {
    match c.opt_raw("bc").as_deref().unwrap_or("dirichlet") {
        "dirichlet" => Ok(Bc::Dirichlet),
        "neumann" => Ok(Bc::Neumann),
        other => Err(config_err(format!("bc `{other}` is not `dirichlet` or `neumann`"))),
    }
}

pub fn run_sector_wave(scn: Scenario) -> Result<(), CliError> {
    if scn.domain.kind != DomainKind::Sector {
        return Err(config_err("sector-wave requires a sector domain"));
    }
    let theta0 = scn.domain.theta0;
    let mut c = scn.experiment;
    let bc = take_bc(&mut c)?;
    let n_modes = c.req_usize("n_modes")?;
    let lambda_cut = c.req_f64("lambda_cut")?;
    let q_nodes = c.req_usize("q_nodes")?;
    let (src, _) = take_source(&mut c, bc, theta0, n_modes)?;
    let t = c.req_f64("t")?;
    let r_max = c.req_f64("r_max")?;
    let nr = c.opt_usize("nr", 257)?;
    let ntheta = c.opt_usize("ntheta", 129)?;
    let probe = c.opt_bool("probe", true)?;
    c.finish()?;

    if nr < 2 || ntheta < 2 || !(r_max > 0.0) {
        return Err(config_err(format!(
            "grid needs r_max > 0, nr >= 2, ntheta >= 2; got r_max={r_max}, nr={nr}, ntheta={ntheta}"
        )));
    }
    let grid = GridSpec::regular(r_max, nr, theta0, ntheta);
    let field = propagate(&src, bc, theta0, t, &grid, n_modes, lambda_cut, q_nodes, probe)?;

    let cwlf_path = scn.output.path("field.cwlf")?;
    let f = File::create(&cwlf_path).map_err(|e| CliError::io(&cwlf_path, &e))?;
    let mut w = BufWriter::new(f);
    write_cwlf(&field, &mut w).map_err(|e| CliError::io(&cwlf_path, &e))?;
    w.flush().map_err(|e| CliError::io(&cwlf_path, &e))?;
    announce(&cwlf_path);

    let csv_path = scn.output.path("field.csv")?;
    let f = File::create(&csv_path).map_err(|e| CliError::io(&csv_path, &e))?;
    let mut w = BufWriter::new(f);
    write_field_csv(&field, &mut w).map_err(|e| CliError::io(&csv_path, &e))?;
    w.flush().map_err(|e| CliError::io(&csv_path, &e))?;
    announce(&csv_path);

    if let Some(change) = field.probe_change {
        println!("resolution probe: relative change {change:.3e}");
    }
    Ok(())
}

pub fn run_measure(scn: Scenario) -> Result<(), CliError> {
    if scn.domain.kind != DomainKind::Sector {
        return Err(config_err("measure requires a sector domain"));
    }
    let theta0 = scn.domain.theta0;
    let mut c = scn.experiment;
    let bc = take_bc(&mut c)?;
    let n_modes = c.req_usize("n_modes")?;
    let lambda_cut = c.req_f64("lambda_cut")?;
    let q_nodes = c.req_usize("q_nodes")?;
    let (src, theta_src) = take_source(&mut c, bc, theta0, n_modes)?;
    let t_star = c.req_f64("t_star")?;
    let half_length = c.opt_f64("half_length", 0.18)?;
    let samples = c.opt_usize("samples", 512)?;
    let diffracted = c.req_list("diffracted")?;
    let reflected = c.opt_bool("reflected", false)?;
    let geo_margin =
        c.opt_angle("geo_margin", cornerwave::tol::DEFAULT_GEO_MARGIN)?;
    c.finish()?;

    let mut requests = vec![FrontId::Incident];
    if reflected {
        requests.push(FrontId::Reflected);
    }
    for &theta in &diffracted {
        requests.push(FrontId::Diffracted { theta });
    }

    let d = scn.domain.build()?;
    let chart = d.blowup_chart(0)?;
    let z_src = {
        // The source's angular position in link coordinates equals its polar
        // angle on the sector chart.
        let g = chart.global_angle(0.0);
        theta_src - g
    };
    let exits: Vec<f64> = geometric_exits(theta0, z_src)
        .into_iter()
        .map(|e| chart.global_angle(e.z))
        .collect();

    let mut scene = FrontScene::new(theta0, src.r0(), theta_src, t_star);
    scene.half_length = half_length;
    scene.samples = samples;
    scene.geometric_exits = exits;
    scene.geo_margin = geo_margin;

    let transects = front_transects(&scene, &requests)?;
    let budget = MeasureBudget { bc, n_modes, lambda_cut, q_nodes };
    let report = measure_fronts(&src, theta0, t_star, &budget, &transects)?;

    let json_path = scn.output.path("regularity.json")?;
    write_file(&json_path, &report.to_json())?;
    announce(&json_path);

    let reference = report.incident_s_hat();
    println!("{:<22} {:>9} {:>9} {:>9}", "front", "s_hat", "residual", "delta");
    for f in &report.fronts {
        let delta = match (reference, f.front) {
            (_, FrontId::Incident) | (None, _) => "-".to_string(),
            (Some(r), _) => format!("{:+.4}", f.s_hat - r),
        };
        println!(
            "{:<22} {:>9.4} {:>9.4} {:>9}",
            f.front.to_string(),
            f.s_hat,
            f.residual,
            delta
        );
    }
    Ok(())
}

pub fn run_calibrate(scn: Scenario) -> Result<(), CliError> {
    let mut c = scn.experiment;
    let samples = c.opt_usize("samples", 4096)?;
    c.finish()?;

    let rows = calibrate(samples)?;

    let mut csv = String::from("profile,s_hat,residual,verdict\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.profile,
            fmt(r.s_hat),
            fmt(r.residual),
            r.verdict
        ));
    }
    let path = scn.output.path("calibration.csv")?;
    write_file(&path, &csv)?;
    announce(&path);

    println!("{:<10} {:>9} {:>9}  verdict", "profile", "s_hat", "residual");
    for r in &rows {
        println!("{:<10} {:>9.4} {:>9.4}  {}", r.profile, r.s_hat, r.residual, r.verdict);
    }
    Ok(())
}
