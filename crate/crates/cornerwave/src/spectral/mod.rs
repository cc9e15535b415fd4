//! Exact wave propagation on a planar sector by angular mode expansion.
//!
//! The Laplacian on the sector 0 < θ < θ₀ separates into eigenfunctions
//! Θ_n(θ) of fractional order ν = nπ/θ₀ and radial Bessel factors J_ν(λr).
//! Half-wave evolution of initial velocity data f is then a superposition
//!
//! u(t, r, θ) = Σ_n Θ_n(θ) ∫₀^Λ J_ν(λr) f̂_n(λ) M(λ) sin(λt) dλ,
//!
//! with f̂_n the order-ν Hankel transform of the angular projection of f and
//! M a frequency mollifier. Every field this crate measures is synthesized
//! from exactly this formula; the submodules supply the Bessel engine, the
//! quadrature rules, and the mollified sources.

pub mod bessel;
pub mod quad;
mod source;
mod synth;

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::tol::TOL_CHAIN_FRAC;
use bessel::{BesselError, LaneHarvest, LANES};
use quad::{panel_grid, QuadError};

pub use source::{bump, Source, SUPPORT_SIGMAS};
pub use synth::{
    energy, project, propagate, read_cwlf, synthesize_grid, write_cwlf, write_field_csv,
    FieldGrid, GridSpec,
};
pub(crate) use synth::{radial_mode_fields, synthesize_radial_pair};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("truncation probe moved the field by {probe_change:.3e} relative (limit 1e-3); raise the mode or quadrature budget")]
    Truncation { probe_change: f64 },
    #[error("invalid source: {reason}")]
    InvalidSource { reason: String },
    #[error("invalid spectral parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Boundary condition on the sector walls θ = 0 and θ = θ₀.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bc {
    Dirichlet,
    Neumann,
}

/// One angular eigenmode of the sector: Θ_n(θ) = sin(νθ) for Dirichlet
/// (n ≥ 1) or cos(νθ) for Neumann (n ≥ 0), with ν = nπ/θ₀. Both satisfy the
/// wall condition exactly by construction.
#[derive(Clone, Debug)]
pub struct ModeSpec {
    pub bc: Bc,
    pub theta0: f64,
    pub n: usize,
    pub nu: f64,
}

impl ModeSpec {
    pub fn angular(&self, theta: f64) -> f64 {
        match self.bc {
            Bc::Dirichlet => (self.nu * theta).sin(),
            Bc::Neumann => (self.nu * theta).cos(),
        }
    }

    pub fn angular_deriv(&self, theta: f64) -> f64 {
        match self.bc {
            Bc::Dirichlet => self.nu * (self.nu * theta).cos(),
            Bc::Neumann => -self.nu * (self.nu * theta).sin(),
        }
    }

    /// ∫₀^θ₀ Θ_n² dθ — θ₀/2 except for the constant Neumann mode.
    pub fn norm_sq(&self) -> f64 {
        if self.bc == Bc::Neumann && self.n == 0 {
            self.theta0
        } else {
            self.theta0 / 2.0
        }
    }
}

/// The first modes of the sector: n = 1..=N for Dirichlet, n = 0..=N for
/// Neumann (the constant mode counts extra).
pub fn mode_frequencies(bc: Bc, theta0: f64, n: usize) -> Result<Vec<ModeSpec>, SpectralError> {
    if !(theta0 > 0.0 && theta0 <= 2.0 * PI) {
        return Err(SpectralError::InvalidParameter { name: "theta0", value: theta0 });
    }
    if n == 0 {
        return Err(SpectralError::InvalidParameter { name: "n_modes", value: 0.0 });
    }
    let first = match bc {
        Bc::Dirichlet => 1,
        Bc::Neumann => 0,
    };
    Ok((first..=n)
        .map(|k| ModeSpec { bc, theta0, n: k, nu: k as f64 * PI / theta0 })
        .collect())
}

// ---------------------------------------------------------------------------
// Mode chains: grouping orders into shared unit-spaced Bessel ladders.
// ---------------------------------------------------------------------------

/// Modes whose orders share a fractional part, so one unit-spaced recurrence
/// ladder computes all of them. For θ₀ = (p/q)π the orders nq/p fall into p
/// such chains with members exactly q rungs apart; irrational angles degrade
/// to one chain per mode, which stays correct but loses the sharing.
#[derive(Clone, Debug)]
pub(crate) struct LaneChain {
    /// Fractional seed order of the ladder, in [0, 1).
    pub nu0: f64,
    /// Rung of the first member.
    pub offset: usize,
    /// Rung spacing between consecutive members (1 if irregular, with the
    /// intermediate slots simply carrying zero weight).
    pub stride: usize,
    /// (slot, mode index) pairs; slot = (rung − offset)/stride.
    pub members: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub(crate) struct ChainSet {
    pub lanes: Vec<LaneChain>,
    /// One past the highest rung any chain uses (with one spare rung so a
    /// derivative ladder J_{ν+1} never runs off the end).
    pub k_len: usize,
    /// Largest weight-slot count over the lanes.
    pub max_slots: usize,
}

impl ChainSet {
    /// Lane seeds and harvest patterns padded to the fixed kernel width.
    /// Chains beyond `LANES` get further groups (processed in batches).
    pub fn lane_batches(&self) -> Vec<([f64; LANES], [LaneHarvest; LANES], Vec<&LaneChain>)> {
        self.lanes
            .chunks(LANES)
            .map(|chunk| {
                let mut nu0 = [0.0; LANES];
                let mut harv = [LaneHarvest::default(); LANES];
                for (l, chain) in chunk.iter().enumerate() {
                    nu0[l] = chain.nu0;
                    harv[l] = LaneHarvest {
                        offset: chain.offset as u32,
                        stride: chain.stride as u32,
                        slots: chain
                            .members
                            .last()
                            .map(|&(slot, _)| slot as u32 + 1)
                            .unwrap_or(0),
                    };
                }
                (nu0, harv, chunk.iter().collect())
            })
            .collect()
    }
}

pub(crate) fn group_chains(modes: &[ModeSpec]) -> ChainSet {
    let mut lanes: Vec<(f64, Vec<(usize, usize)>)> = Vec::new(); // (frac, (rung, mode))
    for (idx, m) in modes.iter().enumerate() {
        let mut frac = m.nu - m.nu.floor();
        // An order within rounding of the next integer belongs on the
        // integer ladder, not on a ladder seeded just below 1.
        if frac > 1.0 - TOL_CHAIN_FRAC {
            frac = 0.0;
        }
        let rung = (m.nu - frac).round() as usize;
        match lanes.iter_mut().find(|(f, _)| (f - frac).abs() < TOL_CHAIN_FRAC) {
            Some((_, members)) => members.push((rung, idx)),
            None => lanes.push((frac, vec![(rung, idx)])),
        }
    }
    let mut out = Vec::with_capacity(lanes.len());
    let mut k_len = 0usize;
    let mut max_slots = 0usize;
    for (nu0, mut members) in lanes {
        members.sort_unstable();
        let offset = members[0].0;
        let uniform = members.windows(2).map(|w| w[1].0 - w[0].0).collect::<Vec<_>>();
        let stride = match uniform.first() {
            Some(&d) if d > 0 && uniform.iter().all(|&e| e == d) => d,
            Some(_) => 1,
            None => 1,
        };
        let slotted: Vec<(usize, usize)> = members
            .iter()
            .map(|&(rung, idx)| ((rung - offset) / stride, idx))
            .collect();
        let top_rung = members.last().unwrap().0;
        k_len = k_len.max(top_rung + 2);
        max_slots = max_slots.max(slotted.last().unwrap().0 + 1);
        out.push(LaneChain { nu0, offset, stride, members: slotted });
    }
    ChainSet { lanes: out, k_len, max_slots }
}

// ---------------------------------------------------------------------------
// Hankel coefficients.
// ---------------------------------------------------------------------------

/// Highest order that contributes at argument `x` above roundoff: beyond the
/// turning point the Bessel factor dies like an Airy tail, and 12 cube-root
/// widths plus a fixed pad push it below 1e−12 of the field scale.
pub(crate) fn evanescence_cut(x: f64) -> f64 {
    x + 12.0 * x.cbrt() + 40.0
}

/// Frequency mollifier M(λ) = exp(−(λ/Λ)²) applied to every coefficient.
/// It smooths all fronts identically, so exponent differences between fronts
/// are unaffected by it.
pub fn mollifier(lambda: f64, lambda_cut: f64) -> f64 {
    let q = lambda / lambda_cut;
    (-q * q).exp()
}

/// Order-ν Hankel coefficients f̂_n(λ) = ∫ f_n(r) J_ν(λr) r dr of the
/// source's projection onto one mode, by adaptive quadrature over the
/// mollifier support to the shared relative tolerance. The frequency
/// mollifier is *not* applied here.
pub fn hankel_coeff(
    src: &Source,
    mode: &ModeSpec,
    lambda_nodes: &[f64],
) -> Result<Vec<f64>, SpectralError> {
    src.validate(mode.theta0)?;
    if lambda_nodes.windows(2).any(|w| w[1] <= w[0]) || lambda_nodes.first().is_some_and(|&l| l <= 0.0)
    {
        return Err(SpectralError::InvalidParameter {
            name: "lambda_nodes",
            value: f64::NAN,
        });
    }
    let c_ang = src.angular_coeffs(std::slice::from_ref(mode))[0];
    let r0 = src.r0();
    let half = src.support_radius();
    let (lo, hi) = (r0 - half, r0 + half);
    lambda_nodes
        .iter()
        .map(|&lambda| {
            // One initial panel per ~10 radians of J_ν(λr) phase.
            let initial = (lambda * (hi - lo) / 10.0).ceil() as usize + 1;
            let radial = quad::integrate_adaptive(
                |r| src.radial(r) * bessel_j_cached(mode.nu, lambda * r) * r,
                lo,
                hi,
                initial,
            )?;
            Ok(c_ang * radial)
        })
        .collect()
}

/// Scalar J_ν through the ladder machinery; the public adaptive path is not
/// performance-critical, so no sequence sharing is attempted here.
fn bessel_j_cached(nu: f64, x: f64) -> f64 {
    bessel::bessel_j(nu, x).unwrap_or(0.0)
}

/// Everything the synthesis kernels need, frozen after construction: the
/// frequency nodes and weights of the composite Gauss–Legendre rule on
/// [0, Λ] and the mollified coefficient of every (mode, node) pair.
#[derive(Clone, Debug)]
pub struct CoeffTable {
    pub lambda: Vec<f64>,
    pub glw: Vec<f64>,
    /// Node-major: `coeff[q * n_modes + n]` = f̂_n(λ_q) · M(λ_q).
    pub coeff: Vec<f64>,
    pub n_modes: usize,
    pub lambda_cut: f64,
}

/// Builds the coefficient table on `panels` GL-16 panels over [0, Λ].
///
/// Per node the radial integral runs on a fixed panel rule sized to the
/// oscillation (≤ ~10 radians of phase per panel); mode ladders are shared
/// through the chain grouping, one scalar ladder per chain per radial node.
pub(crate) fn build_coeff_table(
    src: &Source,
    modes: &[ModeSpec],
    chains: &ChainSet,
    lambda_cut: f64,
    panels: usize,
) -> Result<CoeffTable, SpectralError> {
    let theta0 = modes.first().map(|m| m.theta0).unwrap_or(PI);
    src.validate(theta0)?;
    if !(lambda_cut > 0.0) {
        return Err(SpectralError::InvalidParameter { name: "lambda_cut", value: lambda_cut });
    }
    let (lambda, glw) = panel_grid(0.0, lambda_cut, panels);
    let c_ang = src.angular_coeffs(modes);
    let r0 = src.r0();
    let half = src.support_radius();
    let n_modes = modes.len();

    let rows: Vec<Vec<f64>> = lambda
        .par_iter()
        .map(|&lam| {
            let mut row = vec![0.0; n_modes];
            // Oscillation rule plus a floor of six panels: the radial bump
            // needs ~100 Gauss nodes across its support before its
            // non-analytic edges stop limiting the rule.
            let r_panels = (lam * 2.0 * half / 10.0).ceil() as usize + 6;
            let (r_nodes, r_w) = panel_grid(r0 - half, r0 + half, r_panels);
            let mut seq: Vec<f64> = Vec::new();
            let mut scratch: Vec<f64> = Vec::new();
            for (&r, &w) in r_nodes.iter().zip(&r_w) {
                let x = lam * r;
                let k_need = (evanescence_cut(x) as usize + 2).min(chains.k_len);
                let wr = w * src.radial(r) * r;
                for chain in &chains.lanes {
                    if chain.offset >= k_need {
                        continue;
                    }
                    let need = chain
                        .members
                        .iter()
                        .rev()
                        .find(|&&(slot, _)| chain.offset + slot * chain.stride < k_need)
                        .map(|&(slot, _)| chain.offset + slot * chain.stride + 1);
                    let Some(need) = need else { continue };
                    seq.resize(need, 0.0);
                    bessel::bessel_j_sequence_into(chain.nu0, x, &mut seq, &mut scratch)?;
                    for &(slot, idx) in &chain.members {
                        let rung = chain.offset + slot * chain.stride;
                        if rung >= need {
                            break;
                        }
                        row[idx] += wr * seq[rung];
                    }
                }
            }
            let m = mollifier(lam, lambda_cut);
            for (v, c) in row.iter_mut().zip(&c_ang) {
                *v *= m * c;
            }
            Ok(row)
        })
        .collect::<Result<_, SpectralError>>()?;

    let mut coeff = Vec::with_capacity(lambda.len() * n_modes);
    for row in rows {
        coeff.extend_from_slice(&row);
    }
    Ok(CoeffTable { lambda, glw, coeff, n_modes, lambda_cut })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::bessel::bessel_j;

    #[test]
    fn mode_frequencies_match_the_separation_law() {
        let d = mode_frequencies(Bc::Dirichlet, 2.0 * PI / 3.0, 4).unwrap();
        assert_eq!(d.len(), 4);
        assert!((d[0].nu - 1.5).abs() < 1e-15, "first Dirichlet order at 2π/3 is 3/2");
        let d2 = mode_frequencies(Bc::Dirichlet, PI / 2.0, 4).unwrap();
        assert!((d2[1].nu - 4.0).abs() < 1e-15, "second Dirichlet order at π/2 is 4");
        let n = mode_frequencies(Bc::Neumann, 0.9 * PI, 3).unwrap();
        assert_eq!(n[0].n, 0);
        assert_eq!(n[0].nu, 0.0, "Neumann keeps the constant mode");
        assert_eq!(n.len(), 4, "Neumann n=0..=N has N+1 modes");
        assert_eq!(n[0].angular(0.33), 1.0, "constant mode is 1 everywhere");
        assert!(mode_frequencies(Bc::Dirichlet, -1.0, 4).is_err());
    }

    #[test]
    fn modes_satisfy_the_wall_conditions() {
        let theta0 = 0.7 * PI;
        for m in mode_frequencies(Bc::Dirichlet, theta0, 32).unwrap() {
            assert_eq!(m.angular(0.0), 0.0, "Dirichlet mode must vanish at theta=0");
            assert!(
                m.angular(theta0).abs() < 64.0 * PI * f64::EPSILON * m.n as f64,
                "Dirichlet mode {} residual at theta0: {}",
                m.n,
                m.angular(theta0)
            );
        }
        for m in mode_frequencies(Bc::Neumann, theta0, 16).unwrap() {
            assert_eq!(m.angular_deriv(0.0), 0.0, "Neumann derivative must vanish at 0");
            assert!(
                m.angular_deriv(theta0).abs() < 64.0 * PI * f64::EPSILON * (m.nu * m.nu).max(1.0),
                "Neumann mode {} derivative residual at theta0",
                m.n
            );
        }
    }

    #[test]
    fn chain_grouping_shares_ladders_for_rational_angles() {
        let modes = mode_frequencies(Bc::Dirichlet, 0.7 * PI, 64).unwrap();
        let chains = group_chains(&modes);
        assert_eq!(chains.lanes.len(), 7, "0.7π = (7/10)π gives 7 residue chains");
        let mut seen = 0usize;
        for chain in &chains.lanes {
            assert_eq!(chain.stride, 10, "members sit 10 rungs apart");
            seen += chain.members.len();
            for &(slot, idx) in &chain.members {
                let rung = chain.offset + slot * chain.stride;
                let nu = chain.nu0 + rung as f64;
                assert!(
                    (nu - modes[idx].nu).abs() < 1e-9,
                    "chain rung must reproduce the mode order: {} vs {}",
                    nu,
                    modes[idx].nu
                );
            }
        }
        assert_eq!(seen, 64, "every mode must land in exactly one chain");
        assert!(chains.k_len >= 92, "ladders must reach the top order ≈ 91.4");
    }

    #[test]
    fn chain_grouping_handles_integer_and_irregular_angles() {
        // θ₀ = π/2: all orders are even integers — a single chain, stride 2.
        let modes = mode_frequencies(Bc::Dirichlet, PI / 2.0, 10).unwrap();
        let chains = group_chains(&modes);
        assert_eq!(chains.lanes.len(), 1);
        assert_eq!(chains.lanes[0].stride, 2);
        assert_eq!(chains.lanes[0].offset, 2);
        // An irrational ratio: every mode its own chain.
        let modes = mode_frequencies(Bc::Dirichlet, 1.9, 5).unwrap();
        let chains = group_chains(&modes);
        assert_eq!(chains.lanes.len(), 5, "irrational angle cannot share ladders");
    }

    #[test]
    fn ring_coefficient_is_orthogonally_pure() {
        let theta0 = 0.7 * PI;
        let modes = mode_frequencies(Bc::Dirichlet, theta0, 12).unwrap();
        let src = Source::Ring { r0: 1.0, phi: vec![0.0, 1.0], sigma: 0.05 };
        let nodes = [3.0, 11.0];
        for (i, m) in modes.iter().enumerate() {
            let c = hankel_coeff(&src, m, &nodes).unwrap();
            if i == 1 {
                assert!(c[0].abs() > 1e-4, "selected mode must carry weight");
            } else {
                assert_eq!(c, vec![0.0, 0.0], "other modes must vanish exactly");
            }
        }
    }

    #[test]
    fn narrow_mollifier_coefficient_approaches_the_point_value() {
        // As σ → 0 the mass-normalized radial coefficient tends to
        // r₀ J_ν(λ r₀) — the delta-sifting limit.
        let theta0 = 0.7 * PI;
        let modes = mode_frequencies(Bc::Dirichlet, theta0, 3).unwrap();
        let mode = &modes[2];
        let r0 = 1.0;
        let sigma = 2e-5;
        let src = Source::Ring { r0, phi: vec![0.0, 0.0, 1.0], sigma };
        let mass = quad::panel_integrate(|u| bump(u), -1.0, 1.0, 8) * SUPPORT_SIGMAS * sigma;
        for lambda in [3.0, 20.0] {
            let c = hankel_coeff(&src, mode, &[lambda]).unwrap()[0] / mass;
            let want = r0 * bessel_j(mode.nu, lambda * r0).unwrap();
            assert!(
                (c - want).abs() <= 2e-6 * want.abs().max(0.1),
                "sifting limit at lambda={lambda}: {c} vs {want}"
            );
        }
    }

    #[test]
    fn coefficient_table_matches_the_adaptive_path() {
        let theta0 = 0.7 * PI;
        let modes = mode_frequencies(Bc::Dirichlet, theta0, 12).unwrap();
        let chains = group_chains(&modes);
        let src = Source::PointLike { r0: 1.0, theta_src: 0.2 * PI, sigma: 0.03 };
        let table = build_coeff_table(&src, &modes, &chains, 40.0, 8).unwrap();
        assert_eq!(table.lambda.len(), 128);
        for &q in &[0usize, 17, 63, 127] {
            let lam = table.lambda[q];
            let m_damp = mollifier(lam, 40.0);
            for (n, mode) in modes.iter().enumerate() {
                let want = hankel_coeff(&src, mode, &[lam]).unwrap()[0] * m_damp;
                let got = table.coeff[q * table.n_modes + n];
                assert!(
                    (got - want).abs() <= 1e-8 * want.abs().max(0.01),
                    "table entry (q={q}, n={n}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn coefficient_table_is_deterministic_across_runs() {
        let theta0 = 0.7 * PI;
        let modes = mode_frequencies(Bc::Dirichlet, theta0, 20).unwrap();
        let chains = group_chains(&modes);
        let src = Source::PointLike { r0: 1.0, theta_src: 0.2 * PI, sigma: 0.04 };
        let a = build_coeff_table(&src, &modes, &chains, 60.0, 12).unwrap();
        let b = build_coeff_table(&src, &modes, &chains, 60.0, 12).unwrap();
        assert_eq!(a.coeff, b.coeff, "parallel table build must be bitwise reproducible");
    }
}
