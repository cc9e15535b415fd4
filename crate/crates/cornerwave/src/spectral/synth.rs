//! Field synthesis: turning coefficient tables into sampled waves.
//!
//! Two evaluation paths share the Bessel ladder machinery. The grid path
//! harvests every mode's radial factor per (radius, frequency) pair and is
//! used for full-sector fields, energies, and convergence probes. The
//! transect path fuses the mode sum into the ladder recurrence itself
//! (two weighted sums per ladder pass) and exists for the regularity
//! measurements, where two radial transects share their sample radii and
//! several thousand frequency nodes.

use std::io::{self, Read, Write};

use rayon::prelude::*;

use super::bessel::{self, ladder_dual_strided, LadderScratch, LANES};
use super::{
    build_coeff_table, evanescence_cut, group_chains, mode_frequencies, Bc, ChainSet, CoeffTable,
    ModeSpec, Source, SpectralError,
};
use crate::tol::TOL_TRUNCATION;

/// Sample locations for a synthesized field; vectors are tensor-product axes.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
}

impl GridSpec {
    /// Uniform grid over [0, r_max] × [0, θ₀] including both endpoints.
    pub fn regular(r_max: f64, nr: usize, theta0: f64, ntheta: usize) -> GridSpec {
        let r = (0..nr).map(|i| r_max * i as f64 / (nr - 1) as f64).collect();
        let theta = (0..ntheta)
            .map(|j| theta0 * j as f64 / (ntheta - 1) as f64)
            .collect();
        GridSpec { r, theta }
    }
}

/// A synthesized field sample u(t*, r_i, θ_j) with its truncation metadata.
#[derive(Clone, Debug)]
pub struct FieldGrid {
    pub t: f64,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    /// Row-major: `u[i * theta.len() + j]`.
    pub u: Vec<f64>,
    pub n_modes: usize,
    pub lambda_cut: f64,
    pub q_nodes: usize,
    /// Relative field change under doubling modes and quadrature on a probe
    /// subgrid, when the probe was run.
    pub probe_change: Option<f64>,
}

impl FieldGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.u[i * self.theta.len() + j]
    }

    pub fn peak(&self) -> f64 {
        self.u.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

// ---------------------------------------------------------------------------
// Radial mode amplitudes (grid path).
// ---------------------------------------------------------------------------

/// Radial amplitude of each mode on a set of radii, with time and radial
/// derivatives when requested; all fields are mode-major (`[n * nr + i]`).
pub(crate) struct RadialFields {
    pub a: Vec<f64>,
    pub at: Vec<f64>,
    pub ar: Vec<f64>,
}

/// Evaluates A_n(r_i; t) = Σ_q w_q c_{n,q} sin(λ_q t) J_ν(λ_q r_i) for every
/// listed time, sharing the Bessel harvest across times and derivative
/// kernels (∂ₜ swaps in λcos, ∂ᵣ swaps in λJ′).
pub(crate) fn radial_mode_fields(
    modes: &[ModeSpec],
    chains: &ChainSet,
    table: &CoeffTable,
    t_list: &[f64],
    radii: &[f64],
    derivs: bool,
) -> Result<Vec<RadialFields>, SpectralError> {
    let n_modes = modes.len();
    let nr = radii.len();
    let nq = table.lambda.len();

    // Frequency nodes whose whole coefficient row is negligible do no work;
    // with steep radial mollifiers that is most of the upper band.
    let mut row_peak = vec![0.0f64; nq];
    let mut global = 0.0f64;
    for q in 0..nq {
        let row = &table.coeff[q * n_modes..(q + 1) * n_modes];
        let p = row.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        row_peak[q] = p;
        global = global.max(p);
    }
    let active: Vec<usize> = (0..nq)
        .filter(|&q| row_peak[q] > 1e-16 * global)
        .collect();

    let nt = t_list.len();
    let mut sin_qt = vec![0.0f64; nt * nq];
    let mut cos_qt = vec![0.0f64; nt * nq];
    for (ti, &t) in t_list.iter().enumerate() {
        for &q in &active {
            let (s, c) = (table.lambda[q] * t).sin_cos();
            sin_qt[ti * nq + q] = s;
            cos_qt[ti * nq + q] = c;
        }
    }

    // Per-radius accumulators, filled independently (deterministic under any
    // thread count) and transposed into mode-major fields afterwards.
    let per_point: Vec<Vec<f64>> = radii
        .par_iter()
        .map(|&r| {
            let lanes = if derivs { 3 } else { 1 };
            let mut acc = vec![0.0f64; nt * lanes * n_modes];
            let mut seq: Vec<f64> = Vec::new();
            let mut scratch: Vec<f64> = Vec::new();
            let mut j_here = vec![0.0f64; n_modes];
            let mut j_up = vec![0.0f64; n_modes];
            for &q in &active {
                let lam = table.lambda[q];
                let x = lam * r;
                let k_need = ((evanescence_cut(x) as usize) + 2).min(chains.k_len);
                j_here.fill(0.0);
                j_up.fill(0.0);
                for chain in &chains.lanes {
                    if chain.offset + 1 >= k_need {
                        continue;
                    }
                    let need = chain
                        .members
                        .iter()
                        .rev()
                        .find(|&&(slot, _)| chain.offset + slot * chain.stride + 1 < k_need)
                        .map(|&(slot, _)| chain.offset + slot * chain.stride + 2);
                    let Some(need) = need else { continue };
                    seq.resize(need, 0.0);
                    bessel::bessel_j_sequence_into(chain.nu0, x, &mut seq, &mut scratch)?;
                    for &(slot, idx) in &chain.members {
                        let rung = chain.offset + slot * chain.stride;
                        if rung + 1 >= need {
                            break;
                        }
                        j_here[idx] = seq[rung];
                        j_up[idx] = seq[rung + 1];
                    }
                }
                let row = &table.coeff[q * n_modes..(q + 1) * n_modes];
                let wq = table.glw[q];
                for (ti, _) in t_list.iter().enumerate() {
                    let s = sin_qt[ti * nq + q];
                    let c = cos_qt[ti * nq + q];
                    let base = ti * lanes * n_modes;
                    if derivs {
                        for n in 0..n_modes {
                            let b = wq * row[n];
                            let j = j_here[n];
                            // J′_ν(x) = (ν/x) J_ν − J_{ν+1}; at the vertex
                            // every derivative factor vanishes for ν ≥ 0.
                            let jp = if x > 0.0 {
                                (modes[n].nu / x) * j - j_up[n]
                            } else {
                                0.0
                            };
                            acc[base + n] += b * s * j;
                            acc[base + n_modes + n] += b * lam * c * j;
                            acc[base + 2 * n_modes + n] += b * lam * s * jp;
                        }
                    } else {
                        for n in 0..n_modes {
                            acc[base + n] += wq * row[n] * s * j_here[n];
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_, SpectralError>>()?;

    let mut out = Vec::with_capacity(nt);
    for ti in 0..nt {
        let lanes = if derivs { 3 } else { 1 };
        let mut f = RadialFields {
            a: vec![0.0; n_modes * nr],
            at: if derivs { vec![0.0; n_modes * nr] } else { Vec::new() },
            ar: if derivs { vec![0.0; n_modes * nr] } else { Vec::new() },
        };
        for (i, acc) in per_point.iter().enumerate() {
            let base = ti * lanes * n_modes;
            for n in 0..n_modes {
                f.a[n * nr + i] = acc[base + n];
            }
            if derivs {
                for n in 0..n_modes {
                    f.at[n * nr + i] = acc[base + n_modes + n];
                    f.ar[n * nr + i] = acc[base + 2 * n_modes + n];
                }
            }
        }
        out.push(f);
    }
    Ok(out)
}

/// Synthesizes u(t, r_i, θ_j) from an explicit coefficient table. The table's
/// mollifier and weights are applied as stored; `modes` must match its width.
pub fn synthesize_grid(
    modes: &[ModeSpec],
    table: &CoeffTable,
    t: f64,
    grid: &GridSpec,
) -> Result<FieldGrid, SpectralError> {
    let chains = group_chains(modes);
    synthesize_grid_with(modes, &chains, table, t, grid)
}

fn synthesize_grid_with(
    modes: &[ModeSpec],
    chains: &ChainSet,
    table: &CoeffTable,
    t: f64,
    grid: &GridSpec,
) -> Result<FieldGrid, SpectralError> {
    let fields = radial_mode_fields(modes, chains, table, &[t], &grid.r, false)?;
    let a = &fields[0].a;
    let (nr, ntheta) = (grid.r.len(), grid.theta.len());
    let mut theta_tab = vec![0.0f64; modes.len() * ntheta];
    for (n, m) in modes.iter().enumerate() {
        for (j, &theta) in grid.theta.iter().enumerate() {
            theta_tab[n * ntheta + j] = m.angular(theta);
        }
    }
    let mut u = vec![0.0f64; nr * ntheta];
    for i in 0..nr {
        let row = &mut u[i * ntheta..(i + 1) * ntheta];
        for n in 0..modes.len() {
            let v = a[n * nr + i];
            if v == 0.0 {
                continue;
            }
            let th = &theta_tab[n * ntheta..(n + 1) * ntheta];
            for (uj, &tj) in row.iter_mut().zip(th) {
                *uj += v * tj;
            }
        }
    }
    Ok(FieldGrid {
        t,
        r: grid.r.clone(),
        theta: grid.theta.clone(),
        u,
        n_modes: modes.len(),
        lambda_cut: table.lambda_cut,
        q_nodes: table.lambda.len(),
        probe_change: None,
    })
}

// ---------------------------------------------------------------------------
// Public propagation entry points.
// ---------------------------------------------------------------------------

fn validate_budgets(n_modes: usize, lambda_cut: f64, q_nodes: usize) -> Result<usize, SpectralError> {
    if n_modes == 0 {
        return Err(SpectralError::InvalidParameter { name: "n_modes", value: 0.0 });
    }
    if !(lambda_cut > 0.0) {
        return Err(SpectralError::InvalidParameter { name: "lambda_cut", value: lambda_cut });
    }
    if q_nodes < 16 {
        return Err(SpectralError::InvalidParameter { name: "q_nodes", value: q_nodes as f64 });
    }
    Ok(q_nodes.div_ceil(16))
}

/// Propagates the source to time `t` and samples the wave on `grid`.
///
/// With `probe` set, modes and quadrature are doubled on a small interior
/// subgrid; a relative change above the truncation tolerance is an error,
/// otherwise it is recorded in the returned metadata.
#[allow(clippy::too_many_arguments)]
pub fn propagate(
    src: &Source,
    bc: Bc,
    theta0: f64,
    t: f64,
    grid: &GridSpec,
    n_modes: usize,
    lambda_cut: f64,
    q_nodes: usize,
    probe: bool,
) -> Result<FieldGrid, SpectralError> {
    if !(t > 0.0) {
        return Err(SpectralError::InvalidParameter { name: "t", value: t });
    }
    if grid.r.is_empty() || grid.theta.is_empty() {
        return Err(SpectralError::InvalidParameter { name: "grid", value: 0.0 });
    }
    src.validate(theta0)?;
    let panels = validate_budgets(n_modes, lambda_cut, q_nodes)?;
    let modes = mode_frequencies(bc, theta0, n_modes)?;
    let chains = group_chains(&modes);
    let table = build_coeff_table(src, &modes, &chains, lambda_cut, panels)?;
    let mut field = synthesize_grid_with(&modes, &chains, &table, t, grid)?;

    if probe {
        let pick = |axis: &[f64]| -> Vec<f64> {
            if axis.len() < 8 {
                axis.to_vec()
            } else {
                (0..4).map(|k| axis[(2 * k + 1) * axis.len() / 8]).collect()
            }
        };
        let sub = GridSpec { r: pick(&grid.r), theta: pick(&grid.theta) };
        let coarse = synthesize_grid_with(&modes, &chains, &table, t, &sub)?;
        let modes2 = mode_frequencies(bc, theta0, 2 * n_modes)?;
        let chains2 = group_chains(&modes2);
        let table2 = build_coeff_table(src, &modes2, &chains2, lambda_cut, 2 * panels)?;
        let fine = synthesize_grid_with(&modes2, &chains2, &table2, t, &sub)?;
        let scale = coarse.peak().max(fine.peak());
        let diff = coarse
            .u
            .iter()
            .zip(&fine.u)
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        let change = if scale > 0.0 { diff / scale } else { 0.0 };
        if change > TOL_TRUNCATION {
            return Err(SpectralError::Truncation { probe_change: change });
        }
        field.probe_change = Some(change);
    }
    Ok(field)
}

/// Total wave energy ½∬(u_t² + u_r² + (u_θ/r)²) r dr dθ at each listed time,
/// evaluated by Simpson quadrature on an internal grid sized from the
/// table's live spectral content. Analytically the value is t-independent;
/// the grid evaluation cross-checks the synthesis machinery end to end.
pub fn energy(
    src: &Source,
    bc: Bc,
    theta0: f64,
    t_list: &[f64],
    n_modes: usize,
    lambda_cut: f64,
    q_nodes: usize,
) -> Result<Vec<(f64, f64)>, SpectralError> {
    if t_list.is_empty() || t_list.iter().any(|&t| !(t > 0.0)) {
        return Err(SpectralError::InvalidParameter { name: "t_list", value: f64::NAN });
    }
    src.validate(theta0)?;
    let panels = validate_budgets(n_modes, lambda_cut, q_nodes)?;
    let modes = mode_frequencies(bc, theta0, n_modes)?;
    let chains = group_chains(&modes);
    let table = build_coeff_table(src, &modes, &chains, lambda_cut, panels)?;

    // Live spectral reach decides the radial resolution: the energy density
    // oscillates at up to twice the top surviving frequency.
    let n_width = table.n_modes;
    let mut lam_hi: f64 = 0.0;
    let mut global = 0.0f64;
    for q in 0..table.lambda.len() {
        let row = &table.coeff[q * n_width..(q + 1) * n_width];
        let p = row.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        global = global.max(p);
        if p > 1e-12 * global {
            lam_hi = table.lambda[q];
        }
    }
    let lam_hi = lam_hi.max(8.0);
    let t_max = t_list.iter().fold(0.0f64, |m, &t| m.max(t));
    let r_max = t_max + src.r0() + src.support_radius() + 0.05;
    let h_target = 0.45 / (2.0 * lam_hi);
    let nr = ((r_max / h_target).ceil() as usize | 1).clamp(257, 8193);
    let nu_max = modes.last().map(|m| m.nu).unwrap_or(1.0);
    let nth = ((theta0 * 2.0 * nu_max / 0.45).ceil() as usize | 1).clamp(65, 4097);
    let r: Vec<f64> = (0..nr).map(|i| r_max * i as f64 / (nr - 1) as f64).collect();
    let theta: Vec<f64> = (0..nth).map(|j| theta0 * j as f64 / (nth - 1) as f64).collect();
    let wr = simpson_weights(nr, r[1] - r[0]);
    let wth = simpson_weights(nth, theta[1] - theta[0]);

    let fields = radial_mode_fields(&modes, &chains, &table, t_list, &r, true)?;

    let mut theta_tab = vec![0.0f64; modes.len() * nth];
    let mut dtheta_tab = vec![0.0f64; modes.len() * nth];
    for (n, m) in modes.iter().enumerate() {
        for (j, &th) in theta.iter().enumerate() {
            theta_tab[n * nth + j] = m.angular(th);
            dtheta_tab[n * nth + j] = m.angular_deriv(th);
        }
    }

    let mut out = Vec::with_capacity(t_list.len());
    for (ti, &t) in t_list.iter().enumerate() {
        let f = &fields[ti];
        // Row energies in parallel over radii, summed in index order.
        let rows: Vec<f64> = (0..nr)
            .into_par_iter()
            .map(|i| {
                let mut ut = vec![0.0f64; nth];
                let mut ur = vec![0.0f64; nth];
                let mut uth = vec![0.0f64; nth];
                for n in 0..modes.len() {
                    let (cat, car, ca) = (f.at[n * nr + i], f.ar[n * nr + i], f.a[n * nr + i]);
                    if cat == 0.0 && car == 0.0 && ca == 0.0 {
                        continue;
                    }
                    let th = &theta_tab[n * nth..(n + 1) * nth];
                    let dth = &dtheta_tab[n * nth..(n + 1) * nth];
                    for j in 0..nth {
                        ut[j] += cat * th[j];
                        ur[j] += car * th[j];
                        uth[j] += ca * dth[j];
                    }
                }
                let ri = r[i];
                let mut acc = 0.0;
                for j in 0..nth {
                    let mut dens = (ut[j] * ut[j] + ur[j] * ur[j]) * ri;
                    // (u_θ/r)² r → u_θ²/r; at the vertex u_θ = O(r^ν) makes
                    // the limit zero for every sector mode.
                    if ri > 0.0 {
                        dens += uth[j] * uth[j] / ri;
                    }
                    acc += wth[j] * dens;
                }
                wr[i] * acc
            })
            .collect();
        let total: f64 = 0.5 * rows.iter().sum::<f64>();
        out.push((t, total));
    }
    Ok(out)
}

/// Angular projection of a sampled field onto one mode: a_n(r_i) =
/// ∫ u(r_i, θ) Θ_n(θ) dθ / ‖Θ_n‖², by Simpson quadrature on the field's own
/// θ grid (which must be uniform with an odd point count).
pub fn project(field: &FieldGrid, mode: &ModeSpec) -> Result<Vec<f64>, SpectralError> {
    let nth = field.theta.len();
    if nth < 3 || nth % 2 == 0 {
        return Err(SpectralError::InvalidParameter { name: "ntheta", value: nth as f64 });
    }
    let h = field.theta[1] - field.theta[0];
    let w = simpson_weights(nth, h);
    let th: Vec<f64> = field.theta.iter().map(|&t| mode.angular(t)).collect();
    Ok((0..field.r.len())
        .map(|i| {
            let row = &field.u[i * nth..(i + 1) * nth];
            let s: f64 = row.iter().zip(&w).zip(&th).map(|((&u, &w), &t)| w * u * t).sum();
            s / mode.norm_sq()
        })
        .collect())
}

fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson rule needs an odd point count >= 3");
    let mut w = vec![0.0; n];
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = if i == 0 || i == n - 1 {
            h / 3.0
        } else if i % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
    }
    w
}

// ---------------------------------------------------------------------------
// Transect synthesis (two weighted sums per ladder pass).
// ---------------------------------------------------------------------------

/// Evaluates the field at time `t` on two radial transects that share their
/// sample radii: points (r_i, θ_a) and (r_i, θ_b). Returns the two sample
/// vectors. Sharing the radii lets one ladder pass per (radius, frequency)
/// pair serve both transects.
pub(crate) fn synthesize_radial_pair(
    modes: &[ModeSpec],
    chains: &ChainSet,
    table: &CoeffTable,
    t: f64,
    radii: &[f64],
    theta_a: f64,
    theta_b: f64,
) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let n_modes = modes.len();
    let nq = table.lambda.len();
    let nr = radii.len();
    let th_a: Vec<f64> = modes.iter().map(|m| m.angular(theta_a)).collect();
    let th_b: Vec<f64> = modes.iter().map(|m| m.angular(theta_b)).collect();

    let mut row_peak = vec![0.0f64; nq];
    let mut global = 0.0f64;
    for q in 0..nq {
        let row = &table.coeff[q * n_modes..(q + 1) * n_modes];
        let p = row.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        row_peak[q] = p;
        global = global.max(p);
    }
    let active: Vec<usize> = (0..nq).filter(|&q| row_peak[q] > 1e-16 * global).collect();

    let batches = chains.lane_batches();
    let slots_max = chains.max_slots;
    const BLOCK: usize = 64;

    let partials: Vec<(Vec<f64>, Vec<f64>)> = active
        .par_chunks(BLOCK)
        .map(|block| {
            let mut ua = vec![0.0f64; nr];
            let mut ub = vec![0.0f64; nr];
            let mut wa = vec![0.0f64; block.len() * slots_max * LANES];
            let mut wb = vec![0.0f64; block.len() * slots_max * LANES];
            let mut scratch = LadderScratch::default();
            for (nu0, harv, lanes) in &batches {
                wa.fill(0.0);
                wb.fill(0.0);
                let row_len = slots_max * LANES;
                for (bi, &q) in block.iter().enumerate() {
                    let lam = table.lambda[q];
                    let base = table.glw[q] * (lam * t).sin();
                    let row = &table.coeff[q * n_modes..(q + 1) * n_modes];
                    let wa_row = &mut wa[bi * row_len..(bi + 1) * row_len];
                    let wb_row = &mut wb[bi * row_len..(bi + 1) * row_len];
                    for (l, chain) in lanes.iter().enumerate() {
                        for &(slot, idx) in &chain.members {
                            let c = base * row[idx];
                            wa_row[slot * LANES + l] = c * th_a[idx];
                            wb_row[slot * LANES + l] = c * th_b[idx];
                        }
                    }
                }
                for (bi, &q) in block.iter().enumerate() {
                    let lam = table.lambda[q];
                    let wa_row = &wa[bi * row_len..(bi + 1) * row_len];
                    let wb_row = &wb[bi * row_len..(bi + 1) * row_len];
                    for (pi, &r) in radii.iter().enumerate() {
                        let x = lam * r;
                        let k_len = ((evanescence_cut(x) as usize) + 1).min(chains.k_len);
                        let (da, db) =
                            ladder_dual_strided(nu0, x, k_len, harv, wa_row, wb_row, &mut scratch)?;
                        ua[pi] += da.iter().sum::<f64>();
                        ub[pi] += db.iter().sum::<f64>();
                    }
                }
            }
            Ok((ua, ub))
        })
        .collect::<Result<_, SpectralError>>()?;

    let mut ua = vec![0.0f64; nr];
    let mut ub = vec![0.0f64; nr];
    for (pa, pb) in partials {
        for i in 0..nr {
            ua[i] += pa[i];
            ub[i] += pb[i];
        }
    }
    Ok((ua, ub))
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

const CWLF_MAGIC: &[u8; 4] = b"CWLF";
const CWLF_VERSION: u32 = 1;

/// Writes the binary column format: magic "CWLF", version, grid dimensions,
/// then t, the r axis, the θ axis, and the row-major samples as f64 LE.
pub fn write_cwlf<W: Write>(field: &FieldGrid, w: &mut W) -> io::Result<()> {
    w.write_all(CWLF_MAGIC)?;
    w.write_all(&CWLF_VERSION.to_le_bytes())?;
    w.write_all(&(field.r.len() as u32).to_le_bytes())?;
    w.write_all(&(field.theta.len() as u32).to_le_bytes())?;
    w.write_all(&field.t.to_le_bytes())?;
    for &v in field.r.iter().chain(&field.theta).chain(&field.u) {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_cwlf<R: Read>(r: &mut R) -> io::Result<FieldGrid> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CWLF_MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "not a CWLF field file"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != CWLF_VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unsupported CWLF version {version}"),
        ));
    }
    r.read_exact(&mut b4)?;
    let nr = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let nth = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    let mut next = || -> io::Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let t = next()?;
    let rs = (0..nr).map(|_| next()).collect::<io::Result<Vec<_>>>()?;
    let ths = (0..nth).map(|_| next()).collect::<io::Result<Vec<_>>>()?;
    let u = (0..nr * nth).map(|_| next()).collect::<io::Result<Vec<_>>>()?;
    Ok(FieldGrid {
        t,
        r: rs,
        theta: ths,
        u,
        n_modes: 0,
        lambda_cut: 0.0,
        q_nodes: 0,
        probe_change: None,
    })
}

/// Plain-text companion: one `r,theta,u` row per sample.
pub fn write_field_csv<W: Write>(field: &FieldGrid, w: &mut W) -> io::Result<()> {
    writeln!(w, "r,theta,u")?;
    let nth = field.theta.len();
    for (i, &r) in field.r.iter().enumerate() {
        for (j, &th) in field.theta.iter().enumerate() {
            writeln!(w, "{},{},{}", r, th, field.u[i * nth + j])?;
        }
    }
    Ok(())
}
