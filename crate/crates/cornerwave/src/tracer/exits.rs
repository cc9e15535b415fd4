//! Geometric exit law on arc links and the diffracted fan.
//!
//! An outgoing direction at a corner is *geometric* when it is connected to
//! the incoming one by a broken geodesic of total length π in the link.  On
//! an arc of length θ₀ that is an unfolding statement: the exits are the
//! triangle-wave folds of z_in ± π into [0, θ₀].  Every other direction in
//! the link is a *diffractive* continuation; the fan samples them uniformly
//! while conserving τ and the axial dual exactly.

use crate::geometry::Domain;
use crate::hamiltonian::{corner_hyperbolic_data, Covector, PhasePoint};
use crate::tol;
use crate::vec2;

use super::link::Side;
use super::{lift_entry, TracerError};

/// Triangle-wave fold of the real line into [0, theta0] with period
/// 2·theta0 (the reflection group of the interval).
pub fn fold(theta0: f64, s: f64) -> f64 {
    let m = s.rem_euclid(2.0 * theta0);
    if m <= theta0 {
        m
    } else {
        2.0 * theta0 - m
    }
}

/// One geometric exit on an arc link.
#[derive(Debug, Clone, Copy)]
pub struct LinkExit {
    pub z: f64,
    /// Transverse branch that reaches this exit.  When both branches fold to
    /// the same point the merged exit carries `Side::Plus`.
    pub side: Side,
    /// Exit lies on the link boundary: the outgoing ray grazes a wall.
    pub grazing: bool,
}

/// Geometric exits for entry `z_in` on an arc link of length `theta0`:
/// `{fold(z_in + π), fold(z_in - π)}` with duplicates merged and endpoint
/// hits flagged as grazing.
pub fn geometric_exits(theta0: f64, z_in: f64) -> Vec<LinkExit> {
    let mk = |side: Side| {
        let z = fold(theta0, z_in + side.signum() * std::f64::consts::PI);
        LinkExit {
            z,
            side,
            grazing: z < tol::TOL_GEO || z > theta0 - tol::TOL_GEO,
        }
    };
    let plus = mk(Side::Plus);
    let minus = mk(Side::Minus);
    if (plus.z - minus.z).abs() <= tol::TOL_GEO {
        vec![plus]
    } else if plus.z <= minus.z {
        vec![plus, minus]
    } else {
        vec![minus, plus]
    }
}

/// Result of continuing a path geometrically through a corner.
#[derive(Debug, Clone)]
pub enum Continuation {
    /// Outgoing phase point leaving the apex radially along the exit.
    Outgoing(PhasePoint),
    /// The chosen branch exits along a wall; continuation is glancing and
    /// the caller should stop.
    Grazing { surface: u32 },
}

/// Phase point leaving the corner apex radially at link coordinate `z`,
/// conserving τ and the axial dual of `incoming` bitwise.
fn outgoing_point(
    d: &Domain,
    corner_id: u32,
    incoming: &PhasePoint,
    z: f64,
) -> Result<PhasePoint, TracerError> {
    let chart = d.blowup_chart(corner_id)?;
    let data = corner_hyperbolic_data(incoming, tol::TOL_CLASS)?;
    let dir = vec2::dir(chart.global_angle(z));
    // Outgoing radial momentum: |ξ_plane| = μ|τ|, pointing away from the
    // apex when τ > 0 (velocity = ξ/τ).
    let mag = data.mu * incoming.tau.abs() * f64::from(data.sgn_tau);
    Ok(PhasePoint {
        base: incoming.base.clone(),
        t: incoming.t,
        tau: incoming.tau,
        xi: Covector {
            xy: vec2::scale(dir, mag),
            axial: incoming.xi.axial,
        },
    })
}

/// Geometric continuation of `incoming` through the corner on the chosen
/// transverse branch.
pub fn geometric_continuation(
    d: &Domain,
    corner_id: u32,
    incoming: &PhasePoint,
    side: Side,
) -> Result<Continuation, TracerError> {
    let chart = d.blowup_chart(corner_id)?;
    let entry = lift_entry(d, corner_id, incoming)?;
    let z_out = fold(chart.theta0, entry.state.z + side.signum() * std::f64::consts::PI);
    if z_out < tol::TOL_GEO || z_out > chart.theta0 - tol::TOL_GEO {
        let corner = d.corner(corner_id).expect("chart implies corner exists");
        let surface = if z_out < tol::TOL_GEO {
            corner.adjacent_walls[0]
        } else {
            *corner.adjacent_walls.last().expect("corner has walls")
        };
        return Ok(Continuation::Grazing { surface });
    }
    Ok(Continuation::Outgoing(outgoing_point(d, corner_id, incoming, z_out)?))
}

/// Tag attached to each fan member.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FanTag {
    Geometric,
    Diffractive,
    GlancingExit,
}

impl std::fmt::Display for FanTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FanTag::Geometric => "Geometric",
            FanTag::Diffractive => "Diffractive",
            FanTag::GlancingExit => "GlancingExit",
        })
    }
}

/// One outgoing direction of a diffracted fan.
#[derive(Debug, Clone)]
pub struct FanMember {
    pub z_out: f64,
    /// Outgoing radial fiber momentum (+μ).
    pub xi_hat: f64,
    /// Transverse fiber momentum (0 for radial exits).
    pub zeta_hat: f64,
    pub eta_hat: Option<f64>,
    pub tag: FanTag,
    pub state: PhasePoint,
}

/// The family of outgoing rays at a corner: uniform midpoint samples over
/// the link plus the exact geometric exits.
#[derive(Debug, Clone)]
pub struct DiffractionFan {
    pub corner_id: u32,
    pub incoming: PhasePoint,
    pub members: Vec<FanMember>,
    /// Exact link coordinates of the geometric exit set.
    pub exits: Vec<LinkExit>,
}

/// Build the diffracted fan at a corner: `n` midpoint-sampled outgoing
/// directions z_k = θ₀(k+½)/n tagged `Diffractive` (or `Geometric` when one
/// happens to coincide with an exit), followed by the exact geometric exits
/// that no sample covered.  Refining `n` never changes the set of
/// `Geometric`-tagged directions.
pub fn diffracted_fan(
    d: &Domain,
    corner_id: u32,
    incoming: &PhasePoint,
    n: usize,
) -> Result<DiffractionFan, TracerError> {
    if n == 0 {
        return Err(TracerError::Integrator("fan needs at least one sample".into()));
    }
    let chart = d.blowup_chart(corner_id)?;
    let data = corner_hyperbolic_data(incoming, tol::TOL_CLASS)?;
    let entry = lift_entry(d, corner_id, incoming)?;
    let exits = geometric_exits(chart.theta0, entry.state.z);

    let tag_of = |z: f64| -> Option<FanTag> {
        exits.iter().find(|e| (e.z - z).abs() <= tol::TOL_GEO).map(|e| {
            if e.grazing {
                FanTag::GlancingExit
            } else {
                FanTag::Geometric
            }
        })
    };

    let mut members = Vec::with_capacity(n + exits.len());
    let mut covered = vec![false; exits.len()];
    for k in 0..n {
        let z = chart.theta0 * (k as f64 + 0.5) / n as f64;
        let tag = match tag_of(z) {
            Some(t) => {
                for (i, e) in exits.iter().enumerate() {
                    if (e.z - z).abs() <= tol::TOL_GEO {
                        covered[i] = true;
                    }
                }
                t
            }
            None => FanTag::Diffractive,
        };
        members.push(FanMember {
            z_out: z,
            xi_hat: data.mu,
            zeta_hat: 0.0,
            eta_hat: data.eta_hat,
            tag,
            state: outgoing_point(d, corner_id, incoming, z)?,
        });
    }
    for (i, e) in exits.iter().enumerate() {
        if covered[i] {
            continue;
        }
        members.push(FanMember {
            z_out: e.z,
            xi_hat: data.mu,
            zeta_hat: 0.0,
            eta_hat: data.eta_hat,
            tag: if e.grazing { FanTag::GlancingExit } else { FanTag::Geometric },
            state: outgoing_point(d, corner_id, incoming, e.z)?,
        });
    }

    Ok(DiffractionFan {
        corner_id,
        incoming: incoming.clone(),
        members,
        exits,
    })
}
