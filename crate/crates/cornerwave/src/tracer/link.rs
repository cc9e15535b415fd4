//! Rescaled flow in the link fiber over a corner.
//!
//! In the hatted coordinates (z, ξ̂, ζ̂) on an arc link of length θ₀ the flow
//! is
//!
//! ```text
//!     dz/ds = 2ζ̂,    dξ̂/ds = 2ζ̂²,    dζ̂/ds = -2ξ̂ζ̂,
//! ```
//!
//! with specular reflection ζ̂ → -ζ̂ at the link endpoints.  It conserves
//! ξ̂² + ζ̂² = μ² and runs from the incoming radial point (ξ̂ = -μ, ζ̂ = 0) to
//! the outgoing one (ξ̂ = +μ, ζ̂ = 0).  Both radial points are equilibria, so
//! a trajectory is launched from ξ̂ = -μ(1-ε) and stopped at the mirror value
//! ξ̂ = +μ(1-ε); the total arc length ∫|dz| then tends to π as ε → 0, at rate
//! 2·arccos(1-ε) ≈ 2√(2ε), which the caller can extrapolate away.

use crate::geometry::Link;
use crate::hamiltonian::LinkState;
use crate::tol;

use super::TracerError;

/// One recorded point of a link trajectory.
#[derive(Debug, Clone, Copy)]
pub struct LinkSample {
    /// Flow parameter.
    pub s: f64,
    pub z: f64,
    pub xi_hat: f64,
    pub zeta_hat: f64,
}

/// Result of integrating the link flow across the fiber.
#[derive(Debug, Clone)]
pub struct LinkTrajectory {
    /// Strided samples along the flow (always includes entry and exit).
    pub samples: Vec<LinkSample>,
    /// Total link arc length traversed, ∫|dz| counting reflections.
    pub arc_length: f64,
    /// Number of specular reflections at the link endpoints.
    pub reflections: u32,
    pub entry: LinkState,
    pub exit: LinkState,
    /// Maximum observed drift of the conserved quantity ξ̂² + ζ̂².
    pub max_invariant_drift: f64,
}

/// Which transverse branch to take off a radial point: `Plus` is ζ̂ > 0
/// (z increasing), `Minus` is ζ̂ < 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn signum(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// Perturb an incoming radial link state (ξ̂ = -μ, ζ̂ = 0) off its
/// equilibrium: ξ̂ = -μ(1-eps) with ζ̂ on the requested side, preserving
/// ξ̂² + ζ̂² = μ².
pub fn kick_entry(entry: &LinkState, side: Side, eps: f64) -> Result<LinkState, TracerError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TracerError::Integrator(format!(
            "kick size must lie in (0, 1), got {eps}"
        )));
    }
    let mu = entry.mu();
    if entry.zeta_hat.abs() > tol::TOL_CLASS || (entry.xi_hat + mu).abs() > tol::TOL_CLASS {
        return Err(TracerError::Integrator(format!(
            "kick_entry expects an incoming radial state, got xi_hat = {}, zeta_hat = {}",
            entry.xi_hat, entry.zeta_hat
        )));
    }
    let xi = -mu * (1.0 - eps);
    let zeta = side.signum() * mu * (eps * (2.0 - eps)).sqrt();
    Ok(LinkState {
        z: entry.z,
        xi_hat: xi,
        zeta_hat: zeta,
        eta_hat: entry.eta_hat,
        sgn_tau: entry.sgn_tau,
    })
}

/// Right-hand side of the link system.
#[inline]
fn rhs(y: [f64; 3]) -> [f64; 3] {
    let [_, xi, zeta] = y;
    [2.0 * zeta, 2.0 * zeta * zeta, -2.0 * xi * zeta]
}

/// One classical fourth-order step of size `h`.
#[inline]
fn rk4_step(y: [f64; 3], h: f64) -> [f64; 3] {
    let k1 = rhs(y);
    let k2 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
    let k3 = rhs(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
    let k4 = rhs(std::array::from_fn(|i| y[i] + h * k3[i]));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

const MAX_LINK_STEPS: u64 = 20_000_000;
const SAMPLE_STRIDE: u64 = 8;
const MAX_SAMPLES: usize = 1 << 16;

/// Integrate the link flow from `entry` until ξ̂ reaches the outgoing radial
/// point within the entry's own deficit (the stop is mirror-symmetric to the
/// start, which makes the arc-length error an even function amenable to
/// extrapolation).  `step` is the flow-parameter step size; `tol::LINK_STEP`
/// is a good default.
pub fn egbb_link_flow(
    link: &Link,
    entry: &LinkState,
    step: f64,
) -> Result<LinkTrajectory, TracerError> {
    let theta0 = match link {
        Link::Arc { length } => *length,
        Link::SphericalOrthantPolygon { .. } => {
            return Err(TracerError::Integrator(
                "spherical links have no scalar coordinate; use the billiard flow".into(),
            ))
        }
    };
    if !(step > 0.0) {
        return Err(TracerError::Integrator(format!("step must be positive, got {step}")));
    }
    let mu = entry.mu();
    if mu <= 0.0 {
        return Err(TracerError::Integrator("entry has no fiber radius (mu = 0)".into()));
    }
    if entry.zeta_hat == 0.0 {
        return Err(TracerError::Integrator(
            "entry is a radial equilibrium; kick it off first (kick_entry)".into(),
        ));
    }
    if !(0.0..=theta0).contains(&entry.z) {
        return Err(TracerError::Integrator(format!(
            "entry z = {} outside link [0, {theta0}]",
            entry.z
        )));
    }

    // Mirror-symmetric stop value.
    let xi_stop = -entry.xi_hat;
    if entry.xi_hat >= xi_stop {
        return Err(TracerError::Integrator(format!(
            "entry xi_hat = {} is not below its mirror stop value",
            entry.xi_hat
        )));
    }
    let mu_sq = entry.xi_hat * entry.xi_hat + entry.zeta_hat * entry.zeta_hat;

    let mut y = [entry.z, entry.xi_hat, entry.zeta_hat];
    let mut s = 0.0f64;
    let mut arc_length = 0.0f64;
    let mut reflections = 0u32;
    let mut drift = 0.0f64;
    let mut samples = vec![LinkSample { s, z: y[0], xi_hat: y[1], zeta_hat: y[2] }];
    let mut stride = SAMPLE_STRIDE;

    for n in 0..MAX_LINK_STEPS {
        let y_new = rk4_step(y, step);

        // Fraction of the step at which an event occurs, if any.  ξ̂ is
        // nondecreasing and z is monotone between reflections, so bisection
        // on the step fraction resolves both event types.
        let hit_stop = y_new[1] >= xi_stop;
        let boundary = if y_new[0] < 0.0 {
            Some(0.0)
        } else if y_new[0] > theta0 {
            Some(theta0)
        } else {
            None
        };

        if hit_stop || boundary.is_some() {
            let locate = |target: f64, coord: usize| -> f64 {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let ym = rk4_step(y, step * mid);
                    // Both z and ξ̂ increase or decrease monotonically toward
                    // their targets within one step.
                    let passed = if coord == 1 {
                        ym[1] >= target
                    } else if target == 0.0 {
                        ym[0] <= 0.0
                    } else {
                        ym[0] >= target
                    };
                    if passed {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            };
            let a_stop = if hit_stop { locate(xi_stop, 1) } else { f64::INFINITY };
            let a_bdry = match boundary {
                Some(b) => locate(b, 0),
                None => f64::INFINITY,
            };
            if a_stop <= a_bdry {
                let ye = rk4_step(y, step * a_stop);
                arc_length += (ye[0] - y[0]).abs();
                s += step * a_stop;
                let exit = LinkState {
                    z: ye[0].clamp(0.0, theta0),
                    xi_hat: ye[1],
                    zeta_hat: ye[2],
                    eta_hat: entry.eta_hat,
                    sgn_tau: entry.sgn_tau,
                };
                samples.push(LinkSample { s, z: exit.z, xi_hat: exit.xi_hat, zeta_hat: exit.zeta_hat });
                return Ok(LinkTrajectory {
                    samples,
                    arc_length,
                    reflections,
                    entry: entry.clone(),
                    exit,
                    max_invariant_drift: drift,
                });
            }
            // Reflection at a link endpoint.
            let b = boundary.expect("boundary event selected");
            let ye = rk4_step(y, step * a_bdry);
            arc_length += (ye[0] - y[0]).abs();
            s += step * a_bdry;
            y = [b, ye[1], -ye[2]];
            reflections += 1;
            if reflections > 10_000 {
                return Err(TracerError::Integrator(
                    "reflection cap exceeded in link flow".into(),
                ));
            }
            continue;
        }

        arc_length += (y_new[0] - y[0]).abs();
        s += step;
        y = y_new;
        drift = drift.max((y[1] * y[1] + y[2] * y[2] - mu_sq).abs());
        if n % stride == 0 {
            if samples.len() >= MAX_SAMPLES {
                // Thin deterministically rather than grow without bound.
                let mut i = 0;
                samples.retain(|_| {
                    i += 1;
                    i % 2 == 1
                });
                stride *= 2;
            }
            samples.push(LinkSample { s, z: y[0], xi_hat: y[1], zeta_hat: y[2] });
        }
    }
    Err(TracerError::Integrator(format!(
        "link flow did not reach the outgoing radial point in {MAX_LINK_STEPS} steps"
    )))
}

/// Arc length of the flow started `eps` off the incoming radial point at
/// `z_in`, extrapolated over the pair {eps, eps/4}: the leading √ε deficit of
/// both the start and the mirror-symmetric stop cancels, leaving O(ε^{3/2}).
pub fn link_sweep_extrapolated(
    link: &Link,
    entry: &LinkState,
    side: Side,
    eps: f64,
    step: f64,
) -> Result<(f64, [f64; 2]), TracerError> {
    let coarse = egbb_link_flow(link, &kick_entry(entry, side, eps)?, step)?;
    let fine = egbb_link_flow(link, &kick_entry(entry, side, eps / 4.0)?, step)?;
    Ok((
        2.0 * fine.arc_length - coarse.arc_length,
        [coarse.arc_length, fine.arc_length],
    ))
}
