//! Ray tracing through corner domains.
//!
//! Interior transport is exact (straight segments at unit speed), walls
//! reflect specularly, and corners are handled through the blow-up lift:
//! the incoming ray enters the link fiber, the rescaled flow carries it a
//! total link length of π, and the outgoing ray leaves along a geometric
//! exit direction or — for the diffractive continuation — anywhere in the
//! link.  Tangency is never resolved by guessing: a glancing reflection or a
//! glancing corner stops the trace.
//!
//! The submodules split the corner machinery by link type: [`link`] holds
//! the scalar flow on arc links, [`exits`] the unfolding law and the
//! diffracted fan, [`orthant`] the spherical billiard used for
//! codimension-three links.

pub mod exits;
pub mod link;
pub mod orthant;

pub use exits::{DiffractionFan, FanMember, FanTag, LinkExit};
pub use link::{egbb_link_flow, kick_entry, LinkSample, LinkTrajectory, Side};

use crate::geometry::{Domain, GeometryError, Point, Wall};
use crate::hamiltonian::{
    char_residual, corner_hyperbolic_data, HamiltonianError, LinkState, PhasePoint,
};
use crate::tol;
use crate::vec2::{self, V2};

#[derive(Debug, thiserror::Error)]
pub enum TracerError {
    #[error("phase point off the characteristic set (relative residual {residual:.3e})")]
    OffCharacteristic { residual: f64 },
    #[error("cannot resolve next event near t = {t} (step underflow)")]
    StepSizeUnderflow { t: f64 },
    #[error("reflection at hypersurface {surface} is glancing (|normal|/|xi| = {ratio:.3e})")]
    GlancingReflect { surface: u32, ratio: f64 },
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("link integrator: {0}")]
    Integrator(String),
    #[error("link trajectory reached a corner of the link")]
    CornerOfLink,
    #[error("billiard shot ended in a corner of the spherical link")]
    BilliardUnresolved,
}

/// One event along a traced path.
#[derive(Debug, Clone)]
pub enum Event {
    /// Straight interior segment between two phase points.
    Segment { start: PhasePoint, end: PhasePoint },
    /// Specular reflection at a hypersurface.
    Reflection { surface: u32, incoming: PhasePoint, outgoing: PhasePoint },
    /// Arrival at a corner, with the link entry data.
    CornerHit { corner: u32, incoming: PhasePoint, entry: LinkState, non_normal: bool },
    /// Tangential arrival at a hypersurface; continuation is not unique, so
    /// the trace stops here.
    GlancingStop { at: PhasePoint, surface: u32 },
    /// Outward crossing of the simulation box.
    Exit { at: PhasePoint },
}

impl Event {
    /// Name used in serialized output.
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Segment { .. } => "Segment",
            Event::Reflection { .. } => "Reflection",
            Event::CornerHit { .. } => "CornerHit",
            Event::GlancingStop { .. } => "GlancingStop",
            Event::Exit { .. } => "Exit",
        }
    }
}

/// What to do when the path hits a corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerPolicy {
    /// Record the hit and stop.
    StopAtCorner,
    /// Continue along the geometric continuation on the given transverse
    /// branch (there is no default branch; the caller must choose).
    FollowGeometric(Side),
    /// Stop and attach a diffracted fan with this many sampled directions.
    EmitFan(usize),
}

/// An event-logged path.
#[derive(Debug, Clone)]
pub struct RayPath {
    pub events: Vec<Event>,
    /// Attached by the `EmitFan` policy.
    pub fan: Option<DiffractionFan>,
}

impl RayPath {
    /// Final phase point of the path.
    pub fn last_point(&self) -> Option<&PhasePoint> {
        self.events.last().map(|e| match e {
            Event::Segment { end, .. } => end,
            Event::Reflection { outgoing, .. } => outgoing,
            Event::CornerHit { incoming, .. } => incoming,
            Event::GlancingStop { at, .. } => at,
            Event::Exit { at } => at,
        })
    }
}

/// Specular reflection of a phase point at a wall: the normal component of ξ
/// is negated, the tangential component and τ are preserved.  Refuses
/// near-tangent covectors rather than producing a numerically meaningless
/// continuation.
pub fn reflect(wall: &Wall, p: &PhasePoint) -> Result<PhasePoint, TracerError> {
    let n = wall.inward_normal;
    let xi_n = vec2::dot(p.xi.xy, n);
    let ratio = xi_n.abs() / p.xi.norm();
    if ratio < tol::TOL_GLANCE {
        return Err(TracerError::GlancingReflect { surface: wall.id, ratio });
    }
    let mut out = p.clone();
    out.xi.xy = vec2::sub(p.xi.xy, vec2::scale(n, 2.0 * xi_n));
    Ok(out)
}

/// Link entry data produced by `lift_entry`.
#[derive(Debug, Clone)]
pub struct LinkEntry {
    pub state: LinkState,
    /// Set when the entry lies on the link boundary (tangential approach
    /// along a wall).  Reported, not an error: the caller decides.
    pub non_normal: bool,
}

/// Lift a phase point incident at a corner into the link fiber.  The entry
/// coordinate z is the reversed incoming direction in the corner's chart;
/// ξ̂ and ζ̂ are the radial and transverse parts of ξ there, scaled by |τ|,
/// and the axial dual becomes η̂.
pub fn lift_entry(d: &Domain, corner_id: u32, p: &PhasePoint) -> Result<LinkEntry, TracerError> {
    let chart = d.blowup_chart(corner_id)?;
    let data = corner_hyperbolic_data(p, tol::TOL_CLASS)?;
    let back = vec2::scale(p.velocity().xy, -1.0);
    let z = chart.direction_to_link(back)?;
    let r_hat = vec2::dir(chart.global_angle(z));
    let t_hat = vec2::rot90(r_hat);
    let abs_tau = p.tau.abs();
    let state = LinkState {
        z,
        xi_hat: vec2::dot(p.xi.xy, r_hat) / abs_tau,
        zeta_hat: vec2::dot(p.xi.xy, t_hat) / abs_tau,
        eta_hat: data.eta_hat,
        sgn_tau: data.sgn_tau,
    };
    let non_normal = z < tol::TOL_GEO || z > chart.theta0 - tol::TOL_GEO;
    Ok(LinkEntry { state, non_normal })
}

/// Candidate next event along a straight segment.
enum Hit {
    Wall { t: f64, wall: u32 },
    Corner { t: f64, corner: u32 },
    Box { t: f64 },
    None,
}

/// Earliest event along the ray `pos + t v`, `t > t_min`.
fn next_hit(d: &Domain, pos: V2, v: V2, t_min: f64, skip_wall: Option<u32>) -> Hit {
    let mut best_t = f64::INFINITY;
    let mut best = Hit::None;

    for w in &d.walls {
        if skip_wall == Some(w.id) {
            continue;
        }
        let denom = vec2::cross(v, w.dir);
        if denom.abs() < 1e-300 {
            continue;
        }
        let rel = vec2::sub(pos, w.start);
        let t = -vec2::cross(rel, w.dir) / denom;
        if t <= t_min {
            continue;
        }
        let s = vec2::dot(vec2::add(rel, vec2::scale(v, t)), w.dir);
        let on_wall = if w.len.is_finite() { s >= 0.0 && s <= w.len } else { s >= 0.0 };
        if on_wall && t < best_t {
            best_t = t;
            best = Hit::Wall { t, wall: w.id };
        }
    }

    // A corner hit preempts an adjacent wall hit arriving at the same spot.
    for c in &d.corners {
        let rel = vec2::sub(c.apex, pos);
        let t_ca = vec2::dot(rel, v) / vec2::dot(v, v);
        if t_ca <= t_min {
            continue;
        }
        let closest = vec2::add(pos, vec2::scale(v, t_ca));
        let miss = vec2::norm(vec2::sub(closest, c.apex));
        if miss <= tol::TOL_GEO && t_ca <= best_t + tol::TOL_GEO {
            return Hit::Corner { t: t_ca, corner: c.id };
        }
    }

    // Outward crossing of the simulation box (unbounded domains only).
    if !matches!(d.shape, crate::geometry::DomainShape::Polygon2D { .. }) {
        let a = vec2::dot(v, v);
        let b = 2.0 * vec2::dot(pos, v);
        let c = vec2::dot(pos, pos) - d.sim_radius * d.sim_radius;
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let t = (-b + disc.sqrt()) / (2.0 * a);
            if t > t_min && t < best_t {
                return Hit::Box { t };
            }
        }
    }

    best
}

fn advance(p: &PhasePoint, dt: f64) -> PhasePoint {
    let v = p.velocity();
    PhasePoint {
        base: Point {
            xy: vec2::add(p.base.xy, vec2::scale(v.xy, dt)),
            axial: match (p.base.axial, v.axial) {
                (Some(x), Some(vx)) => Some(x + vx * dt),
                (ax, _) => ax,
            },
        },
        t: p.t + dt,
        tau: p.tau,
        xi: p.xi.clone(),
    }
}

const MAX_EVENTS: usize = 100_000;

/// Trace a generalized broken bicharacteristic from `p0` for duration `T`.
///
/// The path is a sequence of exact straight segments; walls reflect, corners
/// are processed per `policy`, tangencies stop the trace with a
/// `GlancingStop` event, and leaving the simulation box records an `Exit`.
pub fn trace(
    d: &Domain,
    p0: &PhasePoint,
    t_total: f64,
    policy: CornerPolicy,
) -> Result<RayPath, TracerError> {
    let residual = char_residual(p0).abs();
    if residual > tol::TOL_CHAR {
        return Err(TracerError::OffCharacteristic { residual });
    }
    if !(t_total > 0.0) {
        return Err(TracerError::Integrator(format!(
            "trace duration must be positive, got {t_total}"
        )));
    }

    let mut events = Vec::new();
    let mut fan = None;
    let mut p = p0.clone();
    let t_end = p0.t + t_total;
    // Wall to ignore for the immediate next intersection (the one the path
    // is currently leaving from).
    let mut leaving: Option<u32> = None;

    while events.len() < MAX_EVENTS {
        let v = p.velocity();
        let remaining = t_end - p.t;
        if remaining <= 0.0 {
            break;
        }
        match next_hit(d, p.base.xy, v.xy, 0.0, leaving) {
            Hit::Wall { t, wall } if t <= remaining => {
                let at = advance(&p, t);
                let w = d.wall(wall).expect("hit references existing wall");
                match reflect(w, &at) {
                    Ok(out) => {
                        events.push(Event::Segment { start: p.clone(), end: at.clone() });
                        events.push(Event::Reflection {
                            surface: wall,
                            incoming: at,
                            outgoing: out.clone(),
                        });
                        p = out;
                        leaving = Some(wall);
                    }
                    Err(TracerError::GlancingReflect { surface, .. }) => {
                        events.push(Event::Segment { start: p.clone(), end: at.clone() });
                        events.push(Event::GlancingStop { at, surface });
                        return Ok(RayPath { events, fan });
                    }
                    Err(e) => return Err(e),
                }
            }
            Hit::Corner { t, corner } if t <= remaining => {
                let at = advance(&p, t);
                // Snap the base point to the apex; the miss distance is
                // below the geometric tolerance by construction.
                let apex = d.corner(corner).expect("hit references existing corner").apex;
                let mut at_apex = at;
                at_apex.base.xy = apex;
                let entry = lift_entry(d, corner, &at_apex)?;
                events.push(Event::Segment { start: p.clone(), end: at_apex.clone() });
                events.push(Event::CornerHit {
                    corner,
                    incoming: at_apex.clone(),
                    entry: entry.state.clone(),
                    non_normal: entry.non_normal,
                });
                match policy {
                    CornerPolicy::StopAtCorner => return Ok(RayPath { events, fan }),
                    CornerPolicy::EmitFan(n) => {
                        fan = Some(exits::diffracted_fan(d, corner, &at_apex, n)?);
                        return Ok(RayPath { events, fan });
                    }
                    CornerPolicy::FollowGeometric(side) => {
                        match exits::geometric_continuation(d, corner, &at_apex, side)? {
                            exits::Continuation::Outgoing(next) => {
                                p = next;
                                leaving = None;
                            }
                            exits::Continuation::Grazing { surface } => {
                                events.push(Event::GlancingStop { at: at_apex, surface });
                                return Ok(RayPath { events, fan });
                            }
                        }
                    }
                }
            }
            Hit::Box { t } if t <= remaining => {
                let at = advance(&p, t);
                events.push(Event::Segment { start: p.clone(), end: at.clone() });
                events.push(Event::Exit { at });
                return Ok(RayPath { events, fan });
            }
            Hit::None => {
                // No event before the time horizon (bounded domain with the
                // ray parallel to everything cannot occur; unbounded domains
                // always cross the box eventually, so this is a stall).
                return Err(TracerError::StepSizeUnderflow { t: p.t });
            }
            // An event exists but lies beyond the horizon: finish the
            // segment at t_end.
            _ => {
                let at = advance(&p, remaining);
                events.push(Event::Segment { start: p.clone(), end: at });
                break;
            }
        }
    }
    if events.len() >= MAX_EVENTS {
        return Err(TracerError::Integrator("event cap exceeded".into()));
    }
    Ok(RayPath { events, fan })
}

/// One member of a near-miss family.
#[derive(Debug, Clone)]
pub struct NearMissSample {
    pub eps: f64,
    pub side: Side,
    /// Total polar angle swept around the target corner, unfolded across
    /// reflections.
    pub swept: f64,
    /// Polar angle of the outgoing velocity when the ray leaves the start
    /// circle.
    pub exit_angle: f64,
}

/// Trace the family of rays shifted laterally off a corner-aimed ray by each
/// ε in `eps_list`, on both sides, recording the swept polar angle around
/// the corner and the exit direction.  `aim` must hit the corner when traced
/// unshifted.
pub fn near_miss_family(
    d: &Domain,
    corner_id: u32,
    aim: &PhasePoint,
    eps_list: &[f64],
) -> Result<Vec<NearMissSample>, TracerError> {
    let apex = d
        .corner(corner_id)
        .ok_or_else(|| {
            TracerError::Geometry(GeometryError::Chart(format!("no corner {corner_id}")))
        })?
        .apex;
    let v = aim.velocity().xy;
    let v_unit = vec2::unit(v);
    let left = vec2::rot90(v_unit);
    // Exit circle through the shifted start point, centered at the apex.
    let r_start = vec2::norm(vec2::sub(aim.base.xy, apex));
    let mut out = Vec::with_capacity(2 * eps_list.len());
    for &eps in eps_list {
        for side in [Side::Plus, Side::Minus] {
            let mut p = aim.clone();
            p.base.xy = vec2::add(p.base.xy, vec2::scale(left, side.signum() * eps));
            let r_exit = vec2::norm(vec2::sub(p.base.xy, apex));
            let local = d.clone().with_sim_radius(r_exit);
            // Generous horizon: the chord across the exit circle plus the
            // reflections cannot exceed a few diameters.
            let path = trace(&local, &p, 8.0 * r_start.max(1.0), CornerPolicy::StopAtCorner)?;
            let mut swept = 0.0;
            let mut exit_angle = None;
            for e in &path.events {
                match e {
                    Event::Segment { start, end } => {
                        let a = vec2::sub(start.base.xy, apex);
                        let b = vec2::sub(end.base.xy, apex);
                        swept += vec2::cross(a, b).abs().atan2(vec2::dot(a, b));
                    }
                    Event::Exit { at } => {
                        let w = at.velocity().xy;
                        exit_angle = Some(w[1].atan2(w[0]));
                    }
                    Event::CornerHit { .. } => {
                        return Err(TracerError::Integrator(format!(
                            "near-miss ray at eps = {eps} hit the corner; eps too small \
                             for the geometric tolerance"
                        )));
                    }
                    _ => {}
                }
            }
            let exit_angle = exit_angle.ok_or_else(|| {
                TracerError::Integrator("near-miss ray did not leave the start circle".into())
            })?;
            out.push(NearMissSample { eps, side, swept, exit_angle });
        }
    }
    Ok(out)
}
