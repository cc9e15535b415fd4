//! Billiard dynamics on spherical polygon links (codimension-3 corners).
//!
//! The link of a 3D corner like the positive octant is a spherical polygon
//! cut from the unit sphere by the walls' tangent planes.  Geodesics are
//! great circles, computed in closed form; at a polygon edge the tangent
//! reflects specularly.  There is no closed-form unfolding here, so
//! geometric exits are found by shooting a fan of initial tangents a total
//! length of π.  A shot that lands in a corner of the polygon (two edges at
//! once) is reported as unresolved, never silently continued.

use crate::tol;

use super::TracerError;

type V3 = [f64; 3];

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

fn unit(a: V3) -> V3 {
    scale(a, 1.0 / norm(a))
}

/// Inward unit normals of the positive-octant link (the coordinate planes).
pub fn octant_normals() -> Vec<V3> {
    vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

/// One great-circle arc of a billiard path.
#[derive(Debug, Clone, Copy)]
pub struct BilliardArc {
    pub start: V3,
    pub tangent: V3,
    pub length: f64,
}

/// A billiard trajectory on the spherical polygon.
#[derive(Debug, Clone)]
pub struct BilliardPath {
    pub arcs: Vec<BilliardArc>,
    pub end_point: V3,
    pub end_tangent: V3,
    pub reflections: u32,
}

/// Point and tangent a geodesic distance `s` along the great circle from
/// `(p, u)`.
#[inline]
fn geodesic(p: V3, u: V3, s: f64) -> (V3, V3) {
    let (sin, cos) = s.sin_cos();
    (
        add(scale(p, cos), scale(u, sin)),
        add(scale(p, -sin), scale(u, cos)),
    )
}

/// Earliest outward crossing of the plane `n·x = 0` along the great circle,
/// strictly after `s_min`.  Crossings of `A cos s + B sin s` are at
/// `s = atan2(B, A) + π/2 (mod π)`; only those with the function decreasing
/// (leaving the half-space `n·x ≥ 0`) count.
fn first_crossing(p: V3, u: V3, n: V3, s_min: f64, s_max: f64) -> Option<f64> {
    let a = dot(n, p);
    let b = dot(n, u);
    if a == 0.0 && b == 0.0 {
        return None; // great circle lies inside the plane: tangent, no crossing
    }
    let base = b.atan2(a) + std::f64::consts::FRAC_PI_2;
    let mut best: Option<f64> = None;
    for k in -2i32..=2 {
        let s = base + k as f64 * std::f64::consts::PI;
        if s <= s_min || s > s_max {
            continue;
        }
        let deriv = -a * s.sin() + b * s.cos();
        if deriv < 0.0 && best.is_none_or(|cur| s < cur) {
            best = Some(s);
        }
    }
    best
}

/// Follow the billiard flow on the polygon cut out by `normals` (inward unit
/// normals of great-circle planes) for total geodesic length `total`.
pub fn billiard_flow(
    normals: &[V3],
    p0: V3,
    u0: V3,
    total: f64,
) -> Result<BilliardPath, TracerError> {
    if normals.iter().any(|n| (norm(*n) - 1.0).abs() > 1e-12) {
        return Err(TracerError::Integrator("plane normals must be unit vectors".into()));
    }
    if (norm(p0) - 1.0).abs() > 1e-9 {
        return Err(TracerError::Integrator("billiard start must lie on the sphere".into()));
    }
    if normals.iter().any(|n| dot(*n, p0) < -tol::TOL_GEO) {
        return Err(TracerError::Integrator("billiard start outside the polygon".into()));
    }
    // Project the tangent onto the tangent plane and normalize.
    let mut p = unit(p0);
    let mut u = add(u0, scale(p, -dot(u0, p)));
    if norm(u) < 1e-12 {
        return Err(TracerError::Integrator("billiard tangent is degenerate".into()));
    }
    u = unit(u);

    let mut arcs = Vec::new();
    let mut reflections = 0u32;
    let mut remaining = total;
    // Tolerance for "just reflected off this plane": skip crossings closer
    // than this to the arc start.
    const S_MIN: f64 = 1e-9;

    while remaining > 0.0 {
        if reflections > 10_000 {
            return Err(TracerError::Integrator("reflection cap exceeded in billiard".into()));
        }
        let mut hit: Option<(f64, usize)> = None;
        for (i, n) in normals.iter().enumerate() {
            if let Some(s) = first_crossing(p, u, *n, S_MIN, remaining.min(std::f64::consts::PI)) {
                if hit.is_none_or(|(sb, _)| s < sb) {
                    hit = Some((s, i));
                }
            }
        }
        match hit {
            Some((s, i)) => {
                arcs.push(BilliardArc { start: p, tangent: u, length: s });
                let (q, w) = geodesic(p, u, s);
                // Corner of the polygon: another edge passes through the
                // landing point.
                for (j, n) in normals.iter().enumerate() {
                    if j != i && dot(*n, q).abs() < tol::TOL_GEO {
                        return Err(TracerError::BilliardUnresolved);
                    }
                }
                let n = normals[i];
                let w = add(w, scale(n, -2.0 * dot(w, n)));
                p = unit(q);
                u = unit(add(w, scale(p, -dot(w, p))));
                remaining -= s;
                reflections += 1;
            }
            None => {
                let s = remaining.min(std::f64::consts::PI);
                arcs.push(BilliardArc { start: p, tangent: u, length: s });
                let (q, w) = geodesic(p, u, s);
                p = unit(q);
                u = unit(add(w, scale(p, -dot(w, p))));
                remaining -= s;
            }
        }
    }
    Ok(BilliardPath { arcs, end_point: p, end_tangent: u, reflections })
}

/// Geometric exit of a codim-3 corner for one initial tangent: the end point
/// of the billiard geodesic of length π from the entry direction.
pub fn orthant_exit(normals: &[V3], w_in: V3, u0: V3) -> Result<V3, TracerError> {
    Ok(billiard_flow(normals, w_in, u0, std::f64::consts::PI)?.end_point)
}

/// Fan of billiard shots over `m` uniformly spread initial tangents.
#[derive(Debug, Clone)]
pub struct OrthantFan {
    /// (tangent angle, exit point, reflection count) per resolved shot.
    pub shots: Vec<(f64, V3, u32)>,
    /// Number of shots that ended in a polygon corner.
    pub unresolved: u32,
}

/// Shoot `m` geodesics of length π from `w_in` with tangents spread
/// uniformly in angle, collecting the exit points.
pub fn orthant_exit_fan(normals: &[V3], w_in: V3, m: usize) -> Result<OrthantFan, TracerError> {
    if m == 0 {
        return Err(TracerError::Integrator("fan needs at least one shot".into()));
    }
    let p = unit(w_in);
    // Orthonormal tangent basis at p.
    let seed = if p[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = unit(add(seed, scale(p, -dot(seed, p))));
    let e2 = cross(p, e1);
    let mut shots = Vec::with_capacity(m);
    let mut unresolved = 0u32;
    for j in 0..m {
        let psi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
        let u = add(scale(e1, psi.cos()), scale(e2, psi.sin()));
        match billiard_flow(normals, p, u, std::f64::consts::PI) {
            Ok(path) => shots.push((psi, path.end_point, path.reflections)),
            Err(TracerError::BilliardUnresolved) => unresolved += 1,
            Err(e) => return Err(e),
        }
    }
    if shots.is_empty() {
        return Err(TracerError::BilliardUnresolved);
    }
    Ok(OrthantFan { shots, unresolved })
}

/// Scalar fiber flow riding a billiard geodesic: the (ξ̂, ζ̂) dynamics is the
/// same as on an arc link, while the base point moves along the billiard
/// path at speed |dz/ds| = 2|ζ̂|.  Returns the swept geodesic length and the
/// landing point.
pub fn orthant_link_flow(
    normals: &[V3],
    w_in: V3,
    u0: V3,
    mu: f64,
    eps_kick: f64,
    step: f64,
) -> Result<(f64, V3, u32), TracerError> {
    if !(mu > 0.0) {
        return Err(TracerError::Integrator("fiber radius mu must be positive".into()));
    }
    if !(eps_kick > 0.0 && eps_kick < 1.0) {
        return Err(TracerError::Integrator("kick size must lie in (0,1)".into()));
    }
    // Scalar system: xi' = 2 zeta^2, zeta' = -2 xi zeta, swept' = 2 zeta,
    // with zeta > 0 (the billiard handles all folding).
    let mut xi = -mu * (1.0 - eps_kick);
    let mut zeta = mu * (eps_kick * (2.0 - eps_kick)).sqrt();
    let xi_stop = -xi;
    let mut swept = 0.0f64;
    let rhs = |xi: f64, zeta: f64| -> [f64; 3] { [2.0 * zeta * zeta, -2.0 * xi * zeta, 2.0 * zeta] };
    let mut steps = 0u64;
    while xi < xi_stop {
        steps += 1;
        if steps > 20_000_000 {
            return Err(TracerError::Integrator("orthant fiber flow step cap".into()));
        }
        let k1 = rhs(xi, zeta);
        let k2 = rhs(xi + 0.5 * step * k1[0], zeta + 0.5 * step * k1[1]);
        let k3 = rhs(xi + 0.5 * step * k2[0], zeta + 0.5 * step * k2[1]);
        let k4 = rhs(xi + step * k3[0], zeta + step * k3[1]);
        let nxi = xi + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        let nzeta = zeta + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        let nswept = swept + step / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
        if nxi >= xi_stop {
            // Linear interpolation of the crossing inside the step is enough
            // here: the swept-length error it induces is O(step²·ζ̂).
            let frac = (xi_stop - xi) / (nxi - xi);
            swept += (nswept - swept) * frac;
            break;
        }
        xi = nxi;
        zeta = nzeta;
        swept = nswept;
    }
    let path = billiard_flow(normals, w_in, u0, swept)?;
    Ok((swept, path.end_point, path.reflections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_geodesic_reaches_antipode() {
        let p = unit([1.0, 1.0, 1.0]);
        let u = unit([1.0, -1.0, 0.0]);
        let path = billiard_flow(&[], p, u, PI).unwrap();
        for (a, b) in path.end_point.iter().zip(&scale(p, -1.0)) {
            assert!((a - b).abs() < 1e-12, "length-π geodesic ends at the antipode");
        }
        assert_eq!(path.reflections, 0);
    }

    #[test]
    fn octant_billiard_retroreflects() {
        // Unfolding the octant by coordinate-plane reflections maps the
        // billiard to the full great circle; at length π that reaches the
        // antipode -p, which folds back (componentwise absolute value) to p
        // itself.  A corner-cube retroreflector, on the sphere.
        let normals = octant_normals();
        let p = unit([1.0, 1.2, 0.9]);
        for ang in [0.3f64, 1.1, 2.0, 4.4, 5.9] {
            let seed = [1.0, 0.0, 0.0];
            let e1 = unit(add(seed, scale(p, -dot(seed, p))));
            let e2 = cross(p, e1);
            let u = add(scale(e1, ang.cos()), scale(e2, ang.sin()));
            let path = billiard_flow(&normals, p, u, PI).unwrap();
            for (a, b) in path.end_point.iter().zip(&p) {
                assert!(
                    (a - b).abs() < 1e-9,
                    "octant shot at angle {ang} must return to start, got {:?}",
                    path.end_point
                );
            }
            assert!(path.reflections > 0, "interior shots must reflect");
        }
    }

    #[test]
    fn billiard_stays_on_sphere_and_inside() {
        let normals = octant_normals();
        let p = unit([0.5, 1.0, 0.7]);
        let u = unit(add([0.0, 0.3, -0.8], scale(p, -dot([0.0, 0.3, -0.8], p))));
        let path = billiard_flow(&normals, p, u, PI).unwrap();
        for arc in &path.arcs {
            assert!((norm(arc.start) - 1.0).abs() < 1e-12);
            assert!(dot(arc.start, arc.tangent).abs() < 1e-10, "tangent stays tangent");
            for n in &normals {
                assert!(dot(*n, arc.start) > -1e-9, "arc start inside the polygon");
            }
        }
        let total: f64 = path.arcs.iter().map(|a| a.length).sum();
        assert!((total - PI).abs() < 1e-12, "arc lengths sum to the requested π");
    }

    #[test]
    fn aimed_at_link_corner_is_unresolved() {
        // A great circle through the pole e_z hits the corner of the octant
        // polygon where the x=0 and y=0 planes meet.
        let normals = octant_normals();
        let p = unit([1.0, 1.0, 1.0]);
        let pole = [0.0, 0.0, 1.0];
        let u = unit(add(pole, scale(p, -dot(pole, p))));
        match billiard_flow(&normals, p, u, PI) {
            Err(TracerError::BilliardUnresolved) => {}
            other => panic!("expected unresolved corner shot, got {other:?}"),
        }
    }

    #[test]
    fn exit_fan_collects_retroreflections() {
        let normals = octant_normals();
        let p = unit([1.0, 0.8, 1.3]);
        let fan = orthant_exit_fan(&normals, p, 16).unwrap();
        assert!(fan.shots.len() + fan.unresolved as usize == 16);
        for (psi, exit, _) in &fan.shots {
            for (a, b) in exit.iter().zip(&p) {
                assert!((a - b).abs() < 1e-9, "shot {psi}: exit {exit:?} is the entry");
            }
        }
    }

    #[test]
    fn fiber_flow_sweeps_pi_on_the_billiard() {
        let normals = octant_normals();
        let p = unit([1.0, 1.1, 0.95]);
        let seed = [1.0, 0.0, 0.0];
        let e1 = unit(add(seed, scale(p, -dot(seed, p))));
        let e2 = cross(p, e1);
        let u = add(scale(e1, 0.4f64.cos()), scale(e2, 0.4f64.sin()));
        let (swept, end, refl) = orthant_link_flow(&normals, p, u, 1.0, 1e-6, 1e-3).unwrap();
        let deficit = 2.0 * (1.0f64 - 1e-6).acos();
        assert!(
            (swept - (PI - deficit)).abs() < 1e-6,
            "swept {swept} vs closed form {}",
            PI - deficit
        );
        assert!(refl > 0);
        // Nearly the retroreflection point (off only by the kick deficit).
        for (a, b) in end.iter().zip(&p) {
            assert!((a - b).abs() < 5e-3, "end {end:?} near entry {p:?}");
        }
    }
}
