//! Phase-space data for the wave operator: phase points on the
//! characteristic set, rescaled (hatted) fiber coordinates over a corner, and
//! the elliptic / glancing / hyperbolic classification of corner covectors.
//!
//! Conventions. The time dual tau is nonzero everywhere (the corner conormal
//! is non-characteristic). Spatial covectors are Euclidean component vectors;
//! the group velocity of a phase point is xi / tau, so on the characteristic
//! set tau^2 = |xi|^2 the speed is 1. Hatted variables are rescaled by 1/|tau|:
//! a ray running radially into a corner has xi_hat = -1 there, an outgoing one
//! +1. The fiber radius mu = sqrt(1 - |eta_hat|^2) is the planar speed left
//! over after the conserved momentum along the corner is subtracted.

use crate::geometry::Point;
use crate::tol::TOL_CLASS;
use crate::vec2::{self, V2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    /// The covector is tangent to the corner line: mu below tolerance, no
    /// hyperbolic corner data exists.
    #[error("glancing corner covector: mu = {mu:.3e} below tolerance")]
    GlancingCorner { mu: f64 },
}

/// Spatial covector with Euclidean components; `axial` is the dual to the
/// along-corner coordinate of a wedge and is `None` in 2D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covector {
    pub xy: V2,
    pub axial: Option<f64>,
}

impl Covector {
    pub fn planar(x: f64, y: f64) -> Self {
        Covector { xy: [x, y], axial: None }
    }

    pub fn spatial(x: f64, y: f64, axial: f64) -> Self {
        Covector { xy: [x, y], axial: Some(axial) }
    }

    pub fn norm_sq(&self) -> f64 {
        vec2::dot(self.xy, self.xy) + self.axial.map_or(0.0, |e| e * e)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

/// One point of a bicharacteristic: base point, time, time dual and spatial
/// covector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub base: Point,
    pub t: f64,
    /// Time dual; nonzero on the characteristic set away from the zero
    /// section.
    pub tau: f64,
    pub xi: Covector,
}

impl PhasePoint {
    /// Group velocity xi / tau (unit length on the characteristic set).
    pub fn velocity(&self) -> Covector {
        Covector {
            xy: vec2::scale(self.xi.xy, 1.0 / self.tau),
            axial: self.xi.axial.map(|e| e / self.tau),
        }
    }
}

/// Relative defect of membership in the characteristic set:
/// (tau^2 - |xi|^2) / tau^2, zero iff tau^2 = |xi|^2.
pub fn char_residual(p: &PhasePoint) -> f64 {
    let t2 = p.tau * p.tau;
    (t2 - p.xi.norm_sq()) / t2
}

/// Rescaled fiber state over a corner: link coordinate, radial dual, link
/// dual and along-corner dual, all divided by |tau|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    /// Arc coordinate on the link, in [0, theta0].
    pub z: f64,
    /// Rescaled radial dual; -mu incoming, +mu outgoing.
    pub xi_hat: f64,
    /// Rescaled link dual; zero exactly on the radial set.
    pub zeta_hat: f64,
    /// Rescaled along-corner dual (`None` in 2D).
    pub eta_hat: Option<f64>,
    pub sgn_tau: i8,
}

impl LinkState {
    pub fn eta_hat_sq(&self) -> f64 {
        self.eta_hat.map_or(0.0, |e| e * e)
    }

    /// Fiber radius mu = sqrt(1 - eta_hat^2).
    pub fn mu(&self) -> f64 {
        (1.0 - self.eta_hat_sq()).max(0.0).sqrt()
    }
}

/// Classification of a covector at a boundary point of the corner link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CornerCovectorClass {
    /// No real characteristic preimage: some boundary-primed dual is nonzero,
    /// or the rescaled symbol exceeds 1.
    Elliptic,
    /// On the boundary of the hyperbolic region, within the tolerance band.
    Glancing { mu: f64 },
    /// Transversal incidence: strict inequality, propagation into the link.
    Hyperbolic { mu: f64 },
}

impl CornerCovectorClass {
    pub fn mu(&self) -> Option<f64> {
        match self {
            CornerCovectorClass::Elliptic => None,
            CornerCovectorClass::Glancing { mu } | CornerCovectorClass::Hyperbolic { mu } => {
                Some(*mu)
            }
        }
    }
}

/// Classify a rescaled covector at a link boundary point.
///
/// `eta_hat` are the along-corner duals (empty in 2D), `zeta_hat_primed` the
/// duals to the boundary-defining link coordinates at that point, and
/// `zeta_hat_rest` any remaining link duals (empty at a boundary point of an
/// arc link, where the single link dual is the primed one). With
/// q = xi_hat^2 + |eta_hat|^2 + |zeta_hat|^2 the point is elliptic if a primed
/// dual is nonzero or q > 1, glancing if the primed duals vanish and q = 1
/// within `tol_class`, hyperbolic if they vanish and q < 1.
pub fn classify_at_corner(
    eta_hat: &[f64],
    xi_hat: f64,
    zeta_hat_primed: &[f64],
    zeta_hat_rest: &[f64],
    tol_class: f64,
) -> CornerCovectorClass {
    let h: f64 = eta_hat.iter().map(|e| e * e).sum();
    let k: f64 = zeta_hat_primed.iter().map(|z| z * z).sum::<f64>()
        + zeta_hat_rest.iter().map(|z| z * z).sum::<f64>();
    let q = xi_hat * xi_hat + h + k;
    if zeta_hat_primed.iter().any(|z| z.abs() > tol_class) {
        return CornerCovectorClass::Elliptic;
    }
    if q > 1.0 + tol_class {
        return CornerCovectorClass::Elliptic;
    }
    let mu = (1.0 - h).max(0.0).sqrt();
    if (q - 1.0).abs() <= tol_class {
        CornerCovectorClass::Glancing { mu }
    } else {
        CornerCovectorClass::Hyperbolic { mu }
    }
}

/// Hyperbolic corner data extracted from an incident phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicData {
    /// Rescaled along-corner dual (`None` in 2D).
    pub eta_hat: Option<f64>,
    /// Fiber radius mu = sqrt(1 - eta_hat^2); 1 in 2D.
    pub mu: f64,
    pub sgn_tau: i8,
}

/// Conserved data of a corner interaction: the along-corner dual rescaled by
/// |tau|, the fiber radius mu, and the sign of tau. Fails when the covector
/// is tangent to the corner line (mu <= tol, the glancing corner case).
pub fn corner_hyperbolic_data(p: &PhasePoint, tol: f64) -> Result<HyperbolicData, HamiltonianError> {
    let sgn_tau: i8 = if p.tau >= 0.0 { 1 } else { -1 };
    let eta_hat = p.xi.axial.map(|e| e / p.tau.abs());
    let mu_sq = 1.0 - eta_hat.map_or(0.0, |e| e * e);
    let mu = mu_sq.max(0.0).sqrt();
    if mu <= tol {
        return Err(HamiltonianError::GlancingCorner { mu });
    }
    Ok(HyperbolicData { eta_hat, mu, sgn_tau })
}

/// Default-tolerance wrapper for `corner_hyperbolic_data`.
pub fn corner_hyperbolic_data_default(
    p: &PhasePoint,
) -> Result<HyperbolicData, HamiltonianError> {
    corner_hyperbolic_data(p, TOL_CLASS)
}
