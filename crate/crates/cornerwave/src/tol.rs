//! Central tolerance constants.
//!
//! Every comparison against a tolerance in this crate goes through one of the
//! constants below (or a configured override carried in an options struct).
//! They are collected here so the acceptance suite and the CLI agree with the
//! library about what "equal", "on the boundary" and "glancing" mean.

/// Absolute geometric tolerance. Domains are assumed O(1) in size; points
/// closer than this to a wall, corner or link endpoint are treated as on it.
pub const TOL_GEO: f64 = 1e-9;

/// Relative tolerance for membership in the characteristic set,
/// |tau^2 - |xi|^2| / tau^2.
pub const TOL_CHAR: f64 = 1e-10;

/// Width of the glancing band in the elliptic/glancing/hyperbolic
/// classification. Glancing is a measure-zero set; the classifier reports a
/// band of this width instead of resolving ties.
pub const TOL_CLASS: f64 = 1e-9;

/// Relative threshold on the normal component of a covector at a wall below
/// which a reflection is refused as glancing.
pub const TOL_GLANCE: f64 = 1e-10;

/// Budget for the total link arc length of a complete fiber traversal after
/// kick extrapolation (the un-extrapolated deficit is O(sqrt(eps_kick))).
pub const TOL_PI: f64 = 1e-6;

/// Default offset from the incoming radial equilibrium used to start the link
/// flow. Radial points are fixed points of the flow, so the integrator starts
/// from xi_hat = -mu * (1 - EPS_KICK).
pub const EPS_KICK: f64 = 1e-6;

/// Default flow-parameter step of the fixed-step integrator on the link.
/// The flow's time scale is 1/(2 mu) with mu <= 1, so this resolves one
/// traversal with several thousand steps.
pub const LINK_STEP: f64 = 1e-3;

/// Target relative accuracy of Bessel evaluation away from zeros.
pub const TOL_BESSEL_REL: f64 = 1e-10;

/// Target absolute accuracy of Bessel evaluation near zeros.
pub const TOL_BESSEL_ABS: f64 = 1e-12;

/// Relative tolerance of the adaptive quadrature used for Hankel
/// coefficients.
pub const TOL_QUAD_REL: f64 = 1e-8;

/// Two mode orders whose fractional parts differ by less than this share one
/// unit-spaced recurrence ladder.
pub const TOL_CHAIN_FRAC: f64 = 1e-9;

/// Relative change in the convergence probe above which a spectral synthesis
/// is flagged as under-resolved.
pub const TOL_TRUNCATION: f64 = 1e-3;

/// Noise floor for dyadic band energies, as a fraction of the total energy of
/// the windowed transect. Bands below the floor are excluded from exponent
/// fits.
pub const BAND_FLOOR_REL: f64 = 1e-24;

/// Default angular margin kept between a purely-diffractive transect anchor
/// and the geometric exit directions.
pub const DEFAULT_GEO_MARGIN: f64 = 0.05 * std::f64::consts::PI;
