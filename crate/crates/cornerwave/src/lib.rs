//! Numerical laboratory for wave propagation on planar domains with corners.
//!
//! The crate has two halves that meet at the corner of a sector:
//!
//! * a geometric half ([`geometry`], [`hamiltonian`], [`tracer`]) that traces
//!   broken bicharacteristics — straight rays with specular reflection — into a
//!   corner, lifts them to blow-up coordinates on the corner link, runs the
//!   rescaled Hamilton flow across the link fiber, and classifies the outgoing
//!   diffracted fan into geometric and diffractive directions;
//! * an analytic half ([`spectral`], [`regularity`]) that solves the wave
//!   equation on the exact sector by separation of variables (fractional-order
//!   Bessel modes and a Hankel-transform quadrature) and measures Sobolev
//!   regularity exponents of the synthesized wavefronts from dyadic
//!   frequency-band energies along transects.
//!
//! The two halves are linked by the geometric exit law: outgoing directions
//! reached by a broken geodesic of length pi in the corner link are exactly the
//! directions where the diffracted front merges with reflected fronts, and the
//! regularity estimator must stay away from them to see the diffractive
//! smoothing.

pub mod geometry;
pub mod hamiltonian;
pub mod regularity;
pub mod spectral;
pub mod tol;
pub mod tracer;
pub mod vec2;
