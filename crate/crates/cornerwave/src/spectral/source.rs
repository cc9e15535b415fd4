//! Mollified initial disturbances: u(0) = 0, ∂ₜu(0) = f.
//!
//! Every profile here is built from one compactly supported C^∞ bump rather
//! than a Gaussian: the bump's support radius is exactly `3σ`, so finite
//! propagation speed gives *zero* field outside the light cone of
//! `[r₀ − 3σ, r₀ + 3σ]` instead of a Gaussian tail that would swamp
//! part-in-a-million leakage checks.

use super::{Bc, ModeSpec, SpectralError};
use crate::spectral::quad::panel_integrate;

/// Support radius of the mollifier in units of its width parameter σ.
pub const SUPPORT_SIGMAS: f64 = 3.0;

/// C^∞ bump `exp(1 − 1/(1−u²))` on (−1, 1), zero outside, peak 1 at 0.
/// Its standard deviation is ≈ 0.32 in `u`, so `bump(z/(3σ))` has width ≈ σ.
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Initial velocity data ∂ₜu(0) = f on the sector, normalized to peak 1.
#[derive(Clone, Debug)]
pub enum Source {
    /// Disturbance concentrated at a single interior point (r₀, θ′),
    /// mollified by the bump of width σ in both r and θ.
    PointLike { r0: f64, theta_src: f64, sigma: f64 },
    /// Smooth density on the circle r = r₀: the angular profile is given
    /// directly by mode-basis coefficients (band-limited, so truncating the
    /// angular expansion at `phi.len()` modes is exact), with the same
    /// radial mollifier.
    Ring { r0: f64, phi: Vec<f64>, sigma: f64 },
}

impl Source {
    pub fn r0(&self) -> f64 {
        match self {
            Source::PointLike { r0, .. } | Source::Ring { r0, .. } => *r0,
        }
    }

    pub fn sigma(&self) -> f64 {
        match self {
            Source::PointLike { sigma, .. } | Source::Ring { sigma, .. } => *sigma,
        }
    }

    /// Radius of the support of the radial profile around r₀.
    pub fn support_radius(&self) -> f64 {
        SUPPORT_SIGMAS * self.sigma()
    }

    /// Rejects data whose support touches the vertex or the walls.
    pub fn validate(&self, theta0: f64) -> Result<(), SpectralError> {
        let (r0, sigma) = (self.r0(), self.sigma());
        if !(sigma > 0.0) || !(r0 > 0.0) || r0 - SUPPORT_SIGMAS * sigma <= 0.0 {
            return Err(SpectralError::InvalidSource {
                reason: format!("need sigma > 0 and r0 > 3 sigma, got r0={r0}, sigma={sigma}"),
            });
        }
        match self {
            Source::PointLike { theta_src, .. } => {
                let margin = SUPPORT_SIGMAS * sigma;
                if *theta_src - margin <= 0.0 || *theta_src + margin >= theta0 {
                    return Err(SpectralError::InvalidSource {
                        reason: format!(
                            "angular support [{:.4}, {:.4}] leaves the sector (0, {theta0:.4})",
                            theta_src - margin,
                            theta_src + margin
                        ),
                    });
                }
            }
            Source::Ring { phi, .. } => {
                if phi.is_empty() {
                    return Err(SpectralError::InvalidSource {
                        reason: "ring profile needs at least one mode coefficient".into(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Radial profile, peak 1 at r = r₀, support [r₀ − 3σ, r₀ + 3σ].
    pub fn radial(&self, r: f64) -> f64 {
        bump((r - self.r0()) / (SUPPORT_SIGMAS * self.sigma()))
    }

    /// Coefficient of Θ_n in the angular expansion of f: f(r, θ) =
    /// Σ_n c_n Θ_n(θ) · radial(r). For a ring this reads off the stored
    /// band-limited profile; for a pointlike source it projects the angular
    /// bump by quadrature.
    pub(crate) fn angular_coeffs(&self, modes: &[ModeSpec]) -> Vec<f64> {
        match self {
            Source::Ring { phi, .. } => modes
                .iter()
                .map(|m| {
                    // Keyed by the mode's own index so a caller holding a
                    // single high mode still reads the right coefficient.
                    let first = match m.bc {
                        Bc::Dirichlet => 1,
                        Bc::Neumann => 0,
                    };
                    m.n.checked_sub(first)
                        .and_then(|slot| phi.get(slot))
                        .copied()
                        .unwrap_or(0.0)
                })
                .collect(),
            Source::PointLike { theta_src, sigma, .. } => {
                let half = SUPPORT_SIGMAS * sigma;
                modes
                    .iter()
                    .map(|m| {
                        // One panel per ~8 radians of sin(νθ) phase, plus a
                        // floor of several panels: the bump window is smooth
                        // but not analytic, and Gauss rules need ~100 nodes
                        // across it before the edge flats stop limiting them.
                        let panels = (m.nu * 2.0 * half / 8.0).ceil() as usize + 7;
                        let integral = panel_integrate(
                            |theta| bump((theta - theta_src) / half) * m.angular(theta),
                            theta_src - half,
                            theta_src + half,
                            panels,
                        );
                        integral / m.norm_sq()
                    })
                    .collect()
            }
        }
    }

    /// Ring whose angular profile is the projection of a bump of half-width
    /// `ang_halfwidth` at `theta_src` onto the first `n_modes` eigenfunctions,
    /// rescaled so the profile's peak is 1.
    pub fn ring_bump(
        r0: f64,
        theta_src: f64,
        sigma: f64,
        ang_halfwidth: f64,
        bc: Bc,
        theta0: f64,
        n_modes: usize,
    ) -> Result<Source, SpectralError> {
        let modes = super::mode_frequencies(bc, theta0, n_modes)?;
        let mut phi: Vec<f64> = modes
            .iter()
            .map(|m| {
                let panels = (m.nu * 2.0 * ang_halfwidth / 8.0).ceil() as usize + 2;
                panel_integrate(
                    |theta| bump((theta - theta_src) / ang_halfwidth) * m.angular(theta),
                    (theta_src - ang_halfwidth).max(0.0),
                    (theta_src + ang_halfwidth).min(theta0),
                    panels,
                ) / m.norm_sq()
            })
            .collect();
        let mut peak = 0.0f64;
        for i in 0..=2048 {
            let theta = theta0 * i as f64 / 2048.0;
            let v: f64 = phi
                .iter()
                .zip(&modes)
                .map(|(&c, m)| c * m.angular(theta))
                .sum();
            peak = peak.max(v.abs());
        }
        if peak == 0.0 {
            return Err(SpectralError::InvalidSource {
                reason: "ring profile projected to zero".into(),
            });
        }
        for c in &mut phi {
            *c /= peak;
        }
        let src = Source::Ring { r0, phi, sigma };
        src.validate(theta0)?;
        Ok(src)
    }
}
