//! Spectrally negative Lévy models: Brownian motion with drift plus an
//! optional compound Poisson stream of downward jumps.
//!
//! Models are parameterised by the *natural* drift `D`, so that
//!
//! ```text
//! X_t = x + D t + σ B_t − Σ_{i ≤ N_t} J_i,
//! ψ(θ) = σ²θ²/2 + Dθ + η (E[e^{−θJ}] − 1).
//! ```
//!
//! The Lévy–Khintchine drift `γ` (compensated on jumps of size at most one)
//! is derived from it: `γ = D − η E[J; J ≤ 1]`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Distribution;
use statrs::distribution::{Continuous, ContinuousCDF};

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::roots::newton_bisect;

/// Law of the (positive) jump magnitudes of a compound Poisson component.
pub trait JumpDistribution: Send + Sync + fmt::Debug {
    /// `E[e^{−sJ}]` for `Re s > −(abscissa of convergence)`.
    fn laplace(&self, s: Complex64) -> Complex64;
    /// `d/ds E[e^{−sJ}] = −E[J e^{−sJ}]`.
    fn laplace_derivative(&self, s: Complex64) -> Complex64;
    fn density(&self, x: f64) -> f64;
    /// `P(J > x)`.
    fn tail(&self, x: f64) -> f64;
    fn sample(&self, rng: &mut dyn Rng) -> f64;

    fn mean(&self) -> f64 {
        -self.laplace_derivative(Complex64::new(0.0, 0.0)).re
    }

    /// `E[J; J ≤ 1]`.
    fn truncated_mean(&self) -> f64 {
        quad::adaptive(|x| x * self.density(x), 0.0, 1.0, 1e-13)
    }
}

/// Exponential jump sizes with rate `alpha` (mean `1/alpha`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialJumps {
    pub alpha: f64,
}

impl JumpDistribution for ExponentialJumps {
    fn laplace(&self, s: Complex64) -> Complex64 {
        self.alpha / (self.alpha + s)
    }

    fn laplace_derivative(&self, s: Complex64) -> Complex64 {
        let d = self.alpha + s;
        -self.alpha / (d * d)
    }

    fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.alpha * (-self.alpha * x).exp()
        }
    }

    fn tail(&self, x: f64) -> f64 {
        if x < 0.0 {
            1.0
        } else {
            (-self.alpha * x).exp()
        }
    }

    fn sample(&self, rng: &mut dyn Rng) -> f64 {
        let e: f64 = rand_distr::Exp1.sample(rng);
        e / self.alpha
    }

    fn mean(&self) -> f64 {
        1.0 / self.alpha
    }

    fn truncated_mean(&self) -> f64 {
        let a = self.alpha;
        (1.0 - (-a).exp() * (1.0 + a)) / a
    }
}

/// Gamma distributed jump sizes (`shape`, `rate`).
#[derive(Debug, Clone)]
pub struct GammaJumps {
    shape: f64,
    rate: f64,
    law: statrs::distribution::Gamma,
    sampler: rand_distr::Gamma<f64>,
}

impl GammaJumps {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "gamma jumps need positive shape and rate, got ({shape}, {rate})"
            )));
        }
        let law = statrs::distribution::Gamma::new(shape, rate)
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        let sampler = rand_distr::Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        Ok(Self {
            shape,
            rate,
            law,
            sampler,
        })
    }
}

impl JumpDistribution for GammaJumps {
    fn laplace(&self, s: Complex64) -> Complex64 {
        ((Complex64::from(self.rate) / (self.rate + s)).ln() * self.shape).exp()
    }

    fn laplace_derivative(&self, s: Complex64) -> Complex64 {
        -self.laplace(s) * self.shape / (self.rate + s)
    }

    fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.law.pdf(x)
        }
    }

    fn tail(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            self.law.sf(x)
        }
    }

    fn sample(&self, rng: &mut dyn Rng) -> f64 {
        self.sampler.sample(rng)
    }

    fn mean(&self) -> f64 {
        self.shape / self.rate
    }
}

/// Jump component of a model. All jumps are downward; sizes are magnitudes.
#[derive(Debug, Clone)]
pub enum JumpSpec {
    None,
    /// Compound Poisson with rate `rate` and exponential sizes of rate `alpha`.
    Exponential {
        rate: f64,
        alpha: f64,
    },
    /// Compound Poisson with rate `rate` and an arbitrary size law.
    Generic {
        rate: f64,
        law: Arc<dyn JumpDistribution>,
    },
}

impl JumpSpec {
    pub fn rate(&self) -> f64 {
        match self {
            JumpSpec::None => 0.0,
            JumpSpec::Exponential { rate, .. } | JumpSpec::Generic { rate, .. } => *rate,
        }
    }

    fn laplace(&self, s: Complex64) -> Complex64 {
        match self {
            JumpSpec::None => Complex64::new(1.0, 0.0),
            JumpSpec::Exponential { alpha, .. } => *alpha / (*alpha + s),
            JumpSpec::Generic { law, .. } => law.laplace(s),
        }
    }

    fn laplace_derivative(&self, s: Complex64) -> Complex64 {
        match self {
            JumpSpec::None => Complex64::new(0.0, 0.0),
            JumpSpec::Exponential { alpha, .. } => {
                let d = *alpha + s;
                -*alpha / (d * d)
            }
            JumpSpec::Generic { law, .. } => law.laplace_derivative(s),
        }
    }

    fn mean(&self) -> f64 {
        match self {
            JumpSpec::None => 0.0,
            JumpSpec::Exponential { alpha, .. } => 1.0 / alpha,
            JumpSpec::Generic { law, .. } => law.mean(),
        }
    }
}

/// A spectrally negative Lévy process of the in-scope families.
///
/// Immutable after construction; cheap to clone.
#[derive(Debug, Clone)]
pub struct LevyModel {
    sigma: f64,
    drift: f64,
    jumps: JumpSpec,
}

impl LevyModel {
    /// Builds a model from the Gaussian coefficient, the natural drift and the
    /// jump component.
    pub fn new(sigma: f64, drift: f64, jumps: JumpSpec) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "sigma must be >= 0, got {sigma}"
            )));
        }
        if !drift.is_finite() {
            return Err(Error::InvalidModel(format!(
                "drift must be finite, got {drift}"
            )));
        }
        match &jumps {
            JumpSpec::None => {}
            JumpSpec::Exponential { rate, alpha } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "jump rate must be > 0, got {rate}"
                    )));
                }
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "jump alpha must be > 0, got {alpha}"
                    )));
                }
            }
            JumpSpec::Generic { rate, .. } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "jump rate must be > 0, got {rate}"
                    )));
                }
            }
        }
        if sigma == 0.0 && drift <= 0.0 {
            return Err(Error::InvalidModel(
                "with sigma = 0 the drift must be strictly positive (negative of a subordinator excluded)"
                    .into(),
            ));
        }
        Ok(Self {
            sigma,
            drift,
            jumps,
        })
    }

    /// Brownian motion `σB_t + D t`.
    pub fn brownian(sigma: f64, drift: f64) -> Result<Self> {
        Self::new(sigma, drift, JumpSpec::None)
    }

    /// Cramér–Lundberg process with premium rate `drift`, claim rate `rate`
    /// and exponential claims of rate `alpha`, perturbed by `σB_t`.
    pub fn cramer_lundberg(sigma: f64, drift: f64, rate: f64, alpha: f64) -> Result<Self> {
        Self::new(sigma, drift, JumpSpec::Exponential { rate, alpha })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Natural drift `D`.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn jumps(&self) -> &JumpSpec {
        &self.jumps
    }

    /// Lévy–Khintchine drift `γ` (jumps of size at most one compensated).
    pub fn gamma(&self) -> f64 {
        let truncated = match &self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::Exponential { alpha, .. } => {
                ExponentialJumps { alpha: *alpha }.truncated_mean()
            }
            JumpSpec::Generic { law, .. } => law.truncated_mean(),
        };
        self.drift - self.jumps.rate() * truncated
    }

    pub fn has_gaussian(&self) -> bool {
        self.sigma > 0.0
    }

    /// Density of the Lévy measure `Π(dz)/dz` at jump magnitude `z`.
    pub fn levy_density(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        match &self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::Exponential { rate, alpha } => rate * alpha * (-alpha * z).exp(),
            JumpSpec::Generic { rate, law } => rate * law.density(z),
        }
    }

    /// `Π((z, ∞))`.
    pub fn levy_tail(&self, z: f64) -> f64 {
        match &self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::Exponential { rate, alpha } => rate * (-alpha * z.max(0.0)).exp(),
            JumpSpec::Generic { rate, law } => rate * law.tail(z),
        }
    }

    /// Laplace exponent at a complex argument (no domain checks).
    pub fn psi_complex(&self, s: Complex64) -> Complex64 {
        let s2 = 0.5 * self.sigma * self.sigma;
        s2 * s * s + self.drift * s + self.jumps.rate() * (self.jumps.laplace(s) - 1.0)
    }

    pub fn psi_prime_complex(&self, s: Complex64) -> Complex64 {
        self.sigma * self.sigma * s
            + self.drift
            + self.jumps.rate() * self.jumps.laplace_derivative(s)
    }

    /// `ψ(θ) = log E[e^{θX_1}]` for `θ ≥ 0`.
    pub fn psi(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return domain(format!("psi requires theta >= 0, got {theta}"));
        }
        Ok(self.psi_real(theta))
    }

    pub(crate) fn psi_real(&self, theta: f64) -> f64 {
        let jump = match &self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::Exponential { rate, alpha } => -rate * theta / (alpha + theta),
            JumpSpec::Generic { rate, law } => {
                rate * (law.laplace(Complex64::from(theta)).re - 1.0)
            }
        };
        0.5 * self.sigma * self.sigma * theta * theta + self.drift * theta + jump
    }

    pub(crate) fn psi_prime_real(&self, theta: f64) -> f64 {
        let jump = match &self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::Exponential { rate, alpha } => {
                -rate * alpha / ((alpha + theta) * (alpha + theta))
            }
            JumpSpec::Generic { rate, law } => {
                rate * law.laplace_derivative(Complex64::from(theta)).re
            }
        };
        self.sigma * self.sigma * theta + self.drift + jump
    }

    /// `ψ'(θ)` for `θ > 0`.
    pub fn psi_prime(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0) {
            return domain(format!("psi_prime requires theta > 0, got {theta}"));
        }
        Ok(self.psi_prime_real(theta))
    }

    /// Mean drift `ψ'(0+) = E[X_1] = D − η E[J]`, finite for every model in
    /// scope. Positive: drifts to +∞; negative: to −∞; zero: oscillates.
    pub fn psi_prime_at_zero(&self) -> f64 {
        self.drift - self.jumps.rate() * self.jumps.mean()
    }

    /// Right inverse `φ(q) = sup{θ ≥ 0 : ψ(θ) = q}`.
    pub fn phi(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) || !q.is_finite() {
            return domain(format!("phi requires q >= 0, got {q}"));
        }
        let slope0 = self.psi_prime_at_zero();
        if q == 0.0 && slope0 >= 0.0 {
            return Ok(0.0);
        }
        let lo = if q == 0.0 { 1e-12 } else { 0.0 };
        let mut hi = 1.0;
        while self.psi_real(hi) <= q {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::NoConvergence(format!("no bracket for phi({q})")));
            }
        }
        newton_bisect(
            |t| (self.psi_real(t) - q, self.psi_prime_real(t)),
            lo,
            hi,
            1e-16,
        )
    }

    /// `φ'(q) = 1/ψ'(φ(q))`; infinite when `ψ'(φ(q)) = 0`.
    pub fn phi_prime(&self, q: f64) -> Result<f64> {
        let p = self.phi(q)?;
        let slope = if p == 0.0 {
            self.psi_prime_at_zero()
        } else {
            self.psi_prime_real(p)
        };
        Ok(if slope == 0.0 {
            f64::INFINITY
        } else {
            1.0 / slope
        })
    }

    /// `W^{(q)}(0)`: zero with a Gaussian part, `1/D` otherwise.
    pub fn scale_at_zero(&self) -> f64 {
        if self.sigma > 0.0 {
            0.0
        } else {
            1.0 / self.drift
        }
    }

    /// `ν(y) = ∫_{z>y} (1 − e^{φ(λ)(y−z)}) Π(dz)` for `y > 0`.
    pub fn levy_tail_integral(&self, y: f64, lambda: f64) -> Result<f64> {
        if !(y > 0.0) {
            return domain(format!("levy_tail_integral requires y > 0, got {y}"));
        }
        let phi = self.phi(lambda)?;
        Ok(self.levy_tail_integral_with_phi(y, phi))
    }

    pub(crate) fn levy_tail_integral_with_phi(&self, y: f64, phi: f64) -> f64 {
        match &self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::Exponential { rate, alpha } => {
                rate * (-alpha * y).exp() * phi / (alpha + phi)
            }
            JumpSpec::Generic { rate, law } => {
                if phi == 0.0 {
                    return 0.0;
                }
                let discounted = quad::adaptive_to_infinity(
                    |z| (phi * (y - z)).exp() * law.density(z),
                    y,
                    1e-13,
                );
                (rate * (law.tail(y) - discounted)).max(0.0)
            }
        }
    }

    /// Draws one jump magnitude; `None` for models without jumps.
    pub fn sample_jump(&self, rng: &mut dyn Rng) -> Option<f64> {
        match &self.jumps {
            JumpSpec::None => None,
            JumpSpec::Exponential { alpha, .. } => {
                let e: f64 = rand_distr::Exp1.sample(rng);
                Some(e / alpha)
            }
            JumpSpec::Generic { law, .. } => Some(law.sample(rng)),
        }
    }
}
