use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::levy::LevyModel;
use crate::quad;

/// A measure on `[0, ∞)` made of an atom at 0 and a density on `(lo, hi)`.
#[derive(Clone)]
pub struct MeasureValue {
    pub atom_at_zero: f64,
    lo: f64,
    hi: f64,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for MeasureValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureValue")
            .field("atom_at_zero", &self.atom_at_zero)
            .field("support", &(self.lo, self.hi))
            .finish_non_exhaustive()
    }
}

impl MeasureValue {
    pub fn new<F>(atom_at_zero: f64, lo: f64, hi: f64, density: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            atom_at_zero,
            lo,
            hi,
            density: Arc::new(density),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Density at `y`, zero off the support.
    pub fn density(&self, y: f64) -> f64 {
        if y > self.lo && y < self.hi {
            (self.density)(y)
        } else {
            0.0
        }
    }

    /// Atom plus the integral of the density.
    pub fn total_mass(&self, tol: f64) -> f64 {
        self.laplace(0.0, tol)
    }

    /// `∫ e^{−sy} m(dy)`, the atom included.
    pub fn laplace(&self, s: f64, tol: f64) -> f64 {
        let f = |y: f64| (-s * y).exp() * (self.density)(y);
        let body = if self.hi.is_finite() {
            quad::adaptive(f, self.lo, self.hi, tol)
        } else {
            quad::adaptive_to_infinity(f, self.lo, tol)
        };
        self.atom_at_zero + body
    }
}

/// `μ̂^{(λ)}(s) = φ(λ)(ψ(s) − λ) / (s(s − φ(λ)))` for `λ > 0`, `s ≥ 0`.
/// The removable point `s = φ(λ)` gives `ψ'(φ(λ))`; `s = 0` gives `+∞`.
pub fn mu_hat(model: &LevyModel, lambda: f64, s: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("mu_hat needs lambda > 0, got {lambda}"));
    }
    if !(s >= 0.0) {
        return domain(format!("mu_hat needs s >= 0, got {s}"));
    }
    let phi = model.phi(lambda)?;
    if s == 0.0 {
        return Ok(f64::INFINITY);
    }
    let gap = s - phi;
    if gap.abs() <= 1e-6 * (1.0 + phi) {
        // (ψ(s) − ψ(φ))/(s − φ) is ψ' at the midpoint up to O(gap²)
        return Ok(phi * model.psi_prime_real(0.5 * (s + phi)) / s);
    }
    Ok(phi * (model.psi_real(s) - lambda) / (s * gap))
}

/// The capacity measure `μ^{(λ)}`: atom `σ²φ(λ)/2` at 0 and density
/// `λ + ν(y)` on `(0, ∞)`.
pub fn mu_measure(model: &LevyModel, lambda: f64) -> Result<MeasureValue> {
    if !(lambda > 0.0) {
        return domain(format!("mu_measure needs lambda > 0, got {lambda}"));
    }
    let phi = model.phi(lambda)?;
    Ok(capacity(model, lambda, phi))
}

/// The measure with transform `φ(0)ψ(s)/(s(s − φ(0)))` used when there is no
/// killing and the process drifts to −∞.
pub fn capacity_measure_at_infinity(model: &LevyModel) -> Result<MeasureValue> {
    let phi = model.phi(0.0)?;
    if !(phi > 0.0) {
        return domain("the limiting capacity measure needs a process drifting to -infinity");
    }
    Ok(capacity(model, 0.0, phi))
}

fn capacity(model: &LevyModel, lambda: f64, phi: f64) -> MeasureValue {
    let atom = 0.5 * model.sigma() * model.sigma() * phi;
    let m = model.clone();
    MeasureValue::new(atom, 0.0, f64::INFINITY, move |y| {
        lambda + m.levy_tail_integral_with_phi(y, phi)
    })
}
