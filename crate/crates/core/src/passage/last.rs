use crate::error::{domain, Result};
use crate::kernels::OccupationWindow;
use crate::levy::LevyModel;
use crate::quad::QuadSettings;
use crate::scale::{ScaleBackend, ScaleEval};

use super::creep_factor;
use super::measure::{mu_measure, MeasureValue};
use super::resolvent::{Corridor, CorridorResolvent};

/// Which last time before `e_λ` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LastKind {
    /// `σ⁺`: last time above 0.
    SigmaPlus,
    /// `σ⁻`: last time below 0.
    SigmaMinus,
    /// `σ⁰`: last time at 0.
    SigmaZero,
}

/// Laplace transforms of the clock `L` at the last passage times of 0 before
/// an independent exponential time `e_λ`, restricted to paths that stay in
/// `[c, d]` up to that last time. All quantities use the resolvent with both
/// clock rates raised by `λ`.
#[derive(Debug, Clone)]
pub struct LastPassage {
    model: LevyModel,
    lambda: f64,
    resolvent: CorridorResolvent,
    scale: ScaleEval,
    mu: MeasureValue,
}

impl LastPassage {
    pub fn new(
        model: &LevyModel,
        window: OccupationWindow,
        corridor: Corridor,
        lambda: f64,
    ) -> Result<Self> {
        Self::with_settings(
            model,
            window,
            corridor,
            lambda,
            QuadSettings::default(),
            ScaleBackend::Auto,
        )
    }

    pub fn with_settings(
        model: &LevyModel,
        window: OccupationWindow,
        corridor: Corridor,
        lambda: f64,
        settings: QuadSettings,
        backend: ScaleBackend,
    ) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!(
                "killing rate must be > 0, got {lambda}; use last_infty for the unkilled limits"
            ));
        }
        let resolvent = CorridorResolvent::with_settings(
            model,
            window.shifted(lambda),
            corridor,
            settings,
            backend,
        )?;
        Ok(Self {
            model: model.clone(),
            lambda,
            resolvent,
            scale: ScaleEval::with_backend(model, lambda, backend)?,
            mu: mu_measure(model, lambda)?,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn corridor(&self) -> &Corridor {
        self.resolvent.corridor()
    }

    /// The shifted resolvent `u^{(p+λ, q+λ)}`.
    pub fn resolvent(&self) -> &CorridorResolvent {
        &self.resolvent
    }

    /// The scale function `W^{(λ)}`.
    pub fn scale(&self) -> &ScaleEval {
        &self.scale
    }

    /// `φ(λ)`.
    pub fn phi(&self) -> f64 {
        self.scale.phi()
    }

    /// `u^{(p+λ, q+λ)}(x, 0)`.
    pub fn u_at_zero(&self, x: f64) -> Result<f64> {
        self.resolvent.density(x, 0.0)
    }

    /// `ν(y) = ∫_{z>y} (1 − e^{φ(λ)(y−z)}) Π(dz)`.
    pub fn nu(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        self.model.levy_tail_integral_with_phi(y, self.phi())
    }

    /// `E_x[e^{−L(σ⁺)}; X(σ⁺−) ∈ dy, 0 < σ⁺ ≤ τ_d^+ ∧ τ_c^−]` as a measure
    /// on `[0, d)`.
    pub fn last_up_measure(&self, x: f64) -> Result<MeasureValue> {
        let atom = self.last_up_atom(x)?;
        let row_x = x;
        let this = self.clone();
        Ok(MeasureValue::new(atom, 0.0, self.corridor().d, move |y| {
            this.last_up_density(row_x, y).unwrap_or(0.0)
        }))
    }

    /// Atom of the `σ⁺` law at 0: the last exit from `(0, ∞)` by creeping.
    pub fn last_up_atom(&self, x: f64) -> Result<f64> {
        if !self.model.has_gaussian() {
            self.corridor().check_point(x)?;
            return Ok(0.0);
        }
        Ok(self.mu.atom_at_zero * self.u_at_zero(x)?)
    }

    /// `u(x, y)(λ + ν(y))` for `y ∈ (0, d)`.
    pub fn last_up_density(&self, x: f64, y: f64) -> Result<f64> {
        self.check_open(y, 0.0, self.corridor().d)?;
        Ok(self.resolvent.density(x, y)? * (self.lambda + self.nu(y)))
    }

    /// The jump part `u(x, y) ν(y)` of the `σ⁺` density: the last exit from
    /// `(0, ∞)` happens by a jump from `y`, before `e_λ`.
    pub fn last_up_jump_density(&self, x: f64, y: f64) -> Result<f64> {
        self.check_open(y, 0.0, self.corridor().d)?;
        Ok(self.resolvent.density(x, y)? * self.nu(y))
    }

    /// `λ u(x, y)` for `y ∈ (c, 0)`: `σ⁻ = e_λ` with `X(e_λ) ∈ dy`.
    pub fn last_down_density(&self, x: f64, y: f64) -> Result<f64> {
        self.check_open(y, self.corridor().c, 0.0)?;
        Ok(self.lambda * self.resolvent.density(x, y)?)
    }

    /// `(λ/φ(λ)) u(x, 0)`: the part of the `σ⁻` transform with `X(σ⁻) = 0`.
    pub fn last_down_creep(&self, x: f64) -> Result<f64> {
        Ok(self.lambda / self.phi() * self.u_at_zero(x)?)
    }

    /// `ψ'(φ(λ)) u(x, 0)`: the transform at the last zero.
    pub fn last_hit(&self, x: f64) -> Result<f64> {
        Ok(self.model.psi_prime_real(self.phi()) * self.u_at_zero(x)?)
    }

    /// The integrated transform `E_x[e^{−L(σ)}; 0 < σ ≤ τ_d^+ ∧ τ_c^−]`.
    pub fn total(&self, x: f64, kind: LastKind) -> Result<f64> {
        let row = self.resolvent.row(x)?;
        let cor = self.corridor();
        match kind {
            LastKind::SigmaPlus => {
                let mass = row.integrate(0.0, cor.d, |y| self.lambda + self.nu(y))?;
                Ok(self.last_up_atom(x)? + mass)
            }
            LastKind::SigmaMinus => {
                let mass = row.integrate(cor.c, 0.0, |_| 1.0)?;
                Ok(self.lambda / self.phi() * row.at(0.0) + self.lambda * mass)
            }
            LastKind::SigmaZero => self.last_hit(x),
        }
    }

    /// Density in `y > 0` of `E_x[e^{−L(σ⁺)}; X(σ⁺) = 0, −X(e_λ) ∈ dy, …]`.
    pub fn joint_up_creep_density(&self, x: f64, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return domain(format!("need y > 0, got {y}"));
        }
        let u0 = self.u_at_zero(x)?;
        if !self.model.has_gaussian() {
            return Ok(0.0);
        }
        let s2 = 0.5 * self.model.sigma() * self.model.sigma();
        Ok(self.lambda * u0 * s2 * creep_factor(&self.scale, y))
    }

    /// Density in `y > 0` of `E_x[e^{−L(σ⁻)}; X(σ⁻) = 0, X(e_λ) ∈ dy, …]`.
    pub fn joint_down_creep_density(&self, x: f64, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return domain(format!("need y > 0, got {y}"));
        }
        Ok(self.lambda * self.u_at_zero(x)? * (-self.phi() * y).exp())
    }

    /// Density in `z ≠ 0` of `E_x[e^{−L(σ⁰)}; X(e_λ) ∈ dz, …]`:
    /// `λ u(x,0)(e^{φ(λ)z} − W^{(λ)}(z)/φ'(λ))`.
    pub fn joint_hit_density(&self, x: f64, z: f64) -> Result<f64> {
        if z == 0.0 {
            return domain("the hit joint density is defined for z != 0");
        }
        let u0 = self.u_at_zero(x)?;
        let factor = if z < 0.0 {
            (self.phi() * z).exp()
        } else {
            -self.scale.w_subdominant(z) / self.scale.phi_prime()
        };
        Ok(self.lambda * u0 * factor)
    }

    /// Density, for the process started at 0, of
    /// `E[e^{L(σ⁰) − L(σ⁺)}; X(σ⁺−) ∈ dz, −X(σ⁺) ∈ dy, −X(e_λ) ∈ dx, 0 < σ⁰ < σ⁺ ≤ τ_d^+ ∧ τ_c^−]`
    /// with respect to `dx dy dz`, for `x, y > 0`, `x ≠ y` and `0 < z < d`.
    pub fn difference_density(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        let d = self.corridor().d;
        let c = self.corridor().c;
        if !(x > 0.0 && y > 0.0) || x == y {
            return domain(format!("need x, y > 0 with x != y, got x={x}, y={y}"));
        }
        self.check_open(z, 0.0, d)?;
        let w = &self.scale;
        let potential = (-w.phi() * y).exp() * w.w(x) - w.w(x - y);
        let k = self.resolvent.kernel();
        let ratio = k.cal_w_ab(d, z) / k.cal_w_ab(d, 0.0);
        let green = w.w(-c) * w.w(d) / w.w(d - c) - w.w_zero();
        Ok(self.lambda * potential * ratio * green * self.model.levy_density(z + y))
    }

    fn check_open(&self, y: f64, lo: f64, hi: f64) -> Result<()> {
        if !(y > lo && y < hi) {
            return domain(format!("y={y} lies outside ({lo}, {hi})"));
        }
        Ok(())
    }
}
