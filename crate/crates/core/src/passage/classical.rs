use crate::error::{domain, Error, Result};
use crate::kernels::{KernelEval, OccupationWindow};
use crate::levy::LevyModel;
use crate::quad;
use crate::scale::{ScaleEval, TiltedScale};

use super::{creep_factor, q_over_phi};

/// Which classical fluctuation identity [`classical_exit`] evaluates. The
/// discount rate is the `q` argument throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitMode {
    /// `E_x[e^{−qτ_d^+}; τ_d^+ < ∞]`, `x ≤ d`.
    UpOneSided { d: f64 },
    /// `E_x[e^{−qτ_c^−}; τ_c^− < ∞]`, `x ≥ c`.
    DownOneSided { c: f64 },
    /// `E_x[e^{−qτ_d^+}; τ_d^+ < τ_c^−]`, `c ≤ x ≤ d`.
    UpTwoSided { c: f64, d: f64 },
    /// `E_x[e^{−qτ_c^− + v(X(τ_c^−) − c)}; τ_c^− < τ_d^+]` with `v ≥ 0`.
    /// Uses the tilted scale functions of order `q − ψ(v)`.
    DownTwoSided { c: f64, d: f64, v: f64 },
    /// `E_x[e^{−qτ_c^−}; X(τ_c^−) = c]`, `x ≥ c`.
    Creep { c: f64 },
    /// `E_x[e^{−qτ^{{ℓ}}}; τ^{{ℓ}} < ∞]` for the first hitting time of `ℓ`.
    Hit { level: f64 },
}

/// Classical one- and two-sided exit, creeping and hitting transforms.
pub fn classical_exit(model: &LevyModel, q: f64, x: f64, mode: ExitMode) -> Result<f64> {
    let w = ScaleEval::new(model, q)?;
    match mode {
        ExitMode::UpOneSided { d } => {
            if x > d {
                return domain(format!("need x <= d, got x={x}, d={d}"));
            }
            Ok((-w.phi() * (d - x)).exp())
        }
        ExitMode::DownOneSided { c } => {
            if x < c {
                return domain(format!("need x >= c, got x={x}, c={c}"));
            }
            let y = x - c;
            Ok(w.z(y) - q_over_phi(model, q, w.phi()) * w.w(y))
        }
        ExitMode::UpTwoSided { c, d } => {
            check_two_sided(x, c, d)?;
            Ok(w.w(x - c) / w.w(d - c))
        }
        ExitMode::DownTwoSided { c, d, v } => {
            check_two_sided(x, c, d)?;
            let t = TiltedScale::new(model, v, q - model.psi(v)?)?;
            let (y, h) = (x - c, d - c);
            Ok((v * y).exp() * (t.z(y) - t.w(y) * t.z(h) / t.w(h)))
        }
        ExitMode::Creep { c } => {
            if x < c {
                return domain(format!("need x >= c, got x={x}, c={c}"));
            }
            if !model.has_gaussian() {
                return Ok(0.0);
            }
            let s2 = 0.5 * model.sigma() * model.sigma();
            Ok(s2 * creep_factor(&w, x - c))
        }
        ExitMode::Hit { level } => {
            let y = x - level;
            if y < 0.0 || !w.phi_prime().is_finite() {
                return Ok((w.phi() * y.min(0.0)).exp());
            }
            // e^{φy} − W(y)/φ' = −(W(y) − φ' e^{φy})/φ'
            Ok(-w.w_subdominant(y) / w.phi_prime())
        }
    }
}

fn check_two_sided(x: f64, c: f64, d: f64) -> Result<()> {
    if !(c < d) || x < c || x > d {
        return domain(format!(
            "need c <= x <= d with c < d, got c={c}, x={x}, d={d}"
        ));
    }
    Ok(())
}

/// `R^{(q)}(x, dy)/dy = e^{−φ(q)y} W^{(q)}(x) − W^{(q)}(x − y)`: the
/// `q`-potential density of the process killed below 0.
pub fn classical_potential_density(model: &LevyModel, q: f64, x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 {
        return domain(format!(
            "potential density needs x, y >= 0, got x={x}, y={y}"
        ));
    }
    let w = ScaleEval::new(model, q)?;
    Ok((-w.phi() * y).exp() * w.w(x) - w.w(x - y))
}

/// `E_x[e^{−L(τ_d^+)}; τ_d^+ < τ_c^−]` when `c` is given, otherwise
/// `E_x[e^{−L(τ_d^+)}; τ_d^+ < ∞]`. The one-sided ratio is taken with
/// `ℋ_{(a,b)}(d)` in the denominator so that it equals 1 at `x = d`.
pub fn first_passage_occupation(
    model: &LevyModel,
    window: OccupationWindow,
    x: f64,
    c: Option<f64>,
    d: f64,
) -> Result<f64> {
    let k = KernelEval::new(model, window)?;
    match c {
        Some(c) => {
            check_two_sided(x, c, d)?;
            Ok(k.cal_w_ab(x, c) / k.cal_w_ab(d, c))
        }
        None => {
            if x > d {
                return domain(format!("need x <= d, got x={x}, d={d}"));
            }
            Ok(k.cal_h_ab(x) / k.cal_h_ab(d))
        }
    }
}

/// Density of `∫_0^∞ E_x[e^{−L(t)}; X(t) ∈ dy] dt` on the whole line.
#[derive(Debug, Clone)]
pub struct GlobalResolvent {
    kernel: KernelEval,
    denom: f64,
}

impl GlobalResolvent {
    /// Fails when the clock does not grow fast enough for the integral to
    /// converge, i.e. when `ψ'(φ(p)) + (q−p) ∫_0^{b−a} e^{−φ(p)z} ℋ(z) dz ≤ 0`.
    pub fn new(model: &LevyModel, window: OccupationWindow) -> Result<Self> {
        let kernel = KernelEval::new(model, window)?;
        let sp = kernel.scale_p();
        let slope = if sp.phi() > 0.0 {
            model.psi_prime_real(sp.phi())
        } else {
            model.psi_prime_at_zero()
        };
        let dq = window.q - window.p;
        let extra = if dq == 0.0 {
            0.0
        } else {
            let phi = sp.phi();
            let sq = kernel.scale_q();
            dq * quad::composite(
                |z| 1.0 + dq * sq.integral_exp(phi, z),
                0.0,
                window.b - window.a,
                &[],
                kernel.settings(),
            )
        };
        let denom = slope + extra;
        if !(denom > 0.0) {
            return Err(Error::Domain(format!(
                "resolvent diverges: normalising constant is {denom}"
            )));
        }
        Ok(Self { kernel, denom })
    }

    pub fn kernel(&self) -> &KernelEval {
        &self.kernel
    }

    /// The normalising constant `ψ'(φ(p)) + (q−p) ∫_0^{b−a} e^{−φ(p)z} ℋ(z) dz`.
    pub fn normaliser(&self) -> f64 {
        self.denom
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let w = self.kernel.window();
        let k = &self.kernel;
        let s = w.a + w.b;
        let phi = k.scale_p().phi();
        (-phi * s).exp() * k.cal_h_ab(x) * k.cal_h_ab(s - y) / self.denom - k.cal_w_ab(x, y)
    }
}

/// One-shot form of [`GlobalResolvent::density`].
pub fn global_resolvent_density(
    model: &LevyModel,
    window: OccupationWindow,
    x: f64,
    y: f64,
) -> Result<f64> {
    Ok(GlobalResolvent::new(model, window)?.density(x, y))
}
