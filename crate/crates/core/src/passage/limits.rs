use crate::error::{domain, Error, Result};
use crate::kernels::OccupationWindow;
use crate::levy::LevyModel;
use crate::scale::{ScaleEval, TiltedScale};

use super::last::LastKind;
use super::measure::capacity_measure_at_infinity;
use super::resolvent::{Corridor, CorridorResolvent};

/// `P_x(σ = 0)`: the path never reaches the relevant set before `e_λ`.
pub fn prob_sigma_zero(model: &LevyModel, lambda: f64, x: f64, kind: LastKind) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("killing rate must be > 0, got {lambda}"));
    }
    let w = ScaleEval::new(model, lambda)?;
    let phi = w.phi();
    Ok(match kind {
        LastKind::SigmaPlus => {
            if x < 0.0 {
                -(phi * x).exp_m1()
            } else {
                0.0
            }
        }
        LastKind::SigmaMinus => 1.0 - w.z(x) + lambda / phi * w.w(x),
        LastKind::SigmaZero => {
            if x < 0.0 {
                -(phi * x).exp_m1()
            } else if x == 0.0 && model.has_gaussian() {
                // W(0) = 0: the path returns to 0 at once
                0.0
            } else {
                // 1 − e^{φx} + W(x)/φ'
                1.0 + w.w_subdominant(x) / w.phi_prime()
            }
        }
    })
}

/// Result of an unkilled (`λ = 0`) last-passage transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitValue {
    pub value: f64,
    /// Set when the last time is almost surely infinite, so no finite last
    /// time inside the corridor exists and `value` is 0.
    pub infinite: bool,
}

/// Transforms at `σ_∞ = lim_{λ→0} σ_{e_λ}` with the clock `L^{(p,q)}`.
///
/// Drifting to +∞: `σ⁻` and `σ⁰` give `ψ'(0) u(x, 0)`; `σ⁺` is infinite and
/// rejected. Drifting to −∞: `σ⁺` integrates `u(x, ·)` against the limiting
/// capacity measure and `σ⁰` gives `ψ'(φ(0)) u(x, 0)`; `σ⁻` is rejected.
/// Oscillating: every last time is infinite.
pub fn last_infty(
    model: &LevyModel,
    window: OccupationWindow,
    corridor: Corridor,
    x: f64,
    kind: LastKind,
) -> Result<LimitValue> {
    corridor.check_window(&window)?;
    corridor.check_point(x)?;
    let slope = model.psi_prime_at_zero();
    if slope.abs() <= 1e-14 {
        return Ok(LimitValue {
            value: 0.0,
            infinite: true,
        });
    }
    let res = CorridorResolvent::new(model, window, corridor)?;
    let value = if slope > 0.0 {
        match kind {
            LastKind::SigmaMinus | LastKind::SigmaZero => slope * res.density(x, 0.0)?,
            LastKind::SigmaPlus => {
                return Err(Error::Domain(
                    "the last time above 0 is infinite for a process drifting to +infinity".into(),
                ))
            }
        }
    } else {
        match kind {
            LastKind::SigmaPlus => {
                let mu = capacity_measure_at_infinity(model)?;
                let row = res.row(x)?;
                mu.atom_at_zero * row.at(0.0) + row.integrate(0.0, corridor.d, |y| mu.density(y))?
            }
            LastKind::SigmaZero => {
                let phi0 = model.phi(0.0)?;
                model.psi_prime_real(phi0) * res.density(x, 0.0)?
            }
            LastKind::SigmaMinus => {
                return Err(Error::Domain(
                    "the last time below 0 is infinite for a process drifting to -infinity".into(),
                ))
            }
        }
    };
    Ok(LimitValue {
        value,
        infinite: false,
    })
}

/// `E_x[e^{−pσ}]` on the whole line with a constant clock (`p = q`), where
/// `σ` is the last time of the given kind before `e_λ`.
pub fn example_pq_equal(
    model: &LevyModel,
    p: f64,
    lambda: f64,
    x: f64,
    kind: LastKind,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("killing rate must be > 0, got {lambda}"));
    }
    if !(p >= 0.0) {
        return domain(format!("p must be >= 0, got {p}"));
    }
    let wl = ScaleEval::new(model, lambda)?;
    let wpl = ScaleEval::new(model, p + lambda)?;
    let (phi_l, phi_pl) = (wl.phi(), wpl.phi());
    Ok(match kind {
        LastKind::SigmaPlus => {
            // p φ(λ) φ'(p+λ) / ((φ(p+λ) − φ(λ)) φ(p+λ)) tends to 1 as p → 0
            let first = if p < 1e-6 {
                (phi_l * x).exp()
            } else {
                p * phi_l * wpl.phi_prime() / ((phi_pl - phi_l) * phi_pl) * (phi_pl * x).exp()
            };
            let tilted = TiltedScale::new(model, phi_l, p)?;
            let bracket = (phi_l * x).exp() * tilted.z(x)
                - p / (p + lambda) * wpl.z(x)
                - lambda / (p + lambda);
            first - bracket
        }
        LastKind::SigmaMinus => {
            let ratio = lambda / phi_l;
            wpl.phi_prime() * (phi_pl * x).exp() * (ratio - lambda / phi_pl)
                + lambda / (p + lambda) * wpl.z(x)
                - ratio * wpl.w(x)
                + (1.0 - wl.z(x) + ratio * wl.w(x))
        }
        LastKind::SigmaZero => {
            let inv = 1.0 / wl.phi_prime();
            if x < 0.0 {
                -(phi_l * x).exp_m1() + inv * wpl.phi_prime() * (phi_pl * x).exp()
            } else {
                // both brackets written through the subdominant parts
                1.0 + inv * wl.w_subdominant(x) - inv * wpl.w_subdominant(x)
            }
        }
    })
}
