//! Scale functions `W^{(q)}` and `Z^{(q)}` and their tilted versions.
//!
//! For the in-scope families `1/(ψ(θ) − q)` is rational, so `W^{(q)}` is a
//! finite sum of exponentials (times a linear factor at a double root). The
//! residues are computed once per order. Models with a generic jump law go
//! through Euler-accelerated Laplace inversion instead; the closed forms serve
//! as the reference for that engine.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::inversion::EulerInversion;
use crate::levy::{JumpSpec, LevyModel};
use crate::quad;

/// Which evaluation route a [`ScaleEval`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ScaleBackend {
    /// Closed form when the model allows it, numeric inversion otherwise.
    #[default]
    Auto,
    ClosedForm,
    NumericInversion(EulerInversion),
}

#[derive(Debug, Clone, Copy)]
struct RealTerm {
    rate: f64,
    c0: f64,
    c1: f64,
}

/// Stands for `2·Re(e^{rate·x}(c0 + c1·x))`, i.e. a conjugate pair.
#[derive(Debug, Clone, Copy)]
struct PairTerm {
    rate: Complex64,
    c0: Complex64,
    c1: Complex64,
}

#[derive(Debug, Clone)]
struct Expansion {
    real: Vec<RealTerm>,
    pairs: Vec<PairTerm>,
    /// Index into `real` of the simple root at `φ(q)`, if it is simple.
    dominant: Option<usize>,
}

#[derive(Debug, Clone)]
enum Engine {
    Closed(Expansion),
    Numeric(EulerInversion),
}

/// Evaluator of `W^{(q)}`, `W^{(q)′}`, `Z^{(q)}` for one model and one order.
///
/// Immutable after construction and safe to share between threads.
#[derive(Debug, Clone)]
pub struct ScaleEval {
    model: LevyModel,
    q: f64,
    phi: f64,
    phi_prime: f64,
    w0: f64,
    engine: Engine,
}

impl ScaleEval {
    pub fn new(model: &LevyModel, q: f64) -> Result<Self> {
        Self::with_backend(model, q, ScaleBackend::Auto)
    }

    pub fn with_backend(model: &LevyModel, q: f64, backend: ScaleBackend) -> Result<Self> {
        if !(q >= 0.0) || !q.is_finite() {
            return domain(format!("scale function order must be >= 0, got {q}"));
        }
        let phi = model.phi(q)?;
        let phi_prime = model.phi_prime(q)?;
        let closed_possible = !matches!(model.jumps(), JumpSpec::Generic { .. });
        let engine = match backend {
            ScaleBackend::Auto if closed_possible => Engine::Closed(expansion(model, q, phi)?),
            ScaleBackend::Auto => Engine::Numeric(EulerInversion::default()),
            ScaleBackend::ClosedForm if closed_possible => {
                Engine::Closed(expansion(model, q, phi)?)
            }
            ScaleBackend::ClosedForm => {
                return Err(Error::Unsupported(
                    "closed-form scale functions need a rational Laplace exponent".into(),
                ))
            }
            ScaleBackend::NumericInversion(inv) => Engine::Numeric(inv),
        };
        Ok(Self {
            model: model.clone(),
            q,
            phi,
            phi_prime,
            w0: model.scale_at_zero(),
            engine,
        })
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn order(&self) -> f64 {
        self.q
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `φ'(q)`; infinite for `q = 0` when the process oscillates.
    pub fn phi_prime(&self) -> f64 {
        self.phi_prime
    }

    /// `W^{(q)}(0)`.
    pub fn w_zero(&self) -> f64 {
        self.w0
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.engine, Engine::Closed(_))
    }

    /// `W^{(q)}(x)`, zero for `x < 0`.
    pub fn w(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return self.w0;
        }
        match &self.engine {
            Engine::Closed(e) => e.eval(x, |_| true).max(0.0),
            Engine::Numeric(inv) => {
                let (m, q, phi) = (&self.model, self.q, self.phi);
                (phi * x).exp() * inv.invert(|s| 1.0 / (m.psi_complex(s + phi) - q), x)
            }
        }
    }

    /// `W^{(q)′}(x)` for `x > 0`. Without a Gaussian part `W` is still
    /// differentiable on `(0, ∞)` for the exponential-claims family; kinks
    /// at the support points of other jump laws are not resolved.
    pub fn w_prime(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.engine {
            Engine::Closed(e) => e.eval_prime(x, |_| true),
            Engine::Numeric(inv) => {
                if x == 0.0 {
                    // right derivative from a short one-sided difference
                    let h = 1e-6;
                    return (self.w(h) - self.w0) / h;
                }
                let (m, q, phi, w0) = (&self.model, self.q, self.phi, self.w0);
                (phi * x).exp() * inv.invert(|s| (s + phi) / (m.psi_complex(s + phi) - q) - w0, x)
            }
        }
    }

    /// `∫_0^x e^{−c y} W^{(q)}(y) dy` for `x ≥ 0` (0 for `x ≤ 0`).
    pub fn integral_exp(&self, c: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.engine {
            Engine::Closed(e) => e.integral_exp(c, x),
            Engine::Numeric(_) => quad::adaptive(|y| (-c * y).exp() * self.w(y), 0.0, x, 1e-12),
        }
    }

    /// `Z^{(q)}(x) = 1 + q ∫_0^x W^{(q)}(y) dy`, identically 1 for `x ≤ 0`.
    pub fn z(&self, x: f64) -> f64 {
        if x <= 0.0 || self.q == 0.0 {
            return 1.0;
        }
        1.0 + self.q * self.integral_exp(0.0, x)
    }

    /// `W^{(q)}(x) − φ'(q) e^{φ(q) x}` for `x ≥ 0`: the part of `W` that does
    /// not grow at rate `φ(q)`. Computed without cancellation in the closed
    /// form. NaN when `φ'(q)` is infinite.
    pub fn w_subdominant(&self, x: f64) -> f64 {
        if !self.phi_prime.is_finite() {
            return f64::NAN;
        }
        if x < 0.0 {
            return -self.phi_prime * (self.phi * x).exp();
        }
        match &self.engine {
            Engine::Closed(e) => match e.dominant {
                Some(k) => e.eval(x, |i| i != k),
                None => f64::NAN,
            },
            Engine::Numeric(inv) => {
                if x == 0.0 {
                    return self.w0 - self.phi_prime;
                }
                let (m, q, phi, dp) = (&self.model, self.q, self.phi, self.phi_prime);
                inv.invert(
                    |s| removable(s, phi, |z| 1.0 / (m.psi_complex(z) - q) - dp / (z - phi)),
                    x,
                )
            }
        }
    }

    /// Derivative of [`Self::w_subdominant`].
    pub fn w_subdominant_prime(&self, x: f64) -> f64 {
        if !self.phi_prime.is_finite() {
            return f64::NAN;
        }
        match &self.engine {
            Engine::Closed(e) => match e.dominant {
                Some(k) => e.eval_prime(x.max(0.0), |i| i != k),
                None => f64::NAN,
            },
            Engine::Numeric(_) => {
                self.w_prime(x) - self.phi * self.phi_prime * (self.phi * x).exp()
            }
        }
    }
}

fn removable<F: Fn(Complex64) -> Complex64>(s: Complex64, pole: f64, f: F) -> Complex64 {
    let d = s - pole;
    if d.norm() < 1e-7 * (1.0 + pole.abs()) {
        let h = 1e-4 * (1.0 + pole.abs());
        0.5 * (f(s + h) + f(s - h))
    } else {
        f(s)
    }
}

/// Tilted scale functions `W_c^{(q)}(x) = e^{−cx} W^{(q+ψ(c))}(x)` and
/// `Z_c^{(q)}(x) = 1 + q ∫_0^x W_c^{(q)}(y) dy`.
#[derive(Debug, Clone)]
pub struct TiltedScale {
    base: ScaleEval,
    c: f64,
    q: f64,
}

impl TiltedScale {
    /// Requires `c ≥ 0` and `q + ψ(c) ≥ 0`; `q` itself may be negative.
    pub fn new(model: &LevyModel, c: f64, q: f64) -> Result<Self> {
        Self::with_backend(model, c, q, ScaleBackend::Auto)
    }

    pub fn with_backend(model: &LevyModel, c: f64, q: f64, backend: ScaleBackend) -> Result<Self> {
        if !(c >= 0.0) {
            return domain(format!("tilt must be >= 0, got {c}"));
        }
        let order = q + model.psi(c)?;
        if order < 0.0 {
            return domain(format!("q + psi(c) must be >= 0, got {order}"));
        }
        Ok(Self {
            base: ScaleEval::with_backend(model, order, backend)?,
            c,
            q,
        })
    }

    /// The untilted evaluator of order `q + ψ(c)`.
    pub fn base(&self) -> &ScaleEval {
        &self.base
    }

    pub fn w(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        (-self.c * x).exp() * self.base.w(x)
    }

    pub fn z(&self, x: f64) -> f64 {
        if x <= 0.0 || self.q == 0.0 {
            return 1.0;
        }
        1.0 + self.q * self.base.integral_exp(self.c, x)
    }
}

/// `W_c^{(q)}(x)`.
pub fn w_tilted(model: &LevyModel, c: f64, q: f64, x: f64) -> Result<f64> {
    Ok(TiltedScale::new(model, c, q)?.w(x))
}

/// `Z_c^{(q)}(x)`.
pub fn z_tilted(model: &LevyModel, c: f64, q: f64, x: f64) -> Result<f64> {
    Ok(TiltedScale::new(model, c, q)?.z(x))
}

// ---------------------------------------------------------------------------
// closed form

/// Polynomials are stored in ascending powers.
fn poly_eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn poly_deriv(p: &[Complex64]) -> Vec<Complex64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Divides `p` by `(z − root)` and drops the remainder.
fn deflate(p: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let n = p.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut carry = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        carry = p[k + 1] + carry * root;
        out[k] = carry;
    }
    out
}

fn quadratic_roots(p: &[Complex64]) -> Vec<Complex64> {
    match p.len() {
        0 | 1 => vec![],
        2 => vec![-p[0] / p[1]],
        3 => {
            let (c, b, a) = (p[0].re, p[1].re, p[2].re);
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let t = -0.5 * (b + b.signum() * sq);
                if t == 0.0 {
                    vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
                } else {
                    vec![Complex64::new(t / a, 0.0), Complex64::new(c / t, 0.0)]
                }
            } else {
                let re = -b / (2.0 * a);
                let im = (-disc).sqrt() / (2.0 * a);
                vec![Complex64::new(re, im), Complex64::new(re, -im)]
            }
        }
        _ => unreachable!("degree above two after deflation"),
    }
}

fn expansion(model: &LevyModel, q: f64, phi: f64) -> Result<Expansion> {
    let s2 = 0.5 * model.sigma() * model.sigma();
    let d = model.drift();
    let c = |v: f64| Complex64::new(v, 0.0);
    let (mut denom, numer): (Vec<Complex64>, Vec<Complex64>) = match model.jumps() {
        JumpSpec::None => (vec![c(-q), c(d), c(s2)], vec![c(1.0)]),
        JumpSpec::Exponential { rate, alpha } => (
            vec![
                c(-q * alpha),
                c(d * alpha - q - rate),
                c(s2 * alpha + d),
                c(s2),
            ],
            vec![c(*alpha), c(1.0)],
        ),
        JumpSpec::Generic { .. } => unreachable!("generic jumps have no closed form"),
    };
    while denom.len() > 1 && denom.last().is_some_and(|v| v.re == 0.0) {
        denom.pop();
    }

    let mut roots = vec![c(phi)];
    roots.extend(quadratic_roots(&deflate(&denom, c(phi))));
    // polish against the full polynomial
    let dp = poly_deriv(&denom);
    for r in roots.iter_mut().skip(1) {
        for _ in 0..3 {
            let f = poly_eval(&denom, *r);
            let g = poly_eval(&dp, *r);
            if g.norm() == 0.0 {
                break;
            }
            let step = f / g;
            if !step.re.is_finite() || step.norm() > 1e-6 * (1.0 + r.norm()) {
                break;
            }
            *r -= step;
        }
        if r.im.abs() <= 1e-12 * (1.0 + r.norm()) {
            r.im = 0.0;
        }
    }

    // group numerically coincident roots
    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for &r in &roots {
        if let Some(g) = groups
            .iter_mut()
            .find(|(s, _)| (*s - r).norm() <= 1e-9 * (1.0 + r.norm()))
        {
            g.1 += 1;
        } else {
            groups.push((r, 1));
        }
    }

    let mut real = Vec::new();
    let mut pairs = Vec::new();
    let mut dominant = None;
    for (idx, &(r, mult)) in groups.iter().enumerate() {
        let (c0, c1) = match mult {
            1 => (
                poly_eval(&numer, r) / poly_eval(&dp, r),
                Complex64::new(0.0, 0.0),
            ),
            2 => {
                let rest = deflate(&deflate(&denom, r), r);
                let rest_d = poly_deriv(&rest);
                let nd = poly_deriv(&numer);
                let (n0, n1) = (poly_eval(&numer, r), poly_eval(&nd, r));
                let (p0, p1) = (poly_eval(&rest, r), poly_eval(&rest_d, r));
                let g = n0 / p0;
                let g_prime = (n1 * p0 - n0 * p1) / (p0 * p0);
                (g_prime, g)
            }
            _ => {
                return Err(Error::Unsupported(
                    "scale function with a root of multiplicity above two".into(),
                ))
            }
        };
        if r.im == 0.0 {
            if idx == 0 && mult == 1 {
                dominant = Some(real.len());
            }
            real.push(RealTerm {
                rate: r.re,
                c0: c0.re,
                c1: c1.re,
            });
        } else if r.im > 0.0 {
            pairs.push(PairTerm { rate: r, c0, c1 });
        }
    }
    Ok(Expansion {
        real,
        pairs,
        dominant,
    })
}

/// `(e^{kx} − 1)/k` with the `k → 0` limit.
fn expm1_ratio(k: Complex64, x: f64) -> Complex64 {
    let kx = k * x;
    if kx.norm() < 1e-4 {
        x * (1.0 + kx / 2.0 + kx * kx / 6.0 + kx * kx * kx / 24.0)
    } else if k.im == 0.0 {
        Complex64::new(kx.re.exp_m1() / k.re, 0.0)
    } else {
        (kx.exp() - 1.0) / k
    }
}

/// `∫_0^x y e^{ky} dy`.
fn linear_exp_integral(k: Complex64, x: f64) -> Complex64 {
    let kx = k * x;
    if kx.norm() < 1e-4 {
        x * x * (0.5 + kx / 3.0 + kx * kx / 8.0 + kx * kx * kx / 30.0)
    } else {
        (x * kx.exp() - expm1_ratio(k, x)) / k
    }
}

impl Expansion {
    fn eval<K: Fn(usize) -> bool>(&self, x: f64, keep: K) -> f64 {
        let mut acc = 0.0;
        for (i, t) in self.real.iter().enumerate() {
            if keep(i) {
                acc += (t.rate * x).exp() * (t.c0 + t.c1 * x);
            }
        }
        for t in &self.pairs {
            acc += 2.0 * ((t.rate * x).exp() * (t.c0 + t.c1 * x)).re;
        }
        acc
    }

    fn eval_prime<K: Fn(usize) -> bool>(&self, x: f64, keep: K) -> f64 {
        let mut acc = 0.0;
        for (i, t) in self.real.iter().enumerate() {
            if keep(i) {
                acc += (t.rate * x).exp() * (t.rate * (t.c0 + t.c1 * x) + t.c1);
            }
        }
        for t in &self.pairs {
            acc += 2.0 * ((t.rate * x).exp() * (t.rate * (t.c0 + t.c1 * x) + t.c1)).re;
        }
        acc
    }

    fn integral_exp(&self, c: f64, x: f64) -> f64 {
        let mut acc = 0.0;
        for t in &self.real {
            let k = Complex64::new(t.rate - c, 0.0);
            acc += (t.c0 * expm1_ratio(k, x) + t.c1 * linear_exp_integral(k, x)).re;
        }
        for t in &self.pairs {
            let k = t.rate - c;
            acc += 2.0 * (t.c0 * expm1_ratio(k, x) + t.c1 * linear_exp_integral(k, x)).re;
        }
        acc
    }
}


#[cfg(test)]
mod backend_tests {
    use super::*;

    #[test]
    fn numeric_inversion_matches_closed_form() {
        let models = [
            LevyModel::brownian(1.0, 0.3).unwrap(),
            LevyModel::cramer_lundberg(0.5, 1.0, 1.0, 2.0).unwrap(),
            LevyModel::cramer_lundberg(0.0, 2.0, 1.5, 1.0).unwrap(),
        ];
        let inv = ScaleBackend::NumericInversion(EulerInversion::default());
        let mut worst = 0.0f64;
        for m in &models {
            for q in [0.0, 0.5, 2.0, 10.0] {
                let a = ScaleEval::with_backend(m, q, ScaleBackend::ClosedForm).unwrap();
                let b = ScaleEval::with_backend(m, q, inv).unwrap();
                for x in [0.0, 0.1, 0.5, 1.0, 3.0, 7.0, 10.0] {
                    let (u, v) = (a.w(x), b.w(x));
                    worst = worst.max((u - v).abs() / u.abs().max(1e-300));
                    let (u, v) = (a.z(x), b.z(x));
                    worst = worst.max((u - v).abs() / u.abs());
                    if x > 0.0 {
                        let (u, v) = (a.w_prime(x), b.w_prime(x));
                        worst = worst.max((u - v).abs() / u.abs().max(1.0));
                    }
                    if q > 0.0 {
                        let (u, v) = (a.w_subdominant(x), b.w_subdominant(x));
                        worst = worst.max((u - v).abs() / (1.0 + a.w(x).abs()));
                    }
                }
            }
        }
        assert!(worst < 1e-8, "worst relative gap {worst:e}");
    }
}
