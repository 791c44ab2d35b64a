//! Occupation-weighted kernels `𝒲_a`, `𝒲_{(a,b)}`, `ℋ_a`, `ℋ_{(a,b)}`.
//!
//! The clock runs at rate `p` outside `(a, b)` and at rate `q` inside. Every
//! kernel is a scale function of order `p` corrected by a convolution that is
//! evaluated with composite Gauss–Legendre rules on the support of the
//! integrand.

use crate::error::{domain, Result};
use crate::levy::LevyModel;
use crate::quad::{self, QuadSettings};
use crate::scale::{ScaleBackend, ScaleEval};

/// Clock rates `p` (outside) and `q` (inside) and the interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationWindow {
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
}

impl OccupationWindow {
    pub fn new(p: f64, q: f64, a: f64, b: f64) -> Result<Self> {
        if !(p >= 0.0 && p.is_finite()) || !(q >= 0.0 && q.is_finite()) {
            return domain(format!(
                "clock rates must be finite and >= 0, got p={p}, q={q}"
            ));
        }
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return domain(format!("window needs a <= b, got a={a}, b={b}"));
        }
        Ok(Self { p, q, a, b })
    }

    /// A window whose clock runs at `rate` everywhere.
    pub fn constant(rate: f64) -> Result<Self> {
        Self::new(rate, rate, 0.0, 0.0)
    }

    /// Both rates raised by `lambda`.
    pub fn shifted(&self, lambda: f64) -> Self {
        Self {
            p: self.p + lambda,
            q: self.q + lambda,
            ..*self
        }
    }

    /// True when the clock does not depend on the position.
    pub fn is_constant(&self) -> bool {
        self.p == self.q || self.a == self.b
    }

    /// Clock rate at `x`.
    pub fn rate_at(&self, x: f64) -> f64 {
        if x > self.a && x < self.b {
            self.q
        } else {
            self.p
        }
    }
}

/// Kernel evaluator for one model and one window.
#[derive(Debug, Clone)]
pub struct KernelEval {
    window: OccupationWindow,
    wp: ScaleEval,
    wq: ScaleEval,
    settings: QuadSettings,
    layer: f64,
}

impl KernelEval {
    pub fn new(model: &LevyModel, window: OccupationWindow) -> Result<Self> {
        Self::with_settings(model, window, QuadSettings::default(), ScaleBackend::Auto)
    }

    pub fn with_settings(
        model: &LevyModel,
        window: OccupationWindow,
        settings: QuadSettings,
        backend: ScaleBackend,
    ) -> Result<Self> {
        let window = OccupationWindow::new(window.p, window.q, window.a, window.b)?;
        let wp = ScaleEval::with_backend(model, window.p, backend)?;
        let wq = if window.q == window.p {
            wp.clone()
        } else {
            ScaleEval::with_backend(model, window.q, backend)?
        };
        // Near 0 the scale function moves on the scale σ²/(2|D|); a small
        // Gaussian part against a drift leaves a thin layer at each end.
        let (s, d) = (model.sigma(), model.drift().abs());
        let layer = if s > 0.0 && d > 0.0 {
            s * s / (2.0 * d)
        } else {
            f64::INFINITY
        };
        Ok(Self {
            window,
            wp,
            wq,
            settings,
            layer,
        })
    }

    pub fn window(&self) -> &OccupationWindow {
        &self.window
    }

    pub fn model(&self) -> &LevyModel {
        self.wp.model()
    }

    pub fn settings(&self) -> &QuadSettings {
        &self.settings
    }

    /// Scale function of order `p`.
    pub fn scale_p(&self) -> &ScaleEval {
        &self.wp
    }

    /// Scale function of order `q`.
    pub fn scale_q(&self) -> &ScaleEval {
        &self.wq
    }

    fn collapsed(&self) -> bool {
        self.window.is_constant()
    }

    fn dq(&self) -> f64 {
        self.window.q - self.window.p
    }

    fn integrate<F: FnMut(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> f64 {
        let len = hi - lo;
        if !(self.layer < 0.05 * len) {
            return quad::composite(f, lo, hi, &[], &self.settings);
        }
        let mut breaks = Vec::new();
        let mut h = self.layer;
        while h < 0.5 * len {
            breaks.push(lo + h);
            breaks.push(hi - h);
            h *= 4.0;
        }
        quad::composite(f, lo, hi, &breaks, &self.settings)
    }

    /// `𝒲_a(x, y) = W_p(x−y) + (q−p) ∫_a^x W_q(x−z) W_p(z−y) dz`.
    pub fn cal_w_a(&self, x: f64, y: f64) -> f64 {
        let base = self.wp.w(x - y);
        if self.window.p == self.window.q {
            return base;
        }
        let lo = self.window.a.max(y);
        base + self.dq() * self.integrate(|z| self.wq.w(x - z) * self.wp.w(z - y), lo, x)
    }

    /// `𝒲_{(a,b)}(x, y) = W_p(x−y) + (q−p) ∫_a^b W_p(x−z) 𝒲_a(z, y) dz`.
    pub fn cal_w_ab(&self, x: f64, y: f64) -> f64 {
        let base = self.wp.w(x - y);
        if self.collapsed() {
            return base;
        }
        let lo = self.window.a.max(y);
        let hi = self.window.b.min(x);
        base + self.dq() * self.integrate(|z| self.wp.w(x - z) * self.cal_w_a(z, y), lo, hi)
    }

    /// `𝒲_{(a,b)}` through `𝒲_a(x, y) − (q−p) ∫_b^x W_p(x−z) 𝒲_a(z, y) dz`.
    pub fn cal_w_ab_alt(&self, x: f64, y: f64) -> f64 {
        if self.collapsed() {
            return self.wp.w(x - y);
        }
        let lo = self.window.b.max(y);
        self.cal_w_a(x, y)
            - self.dq() * self.integrate(|z| self.wp.w(x - z) * self.cal_w_a(z, y), lo, x)
    }

    /// `ℋ_a(x) = e^{φ(p)x} + (q−p) ∫_a^x W_q(x−z) e^{φ(p)z} dz`.
    pub fn cal_h_a(&self, x: f64) -> f64 {
        let phi = self.wp.phi();
        let base = (phi * x).exp();
        if self.window.p == self.window.q || x <= self.window.a {
            return base;
        }
        // the convolution equals e^{φ(p)x} ∫_0^{x−a} W_q(u) e^{−φ(p)u} du
        base * (1.0 + self.dq() * self.wq.integral_exp(phi, x - self.window.a))
    }

    /// `ℋ(x) = ℋ_0(x)`, the kernel with the interval's left end moved to 0.
    pub fn cal_h(&self, x: f64) -> f64 {
        let phi = self.wp.phi();
        let base = (phi * x).exp();
        if self.window.p == self.window.q || x <= 0.0 {
            return base;
        }
        base * (1.0 + self.dq() * self.wq.integral_exp(phi, x))
    }

    /// `ℋ_{(a,b)}(x) = e^{φ(p)x} + (q−p) ∫_a^b W_p(x−z) ℋ_a(z) dz`.
    pub fn cal_h_ab(&self, x: f64) -> f64 {
        let base = (self.wp.phi() * x).exp();
        if self.collapsed() {
            return base;
        }
        let hi = self.window.b.min(x);
        base + self.dq() * self.integrate(|z| self.wp.w(x - z) * self.cal_h_a(z), self.window.a, hi)
    }

    /// `ℋ_{(a,b)}` through `e^{φ(p)a}[ℋ(x−a) − (q−p) ∫_b^x W_p(x−z) ℋ(z−a) dz]`.
    pub fn cal_h_ab_alt(&self, x: f64) -> f64 {
        if self.collapsed() {
            return (self.wp.phi() * x).exp();
        }
        let a = self.window.a;
        let tail = self.integrate(|z| self.wp.w(x - z) * self.cal_h(z - a), self.window.b, x);
        (self.wp.phi() * a).exp() * (self.cal_h(x - a) - self.dq() * tail)
    }
}
