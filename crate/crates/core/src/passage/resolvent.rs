use crate::error::{domain, Result};
use crate::kernels::{KernelEval, OccupationWindow};
use crate::levy::LevyModel;
use crate::quad::{self, QuadSettings};
use crate::scale::ScaleBackend;

/// Exit levels `c < 0 < d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corridor {
    pub c: f64,
    pub d: f64,
}

impl Corridor {
    pub fn new(c: f64, d: f64) -> Result<Self> {
        if !(c < 0.0) || !c.is_finite() {
            return domain(format!("corridor needs c < 0, got c={c}"));
        }
        if !(d > 0.0) || !d.is_finite() {
            return domain(format!("corridor needs d > 0, got d={d}"));
        }
        Ok(Self { c, d })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.c && x <= self.d
    }

    /// Checks `c ≤ a ≤ b ≤ d`, naming the first inequality that fails.
    pub fn check_window(&self, w: &OccupationWindow) -> Result<()> {
        if !(self.c <= w.a) {
            return domain(format!("c ≤ a violated (c={}, a={})", self.c, w.a));
        }
        if !(w.a <= w.b) {
            return domain(format!("a ≤ b violated (a={}, b={})", w.a, w.b));
        }
        if !(w.b <= self.d) {
            return domain(format!("b ≤ d violated (b={}, d={})", w.b, self.d));
        }
        Ok(())
    }

    pub(crate) fn check_point(&self, x: f64) -> Result<()> {
        if !self.contains(x) {
            return domain(format!("x={x} lies outside [{}, {}]", self.c, self.d));
        }
        Ok(())
    }
}

/// Density `u(x, y)` of the clock-discounted occupation measure of the
/// process killed on leaving `[c, d]`:
/// `u(x,y) = 𝒲_{(a,b)}(x,c)/𝒲_{(a,b)}(d,c) · 𝒲_{(a,b)}(d,y) − 𝒲_{(a,b)}(x,y)`.
#[derive(Debug, Clone)]
pub struct CorridorResolvent {
    kernel: KernelEval,
    corridor: Corridor,
    w_dc: f64,
}

impl CorridorResolvent {
    pub fn new(model: &LevyModel, window: OccupationWindow, corridor: Corridor) -> Result<Self> {
        Self::with_settings(
            model,
            window,
            corridor,
            QuadSettings::default(),
            ScaleBackend::Auto,
        )
    }

    pub fn with_settings(
        model: &LevyModel,
        window: OccupationWindow,
        corridor: Corridor,
        settings: QuadSettings,
        backend: ScaleBackend,
    ) -> Result<Self> {
        corridor.check_window(&window)?;
        let kernel = KernelEval::with_settings(model, window, settings, backend)?;
        let w_dc = kernel.cal_w_ab(corridor.d, corridor.c);
        Ok(Self {
            kernel,
            corridor,
            w_dc,
        })
    }

    pub fn kernel(&self) -> &KernelEval {
        &self.kernel
    }

    pub fn corridor(&self) -> &Corridor {
        &self.corridor
    }

    /// `E_x[e^{−L(τ_d^+)}; τ_d^+ < τ_c^−]`.
    pub fn exit_up(&self, x: f64) -> Result<f64> {
        self.corridor.check_point(x)?;
        Ok(self.kernel.cal_w_ab(x, self.corridor.c) / self.w_dc)
    }

    /// Fixes the starting point; evaluating many `y` then costs one kernel
    /// pair per point.
    pub fn row(&self, x: f64) -> Result<ResolventRow<'_>> {
        self.corridor.check_point(x)?;
        Ok(ResolventRow {
            parent: self,
            x,
            ratio: self.kernel.cal_w_ab(x, self.corridor.c) / self.w_dc,
        })
    }

    /// `u(x, y)` for `x, y ∈ [c, d]`.
    pub fn density(&self, x: f64, y: f64) -> Result<f64> {
        self.corridor.check_point(y)?;
        Ok(self.row(x)?.at(y))
    }

    /// `∫_c^d f(y) u(x, y) dy`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, x: f64, f: F) -> Result<f64> {
        self.row(x)?.integrate(self.corridor.c, self.corridor.d, f)
    }
}

/// `y ↦ u(x, y)` for one starting point.
#[derive(Debug, Clone, Copy)]
pub struct ResolventRow<'a> {
    parent: &'a CorridorResolvent,
    x: f64,
    ratio: f64,
}

impl ResolventRow<'_> {
    pub fn x(&self) -> f64 {
        self.x
    }

    /// `u(x, y)`; callers keep `y` inside the corridor.
    pub fn at(&self, y: f64) -> f64 {
        let k = &self.parent.kernel;
        // Started at c with a Gaussian part, the path leaves at once.
        if self.x == self.parent.corridor.c && k.model().has_gaussian() {
            return 0.0;
        }
        if k.window().is_constant() && k.scale_p().phi_prime().is_finite() {
            return self.at_constant_clock(y);
        }
        self.ratio * k.cal_w_ab(self.parent.corridor.d, y) - k.cal_w_ab(self.x, y)
    }

    /// With a constant clock `u` is built from plain scale functions. Writing
    /// `W = φ'e^{φt} + S(t)` the leading exponentials cancel exactly, which
    /// keeps wide corridors accurate.
    fn at_constant_clock(&self, y: f64) -> f64 {
        let w = self.parent.kernel.scale_p();
        let (phi, dp) = (w.phi(), w.phi_prime());
        let cor = &self.parent.corridor;
        let (a, b, c, d) = (self.x - cor.c, cor.d - y, cor.d - cor.c, self.x - y);
        let s = |t: f64| w.w_subdominant(t);
        let (sa, sb, sc, sd) = (s(a), s(b), s(c), s(d));
        let e = (-phi * c).exp();
        let num = dp
            * ((phi * (a - c)).exp() * sb + (phi * (b - c)).exp() * sa
                - sd
                - (phi * (d - c)).exp() * sc)
            + e * (sa * sb - sc * sd);
        num / (dp + e * sc)
    }

    /// `∫_lo^hi f(y) u(x, y) dy` over a sub-range of the corridor, with panel
    /// breaks at the kinks `a`, `b`, `x`, `0`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> Result<f64> {
        let cor = &self.parent.corridor;
        if lo < cor.c || hi > cor.d {
            return domain(format!(
                "integration range [{lo}, {hi}] leaves the corridor"
            ));
        }
        let w = self.parent.kernel.window();
        let breaks = [w.a, w.b, self.x, 0.0];
        Ok(quad::composite(
            |y| f(y) * self.at(y),
            lo,
            hi,
            &breaks,
            self.parent.kernel.settings(),
        ))
    }
}
