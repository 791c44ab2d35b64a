//! Quadrature rules.
//!
//! Composite Gauss–Legendre is the workhorse for the kernel integrals: every
//! integrand is piecewise smooth with known break points, so splitting there
//! and using a high fixed order per panel is both fast and accurate. An
//! adaptive Gauss–Kronrod (7/15) integrator covers integrands without known
//! structure and semi-infinite ranges.

use std::sync::{Arc, OnceLock};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule of the given order; orders used repeatedly are built once.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static RULES: OnceLock<std::sync::Mutex<Vec<Arc<GaussLegendre>>>> = OnceLock::new();
        let rules = RULES.get_or_init(|| std::sync::Mutex::new(Vec::new()));
        let mut guard = rules.lock().expect("quadrature cache poisoned");
        if let Some(rule) = guard.iter().find(|r| r.order() == n) {
            return Arc::clone(rule);
        }
        let rule = Arc::new(GaussLegendre::new(n));
        guard.push(Arc::clone(&rule));
        rule
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Single-panel rule on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Settings shared by every quadrature-based evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Relative tolerance for adaptive integration.
    pub tol: f64,
    /// Longest panel of the composite rule.
    pub max_panel: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            order: 64,
            tol: 1e-9,
            max_panel: 1.0,
        }
    }
}

/// Composite Gauss–Legendre integration over `[a, b]`, split at every break
/// point strictly inside the range and into panels no longer than
/// `settings.max_panel`. Returns 0 for empty ranges (`b <= a`).
pub fn composite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    settings: &QuadSettings,
) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let rule = GaussLegendre::cached(settings.order);
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(a);
    cuts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("NaN break point"));
    cuts.dedup();

    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let len = hi - lo;
        if len <= 0.0 {
            continue;
        }
        let panels = (len / settings.max_panel).ceil().max(1.0) as usize;
        let h = len / panels as f64;
        for k in 0..panels {
            let p_lo = lo + h * k as f64;
            let p_hi = if k + 1 == panels { hi } else { p_lo + h };
            total += rule.integrate(&mut f, p_lo, p_hi);
        }
    }
    total
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK15[7];
    let mut gauss = fc * WG7[3];
    for j in 0..7 {
        let x = h * XGK15[j];
        let s = f(c - x) + f(c + x);
        kron += WGK15[j] * s;
        if j % 2 == 1 {
            gauss += WG7[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration over a finite interval with a mixed
/// absolute/relative tolerance `tol * max(1, |I|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -adaptive(f, b, a, tol);
    }
    let (whole, err) = gk15(&mut f, a, b);
    let mut stack = vec![(a, b, whole, err)];
    let mut total = 0.0;
    let mut pending = whole;
    let mut evaluations = 0usize;
    while let Some((lo, hi, est, err)) = stack.pop() {
        let scale = pending.abs().max(1.0);
        let width_share = (hi - lo) / (b - a);
        if err <= tol * scale * width_share.max(1e-3)
            || hi - lo < 1e-12 * (b - a)
            || evaluations > 200_000
        {
            total += est;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (l, le) = gk15(&mut f, lo, mid);
        let (r, re) = gk15(&mut f, mid, hi);
        evaluations += 30;
        pending += l + r - est;
        stack.push((lo, mid, l, le));
        stack.push((mid, hi, r, re));
    }
    total
}

/// Adaptive integration over `[a, ∞)` via the map `x = a + t / (1 - t)`.
pub fn adaptive_to_infinity<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: f64) -> f64 {
    adaptive(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - t;
            let x = a + t / one_minus;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        tol,
    )
}
