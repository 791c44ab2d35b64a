//! Cross-checks of the library against oracles written independently here.

mod common;

use common::{rel, simpson, simpson_tail};
use occlast_core::inversion::EulerInversion;
use occlast_core::kernels::{KernelEval, OccupationWindow};
use occlast_core::passage::{
    example_pq_equal, last_infty, mu_hat, prob_sigma_zero, Corridor, CorridorResolvent, LastKind,
    LastPassage,
};
use occlast_core::scale::{ScaleBackend, ScaleEval};
use occlast_core::LevyModel;

fn bm(drift: f64) -> LevyModel {
    LevyModel::brownian(1.0, drift).unwrap()
}

fn jd() -> LevyModel {
    LevyModel::cramer_lundberg(1.0, 1.0, 1.0, 2.0).unwrap()
}

#[test]
fn laplace_exponent_matches_levy_khintchine_integral() {
    // natural drift 1, η = 1, α = 2
    let m = LevyModel::cramer_lundberg(0.0, 1.0, 1.0, 2.0).unwrap();
    let theta = 1.0;
    let gamma = m.gamma();
    let integrand = |x: f64| {
        let comp = if x <= 1.0 { theta * x } else { 0.0 };
        ((-theta * x).exp() - 1.0 + comp) * 2.0 * (-2.0 * x).exp()
    };
    let integral =
        simpson(&integrand, 0.0, 1.0, 1e-14) + simpson_tail(&integrand, 1.0, 40.0, 1e-14);
    let expected = gamma * theta + integral;
    assert!((m.psi(theta).unwrap() - expected).abs() < 1e-10);
}

#[test]
fn psi_prime_matches_finite_differences() {
    let m = LevyModel::cramer_lundberg(0.0, 1.0, 1.0, 2.0).unwrap();
    let h = 1e-5;
    let fd = (m.psi(1.0 + h).unwrap() - m.psi(1.0 - h).unwrap()) / (2.0 * h);
    assert!(rel(m.psi_prime(1.0).unwrap(), fd) < 1e-6);
}

#[test]
fn phi_of_brownian_with_negative_drift() {
    let m = bm(-1.0);
    let p = m.phi(0.0).unwrap();
    assert!((p - 2.0).abs() < 1e-12);
    assert!(m.psi(p).unwrap().abs() < 1e-12);
}

#[test]
fn levy_tail_integral_matches_quadrature() {
    let m = LevyModel::cramer_lundberg(0.5, 1.0, 1.0, 2.0).unwrap();
    let lam = 1.3;
    let phi = m.phi(lam).unwrap();
    let y = 0.5;
    let f = |z: f64| (1.0 - (phi * (y - z)).exp()) * 2.0 * (-2.0 * z).exp();
    let q = simpson_tail(&f, y, 40.0, 1e-15);
    assert!((m.levy_tail_integral(y, lam).unwrap() - q).abs() < 1e-10);
    // drifting up with λ = 0: φ(0) = 0 so the integrand vanishes
    assert_eq!(m.levy_tail_integral(y, 0.0).unwrap(), 0.0);
}

#[test]
fn scale_function_laplace_transform() {
    for m in [
        bm(0.3),
        jd(),
        LevyModel::cramer_lundberg(0.0, 2.0, 1.5, 1.0).unwrap(),
    ] {
        for q in [0.0, 1.5] {
            let w = ScaleEval::new(&m, q).unwrap();
            let theta = w.phi() + 0.8;
            let f = |y: f64| (-theta * y).exp() * w.w(y);
            let lt = simpson_tail(&f, 0.0, 80.0, 1e-13);
            let e = 1.0 / (m.psi(theta).unwrap() - q);
            assert!(rel(lt, e) < 1e-6, "{lt} {e}");
        }
    }
}

#[test]
fn derivative_of_w_matches_finite_differences() {
    let m = LevyModel::cramer_lundberg(0.6, 1.0, 1.0, 2.0).unwrap();
    let w = ScaleEval::new(&m, 0.9).unwrap();
    let h = 1e-5;
    let fd = (w.w(0.7 + h) - w.w(0.7 - h)) / (2.0 * h);
    assert!(rel(w.w_prime(0.7), fd) < 1e-6);
}

#[test]
fn brownian_scale_examples() {
    let w = ScaleEval::new(&bm(0.0), 2.0).unwrap();
    assert!((w.w(1.0) - 3.626860).abs() < 1e-6);
    assert!((w.w_prime(1.0) - 7.524391).abs() < 1e-6);
    assert!((w.z(1.0) - 3.762196).abs() < 1e-6);
}

#[test]
fn scale_asymptotics() {
    for m in [bm(0.3), jd()] {
        for q in [0.5, 2.0] {
            let w = ScaleEval::new(&m, q).unwrap();
            for x in [30.0, 50.0] {
                let a = (-w.phi() * x).exp() * w.w(x);
                assert!(rel(a, w.phi_prime()) < 1e-4);
                assert!(rel(w.z(x) / w.w(x), q / w.phi()) < 1e-4);
            }
        }
    }
}

#[test]
fn numeric_backend_matches_closed_form_on_grid() {
    let inv = ScaleBackend::NumericInversion(EulerInversion::default());
    for m in [
        bm(0.3),
        jd(),
        LevyModel::cramer_lundberg(0.0, 2.0, 1.5, 1.0).unwrap(),
    ] {
        for q in [0.0, 0.5, 2.0, 10.0] {
            let a = ScaleEval::with_backend(&m, q, ScaleBackend::ClosedForm).unwrap();
            let b = ScaleEval::with_backend(&m, q, inv).unwrap();
            for i in 0..=50 {
                let x = 0.2 * i as f64;
                let (u, v) = (a.w(x), b.w(x));
                if u == 0.0 {
                    assert_eq!(v, 0.0);
                } else {
                    assert!(rel(v, u) < 1e-8, "q={q} x={x}: {u} {v}");
                }
            }
        }
    }
}

#[test]
fn kernel_w_a_against_simpson() {
    let m = bm(0.0);
    let k = KernelEval::new(&m, OccupationWindow::new(1.0, 2.0, 0.0, 1.0).unwrap()).unwrap();
    let (wp, wq) = (k.scale_p(), k.scale_q());
    let e = wp.w(1.0) + simpson(&|z| wq.w(1.0 - z) * wp.w(z), 0.0, 1.0, 1e-14);
    assert!(rel(k.cal_w_a(1.0, 0.0), e) < 1e-8);
}

#[test]
fn kernel_w_ab_against_nested_simpson() {
    let m = bm(0.0);
    let win = OccupationWindow::new(0.5, 1.5, -0.3, 0.4).unwrap();
    let k = KernelEval::new(&m, win).unwrap();
    let (wp, wq) = (k.scale_p(), k.scale_q());
    let (x, y) = (0.8, -0.6);
    let inner = |z: f64| wp.w(z - y) + simpson(&|t| wq.w(z - t) * wp.w(t - y), win.a, z, 1e-13);
    let e = wp.w(x - y) + simpson(&|z| wp.w(x - z) * inner(z), win.a, win.b, 1e-12);
    assert!(rel(k.cal_w_ab(x, y), e) < 1e-8);
    assert!(rel(k.cal_w_ab_alt(x, y), e) < 1e-8);
}

#[test]
fn kernel_h_against_simpson() {
    let m = bm(0.0);
    let k = KernelEval::new(&m, OccupationWindow::new(1.0, 3.0, 0.0, 1.0).unwrap()).unwrap();
    let (wp, wq) = (k.scale_p(), k.scale_q());
    let phi = wp.phi();
    let e = phi.exp() + 2.0 * simpson(&|z| wq.w(1.0 - z) * (phi * z).exp(), 0.0, 1.0, 1e-14);
    assert!(rel(k.cal_h_a(1.0), e) < 1e-8);

    let win = OccupationWindow::new(0.5, 2.0, -0.2, 0.3).unwrap();
    let k = KernelEval::new(&m, win).unwrap();
    let (wp, wq) = (k.scale_p(), k.scale_q());
    let phi = wp.phi();
    let h_a = |z: f64| {
        (phi * z).exp() + 1.5 * simpson(&|t| wq.w(z - t) * (phi * t).exp(), win.a, z, 1e-13)
    };
    let e = phi.exp() + 1.5 * simpson(&|z| wp.w(1.0 - z) * h_a(z), win.a, win.b, 1e-12);
    assert!(rel(k.cal_h_ab(1.0), e) < 1e-8);
    assert!(rel(k.cal_h_ab_alt(1.0), e) < 1e-8);
}

#[test]
fn asymptotic_link_between_kernels() {
    let m = jd();
    let win = OccupationWindow::new(0.5, 1.5, -0.3, 0.4).unwrap();
    let k = KernelEval::new(&m, win).unwrap();
    let (phi_p, dphi_p) = (k.scale_p().phi(), k.scale_p().phi_prime());
    let (phi_q, dphi_q) = (k.scale_q().phi(), k.scale_q().phi_prime());
    let x = 0.8;
    let y = -30.0;
    let w = k.cal_w_ab(x, y);
    let h = k.cal_h_ab(x);
    let p_variant = w * (phi_p * y).exp() / (dphi_p * h);
    let q_variant = w * (phi_q * y).exp() / (dphi_q * h);
    assert!((p_variant - 1.0).abs() < 1e-4, "{p_variant}");
    // the q-indexed reading of the limit does not hold
    assert!((q_variant - 1.0).abs() > 0.5, "{q_variant}");
}

#[test]
fn resolvent_apply_against_nested_quadrature() {
    let m = bm(0.0);
    let win = OccupationWindow::new(0.5, 1.5, -0.3, 0.4).unwrap();
    let cor = Corridor::new(-1.0, 1.0).unwrap();
    let r = CorridorResolvent::new(&m, win, cor).unwrap();
    let k = r.kernel();
    let x = 0.2;
    let ratio = k.cal_w_ab(x, -1.0) / k.cal_w_ab(1.0, -1.0);
    let u = |y: f64| ratio * k.cal_w_ab(1.0, y) - k.cal_w_ab(x, y);
    let f = |y: f64| y * y * u(y);
    let e = simpson(&f, -1.0, -0.3, 1e-12)
        + simpson(&f, -0.3, 0.2, 1e-12)
        + simpson(&f, 0.2, 0.4, 1e-12)
        + simpson(&f, 0.4, 1.0, 1e-12);
    assert!((r.apply(x, |y| y * y).unwrap() - e).abs() < 1e-7);
}

#[test]
fn green_function_on_grid() {
    let m = bm(0.0);
    let cor = Corridor::new(-1.0, 1.0).unwrap();
    let r = CorridorResolvent::new(&m, OccupationWindow::new(0.0, 0.0, -0.2, 0.3).unwrap(), cor)
        .unwrap();
    for i in 0..20 {
        for j in 0..20 {
            let x = -1.0 + 2.0 * (i as f64 + 0.5) / 20.0;
            let y = -1.0 + 2.0 * (j as f64 + 0.5) / 20.0;
            let g = 2.0 * (x + 1.0) * (1.0 - y) / 2.0 - 2.0 * (x - y).max(0.0);
            assert!((r.density(x, y).unwrap() - g).abs() < 1e-8);
        }
    }
}

#[test]
fn capacity_measure_transform_and_singularity() {
    for m in [jd(), bm(0.0)] {
        let lam = 1.0;
        let phi = m.phi(lam).unwrap();
        let atom = 0.5 * m.sigma() * m.sigma() * phi;
        for s in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let f =
                |y: f64| (-s * y).exp() * (lam + m.levy_tail_integral(y.max(1e-300), lam).unwrap());
            let lt = atom + simpson_tail(&f, 0.0, 60.0, 1e-13);
            assert!((lt - mu_hat(&m, lam, s).unwrap()).abs() < 1e-6);
        }
        let at = mu_hat(&m, lam, phi).unwrap();
        assert!((at - m.psi_prime(phi).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn joint_densities_integrate_to_last_passage_values() {
    let m = jd();
    let lp = LastPassage::new(
        &m,
        OccupationWindow::new(0.4, 1.1, -0.2, 0.3).unwrap(),
        Corridor::new(-1.0, 1.0).unwrap(),
        1.0,
    )
    .unwrap();
    let x = -0.3;
    let up = simpson_tail(
        &|y| lp.joint_up_creep_density(x, y.max(1e-12)).unwrap(),
        0.0,
        60.0,
        1e-12,
    );
    assert!((up - lp.last_up_atom(x).unwrap()).abs() < 1e-6);
    let down = simpson_tail(
        &|y| lp.joint_down_creep_density(x, y.max(1e-12)).unwrap(),
        0.0,
        60.0,
        1e-12,
    );
    assert!((down - lp.last_down_creep(x).unwrap()).abs() < 1e-6);
    let hit = simpson_tail(
        &|t| lp.joint_hit_density(x, -t.max(1e-12)).unwrap(),
        0.0,
        60.0,
        1e-12,
    ) + simpson_tail(
        &|z| lp.joint_hit_density(x, z.max(1e-12)).unwrap(),
        0.0,
        60.0,
        1e-12,
    );
    assert!((hit - lp.last_hit(x).unwrap()).abs() < 1e-6);
}

#[test]
fn killed_limit_matches_unkilled_transforms() {
    let cor = Corridor::new(-1.0, 1.0).unwrap();
    let win = OccupationWindow::new(0.4, 1.1, -0.2, 0.3).unwrap();
    let lam = 1e-6;
    let up = bm(1.0);
    let lp = LastPassage::new(&up, win, cor, lam).unwrap();
    for x in [-0.5, 0.0, 0.5] {
        let lim = last_infty(&up, win, cor, x, LastKind::SigmaMinus)
            .unwrap()
            .value;
        let minus = lp.total(x, LastKind::SigmaMinus).unwrap();
        let hit = lp.last_hit(x).unwrap();
        assert!(rel(minus, lim) < 1e-3, "{minus} {lim}");
        assert!(rel(hit, lim) < 1e-3, "{hit} {lim}");
    }
    let down = bm(-1.0);
    let lp = LastPassage::new(&down, win, cor, lam).unwrap();
    for x in [-0.5, 0.0, 0.5] {
        let z = last_infty(&down, win, cor, x, LastKind::SigmaZero)
            .unwrap()
            .value;
        assert!(rel(lp.last_hit(x).unwrap(), z) < 1e-3);
        let p = last_infty(&down, win, cor, x, LastKind::SigmaPlus)
            .unwrap()
            .value;
        assert!(rel(lp.total(x, LastKind::SigmaPlus).unwrap(), p) < 1e-3);
    }
}

#[test]
fn mass_balance_with_constant_killing() {
    let m = jd();
    let cor = Corridor::new(-1.0, 1.0).unwrap();
    for lam in [0.5, 2.0] {
        let r = CorridorResolvent::new(&m, OccupationWindow::constant(lam).unwrap(), cor).unwrap();
        let w = ScaleEval::new(&m, lam).unwrap();
        for x in [-0.7, 0.1, 0.9] {
            let (y, h) = (x + 1.0, 2.0);
            let exit = w.w(y) / w.w(h) + w.z(y) - w.w(y) * w.z(h) / w.w(h);
            let occ = lam * r.apply(x, |_| 1.0).unwrap();
            assert!((occ + exit - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn wide_corridor_reproduces_whole_line_examples() {
    let cor = Corridor::new(-30.0, 30.0).unwrap();
    let (p, lam) = (0.5, 1.0);
    for m in [bm(0.0), jd()] {
        let lp = LastPassage::new(&m, OccupationWindow::constant(p).unwrap(), cor, lam).unwrap();
        for x in [-0.5, 0.3] {
            for kind in [
                LastKind::SigmaPlus,
                LastKind::SigmaMinus,
                LastKind::SigmaZero,
            ] {
                let inside =
                    lp.total(x, kind).unwrap() + prob_sigma_zero(&m, lam, x, kind).unwrap();
                let whole = example_pq_equal(&m, p, lam, x, kind).unwrap();
                assert!(
                    (inside - whole).abs() < 1e-4,
                    "{kind:?} x={x}: {inside} {whole}"
                );
            }
        }
    }
}

#[test]
fn global_resolvent_numerator_from_the_whole_line_limit() {
    // e^{−φ(p)(a+b)} ℋ_{(a,b)}(a+b−y) written directly as the limit of
    // e^{φ(p)x'} 𝒲_{(a,b)}(x', y)-type terms
    use occlast_core::passage::GlobalResolvent;
    for m in [bm(0.0), jd()] {
        let win = OccupationWindow::new(1.0, 2.0, -0.2, 0.2).unwrap();
        let g = GlobalResolvent::new(&m, win).unwrap();
        let k = g.kernel();
        let phi = k.scale_p().phi();
        for y in [-0.3, 0.0, 0.1, 0.5] {
            let direct = (-phi * (win.a + win.b)).exp() * k.cal_h_ab(win.a + win.b - y);
            let alt = (-phi * y).exp()
                + simpson(
                    &|z| (-phi * z).exp() * k.cal_w_a(z, y),
                    win.a.max(y),
                    win.b,
                    1e-13,
                );
            assert!(rel(direct, alt) < 1e-9, "{direct} {alt}");
        }
    }
}
