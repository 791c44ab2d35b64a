//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! `OCCLAST_ACCEPT_PATHS` overrides the Monte Carlo path count of
//! criterion 5 for quick local runs; the default is the full 200 000.

use std::process::Command;
use std::time::Instant;

use occlast_cli::commands::passes;
use occlast_core::inversion::EulerInversion;
use occlast_core::kernels::{KernelEval, OccupationWindow};
use occlast_core::passage::{
    example_pq_equal, mu_hat, prob_sigma_zero, Corridor, CorridorResolvent, LastKind, LastPassage,
};
use occlast_core::scale::{ScaleBackend, ScaleEval};
use occlast_core::LevyModel;
use occlast_mc::{Barriers, Functional, Request, SimConfig, Simulator};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [LastKind; 3] = [
    LastKind::SigmaPlus,
    LastKind::SigmaMinus,
    LastKind::SigmaZero,
];

type Criterion = (&'static str, fn() -> Outcome);

/// Outcome of one criterion: pass flag plus a one-line summary.
struct Outcome {
    pass: bool,
    detail: String,
}

/// Tracks the worst deviation seen and the first failure.
#[derive(Default)]
struct Tally {
    checks: usize,
    worst: f64,
    failure: Option<String>,
}

impl Tally {
    fn check(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !(err <= tol) {
            if self.failure.is_none() {
                self.failure = Some(format!("{} (error {err:.3e} > {tol:.0e})", what()));
            }
        } else {
            self.worst = self.worst.max(err);
        }
    }

    fn finish(self, measure: &str) -> Outcome {
        match self.failure {
            Some(f) => Outcome {
                pass: false,
                detail: f,
            },
            None => Outcome {
                pass: true,
                detail: format!("{} checks, worst {measure} {:.2e}", self.checks, self.worst),
            },
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn bm(drift: f64) -> LevyModel {
    LevyModel::brownian(1.0, drift).unwrap()
}

fn jd(drift: f64) -> LevyModel {
    LevyModel::cramer_lundberg(1.0, drift, 1.0, 2.0).unwrap()
}

/// Adaptive Simpson, independent of the library quadrature.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `∫_a^cut` in unit pieces, for integrands that are negligible past `cut`.
fn simpson_tail<F: Fn(f64) -> f64>(f: &F, a: f64, cut: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut lo = a;
    while lo < cut {
        let hi = (lo + 1.0).min(cut);
        total += simpson(f, lo, hi, tol);
        lo = hi;
    }
    total
}

fn normalisation() -> Outcome {
    let models = [
        bm(0.0),
        bm(1.0),
        bm(-1.0),
        LevyModel::cramer_lundberg(0.0, 1.0, 1.0, 2.0).unwrap(),
        LevyModel::cramer_lundberg(0.5, 1.0, 1.0, 2.0).unwrap(),
    ];
    let mut t = Tally::default();
    for m in &models {
        for lam in [0.5, 1.0, 2.0] {
            for x in [-1.0, -0.1, 0.0, 0.3, 1.0] {
                for k in [LastKind::SigmaMinus, LastKind::SigmaZero] {
                    let v = example_pq_equal(m, 0.0, lam, x, k).unwrap();
                    t.check((v - 1.0).abs(), 1e-8, || {
                        format!("{k:?} {m:?} λ={lam} x={x}")
                    });
                }
                let v = example_pq_equal(m, 1e-7, lam, x, LastKind::SigmaPlus).unwrap();
                t.check((v - 1.0).abs(), 1e-5, || {
                    format!("SigmaPlus {m:?} λ={lam} x={x}")
                });
            }
        }
    }
    t.finish("|v−1|")
}

fn kernel_collapse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut t = Tally::default();
    for _ in 0..200 {
        let m = if rng.random::<bool>() {
            LevyModel::brownian(rng.random_range(0.3..2.0), rng.random_range(-1.5..1.5)).unwrap()
        } else {
            LevyModel::cramer_lundberg(
                rng.random_range(0.0..1.5),
                rng.random_range(0.5..2.5),
                rng.random_range(0.2..2.0),
                rng.random_range(0.5..4.0),
            )
            .unwrap()
        };
        let p = rng.random_range(0.0..5.0);
        let a = rng.random_range(-1.0..1.0);
        let b = a + rng.random_range(0.0..1.0);
        let (x, y) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let k = KernelEval::new(&m, OccupationWindow::new(p, p, a, b).unwrap()).unwrap();
        let w = ScaleEval::new(&m, p).unwrap();
        let e = w.w(x - y);
        let err = if e == 0.0 {
            k.cal_w_ab(x, y).abs()
        } else {
            rel(k.cal_w_ab(x, y), e)
        };
        t.check(err, 1e-10, || {
            format!("𝒲 {m:?} p={p} ({a},{b}) x={x} y={y}")
        });
        let h = (w.phi() * x).exp();
        t.check(rel(k.cal_h_ab(x), h), 1e-10, || {
            format!("ℋ {m:?} p={p} ({a},{b}) x={x}")
        });
    }
    t.finish("relative error")
}

fn resolvent_reduction() -> Outcome {
    let cor = Corridor::new(-1.0, 1.0).unwrap();
    let (c, d) = (cor.c, cor.d);
    let mut t = Tally::default();
    let r = CorridorResolvent::new(
        &bm(0.0),
        OccupationWindow::new(0.0, 0.0, -0.2, 0.3).unwrap(),
        cor,
    )
    .unwrap();
    for i in 0..20 {
        for j in 0..20 {
            let x = c + (d - c) * (i as f64 + 0.5) / 20.0;
            let y = c + (d - c) * (j as f64 + 0.5) / 20.0;
            let g = 2.0 * (x - c) * (d - y) / (d - c) - 2.0 * (x - y).max(0.0);
            t.check((r.density(x, y).unwrap() - g).abs(), 1e-8, || {
                format!("Green x={x} y={y}")
            });
        }
    }
    for lam in [0.5, 2.0] {
        let win = OccupationWindow::constant(lam).unwrap();
        for (name, m) in [("bm", bm(0.0)), ("jd", jd(1.0))] {
            let r = CorridorResolvent::new(&m, win, cor).unwrap();
            for x in [-0.7, 0.0, 0.4, 0.9] {
                let exit = if name == "bm" {
                    let s = (2.0 * lam).sqrt();
                    (((d - x) * s).sinh() + ((x - c) * s).sinh()) / ((d - c) * s).sinh()
                } else {
                    let w = ScaleEval::new(&m, lam).unwrap();
                    let (u, h) = (x - c, d - c);
                    w.w(u) / w.w(h) + w.z(u) - w.w(u) * w.z(h) / w.w(h)
                };
                let occ = lam * r.apply(x, |_| 1.0).unwrap();
                t.check((occ + exit - 1.0).abs(), 1e-6, || {
                    format!("mass {name} λ={lam} x={x}")
                });
            }
        }
    }
    t.finish("abs error")
}

fn capacity_measure() -> Outcome {
    let mut t = Tally::default();
    let lam = 1.0;
    for (name, m, jumps) in [("exp jumps", jd(1.0), true), ("no jumps", bm(0.0), false)] {
        let phi = m.phi(lam).unwrap();
        let atom = 0.5 * m.sigma() * m.sigma() * phi;
        // ν(y) = η e^{−αy} φ/(α+φ) for rate-η, mean-1/α exponential jumps
        let nu = |y: f64| {
            if jumps {
                (-2.0 * y).exp() * phi / (2.0 + phi)
            } else {
                0.0
            }
        };
        for s in [0.5, 1.0, 2.0, 5.0, 10.0] {
            let lt =
                atom + simpson_tail(&|y: f64| (-s * y).exp() * (lam + nu(y)), 0.0, 60.0, 1e-13);
            t.check((lt - mu_hat(&m, lam, s).unwrap()).abs(), 1e-6, || {
                format!("{name} s={s}")
            });
        }
        let at = mu_hat(&m, lam, phi).unwrap();
        t.check((at - m.psi_prime(phi).unwrap()).abs(), 1e-6, || {
            format!("{name} at s=φ(λ)")
        });
    }
    t.finish("abs error")
}

fn mc_agreement() -> Outcome {
    let n_paths = std::env::var("OCCLAST_ACCEPT_PATHS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(200_000);
    let cor = Corridor::new(-1.0, 1.0).unwrap();
    let windows = vec![
        OccupationWindow::new(0.0, 0.0, -0.2, 0.3).unwrap(),
        OccupationWindow::new(0.4, 1.1, -0.2, 0.3).unwrap(),
    ];
    let lam = 1.0;
    let cfg = SimConfig {
        dt: 1e-4,
        n_paths,
        seed: 5,
        horizon_cap: 200.0,
        bridge_correction: true,
    };
    let mut checks = 0;
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, m) in [("bm", bm(0.0)), ("jd", jd(0.0))] {
        let lps: Vec<LastPassage> = windows
            .iter()
            .map(|w| LastPassage::new(&m, *w, cor, lam).unwrap())
            .collect();
        let sim = Simulator::new(&m, windows.clone(), Barriers::from(cor), lam, cfg).unwrap();
        for x in [-0.5, 0.0, 0.5] {
            let mut req = Vec::new();
            let mut expect = Vec::new();
            for (i, lp) in lps.iter().enumerate() {
                for k in KINDS {
                    req.push(Request::new(i, Functional::LastTotal(k)));
                    expect.push((format!("w{i} total {k:?}"), lp.total(x, k).unwrap()));
                }
                req.push(Request::new(i, Functional::LastDownCreep));
                expect.push((format!("w{i} down creep"), lp.last_down_creep(x).unwrap()));
            }
            for k in KINDS {
                req.push(Request::new(0, Functional::ProbSigmaZero(k)));
                expect.push((
                    format!("P({k:?} = 0)"),
                    prob_sigma_zero(&m, lam, x, k).unwrap(),
                ));
            }
            let est = sim.run(x, &req).unwrap();
            for ((label, a), e) in expect.iter().zip(&est) {
                checks += 1;
                if e.std_error > 0.0 {
                    worst_z = worst_z.max(((e.mean - a) / e.std_error).abs());
                }
                if !passes(*a, e.mean, e.std_error) {
                    failures.push(format!(
                        "{name} x={x} {label}: analytic {a:.6} mc {:.6} se {:.2e}",
                        e.mean, e.std_error
                    ));
                }
            }
        }
    }
    if failures.is_empty() {
        Outcome {
            pass: true,
            detail: format!("{checks} checks at n={n_paths}, worst |z| {worst_z:.2}"),
        }
    } else {
        Outcome {
            pass: false,
            detail: format!(
                "{} of {checks} failed; first: {}",
                failures.len(),
                failures[0]
            ),
        }
    }
}

fn limit_consistency() -> Outcome {
    let cor = Corridor::new(-1.0, 1.0).unwrap();
    let win = OccupationWindow::new(0.4, 1.1, -0.2, 0.3).unwrap();
    let lam = 1e-6;
    let mut t = Tally::default();
    // drifting up: ψ'(0) > 0, the σ⁻ transform tends to ψ'(0) u(x, 0)
    // drifting down: the σ⁰ transform tends to ψ'(φ(0)) u(x, 0)
    for (name, m) in [
        ("bm+1", bm(1.0)),
        ("bm-1", bm(-1.0)),
        ("jd+", jd(1.5)),
        ("jd-", jd(-0.5)),
    ] {
        let unkilled = CorridorResolvent::new(&m, win, cor).unwrap();
        let lp = LastPassage::new(&m, win, cor, lam).unwrap();
        let slope = m.psi_prime_at_zero();
        for x in [-0.5, 0.0, 0.5] {
            let u0 = unkilled.density(x, 0.0).unwrap();
            let (got, want) = if slope > 0.0 {
                (lp.total(x, LastKind::SigmaMinus).unwrap(), slope * u0)
            } else {
                let phi0 = m.phi(0.0).unwrap();
                (
                    lp.total(x, LastKind::SigmaZero).unwrap(),
                    m.psi_prime(phi0).unwrap() * u0,
                )
            };
            t.check(rel(got, want), 1e-3, || {
                format!("{name} x={x}: {got} vs {want}")
            });
        }
    }
    t.finish("relative error")
}

fn joint_laws() -> Outcome {
    let mut t = Tally::default();
    for (name, m) in [("jd", jd(1.0)), ("bm", bm(0.0))] {
        let lp = LastPassage::new(
            &m,
            OccupationWindow::new(0.4, 1.1, -0.2, 0.3).unwrap(),
            Corridor::new(-1.0, 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        for x in [-0.3, 0.4] {
            let up = simpson_tail(
                &|y| lp.joint_up_creep_density(x, y.max(1e-12)).unwrap(),
                0.0,
                60.0,
                1e-12,
            );
            t.check((up - lp.last_up_atom(x).unwrap()).abs(), 1e-6, || {
                format!("{name} up x={x}")
            });
            let down = simpson_tail(
                &|y| lp.joint_down_creep_density(x, y.max(1e-12)).unwrap(),
                0.0,
                60.0,
                1e-12,
            );
            t.check((down - lp.last_down_creep(x).unwrap()).abs(), 1e-6, || {
                format!("{name} down x={x}")
            });
            let hit = simpson_tail(
                &|s| lp.joint_hit_density(x, -s.max(1e-12)).unwrap(),
                0.0,
                60.0,
                1e-12,
            ) + simpson_tail(
                &|z| lp.joint_hit_density(x, z.max(1e-12)).unwrap(),
                0.0,
                60.0,
                1e-12,
            );
            t.check((hit - lp.last_hit(x).unwrap()).abs(), 1e-6, || {
                format!("{name} hit x={x}")
            });
        }
    }
    t.finish("abs error")
}

fn scale_engine() -> Outcome {
    let inv = ScaleBackend::NumericInversion(EulerInversion::default());
    let mut t = Tally::default();
    for m in [
        bm(0.3),
        jd(1.0),
        LevyModel::cramer_lundberg(0.0, 2.0, 1.5, 1.0).unwrap(),
    ] {
        for q in [0.0, 0.5, 2.0, 10.0] {
            let a = ScaleEval::with_backend(&m, q, ScaleBackend::ClosedForm).unwrap();
            let b = ScaleEval::with_backend(&m, q, inv).unwrap();
            for i in 0..=100 {
                let x = 0.1 * i as f64;
                let (u, v) = (a.w(x), b.w(x));
                let err = if u == 0.0 { v.abs() } else { rel(v, u) };
                t.check(err, 1e-8, || format!("inversion {m:?} q={q} x={x}"));
            }
            let lim = (-a.phi() * 40.0).exp() * a.w(40.0);
            t.check(rel(lim, a.phi_prime()), 1e-4, || {
                format!("asymptotics {m:?} q={q}")
            });
        }
    }
    t.finish("relative error")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d.cfg");
    std::fs::write(
        &cfg,
        "jump.kind = exp\nwindow.p = 0.4\nwindow.q = 1.1\nwindow.a = -0.2\nwindow.b = 0.3\n\
         x = -0.5, 0.5\nsim.dt = 1e-3\nsim.n_paths = 3000\n",
    )
    .unwrap();
    let run = |jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_occlast"))
            .args([
                "validate",
                "--config",
                cfg.to_str().unwrap(),
                "--seed",
                "11",
                "--jobs",
                jobs,
            ])
            .output()
            .expect("binary runs")
    };
    let (one, eight) = (run("1"), run("8"));
    let same = one.stdout == eight.stdout && !one.stdout.is_empty();
    Outcome {
        pass: same,
        detail: if same {
            format!("{} identical bytes", one.stdout.len())
        } else {
            "reports differ between --jobs 1 and --jobs 8".into()
        },
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("example normalisation", normalisation),
        ("kernel collapse", kernel_collapse),
        ("resolvent reduction", resolvent_reduction),
        ("capacity measure transform", capacity_measure),
        ("Monte Carlo agreement", mc_agreement),
        ("limit consistency", limit_consistency),
        ("joint-law consistency", joint_laws),
        ("scale-function engine", scale_engine),
        ("simulator determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {} {name}: {} [{:.1}s]",
            i + 1,
            out.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!out.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
