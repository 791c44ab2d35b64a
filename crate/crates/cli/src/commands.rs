use std::time::Instant;

use occlast_core::passage::{last_infty, prob_sigma_zero};
use occlast_core::scale::ScaleEval;
use occlast_core::{CorridorResolvent, LastKind, LastPassage};
use occlast_mc::{Barriers, Functional, McEstimate, Request, Simulator};
use serde::Serialize;

use crate::config::RunConfig;
use crate::format::{csv_line, fmt_g};

/// A failed command, with the message shown to the user.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError(e.to_string())
    }
}

impl From<occlast_core::Error> for CliError {
    fn from(e: occlast_core::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<occlast_mc::McError> for CliError {
    fn from(e: occlast_mc::McError) -> Self {
        CliError(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Rendered report and whether any check failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub failed: bool,
}

impl Report {
    fn ok(body: String) -> Self {
        Self {
            body,
            failed: false,
        }
    }
}

/// Point quantities accepted by `eval`.
pub const EVAL_QUANTITIES: &[&str] = &[
    "last_total_up",
    "last_total_down",
    "last_hit",
    "last_up_atom",
    "last_down_creep",
    "prob_no_up",
    "prob_no_down",
    "prob_no_hit",
    "exit_up",
    "resolvent_at_zero",
    "limit_up",
    "limit_down",
    "limit_hit",
];

/// Density quantities accepted by `table`.
pub const TABLE_QUANTITIES: &[&str] = &[
    "resolvent",
    "resolvent_unkilled",
    "kernel_w",
    "last_up_density",
    "last_down_density",
    "joint_up_creep",
    "joint_down_creep",
    "joint_hit",
];

/// Quantities with a Monte Carlo estimator, used by `validate` and `simulate`.
pub const MC_QUANTITIES: &[&str] = &[
    "last_total_up",
    "last_total_down",
    "last_hit",
    "last_down_creep",
    "last_up_atom",
    "prob_no_up",
    "prob_no_down",
    "prob_no_hit",
    "exit_up",
];

fn check_names(names: &[String], allowed: &[&str], what: &str) -> CliResult<()> {
    for n in names {
        if !allowed.contains(&n.as_str()) {
            return Err(CliError(format!(
                "unknown {what} `{n}`; expected one of {}",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn last_passage(cfg: &RunConfig) -> CliResult<LastPassage> {
    Ok(LastPassage::with_settings(
        &cfg.model()?,
        cfg.window()?,
        cfg.corridor()?,
        cfg.lambda,
        cfg.quad_settings(),
        cfg.scale_backend(),
    )?)
}

fn unkilled_resolvent(cfg: &RunConfig) -> CliResult<CorridorResolvent> {
    Ok(CorridorResolvent::with_settings(
        &cfg.model()?,
        cfg.window()?,
        cfg.corridor()?,
        cfg.quad_settings(),
        cfg.scale_backend(),
    )?)
}

/// Analytic value of a point quantity at `x`.
fn analytic(cfg: &RunConfig, lp: Option<&LastPassage>, name: &str, x: f64) -> CliResult<f64> {
    let model = cfg.model()?;
    let need = || lp.ok_or_else(|| CliError(format!("`{name}` needs lambda > 0")));
    Ok(match name {
        "last_total_up" => need()?.total(x, LastKind::SigmaPlus)?,
        "last_total_down" => need()?.total(x, LastKind::SigmaMinus)?,
        "last_hit" => need()?.last_hit(x)?,
        "last_up_atom" => need()?.last_up_atom(x)?,
        "last_down_creep" => need()?.last_down_creep(x)?,
        "resolvent_at_zero" => need()?.u_at_zero(x)?,
        "prob_no_up" => prob_sigma_zero(&model, cfg.lambda, x, LastKind::SigmaPlus)?,
        "prob_no_down" => prob_sigma_zero(&model, cfg.lambda, x, LastKind::SigmaMinus)?,
        "prob_no_hit" => prob_sigma_zero(&model, cfg.lambda, x, LastKind::SigmaZero)?,
        "exit_up" => unkilled_resolvent(cfg)?.exit_up(x)?,
        "limit_up" | "limit_down" | "limit_hit" => {
            let kind = match name {
                "limit_up" => LastKind::SigmaPlus,
                "limit_down" => LastKind::SigmaMinus,
                _ => LastKind::SigmaZero,
            };
            last_infty(&model, cfg.window()?, cfg.corridor()?, x, kind)?.value
        }
        _ => return Err(CliError(format!("unknown quantity `{name}`"))),
    })
}

/// `eval`: one CSV row per `(x, quantity)`.
pub fn cmd_eval(cfg: &RunConfig) -> CliResult<Report> {
    check_names(&cfg.quantity, EVAL_QUANTITIES, "quantity")?;
    let xs = cfg.x.points();
    if xs.is_empty() {
        return Err(CliError("the x list is empty".into()));
    }
    let lp = if cfg.lambda > 0.0 {
        Some(last_passage(cfg)?)
    } else {
        None
    };
    let mut out = csv_line(&[
        "quantity",
        "x",
        "value",
        "atom",
        "continuous",
        "u_at_zero",
        "kernel_h",
        "wall_ms",
    ]);
    for &x in &xs {
        for name in &cfg.quantity {
            let start = Instant::now();
            let value = analytic(cfg, lp.as_ref(), name, x)?;
            let split = match (name.as_str(), lp.as_ref()) {
                ("last_total_up", Some(lp)) => Some(lp.last_up_atom(x)?),
                ("last_total_down", Some(lp)) => Some(lp.last_down_creep(x)?),
                _ => None,
            };
            let (u0, h) = match lp.as_ref() {
                Some(lp) => (
                    fmt_g(lp.u_at_zero(x)?),
                    fmt_g(lp.resolvent().kernel().cal_h_ab(x)),
                ),
                None => (String::new(), String::new()),
            };
            let wall = start.elapsed().as_secs_f64() * 1e3;
            out += &csv_line(&[
                name.clone(),
                fmt_g(x),
                fmt_g(value),
                split.map(fmt_g).unwrap_or_default(),
                split.map(|a| fmt_g(value - a)).unwrap_or_default(),
                u0,
                h,
                fmt_g_short(wall),
            ]);
        }
    }
    Ok(Report::ok(out))
}

fn fmt_g_short(v: f64) -> String {
    crate::format::fmt_g_prec(v, 4)
}

/// Density value of a table quantity at `(x, y)`.
fn density(
    name: &str,
    lp: Option<&LastPassage>,
    unkilled: &CorridorResolvent,
    x: f64,
    y: f64,
) -> CliResult<f64> {
    let need = || lp.ok_or_else(|| CliError(format!("`{name}` needs lambda > 0")));
    Ok(match name {
        "resolvent" => need()?.resolvent().density(x, y)?,
        "resolvent_unkilled" => unkilled.density(x, y)?,
        "kernel_w" => unkilled.kernel().cal_w_ab(x, y),
        "last_up_density" => need()?.last_up_density(x, y)?,
        "last_down_density" => need()?.last_down_density(x, y)?,
        "joint_up_creep" => need()?.joint_up_creep_density(x, y)?,
        "joint_down_creep" => need()?.joint_down_creep_density(x, y)?,
        "joint_hit" => need()?.joint_hit_density(x, y)?,
        _ => return Err(CliError(format!("unknown quantity `{name}`"))),
    })
}

/// Closed form of a table quantity for a constant clock, if it has one.
fn closed_form(cfg: &RunConfig, name: &str, x: f64, y: f64) -> CliResult<Option<f64>> {
    let rate = match name {
        "resolvent" => cfg.p + cfg.lambda,
        "resolvent_unkilled" | "kernel_w" => cfg.p,
        _ => return Ok(None),
    };
    let w = ScaleEval::with_backend(&cfg.model()?, rate, cfg.scale_backend())?;
    if name == "kernel_w" {
        return Ok(Some(w.w(x - y)));
    }
    let (c, d) = (cfg.c, cfg.d);
    Ok(Some(w.w(x - c) * w.w(d - y) / w.w(d - c) - w.w(x - y)))
}

/// `table`: every quantity over the `(x, y)` grid, `x` outermost.
pub fn cmd_table(cfg: &RunConfig) -> CliResult<Report> {
    check_names(&cfg.quantity, TABLE_QUANTITIES, "quantity")?;
    if cfg.quantity.is_empty() {
        return Err(CliError("no quantity selected".into()));
    }
    let xs = cfg.x.points();
    let ys = cfg.y.points();
    if xs.is_empty() {
        return Err(CliError("the x list is empty".into()));
    }
    if ys.is_empty() {
        return Err(CliError("the y list is empty".into()));
    }
    let lp = if cfg.lambda > 0.0 {
        Some(last_passage(cfg)?)
    } else {
        None
    };
    let unkilled = unkilled_resolvent(cfg)?;
    let constant = cfg.window()?.is_constant();
    let with_closed: Vec<bool> = cfg
        .quantity
        .iter()
        .map(|q| constant && matches!(q.as_str(), "resolvent" | "resolvent_unkilled" | "kernel_w"))
        .collect();

    let mut header = vec!["x".to_string(), "y".to_string()];
    for (q, &cf) in cfg.quantity.iter().zip(&with_closed) {
        header.push(q.clone());
        if cf {
            header.push(format!("{q}_closed_form"));
            header.push(format!("{q}_diff"));
        }
    }
    let mut out = csv_line(&header);
    for &x in &xs {
        for &y in &ys {
            let mut row = vec![fmt_g(x), fmt_g(y)];
            for (q, &cf) in cfg.quantity.iter().zip(&with_closed) {
                let v = density(q, lp.as_ref(), &unkilled, x, y)?;
                row.push(fmt_g(v));
                if cf {
                    let c = closed_form(cfg, q, x, y)?.expect("closed form exists");
                    row.push(fmt_g(c));
                    row.push(fmt_g(v - c));
                }
            }
            out += &csv_line(&row);
        }
    }
    Ok(Report::ok(out))
}

fn mc_functional(name: &str) -> Functional {
    match name {
        "last_total_up" => Functional::LastTotal(LastKind::SigmaPlus),
        "last_total_down" => Functional::LastTotal(LastKind::SigmaMinus),
        "last_hit" => Functional::LastTotal(LastKind::SigmaZero),
        "last_down_creep" => Functional::LastDownCreep,
        "last_up_atom" => Functional::LastUpAtom,
        "prob_no_up" => Functional::ProbSigmaZero(LastKind::SigmaPlus),
        "prob_no_down" => Functional::ProbSigmaZero(LastKind::SigmaMinus),
        "prob_no_hit" => Functional::ProbSigmaZero(LastKind::SigmaZero),
        "exit_up" => Functional::ExitUp,
        _ => unreachable!("checked against MC_QUANTITIES"),
    }
}

/// Monte Carlo estimates of `names` at every `x`, in input order. Killed
/// and exit-only functionals are run separately; checks on the last time
/// at 0 are dropped for models without a Gaussian part.
fn mc_estimates(cfg: &RunConfig, names: &[String]) -> CliResult<Vec<(String, f64, McEstimate)>> {
    let model = cfg.model()?;
    let has_gaussian = model.sigma() > 0.0;
    let names: Vec<&String> = names
        .iter()
        .filter(|n| has_gaussian || !mc_functional(n).needs_hit())
        .collect();
    let xs = cfg.x.points();
    if xs.is_empty() {
        return Err(CliError("the x list is empty".into()));
    }
    let barriers: Barriers = cfg.corridor()?.into();
    let killed = Simulator::new(
        &model,
        vec![cfg.window()?],
        barriers,
        cfg.lambda,
        cfg.sim_config(),
    )?;
    let unkilled = Simulator::new(&model, vec![cfg.window()?], barriers, 0.0, cfg.sim_config())?;
    let mut out = Vec::new();
    for &x in &xs {
        let kill_req: Vec<Request> = names
            .iter()
            .map(|n| Request::new(0, mc_functional(n)))
            .filter(|r| r.functional.needs_kill())
            .collect();
        let exit_req: Vec<Request> = names
            .iter()
            .map(|n| Request::new(0, mc_functional(n)))
            .filter(|r| !r.functional.needs_kill())
            .collect();
        let mut k = killed.run(x, &kill_req)?.into_iter();
        let mut e = unkilled.run(x, &exit_req)?.into_iter();
        for n in &names {
            let est = if mc_functional(n).needs_kill() {
                k.next()
            } else {
                e.next()
            };
            out.push(((*n).clone(), x, est.expect("one estimate per request")));
        }
    }
    Ok(out)
}

/// One row of the validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub analytic: f64,
    pub mc_mean: f64,
    pub se: f64,
    pub z: Option<f64>,
    pub pass: bool,
    pub underpowered: bool,
}

/// Paths below which every check is flagged as underpowered.
const MIN_PATHS: usize = 1000;

/// Pass rule: `|mc − analytic| ≤ max(3·SE, 2%·|analytic|)`.
pub fn passes(analytic: f64, mean: f64, se: f64) -> bool {
    (mean - analytic).abs() <= (3.0 * se).max(0.02 * analytic.abs())
}

/// `validate`: compares the battery (or the selected checks) with Monte
/// Carlo estimates; fails if any check fails.
pub fn cmd_validate(cfg: &RunConfig) -> CliResult<Report> {
    let names: Vec<String> = if cfg.checks.is_empty() {
        MC_QUANTITIES.iter().map(|s| s.to_string()).collect()
    } else {
        check_names(&cfg.checks, MC_QUANTITIES, "check")?;
        cfg.checks.clone()
    };
    if !(cfg.lambda > 0.0) {
        return Err(CliError("validate needs lambda > 0".into()));
    }
    let lp = last_passage(cfg)?;
    let mut rows = Vec::new();
    for (name, x, est) in mc_estimates(cfg, &names)? {
        let a = analytic(cfg, Some(&lp), &name, x)?;
        let diff = est.mean - a;
        let z = if est.std_error > 0.0 {
            Some(diff / est.std_error)
        } else if diff == 0.0 {
            Some(0.0)
        } else {
            None
        };
        let underpowered =
            cfg.sim_n_paths < MIN_PATHS || 3.0 * est.std_error > 0.1 * a.abs().max(0.01);
        rows.push(CheckRow {
            check: format!("{name}@x={}", fmt_g(x)),
            analytic: a,
            mc_mean: est.mean,
            se: est.std_error,
            z,
            pass: passes(a, est.mean, est.std_error),
            underpowered,
        });
    }
    let failed = rows.iter().any(|r| !r.pass);
    let mut body = serde_json::to_string_pretty(&rows).expect("rows serialise");
    body.push('\n');
    Ok(Report { body, failed })
}

/// `simulate`: Monte Carlo estimates only, as CSV.
pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<Report> {
    check_names(&cfg.quantity, MC_QUANTITIES, "quantity")?;
    let mut out = csv_line(&[
        "quantity",
        "x",
        "mean",
        "se",
        "batch_se",
        "n_paths",
        "dt",
        "truncated",
    ]);
    for (name, x, est) in mc_estimates(cfg, &cfg.quantity)? {
        out += &csv_line(&[
            name,
            fmt_g(x),
            fmt_g(est.mean),
            fmt_g(est.std_error),
            fmt_g(est.batch_std_error),
            est.n_effective.to_string(),
            fmt_g(est.dt_used),
            est.truncated.to_string(),
        ]);
    }
    Ok(Report::ok(out))
}
