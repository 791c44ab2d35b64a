//! Run configuration: flat `key = value` text with dotted keys, or the same
//! keys as a JSON object (nested objects are flattened with dots).

use std::fmt::{self, Write as _};

use occlast_core::inversion::EulerInversion;
use occlast_core::quad::QuadSettings;
use occlast_core::{Corridor, LevyModel, OccupationWindow, ScaleBackend};
use occlast_mc::SimConfig;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: Option<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

/// A list of points, given explicitly or as `linspace(lo, hi, n)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Linspace { lo: f64, hi: f64, n: usize },
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Linspace { lo, hi, n } => match n {
                0 => Vec::new(),
                1 => vec![lo],
                _ => (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points().is_empty()
    }

    fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(inner) = s
            .strip_prefix("linspace(")
            .and_then(|r| r.strip_suffix(')'))
        {
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(format!("linspace needs (lo, hi, n), got `{s}`"));
            }
            let lo = parse_f64(parts[0])?;
            let hi = parse_f64(parts[1])?;
            let n = parts[2]
                .parse::<usize>()
                .map_err(|_| format!("expected a point count, got `{}`", parts[2]))?;
            return Ok(Grid::Linspace { lo, hi, n });
        }
        if s.is_empty() {
            return Ok(Grid::List(Vec::new()));
        }
        s.split(',')
            .map(|p| parse_f64(p.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map(Grid::List)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(", "))
            }
            Grid::Linspace { lo, hi, n } => write!(f, "linspace({lo}, {hi}, {n})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    None,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Auto,
    Closed,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sigma: f64,
    /// Natural drift: `X_t = σB_t + γt − (jumps)`.
    pub gamma: f64,
    pub jump_kind: JumpKind,
    pub jump_rate: f64,
    pub jump_alpha: f64,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub lambda: f64,
    pub x: Grid,
    pub y: Grid,
    pub quantity: Vec<String>,
    pub out: Option<String>,
    pub quad_order: usize,
    pub quad_tol: f64,
    pub backend: BackendKind,
    pub inversion_terms: usize,
    pub inversion_precision: f64,
    pub sim_dt: f64,
    pub sim_n_paths: usize,
    pub seed: u64,
    pub sim_horizon_cap: f64,
    pub sim_bridge: bool,
    pub checks: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let inv = EulerInversion::default();
        Self {
            sigma: 1.0,
            gamma: 0.0,
            jump_kind: JumpKind::None,
            jump_rate: 1.0,
            jump_alpha: 2.0,
            p: 0.0,
            q: 0.0,
            a: 0.0,
            b: 0.0,
            c: -1.0,
            d: 1.0,
            lambda: 1.0,
            x: Grid::List(vec![0.0]),
            y: Grid::List(Vec::new()),
            quantity: vec!["last_total_up".into()],
            out: None,
            quad_order: QuadSettings::default().order,
            quad_tol: QuadSettings::default().tol,
            backend: BackendKind::Auto,
            inversion_terms: inv.terms,
            inversion_precision: inv.precision,
            sim_dt: 1e-4,
            sim_n_paths: 10_000,
            seed: 0,
            sim_horizon_cap: 200.0,
            sim_bridge: true,
            checks: Vec::new(),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("expected a number, got `{s}`"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn parse_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

/// Keys in serialisation order.
const KEYS: &[&str] = &[
    "sigma",
    "gamma",
    "jump.kind",
    "jump.rate",
    "jump.alpha",
    "window.p",
    "window.q",
    "window.a",
    "window.b",
    "corridor.c",
    "corridor.d",
    "lambda",
    "x",
    "y",
    "quantity",
    "out",
    "quad.order",
    "quad.tol",
    "scale.backend",
    "inversion.terms",
    "inversion.precision",
    "sim.dt",
    "sim.n_paths",
    "seed",
    "sim.horizon_cap",
    "sim.bridge",
    "checks",
];

impl RunConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let field = |r: Result<f64, String>| r.map_err(|e| format!("field `{key}`: {e}"));
        let count = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| format!("field `{key}`: expected a non-negative integer, got `{s}`"))
        };
        match key {
            "sigma" => self.sigma = field(parse_f64(v))?,
            "gamma" => self.gamma = field(parse_f64(v))?,
            "jump.kind" => {
                self.jump_kind = match v {
                    "none" => JumpKind::None,
                    "exp" => JumpKind::Exp,
                    _ => return Err(format!("field `{key}`: expected none or exp, got `{v}`")),
                }
            }
            "jump.rate" => self.jump_rate = field(parse_f64(v))?,
            "jump.alpha" => self.jump_alpha = field(parse_f64(v))?,
            "window.p" => self.p = field(parse_f64(v))?,
            "window.q" => self.q = field(parse_f64(v))?,
            "window.a" => self.a = field(parse_f64(v))?,
            "window.b" => self.b = field(parse_f64(v))?,
            "corridor.c" => self.c = field(parse_f64(v))?,
            "corridor.d" => self.d = field(parse_f64(v))?,
            "lambda" => self.lambda = field(parse_f64(v))?,
            "x" => self.x = Grid::parse(v).map_err(|e| format!("field `{key}`: {e}"))?,
            "y" => self.y = Grid::parse(v).map_err(|e| format!("field `{key}`: {e}"))?,
            "quantity" => self.quantity = parse_list(v),
            "out" => {
                self.out = if v.is_empty() {
                    None
                } else {
                    Some(v.to_string())
                }
            }
            "quad.order" => self.quad_order = count(v)?,
            "quad.tol" => self.quad_tol = field(parse_f64(v))?,
            "scale.backend" => {
                self.backend = match v {
                    "auto" => BackendKind::Auto,
                    "closed" => BackendKind::Closed,
                    "numeric" => BackendKind::Numeric,
                    _ => {
                        return Err(format!(
                            "field `{key}`: expected auto, closed or numeric, got `{v}`"
                        ))
                    }
                }
            }
            "inversion.terms" => self.inversion_terms = count(v)?,
            "inversion.precision" => self.inversion_precision = field(parse_f64(v))?,
            "sim.dt" => self.sim_dt = field(parse_f64(v))?,
            "sim.n_paths" => self.sim_n_paths = count(v)?,
            "seed" => {
                self.seed = v.parse::<u64>().map_err(|_| {
                    format!("field `{key}`: expected an unsigned integer, got `{v}`")
                })?
            }
            "sim.horizon_cap" => self.sim_horizon_cap = field(parse_f64(v))?,
            "sim.bridge" => {
                self.sim_bridge = parse_bool(v).map_err(|e| format!("field `{key}`: {e}"))?
            }
            "checks" => self.checks = parse_list(v),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "sigma" => self.sigma.to_string(),
            "gamma" => self.gamma.to_string(),
            "jump.kind" => match self.jump_kind {
                JumpKind::None => "none".into(),
                JumpKind::Exp => "exp".into(),
            },
            "jump.rate" => self.jump_rate.to_string(),
            "jump.alpha" => self.jump_alpha.to_string(),
            "window.p" => self.p.to_string(),
            "window.q" => self.q.to_string(),
            "window.a" => self.a.to_string(),
            "window.b" => self.b.to_string(),
            "corridor.c" => self.c.to_string(),
            "corridor.d" => self.d.to_string(),
            "lambda" => self.lambda.to_string(),
            "x" => self.x.to_string(),
            "y" => self.y.to_string(),
            "quantity" => self.quantity.join(", "),
            "out" => self.out.clone().unwrap_or_default(),
            "quad.order" => self.quad_order.to_string(),
            "quad.tol" => self.quad_tol.to_string(),
            "scale.backend" => match self.backend {
                BackendKind::Auto => "auto".into(),
                BackendKind::Closed => "closed".into(),
                BackendKind::Numeric => "numeric".into(),
            },
            "inversion.terms" => self.inversion_terms.to_string(),
            "inversion.precision" => self.inversion_precision.to_string(),
            "sim.dt" => self.sim_dt.to_string(),
            "sim.n_paths" => self.sim_n_paths.to_string(),
            "seed" => self.seed.to_string(),
            "sim.horizon_cap" => self.sim_horizon_cap.to_string(),
            "sim.bridge" => self.sim_bridge.to_string(),
            "checks" => self.checks.join(", "),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Parses the text format. `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(Some(i + 1), format!("expected `key = value`, got `{line}`"));
            };
            cfg.set(key.trim(), value)
                .or_else(|m| err(Some(i + 1), m))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a JSON object with the same keys.
    pub fn parse_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text)
            .or_else(|e| err(Some(e.line()), format!("invalid JSON: {e}")))?;
        let mut flat = Vec::new();
        flatten("", &value, &mut flat)?;
        let mut cfg = RunConfig::default();
        for (key, v) in flat {
            cfg.set(&key, &v).or_else(|m| err(None, m))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// JSON when the text starts with `{`, the text format otherwise.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_text(text)
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key));
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for key in KEYS {
            map.insert((*key).to_string(), Value::String(self.get(key)));
        }
        serde_json::to_string_pretty(&Value::Object(map)).expect("string map serialises")
    }

    /// Checks the model and `c ≤ a ≤ b ≤ d`, `c < 0 < d`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model()?;
        self.window()?;
        let corridor = self.corridor()?;
        corridor
            .check_window(&self.window()?)
            .or_else(|e| err(None, e.to_string()))?;
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return err(None, format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.quad_order == 0 {
            return err(None, "quad.order must be positive");
        }
        Ok(())
    }

    pub fn model(&self) -> Result<LevyModel, ConfigError> {
        let m = match self.jump_kind {
            JumpKind::None => LevyModel::brownian(self.sigma, self.gamma),
            JumpKind::Exp => {
                LevyModel::cramer_lundberg(self.sigma, self.gamma, self.jump_rate, self.jump_alpha)
            }
        };
        m.or_else(|e| err(None, e.to_string()))
    }

    pub fn window(&self) -> Result<OccupationWindow, ConfigError> {
        if !(self.a <= self.b) {
            return err(None, format!("a ≤ b violated (a={}, b={})", self.a, self.b));
        }
        OccupationWindow::new(self.p, self.q, self.a, self.b).or_else(|e| err(None, e.to_string()))
    }

    pub fn corridor(&self) -> Result<Corridor, ConfigError> {
        if !(self.c < 0.0) {
            return err(None, format!("c < 0 violated (c={})", self.c));
        }
        if !(self.d > 0.0) {
            return err(None, format!("d > 0 violated (d={})", self.d));
        }
        Corridor::new(self.c, self.d).or_else(|e| err(None, e.to_string()))
    }

    pub fn quad_settings(&self) -> QuadSettings {
        QuadSettings {
            order: self.quad_order,
            tol: self.quad_tol,
            ..QuadSettings::default()
        }
    }

    pub fn scale_backend(&self) -> ScaleBackend {
        match self.backend {
            BackendKind::Auto => ScaleBackend::Auto,
            BackendKind::Closed => ScaleBackend::ClosedForm,
            BackendKind::Numeric => ScaleBackend::NumericInversion(EulerInversion {
                terms: self.inversion_terms,
                precision: self.inversion_precision,
                ..EulerInversion::default()
            }),
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.sim_dt,
            n_paths: self.sim_n_paths,
            seed: self.seed,
            horizon_cap: self.sim_horizon_cap,
            bridge_correction: self.sim_bridge,
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) -> Result<(), ConfigError> {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                match inner {
                    Value::Object(_) => flatten(&join(k), inner, out)?,
                    _ => out.push((join(k), scalar(&join(k), inner)?)),
                }
            }
            Ok(())
        }
        _ => err(None, "the JSON config must be an object"),
    }
}

fn scalar(key: &str, v: &Value) -> Result<String, ConfigError> {
    Ok(match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Result<Vec<String>, ConfigError> =
                items.iter().map(|i| scalar(key, i)).collect();
            parts?.join(", ")
        }
        Value::Object(_) => return err(None, format!("field `{key}`: unexpected object")),
    })
}
