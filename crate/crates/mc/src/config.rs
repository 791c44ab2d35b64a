use occlast_core::Corridor;
use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Model(#[from] occlast_core::Error),
}

pub type Result<T> = std::result::Result<T, McError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(McError::Config(msg.into()))
}

/// Discretisation and sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Euler step.
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// No path is simulated beyond this time.
    pub horizon_cap: f64,
    /// Detect crossings of 0 and of the barriers between grid points with
    /// the Brownian-bridge crossing probability.
    pub bridge_correction: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            n_paths: 10_000,
            seed: 0,
            horizon_cap: 200.0,
            bridge_correction: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return config(format!("dt must be > 0, got {}", self.dt));
        }
        if self.n_paths == 0 {
            return config("n_paths must be >= 1");
        }
        if !(self.horizon_cap > 0.0) {
            return config(format!("horizon_cap must be > 0, got {}", self.horizon_cap));
        }
        Ok(())
    }
}

/// Exit levels of the simulated path. Either side may be infinite; unlike a
/// [`Corridor`] the lower level may be 0 or positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barriers {
    pub lower: f64,
    pub upper: f64,
}

impl Barriers {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) {
            return config(format!(
                "barriers need lower < upper, got {lower} and {upper}"
            ));
        }
        Ok(Self { lower, upper })
    }

    /// No exit at all.
    pub fn none() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

impl From<Corridor> for Barriers {
    fn from(c: Corridor) -> Self {
        Self {
            lower: c.c,
            upper: c.d,
        }
    }
}
