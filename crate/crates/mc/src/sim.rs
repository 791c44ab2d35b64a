//! Path batches and their reduction.
//!
//! Paths are grouped in fixed blocks of [`BLOCK`] consecutive indices. Each
//! block is reduced sequentially and the block moments are merged pairwise
//! in index order, so the result does not depend on how rayon schedules the
//! blocks.

use occlast_core::{Corridor, LevyModel, OccupationWindow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::config::{config, Barriers, McError, Result, SimConfig};
use crate::functional::Functional;
use crate::path::{OccupationBin, Sampler, StopRule, MAX_WINDOWS};

/// Paths per reduction block.
pub const BLOCK: usize = 512;

/// Stream `path_index` of the ChaCha8 generator keyed by `seed`.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub std_error: f64,
    pub n_effective: usize,
    pub dt_used: f64,
    /// Standard error recomputed from the block means.
    pub batch_std_error: f64,
    /// Paths stopped by the horizon cap.
    pub truncated: usize,
}

/// One functional evaluated against one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub window: usize,
    pub functional: Functional,
}

impl Request {
    pub fn new(window: usize, functional: Functional) -> Self {
        Self { window, functional }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        let n = a.n + b.n;
        if n == 0.0 {
            return Moments::default();
        }
        let d = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + d * b.n / n,
            m2: a.m2 + b.m2 + d * d * a.n * b.n / n,
        }
    }
}

#[derive(Debug, Clone)]
struct BlockResult {
    moments: Vec<Moments>,
    truncated: usize,
}

fn merge_range(blocks: &[BlockResult], k: usize) -> Moments {
    match blocks.len() {
        0 => Moments::default(),
        1 => blocks[0].moments[k],
        len => {
            let (l, r) = blocks.split_at(len / 2);
            Moments::merge(merge_range(l, k), merge_range(r, k))
        }
    }
}

/// Simulator for one model, a set of occupation windows, exit barriers and
/// a killing rate.
#[derive(Debug, Clone)]
pub struct Simulator {
    model: LevyModel,
    windows: Vec<OccupationWindow>,
    barriers: Barriers,
    lambda: f64,
    cfg: SimConfig,
}

impl Simulator {
    pub fn new(
        model: &LevyModel,
        windows: Vec<OccupationWindow>,
        barriers: Barriers,
        lambda: f64,
        cfg: SimConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if windows.is_empty() || windows.len() > MAX_WINDOWS {
            return config(format!(
                "need 1 to {MAX_WINDOWS} windows, got {}",
                windows.len()
            ));
        }
        if model.sigma() == 0.0 && model.jumps().rate() == 0.0 {
            return config("a pure drift has no randomness to simulate; need sigma > 0 or jumps");
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return config(format!(
                "killing rate must be finite and >= 0, got {lambda}"
            ));
        }
        let width = barriers.width();
        if width.is_finite() && cfg.dt * model.drift().abs() > width / 100.0 {
            return config(format!(
                "dt={} too coarse: dt·|drift| = {} exceeds (upper − lower)/100 = {}",
                cfg.dt,
                cfg.dt * model.drift().abs(),
                width / 100.0
            ));
        }
        Ok(Self {
            model: model.clone(),
            windows,
            barriers,
            lambda,
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Estimates every request from one set of paths started at `x`.
    /// Requests may not mix killed and exit-only functionals.
    pub fn run(&self, x: f64, requests: &[Request]) -> Result<Vec<McEstimate>> {
        if requests.is_empty() {
            return Ok(Vec::new());
        }
        let killed = requests[0].functional.needs_kill();
        for r in requests {
            if r.window >= self.windows.len() {
                return config(format!(
                    "request refers to window {} of {}",
                    r.window,
                    self.windows.len()
                ));
            }
            if r.functional.needs_kill() != killed {
                return config("killed and exit-only functionals need separate runs");
            }
            if r.functional.needs_hit() && self.model.sigma() == 0.0 {
                return Err(McError::Unsupported(
                    "the last time at 0 is only simulated for models with a Gaussian part".into(),
                ));
            }
            if let Some((lo, hi)) = r.functional.bin() {
                if !(lo < hi) {
                    return config(format!("bin needs lo < hi, got [{lo}, {hi})"));
                }
            }
        }
        if killed && !(self.lambda > 0.0) {
            return config("killed functionals need a killing rate > 0");
        }

        let mut bins = Vec::new();
        let mut bin_of = vec![None; requests.len()];
        for (i, r) in requests.iter().enumerate() {
            if let Functional::OccupationBin { lo, hi } = r.functional {
                bin_of[i] = Some(bins.len());
                bins.push(OccupationBin {
                    window: r.window,
                    lo,
                    hi,
                });
            }
        }
        let sampler = Sampler {
            model: &self.model,
            windows: &self.windows,
            barriers: self.barriers,
            cfg: &self.cfg,
            rule: if killed {
                StopRule::Kill
            } else {
                StopRule::Exit
            },
            bins: &bins,
        };

        let n = self.cfg.n_paths;
        let n_blocks = n.div_ceil(BLOCK);
        let lambda = self.lambda;
        let seed = self.cfg.seed;
        let blocks: Vec<BlockResult> = (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let mut moments = vec![Moments::default(); requests.len()];
                let mut truncated = 0;
                for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                    let mut rng = path_rng(seed, i as u64);
                    let kill = if killed {
                        let e: f64 = Exp1.sample(&mut rng);
                        e / lambda
                    } else {
                        f64::INFINITY
                    };
                    let rec = sampler.run(x, kill, &mut rng);
                    if rec.truncated {
                        truncated += 1;
                    }
                    for (k, r) in requests.iter().enumerate() {
                        let occ = bin_of[k].map(|j| rec.occupation[j]);
                        moments[k].push(r.functional.evaluate(&rec, r.window, occ));
                    }
                }
                BlockResult { moments, truncated }
            })
            .collect();

        let truncated: usize = blocks.iter().map(|b| b.truncated).sum();
        Ok((0..requests.len())
            .map(|k| {
                let total = merge_range(&blocks, k);
                let var = if total.n > 1.0 {
                    total.m2 / (total.n - 1.0)
                } else {
                    0.0
                };
                let batch_var = if blocks.len() > 1 {
                    let s: f64 = blocks
                        .iter()
                        .map(|b| {
                            let m = b.moments[k];
                            m.n * (m.mean - total.mean).powi(2)
                        })
                        .sum();
                    s / (blocks.len() as f64 - 1.0)
                } else {
                    var
                };
                McEstimate {
                    mean: total.mean,
                    std_error: (var / total.n).sqrt(),
                    n_effective: n,
                    dt_used: self.cfg.dt,
                    batch_std_error: (batch_var / total.n).sqrt(),
                    truncated,
                }
            })
            .collect())
    }
}

/// Estimates one functional for one window and corridor.
pub fn simulate_functional(
    model: &LevyModel,
    window: OccupationWindow,
    corridor: Corridor,
    lambda: f64,
    x: f64,
    functional: Functional,
    cfg: SimConfig,
) -> Result<McEstimate> {
    let sim = Simulator::new(model, vec![window], corridor.into(), lambda, cfg)?;
    let mut out = sim.run(x, &[Request::new(0, functional)])?;
    Ok(out.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merged_moments_equal_direct_moments() {
        let data: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        data.iter().for_each(|&v| whole.push(v));
        let mut parts = Vec::new();
        for chunk in data.chunks(77) {
            let mut m = Moments::default();
            chunk.iter().for_each(|&v| m.push(v));
            parts.push(BlockResult {
                moments: vec![m],
                truncated: 0,
            });
        }
        let merged = merge_range(&parts, 0);
        assert_eq!(merged.n, whole.n);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-9 * whole.m2);
    }

    #[test]
    fn streams_differ_by_index() {
        use rand::Rng;
        let a = path_rng(1, 0).next_u64();
        let b = path_rng(1, 1).next_u64();
        let c = path_rng(1, 0).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
