//! Single-path sampler.
//!
//! The Gaussian and drift part is advanced on an Euler grid; jump times come
//! from the exact Poisson clock and are inserted as extra grid points. The
//! occupation clocks are integrated exactly between grid points with the
//! rate of the left endpoint. Crossings inside a step are placed by linear
//! interpolation, or at the midpoint when only the bridge correction sees
//! them.

use occlast_core::{LastKind, LevyModel, OccupationWindow};
use rand::{Rng, RngExt};
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::config::{Barriers, SimConfig};

/// Most occupation windows one path can carry.
pub const MAX_WINDOWS: usize = 4;

/// Clock values, one per window; unused slots stay 0.
pub type Clocks = [f64; MAX_WINDOWS];

/// A last-passage candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LastEvent {
    pub time: f64,
    pub clock: Clocks,
    /// `X(σ−)`.
    pub pre_value: f64,
    /// `X(σ)`.
    pub post_value: f64,
    /// True when the path moved continuously through 0 at this time.
    pub creep: bool,
}

/// First exit from `(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitEvent {
    pub time: f64,
    pub clock: Clocks,
    pub up: bool,
    pub creep: bool,
}

/// Everything a functional needs from one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub start: f64,
    pub end_time: f64,
    pub end_value: f64,
    pub end_clock: Clocks,
    /// The path reached its kill time.
    pub killed: bool,
    /// The path was stopped by the horizon cap.
    pub truncated: bool,
    pub exit: Option<ExitEvent>,
    pub sigma_plus: Option<LastEvent>,
    pub sigma_minus: Option<LastEvent>,
    pub sigma_zero: Option<LastEvent>,
    /// Per kind: the path was above, below or at 0 at some positive time.
    pub seen: [bool; 3],
    /// Per kind: the last time of that kind lies after the exit.
    pub after_exit: [bool; 3],
    pub jumps: usize,
    /// Discounted time spent in each requested bin.
    pub occupation: Vec<f64>,
}

impl PathRecord {
    pub fn last(&self, kind: LastKind) -> Option<&LastEvent> {
        match kind {
            LastKind::SigmaPlus => self.sigma_plus.as_ref(),
            LastKind::SigmaMinus => self.sigma_minus.as_ref(),
            LastKind::SigmaZero => self.sigma_zero.as_ref(),
        }
    }

    /// The last time of `kind` when it is positive and no later than the
    /// exit time.
    pub fn last_in_corridor(&self, kind: LastKind) -> Option<&LastEvent> {
        if self.after_exit[kind_index(kind)] {
            return None;
        }
        self.last(kind)
    }

    /// True when the kill time came before any exit.
    pub fn killed_inside(&self) -> bool {
        self.killed && self.exit.is_none()
    }
}

pub(crate) fn kind_index(kind: LastKind) -> usize {
    match kind {
        LastKind::SigmaPlus => 0,
        LastKind::SigmaMinus => 1,
        LastKind::SigmaZero => 2,
    }
}

/// When a path may stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StopRule {
    /// Run to the kill time; stop early once every last time is known to lie
    /// after the exit.
    Kill,
    /// Run to the exit, ignoring the kill time.
    Exit,
}

/// Discounted occupation of `[lo, hi)` under the clock of `window`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct OccupationBin {
    pub window: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Clocks this large make every remaining contribution negligible.
const CLOCK_CUTOFF: f64 = 40.0;

pub(crate) struct Sampler<'a> {
    pub model: &'a LevyModel,
    pub windows: &'a [OccupationWindow],
    pub barriers: Barriers,
    pub cfg: &'a SimConfig,
    pub rule: StopRule,
    pub bins: &'a [OccupationBin],
}

struct State {
    t: f64,
    x: f64,
    clock: Clocks,
    rates: Clocks,
    rec: PathRecord,
}

impl State {
    fn clock_at(&self, s: f64) -> Clocks {
        let mut out = self.clock;
        let dt = s - self.t;
        for (o, r) in out.iter_mut().zip(&self.rates) {
            *o += r * dt;
        }
        out
    }

    fn exit_time(&self) -> f64 {
        self.rec.exit.map_or(f64::INFINITY, |e| e.time)
    }

    fn candidate(&mut self, kind: LastKind, ev: LastEvent) {
        self.rec.seen[kind_index(kind)] = true;
        if ev.time > self.exit_time() {
            self.rec.after_exit[kind_index(kind)] = true;
        }
        match kind {
            LastKind::SigmaPlus => self.rec.sigma_plus = Some(ev),
            LastKind::SigmaMinus => self.rec.sigma_minus = Some(ev),
            LastKind::SigmaZero => self.rec.sigma_zero = Some(ev),
        }
    }

    fn creep_event(&mut self, kind: LastKind, s: f64) {
        let ev = LastEvent {
            time: s,
            clock: self.clock_at(s),
            pre_value: 0.0,
            post_value: 0.0,
            creep: true,
        };
        self.candidate(kind, ev);
    }

    /// Records that the path takes `value` at the current time; after the
    /// exit this pushes the matching last time past it.
    fn observe(&mut self, value: f64) {
        let k = if value > 0.0 {
            0
        } else if value < 0.0 {
            1
        } else {
            return;
        };
        self.rec.seen[k] = true;
        if self.rec.exit.is_some() {
            self.rec.after_exit[k] = true;
        }
    }

    fn set_exit(&mut self, s: f64, up: bool, creep: bool) {
        self.rec.exit = Some(ExitEvent {
            time: s,
            clock: self.clock_at(s),
            up,
            creep,
        });
        self.rec.after_exit[if up { 0 } else { 1 }] = true;
    }
}

impl Sampler<'_> {
    /// Simulates one path started at `x0` and killed at `kill_time`
    /// (infinite for no killing).
    pub fn run<R: Rng>(&self, x0: f64, kill_time: f64, rng: &mut R) -> PathRecord {
        let sigma = self.model.sigma();
        let drift = self.model.drift();
        let eta = self.model.jumps().rate();
        let dt = self.cfg.dt;
        let bridge = self.cfg.bridge_correction && sigma > 0.0;
        let two_over_var = if sigma > 0.0 {
            2.0 / (sigma * sigma)
        } else {
            f64::INFINITY
        };
        let (lower, upper) = (self.barriers.lower, self.barriers.upper);
        let horizon = match self.rule {
            StopRule::Kill => kill_time.min(self.cfg.horizon_cap),
            StopRule::Exit => self.cfg.horizon_cap,
        };

        let mut st = State {
            t: 0.0,
            x: x0,
            clock: [0.0; MAX_WINDOWS],
            rates: [0.0; MAX_WINDOWS],
            rec: PathRecord {
                start: x0,
                end_time: 0.0,
                end_value: x0,
                end_clock: [0.0; MAX_WINDOWS],
                killed: false,
                truncated: false,
                exit: None,
                sigma_plus: None,
                sigma_minus: None,
                sigma_zero: None,
                seen: [false; 3],
                after_exit: [false; 3],
                jumps: 0,
                occupation: vec![0.0; self.bins.len()],
            },
        };
        st.observe(x0);
        if x0 == 0.0 && sigma > 0.0 {
            // A Gaussian path started at 0 is on both sides of it at once.
            for kind in [
                LastKind::SigmaPlus,
                LastKind::SigmaMinus,
                LastKind::SigmaZero,
            ] {
                st.creep_event(kind, 0.0);
            }
        }
        if x0 >= upper {
            st.set_exit(0.0, true, true);
        } else if x0 <= lower {
            st.set_exit(0.0, false, true);
        }

        let mut next_jump = if eta > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / eta
        } else {
            f64::INFINITY
        };

        loop {
            if st.t >= horizon || self.done(&st) {
                break;
            }
            let jump_now = next_jump - st.t <= dt && next_jump <= horizon;
            let end_now = !jump_now && horizon - st.t <= dt;
            let t_next = if jump_now {
                next_jump
            } else if end_now {
                horizon
            } else {
                st.t + dt
            };
            let h = t_next - st.t;
            for (w, win) in self.windows.iter().enumerate() {
                st.rates[w] = win.rate_at(st.x);
            }

            let z: f64 = StandardNormal.sample(rng);
            let x = st.x;
            let y = x + drift * h + sigma * h.sqrt() * z;

            // Barrier crossings by the continuous part.
            if st.rec.exit.is_none() {
                if y >= upper {
                    st.set_exit(st.t + h * (upper - x) / (y - x), true, true);
                } else if y <= lower {
                    st.set_exit(st.t + h * (x - lower) / (x - y), false, true);
                } else if bridge {
                    let pu = (-two_over_var * (upper - x) * (upper - y) / h).exp();
                    let pl = (-two_over_var * (x - lower) * (y - lower) / h).exp();
                    if pu > 0.0 || pl > 0.0 {
                        let u: f64 = rng.random();
                        if u < pu {
                            st.set_exit(st.t + 0.5 * h, true, true);
                        } else if u < pu + pl {
                            st.set_exit(st.t + 0.5 * h, false, true);
                        }
                    }
                }
            }

            // Continuous passages through 0.
            if x > 0.0 && y <= 0.0 {
                let s = st.t + h * x / (x - y);
                st.creep_event(LastKind::SigmaPlus, s);
                st.creep_event(LastKind::SigmaZero, s);
            } else if x < 0.0 && y >= 0.0 {
                let s = st.t + h * x / (x - y);
                st.creep_event(LastKind::SigmaMinus, s);
                st.creep_event(LastKind::SigmaZero, s);
            } else if x == 0.0 {
                let s = st.t + 0.5 * h;
                st.creep_event(LastKind::SigmaZero, s);
                if y > 0.0 {
                    st.creep_event(LastKind::SigmaMinus, s);
                } else if y < 0.0 {
                    st.creep_event(LastKind::SigmaPlus, s);
                }
            } else if bridge {
                let p = (-two_over_var * x * y / h).exp();
                if p > 0.0 {
                    let u: f64 = rng.random();
                    if u < p {
                        let s = st.t + 0.5 * h;
                        st.creep_event(LastKind::SigmaZero, s);
                        if x > 0.0 {
                            st.creep_event(LastKind::SigmaMinus, s);
                        } else {
                            st.creep_event(LastKind::SigmaPlus, s);
                        }
                    }
                }
            }

            for (k, bin) in self.bins.iter().enumerate() {
                if x >= bin.lo && x < bin.hi {
                    let r = st.rates[bin.window];
                    let weight = if r > 0.0 { -(-r * h).exp_m1() / r } else { h };
                    st.rec.occupation[k] += (-st.clock[bin.window]).exp() * weight;
                }
            }

            for w in 0..self.windows.len() {
                st.clock[w] += st.rates[w] * h;
            }
            st.t = t_next;
            st.x = y;
            st.observe(y);

            if jump_now {
                let size = self.model.sample_jump(rng).unwrap_or(0.0);
                let post = y - size;
                st.rec.jumps += 1;
                if y > 0.0 && post <= 0.0 {
                    let ev = LastEvent {
                        time: st.t,
                        clock: st.clock,
                        pre_value: y,
                        post_value: post,
                        creep: false,
                    };
                    st.candidate(LastKind::SigmaPlus, ev);
                }
                if st.rec.exit.is_none() && post <= lower {
                    st.set_exit(st.t, false, false);
                }
                st.x = post;
                st.observe(post);
                let e: f64 = Exp1.sample(rng);
                next_jump = st.t + e / eta;
            }
        }

        let reached_kill = self.rule == StopRule::Kill && st.t >= kill_time;
        st.rec.end_time = st.t;
        st.rec.end_value = st.x;
        st.rec.end_clock = st.clock;
        st.rec.killed = reached_kill;
        st.rec.truncated = st.t >= self.cfg.horizon_cap && !reached_kill;
        if reached_kill {
            let ev = LastEvent {
                time: st.t,
                clock: st.clock,
                pre_value: st.x,
                post_value: st.x,
                creep: false,
            };
            if st.x > 0.0 {
                st.candidate(LastKind::SigmaPlus, ev);
            } else if st.x < 0.0 {
                st.candidate(LastKind::SigmaMinus, ev);
            }
        }
        st.rec
    }

    fn done(&self, st: &State) -> bool {
        match self.rule {
            StopRule::Kill => st.rec.exit.is_some() && st.rec.after_exit.iter().all(|&f| f),
            StopRule::Exit => {
                st.rec.exit.is_some()
                    || st.clock[..self.windows.len()]
                        .iter()
                        .all(|&l| l > CLOCK_CUTOFF)
            }
        }
    }
}

/// Simulates one path from `x` up to the fixed time `t_end`, using the
/// stream `path_index` of `cfg.seed`.
pub fn sample_path(
    model: &LevyModel,
    windows: &[OccupationWindow],
    barriers: Barriers,
    x: f64,
    t_end: f64,
    cfg: &SimConfig,
    path_index: u64,
) -> PathRecord {
    assert!(
        windows.len() <= MAX_WINDOWS,
        "at most {MAX_WINDOWS} windows"
    );
    let cfg = SimConfig {
        horizon_cap: cfg.horizon_cap.max(t_end),
        ..*cfg
    };
    let sampler = Sampler {
        model,
        windows,
        barriers,
        cfg: &cfg,
        rule: StopRule::Kill,
        bins: &[],
    };
    let mut rng = crate::sim::path_rng(cfg.seed, path_index);
    sampler.run(x, t_end, &mut rng)
}
