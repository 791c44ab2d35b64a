use occlast_core::LastKind;

use crate::path::{LastEvent, PathRecord};

/// Target expectations. Each is evaluated against one occupation window;
/// `e^{−L}` below means the clock of that window. Bin functionals return the
/// bin average of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `E[e^{−L(σ)}; 0 < σ ≤ τ]` with `τ` the exit time.
    LastTotal(LastKind),
    /// `σ⁺` part where the path creeps down through 0.
    LastUpAtom,
    /// `σ⁺` part where a jump from `(0, ∞)` ends the last stay above 0
    /// before the kill time.
    LastUpJump,
    /// `σ⁻` part with `X(σ⁻) = 0`.
    LastDownCreep,
    /// `P(σ = 0)`; ignores the barriers and the window.
    ProbSigmaZero(LastKind),
    /// Density of `X(σ⁺−)` off the creeping atom.
    LastUpBin { lo: f64, hi: f64 },
    /// Density of `X(σ⁻)` off the creeping atom.
    LastDownBin { lo: f64, hi: f64 },
    /// Density of `X(e_λ)` on `{e_λ < τ}`.
    KilledBin { lo: f64, hi: f64 },
    /// Density of `−X(e_λ)` jointly with a creeping `σ⁺`.
    JointUpCreepBin { lo: f64, hi: f64 },
    /// Density of `X(e_λ)` jointly with a creeping `σ⁻`.
    JointDownCreepBin { lo: f64, hi: f64 },
    /// Density of `X(e_λ)` jointly with `σ⁰`.
    JointHitBin { lo: f64, hi: f64 },
    /// `E[e^{−L(τ⁺)}; τ⁺ < τ⁻]` for the upper and lower barrier. No killing.
    ExitUp,
    /// `E[e^{−L(τ⁻)}; τ⁻ < τ⁺]`, optionally only for creeping exits. No
    /// killing.
    ExitDown { creep_only: bool },
    /// Density of the discounted occupation measure up to the exit.
    OccupationBin { lo: f64, hi: f64 },
}

impl Functional {
    /// True for functionals defined through the exponential kill time.
    pub fn needs_kill(&self) -> bool {
        !matches!(
            self,
            Functional::ExitUp | Functional::ExitDown { .. } | Functional::OccupationBin { .. }
        )
    }

    /// True when the functional involves the last time at 0.
    pub fn needs_hit(&self) -> bool {
        matches!(
            self,
            Functional::LastTotal(LastKind::SigmaZero)
                | Functional::ProbSigmaZero(LastKind::SigmaZero)
                | Functional::JointHitBin { .. }
        )
    }

    pub(crate) fn bin(&self) -> Option<(f64, f64)> {
        match *self {
            Functional::LastUpBin { lo, hi }
            | Functional::LastDownBin { lo, hi }
            | Functional::KilledBin { lo, hi }
            | Functional::JointUpCreepBin { lo, hi }
            | Functional::JointDownCreepBin { lo, hi }
            | Functional::JointHitBin { lo, hi }
            | Functional::OccupationBin { lo, hi } => Some((lo, hi)),
            _ => None,
        }
    }

    /// Value on one path. `occupation` is the recorded integral for
    /// [`Functional::OccupationBin`].
    pub(crate) fn evaluate(&self, rec: &PathRecord, window: usize, occupation: Option<f64>) -> f64 {
        let disc = |ev: &LastEvent| (-ev.clock[window]).exp();
        let in_bin = |v: f64, lo: f64, hi: f64| v >= lo && v < hi;
        match *self {
            Functional::LastTotal(kind) => rec.last_in_corridor(kind).map_or(0.0, disc),
            Functional::LastUpAtom => match rec.last_in_corridor(LastKind::SigmaPlus) {
                Some(ev) if ev.creep => disc(ev),
                _ => 0.0,
            },
            Functional::LastUpJump => match rec.last_in_corridor(LastKind::SigmaPlus) {
                Some(ev) if !ev.creep && ev.time < rec.end_time => disc(ev),
                _ => 0.0,
            },
            Functional::LastDownCreep => match rec.last_in_corridor(LastKind::SigmaMinus) {
                Some(ev) if ev.creep => disc(ev),
                _ => 0.0,
            },
            Functional::ProbSigmaZero(kind) => {
                if !rec.seen[crate::path::kind_index(kind)] {
                    1.0
                } else {
                    0.0
                }
            }
            Functional::LastUpBin { lo, hi } => match rec.last_in_corridor(LastKind::SigmaPlus) {
                Some(ev) if !ev.creep && in_bin(ev.pre_value, lo, hi) => disc(ev) / (hi - lo),
                _ => 0.0,
            },
            Functional::LastDownBin { lo, hi } => {
                match rec.last_in_corridor(LastKind::SigmaMinus) {
                    Some(ev) if !ev.creep && in_bin(ev.pre_value, lo, hi) => disc(ev) / (hi - lo),
                    _ => 0.0,
                }
            }
            Functional::KilledBin { lo, hi } => {
                if rec.killed_inside() && in_bin(rec.end_value, lo, hi) {
                    (-rec.end_clock[window]).exp() / (hi - lo)
                } else {
                    0.0
                }
            }
            Functional::JointUpCreepBin { lo, hi } => {
                match rec.last_in_corridor(LastKind::SigmaPlus) {
                    Some(ev) if ev.creep && rec.killed && in_bin(-rec.end_value, lo, hi) => {
                        disc(ev) / (hi - lo)
                    }
                    _ => 0.0,
                }
            }
            Functional::JointDownCreepBin { lo, hi } => {
                match rec.last_in_corridor(LastKind::SigmaMinus) {
                    Some(ev) if ev.creep && rec.killed && in_bin(rec.end_value, lo, hi) => {
                        disc(ev) / (hi - lo)
                    }
                    _ => 0.0,
                }
            }
            Functional::JointHitBin { lo, hi } => match rec.last_in_corridor(LastKind::SigmaZero) {
                Some(ev) if rec.killed && in_bin(rec.end_value, lo, hi) => disc(ev) / (hi - lo),
                _ => 0.0,
            },
            Functional::ExitUp => match rec.exit {
                Some(e) if e.up => (-e.clock[window]).exp(),
                _ => 0.0,
            },
            Functional::ExitDown { creep_only } => match rec.exit {
                Some(e) if !e.up && (e.creep || !creep_only) => (-e.clock[window]).exp(),
                _ => 0.0,
            },
            Functional::OccupationBin { lo, hi } => occupation.unwrap_or(0.0) / (hi - lo),
        }
    }
}
