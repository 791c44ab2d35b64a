//! Laplace transforms of occupation times of intervals up to last passage
//! times for spectrally negative Lévy processes.

pub mod error;
pub mod inversion;
pub mod kernels;
pub mod levy;
pub mod passage;
pub mod quad;
pub mod roots;
pub mod scale;

pub use error::{Error, Result};
pub use kernels::{KernelEval, OccupationWindow};
pub use levy::{ExponentialJumps, GammaJumps, JumpDistribution, JumpSpec, LevyModel};
pub use passage::{Corridor, CorridorResolvent, LastKind, LastPassage, MeasureValue};
pub use scale::{ScaleBackend, ScaleEval, TiltedScale};
