//! Monte Carlo oracle for occupation-time functionals of spectrally negative
//! Lévy processes with Gaussian part and compound Poisson jumps.
//!
//! Every path draws its randomness from its own ChaCha8 stream keyed by the
//! seed and the path index, so estimates are reproducible bit for bit under
//! any thread count.

mod config;
mod functional;
mod path;
mod sim;

pub use config::{Barriers, McError, Result, SimConfig};
pub use functional::Functional;
pub use path::{sample_path, Clocks, ExitEvent, LastEvent, PathRecord, MAX_WINDOWS};
pub use sim::{path_rng, simulate_functional, McEstimate, Request, Simulator, BLOCK};
