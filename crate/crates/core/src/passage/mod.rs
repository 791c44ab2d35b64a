//! Exit identities, resolvents and last-passage transforms.

mod classical;
mod last;
mod limits;
mod measure;
mod resolvent;

pub use classical::{
    classical_exit, classical_potential_density, first_passage_occupation,
    global_resolvent_density, ExitMode, GlobalResolvent,
};
pub use last::{LastKind, LastPassage};
pub use limits::{example_pq_equal, last_infty, prob_sigma_zero, LimitValue};
pub use measure::{capacity_measure_at_infinity, mu_hat, mu_measure, MeasureValue};
pub use resolvent::{Corridor, CorridorResolvent, ResolventRow};

use crate::levy::LevyModel;
use crate::scale::ScaleEval;

/// `lim q/φ(q)`: the plain ratio for `q > 0`; at `q = 0` it is 0 when
/// `φ(0) > 0` and `ψ'(0+)` (possibly 0) otherwise.
pub(crate) fn q_over_phi(model: &LevyModel, q: f64, phi: f64) -> f64 {
    if q > 0.0 {
        q / phi
    } else if phi > 0.0 {
        0.0
    } else {
        model.psi_prime_at_zero().max(0.0)
    }
}

/// `W'(y) − φ W(y)` for `y ≥ 0`, free of the cancellation between the two
/// exponentially growing terms.
pub(crate) fn creep_factor(scale: &ScaleEval, y: f64) -> f64 {
    if scale.phi_prime().is_finite() {
        scale.w_subdominant_prime(y) - scale.phi() * scale.w_subdominant(y)
    } else {
        scale.w_prime(y) - scale.phi() * scale.w(y)
    }
}
