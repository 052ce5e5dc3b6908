//! Linear geometry: affine functionals, H-representation polytopes, LP solving,
//! redundancy removal and interior-point witnesses.

mod functional;
mod lp;
mod polytope;
mod simplex;

pub use functional::{AffineFunction, LinearFunctional};
pub use lp::{solve_lp, LpSense, LpSolution, LpStatus};
pub use polytope::{interior_point, minimal_h_representation, polytope_is_empty, InteriorPoint, Polytope};
pub(crate) use polytope::minimal_h_rep_of_full_dimensional;

use std::sync::atomic::{AtomicU64, Ordering};

/// Numerical tolerances shared by every solver-backed operation.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Below this, a gradient entry (or a whole gradient) counts as zero.
    pub eps_zero: f64,
    /// Constraint satisfaction slack accepted as feasible.
    pub eps_feas: f64,
    /// Strict-interior margin required of region witnesses. Kept well above
    /// `eps_feas` so enumeration never mistakes LP noise for an interior.
    pub eps_int: f64,
    /// Objective agreement tolerance for optimal LP solutions.
    pub eps_obj: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_zero: 1e-12,
            eps_feas: 1e-9,
            eps_int: 1e-7,
            eps_obj: 1e-9,
        }
    }
}

/// Shared solver context: tolerances, pivot budget and an LP call counter.
///
/// Immutable apart from the atomic counter, so one context can be shared
/// freely across worker threads.
#[derive(Debug)]
pub struct Context {
    pub tol: Tolerances,
    /// Hard cap on simplex pivots per LP before reporting `IterationLimit`.
    pub max_pivots: usize,
    lp_calls: AtomicU64,
}

impl Default for Context {
    fn default() -> Self {
        Context::new(Tolerances::default())
    }
}

impl Context {
    pub fn new(tol: Tolerances) -> Self {
        Context {
            tol,
            max_pivots: 50_000,
            lp_calls: AtomicU64::new(0),
        }
    }

    /// Total number of LPs solved through this context so far.
    pub fn lp_calls(&self) -> u64 {
        self.lp_calls.load(Ordering::Relaxed)
    }

    pub(crate) fn count_lp(&self) {
        self.lp_calls.fetch_add(1, Ordering::Relaxed);
    }
}
