use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::geometry::simplex::{maximize, SimplexOutcome};
use crate::geometry::{Context, LinearFunctional, Polytope};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpSense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Outcome of an LP solve. The optimizer is present exactly when the status
/// is optimal, and then satisfies every constraint within `eps_feas`.
#[derive(Clone, Debug)]
pub enum LpSolution {
    Optimal { objective: f64, argpoint: Array1<f64> },
    Infeasible,
    Unbounded,
}

impl LpSolution {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal { .. } => LpStatus::Optimal,
            LpSolution::Infeasible => LpStatus::Infeasible,
            LpSolution::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn objective(&self) -> Option<f64> {
        match self {
            LpSolution::Optimal { objective, .. } => Some(*objective),
            _ => None,
        }
    }

    pub fn argpoint(&self) -> Option<&Array1<f64>> {
        match self {
            LpSolution::Optimal { argpoint, .. } => Some(argpoint),
            _ => None,
        }
    }
}

/// Optimize `objective` over the polytope `{x : ℓ_i(x) ≤ 0}`.
///
/// Iteration-limit exhaustion is reported as an error, never folded into one
/// of the three statuses.
pub fn solve_lp(
    objective: &LinearFunctional,
    constraints: &Polytope,
    sense: LpSense,
    ctx: &Context,
) -> Result<LpSolution> {
    if objective.dim() != constraints.dim() {
        return Err(Error::DimensionMismatch {
            context: "LP objective vs constraints",
            expected: constraints.dim(),
            actual: objective.dim(),
        });
    }
    let (a, b) = constraints.standard_rows();
    let c = match sense {
        LpSense::Maximize => objective.w().to_owned(),
        LpSense::Minimize => objective.w().mapv(|x| -x),
    };
    ctx.count_lp();
    match maximize(a.view(), b.view(), c.view(), ctx.tol.eps_feas, ctx.max_pivots)? {
        SimplexOutcome::Infeasible => Ok(LpSolution::Infeasible),
        SimplexOutcome::Unbounded => Ok(LpSolution::Unbounded),
        SimplexOutcome::Optimal(x) => {
            let resid = constraints.scaled_violation(x.view());
            if resid > ctx.tol.eps_feas {
                return Err(Error::Invariant(format!(
                    "LP argpoint violates constraints by {resid:.3e}"
                )));
            }
            let objective = objective.eval(x.view())?;
            Ok(LpSolution::Optimal {
                objective,
                argpoint: x,
            })
        }
    }
}

/// Maximize the common slack `r` over `(x, r)` with rows `w_i·x + r ≤ −c_i`
/// and the cap `r ≤ cap`. The cap keeps the LP bounded on polytopes with
/// unbounded inradius and keeps the optimizer near the constraint data
/// instead of at some arbitrarily deep point. Used by the interior-point
/// search; kept here so the polytope code shares one solver path.
pub(crate) fn maximize_margin(p: &Polytope, cap: f64, ctx: &Context) -> Result<SimplexOutcome> {
    let n = p.dim();
    let m = p.constraints().len();
    let mut a = Array2::<f64>::zeros((m + 1, n + 1));
    let mut b = Array1::<f64>::zeros(m + 1);
    for (i, f) in p.constraints().iter().enumerate() {
        for j in 0..n {
            a[[i, j]] = f.w()[j];
        }
        a[[i, n]] = 1.0;
        b[i] = -f.c();
    }
    a[[m, n]] = 1.0;
    b[m] = cap;
    let mut c = Array1::<f64>::zeros(n + 1);
    c[n] = 1.0;
    ctx.count_lp();
    maximize(a.view(), b.view(), c.view(), ctx.tol.eps_feas, ctx.max_pivots)
}
