use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::geometry::lp::maximize_margin;
use crate::geometry::simplex::SimplexOutcome;
use crate::geometry::{solve_lp, Context, LinearFunctional, LpSense, LpSolution, Tolerances};

/// Convex polytope in H-representation: `{x : ℓ_i(x) ≤ 0 for all i}`.
///
/// The set may be empty or unbounded; boundedness is checked where needed,
/// never assumed. Constraints identical after unit normalization are collapsed
/// at construction and the collapse recorded in `index_map`.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    constraints: Vec<LinearFunctional>,
    index_map: Vec<usize>,
}

impl Polytope {
    pub fn new(
        dim: usize,
        constraints: Vec<LinearFunctional>,
        tol: &Tolerances,
    ) -> Result<Polytope> {
        let mut stored: Vec<LinearFunctional> = Vec::with_capacity(constraints.len());
        let mut index_map = Vec::with_capacity(constraints.len());
        for f in constraints {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    context: "polytope constraint",
                    expected: dim,
                    actual: f.dim(),
                });
            }
            match stored
                .iter()
                .position(|g| g.same_oriented(&f, tol.eps_zero.max(1e-12)))
            {
                Some(k) => index_map.push(k),
                None => {
                    index_map.push(stored.len());
                    stored.push(f);
                }
            }
        }
        Ok(Polytope {
            dim,
            constraints: stored,
            index_map,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Post-dedup constraint list.
    pub fn constraints(&self) -> &[LinearFunctional] {
        &self.constraints
    }

    /// Maps each input constraint index to its stored (deduped) index.
    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    /// For each stored constraint, the first input index that produced it.
    /// Identity when no duplicates were collapsed.
    pub fn representative_indices(&self) -> Vec<usize> {
        let mut rep = vec![usize::MAX; self.constraints.len()];
        for (orig, &stored) in self.index_map.iter().enumerate() {
            if rep[stored] == usize::MAX {
                rep[stored] = orig;
            }
        }
        rep
    }

    pub fn contains(&self, x: ArrayView1<'_, f64>, eps: f64) -> bool {
        self.constraints
            .iter()
            .all(|f| f.eval(x).map(|v| v <= eps).unwrap_or(false))
    }

    /// Largest constraint value at `x`; ≤ 0 means `x` is inside.
    pub fn max_violation(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.constraints
            .iter()
            .map(|f| f.eval(x).unwrap_or(f64::INFINITY))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Worst violation relative to each row's scale; used to validate LP output.
    pub(crate) fn scaled_violation(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut worst = 0.0f64;
        for f in &self.constraints {
            let row_scale = 1.0
                + f.c().abs()
                + f.w()
                    .iter()
                    .zip(x.iter())
                    .map(|(w, xi)| (w * xi).abs())
                    .sum::<f64>();
            let v = f.eval(x).unwrap_or(f64::INFINITY);
            worst = worst.max(v / row_scale);
        }
        worst
    }

    /// Rows `(A, b)` of the system `A x ≤ b` equivalent to `ℓ_i(x) ≤ 0`.
    pub(crate) fn standard_rows(&self) -> (Array2<f64>, Array1<f64>) {
        let m = self.constraints.len();
        let mut a = Array2::<f64>::zeros((m, self.dim));
        let mut b = Array1::<f64>::zeros(m);
        for (i, f) in self.constraints.iter().enumerate() {
            for j in 0..self.dim {
                a[[i, j]] = f.w()[j];
            }
            b[i] = -f.c();
        }
        (a, b)
    }

    /// Copy with constraint `i` removed (duplicates already collapsed).
    fn without_constraint(&self, i: usize) -> Polytope {
        let mut constraints = self.constraints.clone();
        constraints.remove(i);
        Polytope {
            dim: self.dim,
            constraints,
            index_map: Vec::new(),
        }
    }

    /// Scale of the constraint data: largest hyperplane offset from the origin.
    pub(crate) fn data_scale(&self) -> f64 {
        self.constraints
            .iter()
            .map(|f| f.origin_offset())
            .fold(0.0f64, f64::max)
    }
}

/// Strictly interior witness together with its worst-case slack.
#[derive(Clone, Debug)]
pub struct InteriorPoint {
    pub point: Array1<f64>,
    /// min over constraints of `−ℓ(point)`; always ≥ `eps_int`.
    pub margin: f64,
}

/// Find a deep interior point by maximizing the smallest constraint slack,
/// capped at the data scale so the witness stays near the constraint data
/// even when the set has unbounded inradius.
///
/// Returns `None` when no point clears every constraint by `eps_int`, which
/// covers both empty and lower-dimensional sets.
pub fn interior_point(p: &Polytope, ctx: &Context) -> Result<Option<InteriorPoint>> {
    let cap = 1.0 + p.data_scale();
    let solution = match maximize_margin(p, cap, ctx)? {
        SimplexOutcome::Optimal(z) => z,
        SimplexOutcome::Unbounded => {
            return Err(Error::Invariant(
                "capped interior-point LP reported unbounded".into(),
            ))
        }
        SimplexOutcome::Infeasible => {
            return Err(Error::Invariant(
                "interior-point LP with free margin reported infeasible".into(),
            ))
        }
    };
    let n = p.dim();
    let point = solution.slice(ndarray::s![0..n]).to_owned();
    let margin = -p.max_violation(point.view());
    if margin >= ctx.tol.eps_int {
        Ok(Some(InteriorPoint { point, margin }))
    } else {
        Ok(None)
    }
}

/// True when no point satisfies every constraint within `eps_feas`: the best
/// achievable worst-constraint value is still positive.
pub fn polytope_is_empty(p: &Polytope, ctx: &Context) -> Result<bool> {
    if p.constraints().is_empty() {
        return Ok(false);
    }
    match maximize_margin(p, 1.0 + p.data_scale(), ctx)? {
        SimplexOutcome::Unbounded => Ok(false),
        SimplexOutcome::Optimal(z) => {
            let point = z.slice(ndarray::s![0..p.dim()]).to_owned();
            Ok(p.max_violation(point.view()) > ctx.tol.eps_feas)
        }
        SimplexOutcome::Infeasible => Err(Error::Invariant(
            "margin LP with free slack reported infeasible".into(),
        )),
    }
}

/// Indices of the irredundant constraints: the minimal H-representation.
///
/// Uses the relax-and-maximize test, one LP per constraint: constraint `i` is
/// irredundant iff maximizing `ℓ_i` with `i` relaxed escapes past the
/// hyperplane (objective > `eps_feas`, or unbounded).
///
/// The polytope must be full-dimensional; empty or thin input is reported as
/// degenerate.
pub fn minimal_h_representation(p: &Polytope, ctx: &Context) -> Result<Vec<usize>> {
    if interior_point(p, ctx)?.is_none() {
        return Err(Error::Degenerate(
            "minimal H-representation needs a full-dimensional polytope".into(),
        ));
    }
    minimal_h_rep_of_full_dimensional(p, ctx)
}

/// Relax-and-maximize core; the caller guarantees full-dimensionality.
pub(crate) fn minimal_h_rep_of_full_dimensional(
    p: &Polytope,
    ctx: &Context,
) -> Result<Vec<usize>> {
    let mut keep = Vec::new();
    for i in 0..p.constraints().len() {
        let relaxed = p.without_constraint(i);
        let sol = solve_lp(&p.constraints()[i], &relaxed, LpSense::Maximize, ctx)?;
        let irredundant = match sol {
            LpSolution::Unbounded => true,
            LpSolution::Optimal { objective, .. } => objective > ctx.tol.eps_feas,
            LpSolution::Infeasible => {
                return Err(Error::Invariant(
                    "relaxed polytope infeasible although original has interior".into(),
                ))
            }
        };
        if irredundant {
            keep.push(i);
        }
    }
    Ok(keep)
}
