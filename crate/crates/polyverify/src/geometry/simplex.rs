//! Dense two-phase simplex for small LPs over free variables.
//!
//! Solves `max c·x  s.t.  A x ≤ b` with `x` unrestricted in sign. Free
//! variables are split as `x = u − v`; each row gets a slack and, when its
//! right-hand side is negative, an artificial variable for phase 1.
//!
//! Pivoting uses Dantzig's rule with a switch to Bland's rule after a fixed
//! number of pivots, so degenerate instances cannot cycle. The caller's pivot
//! budget turns runaway instances into a distinct `IterationLimit` error.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Entries below this magnitude are treated as zero when selecting pivots.
const PIVOT_TOL: f64 = 1e-11;
/// Reduced-cost optimality tolerance.
const RC_TOL: f64 = 1e-10;

#[derive(Debug)]
pub(crate) enum SimplexOutcome {
    Optimal(Array1<f64>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// rows × (cols + 1); last column is the right-hand side.
    t: Array2<f64>,
    basis: Vec<usize>,
    /// Reduced costs of the current minimization objective.
    red: Vec<f64>,
    enterable: Vec<bool>,
    pivots: usize,
    max_pivots: usize,
    bland_after: usize,
}

enum SolveEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[[i, self.cols]]
    }

    fn pivot(&mut self, prow: usize, pcol: usize) {
        let inv = 1.0 / self.t[[prow, pcol]];
        for j in 0..=self.cols {
            self.t[[prow, j]] *= inv;
        }
        self.t[[prow, pcol]] = 1.0;
        for i in 0..self.rows {
            if i == prow {
                continue;
            }
            let f = self.t[[i, pcol]];
            if f != 0.0 {
                for j in 0..=self.cols {
                    self.t[[i, j]] -= f * self.t[[prow, j]];
                }
                self.t[[i, pcol]] = 0.0;
            }
        }
        let f = self.red[pcol];
        if f != 0.0 {
            for j in 0..self.cols {
                self.red[j] -= f * self.t[[prow, j]];
            }
            self.red[pcol] = 0.0;
        }
        self.basis[prow] = pcol;
        self.pivots += 1;
    }

    fn entering(&self) -> Option<usize> {
        if self.pivots >= self.bland_after {
            // Bland: smallest improving index, cycle-free.
            (0..self.cols).find(|&j| self.enterable[j] && self.red[j] < -RC_TOL)
        } else {
            let mut best = None;
            let mut best_val = -RC_TOL;
            for j in 0..self.cols {
                if self.enterable[j] && self.red[j] < best_val {
                    best_val = self.red[j];
                    best = Some(j);
                }
            }
            best
        }
    }

    fn leaving(&self, pcol: usize) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.t[[i, pcol]];
            if a > PIVOT_TOL {
                let ratio = self.rhs(i).max(0.0) / a;
                match best {
                    None => best = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - PIVOT_TOL
                            || (ratio < br + PIVOT_TOL && self.basis[i] < self.basis[bi])
                        {
                            best = Some((i, ratio));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self) -> Result<SolveEnd> {
        loop {
            if self.pivots >= self.max_pivots {
                return Err(Error::IterationLimit {
                    iterations: self.pivots,
                });
            }
            let pcol = match self.entering() {
                Some(j) => j,
                None => return Ok(SolveEnd::Optimal),
            };
            let prow = match self.leaving(pcol) {
                Some(i) => i,
                None => return Ok(SolveEnd::Unbounded),
            };
            self.pivot(prow, pcol);
        }
    }

    /// Rebuild reduced costs for minimization costs `mc` from the current basis.
    fn reset_objective(&mut self, mc: &[f64]) {
        self.red.copy_from_slice(mc);
        for i in 0..self.rows {
            let cb = mc[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.cols {
                    self.red[j] -= cb * self.t[[i, j]];
                }
            }
        }
        for (j, r) in self.red.iter_mut().enumerate() {
            if self.basis.contains(&j) {
                *r = 0.0;
            }
        }
    }

    fn objective_value(&self, mc: &[f64]) -> f64 {
        (0..self.rows).map(|i| mc[self.basis[i]] * self.rhs(i)).sum()
    }
}

/// Maximize `c·x` over `{x : A x ≤ b}`, `x` free.
pub(crate) fn maximize(
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
    c: ArrayView1<f64>,
    eps_feas: f64,
    max_pivots: usize,
) -> Result<SimplexOutcome> {
    let m = a.nrows();
    let n = a.ncols();
    debug_assert_eq!(c.len(), n);

    let n_art = b.iter().filter(|&&bi| bi < 0.0).count();
    let cols = 2 * n + m + n_art;
    let mut t = Array2::<f64>::zeros((m, cols + 1));
    let mut basis = vec![0usize; m];
    let mut art = 2 * n + m;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[[i, j]] = sign * a[[i, j]];
            t[[i, n + j]] = -sign * a[[i, j]];
        }
        t[[i, 2 * n + i]] = sign;
        t[[i, cols]] = sign * b[i];
        if sign < 0.0 {
            t[[i, art]] = 1.0;
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = 2 * n + i;
        }
    }

    let mut tab = Tableau {
        rows: m,
        cols,
        t,
        basis,
        red: vec![0.0; cols],
        enterable: vec![true; cols],
        pivots: 0,
        max_pivots,
        bland_after: 20 * (m + cols + 1),
    };

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut mc = vec![0.0; cols];
        mc[2 * n + m..cols].fill(1.0);
        tab.reset_objective(&mc);
        match tab.run()? {
            SolveEnd::Optimal => {}
            SolveEnd::Unbounded => {
                return Err(Error::Invariant("phase-1 objective unbounded".into()))
            }
        }
        let scale = b.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
        if tab.objective_value(&mc) > eps_feas * scale {
            return Ok(SimplexOutcome::Infeasible);
        }
        // Drive leftover artificials out of the basis where the row allows it;
        // rows with no real pivot are redundant and keep a frozen artificial.
        for i in 0..m {
            if tab.basis[i] >= 2 * n + m {
                if let Some(j) =
                    (0..2 * n + m).find(|&j| tab.t[[i, j]].abs() > PIVOT_TOL && tab.enterable[j])
                {
                    tab.pivot(i, j);
                    if tab.t[[i, cols]].abs() < PIVOT_TOL {
                        tab.t[[i, cols]] = 0.0;
                    }
                }
            }
        }
        for j in 2 * n + m..cols {
            tab.enterable[j] = false;
        }
        for i in 0..m {
            let r = tab.t[[i, cols]];
            if r < 0.0 {
                tab.t[[i, cols]] = 0.0;
            }
            debug_assert!(r > -1e-6, "phase-1 left rhs={r}");
        }
    }

    // Phase 2: minimize −c.
    let mut mc = vec![0.0; cols];
    for (j, &cj) in c.iter().enumerate() {
        mc[j] = -cj;
        mc[n + j] = cj;
    }
    tab.reset_objective(&mc);
    match tab.run()? {
        SolveEnd::Unbounded => Ok(SimplexOutcome::Unbounded),
        SolveEnd::Optimal => {
            let mut x = Array1::<f64>::zeros(n);
            for i in 0..m {
                let v = tab.rhs(i);
                let bj = tab.basis[i];
                if bj < n {
                    x[bj] += v;
                } else if bj < 2 * n {
                    x[bj - n] -= v;
                }
            }
            Ok(SimplexOutcome::Optimal(x))
        }
    }
}
