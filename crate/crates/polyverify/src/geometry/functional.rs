use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::geometry::Tolerances;

/// Scalar affine functional `x ↦ w·x + c`.
///
/// The gradient `w` must be nonzero: a zero functional defines no hyperplane
/// and is rejected at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFunctional {
    w: Array1<f64>,
    c: f64,
}

impl LinearFunctional {
    pub fn new(w: Array1<f64>, c: f64, tol: &Tolerances) -> Result<Self> {
        if !w.iter().any(|x| x.abs() > tol.eps_zero) {
            return Err(Error::ZeroFunctional);
        }
        if w.iter().chain([&c]).any(|x| !x.is_finite()) {
            return Err(Error::Parse("non-finite functional coefficient".into()));
        }
        Ok(LinearFunctional { w, c })
    }

    pub fn from_slice(w: &[f64], c: f64, tol: &Tolerances) -> Result<Self> {
        Self::new(Array1::from(w.to_vec()), c, tol)
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn w(&self) -> ArrayView1<'_, f64> {
        self.w.view()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Evaluate `w·x + c`.
    pub fn eval(&self, x: ArrayView1<'_, f64>) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::DimensionMismatch {
                context: "functional evaluation",
                expected: self.w.len(),
                actual: x.len(),
            });
        }
        Ok(self.w.dot(&x) + self.c)
    }

    /// The functional with flipped sign; defines the same hyperplane with the
    /// opposite orientation.
    pub fn negated(&self) -> Self {
        LinearFunctional {
            w: self.w.mapv(|x| -x),
            c: -self.c,
        }
    }

    /// Scale so `|w| = 1`. The zero-gradient case is excluded by construction.
    pub fn unit_normalized(&self) -> Self {
        let norm = self.w.dot(&self.w).sqrt();
        LinearFunctional {
            w: self.w.mapv(|x| x / norm),
            c: self.c / norm,
        }
    }

    /// Distance of the hyperplane `w·x + c = 0` from the origin.
    pub fn origin_offset(&self) -> f64 {
        let norm = self.w.dot(&self.w).sqrt();
        self.c.abs() / norm
    }

    /// True when `self` and `other` describe the same oriented half-space
    /// boundary, i.e. they agree after unit normalization.
    pub fn same_oriented(&self, other: &Self, eps: f64) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let a = self.unit_normalized();
        let b = other.unit_normalized();
        let wdiff = a
            .w
            .iter()
            .zip(b.w.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        wdiff <= eps && (a.c - b.c).abs() <= eps
    }
}

/// Affine map `x ↦ Wx + b` from `R^n` to `R^m`. Row `i` is usable as the
/// scalar functional `x ↦ ⟦Wx + b⟧_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineFunction {
    weights: Array2<f64>,
    bias: Array1<f64>,
}

impl AffineFunction {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(Error::DimensionMismatch {
                context: "affine function rows vs bias",
                expected: weights.nrows(),
                actual: bias.len(),
            });
        }
        Ok(AffineFunction { weights, bias })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn eval(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "affine function evaluation",
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(self.weights.dot(&x) + &self.bias)
    }

    /// Row `i` as a scalar functional, if its gradient is nonzero.
    pub fn row_functional(&self, i: usize, tol: &Tolerances) -> Result<LinearFunctional> {
        LinearFunctional::new(self.weights.row(i).to_owned(), self.bias[i], tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn eval_point_on_hyperplane() {
        let f = LinearFunctional::from_slice(&[1.0, 0.0], 0.0, &tol()).unwrap();
        assert_eq!(f.eval(array![0.0, 5.0].view()).unwrap(), 0.0);
    }

    #[test]
    fn eval_direct_arithmetic() {
        let f = LinearFunctional::from_slice(&[2.0, -1.0], 3.0, &tol()).unwrap();
        assert_eq!(f.eval(array![1.0, 1.0].view()).unwrap(), 4.0);
    }

    #[test]
    fn eval_boundary_of_upper_bound() {
        let f = LinearFunctional::from_slice(&[1.0], -1.0, &tol()).unwrap();
        assert_eq!(f.eval(array![1.0].view()).unwrap(), 0.0);
    }

    #[test]
    fn zero_functional_rejected() {
        assert!(matches!(
            LinearFunctional::from_slice(&[0.0, 1e-13], 1.0, &tol()),
            Err(Error::ZeroFunctional)
        ));
    }

    #[test]
    fn dimension_mismatch_reported() {
        let f = LinearFunctional::from_slice(&[1.0, 2.0], 0.0, &tol()).unwrap();
        assert!(f.eval(array![1.0].view()).is_err());
    }

    #[test]
    fn same_oriented_detects_positive_scaling() {
        let t = tol();
        let a = LinearFunctional::from_slice(&[1.0, 2.0], -3.0, &t).unwrap();
        let b = LinearFunctional::from_slice(&[2.0, 4.0], -6.0, &t).unwrap();
        assert!(a.same_oriented(&b, 1e-9));
        assert!(!a.same_oriented(&a.negated(), 1e-9));
    }

    #[test]
    fn affine_row_functional_matches_eval() {
        let f = AffineFunction::new(array![[1.0, 2.0], [0.0, -1.0]], array![0.5, 1.0]).unwrap();
        let x = array![2.0, 3.0];
        let y = f.eval(x.view()).unwrap();
        for i in 0..2 {
            let row = f.row_functional(i, &tol()).unwrap();
            assert!((row.eval(x.view()).unwrap() - y[i]).abs() < 1e-15);
        }
    }
}
