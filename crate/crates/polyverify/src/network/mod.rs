//! ReLU network parameter lists, evaluation and composition operators, plus
//! the min/max builder networks and Two-Level-Lattice networks.

mod builders;
mod tll;

pub use builders::{build_max_network, build_min_network, input_replicator, two_element_max, two_element_min};
pub use tll::{TllComponent, TllNetwork};

#[cfg(test)]
pub(crate) use tll::tll_testutil;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    /// `z ↦ max{Wz + b, 0}` elementwise.
    Nonlinear,
    /// `z ↦ Wz + b`.
    Linear,
}

#[derive(Clone, Debug)]
pub struct Layer {
    weights: Array2<f64>,
    bias: Array1<f64>,
    kind: LayerKind,
}

impl Layer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>, kind: LayerKind) -> Result<Layer> {
        if weights.nrows() != bias.len() {
            return Err(Error::DimensionMismatch {
                context: "layer weights vs bias",
                expected: weights.nrows(),
                actual: bias.len(),
            });
        }
        Ok(Layer { weights, bias, kind })
    }

    pub fn linear(weights: Array2<f64>, bias: Array1<f64>) -> Result<Layer> {
        Layer::new(weights, bias, LayerKind::Linear)
    }

    pub fn nonlinear(weights: Array2<f64>, bias: Array1<f64>) -> Result<Layer> {
        Layer::new(weights, bias, LayerKind::Nonlinear)
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn kind(&self) -> LayerKind {
        self.kind
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    pub fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut z = self.weights.dot(&x) + &self.bias;
        if self.kind == LayerKind::Nonlinear {
            z.mapv_inplace(|v| v.max(0.0));
        }
        z
    }
}

/// A ReLU network as an ordered parameter list of layers. Consecutive layers
/// must be composable and the final layer is always linear.
#[derive(Clone, Debug)]
pub struct ReluNetwork {
    layers: Vec<Layer>,
}

impl ReluNetwork {
    pub fn new(layers: Vec<Layer>) -> Result<ReluNetwork> {
        if layers.is_empty() {
            return Err(Error::InvalidNetwork("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].output_dim() != pair[1].input_dim() {
                return Err(Error::DimensionMismatch {
                    context: "consecutive layers",
                    expected: pair[0].output_dim(),
                    actual: pair[1].input_dim(),
                });
            }
        }
        if layers.last().unwrap().kind() != LayerKind::Linear {
            return Err(Error::InvalidNetwork("final layer must be linear".into()));
        }
        Ok(ReluNetwork { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output_dim()
    }

    /// `(input, output)` dimension pairs per layer.
    pub fn arch(&self) -> Vec<(usize, usize)> {
        self.layers
            .iter()
            .map(|l| (l.input_dim(), l.output_dim()))
            .collect()
    }

    /// Two layers, the first nonlinear and the second linear.
    pub fn is_shallow(&self) -> bool {
        self.layers.len() == 2
            && self.layers[0].kind() == LayerKind::Nonlinear
            && self.layers[1].kind() == LayerKind::Linear
    }

    /// Layer-by-layer forward evaluation.
    pub fn eval(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        let mut z = x.to_owned();
        for layer in &self.layers {
            z = layer.apply(z.view());
        }
        Ok(z)
    }
}

/// Functional composition: `eval(result, x) = eval(outer, eval(inner, x))`.
/// The layer list is `inner`'s layers followed by `outer`'s.
pub fn sequential_compose(outer: &ReluNetwork, inner: &ReluNetwork) -> Result<ReluNetwork> {
    if inner.output_dim() != outer.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "sequential composition",
            expected: outer.input_dim(),
            actual: inner.output_dim(),
        });
    }
    let mut layers = inner.layers.clone();
    layers.extend(outer.layers.iter().cloned());
    ReluNetwork::new(layers)
}

/// Parallel composition over a shared input:
/// `eval(result, x) = concat(eval(a, x), eval(b, x))`.
///
/// First layers are stacked vertically; deeper layers combine block-diagonally
/// so the two networks stay independent. Depths and per-layer kinds must match;
/// no identity padding is inserted.
pub fn parallel_compose(a: &ReluNetwork, b: &ReluNetwork) -> Result<ReluNetwork> {
    if a.input_dim() != b.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "parallel composition input",
            expected: a.input_dim(),
            actual: b.input_dim(),
        });
    }
    if a.depth() != b.depth() {
        return Err(Error::InvalidNetwork(format!(
            "parallel composition needs equal depth, got {} and {}",
            a.depth(),
            b.depth()
        )));
    }
    let mut layers = Vec::with_capacity(a.depth());
    for (k, (la, lb)) in a.layers.iter().zip(b.layers.iter()).enumerate() {
        if la.kind() != lb.kind() {
            return Err(Error::InvalidNetwork(format!(
                "parallel composition needs matching layer kinds at layer {k}"
            )));
        }
        let layer = if k == 0 {
            stack_rows(la, lb)?
        } else {
            block_diagonal(la, lb)?
        };
        layers.push(layer);
    }
    ReluNetwork::new(layers)
}

/// Independent composition over concatenated inputs:
/// `eval(result, concat(x, y)) = concat(eval(a, x), eval(b, y))`.
/// Every layer combines block-diagonally. Used by the pairwise min/max
/// builders where each subnetwork consumes its own slice of the input.
pub fn direct_sum(a: &ReluNetwork, b: &ReluNetwork) -> Result<ReluNetwork> {
    if a.depth() != b.depth() {
        return Err(Error::InvalidNetwork(format!(
            "direct sum needs equal depth, got {} and {}",
            a.depth(),
            b.depth()
        )));
    }
    let mut layers = Vec::with_capacity(a.depth());
    for (k, (la, lb)) in a.layers.iter().zip(b.layers.iter()).enumerate() {
        if la.kind() != lb.kind() {
            return Err(Error::InvalidNetwork(format!(
                "direct sum needs matching layer kinds at layer {k}"
            )));
        }
        layers.push(block_diagonal(la, lb)?);
    }
    ReluNetwork::new(layers)
}

fn stack_rows(a: &Layer, b: &Layer) -> Result<Layer> {
    let rows = a.output_dim() + b.output_dim();
    let cols = a.input_dim();
    let mut w = Array2::<f64>::zeros((rows, cols));
    let mut bias = Array1::<f64>::zeros(rows);
    w.slice_mut(ndarray::s![..a.output_dim(), ..]).assign(a.weights());
    w.slice_mut(ndarray::s![a.output_dim().., ..]).assign(b.weights());
    bias.slice_mut(ndarray::s![..a.output_dim()]).assign(a.bias());
    bias.slice_mut(ndarray::s![a.output_dim()..]).assign(b.bias());
    Layer::new(w, bias, a.kind())
}

fn block_diagonal(a: &Layer, b: &Layer) -> Result<Layer> {
    let rows = a.output_dim() + b.output_dim();
    let cols = a.input_dim() + b.input_dim();
    let mut w = Array2::<f64>::zeros((rows, cols));
    let mut bias = Array1::<f64>::zeros(rows);
    w.slice_mut(ndarray::s![..a.output_dim(), ..a.input_dim()])
        .assign(a.weights());
    w.slice_mut(ndarray::s![a.output_dim().., a.input_dim()..])
        .assign(b.weights());
    bias.slice_mut(ndarray::s![..a.output_dim()]).assign(a.bias());
    bias.slice_mut(ndarray::s![a.output_dim()..]).assign(b.bias());
    Layer::new(w, bias, a.kind())
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::rngs::StdRng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    pub fn random_network(rng: &mut StdRng, dims: &[usize]) -> ReluNetwork {
        let mut layers = Vec::new();
        for k in 0..dims.len() - 1 {
            let (i, o) = (dims[k], dims[k + 1]);
            let w = Array2::from_shape_fn((o, i), |_| rng.sample::<f64, _>(StandardNormal));
            let b = Array1::from_shape_fn(o, |_| rng.sample::<f64, _>(StandardNormal));
            let kind = if k == dims.len() - 2 {
                LayerKind::Linear
            } else {
                LayerKind::Nonlinear
            };
            layers.push(Layer::new(w, b, kind).unwrap());
        }
        ReluNetwork::new(layers).unwrap()
    }

    pub fn random_point(rng: &mut StdRng, dim: usize, scale: f64) -> Array1<f64> {
        Array1::from_shape_fn(dim, |_| rng.gen_range(-scale..scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use testutil::{random_network, random_point};

    fn identity(dim: usize) -> ReluNetwork {
        ReluNetwork::new(vec![Layer::linear(Array2::eye(dim), Array1::zeros(dim)).unwrap()])
            .unwrap()
    }

    #[test]
    fn single_linear_layer_is_identity_map() {
        let net = identity(2);
        assert_eq!(net.eval(array![3.0, -4.0].view()).unwrap(), array![3.0, -4.0]);
    }

    #[test]
    fn relu_clamps_negative_input() {
        let net = ReluNetwork::new(vec![
            Layer::nonlinear(Array2::eye(1), Array1::zeros(1)).unwrap(),
            Layer::linear(Array2::eye(1), Array1::zeros(1)).unwrap(),
        ])
        .unwrap();
        assert_eq!(net.eval(array![-2.0].view()).unwrap(), array![0.0]);
        assert_eq!(net.eval(array![2.0].view()).unwrap(), array![2.0]);
    }

    #[test]
    fn final_layer_must_be_linear() {
        let err = ReluNetwork::new(vec![
            Layer::nonlinear(Array2::eye(1), Array1::zeros(1)).unwrap(),
        ]);
        assert!(matches!(err, Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn identity_composed_with_identity() {
        let net = sequential_compose(&identity(3), &identity(3)).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..10 {
            let x = random_point(&mut rng, 3, 5.0);
            assert_eq!(net.eval(x.view()).unwrap(), x);
        }
    }

    #[test]
    fn min_after_doubling_layer() {
        let doubling = ReluNetwork::new(vec![
            Layer::linear(Array2::eye(2) * 2.0, Array1::zeros(2)).unwrap(),
        ])
        .unwrap();
        let net = sequential_compose(&build_min_network(2).unwrap(), &doubling).unwrap();
        assert_eq!(net.eval(array![1.0, 4.0].view()).unwrap(), array![2.0]);
    }

    #[test]
    fn composition_matches_nested_evaluation() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..10 {
            let inner = random_network(&mut rng, &[3, 4, 2]);
            let outer = random_network(&mut rng, &[2, 5, 3]);
            let composed = sequential_compose(&outer, &inner).unwrap();
            for _ in 0..5 {
                let x = random_point(&mut rng, 3, 2.0);
                let nested = outer.eval(inner.eval(x.view()).unwrap().view()).unwrap();
                let direct = composed.eval(x.view()).unwrap();
                let diff = (&nested - &direct).iter().map(|d| d.abs()).fold(0.0, f64::max);
                assert!(diff <= 1e-12, "composition diverged by {diff}");
            }
        }
    }

    #[test]
    fn sequential_composition_is_associative_in_evaluation() {
        let mut rng = StdRng::seed_from_u64(31);
        let a = random_network(&mut rng, &[2, 3, 2]);
        let b = random_network(&mut rng, &[4, 3, 2]);
        let c = random_network(&mut rng, &[3, 5, 4]);
        let left = sequential_compose(&sequential_compose(&a, &b).unwrap(), &c).unwrap();
        let right = sequential_compose(&a, &sequential_compose(&b, &c).unwrap()).unwrap();
        for _ in 0..20 {
            let x = random_point(&mut rng, 3, 2.0);
            let l = left.eval(x.view()).unwrap();
            let r = right.eval(x.view()).unwrap();
            assert_eq!(l, r);
        }
    }

    #[test]
    fn parallel_of_identities_duplicates_input() {
        let net = parallel_compose(&identity(1), &identity(1)).unwrap();
        assert_eq!(net.eval(array![0.7].view()).unwrap(), array![0.7, 0.7]);
    }

    #[test]
    fn min_parallel_max_outputs_both() {
        let net = parallel_compose(
            &build_min_network(2).unwrap(),
            &build_max_network(2).unwrap(),
        )
        .unwrap();
        assert_eq!(net.eval(array![3.0, 5.0].view()).unwrap(), array![3.0, 5.0]);
    }

    #[test]
    fn parallel_matches_concatenated_evaluation() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..10 {
            let a = random_network(&mut rng, &[3, 4, 2]);
            let b = random_network(&mut rng, &[3, 6, 1]);
            let stacked = parallel_compose(&a, &b).unwrap();
            for _ in 0..5 {
                let x = random_point(&mut rng, 3, 2.0);
                let ya = a.eval(x.view()).unwrap();
                let yb = b.eval(x.view()).unwrap();
                let y = stacked.eval(x.view()).unwrap();
                assert_eq!(y.len(), ya.len() + yb.len());
                for (i, v) in ya.iter().chain(yb.iter()).enumerate() {
                    assert!((y[i] - v).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn parallel_rejects_unequal_depth() {
        let deep = ReluNetwork::new(vec![
            Layer::nonlinear(Array2::eye(1), Array1::zeros(1)).unwrap(),
            Layer::linear(Array2::eye(1), Array1::zeros(1)).unwrap(),
        ])
        .unwrap();
        assert!(parallel_compose(&deep, &identity(1)).is_err());
    }

    #[test]
    fn direct_sum_splits_input() {
        let net = direct_sum(&build_min_network(2).unwrap(), &build_min_network(2).unwrap())
            .unwrap();
        assert_eq!(
            net.eval(array![4.0, 1.0, -2.0, 7.0].view()).unwrap(),
            array![1.0, -2.0]
        );
    }
}
