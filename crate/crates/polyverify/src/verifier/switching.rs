//! Switching structure of the supported architectures: the functionals whose
//! hyperplane arrangement makes the network affine on every region, and the
//! recovery of that affine function from a region's sign vector.

use ndarray::{Array1, Array2};

use crate::arrangement::{Arrangement, RegionEncoding};
use crate::error::{Error, Result};
use crate::geometry::{AffineFunction, LinearFunctional, Tolerances};
use crate::network::{ReluNetwork, TllNetwork};

/// How one network quantity relates to the switching functional list.
#[derive(Clone, Copy, Debug)]
enum SwitchSource {
    /// Position in the functional list handed to the arrangement.
    Hyperplane(usize),
    /// No hyperplane: the comparison/activation is the same everywhere.
    /// For a neuron this is `bias > 0`; for a local-function pair it is the
    /// sign of the constant difference.
    Constant(bool),
}

/// Switching functionals of a shallow network: one per first-layer neuron,
/// read off the rows of `(W¹, b¹)`. Neurons with a (numerically) zero weight
/// row never switch; their activation is fixed by the bias sign and they
/// contribute no hyperplane.
#[derive(Clone, Debug)]
pub struct ShallowSwitching {
    functionals: Vec<LinearFunctional>,
    neurons: Vec<SwitchSource>,
}

impl ShallowSwitching {
    pub fn from_network(net: &ReluNetwork, tol: &Tolerances) -> Result<Self> {
        if !net.is_shallow() {
            return Err(Error::InvalidNetwork(
                "switching extraction needs a shallow network (nonlinear then linear)".into(),
            ));
        }
        let layer = &net.layers()[0];
        let mut functionals = Vec::new();
        let mut neurons = Vec::with_capacity(layer.output_dim());
        for i in 0..layer.output_dim() {
            let row = layer.weights().row(i);
            if row.iter().any(|w| w.abs() > tol.eps_zero) {
                neurons.push(SwitchSource::Hyperplane(functionals.len()));
                functionals.push(LinearFunctional::new(row.to_owned(), layer.bias()[i], tol)?);
            } else {
                neurons.push(SwitchSource::Constant(layer.bias()[i] > 0.0));
            }
        }
        Ok(ShallowSwitching {
            functionals,
            neurons,
        })
    }

    /// The neuron functionals, in arrangement input order.
    pub fn functionals(&self) -> &[LinearFunctional] {
        &self.functionals
    }

    /// Affine function the network computes on `region`: with `d_i = 1` iff
    /// neuron `i` is active there, returns `x ↦ W²D W¹ x + W²D b¹ + b²`.
    ///
    /// `arr` must have been built with `self.functionals()` as its first
    /// inputs; extra bits (input-polytope hyperplanes) are ignored.
    pub fn active_affine(
        &self,
        net: &ReluNetwork,
        arr: &Arrangement,
        region: &RegionEncoding,
    ) -> Result<AffineFunction> {
        let (first, second) = (&net.layers()[0], &net.layers()[1]);
        let hidden = first.output_dim();
        let mut w2d = second.weights().clone();
        for (i, source) in self.neurons.iter().enumerate().take(hidden) {
            let active = match *source {
                SwitchSource::Hyperplane(pos) => arr.sign_of_source(pos, region) > 0,
                SwitchSource::Constant(active) => active,
            };
            if !active {
                w2d.column_mut(i).fill(0.0);
            }
        }
        let weights = w2d.dot(first.weights());
        let bias = w2d.dot(first.bias()) + second.bias();
        AffineFunction::new(weights, bias)
    }
}

/// Pairwise comparison map of one TLL component: entry for each local-function
/// pair `i < j`, either a difference functional's position or a constant sign.
#[derive(Clone, Debug)]
struct ComponentPairs {
    /// Flat upper-triangle order: (0,1), (0,2), …, (1,2), …
    pairs: Vec<SwitchSource>,
}

/// Switching functionals of a multi-output TLL network: per component, the
/// pairwise differences of its local linear functions. Pairs with equal
/// gradients produce no hyperplane (their order never changes) and are
/// tracked as constants.
#[derive(Clone, Debug)]
pub struct TllSwitching {
    functionals: Vec<LinearFunctional>,
    components: Vec<ComponentPairs>,
    locals: usize,
}

impl TllSwitching {
    pub fn from_network(tll: &TllNetwork, tol: &Tolerances) -> Result<Self> {
        let n = tll.input_dim();
        let locals = tll.local_count();
        let mut functionals = Vec::new();
        let mut components = Vec::with_capacity(tll.output_dim());
        for comp in tll.components() {
            let w = comp.local.weights();
            let b = comp.local.bias();
            let mut pairs = Vec::with_capacity(locals * (locals - 1) / 2);
            for i in 0..locals {
                for j in (i + 1)..locals {
                    let dw = Array1::from_shape_fn(n, |d| w[[i, d]] - w[[j, d]]);
                    let dc = b[i] - b[j];
                    if dw.iter().any(|x| x.abs() > tol.eps_zero) {
                        pairs.push(SwitchSource::Hyperplane(functionals.len()));
                        functionals.push(LinearFunctional::new(dw, dc, tol)?);
                    } else {
                        // Parallel local functions: ordered by bias alone.
                        pairs.push(SwitchSource::Constant(dc > 0.0));
                    }
                }
            }
            components.push(ComponentPairs { pairs });
        }
        Ok(TllSwitching {
            functionals,
            components,
            locals,
        })
    }

    pub fn functionals(&self) -> &[LinearFunctional] {
        &self.functionals
    }

    /// Affine function of the TLL on `region`, one stacked row per component.
    ///
    /// Per component: the region's pairwise signs induce a strict total order
    /// of the local functions (recovered by a topological sort whose
    /// acyclicity is asserted, not assumed); each min term activates the
    /// order-minimal member of its selector set, and the component activates
    /// the order-maximal among those.
    pub fn active_affine(
        &self,
        tll: &TllNetwork,
        arr: &Arrangement,
        region: &RegionEncoding,
    ) -> Result<AffineFunction> {
        let n = tll.input_dim();
        let m = tll.output_dim();
        let mut weights = Array2::<f64>::zeros((m, n));
        let mut bias = Array1::<f64>::zeros(m);
        for (kappa, comp) in tll.components().iter().enumerate() {
            let rank = self.component_order(kappa, arr, region)?;
            let active = comp
                .selectors
                .iter()
                .map(|s| {
                    s.iter()
                        .copied()
                        .min_by_key(|&k| rank[k])
                        .expect("selector sets are nonempty")
                })
                .max_by_key(|&k| rank[k])
                .expect("at least one selector set");
            weights
                .row_mut(kappa)
                .assign(&comp.local.weights().row(active));
            bias[kappa] = comp.local.bias()[active];
        }
        AffineFunction::new(weights, bias)
    }

    /// Total order of component `kappa`'s local functions on the region:
    /// `rank[k]` is the position of function `k`, 0 = smallest.
    #[allow(clippy::needless_range_loop)] // triangular pair fill wants indices
    fn component_order(
        &self,
        kappa: usize,
        arr: &Arrangement,
        region: &RegionEncoding,
    ) -> Result<Vec<usize>> {
        let n = self.locals;
        // greater[i][j] = true ⟺ f_i > f_j on the region.
        let mut greater = vec![vec![false; n]; n];
        let mut flat = self.components[kappa].pairs.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let gij = match *flat.next().expect("pair map complete") {
                    SwitchSource::Hyperplane(pos) => arr.sign_of_source(pos, region) > 0,
                    SwitchSource::Constant(g) => g,
                };
                greater[i][j] = gij;
                greater[j][i] = !gij;
            }
        }
        // Kahn's algorithm on the tournament; a complete acyclic tournament
        // admits exactly one source at every step.
        let mut indegree: Vec<usize> = (0..n)
            .map(|j| (0..n).filter(|&i| i != j && greater[j][i]).count())
            .collect();
        let mut rank = vec![usize::MAX; n];
        let mut removed = vec![false; n];
        for position in 0..n {
            let sources: Vec<usize> = (0..n)
                .filter(|&k| !removed[k] && indegree[k] == 0)
                .collect();
            if sources.len() != 1 {
                return Err(Error::Invariant(format!(
                    "pairwise signs of component {kappa} do not form a total order \
                     ({} sources at step {position})",
                    sources.len()
                )));
            }
            let k = sources[0];
            rank[k] = position;
            removed[k] = true;
            for other in 0..n {
                if !removed[other] && greater[other][k] {
                    indegree[other] -= 1;
                }
            }
        }
        Ok(rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Context;
    use crate::network::{Layer, TllComponent};
    use ndarray::array;

    fn ctx() -> Context {
        Context::default()
    }

    fn shallow(w1: Array2<f64>, b1: Array1<f64>, w2: Array2<f64>, b2: Array1<f64>) -> ReluNetwork {
        ReluNetwork::new(vec![
            Layer::nonlinear(w1, b1).unwrap(),
            Layer::linear(w2, b2).unwrap(),
        ])
        .unwrap()
    }

    fn relu_x() -> ReluNetwork {
        shallow(array![[1.0]], array![0.0], array![[1.0]], array![0.0])
    }

    #[test]
    fn shallow_functionals_read_off_rows() {
        let ctx = ctx();
        let net = shallow(
            array![[1.0], [-1.0]],
            array![0.0, 1.0],
            array![[1.0, 1.0]],
            array![0.0],
        );
        let sw = ShallowSwitching::from_network(&net, &ctx.tol).unwrap();
        assert_eq!(sw.functionals().len(), 2);
        let x = array![2.0];
        assert_eq!(sw.functionals()[0].eval(x.view()).unwrap(), 2.0);
        assert_eq!(sw.functionals()[1].eval(x.view()).unwrap(), -1.0);
    }

    #[test]
    fn shallow_functional_count_matches_neurons() {
        let ctx = ctx();
        let net = crate::network::testutil::random_network(
            &mut rand::SeedableRng::seed_from_u64(5),
            &[3, 5, 2],
        );
        let sw = ShallowSwitching::from_network(&net, &ctx.tol).unwrap();
        assert_eq!(sw.functionals().len(), 5);
    }

    #[test]
    fn deep_network_rejected() {
        let ctx = ctx();
        let net = crate::network::testutil::random_network(
            &mut rand::SeedableRng::seed_from_u64(5),
            &[2, 3, 3, 1],
        );
        assert!(ShallowSwitching::from_network(&net, &ctx.tol).is_err());
    }

    #[test]
    fn relu_active_and_inactive_regions() {
        let ctx = ctx();
        let net = relu_x();
        let sw = ShallowSwitching::from_network(&net, &ctx.tol).unwrap();
        let arr = Arrangement::with_base_point(sw.functionals().to_vec(), array![2.0], &ctx)
            .unwrap();
        // Region x > 0: identity map.
        let pos = RegionEncoding::from_bits(&[true]);
        let aff = sw.active_affine(&net, &arr, &pos).unwrap();
        assert_eq!(aff.eval(array![3.0].view()).unwrap(), array![3.0]);
        // Region x < 0: zero map.
        let neg = RegionEncoding::from_bits(&[false]);
        let aff = sw.active_affine(&net, &arr, &neg).unwrap();
        assert_eq!(aff.eval(array![-3.0].view()).unwrap(), array![0.0]);
    }

    #[test]
    fn constant_neuron_contributes_no_hyperplane() {
        let ctx = ctx();
        // Second neuron has a zero weight row and positive bias: always active.
        let net = shallow(
            array![[1.0], [0.0]],
            array![0.0, 2.0],
            array![[1.0, 1.0]],
            array![0.0],
        );
        let sw = ShallowSwitching::from_network(&net, &ctx.tol).unwrap();
        assert_eq!(sw.functionals().len(), 1);
        let arr = Arrangement::with_base_point(sw.functionals().to_vec(), array![1.0], &ctx)
            .unwrap();
        let neg = RegionEncoding::from_bits(&[false]);
        let aff = sw.active_affine(&net, &arr, &neg).unwrap();
        // Network on x < 0 is 0 + relu(2) = 2.
        assert_eq!(aff.eval(array![-1.0].view()).unwrap(), array![2.0]);
    }

    fn abs_tll() -> TllNetwork {
        TllNetwork::new(vec![TllComponent {
            local: AffineFunction::new(array![[1.0], [-1.0]], array![0.0, 0.0]).unwrap(),
            selectors: vec![vec![0], vec![1]],
        }])
        .unwrap()
    }

    #[test]
    fn tll_pair_counts() {
        let ctx = ctx();
        let mut rng = rand::SeedableRng::seed_from_u64(8);
        let two = crate::network::tll_testutil::random_tll(&mut rng, 2, 1, 2, 2);
        assert_eq!(
            TllSwitching::from_network(&two, &ctx.tol).unwrap().functionals().len(),
            1
        );
        let six = crate::network::tll_testutil::random_tll(&mut rng, 2, 2, 3, 2);
        assert_eq!(
            TllSwitching::from_network(&six, &ctx.tol).unwrap().functionals().len(),
            6
        );
    }

    #[test]
    fn abs_tll_difference_functional() {
        let ctx = ctx();
        let sw = TllSwitching::from_network(&abs_tll(), &ctx.tol).unwrap();
        assert_eq!(sw.functionals().len(), 1);
        // ℓ1 − ℓ2 = 2x: the hyperplane x = 0.
        assert_eq!(sw.functionals()[0].eval(array![1.0].view()).unwrap(), 2.0);
        assert_eq!(sw.functionals()[0].eval(array![0.0].view()).unwrap(), 0.0);
    }

    #[test]
    fn abs_tll_active_rows() {
        let ctx = ctx();
        let tll = abs_tll();
        let sw = TllSwitching::from_network(&tll, &ctx.tol).unwrap();
        let arr = Arrangement::with_base_point(sw.functionals().to_vec(), array![1.0], &ctx)
            .unwrap();
        // x > 0: active function is x.
        let aff = sw
            .active_affine(&tll, &arr, &RegionEncoding::from_bits(&[true]))
            .unwrap();
        assert_eq!(aff.eval(array![2.0].view()).unwrap(), array![2.0]);
        // x < 0: active function is −x.
        let aff = sw
            .active_affine(&tll, &arr, &RegionEncoding::from_bits(&[false]))
            .unwrap();
        assert_eq!(aff.eval(array![-2.0].view()).unwrap(), array![2.0]);
    }

    #[test]
    fn parallel_locals_yield_constant_pair() {
        let ctx = ctx();
        // f1 = x, f2 = x − 1: parallel, f1 > f2 everywhere — no hyperplane.
        let tll = TllNetwork::new(vec![TllComponent {
            local: AffineFunction::new(array![[1.0], [1.0]], array![0.0, -1.0]).unwrap(),
            selectors: vec![vec![0, 1]],
        }])
        .unwrap();
        let sw = TllSwitching::from_network(&tll, &ctx.tol).unwrap();
        assert!(sw.functionals().is_empty());
    }
}
