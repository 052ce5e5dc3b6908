//! Two-Level-Lattice networks: per-component local linear functions with
//! selector sets, the direct lattice semantics `max_j min_{k∈s_j} f_k(x)`, and
//! the exact realization as a ReLU parameter list.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::geometry::AffineFunction;
use crate::network::{
    build_max_network, build_min_network, parallel_compose, sequential_compose, Layer, ReluNetwork,
};

/// One scalar TLL component: `N` local linear functions `x ↦ ⟦W_ℓ x + b_ℓ⟧_k`
/// and `M` selector sets over them (0-based index sets).
#[derive(Clone, Debug)]
pub struct TllComponent {
    pub local: AffineFunction,
    pub selectors: Vec<Vec<usize>>,
}

/// Multi-output TLL network: `m` equally sized scalar components.
#[derive(Clone, Debug)]
pub struct TllNetwork {
    components: Vec<TllComponent>,
    input_dim: usize,
    locals: usize,
    terms: usize,
}

impl TllNetwork {
    pub fn new(components: Vec<TllComponent>) -> Result<TllNetwork> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidNetwork("TLL needs at least one component".into()))?;
        let input_dim = first.local.input_dim();
        let locals = first.local.output_dim();
        let terms = first.selectors.len();
        if locals == 0 || terms == 0 {
            return Err(Error::InvalidNetwork(
                "TLL needs at least one local function and one selector set".into(),
            ));
        }
        for (kappa, comp) in components.iter().enumerate() {
            if comp.local.input_dim() != input_dim
                || comp.local.output_dim() != locals
                || comp.selectors.len() != terms
            {
                return Err(Error::InvalidNetwork(format!(
                    "component {kappa} does not match the common (N, M, n) sizes"
                )));
            }
            for (j, s) in comp.selectors.iter().enumerate() {
                if s.is_empty() {
                    return Err(Error::InvalidNetwork(format!(
                        "selector set {j} of component {kappa} is empty"
                    )));
                }
                if s.iter().any(|&k| k >= locals) {
                    return Err(Error::InvalidNetwork(format!(
                        "selector set {j} of component {kappa} indexes past N = {locals}"
                    )));
                }
            }
            // Local linear functions must be pairwise distinct as functions;
            // ties would make the per-region ordering ill-defined.
            let w = comp.local.weights();
            let b = comp.local.bias();
            for i in 0..locals {
                for j in (i + 1)..locals {
                    let wdiff = (0..input_dim)
                        .map(|d| (w[[i, d]] - w[[j, d]]).abs())
                        .fold(0.0f64, f64::max);
                    if wdiff <= 1e-12 && (b[i] - b[j]).abs() <= 1e-12 {
                        return Err(Error::InvalidNetwork(format!(
                            "component {kappa}: local linear functions {i} and {j} coincide"
                        )));
                    }
                }
            }
        }
        Ok(TllNetwork {
            components,
            input_dim,
            locals,
            terms,
        })
    }

    pub fn components(&self) -> &[TllComponent] {
        &self.components
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    /// Number of local linear functions per component (N).
    pub fn local_count(&self) -> usize {
        self.locals
    }

    /// Number of selector sets per component (M).
    pub fn term_count(&self) -> usize {
        self.terms
    }

    /// Direct lattice evaluation on reals, no ReLU layers: component output is
    /// `max_j min_{k ∈ s_j} ⟦W_ℓ x + b_ℓ⟧_k`.
    pub fn eval_lattice(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "TLL input",
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        let mut out = Array1::<f64>::zeros(self.output_dim());
        for (kappa, comp) in self.components.iter().enumerate() {
            let vals = comp.local.eval(x)?;
            out[kappa] = comp
                .selectors
                .iter()
                .map(|s| s.iter().map(|&k| vals[k]).fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max);
        }
        Ok(out)
    }

    /// Exact ReLU realization: each component is the max network applied to
    /// `M` min networks, each fed through a selector matrix from the local
    /// linear layer; components combine in parallel.
    pub fn to_relu(&self) -> Result<ReluNetwork> {
        let mut component_nets = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            component_nets.push(self.component_to_relu(comp)?);
        }
        let mut net = component_nets[0].clone();
        for other in &component_nets[1..] {
            net = parallel_compose(&net, other)?;
        }
        Ok(net)
    }

    fn component_to_relu(&self, comp: &TllComponent) -> Result<ReluNetwork> {
        let n_locals = self.locals;
        let local_layer = ReluNetwork::new(vec![Layer::linear(
            comp.local.weights().clone(),
            comp.local.bias().clone(),
        )?])?;

        // One min term per selector set: selector matrix then an N-input min
        // network. Selector rows repeat the last selected index so every min
        // network sees exactly N inputs (min is idempotent).
        let mut terms: Vec<ReluNetwork> = Vec::with_capacity(self.terms);
        for s in &comp.selectors {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            let mut w = Array2::<f64>::zeros((n_locals, n_locals));
            for i in 0..n_locals {
                let pick = *sorted.get(i).unwrap_or(sorted.last().unwrap());
                w[[i, pick]] = 1.0;
            }
            let selector =
                ReluNetwork::new(vec![Layer::linear(w, Array1::zeros(n_locals))?])?;
            let term = if n_locals >= 2 {
                sequential_compose(&build_min_network(n_locals)?, &selector)?
            } else {
                selector
            };
            terms.push(term);
        }
        let mut mid = terms[0].clone();
        for t in &terms[1..] {
            mid = parallel_compose(&mid, t)?;
        }

        let lattice = if self.terms >= 2 {
            sequential_compose(&build_max_network(self.terms)?, &mid)?
        } else {
            mid
        };
        sequential_compose(&lattice, &local_layer)
    }
}

#[cfg(test)]
pub(crate) mod tll_testutil {
    use super::*;
    use ndarray::array;
    use rand::rngs::StdRng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    /// |x| as a TLL: locals x and −x, one singleton selector each.
    pub fn abs_tll() -> TllNetwork {
        TllNetwork::new(vec![TllComponent {
            local: AffineFunction::new(array![[1.0], [-1.0]], array![0.0, 0.0]).unwrap(),
            selectors: vec![vec![0], vec![1]],
        }])
        .unwrap()
    }

    pub fn random_tll(
        rng: &mut StdRng,
        n: usize,
        m: usize,
        locals: usize,
        terms: usize,
    ) -> TllNetwork {
        let components = (0..m)
            .map(|_| {
                let w = Array2::from_shape_fn((locals, n), |_| {
                    rng.sample::<f64, _>(StandardNormal)
                });
                let b = Array1::from_shape_fn(locals, |_| rng.sample::<f64, _>(StandardNormal));
                let selectors = (0..terms)
                    .map(|_| {
                        let size = rng.gen_range(1..=locals);
                        let mut s: Vec<usize> = (0..locals).collect();
                        for i in (1..s.len()).rev() {
                            s.swap(i, rng.gen_range(0..=i));
                        }
                        s.truncate(size);
                        s
                    })
                    .collect();
                TllComponent {
                    local: AffineFunction::new(w, b).unwrap(),
                    selectors,
                }
            })
            .collect();
        TllNetwork::new(components).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::tll_testutil::{abs_tll, random_tll};
    use super::*;
    use ndarray::array;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn abs_network_lattice_semantics() {
        let tll = abs_tll();
        assert_eq!(tll.eval_lattice(array![2.0].view()).unwrap(), array![2.0]);
        assert_eq!(tll.eval_lattice(array![-3.5].view()).unwrap(), array![3.5]);
    }

    #[test]
    fn single_term_is_min_of_all_locals() {
        let tll = TllNetwork::new(vec![TllComponent {
            local: AffineFunction::new(
                array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
                array![0.0, -1.0, 2.0],
            )
            .unwrap(),
            selectors: vec![vec![0, 1, 2]],
        }])
        .unwrap();
        let x = array![0.5, 0.25];
        let vals = [0.5, -0.75, 2.75];
        let expected = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(tll.eval_lattice(x.view()).unwrap()[0], expected);
    }

    #[test]
    fn single_local_ignores_selectors() {
        let tll = TllNetwork::new(vec![TllComponent {
            local: AffineFunction::new(array![[2.0, -1.0]], array![0.5]).unwrap(),
            selectors: vec![vec![0], vec![0], vec![0]],
        }])
        .unwrap();
        let x = array![1.0, 3.0];
        assert_eq!(tll.eval_lattice(x.view()).unwrap()[0], 2.0 - 3.0 + 0.5);
    }

    #[test]
    fn duplicate_local_functions_rejected() {
        let err = TllNetwork::new(vec![TllComponent {
            local: AffineFunction::new(array![[1.0], [1.0]], array![0.0, 0.0]).unwrap(),
            selectors: vec![vec![0], vec![1]],
        }]);
        assert!(matches!(err, Err(Error::InvalidNetwork(_))));
    }

    #[test]
    fn abs_network_relu_realization() {
        let net = abs_tll().to_relu().unwrap();
        for (x, expect) in [(-3.0, 3.0), (0.0, 0.0), (3.0, 3.0)] {
            assert_eq!(net.eval(array![x].view()).unwrap(), array![expect]);
        }
    }

    #[test]
    fn trivial_tll_is_affine() {
        let tll = TllNetwork::new(vec![TllComponent {
            local: AffineFunction::new(array![[1.5, -2.0]], array![0.25]).unwrap(),
            selectors: vec![vec![0]],
        }])
        .unwrap();
        let net = tll.to_relu().unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let x = array![rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            let want = 1.5 * x[0] - 2.0 * x[1] + 0.25;
            assert!((net.eval(x.view()).unwrap()[0] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn relu_realization_matches_lattice_on_random_networks() {
        let mut rng = StdRng::seed_from_u64(20);
        for trial in 0..30 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=2);
            let locals = rng.gen_range(1..=4);
            let terms = rng.gen_range(1..=4);
            let tll = random_tll(&mut rng, n, m, locals, terms);
            let net = tll.to_relu().unwrap();
            assert_eq!(net.input_dim(), n);
            assert_eq!(net.output_dim(), m);
            for _ in 0..200 {
                let x = Array1::from_shape_fn(n, |_| rng.gen_range(-3.0..3.0));
                let lattice = tll.eval_lattice(x.view()).unwrap();
                let relu = net.eval(x.view()).unwrap();
                let diff = (&lattice - &relu).iter().map(|d| d.abs()).fold(0.0, f64::max);
                assert!(diff <= 1e-9, "trial {trial}: diverged by {diff}");
            }
        }
    }
}
