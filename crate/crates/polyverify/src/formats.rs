//! JSON wire formats: polytopes, arrangements, networks, verification
//! problems and verdict reports. Kept separate from the domain types so the
//! file schemas stay stable and language-neutral.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AffineFunction, LinearFunctional, Polytope, Tolerances};
use crate::network::{Layer, LayerKind, ReluNetwork, TllComponent, TllNetwork};
use crate::verifier::{ProblemNetwork, Status, VerificationProblem, Verdict};
use crate::Context;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalJson {
    pub w: Vec<f64>,
    pub c: f64,
}

/// `{"dim": n, "constraints": [{"w": [...], "c": r}, ...]}`, each entry read
/// as `w·x + c ≤ 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub dim: usize,
    pub constraints: Vec<FunctionalJson>,
}

/// `{"dim": n, "functionals": [{"w": [...], "c": r}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArrangementJson {
    pub dim: usize,
    pub functionals: Vec<FunctionalJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerJson {
    #[serde(rename = "W")]
    pub weights: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub nonlinear: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TllComponentJson {
    #[serde(rename = "W_ell")]
    pub w_ell: Vec<Vec<f64>>,
    #[serde(rename = "b_ell")]
    pub b_ell: Vec<f64>,
    /// Selector sets with 1-based local-function indices.
    pub selectors: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum NetworkJson {
    #[serde(rename = "relu")]
    Relu { layers: Vec<LayerJson> },
    #[serde(rename = "tll")]
    Tll {
        n: usize,
        m: usize,
        #[serde(rename = "N")]
        locals: usize,
        #[serde(rename = "M")]
        terms: usize,
        components: Vec<TllComponentJson>,
    },
}

/// A full problem bundle: network plus both polytopes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemJson {
    pub network: NetworkJson,
    pub input_polytope: PolytopeJson,
    pub output_polytope: PolytopeJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TolerancesJson {
    pub eps_zero: f64,
    pub eps_feas: f64,
    pub eps_int: f64,
    pub eps_obj: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ViolationJson {
    pub region: String,
    pub constraint_index: usize,
    pub witness: Vec<f64>,
    pub margin: f64,
}

/// Verdict report. `wall_time_ms` is the only field expected to differ
/// between identical runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictJson {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub regions_traversed: usize,
    pub regions_verified: usize,
    pub lp_calls: u64,
    pub wall_time_ms: f64,
    pub marginal_lp_optima: usize,
    pub tolerances: TolerancesJson,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub violations: Vec<ViolationJson>,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<Array2<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!("{what}: ragged matrix rows")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| Error::Parse(format!("{what}: {e}")))
}

impl PolytopeJson {
    pub fn to_polytope(&self, tol: &Tolerances) -> Result<Polytope> {
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (i, f) in self.constraints.iter().enumerate() {
            if f.w.len() != self.dim {
                return Err(Error::Parse(format!(
                    "constraint {i}: w has length {}, dim is {}",
                    f.w.len(),
                    self.dim
                )));
            }
            constraints.push(LinearFunctional::from_slice(&f.w, f.c, tol)?);
        }
        Polytope::new(self.dim, constraints, tol)
    }

    pub fn from_polytope(p: &Polytope) -> PolytopeJson {
        PolytopeJson {
            dim: p.dim(),
            constraints: p
                .constraints()
                .iter()
                .map(|f| FunctionalJson {
                    w: f.w().to_vec(),
                    c: f.c(),
                })
                .collect(),
        }
    }
}

impl ArrangementJson {
    pub fn to_functionals(&self, tol: &Tolerances) -> Result<Vec<LinearFunctional>> {
        let mut out = Vec::with_capacity(self.functionals.len());
        for (i, f) in self.functionals.iter().enumerate() {
            if f.w.len() != self.dim {
                return Err(Error::Parse(format!(
                    "functional {i}: w has length {}, dim is {}",
                    f.w.len(),
                    self.dim
                )));
            }
            out.push(LinearFunctional::from_slice(&f.w, f.c, tol)?);
        }
        Ok(out)
    }
}

impl NetworkJson {
    pub fn to_problem_network(&self) -> Result<ProblemNetwork> {
        match self {
            NetworkJson::Relu { layers } => {
                let mut built = Vec::with_capacity(layers.len());
                for (k, l) in layers.iter().enumerate() {
                    let w = matrix_from_rows(&l.weights, &format!("layer {k} W"))?;
                    let b = Array1::from(l.b.clone());
                    let kind = if l.nonlinear {
                        LayerKind::Nonlinear
                    } else {
                        LayerKind::Linear
                    };
                    built.push(Layer::new(w, b, kind)?);
                }
                let net = ReluNetwork::new(built)?;
                if !net.is_shallow() {
                    return Err(Error::InvalidNetwork(
                        "relu networks must be shallow (one nonlinear, one linear layer) \
                         to be verifiable"
                            .into(),
                    ));
                }
                Ok(ProblemNetwork::Shallow(net))
            }
            NetworkJson::Tll {
                n,
                m,
                locals,
                terms,
                components,
            } => {
                if components.len() != *m {
                    return Err(Error::Parse(format!(
                        "tll: m = {m} but {} components given",
                        components.len()
                    )));
                }
                let mut built = Vec::with_capacity(components.len());
                for (kappa, comp) in components.iter().enumerate() {
                    let w = matrix_from_rows(&comp.w_ell, &format!("component {kappa} W_ell"))?;
                    if w.nrows() != *locals || w.ncols() != *n {
                        return Err(Error::Parse(format!(
                            "component {kappa}: W_ell is {}x{}, expected {locals}x{n}",
                            w.nrows(),
                            w.ncols()
                        )));
                    }
                    let b = Array1::from(comp.b_ell.clone());
                    if comp.selectors.len() != *terms {
                        return Err(Error::Parse(format!(
                            "component {kappa}: {} selector sets, expected {terms}",
                            comp.selectors.len()
                        )));
                    }
                    let mut selectors = Vec::with_capacity(comp.selectors.len());
                    for (j, s) in comp.selectors.iter().enumerate() {
                        let mut set = Vec::with_capacity(s.len());
                        for &one_based in s {
                            if one_based == 0 || one_based > *locals {
                                return Err(Error::Parse(format!(
                                    "component {kappa} selector {j}: index {one_based} \
                                     outside 1..={locals}"
                                )));
                            }
                            set.push(one_based - 1);
                        }
                        selectors.push(set);
                    }
                    built.push(TllComponent {
                        local: AffineFunction::new(w, b)?,
                        selectors,
                    });
                }
                Ok(ProblemNetwork::Tll(TllNetwork::new(built)?))
            }
        }
    }

    pub fn from_problem_network(net: &ProblemNetwork) -> NetworkJson {
        match net {
            ProblemNetwork::Shallow(net) => NetworkJson::Relu {
                layers: net
                    .layers()
                    .iter()
                    .map(|l| LayerJson {
                        weights: l
                            .weights()
                            .rows()
                            .into_iter()
                            .map(|r| r.to_vec())
                            .collect(),
                        b: l.bias().to_vec(),
                        nonlinear: l.kind() == LayerKind::Nonlinear,
                    })
                    .collect(),
            },
            ProblemNetwork::Tll(tll) => NetworkJson::Tll {
                n: tll.input_dim(),
                m: tll.output_dim(),
                locals: tll.local_count(),
                terms: tll.term_count(),
                components: tll
                    .components()
                    .iter()
                    .map(|c| TllComponentJson {
                        w_ell: c
                            .local
                            .weights()
                            .rows()
                            .into_iter()
                            .map(|r| r.to_vec())
                            .collect(),
                        b_ell: c.local.bias().to_vec(),
                        selectors: c
                            .selectors
                            .iter()
                            .map(|s| s.iter().map(|k| k + 1).collect())
                            .collect(),
                    })
                    .collect(),
            },
        }
    }
}

impl ProblemJson {
    pub fn to_problem(&self, ctx: &Context) -> Result<VerificationProblem> {
        let network = self.network.to_problem_network()?;
        let input = self.input_polytope.to_polytope(&ctx.tol)?;
        let output = self.output_polytope.to_polytope(&ctx.tol)?;
        VerificationProblem::new(network, input, output, ctx)
    }
}

impl VerdictJson {
    pub fn from_verdict(verdict: &Verdict, tol: &Tolerances, exhaustive: bool) -> VerdictJson {
        let status = match verdict.status {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
        };
        let violations = if exhaustive {
            verdict
                .violations
                .iter()
                .map(|v| ViolationJson {
                    region: v.region.to_hex(),
                    constraint_index: v.constraint_index,
                    witness: v.witness.to_vec(),
                    margin: v.margin,
                })
                .collect()
        } else {
            Vec::new()
        };
        VerdictJson {
            status: status.to_string(),
            witness: verdict.violation.as_ref().map(|v| v.witness.to_vec()),
            constraint_index: verdict.violation.as_ref().map(|v| v.constraint_index),
            margin: verdict.violation.as_ref().map(|v| v.margin),
            regions_traversed: verdict.stats.regions_traversed,
            regions_verified: verdict.stats.regions_verified,
            lp_calls: verdict.stats.lp_calls,
            wall_time_ms: verdict.stats.wall_time_ms,
            marginal_lp_optima: verdict.stats.marginal_lp_optima,
            tolerances: TolerancesJson {
                eps_zero: tol.eps_zero,
                eps_feas: tol.eps_feas,
                eps_int: tol.eps_int,
                eps_obj: tol.eps_obj,
            },
            violations,
        }
    }
}
