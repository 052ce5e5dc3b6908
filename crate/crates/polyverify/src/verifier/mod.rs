//! The decision procedure: build the switching arrangement extended by the
//! input polytope's hyperplanes, traverse its regions, recover the network's
//! affine function on each region inside the input polytope, and bound every
//! output constraint there with one LP. Any optimum beyond tolerance is a
//! counterexample, re-validated by direct network evaluation before being
//! reported.

mod switching;

pub use switching::{ShallowSwitching, TllSwitching};

use ndarray::{Array1, ArrayView1};
use std::ops::ControlFlow;
use std::time::Instant;

use crate::arrangement::{Arrangement, RegionEncoding, RegionGeometry, TraverseOptions};
use crate::error::{Error, Result};
use crate::geometry::{
    interior_point, polytope_is_empty, solve_lp, AffineFunction, Context, LinearFunctional,
    LpSense, LpSolution, Polytope,
};
use crate::network::{ReluNetwork, TllNetwork};

/// A network in one of the two verifiable architectures.
#[derive(Clone, Debug)]
pub enum ProblemNetwork {
    Shallow(ReluNetwork),
    Tll(TllNetwork),
}

impl ProblemNetwork {
    pub fn input_dim(&self) -> usize {
        match self {
            ProblemNetwork::Shallow(net) => net.input_dim(),
            ProblemNetwork::Tll(tll) => tll.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            ProblemNetwork::Shallow(net) => net.output_dim(),
            ProblemNetwork::Tll(tll) => tll.output_dim(),
        }
    }

    /// Direct evaluation (lattice semantics for TLL networks).
    pub fn eval(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        match self {
            ProblemNetwork::Shallow(net) => net.eval(x),
            ProblemNetwork::Tll(tll) => tll.eval_lattice(x),
        }
    }
}

/// Decide whether the network maps every point of `input_polytope` into
/// `output_polytope`. The input polytope must be bounded and full-dimensional.
#[derive(Clone, Debug)]
pub struct VerificationProblem {
    network: ProblemNetwork,
    input_polytope: Polytope,
    output_polytope: Polytope,
}

impl VerificationProblem {
    pub fn new(
        network: ProblemNetwork,
        input_polytope: Polytope,
        output_polytope: Polytope,
        ctx: &Context,
    ) -> Result<VerificationProblem> {
        if let ProblemNetwork::Shallow(net) = &network {
            if !net.is_shallow() {
                return Err(Error::InvalidNetwork(
                    "only shallow ReLU networks and TLL networks are verifiable".into(),
                ));
            }
        }
        if input_polytope.dim() != network.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "input polytope vs network input",
                expected: network.input_dim(),
                actual: input_polytope.dim(),
            });
        }
        if output_polytope.dim() != network.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "output polytope vs network output",
                expected: network.output_dim(),
                actual: output_polytope.dim(),
            });
        }
        if interior_point(&input_polytope, ctx)?.is_none() {
            return Err(Error::Degenerate(
                "input polytope is empty or lower-dimensional".into(),
            ));
        }
        // Boundedness: every coordinate must have finite extent.
        for d in 0..input_polytope.dim() {
            let mut w = vec![0.0; input_polytope.dim()];
            w[d] = 1.0;
            let coord = LinearFunctional::from_slice(&w, 0.0, &ctx.tol)?;
            for sense in [LpSense::Maximize, LpSense::Minimize] {
                match solve_lp(&coord, &input_polytope, sense, ctx)? {
                    LpSolution::Optimal { .. } => {}
                    LpSolution::Unbounded => {
                        return Err(Error::Degenerate(format!(
                            "input polytope unbounded in coordinate {d}"
                        )))
                    }
                    LpSolution::Infeasible => {
                        return Err(Error::Degenerate("input polytope empty".into()))
                    }
                }
            }
        }
        Ok(VerificationProblem {
            network,
            input_polytope,
            output_polytope,
        })
    }

    pub fn network(&self) -> &ProblemNetwork {
        &self.network
    }

    pub fn input_polytope(&self) -> &Polytope {
        &self.input_polytope
    }

    pub fn output_polytope(&self) -> &Polytope {
        &self.output_polytope
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
}

/// One confirmed output-constraint violation.
#[derive(Clone, Debug)]
pub struct Violation {
    pub region: RegionEncoding,
    /// Index into the caller's output constraint list (pre-dedup).
    pub constraint_index: usize,
    pub witness: Array1<f64>,
    /// `ℓ_y(network(witness))` by direct evaluation, always > 0.
    pub margin: f64,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyStats {
    pub regions_traversed: usize,
    /// Regions inside the input polytope, i.e. actually checked with LPs.
    pub regions_verified: usize,
    pub lp_calls: u64,
    pub wall_time_ms: f64,
    /// LP optima in `(0, eps_feas]`: too close to noise to certify, reported
    /// SAT with this counter as the warning.
    pub marginal_lp_optima: usize,
    /// Worst observed |network(witness) − active_affine(witness)|∞ over the
    /// verified regions.
    pub max_agreement_error: f64,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub status: Status,
    /// Primary counterexample when UNSAT.
    pub violation: Option<Violation>,
    /// All violations found (one per region/constraint pair) in exhaustive
    /// mode; just the primary one otherwise.
    pub violations: Vec<Violation>,
    pub stats: VerifyStats,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Keep going after the first violation and collect all of them.
    pub exhaustive: bool,
    /// Expand regions on the rayon pool.
    pub parallel: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            exhaustive: false,
            parallel: true,
        }
    }
}

enum Switching {
    Shallow(ShallowSwitching),
    Tll(TllSwitching),
}

/// A verification problem with its switching arrangement built: the network's
/// switching functionals followed by the input polytope's constraint
/// functionals, oriented at a common base point.
pub struct PreparedProblem<'a> {
    problem: &'a VerificationProblem,
    switching: Switching,
    arrangement: Arrangement,
    /// Arrangement input index of the first input-polytope constraint.
    px_offset: usize,
    px_count: usize,
    /// Stored output-constraint index -> first original index.
    output_rep: Vec<usize>,
}

impl<'a> PreparedProblem<'a> {
    pub fn build(problem: &'a VerificationProblem, ctx: &Context) -> Result<PreparedProblem<'a>> {
        let switching = match &problem.network {
            ProblemNetwork::Shallow(net) => {
                Switching::Shallow(ShallowSwitching::from_network(net, &ctx.tol)?)
            }
            ProblemNetwork::Tll(tll) => {
                Switching::Tll(TllSwitching::from_network(tll, &ctx.tol)?)
            }
        };
        let mut functionals = match &switching {
            Switching::Shallow(s) => s.functionals().to_vec(),
            Switching::Tll(s) => s.functionals().to_vec(),
        };
        let px_offset = functionals.len();
        let px = problem.input_polytope.constraints();
        functionals.extend(px.iter().cloned());
        let arrangement = Arrangement::build(functionals, ctx)?;

        let py = &problem.output_polytope;
        let mut output_rep = vec![usize::MAX; py.constraints().len()];
        for (orig, &stored) in py.index_map().iter().enumerate() {
            if output_rep[stored] == usize::MAX {
                output_rep[stored] = orig;
            }
        }
        Ok(PreparedProblem {
            problem,
            switching,
            arrangement,
            px_offset,
            px_count: px.len(),
            output_rep,
        })
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    /// True when the region lies inside the input polytope: every input
    /// constraint functional is negative on it.
    pub fn region_inside_input(&self, region: &RegionEncoding) -> bool {
        (0..self.px_count)
            .all(|k| self.arrangement.sign_of_source(self.px_offset + k, region) < 0)
    }

    /// The affine function the network computes on `region`.
    pub fn active_affine(&self, region: &RegionEncoding) -> Result<AffineFunction> {
        match (&self.switching, &self.problem.network) {
            (Switching::Shallow(s), ProblemNetwork::Shallow(net)) => {
                s.active_affine(net, &self.arrangement, region)
            }
            (Switching::Tll(s), ProblemNetwork::Tll(tll)) => {
                s.active_affine(tll, &self.arrangement, region)
            }
            _ => unreachable!("switching structure matches network architecture"),
        }
    }

    /// Check every output constraint on one region. Used by both the poset
    /// traversal driver and the brute-force reference.
    pub(crate) fn verify_region(
        &self,
        geom: &RegionGeometry,
        ctx: &Context,
    ) -> Result<RegionCheck> {
        if !self.region_inside_input(&geom.encoding) {
            return Ok(RegionCheck::skipped());
        }
        let active = self.active_affine(&geom.encoding)?;
        let net_at_witness = self.problem.network.eval(geom.witness.view())?;
        let affine_at_witness = active.eval(geom.witness.view())?;
        let agreement = (&net_at_witness - &affine_at_witness)
            .iter()
            .map(|d| d.abs())
            .fold(0.0f64, f64::max);
        if agreement > 1e-6 {
            return Err(Error::Invariant(format!(
                "active affine function diverges from the network at a region \
                 witness by {agreement:.3e}"
            )));
        }

        let mut check = RegionCheck {
            kept: true,
            agreement,
            violations: Vec::new(),
            marginal: 0,
        };
        let py = &self.problem.output_polytope;
        for (stored, out_fn) in py.constraints().iter().enumerate() {
            // Compose ℓ_y with the active affine map: w' = Aᵀ w_y, c' = w_y·d + c_y.
            let w = active.weights().t().dot(&out_fn.w());
            let c = out_fn.w().dot(active.bias()) + out_fn.c();
            let (optimum, argpoint) = if w.iter().all(|x| x.abs() <= ctx.tol.eps_zero) {
                // Constant objective on this region.
                (c, geom.witness.clone())
            } else {
                let objective = LinearFunctional::new(w, c, &ctx.tol)?;
                match solve_lp(&objective, &geom.closure, LpSense::Maximize, ctx)? {
                    LpSolution::Optimal { objective, argpoint } => (objective, argpoint),
                    other => {
                        return Err(Error::Invariant(format!(
                            "per-region LP on a bounded region returned {:?}",
                            other.status()
                        )))
                    }
                }
            };
            if optimum <= 0.0 {
                continue;
            }
            if optimum <= ctx.tol.eps_feas {
                check.marginal += 1;
                continue;
            }
            // Re-validate by direct evaluation; no LP output is trusted.
            let y = self.problem.network.eval(argpoint.view())?;
            let margin = out_fn.eval(y.view())?;
            let inside_px = self
                .problem
                .input_polytope
                .contains(argpoint.view(), ctx.tol.eps_feas);
            if margin > 0.0 && inside_px {
                check.violations.push(Violation {
                    region: geom.encoding.clone(),
                    constraint_index: self.output_rep[stored],
                    witness: argpoint,
                    margin,
                });
            } else {
                check.marginal += 1;
            }
        }
        Ok(check)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RegionCheck {
    pub kept: bool,
    pub agreement: f64,
    pub violations: Vec<Violation>,
    pub marginal: usize,
}

impl RegionCheck {
    fn skipped() -> Self {
        RegionCheck {
            kept: false,
            agreement: 0.0,
            violations: Vec::new(),
            marginal: 0,
        }
    }
}

/// Decide the verification problem.
///
/// By default stops after the first level of the traversal that produces a
/// violation (the reported counterexample is the first in deterministic
/// region order); `exhaustive` collects every violating (region, constraint)
/// pair instead.
pub fn verify(
    problem: &VerificationProblem,
    opts: &VerifyOptions,
    ctx: &Context,
) -> Result<Verdict> {
    let started = Instant::now();
    let lp_before = ctx.lp_calls();
    let prepared = PreparedProblem::build(problem, ctx)?;

    // An empty output polytope can never be satisfied: any input point is a
    // counterexample.
    if polytope_is_empty(&problem.output_polytope, ctx)? {
        let ip = interior_point(&problem.input_polytope, ctx)?
            .expect("input polytope validated full-dimensional");
        let y = problem.network.eval(ip.point.view())?;
        let (index, margin) = problem
            .output_polytope
            .constraints()
            .iter()
            .enumerate()
            .map(|(k, f)| (k, f.eval(y.view()).unwrap_or(f64::INFINITY)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("output polytope has constraints");
        let violation = Violation {
            region: RegionEncoding::all_zeros(0),
            constraint_index: prepared.output_rep[index],
            witness: ip.point,
            margin,
        };
        return Ok(Verdict {
            status: Status::Unsat,
            violation: Some(violation.clone()),
            violations: vec![violation],
            stats: VerifyStats {
                lp_calls: ctx.lp_calls() - lp_before,
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
                ..VerifyStats::default()
            },
        });
    }

    let mut stats = VerifyStats::default();
    let mut violations: Vec<Violation> = Vec::new();
    let traverse_opts = TraverseOptions {
        parallel: opts.parallel,
    };
    let summary = prepared.arrangement.traverse_regions(
        ctx,
        &traverse_opts,
        |geom| prepared.verify_region(geom, ctx),
        |_, check| {
            if check.kept {
                stats.regions_verified += 1;
                stats.max_agreement_error = stats.max_agreement_error.max(check.agreement);
            }
            stats.marginal_lp_optima += check.marginal;
            let found = !check.violations.is_empty();
            violations.extend(check.violations);
            if found && !opts.exhaustive {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    )?;

    stats.regions_traversed = summary.regions;
    stats.lp_calls = ctx.lp_calls() - lp_before;
    stats.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    let status = if violations.is_empty() {
        Status::Sat
    } else {
        Status::Unsat
    };
    Ok(Verdict {
        status,
        violation: violations.first().cloned(),
        violations,
        stats,
    })
}
