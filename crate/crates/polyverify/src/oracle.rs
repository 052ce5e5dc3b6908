//! Independent brute-force references used by tests and the CLI's check mode:
//! exhaustive region enumeration over all sign vectors, hit-and-run sampling
//! falsification, and exhaustive small-instance verification.
//!
//! These share the geometry module's LP routines but deliberately not the
//! poset traversal, so they can serve as cross-checks of it.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeSet;
use std::time::Instant;

use crate::arrangement::{Arrangement, RegionEncoding, RegionGeometry, TraverseOptions};
use crate::error::{Error, Result};
use crate::geometry::{interior_point, polytope_is_empty, Context};
use crate::verifier::{
    PreparedProblem, Status, VerificationProblem, Verdict, VerifyStats, Violation,
};
use std::ops::ControlFlow;

/// Hard cap on brute-force enumeration: 2^N sign vectors, each one LP.
pub const BRUTE_FORCE_GUARD: usize = 20;

/// Default seed of the sampling falsifier.
pub const DEFAULT_FALSIFY_SEED: u64 = 0xC0FFEE;

/// Outcome of a cross-check between an algorithm and its oracle.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub agreed: bool,
    /// Empty exactly when `agreed`; otherwise the first divergence found.
    pub details: String,
}

impl OracleReport {
    fn agreement() -> Self {
        OracleReport {
            agreed: true,
            details: String::new(),
        }
    }

    fn divergence(details: String) -> Self {
        OracleReport {
            agreed: false,
            details,
        }
    }
}

/// All valid region encodings of the arrangement, found by testing every one
/// of the `2^N` sign vectors for an interior point. Exponential by
/// construction; guarded to small `N`.
pub fn brute_force_regions(a: &Arrangement, ctx: &Context) -> Result<BTreeSet<RegionEncoding>> {
    let n = a.len();
    if n > BRUTE_FORCE_GUARD {
        return Err(Error::Degenerate(format!(
            "brute-force enumeration guard: N = {n} exceeds {BRUTE_FORCE_GUARD}"
        )));
    }
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << n) {
        let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let enc = RegionEncoding::from_bits(&bits);
        let closure = a.region_closure(&enc, ctx)?;
        if interior_point(&closure, ctx)?.is_some() {
            out.insert(enc);
        }
    }
    Ok(out)
}

/// Compare the poset traversal against brute-force enumeration on the same
/// arrangement.
pub fn compare_enumeration(a: &Arrangement, ctx: &Context) -> Result<OracleReport> {
    let expected = brute_force_regions(a, ctx)?;
    let mut visited = BTreeSet::new();
    a.visit_regions(ctx, &TraverseOptions::default(), |geom| {
        visited.insert(geom.encoding.clone());
        ControlFlow::Continue(())
    })?;
    if visited == expected {
        return Ok(OracleReport::agreement());
    }
    let missed = expected.difference(&visited).next();
    let extra = visited.difference(&expected).next();
    Ok(OracleReport::divergence(match (missed, extra) {
        (Some(e), _) => format!("traversal missed region {}", e.to_hex()),
        (_, Some(e)) => format!("traversal emitted spurious region {}", e.to_hex()),
        _ => unreachable!("sets differ"),
    }))
}

/// A violation found by direct sampling.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub point: Array1<f64>,
    pub constraint_index: usize,
    pub margin: f64,
}

/// Randomized falsifier: hit-and-run sampling of the input polytope, direct
/// network evaluation at every sample. Sound for UNSAT (any returned point is
/// a real counterexample); never certifies SAT.
pub fn sample_falsify(
    problem: &VerificationProblem,
    trials: usize,
    seed: u64,
    ctx: &Context,
) -> Result<Option<Counterexample>> {
    if trials == 0 {
        return Err(Error::Degenerate("sample_falsify needs trials ≥ 1".into()));
    }
    let px = problem.input_polytope();
    let py = problem.output_polytope();
    let rep = py.representative_indices();
    let start = interior_point(px, ctx)?
        .ok_or_else(|| Error::Degenerate("input polytope has no interior".into()))?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dim = px.dim();
    let mut x = start.point;
    for _ in 0..trials {
        let mut dir: Array1<f64> =
            (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.dot(&dir).sqrt();
        if norm < 1e-12 {
            continue;
        }
        dir.mapv_inplace(|v| v / norm);
        // Feasible segment {t : x + t·dir ∈ P_x}.
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for f in px.constraints() {
            let along = f.w().dot(&dir);
            let value = f.eval(x.view())?;
            if along.abs() <= 1e-14 {
                continue;
            }
            let bound = -value / along;
            if along > 0.0 {
                hi = hi.min(bound);
            } else {
                lo = lo.max(bound);
            }
        }
        if !lo.is_finite() || !hi.is_finite() || hi <= lo {
            continue;
        }
        let t = rng.gen_range(lo..hi);
        x = &x + &dir.mapv(|v| v * t);
        let y = problem.network().eval(x.view())?;
        for (stored, f) in py.constraints().iter().enumerate() {
            let margin = f.eval(y.view())?;
            if margin > ctx.tol.eps_feas && px.contains(x.view(), ctx.tol.eps_feas) {
                return Ok(Some(Counterexample {
                    point: x.clone(),
                    constraint_index: rep[stored],
                    margin,
                }));
            }
        }
    }
    Ok(None)
}

/// Reference implementation of the decision procedure: identical per-region
/// checks, but regions come from brute-force sign enumeration instead of the
/// poset traversal. Guarded to small arrangements.
pub fn exhaustive_verify(problem: &VerificationProblem, ctx: &Context) -> Result<Verdict> {
    let started = Instant::now();
    let lp_before = ctx.lp_calls();
    let prepared = PreparedProblem::build(problem, ctx)?;
    let arrangement = prepared.arrangement();
    let n = arrangement.len();
    if n > BRUTE_FORCE_GUARD {
        return Err(Error::Degenerate(format!(
            "exhaustive verification guard: N = {n} exceeds {BRUTE_FORCE_GUARD}"
        )));
    }

    if polytope_is_empty(problem.output_polytope(), ctx)? {
        let ip = interior_point(problem.input_polytope(), ctx)?
            .ok_or_else(|| Error::Degenerate("input polytope has no interior".into()))?;
        let y = problem.network().eval(ip.point.view())?;
        let rep = problem.output_polytope().representative_indices();
        let (stored, margin) = problem
            .output_polytope()
            .constraints()
            .iter()
            .enumerate()
            .map(|(k, f)| (k, f.eval(y.view()).unwrap_or(f64::INFINITY)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("output polytope has constraints");
        let violation = Violation {
            region: RegionEncoding::all_zeros(0),
            constraint_index: rep[stored],
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
    let mut violations = Vec::new();
    for mask in 0u64..(1u64 << n) {
        let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let enc = RegionEncoding::from_bits(&bits);
        let closure = arrangement.region_closure(&enc, ctx)?;
        let Some(ip) = interior_point(&closure, ctx)? else {
            continue;
        };
        stats.regions_traversed += 1;
        let geom = RegionGeometry {
            encoding: enc,
            closure,
            witness: ip.point,
            margin: ip.margin,
        };
        let check = prepared.verify_region(&geom, ctx)?;
        if check.kept {
            stats.regions_verified += 1;
            stats.max_agreement_error = stats.max_agreement_error.max(check.agreement);
        }
        stats.marginal_lp_optima += check.marginal;
        violations.extend(check.violations);
    }
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

/// Full cross-check of a verification problem: the poset-traversal verdict
/// must match the brute-force verdict, and any sampling counterexample must
/// be consistent with them.
pub fn cross_check_problem(
    problem: &VerificationProblem,
    trials: usize,
    seed: u64,
    ctx: &Context,
) -> Result<OracleReport> {
    let verdict = crate::verifier::verify(problem, &crate::verifier::VerifyOptions::default(), ctx)?;
    let reference = exhaustive_verify(problem, ctx)?;
    if verdict.status != reference.status {
        return Ok(OracleReport::divergence(format!(
            "traversal verdict {:?} but exhaustive verdict {:?}",
            verdict.status, reference.status
        )));
    }
    if let Some(cex) = sample_falsify(problem, trials, seed, ctx)? {
        if verdict.status == Status::Sat {
            return Ok(OracleReport::divergence(format!(
                "sampler found a counterexample with margin {:.3e} on a SAT verdict",
                cex.margin
            )));
        }
    }
    Ok(OracleReport::agreement())
}
