//! Hyperplane arrangements with a base orientation, and polynomial-time
//! traversal of their full-dimensional regions.
//!
//! Regions are ordered by a ranked adjacency poset rooted at the base region
//! (the one containing the base point, reoriented to the all-ones encoding).
//! Successors of a region are found by one minimal H-representation
//! computation on its closure: each irredundant constraint whose bit is still
//! set yields the unique adjacent region one rank further from the base.
//! Traversal walks the poset level by level with an ordered dedup set per
//! level, so every region is visited exactly once and runs are reproducible.

mod encoding;

pub use encoding::RegionEncoding;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::geometry::{
    interior_point, minimal_h_rep_of_full_dimensional, minimal_h_representation, Context,
    LinearFunctional, Polytope,
};

/// Fixed seed for the base-point search, so arrangement construction is
/// reproducible run to run.
const BASE_POINT_SEED: u64 = 0x5EED_BA5E;
const BASE_POINT_DRAWS: usize = 1000;

/// Where an input functional ended up after orientation and dedup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceRef {
    /// Index of the oriented functional this input collapsed onto.
    pub index: usize,
    /// Whether the input was negated to make it positive at the base point.
    pub flipped: bool,
}

/// An oriented hyperplane arrangement.
///
/// All stored functionals are unit-normalized, pairwise distinct, and
/// strictly positive at the base point; the base region therefore carries the
/// all-ones encoding.
#[derive(Clone, Debug)]
pub struct Arrangement {
    dim: usize,
    functionals: Vec<LinearFunctional>,
    base_point: Array1<f64>,
    sources: Vec<SourceRef>,
}

impl Arrangement {
    /// Build from raw functionals, finding a generic base point by seeded
    /// sampling from a ball scaled to the constraint data.
    pub fn build(functionals: Vec<LinearFunctional>, ctx: &Context) -> Result<Self> {
        let dim = check_dims(&functionals)?;
        let normalized: Vec<LinearFunctional> =
            functionals.iter().map(|f| f.unit_normalized()).collect();
        let scale = normalized
            .iter()
            .map(|f| f.c().abs())
            .fold(0.0f64, f64::max);
        let radius = (10.0 * scale).clamp(1.0, 1e6);
        let mut rng = ChaCha12Rng::seed_from_u64(BASE_POINT_SEED);
        for _ in 0..BASE_POINT_DRAWS {
            let candidate = sample_ball(&mut rng, dim, radius);
            let generic = normalized.iter().all(|f| {
                f.eval(candidate.view())
                    .map(|v| v.abs() > ctx.tol.eps_int)
                    .unwrap_or(false)
            });
            if generic {
                return Self::from_normalized(dim, normalized, candidate, ctx);
            }
        }
        Err(Error::Degenerate(format!(
            "no generic base point found in {BASE_POINT_DRAWS} draws"
        )))
    }

    /// Build with a caller-chosen base point, which must be strictly off every
    /// hyperplane.
    pub fn with_base_point(
        functionals: Vec<LinearFunctional>,
        base_point: Array1<f64>,
        ctx: &Context,
    ) -> Result<Self> {
        let dim = check_dims(&functionals)?;
        if base_point.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "arrangement base point",
                expected: dim,
                actual: base_point.len(),
            });
        }
        let normalized: Vec<LinearFunctional> =
            functionals.iter().map(|f| f.unit_normalized()).collect();
        for f in &normalized {
            if f.eval(base_point.view())?.abs() <= ctx.tol.eps_int {
                return Err(Error::Degenerate(
                    "base point lies on (or too close to) a hyperplane".into(),
                ));
            }
        }
        Self::from_normalized(dim, normalized, base_point, ctx)
    }

    fn from_normalized(
        dim: usize,
        normalized: Vec<LinearFunctional>,
        base_point: Array1<f64>,
        ctx: &Context,
    ) -> Result<Self> {
        let mut oriented: Vec<LinearFunctional> = Vec::with_capacity(normalized.len());
        let mut sources = Vec::with_capacity(normalized.len());
        for f in &normalized {
            let flipped = f.eval(base_point.view())? < 0.0;
            let candidate = if flipped { f.negated() } else { f.clone() };
            match oriented
                .iter()
                .position(|g| g.same_oriented(&candidate, ctx.tol.eps_zero.max(1e-12)))
            {
                Some(k) => sources.push(SourceRef { index: k, flipped }),
                None => {
                    sources.push(SourceRef {
                        index: oriented.len(),
                        flipped,
                    });
                    oriented.push(candidate);
                }
            }
        }
        Ok(Arrangement {
            dim,
            functionals: oriented,
            base_point,
            sources,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of hyperplanes after dedup; the width of every region encoding.
    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    /// Oriented, unit-normalized functionals, all positive at the base point.
    pub fn functionals(&self) -> &[LinearFunctional] {
        &self.functionals
    }

    pub fn base_point(&self) -> &Array1<f64> {
        &self.base_point
    }

    /// Orientation/dedup record for each input functional, in input order.
    pub fn sources(&self) -> &[SourceRef] {
        &self.sources
    }

    /// Encoding of the base region: all ones by construction.
    pub fn base_encoding(&self) -> RegionEncoding {
        RegionEncoding::all_ones(self.len())
    }

    /// Sign of the ORIGINAL input functional `input_index` on region `r`
    /// (undoes the orientation flip).
    pub fn sign_of_source(&self, input_index: usize, r: &RegionEncoding) -> i8 {
        let src = self.sources[input_index];
        let oriented_positive = r.bit(src.index);
        if oriented_positive != src.flipped {
            1
        } else {
            -1
        }
    }

    /// Closure of the region encoded by `r` as an H-polytope: constraint `i`
    /// is `−ℓ_i ≤ 0` when bit `i` is set, `ℓ_i ≤ 0` otherwise.
    pub fn region_closure(&self, r: &RegionEncoding, ctx: &Context) -> Result<Polytope> {
        if r.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "region encoding width",
                expected: self.len(),
                actual: r.len(),
            });
        }
        let constraints: Vec<LinearFunctional> = self
            .functionals
            .iter()
            .enumerate()
            .map(|(i, f)| if r.bit(i) { f.negated() } else { f.clone() })
            .collect();
        let closure = Polytope::new(self.dim, constraints, &ctx.tol)?;
        if closure.constraints().len() != self.len() {
            return Err(Error::Invariant(
                "signed region constraints collapsed unexpectedly".into(),
            ));
        }
        Ok(closure)
    }

    /// Poset successors of a valid region: for every constraint of the
    /// closure's minimal H-representation whose bit is still set, the encoding
    /// with that single bit cleared. Each successor is a valid region of rank
    /// exactly `r.rank() + 1`.
    pub fn find_successors(&self, r: &RegionEncoding, ctx: &Context) -> Result<Vec<RegionEncoding>> {
        let closure = self.region_closure(r, ctx)?;
        let min_rep = minimal_h_representation(&closure, ctx)?;
        Ok(self.successors_from_min_rep(r, &min_rep))
    }

    fn successors_from_min_rep(&self, r: &RegionEncoding, min_rep: &[usize]) -> Vec<RegionEncoding> {
        min_rep
            .iter()
            .filter(|&&i| r.bit(i))
            .map(|&i| r.with_bit_cleared(i))
            .collect()
    }

    /// Walk every full-dimensional region exactly once, level by poset level.
    ///
    /// `process` runs per region and executes on the rayon pool when
    /// `opts.parallel`; besides the successor computation it is where callers
    /// put their per-region work (the traversal's dominant LP cost stays
    /// parallel that way). `visit` consumes the processed regions serially, in
    /// encoding order within each level, so output and control decisions are
    /// deterministic for a fixed arrangement regardless of thread count.
    /// Returning `ControlFlow::Break` from `visit` stops the walk after the
    /// current level.
    pub fn traverse_regions<T, P, V>(
        &self,
        ctx: &Context,
        opts: &TraverseOptions,
        process: P,
        mut visit: V,
    ) -> Result<TraversalSummary>
    where
        T: Send,
        P: Fn(&RegionGeometry) -> Result<T> + Sync,
        V: FnMut(&RegionGeometry, T) -> ControlFlow<()>,
    {
        let mut summary = TraversalSummary::default();
        let mut level: BTreeSet<RegionEncoding> = BTreeSet::new();
        level.insert(self.base_encoding());
        let mut stop = false;
        while !level.is_empty() && !stop {
            let work: Vec<RegionEncoding> = level.iter().cloned().collect();
            type Expanded<T> = Option<(RegionGeometry, Vec<RegionEncoding>, T)>;
            let expand = |r: &RegionEncoding| -> Result<Expanded<T>> {
                let Some((geom, succ)) = self.expand(r, ctx)? else {
                    return Ok(None);
                };
                let out = process(&geom)?;
                Ok(Some((geom, succ, out)))
            };
            let expanded: Vec<Result<Expanded<T>>> = if opts.parallel {
                work.par_iter().map(expand).collect()
            } else {
                work.iter().map(expand).collect()
            };
            let mut next: BTreeSet<RegionEncoding> = BTreeSet::new();
            let mut level_count = 0usize;
            for item in expanded {
                let Some((geom, succs, out)) = item? else {
                    continue;
                };
                level_count += 1;
                summary.regions += 1;
                if let ControlFlow::Break(()) = visit(&geom, out) {
                    stop = true;
                }
                next.extend(succs);
            }
            if level_count > 0 {
                summary.per_level.push(level_count);
            }
            level = next;
        }
        Ok(summary)
    }

    /// Traversal with only a serial visit callback.
    pub fn visit_regions<V>(
        &self,
        ctx: &Context,
        opts: &TraverseOptions,
        mut visit: V,
    ) -> Result<TraversalSummary>
    where
        V: FnMut(&RegionGeometry) -> ControlFlow<()>,
    {
        self.traverse_regions(ctx, opts, |_| Ok(()), |geom, ()| visit(geom))
    }

    /// Expand one candidate encoding: validate it has an interior witness and
    /// compute its successor encodings. Thin or infeasible candidates yield
    /// `None` and are dropped from the walk.
    fn expand(
        &self,
        r: &RegionEncoding,
        ctx: &Context,
    ) -> Result<Option<(RegionGeometry, Vec<RegionEncoding>)>> {
        let closure = self.region_closure(r, ctx)?;
        let Some(ip) = interior_point(&closure, ctx)? else {
            return Ok(None);
        };
        let min_rep = minimal_h_rep_of_full_dimensional(&closure, ctx)?;
        let succ = self.successors_from_min_rep(r, &min_rep);
        let geom = RegionGeometry {
            encoding: r.clone(),
            closure,
            witness: ip.point,
            margin: ip.margin,
        };
        Ok(Some((geom, succ)))
    }

    /// Convenience wrapper collecting every region's geometry.
    pub fn collect_regions(&self, ctx: &Context) -> Result<Vec<RegionGeometry>> {
        let mut out = Vec::new();
        self.visit_regions(ctx, &TraverseOptions::default(), |geom| {
            out.push(geom.clone());
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }
}

/// One materialized region: its encoding, closed H-representation, and a
/// strictly interior witness.
#[derive(Clone, Debug)]
pub struct RegionGeometry {
    pub encoding: RegionEncoding,
    pub closure: Polytope,
    pub witness: Array1<f64>,
    /// Worst-case slack of the witness, ≥ `eps_int`.
    pub margin: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct TraverseOptions {
    /// Expand regions of a level on the rayon pool.
    pub parallel: bool,
}

impl Default for TraverseOptions {
    fn default() -> Self {
        TraverseOptions { parallel: true }
    }
}

#[derive(Clone, Debug, Default)]
pub struct TraversalSummary {
    pub regions: usize,
    /// Regions visited per poset rank, starting at the base level.
    pub per_level: Vec<usize>,
}

/// Upper bound on the number of regions of `n_hyperplanes` hyperplanes in
/// dimension `dim`: `Σ_{k=0..dim} C(N, k)`.
pub fn region_count_bound(n_hyperplanes: usize, dim: usize) -> u128 {
    let n = n_hyperplanes as u128;
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for k in 0..=dim.min(n_hyperplanes) {
        if k > 0 {
            binom = binom * (n - k as u128 + 1) / k as u128;
        }
        total += binom;
    }
    total
}

fn check_dims(functionals: &[LinearFunctional]) -> Result<usize> {
    let first = functionals
        .first()
        .ok_or_else(|| Error::Degenerate("arrangement needs at least one functional".into()))?;
    let dim = first.dim();
    for f in functionals {
        if f.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: "arrangement functionals",
                expected: dim,
                actual: f.dim(),
            });
        }
    }
    Ok(dim)
}

fn sample_ball(rng: &mut ChaCha12Rng, dim: usize, radius: f64) -> Array1<f64> {
    loop {
        let dir: Array1<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.dot(&dir).sqrt();
        if norm < 1e-12 {
            continue;
        }
        let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
        return dir.mapv(|x| x * r / norm);
    }
}
