//! Margin arrays over d-cells, layer sums and the balanced-point search.
//!
//! For a point `x` of the product of simplices (equivalently a cut system)
//! every d-cell `j` gets a nonnegative entry:
//!
//! * `Contains`: `s_j(x) = max(0, max_e min_i min(left_i, right_i))`, the
//!   clipped slack by which the d-cell strictly contains some edge. Outer
//!   closed ends contribute a cap of 1 instead of a difference.
//! * `ContainedIn`: `t_j(x, ε) = clamp(1 + μ_j / ε, 0, 1)` where
//!   `μ_j = max_e min_i q_i`, `q_i = min(0, max(min(c_{j-1} - a, b - c_j), -len))`.
//!
//! `s_j > 0` iff the d-cell contains an edge and `t_j = 1` iff it lies in
//! one (empty cells lie in everything). Both are 1-Lipschitz in each cut.
//!
//! This module is the only place where floating point is used. Every point
//! it returns is snapped to rationals and re-evaluated exactly.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    cuts_from_point, point_from_cuts, CutSystem, DCellIndex, DIntervalHypergraph, PredicateMode,
    ProductPoint,
};
use crate::lp::{LinearProgram, LpOutcome, Relation, Sense};
use crate::partitions::{dcell_predicate, PartitionCertificate};
use crate::rational::Rational;

/// Arithmetic shared by the exact and the floating-point evaluation.
pub trait Scalar:
    Clone
    + PartialOrd
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

fn smin<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

fn smax<T: Scalar>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// Per-copy score of cell `[lo_b, hi_b]` (index `j` of `n`) against `[a, b]`.
fn term<T: Scalar>(mode: PredicateMode, lo_b: &T, hi_b: &T, j: usize, n: usize, a: &T, b: &T) -> T {
    match mode {
        PredicateMode::Contains => {
            let left = if j == 0 { T::one() } else { a.clone() - lo_b.clone() };
            let right = if j + 1 == n { T::one() } else { hi_b.clone() - b.clone() };
            smin(left, right)
        }
        PredicateMode::ContainedIn => {
            let inner = smin(lo_b.clone() - a.clone(), b.clone() - hi_b.clone());
            let len = hi_b.clone() - lo_b.clone();
            smin(T::zero(), smax(inner, -len))
        }
    }
}

/// Converts the best score over edges into the array entry.
fn entry<T: Scalar>(mode: PredicateMode, best: Option<T>, eps: Option<&T>) -> T {
    let Some(best) = best else { return T::zero() };
    match mode {
        PredicateMode::Contains => smax(best, T::zero()),
        PredicateMode::ContainedIn => {
            let eps = eps.expect("ContainedIn needs epsilon").clone();
            smin(smax(T::one() + best / eps, T::zero()), T::one())
        }
    }
}

/// Fast evaluator: distinct intervals per copy, and edges as tuples of
/// interval classes with duplicates removed.
#[derive(Clone, Debug)]
pub struct Evaluator<T> {
    d: usize,
    classes: Vec<Vec<(T, T)>>,
    tuples: Vec<Vec<u32>>,
    /// Lowest edge id realizing each tuple, increasing.
    tuple_edge: Vec<usize>,
}

impl<T: Scalar> Evaluator<T> {
    pub fn new(h: &DIntervalHypergraph) -> Self {
        let d = h.d();
        let mut distinct: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); d];
        for e in h.edges() {
            for (i, iv) in e.parts.iter().enumerate() {
                distinct[i].push((iv.lo.clone(), iv.hi.clone()));
            }
        }
        for list in &mut distinct {
            list.sort();
            list.dedup();
        }
        let mut tuples: Vec<(Vec<u32>, usize)> = h
            .edges()
            .iter()
            .map(|e| {
                let t = e
                    .parts
                    .iter()
                    .enumerate()
                    .map(|(i, iv)| {
                        distinct[i]
                            .binary_search(&(iv.lo.clone(), iv.hi.clone()))
                            .expect("interval listed") as u32
                    })
                    .collect();
                (t, e.id)
            })
            .collect();
        tuples.sort();
        tuples.dedup_by(|a, b| a.0 == b.0);
        tuples.sort_by_key(|t| t.1);
        let classes = distinct
            .iter()
            .map(|l| l.iter().map(|(a, b)| (T::from_rational(a), T::from_rational(b))).collect())
            .collect();
        Evaluator {
            d,
            classes,
            tuple_edge: tuples.iter().map(|t| t.1).collect(),
            tuples: tuples.into_iter().map(|t| t.0).collect(),
        }
    }

    /// `terms[i][j][class]` for the cut boundaries `bounds[i] = [0, c_1, .., 1]`.
    fn terms(&self, bounds: &[Vec<T>], mode: PredicateMode) -> Vec<Vec<Vec<T>>> {
        let n = bounds[0].len() - 1;
        (0..self.d)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.classes[i]
                            .iter()
                            .map(|(a, b)| term(mode, &bounds[i][j], &bounds[i][j + 1], j, n, a, b))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Best score over edges for d-cell `j`, with the lowest edge id
    /// attaining it.
    fn best(&self, terms: &[Vec<Vec<T>>], j: &[usize], mode: PredicateMode) -> Option<(T, usize)> {
        let mut best: Option<(T, usize)> = None;
        for (t, tuple) in self.tuples.iter().enumerate() {
            let mut v = terms[0][j[0]][tuple[0] as usize].clone();
            for i in 1..self.d {
                let w = &terms[i][j[i]][tuple[i] as usize];
                if *w < v {
                    v = w.clone();
                }
            }
            let id = self.tuple_edge[t];
            let better = match &best {
                None => true,
                Some((bv, bid)) => v > *bv || (v == *bv && id < *bid),
            };
            if better {
                best = Some((v, id));
                // Tuples are in edge-id order and 0 is the largest score.
                if mode == PredicateMode::ContainedIn && best.as_ref().is_some_and(|(bv, _)| *bv >= T::zero()) {
                    break;
                }
            }
        }
        best
    }

    /// All `n^d` entries in lexicographic d-cell order.
    pub fn array(&self, bounds: &[Vec<T>], mode: PredicateMode, eps: Option<&T>) -> Vec<T> {
        let n = bounds[0].len() - 1;
        let terms = self.terms(bounds, mode);
        DCellIndex::all(self.d, n)
            .map(|j| entry(mode, self.best(&terms, &j.0, mode).map(|b| b.0), eps))
            .collect()
    }

    /// The edge attaining the best score for `j` (lowest id on ties).
    pub fn witness(&self, bounds: &[Vec<T>], j: &DCellIndex, mode: PredicateMode) -> Option<(T, usize)> {
        let terms = self.terms(bounds, mode);
        self.best(&terms, &j.0, mode)
    }
}

fn exact_bounds(c: &CutSystem) -> Vec<Vec<Rational>> {
    (0..c.d()).map(|i| c.boundaries(i)).collect()
}

fn exact_term_value(x: &ProductPoint, j: &DCellIndex, h: &DIntervalHypergraph, mode: PredicateMode) -> Option<Rational> {
    let bounds = exact_bounds(&cuts_from_point(x));
    let n = x.n();
    h.edges()
        .iter()
        .map(|e| {
            e.parts
                .iter()
                .enumerate()
                .map(|(i, iv)| {
                    term(mode, &bounds[i][j.0[i]], &bounds[i][j.0[i] + 1], j.0[i], n, &iv.lo, &iv.hi)
                })
                .min()
                .expect("d >= 1")
        })
        .max()
}

/// The clipped containment margin `s_j(x)`, exactly.
pub fn s_margin(x: &ProductPoint, j: &DCellIndex, h: &DIntervalHypergraph) -> Rational {
    entry(PredicateMode::Contains, exact_term_value(x, j, h, PredicateMode::Contains), None)
}

/// `μ_j(x)`, the capped L∞ violation of the best edge (0 iff contained);
/// `None` when `h` has no edges.
pub fn mu_value(x: &ProductPoint, j: &DCellIndex, h: &DIntervalHypergraph) -> Option<Rational> {
    exact_term_value(x, j, h, PredicateMode::ContainedIn)
}

/// `t_j(x, ε) = clamp(1 + μ_j / ε, 0, 1)`, exactly.
pub fn t_value(x: &ProductPoint, j: &DCellIndex, h: &DIntervalHypergraph, eps: &Rational) -> Rational {
    entry(PredicateMode::ContainedIn, mu_value(x, j, h), Some(eps))
}

/// An `n^d` array indexed by d-cells in lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerArray<T> {
    pub d: usize,
    pub n: usize,
    pub entries: Vec<T>,
    /// Present for `T(x, ε)` arrays.
    pub epsilon: Option<Rational>,
}

impl<T: Scalar> LayerArray<T> {
    pub fn get(&self, j: &DCellIndex) -> &T {
        &self.entries[j.flat(self.n)]
    }
}

/// `sums[i][j]`: total of the entries whose `i`-th index is `j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerSums<T> {
    pub sums: Vec<Vec<T>>,
}

impl<T: Scalar> LayerSums<T> {
    /// `max_i (max_j σ^i_j - min_j σ^i_j)`.
    pub fn spread(&self) -> T {
        self.sums
            .iter()
            .map(|row| {
                let hi = row.iter().cloned().reduce(smax).expect("n >= 1");
                let lo = row.iter().cloned().reduce(smin).expect("n >= 1");
                hi - lo
            })
            .reduce(smax)
            .expect("d >= 1")
    }

    pub fn min(&self) -> T {
        self.sums.iter().flatten().cloned().reduce(smin).expect("nonempty")
    }

    pub fn max(&self) -> T {
        self.sums.iter().flatten().cloned().reduce(smax).expect("nonempty")
    }
}

pub fn layer_sums<T: Scalar>(a: &LayerArray<T>) -> LayerSums<T> {
    let mut sums = vec![vec![T::zero(); a.n]; a.d];
    for (flat, v) in a.entries.iter().enumerate() {
        let j = DCellIndex::from_flat(flat, a.d, a.n);
        for (i, &ji) in j.0.iter().enumerate() {
            sums[i][ji] = sums[i][ji].clone() + v.clone();
        }
    }
    LayerSums { sums }
}

/// The exact `S(x)` or `T(x, ε)` array.
pub fn layer_array(
    x: &ProductPoint,
    h: &DIntervalHypergraph,
    mode: PredicateMode,
    eps: &Rational,
) -> LayerArray<Rational> {
    let ev = Evaluator::<Rational>::new(h);
    exact_array(&ev, &cuts_from_point(x), mode, eps)
}

fn exact_array(
    ev: &Evaluator<Rational>,
    cuts: &CutSystem,
    mode: PredicateMode,
    eps: &Rational,
) -> LayerArray<Rational> {
    let entries = ev.array(&exact_bounds(cuts), mode, Some(eps));
    LayerArray {
        d: cuts.d(),
        n: cuts.n(),
        entries,
        epsilon: (mode == PredicateMode::ContainedIn).then(|| eps.clone()),
    }
}

/// Parameters of the balanced-point search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceConfig {
    /// `ε` for `T(x, ε)`; ignored for `Contains`.
    pub epsilon: Rational,
    pub tol: f64,
    pub seed: u64,
    /// Objective evaluations per start.
    pub max_iters: usize,
    pub starts: usize,
    /// Snap denominators are tried up to `2^max_snap_log2`.
    pub max_snap_log2: u32,
}

impl Default for BalanceConfig {
    fn default() -> Self {
        BalanceConfig {
            epsilon: Rational::new(1, 8),
            tol: 1e-9,
            seed: 0,
            max_iters: 100_000,
            starts: 16,
            max_snap_log2: 16,
        }
    }
}

/// Result of the balanced-point search, re-evaluated exactly at a
/// rational point.
#[derive(Clone, Debug, Serialize)]
pub struct BalancedPoint {
    pub x: ProductPoint,
    pub cuts: CutSystem,
    pub mode: PredicateMode,
    pub epsilon: Option<Rational>,
    pub array: LayerArray<Rational>,
    pub layer_sums: LayerSums<Rational>,
    /// Exact spread of the layer sums at `x`.
    pub spread: Rational,
    /// Whether the exact spread is within tolerance.
    pub converged: bool,
    /// Index of the start that produced the point.
    pub start: usize,
    pub evaluations: usize,
    /// Layers attaining the largest sum, per copy (0-based cells).
    pub argmax_layers: Vec<Vec<usize>>,
}

/// Evaluations over which `Φ` must at least halve.
const STALL_WINDOW: usize = 4096;

struct Run {
    x: Vec<Vec<f64>>,
    spread: f64,
    evaluations: usize,
}

struct Problem<'a> {
    ev: &'a Evaluator<f64>,
    mode: PredicateMode,
    eps: f64,
    d: usize,
    n: usize,
}

impl Problem<'_> {
    fn bounds(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|block| {
                let mut b = Vec::with_capacity(self.n + 1);
                let mut acc = 0.0;
                b.push(0.0);
                for v in &block[..self.n - 1] {
                    acc += v;
                    b.push(acc.min(1.0));
                }
                b.push(1.0);
                b
            })
            .collect()
    }

    fn sums(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let entries = self.ev.array(&self.bounds(x), self.mode, Some(&self.eps));
        let a = LayerArray { d: self.d, n: self.n, entries, epsilon: None };
        layer_sums(&a).sums
    }

    /// `(Φ, spread)`: squared deviation of layer sums from their mean, and
    /// the largest within-direction range. A vanishing array scores worst.
    fn objective(&self, x: &[Vec<f64>]) -> (f64, f64) {
        let sums = self.sums(x);
        let total: f64 = sums[0].iter().sum();
        if total <= 0.0 {
            return (f64::INFINITY, f64::INFINITY);
        }
        let mut phi = 0.0;
        let mut spread: f64 = 0.0;
        for row in &sums {
            let mean = row.iter().sum::<f64>() / self.n as f64;
            phi += row.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>();
            let hi = row.iter().cloned().fold(f64::MIN, f64::max);
            let lo = row.iter().cloned().fold(f64::MAX, f64::min);
            spread = spread.max(hi - lo);
        }
        (phi, spread)
    }

    fn normalize(x: &mut [Vec<f64>]) {
        for block in x {
            for v in block.iter_mut() {
                if *v < 0.0 || !v.is_finite() {
                    *v = 0.0;
                }
            }
            let s: f64 = block.iter().sum();
            if s <= 0.0 {
                let u = 1.0 / block.len() as f64;
                block.iter_mut().for_each(|v| *v = u);
            } else {
                block.iter_mut().for_each(|v| *v /= s);
            }
        }
    }

    fn run(&self, start: Vec<Vec<f64>>, tol: f64, max_iters: usize, seed: u64) -> Run {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = start;
        Self::normalize(&mut x);
        let (mut phi, mut spread) = self.objective(&x);
        let mut evaluations = 1;
        let done = |spread: f64, evals: usize| spread <= tol || evals >= max_iters;

        // Phase 1: shift mass against the layer-sum imbalance.
        let sign = match self.mode {
            PredicateMode::Contains => 1.0,
            PredicateMode::ContainedIn => -1.0,
        };
        let mut kappa = 0.5;
        for _ in 0..60 {
            if done(spread, evaluations) || kappa < 1e-6 {
                break;
            }
            let sums = self.sums(&x);
            let mut candidate = x.clone();
            for (i, block) in candidate.iter_mut().enumerate() {
                let mean = sums[i].iter().sum::<f64>() / self.n as f64;
                let scale = mean.abs().max(1e-12);
                for (j, v) in block.iter_mut().enumerate() {
                    let step = (-sign * kappa * (sums[i][j] - mean) / scale).exp();
                    *v = (*v + 1e-3 / self.n as f64) * step;
                }
            }
            Self::normalize(&mut candidate);
            let (p, s) = self.objective(&candidate);
            evaluations += 1;
            if p < phi {
                x = candidate;
                phi = p;
                spread = s;
                kappa *= 1.5;
            } else {
                kappa /= 2.0;
            }
        }

        // Phase 2: pattern search with pairwise transfers inside a block,
        // then random combined moves, halving the step when nothing helps.
        let mut delta: f64 = 0.25;
        let mut checkpoint = (evaluations, phi);
        while !done(spread, evaluations) && delta > 1e-15 {
            // A run that stops making progress is abandoned to the other starts.
            if evaluations - checkpoint.0 >= STALL_WINDOW {
                if phi > checkpoint.1 / 2.0 {
                    break;
                }
                checkpoint = (evaluations, phi);
            }
            let mut improved = false;
            for i in 0..self.d {
                for j in 0..self.n {
                    for k in 0..self.n {
                        if j == k || x[i][j] <= 0.0 {
                            continue;
                        }
                        let amount = delta.min(x[i][j]);
                        let mut cand = x.clone();
                        cand[i][j] -= amount;
                        cand[i][k] += amount;
                        let (p, s) = self.objective(&cand);
                        evaluations += 1;
                        if p < phi {
                            x = cand;
                            phi = p;
                            spread = s;
                            improved = true;
                        }
                        if done(spread, evaluations) {
                            return Run { x, spread, evaluations };
                        }
                    }
                }
            }
            if !improved {
                for _ in 0..2 * self.d * self.n {
                    let mut cand = x.clone();
                    for block in cand.iter_mut() {
                        for v in block.iter_mut() {
                            *v += delta * rng.gen_range(-1.0..1.0);
                        }
                    }
                    Self::normalize(&mut cand);
                    let (p, s) = self.objective(&cand);
                    evaluations += 1;
                    if p < phi {
                        x = cand;
                        phi = p;
                        spread = s;
                        improved = true;
                        break;
                    }
                    if done(spread, evaluations) {
                        break;
                    }
                }
            }
            if !improved {
                delta /= 2.0;
            }
        }
        Run { x, spread, evaluations }
    }
}

fn uniform(d: usize, n: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0 / n as f64; n]; d]
}

fn random_point(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..d)
        .map(|_| (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect())
        .collect()
}

/// Cuts of a floating-point point, as monotone rationals in `[0, 1]`.
fn snap_cuts(x: &[Vec<f64>], n: usize, snap: impl Fn(f64) -> Rational) -> CutSystem {
    let cuts = x
        .iter()
        .map(|block| {
            let mut acc = 0.0;
            let mut prev = Rational::zero();
            block[..n - 1]
                .iter()
                .map(|v| {
                    acc += v;
                    let c = snap(acc.clamp(0.0, 1.0)).max(prev.clone()).min(Rational::one());
                    prev = c.clone();
                    c
                })
                .collect()
        })
        .collect();
    CutSystem::new(n, cuts).expect("snapped cuts are monotone")
}

fn argmax_layers(sums: &LayerSums<Rational>) -> Vec<Vec<usize>> {
    sums.sums
        .iter()
        .map(|row| {
            let hi = row.iter().max().expect("n >= 1");
            (0..row.len()).filter(|&j| row[j] == *hi).collect()
        })
        .collect()
}

/// Snaps a numeric point: tries continued-fraction approximations with
/// denominators `2^4 .. 2^max_log2`, then the exact binary value.
fn snap_point(
    x: &[Vec<f64>],
    n: usize,
    ev: &Evaluator<Rational>,
    mode: PredicateMode,
    eps: &Rational,
    tol: &Rational,
    max_log2: u32,
) -> (CutSystem, LayerArray<Rational>, LayerSums<Rational>) {
    let mut fallback = None;
    let exact = |c: f64| Rational::from_f64_exact(c).expect("finite");
    let candidates = (4..=max_log2.max(4))
        .map(|k| {
            snap_cuts(x, n, |c| Rational::approximate(&exact(c), 1u64 << k))
        })
        .chain(std::iter::once(snap_cuts(x, n, exact)));
    for cuts in candidates {
        let array = exact_array(ev, &cuts, mode, eps);
        let sums = layer_sums(&array);
        let total: Rational = sums.sums[0].iter().sum();
        if total.is_positive() && sums.spread() <= *tol {
            return (cuts, array, sums);
        }
        fallback = Some((cuts, array, sums));
    }
    fallback.expect("at least one candidate")
}

/// Searches for a point whose array has all layer sums equal in every
/// direction, starting from the uniform point, an optional warm start and
/// seeded random points. Starts run in parallel chunks of four and the
/// earliest start that converges wins, so the result does not depend on
/// scheduling.
pub fn balanced_point_search(
    h: &DIntervalHypergraph,
    n: usize,
    mode: PredicateMode,
    config: &BalanceConfig,
    warm_start: Option<&ProductPoint>,
) -> Result<BalancedPoint> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    if !config.epsilon.is_positive() {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    let d = h.d();
    let ev_f = Evaluator::<f64>::new(h);
    let ev_q = Evaluator::<Rational>::new(h);
    let problem = Problem { ev: &ev_f, mode, eps: config.epsilon.to_f64(), d, n };
    let tol_q = Rational::from_f64_exact(config.tol).unwrap_or_else(Rational::zero);

    let mut starts: Vec<(Vec<Vec<f64>>, u64)> = Vec::new();
    if let Some(w) = warm_start {
        let x = w.coords().iter().map(|b| b.iter().map(Rational::to_f64).collect()).collect();
        starts.push((x, config.seed));
    }
    starts.push((uniform(d, n), config.seed));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while starts.len() < config.starts.max(1) + usize::from(warm_start.is_some()) {
        let s = rng.gen::<u64>();
        starts.push((random_point(d, n, &mut rng), s));
    }

    let mut best: Option<(usize, Run, CutSystem, LayerArray<Rational>, LayerSums<Rational>)> = None;
    for (chunk_index, chunk) in starts.chunks(4).enumerate() {
        let runs: Vec<Run> = chunk
            .par_iter()
            .map(|(x, seed)| problem.run(x.clone(), config.tol, config.max_iters, *seed))
            .collect();
        let mut order: Vec<usize> = (0..runs.len()).collect();
        order.sort_by(|&a, &b| {
            let key = |r: &Run| r.spread <= config.tol;
            key(&runs[b])
                .cmp(&key(&runs[a]))
                .then_with(|| {
                    if key(&runs[a]) {
                        Ordering::Equal
                    } else {
                        runs[a].spread.total_cmp(&runs[b].spread)
                    }
                })
                .then(a.cmp(&b))
        });
        let mut runs: Vec<Option<Run>> = runs.into_iter().map(Some).collect();
        for k in order {
            let run = runs[k].take().expect("each run used once");
            let (cuts, array, sums) = snap_point(
                &run.x,
                n,
                &ev_q,
                mode,
                &config.epsilon,
                &tol_q,
                config.max_snap_log2,
            );
            let spread = sums.spread();
            let accepted = spread <= tol_q && sums.sums[0].iter().any(Rational::is_positive);
            let improves = match &best {
                None => true,
                Some((_, _, _, _, bs)) => spread < bs.spread(),
            };
            if accepted || improves {
                best = Some((chunk_index * 4 + k, run, cuts, array, sums));
            }
            if accepted {
                break;
            }
        }
        if let Some((_, _, _, _, sums)) = &best {
            if sums.spread() <= tol_q {
                break;
            }
        }
    }
    let (start, run, cuts, array, sums) = best.expect("at least one start");
    if sums.sums[0].iter().all(|s| !s.is_positive()) {
        return Err(Error::Precondition(
            "the array vanishes everywhere the search went; check the premise with premise_check"
                .into(),
        ));
    }
    let spread = sums.spread();
    Ok(BalancedPoint {
        x: point_from_cuts(&cuts),
        converged: spread <= tol_q,
        argmax_layers: argmax_layers(&sums),
        cuts,
        mode,
        epsilon: (mode == PredicateMode::ContainedIn).then(|| config.epsilon.clone()),
        array,
        layer_sums: sums,
        spread,
        start,
        evaluations: run.evaluations,
    })
}

/// One level of the ε loop.
#[derive(Clone, Debug, Serialize)]
pub struct LevelRecord {
    pub level: usize,
    pub epsilon: Rational,
    pub spread: Rational,
    pub converged: bool,
    pub cover: Vec<DCellIndex>,
}

/// Outcome of the ε loop: the stable cover and an exact certificate.
#[derive(Clone, Debug, Serialize)]
pub struct EpsilonOutcome {
    pub cover: Vec<DCellIndex>,
    pub point: BalancedPoint,
    pub levels: Vec<LevelRecord>,
    /// First level of the run of identical covers.
    pub stable_since: usize,
    pub certificate: PartitionCertificate,
}

/// Runs the balanced-point search at `ε_k = ε_0 2^{-k}` for `k < k_max`.
/// `round` turns a balanced point into a set of d-cells covering every
/// cell. Stops once two consecutive levels give the same set, every
/// chosen d-cell has `t > 0` at both, and the d-cells can be exactly
/// certified to lie in edges at one rational partition.
pub fn epsilon_loop<F>(
    h: &DIntervalHypergraph,
    n: usize,
    config: &BalanceConfig,
    k_max: usize,
    mut round: F,
) -> Result<EpsilonOutcome>
where
    F: FnMut(&BalancedPoint) -> Result<Vec<DCellIndex>>,
{
    let mode = PredicateMode::ContainedIn;
    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut previous: Option<BalancedPoint> = None;
    for k in 0..k_max {
        let epsilon = &config.epsilon / &Rational::from(1i64 << k);
        let level_config = BalanceConfig { epsilon: epsilon.clone(), ..config.clone() };
        let point = balanced_point_search(h, n, mode, &level_config, previous.as_ref().map(|p| &p.x))?;
        let mut cover = if point.converged { round(&point)? } else { Vec::new() };
        cover.sort();
        let positive = cover.iter().all(|j| point.array.get(j).is_positive());
        levels.push(LevelRecord {
            level: k,
            epsilon,
            spread: point.spread.clone(),
            converged: point.converged,
            cover: cover.clone(),
        });
        let stable = k > 0
            && point.converged
            && positive
            && !cover.is_empty()
            && levels[k - 1].converged
            && levels[k - 1].cover == cover;
        if stable {
            let prev = previous.as_ref().expect("previous level");
            if let Some(certificate) = certify_cover(h, &cover, &point).or_else(|| certify_cover(h, &cover, prev)) {
                return Ok(EpsilonOutcome {
                    cover,
                    point,
                    levels,
                    stable_since: k - 1,
                    certificate,
                });
            }
        }
        previous = Some(point);
    }
    Err(Error::NoStabilization { levels: k_max })
}

/// Finds a rational partition at which every d-cell of `cover` lies in an
/// edge: first the point itself, else the L1-closest partition satisfying
/// the linear constraints selected by the witness edges at the point.
pub fn certify_cover(
    h: &DIntervalHypergraph,
    cover: &[DCellIndex],
    point: &BalancedPoint,
) -> Option<PartitionCertificate> {
    let mode = PredicateMode::ContainedIn;
    let assign = |cuts: &CutSystem| -> Option<PartitionCertificate> {
        let assignment = cover
            .iter()
            .map(|j| dcell_predicate(cuts, j, h, mode).map(|e| (j.clone(), e)))
            .collect::<Option<Vec<_>>>()?;
        let cert = PartitionCertificate::new(mode, cuts.clone(), assignment);
        cert.verify(h).ok().map(|_| cert)
    };
    if let Some(cert) = assign(&point.cuts) {
        return Some(cert);
    }
    let cuts = snap_by_lp(h, cover, &point.cuts)?;
    assign(&cuts)
}

/// Variables: cuts `c^i_k` (k = 1..n-1) then one L1 slack per cut.
fn snap_by_lp(h: &DIntervalHypergraph, cover: &[DCellIndex], near: &CutSystem) -> Option<CutSystem> {
    let (d, n) = (near.d(), near.n());
    let m = n - 1;
    let vars = 2 * d * m;
    let var = |i: usize, k: usize| i * m + (k - 1);
    let slack = |i: usize, k: usize| d * m + i * m + (k - 1);
    let zero_row = || vec![Rational::zero(); vars];
    let mut objective = zero_row();
    for i in 0..d {
        for k in 1..n {
            objective[slack(i, k)] = Rational::one();
        }
    }
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    // Boundary value c^i_k as (variable or constant).
    let bound = |i: usize, k: usize| -> std::result::Result<usize, Rational> {
        if k == 0 {
            Err(Rational::zero())
        } else if k == n {
            Err(Rational::one())
        } else {
            Ok(var(i, k))
        }
    };
    // Adds `sign_a * c_a + sign_b * c_b  rel  rhs` with constant boundaries folded in.
    let mut add = |terms: &[(std::result::Result<usize, Rational>, i64)], rel: Relation, rhs: Rational| {
        let mut row = zero_row();
        let mut rhs = rhs;
        for (t, s) in terms {
            match t {
                Ok(v) => row[*v] = &row[*v] + &Rational::from(*s),
                Err(c) => rhs = &rhs - &(c * &Rational::from(*s)),
            }
        }
        if row.iter().all(Rational::is_zero) {
            let ok = match rel {
                Relation::Le => Rational::zero() <= rhs,
                Relation::Ge => Rational::zero() >= rhs,
                Relation::Eq => rhs.is_zero(),
            };
            return ok;
        }
        lp.add(row, rel, rhs);
        true
    };
    let mut feasible = true;
    for i in 0..d {
        for k in 1..n {
            let target = near.cuts()[i][k - 1].clone();
            feasible &= add(&[(Ok(var(i, k)), 1), (Ok(slack(i, k)), -1)], Relation::Le, target.clone());
            feasible &= add(&[(Ok(var(i, k)), 1), (Ok(slack(i, k)), 1)], Relation::Ge, target);
            feasible &= add(&[(bound(i, k - 1), 1), (bound(i, k), -1)], Relation::Le, Rational::zero());
        }
        if n > 1 {
            feasible &= add(&[(bound(i, n - 1), 1)], Relation::Le, Rational::one());
        }
    }
    let ev = Evaluator::<Rational>::new(h);
    let bounds = exact_bounds(near);
    for j in cover {
        let (_, e) = ev.witness(&bounds, j, PredicateMode::ContainedIn)?;
        let edge = h.edge(e);
        for (i, &ji) in j.0.iter().enumerate() {
            let (lo_b, hi_b) = (&bounds[i][ji], &bounds[i][ji + 1]);
            let iv = &edge.parts[i];
            let inner = (lo_b - &iv.lo).min(&iv.hi - hi_b);
            let len = hi_b - lo_b;
            if inner >= -len.clone() {
                feasible &= add(&[(bound(i, ji), -1)], Relation::Le, -iv.lo.clone());
                feasible &= add(&[(bound(i, ji + 1), 1)], Relation::Le, iv.hi.clone());
            } else {
                feasible &= add(&[(bound(i, ji + 1), 1), (bound(i, ji), -1)], Relation::Eq, Rational::zero());
            }
        }
    }
    if !feasible {
        return None;
    }
    match lp.solve() {
        LpOutcome::Optimal { solution, .. } => {
            let cuts = (0..d)
                .map(|i| (1..n).map(|k| solution[var(i, k)].clone()).collect())
                .collect();
            CutSystem::new(n, cuts).ok()
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    fn point(blocks: &[&[(i64, i64)]]) -> ProductPoint {
        ProductPoint::new(blocks.iter().map(|b| b.iter().map(|&(p, q)| r(p, q)).collect()).collect()).unwrap()
    }

    #[test]
    fn margin_examples() {
        let e = Interval::of((1, 8), (1, 4));
        let h = DIntervalHypergraph::from_parts(2, vec![vec![e.clone(), e]]).unwrap();
        let x = point(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]);
        assert_eq!(s_margin(&x, &DCellIndex(vec![0, 0]), &h), r(1, 4));
        assert_eq!(s_margin(&x, &DCellIndex(vec![1, 0]), &h), r(0, 1));
        // Touching the cut gives zero margin.
        let touching = point(&[&[(1, 4), (3, 4)], &[(1, 2), (1, 2)]]);
        assert_eq!(s_margin(&touching, &DCellIndex(vec![0, 0]), &h), r(0, 1));
        // Empty cell.
        let empty = point(&[&[(0, 1), (1, 1)], &[(1, 2), (1, 2)]]);
        assert_eq!(s_margin(&empty, &DCellIndex(vec![0, 0]), &h), r(0, 1));
    }

    #[test]
    fn t_examples() {
        let x = point(&[&[(1, 2), (1, 2)]]);
        let j = DCellIndex(vec![0]);
        let wide = DIntervalHypergraph::from_parts(1, vec![vec![Interval::of((0, 1), (3, 4))]]).unwrap();
        assert_eq!(mu_value(&x, &j, &wide), Some(r(0, 1)));
        assert_eq!(t_value(&x, &j, &wide, &r(1, 8)), r(1, 1));
        let short = DIntervalHypergraph::from_parts(1, vec![vec![Interval::of((0, 1), (1, 4))]]).unwrap();
        assert_eq!(mu_value(&x, &j, &short), Some(r(-1, 4)));
        assert_eq!(t_value(&x, &j, &short, &r(1, 8)), r(0, 1));
        let empty = point(&[&[(0, 1), (1, 1)]]);
        assert_eq!(mu_value(&empty, &j, &short), Some(r(0, 1)));
    }

    #[test]
    fn layer_sum_examples() {
        let ones = LayerArray { d: 2, n: 2, entries: vec![r(1, 1); 4], epsilon: None };
        assert_eq!(layer_sums(&ones).sums, vec![vec![r(2, 1); 2]; 2]);
        let mut single = ones.clone();
        single.entries = vec![r(3, 1), r(0, 1), r(0, 1), r(0, 1)];
        assert_eq!(layer_sums(&single).sums, vec![vec![r(3, 1), r(0, 1)]; 2]);
        let cube = LayerArray { d: 3, n: 2, entries: vec![r(1, 1); 8], epsilon: None };
        assert_eq!(layer_sums(&cube).sums, vec![vec![r(4, 1); 2]; 3]);
        assert_eq!(layer_sums(&single).spread(), r(3, 1));
    }

    #[test]
    fn evaluator_matches_direct_formula() {
        let h = DIntervalHypergraph::from_parts(
            2,
            vec![
                vec![Interval::of((0, 1), (1, 3)), Interval::of((1, 4), (1, 2))],
                vec![Interval::of((1, 2), (1, 1)), Interval::of((0, 1), (3, 4))],
                vec![Interval::of((1, 8), (3, 8)), Interval::of((5, 8), (7, 8))],
            ],
        )
        .unwrap();
        let x = point(&[&[(1, 3), (1, 3), (1, 3)], &[(1, 5), (1, 2), (3, 10)]]);
        let eps = r(1, 16);
        for mode in [PredicateMode::Contains, PredicateMode::ContainedIn] {
            let a = layer_array(&x, &h, mode, &eps);
            for j in DCellIndex::all(2, 3) {
                let direct = match mode {
                    PredicateMode::Contains => s_margin(&x, &j, &h),
                    PredicateMode::ContainedIn => t_value(&x, &j, &h, &eps),
                };
                assert_eq!(a.get(&j), &direct, "{mode} {j:?}");
            }
        }
    }

    #[test]
    fn single_edge_is_balanced_anywhere() {
        let h = DIntervalHypergraph::from_parts(1, vec![vec![Interval::of((0, 1), (1, 1))]]).unwrap();
        let p = balanced_point_search(&h, 2, PredicateMode::ContainedIn, &BalanceConfig::default(), None).unwrap();
        assert!(p.converged);
        assert_eq!(p.cuts.cuts()[0], vec![r(1, 2)]);
        assert_eq!(p.spread, r(0, 1));
    }
}
