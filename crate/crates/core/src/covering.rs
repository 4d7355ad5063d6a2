//! Rounding of balanced points into certificates: the auxiliary d-partite
//! hypergraph on cells, integral covers and matchings inside it, and the
//! end-to-end matching and cover pipelines.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DCellIndex, DIntervalHypergraph, PredicateMode, ProductPoint};
use crate::invariants::{
    atomize, exact_invariant, is_perfect_fractional_matching, lp_fractional,
    perfect_fractional_matching, FiniteHypergraph, Fractional, Invariant, SearchLimits,
};
use crate::kkm::{
    balanced_point_search, epsilon_loop, layer_array, layer_sums, BalanceConfig, BalancedPoint,
    LayerArray, LevelRecord,
};
use crate::partitions::{
    dcell_predicate, exhaustive_partition_search, premise_check, PartitionCertificate,
};
use crate::rational::Rational;

/// The auxiliary hypergraph: vertex `i * n + j` is cell `j` of copy `i`,
/// and d-cell `j` with a positive array entry is the edge
/// `{v^1_{j_1}, .., v^d_{j_d}}` weighted by `entry / a`.
#[derive(Clone, Debug, Serialize)]
pub struct Gamma {
    #[serde(skip)]
    pub hypergraph: FiniteHypergraph,
    pub d: usize,
    pub n: usize,
    /// The d-cell of each edge, in edge order.
    pub dcells: Vec<DCellIndex>,
    pub weights: Vec<Rational>,
    /// The common layer sum used for normalization.
    pub a: Rational,
}

/// Builds the auxiliary hypergraph from an exact array. Layer sums must
/// agree within `tol`; if they differ slightly the normalizer is chosen so
/// the weights stay a fractional matching (`Contains`, largest sum) or a
/// fractional edge-cover (`ContainedIn`, smallest sum).
pub fn gamma_from_array(array: &LayerArray<Rational>, mode: PredicateMode, tol: &Rational) -> Result<Gamma> {
    let sums = layer_sums(array);
    let spread = sums.spread();
    if spread > *tol {
        return Err(Error::Unbalanced { spread: spread.to_f64(), tol: tol.to_f64() });
    }
    let a = match mode {
        PredicateMode::Contains => sums.max(),
        PredicateMode::ContainedIn => sums.min(),
    };
    if !a.is_positive() {
        return Err(Error::Precondition("layer sums vanish; the premise fails".into()));
    }
    let (d, n) = (array.d, array.n);
    let mut dcells = Vec::new();
    let mut weights = Vec::new();
    let mut edges = Vec::new();
    for (flat, v) in array.entries.iter().enumerate() {
        if v.is_positive() {
            let j = DCellIndex::from_flat(flat, d, n);
            edges.push(j.0.iter().enumerate().map(|(i, &ji)| i * n + ji).collect());
            weights.push(v / &a);
            dcells.push(j);
        }
    }
    let hypergraph = FiniteHypergraph::new(d * n, edges)?
        .with_parts((0..d * n).map(|v| v / n).collect())?
        .with_weights(weights.clone())?;
    Ok(Gamma { hypergraph, d, n, dcells, weights, a })
}

/// Evaluates the array at `x` and builds the auxiliary hypergraph.
pub fn build_gamma(
    x: &ProductPoint,
    h: &DIntervalHypergraph,
    mode: PredicateMode,
    eps: &Rational,
    tol: &Rational,
) -> Result<Gamma> {
    gamma_from_array(&layer_array(x, h, mode, eps), mode, tol)
}

fn require_covered(f: &FiniteHypergraph) -> Result<()> {
    if let Some(v) = f.uncovered_vertices().first() {
        return Err(Error::Precondition(format!("vertex {v} lies in no edge; the edge-cover number is infinite")));
    }
    Ok(())
}

/// Repeatedly takes the edge covering the most uncovered vertices (lowest
/// id on ties). At most `(1 + ln r) ρ*` edges.
pub fn greedy_edge_cover(f: &FiniteHypergraph) -> Result<Vec<usize>> {
    require_covered(f)?;
    let mut covered = vec![false; f.vertex_count()];
    let mut left = f.vertex_count();
    let mut chosen = Vec::new();
    while left > 0 {
        let (best, gain) = f
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| (k, e.iter().filter(|&&v| !covered[v]).count()))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("covered vertices imply edges");
        for &v in &f.edges()[best] {
            covered[v] = true;
        }
        left -= gain;
        chosen.push(best);
    }
    Ok(chosen)
}

/// Maximum matching of a bipartite graph by augmenting paths. Edges are
/// pairs `(left, right)` of vertex ids; returns edge ids.
fn bipartite_matching(f: &FiniteHypergraph, left_part: usize) -> Vec<usize> {
    let parts = f.part_of().expect("checked by caller");
    let orient = |e: &[usize]| if parts[e[0]] == left_part { (e[0], e[1]) } else { (e[1], e[0]) };
    let nv = f.vertex_count();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for (k, e) in f.edges().iter().enumerate() {
        let (u, w) = orient(e);
        adjacency[u].push((w, k));
    }
    // match_of[w] = (u, edge) for matched right vertices.
    let mut match_of: Vec<Option<(usize, usize)>> = vec![None; nv];
    fn augment(
        u: usize,
        adjacency: &[Vec<(usize, usize)>],
        seen: &mut [bool],
        match_of: &mut [Option<(usize, usize)>],
    ) -> bool {
        for &(w, k) in &adjacency[u] {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            let free = match match_of[w] {
                None => true,
                Some((u2, _)) => augment(u2, adjacency, seen, match_of),
            };
            if free {
                match_of[w] = Some((u, k));
                return true;
            }
        }
        false
    }
    for u in (0..nv).filter(|&u| parts[u] == left_part) {
        let mut seen = vec![false; nv];
        augment(u, &adjacency, &mut seen, &mut match_of);
    }
    let mut m: Vec<usize> = match_of.iter().flatten().map(|&(_, k)| k).collect();
    m.sort_unstable();
    m
}

/// Minimum edge cover of a bipartite graph: a maximum matching plus, for
/// each unmatched vertex, its lowest-id edge. Size `|V| - ν`.
pub fn bipartite_min_edge_cover(g: &FiniteHypergraph) -> Result<Vec<usize>> {
    if g.part_count() != 2 || g.edges().iter().any(|e| e.len() != 2) {
        return Err(Error::Precondition("expected a bipartite graph with two parts".into()));
    }
    require_covered(g)?;
    let matching = bipartite_matching(g, 0);
    let mut covered = vec![false; g.vertex_count()];
    for &k in &matching {
        g.edges()[k].iter().for_each(|&v| covered[v] = true);
    }
    let stars = g.stars();
    let mut cover = matching;
    for v in 0..g.vertex_count() {
        if !covered[v] {
            let k = stars[v][0];
            g.edges()[k].iter().for_each(|&u| covered[u] = true);
            cover.push(k);
        }
    }
    cover.sort_unstable();
    Ok(cover)
}

/// Exact maximum matching of a d-partite hypergraph, checked against
/// `ν ≥ ν* / (d - 1)`.
pub fn max_matching_dpartite(f: &FiniteHypergraph, limits: &SearchLimits) -> Result<Vec<usize>> {
    let d = f.part_count();
    if f.part_of().is_none() {
        return Err(Error::Precondition("expected a d-partite hypergraph".into()));
    }
    let matching = exact_invariant(f, Invariant::Nu, limits)?.witness;
    if d >= 2 {
        let nu_star = lp_fractional(f, Fractional::NuStar).value.expect("finite");
        let bound = (nu_star / Rational::from(d - 1)).ceil();
        if num_traits::ToPrimitive::to_usize(&bound).is_none_or(|b| matching.len() < b) {
            return Err(Error::BoundViolation(format!(
                "matching of size {} in a {d}-partite hypergraph below ceil(nu*/(d-1)) = {bound}",
                matching.len()
            )));
        }
    }
    Ok(matching)
}

/// Edge cover of a 3-partite hypergraph with parts of size `n` from a
/// perfect fractional matching `weights`, using only its support: a
/// maximum matching, then edges covering two uncovered vertices, then one
/// edge per remaining vertex. Fewer than `7n/4` edges.
pub fn prop12_cover(f: &FiniteHypergraph, weights: &[Rational], limits: &SearchLimits) -> Result<Vec<usize>> {
    if f.part_count() != 3 || !f.vertex_count().is_multiple_of(3) {
        return Err(Error::Precondition("expected a 3-partite hypergraph with equal parts".into()));
    }
    if !is_perfect_fractional_matching(f, weights) {
        return Err(Error::Precondition("weights are not a perfect fractional matching".into()));
    }
    let n = f.vertex_count() / 3;
    let support: Vec<usize> = (0..f.edge_count()).filter(|&k| weights[k].is_positive()).collect();
    let sub = f.restrict_edges(&support);
    let matching = exact_invariant(&sub, Invariant::Nu, limits)?.witness;
    let mut covered = vec![false; f.vertex_count()];
    let mut cover: Vec<usize> = Vec::new();
    let mut take = |k: usize, covered: &mut Vec<bool>| {
        sub.edges()[k].iter().for_each(|&v| covered[v] = true);
        cover.push(support[k]);
    };
    for &k in &matching {
        take(k, &mut covered);
    }
    loop {
        let best = (0..sub.edge_count())
            .map(|k| (k, sub.edges()[k].iter().filter(|&&v| !covered[v]).count()))
            .filter(|&(_, g)| g >= 2)
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        let Some((k, _)) = best else { break };
        take(k, &mut covered);
    }
    let stars = sub.stars();
    for v in 0..f.vertex_count() {
        if !covered[v] {
            take(stars[v][0], &mut covered);
        }
    }
    if 4 * cover.len() >= 7 * n {
        return Err(Error::BoundViolation(format!("cover of size {} is not below 7n/4 for n = {n}", cover.len())));
    }
    cover.sort_unstable();
    Ok(cover)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Pairwise disjoint d-cells, each containing its edge.
    Matching,
    /// D-cells covering every cell, each inside its edge.
    Cover,
}

/// How a pipeline reached its certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Balanced point, auxiliary hypergraph and rounding.
    Numeric,
    /// The exact search over cut configurations.
    Exhaustive,
}

/// Which rounding produced a cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    BipartiteMinCover,
    ThreeStep,
    Greedy,
    MaxMatching,
    ExhaustiveSearch,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Numeric => "numeric",
            Route::Exhaustive => "exhaustive",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverCertificate {
    pub kind: CertificateKind,
    /// Partition, chosen d-cells with witness edges, and `H0`.
    pub partition: PartitionCertificate,
    /// Matching: lower bound on the number of d-cells. Cover: upper bound
    /// on `|H0|`.
    pub bound_claimed: Rational,
    pub route: Route,
    pub rounding: Rounding,
    /// Why the exact fallback ran, if it did.
    pub fallback_reason: Option<String>,
    /// Per-level record of the ε loop (cover pipeline only).
    pub levels: Vec<LevelRecord>,
}

impl CoverCertificate {
    pub fn h0(&self) -> &[usize] {
        &self.partition.used_edges
    }

    pub fn chosen(&self) -> &[(DCellIndex, usize)] {
        &self.partition.assignment
    }

    /// Re-checks every predicate exactly, the bound, and for covers that
    /// the edges of `H0` cover every point of every copy.
    pub fn verify(&self, h: &DIntervalHypergraph) -> Result<()> {
        let expected_mode = match self.kind {
            CertificateKind::Matching => PredicateMode::Contains,
            CertificateKind::Cover => PredicateMode::ContainedIn,
        };
        if self.partition.mode != expected_mode {
            return Err(Error::NoWitness("certificate mode does not match its kind".into()));
        }
        self.partition.verify(h)?;
        match self.kind {
            CertificateKind::Matching => {
                if Rational::from(self.chosen().len()) < self.bound_claimed {
                    return Err(Error::BoundViolation(format!(
                        "{} disjoint d-cells, claimed at least {}",
                        self.chosen().len(),
                        self.bound_claimed
                    )));
                }
            }
            CertificateKind::Cover => {
                if Rational::from(self.h0().len()) > self.bound_claimed {
                    return Err(Error::BoundViolation(format!(
                        "|H0| = {}, claimed at most {}",
                        self.h0().len(),
                        self.bound_claimed
                    )));
                }
                let atoms = atomize(h);
                if let Some(atom) = atoms.atoms.iter().find(|a| !a.edges.iter().any(|e| self.h0().binary_search(e).is_ok())) {
                    let (copy, at) = atom.representative();
                    return Err(Error::NoWitness(format!("H0 misses point {at} of copy {}", copy + 1)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineOptions {
    pub balance: BalanceConfig,
    pub k_max: usize,
    #[serde(skip)]
    pub limits: SearchLimits,
    /// Run the exact search when the numeric route fails.
    pub allow_fallback: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            balance: BalanceConfig::default(),
            k_max: 12,
            limits: SearchLimits::default(),
            allow_fallback: true,
        }
    }
}

fn balance_tol(config: &BalanceConfig) -> Rational {
    Rational::from_f64_exact(config.tol).unwrap_or_else(Rational::zero)
}

/// `⌈n / (d - 1)⌉` for `d ≥ 2`, and `n` for `d = 1`.
pub fn matching_bound(d: usize, n: usize) -> usize {
    if d <= 1 {
        n
    } else {
        n.div_ceil(d - 1)
    }
}

/// `n` for `d ≤ 2`, else `⌊(1 + ln d) n⌋`.
pub fn cover_bound(d: usize, n: usize) -> usize {
    if d <= 2 {
        n
    } else {
        ((1.0 + (d as f64).ln()) * n as f64).floor() as usize
    }
}

fn premise(h: &DIntervalHypergraph, n: usize, mode: PredicateMode, limits: &SearchLimits) -> Result<()> {
    let outcome = premise_check(h, n, mode, limits)?;
    match outcome.counterexample {
        Some(counterexample) => Err(Error::PremiseFails { counterexample }),
        None => Ok(()),
    }
}

/// Under the premise that every `n`-partition has a d-cell containing an
/// edge, finds a partition with at least `⌈n/(d-1)⌉` pairwise disjoint
/// d-cells containing edges.
pub fn theorem4_pipeline(h: &DIntervalHypergraph, n: usize, options: &PipelineOptions) -> Result<CoverCertificate> {
    let mode = PredicateMode::Contains;
    premise(h, n, mode, &options.limits)?;
    let bound = matching_bound(h.d(), n);
    let numeric = (|| -> Result<CoverCertificate> {
        let point = balanced_point_search(h, n, mode, &options.balance, None)?;
        if !point.converged {
            return Err(Error::Unbalanced { spread: point.spread.to_f64(), tol: options.balance.tol });
        }
        let gamma = gamma_from_array(&point.array, mode, &balance_tol(&options.balance))?;
        let matching = max_matching_dpartite(&gamma.hypergraph, &options.limits)?;
        let assignment = matching
            .iter()
            .map(|&k| {
                let j = gamma.dcells[k].clone();
                dcell_predicate(&point.cuts, &j, h, mode)
                    .map(|e| (j.clone(), e))
                    .ok_or_else(|| Error::NoWitness(format!("d-cell {:?} contains no edge", j.0)))
            })
            .collect::<Result<Vec<_>>>()?;
        let cert = CoverCertificate {
            kind: CertificateKind::Matching,
            partition: PartitionCertificate::new(mode, point.cuts.clone(), assignment),
            bound_claimed: Rational::from(bound),
            route: Route::Numeric,
            rounding: Rounding::MaxMatching,
            fallback_reason: None,
            levels: Vec::new(),
        };
        cert.verify(h)?;
        Ok(cert)
    })();
    match numeric {
        Ok(cert) => Ok(cert),
        Err(e) if options.allow_fallback => {
            let partition = exhaustive_partition_search(h, n, mode, false, &options.limits)?
                .ok_or_else(|| Error::NoWitness("no d-cell of any partition contains an edge".into()))?;
            let cert = CoverCertificate {
                kind: CertificateKind::Matching,
                partition,
                bound_claimed: Rational::from(bound),
                route: Route::Exhaustive,
                rounding: Rounding::ExhaustiveSearch,
                fallback_reason: Some(e.to_string()),
                levels: Vec::new(),
            };
            cert.verify(h)?;
            Ok(cert)
        }
        Err(e) => Err(e),
    }
}

/// Rounds the auxiliary hypergraph of a balanced `T` array to d-cells
/// covering every cell, returning the rounding used and its bound on the
/// number of d-cells.
pub fn round_cover(gamma: &Gamma, limits: &SearchLimits) -> Result<(Vec<DCellIndex>, Rounding, Rational)> {
    let (d, n) = (gamma.d, gamma.n);
    let f = &gamma.hypergraph;
    let (edges, rounding, bound) = if d == 2 {
        (bipartite_min_edge_cover(f)?, Rounding::BipartiteMinCover, Rational::from(n))
    } else if d == 3 {
        let perfect = if is_perfect_fractional_matching(f, &gamma.weights) {
            Some(gamma.weights.clone())
        } else {
            perfect_fractional_matching(f)
        };
        match perfect {
            Some(w) => (prop12_cover(f, &w, limits)?, Rounding::ThreeStep, Rational::new(7 * n as i64, 4)),
            None => (greedy_edge_cover(f)?, Rounding::Greedy, Rational::from(cover_bound(d, n))),
        }
    } else {
        (greedy_edge_cover(f)?, Rounding::Greedy, Rational::from(cover_bound(d, n)))
    };
    Ok((edges.into_iter().map(|k| gamma.dcells[k].clone()).collect(), rounding, bound))
}

/// Under the premise that every `n`-partition has a d-cell inside an edge,
/// finds a partition whose cells lie in d-cells inside few edges: at most
/// `n` for `d = 2`, fewer than `7n/4` for `d = 3` when the auxiliary
/// hypergraph carries a perfect fractional matching, else `⌊(1 + ln d) n⌋`.
pub fn theorem5_pipeline(h: &DIntervalHypergraph, n: usize, options: &PipelineOptions) -> Result<CoverCertificate> {
    let mode = PredicateMode::ContainedIn;
    premise(h, n, mode, &options.limits)?;
    let tol = balance_tol(&options.balance);
    let mut last_rounding = (Rounding::Greedy, Rational::from(cover_bound(h.d(), n)));
    let numeric = (|| -> Result<CoverCertificate> {
        let outcome = epsilon_loop(h, n, &options.balance, options.k_max, |p: &BalancedPoint| {
            let gamma = gamma_from_array(&p.array, mode, &tol)?;
            let (cells, rounding, bound) = round_cover(&gamma, &options.limits)?;
            last_rounding = (rounding, bound);
            Ok(cells)
        })?;
        let (rounding, bound) = last_rounding.clone();
        let cert = CoverCertificate {
            kind: CertificateKind::Cover,
            partition: outcome.certificate,
            bound_claimed: bound,
            route: Route::Numeric,
            rounding,
            fallback_reason: None,
            levels: outcome.levels,
        };
        cert.verify(h)?;
        Ok(cert)
    })();
    match numeric {
        Ok(cert) => Ok(cert),
        Err(e) if options.allow_fallback => {
            let partition = exhaustive_partition_search(h, n, mode, true, &options.limits)?
                .ok_or_else(|| Error::NoWitness("no partition has all cells inside edges".into()))?;
            let cert = CoverCertificate {
                kind: CertificateKind::Cover,
                partition,
                bound_claimed: Rational::from(cover_bound(h.d(), n)),
                route: Route::Exhaustive,
                rounding: Rounding::ExhaustiveSearch,
                fallback_reason: Some(e.to_string()),
                levels: Vec::new(),
            };
            cert.verify(h)?;
            Ok(cert)
        }
        Err(e) => Err(e),
    }
}
