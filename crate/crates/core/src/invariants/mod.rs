//! Finite hypergraphs and their matching/covering invariants, integer and
//! fractional.

mod atomize;
mod search;

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation, Sense};
use crate::rational::Rational;

pub use atomize::{atomize, Atom, Atomization, Piece};
pub use search::{greedy_cover, max_independent_set, min_set_cover, SearchLimits};

/// A finite hypergraph, optionally d-partite and optionally edge-weighted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteHypergraph {
    vertex_count: usize,
    edges: Vec<Vec<usize>>,
    part_of: Option<Vec<usize>>,
    part_count: usize,
    weights: Option<Vec<Rational>>,
}

impl FiniteHypergraph {
    /// Edges are vertex lists; they are sorted and deduplicated.
    pub fn new(vertex_count: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(edges.len());
        for (k, mut e) in edges.into_iter().enumerate() {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                return Err(Error::invalid(format!("edges[{k}]"), "empty edge"));
            }
            if let Some(&v) = e.last().filter(|&&v| v >= vertex_count) {
                return Err(Error::invalid(
                    format!("edges[{k}]"),
                    format!("vertex {v} >= vertex_count {vertex_count}"),
                ));
            }
            clean.push(e);
        }
        Ok(FiniteHypergraph {
            vertex_count,
            edges: clean,
            part_of: None,
            part_count: 0,
            weights: None,
        })
    }

    /// Declares the vertex classes `V^1..V^d`; every edge must meet each
    /// class in exactly one vertex.
    pub fn with_parts(mut self, part_of: Vec<usize>) -> Result<Self> {
        if part_of.len() != self.vertex_count {
            return Err(Error::invalid("parts", "one part number per vertex required"));
        }
        let part_count = part_of.iter().max().map_or(0, |&p| p + 1);
        for (k, e) in self.edges.iter().enumerate() {
            let mut hits = vec![0usize; part_count];
            for &v in e {
                hits[part_of[v]] += 1;
            }
            if hits.iter().any(|&h| h != 1) {
                return Err(Error::invalid(
                    format!("edges[{k}]"),
                    "edge must meet every part exactly once",
                ));
            }
        }
        self.part_of = Some(part_of);
        self.part_count = part_count;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::invalid("weights", "one weight per edge required"));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn part_of(&self) -> Option<&[usize]> {
        self.part_of.as_deref()
    }

    pub fn part_count(&self) -> usize {
        self.part_count
    }

    pub fn weights(&self) -> Option<&[Rational]> {
        self.weights.as_deref()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.binary_search(&v).is_ok()).count()
    }

    /// Maximum degree `Δ(H)`.
    pub fn max_degree(&self) -> usize {
        self.stars().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Rank `r(H)`, the largest edge size.
    pub fn rank(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// For each vertex, the edges containing it.
    pub fn stars(&self) -> Vec<Vec<usize>> {
        let mut stars = vec![Vec::new(); self.vertex_count];
        for (k, e) in self.edges.iter().enumerate() {
            for &v in e {
                stars[v].push(k);
            }
        }
        stars
    }

    pub fn uncovered_vertices(&self) -> Vec<usize> {
        let stars = self.stars();
        (0..self.vertex_count).filter(|&v| stars[v].is_empty()).collect()
    }

    /// Sub-hypergraph on the same vertices keeping the listed edges (in
    /// the given order), together with their weights and the parts.
    pub fn restrict_edges(&self, keep: &[usize]) -> FiniteHypergraph {
        FiniteHypergraph {
            vertex_count: self.vertex_count,
            edges: keep.iter().map(|&k| self.edges[k].clone()).collect(),
            part_of: self.part_of.clone(),
            part_count: self.part_count,
            weights: self
                .weights
                .as_ref()
                .map(|w| keep.iter().map(|&k| w[k].clone()).collect()),
        }
    }

    /// Whether `edges` cover every vertex.
    pub fn is_edge_cover(&self, edges: &[usize]) -> bool {
        let mut seen = vec![false; self.vertex_count];
        for &k in edges {
            for &v in &self.edges[k] {
                seen[v] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Whether `edges` are pairwise disjoint.
    pub fn is_matching(&self, edges: &[usize]) -> bool {
        let mut seen = vec![false; self.vertex_count];
        for &k in edges {
            for &v in &self.edges[k] {
                if std::mem::replace(&mut seen[v], true) {
                    return false;
                }
            }
        }
        true
    }

    fn edge_sets(&self) -> Vec<FixedBitSet> {
        self.edges
            .iter()
            .map(|e| {
                let mut b = FixedBitSet::with_capacity(self.vertex_count);
                e.iter().for_each(|&v| b.insert(v));
                b
            })
            .collect()
    }

    fn star_sets(&self) -> Vec<FixedBitSet> {
        self.stars()
            .into_iter()
            .map(|s| {
                let mut b = FixedBitSet::with_capacity(self.edges.len());
                s.into_iter().for_each(|k| b.insert(k));
                b
            })
            .collect()
    }

    fn check_scale(&self, limits: &SearchLimits) -> Result<()> {
        if self.vertex_count > limits.max_vertices || self.edges.len() > limits.max_edges {
            return Err(Error::ScaleGuard(format!(
                "{} vertices / {} edges exceeds the limits {} / {}",
                self.vertex_count,
                self.edges.len(),
                limits.max_vertices,
                limits.max_edges
            )));
        }
        Ok(())
    }
}

/// The four integer invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Invariant {
    Nu,
    Tau,
    Iota,
    Rho,
}

impl Invariant {
    pub const ALL: [Invariant; 4] = [Invariant::Nu, Invariant::Tau, Invariant::Iota, Invariant::Rho];
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::Nu => "nu",
            Invariant::Tau => "tau",
            Invariant::Iota => "iota",
            Invariant::Rho => "rho",
        })
    }
}

/// The four fractional invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fractional {
    NuStar,
    TauStar,
    IotaStar,
    RhoStar,
}

impl Fractional {
    pub const ALL: [Fractional; 4] = [
        Fractional::NuStar,
        Fractional::TauStar,
        Fractional::IotaStar,
        Fractional::RhoStar,
    ];
}

/// An integer invariant value; `ρ` and `ι` are infinite when some vertex
/// lies in no edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntegerValue {
    Finite(usize),
    Infinite,
}

impl IntegerValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            IntegerValue::Finite(v) => Some(v),
            IntegerValue::Infinite => None,
        }
    }
}

impl fmt::Display for IntegerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegerValue::Finite(v) => write!(f, "{v}"),
            IntegerValue::Infinite => f.write_str("infinite"),
        }
    }
}

impl Serialize for IntegerValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IntegerValue::Finite(v) => s.serialize_u64(*v as u64),
            IntegerValue::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// An exact integer invariant with an optimal witness: edges for `ν`/`ρ`,
/// vertices for `τ`/`ι`. Infinite values carry no witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactResult {
    pub which: Invariant,
    pub value: IntegerValue,
    pub witness: Vec<usize>,
}

/// Computes `which` exactly by branch and bound.
pub fn exact_invariant(
    f: &FiniteHypergraph,
    which: Invariant,
    limits: &SearchLimits,
) -> Result<ExactResult> {
    f.check_scale(limits)?;
    let uncovered = !f.uncovered_vertices().is_empty();
    let witness = match which {
        Invariant::Nu => {
            let sets = f.edge_sets();
            let conflicts: Vec<FixedBitSet> = sets
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let mut row = FixedBitSet::with_capacity(sets.len());
                    for (l, b) in sets.iter().enumerate() {
                        if k != l && !a.is_disjoint(b) {
                            row.insert(l);
                        }
                    }
                    row
                })
                .collect();
            max_independent_set(&conflicts, None, limits)?
        }
        Invariant::Tau => {
            let found = min_set_cover(f.edge_count(), &f.star_sets(), 0, limits)?;
            found.expect("every edge is non-empty")
        }
        Invariant::Iota => {
            if uncovered {
                return Ok(ExactResult { which, value: IntegerValue::Infinite, witness: vec![] });
            }
            let mut adjacency = vec![FixedBitSet::with_capacity(f.vertex_count); f.vertex_count];
            for e in &f.edges {
                for &u in e {
                    for &v in e {
                        if u != v {
                            adjacency[u].insert(v);
                        }
                    }
                }
            }
            max_independent_set(&adjacency, None, limits)?
        }
        Invariant::Rho => match min_set_cover(f.vertex_count, &f.edge_sets(), 0, limits)? {
            Some(cover) => cover,
            None => return Ok(ExactResult { which, value: IntegerValue::Infinite, witness: vec![] }),
        },
    };
    Ok(ExactResult {
        which,
        value: IntegerValue::Finite(witness.len()),
        witness,
    })
}

/// An exact fractional invariant. `value` is `None` when the invariant is
/// infinite; `primal` then is empty. Otherwise `primal` holds one weight per
/// edge (`ν*`, `ρ*`) or per vertex (`τ*`, `ι*`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LpResult {
    pub kind: Fractional,
    pub value: Option<Rational>,
    pub primal: Vec<Rational>,
}

impl LpResult {
    pub fn is_infinite(&self) -> bool {
        self.value.is_none()
    }
}

fn ones(len: usize) -> Vec<Rational> {
    vec![Rational::one(); len]
}

/// Builds the LP for `kind`. Rows are vertices for edge-weight programs and
/// edges for vertex-weight programs.
fn fractional_program(f: &FiniteHypergraph, kind: Fractional) -> LinearProgram {
    let (m, nv) = (f.edge_count(), f.vertex_count);
    let stars = f.stars();
    let edge_rows = |relation: Relation, sense: Sense| {
        let mut lp = LinearProgram::new(sense, ones(nv));
        for e in &f.edges {
            let mut row = vec![Rational::zero(); nv];
            e.iter().for_each(|&v| row[v] = Rational::one());
            lp.add(row, relation, Rational::one());
        }
        lp
    };
    let vertex_rows = |relation: Relation, sense: Sense| {
        let mut lp = LinearProgram::new(sense, ones(m));
        for star in &stars {
            let mut row = vec![Rational::zero(); m];
            star.iter().for_each(|&k| row[k] = Rational::one());
            lp.add(row, relation, Rational::one());
        }
        lp
    };
    match kind {
        Fractional::NuStar => vertex_rows(Relation::Le, Sense::Maximize),
        Fractional::RhoStar => vertex_rows(Relation::Ge, Sense::Minimize),
        Fractional::TauStar => edge_rows(Relation::Ge, Sense::Minimize),
        Fractional::IotaStar => edge_rows(Relation::Le, Sense::Maximize),
    }
}

/// Solves the fractional relaxation `kind` exactly.
pub fn lp_fractional(f: &FiniteHypergraph, kind: Fractional) -> LpResult {
    let uncovered = !f.uncovered_vertices().is_empty();
    if uncovered && matches!(kind, Fractional::RhoStar | Fractional::IotaStar) {
        return LpResult { kind, value: None, primal: vec![] };
    }
    match fractional_program(f, kind).solve() {
        LpOutcome::Optimal { value, solution } => LpResult {
            kind,
            value: Some(value),
            primal: solution,
        },
        other => unreachable!("fractional program for {kind:?} is bounded and feasible: {other:?}"),
    }
}

/// Edge weights with every vertex sum exactly 1, if any exist.
pub fn perfect_fractional_matching(f: &FiniteHypergraph) -> Option<Vec<Rational>> {
    if f.vertex_count == 0 {
        return Some(vec![Rational::zero(); f.edge_count()]);
    }
    let mut lp = LinearProgram::new(Sense::Minimize, vec![Rational::zero(); f.edge_count()]);
    for star in f.stars() {
        if star.is_empty() {
            return None;
        }
        let mut row = vec![Rational::zero(); f.edge_count()];
        star.iter().for_each(|&k| row[k] = Rational::one());
        lp.add(row, Relation::Eq, Rational::one());
    }
    match lp.solve() {
        LpOutcome::Optimal { solution, .. } => Some(solution),
        _ => None,
    }
}

/// Checks that `weights` give every vertex incident weight exactly 1.
pub fn is_perfect_fractional_matching(f: &FiniteHypergraph, weights: &[Rational]) -> bool {
    weights.len() == f.edge_count()
        && !weights.iter().any(Rational::is_negative)
        && f
            .stars()
            .iter()
            .all(|star| star.iter().map(|&k| &weights[k]).sum::<Rational>() == Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> FiniteHypergraph {
        FiniteHypergraph::new(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    fn value(f: &FiniteHypergraph, which: Invariant) -> IntegerValue {
        exact_invariant(f, which, &SearchLimits::default()).unwrap().value
    }

    #[test]
    fn triangle_invariants() {
        let c3 = triangle();
        assert_eq!(value(&c3, Invariant::Nu), IntegerValue::Finite(1));
        assert_eq!(value(&c3, Invariant::Tau), IntegerValue::Finite(2));
        assert_eq!(value(&c3, Invariant::Iota), IntegerValue::Finite(1));
        assert_eq!(value(&c3, Invariant::Rho), IntegerValue::Finite(2));
        let half = Rational::new(3, 2);
        for kind in Fractional::ALL {
            assert_eq!(lp_fractional(&c3, kind).value, Some(half.clone()), "{kind:?}");
        }
        assert_eq!(perfect_fractional_matching(&c3), Some(vec![Rational::new(1, 2); 3]));
        assert_eq!(c3.rank(), 2);
        assert_eq!(c3.max_degree(), 2);
    }

    #[test]
    fn empty_edge_set_is_infinite() {
        let f = FiniteHypergraph::new(1, vec![]).unwrap();
        assert_eq!(value(&f, Invariant::Rho), IntegerValue::Infinite);
        assert_eq!(value(&f, Invariant::Iota), IntegerValue::Infinite);
        assert_eq!(value(&f, Invariant::Nu), IntegerValue::Finite(0));
        assert_eq!(value(&f, Invariant::Tau), IntegerValue::Finite(0));
        assert!(lp_fractional(&f, Fractional::RhoStar).is_infinite());
        assert_eq!(lp_fractional(&f, Fractional::NuStar).value, Some(Rational::zero()));
    }

    #[test]
    fn disjoint_edges_are_perfect() {
        let f = FiniteHypergraph::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        assert_eq!(lp_fractional(&f, Fractional::NuStar).value, Some(Rational::from(3usize)));
        assert_eq!(perfect_fractional_matching(&f), Some(vec![Rational::one(); 3]));
    }

    #[test]
    fn star_has_no_perfect_fractional_matching() {
        let star = FiniteHypergraph::new(3, vec![vec![0, 1], vec![0, 2]]).unwrap();
        assert_eq!(perfect_fractional_matching(&star), None);
    }

    #[test]
    fn parts_are_validated() {
        let f = FiniteHypergraph::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        assert!(f.clone().with_parts(vec![0, 0, 1, 1]).is_ok());
        assert!(f.with_parts(vec![0, 1, 0, 1]).is_err());
        assert!(FiniteHypergraph::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn scale_guard_refuses() {
        let f = triangle();
        let limits = SearchLimits { max_vertices: 2, ..SearchLimits::default() };
        assert!(matches!(exact_invariant(&f, Invariant::Nu, &limits), Err(Error::ScaleGuard(_))));
    }
}
