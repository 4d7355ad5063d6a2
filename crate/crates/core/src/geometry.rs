//! d-interval hypergraphs, n-partitions and d-cells.
//!
//! Copies and cells are indexed from 0 in the Rust API. The JSON formats
//! use 1-based copy and cell numbers.
//!
//! The cell convention used everywhere: for cuts `0 <= c_1 <= ... <= c_{n-1} <= 1`
//! the cells are `[0, c_1), (c_1, c_2), ..., (c_{n-1}, 1]`; with `n = 1` the
//! single cell is `[0, 1]`. Only the first cell is closed at 0 and only the
//! last is closed at 1. A cell is empty iff its two bounds coincide.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A closed subinterval `[lo, hi]` of one copy of the unit interval.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::invalid("interval", format!("lo {lo} > hi {hi}")));
        }
        if lo.is_negative() || hi > Rational::one() {
            return Err(Error::invalid("interval", format!("[{lo}, {hi}] leaves [0,1]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Shorthand for tests and generators; panics on invalid input.
    pub fn of(lo: (i64, i64), hi: (i64, i64)) -> Self {
        Interval::new(Rational::new(lo.0, lo.1), Rational::new(hi.0, hi.1)).expect("valid interval")
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains_point(&self, p: &Rational) -> bool {
        &self.lo <= p && p <= &self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// An edge: one interval per copy. `parts[i]` lives on copy `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DEdge {
    pub id: usize,
    pub parts: Vec<Interval>,
}

impl DEdge {
    pub fn length(&self) -> Rational {
        self.parts.iter().map(Interval::length).sum()
    }

    pub fn intersects(&self, other: &DEdge) -> bool {
        self.parts.iter().zip(&other.parts).any(|(a, b)| a.intersects(b))
    }
}

/// A d-interval hypergraph. Edge ids are `0..edges.len()` in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DIntervalHypergraph {
    d: usize,
    edges: Vec<DEdge>,
}

impl DIntervalHypergraph {
    pub fn new(d: usize, mut edges: Vec<DEdge>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d", "must be positive"));
        }
        edges.sort_by_key(|e| e.id);
        for (k, edge) in edges.iter().enumerate() {
            if edge.id != k {
                return Err(Error::invalid(
                    format!("edges[{k}].id"),
                    "edge ids must be distinct and dense from 0",
                ));
            }
            if edge.parts.len() != d {
                return Err(Error::invalid(
                    format!("edges[{k}].parts"),
                    format!("expected {d} intervals, found {}", edge.parts.len()),
                ));
            }
        }
        Ok(DIntervalHypergraph { d, edges })
    }

    /// Builds a hypergraph assigning ids in the given order.
    pub fn from_parts(d: usize, parts: Vec<Vec<Interval>>) -> Result<Self> {
        let edges = parts
            .into_iter()
            .enumerate()
            .map(|(id, parts)| DEdge { id, parts })
            .collect();
        Self::new(d, edges)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[DEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &DEdge {
        &self.edges[id]
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The interval hypergraph on copy `i` (all edges restricted to `U^i`).
    pub fn restrict_to_copy(&self, i: usize) -> DIntervalHypergraph {
        let parts = self.edges.iter().map(|e| vec![e.parts[i].clone()]).collect();
        DIntervalHypergraph::from_parts(1, parts).expect("restriction is valid")
    }
}

/// Endpoints of one cell plus which ends are closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellBounds {
    pub lo: Rational,
    pub hi: Rational,
    pub closed_left: bool,
    pub closed_right: bool,
}

impl CellBounds {
    pub fn is_empty(&self) -> bool {
        self.lo == self.hi && !(self.closed_left && self.closed_right)
    }

    /// `interval ⊆ cell`.
    pub fn contains(&self, interval: &Interval) -> bool {
        let left = if self.closed_left {
            interval.lo >= self.lo
        } else {
            interval.lo > self.lo
        };
        let right = if self.closed_right {
            interval.hi <= self.hi
        } else {
            interval.hi < self.hi
        };
        left && right
    }

    /// `cell ⊆ interval`. Empty cells lie inside every interval.
    pub fn is_within(&self, interval: &Interval) -> bool {
        self.is_empty() || (interval.lo <= self.lo && self.hi <= interval.hi)
    }
}

/// A d×n-partition stored as its cut values `c^i_1 <= ... <= c^i_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CutSystem {
    n: usize,
    cuts: Vec<Vec<Rational>>,
}

impl CutSystem {
    pub fn new(n: usize, cuts: Vec<Vec<Rational>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "must be positive"));
        }
        if cuts.is_empty() {
            return Err(Error::invalid("cuts", "need at least one copy"));
        }
        for (i, row) in cuts.iter().enumerate() {
            if row.len() != n - 1 {
                return Err(Error::invalid(
                    format!("cuts[{i}]"),
                    format!("expected {} cut values, found {}", n - 1, row.len()),
                ));
            }
            let mut prev = Rational::zero();
            for (j, c) in row.iter().enumerate() {
                if c < &prev || c > &Rational::one() {
                    return Err(Error::invalid(
                        format!("cuts[{i}][{j}]"),
                        "cuts must be nondecreasing within [0,1]",
                    ));
                }
                prev = c.clone();
            }
        }
        Ok(CutSystem { n, cuts })
    }

    /// Evenly spaced cuts `j/n`.
    pub fn uniform(d: usize, n: usize) -> Self {
        let row: Vec<Rational> = (1..n).map(|j| Rational::new(j as i64, n as i64)).collect();
        CutSystem {
            n,
            cuts: vec![row; d],
        }
    }

    pub fn d(&self) -> usize {
        self.cuts.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cuts(&self) -> &[Vec<Rational>] {
        &self.cuts
    }

    /// `[0, c_1, ..., c_{n-1}, 1]` for copy `i`.
    pub fn boundaries(&self, i: usize) -> Vec<Rational> {
        let mut b = Vec::with_capacity(self.n + 1);
        b.push(Rational::zero());
        b.extend(self.cuts[i].iter().cloned());
        b.push(Rational::one());
        b
    }

    pub fn cell_bounds(&self, i: usize, j: usize) -> Result<CellBounds> {
        if i >= self.d() || j >= self.n {
            return Err(Error::invalid(
                "cell",
                format!("copy {i} / cell {j} out of range for d={}, n={}", self.d(), self.n),
            ));
        }
        let lo = if j == 0 { Rational::zero() } else { self.cuts[i][j - 1].clone() };
        let hi = if j + 1 == self.n { Rational::one() } else { self.cuts[i][j].clone() };
        Ok(CellBounds {
            lo,
            hi,
            closed_left: j == 0,
            closed_right: j + 1 == self.n,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.n.pow(self.d() as u32)
    }
}

impl fmt::Display for CutSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .cuts
            .iter()
            .map(|row| row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))
            .collect();
        write!(f, "({})", rows.join("; "))
    }
}

/// A point of the product of `d` simplices `Δ_{n-1}`; `coords[i][j]` is the
/// length of cell `j` on copy `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductPoint {
    n: usize,
    coords: Vec<Vec<Rational>>,
}

impl ProductPoint {
    pub fn new(coords: Vec<Vec<Rational>>) -> Result<Self> {
        let n = coords.first().map(Vec::len).unwrap_or(0);
        if n == 0 {
            return Err(Error::invalid("coords", "need d >= 1 blocks of n >= 1 entries"));
        }
        for (i, block) in coords.iter().enumerate() {
            if block.len() != n {
                return Err(Error::invalid(format!("coords[{i}]"), "ragged blocks"));
            }
            if block.iter().any(Rational::is_negative) {
                return Err(Error::invalid(format!("coords[{i}]"), "negative entry"));
            }
            if block.iter().sum::<Rational>() != Rational::one() {
                return Err(Error::invalid(format!("coords[{i}]"), "block does not sum to 1"));
            }
        }
        Ok(ProductPoint { n, coords })
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[Vec<Rational>] {
        &self.coords
    }
}

/// `c^i_j = x^i_1 + ... + x^i_j`.
pub fn cuts_from_point(x: &ProductPoint) -> CutSystem {
    let cuts = x
        .coords
        .iter()
        .map(|block| {
            let mut acc = Rational::zero();
            block[..x.n - 1]
                .iter()
                .map(|len| {
                    acc += len;
                    acc.clone()
                })
                .collect()
        })
        .collect();
    CutSystem { n: x.n, cuts }
}

/// `x^i_j = c^i_j - c^i_{j-1}`.
pub fn point_from_cuts(c: &CutSystem) -> ProductPoint {
    let coords = (0..c.d())
        .map(|i| {
            let b = c.boundaries(i);
            b.windows(2).map(|w| &w[1] - &w[0]).collect()
        })
        .collect();
    ProductPoint { n: c.n, coords }
}

/// Index of a d-cell: one cell number (0-based) per copy.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DCellIndex(pub Vec<usize>);

impl DCellIndex {
    /// All `n^d` indices in lexicographic order.
    pub fn all(d: usize, n: usize) -> impl Iterator<Item = DCellIndex> {
        let total = n.pow(d as u32);
        (0..total).map(move |flat| DCellIndex::from_flat(flat, d, n))
    }

    pub fn from_flat(mut flat: usize, d: usize, n: usize) -> DCellIndex {
        let mut j = vec![0; d];
        for slot in j.iter_mut().rev() {
            *slot = flat % n;
            flat /= n;
        }
        DCellIndex(j)
    }

    pub fn flat(&self, n: usize) -> usize {
        self.0.iter().fold(0, |acc, &j| acc * n + j)
    }

    /// Two d-cells are disjoint iff they use different cells in every copy.
    pub fn is_disjoint(&self, other: &DCellIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a != b)
    }
}

impl Serialize for DCellIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let one_based: Vec<usize> = self.0.iter().map(|j| j + 1).collect();
        one_based.serialize(s)
    }
}

/// Which d-cell predicate is in force.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredicateMode {
    /// The d-cell contains an edge.
    Contains,
    /// The d-cell is contained in an edge.
    #[serde(rename = "contained")]
    ContainedIn,
}

impl PredicateMode {
    /// Per-copy test: does this cell relate to `interval` as the mode requires?
    pub fn holds(self, cell: &CellBounds, interval: &Interval) -> bool {
        match self {
            PredicateMode::Contains => cell.contains(interval),
            PredicateMode::ContainedIn => cell.is_within(interval),
        }
    }
}

impl fmt::Display for PredicateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredicateMode::Contains => "contains",
            PredicateMode::ContainedIn => "contained",
        })
    }
}

impl std::str::FromStr for PredicateMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "contains" => Ok(PredicateMode::Contains),
            "contained" | "contained-in" => Ok(PredicateMode::ContainedIn),
            other => Err(format!("unknown mode {other:?}; expected contains|contained")),
        }
    }
}
