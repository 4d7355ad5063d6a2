//! Random instances and brute-force oracles that avoid the library's
//! search code.
#![allow(dead_code)]

use dihg_core::{DIntervalHypergraph, FiniteHypergraph, Interval, ProductPoint, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

/// Interval with endpoints on the `1/den` grid.
pub fn random_interval<R: Rng>(rng: &mut R, den: i64) -> Interval {
    let a = rng.gen_range(0..=den);
    let b = rng.gen_range(0..=den);
    Interval::new(r(a.min(b), den), r(a.max(b), den)).unwrap()
}

pub fn random_dinterval<R: Rng>(rng: &mut R, d: usize, edges: usize, den: i64) -> DIntervalHypergraph {
    let parts = (0..edges).map(|_| (0..d).map(|_| random_interval(rng, den)).collect()).collect();
    DIntervalHypergraph::from_parts(d, parts).unwrap()
}

/// One-dimensional instance whose first intervals chain across `[0, 1]`,
/// padded with random ones, shuffled.
pub fn random_covering_d1<R: Rng>(rng: &mut R, edges: usize, den: i64) -> DIntervalHypergraph {
    let mut parts = Vec::new();
    let mut reach = 0;
    while reach < den && parts.len() < edges {
        let lo = rng.gen_range(0..=reach);
        let hi = if parts.len() + 1 == edges { den } else { rng.gen_range(reach + 1..=den) };
        parts.push(vec![Interval::new(r(lo, den), r(hi, den)).unwrap()]);
        reach = hi;
    }
    while parts.len() < edges {
        parts.push(vec![random_interval(rng, den)]);
    }
    parts.shuffle(rng);
    DIntervalHypergraph::from_parts(1, parts).unwrap()
}

pub fn random_finite<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize, max_rank: usize) -> FiniteHypergraph {
    let nv = rng.gen_range(1..=max_vertices);
    let m = rng.gen_range(1..=max_edges);
    let edges = (0..m)
        .map(|_| {
            let k = rng.gen_range(1..=max_rank.min(nv));
            let mut vs: Vec<usize> = (0..nv).collect();
            vs.shuffle(rng);
            vs.truncate(k);
            vs
        })
        .collect();
    FiniteHypergraph::new(nv, edges).unwrap()
}

/// d-partite hypergraph with parts of the given sizes; every edge picks one
/// vertex per part.
pub fn random_dpartite<R: Rng>(rng: &mut R, sizes: &[usize], edges: usize) -> FiniteHypergraph {
    let offsets: Vec<usize> = sizes.iter().scan(0, |acc, &s| { let o = *acc; *acc += s; Some(o) }).collect();
    let nv: usize = sizes.iter().sum();
    let list = (0..edges)
        .map(|_| sizes.iter().zip(&offsets).map(|(&s, &o)| o + rng.gen_range(0..s)).collect())
        .collect();
    let part_of = sizes.iter().enumerate().flat_map(|(p, &s)| std::iter::repeat_n(p, s)).collect();
    FiniteHypergraph::new(nv, list).unwrap().with_parts(part_of).unwrap()
}

/// Random point of the product of simplices on the `1/den` grid; with
/// `zero` set, coordinate `zero.1` of block `zero.0` is forced to 0.
pub fn random_point<R: Rng>(rng: &mut R, d: usize, n: usize, den: i64, zero: Option<(usize, usize)>) -> ProductPoint {
    let coords = (0..d)
        .map(|i| {
            let mut weights: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
            if let Some((zi, zj)) = zero {
                if zi == i {
                    weights[zj] = 0;
                }
            }
            if weights.iter().all(|&w| w == 0) {
                let k = (0..n).find(|&k| zero != Some((i, k))).unwrap_or(0);
                weights[k] = 1;
            }
            // Split den units proportionally, remainder to the largest.
            let total: i64 = weights.iter().sum();
            let mut units: Vec<i64> = weights.iter().map(|w| w * den / total).collect();
            let rest = den - units.iter().sum::<i64>();
            let big = (0..n).max_by_key(|&k| weights[k]).unwrap();
            units[big] += rest;
            units.iter().map(|&u| r(u, den)).collect()
        })
        .collect();
    ProductPoint::new(coords).unwrap()
}

fn subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << m).map(move |mask| (0..m).filter(|&k| mask >> k & 1 == 1).collect())
}

pub fn brute_nu(f: &FiniteHypergraph) -> usize {
    subsets(f.edge_count())
        .filter(|s| f.is_matching(s))
        .map(|s| s.len())
        .max()
        .unwrap_or(0)
}

/// `None` when some vertex lies in no edge.
pub fn brute_rho(f: &FiniteHypergraph) -> Option<usize> {
    subsets(f.edge_count()).filter(|s| f.is_edge_cover(s)).map(|s| s.len()).min()
}

/// One-dimensional oracles on the intervals of copy 0.
fn d1_intervals(h: &DIntervalHypergraph) -> Vec<Interval> {
    h.edges().iter().map(|e| e.parts[0].clone()).collect()
}

pub fn brute_nu_d1(h: &DIntervalHypergraph) -> usize {
    let iv = d1_intervals(h);
    subsets(iv.len())
        .filter(|s| s.iter().enumerate().all(|(a, &x)| s[a + 1..].iter().all(|&y| !iv[x].intersects(&iv[y]))))
        .map(|s| s.len())
        .max()
        .unwrap_or(0)
}

/// Right endpoints suffice as candidate piercing points.
pub fn brute_tau_d1(h: &DIntervalHypergraph) -> usize {
    let iv = d1_intervals(h);
    let mut points: Vec<Rational> = iv.iter().map(|i| i.hi.clone()).collect();
    points.sort();
    points.dedup();
    (0..=points.len())
        .find(|&k| {
            subsets(points.len())
                .filter(|s| s.len() == k)
                .any(|s| iv.iter().all(|i| s.iter().any(|&p| i.contains_point(&points[p]))))
        })
        .expect("all points pierce everything")
}

/// Whether the union of `chosen` covers `[0, 1]`, by a sweep over sorted
/// intervals.
pub fn covers_unit(intervals: &[&Interval]) -> bool {
    let mut sorted: Vec<&Interval> = intervals.to_vec();
    sorted.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut reach: Option<Rational> = None;
    for iv in sorted {
        let ok = match &reach {
            None => iv.lo.is_zero(),
            Some(x) => iv.lo <= *x,
        };
        if !ok {
            return false;
        }
        reach = Some(match reach {
            Some(x) if x > iv.hi => x,
            _ => iv.hi.clone(),
        });
    }
    reach == Some(Rational::one())
}

pub fn brute_rho_d1(h: &DIntervalHypergraph) -> Option<usize> {
    let iv = d1_intervals(h);
    subsets(iv.len())
        .filter(|s| covers_unit(&s.iter().map(|&k| &iv[k]).collect::<Vec<_>>()))
        .map(|s| s.len())
        .min()
}

/// The cells of a cut system in copy `i` as `(lo, hi, closed_left, closed_right)`.
pub fn cell(x: &ProductPoint, i: usize, j: usize) -> (Rational, Rational, bool, bool) {
    let block = &x.coords()[i];
    let lo: Rational = block[..j].iter().sum();
    let hi = &lo + &block[j];
    let n = block.len();
    (lo, hi, j == 0, j + 1 == n)
}

fn cell_is_empty(c: &(Rational, Rational, bool, bool)) -> bool {
    let (lo, hi, cl, cr) = c;
    lo > hi || (lo == hi && !(*cl && *cr))
}

/// Whether some edge lies inside every cell of `j` (open interior ends).
pub fn oracle_contains(h: &DIntervalHypergraph, x: &ProductPoint, j: &[usize]) -> bool {
    h.edges().iter().any(|e| {
        e.parts.iter().enumerate().all(|(i, iv)| {
            let c = cell(x, i, j[i]);
            let left = if c.2 { c.0 <= iv.lo } else { c.0 < iv.lo };
            let right = if c.3 { iv.hi <= c.1 } else { iv.hi < c.1 };
            !cell_is_empty(&c) && left && right
        })
    })
}

/// Whether every cell of `j` lies inside one edge (empty cells always do).
pub fn oracle_contained(h: &DIntervalHypergraph, x: &ProductPoint, j: &[usize]) -> bool {
    h.edges().iter().any(|e| {
        e.parts.iter().enumerate().all(|(i, iv)| {
            let c = cell(x, i, j[i]);
            cell_is_empty(&c) || (iv.lo <= c.0 && c.1 <= iv.hi)
        })
    })
}
