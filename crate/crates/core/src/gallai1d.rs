//! Greedy algorithms for interval hypergraphs (`d = 1`), where `ν = τ` and
//! `ι = ρ`, and the explicit partitions they induce.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CutSystem, DCellIndex, DIntervalHypergraph, Interval, PredicateMode};
use crate::invariants::SearchLimits;
use crate::partitions::{critical_values, dcell_predicate, premise_check, PartitionCertificate};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedyMatchingResult {
    /// Pairwise disjoint edges, left to right.
    pub matching: Vec<usize>,
    /// One point per matching edge; every edge contains one of them.
    pub transversal: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedyCoverResult {
    /// No edge contains two of these points.
    pub independent_points: Vec<Rational>,
    /// Edges whose union is `[0, 1]`, left to right.
    pub cover: Vec<usize>,
    /// Set when the edges do not cover `[0, 1]`; both lists are then empty.
    pub infinite: bool,
}

fn require_d1(h: &DIntervalHypergraph) -> Result<()> {
    if h.d() != 1 {
        return Err(Error::Precondition(format!("expected d = 1, got d = {}", h.d())));
    }
    Ok(())
}

fn interval(h: &DIntervalHypergraph, e: usize) -> &Interval {
    &h.edge(e).parts[0]
}

/// Repeatedly takes the edge with the leftmost right endpoint `b` (lowest
/// id on ties), puts `b` in the transversal and continues with the edges
/// starting right of `b`.
pub fn gallai_matching(h: &DIntervalHypergraph) -> Result<GreedyMatchingResult> {
    require_d1(h)?;
    let mut matching = Vec::new();
    let mut transversal: Vec<Rational> = Vec::new();
    loop {
        let next = (0..h.len())
            .filter(|&e| transversal.last().is_none_or(|b| interval(h, e).lo > *b))
            .min_by(|&a, &b| interval(h, a).hi.cmp(&interval(h, b).hi).then(a.cmp(&b)));
        let Some(e) = next else { break };
        matching.push(e);
        transversal.push(interval(h, e).hi.clone());
    }
    Ok(GreedyMatchingResult { matching, transversal })
}

/// Whether the edges of an interval hypergraph cover `[0, 1]`.
pub fn covers_unit_interval(h: &DIntervalHypergraph) -> Result<bool> {
    require_d1(h)?;
    let mut intervals: Vec<&Interval> = h.edges().iter().map(|e| &e.parts[0]).collect();
    intervals.sort();
    let mut reach: Option<Rational> = None;
    for iv in intervals {
        let gap = match &reach {
            None => iv.lo.is_positive(),
            Some(r) => iv.lo > *r,
        };
        if gap {
            return Ok(false);
        }
        reach = Some(match reach {
            Some(r) => r.max(iv.hi.clone()),
            None => iv.hi.clone(),
        });
    }
    Ok(reach == Some(Rational::one()))
}

/// Starts at 0 and repeatedly takes, among the edges containing the
/// current point, the one reaching furthest right (lowest id on ties). The
/// next point lies just right of that edge: the midpoint between its right
/// end and the next critical value, so that it sees exactly the edges
/// covering the start of the uncovered region.
pub fn gallai_cover(h: &DIntervalHypergraph) -> Result<GreedyCoverResult> {
    if !covers_unit_interval(h)? {
        return Ok(GreedyCoverResult { independent_points: vec![], cover: vec![], infinite: true });
    }
    let crit = critical_values(h, 0);
    let mut point = Rational::zero();
    let mut independent_points = Vec::new();
    let mut cover = Vec::new();
    loop {
        let e = (0..h.len())
            .filter(|&e| interval(h, e).contains_point(&point))
            .max_by(|&a, &b| interval(h, a).hi.cmp(&interval(h, b).hi).then(b.cmp(&a)))
            .expect("edges cover [0,1]");
        independent_points.push(point);
        cover.push(e);
        let reach = &interval(h, e).hi;
        if *reach == Rational::one() {
            break;
        }
        let next = crit.iter().find(|v| *v > reach).expect("1 is critical");
        point = (reach + next) / Rational::from(2i64);
    }
    Ok(GreedyCoverResult { independent_points, cover, infinite: false })
}

/// Result of the one-dimensional partition construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Theorem3Outcome {
    /// A partition every cell of which satisfies the mode, with one witness
    /// edge per cell.
    Witness(PartitionCertificate),
    /// The premise fails: no cell of this partition satisfies the mode.
    Counterexample(CutSystem),
}

/// For `d = 1`: if every n-partition has a cell containing an edge
/// (`Contains`) or lying in an edge (`ContainedIn`), builds a partition all
/// of whose cells do.
///
/// `Contains` places cuts midway between consecutive edges of the greedy
/// matching; `ContainedIn` cuts at the right ends of the greedy cover,
/// padding with empty cells at 1.
pub fn theorem3_construct(
    h: &DIntervalHypergraph,
    n: usize,
    mode: PredicateMode,
    limits: &SearchLimits,
) -> Result<Theorem3Outcome> {
    require_d1(h)?;
    let premise = premise_check(h, n, mode, limits)?;
    if let Some(counterexample) = premise.counterexample {
        return Ok(Theorem3Outcome::Counterexample(counterexample));
    }
    let cuts: Vec<Rational> = match mode {
        PredicateMode::Contains => {
            let m = gallai_matching(h)?.matching;
            if m.len() < n {
                return Err(Error::BoundViolation(format!(
                    "premise holds but the greedy matching has size {} < {n}",
                    m.len()
                )));
            }
            m.windows(2)
                .take(n - 1)
                .map(|w| (&interval(h, w[0]).hi + &interval(h, w[1]).lo) / Rational::from(2i64))
                .collect()
        }
        PredicateMode::ContainedIn => {
            let c = gallai_cover(h)?;
            if c.infinite || c.cover.len() > n {
                return Err(Error::BoundViolation(format!(
                    "premise holds but the greedy cover has size {} > {n}",
                    c.cover.len()
                )));
            }
            let k = c.cover.len();
            c.cover[..k - 1]
                .iter()
                .map(|&e| interval(h, e).hi.clone())
                .chain(std::iter::repeat(Rational::one()))
                .take(n - 1)
                .collect()
        }
    };
    let cuts = CutSystem::new(n, vec![cuts])?;
    let assignment = (0..n)
        .map(|j| {
            let jv = DCellIndex(vec![j]);
            dcell_predicate(&cuts, &jv, h, mode)
                .map(|e| (jv, e))
                .ok_or_else(|| Error::NoWitness(format!("cell {} of {cuts} has no witness", j + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Theorem3Outcome::Witness(PartitionCertificate::new(mode, cuts, assignment)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d1(intervals: &[((i64, i64), (i64, i64))]) -> DIntervalHypergraph {
        DIntervalHypergraph::from_parts(
            1,
            intervals.iter().map(|&(a, b)| vec![Interval::of(a, b)]).collect(),
        )
        .unwrap()
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn matching_examples() {
        let h = d1(&[((0, 1), (3, 10)), ((2, 10), (5, 10)), ((6, 10), (9, 10))]);
        let m = gallai_matching(&h).unwrap();
        assert_eq!(m.matching, vec![0, 2]);
        assert_eq!(m.transversal, vec![r(3, 10), r(9, 10)]);

        let one = d1(&[((0, 1), (1, 1))]);
        assert_eq!(gallai_matching(&one).unwrap().matching.len(), 1);

        let crossing = d1(&[((0, 1), (1, 1)), ((1, 4), (3, 4)), ((1, 2), (1, 1))]);
        let m = gallai_matching(&crossing).unwrap();
        assert_eq!(m.matching, vec![1]);
        assert_eq!(m.transversal, vec![r(3, 4)]);
    }

    #[test]
    fn cover_examples() {
        let h = d1(&[((0, 1), (1, 2)), ((2, 5), (1, 1))]);
        let c = gallai_cover(&h).unwrap();
        assert!(!c.infinite);
        assert_eq!(c.cover, vec![0, 1]);
        assert_eq!(c.independent_points.len(), 2);
        for (a, p) in c.independent_points.iter().enumerate() {
            for q in &c.independent_points[a + 1..] {
                assert!(!h.edges().iter().any(|e| e.parts[0].contains_point(p) && e.parts[0].contains_point(q)));
            }
        }

        let one = d1(&[((0, 1), (1, 1))]);
        assert_eq!(gallai_cover(&one).unwrap().cover, vec![0]);

        let gap = d1(&[((0, 1), (2, 5)), ((3, 5), (1, 1))]);
        assert!(gallai_cover(&gap).unwrap().infinite);
    }

    #[test]
    fn coverage_sweep() {
        assert!(covers_unit_interval(&d1(&[((1, 2), (1, 1)), ((0, 1), (1, 2))])).unwrap());
        assert!(!covers_unit_interval(&d1(&[((1, 8), (1, 1))])).unwrap());
        assert!(!covers_unit_interval(&d1(&[((0, 1), (7, 8))])).unwrap());
        assert!(!covers_unit_interval(&d1(&[])).unwrap());
    }

    #[test]
    fn theorem3_examples() {
        let limits = SearchLimits::default();
        let h = d1(&[((0, 1), (1, 4)), ((3, 8), (5, 8)), ((3, 4), (1, 1))]);
        match theorem3_construct(&h, 3, PredicateMode::Contains, &limits).unwrap() {
            Theorem3Outcome::Witness(cert) => {
                assert_eq!(cert.cuts.cuts()[0], vec![r(5, 16), r(11, 16)]);
                cert.verify(&h).unwrap();
            }
            other => panic!("{other:?}"),
        }

        let whole = d1(&[((0, 1), (1, 1))]);
        for n in 1..4 {
            assert!(matches!(
                theorem3_construct(&whole, n, PredicateMode::ContainedIn, &limits).unwrap(),
                Theorem3Outcome::Witness(_)
            ));
        }
        match theorem3_construct(&whole, 2, PredicateMode::Contains, &limits).unwrap() {
            Theorem3Outcome::Counterexample(c) => assert_eq!(c.cuts()[0], vec![r(1, 2)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_higher_dimension() {
        let h = DIntervalHypergraph::from_parts(
            2,
            vec![vec![Interval::of((0, 1), (1, 1)), Interval::of((0, 1), (1, 1))]],
        )
        .unwrap();
        assert!(matches!(gallai_matching(&h), Err(Error::Precondition(_))));
    }
}
