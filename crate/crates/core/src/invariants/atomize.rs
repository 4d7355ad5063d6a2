use std::collections::HashMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::geometry::DIntervalHypergraph;
use crate::partitions::critical_values;
use crate::rational::Rational;

use super::FiniteHypergraph;

/// A maximal piece of one copy on which edge membership is constant:
/// a critical value or the open gap between two consecutive ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Piece {
    Point { copy: usize, at: Rational },
    Gap { copy: usize, lo: Rational, hi: Rational },
}

impl Piece {
    pub fn copy(&self) -> usize {
        match self {
            Piece::Point { copy, .. } | Piece::Gap { copy, .. } => *copy,
        }
    }

    /// A point of the piece: the value itself or the gap midpoint.
    pub fn representative(&self) -> Rational {
        match self {
            Piece::Point { at, .. } => at.clone(),
            Piece::Gap { lo, hi, .. } => (lo + hi) / Rational::from(2i64),
        }
    }
}

impl Serialize for Piece {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Piece::Point { copy, at } => {
                let mut st = s.serialize_struct("Piece", 3)?;
                st.serialize_field("copy", &(copy + 1))?;
                st.serialize_field("point", at)?;
                st.end()
            }
            Piece::Gap { copy, lo, hi } => {
                let mut st = s.serialize_struct("Piece", 3)?;
                st.serialize_field("copy", &(copy + 1))?;
                st.serialize_field("open_gap", &[lo, hi])?;
                st.end()
            }
        }
    }
}

/// A class of pieces with identical edge membership.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Atom {
    pub pieces: Vec<Piece>,
    /// Ids of the edges containing the atom; empty for the uncovered atom.
    pub edges: Vec<usize>,
}

impl Atom {
    /// `(copy, point)` of a concrete point inside the atom.
    pub fn representative(&self) -> (usize, Rational) {
        let p = &self.pieces[0];
        (p.copy(), p.representative())
    }
}

#[derive(Clone, Debug)]
pub struct Atomization {
    /// Vertices are atoms; edge `k` is the set of atoms inside edge `k`.
    pub hypergraph: FiniteHypergraph,
    pub atoms: Vec<Atom>,
}

/// Quotients the vertex set of `h` by edge membership.
///
/// Points with the same set of containing edges are interchangeable for
/// all four invariants, so the finite hypergraph on atoms has the same
/// `ν`, `τ`, `ι`, `ρ` as `h`.
pub fn atomize(h: &DIntervalHypergraph) -> Atomization {
    let mut atoms: Vec<Atom> = Vec::new();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut place = |piece: Piece, members: Vec<usize>| {
        let k = *index.entry(members.clone()).or_insert_with(|| {
            atoms.push(Atom { pieces: Vec::new(), edges: members });
            atoms.len() - 1
        });
        atoms[k].pieces.push(piece);
    };
    for i in 0..h.d() {
        let crit = critical_values(h, i);
        for (k, v) in crit.iter().enumerate() {
            let members = h
                .edges()
                .iter()
                .filter(|e| e.parts[i].contains_point(v))
                .map(|e| e.id)
                .collect();
            place(Piece::Point { copy: i, at: v.clone() }, members);
            if let Some(w) = crit.get(k + 1) {
                let members = h
                    .edges()
                    .iter()
                    .filter(|e| e.parts[i].lo <= *v && *w <= e.parts[i].hi)
                    .map(|e| e.id)
                    .collect();
                place(Piece::Gap { copy: i, lo: v.clone(), hi: w.clone() }, members);
            }
        }
    }
    let mut edge_atoms = vec![Vec::new(); h.len()];
    for (a, atom) in atoms.iter().enumerate() {
        for &e in &atom.edges {
            edge_atoms[e].push(a);
        }
    }
    let hypergraph = FiniteHypergraph::new(atoms.len(), edge_atoms).expect("atoms are in range");
    Atomization { hypergraph, atoms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Interval;
    use crate::invariants::{exact_invariant, IntegerValue, Invariant, SearchLimits};

    fn d1(intervals: &[((i64, i64), (i64, i64))]) -> DIntervalHypergraph {
        DIntervalHypergraph::from_parts(
            1,
            intervals.iter().map(|&(a, b)| vec![Interval::of(a, b)]).collect(),
        )
        .unwrap()
    }

    fn invariants(h: &DIntervalHypergraph) -> Vec<IntegerValue> {
        let f = atomize(h).hypergraph;
        Invariant::ALL
            .iter()
            .map(|&w| exact_invariant(&f, w, &SearchLimits::default()).unwrap().value)
            .collect()
    }

    #[test]
    fn two_halves() {
        let h = d1(&[((0, 1), (1, 2)), ((1, 2), (1, 1))]);
        let a = atomize(&h);
        assert_eq!(a.atoms.len(), 3);
        assert_eq!(a.atoms[1].pieces, vec![Piece::Point { copy: 0, at: Rational::new(1, 2) }]);
        assert_eq!(a.atoms[1].edges, vec![0, 1]);
        use IntegerValue::Finite;
        assert_eq!(invariants(&h), vec![Finite(1), Finite(1), Finite(2), Finite(2)]);
    }

    #[test]
    fn whole_interval() {
        let h = d1(&[((0, 1), (1, 1))]);
        assert_eq!(atomize(&h).atoms.len(), 1);
        assert_eq!(invariants(&h), vec![IntegerValue::Finite(1); 4]);
        let h2 = DIntervalHypergraph::from_parts(
            2,
            vec![vec![Interval::of((0, 1), (1, 1)), Interval::of((0, 1), (1, 1))]],
        )
        .unwrap();
        assert_eq!(invariants(&h2), vec![IntegerValue::Finite(1); 4]);
    }

    #[test]
    fn gap_gives_uncovered_atom() {
        let h = d1(&[((0, 1), (2, 5)), ((3, 5), (1, 1))]);
        let a = atomize(&h);
        assert!(a.atoms.iter().any(|atom| atom.edges.is_empty()));
        let v = invariants(&h);
        assert_eq!(v[2], IntegerValue::Infinite);
        assert_eq!(v[3], IntegerValue::Infinite);
    }
}
