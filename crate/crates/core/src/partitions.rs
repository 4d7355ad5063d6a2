//! d-cell predicates and exact decisions over all d×n-partitions.
//!
//! A predicate of a d-cell compares cut values with edge endpoints and with
//! neighbouring cuts only. So it is constant on a *configuration*: the
//! record, for each cut, of whether it sits at a critical value (an edge
//! endpoint, 0 or 1) or inside an open gap between two consecutive ones,
//! together with which cuts in the same gap coincide. There are finitely
//! many configurations, and quantifying over them decides statements about
//! all partitions exactly.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{CellBounds, CutSystem, DCellIndex, DEdge, DIntervalHypergraph, PredicateMode};
use crate::invariants::{
    atomize, exact_invariant, max_independent_set, min_set_cover, greedy_cover, Invariant,
    SearchLimits,
};
use crate::rational::Rational;

/// All edge endpoints on copy `i`, plus 0 and 1, sorted and deduplicated.
pub fn critical_values(h: &DIntervalHypergraph, i: usize) -> Vec<Rational> {
    let mut values: Vec<Rational> = h
        .edges()
        .iter()
        .flat_map(|e| [e.parts[i].lo.clone(), e.parts[i].hi.clone()])
        .chain([Rational::zero(), Rational::one()])
        .collect();
    values.sort();
    values.dedup();
    values
}

fn cells_of(c: &CutSystem, j: &DCellIndex) -> Vec<CellBounds> {
    j.0.iter()
        .enumerate()
        .map(|(i, &ji)| c.cell_bounds(i, ji).expect("d-cell index in range"))
        .collect()
}

/// Whether edge `e` witnesses the predicate for d-cell `j` of `c`.
pub fn edge_witnesses(c: &CutSystem, j: &DCellIndex, e: &DEdge, mode: PredicateMode) -> bool {
    cells_of(c, j)
        .iter()
        .zip(&e.parts)
        .all(|(cell, interval)| mode.holds(cell, interval))
}

/// The lowest-id edge that d-cell `j` contains (`Contains`) or lies in
/// (`ContainedIn`), if any.
pub fn dcell_predicate(
    c: &CutSystem,
    j: &DCellIndex,
    h: &DIntervalHypergraph,
    mode: PredicateMode,
) -> Option<usize> {
    let cells = cells_of(c, j);
    h.edges()
        .iter()
        .find(|e| cells.iter().zip(&e.parts).all(|(cell, iv)| mode.holds(cell, iv)))
        .map(|e| e.id)
}

/// Position class of a single cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    /// At critical value `k`.
    At(usize),
    /// Strictly between critical values `g` and `g + 1`.
    Gap(usize),
}

impl Slot {
    fn code(self) -> usize {
        match self {
            Slot::At(k) => 2 * k,
            Slot::Gap(g) => 2 * g + 1,
        }
    }

    fn from_code(code: usize) -> Slot {
        if code.is_multiple_of(2) {
            Slot::At(code / 2)
        } else {
            Slot::Gap(code / 2)
        }
    }
}

/// The configuration of the `n - 1` cuts on one copy. `positions[j]` is the
/// slot of cut `j` and its block number inside that slot; cuts in the same
/// gap with the same block number coincide.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CutConfiguration {
    pub copy: usize,
    pub positions: Vec<(Slot, usize)>,
}

impl CutConfiguration {
    fn blocks_in_gap(&self, g: usize) -> usize {
        self.positions
            .iter()
            .filter(|(s, _)| *s == Slot::Gap(g))
            .map(|&(_, b)| b + 1)
            .max()
            .unwrap_or(0)
    }

    /// Cut values realizing this configuration; blocks inside a gap are
    /// evenly spaced.
    pub fn realize(&self, crit: &[Rational]) -> Vec<Rational> {
        self.positions
            .iter()
            .map(|&(slot, block)| match slot {
                Slot::At(k) => crit[k].clone(),
                Slot::Gap(g) => {
                    let k = self.blocks_in_gap(g) as i64;
                    let step = Rational::new(block as i64 + 1, k + 1);
                    &crit[g] + &(&(&crit[g + 1] - &crit[g]) * &step)
                }
            })
            .collect()
    }

    /// A random realization: distinct random points of each gap, sorted.
    pub fn realize_random<R: Rng>(&self, crit: &[Rational], rng: &mut R) -> Vec<Rational> {
        let mut gap_points: Vec<Vec<Rational>> = vec![Vec::new(); crit.len()];
        for g in 0..crit.len().saturating_sub(1) {
            let k = self.blocks_in_gap(g);
            if k == 0 {
                continue;
            }
            let mut ticks: Vec<i64> = Vec::with_capacity(k);
            while ticks.len() < k {
                let t = rng.gen_range(1..1_000_000);
                if !ticks.contains(&t) {
                    ticks.push(t);
                }
            }
            ticks.sort_unstable();
            let width = &crit[g + 1] - &crit[g];
            gap_points[g] = ticks
                .into_iter()
                .map(|t| &crit[g] + &(&width * &Rational::new(t, 1_000_000)))
                .collect();
        }
        self.positions
            .iter()
            .map(|&(slot, block)| match slot {
                Slot::At(k) => crit[k].clone(),
                Slot::Gap(g) => gap_points[g][block].clone(),
            })
            .collect()
    }
}

/// Every configuration of `n - 1` cuts over the critical values `crit`.
pub fn enumerate_configurations(
    crit: &[Rational],
    n: usize,
    copy: usize,
    max_configurations: usize,
) -> Result<Vec<CutConfiguration>> {
    let slots = 2 * crit.len() - 1;
    let mut out = Vec::new();
    let mut current: Vec<(Slot, usize)> = Vec::with_capacity(n.saturating_sub(1));
    fn rec(
        slots: usize,
        remaining: usize,
        copy: usize,
        current: &mut Vec<(Slot, usize)>,
        out: &mut Vec<CutConfiguration>,
        max: usize,
    ) -> Result<()> {
        if remaining == 0 {
            if out.len() >= max {
                return Err(Error::ScaleGuard(format!("more than {max} cut configurations")));
            }
            out.push(CutConfiguration { copy, positions: current.clone() });
            return Ok(());
        }
        let mut options: Vec<(Slot, usize)> = Vec::new();
        let first_new = match current.last() {
            None => 0,
            Some(&(slot, block)) => {
                options.push((slot, block));
                if matches!(slot, Slot::Gap(_)) {
                    options.push((slot, block + 1));
                }
                slot.code() + 1
            }
        };
        options.extend((first_new..slots).map(|code| (Slot::from_code(code), 0)));
        for option in options {
            current.push(option);
            rec(slots, remaining - 1, copy, current, out, max)?;
            current.pop();
        }
        Ok(())
    }
    rec(slots, n - 1, copy, &mut current, &mut out, max_configurations)?;
    Ok(out)
}

/// Per-copy predicate tables over all configurations of that copy.
#[derive(Clone, Debug)]
pub struct CopyTable {
    pub copy: usize,
    pub configurations: Vec<CutConfiguration>,
    /// Representative cut values of each configuration.
    pub cuts: Vec<Vec<Rational>>,
    /// `masks[c][e]` has bit `j` set iff cell `j` of configuration `c`
    /// satisfies the per-copy predicate against edge `e`.
    pub masks: Vec<Vec<u64>>,
}

impl CopyTable {
    pub fn build(
        h: &DIntervalHypergraph,
        n: usize,
        copy: usize,
        mode: PredicateMode,
        max_configurations: usize,
    ) -> Result<CopyTable> {
        if n > 64 {
            return Err(Error::ScaleGuard(format!("n = {n} exceeds 64 cells")));
        }
        let crit = critical_values(h, copy);
        let configurations = enumerate_configurations(&crit, n, copy, max_configurations)?;
        let cuts: Vec<Vec<Rational>> = configurations.iter().map(|c| c.realize(&crit)).collect();
        let masks = cuts
            .iter()
            .map(|row| cell_masks(h, n, copy, row, mode))
            .collect();
        Ok(CopyTable { copy, configurations, cuts, masks })
    }

    /// Edges satisfying the predicate in cell `j` under configuration `c`.
    pub fn cell_edges(&self, c: usize, j: usize) -> Vec<usize> {
        (0..self.masks[c].len())
            .filter(|&e| self.masks[c][e] >> j & 1 == 1)
            .collect()
    }
}

/// Bit `j` of entry `e`: does cell `j` of the copy cut at `row` satisfy the
/// predicate against edge `e`?
pub fn cell_masks(
    h: &DIntervalHypergraph,
    n: usize,
    copy: usize,
    row: &[Rational],
    mode: PredicateMode,
) -> Vec<u64> {
    let single = CutSystem::new(n, vec![row.to_vec()]).expect("configuration cuts are valid");
    let cells: Vec<CellBounds> = (0..n).map(|j| single.cell_bounds(0, j).expect("in range")).collect();
    h.edges()
        .iter()
        .map(|e| {
            cells
                .iter()
                .enumerate()
                .filter(|(_, cell)| mode.holds(cell, &e.parts[copy]))
                .fold(0u64, |m, (j, _)| m | 1 << j)
        })
        .collect()
}

fn build_tables(
    h: &DIntervalHypergraph,
    n: usize,
    mode: PredicateMode,
    limits: &SearchLimits,
) -> Result<Vec<CopyTable>> {
    (0..h.d())
        .map(|i| CopyTable::build(h, n, i, mode, limits.max_configurations))
        .collect()
}

fn cut_system(tables: &[CopyTable], choice: &[usize], n: usize) -> CutSystem {
    let cuts = tables.iter().zip(choice).map(|(t, &c)| t.cuts[c].clone()).collect();
    CutSystem::new(n, cuts).expect("configuration cuts are valid")
}

/// Outcome of a premise decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PremiseOutcome {
    pub holds: bool,
    /// A partition none of whose d-cells satisfies the predicate.
    pub counterexample: Option<CutSystem>,
    /// Number of configurations examined on each copy.
    pub configurations: Vec<usize>,
}

/// Decides whether every d×n-partition has a d-cell satisfying `mode`.
///
/// A partition fails iff the edges admissible on each copy (those with
/// some satisfying cell there) have empty common intersection, so only the
/// inclusion-minimal admissible sets of each copy matter.
pub fn premise_check(
    h: &DIntervalHypergraph,
    n: usize,
    mode: PredicateMode,
    limits: &SearchLimits,
) -> Result<PremiseOutcome> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let tables = build_tables(h, n, mode, limits)?;
    let configurations = tables.iter().map(|t| t.configurations.len()).collect();
    let m = h.len();
    // Per copy: distinct inclusion-minimal admissible sets with one
    // representative configuration each.
    let per_copy: Vec<Vec<(FixedBitSet, usize)>> = tables
        .iter()
        .map(|t| {
            // Prefer generic configurations (cuts inside gaps) as witnesses.
            let pinned = |c: usize| {
                t.configurations[c]
                    .positions
                    .iter()
                    .filter(|(s, _)| matches!(s, Slot::At(_)))
                    .count()
            };
            let mut order: Vec<usize> = (0..t.masks.len()).collect();
            order.sort_by_key(|&c| (pinned(c), c));
            let mut sets: Vec<(FixedBitSet, usize)> = Vec::new();
            let mut seen: HashSet<Vec<usize>> = HashSet::new();
            for c in order {
                let mut b = FixedBitSet::with_capacity(m);
                t.masks[c].iter().enumerate().filter(|(_, &mk)| mk != 0).for_each(|(e, _)| b.insert(e));
                if seen.insert(b.ones().collect()) {
                    sets.push((b, c));
                }
            }
            sets.sort_by_key(|(b, c)| (b.count_ones(..), pinned(*c), *c));
            let mut minimal: Vec<(FixedBitSet, usize)> = Vec::new();
            for (b, c) in sets {
                if !minimal.iter().any(|(k, _)| k.is_subset(&b)) {
                    minimal.push((b, c));
                }
            }
            minimal
        })
        .collect();

    let mut all = FixedBitSet::with_capacity(m);
    all.insert_range(..);
    let mut choice = Vec::with_capacity(h.d());
    let mut nodes = 0u64;
    let found = find_empty_intersection(&per_copy, &all, &mut choice, &mut nodes, limits)?;
    Ok(match found {
        Some(choice) => PremiseOutcome {
            holds: false,
            counterexample: Some(cut_system(&tables, &choice, n)),
            configurations,
        },
        None => PremiseOutcome { holds: true, counterexample: None, configurations },
    })
}

fn find_empty_intersection(
    per_copy: &[Vec<(FixedBitSet, usize)>],
    current: &FixedBitSet,
    choice: &mut Vec<usize>,
    nodes: &mut u64,
    limits: &SearchLimits,
) -> Result<Option<Vec<usize>>> {
    let level = choice.len();
    if level == per_copy.len() {
        return Ok(current.is_clear().then(|| choice.clone()));
    }
    let mut tried: HashSet<Vec<usize>> = HashSet::new();
    for (set, config) in &per_copy[level] {
        *nodes += 1;
        if *nodes > limits.max_nodes {
            return Err(Error::ScaleGuard(format!(
                "premise search exceeded {} nodes",
                limits.max_nodes
            )));
        }
        let mut next = current.clone();
        next.intersect_with(set);
        if !tried.insert(next.ones().collect()) {
            continue;
        }
        choice.push(*config);
        if let Some(found) = find_empty_intersection(per_copy, &next, choice, nodes, limits)? {
            return Ok(Some(found));
        }
        choice.pop();
    }
    Ok(None)
}

/// A partition together with witnessed d-cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCertificate {
    pub mode: PredicateMode,
    pub cuts: CutSystem,
    /// Chosen d-cells with their witness edge ids.
    pub assignment: Vec<(DCellIndex, usize)>,
    /// `H0`: the distinct witness edges, sorted.
    pub used_edges: Vec<usize>,
}

impl PartitionCertificate {
    pub fn new(mode: PredicateMode, cuts: CutSystem, assignment: Vec<(DCellIndex, usize)>) -> Self {
        let mut used_edges: Vec<usize> = assignment.iter().map(|(_, e)| *e).collect();
        used_edges.sort_unstable();
        used_edges.dedup();
        PartitionCertificate { mode, cuts, assignment, used_edges }
    }

    /// Re-checks every claim exactly. For `Contains` the chosen d-cells must
    /// be pairwise disjoint; for `ContainedIn` they must cover every cell.
    pub fn verify(&self, h: &DIntervalHypergraph) -> Result<()> {
        let (d, n) = (self.cuts.d(), self.cuts.n());
        if d != h.d() {
            return Err(Error::NoWitness(format!("certificate has d={d}, hypergraph d={}", h.d())));
        }
        for (j, e) in &self.assignment {
            if j.0.len() != d || j.0.iter().any(|&ji| ji >= n) || *e >= h.len() {
                return Err(Error::NoWitness(format!("malformed entry {:?} -> {e}", j.0)));
            }
            if !edge_witnesses(&self.cuts, j, h.edge(*e), self.mode) {
                return Err(Error::NoWitness(format!(
                    "edge {e} does not witness d-cell {:?} ({})",
                    j.0, self.mode
                )));
            }
        }
        match self.mode {
            PredicateMode::Contains => {
                for (k, (a, _)) in self.assignment.iter().enumerate() {
                    if let Some((b, _)) = self.assignment[k + 1..].iter().find(|(b, _)| !a.is_disjoint(b)) {
                        return Err(Error::NoWitness(format!(
                            "d-cells {:?} and {:?} share a cell",
                            a.0, b.0
                        )));
                    }
                }
            }
            PredicateMode::ContainedIn => {
                for i in 0..d {
                    for j in 0..n {
                        if !self.assignment.iter().any(|(jv, _)| jv.0[i] == j) {
                            return Err(Error::NoWitness(format!(
                                "cell {} of copy {} is not covered",
                                j + 1,
                                i + 1
                            )));
                        }
                    }
                }
            }
        }
        let mut used: Vec<usize> = self.assignment.iter().map(|(_, e)| *e).collect();
        used.sort_unstable();
        used.dedup();
        if used != self.used_edges {
            return Err(Error::NoWitness("used_edges differs from the assignment".into()));
        }
        Ok(())
    }
}

impl Serialize for PartitionCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            dcell: &'a DCellIndex,
            edge: usize,
        }
        let entries: Vec<Entry> = self
            .assignment
            .iter()
            .map(|(dcell, edge)| Entry { dcell, edge: *edge })
            .collect();
        let mut st = s.serialize_struct("PartitionCertificate", 4)?;
        st.serialize_field("mode", &self.mode)?;
        st.serialize_field("cuts", &self.cuts)?;
        st.serialize_field("assignment", &entries)?;
        st.serialize_field("used_edges", &self.used_edges)?;
        st.end()
    }
}

/// Bits of `mask` in increasing order.
fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|&j| mask >> j & 1 == 1).collect()
}

/// Exact search over all partitions.
///
/// `Contains`: finds a partition maximizing the number of pairwise disjoint
/// d-cells that each contain an edge (stopping early at `n`). Returns
/// `None` only when no d-cell of any partition contains an edge.
///
/// `ContainedIn`: finds a partition all of whose cells lie in d-cells that
/// are contained in edges; with `minimize_h0` the number of distinct
/// witness edges is minimized over all partitions. Returns `None` if no
/// partition qualifies.
pub fn exhaustive_partition_search(
    h: &DIntervalHypergraph,
    n: usize,
    mode: PredicateMode,
    minimize_h0: bool,
    limits: &SearchLimits,
) -> Result<Option<PartitionCertificate>> {
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let d = h.d();
    if d * n > 63 {
        return Err(Error::ScaleGuard(format!("d*n = {} exceeds 63 cells", d * n)));
    }
    let tables = build_tables(h, n, mode, limits)?;
    // Deduplicate configurations by mask vector and order by how many edges
    // they admit, most first.
    let orders: Vec<Vec<usize>> = tables
        .iter()
        .map(|t| {
            let mut seen: HashSet<&Vec<u64>> = HashSet::new();
            let mut keep: Vec<usize> = (0..t.masks.len()).filter(|&c| seen.insert(&t.masks[c])).collect();
            keep.sort_by_key(|&c| {
                let admitted = t.masks[c].iter().filter(|&&m| m != 0).count();
                let bits: u32 = t.masks[c].iter().map(|m| m.count_ones()).sum();
                (std::cmp::Reverse(admitted), std::cmp::Reverse(bits), c)
            });
            keep
        })
        .collect();

    let lower_bound = match mode {
        PredicateMode::ContainedIn if minimize_h0 => {
            let f = atomize(h).hypergraph;
            exact_invariant(&f, Invariant::Rho, limits)
                .ok()
                .and_then(|r| r.value.finite())
                .unwrap_or(1)
        }
        _ => 0,
    };
    let mut search = Exhaustive {
        tables: &tables,
        orders: &orders,
        n,
        d,
        mode,
        minimize: minimize_h0,
        lower_bound,
        best: None,
        nodes: 0,
        limits,
    };
    let mut choice = Vec::with_capacity(d);
    let alive: Vec<(usize, u64)> = (0..h.len()).map(|e| (e, 0u64)).collect();
    search.rec(&mut choice, &alive)?;
    let Some((_, choice, keys)) = search.best else {
        return Ok(None);
    };
    let cuts = cut_system(&tables, &choice, n);
    let assignment = match mode {
        PredicateMode::ContainedIn => keys
            .iter()
            .flat_map(|&(key, e)| {
                let per_copy: Vec<Vec<usize>> =
                    (0..d).map(|i| bits(key >> (i * n) & ((1u64 << n) - 1))).collect();
                let len = per_copy.iter().map(Vec::len).max().unwrap_or(0);
                (0..len).map(move |k| {
                    let j = per_copy.iter().map(|b| b[k.min(b.len() - 1)]).collect();
                    (DCellIndex(j), e)
                }).collect::<Vec<_>>()
            })
            .collect(),
        PredicateMode::Contains => keys
            .iter()
            .map(|&(flat, _)| {
                let j = DCellIndex::from_flat(flat as usize, d, n);
                let e = dcell_predicate(&cuts, &j, h, mode).expect("chosen d-cell is witnessed");
                (j, e)
            })
            .collect(),
    };
    let certificate = PartitionCertificate::new(mode, cuts, assignment);
    debug_assert!(certificate.verify(h).is_ok());
    Ok(Some(certificate))
}

struct Exhaustive<'a> {
    tables: &'a [CopyTable],
    orders: &'a [Vec<usize>],
    n: usize,
    d: usize,
    mode: PredicateMode,
    minimize: bool,
    lower_bound: usize,
    /// (score, configuration choice, chosen keys with an edge id). Score is
    /// the matching size for `Contains` and `|H0|` for `ContainedIn`.
    best: Option<(usize, Vec<usize>, Vec<(u64, usize)>)>,
    nodes: u64,
    limits: &'a SearchLimits,
}

impl Exhaustive<'_> {
    fn finished(&self) -> bool {
        match (&self.best, self.mode) {
            (Some((score, ..)), PredicateMode::Contains) => *score >= self.n,
            (Some((score, ..)), PredicateMode::ContainedIn) => {
                !self.minimize || *score <= self.lower_bound
            }
            (None, _) => false,
        }
    }

    /// `alive` lists edges with a nonzero mask on every copy so far, with
    /// their packed masks.
    fn rec(&mut self, choice: &mut Vec<usize>, alive: &[(usize, u64)]) -> Result<()> {
        let level = choice.len();
        if level == self.d {
            return self.evaluate(choice, alive);
        }
        let table = &self.tables[level];
        for &c in &self.orders[level] {
            self.nodes += 1;
            if self.nodes > self.limits.max_nodes {
                return Err(Error::ScaleGuard(format!(
                    "partition search exceeded {} nodes",
                    self.limits.max_nodes
                )));
            }
            let next: Vec<(usize, u64)> = alive
                .iter()
                .filter_map(|&(e, key)| {
                    let m = table.masks[c][e];
                    (m != 0).then_some((e, key | m << (level * self.n)))
                })
                .collect();
            if next.is_empty() {
                continue;
            }
            choice.push(c);
            self.rec(choice, &next)?;
            choice.pop();
            if self.finished() {
                break;
            }
        }
        Ok(())
    }

    fn evaluate(&mut self, choice: &[usize], alive: &[(usize, u64)]) -> Result<()> {
        let mut keys: Vec<(u64, usize)> = alive.iter().map(|&(e, k)| (k, e)).collect();
        keys.sort_unstable();
        keys.dedup_by_key(|(k, _)| *k);
        let (d, n) = (self.d, self.n);
        let copy_mask = (1u64 << n) - 1;
        match self.mode {
            PredicateMode::Contains => {
                // d-cells containing an edge: union of the product sets.
                let total = n.pow(d as u32);
                let mut present = vec![false; total];
                for &(key, _) in &keys {
                    let per_copy: Vec<Vec<usize>> =
                        (0..d).map(|i| bits(key >> (i * n) & copy_mask)).collect();
                    for flat in 0..total {
                        let j = DCellIndex::from_flat(flat, d, n);
                        if j.0.iter().zip(&per_copy).all(|(ji, b)| b.contains(ji)) {
                            present[flat] = true;
                        }
                    }
                }
                let cells: Vec<DCellIndex> = (0..total)
                    .filter(|&f| present[f])
                    .map(|f| DCellIndex::from_flat(f, d, n))
                    .collect();
                let conflicts: Vec<FixedBitSet> = cells
                    .iter()
                    .map(|a| {
                        let mut row = FixedBitSet::with_capacity(cells.len());
                        for (l, b) in cells.iter().enumerate() {
                            if a != b && !a.is_disjoint(b) {
                                row.insert(l);
                            }
                        }
                        row
                    })
                    .collect();
                let matching = max_independent_set(&conflicts, Some(n), self.limits)?;
                let better = self.best.as_ref().is_none_or(|(s, ..)| matching.len() > *s);
                if better && !matching.is_empty() {
                    let chosen = matching
                        .iter()
                        .map(|&k| (cells[k].flat(n) as u64, 0))
                        .collect();
                    self.best = Some((matching.len(), choice.to_vec(), chosen));
                }
            }
            PredicateMode::ContainedIn => {
                let universe = d * n;
                let sets: Vec<FixedBitSet> = keys
                    .iter()
                    .map(|&(key, _)| {
                        let mut b = FixedBitSet::with_capacity(universe);
                        (0..universe).filter(|&t| key >> t & 1 == 1).for_each(|t| b.insert(t));
                        b
                    })
                    .collect();
                let cover = if self.minimize {
                    min_set_cover(universe, &sets, self.lower_bound, self.limits)?
                } else {
                    let mut union = FixedBitSet::with_capacity(universe);
                    sets.iter().for_each(|s| union.union_with(s));
                    (union.count_ones(..) == universe).then(|| greedy_cover(universe, &sets))
                };
                if let Some(cover) = cover {
                    let better = self.best.as_ref().is_none_or(|(s, ..)| cover.len() < *s);
                    if better {
                        let chosen = cover.iter().map(|&k| keys[k]).collect();
                        self.best = Some((cover.len(), choice.to_vec(), chosen));
                    }
                }
            }
        }
        Ok(())
    }
}
