//! Bitset branch-and-bound for minimum set cover and maximum independent set.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Refusal thresholds for the exact searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub max_nodes: u64,
    /// Cap on cut configurations enumerated per copy.
    pub max_configurations: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_vertices: 4096,
            max_edges: 1 << 16,
            max_nodes: 50_000_000,
            max_configurations: 1_000_000,
        }
    }
}

fn bitset_from(len: usize, items: impl IntoIterator<Item = usize>) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(len);
    for i in items {
        b.insert(i);
    }
    b
}

/// Minimum number of `sets` whose union is `0..universe`.
///
/// Returns `Ok(None)` if the sets do not cover the universe. `lower_bound`
/// is a known lower bound on the optimum; the search stops once an
/// incumbent reaches it.
pub fn min_set_cover(
    universe: usize,
    sets: &[FixedBitSet],
    lower_bound: usize,
    limits: &SearchLimits,
) -> Result<Option<Vec<usize>>> {
    if universe == 0 {
        return Ok(Some(Vec::new()));
    }
    let mut union = FixedBitSet::with_capacity(universe);
    for s in sets {
        union.union_with(s);
    }
    if union.count_ones(..) < universe {
        return Ok(None);
    }

    // Drop sets contained in another set (ties keep the lowest index).
    let mut order: Vec<usize> = (0..sets.len()).filter(|&s| sets[s].count_ones(..) > 0).collect();
    order.sort_by_key(|&s| (std::cmp::Reverse(sets[s].count_ones(..)), s));
    let mut kept: Vec<usize> = Vec::new();
    for &s in &order {
        if !kept.iter().any(|&k| sets[s].is_subset(&sets[k])) {
            kept.push(s);
        }
    }

    // Drop elements whose covering sets are a superset of another element's.
    let membership: Vec<FixedBitSet> = (0..universe)
        .map(|u| bitset_from(kept.len(), (0..kept.len()).filter(|&k| sets[kept[k]].contains(u))))
        .collect();
    let mut elements: Vec<usize> = (0..universe).collect();
    elements.sort_by_key(|&u| (membership[u].count_ones(..), u));
    let mut essential: Vec<usize> = Vec::new();
    for &u in &elements {
        if !essential.iter().any(|&v| membership[v].is_subset(&membership[u])) {
            essential.push(u);
        }
    }

    let m = essential.len();
    let reduced: Vec<FixedBitSet> = kept
        .iter()
        .map(|&s| bitset_from(m, (0..m).filter(|&e| sets[s].contains(essential[e]))))
        .collect();
    let element_sets: Vec<Vec<usize>> = (0..m)
        .map(|e| (0..reduced.len()).filter(|&s| reduced[s].contains(e)).collect())
        .collect();

    let mut search = CoverSearch {
        sets: &reduced,
        element_sets: &element_sets,
        best: greedy_cover(m, &reduced),
        lower_bound: lower_bound.max(1),
        nodes: 0,
        limits,
    };
    let mut uncovered = FixedBitSet::with_capacity(m);
    uncovered.insert_range(..);
    let mut chosen = Vec::new();
    search.dfs(&uncovered, &mut chosen)?;
    let mut result: Vec<usize> = search.best.iter().map(|&s| kept[s]).collect();
    result.sort_unstable();
    Ok(Some(result))
}

/// Greedy cover: repeatedly take the set covering most uncovered elements,
/// lowest index on ties. Assumes the sets cover the universe.
pub fn greedy_cover(universe: usize, sets: &[FixedBitSet]) -> Vec<usize> {
    let mut uncovered = FixedBitSet::with_capacity(universe);
    uncovered.insert_range(..);
    let mut chosen = Vec::new();
    while uncovered.count_ones(..) > 0 {
        let (best, gain) = sets
            .iter()
            .enumerate()
            .map(|(s, set)| (s, set.intersection_count(&uncovered)))
            .fold((usize::MAX, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if gain == 0 {
            break;
        }
        chosen.push(best);
        uncovered.difference_with(&sets[best]);
    }
    chosen
}

struct CoverSearch<'a> {
    sets: &'a [FixedBitSet],
    element_sets: &'a [Vec<usize>],
    best: Vec<usize>,
    lower_bound: usize,
    nodes: u64,
    limits: &'a SearchLimits,
}

impl CoverSearch<'_> {
    fn done(&self) -> bool {
        self.best.len() <= self.lower_bound
    }

    fn dfs(&mut self, uncovered: &FixedBitSet, chosen: &mut Vec<usize>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::ScaleGuard(format!(
                "set cover search exceeded {} nodes",
                self.limits.max_nodes
            )));
        }
        let remaining = uncovered.count_ones(..);
        if remaining == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return Ok(());
        }
        if chosen.len() + 1 >= self.best.len() {
            return Ok(());
        }
        let max_gain = self
            .sets
            .iter()
            .map(|s| s.intersection_count(uncovered))
            .max()
            .unwrap_or(0);
        if max_gain == 0 || chosen.len() + remaining.div_ceil(max_gain) >= self.best.len() {
            return Ok(());
        }
        // Branch on the uncovered element with the fewest covering sets.
        let pivot = uncovered
            .ones()
            .min_by_key(|&e| (self.element_sets[e].len(), e))
            .expect("nonempty");
        let mut candidates: Vec<(usize, usize)> = self.element_sets[pivot]
            .iter()
            .map(|&s| (s, self.sets[s].intersection_count(uncovered)))
            .collect();
        candidates.sort_by_key(|&(s, gain)| (std::cmp::Reverse(gain), s));
        for (s, _) in candidates {
            let mut next = uncovered.clone();
            next.difference_with(&self.sets[s]);
            chosen.push(s);
            self.dfs(&next, chosen)?;
            chosen.pop();
            if self.done() {
                break;
            }
        }
        Ok(())
    }
}

/// Maximum independent set of the graph given by adjacency bitsets.
///
/// Runs a maximum-clique search with greedy-colouring bounds on the
/// complement graph. Stops early once `upper_bound` is reached.
pub fn max_independent_set(
    adjacency: &[FixedBitSet],
    upper_bound: Option<usize>,
    limits: &SearchLimits,
) -> Result<Vec<usize>> {
    let n = adjacency.len();
    let complement: Vec<FixedBitSet> = (0..n)
        .map(|v| {
            let mut c = adjacency[v].clone();
            c.toggle_range(..);
            c.set(v, false);
            c
        })
        .collect();
    let mut search = CliqueSearch {
        graph: &complement,
        best: Vec::new(),
        upper_bound: upper_bound.unwrap_or(n),
        nodes: 0,
        limits,
    };
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    let mut current = Vec::new();
    if n > 0 {
        search.expand(&mut current, all)?;
    }
    let mut best = search.best;
    best.sort_unstable();
    Ok(best)
}

struct CliqueSearch<'a> {
    graph: &'a [FixedBitSet],
    best: Vec<usize>,
    upper_bound: usize,
    nodes: u64,
    limits: &'a SearchLimits,
}

impl CliqueSearch<'_> {
    /// Greedy sequential colouring; returns vertices with their colour
    /// number, nondecreasing in colour.
    fn colour(&self, candidates: &FixedBitSet) -> Vec<(usize, usize)> {
        let mut uncoloured = candidates.clone();
        let mut out = Vec::with_capacity(candidates.count_ones(..));
        let mut colour = 0;
        while uncoloured.count_ones(..) > 0 {
            colour += 1;
            let mut class = uncoloured.clone();
            while let Some(v) = class.ones().next() {
                out.push((v, colour));
                uncoloured.set(v, false);
                class.set(v, false);
                class.difference_with(&self.graph[v]);
            }
        }
        out
    }

    fn expand(&mut self, current: &mut Vec<usize>, mut candidates: FixedBitSet) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::ScaleGuard(format!(
                "independent set search exceeded {} nodes",
                self.limits.max_nodes
            )));
        }
        let coloured = self.colour(&candidates);
        for &(v, colour) in coloured.iter().rev() {
            if current.len() + colour <= self.best.len() || self.best.len() >= self.upper_bound {
                return Ok(());
            }
            current.push(v);
            let mut next = candidates.clone();
            next.intersect_with(&self.graph[v]);
            if next.count_ones(..) == 0 {
                if current.len() > self.best.len() {
                    self.best = current.clone();
                }
            } else {
                self.expand(current, next)?;
            }
            current.pop();
            candidates.set(v, false);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(universe: usize, lists: &[&[usize]]) -> Vec<FixedBitSet> {
        lists.iter().map(|l| bitset_from(universe, l.iter().copied())).collect()
    }

    fn brute_cover(universe: usize, sets: &[FixedBitSet]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for mask in 0u32..(1 << sets.len()) {
            let mut u = FixedBitSet::with_capacity(universe);
            for (s, set) in sets.iter().enumerate() {
                if mask & (1 << s) != 0 {
                    u.union_with(set);
                }
            }
            if u.count_ones(..) == universe {
                let k = mask.count_ones() as usize;
                best = Some(best.map_or(k, |b| b.min(k)));
            }
        }
        best
    }

    #[test]
    fn set_cover_small_cases() {
        let limits = SearchLimits::default();
        let s = sets(6, &[&[0, 1, 2], &[3, 4, 5], &[0, 3], &[1, 4], &[2, 5]]);
        assert_eq!(min_set_cover(6, &s, 0, &limits).unwrap().unwrap(), vec![0, 1]);
        let s = sets(3, &[&[0, 1], &[2]]);
        assert_eq!(min_set_cover(4, &s, 0, &limits).unwrap(), None);
        assert_eq!(min_set_cover(0, &[], 0, &limits).unwrap(), Some(vec![]));
    }

    #[test]
    fn set_cover_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let limits = SearchLimits::default();
        for _ in 0..200 {
            let universe = rng.gen_range(1..9);
            let count = rng.gen_range(1..10);
            let s: Vec<FixedBitSet> = (0..count)
                .map(|_| bitset_from(universe, (0..universe).filter(|_| rng.gen_bool(0.35))))
                .collect();
            let got = min_set_cover(universe, &s, 0, &limits).unwrap();
            assert_eq!(got.as_ref().map(Vec::len), brute_cover(universe, &s));
            if let Some(cover) = got {
                let mut u = FixedBitSet::with_capacity(universe);
                for &k in &cover {
                    u.union_with(&s[k]);
                }
                assert_eq!(u.count_ones(..), universe);
            }
        }
    }

    #[test]
    fn independent_set_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let limits = SearchLimits::default();
        for _ in 0..200 {
            let n = rng.gen_range(0..11);
            let mut adj = vec![FixedBitSet::with_capacity(n); n];
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        adj[u].insert(v);
                        adj[v].insert(u);
                    }
                }
            }
            let got = max_independent_set(&adj, None, &limits).unwrap();
            for (k, &u) in got.iter().enumerate() {
                for &v in &got[k + 1..] {
                    assert!(!adj[u].contains(v));
                }
            }
            let brute = (0u32..(1 << n))
                .filter(|mask| {
                    (0..n).all(|u| {
                        mask & (1 << u) == 0 || adj[u].ones().all(|v| mask & (1 << v) == 0)
                    })
                })
                .map(|m| m.count_ones() as usize)
                .max()
                .unwrap_or(0);
            assert_eq!(got.len(), brute);
        }
    }

    #[test]
    fn node_guard_refuses() {
        let limits = SearchLimits { max_nodes: 1, ..SearchLimits::default() };
        let adj = vec![FixedBitSet::with_capacity(3); 3];
        assert!(matches!(max_independent_set(&adj, None, &limits), Err(Error::ScaleGuard(_))));
    }
}
