//! Generators and verifiers for the concrete constructions: the tight
//! family for `ρ ≤ dι`, the `d = 2` family with `ρ = n`, the `d = 3`
//! family with `ρ = 3 > n = 2`, and a dense grid used to exercise the
//! matching pipeline.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gallai1d::gallai_cover;
use crate::geometry::{DIntervalHypergraph, Interval, PredicateMode};
use crate::invariants::{atomize, exact_invariant, IntegerValue, Invariant, SearchLimits};
use crate::partitions::premise_check;
use crate::rational::Rational;

/// Largest edge count `generate` agrees to build.
pub const MAX_FAMILY_EDGES: usize = 100_000;

/// Number of edges of [`FamilySpec::Example2`]; fixed by direct enumeration.
pub const EXAMPLE2_EDGES: usize = 2392;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `J^i_j ∪ ⋃_{i' ≠ i} K^{i'}_{k_{i'}}`: `ι = n`, `ρ = dn`.
    Obs3 { d: usize, n: usize },
    /// `d = 2`, edges `J^1_k ∪ J^2_l`: `ρ = n`.
    Example1 { n: usize },
    /// `d = 3`, `n = 2`: `ρ = 3`.
    Example2,
    /// All products of `[k/parts, (k+1)/parts]` over `d` copies.
    DenseGrid { d: usize, parts: usize },
}

impl FamilySpec {
    pub fn d(&self) -> usize {
        match *self {
            FamilySpec::Obs3 { d, .. } | FamilySpec::DenseGrid { d, .. } => d,
            FamilySpec::Example1 { .. } => 2,
            FamilySpec::Example2 => 3,
        }
    }

    /// The partition size the construction is about, if any.
    pub fn n(&self) -> Option<usize> {
        match *self {
            FamilySpec::Obs3 { n, .. } | FamilySpec::Example1 { n } => Some(n),
            FamilySpec::Example2 => Some(2),
            FamilySpec::DenseGrid { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FamilySpec::Obs3 { d, n } => {
                if d < 2 || n < 1 {
                    return Err(Error::invalid("obs3", "needs d >= 2 and n >= 1"));
                }
                let count = (d * n)
                    .checked_pow(2 * (d as u32 - 1))
                    .and_then(|p| p.checked_mul(d * n));
                if count.is_none_or(|c| c > MAX_FAMILY_EDGES) {
                    return Err(Error::ScaleGuard(format!(
                        "obs3 with d = {d}, n = {n} has more than {MAX_FAMILY_EDGES} edges"
                    )));
                }
            }
            FamilySpec::Example1 { n } => {
                if n < 1 {
                    return Err(Error::invalid("example1", "needs n >= 1"));
                }
            }
            FamilySpec::Example2 => {}
            FamilySpec::DenseGrid { d, parts } => {
                if d < 1 || parts < 1 {
                    return Err(Error::invalid("dense_grid", "needs d >= 1 and parts >= 1"));
                }
                if parts.checked_pow(d as u32).is_none_or(|c| c > MAX_FAMILY_EDGES) {
                    return Err(Error::ScaleGuard(format!(
                        "dense grid with d = {d}, parts = {parts} is too large"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Obs3 { d, n } => write!(f, "obs3(d={d}, n={n})"),
            FamilySpec::Example1 { n } => write!(f, "example1(n={n})"),
            FamilySpec::Example2 => write!(f, "example2"),
            FamilySpec::DenseGrid { d, parts } => write!(f, "dense_grid(d={d}, parts={parts})"),
        }
    }
}

/// Family names accepted on the command line.
impl FromStr for FamilySpec {
    type Err = Error;

    /// Parses the bare name with default parameters; callers fill them in.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "obs3" => Ok(FamilySpec::Obs3 { d: 2, n: 1 }),
            "example1" => Ok(FamilySpec::Example1 { n: 2 }),
            "example2" => Ok(FamilySpec::Example2),
            "dense-grid" | "dense_grid" => Ok(FamilySpec::DenseGrid { d: 2, parts: 8 }),
            other => Err(Error::invalid("family", format!("unknown family {other:?}"))),
        }
    }
}

fn r(p: usize, q: usize) -> Rational {
    Rational::new(p as i64, q as i64)
}

/// `[(j-1)/n, j/n]` for `j = 1..=n`, 0-based here.
fn unit_piece(j: usize, n: usize) -> Interval {
    Interval::new(r(j, n), r(j + 1, n)).expect("ordered")
}

/// All tuples in `0..base` of length `len`, lexicographic.
fn tuples(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..base).map(move |k| {
                    let mut t = t.clone();
                    t.push(k);
                    t
                })
            })
            .collect();
    }
    out
}

/// One edge of the `d = 3` construction: `v_i` picks the end of `U^i`
/// and `ℓ_i` (in 24ths) the length of the interval at that end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Example2Edge {
    pub v: [u8; 3],
    pub ell: [u8; 3],
}

impl Example2Edge {
    /// `[0, ℓ]` for `v = 0`, `[1 - ℓ, 1]` for `v = 1`.
    pub fn interval(&self, i: usize) -> Interval {
        let len = r(self.ell[i] as usize, 24);
        if self.v[i] == 0 {
            Interval::new(Rational::zero(), len).expect("ordered")
        } else {
            Interval::new(Rational::one() - len, Rational::one()).expect("ordered")
        }
    }

    /// Whether `v` has at most one coordinate equal to 1.
    pub fn is_class_a(&self) -> bool {
        self.v.iter().filter(|&&b| b == 1).count() <= 1
    }
}

/// The admissible `(v, ℓ)`: class A (`v` with at most one 1) with
/// `Σℓ = 47/24`, class B (at least two 1s) with `Σℓ = 1`, `ℓ_i ∈ {0, .., 23}/24`.
pub fn example2_edges() -> Vec<Example2Edge> {
    let mut out = Vec::new();
    for v in tuples(2, 3) {
        let v = [v[0] as u8, v[1] as u8, v[2] as u8];
        let total = if v.iter().filter(|&&b| b == 1).count() <= 1 { 47 } else { 24 };
        for ell in tuples(24, 3) {
            if ell.iter().sum::<usize>() == total {
                out.push(Example2Edge { v, ell: [ell[0] as u8, ell[1] as u8, ell[2] as u8] });
            }
        }
    }
    out
}

/// Builds the d-interval hypergraph of a family; edge ids follow the
/// enumeration order.
pub fn generate(spec: &FamilySpec) -> Result<DIntervalHypergraph> {
    spec.validate()?;
    let parts: Vec<Vec<Interval>> = match *spec {
        FamilySpec::Obs3 { d, n } => {
            let fine = (d * n) * (d * n);
            let mut edges = Vec::new();
            for i in 0..d {
                for j in 0..n {
                    for ks in tuples(fine, d - 1) {
                        let mut ks = ks.into_iter();
                        edges.push(
                            (0..d)
                                .map(|c| {
                                    if c == i {
                                        unit_piece(j, n)
                                    } else {
                                        unit_piece(ks.next().expect("d - 1 indices"), fine)
                                    }
                                })
                                .collect(),
                        );
                    }
                }
            }
            edges
        }
        FamilySpec::Example1 { n } => tuples(n, 2)
            .into_iter()
            .map(|t| vec![unit_piece(t[0], n), unit_piece(t[1], n)])
            .collect(),
        FamilySpec::Example2 => example2_edges()
            .iter()
            .map(|e| (0..3).map(|i| e.interval(i)).collect())
            .collect(),
        FamilySpec::DenseGrid { d, parts } => tuples(parts, d)
            .into_iter()
            .map(|t| t.into_iter().map(|k| unit_piece(k, parts)).collect())
            .collect(),
    };
    DIntervalHypergraph::from_parts(spec.d(), parts)
}

/// One checked claim.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub claim: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

impl Check {
    fn new(claim: impl Into<String>, expected: impl fmt::Display, actual: impl fmt::Display) -> Self {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        Check { claim: claim.into(), passed: expected == actual, expected, actual }
    }

    fn holds(claim: impl Into<String>, passed: bool) -> Self {
        Check { claim: claim.into(), expected: "true".into(), actual: passed.to_string(), passed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub spec: FamilySpec,
    pub edge_count: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl FamilyReport {
    /// The failed checks as an error naming each violated claim.
    pub fn into_result(self) -> Result<FamilyReport> {
        if self.passed {
            return Ok(self);
        }
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: expected {}, got {}", c.claim, c.expected, c.actual))
            .collect();
        Err(Error::BoundViolation(format!("{}: {}", self.spec, failed.join("; "))))
    }
}

fn exact(h: &DIntervalHypergraph, which: Invariant, limits: &SearchLimits) -> Result<IntegerValue> {
    let atoms = atomize(h);
    Ok(exact_invariant(&atoms.hypergraph, which, limits)?.value)
}

/// Re-derives every numeric claim about a family with exact arithmetic.
pub fn verify(spec: &FamilySpec, limits: &SearchLimits) -> Result<FamilyReport> {
    let h = generate(spec)?;
    let mut checks = Vec::new();
    match *spec {
        FamilySpec::Obs3 { d, n } => {
            let iota = exact(&h, Invariant::Iota, limits)?;
            let rho = exact(&h, Invariant::Rho, limits)?;
            checks.push(Check::new("iota = n", n, iota));
            checks.push(Check::new("rho = d n", d * n, rho));
            let dn = d * n;
            let edge_len = r(d * d * n + d - 1, dn * dn);
            checks.push(Check::holds(
                "every edge has length (d^2 n + d - 1) / (dn)^2",
                h.edges().iter().all(|e| e.length() == edge_len),
            ));
            let total = &edge_len * &Rational::from(dn - 1);
            checks.push(Check::holds("dn - 1 edges have total length < d", total < Rational::from(d)));
            // One Gallai cover per copy; together they cover every copy.
            let mut union: Vec<usize> = Vec::new();
            for i in 0..d {
                let cover = gallai_cover(&h.restrict_to_copy(i))?;
                checks.push(Check::holds(format!("copy {} is covered", i + 1), !cover.infinite));
                union.extend(cover.cover);
            }
            union.sort_unstable();
            union.dedup();
            let bound = iota.finite().map(|v| d * v);
            checks.push(Check::holds(
                "per-copy covers give rho <= d iota",
                bound.is_some_and(|b| union.len() <= b),
            ));
        }
        FamilySpec::Example1 { n } => {
            let premise = premise_check(&h, n, PredicateMode::ContainedIn, limits)?;
            checks.push(Check::holds("premise holds for n-partitions (contained)", premise.holds));
            checks.push(Check::new("rho = n", n, exact(&h, Invariant::Rho, limits)?));
        }
        FamilySpec::Example2 => {
            checks.push(Check::new("edge count", EXAMPLE2_EDGES, h.len()));
            let premise = premise_check(&h, 2, PredicateMode::ContainedIn, limits)?;
            checks.push(Check::holds("premise holds for 2-partitions (contained)", premise.holds));
            checks.push(Check::holds(
                "premise holds on the 1/48 grid (closed form)",
                example2_grid_premise(),
            ));
            checks.push(Check::new("rho = 3", 3, exact(&h, Invariant::Rho, limits)?));
            let (pairs, ok) = example2_antipodal_lengths(&h);
            checks.push(Check::holds(
                format!("all {pairs} antipodal pairs have total length 71/24"),
                ok,
            ));
        }
        FamilySpec::DenseGrid { d, parts } => {
            checks.push(Check::new("edge count", parts.pow(d as u32), h.len()));
            checks.push(Check::new("rho", parts, exact(&h, Invariant::Rho, limits)?));
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(FamilyReport { spec: *spec, edge_count: h.len(), checks, passed })
}

/// Every pair of edges with complementary `v` has total length `71/24`.
/// Returns the number of pairs checked.
fn example2_antipodal_lengths(h: &DIntervalHypergraph) -> (usize, bool) {
    let meta = example2_edges();
    let lengths: Vec<Rational> = h.edges().iter().map(|e| e.length()).collect();
    let target = r(71, 24);
    let mut pairs = 0;
    let mut ok = true;
    for (a, ea) in meta.iter().enumerate() {
        if !ea.is_class_a() {
            continue;
        }
        let anti = ea.v.map(|b| 1 - b);
        for (b, eb) in meta.iter().enumerate() {
            if eb.v == anti {
                pairs += 1;
                ok &= &lengths[a] + &lengths[b] == target;
            }
        }
    }
    (pairs, ok)
}

/// Decides the 2-partition premise of the `d = 3` construction from its
/// definition, without the configuration machinery: at cuts `c_i = k_i/48`
/// the 3-cell picked by `v` has lengths `c_i` (`v_i = 0`) or `1 - c_i`,
/// and lies in an edge iff the nonempty lengths, rounded up to 24ths, fit
/// one class's length budget. All endpoints are multiples of 1/24, so the
/// 1/48 grid meets every cut configuration.
pub fn example2_grid_premise() -> bool {
    // Lengths in 48ths; edge lengths are even.
    let ceil_even = |l: usize| l + l % 2;
    (0..=48usize).all(|k1| {
        (0..=48usize).all(|k2| {
            (0..=48usize).all(|k3| {
                let k = [k1, k2, k3];
                (0..8u8).any(|bits| {
                    let v: Vec<usize> = (0..3).map(|i| usize::from(bits >> i & 1)).collect();
                    let lens: Vec<usize> = (0..3).map(|i| if v[i] == 0 { k[i] } else { 48 - k[i] }).collect();
                    let need: Vec<usize> = lens.iter().map(|&l| ceil_even(l)).collect();
                    if need.iter().any(|&l| l > 46) {
                        return false;
                    }
                    // Empty coordinates accept either end, so the class is
                    // decided by the nonempty ones.
                    let fixed_ones = (0..3).filter(|&i| lens[i] > 0 && v[i] == 1).count();
                    let free = (0..3).filter(|&i| lens[i] == 0).count();
                    let sum: usize = need.iter().sum();
                    let class_a = fixed_ones <= 1 && sum <= 94;
                    let class_b = fixed_ones + free >= 2 && sum <= 48;
                    class_a || class_b
                })
            })
        })
    })
}
