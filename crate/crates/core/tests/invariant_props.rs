mod common;

use common::*;
use dihg_core::invariants::{atomize, exact_invariant, lp_fractional, Fractional, Invariant};
use dihg_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Candidate points per copy: endpoints, 0, 1 and midpoints between them.
fn candidates(h: &DIntervalHypergraph) -> Vec<(usize, Rational)> {
    let mut out = Vec::new();
    for i in 0..h.d() {
        let mut vals = vec![Rational::zero(), Rational::one()];
        for e in h.edges() {
            vals.push(e.parts[i].lo.clone());
            vals.push(e.parts[i].hi.clone());
        }
        vals.sort();
        vals.dedup();
        for w in vals.windows(2) {
            out.push((i, (&w[0] + &w[1]) / Rational::from(2i64)));
        }
        out.extend(vals.into_iter().map(|v| (i, v)));
    }
    out
}

fn inside(h: &DIntervalHypergraph, e: usize, p: &(usize, Rational)) -> bool {
    h.edge(e).parts[p.0].contains_point(&p.1)
}

fn combos(m: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << m).filter(|s| s.count_ones() as usize == k).map(|s| (0..m).filter(|&b| s >> b & 1 == 1).collect()).collect()
}

/// `(ν, τ, ι, ρ)` by geometric brute force; `None` for infinite.
fn brute(h: &DIntervalHypergraph) -> [Option<usize>; 4] {
    let m = h.len();
    let pts = candidates(h);
    let nu = (0..=m).rev().find(|&k| {
        combos(m, k).iter().any(|s| s.iter().enumerate().all(|(a, &x)| s[a + 1..].iter().all(|&y| !h.edge(x).intersects(h.edge(y)))))
    });
    let tau = (0..=pts.len()).find(|&k| combos(pts.len(), k).iter().any(|s| (0..m).all(|e| s.iter().any(|&p| inside(h, e, &pts[p])))));
    let uncovered = pts.iter().any(|p| (0..m).all(|e| !inside(h, e, p)));
    let (iota, rho) = if uncovered {
        (None, None)
    } else {
        let iota = (1..=pts.len()).rev().find(|&k| {
            combos(pts.len(), k).iter().any(|s| (0..m).all(|e| s.iter().filter(|&&p| inside(h, e, &pts[p])).count() <= 1))
        });
        let rho = (1..=m).find(|&k| combos(m, k).iter().any(|s| pts.iter().all(|p| s.iter().any(|&e| inside(h, e, p)))));
        (iota, rho)
    };
    [nu, tau, iota, rho]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn atomization_preserves_invariants(seed in any::<u64>(), d in 1usize..3, m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_dinterval(&mut rng, d, m, 4);
        let f = atomize(&h).hypergraph;
        let limits = SearchLimits::default();
        let exact: Vec<Option<usize>> = Invariant::ALL
            .iter()
            .map(|&w| exact_invariant(&f, w, &limits).unwrap().value.finite())
            .collect();
        prop_assert_eq!(exact, brute(&h).to_vec());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn integer_and_fractional_values_interleave(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_finite(&mut rng, 9, 10, 4);
        let limits = SearchLimits::default();
        let int = |w| exact_invariant(&f, w, &limits).unwrap().value.finite();
        let frac = |k| lp_fractional(&f, k).value;
        let (nu, tau) = (int(Invariant::Nu).unwrap(), int(Invariant::Tau).unwrap());
        let (nu_s, tau_s) = (frac(Fractional::NuStar).unwrap(), frac(Fractional::TauStar).unwrap());
        prop_assert!(Rational::from(nu) <= nu_s && nu_s == tau_s && tau_s <= Rational::from(tau));
        prop_assert_eq!(nu, brute_nu(&f));
        match (int(Invariant::Iota), int(Invariant::Rho), frac(Fractional::IotaStar), frac(Fractional::RhoStar)) {
            (Some(iota), Some(rho), Some(iota_s), Some(rho_s)) => {
                prop_assert!(Rational::from(iota) <= iota_s && iota_s == rho_s && rho_s <= Rational::from(rho));
                prop_assert_eq!(Some(rho), brute_rho(&f));
                // Greedy-cover bound on the exact optimum.
                let bound = (1.0 + (f.rank() as f64).ln()) * rho_s.to_f64();
                prop_assert!(rho as f64 <= bound + 1e-9);
            }
            (None, None, None, None) => prop_assert!(!f.uncovered_vertices().is_empty()),
            other => prop_assert!(false, "mixed finiteness {:?}", other),
        }
    }

    #[test]
    fn dpartite_matching_bound(seed in any::<u64>(), d in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes: Vec<usize> = (0..d).map(|k| 1 + (seed as usize >> (4 * k)) % 4).collect();
        let f = random_dpartite(&mut rng, &sizes, 1 + seed as usize % 12);
        let nu = exact_invariant(&f, Invariant::Nu, &SearchLimits::default()).unwrap().value.finite().unwrap();
        let nu_s = lp_fractional(&f, Fractional::NuStar).value.unwrap();
        prop_assert!(Rational::from(nu * (d - 1)) >= nu_s);
    }
}
