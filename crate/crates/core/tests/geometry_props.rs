mod common;

use common::*;
use dihg_core::io::{hypergraph_to_json, parse_hypergraph};
use dihg_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cut_system() -> impl Strategy<Value = CutSystem> {
    (1usize..4, 1usize..5).prop_flat_map(|(d, n)| {
        proptest::collection::vec(proptest::collection::vec(0i64..=48, n - 1), d).prop_map(move |rows| {
            let cuts = rows
                .into_iter()
                .map(|mut row| {
                    row.sort_unstable();
                    row.into_iter().map(|k| r(k, 48)).collect()
                })
                .collect();
            CutSystem::new(n, cuts).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn cuts_and_points_round_trip(c in cut_system()) {
        let x = point_from_cuts(&c);
        prop_assert_eq!(&cuts_from_point(&x), &c);
        prop_assert_eq!(point_from_cuts(&cuts_from_point(&x)), x.clone());
        for block in x.coords() {
            prop_assert_eq!(block.iter().sum::<Rational>(), Rational::one());
        }
        prop_assert_eq!(DCellIndex::all(c.d(), c.n()).count(), c.n().pow(c.d() as u32));
    }

    #[test]
    fn flat_index_round_trip(d in 1usize..4, n in 1usize..5, seed in any::<u64>()) {
        let flat = (seed as usize) % n.pow(d as u32);
        prop_assert_eq!(DCellIndex::from_flat(flat, d, n).flat(n), flat);
    }

    #[test]
    fn rationals_print_and_parse(p in -1000i64..1000, q in 1i64..1000) {
        let x = r(p, q);
        prop_assert_eq!(x.to_string().parse::<Rational>().unwrap(), x.clone());
        let json = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rational>(&json).unwrap(), x);
    }

    #[test]
    fn hypergraph_json_round_trip(seed in any::<u64>(), d in 1usize..4, m in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_dinterval(&mut rng, d, m, 12);
        let text = hypergraph_to_json(&h);
        let back = parse_hypergraph(&text).unwrap();
        prop_assert_eq!(hypergraph_to_json(&back), text);
    }
}

#[test]
fn parser_rejects_bad_files() {
    let bad = [
        r#"{"d": 1, "edges": [{"id": 0, "parts": [{"copy": 1, "lo": "3/4", "hi": "1/4"}]}]}"#,
        r#"{"d": 2, "edges": [{"id": 0, "parts": [{"copy": 1, "lo": "0", "hi": "1"}]}]}"#,
        r#"{"d": 1, "edges": [{"id": 0, "parts": [{"copy": 2, "lo": "0", "hi": "1"}]}]}"#,
        r#"{"d": 1, "edges": [{"id": 0, "parts": [{"copy": 1, "lo": "0", "hi": "x"}]}]}"#,
    ];
    for text in bad {
        assert!(parse_hypergraph(text).is_err(), "{text}");
    }
}
