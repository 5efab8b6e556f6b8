//! Structural invariants as property tests over small random classes.

use std::sync::Arc;

use num::Zero;
use proptest::prelude::*;
use scompress::bits::{index_width, BitString};
use scompress::dimensions::{graph_dimension, pseudo_dimension, verify_shattering, vc_dimension, Dimension};
use scompress::harness::corpus::{generate_entry, Generator};
use scompress::rational::{rat, Rational};
use scompress::reductions::multiclass::{inflate_class, reduce_general, reduce_stable};
use scompress::reductions::packing::{pack, unpack};
use scompress::reductions::regression::{class_leq, make_eps_grid, EpsGrid};
use scompress::reductions::robust::{is_robustly_realizable, PerturbationMap};
use scompress::schemes::{CompressionScheme, Registry};
use scompress::verify::{verify_stability, zero_one};
use scompress::{ConceptClass, FiniteDomain, LabelSpace, LabeledSample};

fn class_strategy(real: bool) -> impl Strategy<Value = ConceptClass> {
    (2usize..=5, 2u32..=4).prop_flat_map(move |(n, m)| {
        let size = if real { m + 1 } else { m };
        prop::collection::vec(prop::collection::vec(0..size, n), 1..12).prop_map(move |rows| {
            let labels = if real { LabelSpace::RealGrid(m) } else if m == 2 { LabelSpace::Binary } else { LabelSpace::Multiclass(m) };
            ConceptClass::from_rows_dedup(FiniteDomain::indexed(n).unwrap(), labels, rows).unwrap().0
        })
    })
}

/// A class with a realizable sample drawn from one of its concepts.
fn class_and_sample(real: bool) -> impl Strategy<Value = (ConceptClass, LabeledSample)> {
    class_strategy(real).prop_flat_map(|c| {
        let (n, k) = (c.domain().len(), c.len());
        (Just(c), 0..k, prop::collection::vec(0..n, 0..7)).prop_map(|(c, j, xs)| {
            let s = LabeledSample::new(xs.into_iter().map(|x| (x, c.label(j, x))).collect());
            (c, s)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_and_gamma_codes_roundtrip(values in prop::collection::vec(0usize..1000, 0..20)) {
        let mut b = BitString::new();
        for &v in &values {
            b.push_fixed(v, index_width(1000));
            b.push_gamma(v + 1);
        }
        let mut r = b.reader();
        for &v in &values {
            prop_assert_eq!(r.fixed(index_width(1000)).unwrap(), v);
            prop_assert_eq!(r.gamma().unwrap(), v + 1);
        }
        prop_assert!(r.finish().is_ok());
    }

    #[test]
    fn packing_roundtrips(groups in prop::collection::vec(1usize..4, 0..6), sub in prop::collection::vec(any::<bool>(), 0..9)) {
        let width = 2;
        let mut pairs = Vec::new();
        for (i, &g) in groups.iter().enumerate() {
            for j in 0..g {
                pairs.push((3 * i, j));
            }
        }
        let bits: BitString = sub.into_iter().collect();
        let packed = pack(&pairs, width, &bits);
        let (slots, back) = unpack(packed.kept.len(), width, &packed.bits).unwrap();
        let decoded: Vec<(usize, usize)> = slots.into_iter().map(|(slot, j)| (packed.kept[slot], j)).collect();
        prop_assert_eq!(decoded, pairs);
        prop_assert_eq!(back, bits);
    }

    #[test]
    fn duplicate_rows_are_rejected(c in class_strategy(false)) {
        let mut rows = c.table().to_vec();
        rows.push(rows[0].clone());
        prop_assert!(ConceptClass::from_rows(c.domain().clone(), c.labels(), rows).is_err());
    }

    #[test]
    fn inflated_class_has_one_true_label_per_point(c in class_strategy(false)) {
        let m = c.labels().size();
        let inflated = inflate_class(&c).unwrap();
        prop_assert_eq!(inflated.domain().len(), c.domain().len() * m);
        for k in 0..inflated.len() {
            for x in 0..c.domain().len() {
                let ones = (0..m).filter(|&y| inflated.label(k, x * m + y) == 1).count();
                prop_assert_eq!(ones, 1);
            }
        }
    }

    #[test]
    fn inflated_vc_equals_graph_dimension(c in class_strategy(false)) {
        let inflated = inflate_class(&c).unwrap();
        let g = graph_dimension(&c, c.domain().len()).unwrap();
        let v = vc_dimension(&inflated, inflated.domain().len()).unwrap();
        prop_assert!(g.exhaustive && v.exhaustive);
        prop_assert_eq!(g.value, v.value);
    }

    #[test]
    fn witnesses_certify_their_values(c in class_strategy(true)) {
        let n = c.domain().len();
        let g = graph_dimension(&c, n).unwrap();
        let p = pseudo_dimension(&c, n).unwrap();
        prop_assert!(verify_shattering(&c, Dimension::Graph, &g));
        prop_assert!(verify_shattering(&c, Dimension::Pseudo, &p));
    }

    #[test]
    fn threshold_class_is_monotone_and_matches_pseudo(c in class_strategy(true)) {
        let grid = EpsGrid::of_labels(c.labels()).unwrap();
        let leq = class_leq(&c, &grid).unwrap();
        let g = grid.len();
        for row in leq.class.table() {
            for x in 0..c.domain().len() {
                prop_assert!(row[x * g..(x + 1) * g].windows(2).all(|w| w[0] <= w[1]));
            }
        }
        let v = vc_dimension(&leq.class, leq.class.domain().len()).unwrap();
        prop_assert_eq!(v.value, pseudo_dimension(&c, c.domain().len()).unwrap().value);
    }

    #[test]
    fn eps_grids_cover_the_unit_interval(num in 1i64..8, den in 2i64..40) {
        prop_assume!(num < den);
        let eps = rat(num, den);
        let grid = make_eps_grid(eps).unwrap();
        let v = grid.values();
        prop_assert_eq!(v.first().copied(), Some(Rational::from_integer(0)));
        prop_assert_eq!(v.last().copied(), Some(Rational::from_integer(1)));
        prop_assert!(v.windows(2).all(|w| w[0] < w[1] && w[1] - w[0] <= eps));
    }

    #[test]
    fn perturbation_sets_contain_their_point(n in 1usize..12, m in 1usize..5) {
        let u = PerturbationMap::window(n, m);
        for x in 0..n {
            prop_assert!(u.get(x).contains(&x));
        }
        prop_assert_eq!(u.m(), (0..n).map(|x| u.get(x).len()).max().unwrap());
    }

    #[test]
    fn identity_perturbation_is_plain_realizability((c, s) in class_and_sample(false)) {
        let u = PerturbationMap::identity(c.domain().len());
        prop_assert_eq!(is_robustly_realizable(&c, &s, &u), c.first_consistent(&s.pairs));
    }

    #[test]
    fn reductions_output_subsequences_and_stay_consistent((c, s) in class_and_sample(false)) {
        let c = Arc::new(c);
        let inflated = Arc::new(inflate_class(&c).unwrap());
        let reg = Registry::default();
        let schemes: Vec<Box<dyn CompressionScheme>> = vec![
            Box::new(reduce_general(reg.build("proper", inflated.clone()).unwrap(), c.clone()).unwrap()),
            Box::new(reduce_general(reg.build("boost", inflated.clone()).unwrap(), c.clone()).unwrap()),
            Box::new(reduce_stable(reg.build("teach", inflated).unwrap(), c.clone()).unwrap()),
        ];
        for scheme in &schemes {
            let out = scheme.compress(&s).unwrap();
            prop_assert!(out.kept.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(out.kept.iter().all(|&i| i < s.len()));
            prop_assert_eq!(out.size(), out.kept.len() + out.compressed.bits.len());
            let p = scheme.reconstruct(&out.compressed).unwrap();
            prop_assert_eq!(p.domain_len(), c.domain().len());
            prop_assert!(zero_one(&s, &p).unwrap().is_zero());
            prop_assert_eq!(scheme.reconstruct(&out.compressed).unwrap(), p);
        }
    }

    #[test]
    fn stable_reduction_is_stable((c, s) in class_and_sample(false), seed in any::<u64>()) {
        let c = Arc::new(c);
        let inflated = Arc::new(inflate_class(&c).unwrap());
        let scheme = reduce_stable(Registry::default().build("teach", inflated).unwrap(), c).unwrap();
        prop_assert!(verify_stability(&scheme, &s, seed).unwrap().passed);
    }

    #[test]
    fn corpus_entries_are_deterministic(seed in any::<u64>(), index in 0usize..50) {
        let g = Generator::RandomMulticlass { n: 5, m: 3, rows: 8 };
        let a = generate_entry(seed, index, &g).unwrap();
        let b = generate_entry(seed, index, &g).unwrap();
        prop_assert_eq!(a.total().unwrap().table(), b.total().unwrap().table());
    }
}
