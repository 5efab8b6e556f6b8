//! Robust realizability, the twin construction and the one-inclusion graph.

use std::sync::Arc;

use scompress::bits::index_width;
use scompress::concepts::PartialClass;
use scompress::dimensions::partial_vc_dimension;
use scompress::harness::corpus::{generate_entry, CorpusClass, Generator};
use scompress::reductions::robust::{
    inflate_robust, is_robustly_realizable, oig_predict, reduce_robust, robustly_consistent, twin_class, OneInclusionGraph, PerturbationMap,
};
use scompress::schemes::{CompressionScheme, Registry};
use scompress::{ConceptClass, Error, FiniteDomain, LabelSpace, LabeledSample};

fn tree(depth: u32) -> (Arc<ConceptClass>, PerturbationMap, Arc<PartialClass>) {
    let g = Generator::TwinFromPartial { spec: Box::new(Generator::TreePartial { depth }) };
    match generate_entry(7, 0, &g).unwrap().class {
        CorpusClass::Twin { class, perturb, source } => (class, perturb, source),
        _ => unreachable!(),
    }
}

/// Every sample of up to `len` distinct points with arbitrary labels.
fn all_samples(n: usize, len: usize) -> Vec<LabeledSample> {
    let mut out = vec![LabeledSample::default()];
    let mut frontier = out.clone();
    for _ in 0..len {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.pairs.last().map_or(0, |p| p.0 + 1);
            for x in start..n {
                for y in 0..2 {
                    let mut t = s.clone();
                    t.pairs.push((x, y));
                    next.push(t);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn twin_realizability_matches_partial_realizability() {
    for depth in [2, 3] {
        let (class, u, part) = tree(depth);
        let n = part.domain().len();
        for s in all_samples(n, 3) {
            assert_eq!(is_robustly_realizable(&class, &s, &u).is_some(), part.is_realizable(&s).is_some(), "depth {depth}: {s:?}");
            let twinned = LabeledSample::new(s.pairs.iter().map(|&(x, y)| (n + x, y)).collect());
            assert_eq!(is_robustly_realizable(&class, &twinned, &u).is_some(), part.is_realizable(&s).is_some());
        }
    }
}

#[test]
fn twin_class_follows_the_construction() {
    let part = PartialClass::new(FiniteDomain::indexed(3).unwrap(), vec!["a".into(), "b".into()], vec![vec![Some(true), None, Some(false)], vec![Some(false); 3]]).unwrap();
    let (class, u) = twin_class(&part).unwrap();
    assert_eq!(class.concept(0), &[1, 0, 0, 1, 1, 0]);
    assert_eq!(class.concept(1), &[0, 0, 0, 0, 0, 0]);
    assert_eq!(class.domain().name(4), "1'");
    for x in 0..6 {
        assert!(u.get(x).contains(&x));
        assert_eq!(u.get(x).len(), 2);
    }
}

#[test]
fn conflicting_twin_labels_are_not_realizable() {
    let (class, u, part) = tree(3);
    let n = part.domain().len();
    let s = LabeledSample::new(vec![(0, 1), (n, 0)]);
    assert_eq!(is_robustly_realizable(&class, &s, &u), None);
}

#[test]
fn tree_partial_classes_have_partial_vc_one() {
    for depth in [2, 3, 4] {
        let (_, _, part) = tree(depth);
        assert_eq!(partial_vc_dimension(&part, part.domain().len()).unwrap().value, 1);
    }
}

#[test]
fn inflation_follows_the_perturbation_sets() {
    let s = LabeledSample::new(vec![(1, 1), (0, 0)]);
    assert_eq!(inflate_robust(&s, &PerturbationMap::identity(4)), s);
    let u = PerturbationMap::new(vec![vec![0], vec![0, 1, 2], vec![2], vec![3]]).unwrap();
    assert_eq!(inflate_robust(&s, &u).pairs, vec![(0, 1), (1, 1), (2, 1), (0, 0)]);
}

#[test]
fn perturbation_maps_require_reflexive_sets() {
    assert!(PerturbationMap::new(vec![vec![1], vec![1]]).is_err());
    assert!(PerturbationMap::new(vec![vec![0, 5]]).is_err());
}

fn thresholds(n: usize) -> Arc<ConceptClass> {
    let rows = (0..=n).map(|t| (0..n).map(|x| u32::from(x < t)).collect()).collect();
    Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(n).unwrap(), LabelSpace::Binary, rows).unwrap())
}

#[test]
fn robust_index_bits_are_log_m_per_kept_pair() {
    let c = thresholds(10);
    for m in [1usize, 2, 3, 5, 8] {
        let u = PerturbationMap::window(10, m);
        let scheme = reduce_robust(Registry::default().build("proper", c.clone()).unwrap(), c.clone(), u.clone()).unwrap();
        assert_eq!(scheme.width(), index_width(m));
        let s = LabeledSample::new(vec![(0, 1), (9, 0)]);
        let out = scheme.compress(&s).unwrap();
        assert_eq!(out.audit.index_bits, out.audit.substrate_kept.unwrap() * index_width(m) as usize);
        let p = scheme.reconstruct(&out.compressed).unwrap();
        assert!(robustly_consistent(&p, &s, &u));
    }
}

#[test]
fn single_completion_is_predicted() {
    // Two points with a forced second coordinate.
    let c = ConceptClass::from_rows(FiniteDomain::indexed(2).unwrap(), LabelSpace::Binary, vec![vec![0, 1], vec![1, 1]]).unwrap();
    let u = PerturbationMap::identity(2);
    let r = oig_predict(&c, &u, &LabeledSample::new(vec![(0, 0)]), 1).unwrap();
    assert_eq!(r.prediction, 1);
    let r = oig_predict(&c, &u, &LabeledSample::new(vec![(1, 1)]), 0).unwrap();
    assert_eq!((r.vertices, r.edges, r.max_out_degree), (2, 1, 1));
}

#[test]
fn sample_points_keep_their_labels() {
    let (class, u, _) = tree(3);
    let s = LabeledSample::new(vec![(0, class.label(0, 0))]);
    assert_eq!(oig_predict(&class, &u, &s, 0).unwrap().prediction, class.label(0, 0));
}

#[test]
fn unrealizable_samples_are_rejected() {
    let (class, u, part) = tree(2);
    let n = part.domain().len();
    let s = LabeledSample::new(vec![(0, 1), (n, 0)]);
    assert!(matches!(oig_predict(&class, &u, &s, 1), Err(Error::Unrealizable)));
}

#[test]
fn forests_orient_with_out_degree_one() {
    let (class, u, part) = tree(4);
    let n = part.domain().len();
    for k in 0..class.len() {
        let points: Vec<usize> = part.support(k);
        let g = OneInclusionGraph::build(&class, &u, &points);
        assert!(g.acyclic);
        assert!(g.max_out_degree() <= 1);
        assert_eq!(g.edges.len(), g.out.iter().map(Vec::len).sum::<usize>());
        assert!(points.iter().all(|&x| x < n));
    }
}

#[test]
fn four_cycles_are_peeled() {
    let cube = ConceptClass::from_rows(FiniteDomain::indexed(2).unwrap(), LabelSpace::Binary, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]).unwrap();
    let g = OneInclusionGraph::build(&cube, &PerturbationMap::identity(2), &[0, 1]);
    assert!(!g.acyclic);
    assert_eq!(g.edges.len(), 4);
    assert_eq!(g.out.iter().map(Vec::len).sum::<usize>(), 4);
    assert!(g.max_out_degree() <= 2);
}
