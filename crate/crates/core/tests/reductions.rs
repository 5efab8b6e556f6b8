//! Worked examples for the multiclass and regression reductions and the
//! verifiers.

use std::sync::Arc;

use num::rational::BigRational;
use num::Zero;
use scompress::concepts::{erm_real, real_loss};
use scompress::harness::corpus::{generate_entry, Generator};
use scompress::harness::sample::{sample_real, sample_realizable, SampleMode};
use scompress::rational::{rat, to_big, Rational};
use scompress::reductions::multiclass::{
    agnostic_wrap, inflate_class, inflate_sample, piecewise_threshold_inflated_scheme, reduce_general, reduce_proper_or_majority, GraphDim1Scheme,
};
use scompress::reductions::regression::{
    agnostic_regression, class_leq, exact_via_multiclass, inflate_sample_eps, lp_tolerance, make_eps_grid, reduce_eps_linf, reduce_eps_lp,
    reduce_majority_regression, reduce_stable_regression, RealSample,
};
use scompress::schemes::{BoxedScheme, CompressionScheme, Flag, Registry};
use scompress::verify::{verify_flag, verify_stability, verify_validity, zero_one};
use scompress::{ConceptClass, FiniteDomain, LabelSpace, LabeledSample, Loss, Result};

fn class(g: Generator) -> Arc<ConceptClass> {
    generate_entry(3, 0, &g).unwrap().total().unwrap().clone()
}

fn substrate(name: &'static str) -> impl Fn(Arc<ConceptClass>) -> Result<BoxedScheme> {
    move |c| Registry::default().build(name, c)
}

fn samples(c: &ConceptClass, count: usize, max_len: usize) -> Vec<LabeledSample> {
    (0..count).map(|j| sample_realizable(c, 1 + j % max_len, j as u64, &SampleMode::Plain).unwrap()).collect()
}

fn real_samples(c: &ConceptClass, count: usize, max_len: usize) -> Vec<RealSample> {
    (0..count).map(|j| sample_real(c, 1 + j % max_len, j as u64, &SampleMode::Plain).unwrap()).collect()
}

#[test]
fn all_maps_into_three_labels_inflate_to_nine_rows() {
    let rows = (0..9).map(|i| vec![i / 3, i % 3]).collect();
    let c = ConceptClass::from_rows(FiniteDomain::new(vec!["a".into(), "b".into()]).unwrap(), LabelSpace::Multiclass(3), rows).unwrap();
    let inflated = inflate_class(&c).unwrap();
    assert_eq!((inflated.len(), inflated.domain().len()), (9, 6));
    for k in 0..9 {
        for x in 0..2 {
            assert_eq!((0..3).map(|y| inflated.label(k, 3 * x + y)).sum::<u32>(), 1);
        }
    }
}

#[test]
fn binary_inflation_interleaves_complements() {
    let c = class(Generator::Thresholds { n: 5 });
    let inflated = inflate_class(&c).unwrap();
    for k in 0..c.len() {
        for x in 0..5 {
            assert_eq!(inflated.label(k, 2 * x), 1 - c.label(k, x));
            assert_eq!(inflated.label(k, 2 * x + 1), c.label(k, x));
        }
    }
}

#[test]
fn inflated_samples_mark_the_true_label() {
    let s = LabeledSample::new(vec![(0, 2)]);
    assert_eq!(inflate_sample(&s, 3).pairs, vec![(0, 0), (1, 0), (2, 1)]);
    assert!(inflate_sample(&LabeledSample::default(), 3).is_empty());
}

#[test]
fn proper_reduction_size_does_not_grow_with_the_label_count() {
    let base = class(Generator::RandomMulticlass { n: 6, m: 8, rows: 12 });
    let wide = Arc::new(ConceptClass::from_rows(base.domain().clone(), LabelSpace::Multiclass(64), base.table().to_vec()).unwrap());
    let build = |c: &Arc<ConceptClass>| reduce_proper_or_majority(Registry::default().build("proper", Arc::new(inflate_class(c).unwrap())).unwrap(), c.clone()).unwrap();
    let (narrow_scheme, wide_scheme) = (build(&base), build(&wide));
    for s in samples(&base, 30, 6) {
        let a = narrow_scheme.compress(&s).unwrap();
        let b = wide_scheme.compress(&s).unwrap();
        assert_eq!(a.size(), b.size());
        assert!(a.compressed.bits.is_empty());
        assert!(zero_one(&s, &wide_scheme.reconstruct(&b.compressed).unwrap()).unwrap().is_zero());
    }
}

#[test]
fn proper_reduction_rejects_other_substrates() {
    let c = class(Generator::Thresholds { n: 4 });
    let inflated = Arc::new(inflate_class(&c).unwrap());
    assert!(reduce_proper_or_majority(Registry::default().build("soa", inflated).unwrap(), c).is_err());
}

#[test]
fn general_reduction_is_consistent_on_many_samples() {
    let c = class(Generator::RandomMulticlass { n: 6, m: 4, rows: 20 });
    let scheme = reduce_general(Registry::default().build("boost", Arc::new(inflate_class(&c).unwrap())).unwrap(), c.clone()).unwrap();
    let report = verify_validity(&scheme, &samples(&c, 100, 8), |s, p| zero_one(s, p), &BigRational::zero());
    assert!(report.all_passed());
}

#[test]
fn graph_dim1_keeps_nothing_when_the_first_concept_fits() {
    let c = class(Generator::Singletons { n: 6, m: 3 });
    let scheme = GraphDim1Scheme::new(c.clone()).unwrap();
    let s = LabeledSample::new((0..6).map(|x| (x, c.label(0, x))).collect());
    assert_eq!(scheme.compress(&s).unwrap().size(), 0);
}

#[test]
fn piecewise_single_label_samples_keep_at_most_two() {
    let c = class(Generator::KPiecewise { n: 10, m: 3, k: 2 });
    let scheme = piecewise_threshold_inflated_scheme(&c, 2).unwrap();
    let k = (0..c.len()).find(|&k| c.concept(k).iter().take(4).all(|&l| l == c.label(k, 0))).unwrap();
    let s = LabeledSample::new((0..4).map(|x| (x, c.label(k, x))).collect());
    let out = scheme.compress(&inflate_sample(&s, 3)).unwrap();
    assert!(out.size() <= 2);
}

#[test]
fn agnostic_wrap_matches_erm_on_a_singleton_class() {
    let c = Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(4).unwrap(), LabelSpace::Multiclass(3), vec![vec![0, 1, 2, 0]]).unwrap());
    let inner = reduce_general(Registry::default().build("proper", Arc::new(inflate_class(&c).unwrap())).unwrap(), c.clone()).unwrap();
    let scheme = agnostic_wrap(Box::new(inner), c);
    let s = LabeledSample::new(vec![(0, 0), (1, 1), (2, 0), (3, 0)]);
    let p = scheme.reconstruct(&scheme.compress(&s).unwrap().compressed).unwrap();
    assert_eq!(zero_one(&s, &p).unwrap(), to_big(&rat(1, 4)));
}

#[test]
fn constant_half_thresholds_on_a_quarter_grid() {
    let c = ConceptClass::from_rows(FiniteDomain::indexed(2).unwrap(), LabelSpace::RealGrid(2), vec![vec![1, 1]]).unwrap();
    let leq = class_leq(&c, &make_eps_grid(rat(1, 4)).unwrap()).unwrap();
    assert_eq!(leq.class.concept(0), &[0, 0, 1, 1, 1, 0, 0, 1, 1, 1]);
}

#[test]
fn real_samples_inflate_against_the_grid() {
    let grid = make_eps_grid(rat(1, 4)).unwrap();
    let s = RealSample::new(vec![(0, rat(3, 10))]);
    let labels: Vec<u32> = inflate_sample_eps(&s, &grid).pairs.iter().map(|p| p.1).collect();
    assert_eq!(labels, vec![0, 0, 1, 1, 1]);
    let zero = RealSample::new(vec![(0, rat(0, 1))]);
    assert!(inflate_sample_eps(&zero, &grid).pairs.iter().all(|p| p.1 == 1));
}

#[test]
fn lp_tolerances() {
    assert_eq!(lp_tolerance(rat(1, 16), rat(2, 1)).unwrap(), rat(1, 4));
    assert_eq!(lp_tolerance(rat(1, 4), rat(1, 1)).unwrap(), rat(1, 4));
}

#[test]
fn l1_reduction_equals_the_sup_reduction() {
    let c = class(Generator::RandomReal { n: 5, q: 4, rows: 10 });
    let f = substrate("proper");
    let linf = reduce_eps_linf(&f, c.clone(), rat(1, 4)).unwrap();
    let l1 = reduce_eps_lp(&f, c.clone(), rat(1, 4), rat(1, 1)).unwrap();
    for s in real_samples(&c, 20, 6) {
        assert_eq!(linf.compress(&s).unwrap(), l1.compress(&s).unwrap());
    }
}

#[test]
fn sup_reduction_is_within_a_quarter() {
    let c = class(Generator::StepReal { n: 6, q: 4 });
    let scheme = reduce_eps_linf(&substrate("boost"), c.clone(), rat(1, 4)).unwrap();
    for s in real_samples(&c, 100, 8) {
        let p = scheme.reconstruct(&scheme.compress(&s).unwrap().compressed).unwrap();
        assert!(*real_loss(&p, &s, &Loss::LInf).unwrap().upper() <= to_big(&rat(1, 4)));
    }
}

#[test]
fn majority_regression_handles_all_zero_labels() {
    let c = Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(3).unwrap(), LabelSpace::RealGrid(2), vec![vec![0, 0, 0], vec![2, 1, 0]]).unwrap());
    let scheme = reduce_majority_regression(&substrate("proper"), c, rat(1, 4)).unwrap();
    let s = RealSample::new((0..3).map(|x| (x, rat(0, 1))).collect());
    let p = scheme.reconstruct(&scheme.compress(&s).unwrap().compressed).unwrap();
    assert!(real_loss(&p, &s, &Loss::LInf).unwrap().upper().is_zero());
}

#[test]
fn stable_regression_sizes_ignore_eps() {
    let c = class(Generator::StepReal { n: 6, q: 4 });
    let f = substrate("teach");
    let (coarse, fine) = (reduce_stable_regression(&f, c.clone(), rat(1, 4)).unwrap(), reduce_stable_regression(&f, c.clone(), rat(1, 8)).unwrap());
    for s in real_samples(&c, 30, 8) {
        let (a, b) = (coarse.compress(&s).unwrap(), fine.compress(&s).unwrap());
        assert_eq!(a.size(), b.size());
        assert_eq!(a.audit.index_bits, 0);
        assert!(verify_stability(&coarse, &s, 1).unwrap().passed);
    }
}

#[test]
fn exact_multiclass_route_is_exact() {
    let c = class(Generator::RandomReal { n: 5, q: 3, rows: 10 });
    let scheme = exact_via_multiclass(
        &|m: Arc<ConceptClass>| -> Result<BoxedScheme> {
            let inflated = Arc::new(inflate_class(&m)?);
            Ok(Box::new(reduce_general(Registry::default().build("proper", inflated)?, m)?))
        },
        &c,
    )
    .unwrap();
    for s in real_samples(&c, 100, 8) {
        let p = scheme.reconstruct(&scheme.compress(&s).unwrap().compressed).unwrap();
        assert!(real_loss(&p, &s, &Loss::LInf).unwrap().upper().is_zero());
    }
}

#[test]
fn agnostic_regression_on_a_singleton_class() {
    let c = Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(3).unwrap(), LabelSpace::RealGrid(4), vec![vec![1, 2, 3]]).unwrap());
    let eps: Rational = rat(1, 4);
    for loss in [Loss::LInf, Loss::lp(1), Loss::lp(2)] {
        let scheme = agnostic_regression(&substrate("proper"), c.clone(), eps, loss.clone()).unwrap();
        let s = RealSample::new(vec![(0, rat(1, 1)), (1, rat(0, 1)), (2, rat(3, 4))]);
        let p = scheme.reconstruct(&scheme.compress(&s).unwrap().compressed).unwrap();
        let (_, best) = erm_real(&c, &s, &loss).unwrap();
        assert!(*real_loss(&p, &s, &loss).unwrap().upper() <= best.lower() + to_big(&eps));
    }
}

#[test]
fn stability_reports_are_ground_truth_on_the_square() {
    let c = class(Generator::FullCube { n: 2 });
    let proper = Registry::default().build("proper", c.clone()).unwrap();
    let s = LabeledSample::new(vec![(0, 1), (1, 1), (0, 1), (1, 1)]);
    let report = verify_stability(&proper, &s, 0).unwrap();
    assert!(report.exhaustive);
    if let Some(w) = &report.witness {
        let t = s.select(w);
        let (a, b) = (proper.compress(&s).unwrap(), proper.compress(&t).unwrap());
        assert!(a.compressed != b.compressed);
    }
    let kept_only = LabeledSample::new(vec![(0, 1)]);
    let threshold = Registry::default().build("threshold", class(Generator::Thresholds { n: 4 })).unwrap();
    let r = verify_stability(&threshold, &kept_only, 0).unwrap();
    assert!(r.passed);
}

#[test]
fn flags_are_verified_or_refused() {
    let c = class(Generator::Intervals { n: 5 });
    let corpus = samples(&c, 40, 5);
    let reg = Registry::default();
    assert!(verify_flag(reg.build("proper", c.clone()).unwrap().as_ref(), Flag::Proper, &c, &corpus).passed());
    assert!(verify_flag(reg.build("boost", c.clone()).unwrap().as_ref(), Flag::MajorityVote, &c, &corpus).passed());
    let th = class(Generator::Thresholds { n: 5 });
    let report = verify_flag(reg.build("threshold", th.clone()).unwrap().as_ref(), Flag::MajorityVote, &th, &samples(&th, 5, 5));
    assert!(report.structural_failure.is_some());
}
