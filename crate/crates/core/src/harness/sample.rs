//! Seeded sample generation.

use rand::Rng;

use crate::concepts::{ConceptClass, Label, LabeledSample};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::reductions::robust::PerturbationMap;

use super::rng::stream;

#[derive(Clone, Debug, PartialEq)]
pub enum SampleMode {
    Plain,
    /// Points are drawn where the chosen concept is constant on the
    /// perturbation set, so the sample is robustly realizable.
    Robust(PerturbationMap),
    /// Each label is replaced, with the given probability, by a different
    /// uniformly drawn label.
    Noisy(Rational),
}

fn hit<R: Rng>(rng: &mut R, rate: &Rational) -> bool {
    let den = *rate.denom() as u64;
    rng.gen_range(0..den) < *rate.numer() as u64
}

fn other_label<R: Rng>(rng: &mut R, size: usize, y: Label) -> Label {
    let z = rng.gen_range(0..size - 1) as Label;
    if z >= y {
        z + 1
    } else {
        z
    }
}

/// `n` points uniform with replacement, labeled by a uniformly drawn concept.
pub fn sample_realizable(class: &ConceptClass, n: usize, seed: u64, mode: &SampleMode) -> Result<LabeledSample> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let mut rng = stream(seed, &[]);
    let d = class.domain().len();
    match mode {
        SampleMode::Plain => {
            let c = rng.gen_range(0..class.len());
            Ok(LabeledSample::new((0..n).map(|_| rng.gen_range(0..d)).map(|x| (x, class.label(c, x))).collect()))
        }
        SampleMode::Robust(u) => {
            let stable: Vec<Vec<usize>> = (0..class.len())
                .map(|c| (0..d).filter(|&x| u.get(x).iter().all(|&z| class.label(c, z) == class.label(c, x))).collect())
                .collect();
            let usable: Vec<usize> = (0..class.len()).filter(|&c| !stable[c].is_empty()).collect();
            if usable.is_empty() {
                return Err(Error::Unrealizable);
            }
            let c = usable[rng.gen_range(0..usable.len())];
            let pts = &stable[c];
            Ok(LabeledSample::new((0..n).map(|_| pts[rng.gen_range(0..pts.len())]).map(|x| (x, class.label(c, x))).collect()))
        }
        SampleMode::Noisy(rate) => {
            let c = rng.gen_range(0..class.len());
            let m = class.labels().size();
            let pairs = (0..n)
                .map(|_| {
                    let x = rng.gen_range(0..d);
                    let y = class.label(c, x);
                    (x, if m > 1 && hit(&mut rng, rate) { other_label(&mut rng, m, y) } else { y })
                })
                .collect();
            Ok(LabeledSample::new(pairs))
        }
    }
}

/// Real-valued sample over a real-grid class; `Noisy` replaces labels by a
/// different grid value.
pub fn sample_real(class: &ConceptClass, n: usize, seed: u64, mode: &SampleMode) -> Result<LabeledSample<Rational>> {
    if !class.labels().is_real() {
        return Err(Error::LabelMismatch("realGrid class required".into()));
    }
    let coded = sample_realizable(class, n, seed, mode)?;
    Ok(LabeledSample::new(coded.pairs.into_iter().map(|(x, y)| (x, class.labels().value(y))).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{erm, is_realizable, FiniteDomain, LabelSpace, Loss};
    use crate::rational::rat;
    use crate::reductions::robust::is_robustly_realizable;

    fn thresholds(n: usize) -> ConceptClass {
        let rows = (-1..n as i64).map(|t| (0..n as i64).map(|x| Label::from(x <= t)).collect()).collect();
        ConceptClass::from_rows(FiniteDomain::indexed(n).unwrap(), LabelSpace::Binary, rows).unwrap()
    }

    #[test]
    fn modes() {
        let c = thresholds(10);
        assert!(sample_realizable(&c, 0, 1, &SampleMode::Plain).unwrap().is_empty());
        for seed in 0..20 {
            let s = sample_realizable(&c, 8, seed, &SampleMode::Plain).unwrap();
            assert!(is_realizable(&c, &s).is_some());
            let u = PerturbationMap::window(10, 3);
            let r = sample_realizable(&c, 8, seed, &SampleMode::Robust(u.clone())).unwrap();
            assert!(is_robustly_realizable(&c, &r, &u).is_some());
        }
        assert_eq!(sample_realizable(&c, 5, 9, &SampleMode::Plain), sample_realizable(&c, 5, 9, &SampleMode::Plain));
    }

    #[test]
    fn noise_on_a_singleton_class() {
        let one = ConceptClass::from_rows(FiniteDomain::indexed(4).unwrap(), LabelSpace::Binary, vec![vec![0, 1, 0, 1]]).unwrap();
        let s = sample_realizable(&one, 400, 3, &SampleMode::Noisy(rat(1, 4))).unwrap();
        let flips = s.pairs.iter().filter(|&&(x, y)| one.label(0, x) != y).count();
        let (_, loss) = erm(&one, &s, &Loss::ZeroOne).unwrap();
        assert_eq!(loss.exact().unwrap(), &num::BigRational::new(flips.into(), 400.into()));
        assert!(flips > 50 && flips < 150);
    }

    #[test]
    fn robust_without_realizer_fails() {
        let c = ConceptClass::from_rows(FiniteDomain::indexed(2).unwrap(), LabelSpace::Binary, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let u = PerturbationMap::new(vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(sample_realizable(&c, 3, 0, &SampleMode::Robust(u)), Err(Error::Unrealizable));
    }
}
