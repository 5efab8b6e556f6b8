use std::sync::Arc;

use crate::bits::BitString;
use crate::concepts::{ConceptClass, Label, LabeledSample, Predictor, PredictorKind};
use crate::dimensions::{vc_dimension, DEFAULT_MAX_SET_SIZE};
use crate::error::{Error, Result};

use super::{realizer, require_binary, CompressionOutput, CompressionScheme, Compressed, SchemeFlags};

const GAMMA: f64 = 1.0 / 16.0;
/// Weight multiplier for correctly classified examples.
const BETA: f64 = 7.0 / 9.0;
/// Number of heaviest distinct pairs the weak learner draws supports from.
const POOL: usize = 8;
/// Extra rounds allowed, as a multiple of the nominal count, before giving up.
const EXTENSION: usize = 4;

/// Multiplicative-weights boosting over weak hypotheses of the form
/// "first concept consistent with a small support". Each round's support
/// is stored; reconstruction replays the weak learner on every support and
/// takes the pointwise majority.
pub struct MajorityBoostScheme {
    class: Arc<ConceptClass>,
    support_size: usize,
}

pub fn nominal_rounds(n: usize) -> usize {
    if n <= 1 {
        1
    } else {
        ((32.0 * (n as f64).ln()).ceil() as usize).max(1)
    }
}

impl MajorityBoostScheme {
    pub fn new(class: Arc<ConceptClass>) -> Result<Self> {
        require_binary(&class)?;
        let d = vc_dimension(&class, DEFAULT_MAX_SET_SIZE)?.value;
        Ok(Self { class, support_size: d + 1 })
    }

    /// Support (positions into `distinct`) and chosen concept for one round.
    fn weak_learner(&self, s: &LabeledSample, distinct: &[usize], weights: &[f64]) -> Result<(Vec<usize>, usize)> {
        let total: f64 = weights.iter().sum();
        let pair_weight = |j: usize| -> f64 {
            let p = s.pairs[distinct[j]];
            s.pairs.iter().zip(weights).filter(|(q, _)| **q == p).map(|(_, w)| w).sum()
        };
        let mut ranked: Vec<usize> = (0..distinct.len()).collect();
        let pw: Vec<f64> = ranked.iter().map(|&j| pair_weight(j)).collect();
        ranked.sort_by(|&a, &b| pw[b].total_cmp(&pw[a]).then(a.cmp(&b)));
        let accuracy = |c: usize| -> f64 {
            s.pairs.iter().zip(weights).filter(|((x, y), _)| self.class.label(c, *x) == *y).map(|(_, w)| w).sum()
        };
        let target = (0.5 + GAMMA) * total;
        let pool = &ranked[..ranked.len().min(POOL)];
        let mut best: Option<(f64, Vec<usize>, usize)> = None;
        for k in 0..=self.support_size.min(pool.len()) {
            for_each_subset(pool.len(), k, &mut |idx| {
                let support: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
                let pairs: Vec<_> = support.iter().map(|&j| s.pairs[distinct[j]]).collect();
                if let Some(c) = self.class.first_consistent(&pairs) {
                    let a = accuracy(c);
                    if best.as_ref().map_or(true, |b| a > b.0) {
                        best = Some((a, support, c));
                    }
                }
            });
        }
        if let Some((a, support, c)) = best {
            if a >= target {
                return Ok((support, c));
            }
        }
        for len in pool.len() + 1..=ranked.len() {
            let support = ranked[..len].to_vec();
            let pairs: Vec<_> = support.iter().map(|&j| s.pairs[distinct[j]]).collect();
            if let Some(c) = self.class.first_consistent(&pairs) {
                if accuracy(c) >= target {
                    return Ok((support, c));
                }
            }
        }
        Err(Error::SchemeFailure("weak learner found no hypothesis with edge 1/16".into()))
    }
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(n, k, i + 1, cur, f);
            cur.pop();
        }
    }
    go(n, k, 0, &mut Vec::with_capacity(k), f);
}

impl CompressionScheme for MajorityBoostScheme {
    fn name(&self) -> &str {
        "boost"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags { majority_vote: true, ..SchemeFlags::NONE }
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        realizer(&self.class, s)?;
        let distinct = super::first_occurrences(s);
        let nominal = nominal_rounds(s.len());
        let mut weights = vec![1.0f64; s.len()];
        let mut rounds: Vec<(Vec<usize>, usize)> = Vec::new();
        let consistent = |rounds: &[(Vec<usize>, usize)]| {
            let p = Predictor::majority(&self.class, rounds.iter().map(|r| r.1).collect());
            s.pairs.iter().all(|&(x, y)| *p.predict(x) == y)
        };
        loop {
            let (support, c) = self.weak_learner(s, &distinct, &weights)?;
            for (w, &(x, y)) in weights.iter_mut().zip(&s.pairs) {
                if self.class.label(c, x) == y {
                    *w *= BETA;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            rounds.push((support, c));
            if rounds.len() >= nominal && consistent(&rounds) {
                break;
            }
            if rounds.len() >= nominal * (1 + EXTENSION) {
                return Err(Error::SchemeFailure(format!("majority still inconsistent after {} rounds", rounds.len())));
            }
        }
        let mut kept: Vec<usize> = rounds.iter().flat_map(|(sup, _)| sup.iter().map(|&j| distinct[j])).collect();
        kept.sort_unstable();
        kept.dedup();
        let mut bits = BitString::new();
        bits.push_gamma(rounds.len());
        for (sup, _) in &rounds {
            let members: Vec<usize> = sup.iter().map(|&j| distinct[j]).collect();
            for k in &kept {
                bits.push(members.contains(k));
            }
        }
        let mut out = CompressionOutput::from_positions(s, kept, bits);
        out.audit.iterations = Some(rounds.len());
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let mut r = c.bits.reader();
        let rounds = r.gamma()?;
        let mut members = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let mask = r.take(c.pairs.len())?;
            let support: Vec<(usize, Label)> =
                c.pairs.iter().zip(mask.as_slice()).filter(|(_, &b)| b).map(|(p, _)| *p).collect();
            let concept = self
                .class
                .first_consistent(&support)
                .ok_or_else(|| Error::Decode("round support is inconsistent".into()))?;
            members.push(concept);
        }
        r.finish()?;
        let p = Predictor::majority(&self.class, members);
        debug_assert!(matches!(p.kind(), PredictorKind::Majority(_)));
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{FiniteDomain, LabelSpace};

    fn thresholds(n: usize) -> Arc<ConceptClass> {
        let rows = (-1..n as i64).map(|t| (0..n as i64).map(|x| Label::from(x <= t)).collect()).collect();
        Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(n).unwrap(), LabelSpace::Binary, rows).unwrap())
    }

    #[test]
    fn round_counts() {
        assert_eq!(nominal_rounds(1), 1);
        assert_eq!(nominal_rounds(6), 58);
    }

    #[test]
    fn single_point_single_round() {
        let b = MajorityBoostScheme::new(thresholds(10)).unwrap();
        let s = LabeledSample::new(vec![(4, 1)]);
        let out = b.compress(&s).unwrap();
        assert_eq!(out.audit.iterations, Some(1));
        let p = b.reconstruct(&out.compressed).unwrap();
        assert_eq!(*p.predict(4), 1);
    }

    #[test]
    fn consistent_on_thresholds() {
        let b = MajorityBoostScheme::new(thresholds(10)).unwrap();
        let s = LabeledSample::new(vec![(0, 1), (9, 0), (3, 1), (6, 0), (4, 1), (5, 0)]);
        let out = b.compress(&s).unwrap();
        let p = b.reconstruct(&out.compressed).unwrap();
        assert!(s.pairs.iter().all(|&(x, y)| *p.predict(x) == y));
        assert!(matches!(p.kind(), PredictorKind::Majority(_)));
    }

    #[test]
    fn consistent_on_cube() {
        let rows: Vec<Vec<Label>> = (0..8u32).map(|m| (0..3).map(|i| (m >> i) & 1).collect()).collect();
        let c = Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(3).unwrap(), LabelSpace::Binary, rows).unwrap());
        let b = MajorityBoostScheme::new(c).unwrap();
        for m in 0..8u32 {
            let s = LabeledSample::new((0..3).map(|x| (x, (m >> x) & 1)).collect());
            let p = b.reconstruct(&b.compress(&s).unwrap().compressed).unwrap();
            assert!(s.pairs.iter().all(|&(x, y)| *p.predict(x) == y));
        }
    }
}
