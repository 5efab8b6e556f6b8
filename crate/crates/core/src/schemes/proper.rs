use std::sync::Arc;

use crate::bits::BitString;
use crate::bitset::ConceptSet;
use crate::concepts::{ConceptClass, LabeledSample, Predictor};
use crate::error::{Error, Result};

use super::{first_consistent_predictor, first_occurrences, realizer, require_binary, CompressionOutput, CompressionScheme, Compressed, SchemeFlags};

/// Keeps the lexicographically-first smallest subsequence whose first
/// consistent concept is consistent with the whole sample.
pub struct ProperExhaustiveScheme {
    class: Arc<ConceptClass>,
    budget: usize,
}

impl ProperExhaustiveScheme {
    pub fn new(class: Arc<ConceptClass>, budget: usize) -> Result<Self> {
        require_binary(&class)?;
        if budget == 0 {
            return Err(Error::InvalidParameter("budget must be at least 1".into()));
        }
        Ok(Self { class, budget })
    }
}

/// Smallest set of candidates (in candidate order, lexicographically first)
/// whose kill masks cover `target`. `None` if no cover of size `<= max` exists.
pub(crate) fn min_cover(target: &ConceptSet, kills: &[ConceptSet], max: usize) -> Option<Vec<usize>> {
    if target.is_empty() {
        return Some(vec![]);
    }
    let mut all = ConceptSet::empty(target.capacity());
    kills.iter().for_each(|k| all.union_with(k));
    if !target.is_subset(&all) {
        return None;
    }
    // suffix_union[i] = union of kills[i..]
    let mut suffix = vec![ConceptSet::empty(target.capacity()); kills.len() + 1];
    for i in (0..kills.len()).rev() {
        let mut u = suffix[i + 1].clone();
        u.union_with(&kills[i]);
        suffix[i] = u;
    }
    fn dfs(left: &ConceptSet, kills: &[ConceptSet], suffix: &[ConceptSet], start: usize, r: usize, pick: &mut Vec<usize>) -> bool {
        if left.is_empty() {
            return true;
        }
        if r == 0 || !left.is_subset(&suffix[start]) {
            return false;
        }
        // A sibling with the same effect on `left` and more candidates after
        // it has already failed, and a pick with no effect is never minimal.
        let mut tried = std::collections::HashSet::new();
        for i in start..kills.len() {
            if !left.is_subset(&suffix[i]) {
                return false;
            }
            let hit = left.and(&kills[i]);
            if hit.is_empty() || !tried.insert(hit.clone()) {
                continue;
            }
            let mut rest = left.clone();
            for c in hit.iter() {
                rest.remove(c);
            }
            pick.push(i);
            if dfs(&rest, kills, suffix, i + 1, r - 1, pick) {
                return true;
            }
            pick.pop();
        }
        false
    }
    for k in 1..=max.min(kills.len()) {
        let mut pick = Vec::with_capacity(k);
        if dfs(target, kills, &suffix, 0, k, &mut pick) {
            return Some(pick);
        }
    }
    None
}

/// Concepts ordered before the first one consistent with the sample, and
/// the per-pair masks of those concepts each candidate pair rules out.
pub(crate) fn cover_problem(class: &ConceptClass, s: &LabeledSample, candidates: &[usize]) -> Result<(ConceptSet, Vec<ConceptSet>)> {
    let star = realizer(class, s)?;
    let mut before = ConceptSet::empty(class.len());
    (0..star).for_each(|c| before.insert(c));
    let kills = candidates
        .iter()
        .map(|&i| {
            let (x, y) = s.pairs[i];
            let mut k = before.clone();
            for c in class.agreeing(x, y).iter() {
                k.remove(c);
            }
            k
        })
        .collect();
    Ok((before, kills))
}

impl CompressionScheme for ProperExhaustiveScheme {
    fn name(&self) -> &str {
        "proper"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags { proper: true, ..SchemeFlags::NONE }
    }

    fn size_budget(&self) -> Option<usize> {
        (self.budget != usize::MAX).then_some(self.budget)
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        // Every pair of S agrees with every concept consistent with S, so the
        // reconstruction lands in the version space exactly when the kept
        // pairs rule out every concept ordered before its first member.
        let candidates = first_occurrences(s);
        let (target, kills) = cover_problem(&self.class, s, &candidates)?;
        let pick = min_cover(&target, &kills, self.budget).ok_or(Error::BudgetExceeded(self.budget))?;
        let kept = pick.into_iter().map(|j| candidates[j]).collect();
        Ok(CompressionOutput::from_positions(s, kept, BitString::new()))
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        first_consistent_predictor(&self.class, &c.pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{FiniteDomain, Label, LabelSpace};

    fn thresholds(n: usize) -> Arc<ConceptClass> {
        let rows = (-1..n as i64).map(|t| (0..n as i64).map(|x| Label::from(x <= t)).collect()).collect();
        Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(n).unwrap(), LabelSpace::Binary, rows).unwrap())
    }

    #[test]
    fn keeps_single_positive() {
        let s = ProperExhaustiveScheme::new(thresholds(10), usize::MAX).unwrap();
        let out = s.compress(&LabeledSample::new(vec![(2, 1), (7, 0)])).unwrap();
        assert_eq!(out.compressed.pairs, vec![(2, 1)]);
        assert_eq!(out.kept, vec![0]);
    }

    #[test]
    fn first_concept_needs_nothing() {
        let s = ProperExhaustiveScheme::new(thresholds(10), usize::MAX).unwrap();
        let out = s.compress(&LabeledSample::new(vec![(3, 0), (5, 0)])).unwrap();
        assert!(out.kept.is_empty());
        assert_eq!(s.reconstruct(&out.compressed).unwrap().kind(), &crate::PredictorKind::Concept(0));
    }

    #[test]
    fn contradiction_is_unrealizable() {
        let s = ProperExhaustiveScheme::new(thresholds(4), usize::MAX).unwrap();
        assert_eq!(s.compress(&LabeledSample::new(vec![(1, 0), (1, 1)])), Err(Error::Unrealizable));
    }

    #[test]
    fn budget_is_enforced() {
        let rows = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]];
        let cube = Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(2).unwrap(), LabelSpace::Binary, rows).unwrap());
        // Reaching the last row needs both pairs.
        let s = LabeledSample::new(vec![(0, 1), (1, 1)]);
        let tight = ProperExhaustiveScheme::new(cube.clone(), 1).unwrap();
        assert_eq!(tight.compress(&s), Err(Error::BudgetExceeded(1)));
        let loose = ProperExhaustiveScheme::new(cube, 2).unwrap();
        assert_eq!(loose.compress(&s).unwrap().kept, vec![0, 1]);
        assert!(ProperExhaustiveScheme::new(thresholds(6), 0).is_err());
    }
}
