use std::sync::Arc;

use crate::bits::BitString;
use crate::concepts::{ConceptClass, LabeledSample, Predictor};
use crate::error::Result;

use super::proper::{cover_problem, min_cover};
use super::{first_consistent_predictor, first_occurrences, require_binary, CompressionOutput, CompressionScheme, Compressed, SchemeFlags};

/// Keeps a smallest set of distinct pairs ruling out every concept ordered
/// before the first consistent one, breaking ties by the sorted pair list.
///
/// The choice depends only on the set of distinct pairs, and dropping pairs
/// outside the kept set leaves both the target concept and the optimal
/// cover unchanged, so the scheme is stable.
pub struct TeachingSetScheme {
    class: Arc<ConceptClass>,
}

impl TeachingSetScheme {
    pub fn new(class: Arc<ConceptClass>) -> Result<Self> {
        require_binary(&class)?;
        Ok(Self { class })
    }
}

impl CompressionScheme for TeachingSetScheme {
    fn name(&self) -> &str {
        "teach"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags { proper: true, stable: true, majority_vote: false }
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        let mut candidates = first_occurrences(s);
        candidates.sort_by_key(|&i| s.pairs[i]);
        let (target, kills) = cover_problem(&self.class, s, &candidates)?;
        let pick = min_cover(&target, &kills, usize::MAX).expect("the full sample is a cover");
        let mut kept: Vec<usize> = pick.into_iter().map(|j| candidates[j]).collect();
        kept.sort_unstable();
        Ok(CompressionOutput::from_positions(s, kept, BitString::new()))
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        first_consistent_predictor(&self.class, &c.pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{FiniteDomain, LabelSpace};

    #[test]
    fn ignores_sample_order() {
        let rows = vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 1]];
        let c = Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(3).unwrap(), LabelSpace::Binary, rows).unwrap());
        let t = TeachingSetScheme::new(c).unwrap();
        // Row 3 is reached by (2,1) alone, or by (0,1),(1,1) together.
        let a = t.compress(&LabeledSample::new(vec![(0, 1), (1, 1), (2, 1)])).unwrap();
        let b = t.compress(&LabeledSample::new(vec![(2, 1), (1, 1), (0, 1)])).unwrap();
        assert_eq!(a.compressed.pairs, vec![(2, 1)]);
        assert_eq!(b.compressed.pairs, vec![(2, 1)]);
    }
}
