use std::sync::Arc;

use crate::bits::BitString;
use crate::concepts::{ConceptClass, Label, LabeledSample, Predictor};
use crate::error::{Error, Result};

use super::{first_consistent_predictor, realizer, require_binary, CompressionOutput, CompressionScheme, Compressed, SchemeFlags};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Rows of the form `1[x <= t]`.
    Decreasing,
    /// Rows of the form `1[x >= t]`.
    Increasing,
}

/// Two-point stable scheme for threshold families over the domain order:
/// keep the last point labeled with the low side's label and the first
/// point labeled with the high side's.
pub struct ThresholdStableScheme {
    class: Arc<ConceptClass>,
    orientation: Orientation,
}

fn monotone(row: &[Label], o: Orientation) -> bool {
    row.windows(2).all(|w| match o {
        Orientation::Decreasing => w[0] >= w[1],
        Orientation::Increasing => w[0] <= w[1],
    })
}

impl ThresholdStableScheme {
    pub fn new(class: Arc<ConceptClass>) -> Result<Self> {
        require_binary(&class)?;
        let orientation = [Orientation::Decreasing, Orientation::Increasing]
            .into_iter()
            .find(|&o| class.table().iter().all(|r| monotone(r, o)))
            .ok_or_else(|| Error::Construction("class is not a threshold family".into()))?;
        Ok(Self { class, orientation })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }
}

impl CompressionScheme for ThresholdStableScheme {
    fn name(&self) -> &str {
        "threshold"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags { proper: true, stable: true, majority_vote: false }
    }

    fn size_budget(&self) -> Option<usize> {
        Some(2)
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        realizer(&self.class, s)?;
        let (left_label, right_label) = match self.orientation {
            Orientation::Decreasing => (1, 0),
            Orientation::Increasing => (0, 1),
        };
        // Rightmost point of the left block, leftmost of the right block;
        // earliest position among repeats.
        let mut left: Option<usize> = None;
        let mut right: Option<usize> = None;
        for (i, &(x, y)) in s.pairs.iter().enumerate() {
            if y == left_label && left.map_or(true, |j| x > s.pairs[j].0) {
                left = Some(i);
            }
            if y == right_label && right.map_or(true, |j| x < s.pairs[j].0) {
                right = Some(i);
            }
        }
        let mut kept: Vec<usize> = left.into_iter().chain(right).collect();
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

    fn family(n: usize, o: Orientation) -> Arc<ConceptClass> {
        let rows = (0..=n)
            .map(|t| (0..n).map(|x| Label::from(if o == Orientation::Decreasing { x < t } else { x >= t })).collect())
            .collect();
        Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(n).unwrap(), LabelSpace::Binary, rows).unwrap())
    }

    #[test]
    fn boundary_pair_is_kept() {
        let s = ThresholdStableScheme::new(family(10, Orientation::Decreasing)).unwrap();
        let out = s.compress(&LabeledSample::new(vec![(1, 1), (4, 1), (7, 0), (9, 0)])).unwrap();
        assert_eq!(out.compressed.pairs, vec![(4, 1), (7, 0)]);
    }

    #[test]
    fn orientation_detected() {
        let s = ThresholdStableScheme::new(family(6, Orientation::Increasing)).unwrap();
        assert_eq!(s.orientation(), Orientation::Increasing);
        let out = s.compress(&LabeledSample::new(vec![(5, 1), (0, 0), (3, 1), (1, 0)])).unwrap();
        assert_eq!(out.compressed.pairs, vec![(3, 1), (1, 0)]);
        assert_eq!(out.kept, vec![2, 3]);
    }

    #[test]
    fn one_sided_and_empty() {
        let s = ThresholdStableScheme::new(family(10, Orientation::Decreasing)).unwrap();
        let out = s.compress(&LabeledSample::new(vec![(3, 1), (6, 1), (2, 1)])).unwrap();
        assert_eq!(out.compressed.pairs, vec![(6, 1)]);
        let empty = s.compress(&LabeledSample::default()).unwrap();
        assert!(empty.kept.is_empty());
        assert_eq!(s.reconstruct(&empty.compressed).unwrap().kind(), &crate::PredictorKind::Concept(0));
    }

    #[test]
    fn rejects_non_threshold() {
        let rows = vec![vec![0, 1, 0], vec![1, 0, 1]];
        let c = Arc::new(ConceptClass::from_rows(FiniteDomain::indexed(3).unwrap(), LabelSpace::Binary, rows).unwrap());
        assert!(matches!(ThresholdStableScheme::new(c), Err(Error::Construction(_))));
    }
}
