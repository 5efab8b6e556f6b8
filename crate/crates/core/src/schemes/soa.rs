use std::sync::Arc;

use crate::bits::BitString;
use crate::concepts::{ConceptClass, Label, LabeledSample, Predictor, PredictorKind};
use crate::dimensions::{littlestone_dimension, LittlestoneOracle};
use crate::error::Result;

use super::{realizer, require_binary, CompressionOutput, CompressionScheme, Compressed, SchemeFlags};

/// Compression by replaying the standard optimal algorithm: the compressed
/// set is the list of mistakes it makes while sweeping the sample.
pub struct SoaScheme {
    class: Arc<ConceptClass>,
    ld: usize,
}

impl SoaScheme {
    pub fn new(class: Arc<ConceptClass>) -> Result<Self> {
        require_binary(&class)?;
        let ld = littlestone_dimension(&class)?.value;
        Ok(Self { class, ld })
    }

    fn predictor(&self, oracle: &mut LittlestoneOracle<'_>, pairs: &[(usize, Label)]) -> Predictor {
        let v = self.class.version_space(pairs);
        let values = (0..self.class.domain().len())
            .map(|x| {
                if let Some(&(_, y)) = pairs.iter().find(|p| p.0 == x) {
                    return y;
                }
                let v0 = oracle.restrict(&v, x, 0);
                let v1 = oracle.restrict(&v, x, 1);
                match (v0.is_empty(), v1.is_empty()) {
                    (false, true) => 0,
                    (true, false) => 1,
                    (true, true) => 1,
                    (false, false) => Label::from(oracle.value(&v1) >= oracle.value(&v0)),
                }
            })
            .collect();
        Predictor::new(values, PredictorKind::Rule)
    }
}

impl CompressionScheme for SoaScheme {
    fn name(&self) -> &str {
        "soa"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags::NONE
    }

    fn size_budget(&self) -> Option<usize> {
        Some(self.ld)
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        realizer(&self.class, s)?;
        let mut oracle = LittlestoneOracle::new(&self.class)?;
        let mut kept: Vec<usize> = Vec::new();
        loop {
            let pairs: Vec<_> = kept.iter().map(|&i| s.pairs[i]).collect();
            let f = self.predictor(&mut oracle, &pairs);
            match s.pairs.iter().position(|&(x, y)| *f.predict(x) != y) {
                None => break,
                Some(i) => kept.push(i),
            }
        }
        let iterations = kept.len();
        kept.sort_unstable();
        let mut out = CompressionOutput::from_positions(s, kept, BitString::new());
        out.audit.iterations = Some(iterations);
        out.audit.iteration_bound = Some(self.ld);
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let mut oracle = LittlestoneOracle::new(&self.class)?;
        Ok(self.predictor(&mut oracle, &c.pairs))
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
    fn thresholds_within_three() {
        let s = SoaScheme::new(thresholds(10)).unwrap();
        assert_eq!(s.size_budget(), Some(3));
        for t in -1..10i64 {
            let sample = LabeledSample::new((0..10).map(|x| (x as usize, Label::from(x <= t))).collect());
            let out = s.compress(&sample).unwrap();
            assert!(out.kept.len() <= 3);
            let p = s.reconstruct(&out.compressed).unwrap();
            assert!(sample.pairs.iter().all(|&(x, y)| *p.predict(x) == y));
        }
    }

    #[test]
    fn no_mistake_keeps_nothing() {
        let s = SoaScheme::new(thresholds(10)).unwrap();
        let p0 = s.reconstruct(&Compressed::default()).unwrap();
        let sample = LabeledSample::new(vec![(0, *p0.predict(0)), (9, *p0.predict(9))]);
        assert!(s.compress(&sample).unwrap().kept.is_empty());
    }
}
