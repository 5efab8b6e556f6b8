//! Verifiers for validity, stability and capability flags, plus fixtures
//! that deliberately break them.

use std::collections::HashMap;
use std::hash::Hash;

use num::rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::concepts::{ConceptClass, LabeledSample, Predictor, PredictorKind};
use crate::error::Result;
use crate::rational::fmt_big;
use crate::schemes::{CompressionOutput, CompressionScheme, Compressed, Flag, SchemeFlags};

/// Exhaustive stability checks run up to this many removable positions.
pub const EXHAUSTIVE_GAP: usize = 12;
pub const RANDOM_SUBSETS: usize = 256;

#[derive(Clone, Debug, Serialize)]
pub struct ValidityRow {
    pub sample: usize,
    pub size: usize,
    pub loss: String,
    pub loss_ok: bool,
    pub budget_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ValidityRow {
    pub fn passed(&self) -> bool {
        self.loss_ok && self.budget_ok && self.error.is_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidityReport {
    pub rows: Vec<ValidityRow>,
}

impl ValidityReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.passed()).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failures() == 0
    }
}

/// Runs the scheme on every sample and checks `loss(S, reconstruction) <= tolerance`
/// and the declared size budget.
pub fn verify_validity<L, F>(scheme: &dyn CompressionScheme<L>, samples: &[LabeledSample<L>], loss: F, tolerance: &BigRational) -> ValidityReport
where
    F: Fn(&LabeledSample<L>, &Predictor<L>) -> Result<BigRational>,
{
    let rows = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let run = scheme.compress(s).and_then(|out| {
                let p = scheme.reconstruct(&out.compressed)?;
                Ok((out.size(), loss(s, &p)?))
            });
            match run {
                Ok((size, l)) => ValidityRow {
                    sample: i,
                    size,
                    loss_ok: &l <= tolerance,
                    loss: fmt_big(&l),
                    budget_ok: scheme.size_budget().map_or(true, |b| size <= b),
                    error: None,
                },
                Err(e) => ValidityRow { sample: i, size: 0, loss: String::new(), loss_ok: false, budget_ok: false, error: Some(e.to_string()) },
            }
        })
        .collect();
    ValidityReport { rows }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub passed: bool,
    pub exhaustive: bool,
    pub checked: usize,
    pub gap: usize,
    /// Kept positions of a subsample whose compression differed.
    pub witness: Option<Vec<usize>>,
}

fn signature<L: Clone + Ord>(out: &CompressionOutput<L>) -> (Vec<(usize, L)>, BitString) {
    let mut pairs = out.compressed.pairs.clone();
    pairs.sort();
    (pairs, out.compressed.bits.clone())
}

/// Checks `compress(T) == compress(S)` for subsamples `compress(S) ⊆ T ⊆ S`,
/// as multisets of kept pairs with identical bits.
pub fn verify_stability<L>(scheme: &dyn CompressionScheme<L>, s: &LabeledSample<L>, seed: u64) -> Result<StabilityReport>
where
    L: Clone + Ord + Hash,
{
    let base = scheme.compress(s)?;
    let reference = signature(&base);
    let kept: std::collections::HashSet<usize> = base.kept.iter().copied().collect();
    let free: Vec<usize> = (0..s.len()).filter(|i| !kept.contains(i)).collect();
    let gap = free.len();
    let check = |mask: &dyn Fn(usize) -> bool| -> Result<Option<Vec<usize>>> {
        let positions: Vec<usize> = (0..s.len()).filter(|&i| kept.contains(&i) || free.binary_search(&i).map_or(false, mask)).collect();
        let t = s.select(&positions);
        let out = scheme.compress(&t)?;
        Ok((signature(&out) != reference).then_some(positions))
    };
    let exhaustive = gap <= EXHAUSTIVE_GAP;
    let mut checked = 0;
    if exhaustive {
        for m in 0u32..(1u32 << gap) {
            checked += 1;
            if let Some(w) = check(&|j| (m >> j) & 1 == 1)? {
                return Ok(StabilityReport { passed: false, exhaustive, checked, gap, witness: Some(w) });
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for round in 0..RANDOM_SUBSETS {
            let mut order: Vec<usize> = (0..gap).collect();
            order.shuffle(&mut rng);
            // Always include the two extreme subsets.
            let take = match round {
                0 => 0,
                1 => gap,
                _ => rng.gen_range(0..=gap),
            };
            let chosen: std::collections::HashSet<usize> = order[..take].iter().copied().collect();
            checked += 1;
            if let Some(w) = check(&|j| chosen.contains(&j))? {
                return Ok(StabilityReport { passed: false, exhaustive, checked, gap, witness: Some(w) });
            }
        }
    }
    Ok(StabilityReport { passed: true, exhaustive, checked, gap, witness: None })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlagReport {
    pub flag_claimed: bool,
    pub checked: usize,
    pub failures: usize,
    pub structural_failure: Option<String>,
}

impl FlagReport {
    pub fn passed(&self) -> bool {
        self.flag_claimed && self.failures == 0 && self.structural_failure.is_none()
    }
}

/// Checks `proper` (reconstruction is a table row) or `majorityVote`
/// (reconstruction exposes a concept list whose majority matches pointwise).
pub fn verify_flag(scheme: &dyn CompressionScheme, flag: Flag, class: &ConceptClass, samples: &[LabeledSample]) -> FlagReport {
    let claimed = scheme.flags().has(flag);
    let mut report = FlagReport { flag_claimed: claimed, checked: 0, failures: 0, structural_failure: None };
    if !claimed {
        report.structural_failure = Some(format!("{} does not claim {flag:?}", scheme.name()));
        return report;
    }
    for s in samples {
        let p = match scheme.compress(s).and_then(|o| scheme.reconstruct(&o.compressed)) {
            Ok(p) => p,
            Err(_) => {
                report.failures += 1;
                continue;
            }
        };
        report.checked += 1;
        let ok = match flag {
            Flag::Proper => class.find_row(p.values()).is_some(),
            Flag::MajorityVote => match p.kind() {
                PredictorKind::Majority(list) => Predictor::majority(class, list.clone()).values() == p.values(),
                _ => {
                    report.structural_failure = Some(format!("{} exposes no concept list", scheme.name()));
                    false
                }
            },
            Flag::Stable => true,
        };
        if !ok {
            report.failures += 1;
        }
    }
    report
}

/// Wrapper flipping the reconstruction at the first kept point (point 0
/// when nothing is kept). Binary labels only.
pub struct SabotagedScheme<S>(pub S);

impl<S: CompressionScheme> CompressionScheme for SabotagedScheme<S> {
    fn name(&self) -> &str {
        "sabotaged"
    }

    fn flags(&self) -> SchemeFlags {
        self.0.flags()
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        self.0.compress(s)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let p = self.0.reconstruct(c)?;
        let x = c.pairs.first().map_or(0, |p| p.0);
        let mut values = p.values().to_vec();
        values[x] ^= 1;
        Ok(Predictor::new(values, PredictorKind::Rule))
    }
}

/// Wrapper appending the parity of the sample length to the bits, which
/// changes whenever a single unkept point is removed.
pub struct UnstableScheme<S>(pub S);

impl<S: CompressionScheme> CompressionScheme for UnstableScheme<S> {
    fn name(&self) -> &str {
        "unstable"
    }

    fn flags(&self) -> SchemeFlags {
        self.0.flags()
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        let mut out = self.0.compress(s)?;
        out.compressed.bits.push(s.len() % 2 == 1);
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let mut inner = c.clone();
        let mut bits: Vec<bool> = c.bits.as_slice().to_vec();
        bits.pop();
        inner.bits = bits.into_iter().collect();
        self.0.reconstruct(&inner)
    }
}

/// Counts calls to `reconstruct` and records every input it received.
pub struct TracingScheme<S> {
    pub inner: S,
    pub seen: std::sync::Mutex<Vec<Compressed>>,
}

impl<S> TracingScheme<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, seen: std::sync::Mutex::new(Vec::new()) }
    }
}

impl<S: CompressionScheme> CompressionScheme for TracingScheme<S> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn flags(&self) -> SchemeFlags {
        self.inner.flags()
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        self.inner.compress(s)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        self.seen.lock().expect("poisoned").push(c.clone());
        self.inner.reconstruct(c)
    }
}

/// Zero-one loss of a coded predictor, for use with [`verify_validity`].
pub fn zero_one(s: &LabeledSample, p: &Predictor) -> Result<BigRational> {
    if s.is_empty() {
        return Ok(BigRational::from_integer(0.into()));
    }
    crate::concepts::zero_one_loss(p, s)
}

/// Multiplicities of kept pairs; handy when comparing outputs across samples.
pub fn pair_multiset<L: Clone + Eq + Hash>(pairs: &[(usize, L)]) -> HashMap<(usize, L), usize> {
    let mut m = HashMap::new();
    for p in pairs {
        *m.entry(p.clone()).or_insert(0) += 1;
    }
    m
}
