//! Compression-scheme interface, binary substrates and their registry.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::bits::BitString;
use crate::concepts::{ConceptClass, Label, LabeledSample, Predictor};
use crate::error::{Error, Result};

mod boost;
mod proper;
mod soa;
mod teach;
mod threshold;

pub use boost::MajorityBoostScheme;
pub use proper::ProperExhaustiveScheme;
pub use soa::SoaScheme;
pub use teach::TeachingSetScheme;
pub use threshold::ThresholdStableScheme;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SchemeFlags {
    pub proper: bool,
    pub majority_vote: bool,
    pub stable: bool,
}

impl SchemeFlags {
    pub const NONE: Self = Self { proper: false, majority_vote: false, stable: false };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flag {
    Proper,
    MajorityVote,
    Stable,
}

impl SchemeFlags {
    pub fn has(&self, f: Flag) -> bool {
        match f {
            Flag::Proper => self.proper,
            Flag::MajorityVote => self.majority_vote,
            Flag::Stable => self.stable,
        }
    }
}

/// What the reconstructor receives: the kept pairs and the bitstring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Compressed<L = Label> {
    pub pairs: Vec<(usize, L)>,
    pub bits: BitString,
}

impl<L> Compressed<L> {
    pub fn size(&self) -> usize {
        self.pairs.len() + self.bits.len()
    }
}

/// Side measurements recorded by a compressor for size and invariant audits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Audit {
    /// Size of the substrate output inside a reduction.
    pub substrate_size: Option<usize>,
    /// Number of pairs the substrate kept.
    pub substrate_kept: Option<usize>,
    /// Bits the reduction spent on labels, grid or perturbation indices.
    pub index_bits: usize,
    /// Loop iterations of an iterative compressor.
    pub iterations: Option<usize>,
    /// A bound the iteration count must respect.
    pub iteration_bound: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressionOutput<L = Label> {
    /// Strictly increasing positions into the input sample.
    pub kept: Vec<usize>,
    pub compressed: Compressed<L>,
    pub audit: Audit,
}

impl<L: Clone> CompressionOutput<L> {
    pub fn from_positions(s: &LabeledSample<L>, kept: Vec<usize>, bits: BitString) -> Self {
        debug_assert!(kept.windows(2).all(|w| w[0] < w[1]));
        let pairs = kept.iter().map(|&i| s.pairs[i].clone()).collect();
        Self { kept, compressed: Compressed { pairs, bits }, audit: Audit::default() }
    }
}

impl<L> CompressionOutput<L> {
    pub fn size(&self) -> usize {
        self.compressed.size()
    }
}

/// A compressor/reconstructor pair. `reconstruct` sees only the
/// [`Compressed`] value, never the sample.
pub trait CompressionScheme<L = Label>: Send + Sync {
    fn name(&self) -> &str;

    fn flags(&self) -> SchemeFlags;

    /// Declared upper bound on output size, when one is known.
    fn size_budget(&self) -> Option<usize> {
        None
    }

    fn compress(&self, s: &LabeledSample<L>) -> Result<CompressionOutput<L>>;

    fn reconstruct(&self, c: &Compressed<L>) -> Result<Predictor<L>>;
}

pub type BoxedScheme<L = Label> = Box<dyn CompressionScheme<L>>;

impl<L> CompressionScheme<L> for BoxedScheme<L> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn flags(&self) -> SchemeFlags {
        (**self).flags()
    }

    fn size_budget(&self) -> Option<usize> {
        (**self).size_budget()
    }

    fn compress(&self, s: &LabeledSample<L>) -> Result<CompressionOutput<L>> {
        (**self).compress(s)
    }

    fn reconstruct(&self, c: &Compressed<L>) -> Result<Predictor<L>> {
        (**self).reconstruct(c)
    }
}

pub type SchemeFactory = fn(Arc<ConceptClass>) -> Result<BoxedScheme>;

/// Binary substrates by name.
pub struct Registry {
    factories: BTreeMap<&'static str, SchemeFactory>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self { factories: BTreeMap::new() };
        r.register("proper", |c| Ok(Box::new(ProperExhaustiveScheme::new(c, usize::MAX)?)));
        r.register("boost", |c| Ok(Box::new(MajorityBoostScheme::new(c)?)));
        r.register("threshold", |c| Ok(Box::new(ThresholdStableScheme::new(c)?)));
        r.register("soa", |c| Ok(Box::new(SoaScheme::new(c)?)));
        r.register("teach", |c| Ok(Box::new(TeachingSetScheme::new(c)?)));
        r
    }
}

impl Registry {
    pub fn register(&mut self, name: &'static str, f: SchemeFactory) {
        self.factories.insert(name, f);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }

    pub fn factory(&self, name: &str) -> Result<SchemeFactory> {
        self.factories
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme {name:?}")))
    }

    pub fn build(&self, name: &str, class: Arc<ConceptClass>) -> Result<BoxedScheme> {
        (self.factory(name)?)(class)
    }
}

pub(crate) fn require_binary(class: &ConceptClass) -> Result<()> {
    if class.labels().is_binary() {
        Ok(())
    } else {
        Err(Error::LabelMismatch("binary class required".into()))
    }
}

/// Version space of the sample, or an error when it is empty.
pub(crate) fn realizer(class: &ConceptClass, s: &LabeledSample) -> Result<usize> {
    class.check_sample(s)?;
    class.first_consistent(&s.pairs).ok_or(Error::Unrealizable)
}

/// First position of every distinct pair, in sample order.
pub(crate) fn first_occurrences(s: &LabeledSample) -> Vec<usize> {
    let mut seen = std::collections::HashSet::new();
    (0..s.len()).filter(|&i| seen.insert(s.pairs[i])).collect()
}

pub(crate) fn first_consistent_predictor(class: &ConceptClass, pairs: &[(usize, Label)]) -> Result<Predictor> {
    class.first_consistent(pairs).map(|c| class.predictor(c)).ok_or(Error::Decode("kept pairs are inconsistent with the class".into()))
}
