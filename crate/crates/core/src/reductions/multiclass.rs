//! Multiclass to binary: inflation, the general, proper/majority and stable
//! reductions, the graph-dimension-1 scheme, the piecewise-threshold
//! inflated scheme and the agnostic wrapper.
//!
//! The inflated domain lists `(x, y)` pairs point-major: pair `(x, y)` has
//! index `x * m + y` for `m` labels.

use std::collections::HashSet;
use std::sync::Arc;

use crate::bits::{index_width, BitString};
use crate::bitset::ConceptSet;
use crate::concepts::{erm, ConceptClass, FiniteDomain, Label, LabelSpace, LabeledSample, Loss, Predictor, PredictorKind};
use crate::dimensions::graph_dimension;
use crate::error::{Error, Result};
use crate::schemes::{BoxedScheme, CompressionOutput, CompressionScheme, Compressed, SchemeFlags};

use super::packing::{overhead, pack, unpack};

/// The binary class `{(x, y) -> 1[c(x) = y]}` in the order of `class`.
pub fn inflate_class(class: &ConceptClass) -> Result<ConceptClass> {
    let m = class.labels().size();
    let d = class.domain();
    let names = (0..d.len()).flat_map(|x| (0..m).map(move |y| format!("({},{y})", d.name(x)))).collect();
    let rows = class
        .table()
        .iter()
        .map(|row| row.iter().flat_map(|&c| (0..m as Label).map(move |y| Label::from(c == y))).collect())
        .collect();
    ConceptClass::new(FiniteDomain::new(names)?, LabelSpace::Binary, class.names().to_vec(), rows)
}

/// Every example `(x, y_i)` becomes `((x, y), 1[y = y_i])` for all labels
/// `y`, sample-major.
pub fn inflate_sample(s: &LabeledSample, m: usize) -> LabeledSample {
    let pairs = s
        .pairs
        .iter()
        .flat_map(|&(x, yi)| (0..m).map(move |y| (x * m + y, Label::from(y as Label == yi))))
        .collect();
    LabeledSample::new(pairs)
}

/// Multiclass predictor from an inflated one: the smallest label that
/// fires, or 0 when none does.
fn deflate(h: &Predictor, n: usize, m: usize) -> Vec<Label> {
    (0..n).map(|x| (0..m).find(|&y| *h.predict(x * m + y) == 1).map_or(0, |y| y as Label)).collect()
}

fn deflated_kind(h: &Predictor) -> PredictorKind {
    match h.kind() {
        PredictorKind::Concept(c) => PredictorKind::Concept(*c),
        _ => PredictorKind::Rule,
    }
}

fn check_multiclass(class: &ConceptClass, s: &LabeledSample) -> Result<()> {
    class.check_sample(s)
}

/// Shared state of the reductions over an inflated substrate.
struct Inflated {
    class: Arc<ConceptClass>,
    substrate: BoxedScheme,
    m: usize,
}

impl Inflated {
    fn predictor(&self, h: &Predictor) -> Predictor {
        Predictor::new(deflate(h, self.class.domain().len(), self.m), deflated_kind(h))
    }
}

/// Stores, for every inflated pair the substrate keeps, the original
/// position and the label index in `ceil(log2 m)` bits.
pub struct ReduceGeneral {
    inner: Inflated,
    width: u32,
}

pub fn reduce_general(substrate: BoxedScheme, class: Arc<ConceptClass>) -> Result<ReduceGeneral> {
    let m = class.labels().size();
    Ok(ReduceGeneral { inner: Inflated { class, substrate, m }, width: index_width(m) })
}

impl ReduceGeneral {
    /// Size bound for a substrate output of `f` total, with `kept` pairs
    /// and `sub_bits` raw bits.
    pub fn bound(&self, f: usize, sub_bits: usize, grouped: bool, kept: usize) -> usize {
        f * (1 + self.width as usize) + overhead(grouped, kept, sub_bits)
    }
}

impl CompressionScheme for ReduceGeneral {
    fn name(&self) -> &str {
        "general"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags::NONE
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        check_multiclass(&self.inner.class, s)?;
        let m = self.inner.m;
        let sub = self.inner.substrate.compress(&inflate_sample(s, m))?;
        let pairs: Vec<(usize, usize)> = sub.kept.iter().map(|&p| (p / m, p % m)).collect();
        let packed = pack(&pairs, self.width, &sub.compressed.bits);
        let mut out = CompressionOutput::from_positions(s, packed.kept, packed.bits);
        out.audit.substrate_size = Some(sub.size());
        out.audit.substrate_kept = Some(sub.kept.len());
        out.audit.index_bits = packed.index_bits;
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let m = self.inner.m;
        let (slots, bits) = unpack(c.pairs.len(), self.width, &c.bits)?;
        let pairs = slots
            .into_iter()
            .map(|(slot, y)| {
                if y >= m {
                    return Err(Error::Decode(format!("label index {y} out of range")));
                }
                let (x, yi) = c.pairs[slot];
                Ok((x * m + y, Label::from(y as Label == yi)))
            })
            .collect::<Result<Vec<_>>>()?;
        let h = self.inner.substrate.reconstruct(&Compressed { pairs, bits })?;
        Ok(self.inner.predictor(&h))
    }
}

/// Feeds only the positive inflated pairs `((x_i, y_i), 1)` to a proper or
/// majority-vote substrate; kept positions are shared with the sample.
pub struct ReduceProperOrMajority {
    inner: Inflated,
}

pub fn reduce_proper_or_majority(substrate: BoxedScheme, class: Arc<ConceptClass>) -> Result<ReduceProperOrMajority> {
    let f = substrate.flags();
    if !(f.proper || f.majority_vote) {
        return Err(Error::Construction(format!("{} is neither proper nor majority-vote", substrate.name())));
    }
    let m = class.labels().size();
    Ok(ReduceProperOrMajority { inner: Inflated { class, substrate, m } })
}

impl CompressionScheme for ReduceProperOrMajority {
    fn name(&self) -> &str {
        "proper-majority"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags::NONE
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        check_multiclass(&self.inner.class, s)?;
        let m = self.inner.m;
        let t = LabeledSample::new(s.pairs.iter().map(|&(x, y)| (x * m + y as usize, 1)).collect());
        let sub = self.inner.substrate.compress(&t)?;
        let mut out = CompressionOutput::from_positions(s, sub.kept.clone(), sub.compressed.bits.clone());
        out.audit.substrate_size = Some(sub.size());
        out.audit.substrate_kept = Some(sub.kept.len());
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let m = self.inner.m;
        let pairs = c.pairs.iter().map(|&(x, y)| (x * m + y as usize, 1)).collect();
        let h = self.inner.substrate.reconstruct(&Compressed { pairs, bits: c.bits.clone() })?;
        Ok(self.inner.predictor(&h))
    }
}

/// Positions of the first occurrence of every distinct original pair whose
/// inflation contributed a kept substrate pair.
fn originals_of(s: &LabeledSample, sources: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let touched: HashSet<(usize, Label)> = sources.into_iter().map(|i| s.pairs[i]).collect();
    let mut seen = HashSet::new();
    (0..s.len()).filter(|&i| touched.contains(&s.pairs[i]) && seen.insert(s.pairs[i])).collect()
}

fn sorted_pairs(c: &Compressed) -> (Vec<(usize, Label)>, &BitString) {
    let mut p = c.pairs.clone();
    p.sort_unstable();
    (p, &c.bits)
}

/// Compares the substrate run on the reinflated kept points with its run on
/// the full inflated sample.
pub(crate) fn stability_check(full: &CompressionOutput, reinflated: &CompressionOutput) -> Result<()> {
    if sorted_pairs(&full.compressed) == sorted_pairs(&reinflated.compressed) {
        Ok(())
    } else {
        Err(Error::AssumptionViolated(format!(
            "substrate is not stable: kept {:?} on the full sample but {:?} after reinflation",
            full.compressed.pairs, reinflated.compressed.pairs
        )))
    }
}

/// Keeps the original examples behind the substrate's kept inflated pairs;
/// reconstruction reinflates with every label and reruns the substrate.
pub struct ReduceStable {
    inner: Inflated,
}

pub fn reduce_stable(substrate: BoxedScheme, class: Arc<ConceptClass>) -> Result<ReduceStable> {
    if !substrate.flags().stable {
        return Err(Error::Construction(format!("{} is not stable", substrate.name())));
    }
    let m = class.labels().size();
    Ok(ReduceStable { inner: Inflated { class, substrate, m } })
}

impl CompressionScheme for ReduceStable {
    fn name(&self) -> &str {
        "stable"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags { stable: true, ..SchemeFlags::NONE }
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        check_multiclass(&self.inner.class, s)?;
        let m = self.inner.m;
        let sub = self.inner.substrate.compress(&inflate_sample(s, m))?;
        let kept = originals_of(s, sub.kept.iter().map(|&p| p / m));
        let t = s.select(&kept);
        let again = self.inner.substrate.compress(&inflate_sample(&t, m))?;
        stability_check(&sub, &again)?;
        let mut out = CompressionOutput::from_positions(s, kept, sub.compressed.bits.clone());
        out.audit.substrate_size = Some(sub.size());
        out.audit.substrate_kept = Some(sub.kept.len());
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let t = LabeledSample::new(c.pairs.clone());
        let sub = self.inner.substrate.compress(&inflate_sample(&t, self.inner.m))?;
        if sub.compressed.bits != c.bits {
            return Err(Error::Decode("carried substrate bits do not match".into()));
        }
        let h = self.inner.substrate.reconstruct(&sub.compressed)?;
        Ok(self.inner.predictor(&h))
    }
}

/// Size-one scheme for classes of graph dimension at most 1.
pub struct GraphDim1Scheme {
    class: Arc<ConceptClass>,
}

impl GraphDim1Scheme {
    pub fn new(class: Arc<ConceptClass>) -> Result<Self> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        let g = graph_dimension(&class, 2)?;
        if g.value > 1 {
            return Err(Error::Construction(format!("graph dimension is {} > 1", g.value)));
        }
        Ok(Self { class })
    }

    /// `x <= y` over the class: every concept leaving `c_0` at `x` also
    /// leaves it at `y`.
    fn leq(&self, x: usize, y: usize) -> bool {
        let c0 = self.class.concept(0);
        self.class.table().iter().all(|c| c[x] == c0[x] || c[y] != c0[y])
    }

    /// The element below all others; earliest in `points` on ties.
    fn deepest(&self, points: &[usize]) -> Result<usize> {
        points
            .iter()
            .copied()
            .find(|&p| points.iter().all(|&q| self.leq(p, q)))
            .ok_or_else(|| Error::AssumptionViolated(format!("points {points:?} are not linearly ordered")))
    }

    fn agreeing(&self, x: usize, y: Label) -> ConceptSet {
        self.class.agreeing(x, y)
    }
}

impl CompressionScheme for GraphDim1Scheme {
    fn name(&self) -> &str {
        "graphdim1"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags::NONE
    }

    fn size_budget(&self) -> Option<usize> {
        Some(1)
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        self.class.check_sample(s)?;
        let c = self.class.first_consistent(&s.pairs).ok_or(Error::Unrealizable)?;
        let c0 = self.class.concept(0);
        let cl = self.class.concept(c);
        let mut points: Vec<usize> = Vec::new();
        for &(x, _) in &s.pairs {
            if !points.contains(&x) {
                points.push(x);
            }
        }
        let disagree: Vec<usize> = points.iter().copied().filter(|&x| cl[x] != c0[x]).collect();
        if disagree.is_empty() {
            let mut out = CompressionOutput::from_positions(s, vec![], BitString::new());
            out.audit.iterations = Some(0);
            out.audit.iteration_bound = Some(0);
            return Ok(out);
        }
        let z1 = self.deepest(&disagree)?;
        let chain_len = points.iter().filter(|&&z| self.leq(z1, z)).count();
        let mut z = z1;
        let mut v = self.agreeing(z, cl[z]);
        let mut iterations = 0;
        loop {
            let ambiguous: Vec<usize> = points
                .iter()
                .copied()
                .filter(|&w| self.leq(z, w) && {
                    let mut vals = v.iter().map(|c2| self.class.label(c2, w));
                    let first = vals.next();
                    vals.any(|l| Some(l) != first)
                })
                .collect();
            if ambiguous.is_empty() {
                break;
            }
            let next = self.deepest(&ambiguous)?;
            let v_next = self.agreeing(next, cl[next]);
            if !(v_next.is_subset(&v) && v_next.count() < v.count()) {
                return Err(Error::AssumptionViolated(format!(
                    "consistent set did not shrink when moving from point {z} to {next}"
                )));
            }
            z = next;
            v = v_next;
            iterations += 1;
            if iterations > chain_len {
                return Err(Error::AssumptionViolated("iteration count exceeded the chain length".into()));
            }
        }
        let pos = s.pairs.iter().position(|p| p.0 == z).expect("z is a sample point");
        let mut out = CompressionOutput::from_positions(s, vec![pos], BitString::new());
        out.audit.iterations = Some(iterations);
        out.audit.iteration_bound = Some(chain_len);
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let c0 = self.class.concept(0);
        let n = self.class.domain().len();
        let values = match c.pairs.as_slice() {
            [] => c0.to_vec(),
            [(x, y)] => {
                let v = self.agreeing(*x, *y);
                if v.is_empty() {
                    return Err(Error::Decode("kept pair is inconsistent with the class".into()));
                }
                (0..n)
                    .map(|z| {
                        let vals: HashSet<Label> = v.iter().map(|k| self.class.label(k, z)).collect();
                        if vals.len() == 1 {
                            *vals.iter().next().expect("one value")
                        } else {
                            c0[z]
                        }
                    })
                    .collect()
            }
            _ => return Err(Error::Decode("graph-dimension-1 scheme keeps at most one pair".into())),
        };
        Ok(Predictor::new(values, PredictorKind::Rule))
    }
}

/// Scheme over the inflated class of a piecewise-constant family whose
/// pieces carry distinct labels: per label keep the leftmost and rightmost
/// positive pair, predict 1 between them.
pub struct PiecewiseInflatedScheme {
    inflated: Arc<ConceptClass>,
    n: usize,
    m: usize,
    k: usize,
}

/// Number of maximal constant runs, or `None` if some label occurs in two runs.
pub fn distinct_pieces(row: &[Label]) -> Option<usize> {
    let mut seen = HashSet::new();
    let mut runs = 0;
    for (i, &l) in row.iter().enumerate() {
        if i == 0 || row[i - 1] != l {
            if !seen.insert(l) {
                return None;
            }
            runs += 1;
        }
    }
    Some(runs)
}

pub fn piecewise_threshold_inflated_scheme(class: &ConceptClass, k: usize) -> Result<PiecewiseInflatedScheme> {
    for (i, row) in class.table().iter().enumerate() {
        match distinct_pieces(row) {
            Some(r) if r <= k => {}
            _ => return Err(Error::Construction(format!("concept {} is not {k}-piecewise with distinct labels", class.name(i)))),
        }
    }
    Ok(PiecewiseInflatedScheme { inflated: Arc::new(inflate_class(class)?), n: class.domain().len(), m: class.labels().size(), k })
}

impl PiecewiseInflatedScheme {
    pub fn inflated_class(&self) -> &Arc<ConceptClass> {
        &self.inflated
    }
}

impl CompressionScheme for PiecewiseInflatedScheme {
    fn name(&self) -> &str {
        "piecewise"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags { stable: true, ..SchemeFlags::NONE }
    }

    fn size_budget(&self) -> Option<usize> {
        Some(2 * self.k)
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        self.inflated.check_sample(s)?;
        self.inflated.first_consistent(&s.pairs).ok_or(Error::Unrealizable)?;
        let m = self.m;
        let mut left: Vec<Option<usize>> = vec![None; m];
        let mut right: Vec<Option<usize>> = vec![None; m];
        for (i, &(p, z)) in s.pairs.iter().enumerate() {
            if z != 1 {
                continue;
            }
            let (x, y) = (p / m, p % m);
            if left[y].map_or(true, |j| x < s.pairs[j].0 / m) {
                left[y] = Some(i);
            }
            if right[y].map_or(true, |j| x > s.pairs[j].0 / m) {
                right[y] = Some(i);
            }
        }
        let mut kept: Vec<usize> = left.into_iter().chain(right).flatten().collect();
        kept.sort_unstable();
        kept.dedup();
        Ok(CompressionOutput::from_positions(s, kept, BitString::new()))
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let m = self.m;
        let mut span: Vec<Option<(usize, usize)>> = vec![None; m];
        for &(p, z) in &c.pairs {
            if z != 1 || p >= self.n * m {
                return Err(Error::Decode("piecewise scheme keeps positive pairs only".into()));
            }
            let (x, y) = (p / m, p % m);
            span[y] = Some(span[y].map_or((x, x), |(l, r)| (l.min(x), r.max(x))));
        }
        let values = (0..self.n * m)
            .map(|p| Label::from(span[p % m].is_some_and(|(l, r)| l <= p / m && p / m <= r)))
            .collect();
        Ok(Predictor::new(values, PredictorKind::Rule))
    }
}

/// Runs ERM, drops the examples the minimizer gets wrong, and compresses
/// the rest with a realizable scheme.
pub struct AgnosticWrap {
    inner: BoxedScheme,
    class: Arc<ConceptClass>,
}

pub fn agnostic_wrap(inner: BoxedScheme, class: Arc<ConceptClass>) -> AgnosticWrap {
    AgnosticWrap { inner, class }
}

impl CompressionScheme for AgnosticWrap {
    fn name(&self) -> &str {
        "agnostic"
    }

    fn flags(&self) -> SchemeFlags {
        self.inner.flags()
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        if s.is_empty() {
            return self.inner.compress(s);
        }
        let (c, _) = erm(&self.class, s, &Loss::ZeroOne)?;
        let correct: Vec<usize> = (0..s.len()).filter(|&i| self.class.label(c, s.pairs[i].0) == s.pairs[i].1).collect();
        let sub = self.inner.compress(&s.select(&correct))?;
        let kept = sub.kept.iter().map(|&j| correct[j]).collect();
        let mut out = CompressionOutput::from_positions(s, kept, sub.compressed.bits);
        out.audit = sub.audit;
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        self.inner.reconstruct(c)
    }
}
