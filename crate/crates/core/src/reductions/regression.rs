//! Regression to binary: the threshold class `C_<=`, ε-grids, approximate
//! ℓ∞/ℓp reductions, the majority and stable variants, the exact route
//! through multiclass, and the agnostic wrapper.
//!
//! The threshold domain lists `(x, g)` point-major: index `x * G + g` for a
//! grid of `G` values.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use num::{One, Zero};

use crate::bits::{index_width, BitString};
use crate::concepts::{erm_real, ConceptClass, FiniteDomain, Label, LabelSpace, LabeledSample, Loss, Predictor, PredictorKind};
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, root_bounds, to_big, from_big, Rational};
use crate::schemes::{BoxedScheme, CompressionOutput, CompressionScheme, Compressed, SchemeFlags};

use super::multiclass::stability_check;
use super::packing::{overhead, pack, unpack};

pub type RealSample = LabeledSample<Rational>;

/// Builds a binary substrate for a given binary class.
pub type SubstrateFactory<'a> = &'a dyn Fn(Arc<ConceptClass>) -> Result<BoxedScheme>;

/// Sorted exact grid containing 0 and 1 with gaps at most ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsGrid {
    values: Vec<Rational>,
}

pub fn make_eps_grid(eps: Rational) -> Result<EpsGrid> {
    if eps <= Rational::zero() || eps >= Rational::one() {
        return Err(Error::InvalidParameter(format!("ε = {} must lie in (0, 1)", fmt_rational(&eps))));
    }
    let top = (Rational::one() / eps).floor().to_integer();
    let mut values: BTreeSet<Rational> = (0..=top).map(|c| eps * Rational::from_integer(c)).collect();
    values.insert(Rational::one());
    Ok(EpsGrid { values: values.into_iter().collect() })
}

impl EpsGrid {
    /// The label grid `{i/q}` of a real-grid label space.
    pub fn of_labels(labels: LabelSpace) -> Result<Self> {
        match labels {
            LabelSpace::RealGrid(q) => Ok(Self { values: (0..=q as i64).map(|i| Rational::new(i, q as i64)).collect() }),
            _ => Err(Error::LabelMismatch("realGrid labels required".into())),
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the smallest grid value `>= y`.
    pub fn ceil_index(&self, y: &Rational) -> Option<usize> {
        self.values.iter().position(|v| v >= y)
    }

    /// Largest gap between consecutive values.
    pub fn max_gap(&self) -> Rational {
        self.values.windows(2).map(|w| w[1] - w[0]).max().unwrap_or_else(Rational::zero)
    }
}

/// `C_<=` with rows `(x, g) -> 1[c(x) <= grid[g]]`. Concepts that coincide
/// on the grid share a row; `row_of` maps every concept of the source
/// class to its row.
#[derive(Clone, Debug)]
pub struct ThresholdClass {
    pub class: Arc<ConceptClass>,
    pub row_of: Vec<usize>,
    pub grid: EpsGrid,
}

pub fn class_leq(class: &ConceptClass, grid: &EpsGrid) -> Result<ThresholdClass> {
    if !class.labels().is_real() {
        return Err(Error::LabelMismatch("realGrid class required".into()));
    }
    let labels = class.labels();
    let g = grid.len();
    let d = class.domain();
    let names = (0..d.len())
        .flat_map(|x| grid.values().iter().map(move |v| format!("({},{})", d.name(x), fmt_rational(v))))
        .collect();
    let rows: Vec<Vec<Label>> = class
        .table()
        .iter()
        .map(|row| row.iter().flat_map(|&c| grid.values().iter().map(move |v| Label::from(labels.value(c) <= *v))).collect())
        .collect();
    for row in &rows {
        for x in 0..d.len() {
            if row[x * g..(x + 1) * g].windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Construction("threshold row is not monotone in y".into()));
            }
        }
    }
    let (dedup, row_of) = ConceptClass::from_rows_dedup(FiniteDomain::new(names)?, LabelSpace::Binary, rows)?;
    Ok(ThresholdClass { class: Arc::new(dedup), row_of, grid: grid.clone() })
}

/// `((x_i, y), 1[y_i <= y])` for every grid value, sample-major.
pub fn inflate_sample_eps(s: &RealSample, grid: &EpsGrid) -> LabeledSample {
    let g = grid.len();
    let pairs = s
        .pairs
        .iter()
        .flat_map(|&(x, yi)| grid.values().iter().enumerate().map(move |(j, v)| (x * g + j, Label::from(yi <= *v))))
        .collect();
    LabeledSample::new(pairs)
}

fn check_real_sample(class: &ConceptClass, s: &RealSample) -> Result<()> {
    for &(x, y) in &s.pairs {
        if x >= class.domain().len() {
            return Err(Error::InvalidSample(format!("point {x} outside the domain")));
        }
        if y < Rational::zero() || y > Rational::one() {
            return Err(Error::LabelMismatch(format!("label {} outside [0, 1]", fmt_rational(&y))));
        }
    }
    Ok(())
}

/// Real predictor from a threshold predictor: the smallest firing grid
/// value per point, or 1 when none fires.
fn boundary(h: &Predictor, n: usize, grid: &EpsGrid) -> Predictor<Rational> {
    let g = grid.len();
    let values = (0..n).map(|x| (0..g).find(|&j| *h.predict(x * g + j) == 1).map_or(Rational::one(), |j| grid.values()[j])).collect();
    Predictor::new(values, PredictorKind::Rule)
}

struct Thresholded {
    class: Arc<ConceptClass>,
    leq: ThresholdClass,
    substrate: BoxedScheme,
}

impl Thresholded {
    fn new(class: Arc<ConceptClass>, grid: EpsGrid, factory: SubstrateFactory<'_>) -> Result<Self> {
        let leq = class_leq(&class, &grid)?;
        let substrate = factory(leq.class.clone())?;
        Ok(Self { class, leq, substrate })
    }

    fn g(&self) -> usize {
        self.leq.grid.len()
    }

    fn real(&self, h: &Predictor) -> Predictor<Rational> {
        boundary(h, self.class.domain().len(), &self.leq.grid)
    }
}

/// Stores every kept threshold pair as its original position plus the
/// grid index.
pub struct ReduceEpsLinf {
    inner: Thresholded,
    width: u32,
    eps: Rational,
}

pub fn reduce_eps_linf(factory: SubstrateFactory<'_>, class: Arc<ConceptClass>, eps: Rational) -> Result<ReduceEpsLinf> {
    let inner = Thresholded::new(class, make_eps_grid(eps)?, factory)?;
    let width = index_width(inner.g());
    Ok(ReduceEpsLinf { inner, width, eps })
}

impl ReduceEpsLinf {
    pub fn eps(&self) -> Rational {
        self.eps
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.inner.leq.grid
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bound(&self, f: usize, sub_bits: usize, grouped: bool, kept: usize) -> usize {
        f * (1 + self.width as usize) + overhead(grouped, kept, sub_bits)
    }
}

impl CompressionScheme<Rational> for ReduceEpsLinf {
    fn name(&self) -> &str {
        "linf"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags::NONE
    }

    fn compress(&self, s: &RealSample) -> Result<CompressionOutput<Rational>> {
        check_real_sample(&self.inner.class, s)?;
        let g = self.inner.g();
        let sub = self.inner.substrate.compress(&inflate_sample_eps(s, &self.inner.leq.grid))?;
        let pairs: Vec<(usize, usize)> = sub.kept.iter().map(|&p| (p / g, p % g)).collect();
        let packed = pack(&pairs, self.width, &sub.compressed.bits);
        let mut out = CompressionOutput::from_positions(s, packed.kept, packed.bits);
        out.audit.substrate_size = Some(sub.size());
        out.audit.substrate_kept = Some(sub.kept.len());
        out.audit.index_bits = packed.index_bits;
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed<Rational>) -> Result<Predictor<Rational>> {
        let g = self.inner.g();
        let grid = self.inner.leq.grid.values();
        let (slots, bits) = unpack(c.pairs.len(), self.width, &c.bits)?;
        let pairs = slots
            .into_iter()
            .map(|(slot, j)| {
                let (x, yi) = c.pairs[slot];
                let v = grid.get(j).ok_or_else(|| Error::Decode(format!("grid index {j} out of range")))?;
                Ok((x * g + j, Label::from(yi <= *v)))
            })
            .collect::<Result<Vec<_>>>()?;
        let h = self.inner.substrate.reconstruct(&Compressed { pairs, bits })?;
        Ok(self.inner.real(&h))
    }
}

/// Internal ℓ∞ tolerance for an ℓp target: the exact root `ε^(1/p)` when
/// it is rational, otherwise the largest unit fraction below it.
pub fn lp_tolerance(eps: Rational, p: Rational) -> Result<Rational> {
    if p < Rational::one() {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    let a = u32::try_from(*p.numer()).map_err(|_| Error::InvalidParameter("p too large".into()))?;
    let b = u32::try_from(*p.denom()).map_err(|_| Error::InvalidParameter("p too large".into()))?;
    // ε^(b/a): exact when the a-th root of ε^b is rational.
    let base = num::pow::pow(to_big(&eps), b as usize);
    let (lo, hi) = root_bounds(&base, a)?;
    if lo == hi {
        if let Some(r) = from_big(&lo) {
            return Ok(r);
        }
    }
    let mut n: i64 = 1;
    loop {
        let nb = num::BigRational::from_integer(num::BigInt::from(n));
        if num::pow::pow(nb, a as usize) * &base >= num::BigRational::one() {
            return Ok(Rational::new(1, n));
        }
        n += 1;
    }
}

/// ℓp reduction: the ℓ∞ reduction at tolerance [`lp_tolerance`].
pub fn reduce_eps_lp(factory: SubstrateFactory<'_>, class: Arc<ConceptClass>, eps: Rational, p: Rational) -> Result<ReduceEpsLinf> {
    let mut r = reduce_eps_linf(factory, class, lp_tolerance(eps, p)?)?;
    r.eps = eps;
    Ok(r)
}

/// Two bracketing threshold pairs per example fed to a proper or
/// majority-vote substrate; two bits per kept example say which survived.
pub struct ReduceMajorityRegression {
    inner: Thresholded,
}

pub fn reduce_majority_regression(factory: SubstrateFactory<'_>, class: Arc<ConceptClass>, eps: Rational) -> Result<ReduceMajorityRegression> {
    let inner = Thresholded::new(class, make_eps_grid(eps)?, factory)?;
    let f = inner.substrate.flags();
    if !(f.proper || f.majority_vote) {
        return Err(Error::Construction(format!("{} is neither proper nor majority-vote", inner.substrate.name())));
    }
    Ok(ReduceMajorityRegression { inner })
}

impl ReduceMajorityRegression {
    /// Threshold pairs for one example: the 0-pair at the largest grid
    /// value below `y` (when one exists), then the 1-pair at the smallest
    /// value at or above `y`.
    fn brackets(&self, x: usize, y: &Rational) -> (Option<(usize, Label)>, (usize, Label)) {
        let g = self.inner.g();
        let up = self.inner.leq.grid.ceil_index(y).expect("labels lie in [0, 1]");
        ((up > 0).then(|| (x * g + up - 1, 0)), (x * g + up, 1))
    }
}

impl CompressionScheme<Rational> for ReduceMajorityRegression {
    fn name(&self) -> &str {
        "majority"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags::NONE
    }

    fn compress(&self, s: &RealSample) -> Result<CompressionOutput<Rational>> {
        check_real_sample(&self.inner.class, s)?;
        let mut t = Vec::new();
        let mut source = Vec::new();
        for (i, (x, y)) in s.pairs.iter().enumerate() {
            let (lo, up) = self.brackets(*x, y);
            if let Some(p) = lo {
                t.push(p);
                source.push((i, 0u8));
            }
            t.push(up);
            source.push((i, 1u8));
        }
        let sub = self.inner.substrate.compress(&LabeledSample::new(t))?;
        let mut kept: Vec<usize> = sub.kept.iter().map(|&p| source[p].0).collect();
        kept.dedup();
        let mut bits = BitString::new();
        for &i in &kept {
            for side in [0u8, 1] {
                bits.push(sub.kept.iter().any(|&p| source[p] == (i, side)));
            }
        }
        bits.extend(&sub.compressed.bits);
        let mut out = CompressionOutput::from_positions(s, kept, bits);
        out.audit.substrate_size = Some(sub.size());
        out.audit.substrate_kept = Some(sub.kept.len());
        out.audit.index_bits = 2 * out.kept.len();
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed<Rational>) -> Result<Predictor<Rational>> {
        let mut r = c.bits.reader();
        let mut pairs = Vec::new();
        for (x, y) in &c.pairs {
            let (lo, up) = self.brackets(*x, y);
            if r.bit()? {
                pairs.push(lo.ok_or_else(|| Error::Decode("0-pair flagged where none exists".into()))?);
            }
            if r.bit()? {
                pairs.push(up);
            }
        }
        let bits = r.rest();
        let h = self.inner.substrate.reconstruct(&Compressed { pairs, bits })?;
        let g = self.inner.g();
        for x in 0..self.inner.class.domain().len() {
            if (0..g - 1).any(|j| *h.predict(x * g + j) > *h.predict(x * g + j + 1)) {
                return Err(Error::AssumptionViolated(format!("reconstruction is not monotone in y at point {x}")));
            }
        }
        Ok(self.inner.real(&h))
    }
}

/// Keeps the original examples behind the substrate's kept threshold
/// pairs; reconstruction reinflates them over the grid and reruns the
/// substrate.
pub struct ReduceStableRegression {
    inner: Thresholded,
}

pub fn reduce_stable_regression(factory: SubstrateFactory<'_>, class: Arc<ConceptClass>, eps: Rational) -> Result<ReduceStableRegression> {
    let inner = Thresholded::new(class, make_eps_grid(eps)?, factory)?;
    if !inner.substrate.flags().stable {
        return Err(Error::Construction(format!("{} is not stable", inner.substrate.name())));
    }
    Ok(ReduceStableRegression { inner })
}

fn originals_of<L: Clone + Eq + std::hash::Hash>(s: &LabeledSample<L>, sources: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let touched: HashSet<(usize, L)> = sources.into_iter().map(|i| s.pairs[i].clone()).collect();
    let mut seen = HashSet::new();
    (0..s.len()).filter(|&i| touched.contains(&s.pairs[i]) && seen.insert(s.pairs[i].clone())).collect()
}

impl CompressionScheme<Rational> for ReduceStableRegression {
    fn name(&self) -> &str {
        "stable"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags { stable: true, ..SchemeFlags::NONE }
    }

    fn compress(&self, s: &RealSample) -> Result<CompressionOutput<Rational>> {
        check_real_sample(&self.inner.class, s)?;
        let g = self.inner.g();
        let grid = &self.inner.leq.grid;
        let sub = self.inner.substrate.compress(&inflate_sample_eps(s, grid))?;
        let kept = originals_of(s, sub.kept.iter().map(|&p| p / g));
        let again = self.inner.substrate.compress(&inflate_sample_eps(&s.select(&kept), grid))?;
        stability_check(&sub, &again)?;
        let mut out = CompressionOutput::from_positions(s, kept, sub.compressed.bits.clone());
        out.audit.substrate_size = Some(sub.size());
        out.audit.substrate_kept = Some(sub.kept.len());
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed<Rational>) -> Result<Predictor<Rational>> {
        let t = LabeledSample::new(c.pairs.clone());
        let sub = self.inner.substrate.compress(&inflate_sample_eps(&t, &self.inner.leq.grid))?;
        if sub.compressed.bits != c.bits {
            return Err(Error::Decode("carried substrate bits do not match".into()));
        }
        let h = self.inner.substrate.reconstruct(&sub.compressed)?;
        Ok(self.inner.real(&h))
    }
}

/// Builds a multiclass scheme for a multiclass class.
pub type MulticlassFactory<'a> = &'a dyn Fn(Arc<ConceptClass>) -> Result<BoxedScheme>;

/// A real-grid class seen as a multiclass class over its attained values.
pub struct ExactViaMulticlass {
    values: Vec<Rational>,
    multiclass: Arc<ConceptClass>,
    scheme: BoxedScheme,
}

/// Relabels the class by the index of each attained value.
pub fn as_multiclass(class: &ConceptClass) -> Result<(ConceptClass, Vec<Rational>)> {
    if !class.labels().is_real() {
        return Err(Error::LabelMismatch("realGrid class required".into()));
    }
    let attained: BTreeSet<Label> = class.table().iter().flatten().copied().collect();
    let codes: Vec<Label> = attained.into_iter().collect();
    let values = codes.iter().map(|&c| class.labels().value(c)).collect();
    let rows = class.table().iter().map(|r| r.iter().map(|l| codes.binary_search(l).expect("attained") as Label).collect()).collect();
    let m = codes.len().max(2) as u32;
    Ok((ConceptClass::new(class.domain().clone(), LabelSpace::Multiclass(m), class.names().to_vec(), rows)?, values))
}

pub fn exact_via_multiclass(factory: MulticlassFactory<'_>, class: &ConceptClass) -> Result<ExactViaMulticlass> {
    let (mc, values) = as_multiclass(class)?;
    let multiclass = Arc::new(mc);
    let scheme = factory(multiclass.clone())?;
    Ok(ExactViaMulticlass { values, multiclass, scheme })
}

impl ExactViaMulticlass {
    pub fn multiclass(&self) -> &Arc<ConceptClass> {
        &self.multiclass
    }

    fn code(&self, y: &Rational) -> Result<Label> {
        self.values.binary_search(y).map(|i| i as Label).map_err(|_| Error::Unrealizable)
    }

    fn value(&self, l: Label) -> Rational {
        self.values.get(l as usize).copied().unwrap_or_else(Rational::zero)
    }
}

impl CompressionScheme<Rational> for ExactViaMulticlass {
    fn name(&self) -> &str {
        "exact"
    }

    fn flags(&self) -> SchemeFlags {
        self.scheme.flags()
    }

    fn compress(&self, s: &RealSample) -> Result<CompressionOutput<Rational>> {
        let coded = LabeledSample::new(s.pairs.iter().map(|&(x, y)| Ok((x, self.code(&y)?))).collect::<Result<Vec<_>>>()?);
        let out = self.scheme.compress(&coded)?;
        let mut real = CompressionOutput::from_positions(s, out.kept, out.compressed.bits);
        real.audit = out.audit;
        Ok(real)
    }

    fn reconstruct(&self, c: &Compressed<Rational>) -> Result<Predictor<Rational>> {
        let pairs = c.pairs.iter().map(|&(x, y)| Ok((x, self.code(&y).map_err(|_| Error::Decode("kept label is not attained".into()))?))).collect::<Result<Vec<_>>>()?;
        let p = self.scheme.reconstruct(&Compressed { pairs, bits: c.bits.clone() })?;
        Ok(Predictor::new(p.values().iter().map(|&l| self.value(l)).collect(), p.kind().clone()))
    }
}

/// ERM, relabel by the minimizer, then compress with the ℓ∞ reduction at
/// an internal tolerance: ε for ℓ∞, ε/p for ℓp (|t|^p is p-Lipschitz on
/// [0, 1]).
pub struct AgnosticRegression {
    class: Arc<ConceptClass>,
    loss: Loss,
    inner: ReduceEpsLinf,
}

pub fn agnostic_tolerance(eps: Rational, loss: &Loss) -> Result<Rational> {
    match loss {
        Loss::LInf => Ok(eps),
        Loss::Lp(p) => Ok(eps / p),
        Loss::ZeroOne => Err(Error::InvalidParameter("agnostic regression needs lInf or lp".into())),
    }
}

pub fn agnostic_regression(factory: SubstrateFactory<'_>, class: Arc<ConceptClass>, eps: Rational, loss: Loss) -> Result<AgnosticRegression> {
    let inner = reduce_eps_linf(factory, class.clone(), agnostic_tolerance(eps, &loss)?)?;
    Ok(AgnosticRegression { class, loss, inner })
}

impl CompressionScheme<Rational> for AgnosticRegression {
    fn name(&self) -> &str {
        "agnostic"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags::NONE
    }

    fn compress(&self, s: &RealSample) -> Result<CompressionOutput<Rational>> {
        if s.is_empty() {
            return self.inner.compress(s);
        }
        check_real_sample(&self.class, s)?;
        let (c, _) = erm_real(&self.class, s, &self.loss)?;
        let relabeled = LabeledSample::new(s.pairs.iter().map(|&(x, _)| (x, self.class.labels().value(self.class.label(c, x)))).collect());
        let out = self.inner.compress(&relabeled)?;
        // Kept pairs stay the true examples; the minimizer's label codes at
        // those points ride ahead of the inner bits.
        let width = self.code_width();
        let mut bits = BitString::new();
        for &i in &out.kept {
            bits.push_fixed(self.class.label(c, s.pairs[i].0) as usize, width);
        }
        bits.extend(&out.compressed.bits);
        let mut res = CompressionOutput::from_positions(s, out.kept, bits);
        res.audit = out.audit;
        res.audit.index_bits += width as usize * res.kept.len();
        Ok(res)
    }

    fn reconstruct(&self, c: &Compressed<Rational>) -> Result<Predictor<Rational>> {
        let width = self.code_width();
        let mut r = c.bits.reader();
        let pairs = c
            .pairs
            .iter()
            .map(|&(x, _)| {
                let code = r.fixed(width)? as Label;
                if !self.class.labels().contains(code) {
                    return Err(Error::Decode(format!("label code {code} out of range")));
                }
                Ok((x, self.class.labels().value(code)))
            })
            .collect::<Result<Vec<_>>>()?;
        self.inner.reconstruct(&Compressed { pairs, bits: r.rest() })
    }
}

impl AgnosticRegression {
    fn code_width(&self) -> u32 {
        index_width(self.class.labels().size())
    }
}
