//! Finite domains, label spaces, concept tables, samples, predictors and
//! empirical losses.

use std::collections::HashMap;
use std::sync::Arc;

use num::rational::BigRational;
use num::{BigInt, Signed, Zero};

use crate::bitset::ConceptSet;
use crate::error::{Error, Result};
use crate::rational::{pow_big, rational_power_bounds, to_big, Rational};

/// Label code. Binary and multiclass labels are class indices; real-grid
/// labels are numerators `i` of `i/q`.
pub type Label = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDomain {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl FiniteDomain {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidClass("empty domain".into()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidClass(format!("duplicate point {n:?}")));
            }
        }
        Ok(Self { names, index })
    }

    /// Domain `0..n` named by decimal indices.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, x: usize) -> &str {
        &self.names[x]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LabelSpace {
    Binary,
    Multiclass(u32),
    /// Labels `i/q` for `i` in `0..=q`.
    RealGrid(u32),
}

impl LabelSpace {
    pub fn size(&self) -> usize {
        match *self {
            LabelSpace::Binary => 2,
            LabelSpace::Multiclass(m) => m as usize,
            LabelSpace::RealGrid(q) => q as usize + 1,
        }
    }

    pub fn contains(&self, l: Label) -> bool {
        (l as usize) < self.size()
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, LabelSpace::Binary)
    }

    pub fn is_real(&self) -> bool {
        matches!(self, LabelSpace::RealGrid(_))
    }

    /// Numeric value of a label code.
    pub fn value(&self, l: Label) -> Rational {
        match *self {
            LabelSpace::RealGrid(q) => Rational::new(l as i64, q as i64),
            _ => Rational::from_integer(l as i64),
        }
    }

    /// Code of an exact value, if it lies in the space.
    pub fn code_of(&self, v: &Rational) -> Option<Label> {
        let scaled = match *self {
            LabelSpace::RealGrid(q) => v * Rational::from_integer(q as i64),
            _ => *v,
        };
        if !scaled.is_integer() || scaled.is_negative() {
            return None;
        }
        let c = u32::try_from(*scaled.numer()).ok()?;
        self.contains(c).then_some(c)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LabelSpace::Multiclass(m) if m < 2 => Err(Error::InvalidClass("multiclass needs m >= 2".into())),
            LabelSpace::RealGrid(0) => Err(Error::InvalidClass("realGrid needs q >= 1".into())),
            _ => Ok(()),
        }
    }
}

/// An explicit table of pairwise-distinct concepts over a finite domain.
/// Row order is the canonical concept order used for every tie-break.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptClass {
    domain: FiniteDomain,
    labels: LabelSpace,
    names: Vec<String>,
    table: Vec<Vec<Label>>,
}

impl ConceptClass {
    pub fn new(domain: FiniteDomain, labels: LabelSpace, names: Vec<String>, table: Vec<Vec<Label>>) -> Result<Self> {
        labels.validate()?;
        if names.len() != table.len() {
            return Err(Error::InvalidClass("one name per concept required".into()));
        }
        let mut seen_names = HashMap::new();
        let mut seen_rows = HashMap::new();
        for (i, (name, row)) in names.iter().zip(&table).enumerate() {
            if seen_names.insert(name.as_str(), i).is_some() {
                return Err(Error::InvalidClass(format!("duplicate concept name {name:?}")));
            }
            if row.len() != domain.len() {
                return Err(Error::InvalidClass(format!("concept {name:?} has wrong arity")));
            }
            if let Some(&l) = row.iter().find(|&&l| !labels.contains(l)) {
                return Err(Error::InvalidClass(format!("concept {name:?} has label {l} outside the label space")));
            }
            if let Some(j) = seen_rows.insert(row.as_slice(), i) {
                return Err(Error::InvalidClass(format!("concepts {:?} and {name:?} are identical", names[j])));
            }
        }
        Ok(Self { domain, labels, names, table })
    }

    /// Builds a class with generated names `c0, c1, ...`.
    pub fn from_rows(domain: FiniteDomain, labels: LabelSpace, table: Vec<Vec<Label>>) -> Result<Self> {
        let names = (0..table.len()).map(|i| format!("c{i}")).collect();
        Self::new(domain, labels, names, table)
    }

    /// Like [`ConceptClass::from_rows`] but merges identical rows, keeping
    /// the first. Returns the row index of every input row.
    pub fn from_rows_dedup(domain: FiniteDomain, labels: LabelSpace, table: Vec<Vec<Label>>) -> Result<(Self, Vec<usize>)> {
        let mut index: HashMap<Vec<Label>, usize> = HashMap::new();
        let mut rows = Vec::new();
        let mut map = Vec::with_capacity(table.len());
        for row in table {
            let next = rows.len();
            let id = *index.entry(row.clone()).or_insert(next);
            if id == next {
                rows.push(row);
            }
            map.push(id);
        }
        Ok((Self::from_rows(domain, labels, rows)?, map))
    }

    pub fn domain(&self) -> &FiniteDomain {
        &self.domain
    }

    pub fn labels(&self) -> LabelSpace {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn name(&self, c: usize) -> &str {
        &self.names[c]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn concept(&self, c: usize) -> &[Label] {
        &self.table[c]
    }

    pub fn table(&self) -> &[Vec<Label>] {
        &self.table
    }

    pub fn label(&self, c: usize, x: usize) -> Label {
        self.table[c][x]
    }

    pub fn all(&self) -> ConceptSet {
        ConceptSet::full(self.len())
    }

    /// Concepts assigning `y` to `x`.
    pub fn agreeing(&self, x: usize, y: Label) -> ConceptSet {
        let mut s = ConceptSet::empty(self.len());
        for (c, row) in self.table.iter().enumerate() {
            if row[x] == y {
                s.insert(c);
            }
        }
        s
    }

    /// Version space of a sequence of pairs.
    pub fn version_space(&self, pairs: &[(usize, Label)]) -> ConceptSet {
        let mut s = self.all();
        for c in 0..self.len() {
            if pairs.iter().any(|&(x, y)| self.table[c][x] != y) {
                s.remove(c);
            }
        }
        s
    }

    pub fn first_consistent(&self, pairs: &[(usize, Label)]) -> Option<usize> {
        (0..self.len()).find(|&c| pairs.iter().all(|&(x, y)| self.table[c][x] == y))
    }

    /// Predictor evaluating concept `c`.
    pub fn predictor(&self, c: usize) -> Predictor {
        Predictor::new(self.table[c].clone(), PredictorKind::Concept(c))
    }

    /// Row index of a pointwise-identical concept, if any.
    pub fn find_row(&self, values: &[Label]) -> Option<usize> {
        self.table.iter().position(|r| r.as_slice() == values)
    }

    pub fn check_sample(&self, s: &LabeledSample) -> Result<()> {
        for &(x, y) in &s.pairs {
            if x >= self.domain.len() {
                return Err(Error::InvalidSample(format!("point {x} outside the domain")));
            }
            if !self.labels.contains(y) {
                return Err(Error::LabelMismatch(format!("label {y} outside {:?}", self.labels)));
            }
        }
        Ok(())
    }

    /// Real labels converted to codes; `None` when some label is off the class grid.
    pub fn code_sample(&self, s: &LabeledSample<Rational>) -> Option<LabeledSample> {
        s.pairs
            .iter()
            .map(|&(x, v)| self.labels.code_of(&v).map(|c| (x, c)))
            .collect::<Option<Vec<_>>>()
            .map(LabeledSample::new)
    }

    pub fn value_predictor(&self, p: &Predictor) -> Predictor<Rational> {
        Predictor::new(p.values().iter().map(|&l| self.labels.value(l)).collect(), p.kind().clone())
    }
}

/// Partial binary concepts: `None` marks a point outside the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialClass {
    domain: FiniteDomain,
    names: Vec<String>,
    table: Vec<Vec<Option<bool>>>,
}

impl PartialClass {
    pub fn new(domain: FiniteDomain, names: Vec<String>, table: Vec<Vec<Option<bool>>>) -> Result<Self> {
        if names.len() != table.len() {
            return Err(Error::InvalidClass("one name per concept required".into()));
        }
        for (name, row) in names.iter().zip(&table) {
            if row.len() != domain.len() {
                return Err(Error::InvalidClass(format!("partial concept {name:?} has wrong arity")));
            }
            if row.iter().all(Option::is_none) {
                return Err(Error::InvalidClass(format!("partial concept {name:?} has empty support")));
            }
        }
        Ok(Self { domain, names, table })
    }

    pub fn domain(&self) -> &FiniteDomain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn value(&self, c: usize, x: usize) -> Option<bool> {
        self.table[c][x]
    }

    pub fn support(&self, c: usize) -> Vec<usize> {
        (0..self.domain.len()).filter(|&x| self.table[c][x].is_some()).collect()
    }

    /// Realizable: some concept has every sample point in its support with the right label.
    pub fn is_realizable(&self, s: &LabeledSample) -> Option<usize> {
        (0..self.len()).find(|&c| s.pairs.iter().all(|&(x, y)| self.table[c][x] == Some(y == 1)))
    }

    /// Every partial class is a total class when it happens to have full support.
    pub fn to_total(&self) -> Option<ConceptClass> {
        let rows = self
            .table
            .iter()
            .map(|r| r.iter().map(|v| v.map(Label::from)).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        ConceptClass::new(self.domain.clone(), LabelSpace::Binary, self.names.clone(), rows).ok()
    }
}

/// Ordered sequence of `(point, label)` pairs; repeats allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LabeledSample<L = Label> {
    pub pairs: Vec<(usize, L)>,
}

impl<L> LabeledSample<L> {
    pub fn new(pairs: Vec<(usize, L)>) -> Self {
        Self { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl<L: Clone> LabeledSample<L> {
    /// Subsequence at increasing positions.
    pub fn select(&self, positions: &[usize]) -> Self {
        Self::new(positions.iter().map(|&i| self.pairs[i].clone()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredictorKind {
    /// A row of the concept table.
    Concept(usize),
    /// Pointwise majority of the listed rows, ties to 0.
    Majority(Vec<usize>),
    /// Any other deterministic reconstruction rule.
    Rule,
}

/// A total map from domain points to labels, materialized as a table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predictor<L = Label> {
    values: Vec<L>,
    kind: PredictorKind,
}

impl<L> Predictor<L> {
    pub fn new(values: Vec<L>, kind: PredictorKind) -> Self {
        Self { values, kind }
    }

    pub fn predict(&self, x: usize) -> &L {
        &self.values[x]
    }

    pub fn values(&self) -> &[L] {
        &self.values
    }

    pub fn kind(&self) -> &PredictorKind {
        &self.kind
    }

    pub fn domain_len(&self) -> usize {
        self.values.len()
    }
}

impl Predictor {
    pub fn constant(n: usize, l: Label) -> Self {
        Self::new(vec![l; n], PredictorKind::Rule)
    }

    /// Pointwise majority of binary concepts, ties to 0.
    pub fn majority(class: &ConceptClass, members: Vec<usize>) -> Self {
        let n = class.domain().len();
        let values = (0..n)
            .map(|x| {
                let ones = members.iter().filter(|&&c| class.label(c, x) == 1).count();
                Label::from(2 * ones > members.len())
            })
            .collect();
        Self::new(values, PredictorKind::Majority(members))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Loss {
    ZeroOne,
    /// `(1/n) sum |p(x) - y|^p` for rational `p >= 1`.
    Lp(Rational),
    LInf,
}

impl Loss {
    pub fn lp(p: i64) -> Self {
        Loss::Lp(Rational::from_integer(p))
    }
}

/// Exact value, or a certified bracket for non-integer exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LossValue {
    Exact(BigRational),
    Bounds(BigRational, BigRational),
}

impl LossValue {
    pub fn upper(&self) -> &BigRational {
        match self {
            LossValue::Exact(v) | LossValue::Bounds(_, v) => v,
        }
    }

    pub fn lower(&self) -> &BigRational {
        match self {
            LossValue::Exact(v) | LossValue::Bounds(v, _) => v,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            LossValue::Exact(v) => Some(v),
            LossValue::Bounds(..) => None,
        }
    }
}

fn frac(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Fraction of pairs the predictor gets wrong.
pub fn zero_one_loss<L: PartialEq>(p: &Predictor<L>, s: &LabeledSample<L>) -> Result<BigRational> {
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let wrong = s.pairs.iter().filter(|(x, y)| p.predict(*x) != y).count();
    Ok(frac(wrong, s.len()))
}

/// Loss of a real-valued predictor on a real-labeled sample.
pub fn real_loss(p: &Predictor<Rational>, s: &LabeledSample<Rational>, loss: &Loss) -> Result<LossValue> {
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = BigRational::from_integer(BigInt::from(s.len()));
    let diffs = s.pairs.iter().map(|(x, y)| to_big(&(p.predict(*x) - y).abs()));
    match loss {
        Loss::ZeroOne => zero_one_loss(p, s).map(LossValue::Exact),
        Loss::LInf => Ok(LossValue::Exact(diffs.max().unwrap_or_else(BigRational::zero))),
        Loss::Lp(e) => {
            if *e < Rational::from_integer(1) {
                return Err(Error::InvalidParameter("lp loss needs p >= 1".into()));
            }
            if e.is_integer() {
                let k = u32::try_from(*e.numer()).map_err(|_| Error::InvalidParameter("p too large".into()))?;
                let sum: BigRational = diffs.map(|d| pow_big(&d, k)).sum();
                Ok(LossValue::Exact(sum / n))
            } else {
                let mut lo = BigRational::zero();
                let mut hi = BigRational::zero();
                for d in diffs {
                    let (l, h) = rational_power_bounds(&d, e)?;
                    lo += l;
                    hi += h;
                }
                Ok(LossValue::Bounds(lo / &n, hi / n))
            }
        }
    }
}

/// Loss of a coded predictor on a coded sample. `lp`/`lInf` need a real grid.
pub fn empirical_loss(p: &Predictor, s: &LabeledSample, labels: LabelSpace, loss: &Loss) -> Result<LossValue> {
    match loss {
        Loss::ZeroOne => zero_one_loss(p, s).map(LossValue::Exact),
        _ => {
            if !labels.is_real() {
                return Err(Error::LabelMismatch("real-valued loss needs realGrid labels".into()));
            }
            let pv = Predictor::new(p.values().iter().map(|&l| labels.value(l)).collect(), PredictorKind::Rule);
            let sv = LabeledSample::new(s.pairs.iter().map(|&(x, y)| (x, labels.value(y))).collect());
            real_loss(&pv, &sv, loss)
        }
    }
}

/// Canonically-first concept with zero loss on the sample. Zero loss is the
/// same event for every supported loss, so no loss argument is needed.
pub fn is_realizable(class: &ConceptClass, s: &LabeledSample) -> Option<usize> {
    class.first_consistent(&s.pairs)
}

fn concept_loss(class: &ConceptClass, c: usize, s: &LabeledSample<Rational>, loss: &Loss) -> Result<LossValue> {
    let p = Predictor::new(
        class.concept(c).iter().map(|&l| class.labels().value(l)).collect(),
        PredictorKind::Concept(c),
    );
    real_loss(&p, s, loss)
}

/// Canonically-first empirical risk minimizer, compared exactly (by lower
/// bound for certified brackets).
pub fn erm(class: &ConceptClass, s: &LabeledSample, loss: &Loss) -> Result<(usize, LossValue)> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    if matches!(loss, Loss::ZeroOne) {
        let (c, wrong) = (0..class.len())
            .map(|c| (c, s.pairs.iter().filter(|&&(x, y)| class.label(c, x) != y).count()))
            .min_by_key(|&(c, w)| (w, c))
            .expect("non-empty class");
        return Ok((c, LossValue::Exact(frac(wrong, s.len()))));
    }
    if !class.labels().is_real() {
        return Err(Error::LabelMismatch("real-valued loss needs realGrid labels".into()));
    }
    let sv = LabeledSample::new(s.pairs.iter().map(|&(x, y)| (x, class.labels().value(y))).collect());
    erm_real(class, &sv, loss)
}

/// ERM of a real-grid class against arbitrary rational labels.
pub fn erm_real(class: &ConceptClass, s: &LabeledSample<Rational>, loss: &Loss) -> Result<(usize, LossValue)> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    if s.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut best: Option<(usize, LossValue)> = None;
    for c in 0..class.len() {
        let v = concept_loss(class, c, s, loss)?;
        if best.as_ref().map_or(true, |(_, b)| v.lower() < b.lower()) {
            best = Some((c, v));
        }
    }
    Ok(best.expect("non-empty class"))
}

pub type SharedClass = Arc<ConceptClass>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn thresholds(n: usize) -> ConceptClass {
        let rows = (-1..n as i64)
            .map(|t| (0..n as i64).map(|x| Label::from(x <= t)).collect())
            .collect();
        ConceptClass::from_rows(FiniteDomain::indexed(n).unwrap(), LabelSpace::Binary, rows).unwrap()
    }

    fn big(n: i64, d: i64) -> BigRational {
        to_big(&rat(n, d))
    }

    #[test]
    fn rejects_duplicates_and_bad_labels() {
        let d = FiniteDomain::indexed(2).unwrap();
        assert!(ConceptClass::from_rows(d.clone(), LabelSpace::Binary, vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(ConceptClass::from_rows(d.clone(), LabelSpace::Binary, vec![vec![0, 2]]).is_err());
        assert!(FiniteDomain::new(vec!["a".into(), "a".into()]).is_err());
        assert!(FiniteDomain::new(vec![]).is_err());
        let (c, map) = ConceptClass::from_rows_dedup(d, LabelSpace::Binary, vec![vec![0, 1], vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(map, vec![0, 1, 0]);
    }

    #[test]
    fn loss_examples() {
        let zero = Predictor::constant(5, 0);
        let s0 = LabeledSample::new((0..5).map(|x| (x, 0)).collect());
        assert_eq!(zero_one_loss(&zero, &s0).unwrap(), big(0, 1));
        let one = Predictor::constant(4, 1);
        let s1 = LabeledSample::new((0..4).map(|x| (x, 0)).collect());
        assert_eq!(zero_one_loss(&one, &s1).unwrap(), big(1, 1));
        // constant 1/2 on realGrid(4) against labels 0 and 1.
        let half = Predictor::constant(1, 2);
        let s = LabeledSample::new(vec![(0, 0), (0, 4)]);
        let v = empirical_loss(&half, &s, LabelSpace::RealGrid(4), &Loss::LInf).unwrap();
        assert_eq!(v, LossValue::Exact(big(1, 2)));
        let v = empirical_loss(&half, &s, LabelSpace::RealGrid(4), &Loss::lp(2)).unwrap();
        assert_eq!(v, LossValue::Exact(big(1, 4)));
    }

    #[test]
    fn loss_errors() {
        let p = Predictor::constant(2, 0);
        assert_eq!(zero_one_loss(&p, &LabeledSample::default()), Err(Error::EmptySample));
        let s = LabeledSample::new(vec![(0, 1)]);
        assert!(matches!(empirical_loss(&p, &s, LabelSpace::Binary, &Loss::LInf), Err(Error::LabelMismatch(_))));
    }

    #[test]
    fn fractional_lp_is_bracketed() {
        let p = Predictor::constant(1, 0);
        let s = LabeledSample::new(vec![(0, 1)]);
        let v = empirical_loss(&p, &s, LabelSpace::RealGrid(2), &Loss::Lp(rat(3, 2))).unwrap();
        // |0 - 1/2|^(3/2) = 2^-3/2, irrational
        let (lo, hi) = match v {
            LossValue::Bounds(lo, hi) => (lo, hi),
            _ => panic!("expected bounds"),
        };
        assert!(pow_big(&lo, 2) <= big(1, 8) && pow_big(&hi, 2) >= big(1, 8));
    }

    #[test]
    fn realizability_examples() {
        let c = thresholds(10);
        // c_t for t = -1..=9 at rows 0..=10; smallest consistent t is 2.
        let s = LabeledSample::new(vec![(2, 1), (7, 0)]);
        assert_eq!(is_realizable(&c, &s), Some(3));
        assert_eq!(c.name(3), "c3");
        assert_eq!(is_realizable(&c, &LabeledSample::default()), Some(0));
        assert_eq!(is_realizable(&c, &LabeledSample::new(vec![(2, 0), (2, 1)])), None);
    }

    #[test]
    fn erm_examples() {
        let d = FiniteDomain::indexed(4).unwrap();
        let c = ConceptClass::from_rows(d, LabelSpace::Binary, vec![vec![0; 4], vec![1; 4]]).unwrap();
        let s = LabeledSample::new(vec![(0, 1), (1, 1), (2, 1), (3, 0)]);
        assert_eq!(erm(&c, &s, &Loss::ZeroOne).unwrap(), (1, LossValue::Exact(big(1, 4))));

        // Mistakes per threshold t on {(1,0),(3,1),(8,1)}: t<1 misses 3 and 8,
        // 1<=t<3 misses all three, 3<=t<8 misses 1 and 8, t>=8 misses only 1.
        let th = thresholds(10);
        let s = LabeledSample::new(vec![(1, 0), (3, 1), (8, 1)]);
        let table: Vec<usize> = (-1..10i64)
            .map(|t| s.pairs.iter().filter(|&&(x, y)| Label::from(x as i64 <= t) != y).count())
            .collect();
        assert_eq!(table, vec![2, 2, 3, 3, 2, 2, 2, 2, 2, 1, 1]);
        let (id, v) = erm(&th, &s, &Loss::ZeroOne).unwrap();
        assert_eq!(th.name(id), "c9");
        assert_eq!(v, LossValue::Exact(big(1, 3)));

        let s = LabeledSample::new(vec![(2, 1), (7, 0)]);
        let (id, v) = erm(&th, &s, &Loss::ZeroOne).unwrap();
        assert_eq!(Some(id), is_realizable(&th, &s));
        assert!(v.upper().is_zero());
    }

    #[test]
    fn code_conversion() {
        let ls = LabelSpace::RealGrid(4);
        assert_eq!(ls.code_of(&rat(3, 4)), Some(3));
        assert_eq!(ls.code_of(&rat(1, 3)), None);
        assert_eq!(ls.code_of(&rat(5, 4)), None);
        assert_eq!(ls.value(2), rat(1, 2));
    }
}
