//! Exhaustive oracles for VC, graph, pseudo, Littlestone and partial VC
//! dimension.
//!
//! Shattered sets are enumerated level by level: every subset of a shattered
//! set is shattered (for all notions here), so candidates of size `k + 1` are
//! only formed from shattered sets of size `k` whose every `k`-subset is also
//! shattered. The number of shattered sets is at most the number of concepts,
//! which keeps the enumeration small.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::bitset::ConceptSet;
use crate::concepts::{ConceptClass, Label, PartialClass};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_SET_SIZE: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionReport {
    pub value: usize,
    /// Shattered points, or for Littlestone the heap-ordered nodes of a
    /// complete mistake tree of depth `value`.
    pub witness: Vec<usize>,
    /// Witness labels (graph) or thresholds (pseudo) aligned with `witness`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_labels: Option<Vec<Label>>,
    pub exhaustive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Vc,
    Graph,
    Pseudo,
    Littlestone,
    Partial,
}

impl std::str::FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vc" => Ok(Dimension::Vc),
            "graph" => Ok(Dimension::Graph),
            "pseudo" => Ok(Dimension::Pseudo),
            "littlestone" => Ok(Dimension::Littlestone),
            "partial" => Ok(Dimension::Partial),
            _ => Err(Error::Parse(format!("unknown dimension {s:?}"))),
        }
    }
}

/// Which comparison a coordinate of a shattering pattern uses.
#[derive(Clone, Copy)]
enum Indicator {
    Eq,
    Leq,
}

impl Indicator {
    fn eval(self, value: Label, witness: Label) -> bool {
        match self {
            Indicator::Eq => value == witness,
            Indicator::Leq => value <= witness,
        }
    }
}

/// Backtracking search for witness labels making `points` shattered by
/// `rows`. Partial assignments are pruned when their patterns do not fill
/// the cube on the assigned prefix.
fn witness_search(rows: &[&[Label]], points: &[usize], candidates: &[Vec<Label>], ind: Indicator) -> Option<Vec<Label>> {
    let k = points.len();
    if rows.len() < (1usize << k) {
        return None;
    }
    let mut chosen = Vec::with_capacity(k);
    let mut patterns = vec![0u64; rows.len()];
    fn go(
        rows: &[&[Label]],
        points: &[usize],
        candidates: &[Vec<Label>],
        ind: Indicator,
        chosen: &mut Vec<Label>,
        patterns: &mut Vec<u64>,
    ) -> bool {
        let j = chosen.len();
        if j == points.len() {
            return true;
        }
        for &y in &candidates[j] {
            let saved = patterns.clone();
            for (p, row) in patterns.iter_mut().zip(rows) {
                if ind.eval(row[points[j]], y) {
                    *p |= 1 << j;
                }
            }
            let distinct: HashSet<u64> = patterns.iter().copied().collect();
            if distinct.len() == 1usize << (j + 1) {
                chosen.push(y);
                if go(rows, points, candidates, ind, chosen, patterns) {
                    return true;
                }
                chosen.pop();
            }
            *patterns = saved;
        }
        false
    }
    go(rows, points, candidates, ind, &mut chosen, &mut patterns).then_some(chosen)
}

type ShatterTest<'a> = dyn Fn(&[usize]) -> Option<Vec<Label>> + 'a;

/// Level-wise enumeration returning the largest shattered set found.
fn levelwise(n: usize, concepts: usize, max_set_size: usize, test: &ShatterTest<'_>) -> DimensionReport {
    let mut level: Vec<(Vec<usize>, Vec<Label>)> = match test(&[]) {
        Some(w) => vec![(vec![], w)],
        None => {
            return DimensionReport { value: 0, witness: vec![], witness_labels: Some(vec![]), exhaustive: true };
        }
    };
    let mut k = 0;
    loop {
        let best = level[0].clone();
        let impossible = k + 1 > n || (1usize << (k + 1).min(63)) > concepts;
        if impossible || level.is_empty() {
            return report(best, k, true);
        }
        if k >= max_set_size {
            return report(best, k, false);
        }
        let known: HashSet<&[usize]> = level.iter().map(|(s, _)| s.as_slice()).collect();
        let mut next = Vec::new();
        for (s, _) in &level {
            let start = s.last().map_or(0, |&l| l + 1);
            for x in start..n {
                let mut cand = s.clone();
                cand.push(x);
                let hereditary = (0..cand.len()).all(|drop| {
                    let sub: Vec<usize> = cand.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &p)| p).collect();
                    known.contains(sub.as_slice())
                });
                if hereditary {
                    if let Some(w) = test(&cand) {
                        next.push((cand, w));
                    }
                }
            }
        }
        if next.is_empty() {
            return report(best, k, true);
        }
        level = next;
        k += 1;
    }
}

fn report((witness, labels): (Vec<usize>, Vec<Label>), value: usize, exhaustive: bool) -> DimensionReport {
    DimensionReport { value, witness, witness_labels: Some(labels), exhaustive }
}

fn require_binary(class: &ConceptClass) -> Result<()> {
    if class.labels().is_binary() {
        Ok(())
    } else {
        Err(Error::LabelMismatch("binary class required".into()))
    }
}

fn attained(class: &ConceptClass, x: usize) -> Vec<Label> {
    let mut v: Vec<Label> = class.table().iter().map(|r| r[x]).collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn shatter_dim(class: &ConceptClass, max_set_size: usize, ind: Indicator, candidates: Vec<Vec<Label>>) -> DimensionReport {
    let rows: Vec<&[Label]> = class.table().iter().map(Vec::as_slice).collect();
    let test = |pts: &[usize]| {
        let cands: Vec<Vec<Label>> = pts.iter().map(|&p| candidates[p].clone()).collect();
        witness_search(&rows, pts, &cands, ind)
    };
    levelwise(class.domain().len(), class.len(), max_set_size, &test)
}

pub fn vc_dimension(class: &ConceptClass, max_set_size: usize) -> Result<DimensionReport> {
    require_binary(class)?;
    let n = class.domain().len();
    let mut r = shatter_dim(class, max_set_size, Indicator::Eq, vec![vec![1]; n]);
    r.witness_labels = None;
    Ok(r)
}

/// Witness labels range over labels attained at each point; an unattained
/// label gives a constant-zero coordinate and can never help.
pub fn graph_dimension(class: &ConceptClass, max_set_size: usize) -> Result<DimensionReport> {
    let candidates = (0..class.domain().len()).map(|x| attained(class, x)).collect();
    Ok(shatter_dim(class, max_set_size, Indicator::Eq, candidates))
}

/// Thresholds range over values attained at each point; `1[c(x) <= y]` only
/// changes at attained values.
pub fn pseudo_dimension(class: &ConceptClass, max_set_size: usize) -> Result<DimensionReport> {
    if !class.labels().is_real() {
        return Err(Error::LabelMismatch("realGrid class required".into()));
    }
    let candidates = (0..class.domain().len()).map(|x| attained(class, x)).collect();
    Ok(shatter_dim(class, max_set_size, Indicator::Leq, candidates))
}

/// Shattering by concepts whose support contains every chosen point.
pub fn partial_vc_dimension(class: &PartialClass, max_set_size: usize) -> Result<DimensionReport> {
    let n = class.domain().len();
    let test = |pts: &[usize]| {
        let mut seen = HashSet::new();
        for c in 0..class.len() {
            let mut pat = 0u64;
            let mut inside = true;
            for (j, &x) in pts.iter().enumerate() {
                match class.value(c, x) {
                    Some(b) => pat |= u64::from(b) << j,
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if inside {
                seen.insert(pat);
            }
        }
        (seen.len() == 1usize << pts.len()).then(|| vec![1; pts.len()])
    };
    let mut r = levelwise(n, class.len(), max_set_size, &test);
    r.witness_labels = None;
    Ok(r)
}

/// Re-checks a shattering witness from scratch.
pub fn verify_shattering(class: &ConceptClass, which: Dimension, report: &DimensionReport) -> bool {
    let pts = &report.witness;
    if pts.len() != report.value {
        return false;
    }
    let labels: Vec<Label> = match (which, &report.witness_labels) {
        (Dimension::Vc, _) => vec![1; pts.len()],
        (_, Some(l)) if l.len() == pts.len() => l.clone(),
        _ => return false,
    };
    let pseudo = which == Dimension::Pseudo;
    let seen: HashSet<u64> = class
        .table()
        .iter()
        .map(|row| {
            pts.iter().zip(&labels).enumerate().fold(0u64, |acc, (j, (&x, &y))| {
                let b = if pseudo { row[x] <= y } else { row[x] == y };
                acc | (u64::from(b) << j)
            })
        })
        .collect();
    seen.len() == 1usize << pts.len()
}

/// Memoized Littlestone game over version spaces.
pub struct LittlestoneOracle<'a> {
    class: &'a ConceptClass,
    agree: Vec<[ConceptSet; 2]>,
    memo: HashMap<ConceptSet, usize>,
}

impl<'a> LittlestoneOracle<'a> {
    pub fn new(class: &'a ConceptClass) -> Result<Self> {
        require_binary(class)?;
        let agree = (0..class.domain().len()).map(|x| [class.agreeing(x, 0), class.agreeing(x, 1)]).collect();
        Ok(Self { class, agree, memo: HashMap::new() })
    }

    pub fn restrict(&self, v: &ConceptSet, x: usize, b: Label) -> ConceptSet {
        v.and(&self.agree[x][b as usize])
    }

    /// Littlestone dimension of the subclass `v`; `-1` stands for an empty
    /// version space and is reported as `None`.
    pub fn value(&mut self, v: &ConceptSet) -> Option<usize> {
        let count = v.count();
        if count == 0 {
            return None;
        }
        if count == 1 {
            return Some(0);
        }
        if let Some(&d) = self.memo.get(v) {
            return Some(d);
        }
        let cap = (usize::BITS - 1 - count.leading_zeros()) as usize;
        let mut best = 0;
        for x in 0..self.class.domain().len() {
            let v0 = self.restrict(v, x, 0);
            let v1 = self.restrict(v, x, 1);
            if v0.is_empty() || v1.is_empty() {
                continue;
            }
            // Cheap bound before recursing on both branches.
            let bound = 1 + floor_log2(v0.count().min(v1.count()));
            if bound <= best {
                continue;
            }
            let d0 = self.value(&v0).expect("non-empty");
            if d0 + 1 <= best {
                continue;
            }
            let d1 = self.value(&v1).expect("non-empty");
            best = best.max(1 + d0.min(d1));
            if best == cap {
                break;
            }
        }
        self.memo.insert(v.clone(), best);
        Some(best)
    }

    /// Heap-ordered complete mistake tree of the given depth inside `v`.
    fn tree(&mut self, v: &ConceptSet, depth: usize, slot: usize, out: &mut Vec<usize>) {
        if depth == 0 {
            return;
        }
        for x in 0..self.class.domain().len() {
            let v0 = self.restrict(v, x, 0);
            let v1 = self.restrict(v, x, 1);
            let deep = |o: &mut Self, s: &ConceptSet| o.value(s).is_some_and(|d| d + 1 >= depth);
            if deep(self, &v0) && deep(self, &v1) {
                out[slot] = x;
                self.tree(&v0, depth - 1, 2 * slot + 1, out);
                self.tree(&v1, depth - 1, 2 * slot + 2, out);
                return;
            }
        }
        unreachable!("memoized value guarantees a splitting point");
    }
}

fn floor_log2(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Littlestone dimension. The witness lists the nodes of a complete mistake
/// tree in heap order: node `i` has children `2i+1` (label 0) and `2i+2`.
pub fn littlestone_dimension(class: &ConceptClass) -> Result<DimensionReport> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    let mut oracle = LittlestoneOracle::new(class)?;
    let all = class.all();
    let value = oracle.value(&all).expect("non-empty class");
    let mut witness = vec![0; (1usize << value) - 1];
    oracle.tree(&all, value, 0, &mut witness);
    Ok(DimensionReport { value, witness, witness_labels: None, exhaustive: true })
}

/// Every root-to-leaf path of the heap-ordered tree is realized by a concept.
pub fn verify_mistake_tree(class: &ConceptClass, depth: usize, tree: &[usize]) -> bool {
    if tree.len() != (1usize << depth) - 1 {
        return false;
    }
    (0..1usize << depth).all(|path| {
        let mut node = 0;
        let mut pairs = Vec::with_capacity(depth);
        for level in 0..depth {
            let b = (path >> (depth - 1 - level)) & 1;
            pairs.push((tree[node], b as Label));
            node = 2 * node + 1 + b;
        }
        class.first_consistent(&pairs).is_some()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{FiniteDomain, LabelSpace};

    fn class(n: usize, labels: LabelSpace, rows: Vec<Vec<Label>>) -> ConceptClass {
        ConceptClass::from_rows(FiniteDomain::indexed(n).unwrap(), labels, rows).unwrap()
    }

    fn thresholds(n: usize) -> ConceptClass {
        let rows = (-1..n as i64).map(|t| (0..n as i64).map(|x| Label::from(x <= t)).collect()).collect();
        class(n, LabelSpace::Binary, rows)
    }

    fn all_functions(n: usize, m: u32) -> Vec<Vec<Label>> {
        let total = (m as usize).pow(n as u32);
        (0..total)
            .map(|mut i| {
                (0..n)
                    .map(|_| {
                        let l = (i % m as usize) as Label;
                        i /= m as usize;
                        l
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn vc_examples() {
        let th = thresholds(10);
        // No pair x < y is shattered: labeling (0, 1) needs x > t >= y.
        let pair_shattered = (0..10).any(|x| {
            (x + 1..10).any(|y| {
                let pats: HashSet<(Label, Label)> = th.table().iter().map(|r| (r[x], r[y])).collect();
                pats.len() == 4
            })
        });
        assert!(!pair_shattered);
        let r = vc_dimension(&th, 6).unwrap();
        assert_eq!(r.value, 1);
        assert!(r.exhaustive && verify_shattering(&th, Dimension::Vc, &r));
        assert_eq!(vc_dimension(&class(3, LabelSpace::Binary, vec![vec![0, 1, 0]]), 6).unwrap().value, 0);
        let cube = class(3, LabelSpace::Binary, all_functions(3, 2));
        assert_eq!(vc_dimension(&cube, 6).unwrap().value, 3);
    }

    #[test]
    fn graph_examples() {
        let c = class(2, LabelSpace::Multiclass(3), all_functions(2, 3));
        let r = graph_dimension(&c, 6).unwrap();
        assert_eq!(r.value, 2);
        assert!(verify_shattering(&c, Dimension::Graph, &r));
        let consts = class(4, LabelSpace::Multiclass(3), (0..3).map(|k| vec![k; 4]).collect());
        assert_eq!(graph_dimension(&consts, 6).unwrap().value, 1);
        let th = thresholds(6);
        assert_eq!(graph_dimension(&th, 6).unwrap().value, vc_dimension(&th, 6).unwrap().value);
    }

    #[test]
    fn pseudo_examples() {
        let step = class(5, LabelSpace::RealGrid(1), thresholds(5).table().to_vec());
        assert_eq!(pseudo_dimension(&step, 6).unwrap().value, 1);
        let half = class(3, LabelSpace::RealGrid(2), vec![vec![1; 3]]);
        assert_eq!(pseudo_dimension(&half, 6).unwrap().value, 0);
        let sq = class(2, LabelSpace::RealGrid(1), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let r = pseudo_dimension(&sq, 6).unwrap();
        assert_eq!(r.value, 2);
        assert_eq!(r.witness_labels, Some(vec![0, 0]));
        assert!(verify_shattering(&sq, Dimension::Pseudo, &r));
    }

    #[test]
    fn littlestone_examples() {
        let th = thresholds(10);
        let r = littlestone_dimension(&th).unwrap();
        assert_eq!(r.value, 3);
        assert!(verify_mistake_tree(&th, 3, &r.witness));
        assert_eq!(littlestone_dimension(&class(2, LabelSpace::Binary, vec![vec![1, 0]])).unwrap().value, 0);
        let sq = class(2, LabelSpace::Binary, all_functions(2, 2));
        assert_eq!(littlestone_dimension(&sq).unwrap().value, 2);
    }

    #[test]
    fn partial_examples() {
        let d = FiniteDomain::indexed(2).unwrap();
        let one = PartialClass::new(d.clone(), vec!["a".into()], vec![vec![Some(true), Some(false)]]).unwrap();
        assert_eq!(partial_vc_dimension(&one, 6).unwrap().value, 0);
        let two = PartialClass::new(d, vec!["a".into(), "b".into()], vec![vec![Some(false), None], vec![Some(true), None]]).unwrap();
        assert_eq!(partial_vc_dimension(&two, 6).unwrap().value, 1);
    }

    #[test]
    fn cap_marks_report_inexhaustive() {
        let cube = class(4, LabelSpace::Binary, all_functions(4, 2));
        let r = vc_dimension(&cube, 2).unwrap();
        assert_eq!((r.value, r.exhaustive), (2, false));
    }
}
