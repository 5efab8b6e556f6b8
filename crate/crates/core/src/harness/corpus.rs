//! Deterministic corpus generation. Every generated class is re-checked by
//! the exhaustive dimension oracles before it is handed out.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concepts::{ConceptClass, FiniteDomain, Label, LabelSpace, PartialClass};
use crate::dimensions::{graph_dimension, partial_vc_dimension, pseudo_dimension, vc_dimension};
use crate::error::{Error, Result};
use crate::reductions::multiclass::distinct_pieces;
use crate::reductions::robust::{twin_class, PerturbationMap};

use super::rng::stream;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "generator", content = "params", rename_all = "camelCase")]
pub enum Generator {
    /// `c_t(x) = 1[x <= t]` for `t = -1..n-1`.
    Thresholds { n: usize },
    /// Indicators of `[a, b]` plus the empty concept.
    Intervals { n: usize },
    FullCube { n: usize },
    RandomMulticlass { n: usize, m: u32, rows: usize },
    /// Every labeling of `{0..n-1}` with at most `k` constant runs, each
    /// run carrying its own label.
    KPiecewise { n: usize, m: u32, k: usize },
    /// `x -> j/q` on `x <= t` and 0 elsewhere, plus the zero function.
    StepReal { n: usize, q: u32 },
    RandomReal { n: usize, q: u32, rows: usize },
    /// One partial concept per leaf of a complete binary tree; it is
    /// defined on the root-to-leaf path and labels each node by the branch
    /// taken there.
    TreePartial { depth: u32 },
    TwinFromPartial { spec: Box<Generator> },
    /// The zero concept plus `x -> y` at a single point for every `y >= 1`.
    Singletons { n: usize, m: u32 },
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Thresholds { n } => write!(f, "thresholds({n})"),
            Generator::Intervals { n } => write!(f, "intervals({n})"),
            Generator::FullCube { n } => write!(f, "fullCube({n})"),
            Generator::RandomMulticlass { n, m, rows } => write!(f, "randomMulticlass({n},{m},{rows})"),
            Generator::KPiecewise { n, m, k } => write!(f, "kPiecewise({n},{m},{k})"),
            Generator::StepReal { n, q } => write!(f, "stepReal({n},{q})"),
            Generator::RandomReal { n, q, rows } => write!(f, "randomReal({n},{q},{rows})"),
            Generator::TreePartial { depth } => write!(f, "treePartial({depth})"),
            Generator::TwinFromPartial { spec } => write!(f, "twinFromPartial({spec})"),
            Generator::Singletons { n, m } => write!(f, "singletons({n},{m})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub entries: Vec<Generator>,
}

#[derive(Clone, Debug)]
pub enum CorpusClass {
    Total(Arc<ConceptClass>),
    Partial(Arc<PartialClass>),
    Twin { class: Arc<ConceptClass>, perturb: PerturbationMap, source: Arc<PartialClass> },
}

#[derive(Clone, Debug)]
pub struct CorpusItem {
    /// `"<generator>#<entry index>"`.
    pub name: String,
    pub generator: Generator,
    pub class: CorpusClass,
    /// The property the oracles confirmed, e.g. `"vc=1"`.
    pub verified: String,
}

impl CorpusItem {
    pub fn total(&self) -> Option<&Arc<ConceptClass>> {
        match &self.class {
            CorpusClass::Total(c) | CorpusClass::Twin { class: c, .. } => Some(c),
            CorpusClass::Partial(_) => None,
        }
    }
}

fn gen_err(g: &Generator, msg: impl fmt::Display) -> Error {
    Error::Construction(format!("{g}: {msg}"))
}

fn binary(n: usize, names: Vec<String>, rows: Vec<Vec<Label>>) -> Result<ConceptClass> {
    ConceptClass::new(FiniteDomain::indexed(n)?, LabelSpace::Binary, names, rows)
}

fn random_rows(g: &Generator, seed: u64, index: u64, n: usize, size: u32, rows: usize) -> Result<Vec<Vec<Label>>> {
    let total = (size as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if rows == 0 || rows as u128 > total {
        return Err(gen_err(g, format!("cannot draw {rows} distinct rows")));
    }
    let mut rng = stream(seed, &[0, index]);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    while out.len() < rows {
        let row: Vec<Label> = (0..n).map(|_| rng.gen_range(0..size)).collect();
        if seen.insert(row.clone()) {
            out.push(row);
        }
    }
    Ok(out)
}

fn piecewise_rows(n: usize, m: u32, k: usize) -> Vec<Vec<Label>> {
    fn go(n: usize, m: u32, k: usize, row: &mut Vec<Label>, used: &mut Vec<bool>, out: &mut Vec<Vec<Label>>) {
        if row.len() == n {
            out.push(row.clone());
            return;
        }
        if let Some(&last) = row.last() {
            row.push(last);
            go(n, m, k, row, used, out);
            row.pop();
        }
        let runs = used.iter().filter(|&&u| u).count();
        if runs < k {
            for y in 0..m {
                if !used[y as usize] {
                    used[y as usize] = true;
                    row.push(y);
                    go(n, m, k, row, used, out);
                    row.pop();
                    used[y as usize] = false;
                }
            }
        }
    }
    let mut out = Vec::new();
    go(n, m, k, &mut Vec::new(), &mut vec![false; m as usize], &mut out);
    out
}

fn tree_partial(depth: u32) -> Result<PartialClass> {
    let nodes = (1usize << depth) - 1;
    let leaves = 1usize << depth;
    let names = (0..nodes).map(|v| format!("v{v}")).collect();
    let table = (0..leaves)
        .map(|leaf| {
            let mut row = vec![None; nodes];
            let mut v = 0usize;
            for level in (0..depth).rev() {
                let right = (leaf >> level) & 1 == 1;
                row[v] = Some(right);
                v = 2 * v + 1 + usize::from(right);
            }
            row
        })
        .collect();
    PartialClass::new(FiniteDomain::new(names)?, (0..leaves).map(|l| format!("leaf{l}")).collect(), table)
}

fn expect(g: &Generator, what: &str, got: usize, exhaustive: bool, ok: bool) -> Result<String> {
    if !exhaustive {
        return Err(gen_err(g, format!("{what} oracle was not exhaustive")));
    }
    if !ok {
        return Err(gen_err(g, format!("{what}={got} violates the declared property")));
    }
    Ok(format!("{what}={got}"))
}

pub fn generate_entry(seed: u64, index: usize, g: &Generator) -> Result<CorpusItem> {
    let name = format!("{g}#{index}");
    let (class, verified) = build(seed, index as u64, g)?;
    Ok(CorpusItem { name, generator: g.clone(), class, verified })
}

fn build(seed: u64, index: u64, g: &Generator) -> Result<(CorpusClass, String)> {
    let total = |c: ConceptClass| CorpusClass::Total(Arc::new(c));
    match *g {
        Generator::Thresholds { n } => {
            let ts: Vec<i64> = (-1..n as i64).collect();
            let rows = ts.iter().map(|&t| (0..n as i64).map(|x| Label::from(x <= t)).collect()).collect();
            let c = binary(n, ts.iter().map(|t| format!("t{t}")).collect(), rows)?;
            let r = vc_dimension(&c, n)?;
            let v = expect(g, "vc", r.value, r.exhaustive, r.value == n.min(1))?;
            Ok((total(c), v))
        }
        Generator::Intervals { n } => {
            let mut names = vec!["empty".to_string()];
            let mut rows = vec![vec![0; n]];
            for a in 0..n {
                for b in a..n {
                    names.push(format!("[{a},{b}]"));
                    rows.push((0..n).map(|x| Label::from(a <= x && x <= b)).collect());
                }
            }
            let c = binary(n, names, rows)?;
            let r = vc_dimension(&c, n)?;
            let v = expect(g, "vc", r.value, r.exhaustive, r.value == n.min(2))?;
            Ok((total(c), v))
        }
        Generator::FullCube { n } => {
            if n > 12 {
                return Err(gen_err(g, "cube too large"));
            }
            let rows: Vec<Vec<Label>> = (0..1usize << n).map(|b| (0..n).map(|x| ((b >> (n - 1 - x)) & 1) as Label).collect()).collect();
            let names = rows.iter().map(|r| r.iter().map(|l| l.to_string()).collect::<String>()).map(|s| format!("b{s}")).collect();
            let c = binary(n, names, rows)?;
            let r = vc_dimension(&c, n)?;
            let v = expect(g, "vc", r.value, r.exhaustive, r.value == n)?;
            Ok((total(c), v))
        }
        Generator::RandomMulticlass { n, m, rows } => {
            if m < 2 {
                return Err(gen_err(g, "need at least two labels"));
            }
            let table = random_rows(g, seed, index, n, m, rows)?;
            let labels = if m == 2 { LabelSpace::Binary } else { LabelSpace::Multiclass(m) };
            let c = ConceptClass::new(FiniteDomain::indexed(n)?, labels, (0..rows).map(|i| format!("r{i}")).collect(), table)?;
            let r = graph_dimension(&c, n)?;
            let v = expect(g, "graph", r.value, r.exhaustive, true)?;
            Ok((total(c), v))
        }
        Generator::KPiecewise { n, m, k } => {
            if k == 0 || k > m as usize {
                return Err(gen_err(g, "need 1 <= k <= m"));
            }
            let table = piecewise_rows(n, m, k);
            let c = ConceptClass::new(FiniteDomain::indexed(n)?, LabelSpace::Multiclass(m), (0..table.len()).map(|i| format!("p{i}")).collect(), table)?;
            if let Some(bad) = c.table().iter().position(|r| distinct_pieces(r).map_or(true, |p| p > k)) {
                return Err(gen_err(g, format!("concept {} is not {k}-piecewise", c.name(bad))));
            }
            let r = graph_dimension(&c, n)?;
            let v = expect(g, "graph", r.value, r.exhaustive, r.value <= 2 * k)?;
            Ok((total(c), v))
        }
        Generator::StepReal { n, q } => {
            if q == 0 {
                return Err(gen_err(g, "q must be positive"));
            }
            let mut names = vec!["zero".to_string()];
            let mut rows = vec![vec![0; n]];
            for t in 0..n {
                for j in 1..=q {
                    names.push(format!("s{t}_{j}"));
                    rows.push((0..n).map(|x| if x <= t { j } else { 0 }).collect());
                }
            }
            let c = ConceptClass::new(FiniteDomain::indexed(n)?, LabelSpace::RealGrid(q), names, rows)?;
            let r = pseudo_dimension(&c, n)?;
            let v = expect(g, "pseudo", r.value, r.exhaustive, true)?;
            Ok((total(c), v))
        }
        Generator::RandomReal { n, q, rows } => {
            if q == 0 {
                return Err(gen_err(g, "q must be positive"));
            }
            let table = random_rows(g, seed, index, n, q + 1, rows)?;
            let c = ConceptClass::new(FiniteDomain::indexed(n)?, LabelSpace::RealGrid(q), (0..rows).map(|i| format!("r{i}")).collect(), table)?;
            let r = pseudo_dimension(&c, n)?;
            let v = expect(g, "pseudo", r.value, r.exhaustive, true)?;
            Ok((total(c), v))
        }
        Generator::TreePartial { depth } => {
            if depth == 0 || depth > 10 {
                return Err(gen_err(g, "depth must lie in 1..=10"));
            }
            let p = tree_partial(depth)?;
            let r = partial_vc_dimension(&p, p.domain().len())?;
            let v = expect(g, "partialVc", r.value, r.exhaustive, r.value == 1)?;
            Ok((CorpusClass::Partial(Arc::new(p)), v))
        }
        Generator::TwinFromPartial { ref spec } => {
            let (inner, v) = build(seed, index, spec)?;
            let CorpusClass::Partial(source) = inner else {
                return Err(gen_err(g, "inner generator must produce a partial class"));
            };
            let (class, perturb) = twin_class(&source)?;
            let n = source.domain().len();
            let paired = (0..2 * n).all(|x| perturb.get(x).len() == 2 && perturb.get(x).contains(&x));
            if !paired {
                return Err(gen_err(g, "twin perturbation sets must be {x, x'}"));
            }
            Ok((CorpusClass::Twin { class: Arc::new(class), perturb, source }, format!("{v},M=2")))
        }
        Generator::Singletons { n, m } => {
            if m < 2 {
                return Err(gen_err(g, "need at least two labels"));
            }
            let mut names = vec!["zero".to_string()];
            let mut rows = vec![vec![0; n]];
            for x in 0..n {
                for y in 1..m {
                    names.push(format!("e{x}_{y}"));
                    let mut row = vec![0; n];
                    row[x] = y;
                    rows.push(row);
                }
            }
            let labels = if m == 2 { LabelSpace::Binary } else { LabelSpace::Multiclass(m) };
            let c = ConceptClass::new(FiniteDomain::indexed(n)?, labels, names, rows)?;
            let r = graph_dimension(&c, n)?;
            let v = expect(g, "graph", r.value, r.exhaustive, r.value == n.min(1))?;
            Ok((total(c), v))
        }
    }
}

pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<CorpusItem>> {
    spec.entries.iter().enumerate().map(|(i, g)| generate_entry(spec.seed, i, g)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let t = generate_entry(0, 0, &Generator::Thresholds { n: 10 }).unwrap();
        assert_eq!(t.total().unwrap().len(), 11);
        assert_eq!(t.verified, "vc=1");
        let p = generate_entry(0, 0, &Generator::KPiecewise { n: 10, m: 3, k: 2 }).unwrap();
        // 3 constant rows plus 9 cut positions times 3 * 2 ordered label pairs.
        assert_eq!(p.total().unwrap().len(), 57);
        let tree = generate_entry(0, 0, &Generator::TreePartial { depth: 3 }).unwrap();
        assert_eq!(tree.verified, "partialVc=1");
    }

    #[test]
    fn deterministic_and_serde_tagged() {
        let spec: CorpusSpec = serde_json::from_str(
            r#"{"seed": 5, "entries": [{"generator": "randomMulticlass", "params": {"n": 5, "m": 3, "rows": 12}},
                {"generator": "twinFromPartial", "params": {"spec": {"generator": "treePartial", "params": {"depth": 2}}}}]}"#,
        )
        .unwrap();
        let a = generate_corpus(&spec).unwrap();
        let b = generate_corpus(&spec).unwrap();
        assert_eq!(a[0].total().unwrap().table(), b[0].total().unwrap().table());
        assert!(matches!(a[1].class, CorpusClass::Twin { .. }));
        let back: CorpusSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn impossible_requests_fail() {
        assert!(generate_entry(0, 0, &Generator::RandomMulticlass { n: 2, m: 2, rows: 5 }).is_err());
        assert!(generate_entry(0, 0, &Generator::TwinFromPartial { spec: Box::new(Generator::Thresholds { n: 3 }) }).is_err());
    }
}
