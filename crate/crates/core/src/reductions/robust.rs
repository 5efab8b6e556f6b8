//! Adversarially robust compression through perturbation inflation, the
//! twin-domain embedding of partial classes, and the one-inclusion-graph
//! predictor.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::bits::index_width;
use crate::concepts::{ConceptClass, FiniteDomain, Label, LabelSpace, LabeledSample, PartialClass, Predictor};
use crate::error::{Error, Result};
use crate::schemes::{BoxedScheme, CompressionOutput, CompressionScheme, Compressed, SchemeFlags};

use super::multiclass::stability_check;
use super::packing::{overhead, pack, unpack};

/// Finite perturbation sets, each containing its own point and stored in
/// ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerturbationMap {
    sets: Vec<Vec<usize>>,
}

impl PerturbationMap {
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        let n = sets.len();
        let mut out = Vec::with_capacity(n);
        for (x, set) in sets.into_iter().enumerate() {
            let s: BTreeSet<usize> = set.into_iter().collect();
            if !s.contains(&x) {
                return Err(Error::InvalidParameter(format!("perturbation set of point {x} does not contain it")));
            }
            if s.iter().any(|&z| z >= n) {
                return Err(Error::InvalidParameter(format!("perturbation set of point {x} leaves the domain")));
            }
            out.push(s.into_iter().collect());
        }
        Ok(Self { sets: out })
    }

    pub fn identity(n: usize) -> Self {
        Self { sets: (0..n).map(|x| vec![x]).collect() }
    }

    /// Window perturbations `{x, ..., x + m - 1}` clipped to the domain.
    pub fn window(n: usize, m: usize) -> Self {
        Self { sets: (0..n).map(|x| (x..(x + m.max(1)).min(n)).collect()).collect() }
    }

    pub fn get(&self, x: usize) -> &[usize] {
        &self.sets[x]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Largest perturbation set size.
    pub fn m(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(1)
    }
}

fn robust_ok(row: &[Label], u: &PerturbationMap, s: &LabeledSample) -> bool {
    s.pairs.iter().all(|&(x, y)| u.get(x).iter().all(|&z| row[z] == y))
}

/// Canonically-first concept correct on every perturbation of every example.
pub fn is_robustly_realizable(class: &ConceptClass, s: &LabeledSample, u: &PerturbationMap) -> Option<usize> {
    (0..class.len()).find(|&c| robust_ok(class.concept(c), u, s))
}

/// Whether a predictor labels every perturbation of every example correctly.
pub fn robustly_consistent(p: &Predictor, s: &LabeledSample, u: &PerturbationMap) -> bool {
    robust_ok(p.values(), u, s)
}

/// `(z, y_i)` for every `z` in `U(x_i)`, sample-major.
pub fn inflate_robust(s: &LabeledSample, u: &PerturbationMap) -> LabeledSample {
    LabeledSample::new(s.pairs.iter().flat_map(|&(x, y)| u.get(x).iter().map(move |&z| (z, y))).collect())
}

/// Maps positions of the robust inflation back to `(example, set index)`.
fn origins(s: &LabeledSample, u: &PerturbationMap) -> Vec<(usize, usize)> {
    s.pairs.iter().enumerate().flat_map(|(i, &(x, _))| (0..u.get(x).len()).map(move |j| (i, j))).collect()
}

fn check(class: &ConceptClass, u: &PerturbationMap, s: &LabeledSample) -> Result<()> {
    class.check_sample(s)?;
    if u.len() != class.domain().len() {
        return Err(Error::InvalidParameter("perturbation map and class disagree on the domain".into()));
    }
    Ok(())
}

/// Stores every kept perturbed pair as its example position plus the
/// index of the perturbation in `ceil(log2 M)` bits.
pub struct ReduceRobust {
    class: Arc<ConceptClass>,
    u: PerturbationMap,
    substrate: BoxedScheme,
    width: u32,
}

pub fn reduce_robust(substrate: BoxedScheme, class: Arc<ConceptClass>, u: PerturbationMap) -> Result<ReduceRobust> {
    let width = index_width(u.m());
    Ok(ReduceRobust { class, u, substrate, width })
}

impl ReduceRobust {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bound(&self, f: usize, sub_bits: usize, grouped: bool, kept: usize) -> usize {
        f * (1 + self.width as usize) + overhead(grouped, kept, sub_bits)
    }
}

impl CompressionScheme for ReduceRobust {
    fn name(&self) -> &str {
        "robust"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags::NONE
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        check(&self.class, &self.u, s)?;
        let sub = self.substrate.compress(&inflate_robust(s, &self.u))?;
        let from = origins(s, &self.u);
        let pairs: Vec<(usize, usize)> = sub.kept.iter().map(|&p| from[p]).collect();
        let packed = pack(&pairs, self.width, &sub.compressed.bits);
        let mut out = CompressionOutput::from_positions(s, packed.kept, packed.bits);
        out.audit.substrate_size = Some(sub.size());
        out.audit.substrate_kept = Some(sub.kept.len());
        out.audit.index_bits = packed.index_bits;
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let (slots, bits) = unpack(c.pairs.len(), self.width, &c.bits)?;
        let pairs = slots
            .into_iter()
            .map(|(slot, j)| {
                let (x, y) = *c.pairs.get(slot).ok_or_else(|| Error::Decode("slot out of range".into()))?;
                let z = *self.u.get(x).get(j).ok_or_else(|| Error::Decode(format!("perturbation index {j} out of range")))?;
                Ok((z, y))
            })
            .collect::<Result<Vec<_>>>()?;
        self.substrate.reconstruct(&Compressed { pairs, bits })
    }
}

/// Keeps the examples behind the substrate's kept perturbed pairs, with no
/// index bits; reconstruction reinflates them and reruns the substrate.
pub struct ReduceRobustStable {
    class: Arc<ConceptClass>,
    u: PerturbationMap,
    substrate: BoxedScheme,
}

pub fn reduce_robust_stable(substrate: BoxedScheme, class: Arc<ConceptClass>, u: PerturbationMap) -> Result<ReduceRobustStable> {
    if !substrate.flags().stable {
        return Err(Error::Construction(format!("{} is not stable", substrate.name())));
    }
    Ok(ReduceRobustStable { class, u, substrate })
}

impl CompressionScheme for ReduceRobustStable {
    fn name(&self) -> &str {
        "robust-stable"
    }

    fn flags(&self) -> SchemeFlags {
        SchemeFlags { stable: true, ..SchemeFlags::NONE }
    }

    fn compress(&self, s: &LabeledSample) -> Result<CompressionOutput> {
        check(&self.class, &self.u, s)?;
        let sub = self.substrate.compress(&inflate_robust(s, &self.u))?;
        let from = origins(s, &self.u);
        let touched: HashSet<(usize, Label)> = sub.kept.iter().map(|&p| s.pairs[from[p].0]).collect();
        let mut seen = HashSet::new();
        let kept: Vec<usize> = (0..s.len()).filter(|&i| touched.contains(&s.pairs[i]) && seen.insert(s.pairs[i])).collect();
        let again = self.substrate.compress(&inflate_robust(&s.select(&kept), &self.u))?;
        stability_check(&sub, &again)?;
        let mut out = CompressionOutput::from_positions(s, kept, sub.compressed.bits.clone());
        out.audit.substrate_size = Some(sub.size());
        out.audit.substrate_kept = Some(sub.kept.len());
        Ok(out)
    }

    fn reconstruct(&self, c: &Compressed) -> Result<Predictor> {
        let t = LabeledSample::new(c.pairs.clone());
        let sub = self.substrate.compress(&inflate_robust(&t, &self.u))?;
        if sub.compressed.bits != c.bits {
            return Err(Error::Decode("carried substrate bits do not match".into()));
        }
        self.substrate.reconstruct(&sub.compressed)
    }
}

/// Doubles the domain: point `x` keeps index `x`, its twin `x'` gets
/// `n + x`. Inside the support both copies carry `c(x)`; outside, `x` gets 0
/// and `x'` gets 1. Every point is perturbable to its twin.
pub fn twin_class(part: &PartialClass) -> Result<(ConceptClass, PerturbationMap)> {
    let n = part.domain().len();
    let names = part.domain().names().iter().cloned().chain(part.domain().names().iter().map(|s| format!("{s}'"))).collect();
    let rows = (0..part.len())
        .map(|c| {
            let mut row = vec![0; 2 * n];
            for x in 0..n {
                let (a, b) = match part.value(c, x) {
                    Some(v) => (Label::from(v), Label::from(v)),
                    None => (0, 1),
                };
                row[x] = a;
                row[n + x] = b;
            }
            row
        })
        .collect();
    let class = ConceptClass::new(FiniteDomain::new(names)?, LabelSpace::Binary, part.names().to_vec(), rows)?;
    let u = PerturbationMap::new((0..2 * n).map(|x| vec![x % n, n + x % n]).collect())?;
    Ok((class, u))
}

/// Outcome of one one-inclusion-graph prediction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OigReport {
    pub prediction: Label,
    pub vertices: usize,
    pub edges: usize,
    pub acyclic: bool,
    pub max_out_degree: usize,
}

/// Oriented one-inclusion graph over a canonical (sorted, deduplicated)
/// coordinate list. Vertices are robustly realizable labelings in
/// lexicographic order.
pub struct OneInclusionGraph {
    pub coords: Vec<usize>,
    pub vertices: Vec<Vec<Label>>,
    pub edges: Vec<(usize, usize)>,
    /// `out[v]` lists the heads of edges leaving `v`.
    pub out: Vec<Vec<usize>>,
    pub acyclic: bool,
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

impl OneInclusionGraph {
    pub fn build(class: &ConceptClass, u: &PerturbationMap, points: &[usize]) -> Self {
        let coords: Vec<usize> = points.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut vs = BTreeSet::new();
        for row in class.table() {
            if coords.iter().all(|&p| u.get(p).iter().all(|&z| row[z] == row[p])) {
                vs.insert(coords.iter().map(|&p| row[p]).collect::<Vec<Label>>());
            }
        }
        let vertices: Vec<Vec<Label>> = vs.into_iter().collect();
        let index: HashMap<&[Label], usize> = vertices.iter().enumerate().map(|(i, v)| (v.as_slice(), i)).collect();
        let mut edges = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            for j in 0..coords.len() {
                if v[j] == 0 {
                    let mut w = v.clone();
                    w[j] = 1;
                    if let Some(&k) = index.get(w.as_slice()) {
                        edges.push((i, k));
                    }
                }
            }
        }
        let nv = vertices.len();
        let mut parent: Vec<usize> = (0..nv).collect();
        let mut acyclic = true;
        for &(a, b) in &edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                acyclic = false;
            } else {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let out = if acyclic { Self::orient_forest(nv, &edges) } else { Self::orient_peeling(nv, &edges) };
        Self { coords, vertices, edges, out, acyclic }
    }

    /// Each tree is rooted at its lexicographically smallest vertex and every
    /// edge points toward the root, so out-degrees are at most 1.
    fn orient_forest(nv: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); nv];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut out = vec![Vec::new(); nv];
        let mut seen = vec![false; nv];
        for root in 0..nv {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        out[w].push(v);
                        stack.push(w);
                    }
                }
            }
        }
        out
    }

    /// Repeatedly removes a vertex of least remaining degree (smallest
    /// index on ties) and points its remaining edges away from it.
    fn orient_peeling(nv: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nv];
        for &(a, b) in edges {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        let mut out = vec![Vec::new(); nv];
        let mut alive: BTreeSet<usize> = (0..nv).collect();
        while let Some(&v) = alive.iter().min_by_key(|&&v| (adj[v].len(), v)) {
            alive.remove(&v);
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            for w in nbrs {
                out[v].push(w);
                adj[w].remove(&v);
            }
            adj[v].clear();
        }
        out
    }

    pub fn max_out_degree(&self) -> usize {
        self.out.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn vertex(&self, labels: &[Label]) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_slice().cmp(labels)).ok()
    }
}

/// One-inclusion-graph prediction at `z` for a robustly realizable sample.
pub fn oig_predict(class: &ConceptClass, u: &PerturbationMap, s: &LabeledSample, z: usize) -> Result<OigReport> {
    check(class, u, s)?;
    if z >= class.domain().len() {
        return Err(Error::InvalidSample(format!("test point {z} outside the domain")));
    }
    let points: Vec<usize> = s.pairs.iter().map(|p| p.0).chain(std::iter::once(z)).collect();
    let g = OneInclusionGraph::build(class, u, &points);
    if g.vertices.is_empty() {
        return Err(Error::Unrealizable);
    }
    let mut label_of: HashMap<usize, Label> = HashMap::new();
    for &(x, y) in &s.pairs {
        if *label_of.entry(x).or_insert(y) != y {
            return Err(Error::Unrealizable);
        }
    }
    let zi = g.coords.binary_search(&z).expect("z is a coordinate");
    let with = |w: Label| -> Vec<Label> {
        g.coords.iter().enumerate().map(|(j, p)| if j == zi { w } else { label_of[p] }).collect()
    };
    let prediction = if let Some(&forced) = label_of.get(&z) {
        if g.vertex(&with(forced)).is_none() {
            return Err(Error::Unrealizable);
        }
        forced
    } else {
        match (g.vertex(&with(0)), g.vertex(&with(1))) {
            (Some(a), Some(b)) => {
                if g.out[a].contains(&b) {
                    1
                } else {
                    0
                }
            }
            (Some(_), None) => 0,
            (None, Some(_)) => 1,
            (None, None) => return Err(Error::Unrealizable),
        }
    };
    Ok(OigReport { prediction, vertices: g.vertices.len(), edges: g.edges.len(), acyclic: g.acyclic, max_out_degree: g.max_out_degree() })
}

/// Leave-one-out estimate over random permutations of a labeled instance:
/// each permutation holds out its last example and predicts it from the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct LeaveOneOut {
    pub trials: usize,
    pub errors: usize,
    pub mean: f64,
    pub std_error: f64,
}

pub fn leave_one_out<R: rand::Rng>(class: &ConceptClass, u: &PerturbationMap, instance: &LabeledSample, trials: usize, rng: &mut R) -> Result<LeaveOneOut> {
    use rand::seq::SliceRandom;
    if instance.len() < 2 {
        return Err(Error::InvalidSample("leave-one-out needs at least two examples".into()));
    }
    // The canonical orientation makes the prediction depend only on which
    // example is held out, so cache by held-out position.
    let mut cache: HashMap<usize, bool> = HashMap::new();
    let mut order: Vec<usize> = (0..instance.len()).collect();
    let mut errors = 0;
    for _ in 0..trials {
        order.shuffle(rng);
        let held = *order.last().expect("non-empty");
        let wrong = match cache.get(&held) {
            Some(&w) => w,
            None => {
                let train = LabeledSample::new(order[..order.len() - 1].iter().map(|&i| instance.pairs[i]).collect());
                let (x, y) = instance.pairs[held];
                let w = oig_predict(class, u, &train, x)?.prediction != y;
                cache.insert(held, w);
                w
            }
        };
        errors += usize::from(wrong);
    }
    let mean = errors as f64 / trials as f64;
    let std_error = (mean * (1.0 - mean) / trials as f64).sqrt();
    Ok(LeaveOneOut { trials, errors, mean, std_error })
}
