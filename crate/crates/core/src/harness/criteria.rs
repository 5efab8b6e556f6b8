//! The acceptance criteria as executable checks over seeded corpora. Every
//! criterion returns an [`Outcome`] carrying one [`RunRow`] per checked
//! (class, scheme, sample) triple.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use num::rational::BigRational;
use num::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::concepts::{erm, erm_real, real_loss, ConceptClass, LabeledSample, Loss, Predictor};
use crate::dimensions::{graph_dimension, littlestone_dimension, pseudo_dimension, vc_dimension};
use crate::error::{Error, Result};
use crate::rational::{fmt_big, fmt_rational, rat, to_big, Rational};
use crate::reductions::multiclass::{
    agnostic_wrap, inflate_class, inflate_sample, piecewise_threshold_inflated_scheme, reduce_general, reduce_proper_or_majority, reduce_stable,
    GraphDim1Scheme,
};
use crate::reductions::regression::{
    agnostic_regression, class_leq, reduce_eps_linf, reduce_eps_lp, reduce_majority_regression, reduce_stable_regression, EpsGrid, RealSample,
};
use crate::reductions::robust::{leave_one_out, reduce_robust, reduce_robust_stable, robustly_consistent, OneInclusionGraph, PerturbationMap};
use crate::schemes::{BoxedScheme, CompressionOutput, CompressionScheme, Registry, SoaScheme, ThresholdStableScheme};
use crate::verify::{verify_stability, verify_validity, zero_one, SabotagedScheme, UnstableScheme};

use super::corpus::{generate_entry, CorpusClass, CorpusItem, Generator};
use super::rng::{derive, stream};
use super::sample::{sample_real, sample_realizable, SampleMode};

pub const DEFAULT_SEED: u64 = 20_240_601;

/// Trials per instance for the leave-one-out estimate.
pub const LOO_TRIALS: usize = 2000;

/// Replaces the schemes under test by a broken fixture.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Inject {
    #[default]
    None,
    Sabotaged,
    Unstable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub seed: u64,
    pub inject: Inject,
}

impl Default for Config {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, inject: Inject::None }
    }
}

/// Which reduction families a shared criterion covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Multiclass,
    Regression,
    Robust,
}

pub const ALL_FAMILIES: [Family; 3] = [Family::Multiclass, Family::Regression, Family::Robust];

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub vc: Option<usize>,
    pub graph: Option<usize>,
    pub pseudo: Option<usize>,
    pub littlestone: Option<usize>,
}

/// `bound_ok` holds the criterion's inequality for the row (a size bound,
/// a loss bound or an identity); `stable_ok` the stability verdict.
#[derive(Clone, Debug, Serialize)]
pub struct RunRow {
    pub class: String,
    pub scheme: String,
    pub sample: usize,
    pub size: Option<usize>,
    pub loss: Option<String>,
    pub bound_ok: Option<bool>,
    pub stable_ok: Option<bool>,
    pub dims: Dims,
    pub wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RunRow {
    fn new(class: &str, scheme: &str, sample: usize) -> Self {
        Self {
            class: class.to_string(),
            scheme: scheme.to_string(),
            sample,
            size: None,
            loss: None,
            bound_ok: None,
            stable_ok: None,
            dims: Dims::default(),
            wall_time_ms: 0.0,
            note: None,
        }
    }

    pub fn ok(&self) -> bool {
        self.bound_ok != Some(false) && self.stable_ok != Some(false)
    }

    fn witness(&self) -> String {
        format!("{} / {} / sample {}: {}", self.class, self.scheme, self.sample, self.note.as_deref().unwrap_or("check failed"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub summary: String,
    pub elapsed_ms: f64,
    #[serde(skip)]
    pub rows: Vec<RunRow>,
}

impl Outcome {
    fn from_rows(id: usize, title: &'static str, rows: Vec<RunRow>, extra: Vec<String>, summary: String, start: Instant) -> Self {
        let mut failures: Vec<String> = rows.iter().filter(|r| !r.ok()).map(RunRow::witness).collect();
        failures.extend(extra);
        Self {
            id,
            title,
            passed: failures.is_empty() && !rows.is_empty(),
            checked: rows.len(),
            failures: failures.len(),
            first_failure: failures.into_iter().next(),
            summary,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
            rows,
        }
    }

    /// `PASS  4  reduction consistency: 768 checks, 0 failures (1.2 s)`.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{}  {:>2}  {}: {} ({} checks, {} failures, {:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.summary,
            self.checked,
            self.failures,
            self.elapsed_ms / 1e3
        );
        if let Some(w) = &self.first_failure {
            s.push_str(&format!("\n      first failure: {w}"));
        }
        s
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn corpus(seed: u64, entries: &[Generator]) -> Result<Vec<CorpusItem>> {
    entries.par_iter().enumerate().map(|(i, g)| generate_entry(seed, i, g)).collect()
}

fn sample_seed(cfg: &Config, key: u64, class: usize, j: usize) -> u64 {
    derive(cfg.seed, &[1, key, class as u64, j as u64])
}

fn total(item: &CorpusItem) -> Arc<ConceptClass> {
    item.total().expect("total class").clone()
}

fn dims_of(class: &ConceptClass) -> Dims {
    let n = class.domain().len();
    let binary = class.labels().is_binary();
    Dims {
        vc: binary.then(|| vc_dimension(class, n).ok().map(|r| r.value)).flatten(),
        graph: graph_dimension(class, n).ok().map(|r| r.value),
        pseudo: class.labels().is_real().then(|| pseudo_dimension(class, n).ok().map(|r| r.value)).flatten(),
        littlestone: (binary && class.len() <= 64).then(|| littlestone_dimension(class).ok().map(|r| r.value)).flatten(),
    }
}

fn registry() -> Registry {
    Registry::default()
}

fn substrate(name: &str, class: Arc<ConceptClass>) -> Result<BoxedScheme> {
    registry().build(name, class)
}

fn inject(cfg: &Config, s: BoxedScheme) -> BoxedScheme {
    match cfg.inject {
        Inject::None => s,
        Inject::Sabotaged => Box::new(SabotagedScheme(s)),
        Inject::Unstable => Box::new(UnstableScheme(s)),
    }
}

fn big(r: Rational) -> BigRational {
    to_big(&r)
}

fn frac_str(r: &BigRational) -> String {
    fmt_big(r)
}

// ---------------------------------------------------------------------------
// Dimension identities.

fn multiclass_identity_corpus() -> Vec<Generator> {
    let mut g: Vec<Generator> = (0..24)
        .map(|i| {
            let n = 4 + i % 5;
            let m = 2 + (i % 4) as u32;
            let rows = (5 + (i * 7) % 36).min((m as usize).pow(n as u32));
            Generator::RandomMulticlass { n, m, rows }
        })
        .collect();
    g.extend([
        Generator::KPiecewise { n: 8, m: 3, k: 2 },
        Generator::KPiecewise { n: 6, m: 4, k: 2 },
        Generator::KPiecewise { n: 7, m: 3, k: 3 },
        Generator::Singletons { n: 6, m: 3 },
        Generator::Singletons { n: 5, m: 5 },
        Generator::Thresholds { n: 10 },
        Generator::Intervals { n: 6 },
        Generator::FullCube { n: 4 },
    ]);
    g
}

fn real_identity_corpus() -> Vec<Generator> {
    let mut g = vec![
        Generator::StepReal { n: 5, q: 1 },
        Generator::StepReal { n: 6, q: 2 },
        Generator::StepReal { n: 4, q: 4 },
        Generator::StepReal { n: 6, q: 3 },
    ];
    g.extend((0..18).map(|i| {
        let (n, q) = (4 + i % 4, 1 + (i % 4) as u32);
        Generator::RandomReal { n, q, rows: (5 + (i * 5) % 26).min((q as usize + 1).pow(n as u32)) }
    }));
    g
}

fn error_row(class: &str, scheme: &str, sample: usize, e: &Error) -> RunRow {
    let mut row = RunRow::new(class, scheme, sample);
    row.bound_ok = Some(false);
    row.note = Some(e.to_string());
    row
}

/// d_VC of the inflated class equals the graph dimension.
pub fn graph_identity(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let items = match corpus(cfg.seed, &multiclass_identity_corpus()) {
        Ok(c) => c,
        Err(e) => return Outcome::from_rows(1, "d_VC(inflated) = d_G", vec![error_row("corpus", "generate", 0, &e)], vec![], String::new(), start),
    };
    let rows: Vec<RunRow> = items
        .par_iter()
        .map(|item| {
            let t = Instant::now();
            let c = total(item);
            let run = || -> Result<RunRow> {
                let n = c.domain().len();
                let g = graph_dimension(&c, n)?;
                let inflated = inflate_class(&c)?;
                let v = vc_dimension(&inflated, inflated.domain().len())?;
                let mut row = RunRow::new(&item.name, "vc(inflate)=graph", 0);
                row.dims.graph = Some(g.value);
                row.dims.vc = Some(v.value);
                row.bound_ok = Some(g.exhaustive && v.exhaustive && g.value == v.value);
                row.note = Some(format!("graph={} inflatedVc={}", g.value, v.value));
                Ok(row)
            };
            let mut row = run().unwrap_or_else(|e| error_row(&item.name, "vc(inflate)=graph", 0, &e));
            row.wall_time_ms = ms(t);
            row
        })
        .collect();
    let summary = format!("{} classes", rows.len());
    Outcome::from_rows(1, "d_VC(inflated) = d_G", rows, vec![], summary, start)
}

fn real_identity_rows(cfg: &Config, scheme: &str, check: impl Fn(&ConceptClass) -> Result<(bool, Dims, String)> + Sync) -> (Vec<RunRow>, Option<Error>) {
    let items = match corpus(cfg.seed, &real_identity_corpus()) {
        Ok(c) => c,
        Err(e) => return (vec![], Some(e)),
    };
    let rows = items
        .par_iter()
        .map(|item| {
            let t = Instant::now();
            let c = total(item);
            let mut row = match check(&c) {
                Ok((ok, dims, note)) => {
                    let mut row = RunRow::new(&item.name, scheme, 0);
                    row.bound_ok = Some(ok);
                    row.dims = dims;
                    row.note = Some(note);
                    row
                }
                Err(e) => error_row(&item.name, scheme, 0, &e),
            };
            row.wall_time_ms = ms(t);
            row
        })
        .collect();
    (rows, None)
}

/// d_VC of the threshold class equals the pseudo-dimension.
pub fn pseudo_identity(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let (rows, err) = real_identity_rows(cfg, "vc(leq)=pseudo", |c| {
        let n = c.domain().len();
        let leq = class_leq(c, &EpsGrid::of_labels(c.labels())?)?;
        let v = vc_dimension(&leq.class, leq.class.domain().len())?;
        let p = pseudo_dimension(c, n)?;
        let dims = Dims { vc: Some(v.value), pseudo: Some(p.value), ..Dims::default() };
        Ok((v.exhaustive && p.exhaustive && v.value == p.value, dims, format!("leqVc={} pseudo={}", v.value, p.value)))
    });
    let extra = err.map(|e| vec![e.to_string()]).unwrap_or_default();
    let summary = format!("{} realGrid classes", rows.len());
    Outcome::from_rows(2, "d_VC(C_<=) = d_P", rows, extra, summary, start)
}

/// The graph dimension is at most four times the pseudo-dimension.
pub fn graph_vs_pseudo(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let (rows, err) = real_identity_rows(cfg, "graph<=4*pseudo", |c| {
        let n = c.domain().len();
        let g = graph_dimension(c, n)?;
        let p = pseudo_dimension(c, n)?;
        let dims = Dims { graph: Some(g.value), pseudo: Some(p.value), ..Dims::default() };
        Ok((g.exhaustive && p.exhaustive && g.value <= 4 * p.value, dims, format!("graph={} pseudo={}", g.value, p.value)))
    });
    let extra = err.map(|e| vec![e.to_string()]).unwrap_or_default();
    let summary = format!("{} realGrid classes", rows.len());
    Outcome::from_rows(3, "d_G <= 4 d_P", rows, extra, summary, start)
}

// ---------------------------------------------------------------------------
// Reduction runs shared by the consistency, size and invariance criteria.

/// One compress/reconstruct run with every check the criteria need.
#[derive(Clone, Debug)]
pub struct Run {
    pub family: Family,
    pub row: RunRow,
    pub consistent: bool,
    pub size_ok: bool,
    pub kept: usize,
    pub error: Option<String>,
}

type LossCheck<'a, L> = &'a (dyn Fn(&LabeledSample<L>, &Predictor<L>) -> Result<(bool, String)> + Sync);
type BoundCheck<'a, L> = &'a (dyn Fn(&CompressionOutput<L>) -> bool + Sync);

struct Sweep<'a, L> {
    family: Family,
    class: &'a str,
    scheme: String,
    compressor: &'a dyn CompressionScheme<L>,
    samples: Vec<LabeledSample<L>>,
    loss: LossCheck<'a, L>,
    bound: BoundCheck<'a, L>,
    dims: Dims,
}

fn sweep<L: Clone + Send + Sync>(w: Sweep<'_, L>) -> Vec<Run> {
    w.samples
        .par_iter()
        .enumerate()
        .map(|(j, s)| {
            let t = Instant::now();
            let mut row = RunRow::new(w.class, &w.scheme, j);
            row.dims = w.dims.clone();
            let res = w.compressor.compress(s).and_then(|out| {
                let p = w.compressor.reconstruct(&out.compressed)?;
                Ok((out, p))
            });
            let run = match res.and_then(|(out, p)| Ok((w.loss)(s, &p)?).map(|l| (out, l))) {
                Ok((out, (consistent, loss))) => {
                    let size_ok = (w.bound)(&out);
                    row.size = Some(out.size());
                    row.loss = Some(loss);
                    let note = format!(
                        "size={} kept={} substrate size={:?} kept={:?}",
                        out.size(),
                        out.kept.len(),
                        out.audit.substrate_size,
                        out.audit.substrate_kept
                    );
                    row.note = Some(note);
                    Run { family: w.family, row, consistent, size_ok, kept: out.kept.len(), error: None }
                }
                Err(e) => {
                    row.note = Some(e.to_string());
                    Run { family: w.family, row, consistent: false, size_ok: false, kept: 0, error: Some(e.to_string()) }
                }
            };
            let mut run = run;
            run.row.wall_time_ms = ms(t);
            run
        })
        .collect()
}

const SAMPLES_PER_SCHEME: usize = 30;

fn multiclass_corpus() -> Vec<Generator> {
    vec![
        Generator::RandomMulticlass { n: 5, m: 3, rows: 10 },
        Generator::RandomMulticlass { n: 6, m: 3, rows: 15 },
        Generator::RandomMulticlass { n: 5, m: 4, rows: 12 },
        Generator::RandomMulticlass { n: 6, m: 4, rows: 20 },
        Generator::RandomMulticlass { n: 4, m: 5, rows: 10 },
        Generator::KPiecewise { n: 8, m: 3, k: 2 },
        Generator::Singletons { n: 6, m: 3 },
    ]
}

fn graph_dim1_corpus() -> Vec<Generator> {
    vec![
        Generator::Thresholds { n: 6 },
        Generator::Thresholds { n: 10 },
        Generator::Singletons { n: 6, m: 3 },
        Generator::Singletons { n: 5, m: 4 },
        Generator::Singletons { n: 8, m: 2 },
    ]
}

fn robust_corpus() -> Vec<Generator> {
    vec![
        Generator::Thresholds { n: 10 },
        Generator::Intervals { n: 8 },
        Generator::RandomMulticlass { n: 8, m: 2, rows: 20 },
        Generator::FullCube { n: 4 },
    ]
}

fn real_corpus() -> Vec<Generator> {
    vec![
        Generator::StepReal { n: 6, q: 4 },
        Generator::StepReal { n: 5, q: 2 },
        Generator::RandomReal { n: 5, q: 4, rows: 10 },
        Generator::RandomReal { n: 6, q: 2, rows: 12 },
        Generator::RandomReal { n: 5, q: 3, rows: 10 },
        Generator::StepReal { n: 6, q: 1 },
    ]
}

fn zero_one_check(s: &LabeledSample, p: &Predictor) -> Result<(bool, String)> {
    let l = zero_one(s, p)?;
    Ok((l.is_zero(), frac_str(&l)))
}

fn plain_samples(cfg: &Config, key: u64, ci: usize, class: &ConceptClass, count: usize, max_len: usize) -> Result<Vec<LabeledSample>> {
    (0..count).map(|j| sample_realizable(class, 1 + j % max_len, sample_seed(cfg, key, ci, j), &SampleMode::Plain)).collect()
}

fn grouped(out: &CompressionOutput) -> bool {
    out.compressed.bits.as_slice().first().copied().unwrap_or(false)
}

fn substrate_parts<L>(out: &CompressionOutput<L>) -> (usize, usize) {
    let f = out.audit.substrate_size.unwrap_or(usize::MAX);
    let kept = out.audit.substrate_kept.unwrap_or(0);
    (f, kept)
}

fn multiclass_runs(cfg: &Config) -> Result<Vec<Run>> {
    let mut runs = Vec::new();
    let items = corpus(cfg.seed, &multiclass_corpus())?;
    for (ci, item) in items.iter().enumerate() {
        let c = total(item);
        let inflated = Arc::new(inflate_class(&c)?);
        let dims = dims_of(&c);
        let samples = plain_samples(cfg, 10, ci, &c, SAMPLES_PER_SCHEME, 8)?;
        for sub in ["proper", "boost"] {
            let general = reduce_general(substrate(sub, inflated.clone())?, c.clone())?;
            let bound = |o: &CompressionOutput| {
                let (f, kept) = substrate_parts(o);
                o.size() <= general.bound(f, f.saturating_sub(kept), grouped(o), kept)
            };
            let scheme = inject(cfg, Box::new(reduce_general(substrate(sub, inflated.clone())?, c.clone())?));
            runs.extend(sweep(Sweep {
                family: Family::Multiclass,
                class: &item.name,
                scheme: format!("general/{sub}"),
                compressor: scheme.as_ref(),
                samples: samples.clone(),
                loss: &zero_one_check,
                bound: &bound,
                dims: dims.clone(),
            }));
            let pm = inject(cfg, Box::new(reduce_proper_or_majority(substrate(sub, inflated.clone())?, c.clone())?));
            let pm_bound = |o: &CompressionOutput| o.size() <= substrate_parts(o).0;
            runs.extend(sweep(Sweep {
                family: Family::Multiclass,
                class: &item.name,
                scheme: format!("proper-majority/{sub}"),
                compressor: pm.as_ref(),
                samples: samples.clone(),
                loss: &zero_one_check,
                bound: &pm_bound,
                dims: dims.clone(),
            }));
        }
        let stable = inject(cfg, Box::new(reduce_stable(substrate("teach", inflated.clone())?, c.clone())?));
        let stable_bound = |o: &CompressionOutput| {
            let (f, kept) = substrate_parts(o);
            o.kept.len() <= kept && o.compressed.bits.len() == f - kept && o.audit.index_bits == 0
        };
        runs.extend(sweep(Sweep {
            family: Family::Multiclass,
            class: &item.name,
            scheme: "stable/teach".into(),
            compressor: stable.as_ref(),
            samples,
            loss: &zero_one_check,
            bound: &stable_bound,
            dims,
        }));
    }
    let g1 = corpus(cfg.seed, &graph_dim1_corpus())?;
    for (ci, item) in g1.iter().enumerate() {
        let c = total(item);
        let scheme = inject(cfg, Box::new(GraphDim1Scheme::new(c.clone())?));
        let samples = plain_samples(cfg, 11, ci, &c, SAMPLES_PER_SCHEME, 8)?;
        runs.extend(sweep(Sweep {
            family: Family::Multiclass,
            class: &item.name,
            scheme: "graphdim1".into(),
            compressor: scheme.as_ref(),
            samples,
            loss: &zero_one_check,
            bound: &|o: &CompressionOutput| o.size() <= 1,
            dims: dims_of(&c),
        }));
    }
    Ok(runs)
}

fn robust_runs(cfg: &Config) -> Result<Vec<Run>> {
    let mut runs = Vec::new();
    let items = corpus(cfg.seed, &robust_corpus())?;
    for (ci, item) in items.iter().enumerate() {
        let c = total(item);
        let n = c.domain().len();
        let dims = dims_of(&c);
        for m in [2usize, 3] {
            let u = PerturbationMap::window(n, m);
            let mode = SampleMode::Robust(u.clone());
            let samples: Vec<LabeledSample> = (0..SAMPLES_PER_SCHEME)
                .map(|j| sample_realizable(&c, 1 + j % 8, sample_seed(cfg, 12 + m as u64, ci, j), &mode))
                .collect::<Result<_>>()?;
            let loss = |s: &LabeledSample, p: &Predictor| -> Result<(bool, String)> {
                let ok = robustly_consistent(p, s, &u);
                Ok((ok, if ok { "0".into() } else { "robust violation".into() }))
            };
            let mut configs: Vec<(String, BoxedScheme, bool)> = Vec::new();
            for sub in ["proper", "boost"] {
                configs.push((format!("robust/{sub}/M={m}"), Box::new(reduce_robust(substrate(sub, c.clone())?, c.clone(), u.clone())?), false));
            }
            configs.push((format!("robust-stable/teach/M={m}"), Box::new(reduce_robust_stable(substrate("teach", c.clone())?, c.clone(), u.clone())?), true));
            if matches!(item.generator, Generator::Thresholds { .. }) {
                configs.push((
                    format!("robust-stable/threshold/M={m}"),
                    Box::new(reduce_robust_stable(substrate("threshold", c.clone())?, c.clone(), u.clone())?),
                    true,
                ));
            }
            let width = reduce_robust(substrate("proper", c.clone())?, c.clone(), u.clone())?;
            for (name, scheme, stable) in configs {
                let bound = |o: &CompressionOutput| {
                    let (f, kept) = substrate_parts(o);
                    if stable {
                        o.kept.len() <= kept && o.size() <= f
                    } else {
                        o.size() <= width.bound(f, f.saturating_sub(kept), grouped(o), kept)
                    }
                };
                let scheme = inject(cfg, scheme);
                runs.extend(sweep(Sweep {
                    family: Family::Robust,
                    class: &item.name,
                    scheme: name,
                    compressor: scheme.as_ref(),
                    samples: samples.clone(),
                    loss: &loss,
                    bound: &bound,
                    dims: dims.clone(),
                }));
            }
        }
    }
    Ok(runs)
}

fn real_check(loss: Loss, eps: Rational) -> impl Fn(&RealSample, &Predictor<Rational>) -> Result<(bool, String)> + Sync {
    move |s, p| {
        if s.is_empty() {
            return Ok((true, "0".into()));
        }
        let v = real_loss(p, s, &loss)?;
        Ok((*v.upper() <= big(eps), frac_str(v.upper())))
    }
}

fn all_losses(eps: Rational) -> impl Fn(&RealSample, &Predictor<Rational>) -> Result<(bool, String)> + Sync {
    move |s, p| {
        if s.is_empty() {
            return Ok((true, "0".into()));
        }
        let mut ok = true;
        let mut parts = Vec::new();
        for loss in [Loss::LInf, Loss::lp(1), Loss::lp(2)] {
            let v = real_loss(p, s, &loss)?;
            ok &= *v.upper() <= big(eps);
            parts.push(frac_str(v.upper()));
        }
        Ok((ok, parts.join(";")))
    }
}

const REGRESSION_SAMPLES: usize = 50;

fn regression_runs(cfg: &Config) -> Result<Vec<Run>> {
    let mut runs = Vec::new();
    let items = corpus(cfg.seed, &real_corpus())?;
    let factory = |name: &'static str| move |c: Arc<ConceptClass>| substrate(name, c);
    for (ci, item) in items.iter().enumerate() {
        let c = total(item);
        let dims = dims_of(&c);
        let samples: Vec<RealSample> = (0..REGRESSION_SAMPLES)
            .map(|j| sample_real(&c, 1 + j % 6, sample_seed(cfg, 20, ci, j), &SampleMode::Plain))
            .collect::<Result<_>>()?;
        for eps in [rat(1, 4), rat(1, 16)] {
            let e = fmt_rational(&eps);
            for sub in ["proper", "boost"] {
                let f = factory(sub);
                let linf = reduce_eps_linf(&f, c.clone(), eps)?;
                let bound = |o: &CompressionOutput<Rational>| {
                    let (fs, kept) = substrate_parts(o);
                    let g = o.compressed.bits.as_slice().first().copied().unwrap_or(false);
                    o.size() <= linf.bound(fs, fs.saturating_sub(kept), g, kept)
                };
                runs.extend(sweep(Sweep {
                    family: Family::Regression,
                    class: &item.name,
                    scheme: format!("linf/{sub}/eps={e}"),
                    compressor: &linf,
                    samples: samples.clone(),
                    loss: &real_check(Loss::LInf, eps),
                    bound: &bound,
                    dims: dims.clone(),
                }));
                for p in [1, 2] {
                    let lp = reduce_eps_lp(&f, c.clone(), eps, Rational::from_integer(p))?;
                    let bound = |o: &CompressionOutput<Rational>| {
                        let (fs, kept) = substrate_parts(o);
                        let g = o.compressed.bits.as_slice().first().copied().unwrap_or(false);
                        o.size() <= lp.bound(fs, fs.saturating_sub(kept), g, kept)
                    };
                    runs.extend(sweep(Sweep {
                        family: Family::Regression,
                        class: &item.name,
                        scheme: format!("lp{p}/{sub}/eps={e}"),
                        compressor: &lp,
                        samples: samples.clone(),
                        loss: &real_check(Loss::lp(p), eps),
                        bound: &bound,
                        dims: dims.clone(),
                    }));
                }
                let maj = reduce_majority_regression(&f, c.clone(), eps)?;
                let maj_bound = |o: &CompressionOutput<Rational>| {
                    let (fs, kept) = substrate_parts(o);
                    o.kept.len() <= kept && o.size() <= 3 * fs
                };
                runs.extend(sweep(Sweep {
                    family: Family::Regression,
                    class: &item.name,
                    scheme: format!("majority/{sub}/eps={e}"),
                    compressor: &maj,
                    samples: samples.clone(),
                    loss: &all_losses(eps),
                    bound: &maj_bound,
                    dims: dims.clone(),
                }));
            }
            let teach = factory("teach");
            let stable = reduce_stable_regression(&teach, c.clone(), eps)?;
            let stable_bound = |o: &CompressionOutput<Rational>| {
                let (fs, kept) = substrate_parts(o);
                o.kept.len() <= kept && o.size() <= fs
            };
            runs.extend(sweep(Sweep {
                family: Family::Regression,
                class: &item.name,
                scheme: format!("stable/teach/eps={e}"),
                compressor: &stable,
                samples: samples.clone(),
                loss: &all_losses(eps),
                bound: &stable_bound,
                dims: dims.clone(),
            }));
        }
    }
    Ok(runs)
}

type RunCache = Mutex<HashMap<(Config, Family), Arc<Vec<Run>>>>;

fn cache() -> &'static RunCache {
    static CACHE: OnceLock<RunCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Runs of one reduction family, computed once per configuration.
pub fn family_runs(cfg: &Config, family: Family) -> Result<Arc<Vec<Run>>> {
    if let Some(r) = cache().lock().expect("cache lock").get(&(*cfg, family)) {
        return Ok(r.clone());
    }
    let runs = Arc::new(match family {
        Family::Multiclass => multiclass_runs(cfg)?,
        Family::Regression => regression_runs(cfg)?,
        Family::Robust => robust_runs(cfg)?,
    });
    cache().lock().expect("cache lock").insert((*cfg, family), runs.clone());
    Ok(runs)
}

fn family_rows(cfg: &Config, families: &[Family], pick: impl Fn(&Run) -> bool) -> (Vec<RunRow>, Vec<String>) {
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    for &f in families {
        match family_runs(cfg, f) {
            Ok(runs) => rows.extend(runs.iter().map(|r| {
                let mut row = r.row.clone();
                row.bound_ok = Some(r.error.is_none() && pick(r));
                row
            })),
            Err(e) => extra.push(format!("{f:?} runs failed to start: {e}")),
        }
    }
    (rows, extra)
}

/// Reductions reconstruct with zero (robust) zero-one loss on the sample.
pub fn reduction_consistency(cfg: &Config, families: &[Family]) -> Outcome {
    let start = Instant::now();
    let fams: Vec<Family> = families.iter().copied().filter(|f| *f != Family::Regression).collect();
    let (rows, extra) = family_rows(cfg, &fams, |r| r.consistent);
    let summary = format!("{} runs on realizable samples", rows.len());
    Outcome::from_rows(4, "reduction consistency", rows, extra, summary, start)
}

/// Approximate regression reductions stay within ε.
pub fn regression_guarantee(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let (rows, extra) = family_rows(cfg, &[Family::Regression], |r| r.consistent);
    let summary = format!("{} runs, eps in {{1/4, 1/16}}, p in {{1, 2, inf}}", rows.len());
    Outcome::from_rows(5, "approximate regression guarantee", rows, extra, summary, start)
}

/// Measured sizes respect the per-reduction bounds in terms of the
/// substrate size.
pub fn size_bounds(cfg: &Config, families: &[Family]) -> Outcome {
    let start = Instant::now();
    let (rows, extra) = family_rows(cfg, families, |r| r.size_ok);
    let summary = format!("{} runs", rows.len());
    Outcome::from_rows(6, "size bounds", rows, extra, summary, start)
}

// ---------------------------------------------------------------------------
// Invariance of kept counts.

fn invariance_eps(cfg: &Config) -> Result<(Vec<RunRow>, Vec<String>)> {
    let gens = vec![
        Generator::StepReal { n: 6, q: 4 },
        Generator::StepReal { n: 5, q: 2 },
        Generator::RandomReal { n: 5, q: 4, rows: 10 },
        Generator::RandomReal { n: 6, q: 2, rows: 12 },
        Generator::StepReal { n: 6, q: 1 },
    ];
    let items = corpus(cfg.seed, &gens)?;
    let epss = [rat(1, 4), rat(1, 16), rat(1, 64)];
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (ci, item) in items.iter().enumerate() {
        let c = total(item);
        let samples: Vec<RealSample> = (0..10).map(|j| sample_real(&c, 1 + j % 7, sample_seed(cfg, 30, ci, j), &SampleMode::Plain)).collect::<Result<_>>()?;
        for (label, sub, stable) in [("majority/proper", "proper", false), ("majority/teach", "teach", false), ("stable/teach", "teach", true)] {
            let f = move |cl: Arc<ConceptClass>| substrate(sub, cl);
            let schemes: Vec<Box<dyn CompressionScheme<Rational>>> = epss
                .iter()
                .map(|&e| -> Result<Box<dyn CompressionScheme<Rational>>> {
                    Ok(if stable { Box::new(reduce_stable_regression(&f, c.clone(), e)?) } else { Box::new(reduce_majority_regression(&f, c.clone(), e)?) })
                })
                .collect::<Result<_>>()?;
            let per: Vec<RunRow> = samples
                .par_iter()
                .enumerate()
                .map(|(j, s)| {
                    let t = Instant::now();
                    let mut row = RunRow::new(&item.name, &format!("{label}/eps-invariance"), j);
                    let outs: Result<Vec<(usize, usize)>> = schemes.iter().map(|sch| sch.compress(s).map(|o| (o.kept.len(), o.size()))).collect();
                    match outs {
                        Ok(v) => {
                            row.bound_ok = Some(v.iter().all(|k| k.0 == v[0].0));
                            row.size = Some(v[0].1);
                            row.note = Some(format!("kept per eps {:?}, sizes {:?}", v.iter().map(|k| k.0).collect::<Vec<_>>(), v.iter().map(|k| k.1).collect::<Vec<_>>()));
                        }
                        Err(e) => {
                            row.bound_ok = Some(false);
                            row.note = Some(e.to_string());
                        }
                    }
                    row.wall_time_ms = ms(t);
                    row
                })
                .collect();
            rows.extend(per);
        }
    }
    failures.extend(rows.iter().filter(|r| !r.ok()).map(RunRow::witness).take(0));
    Ok((rows, failures))
}

fn invariance_m(cfg: &Config) -> Result<Vec<RunRow>> {
    let gens = vec![Generator::Thresholds { n: 10 }, Generator::Thresholds { n: 12 }, Generator::Thresholds { n: 16 }];
    let items = corpus(cfg.seed, &gens)?;
    let mut rows = Vec::new();
    for (ci, item) in items.iter().enumerate() {
        let c = total(item);
        let n = c.domain().len();
        let (u2, u8) = (PerturbationMap::window(n, 2), PerturbationMap::window(n, 8));
        let s2 = reduce_robust_stable(substrate("threshold", c.clone())?, c.clone(), u2)?;
        let s8 = reduce_robust_stable(substrate("threshold", c.clone())?, c.clone(), u8.clone())?;
        let samples: Vec<LabeledSample> = (0..15)
            .map(|j| sample_realizable(&c, 1 + j % 8, sample_seed(cfg, 31, ci, j), &SampleMode::Robust(u8.clone())))
            .collect::<Result<_>>()?;
        rows.extend(samples.par_iter().enumerate().map(|(j, s)| {
            let t = Instant::now();
            let mut row = RunRow::new(&item.name, "robust-stable/threshold/M-invariance", j);
            match (s2.compress(s), s8.compress(s)) {
                (Ok(a), Ok(b)) => {
                    row.bound_ok = Some(a.kept.len() == b.kept.len());
                    row.size = Some(b.size());
                    row.note = Some(format!("kept M=2: {}, M=8: {}", a.kept.len(), b.kept.len()));
                }
                (Err(e), _) | (_, Err(e)) => {
                    row.bound_ok = Some(false);
                    row.note = Some(e.to_string());
                }
            }
            row.wall_time_ms = ms(t);
            row
        }).collect::<Vec<_>>());
    }
    Ok(rows)
}

/// Kept counts do not depend on ε (majority and stable regression) or on
/// M (stable robust).
pub fn invariance(cfg: &Config, families: &[Family]) -> Outcome {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    if families.contains(&Family::Regression) {
        match invariance_eps(cfg) {
            Ok((r, f)) => {
                rows.extend(r);
                extra.extend(f);
            }
            Err(e) => extra.push(format!("eps invariance: {e}")),
        }
    }
    if families.contains(&Family::Robust) {
        match invariance_m(cfg) {
            Ok(r) => rows.extend(r),
            Err(e) => extra.push(format!("M invariance: {e}")),
        }
    }
    let summary = format!("{} matched samples", rows.len());
    Outcome::from_rows(7, "eps- and M-invariance", rows, extra, summary, start)
}

// ---------------------------------------------------------------------------
// Stability.

fn stability_rows<L>(cfg: &Config, class: &str, scheme_name: &str, scheme: &dyn CompressionScheme<L>, samples: &[LabeledSample<L>], budget: Option<usize>) -> Vec<RunRow>
where
    L: Clone + Ord + std::hash::Hash + Send + Sync,
{
    samples
        .par_iter()
        .enumerate()
        .map(|(j, s)| {
            let t = Instant::now();
            let mut row = RunRow::new(class, scheme_name, j);
            match verify_stability(scheme, s, derive(cfg.seed, &[3, j as u64])) {
                Ok(rep) => {
                    row.stable_ok = Some(rep.passed);
                    row.note = Some(format!("gap={} exhaustive={} checked={} witness={:?}", rep.gap, rep.exhaustive, rep.checked, rep.witness));
                    if let Ok(out) = scheme.compress(s) {
                        row.size = Some(out.size());
                        if let Some(b) = budget {
                            row.bound_ok = Some(out.size() <= b);
                        }
                    }
                }
                Err(e) => {
                    row.stable_ok = Some(false);
                    row.note = Some(e.to_string());
                }
            }
            row.wall_time_ms = ms(t);
            row
        })
        .collect()
}

fn stability_all(cfg: &Config) -> Result<Vec<RunRow>> {
    let mut rows = Vec::new();
    let mc = corpus(cfg.seed, &multiclass_corpus()[..4])?;
    for (ci, item) in mc.iter().enumerate() {
        let c = total(item);
        let inflated = Arc::new(inflate_class(&c)?);
        let scheme = inject(cfg, Box::new(reduce_stable(substrate("teach", inflated)?, c.clone())?));
        let samples = plain_samples(cfg, 40, ci, &c, 10, 8)?;
        rows.extend(stability_rows(cfg, &item.name, "stable/teach", scheme.as_ref(), &samples, None));
    }
    let rc = corpus(cfg.seed, &real_corpus()[..4])?;
    for (ci, item) in rc.iter().enumerate() {
        let c = total(item);
        let f = |cl: Arc<ConceptClass>| substrate("teach", cl);
        let scheme = reduce_stable_regression(&f, c.clone(), rat(1, 4))?;
        let samples: Vec<RealSample> = (0..8).map(|j| sample_real(&c, 1 + j % 8, sample_seed(cfg, 41, ci, j), &SampleMode::Plain)).collect::<Result<_>>()?;
        rows.extend(stability_rows(cfg, &item.name, "stable-regression/teach/eps=1/4", &scheme, &samples, None));
    }
    let rb = corpus(cfg.seed, &[Generator::Thresholds { n: 10 }, Generator::Intervals { n: 8 }, Generator::Thresholds { n: 14 }])?;
    for (ci, item) in rb.iter().enumerate() {
        let c = total(item);
        let n = c.domain().len();
        for m in [2usize, 4] {
            let u = PerturbationMap::window(n, m);
            let samples: Vec<LabeledSample> = (0..8)
                .map(|j| sample_realizable(&c, 1 + j % 10, sample_seed(cfg, 42 + m as u64, ci, j), &SampleMode::Robust(u.clone())))
                .collect::<Result<_>>()?;
            let mut subs = vec!["teach"];
            if matches!(item.generator, Generator::Thresholds { .. }) {
                subs.push("threshold");
            }
            for sub in subs {
                let scheme = inject(cfg, Box::new(reduce_robust_stable(substrate(sub, c.clone())?, c.clone(), u.clone())?));
                rows.extend(stability_rows(cfg, &item.name, &format!("robust-stable/{sub}/M={m}"), scheme.as_ref(), &samples, None));
            }
        }
    }
    let th = corpus(cfg.seed, &[Generator::Thresholds { n: 10 }, Generator::Thresholds { n: 12 }])?;
    for (ci, item) in th.iter().enumerate() {
        let c = total(item);
        let scheme = inject(cfg, Box::new(ThresholdStableScheme::new(c.clone())?));
        let samples = plain_samples(cfg, 43, ci, &c, 20, 14)?;
        rows.extend(stability_rows(cfg, &item.name, "threshold", scheme.as_ref(), &samples, Some(2)));
    }
    let pw = corpus(cfg.seed, &[Generator::KPiecewise { n: 10, m: 3, k: 2 }, Generator::KPiecewise { n: 8, m: 4, k: 2 }])?;
    for (ci, item) in pw.iter().enumerate() {
        let c = total(item);
        let m = c.labels().size();
        let scheme = inject(cfg, Box::new(piecewise_threshold_inflated_scheme(&c, 2)?));
        let samples: Vec<LabeledSample> = plain_samples(cfg, 44, ci, &c, 12, 4)?.iter().map(|s| inflate_sample(s, m)).collect();
        rows.extend(stability_rows(cfg, &item.name, "piecewise/k=2", scheme.as_ref(), &samples, Some(4)));
    }
    Ok(rows)
}

/// Stable schemes and reductions pass the subsample check.
pub fn stability(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let (rows, extra) = match stability_all(cfg) {
        Ok(r) => (r, vec![]),
        Err(e) => (vec![], vec![format!("stability runs failed to start: {e}")]),
    };
    let exhaustive = rows.iter().filter(|r| r.note.as_deref().is_some_and(|n| n.contains("exhaustive=true"))).count();
    let summary = format!("{} samples, {} exhaustive", rows.len(), exhaustive);
    Outcome::from_rows(8, "stability preservation", rows, extra, summary, start)
}

// ---------------------------------------------------------------------------
// SOA.

fn soa_corpus() -> Vec<Generator> {
    vec![
        Generator::Thresholds { n: 10 },
        Generator::Thresholds { n: 6 },
        Generator::Intervals { n: 5 },
        Generator::Intervals { n: 6 },
        Generator::FullCube { n: 3 },
        Generator::FullCube { n: 2 },
        Generator::Singletons { n: 6, m: 2 },
        Generator::RandomMulticlass { n: 6, m: 2, rows: 10 },
        Generator::RandomMulticlass { n: 5, m: 2, rows: 12 },
        Generator::RandomMulticlass { n: 7, m: 2, rows: 16 },
        Generator::RandomMulticlass { n: 6, m: 2, rows: 24 },
    ]
}

fn soa_row(scheme: &dyn CompressionScheme, ld: usize, class: &str, label: &str, j: usize, s: &LabeledSample) -> RunRow {
    let t = Instant::now();
    let mut row = RunRow::new(class, label, j);
    row.dims.littlestone = Some(ld);
    let res = scheme.compress(s).and_then(|o| Ok((scheme.reconstruct(&o.compressed)?, o)));
    match res {
        Ok((p, o)) => {
            let consistent = zero_one(s, &p).map(|l| l.is_zero()).unwrap_or(false);
            let iter_ok = match (o.audit.iterations, o.audit.iteration_bound) {
                (Some(i), Some(b)) => i <= b,
                _ => true,
            };
            row.size = Some(o.size());
            row.bound_ok = Some(o.kept.len() <= ld && consistent && iter_ok);
            row.note = Some(format!("kept={} ld={ld} consistent={consistent} iterations={:?}", o.kept.len(), o.audit.iterations));
        }
        Err(e) => {
            row.bound_ok = Some(false);
            row.note = Some(e.to_string());
        }
    }
    row.wall_time_ms = ms(t);
    row
}

/// The SOA scheme keeps at most d_LD pairs.
pub fn soa_bound(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let run = || -> Result<(Vec<RunRow>, Vec<String>)> {
        let items = corpus(cfg.seed, &soa_corpus())?;
        let mut rows = Vec::new();
        let mut extra = Vec::new();
        for (ci, item) in items.iter().enumerate() {
            let c = total(item);
            let ld = littlestone_dimension(&c)?.value;
            if matches!(item.generator, Generator::Thresholds { n: 10 }) && ld != 3 {
                extra.push(format!("{}: littlestone dimension {ld}, expected 3", item.name));
            }
            let scheme = inject(cfg, Box::new(SoaScheme::new(c.clone())?));
            let samples = plain_samples(cfg, 50, ci, &c, 25, 12)?;
            rows.extend(samples.par_iter().enumerate().map(|(j, s)| soa_row(scheme.as_ref(), ld, &item.name, "soa", j, s)).collect::<Vec<_>>());
            if matches!(item.generator, Generator::Thresholds { n: 10 }) {
                // Every concept with every subset of the domain in increasing order.
                let n = c.domain().len();
                let exhaustive: Vec<RunRow> = (0..c.len())
                    .into_par_iter()
                    .map(|k| {
                        let t = Instant::now();
                        let mut worst = RunRow::new(&item.name, "soa/all-subsets", k);
                        worst.bound_ok = Some(true);
                        worst.dims.littlestone = Some(ld);
                        let mut max_kept = 0;
                        for mask in 0u32..(1 << n) {
                            let s = LabeledSample::new((0..n).filter(|&x| mask >> x & 1 == 1).map(|x| (x, c.label(k, x))).collect());
                            let r = soa_row(scheme.as_ref(), ld, &item.name, "soa", mask as usize, &s);
                            max_kept = max_kept.max(r.size.unwrap_or(0));
                            if !r.ok() {
                                worst = r;
                                worst.scheme = "soa/all-subsets".into();
                                break;
                            }
                        }
                        if worst.ok() {
                            worst.size = Some(max_kept);
                            worst.note = Some(format!("max size over {} subsets = {max_kept}", 1u32 << n));
                        }
                        worst.wall_time_ms = ms(t);
                        worst
                    })
                    .collect();
                rows.extend(exhaustive);
            }
        }
        Ok((rows, extra))
    };
    let (rows, extra) = run().unwrap_or_else(|e| (vec![], vec![e.to_string()]));
    let summary = format!("{} classes, {} rows", soa_corpus().len(), rows.len());
    Outcome::from_rows(9, "SOA kept-size <= d_LD", rows, extra, summary, start)
}

// ---------------------------------------------------------------------------
// Graph dimension 1.

/// Size at most 1, consistency, and an iteration count within the chain
/// bound (the scheme itself rejects any step that fails to shrink).
pub fn graph_dim1(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let run = || -> Result<Vec<RunRow>> {
        let items = corpus(cfg.seed, &graph_dim1_corpus())?;
        let mut rows = Vec::new();
        for (ci, item) in items.iter().enumerate() {
            let c = total(item);
            let scheme = inject(cfg, Box::new(GraphDim1Scheme::new(c.clone())?));
            let samples = plain_samples(cfg, 60, ci, &c, 40, 10)?;
            let g = graph_dimension(&c, c.domain().len())?.value;
            rows.extend(
                samples
                    .par_iter()
                    .enumerate()
                    .map(|(j, s)| {
                        let mut row = soa_row(scheme.as_ref(), 1, &item.name, "graphdim1", j, s);
                        row.dims = Dims { graph: Some(g), ..Dims::default() };
                        row
                    })
                    .collect::<Vec<_>>(),
            );
        }
        Ok(rows)
    };
    let (rows, extra) = run().map(|r| (r, vec![])).unwrap_or_else(|e| (vec![], vec![e.to_string()]));
    let summary = format!("{} samples over d_G = 1 classes", rows.len());
    Outcome::from_rows(10, "graph-dimension-1 scheme", rows, extra, summary, start)
}

// ---------------------------------------------------------------------------
// Agnostic.

fn agnostic_all(cfg: &Config) -> Result<Vec<RunRow>> {
    let mut rows = Vec::new();
    let items = corpus(cfg.seed, &multiclass_corpus())?;
    let noisy = SampleMode::Noisy(rat(1, 4));
    for (ci, item) in items.iter().enumerate() {
        let c = total(item);
        let inflated = Arc::new(inflate_class(&c)?);
        let scheme = inject(cfg, Box::new(agnostic_wrap(Box::new(reduce_general(substrate("proper", inflated)?, c.clone())?), c.clone())));
        let samples: Vec<LabeledSample> = (0..45).map(|j| sample_realizable(&c, 4 + j % 7, sample_seed(cfg, 70, ci, j), &noisy)).collect::<Result<_>>()?;
        rows.extend(samples.par_iter().enumerate().map(|(j, s)| {
            let t = Instant::now();
            let mut row = RunRow::new(&item.name, "agnostic-wrap/general/proper", j);
            let res = (|| -> Result<(BigRational, BigRational, usize)> {
                let (_, best) = erm(&c, s, &Loss::ZeroOne)?;
                let out = scheme.compress(s)?;
                let p = scheme.reconstruct(&out.compressed)?;
                Ok((zero_one(s, &p)?, best.upper().clone(), out.size()))
            })();
            match res {
                Ok((got, best, size)) => {
                    row.size = Some(size);
                    row.loss = Some(frac_str(&got));
                    row.bound_ok = Some(got <= best);
                    row.note = Some(format!("loss {} vs erm {}", frac_str(&got), frac_str(&best)));
                }
                Err(e) => {
                    row.bound_ok = Some(false);
                    row.note = Some(e.to_string());
                }
            }
            row.wall_time_ms = ms(t);
            row
        }).collect::<Vec<_>>());
    }
    let reals = corpus(cfg.seed, &real_corpus())?;
    let f = |cl: Arc<ConceptClass>| substrate("proper", cl);
    for (ci, item) in reals.iter().enumerate() {
        let c = total(item);
        let samples: Vec<RealSample> = (0..50).map(|j| sample_real(&c, 3 + j % 6, sample_seed(cfg, 71, ci, j), &noisy)).collect::<Result<_>>()?;
        for eps in [rat(1, 4), rat(1, 16)] {
            for loss in [Loss::LInf, Loss::lp(1), Loss::lp(2)] {
                let scheme = agnostic_regression(&f, c.clone(), eps, loss.clone())?;
                let label = format!("agnostic-regression/proper/{}/eps={}", loss_name(&loss), fmt_rational(&eps));
                rows.extend(samples.par_iter().enumerate().map(|(j, s)| {
                    let t = Instant::now();
                    let mut row = RunRow::new(&item.name, &label, j);
                    let res = (|| -> Result<(BigRational, BigRational, usize)> {
                        let (_, best) = erm_real(&c, s, &loss)?;
                        let out = scheme.compress(s)?;
                        let p = scheme.reconstruct(&out.compressed)?;
                        Ok((real_loss(&p, s, &loss)?.upper().clone(), best.lower().clone(), out.size()))
                    })();
                    match res {
                        Ok((got, best, size)) => {
                            let limit = &best + big(eps);
                            row.size = Some(size);
                            row.loss = Some(frac_str(&got));
                            row.bound_ok = Some(got <= limit);
                            row.note = Some(format!("loss {} vs erm {} + eps", frac_str(&got), frac_str(&best)));
                        }
                        Err(e) => {
                            row.bound_ok = Some(false);
                            row.note = Some(e.to_string());
                        }
                    }
                    row.wall_time_ms = ms(t);
                    row
                }).collect::<Vec<_>>());
            }
        }
    }
    Ok(rows)
}

fn loss_name(l: &Loss) -> String {
    match l {
        Loss::ZeroOne => "zeroOne".into(),
        Loss::LInf => "lInf".into(),
        Loss::Lp(p) => format!("l{}", fmt_rational(p)),
    }
}

/// ERM-based wrappers match ERM (classification) or ERM plus ε (regression).
pub fn agnostic(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let (rows, extra) = agnostic_all(cfg).map(|r| (r, vec![])).unwrap_or_else(|e| (vec![], vec![e.to_string()]));
    let wrap = rows.iter().filter(|r| r.scheme.starts_with("agnostic-wrap")).count();
    let summary = format!("{wrap} wrap runs, {} regression runs", rows.len() - wrap);
    Outcome::from_rows(11, "agnostic contracts", rows, extra, summary, start)
}

// ---------------------------------------------------------------------------
// One-inclusion graph.

fn oig_all(cfg: &Config) -> Result<Vec<RunRow>> {
    let mut rows = Vec::new();
    let gens: Vec<Generator> = [2, 3, 4].iter().map(|&d| Generator::TwinFromPartial { spec: Box::new(Generator::TreePartial { depth: d }) }).collect();
    let items = corpus(cfg.seed, &gens)?;
    for (ci, item) in items.iter().enumerate() {
        let CorpusClass::Twin { class, perturb, .. } = &item.class else {
            return Err(Error::Construction(format!("{} is not a twin class", item.name)));
        };
        let mut jobs = Vec::new();
        for (k, n) in [3usize, 5, 8].into_iter().enumerate() {
            for rep in 0..4 {
                jobs.push((k * 4 + rep, n));
            }
        }
        let mode = SampleMode::Robust(perturb.clone());
        rows.extend(jobs.par_iter().map(|&(j, n)| {
            let t = Instant::now();
            let mut row = RunRow::new(&item.name, &format!("oig/n={n}"), j);
            let res = (|| -> Result<(bool, usize, f64, f64, usize)> {
                let instance = sample_realizable(class, n + 1, sample_seed(cfg, 80, ci, j), &mode)?;
                let points: Vec<usize> = instance.pairs.iter().map(|p| p.0).collect();
                let g = OneInclusionGraph::build(class, perturb, &points);
                let mut rng = stream(cfg.seed, &[2, 12, (ci * 100 + j) as u64]);
                let loo = leave_one_out(class, perturb, &instance, LOO_TRIALS, &mut rng)?;
                Ok((g.acyclic, g.max_out_degree(), loo.mean, loo.std_error, g.vertices.len()))
            })();
            match res {
                Ok((acyclic, outdeg, mean, se, nv)) => {
                    let limit = 1.0 / n as f64 + 3.0 * se;
                    row.bound_ok = Some(acyclic && outdeg <= 1 && mean <= limit);
                    row.loss = Some(format!("{mean:.6}"));
                    row.note = Some(format!("vertices={nv} acyclic={acyclic} outdeg={outdeg} loo={mean:.4} limit={limit:.4}"));
                }
                Err(e) => {
                    row.bound_ok = Some(false);
                    row.note = Some(e.to_string());
                }
            }
            row.wall_time_ms = ms(t);
            row
        }).collect::<Vec<_>>());
    }
    Ok(rows)
}

/// Twin classes of tree partial classes give acyclic graphs, out-degree at
/// most 1, and leave-one-out error at most 1/n within three standard errors.
pub fn one_inclusion(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let (rows, extra) = oig_all(cfg).map(|r| (r, vec![])).unwrap_or_else(|e| (vec![], vec![e.to_string()]));
    let summary = format!("{} instances, {LOO_TRIALS} permutations each", rows.len());
    Outcome::from_rows(12, "one-inclusion graph", rows, extra, summary, start)
}

// ---------------------------------------------------------------------------
// Negative controls.

/// The sabotaged fixture must fail validity and the unstable fixture must
/// fail stability.
pub fn negative_controls(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let run = || -> Result<Vec<RunRow>> {
        let item = generate_entry(cfg.seed, 0, &Generator::Thresholds { n: 10 })?;
        let c = total(&item);
        let samples = plain_samples(cfg, 90, 0, &c, 20, 8)?;
        let mut rows = Vec::new();

        let t = Instant::now();
        let sabotaged = SabotagedScheme(crate::schemes::ProperExhaustiveScheme::new(c.clone(), usize::MAX)?);
        let report = verify_validity(&sabotaged, &samples, |s, p| zero_one(s, p), &BigRational::zero());
        let mut row = RunRow::new(&item.name, "sabotaged/validity", 0);
        row.bound_ok = Some(!report.all_passed());
        row.note = Some(format!("{} of {} samples failed validity", report.failures(), samples.len()));
        row.wall_time_ms = ms(t);
        rows.push(row);

        let t = Instant::now();
        let unstable = UnstableScheme(ThresholdStableScheme::new(c.clone())?);
        let mut failed = 0;
        for (j, s) in samples.iter().enumerate() {
            if !verify_stability(&unstable, s, derive(cfg.seed, &[4, j as u64]))?.passed {
                failed += 1;
            }
        }
        let mut row = RunRow::new(&item.name, "unstable/stability", 0);
        row.stable_ok = Some(failed > 0);
        row.note = Some(format!("{failed} of {} samples failed stability", samples.len()));
        row.wall_time_ms = ms(t);
        rows.push(row);
        Ok(rows)
    };
    let (rows, extra) = run().map(|r| (r, vec![])).unwrap_or_else(|e| (vec![], vec![e.to_string()]));
    let summary = rows.iter().filter_map(|r| r.note.clone()).collect::<Vec<_>>().join("; ");
    Outcome::from_rows(13, "negative controls", rows, extra, summary, start)
}

/// Every criterion in order.
pub fn run_all(cfg: &Config) -> Vec<Outcome> {
    vec![
        graph_identity(cfg),
        pseudo_identity(cfg),
        graph_vs_pseudo(cfg),
        reduction_consistency(cfg, &ALL_FAMILIES),
        regression_guarantee(cfg),
        size_bounds(cfg, &ALL_FAMILIES),
        invariance(cfg, &ALL_FAMILIES),
        stability(cfg),
        soa_bound(cfg),
        graph_dim1(cfg),
        agnostic(cfg),
        one_inclusion(cfg),
        negative_controls(cfg),
    ]
}

