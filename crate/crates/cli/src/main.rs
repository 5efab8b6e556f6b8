//! `scompress`: dimension oracles, compression schemes, reductions and the
//! acceptance suites from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use scompress::bits::BitString;
use scompress::concepts::{erm_real, real_loss};
use scompress::dimensions::{graph_dimension, littlestone_dimension, partial_vc_dimension, pseudo_dimension, vc_dimension, DEFAULT_MAX_SET_SIZE};
use scompress::harness::corpus::{generate_corpus, CorpusClass, CorpusSpec, Generator};
use scompress::harness::criteria::{Config, Inject, DEFAULT_SEED};
use scompress::harness::io::{
    class_from_json, class_to_json, partial_to_json, perturbation_from_json, perturbation_to_json, real_sample_from_json, sample_from_json, samples_from_json,
    ClassFile,
};
use scompress::harness::suites::{run_suite, write_reports, SUITES};
use scompress::rational::{BigRational, fmt_big, parse_rational, to_big, Rational};
use scompress::reductions::multiclass::{inflate_class, reduce_general, reduce_proper_or_majority, reduce_stable, GraphDim1Scheme};
use scompress::reductions::regression::{
    agnostic_regression, exact_via_multiclass, reduce_eps_linf, reduce_eps_lp, reduce_majority_regression, reduce_stable_regression, RealSample,
};
use scompress::reductions::robust::{oig_predict, reduce_robust, reduce_robust_stable, robustly_consistent};
use scompress::schemes::{BoxedScheme, CompressionOutput, CompressionScheme, Registry};
use scompress::verify::zero_one;
use scompress::{ConceptClass, LabeledSample, Loss};

#[derive(Parser)]
#[command(name = "scompress", version, about = "Sample compression schemes and their reductions on finite concept classes")]
struct Cli {
    /// Seed for every sampled corpus and Monte-Carlo estimate.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for reports and generated files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive dimension of a class.
    Dim {
        #[arg(long)]
        class: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value_t = DEFAULT_MAX_SET_SIZE)]
        max_set_size: usize,
    },
    /// Compress one sample with a binary scheme.
    Compress {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        sample: PathBuf,
    },
    /// Run a reduction on a list of samples.
    #[command(subcommand)]
    Reduce(Reduce),
    /// One-inclusion-graph prediction at a test point.
    Oig {
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        perturb: PathBuf,
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        test_point: String,
    },
    /// Generate a corpus and write one class file per entry.
    Corpus {
        /// JSON `{seed, entries}`; without it a default corpus is written.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Run a named group of acceptance criteria.
    Suite {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        name: String,
        #[arg(long, value_enum)]
        inject: Option<InjectArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Vc,
    Graph,
    Pseudo,
    Littlestone,
    Partial,
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectArg {
    Sabotaged,
    Unstable,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    class: PathBuf,
    #[arg(long, default_value = "proper")]
    substrate: String,
    #[arg(long)]
    samples: PathBuf,
}

#[derive(Subcommand)]
enum Reduce {
    Multiclass {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "general")]
        mode: MulticlassMode,
    },
    Regression {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "linf")]
        mode: RegressionMode,
        #[arg(long, default_value = "1/4")]
        eps: String,
        #[arg(long, default_value_t = 2)]
        p: i64,
    },
    Robust {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        perturb: PathBuf,
        #[arg(long, value_enum, default_value = "general")]
        mode: RobustMode,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MulticlassMode {
    General,
    ProperMajority,
    Stable,
    Graphdim1,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegressionMode {
    Linf,
    Lp,
    Majority,
    Stable,
    Exact,
    Agnostic,
}

#[derive(Clone, Copy, ValueEnum)]
enum RobustMode {
    General,
    Stable,
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_class(path: &Path) -> Result<ClassFile> {
    Ok(class_from_json(&read_json(path)?)?)
}

fn read_total(path: &Path) -> Result<Arc<ConceptClass>> {
    match read_class(path)? {
        ClassFile::Total(c) => Ok(Arc::new(c)),
        ClassFile::Partial(_) => bail!("{} holds a partial class; a total class is required", path.display()),
    }
}

fn read_samples(path: &Path, class: &ConceptClass) -> Result<Vec<LabeledSample>> {
    Ok(samples_from_json(&read_json(path)?, |v| sample_from_json(class.domain(), class.labels(), v))?)
}

fn read_real_samples(path: &Path, class: &ConceptClass) -> Result<Vec<RealSample>> {
    Ok(samples_from_json(&read_json(path)?, |v| real_sample_from_json(class.domain(), v))?)
}

fn zero() -> BigRational {
    to_big(&Rational::from_integer(0))
}

fn print(v: &Value) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(v)?) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn bits_string(b: &BitString) -> String {
    b.to_string()
}

fn grouped<L>(out: &CompressionOutput<L>) -> bool {
    out.compressed.bits.as_slice().first().copied().unwrap_or(false)
}

fn substrate_parts<L>(out: &CompressionOutput<L>) -> (usize, usize) {
    (out.audit.substrate_size.unwrap_or(0), out.audit.substrate_kept.unwrap_or(0))
}

fn dim(class: &Path, which: Which, cap: usize) -> Result<Value> {
    let file = read_class(class)?;
    let report = match (which, &file) {
        (Which::Partial, ClassFile::Partial(p)) => partial_vc_dimension(p, cap)?,
        (Which::Partial, ClassFile::Total(_)) => bail!("--which partial needs a partial class"),
        (_, ClassFile::Partial(_)) => bail!("only --which partial applies to a partial class"),
        (Which::Vc, ClassFile::Total(c)) => vc_dimension(c, cap)?,
        (Which::Graph, ClassFile::Total(c)) => graph_dimension(c, cap)?,
        (Which::Pseudo, ClassFile::Total(c)) => pseudo_dimension(c, cap)?,
        (Which::Littlestone, ClassFile::Total(c)) => littlestone_dimension(c)?,
    };
    Ok(serde_json::to_value(report)?)
}

fn compress(class: &Path, scheme: &str, sample: &Path) -> Result<Value> {
    let c = read_total(class)?;
    let s = read_samples(sample, &c)?.into_iter().next().context("no sample given")?;
    let scheme = Registry::default().build(scheme, c.clone())?;
    let out = scheme.compress(&s)?;
    let d = c.domain();
    Ok(json!({
        "kept": out.compressed.pairs.iter().map(|&(x, y)| json!([d.name(x), y])).collect::<Vec<_>>(),
        "bits": bits_string(&out.compressed.bits),
        "size": out.size(),
    }))
}

fn reduce_multiclass(common: &Common, mode: MulticlassMode) -> Result<Value> {
    let c = read_total(&common.class)?;
    let samples = read_samples(&common.samples, &c)?;
    let reg = Registry::default();
    let inflated = || -> Result<BoxedScheme> { Ok(reg.build(&common.substrate, Arc::new(inflate_class(&c)?))?) };
    let general = match mode {
        MulticlassMode::General => Some(reduce_general(inflated()?, c.clone())?),
        _ => None,
    };
    let scheme: BoxedScheme = match mode {
        MulticlassMode::General => Box::new(reduce_general(inflated()?, c.clone())?),
        MulticlassMode::ProperMajority => Box::new(reduce_proper_or_majority(inflated()?, c.clone())?),
        MulticlassMode::Stable => Box::new(reduce_stable(inflated()?, c.clone())?),
        MulticlassMode::Graphdim1 => Box::new(GraphDim1Scheme::new(c.clone())?),
    };
    let rows = samples
        .iter()
        .map(|s| {
            let out = scheme.compress(s)?;
            let p = scheme.reconstruct(&out.compressed)?;
            let (f, kept) = substrate_parts(&out);
            let bound_ok = match mode {
                MulticlassMode::General => out.size() <= general.as_ref().expect("general").bound(f, f - kept, grouped(&out), kept),
                MulticlassMode::ProperMajority | MulticlassMode::Stable => out.size() <= f,
                MulticlassMode::Graphdim1 => out.size() <= 1,
            };
            Ok(json!({"size": out.size(), "consistent": zero_one(s, &p)? == zero(), "bound_ok": bound_ok}))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Value::Array(rows))
}

fn reduce_regression(common: &Common, mode: RegressionMode, eps: &str, p: i64) -> Result<Value> {
    let c = read_total(&common.class)?;
    let samples = read_real_samples(&common.samples, &c)?;
    let eps: Rational = parse_rational(eps)?;
    let name = common.substrate.clone();
    let factory = move |cl: Arc<ConceptClass>| Registry::default().build(&name, cl);
    let loss = match mode {
        RegressionMode::Lp | RegressionMode::Agnostic if p > 0 => Loss::lp(p),
        RegressionMode::Lp => bail!("--p must be positive"),
        _ => Loss::LInf,
    };
    let linf = match mode {
        RegressionMode::Linf => Some(reduce_eps_linf(&factory, c.clone(), eps)?),
        RegressionMode::Lp => Some(reduce_eps_lp(&factory, c.clone(), eps, Rational::from_integer(p))?),
        _ => None,
    };
    let other: Option<Box<dyn CompressionScheme<Rational>>> = match mode {
        RegressionMode::Linf | RegressionMode::Lp => None,
        RegressionMode::Majority => Some(Box::new(reduce_majority_regression(&factory, c.clone(), eps)?)),
        RegressionMode::Stable => Some(Box::new(reduce_stable_regression(&factory, c.clone(), eps)?)),
        RegressionMode::Exact => {
            let inner = common.substrate.clone();
            let mc = move |m: Arc<ConceptClass>| -> scompress::Result<BoxedScheme> {
                let sub = Registry::default().build(&inner, Arc::new(inflate_class(&m)?))?;
                Ok(Box::new(reduce_general(sub, m)?))
            };
            Some(Box::new(exact_via_multiclass(&mc, &c)?))
        }
        RegressionMode::Agnostic => Some(Box::new(agnostic_regression(&factory, c.clone(), eps, loss.clone())?)),
    };
    let scheme: &dyn CompressionScheme<Rational> = match (&linf, &other) {
        (Some(s), _) => s,
        (_, Some(s)) => s.as_ref(),
        _ => unreachable!(),
    };
    let rows = samples
        .iter()
        .map(|s| {
            let out = scheme.compress(s)?;
            let pr = scheme.reconstruct(&out.compressed)?;
            let got = if s.is_empty() { zero() } else { real_loss(&pr, s, &loss)?.upper().clone() };
            let (f, kept) = substrate_parts(&out);
            let target = match mode {
                RegressionMode::Exact => zero(),
                RegressionMode::Agnostic => erm_real(&c, s, &loss)?.1.lower().clone() + to_big(&eps),
                _ => to_big(&eps),
            };
            let size_ok = match mode {
                RegressionMode::Linf | RegressionMode::Lp => out.size() <= linf.as_ref().expect("linf").bound(f, f - kept, grouped(&out), kept),
                RegressionMode::Majority => out.size() <= 3 * f,
                RegressionMode::Stable => out.size() <= f,
                RegressionMode::Exact | RegressionMode::Agnostic => true,
            };
            Ok(json!({"size": out.size(), "loss": fmt_big(&got), "bound_ok": size_ok && got <= target}))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Value::Array(rows))
}

fn reduce_robust_cmd(common: &Common, perturb: &Path, mode: RobustMode) -> Result<Value> {
    let c = read_total(&common.class)?;
    let u = perturbation_from_json(c.domain(), &read_json(perturb)?)?;
    let samples = read_samples(&common.samples, &c)?;
    let sub = || Registry::default().build(&common.substrate, c.clone());
    let general = reduce_robust(sub()?, c.clone(), u.clone())?;
    let scheme: BoxedScheme = match mode {
        RobustMode::General => Box::new(reduce_robust(sub()?, c.clone(), u.clone())?),
        RobustMode::Stable => Box::new(reduce_robust_stable(sub()?, c.clone(), u.clone())?),
    };
    let rows = samples
        .iter()
        .map(|s| {
            let out = scheme.compress(s)?;
            let p = scheme.reconstruct(&out.compressed)?;
            let (f, kept) = substrate_parts(&out);
            let bound_ok = match mode {
                RobustMode::General => out.size() <= general.bound(f, f - kept, grouped(&out), kept),
                RobustMode::Stable => out.size() <= f,
            };
            Ok(json!({"size": out.size(), "consistent": robustly_consistent(&p, s, &u), "bound_ok": bound_ok}))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Value::Array(rows))
}

fn oig(class: &Path, perturb: &Path, sample: &Path, test_point: &str) -> Result<Value> {
    let c = read_total(class)?;
    let u = perturbation_from_json(c.domain(), &read_json(perturb)?)?;
    let s = read_samples(sample, &c)?.into_iter().next().context("no sample given")?;
    let z = c
        .domain()
        .lookup(test_point)
        .or_else(|| test_point.parse().ok().filter(|&i: &usize| i < c.domain().len()))
        .with_context(|| format!("unknown test point {test_point:?}"))?;
    let r = oig_predict(&c, &u, &s, z)?;
    Ok(json!({
        "prediction": r.prediction,
        "vertices": r.vertices,
        "edges": r.edges,
        "acyclic": r.acyclic,
        "maxOutDegree": r.max_out_degree,
    }))
}

fn default_corpus(seed: u64) -> CorpusSpec {
    let entries = vec![
        Generator::Thresholds { n: 10 },
        Generator::Intervals { n: 6 },
        Generator::FullCube { n: 3 },
        Generator::RandomMulticlass { n: 6, m: 3, rows: 15 },
        Generator::KPiecewise { n: 10, m: 3, k: 2 },
        Generator::StepReal { n: 6, q: 4 },
        Generator::RandomReal { n: 5, q: 4, rows: 10 },
        Generator::TreePartial { depth: 3 },
        Generator::TwinFromPartial { spec: Box::new(Generator::TreePartial { depth: 3 }) },
    ];
    CorpusSpec { seed, entries }
}

fn file_stem(name: &str) -> String {
    let mapped: String = name.chars().map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' }).collect();
    mapped.split('_').filter(|p| !p.is_empty()).collect::<Vec<_>>().join("_")
}

fn corpus(spec: Option<&Path>, seed: u64, out_dir: &Path) -> Result<Value> {
    let spec: CorpusSpec = match spec {
        Some(p) => serde_json::from_value(read_json(p)?)?,
        None => default_corpus(seed),
    };
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut index = Vec::new();
    for item in generate_corpus(&spec)? {
        let stem = file_stem(&item.name);
        let class_path = out_dir.join(format!("{stem}.json"));
        let (class_json, perturb) = match &item.class {
            CorpusClass::Total(c) => (class_to_json(c), None),
            CorpusClass::Partial(p) => (partial_to_json(p), None),
            CorpusClass::Twin { class, perturb, .. } => (class_to_json(class), Some(perturbation_to_json(class.domain(), perturb))),
        };
        fs::write(&class_path, serde_json::to_string_pretty(&class_json)?)?;
        let mut entry = json!({"name": item.name, "class": class_path, "verified": item.verified});
        if let Some(p) = perturb {
            let path = out_dir.join(format!("{stem}.perturb.json"));
            fs::write(&path, serde_json::to_string_pretty(&p)?)?;
            entry["perturb"] = json!(path);
        }
        index.push(entry);
    }
    let index = Value::Array(index);
    fs::write(out_dir.join("corpus.json"), serde_json::to_string_pretty(&index)?)?;
    Ok(index)
}

fn suite(name: &str, inject: Option<InjectArg>, seed: u64, out_dir: &Path) -> Result<bool> {
    let inject = match inject {
        None => Inject::None,
        Some(InjectArg::Sabotaged) => Inject::Sabotaged,
        Some(InjectArg::Unstable) => Inject::Unstable,
    };
    let cfg = Config { seed, inject };
    let outcomes = run_suite(name, &cfg)?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    write_reports(out_dir, name, &cfg, &outcomes)?;
    let passed = outcomes.iter().all(|o| o.passed);
    if let Some(o) = outcomes.iter().find(|o| !o.passed) {
        eprintln!("criterion {} failed: {}", o.id, o.first_failure.as_deref().unwrap_or("no rows checked"));
    }
    Ok(passed)
}

fn run(cli: Cli) -> Result<bool> {
    rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global().context("starting worker pool")?;
    let value = match &cli.command {
        Command::Dim { class, which, max_set_size } => dim(class, *which, *max_set_size)?,
        Command::Compress { class, scheme, sample } => compress(class, scheme, sample)?,
        Command::Reduce(Reduce::Multiclass { common, mode }) => reduce_multiclass(common, *mode)?,
        Command::Reduce(Reduce::Regression { common, mode, eps, p }) => reduce_regression(common, *mode, eps, *p)?,
        Command::Reduce(Reduce::Robust { common, perturb, mode }) => reduce_robust_cmd(common, perturb, *mode)?,
        Command::Oig { class, perturb, sample, test_point } => oig(class, perturb, sample, test_point)?,
        Command::Corpus { spec } => corpus(spec.as_deref(), cli.seed, &cli.out_dir)?,
        Command::Suite { name, inject } => return suite(name, *inject, cli.seed, &cli.out_dir),
    };
    print(&value)?;
    let rows_ok = value.as_array().map_or(true, |rows| rows.iter().all(|r| r.get("bound_ok").map_or(true, |b| b == true) && r.get("consistent").map_or(true, |b| b == true)));
    Ok(rows_ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

