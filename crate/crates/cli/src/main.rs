//! `dyncc`: generate, lift, train, sample and evaluate dynamic combinatorial
//! complexes. Every subcommand writes a manifest next to its outputs.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dyncc_core::experiment::{self, ExperimentConfig};
use dyncc_core::generators::{self, BaParams, CommunityDecayParams, DatasetKind, DatasetSpec, RandomBaselineParams};
use dyncc_core::lifting::{lift_series, LiftConfig};
use dyncc_core::metrics;
use dyncc_core::model::CcModel;
use dyncc_core::training::{self, curve_csv, TrainConfig};
use dyncc_core::{gradsuite, io, rng, CcSeries, GraphSeries};
use log::info;
use serde::Serialize;
use std::path::{Path, PathBuf};

const COMMAND_FORMAT: &str = "dyncc-cmd-v1";

#[derive(Parser)]
#[command(name = "dyncc", version, about = "Dynamic combinatorial complex generation and evaluation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// Generate a synthetic dataset split into train/val/test graph series.
    Gen(GenArgs),
    /// Build a graph series from daily edge lists and per-region case counts.
    IngestCovid(IngestArgs),
    /// Clique-lift graph series to combinatorial complex series.
    Lift(LiftArgs),
    /// Train a model from a JSON training configuration.
    Train(TrainArgs),
    /// Sample one-step predictions for every timestep of a series file.
    Sample(SampleArgs),
    /// Constrained random predictions shaped like a target file.
    Baseline(BaselineArgs),
    /// Graph-statistic DTW report between predictions and targets.
    EvalGraph(EvalGraphArgs),
    /// Row-matching losses between predicted and target complexes.
    EvalCc(EvalCcArgs),
    /// Train the four ablation configurations over several seeds.
    Ablation(AblationArgs),
    /// Finite-difference check of every differentiable component.
    Gradcheck(GradcheckArgs),
    /// Full run (generate through evaluate), or a replay of a recorded run.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GenModel {
    Ba,
    CommunityDecay,
    TinyBa,
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: GenModel,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Series per split as train,val,test.
    #[arg(long, default_value = "5,2,3")]
    split: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Community decay: number of timesteps.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    communities: Option<usize>,
    #[arg(long)]
    community_size: Option<usize>,
    #[arg(long)]
    p_int: Option<f64>,
    #[arg(long)]
    p_ext: Option<f64>,
    #[arg(long)]
    f_dec: Option<f64>,
    #[arg(long)]
    decay_community: Option<usize>,
}

#[derive(Args, Serialize)]
struct IngestArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long)]
    cases: PathBuf,
    #[arg(long, default_value_t = 8)]
    window: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct LiftArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 15)]
    max_clique: usize,
    #[arg(long, default_value_t = 3)]
    min_clique: usize,
}

#[derive(Args, Serialize)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory holding train.json and val.json; overrides the paths in
    /// the configuration.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    /// Checkpoint directory (holding model.json) or checkpoint stem.
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct BaselineArgs {
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct EvalGraphArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct EvalCcArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value = "hbce,hc,sbce,sc")]
    losses: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct AblationArgs {
    /// Base training configuration; loss and traversal are overridden per
    /// configuration. Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "0,1,2,3,4")]
    seeds: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct GradcheckArgs {
    #[arg(long, default_value_t = gradsuite::TOLERANCE)]
    tol: f64,
    #[arg(long, default_value_t = gradsuite::STEP)]
    step: f64,
}

#[derive(Args, Serialize)]
struct PipelineArgs {
    #[arg(long, conflicts_with = "replay", required_unless_present = "replay")]
    config: Option<PathBuf>,
    /// Manifest of an earlier run to repeat.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// With --replay: compare the new artifacts against this run directory.
    #[arg(long, requires = "replay")]
    compare: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct CommandManifest<'a> {
    format: &'static str,
    version: &'static str,
    command: &'a Cmd,
    seeds: Vec<(&'static str, u64)>,
    outputs: Vec<String>,
}

/// Where a command's manifest goes: inside an output directory, or next to
/// an output file as `<file>.manifest.json`.
fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.json")
    } else {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }
}

fn write_manifest(cmd: &Cmd, out: &Path, is_dir: bool, seeds: Vec<(&'static str, u64)>, outputs: Vec<String>) -> Result<()> {
    let m = CommandManifest {
        format: COMMAND_FORMAT,
        version: env!("CARGO_PKG_VERSION"),
        command: cmd,
        seeds,
        outputs,
    };
    let path = manifest_path(out, is_dir);
    std::fs::write(&path, serde_json::to_string_pretty(&m)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Complex series from a file of either schema; graph series are lifted
/// with the default clique configuration.
fn read_ccs(path: &Path) -> Result<Vec<CcSeries>> {
    let text = read(path)?;
    let ctx = || format!("parsing {}", path.display());
    if io::schema_of(&text).with_context(ctx)? == io::GRAPH_SCHEMA {
        info!("lifting graph series from {}", path.display());
        let graphs = io::graph_series_from_str(&text).with_context(ctx)?;
        return Ok(graphs.iter().map(|g| lift_series(g, &LiftConfig::default())).collect::<dyncc_core::Result<_>>()?);
    }
    io::cc_series_from_str(&text).with_context(ctx)
}

fn read_graphs(path: &Path) -> Result<Vec<GraphSeries>> {
    let text = read(path)?;
    let ctx = || format!("parsing {}", path.display());
    if io::schema_of(&text).with_context(ctx)? == io::CC_SCHEMA {
        return Ok(io::cc_series_from_str(&text).with_context(ctx)?.iter().map(CcSeries::skeletons).collect());
    }
    io::graph_series_from_str(&text).with_context(ctx)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|_| anyhow::anyhow!("bad {what} entry {x:?} in {s:?}"))).collect()
}

fn load_train_config(path: &Path) -> Result<TrainConfig> {
    io::parse_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn checkpoint_stem(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join("model")
    } else {
        p.with_extension("")
    }
}

fn gen(cmd: &Cmd, a: &GenArgs) -> Result<()> {
    let split: Vec<usize> = parse_list(&a.split, "split")?;
    let [s0, s1, s2] = split[..] else { bail!("--split needs three counts, got {:?}", a.split) };
    let kind = match a.model {
        GenModel::Ba => DatasetKind::Ba,
        GenModel::CommunityDecay => DatasetKind::CommunityDecay,
        GenModel::TinyBa => DatasetKind::TinyBa,
    };
    let mut spec = DatasetSpec::standard(kind, a.count, [s0, s1, s2], a.seed);
    match a.model {
        GenModel::Ba | GenModel::TinyBa => {
            let (n0, m0) = if matches!(a.model, GenModel::Ba) { (50, 4) } else { (6, 1) };
            spec.ba = Some(BaParams {
                n: a.n.unwrap_or(n0),
                m: a.m.unwrap_or(m0),
                seed: 0,
            });
        }
        GenModel::CommunityDecay => {
            let d = CommunityDecayParams::default();
            spec.community = Some(CommunityDecayParams {
                timesteps: a.t.unwrap_or(d.timesteps),
                num_communities: a.communities.unwrap_or(d.num_communities),
                nodes_per_community: a.community_size.unwrap_or(d.nodes_per_community),
                p_int: a.p_int.unwrap_or(d.p_int),
                p_ext: a.p_ext.unwrap_or(d.p_ext),
                f_dec: a.f_dec.unwrap_or(d.f_dec),
                decay_community: a.decay_community.unwrap_or(d.decay_community),
                seed: 0,
            });
        }
    }
    let data = generators::gen_dataset(&spec)?;
    std::fs::create_dir_all(&a.out)?;
    let mut outputs = Vec::new();
    for (name, set) in [("train", &data.train), ("val", &data.val), ("test", &data.test)] {
        let file = format!("{name}.json");
        write(&a.out.join(&file), &io::graph_series_to_string(set)?)?;
        outputs.push(file);
    }
    write(&a.out.join("dataset.json"), &serde_json::to_string_pretty(&spec)?)?;
    outputs.push("dataset.json".into());
    write_manifest(cmd, &a.out, true, vec![("dataset", a.seed)], outputs)
}

fn ingest(cmd: &Cmd, a: &IngestArgs) -> Result<()> {
    let s = io::ingest_covid(&read(&a.edges)?, &read(&a.cases)?, a.window)?;
    write(&a.out, &io::graph_series_to_string(&[s])?)?;
    write_manifest(cmd, &a.out, false, vec![], vec![a.out.display().to_string()])
}

fn lift(cmd: &Cmd, a: &LiftArgs) -> Result<()> {
    let cfg = LiftConfig::new(a.min_clique, a.max_clique)?;
    let text = read(&a.input)?;
    let graphs = io::graph_series_from_str(&text).with_context(|| format!("parsing {}", a.input.display()))?;
    let ccs = graphs.iter().map(|g| lift_series(g, &cfg)).collect::<dyncc_core::Result<Vec<_>>>()?;
    write(&a.out, &io::cc_series_to_string(&ccs)?)?;
    write_manifest(cmd, &a.out, false, vec![], vec![a.out.display().to_string()])
}

fn train(cmd: &Cmd, a: &TrainArgs) -> Result<()> {
    let mut cfg = load_train_config(&a.config)?;
    if let Some(d) = &a.data {
        cfg.train_path = Some(d.join("train.json").display().to_string());
        cfg.val_path = Some(d.join("val.json").display().to_string());
    }
    let (Some(tp), Some(vp)) = (&cfg.train_path, &cfg.val_path) else {
        bail!("no training data: pass --data or set train_path and val_path in the configuration");
    };
    let (tr, va) = (read_ccs(Path::new(tp))?, read_ccs(Path::new(vp))?);
    let outcome = training::train(&cfg, &tr, &va)?;
    info!("best epoch {} with validation loss {:.6}", outcome.best_epoch, outcome.best_val_loss);
    std::fs::create_dir_all(&a.out)?;
    write(&a.out.join("loss_curve.csv"), &curve_csv(&outcome.curve))?;
    outcome.model.save(&a.out.join("model"), cfg.seed, serde_json::to_value(&cfg)?)?;
    write_manifest(cmd, &a.out, true, vec![("train", cfg.seed)], vec!["loss_curve.csv".into(), "model.json".into(), "model.bin".into()])
}

fn sample(cmd: &Cmd, a: &SampleArgs) -> Result<()> {
    let model = CcModel::load(&checkpoint_stem(&a.model)).with_context(|| format!("loading checkpoint {}", a.model.display()))?;
    let input = read_ccs(&a.input)?;
    let pred = input
        .iter()
        .enumerate()
        .map(|(i, s)| model.predict_series(s, rng::child_seed(a.seed, "sample-series", i as u64)))
        .collect::<dyncc_core::Result<Vec<_>>>()?;
    write(&a.out, &io::cc_series_to_string(&pred)?)?;
    write_manifest(cmd, &a.out, false, vec![("sample", a.seed)], vec![a.out.display().to_string()])
}

fn baseline(cmd: &Cmd, a: &BaselineArgs) -> Result<()> {
    let target = read_ccs(&a.target)?;
    let pred = target
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = RandomBaselineParams {
                seed: rng::child_seed(a.seed, "baseline-series", i as u64),
                ..RandomBaselineParams::default()
            };
            generators::random_prediction(t, &p)
        })
        .collect::<dyncc_core::Result<Vec<_>>>()?;
    write(&a.out, &io::cc_series_to_string(&pred)?)?;
    write_manifest(cmd, &a.out, false, vec![("baseline", a.seed)], vec![a.out.display().to_string()])
}

fn eval_graph(cmd: &Cmd, a: &EvalGraphArgs) -> Result<()> {
    let report = experiment::evaluate_graph_series(&read_graphs(&a.pred)?, &read_graphs(&a.target)?)?;
    write(&a.out, &report.to_csv())?;
    write_manifest(cmd, &a.out, false, vec![], vec![a.out.display().to_string()])
}

fn eval_cc(cmd: &Cmd, a: &EvalCcArgs) -> Result<()> {
    let variants = experiment::parse_variants(&parse_list::<String>(&a.losses, "loss")?)?;
    let report = metrics::cc_losses(&read_ccs(&a.pred)?, &read_ccs(&a.target)?, &variants)?;
    write(&a.out, &serde_json::to_string_pretty(&report)?)?;
    write_manifest(cmd, &a.out, false, vec![], vec![a.out.display().to_string()])
}

fn ablation(cmd: &Cmd, a: &AblationArgs) -> Result<()> {
    let base = match &a.config {
        Some(p) => load_train_config(p)?,
        None => TrainConfig::default(),
    };
    let seeds: Vec<u64> = parse_list(&a.seeds, "seed")?;
    let (tr, va) = (read_ccs(&a.data.join("train.json"))?, read_ccs(&a.data.join("val.json"))?);
    let report = training::run_ablation(&base, &tr, &va, &seeds)?;
    std::fs::create_dir_all(&a.out)?;
    let mut outputs = vec!["summary.csv".to_string()];
    write(&a.out.join("summary.csv"), &report.summary_csv())?;
    for (id, seed, curve) in &report.curves {
        let name = format!("{}_seed{seed}.csv", id.name());
        write(&a.out.join(&name), &curve_csv(curve))?;
        outputs.push(name);
    }
    for row in &report.rows {
        println!("{} seed {}: epoch-1 val {:.5}, best {:.5}, improved {}", row.model.name(), row.seed, row.first_val_loss, row.best_val_loss, row.improved);
    }
    write_manifest(cmd, &a.out, true, seeds.iter().map(|&s| ("train", s)).collect(), outputs)
}

fn gradcheck(a: &GradcheckArgs) -> Result<()> {
    let entries = gradsuite::run_suite(a.step, 1e-6)?;
    let mut failed = 0;
    for e in &entries {
        let ok = e.passed(a.tol);
        failed += usize::from(!ok);
        println!("{} {:<32} {:.2e}", if ok { "ok  " } else { "FAIL" }, e.name, e.report.max_rel_error);
    }
    if failed > 0 {
        bail!("{failed} of {} gradient checks exceed {:e}", entries.len(), a.tol);
    }
    println!("all {} gradient checks within {:e}", entries.len(), a.tol);
    Ok(())
}

fn pipeline(a: &PipelineArgs) -> Result<()> {
    let manifest = match (&a.config, &a.replay) {
        (Some(c), _) => {
            let cfg: ExperimentConfig = io::parse_json(&read(c)?).with_context(|| format!("parsing {}", c.display()))?;
            experiment::run_pipeline(&cfg, &a.out)?
        }
        (None, Some(m)) => experiment::replay(m, &a.out)?,
        (None, None) => bail!("pass --config or --replay"),
    };
    println!("{} artifacts in {}", manifest.artifacts.len(), a.out.display());
    if let Some(other) = &a.compare {
        let diff = experiment::diff_runs(other, &a.out, &manifest)?;
        if !diff.is_empty() {
            bail!("replay differs from {} in {diff:?}", other.display());
        }
        println!("replay is byte-identical to {}", other.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cmd = &cli.cmd;
    match cmd {
        Cmd::Gen(a) => gen(cmd, a),
        Cmd::IngestCovid(a) => ingest(cmd, a),
        Cmd::Lift(a) => lift(cmd, a),
        Cmd::Train(a) => train(cmd, a),
        Cmd::Sample(a) => sample(cmd, a),
        Cmd::Baseline(a) => baseline(cmd, a),
        Cmd::EvalGraph(a) => eval_graph(cmd, a),
        Cmd::EvalCc(a) => eval_cc(cmd, a),
        Cmd::Ablation(a) => ablation(cmd, a),
        Cmd::Gradcheck(a) => gradcheck(a),
        Cmd::Pipeline(a) => pipeline(a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(&Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
