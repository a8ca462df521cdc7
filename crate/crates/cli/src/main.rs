//! Batch front-end for the video-quality prediction pipeline.
//!
//! Sub-commands: `synth` (procedural clip classes), `extract` (build the
//! grid dataset), `train`, `predict`, `eval {blind|cv|sweep|time}`.
//! Every command is deterministic under `--seed` and writes only below
//! its `--out` target. Exit codes: 0 ok, 1 usage, 2 data, 3 training.
//!
//! A flat `key=value` config file can preload any long flag via
//! `--config`; explicit flags win.

use clap::{Args, Parser, Subcommand};
use nrvq_core::dataset::{build_grid, load_csv, save_csv, GridPlan};
use nrvq_core::error::Error;
use nrvq_core::eval::{
    render_report, run_blind_eval, run_random_cv, run_size_sweep, time_training,
};
use nrvq_core::fr_benchmark::oracle_by_name;
use nrvq_core::frame_io::{read_y4m, write_y4m, VideoClip};
use nrvq_core::impairment::{default_ladder, ChannelStats};
use nrvq_core::learners::{train, Algo, LearnerSpec, QualityModel};
use nrvq_core::nr_features::{extract_features, FeatureConfig};
use nrvq_core::synth::{synth_classes, SynthParams, CLASS_NAMES};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// The twelve packet-loss rungs of the shipped grid.
const GRID_LOSSES: [f64; 12] = [
    0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05, 0.10,
];

#[derive(Parser)]
#[command(
    name = "nrvq",
    about = "No-reference video quality prediction toolkit",
    version
)]
struct Cli {
    /// Flat key=value file preloading any long flag; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the procedural clip classes as Y4M files.
    Synth(SynthArgs),
    /// Build the (class x compression x loss) dataset CSV from clips.
    Extract(ExtractArgs),
    /// Train one regressor on a dataset and persist the model.
    Train(TrainArgs),
    /// Predict the quality index of one received clip.
    Predict(PredictArgs),
    /// Run an evaluation experiment and render reports.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for the class clips.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of classes to generate (at most 10).
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Directory of class clips to push through the channel.
    #[arg(long)]
    clips: Option<PathBuf>,
    /// Directory of pristine references (defaults to --clips), matched
    /// by file stem.
    #[arg(long)]
    refs: Option<PathBuf>,
    /// Dataset CSV to write.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Full-reference oracle (only `ssim` ships).
    #[arg(long)]
    oracle: Option<String>,
    /// Worker threads over grid cells.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// lr, rt, ert-lsb, ert-br, edt-ab, gpr, svr, fnn or cnn.
    #[arg(long)]
    algo: Option<String>,
    /// Model file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Hyperparameter overrides as key=value, repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Received clip (Y4M).
    #[arg(long)]
    clip: Option<PathBuf>,
    /// Measured packet-loss ratio in [0,1].
    #[arg(long)]
    loss: Option<f64>,
    /// Nominal bitrate in kbps.
    #[arg(long)]
    bitrate: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Experiment: blind, cv, sweep or time.
    experiment: String,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Comma-separated algorithms (default: all nine).
    #[arg(long)]
    algos: Option<String>,
    /// Report directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Folds for cv.
    #[arg(long)]
    k: Option<usize>,
    /// Training fractions for sweep/time, comma-separated.
    #[arg(long)]
    fractions: Option<String>,
    /// Report formats, comma-separated (csv,markdown,svg).
    #[arg(long)]
    formats: Option<String>,
    /// Concurrent training jobs (default 1 for reproducible timing).
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are success paths, anything else is a usage error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Dimension { .. } => 1,
        Error::Training { .. } => 3,
        _ => 2,
    }
}

/// Flat key=value config: missing flags fall back to it before defaults.
struct Defaults {
    map: BTreeMap<String, String>,
}

impl Defaults {
    fn load(path: &Option<PathBuf>) -> Result<Defaults, Error> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            for (lineno, line) in std::fs::read_to_string(path)?.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::Usage(format!("config line {} lacks `=`: {line}", lineno + 1))
                })?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Defaults { map })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, Error> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Usage(format!("config {key}={v} is not valid"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str, flag: Option<T>) -> Result<T, Error> {
        self.get(key, flag)?
            .ok_or_else(|| Error::Usage(format!("missing required --{key}")))
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let cfg = Defaults::load(&cli.config)?;
    match cli.command {
        Command::Synth(a) => cmd_synth(a, &cfg),
        Command::Extract(a) => cmd_extract(a, &cfg),
        Command::Train(a) => cmd_train(a, &cfg),
        Command::Predict(a) => cmd_predict(a, &cfg),
        Command::Eval(a) => cmd_eval(a, &cfg),
    }
}

fn cmd_synth(a: SynthArgs, cfg: &Defaults) -> Result<(), Error> {
    let out: PathBuf = cfg.require("out", a.out)?;
    let classes = cfg.get("classes", a.classes)?.unwrap_or(CLASS_NAMES.len());
    if classes < 2 || classes > CLASS_NAMES.len() {
        return Err(Error::Usage(format!(
            "--classes must be 2..={}, got {classes}",
            CLASS_NAMES.len()
        )));
    }
    let seed = cfg.get("seed", a.seed)?.unwrap_or(0);
    let params = SynthParams {
        width: cfg.get("width", a.width)?.unwrap_or(320),
        height: cfg.get("height", a.height)?.unwrap_or(240),
        frames: cfg.get("frames", a.frames)?.unwrap_or(250),
        fps: (25, 1),
    };
    std::fs::create_dir_all(&out)?;
    for clip in synth_classes(classes, &params, seed)? {
        let path = out.join(format!("{}.y4m", clip.clip_id()));
        write_y4m(&clip, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn load_clip_dir(dir: &Path) -> Result<Vec<VideoClip>, Error> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |x| x == "y4m"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Usage(format!("no .y4m clips under {}", dir.display())));
    }
    paths.iter().map(read_y4m).collect()
}

fn cmd_extract(a: ExtractArgs, cfg: &Defaults) -> Result<(), Error> {
    let clips_dir: PathBuf = cfg.require("clips", a.clips)?;
    let out: PathBuf = cfg.require("out", a.out)?;
    let seed = cfg.get("seed", a.seed)?.unwrap_or(0);
    let jobs = cfg.get("jobs", a.jobs)?.unwrap_or(1);
    let oracle_name = cfg
        .get("oracle", a.oracle)?
        .unwrap_or_else(|| "ssim".to_string());
    let oracle = oracle_by_name(&oracle_name)?;
    let classes = load_clip_dir(&clips_dir)?;
    let refs_dir = cfg.get("refs", a.refs)?;
    let references = match &refs_dir {
        Some(dir) if dir != &clips_dir => Some(load_clip_dir(dir)?),
        _ => None,
    };
    let ladder = default_ladder();
    let plan = GridPlan {
        classes: &classes,
        references: references.as_deref(),
        levels: &ladder,
        losses: &GRID_LOSSES,
        seed,
        jobs,
    };
    let dataset = build_grid(&plan, oracle.as_ref(), &FeatureConfig::default())?;
    save_csv(&dataset, &out)?;
    println!("wrote {} ({} samples)", out.display(), dataset.len());
    Ok(())
}

fn cmd_train(a: TrainArgs, cfg: &Defaults) -> Result<(), Error> {
    let dataset_path: PathBuf = cfg.require("dataset", a.dataset)?;
    let algo_name: String = cfg.require("algo", a.algo)?;
    let out: PathBuf = cfg.require("out", a.out)?;
    let seed = cfg.get("seed", a.seed)?.unwrap_or(0);
    let overrides: Vec<(String, String)> = a
        .params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Usage(format!("--param needs key=value, got `{p}`")))
        })
        .collect::<Result<_, _>>()?;
    let spec = LearnerSpec::new(Algo::parse(&algo_name)?).with_overrides(&overrides)?;
    let dataset = load_csv(&dataset_path)?;
    let model = train(&spec, &dataset, seed)?;
    model.save(&out)?;
    println!(
        "trained {} on {} samples in {:.3}s -> {}",
        spec.algo.name(),
        dataset.len(),
        model.train_time_seconds,
        out.display()
    );
    Ok(())
}

fn cmd_predict(a: PredictArgs, cfg: &Defaults) -> Result<(), Error> {
    let model_path: PathBuf = cfg.require("model", a.model)?;
    let clip_path: PathBuf = cfg.require("clip", a.clip)?;
    let loss: f64 = cfg.require("loss", a.loss)?;
    let bitrate: f64 = cfg.require("bitrate", a.bitrate)?;
    if !(bitrate > 0.0) {
        return Err(Error::Usage(format!("--bitrate must be positive, got {bitrate}")));
    }
    let model = QualityModel::load(&model_path)?;
    let clip = read_y4m(&clip_path)?;
    let stats = ChannelStats::from_measured(loss, bitrate)?;
    let vector = extract_features(&clip, &stats, &model.normalizer, &model.feature_config);
    println!("{:.6}", model.predict(&vector));
    Ok(())
}

fn cmd_eval(a: EvalArgs, cfg: &Defaults) -> Result<(), Error> {
    let dataset_path: PathBuf = cfg.require("dataset", a.dataset)?;
    let out: PathBuf = cfg.require("out", a.out)?;
    let seed = cfg.get("seed", a.seed)?.unwrap_or(0);
    let jobs = cfg.get("jobs", a.jobs)?.unwrap_or(1);
    let k = cfg.get("k", a.k)?.unwrap_or(5);
    let algos_arg = cfg
        .get("algos", a.algos)?
        .unwrap_or_else(|| "all".to_string());
    let specs: Vec<LearnerSpec> = if algos_arg == "all" {
        Algo::ALL.iter().map(|&al| LearnerSpec::new(al)).collect()
    } else {
        algos_arg
            .split(',')
            .map(|name| Algo::parse(name.trim()).map(LearnerSpec::new))
            .collect::<Result<_, _>>()?
    };
    let fractions: Vec<f64> = cfg
        .get("fractions", a.fractions)?
        .unwrap_or_else(|| "0.8,0.6,0.4,0.2".to_string())
        .split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("bad fraction `{f}`")))
        })
        .collect::<Result<_, _>>()?;
    let formats: Vec<String> = cfg
        .get("formats", a.formats)?
        .unwrap_or_else(|| "csv,markdown,svg".to_string())
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();

    if !matches!(a.experiment.as_str(), "blind" | "cv" | "sweep" | "time") {
        return Err(Error::Usage(format!(
            "unknown experiment `{}` (blind, cv, sweep, time)",
            a.experiment
        )));
    }
    for format in &formats {
        if !matches!(format.as_str(), "csv" | "markdown" | "svg") {
            return Err(Error::Usage(format!(
                "unknown report format `{format}` (csv, markdown, svg)"
            )));
        }
    }
    let dataset = load_csv(&dataset_path)?;
    let report = match a.experiment.as_str() {
        "blind" => run_blind_eval(&dataset, &specs, seed, jobs)?,
        "cv" => run_random_cv(&dataset, &specs, k, seed, jobs)?,
        "sweep" => run_size_sweep(&dataset, &specs, &fractions, seed, jobs)?,
        "time" => time_training(&dataset, &specs, &fractions, seed, jobs)?,
        _ => unreachable!(),
    };
    for format in &formats {
        for path in render_report(&report, format, &out)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
