//! Evaluation harness: blind leave-class-out, random k-fold
//! cross-validation, training-size sweep and training-time measurement,
//! all scored by Pearson correlation against the oracle quality index.

use crate::dataset::{split_kfold, split_leave_class_out, subsample_fraction, Dataset};
use crate::error::{Error, Result};
use crate::learners::{train, Algo, LearnerSpec, QualityModel};
use crate::nr_features::FEATURE_NAMES;
use crate::par::run_indexed;
use crate::seed::derive_seed;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Sample Pearson correlation coefficient.
///
/// Constant sequences have no defined correlation and are an error, not a
/// NaN.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant sequence".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// One report row: an (algorithm, group) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportCell {
    pub algo: Algo,
    pub group: String,
    /// None marks an undefined correlation (flagged, excluded from means).
    pub pcc: Option<f64>,
    /// Spread over repetitions when the cell aggregates several runs.
    pub pcc_std: Option<f64>,
    pub n: usize,
    pub train_time_s: Option<f64>,
    pub train_time_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportMeta {
    pub seed: u64,
    pub dataset_fingerprint: u64,
    pub split_plan: String,
    /// The exact index sets used, for partition assertions.
    pub splits: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Results of one experiment over a set of learners.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub experiment: String,
    pub cells: Vec<ReportCell>,
    /// One `overall` row per algorithm: unweighted mean and population
    /// std over its defined group cells.
    pub overall: Vec<ReportCell>,
    /// Pooled (q, q_hat) pairs per algorithm for scatter rendering.
    pub predictions: Vec<(Algo, Vec<(f64, f64)>)>,
    /// Sweep fractions in presentation order (empty unless sweeping).
    pub fractions: Vec<f64>,
    pub meta: ReportMeta,
}

fn population_std(values: &[f64], mean: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64).sqrt()
}

fn overall_rows(cells: &[ReportCell], specs: &[LearnerSpec]) -> Vec<ReportCell> {
    specs
        .iter()
        .map(|spec| {
            let mine: Vec<&ReportCell> = cells.iter().filter(|c| c.algo == spec.algo).collect();
            let defined: Vec<f64> = mine.iter().filter_map(|c| c.pcc).collect();
            let mean = (!defined.is_empty())
                .then(|| defined.iter().sum::<f64>() / defined.len() as f64);
            let std = mean.map(|m| population_std(&defined, m));
            let times: Vec<f64> = mine.iter().filter_map(|c| c.train_time_s).collect();
            let t_mean = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
            let t_std = t_mean.map(|m| population_std(&times, m));
            ReportCell {
                algo: spec.algo,
                group: "overall".into(),
                pcc: mean,
                pcc_std: std,
                n: mine.iter().map(|c| c.n).sum(),
                train_time_s: t_mean,
                train_time_std: t_std,
            }
        })
        .collect()
}

/// Train on `train_idx`, predict the `test_idx` block, return the model
/// with the (q, q_hat) pairs.
fn run_split(
    ds: &Dataset,
    spec: &LearnerSpec,
    train_idx: &[usize],
    test_idx: &[usize],
    seed: u64,
) -> Result<(QualityModel, Vec<(f64, f64)>)> {
    let model = train(spec, &ds.subset(train_idx), seed)?;
    let pairs: Vec<(f64, f64)> = test_idx
        .iter()
        .map(|&i| {
            let s = &ds.samples()[i];
            (s.q, model.predict(&s.features))
        })
        .collect();
    Ok((model, pairs))
}

fn pcc_of_pairs(pairs: &[(f64, f64)]) -> Option<f64> {
    let (q, qh): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    pearson(&qh, &q).ok()
}

/// Blind protocol: hold out every sample of each class in turn, train on
/// the remaining classes, correlate predictions over the held-out block.
/// Classes with constant q are reported as undefined and excluded from
/// the overall mean.
pub fn run_blind_eval(
    ds: &Dataset,
    specs: &[LearnerSpec],
    seed: u64,
    jobs: usize,
) -> Result<EvaluationReport> {
    let classes = ds.class_ids();
    if classes.len() < 2 {
        return Err(Error::BadSplit("blind evaluation needs at least 2 classes".into()));
    }
    let splits: Vec<(Vec<usize>, Vec<usize>)> = classes
        .iter()
        .map(|c| split_leave_class_out(ds, c))
        .collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|a| (0..classes.len()).map(move |c| (a, c)))
        .collect();
    let results = run_indexed(tasks.len(), jobs, |t| {
        let (a, c) = tasks[t];
        let (train_idx, test_idx) = &splits[c];
        let cell_seed = derive_seed(seed, &[a as u64, c as u64]);
        run_split(ds, &specs[a], train_idx, test_idx, cell_seed)
    })?;
    let mut cells = Vec::new();
    let mut predictions: Vec<(Algo, Vec<(f64, f64)>)> =
        specs.iter().map(|s| (s.algo, Vec::new())).collect();
    // Wall-clock stays out of blind/cv cells: timing belongs to the
    // `time` experiment and these reports must be byte-stable on rerun.
    for (t, (_model, pairs)) in tasks.iter().zip(results) {
        let (a, c) = *t;
        cells.push(ReportCell {
            algo: specs[a].algo,
            group: classes[c].clone(),
            pcc: pcc_of_pairs(&pairs),
            pcc_std: None,
            n: pairs.len(),
            train_time_s: None,
            train_time_std: None,
        });
        predictions[a].1.extend(pairs);
    }
    let overall = overall_rows(&cells, specs);
    Ok(EvaluationReport {
        experiment: "blind".into(),
        cells,
        overall,
        predictions,
        fractions: Vec::new(),
        meta: ReportMeta {
            seed,
            dataset_fingerprint: ds.fingerprint(),
            split_plan: format!("leave-class-out over {} classes", classes.len()),
            splits,
        },
    })
}

/// Random k-fold cross-validation (shuffled once with the seed).
pub fn run_random_cv(
    ds: &Dataset,
    specs: &[LearnerSpec],
    k: usize,
    seed: u64,
    jobs: usize,
) -> Result<EvaluationReport> {
    let splits = split_kfold(ds, k, seed)?;
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|a| (0..k).map(move |f| (a, f)))
        .collect();
    let results = run_indexed(tasks.len(), jobs, |t| {
        let (a, f) = tasks[t];
        let (train_idx, test_idx) = &splits[f];
        let cell_seed = derive_seed(seed, &[a as u64, f as u64]);
        run_split(ds, &specs[a], train_idx, test_idx, cell_seed)
    })?;
    let mut cells = Vec::new();
    let mut predictions: Vec<(Algo, Vec<(f64, f64)>)> =
        specs.iter().map(|s| (s.algo, Vec::new())).collect();
    for (t, (_model, pairs)) in tasks.iter().zip(results) {
        let (a, f) = *t;
        cells.push(ReportCell {
            algo: specs[a].algo,
            group: format!("fold-{f}"),
            pcc: pcc_of_pairs(&pairs),
            pcc_std: None,
            n: pairs.len(),
            train_time_s: None,
            train_time_std: None,
        });
        predictions[a].1.extend(pairs);
    }
    let overall = overall_rows(&cells, specs);
    Ok(EvaluationReport {
        experiment: "cv".into(),
        cells,
        overall,
        predictions,
        fractions: Vec::new(),
        meta: ReportMeta {
            seed,
            dataset_fingerprint: ds.fingerprint(),
            split_plan: format!("{k}-fold cross-validation"),
            splits,
        },
    })
}

const SWEEP_REPS: usize = 5;

struct SweepRun {
    pccs: Vec<f64>,
    times: Vec<f64>,
    n_test: usize,
}

fn sweep_internal(
    ds: &Dataset,
    specs: &[LearnerSpec],
    fractions: &[f64],
    seed: u64,
    jobs: usize,
) -> Result<(Vec<Vec<SweepRun>>, Vec<(Vec<usize>, Vec<usize>)>)> {
    let mut splits = Vec::new();
    for (fi, &f) in fractions.iter().enumerate() {
        for rep in 0..SWEEP_REPS {
            let split_seed = derive_seed(seed, &[fi as u64, rep as u64]);
            splits.push(subsample_fraction(ds, f, split_seed)?);
        }
    }
    let tasks: Vec<(usize, usize, usize)> = (0..specs.len())
        .flat_map(|a| {
            (0..fractions.len()).flat_map(move |fi| (0..SWEEP_REPS).map(move |r| (a, fi, r)))
        })
        .collect();
    let results = run_indexed(tasks.len(), jobs, |t| {
        let (a, fi, r) = tasks[t];
        let (train_idx, test_idx) = &splits[fi * SWEEP_REPS + r];
        let cell_seed = derive_seed(seed, &[a as u64, fi as u64, r as u64]);
        run_split(ds, &specs[a], train_idx, test_idx, cell_seed)
    })?;
    let mut grid: Vec<Vec<SweepRun>> = (0..specs.len())
        .map(|_| {
            (0..fractions.len())
                .map(|_| SweepRun {
                    pccs: Vec::new(),
                    times: Vec::new(),
                    n_test: 0,
                })
                .collect()
        })
        .collect();
    for (t, (model, pairs)) in tasks.iter().zip(results) {
        let (a, fi, _) = *t;
        let run = &mut grid[a][fi];
        if let Some(p) = pcc_of_pairs(&pairs) {
            run.pccs.push(p);
        }
        run.times.push(model.train_time_seconds);
        run.n_test = pairs.len();
    }
    Ok((grid, splits))
}

fn sweep_cells(
    grid: &[Vec<SweepRun>],
    specs: &[LearnerSpec],
    fractions: &[f64],
    keep_times: bool,
) -> Vec<ReportCell> {
    let mut cells = Vec::new();
    for (a, spec) in specs.iter().enumerate() {
        for (fi, &f) in fractions.iter().enumerate() {
            let run = &grid[a][fi];
            let mean = (!run.pccs.is_empty())
                .then(|| run.pccs.iter().sum::<f64>() / run.pccs.len() as f64);
            let std = mean.map(|m| population_std(&run.pccs, m));
            let t_mean = run.times.iter().sum::<f64>() / run.times.len() as f64;
            let t_std = population_std(&run.times, t_mean);
            cells.push(ReportCell {
                algo: spec.algo,
                group: format!("{f}"),
                pcc: mean,
                pcc_std: std,
                n: run.n_test,
                train_time_s: keep_times.then_some(t_mean),
                train_time_std: keep_times.then_some(t_std),
            });
        }
    }
    cells
}

/// Training-size sweep: for each fraction, five seeded splits are trained
/// and tested; cells carry mean and population std of the Pearson score.
/// Timing columns stay empty so reruns are byte-identical.
pub fn run_size_sweep(
    ds: &Dataset,
    specs: &[LearnerSpec],
    fractions: &[f64],
    seed: u64,
    jobs: usize,
) -> Result<EvaluationReport> {
    let (grid, splits) = sweep_internal(ds, specs, fractions, seed, jobs)?;
    let cells = sweep_cells(&grid, specs, fractions, false);
    let overall = overall_rows(&cells, specs);
    Ok(EvaluationReport {
        experiment: "sweep".into(),
        cells,
        overall,
        predictions: Vec::new(),
        fractions: fractions.to_vec(),
        meta: ReportMeta {
            seed,
            dataset_fingerprint: ds.fingerprint(),
            split_plan: format!("fractions {fractions:?} x {SWEEP_REPS} repetitions"),
            splits,
        },
    })
}

/// Wall-clock training time per (algorithm, fraction) cell: mean and
/// population std over five seeded splits, measured around the train
/// call only.
pub fn time_training(
    ds: &Dataset,
    specs: &[LearnerSpec],
    fractions: &[f64],
    seed: u64,
    jobs: usize,
) -> Result<EvaluationReport> {
    let (grid, splits) = sweep_internal(ds, specs, fractions, seed, jobs)?;
    let cells = sweep_cells(&grid, specs, fractions, true);
    let overall = overall_rows(&cells, specs);
    Ok(EvaluationReport {
        experiment: "time".into(),
        cells,
        overall,
        predictions: Vec::new(),
        fractions: fractions.to_vec(),
        meta: ReportMeta {
            seed,
            dataset_fingerprint: ds.fingerprint(),
            split_plan: format!("fractions {fractions:?} x {SWEEP_REPS} repetitions, timing"),
            splits,
        },
    })
}

/// Best single raw content feature against q under k-fold evaluation:
/// per-fold Pearson on the held-out block, averaged, absolute value,
/// maximized over the eight features. Returns (feature name, |pcc|).
pub fn single_feature_cv_best(ds: &Dataset, k: usize, seed: u64) -> Result<(String, f64)> {
    let splits = split_kfold(ds, k, seed)?;
    best_feature_over_blocks(
        ds,
        &splits.iter().map(|(_, test)| test.clone()).collect::<Vec<_>>(),
    )
}

/// Best single raw content feature in the blind protocol: per-class
/// Pearson, averaged over classes, absolute value, maximized over
/// features.
pub fn single_feature_blind_best(ds: &Dataset) -> Result<(String, f64)> {
    let blocks: Vec<Vec<usize>> = ds
        .class_ids()
        .iter()
        .map(|c| split_leave_class_out(ds, c).map(|(_, test)| test))
        .collect::<Result<_>>()?;
    best_feature_over_blocks(ds, &blocks)
}

fn best_feature_over_blocks(ds: &Dataset, blocks: &[Vec<usize>]) -> Result<(String, f64)> {
    let mut best: Option<(String, f64)> = None;
    for fi in 0..8 {
        let mut per_block = Vec::new();
        for block in blocks {
            let xs: Vec<f64> = block
                .iter()
                .map(|&i| ds.samples()[i].raw.as_array()[fi])
                .collect();
            let qs: Vec<f64> = block.iter().map(|&i| ds.samples()[i].q).collect();
            if let Ok(r) = pearson(&xs, &qs) {
                per_block.push(r);
            }
        }
        if per_block.is_empty() {
            continue;
        }
        let mean = per_block.iter().sum::<f64>() / per_block.len() as f64;
        let score = mean.abs();
        if best.as_ref().map_or(true, |(_, b)| score > *b) {
            best = Some((FEATURE_NAMES[fi].to_string(), score));
        }
    }
    best.ok_or_else(|| Error::UndefinedCorrelation("no feature has a defined correlation".into()))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Render a report. `csv` emits one row per (algo, group) plus one
/// overall row per algo; `markdown` renders the same numbers in a table;
/// `svg` draws per-algo scatters (when predictions exist) and metric
/// lines over the sweep fractions. Returns the files written.
pub fn render_report(
    report: &EvaluationReport,
    format: &str,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    match format {
        "csv" => {
            let path = out_dir.join("report.csv");
            std::fs::write(&path, render_csv(report))?;
            Ok(vec![path])
        }
        "markdown" => {
            let path = out_dir.join("report.md");
            std::fs::write(&path, render_markdown(report))?;
            Ok(vec![path])
        }
        "svg" => {
            let mut written = Vec::new();
            for (algo, pairs) in &report.predictions {
                if pairs.is_empty() {
                    continue;
                }
                let path = out_dir.join(format!("scatter_{}.svg", algo.name()));
                std::fs::write(&path, render_scatter(algo.name(), pairs))?;
                written.push(path);
            }
            if !report.fractions.is_empty() {
                let timing = report.experiment == "time";
                let path = out_dir.join(if timing {
                    "time_vs_fraction.svg"
                } else {
                    "pcc_vs_fraction.svg"
                });
                std::fs::write(&path, render_lines(report, timing))?;
                written.push(path);
            }
            Ok(written)
        }
        other => Err(Error::Usage(format!(
            "unknown report format `{other}` (csv, markdown, svg)"
        ))),
    }
}

pub fn render_csv(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nrvq report v1");
    let _ = writeln!(out, "# experiment={}", report.experiment);
    let _ = writeln!(out, "# split_plan={}", report.meta.split_plan);
    let _ = writeln!(
        out,
        "# dataset_fingerprint={:016x}",
        report.meta.dataset_fingerprint
    );
    let _ = writeln!(out, "# std=population");
    let _ = writeln!(out, "experiment,algo,group,pcc,n,train_time_s,seed");
    for cell in report.cells.iter().chain(&report.overall) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            report.experiment,
            cell.algo.name(),
            cell.group,
            fmt_opt(cell.pcc),
            cell.n,
            fmt_opt(cell.train_time_s),
            report.meta.seed
        );
    }
    out
}

pub fn render_markdown(report: &EvaluationReport) -> String {
    let algos: Vec<Algo> = report.overall.iter().map(|c| c.algo).collect();
    let groups: Vec<&str> = {
        let mut seen = Vec::new();
        for c in &report.cells {
            if !seen.contains(&c.group.as_str()) {
                seen.push(c.group.as_str());
            }
        }
        seen
    };
    let cell_for = |algo: Algo, group: &str| -> Option<&ReportCell> {
        report
            .cells
            .iter()
            .find(|c| c.algo == algo && c.group == group)
    };
    let mut out = String::new();
    let _ = writeln!(out, "# {} report", report.experiment);
    let _ = writeln!(out);
    let _ = writeln!(out, "- split plan: {}", report.meta.split_plan);
    let _ = writeln!(out, "- seed: {}", report.meta.seed);
    let _ = writeln!(
        out,
        "- dataset fingerprint: {:016x}",
        report.meta.dataset_fingerprint
    );
    let _ = writeln!(out, "- std: population");
    let _ = writeln!(out);
    let _ = write!(out, "| group |");
    for a in &algos {
        let _ = write!(out, " {} |", a.name());
    }
    let _ = writeln!(out);
    let _ = write!(out, "|---|");
    for _ in &algos {
        let _ = write!(out, "---|");
    }
    let _ = writeln!(out);
    for g in &groups {
        let _ = write!(out, "| {g} |");
        for a in &algos {
            let text = match cell_for(*a, g) {
                Some(c) => match (c.pcc, c.pcc_std) {
                    (Some(_), Some(_)) => {
                        format!("{} ± {}", fmt_opt(c.pcc), fmt_opt(c.pcc_std))
                    }
                    (Some(_), None) => fmt_opt(c.pcc),
                    _ => "undefined".to_string(),
                },
                None => String::new(),
            };
            let _ = write!(out, " {text} |");
        }
        let _ = writeln!(out);
    }
    let _ = write!(out, "| overall |");
    for row in &report.overall {
        let text = match row.pcc {
            Some(_) => format!("{} ± {}", fmt_opt(row.pcc), fmt_opt(row.pcc_std)),
            None => "undefined".to_string(),
        };
        let _ = write!(out, " {text} |");
    }
    let _ = writeln!(out);
    if report.experiment == "time" {
        let _ = writeln!(out);
        let _ = writeln!(out, "## training time (seconds)");
        let _ = writeln!(out);
        let _ = write!(out, "| group |");
        for a in &algos {
            let _ = write!(out, " {} |", a.name());
        }
        let _ = writeln!(out);
        let _ = write!(out, "|---|");
        for _ in &algos {
            let _ = write!(out, "---|");
        }
        let _ = writeln!(out);
        for g in &groups {
            let _ = write!(out, "| {g} |");
            for a in &algos {
                let text = cell_for(*a, g)
                    .map(|c| format!("{} ± {}", fmt_opt(c.train_time_s), fmt_opt(c.train_time_std)))
                    .unwrap_or_default();
                let _ = write!(out, " {text} |");
            }
            let _ = writeln!(out);
        }
    }
    out
}

const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22",
];

fn render_scatter(name: &str, pairs: &[(f64, f64)]) -> String {
    let size = 520.0;
    let margin = 50.0;
    let span = size - 2.0 * margin;
    let map = |v: f64| margin + v.clamp(0.0, 1.0) * span;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(out, "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"15\">{name}: predicted vs benchmark quality</text>",
        margin
    );
    // axes and the y = x reference
    let (lo, hi) = (map(0.0), map(1.0));
    let _ = writeln!(
        out,
        "<line x1=\"{lo}\" y1=\"{hi2}\" x2=\"{hi}\" y2=\"{hi2}\" stroke=\"black\"/>",
        hi2 = size - margin
    );
    let _ = writeln!(
        out,
        "<line x1=\"{lo}\" y1=\"{lo2}\" x2=\"{lo}\" y2=\"{hi2}\" stroke=\"black\"/>",
        lo2 = margin,
        hi2 = size - margin
    );
    let _ = writeln!(
        out,
        "<line x1=\"{lo}\" y1=\"{}\" x2=\"{hi}\" y2=\"{}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>",
        size - map(0.0),
        size - map(1.0)
    );
    for (q, qh) in pairs {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.5\"/>",
            map(*q),
            size - map(*qh)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">benchmark q</text>",
        size / 2.0 - 40.0,
        size - 12.0
    );
    let _ = writeln!(
        out,
        "<text x=\"14\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 14 {})\">predicted q</text>",
        size / 2.0 + 40.0,
        size / 2.0 + 40.0
    );
    let _ = writeln!(out, "</svg>");
    out
}

fn render_lines(report: &EvaluationReport, timing: bool) -> String {
    let (w, h) = (720.0, 460.0);
    let margin = 60.0;
    let fractions = &report.fractions;
    let values: Vec<(Algo, Vec<Option<f64>>)> = report
        .overall
        .iter()
        .map(|row| {
            let series = fractions
                .iter()
                .map(|f| {
                    report
                        .cells
                        .iter()
                        .find(|c| c.algo == row.algo && c.group == format!("{f}"))
                        .and_then(|c| if timing { c.train_time_s } else { c.pcc })
                })
                .collect();
            (row.algo, series)
        })
        .collect();
    let flat: Vec<f64> = values
        .iter()
        .flat_map(|(_, s)| s.iter().filter_map(|v| *v))
        .collect();
    let (vmin, vmax) = flat
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let pad = ((vmax - vmin) * 0.1).max(1e-9);
    let (vmin, vmax) = (vmin - pad, vmax + pad);
    let fx = |f: f64| margin + (f - 0.0) / 1.0 * (w - 2.0 * margin);
    let fy = |v: f64| h - margin - (v - vmin) / (vmax - vmin) * (h - 2.0 * margin);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(out, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let title = if timing {
        "training time vs training fraction"
    } else {
        "pearson correlation vs training fraction"
    };
    let _ = writeln!(
        out,
        "<text x=\"{margin}\" y=\"24\" font-family=\"monospace\" font-size=\"15\">{title}</text>"
    );
    let _ = writeln!(
        out,
        "<line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        h - margin,
        w - margin,
        h - margin
    );
    let _ = writeln!(
        out,
        "<line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"black\"/>",
        h - margin
    );
    for (i, (algo, series)) in values.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = series
            .iter()
            .zip(fractions)
            .filter_map(|(v, f)| v.map(|v| format!("{:.2},{:.2}", fx(*f), fy(v))))
            .collect();
        if points.len() >= 2 {
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
                points.join(" ")
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{}</text>",
            w - margin + 6.0,
            margin + 16.0 * i as f64,
            algo.name()
        );
    }
    for f in fractions {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">{f}</text>",
            fx(*f) - 8.0,
            h - margin + 18.0
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}
