//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. The full-scale dataset (10 classes x 8 compressions x 12 loss
//! rates at 320x240, 250 frames) is built once, single-threaded, and
//! shared; expect the whole suite to take tens of minutes.
//!
//! Run just this suite with:
//!   cargo test -p nrvq-cli --test acceptance -- --nocapture

use nrvq_core::dataset::{build_grid, Dataset, GridPlan};
use nrvq_core::eval::{
    run_blind_eval, run_random_cv, run_size_sweep, single_feature_blind_best,
    single_feature_cv_best, time_training,
};
use nrvq_core::fr_benchmark::SsimOracle;
use nrvq_core::impairment::default_ladder;
use nrvq_core::learners::{train, Algo, LearnerSpec};
use nrvq_core::nr_features::{FeatureConfig, FeatureVector};
use nrvq_core::synth::{synth_classes, SynthParams};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const GRID_SEED: u64 = 42;
const GRID_LOSSES: [f64; 12] = [
    0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04, 0.045, 0.05, 0.10,
];

struct SharedGrid {
    dataset: Dataset,
    build_time: Duration,
}

fn grid() -> &'static SharedGrid {
    static GRID: OnceLock<SharedGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let started = Instant::now();
        let params = SynthParams {
            width: 320,
            height: 240,
            frames: 250,
            fps: (25, 1),
        };
        let classes = synth_classes(10, &params, GRID_SEED).expect("synth classes");
        let ladder = default_ladder();
        let plan = GridPlan {
            classes: &classes,
            references: None,
            levels: &ladder,
            losses: &GRID_LOSSES,
            seed: GRID_SEED,
            jobs: 1, // the 15-minute budget is a single-threaded contract
        };
        let dataset =
            build_grid(&plan, &SsimOracle, &FeatureConfig::default()).expect("build grid");
        SharedGrid {
            dataset,
            build_time: started.elapsed(),
        }
    })
}

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!(
        "{} criterion {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion}: {detail}");
}

fn ert_lsb() -> LearnerSpec {
    LearnerSpec::new(Algo::ErtLsb)
}

#[test]
fn criterion_1_grid_reproduction() {
    let shared = grid();
    let n = shared.dataset.len();
    let classes = shared.dataset.class_ids().len();
    let secs = shared.build_time.as_secs_f64();
    let pass = n == 960 && classes == 10 && secs < 900.0;
    verdict(
        "1 (grid reproduction)",
        pass,
        &format!("960-cell grid: {n} samples, {classes} classes, built single-threaded in {secs:.1}s (< 900s)"),
    );
}

/// Shared 5-fold CV of ERT-LSB (criteria 2 and 3 read it).
fn cv_result() -> &'static (f64, f64, Duration) {
    static CV: OnceLock<(f64, f64, Duration)> = OnceLock::new();
    CV.get_or_init(|| {
        let shared = grid();
        let started = Instant::now();
        let report = run_random_cv(&shared.dataset, &[ert_lsb()], 5, GRID_SEED, 1).expect("cv");
        let elapsed = started.elapsed();
        let overall = &report.overall[0];
        (overall.pcc.unwrap(), overall.pcc_std.unwrap(), elapsed)
    })
}

#[test]
fn criterion_2_random_cv_accuracy() {
    let (mean, std, elapsed) = *cv_result();
    let pass = mean >= 0.90 && std <= 0.05 && elapsed.as_secs_f64() < 1800.0;
    verdict(
        "2 (5-fold CV)",
        pass,
        &format!(
            "ERT-LSB 5-fold PCC {mean:.4} (>= 0.90), fold std {std:.4} (<= 0.05), ran {:.0}s (< 1800s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_3_hybrid_beats_single_feature() {
    let (mean, _, _) = *cv_result();
    let (name, best_single) =
        single_feature_cv_best(&grid().dataset, 5, GRID_SEED).expect("baseline");
    let pass = mean >= best_single + 0.10;
    verdict(
        "3 (hybrid beats single feature)",
        pass,
        &format!("ERT-LSB CV PCC {mean:.4} vs best single feature {name} |PCC| {best_single:.4} (margin >= 0.10)"),
    );
}

#[test]
fn criterion_4_blind_leave_class_out() {
    let shared = grid();
    let specs: Vec<LearnerSpec> = Algo::ALL.iter().map(|&a| LearnerSpec::new(a)).collect();
    let report = run_blind_eval(&shared.dataset, &specs, GRID_SEED, 1).expect("blind");
    let (feat_name, feat_score) = single_feature_blind_best(&shared.dataset).expect("baseline");
    let mut detail = format!("single-feature blind baseline {feat_name} |PCC| {feat_score:.4}; ");
    let mut pass = true;
    let mut ert_overall = f64::NAN;
    for row in &report.overall {
        let mean = row.pcc.unwrap_or(f64::NAN);
        if row.algo == Algo::ErtLsb {
            ert_overall = mean;
        }
        if !(mean > feat_score) {
            pass = false;
        }
        detail.push_str(&format!("{}={mean:.4} ", row.algo.name()));
    }
    if !(ert_overall >= 0.70) {
        pass = false;
    }
    detail.push_str(&format!("; ERT-LSB {ert_overall:.4} (>= 0.70), all > baseline"));
    verdict("4 (blind leave-class-out)", pass, &detail);
}

#[test]
fn criterion_5_training_size_sweep() {
    let shared = grid();
    let fractions = [0.8, 0.6, 0.4, 0.2];
    let report =
        run_size_sweep(&shared.dataset, &[ert_lsb()], &fractions, GRID_SEED, 1).expect("sweep");
    let means: Vec<f64> = fractions
        .iter()
        .map(|f| {
            report
                .cells
                .iter()
                .find(|c| c.group == format!("{f}"))
                .and_then(|c| c.pcc)
                .expect("sweep cell")
        })
        .collect();
    // Non-increasing along shrinking fractions, allowing 0.02 of noise
    // per step; the accumulated drop stays within 0.10.
    let steps_ok = means.windows(2).all(|w| w[1] <= w[0] + 0.02);
    let total_drop = means[0] - means[3];
    let pass = steps_ok && total_drop <= 0.10;
    verdict(
        "5 (training-size sweep)",
        pass,
        &format!(
            "ERT-LSB PCC by fraction 0.8..0.2 = {:?}, total drop {total_drop:.4} (<= 0.10), steps within slack",
            means.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_6_training_time_ordering_and_predict_latency() {
    let shared = grid();
    let timed: Vec<LearnerSpec> = [Algo::Lr, Algo::Rt, Algo::ErtLsb, Algo::ErtBr]
        .iter()
        .map(|&a| LearnerSpec::new(a))
        .collect();
    let report =
        time_training(&shared.dataset, &timed, &[0.8], GRID_SEED, 1).expect("timing");
    let mean_time = |algo: Algo| -> f64 {
        report
            .cells
            .iter()
            .find(|c| c.algo == algo)
            .and_then(|c| c.train_time_s)
            .expect("timing cell")
    };
    let (t_lr, t_rt, t_lsb, t_br) = (
        mean_time(Algo::Lr),
        mean_time(Algo::Rt),
        mean_time(Algo::ErtLsb),
        mean_time(Algo::ErtBr),
    );
    let mut pass = t_lr < t_rt && t_rt < t_br && t_lr <= t_lsb / 100.0;
    let mut detail = format!(
        "train(s): lr={t_lr:.6} < rt={t_rt:.6} < ert-br={t_br:.3}; lr <= ert-lsb/100 ({:.1}x); ",
        t_lsb / t_lr
    );

    // predict latency: every algorithm at its shipped size, 1000 vectors
    let (train_idx, _) =
        nrvq_core::dataset::subsample_fraction(&shared.dataset, 0.8, GRID_SEED).expect("split");
    let train_ds = shared.dataset.subset(&train_idx);
    let vectors: Vec<FeatureVector> = shared
        .dataset
        .samples()
        .iter()
        .map(|s| s.features)
        .take(1000)
        .collect();
    for algo in Algo::ALL {
        let model = train(&LearnerSpec::new(algo), &train_ds, GRID_SEED).expect(algo.name());
        let started = Instant::now();
        let mut acc = 0.0;
        for v in &vectors {
            acc += model.predict(v);
        }
        let per_vec = started.elapsed().as_secs_f64() / vectors.len() as f64;
        assert!(acc.is_finite());
        detail.push_str(&format!("{}={:.1}us ", algo.name(), per_vec * 1e6));
        if per_vec > 1e-3 {
            pass = false;
        }
    }
    detail.push_str("(all <= 1ms/vector)");
    verdict("6 (timing)", pass, &detail);
}

/// End-to-end client path: an ERT-LSB model trained on the grid scores a
/// pristine reference clip near the top of the scale through the real
/// binary (`predict` prints six decimals).
#[test]
fn cli_predict_reference_clip_scores_high() {
    let shared = grid();
    let dir = tempfile::tempdir().unwrap();
    let model = train(&ert_lsb(), &shared.dataset, GRID_SEED).expect("train ert-lsb");
    let model_path = dir.path().join("ert-lsb.model.json");
    model.save(&model_path).unwrap();
    let params = SynthParams {
        width: 320,
        height: 240,
        frames: 250,
        fps: (25, 1),
    };
    let clip = synth_classes(5, &params, GRID_SEED).unwrap().remove(4); // "tex"
    let clip_path = dir.path().join("tex.y4m");
    nrvq_core::frame_io::write_y4m(&clip, &clip_path).unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_nrvq"))
        .args([
            "predict",
            "--model",
            model_path.to_str().unwrap(),
            "--clip",
            clip_path.to_str().unwrap(),
            "--loss",
            "0",
            "--bitrate",
            "5120",
        ])
        .output()
        .expect("spawn nrvq predict");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let q: f64 = stdout.trim().parse().expect("numeric output");
    let pass = q >= 0.9;
    verdict(
        "cli-predict (reference clip)",
        pass,
        &format!("ERT-LSB grid model scores the pristine reference at {q:.6} (>= 0.9)"),
    );
}
