//! Sample grid construction, CSV persistence and the train/test splitters.
//!
//! A dataset is the cross product of video classes, compression rungs and
//! loss rates: every cell is degraded through the channel, characterized
//! by the ten features and scored by the full-reference oracle. The
//! normalizer is fitted on the whole grid before vectors are produced and
//! travels with the dataset.

use crate::error::{Error, Result};
use crate::fr_benchmark::QualityOracle;
use crate::frame_io::VideoClip;
use crate::impairment::{
    compress_proxy, degrade_compressed, ChannelStats, CompressionLevel, LossModel,
};
use crate::nr_features::{FeatureConfig, FeatureVector, Normalizer, RawFeatures};
use crate::seed::derive_seed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Exact column order of the dataset CSV.
pub const CSV_HEADER: &str =
    "class_id,level_index,bitrate_kbps,loss_rate,cx,mo,bm,br,nm,nr,bl,je,f_bitrate,f_loss,q";

/// One grid cell: provenance labels, raw features, normalized vector and
/// the oracle quality index. `loss_rate` is the grid's target rate; the
/// vector's loss component reflects the loss the client actually measured.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub class_id: String,
    pub level_index: u8,
    pub bitrate_kbps: f64,
    pub loss_rate: f64,
    pub raw: RawFeatures,
    pub features: FeatureVector,
    pub q: f64,
}

/// An immutable sample collection plus the normalizer and feature config
/// that produced every stored vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    normalizer: Normalizer,
    feature_config: FeatureConfig,
}

impl Dataset {
    pub fn from_parts(
        samples: Vec<Sample>,
        normalizer: Normalizer,
        feature_config: FeatureConfig,
    ) -> Result<Self> {
        let mut keys: Vec<(&str, u8, u64)> = samples
            .iter()
            .map(|s| (s.class_id.as_str(), s.level_index, s.loss_rate.to_bits()))
            .collect();
        keys.sort_unstable();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadSplit(
                "duplicate (class_id, level_index, loss_rate) triple".into(),
            ));
        }
        for s in &samples {
            if !(0.0..=1.0).contains(&s.q) {
                return Err(Error::BadSplit(format!("sample q {} outside [0,1]", s.q)));
            }
        }
        Ok(Dataset {
            samples,
            normalizer,
            feature_config,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn feature_config(&self) -> &FeatureConfig {
        &self.feature_config
    }

    /// Distinct class ids in first-appearance order.
    pub fn class_ids(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.samples {
            if !out.iter().any(|c| c == &s.class_id) {
                out.push(s.class_id.clone());
            }
        }
        out
    }

    /// New dataset holding the given rows (same normalizer and config).
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            normalizer: self.normalizer.clone(),
            feature_config: self.feature_config,
        }
    }

    pub fn feature_matrix(&self) -> Vec<[f64; 10]> {
        self.samples.iter().map(|s| s.features.0).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.q).collect()
    }

    /// FNV-1a fingerprint of the canonical CSV serialization; report
    /// metadata, not a cryptographic hash.
    pub fn fingerprint(&self) -> u64 {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in buf {
            h ^= b as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
        h
    }

    fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# nrvq dataset v1")?;
        for (k, v) in self.feature_config.to_kv() {
            writeln!(out, "# feature_config.{k}={v}")?;
        }
        for (k, v) in self.normalizer.to_kv() {
            writeln!(out, "# normalizer.{k}={v}")?;
        }
        writeln!(out, "{CSV_HEADER}")?;
        for s in &self.samples {
            let r = &s.raw;
            let f = s.features.as_slice();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.class_id,
                s.level_index,
                s.bitrate_kbps,
                s.loss_rate,
                r.cx,
                r.mo,
                r.bm,
                r.br,
                r.nm,
                r.nr,
                r.bl,
                r.je,
                f[8],
                f[9],
                s.q
            )?;
        }
        Ok(())
    }
}

/// Grid construction plan.
pub struct GridPlan<'a> {
    pub classes: &'a [VideoClip],
    /// Pristine oracle references matched to classes by clip id; when
    /// absent the class clip itself is the reference.
    pub references: Option<&'a [VideoClip]>,
    pub levels: &'a [CompressionLevel],
    pub losses: &'a [f64],
    pub seed: u64,
    /// Worker threads for independent (class, level) items; 1 = serial.
    pub jobs: usize,
}

/// Build the full (class x level x loss) grid: degrade, extract raw
/// features and stats, score against the oracle, fit the normalizer on
/// all rows, then produce vectors. Deterministic for a fixed seed.
pub fn build_grid(
    plan: &GridPlan,
    oracle: &dyn QualityOracle,
    cfg: &FeatureConfig,
) -> Result<Dataset> {
    if plan.classes.len() < 2 {
        return Err(Error::Usage("grid needs at least 2 classes".into()));
    }
    {
        let mut ids: Vec<&str> = plan.classes.iter().map(|c| c.clip_id()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Usage("class clip ids must be unique".into()));
        }
        if ids.iter().any(|id| id.contains(',') || id.is_empty()) {
            return Err(Error::Usage("class ids must be non-empty and comma-free".into()));
        }
    }
    let mut lv: Vec<u8> = plan.levels.iter().map(|l| l.level_index).collect();
    lv.sort_unstable();
    if lv.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Usage("level indices must be distinct".into()));
    }
    let mut ls: Vec<u64> = plan.losses.iter().map(|l| l.to_bits()).collect();
    ls.sort_unstable();
    if ls.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Usage("loss rates must be distinct".into()));
    }

    struct CellRow {
        class_idx: usize,
        level_idx: usize,
        loss_idx: usize,
        raw: RawFeatures,
        stats: ChannelStats,
        q: f64,
    }

    // One work item per (class, level): compression and packetization are
    // shared across the loss rates of that item.
    let items: Vec<(usize, usize)> = (0..plan.classes.len())
        .flat_map(|c| (0..plan.levels.len()).map(move |l| (c, l)))
        .collect();
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<CellRow>> = Mutex::new(Vec::with_capacity(items.len() * plan.losses.len()));
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let jobs = plan.jobs.max(1).min(items.len().max(1));

    let reference_of = |ci: usize| -> Result<&VideoClip> {
        let class = &plan.classes[ci];
        match plan.references {
            None => Ok(class),
            Some(refs) => refs
                .iter()
                .find(|r| r.clip_id() == class.clip_id())
                .ok_or_else(|| Error::UnknownClass(format!("no reference for {}", class.clip_id()))),
        }
    };
    // Fail fast on unmatched references.
    for ci in 0..plan.classes.len() {
        reference_of(ci)?;
    }

    let run_item = |&(ci, li): &(usize, usize)| -> Result<Vec<CellRow>> {
        let class = &plan.classes[ci];
        let reference = reference_of(ci)?;
        let level = &plan.levels[li];
        let compressed = compress_proxy(class, level);
        let mut out = Vec::with_capacity(plan.losses.len());
        for (pi, &loss) in plan.losses.iter().enumerate() {
            let cell_seed = derive_seed(plan.seed, &[ci as u64, li as u64, pi as u64]);
            let model = LossModel::bernoulli(loss, cell_seed)?;
            let (received, stats) = degrade_compressed(&compressed, level, &model)?;
            let raw = RawFeatures::compute(&received, cfg);
            let q = oracle.score(reference, &received)?.value();
            out.push(CellRow {
                class_idx: ci,
                level_idx: li,
                loss_idx: pi,
                raw,
                stats,
                q,
            });
        }
        Ok(out)
    };

    if jobs <= 1 {
        let mut all = rows.lock().unwrap();
        for item in &items {
            all.extend(run_item(item)?);
        }
    } else {
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= items.len() || failure.lock().unwrap().is_some() {
                        return;
                    }
                    match run_item(&items[i]) {
                        Ok(mut cell_rows) => rows.lock().unwrap().append(&mut cell_rows),
                        Err(e) => {
                            failure.lock().unwrap().get_or_insert(e);
                            return;
                        }
                    }
                });
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
    }

    let mut rows = rows.into_inner().unwrap();
    rows.sort_by_key(|r| (r.class_idx, r.level_idx, r.loss_idx));

    let fit_rows: Vec<(RawFeatures, ChannelStats)> =
        rows.iter().map(|r| (r.raw, r.stats)).collect();
    let normalizer = Normalizer::fit(&fit_rows)?;

    let samples: Vec<Sample> = rows
        .into_iter()
        .map(|r| Sample {
            class_id: plan.classes[r.class_idx].clip_id().to_string(),
            level_index: plan.levels[r.level_idx].level_index,
            bitrate_kbps: plan.levels[r.level_idx].nominal_bitrate_kbps,
            loss_rate: plan.losses[r.loss_idx],
            raw: r.raw,
            features: normalizer.vector(&r.raw, &r.stats),
            q: r.q,
        })
        .collect();
    Dataset::from_parts(samples, normalizer, *cfg)
}

/// Write the dataset CSV (feature config and normalizer ride along as
/// `#` comments ahead of the header).
pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    ds.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// Read a dataset CSV back. The eight normalized content features are
/// recomputed from the raw columns with the embedded normalizer;
/// `f_bitrate`/`f_loss` come from their columns.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut cfg_kv: Vec<(String, String)> = Vec::new();
    let mut norm_kv: Vec<(String, String)> = Vec::new();
    let mut header_seen = false;
    let mut samples = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("feature_config.") {
                if let Some((k, v)) = rest.split_once('=') {
                    cfg_kv.push((k.to_string(), v.to_string()));
                }
            } else if let Some(rest) = comment.strip_prefix("normalizer.") {
                if let Some((k, v)) = rest.split_once('=') {
                    norm_kv.push((k.to_string(), v.to_string()));
                }
            }
            continue;
        }
        if !header_seen {
            check_header(&line)?;
            header_seen = true;
            continue;
        }
        samples.push(line);
    }
    if !header_seen {
        return Err(Error::Schema("header".into()));
    }
    let feature_config = FeatureConfig::from_kv(&cfg_kv)?;
    let normalizer = Normalizer::from_kv(&norm_kv)?;

    let columns: Vec<&str> = CSV_HEADER.split(',').collect();
    let parsed: Vec<Sample> = samples
        .iter()
        .map(|line| parse_row(line, &columns, &normalizer))
        .collect::<Result<_>>()?;
    Dataset::from_parts(parsed, normalizer, feature_config)
}

fn check_header(line: &str) -> Result<()> {
    if line == CSV_HEADER {
        return Ok(());
    }
    let have: Vec<&str> = line.split(',').collect();
    for want in CSV_HEADER.split(',') {
        if !have.contains(&want) {
            return Err(Error::Schema(want.to_string()));
        }
    }
    Err(Error::Schema("header".into()))
}

fn parse_row(line: &str, columns: &[&str], normalizer: &Normalizer) -> Result<Sample> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != columns.len() {
        return Err(Error::Schema(format!(
            "row has {} fields, expected {}",
            fields.len(),
            columns.len()
        )));
    }
    let f64_at = |i: usize| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .map_err(|_| Error::Schema(columns[i].to_string()))
    };
    let class_id = fields[0].to_string();
    let level_index: u8 = fields[1]
        .parse()
        .map_err(|_| Error::Schema("level_index".to_string()))?;
    let bitrate_kbps = f64_at(2)?;
    let loss_rate = f64_at(3)?;
    let raw = RawFeatures {
        cx: f64_at(4)?,
        mo: f64_at(5)?,
        bm: f64_at(6)?,
        br: f64_at(7)?,
        nm: f64_at(8)?,
        nr: f64_at(9)?,
        bl: f64_at(10)?,
        je: f64_at(11)?,
    };
    let f_bitrate = f64_at(12)?;
    let f_loss = f64_at(13)?;
    let q = f64_at(14)?;
    let mut values = [0.0f64; 10];
    for (i, v) in raw.as_array().iter().enumerate() {
        values[i] = normalizer.apply_component(i, *v);
    }
    values[8] = f_bitrate;
    values[9] = f_loss;
    Ok(Sample {
        class_id,
        level_index,
        bitrate_kbps,
        loss_rate,
        raw,
        features: FeatureVector::new(values)
            .map_err(|_| Error::Schema("f_bitrate/f_loss".to_string()))?,
        q,
    })
}

/// Seeded k-fold plan: shuffle once, chunk contiguously; fold sizes
/// differ by at most one. Returns (train, test) index lists per fold.
pub fn split_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let n = ds.len();
    if k < 2 || k > n {
        return Err(Error::BadSplit(format!("k = {k} with {n} samples")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0usize;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        let test: Vec<usize> = order[start..start + size].to_vec();
        let train: Vec<usize> = order[..start]
            .iter()
            .chain(order[start + size..].iter())
            .copied()
            .collect();
        folds.push((train, test));
        start += size;
    }
    Ok(folds)
}

/// Hold out every sample of one class.
pub fn split_leave_class_out(ds: &Dataset, class_id: &str) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, s) in ds.samples().iter().enumerate() {
        if s.class_id == class_id {
            test.push(i);
        } else {
            train.push(i);
        }
    }
    if test.is_empty() {
        return Err(Error::UnknownClass(class_id.to_string()));
    }
    Ok((train, test))
}

/// Seeded shuffle; the first `floor(fraction * n)` samples train, the
/// rest test.
pub fn subsample_fraction(
    ds: &Dataset,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::BadSplit(format!("fraction {fraction} outside (0,1)")));
    }
    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (fraction * n as f64).floor() as usize;
    Ok((order[..cut].to_vec(), order[cut..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fr_benchmark::SsimOracle;
    use crate::impairment::default_ladder;
    use crate::synth::SynthParams;

    fn tiny_params() -> SynthParams {
        // one packet per frame, so high loss rates produce real freezes
        // and every feature (jerkiness included) varies over the corpus
        SynthParams {
            width: 64,
            height: 16,
            frames: 10,
            fps: (25, 1),
        }
    }

    fn tiny_grid(classes: usize, levels: usize, losses: &[f64], seed: u64) -> Dataset {
        // textured recipes keep every feature non-degenerate on tiny grids
        let clips: Vec<_> = [4usize, 5, 9][..classes]
            .iter()
            .map(|&i| crate::synth::synth_class(i, &tiny_params(), seed).unwrap())
            .collect();
        let ladder = default_ladder();
        let plan = GridPlan {
            classes: &clips,
            references: None,
            levels: &ladder[..levels],
            losses,
            seed,
            jobs: 1,
        };
        build_grid(&plan, &SsimOracle, &FeatureConfig::default()).unwrap()
    }

    #[test]
    fn grid_cardinality_and_q_range() {
        let ds = tiny_grid(2, 2, &[0.0, 0.5], 5);
        assert_eq!(ds.len(), 8);
        assert!(ds.samples().iter().all(|s| (0.0..=1.0).contains(&s.q)));
        assert_eq!(ds.class_ids().len(), 2);
    }

    #[test]
    fn grid_deterministic_and_parallel_equivalent() {
        let clips: Vec<_> = [4usize, 5]
            .iter()
            .map(|&i| crate::synth::synth_class(i, &tiny_params(), 9).unwrap())
            .collect();
        let ladder = default_ladder();
        let mk = |jobs: usize| {
            let plan = GridPlan {
                classes: &clips,
                references: None,
                levels: &ladder[..2],
                losses: &[0.0, 0.5],
                seed: 11,
                jobs,
            };
            build_grid(&plan, &SsimOracle, &FeatureConfig::default()).unwrap()
        };
        let a = mk(1);
        let b = mk(1);
        let c = mk(4);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn csv_round_trip_exact() {
        let ds = tiny_grid(2, 2, &[0.0, 0.5], 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        save_csv(&ds, &path).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(back, ds);
        // byte-identical re-save
        let path2 = dir.path().join("ds2.csv");
        save_csv(&back, &path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn csv_missing_column_names_the_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let header_without_q = CSV_HEADER.rsplit_once(",q").unwrap().0;
        std::fs::write(&path, format!("{header_without_q}\n")).unwrap();
        match load_csv(&path) {
            Err(Error::Schema(col)) => assert_eq!(col, "q"),
            other => panic!("expected Schema(q), got {other:?}"),
        }
    }

    #[test]
    fn csv_hand_written_row_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hand.csv");
        let mut content = String::from("# nrvq dataset v1\n");
        for (k, v) in FeatureConfig::default().to_kv() {
            content.push_str(&format!("# feature_config.{k}={v}\n"));
        }
        let bounds = [
            (0.0, 2.0),
            (0.0, 2.0),
            (0.0, 2.0),
            (0.0, 1.0),
            (0.0, 2.0),
            (0.0, 1.0),
            (0.0, 2.0),
            (0.0, 1.0),
            crate::nr_features::BITRATE_BOUNDS,
            crate::nr_features::LOSS_BOUNDS,
        ];
        let norm = Normalizer::from_bounds(bounds).unwrap();
        for (k, v) in norm.to_kv() {
            content.push_str(&format!("# normalizer.{k}={v}\n"));
        }
        content.push_str(CSV_HEADER);
        content.push('\n');
        content.push_str("clipA,3,1024,0.05,1,0.5,2,0.25,1,0.5,0.4,0.1,0.1899,0.5,0.75\n");
        content.push_str("clipB,3,1024,0.05,1,0.5,2,0.25,1,0.5,0.4,0.1,0.1899,0.5,0.80\n");
        std::fs::write(&path, content).unwrap();
        let ds = load_csv(&path).unwrap();
        assert_eq!(ds.len(), 2);
        let s = &ds.samples()[0];
        assert_eq!(s.class_id, "clipA");
        assert_eq!(s.level_index, 3);
        assert_eq!(s.q, 0.75);
        assert_eq!(s.features.as_slice()[0], 0.5); // cx 1 in (0,2)
        assert_eq!(s.features.as_slice()[9], 0.5);
    }

    #[test]
    fn kfold_partitions_exactly() {
        let ds = tiny_grid(2, 2, &[0.0, 0.2, 0.5], 8);
        let folds = split_kfold(&ds, 5, 77).unwrap();
        assert_eq!(folds.len(), 5);
        let mut seen = vec![false; ds.len()];
        let sizes: Vec<usize> = folds.iter().map(|(_, t)| t.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for (train, test) in &folds {
            assert_eq!(train.len() + test.len(), ds.len());
            for &i in test {
                assert!(!seen[i], "overlapping test folds");
                seen[i] = true;
                assert!(!train.contains(&i));
            }
        }
        assert!(seen.iter().all(|&s| s));
        // leave-one-out corner
        let loo = split_kfold(&ds, ds.len(), 1).unwrap();
        assert!(loo.iter().all(|(_, t)| t.len() == 1));
        assert!(split_kfold(&ds, 1, 1).is_err());
    }

    #[test]
    fn leave_class_out_holds_exactly_one_class() {
        let ds = tiny_grid(2, 2, &[0.0, 0.5], 8);
        let ids = ds.class_ids();
        let (train, test) = split_leave_class_out(&ds, &ids[0]).unwrap();
        assert_eq!(test.len(), 4);
        assert_eq!(train.len(), 4);
        assert!(test.iter().all(|&i| ds.samples()[i].class_id == ids[0]));
        assert!(train.iter().all(|&i| ds.samples()[i].class_id != ids[0]));
        assert!(matches!(
            split_leave_class_out(&ds, "missing"),
            Err(Error::UnknownClass(_))
        ));
    }

    #[test]
    fn subsample_sizes_sum() {
        let ds = tiny_grid(2, 2, &[0.0, 0.2, 0.5], 8);
        for f in [0.8, 0.6, 0.4, 0.2] {
            let (train, test) = subsample_fraction(&ds, f, 5).unwrap();
            assert_eq!(train.len(), (f * ds.len() as f64).floor() as usize);
            assert_eq!(train.len() + test.len(), ds.len());
        }
        assert!(subsample_fraction(&ds, 0.0, 1).is_err());
    }

    #[test]
    fn rebuilding_features_from_raw_is_bit_exact() {
        let ds = tiny_grid(2, 2, &[0.0, 0.5], 13);
        for s in ds.samples() {
            for (i, v) in s.raw.as_array().iter().enumerate() {
                assert_eq!(
                    ds.normalizer().apply_component(i, *v),
                    s.features.as_slice()[i]
                );
            }
        }
    }
}
