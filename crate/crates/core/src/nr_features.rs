//! No-reference content features and the normalized 10-feature input
//! vector.
//!
//! Eight content features are computed from the received clip alone:
//! spatial complexity (cx), motion (mo), blur mean/ratio (bm, br), noise
//! mean/ratio (nm, nr), blockiness (bl) and jerkiness (je). Two network
//! features (bitrate, loss ratio) come from [`ChannelStats`]. All ten are
//! averaged across the clip and normalized to [0, 1]; content feature
//! bounds are fitted on a training corpus, network bounds are the fixed
//! physical grid ranges.

use crate::error::{Error, Result};
use crate::frame_io::{LumaFrame, VideoClip};
use crate::impairment::ChannelStats;
use serde::{Deserialize, Serialize};

/// Fixed normalization bounds for the nominal bitrate (kbps).
pub const BITRATE_BOUNDS: (f64, f64) = (64.0, 5120.0);
/// Fixed normalization bounds for the packet loss ratio.
pub const LOSS_BOUNDS: (f64, f64) = (0.0, 0.10);

/// Input order of the ten components. Fixed and versioned with the model.
pub const FEATURE_NAMES: [&str; 10] = [
    "cx", "mo", "bm", "br", "nm", "nr", "bl", "je", "f_bitrate", "f_loss",
];

/// Thresholds of the feature extractors. Persisted with every model and
/// dataset so stored vectors stay reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub version: u32,
    /// Edge widths above this many pixels count as blurred (br).
    pub blur_width_threshold: f64,
    /// Mean absolute frame difference below this is a frozen pair (je).
    pub freeze_mad_threshold: f64,
    /// Residuals beyond this many estimated sigmas count as noise pixels (nr).
    pub noise_outlier_sigma: f64,
    /// Stabilizer added to the interior contrast before the ratio (bl).
    pub blockiness_epsilon: f64,
    /// Weight of the freeze ratio in je; the jump term gets the rest.
    pub jerkiness_freeze_weight: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            version: 1,
            blur_width_threshold: 5.0,
            freeze_mad_threshold: 0.05,
            noise_outlier_sigma: 3.0,
            blockiness_epsilon: 1e-6,
            jerkiness_freeze_weight: 0.5,
        }
    }
}

impl FeatureConfig {
    pub fn to_kv(&self) -> Vec<(String, String)> {
        vec![
            ("version".into(), self.version.to_string()),
            (
                "blur_width_threshold".into(),
                self.blur_width_threshold.to_string(),
            ),
            (
                "freeze_mad_threshold".into(),
                self.freeze_mad_threshold.to_string(),
            ),
            (
                "noise_outlier_sigma".into(),
                self.noise_outlier_sigma.to_string(),
            ),
            (
                "blockiness_epsilon".into(),
                self.blockiness_epsilon.to_string(),
            ),
            (
                "jerkiness_freeze_weight".into(),
                self.jerkiness_freeze_weight.to_string(),
            ),
        ]
    }

    pub fn from_kv(kv: &[(String, String)]) -> Result<Self> {
        let mut cfg = FeatureConfig::default();
        for (k, v) in kv {
            let parse = || {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("feature config {k}={v}")))
            };
            match k.as_str() {
                "version" => {
                    cfg.version = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("feature config version {v}")))?
                }
                "blur_width_threshold" => cfg.blur_width_threshold = parse()?,
                "freeze_mad_threshold" => cfg.freeze_mad_threshold = parse()?,
                "noise_outlier_sigma" => cfg.noise_outlier_sigma = parse()?,
                "blockiness_epsilon" => cfg.blockiness_epsilon = parse()?,
                "jerkiness_freeze_weight" => cfg.jerkiness_freeze_weight = parse()?,
                other => return Err(Error::Parse(format!("unknown feature config key `{other}`"))),
            }
        }
        Ok(cfg)
    }
}

/// Clip-level raw (unnormalized) content features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawFeatures {
    pub cx: f64,
    pub mo: f64,
    pub bm: f64,
    pub br: f64,
    pub nm: f64,
    pub nr: f64,
    pub bl: f64,
    pub je: f64,
}

impl RawFeatures {
    /// Run all six extractors.
    pub fn compute(clip: &VideoClip, cfg: &FeatureConfig) -> RawFeatures {
        let (bm, br) = blur(clip, cfg);
        let (nm, nr) = noise(clip, cfg);
        RawFeatures {
            cx: spatial_complexity(clip),
            mo: motion(clip),
            bm,
            br,
            nm,
            nr,
            bl: blockiness(clip, cfg),
            je: jerkiness(clip, cfg),
        }
    }

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.cx, self.mo, self.bm, self.br, self.nm, self.nr, self.bl, self.je,
        ]
    }
}

/// The ten normalized inputs, ordered per [`FEATURE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; 10]);

impl FeatureVector {
    pub fn new(values: [f64; 10]) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidClip(format!(
                    "feature {} = {v} outside [0,1]",
                    FEATURE_NAMES[i]
                )));
            }
        }
        Ok(FeatureVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-feature min/max bounds; applies `(v - min) / (max - min)` with
/// clamping for out-of-corpus values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    bounds: [(f64, f64); 10],
}

impl Normalizer {
    /// Fit content-feature bounds on a corpus; network bounds are fixed.
    pub fn fit(rows: &[(RawFeatures, ChannelStats)]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::BadSplit(format!(
                "normalizer needs at least 2 samples, got {}",
                rows.len()
            )));
        }
        let mut bounds = [(f64::INFINITY, f64::NEG_INFINITY); 10];
        for (raw, _) in rows {
            for (i, v) in raw.as_array().iter().enumerate() {
                bounds[i].0 = bounds[i].0.min(*v);
                bounds[i].1 = bounds[i].1.max(*v);
            }
        }
        for i in 0..8 {
            if !(bounds[i].1 > bounds[i].0) {
                return Err(Error::DegenerateFeature(FEATURE_NAMES[i].to_string()));
            }
        }
        bounds[8] = BITRATE_BOUNDS;
        bounds[9] = LOSS_BOUNDS;
        Ok(Normalizer { bounds })
    }

    pub fn from_bounds(bounds: [(f64, f64); 10]) -> Result<Self> {
        for (i, (lo, hi)) in bounds.iter().enumerate() {
            if !(hi > lo) {
                return Err(Error::DegenerateFeature(FEATURE_NAMES[i].to_string()));
            }
        }
        Ok(Normalizer { bounds })
    }

    pub fn bounds(&self) -> &[(f64, f64); 10] {
        &self.bounds
    }

    #[inline]
    pub fn apply_component(&self, index: usize, value: f64) -> f64 {
        let (lo, hi) = self.bounds[index];
        ((value - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// Assemble the normalized 10-vector from raw content features and
    /// channel stats.
    pub fn vector(&self, raw: &RawFeatures, stats: &ChannelStats) -> FeatureVector {
        let mut out = [0.0; 10];
        for (i, v) in raw.as_array().iter().enumerate() {
            out[i] = self.apply_component(i, *v);
        }
        out[8] = self.apply_component(8, stats.nominal_bitrate_kbps);
        out[9] = self.apply_component(9, stats.measured_loss_ratio);
        FeatureVector(out)
    }

    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv = Vec::new();
        for (i, (lo, hi)) in self.bounds.iter().enumerate() {
            kv.push((format!("{}.min", FEATURE_NAMES[i]), lo.to_string()));
            kv.push((format!("{}.max", FEATURE_NAMES[i]), hi.to_string()));
        }
        kv
    }

    pub fn from_kv(kv: &[(String, String)]) -> Result<Self> {
        let mut bounds = [(f64::NAN, f64::NAN); 10];
        for (k, v) in kv {
            let (name, side) = k
                .rsplit_once('.')
                .ok_or_else(|| Error::Parse(format!("normalizer key `{k}`")))?;
            let idx = FEATURE_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Parse(format!("unknown normalizer feature `{name}`")))?;
            let val: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("normalizer value {k}={v}")))?;
            match side {
                "min" => bounds[idx].0 = val,
                "max" => bounds[idx].1 = val,
                _ => return Err(Error::Parse(format!("normalizer key `{k}`"))),
            }
        }
        if bounds.iter().any(|(lo, hi)| lo.is_nan() || hi.is_nan()) {
            return Err(Error::Parse("normalizer block incomplete".into()));
        }
        Normalizer::from_bounds(bounds)
    }
}

/// Extract the full normalized vector for one received clip.
pub fn extract_features(
    clip: &VideoClip,
    stats: &ChannelStats,
    norm: &Normalizer,
    cfg: &FeatureConfig,
) -> FeatureVector {
    norm.vector(&RawFeatures::compute(clip, cfg), stats)
}

/// Spatial complexity: mean over frames of the population standard
/// deviation of the 3x3 Sobel gradient magnitude (SI).
pub fn spatial_complexity(clip: &VideoClip) -> f64 {
    let (w, h) = (clip.width(), clip.height());
    let n = ((w - 2) * (h - 2)) as f64;
    let mut total = 0.0;
    for frame in clip.frames() {
        let s = frame.samples();
        let mut sum_sq: u64 = 0;
        let mut sum_mag = 0.0f64;
        for y in 1..h - 1 {
            let up = &s[(y - 1) * w..y * w];
            let mid = &s[y * w..(y + 1) * w];
            let dn = &s[(y + 1) * w..(y + 2) * w];
            for ((u, m), d) in up.windows(3).zip(mid.windows(3)).zip(dn.windows(3)) {
                let gx = (u[2] as i32 + 2 * m[2] as i32 + d[2] as i32)
                    - (u[0] as i32 + 2 * m[0] as i32 + d[0] as i32);
                let gy = (d[0] as i32 + 2 * d[1] as i32 + d[2] as i32)
                    - (u[0] as i32 + 2 * u[1] as i32 + u[2] as i32);
                let sq = (gx * gx + gy * gy) as u64;
                sum_sq += sq;
                sum_mag += (sq as f64).sqrt();
            }
        }
        let mean = sum_mag / n;
        let var = (sum_sq as f64 / n - mean * mean).max(0.0);
        total += var.sqrt();
    }
    total / clip.frame_count() as f64
}

/// Per-pair population statistics of the signed frame difference.
fn pair_stats(a: &LumaFrame, b: &LumaFrame) -> (f64, f64) {
    let n = a.samples().len() as f64;
    let mut sum: i64 = 0;
    let mut sum_sq: u64 = 0;
    let mut sum_abs: u64 = 0;
    for (&x, &y) in a.samples().iter().zip(b.samples()) {
        let d = y as i64 - x as i64;
        sum += d;
        sum_sq += (d * d) as u64;
        sum_abs += d.unsigned_abs();
    }
    let mean = sum as f64 / n;
    let var = (sum_sq as f64 / n - mean * mean).max(0.0);
    (var.sqrt(), sum_abs as f64 / n) // (TI, mean abs diff)
}

/// Motion: mean over consecutive pairs of the population standard
/// deviation of the pixel-wise frame difference (TI).
pub fn motion(clip: &VideoClip) -> f64 {
    let frames = clip.frames();
    let mut total = 0.0;
    for pair in frames.windows(2) {
        total += pair_stats(&pair[0], &pair[1]).0;
    }
    total / (frames.len() - 1) as f64
}

/// Marziliano-style edge widths: (mean width, fraction wider than the
/// configured threshold). Frames without edge pixels contribute nothing;
/// an edge-free clip scores (0, 0).
pub fn blur(clip: &VideoClip, cfg: &FeatureConfig) -> (f64, f64) {
    let (w, h) = (clip.width(), clip.height());
    let mut total_width = 0u64;
    let mut wide = 0u64;
    let mut edges = 0u64;
    let mut grad = vec![0i16; w * h];
    let mut runs = MonotoneRuns::new(w);
    for frame in clip.frames() {
        let s = frame.samples();
        for y in 1..h - 1 {
            let up = &s[(y - 1) * w..y * w];
            let mid = &s[y * w..(y + 1) * w];
            let dn = &s[(y + 1) * w..(y + 2) * w];
            let grow = &mut grad[y * w + 1..y * w + w - 1];
            for (((u, m), d), g) in up
                .windows(3)
                .zip(mid.windows(3))
                .zip(dn.windows(3))
                .zip(grow.iter_mut())
            {
                let gx = (u[2] as i32 + 2 * m[2] as i32 + d[2] as i32)
                    - (u[0] as i32 + 2 * m[0] as i32 + d[0] as i32);
                *g = gx as i16;
            }
        }
        let mut hist = [0u32; 1021];
        for y in 1..h - 1 {
            for &g in &grad[y * w + 1..y * w + w - 1] {
                hist[g.unsigned_abs() as usize] += 1;
            }
        }
        let thr = otsu_threshold(&hist) as i32;
        for y in 1..h - 1 {
            let row = &s[y * w..(y + 1) * w];
            let mut row_prepared = false;
            for x in 1..w - 1 {
                let gx = grad[y * w + x] as i32;
                if gx.abs() > thr {
                    if !row_prepared {
                        runs.prepare(row);
                        row_prepared = true;
                    }
                    let width = runs.width(x, gx > 0);
                    total_width += width as u64;
                    if width as f64 > cfg.blur_width_threshold {
                        wide += 1;
                    }
                    edges += 1;
                }
            }
        }
    }
    if edges == 0 {
        return (0.0, 0.0);
    }
    (total_width as f64 / edges as f64, wide as f64 / edges as f64)
}

/// Per-row maximal strictly monotone run extents: the edge width at x is
/// the length of the maximal strictly increasing (or decreasing) run
/// containing x, matching the extrema walk of `edge_width`.
struct MonotoneRuns {
    start_incr: Vec<u32>,
    end_incr: Vec<u32>,
    start_decr: Vec<u32>,
    end_decr: Vec<u32>,
}

impl MonotoneRuns {
    fn new(w: usize) -> Self {
        MonotoneRuns {
            start_incr: vec![0; w],
            end_incr: vec![0; w],
            start_decr: vec![0; w],
            end_decr: vec![0; w],
        }
    }

    fn prepare(&mut self, row: &[u8]) {
        let w = row.len();
        self.start_incr[0] = 0;
        self.start_decr[0] = 0;
        for x in 1..w {
            self.start_incr[x] = if row[x - 1] < row[x] {
                self.start_incr[x - 1]
            } else {
                x as u32
            };
            self.start_decr[x] = if row[x - 1] > row[x] {
                self.start_decr[x - 1]
            } else {
                x as u32
            };
        }
        self.end_incr[w - 1] = (w - 1) as u32;
        self.end_decr[w - 1] = (w - 1) as u32;
        for x in (0..w - 1).rev() {
            self.end_incr[x] = if row[x + 1] > row[x] {
                self.end_incr[x + 1]
            } else {
                x as u32
            };
            self.end_decr[x] = if row[x + 1] < row[x] {
                self.end_decr[x + 1]
            } else {
                x as u32
            };
        }
    }

    #[inline]
    fn width(&self, x: usize, rising: bool) -> usize {
        if rising {
            (self.end_incr[x] - self.start_incr[x]) as usize
        } else {
            (self.end_decr[x] - self.start_decr[x]) as usize
        }
    }
}

/// Distance between the local luminance extrema along the row around an
/// edge pixel. Reference form of the measurement; the extractor uses the
/// equivalent precomputed run extents.
#[cfg(test)]
fn edge_width(row: &[u8], x: usize, rising: bool) -> usize {
    let mut left = x;
    let mut right = x;
    if rising {
        while left > 0 && row[left - 1] < row[left] {
            left -= 1;
        }
        while right + 1 < row.len() && row[right + 1] > row[right] {
            right += 1;
        }
    } else {
        while left > 0 && row[left - 1] > row[left] {
            left -= 1;
        }
        while right + 1 < row.len() && row[right + 1] < row[right] {
            right += 1;
        }
    }
    right - left
}

/// Otsu's threshold over a gradient-magnitude histogram; returns 0 when
/// the histogram is degenerate (then `value > threshold` selects nothing
/// for all-zero gradients).
fn otsu_threshold(hist: &[u32; 1021]) -> u32 {
    let total: u64 = hist.iter().map(|&c| c as u64).sum();
    if total == 0 {
        return 0;
    }
    let weighted_total: u64 = hist
        .iter()
        .enumerate()
        .map(|(v, &c)| v as u64 * c as u64)
        .sum();
    let mut best_t = 0u32;
    let mut best_score = f64::NEG_INFINITY;
    let mut w0: u64 = 0;
    let mut sum0: u64 = 0;
    for t in 0..hist.len() - 1 {
        w0 += hist[t] as u64;
        sum0 += t as u64 * hist[t] as u64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let mu0 = sum0 as f64 / w0 as f64;
        let mu1 = (weighted_total - sum0) as f64 / w1 as f64;
        let score = w0 as f64 * w1 as f64 * (mu0 - mu1) * (mu0 - mu1);
        if score > best_score {
            best_score = score;
            best_t = t as u32;
        }
    }
    best_t
}

/// Immerkaer fast noise estimate: (mean sigma-hat, mean fraction of
/// outlier pixels beyond the configured sigma multiple).
pub fn noise(clip: &VideoClip, cfg: &FeatureConfig) -> (f64, f64) {
    let (w, h) = (clip.width(), clip.height());
    let n_interior = ((w - 2) * (h - 2)) as f64;
    let scale = (std::f64::consts::PI / 2.0).sqrt() / (6.0 * n_interior);
    let mut residual = vec![0i16; w * h];
    let mut nm_total = 0.0;
    let mut nr_total = 0.0;
    for frame in clip.frames() {
        let s = frame.samples();
        let mut abs_sum: u64 = 0;
        for y in 1..h - 1 {
            let up = &s[(y - 1) * w..y * w];
            let mid = &s[y * w..(y + 1) * w];
            let dn = &s[(y + 1) * w..(y + 2) * w];
            let rrow = &mut residual[y * w + 1..y * w + w - 1];
            let mut row_abs: u32 = 0; // 318 px * 4080 max stays far below u32
            for (((u, m), d), r) in up
                .windows(3)
                .zip(mid.windows(3))
                .zip(dn.windows(3))
                .zip(rrow.iter_mut())
            {
                let v = u[0] as i32 - 2 * u[1] as i32 + u[2] as i32 - 2 * m[0] as i32
                    + 4 * m[1] as i32
                    - 2 * m[2] as i32
                    + d[0] as i32
                    - 2 * d[1] as i32
                    + d[2] as i32;
                *r = v as i16;
                row_abs += v.unsigned_abs();
            }
            abs_sum += row_abs as u64;
        }
        let sigma = scale * abs_sum as f64;
        nm_total += sigma;
        let cutoff = cfg.noise_outlier_sigma * sigma;
        let mut outliers = 0u64;
        for y in 1..h - 1 {
            for &r in &residual[y * w + 1..y * w + w - 1] {
                if (r.abs() as f64) > cutoff {
                    outliers += 1;
                }
            }
        }
        nr_total += outliers as f64 / n_interior;
    }
    let f = clip.frame_count() as f64;
    (nm_total / f, nr_total / f)
}

/// Blockiness: mean absolute luma step across 8-grid block boundaries
/// over the interior step, minus one, floored at zero.
pub fn blockiness(clip: &VideoClip, cfg: &FeatureConfig) -> f64 {
    let (w, h) = (clip.width(), clip.height());
    let mut total = 0.0;
    for frame in clip.frames() {
        let s = frame.samples();
        let mut bsum: u64 = 0;
        let mut bcnt: u64 = 0;
        let mut isum: u64 = 0;
        let mut icnt: u64 = 0;
        for y in 0..h {
            let row = &s[y * w..(y + 1) * w];
            for x in 0..w - 1 {
                let d = (row[x] as i32 - row[x + 1] as i32).unsigned_abs() as u64;
                if (x + 1) % 8 == 0 {
                    bsum += d;
                    bcnt += 1;
                } else {
                    isum += d;
                    icnt += 1;
                }
            }
        }
        for y in 0..h - 1 {
            let row = &s[y * w..(y + 1) * w];
            let next = &s[(y + 1) * w..(y + 2) * w];
            let boundary = (y + 1) % 8 == 0;
            let mut acc: u64 = 0;
            for x in 0..w {
                acc += (row[x] as i32 - next[x] as i32).unsigned_abs() as u64;
            }
            if boundary {
                bsum += acc;
                bcnt += w as u64;
            } else {
                isum += acc;
                icnt += w as u64;
            }
        }
        let boundary_mean = if bcnt == 0 { 0.0 } else { bsum as f64 / bcnt as f64 };
        let interior_mean = if icnt == 0 { 0.0 } else { isum as f64 / icnt as f64 };
        let ratio = boundary_mean / (interior_mean + cfg.blockiness_epsilon);
        total += (ratio - 1.0).max(0.0);
    }
    total / clip.frame_count() as f64
}

/// Jerkiness: freeze-ratio and post-freeze motion-jump blend in [0, 1].
pub fn jerkiness(clip: &VideoClip, cfg: &FeatureConfig) -> f64 {
    let frames = clip.frames();
    let pairs = frames.len() - 1;
    let mut ti = Vec::with_capacity(pairs);
    let mut frozen = Vec::with_capacity(pairs);
    for pair in frames.windows(2) {
        let (t, mad) = pair_stats(&pair[0], &pair[1]);
        ti.push(t);
        frozen.push(mad < cfg.freeze_mad_threshold);
    }
    let freeze_count = frozen.iter().filter(|&&f| f).count();
    if freeze_count == 0 {
        return 0.0;
    }
    let freeze_ratio = freeze_count as f64 / pairs as f64;
    let mean_ti = ti.iter().sum::<f64>() / pairs as f64;
    // Jump magnitude for every maximal frozen run followed by a
    // non-frozen pair: that pair's TI over the clip-mean TI, capped at 1.
    let mut jumps = Vec::new();
    for i in 0..pairs {
        if frozen[i] && i + 1 < pairs && !frozen[i + 1] && mean_ti > 0.0 {
            jumps.push((ti[i + 1] / mean_ti).min(1.0));
        }
    }
    let jump_mean = if jumps.is_empty() {
        0.0
    } else {
        jumps.iter().sum::<f64>() / jumps.len() as f64
    };
    let wf = cfg.jerkiness_freeze_weight;
    wf * freeze_ratio + (1.0 - wf) * jump_mean
}
