//! Full-reference benchmark oracle: PSNR, SSIM and the pluggable quality
//! index used as training ground truth.
//!
//! The shipped oracle is mean SSIM over frames, clamped to [0, 1]. The
//! [`QualityOracle`] trait keeps the oracle replaceable without touching
//! the rest of the pipeline.

use crate::error::{Error, Result};
use crate::frame_io::{LumaFrame, VideoClip};

/// A quality score in [0, 1], higher is better.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QualityIndex(f64);

impl QualityIndex {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidClip(format!("quality index {q} outside [0,1]")));
        }
        Ok(QualityIndex(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// PSNR cap returned for identical frames (MSE = 0).
pub const PSNR_CAP_DB: f64 = 100.0;

const SSIM_WINDOW: usize = 8;
const SSIM_C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const SSIM_C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

fn check_geometry(a: &LumaFrame, b: &LumaFrame) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::GeometryMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB, capped at [`PSNR_CAP_DB`] for
/// identical frames.
pub fn psnr(reference: &LumaFrame, distorted: &LumaFrame) -> Result<f64> {
    check_geometry(reference, distorted)?;
    let mut sq_err: u64 = 0;
    for (&r, &d) in reference.samples().iter().zip(distorted.samples()) {
        let diff = r as i64 - d as i64;
        sq_err += (diff * diff) as u64;
    }
    if sq_err == 0 {
        return Ok(PSNR_CAP_DB);
    }
    let mse = sq_err as f64 / reference.samples().len() as f64;
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Mean SSIM between two frames: 8x8 uniform sliding window, stride 1,
/// population statistics per window.
pub fn ssim_frame(reference: &LumaFrame, distorted: &LumaFrame) -> Result<f64> {
    check_geometry(reference, distorted)?;
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::GeometryMismatch(format!(
            "frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW} for SSIM"
        )));
    }
    let x = reference.samples();
    let y = distorted.samples();
    let inv_n = 1.0 / (SSIM_WINDOW * SSIM_WINDOW) as f64;

    // Rolling 8-row column moments, slid horizontally per window row.
    // All sums are exact integers, so per-window SSIM values do not
    // depend on traversal order; compensated summation keeps the mean
    // stable to ~1 ulp regardless of window count.
    let mut cols = vec![ColMoments::default(); w];
    let row_at = |r: usize| (&x[r * w..(r + 1) * w], &y[r * w..(r + 1) * w]);
    for r in 0..SSIM_WINDOW {
        let (rx, ry) = row_at(r);
        for (c, col) in cols.iter_mut().enumerate() {
            col.add(rx[c] as u32, ry[c] as u32);
        }
    }
    let mut sum = KahanSum::default();
    let mut windows = 0usize;
    for y0 in 0..=(h - SSIM_WINDOW) {
        let mut m = WindowMoments::default();
        for col in &cols[..SSIM_WINDOW] {
            m.add(col);
        }
        let mut x0 = 0usize;
        loop {
            let mu_x = m.sx as f64 * inv_n;
            let mu_y = m.sy as f64 * inv_n;
            let var_x = m.sxx as f64 * inv_n - mu_x * mu_x;
            let var_y = m.syy as f64 * inv_n - mu_y * mu_y;
            let cov = m.sxy as f64 * inv_n - mu_x * mu_y;
            let num = (2.0 * (mu_x * mu_y) + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (mu_x * mu_x + mu_y * mu_y + SSIM_C1) * (var_x + var_y + SSIM_C2);
            sum.add(num / den);
            windows += 1;
            if x0 + SSIM_WINDOW >= w {
                break;
            }
            m.add(&cols[x0 + SSIM_WINDOW]);
            m.sub(&cols[x0]);
            x0 += 1;
        }
        if y0 + SSIM_WINDOW < h {
            let (ox, oy) = row_at(y0);
            let (nx, ny) = row_at(y0 + SSIM_WINDOW);
            for (c, col) in cols.iter_mut().enumerate() {
                col.sub(ox[c] as u32, oy[c] as u32);
                col.add(nx[c] as u32, ny[c] as u32);
            }
        }
    }
    Ok(sum.value() / windows as f64)
}

/// Full-reference oracle interface: pristine + distorted clip in, quality
/// index out.
pub trait QualityOracle: Sync {
    fn name(&self) -> &'static str;
    fn score(&self, reference: &VideoClip, distorted: &VideoClip) -> Result<QualityIndex>;
}

/// Mean-SSIM oracle; negative means clamp to 0 so the index stays in [0,1].
#[derive(Debug, Default, Clone, Copy)]
pub struct SsimOracle;

impl QualityOracle for SsimOracle {
    fn name(&self) -> &'static str {
        "ssim"
    }

    fn score(&self, reference: &VideoClip, distorted: &VideoClip) -> Result<QualityIndex> {
        benchmark_index(reference, distorted)
    }
}

/// The shipped benchmark index: mean over frames of [`ssim_frame`],
/// clamped to [0, 1].
pub fn benchmark_index(reference: &VideoClip, distorted: &VideoClip) -> Result<QualityIndex> {
    if reference.frame_count() != distorted.frame_count() {
        return Err(Error::Alignment(format!(
            "{} vs {} frames",
            reference.frame_count(),
            distorted.frame_count()
        )));
    }
    let mut sum = KahanSum::default();
    for (r, d) in reference.frames().iter().zip(distorted.frames()) {
        sum.add(ssim_frame(r, d)?);
    }
    let mean = sum.value() / reference.frame_count() as f64;
    QualityIndex::new(mean.clamp(0.0, 1.0))
}

/// Look up an oracle by CLI name. Only `ssim` ships.
pub fn oracle_by_name(name: &str) -> Result<Box<dyn QualityOracle>> {
    match name {
        "ssim" => Ok(Box::new(SsimOracle)),
        other => Err(Error::Usage(format!("unknown oracle `{other}` (available: ssim)"))),
    }
}

/// Moments of one pixel column over the current 8-row band. An 8-row
/// column sum of squares tops out at 8 * 255^2, comfortably in u32.
#[derive(Debug, Default, Clone, Copy)]
struct ColMoments {
    sx: u32,
    sy: u32,
    sxx: u32,
    syy: u32,
    sxy: u32,
}

impl ColMoments {
    #[inline]
    fn add(&mut self, a: u32, b: u32) {
        self.sx += a;
        self.sy += b;
        self.sxx += a * a;
        self.syy += b * b;
        self.sxy += a * b;
    }

    #[inline]
    fn sub(&mut self, a: u32, b: u32) {
        self.sx -= a;
        self.sy -= b;
        self.sxx -= a * a;
        self.syy -= b * b;
        self.sxy -= a * b;
    }
}

/// Moments of one 8x8 window (sum over eight columns).
#[derive(Debug, Default, Clone, Copy)]
struct WindowMoments {
    sx: u32,
    sy: u32,
    sxx: u32,
    syy: u32,
    sxy: u32,
}

impl WindowMoments {
    #[inline]
    fn add(&mut self, c: &ColMoments) {
        self.sx += c.sx;
        self.sy += c.sy;
        self.sxx += c.sxx;
        self.syy += c.syy;
        self.sxy += c.sxy;
    }

    #[inline]
    fn sub(&mut self, c: &ColMoments) {
        self.sx -= c.sx;
        self.sy -= c.sy;
        self.sxx -= c.sxx;
        self.syy -= c.syy;
        self.sxy -= c.sxy;
    }
}

/// Kahan-Babuska compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
