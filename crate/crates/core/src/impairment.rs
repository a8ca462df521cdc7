//! Deterministic compression-and-loss channel.
//!
//! Stands in for a physical streaming test-bed: clips are degraded by
//! blockwise DCT quantization (compression proxy), split into packets of
//! whole macroblock rows, dropped by a seeded loss process and rebuilt
//! with previous-frame concealment. Identical inputs and seeds produce
//! bit-identical outputs.

use crate::error::{Error, Result};
use crate::frame_io::{LumaFrame, VideoClip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Packet header: frame index (u32) + first macroblock row (u16) + row
/// count (u16). Counted against the MTU.
pub const PACKET_HEADER_BYTES: usize = 8;
/// Conventional Ethernet payload budget.
pub const DEFAULT_MTU: usize = 1400;
/// Macroblock row height in pixels.
pub const MB_ROW_HEIGHT: usize = 16;

/// One rung of the compression ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionLevel {
    pub level_index: u8,
    pub quant_step: f64,
    pub nominal_bitrate_kbps: f64,
}

impl CompressionLevel {
    pub fn new(level_index: u8, quant_step: f64, nominal_bitrate_kbps: f64) -> Result<Self> {
        if !(quant_step > 0.0) || !(nominal_bitrate_kbps > 0.0) {
            return Err(Error::Usage(format!(
                "compression level {level_index}: quant step and bitrate must be positive"
            )));
        }
        Ok(CompressionLevel {
            level_index,
            quant_step,
            nominal_bitrate_kbps,
        })
    }
}

/// The shipped 8-rung ladder (64..5120 kbps). Quantization steps grow as
/// the nominal bitrate shrinks.
pub fn default_ladder() -> Vec<CompressionLevel> {
    let rungs: [(f64, f64); 8] = [
        (64.0, 448.0),
        (640.0, 288.0),
        (768.0, 192.0),
        (1024.0, 128.0),
        (2048.0, 64.0),
        (3072.0, 32.0),
        (4096.0, 12.0),
        (5120.0, 4.0),
    ];
    let ladder: Vec<CompressionLevel> = rungs
        .iter()
        .enumerate()
        .map(|(i, &(kbps, step))| CompressionLevel::new(i as u8, step, kbps).unwrap())
        .collect();
    validate_ladder(&ladder).expect("default ladder is monotone");
    ladder
}

/// Check the ladder invariant: quant step strictly increases as nominal
/// bitrate decreases.
pub fn validate_ladder(levels: &[CompressionLevel]) -> Result<()> {
    let mut sorted: Vec<&CompressionLevel> = levels.iter().collect();
    sorted.sort_by(|a, b| a.nominal_bitrate_kbps.partial_cmp(&b.nominal_bitrate_kbps).unwrap());
    for pair in sorted.windows(2) {
        if !(pair[0].quant_step > pair[1].quant_step)
            || !(pair[0].nominal_bitrate_kbps < pair[1].nominal_bitrate_kbps)
        {
            return Err(Error::Usage(
                "compression ladder must have strictly decreasing quant step as bitrate grows"
                    .into(),
            ));
        }
    }
    Ok(())
}

/// Loss process kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossKind {
    Bernoulli,
    GilbertElliott {
        p_good_to_bad: f64,
        p_bad_to_good: f64,
        loss_in_bad: f64,
    },
}

/// Seeded loss process targeting a mean loss ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    pub kind: LossKind,
    pub loss_rate: f64,
    pub seed: u64,
}

impl LossModel {
    pub fn bernoulli(loss_rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&loss_rate) {
            return Err(Error::Usage(format!("loss rate {loss_rate} outside [0,1]")));
        }
        Ok(LossModel {
            kind: LossKind::Bernoulli,
            loss_rate,
            seed,
        })
    }

    /// Gilbert-Elliott burst model. The stationary loss probability
    /// `loss_in_bad * p_gb / (p_gb + p_bg)` must match `loss_rate` to 1e-9.
    pub fn gilbert_elliott(
        loss_rate: f64,
        p_good_to_bad: f64,
        p_bad_to_good: f64,
        loss_in_bad: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&loss_rate) {
            return Err(Error::Usage(format!("loss rate {loss_rate} outside [0,1]")));
        }
        for (name, p) in [
            ("p_gb", p_good_to_bad),
            ("p_bg", p_bad_to_good),
            ("loss_in_bad", loss_in_bad),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Usage(format!("{name} = {p} outside [0,1]")));
            }
        }
        let denom = p_good_to_bad + p_bad_to_good;
        if denom <= 0.0 {
            return Err(Error::Usage("p_gb + p_bg must be positive".into()));
        }
        let stationary = loss_in_bad * p_good_to_bad / denom;
        if (stationary - loss_rate).abs() > 1e-9 {
            return Err(Error::Usage(format!(
                "gilbert-elliott stationary loss {stationary} does not match target {loss_rate}"
            )));
        }
        Ok(LossModel {
            kind: LossKind::GilbertElliott {
                p_good_to_bad,
                p_bad_to_good,
                loss_in_bad,
            },
            loss_rate,
            seed,
        })
    }
}

/// Measured network features of one transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub measured_loss_ratio: f64,
    pub nominal_bitrate_kbps: f64,
    pub packets_sent: u64,
    pub packets_lost: u64,
}

impl ChannelStats {
    pub fn new(packets_sent: u64, packets_lost: u64, nominal_bitrate_kbps: f64) -> Self {
        let ratio = if packets_sent == 0 {
            0.0
        } else {
            packets_lost as f64 / packets_sent as f64
        };
        ChannelStats {
            measured_loss_ratio: ratio,
            nominal_bitrate_kbps,
            packets_sent,
            packets_lost,
        }
    }

    /// Client-side stats built from an externally estimated loss ratio;
    /// packet counts are unknown and reported as zero.
    pub fn from_measured(loss_ratio: f64, nominal_bitrate_kbps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&loss_ratio) {
            return Err(Error::Usage(format!("loss ratio {loss_ratio} outside [0,1]")));
        }
        Ok(ChannelStats {
            measured_loss_ratio: loss_ratio,
            nominal_bitrate_kbps,
            packets_sent: 0,
            packets_lost: 0,
        })
    }
}

/// One packet: whole macroblock rows of one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub frame_index: u32,
    pub first_mb_row: u16,
    pub mb_row_count: u16,
    pub payload: Vec<u8>,
}

/// In-memory packet stream for one clip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketStream {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub packets: Vec<Packet>,
}

/// Number of macroblock rows for a frame height (the last row may be 8
/// pixels tall when the height is not a multiple of 16).
pub fn mb_row_count(height: usize) -> usize {
    height.div_ceil(MB_ROW_HEIGHT)
}

fn mb_row_span(height: usize, row: usize) -> (usize, usize) {
    let start = row * MB_ROW_HEIGHT;
    let end = ((row + 1) * MB_ROW_HEIGHT).min(height);
    (start, end)
}

/// Blockwise DCT quantization: per 8x8 block, forward DCT-II, uniform
/// quantization by the level's step, inverse DCT, clamp to [0, 255].
pub fn compress_proxy(clip: &VideoClip, level: &CompressionLevel) -> VideoClip {
    let dct = Dct8::new();
    let (w, h) = (clip.width(), clip.height());
    let mut out = clip.clone();
    for frame in out.frames_mut() {
        let samples = frame.samples_mut();
        let mut block = [0.0f64; 64];
        for by in (0..h).step_by(8) {
            for bx in (0..w).step_by(8) {
                for y in 0..8 {
                    for x in 0..8 {
                        block[y * 8 + x] = samples[(by + y) * w + bx + x] as f64;
                    }
                }
                dct.forward(&mut block);
                for c in block.iter_mut() {
                    *c = (*c / level.quant_step).round() * level.quant_step;
                }
                dct.inverse(&mut block);
                for y in 0..8 {
                    for x in 0..8 {
                        samples[(by + y) * w + bx + x] =
                            block[y * 8 + x].round().clamp(0.0, 255.0) as u8;
                    }
                }
            }
        }
    }
    out
}

/// Split a clip into packets of whole macroblock rows. Header bytes count
/// against the MTU; a single row that does not fit is an error.
pub fn packetize(clip: &VideoClip, mtu: usize) -> Result<PacketStream> {
    let (w, h) = (clip.width(), clip.height());
    let rows = mb_row_count(h);
    let largest_row = {
        let (s, e) = mb_row_span(h, 0);
        w * (e - s)
    };
    if PACKET_HEADER_BYTES + largest_row > mtu {
        return Err(Error::MtuTooSmall(format!(
            "one macroblock row needs {} bytes but mtu is {mtu}",
            PACKET_HEADER_BYTES + largest_row
        )));
    }
    let mut packets = Vec::new();
    for (fi, frame) in clip.frames().iter().enumerate() {
        let mut row = 0usize;
        while row < rows {
            let mut payload = Vec::new();
            let first = row;
            while row < rows {
                let (s, e) = mb_row_span(h, row);
                let bytes = w * (e - s);
                if PACKET_HEADER_BYTES + payload.len() + bytes > mtu {
                    break;
                }
                payload.extend_from_slice(&frame.samples()[s * w..e * w]);
                row += 1;
            }
            packets.push(Packet {
                frame_index: fi as u32,
                first_mb_row: first as u16,
                mb_row_count: (row - first) as u16,
                payload,
            });
        }
    }
    Ok(PacketStream {
        width: w,
        height: h,
        frame_count: clip.frame_count(),
        packets,
    })
}

/// Drop packets per the loss model. Packets of frame 0 are never dropped
/// (reliable intra refresh). Exactly one uniform draw is consumed per
/// droppable packet under Bernoulli, so raising the rate at a fixed seed
/// only grows the lost set.
pub fn apply_loss(stream: &PacketStream, model: &LossModel) -> (PacketStream, ChannelStats) {
    apply_loss_owned(stream.clone(), model)
}

/// Same contract as [`apply_loss`] but consumes the stream, keeping the
/// surviving payloads without copying them.
pub fn apply_loss_owned(
    mut stream: PacketStream,
    model: &LossModel,
) -> (PacketStream, ChannelStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let sent = stream.packets.len() as u64;
    let drop_mask: Vec<bool> = match model.kind {
        LossKind::Bernoulli => stream
            .packets
            .iter()
            .map(|p| p.frame_index != 0 && rng.gen::<f64>() < model.loss_rate)
            .collect(),
        LossKind::GilbertElliott {
            p_good_to_bad,
            p_bad_to_good,
            loss_in_bad,
        } => {
            let stationary_bad = p_good_to_bad / (p_good_to_bad + p_bad_to_good);
            let mut bad = rng.gen::<f64>() < stationary_bad;
            stream
                .packets
                .iter()
                .map(|p| {
                    let drop = bad && rng.gen::<f64>() < loss_in_bad;
                    let flip = rng.gen::<f64>();
                    bad = if bad { flip >= p_bad_to_good } else { flip < p_good_to_bad };
                    p.frame_index != 0 && drop
                })
                .collect()
        }
    };
    let lost = drop_mask.iter().filter(|&&d| d).count() as u64;
    let mut idx = 0usize;
    stream.packets.retain(|_| {
        let keep = !drop_mask[idx];
        idx += 1;
        keep
    });
    let stats = ChannelStats::new(sent, lost, 0.0);
    (stream, stats)
}

/// Rebuild a clip from a (possibly lossy) stream. Missing macroblock rows
/// are concealed by copying the co-located rows of the previously
/// reconstructed frame; a fully lost frame repeats the previous frame.
/// Template pixel content is never read, only geometry, frame count,
/// rate and id.
pub fn reconstruct(stream: &PacketStream, template: &VideoClip) -> Result<VideoClip> {
    if stream.width != template.width()
        || stream.height != template.height()
        || stream.frame_count != template.frame_count()
    {
        return Err(Error::GeometryMismatch(format!(
            "stream {}x{}x{} vs template {}x{}x{}",
            stream.width,
            stream.height,
            stream.frame_count,
            template.width(),
            template.height(),
            template.frame_count()
        )));
    }
    let (w, h) = (stream.width, stream.height);
    let rows = mb_row_count(h);
    // Index received row spans per frame, validating packet addressing.
    let mut received: Vec<Vec<(usize, usize, &[u8])>> = vec![Vec::new(); stream.frame_count];
    for p in &stream.packets {
        let fi = p.frame_index as usize;
        if fi >= stream.frame_count
            || p.mb_row_count == 0
            || (p.first_mb_row as usize + p.mb_row_count as usize) > rows
        {
            return Err(Error::GeometryMismatch(format!(
                "packet addresses frame {fi} row {}+{} outside the template",
                p.first_mb_row, p.mb_row_count
            )));
        }
        let (start, _) = mb_row_span(h, p.first_mb_row as usize);
        let end = mb_row_span(h, p.first_mb_row as usize + p.mb_row_count as usize - 1).1;
        if p.payload.len() != w * (end - start) {
            return Err(Error::GeometryMismatch(format!(
                "packet payload {} bytes, expected {}",
                p.payload.len(),
                w * (end - start)
            )));
        }
        received[fi].push((start, end, p.payload.as_slice()));
    }
    // Rebuild front to back: each frame starts as a copy of its concealed
    // predecessor, then received rows overwrite it.
    let mut rebuilt: Vec<LumaFrame> = Vec::with_capacity(stream.frame_count);
    for fi in 0..stream.frame_count {
        let mut data = if fi == 0 {
            vec![0u8; w * h]
        } else {
            rebuilt[fi - 1].samples().to_vec()
        };
        for &(start, end, payload) in &received[fi] {
            data[start * w..end * w].copy_from_slice(payload);
        }
        rebuilt.push(LumaFrame::new(w, h, data)?);
    }
    let (num, den) = template.fps();
    VideoClip::new(rebuilt, num, den, template.clip_id())
}

/// End-to-end channel: compress, packetize, drop, reconstruct. The MTU is
/// raised when one macroblock row of this geometry does not fit 1400
/// bytes, so every geometry stays packetizable at row granularity.
pub fn degrade(
    clip: &VideoClip,
    level: &CompressionLevel,
    model: &LossModel,
) -> Result<(VideoClip, ChannelStats)> {
    let compressed = compress_proxy(clip, level);
    degrade_compressed(&compressed, level, model)
}

/// Loss-and-reconstruct stage over an already compressed clip; lets grid
/// builders reuse one compression pass across loss rates.
pub fn degrade_compressed(
    compressed: &VideoClip,
    level: &CompressionLevel,
    model: &LossModel,
) -> Result<(VideoClip, ChannelStats)> {
    let stream = packetize(compressed, effective_mtu(compressed))?;
    let (lossy, stats) = apply_loss_owned(stream, model);
    let rebuilt = reconstruct(&lossy, compressed)?;
    let stats = ChannelStats::new(stats.packets_sent, stats.packets_lost, level.nominal_bitrate_kbps);
    Ok((rebuilt, stats))
}

/// MTU used by the end-to-end channel: the conventional 1400 bytes, or the
/// smallest value that fits one macroblock row of this geometry.
pub fn effective_mtu(clip: &VideoClip) -> usize {
    let (s, e) = mb_row_span(clip.height(), 0);
    DEFAULT_MTU.max(PACKET_HEADER_BYTES + clip.width() * (e - s))
}

/// Orthonormal 8-point DCT-II basis.
struct Dct8 {
    basis: [[f64; 8]; 8],
}

impl Dct8 {
    fn new() -> Self {
        let mut basis = [[0.0; 8]; 8];
        for (u, row) in basis.iter_mut().enumerate() {
            let scale = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
            for (x, v) in row.iter_mut().enumerate() {
                *v = scale
                    * ((2.0 * x as f64 + 1.0) * u as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        Dct8 { basis }
    }

    /// In-place 2-D forward transform: C = T B T'.
    fn forward(&self, block: &mut [f64; 64]) {
        self.apply(block, false);
    }

    /// In-place 2-D inverse transform: B = T' C T.
    fn inverse(&self, block: &mut [f64; 64]) {
        self.apply(block, true);
    }

    fn apply(&self, block: &mut [f64; 64], inverse: bool) {
        let mut tmp = [0.0f64; 64];
        // rows
        for y in 0..8 {
            for u in 0..8 {
                let mut acc = 0.0;
                for x in 0..8 {
                    let t = if inverse { self.basis[x][u] } else { self.basis[u][x] };
                    acc += t * block[y * 8 + x];
                }
                tmp[y * 8 + u] = acc;
            }
        }
        // columns
        for u in 0..8 {
            for v in 0..8 {
                let mut acc = 0.0;
                for y in 0..8 {
                    let t = if inverse { self.basis[y][v] } else { self.basis[v][y] };
                    acc += t * tmp[y * 8 + u];
                }
                block[v * 8 + u] = acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_clip(w: usize, h: usize, frames: usize, seed: u64) -> VideoClip {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fs = (0..frames)
            .map(|_| LumaFrame::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap())
            .collect();
        VideoClip::new(fs, 25, 1, format!("rand{seed}")).unwrap()
    }

    fn level(step: f64) -> CompressionLevel {
        CompressionLevel::new(0, step, 1024.0).unwrap()
    }

    #[test]
    fn unit_quant_step_error_at_most_one() {
        let clip = random_clip(8, 8, 2, 21);
        let out = compress_proxy(&clip, &level(1.0));
        for (a, b) in clip.frames().iter().zip(out.frames()) {
            for (&x, &y) in a.samples().iter().zip(b.samples()) {
                assert!((x as i32 - y as i32).abs() <= 1, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn tiny_quant_step_is_identity() {
        let clip = random_clip(16, 16, 2, 5);
        let out = compress_proxy(&clip, &level(1e-9));
        assert_eq!(out, clip);
    }

    #[test]
    fn forward_matches_naive_dct_oracle() {
        // Brute-force DCT-II definition on one seeded block.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut block = [0.0f64; 64];
        for v in block.iter_mut() {
            *v = rng.gen_range(0.0..255.0);
        }
        let dct = Dct8::new();
        let mut fast = block;
        dct.forward(&mut fast);
        let scale = |k: usize| if k == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
        for u in 0..8 {
            // u: vertical frequency, v: horizontal frequency
            for v in 0..8 {
                let mut acc = 0.0;
                for y in 0..8 {
                    for x in 0..8 {
                        acc += block[y * 8 + x]
                            * ((2.0 * x as f64 + 1.0) * v as f64 * std::f64::consts::PI / 16.0)
                                .cos()
                            * ((2.0 * y as f64 + 1.0) * u as f64 * std::f64::consts::PI / 16.0)
                                .cos();
                    }
                }
                let expected = scale(u) * scale(v) * acc;
                assert!(
                    (fast[u * 8 + v] - expected).abs() < 1e-9,
                    "coef ({u},{v}): {} vs {expected}",
                    fast[u * 8 + v]
                );
            }
        }
    }

    #[test]
    fn constant_clip_error_bounded_by_step_over_eight() {
        for &step in &[2.0, 10.0, 64.0] {
            let frames = vec![
                LumaFrame::filled(16, 16, 77).unwrap(),
                LumaFrame::filled(16, 16, 77).unwrap(),
            ];
            let clip = VideoClip::new(frames, 25, 1, "const").unwrap();
            let out = compress_proxy(&clip, &level(step));
            let bound = (step / 8.0).ceil() as i32; // u8 rounding inflates by < 1
            for f in out.frames() {
                for &s in f.samples() {
                    assert!((s as i32 - 77).abs() <= bound, "step {step}: {s}");
                }
            }
        }
        // DC survives exactly when the step divides 8*DC: 8*64 = 512 = 256*2.
        let frames = vec![
            LumaFrame::filled(8, 8, 64).unwrap(),
            LumaFrame::filled(8, 8, 64).unwrap(),
        ];
        let clip = VideoClip::new(frames, 25, 1, "dc").unwrap();
        assert_eq!(compress_proxy(&clip, &level(2.0)), clip);
    }

    #[test]
    fn mse_non_decreasing_in_quant_step() {
        let clip = random_clip(32, 32, 3, 40);
        let mse = |a: &VideoClip, b: &VideoClip| -> f64 {
            let mut acc = 0.0;
            let mut n = 0usize;
            for (fa, fb) in a.frames().iter().zip(b.frames()) {
                for (&x, &y) in fa.samples().iter().zip(fb.samples()) {
                    let d = x as f64 - y as f64;
                    acc += d * d;
                    n += 1;
                }
            }
            acc / n as f64
        };
        let m2 = mse(&clip, &compress_proxy(&clip, &level(2.0)));
        let m8 = mse(&clip, &compress_proxy(&clip, &level(8.0)));
        let m32 = mse(&clip, &compress_proxy(&clip, &level(32.0)));
        assert!(m2 <= m8 && m8 <= m32, "{m2} {m8} {m32}");
    }

    #[test]
    fn packetize_small_frame_one_packet_per_frame() {
        let clip = random_clip(16, 16, 3, 1);
        let stream = packetize(&clip, DEFAULT_MTU).unwrap();
        assert_eq!(stream.packets.len(), 3);
        assert!(stream.packets.iter().all(|p| p.payload.len() == 256));
    }

    #[test]
    fn packetize_64x64_four_packets_per_frame() {
        // One macroblock row is 64*16 = 1024 bytes; two rows exceed 1400.
        let clip = random_clip(64, 64, 2, 2);
        let stream = packetize(&clip, DEFAULT_MTU).unwrap();
        assert_eq!(stream.packets.len(), 8);
        assert!(stream.packets.iter().all(|p| p.mb_row_count == 1));
    }

    #[test]
    fn packetize_mtu_too_small() {
        let clip = random_clip(16, 16, 2, 3);
        assert!(matches!(
            packetize(&clip, 100),
            Err(Error::MtuTooSmall(_))
        ));
    }

    #[test]
    fn lossless_depacketize_restores_clip() {
        let clip = random_clip(24, 40, 4, 8);
        let stream = packetize(&clip, 600).unwrap();
        // Template content must not leak into the output: pass a zeroed clip.
        let zero = clip
            .with_frames(vec![
                LumaFrame::filled(24, 40, 0).unwrap();
                clip.frame_count()
            ])
            .unwrap();
        let back = reconstruct(&stream, &zero).unwrap();
        assert_eq!(back.frames(), clip.frames());
    }

    #[test]
    fn zero_loss_is_transparent() {
        let clip = random_clip(16, 16, 5, 11);
        let stream = packetize(&clip, DEFAULT_MTU).unwrap();
        let (lossy, stats) = apply_loss(&stream, &LossModel::bernoulli(0.0, 1).unwrap());
        assert_eq!(lossy, stream);
        assert_eq!(stats.packets_lost, 0);
        assert_eq!(stats.measured_loss_ratio, 0.0);
    }

    #[test]
    fn full_loss_keeps_only_frame_zero() {
        let clip = random_clip(16, 16, 4, 12);
        let stream = packetize(&clip, DEFAULT_MTU).unwrap();
        let (lossy, stats) = apply_loss(&stream, &LossModel::bernoulli(1.0, 1).unwrap());
        assert!(lossy.packets.iter().all(|p| p.frame_index == 0));
        assert_eq!(stats.packets_lost, 3);
        assert_eq!(stats.packets_sent, 4);
    }

    fn synthetic_stream(packets: usize) -> PacketStream {
        // Many single-row frames; only the first packet is loss-exempt.
        PacketStream {
            width: 8,
            height: 8,
            frame_count: packets,
            packets: (0..packets)
                .map(|i| Packet {
                    frame_index: i as u32,
                    first_mb_row: 0,
                    mb_row_count: 1,
                    payload: vec![0; 64],
                })
                .collect(),
        }
    }

    #[test]
    fn bernoulli_loss_ratio_within_monte_carlo_band() {
        let stream = synthetic_stream(10_000);
        let (_, stats) = apply_loss(&stream, &LossModel::bernoulli(0.05, 99).unwrap());
        assert!((stats.measured_loss_ratio - 0.05).abs() <= 0.01);
        let band = 3.0 * (0.05f64 * 0.95 / 10_000.0).sqrt();
        assert!((stats.measured_loss_ratio - 0.05).abs() <= band);
        assert_eq!(
            stats.measured_loss_ratio,
            stats.packets_lost as f64 / stats.packets_sent as f64
        );
    }

    #[test]
    fn gilbert_elliott_hits_stationary_rate() {
        let stream = synthetic_stream(200_000);
        let model = LossModel::gilbert_elliott(0.05, 0.05, 0.45, 0.5, 7).unwrap();
        let (_, stats) = apply_loss(&stream, &model);
        assert!(
            (stats.measured_loss_ratio - 0.05).abs() < 0.01,
            "{}",
            stats.measured_loss_ratio
        );
    }

    #[test]
    fn gilbert_elliott_rejects_inconsistent_params() {
        assert!(LossModel::gilbert_elliott(0.10, 0.05, 0.45, 0.5, 7).is_err());
    }

    #[test]
    fn single_lost_packet_concealed_from_previous_frame() {
        let clip = random_clip(16, 48, 4, 30);
        let stream = packetize(&clip, 16 * 16 + PACKET_HEADER_BYTES).unwrap();
        // Drop exactly the packet covering frame 2, macroblock row 1.
        let mut lossy = stream.clone();
        let victim = lossy
            .packets
            .iter()
            .position(|p| p.frame_index == 2 && p.first_mb_row == 1)
            .unwrap();
        lossy.packets.remove(victim);
        let out = reconstruct(&lossy, &clip).unwrap();
        for fi in [0usize, 1, 3] {
            assert_eq!(out.frames()[fi], clip.frames()[fi], "frame {fi} changed");
        }
        let w = clip.width();
        // rows 16..32 of frame 2 must equal the reconstructed frame 1.
        assert_eq!(
            &out.frames()[2].samples()[16 * w..32 * w],
            &out.frames()[1].samples()[16 * w..32 * w]
        );
        // the other rows of frame 2 arrived intact.
        assert_eq!(
            &out.frames()[2].samples()[..16 * w],
            &clip.frames()[2].samples()[..16 * w]
        );
    }

    #[test]
    fn full_frame_loss_freezes_previous_frame() {
        let clip = random_clip(16, 16, 4, 31);
        let stream = packetize(&clip, DEFAULT_MTU).unwrap();
        let mut lossy = stream.clone();
        lossy.packets.retain(|p| p.frame_index != 2);
        let out = reconstruct(&lossy, &clip).unwrap();
        assert_eq!(out.frames()[2], out.frames()[1]);
        assert_eq!(out.frames()[3], clip.frames()[3]);
    }

    #[test]
    fn degrade_zero_loss_equals_compression_alone() {
        let clip = random_clip(32, 32, 4, 50);
        let lvl = level(8.0);
        let (out, stats) = degrade(&clip, &lvl, &LossModel::bernoulli(0.0, 3).unwrap()).unwrap();
        assert_eq!(out, compress_proxy(&clip, &lvl));
        assert_eq!(stats.packets_lost, 0);
        assert_eq!(stats.nominal_bitrate_kbps, 1024.0);
    }

    #[test]
    fn degrade_is_deterministic() {
        let clip = random_clip(32, 32, 6, 51);
        let lvl = level(16.0);
        let model = LossModel::bernoulli(0.2, 77).unwrap();
        let (a, sa) = degrade(&clip, &lvl, &model).unwrap();
        let (b, sb) = degrade(&clip, &lvl, &model).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    #[test]
    fn wide_frames_use_raised_mtu() {
        // 320-wide rows are 5120 bytes; the end-to-end channel must still
        // packetize at whole-row granularity.
        let clip = random_clip(320, 48, 2, 60);
        assert_eq!(effective_mtu(&clip), 5120 + PACKET_HEADER_BYTES);
        let model = LossModel::bernoulli(0.0, 1).unwrap();
        assert!(degrade(&clip, &level(4.0), &model).is_ok());
    }
}
