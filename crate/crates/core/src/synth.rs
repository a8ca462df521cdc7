//! Procedural clip classes.
//!
//! Ten seeded recipes stand in for licensed source footage. Every class
//! is a layered scene built from shared primitives — value-noise
//! texture, geometric structure (bars / checker patches), moving discs —
//! with per-class pan speeds, detail scales and layer weights. Sharing
//! primitives keeps all classes inside one feature envelope (the way
//! natural footage behaves) while the weightings give each class a
//! distinct spatial/temporal signature. Every recipe is deterministic
//! given (seed, class index, geometry).

use crate::error::Result;
use crate::frame_io::{LumaFrame, VideoClip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Names of the shipped recipes, in class order.
pub const CLASS_NAMES: [&str; 10] = [
    "grad", "drift", "bars", "checker", "tex", "texfast", "walk", "blobs", "plasma", "noise",
];

/// Geometry of generated clips.
#[derive(Debug, Clone, Copy)]
pub struct SynthParams {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub fps: (u32, u32),
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            width: 320,
            height: 240,
            frames: 250,
            fps: (25, 1),
        }
    }
}

/// Scene composition knobs for one class.
struct Scene {
    /// texture lattice cell in pixels
    cell: usize,
    /// per-frame texture pan (static background when zero)
    pan: Pan,
    /// 0 = flat texture only, otherwise gradient backdrop weight 0..1
    gradient: f64,
    /// geometric layer blended over the texture
    structure: Structure,
    /// moving bright discs
    blob_count: usize,
    blob_speed: f64,
    /// i.i.d. per-frame noise amplitude (luma units)
    flicker: f64,
}

enum Pan {
    Fixed(i64, i64),
    Walk(i64),
}

enum Structure {
    None,
    Bars { period: usize, speed: usize, weight: f64 },
    Checker { cell: usize, speed: (usize, usize), weight: f64 },
    Plasma { weight: f64 },
}

fn scene_for(name: &str) -> Scene {
    match name {
        // static smooth anchor: banding-prone gradient over faint texture
        "grad" => Scene {
            cell: 16,
            pan: Pan::Fixed(0, 0),
            gradient: 0.82,
            structure: Structure::None,
            blob_count: 0,
            blob_speed: 0.0,
            flicker: 0.0,
        },
        // the same smooth scene creeping sideways with one slow disc
        "drift" => Scene {
            cell: 16,
            pan: Pan::Fixed(2, 0),
            gradient: 0.82,
            structure: Structure::None,
            blob_count: 1,
            blob_speed: 1.0,
            flicker: 0.0,
        },
        // parallax: block-aligned static bars over a panning texture
        "bars" => Scene {
            cell: 8,
            pan: Pan::Fixed(3, 0),
            gradient: 0.0,
            structure: Structure::Bars { period: 16, speed: 0, weight: 0.5 },
            blob_count: 2,
            blob_speed: 2.0,
            flicker: 0.0,
        },
        // parallax: block-aligned static checker over a panning texture
        "checker" => Scene {
            cell: 10,
            pan: Pan::Fixed(2, 2),
            gradient: 0.0,
            structure: Structure::Checker { cell: 16, speed: (0, 0), weight: 0.5 },
            blob_count: 2,
            blob_speed: 2.5,
            flicker: 0.0,
        },
        "tex" => Scene {
            cell: 8,
            pan: Pan::Fixed(3, 0),
            gradient: 0.0,
            structure: Structure::None,
            blob_count: 1,
            blob_speed: 1.5,
            flicker: 0.0,
        },
        "texfast" => Scene {
            cell: 8,
            pan: Pan::Fixed(8, 2),
            gradient: 0.0,
            structure: Structure::None,
            blob_count: 3,
            blob_speed: 4.0,
            flicker: 0.0,
        },
        "walk" => Scene {
            cell: 12,
            pan: Pan::Walk(5),
            gradient: 0.0,
            structure: Structure::Checker { cell: 8, speed: (0, 0), weight: 0.35 },
            blob_count: 2,
            blob_speed: 2.0,
            flicker: 0.0,
        },
        // object motion over a smooth backdrop
        "blobs" => Scene {
            cell: 16,
            pan: Pan::Fixed(0, 0),
            gradient: 0.6,
            structure: Structure::None,
            blob_count: 8,
            blob_speed: 4.5,
            flicker: 0.0,
        },
        "plasma" => Scene {
            cell: 12,
            pan: Pan::Fixed(1, 1),
            gradient: 0.0,
            structure: Structure::Plasma { weight: 0.8 },
            blob_count: 1,
            blob_speed: 2.0,
            flicker: 0.0,
        },
        // high-motion noise field, lightly mixed with texture so it
        // shares support with the rest
        "noise" => Scene {
            cell: 10,
            pan: Pan::Fixed(2, 1),
            gradient: 0.0,
            structure: Structure::None,
            blob_count: 1,
            blob_speed: 3.0,
            flicker: 70.0,
        },
        _ => unreachable!(),
    }
}

/// Generate class `index` (0..10). The clip id is the class name.
pub fn synth_class(index: usize, params: &SynthParams, seed: u64) -> Result<VideoClip> {
    let name = CLASS_NAMES[index % CLASS_NAMES.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, index as u64));
    let scene = scene_for(name);
    let (w, h, n) = (params.width, params.height, params.frames);

    let tex = ValueNoise::new(w, h, scene.cell, &mut rng);
    let offsets: Vec<(i64, i64)> = match scene.pan {
        Pan::Fixed(dx, dy) => (0..n).map(|t| (dx * t as i64, dy * t as i64)).collect(),
        Pan::Walk(step) => {
            let mut pos = (0i64, 0i64);
            (0..n)
                .map(|_| {
                    pos.0 += rng.gen_range(-step..=step);
                    pos.1 += rng.gen_range(-step..=step);
                    pos
                })
                .collect()
        }
    };
    let mut blobs = BlobField::new(w, h, scene.blob_count, scene.blob_speed, &mut rng);
    let mut noise_rng =
        ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x5eed_0000_0000_0000 | index as u64));

    let mut frames = Vec::with_capacity(n);
    for t in 0..n {
        let (ox, oy) = offsets[t];
        let mut samples = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut v = tex.sample(x as i64 + ox, y as i64 + oy) as f64;
                if scene.gradient > 0.0 {
                    let g = (x * 200 / w.max(1) + y * 55 / h.max(1)) as f64;
                    v = (1.0 - scene.gradient) * v + scene.gradient * g;
                }
                match scene.structure {
                    Structure::None => {}
                    Structure::Bars { period, speed, weight } => {
                        let s = if ((x + speed * t) / period) % 2 == 0 { 48.0 } else { 208.0 };
                        v = (1.0 - weight) * v + weight * s;
                    }
                    Structure::Checker { cell, speed, weight } => {
                        let xs = x + speed.0 * t;
                        let ys = y + speed.1 * t;
                        let s = if ((xs / cell) + (ys / cell)) % 2 == 0 { 32.0 } else { 224.0 };
                        v = (1.0 - weight) * v + weight * s;
                    }
                    Structure::Plasma { weight } => {
                        let s = 128.0
                            + 42.0
                                * ((x as f64 * 0.55).sin()
                                    + (y as f64 * 0.37).sin()
                                    + ((x + 2 * y) as f64 * 0.13 + t as f64 * 0.8).sin());
                        v = (1.0 - weight) * v + weight * s;
                    }
                }
                if scene.flicker > 0.0 {
                    v += noise_rng.gen_range(-scene.flicker..scene.flicker);
                }
                samples[y * w + x] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
        blobs.paint(&mut samples, w, h);
        blobs.step(w, h);
        frames.push(LumaFrame::new(w, h, samples)?);
    }
    VideoClip::new(frames, params.fps.0, params.fps.1, name)
}

/// Generate all ten classes (or the first `count`).
pub fn synth_classes(count: usize, params: &SynthParams, seed: u64) -> Result<Vec<VideoClip>> {
    (0..count.min(CLASS_NAMES.len()))
        .map(|i| synth_class(i, params, seed))
        .collect()
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 finalizer over seed ^ salted constant
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bilinear value noise on a wrapping lattice.
struct ValueNoise {
    cells_x: usize,
    cells_y: usize,
    cell: usize,
    lattice: Vec<u8>,
}

impl ValueNoise {
    fn new(w: usize, h: usize, cell: usize, rng: &mut ChaCha8Rng) -> Self {
        let cells_x = (w / cell).max(2);
        let cells_y = (h / cell).max(2);
        let lattice = (0..cells_x * cells_y).map(|_| rng.gen()).collect();
        ValueNoise {
            cells_x,
            cells_y,
            cell,
            lattice,
        }
    }

    fn at(&self, cx: usize, cy: usize) -> f64 {
        self.lattice[(cy % self.cells_y) * self.cells_x + (cx % self.cells_x)] as f64
    }

    fn sample(&self, x: i64, y: i64) -> u8 {
        let span = self.cell as i64;
        let px = x.rem_euclid((self.cells_x * self.cell) as i64);
        let py = y.rem_euclid((self.cells_y * self.cell) as i64);
        let cx = (px / span) as usize;
        let cy = (py / span) as usize;
        let fx = (px % span) as f64 / self.cell as f64;
        let fy = (py % span) as f64 / self.cell as f64;
        let v00 = self.at(cx, cy);
        let v10 = self.at(cx + 1, cy);
        let v01 = self.at(cx, cy + 1);
        let v11 = self.at(cx + 1, cy + 1);
        let top = v00 + (v10 - v00) * fx;
        let bot = v01 + (v11 - v01) * fx;
        (top + (bot - top) * fy).round().clamp(0.0, 255.0) as u8
    }
}

/// Bright discs bouncing along linear trajectories.
struct BlobField {
    blobs: Vec<Blob>,
}

struct Blob {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    r: f64,
}

impl BlobField {
    fn new(w: usize, h: usize, count: usize, speed: f64, rng: &mut ChaCha8Rng) -> Self {
        let max_r = (w.min(h) as f64 / 4.0).max(3.0);
        let min_r = (max_r * 0.5).min(6.0);
        let blobs = (0..count)
            .map(|_| Blob {
                x: rng.gen_range(0.0..w as f64),
                y: rng.gen_range(0.0..h as f64),
                vx: rng.gen_range(-speed..=speed),
                vy: rng.gen_range(-speed..=speed),
                r: rng.gen_range(min_r..max_r),
            })
            .collect();
        BlobField { blobs }
    }

    fn paint(&self, samples: &mut [u8], w: usize, h: usize) {
        for b in &self.blobs {
            let (x0, x1) = (
                (b.x - b.r).max(0.0) as usize,
                ((b.x + b.r) as usize + 1).min(w),
            );
            let (y0, y1) = (
                (b.y - b.r).max(0.0) as usize,
                ((b.y + b.r) as usize + 1).min(h),
            );
            for y in y0..y1 {
                for x in x0..x1 {
                    let dx = x as f64 - b.x;
                    let dy = y as f64 - b.y;
                    let d2 = dx * dx + dy * dy;
                    if d2 < b.r * b.r {
                        let fall = 1.0 - d2 / (b.r * b.r);
                        let v = 24.0 + 200.0 * fall;
                        let p = &mut samples[y * w + x];
                        *p = (*p).max(v as u8);
                    }
                }
            }
        }
    }

    fn step(&mut self, w: usize, h: usize) {
        for b in self.blobs.iter_mut() {
            b.x += b.vx;
            b.y += b.vy;
            if b.x < 0.0 || b.x >= w as f64 {
                b.vx = -b.vx;
                b.x += 2.0 * b.vx;
            }
            if b.y < 0.0 || b.y >= h as f64 {
                b.vy = -b.vy;
                b.y += 2.0 * b.vy;
            }
        }
    }
}
