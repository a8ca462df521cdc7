//! Raw luma video clips and Y4M (YUV4MPEG2) container support.
//!
//! Every downstream stage operates on [`VideoClip`]: an ordered list of
//! 8-bit luma frames with fixed geometry. Clips are read from and written
//! to Y4M; on read, chroma planes (4:2:0) are skipped so only the luma
//! plane is kept.

use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// One 8-bit luma frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LumaFrame {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl LumaFrame {
    /// Build a frame, enforcing the block-grid alignment and sample-count
    /// invariants.
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || width % 8 != 0 || height % 8 != 0 {
            return Err(Error::UnsupportedGeometry(format!(
                "{width}x{height}: dimensions must be positive multiples of 8"
            )));
        }
        if samples.len() != width * height {
            return Err(Error::InvalidClip(format!(
                "sample count {} != {}x{}",
                samples.len(),
                width,
                height
            )));
        }
        Ok(LumaFrame {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        LumaFrame::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }
}

/// An ordered sequence of equally sized luma frames plus frame rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoClip {
    frames: Vec<LumaFrame>,
    fps_num: u32,
    fps_den: u32,
    clip_id: String,
}

impl VideoClip {
    /// Build a clip, enforcing all type invariants: at least two frames,
    /// uniform geometry, positive rational frame rate.
    pub fn new(
        frames: Vec<LumaFrame>,
        fps_num: u32,
        fps_den: u32,
        clip_id: impl Into<String>,
    ) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidClip(format!(
                "clip needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        if fps_num == 0 || fps_den == 0 {
            return Err(Error::InvalidClip("frame rate must be positive".into()));
        }
        let (w, h) = (frames[0].width(), frames[0].height());
        if frames.iter().any(|f| f.width() != w || f.height() != h) {
            return Err(Error::InvalidClip("frames differ in geometry".into()));
        }
        Ok(VideoClip {
            frames,
            fps_num,
            fps_den,
            clip_id: clip_id.into(),
        })
    }

    pub fn frames(&self) -> &[LumaFrame] {
        &self.frames
    }

    pub(crate) fn frames_mut(&mut self) -> &mut [LumaFrame] {
        &mut self.frames
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn fps(&self) -> (u32, u32) {
        (self.fps_num, self.fps_den)
    }

    pub fn clip_id(&self) -> &str {
        &self.clip_id
    }

    pub fn with_clip_id(mut self, id: impl Into<String>) -> Self {
        self.clip_id = id.into();
        self
    }

    /// Replace the frame list, keeping rate and id. Geometry is re-validated.
    pub fn with_frames(&self, frames: Vec<LumaFrame>) -> Result<Self> {
        VideoClip::new(frames, self.fps_num, self.fps_den, self.clip_id.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColorSpace {
    Mono,
    C420,
}

impl ColorSpace {
    fn chroma_bytes(self, w: usize, h: usize) -> usize {
        match self {
            ColorSpace::Mono => 0,
            ColorSpace::C420 => (w / 2) * (h / 2) * 2,
        }
    }
}

/// Read a Y4M file into a [`VideoClip`], keeping only the luma plane.
///
/// Accepts 8-bit mono (`Cmono`) and 4:2:0 (`C420` and its siting variants,
/// the default when no `C` tag is present); chroma is skipped. The clip id
/// is the file stem.
pub fn read_y4m(path: impl AsRef<Path>) -> Result<VideoClip> {
    let path = path.as_ref();
    let mut reader = BufReader::new(File::open(path)?);
    let header = read_line(&mut reader)?
        .ok_or_else(|| Error::Parse("empty file, no YUV4MPEG2 header".into()))?;
    let (w, h, fps_num, fps_den, cs) = parse_header(&header)?;
    if w % 8 != 0 || h % 8 != 0 {
        return Err(Error::UnsupportedGeometry(format!(
            "{w}x{h}: dimensions must be multiples of 8"
        )));
    }
    let chroma = cs.chroma_bytes(w, h);
    let mut frames = Vec::new();
    loop {
        let marker = match read_line(&mut reader)? {
            None => break,
            Some(line) => line,
        };
        if marker != "FRAME" && !marker.starts_with("FRAME ") {
            return Err(Error::Parse(format!("expected FRAME marker, got `{marker}`")));
        }
        let mut samples = vec![0u8; w * h];
        read_exact_or_truncated(&mut reader, &mut samples, frames.len())?;
        if chroma > 0 {
            let mut skip = vec![0u8; chroma];
            read_exact_or_truncated(&mut reader, &mut skip, frames.len())?;
        }
        frames.push(LumaFrame::new(w, h, samples)?);
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    VideoClip::new(frames, fps_num, fps_den, stem)
}

/// Write a clip as mono (4:0:0) Y4M. `read_y4m(write_y4m(c))` restores the
/// clip bit for bit (the clip id comes back as the file stem).
pub fn write_y4m(clip: &VideoClip, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let (num, den) = clip.fps();
    writeln!(
        out,
        "YUV4MPEG2 W{} H{} F{}:{} Ip A1:1 Cmono",
        clip.width(),
        clip.height(),
        num,
        den
    )?;
    for frame in clip.frames() {
        out.write_all(b"FRAME\n")?;
        out.write_all(frame.samples())?;
    }
    out.flush()?;
    Ok(())
}

fn read_line<R: Read>(reader: &mut R) -> Result<Option<String>> {
    let mut bytes = Vec::new();
    let mut b = [0u8; 1];
    loop {
        match reader.read(&mut b)? {
            0 => {
                if bytes.is_empty() {
                    return Ok(None);
                }
                return Err(Error::TruncatedInput("header line without newline".into()));
            }
            _ => {
                if b[0] == b'\n' {
                    return Ok(Some(String::from_utf8(bytes).map_err(|_| {
                        Error::Parse("non-UTF8 bytes in header line".into())
                    })?));
                }
                bytes.push(b[0]);
                if bytes.len() > 1024 {
                    return Err(Error::Parse("header line too long".into()));
                }
            }
        }
    }
}

fn read_exact_or_truncated<R: Read>(reader: &mut R, buf: &mut [u8], frame: usize) -> Result<()> {
    reader.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::TruncatedInput(format!("frame {frame} payload ends early"))
        } else {
            Error::Io(e)
        }
    })
}

fn parse_header(line: &str) -> Result<(usize, usize, u32, u32, ColorSpace)> {
    let mut tokens = line.split(' ');
    if tokens.next() != Some("YUV4MPEG2") {
        return Err(Error::Parse("missing YUV4MPEG2 magic".into()));
    }
    let (mut w, mut h, mut fps) = (None, None, None);
    let mut cs = ColorSpace::C420; // y4m default when no C tag is given
    for tok in tokens {
        let (tag, rest) = match tok.char_indices().next() {
            Some((_, c)) => (c, &tok[1..]),
            None => continue,
        };
        match tag {
            'W' => w = Some(parse_num(rest, "W")?),
            'H' => h = Some(parse_num(rest, "H")?),
            'F' => {
                let (n, d) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad F token `{tok}`")))?;
                let n: u32 = parse_num(n, "F numerator")? as u32;
                let d: u32 = parse_num(d, "F denominator")? as u32;
                if n == 0 || d == 0 {
                    return Err(Error::Parse("frame rate must be positive".into()));
                }
                fps = Some((n, d));
            }
            'C' => {
                cs = match rest {
                    "mono" => ColorSpace::Mono,
                    "420" | "420jpeg" | "420mpeg2" | "420paldv" => ColorSpace::C420,
                    other => {
                        return Err(Error::Parse(format!(
                            "unsupported colorspace C{other} (only mono and 8-bit 4:2:0)"
                        )))
                    }
                };
            }
            // Interlacing, aspect and X extensions do not affect the luma plane.
            'I' | 'A' | 'X' => {}
            _ => return Err(Error::Parse(format!("unknown header token `{tok}`"))),
        }
    }
    let w = w.ok_or_else(|| Error::Parse("header lacks W".into()))?;
    let h = h.ok_or_else(|| Error::Parse("header lacks H".into()))?;
    let (n, d) = fps.ok_or_else(|| Error::Parse("header lacks F".into()))?;
    Ok((w, h, n, d, cs))
}

fn parse_num(s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad {what} value `{s}`")))
}
