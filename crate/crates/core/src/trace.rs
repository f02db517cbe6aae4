//! Frame-size traces and the flows built on top of them.
//!
//! Time is discretized in frame slots of `1 / fps` seconds. Within a slot a
//! flow sends exactly one frame, so its rate is `size * 8 * fps` bits/s and
//! constant for the whole slot.
//!
//! Trace files are plain text, one frame per line, either `<size_bytes>` or
//! `<index> <type> <size_bytes>` where `<type>` is `I`, `P`, `B` or anything
//! else (parsed as unknown). Lines starting with `#` are comments, except the
//! directives `# fps=<rate>`, `# class=<news|sports|movie|demo|unknown>` and
//! `# id=<label>`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameType {
    I,
    P,
    B,
    Unknown,
}

impl FrameType {
    fn from_token(token: &str) -> Self {
        match token {
            "I" | "i" => FrameType::I,
            "P" | "p" => FrameType::P,
            "B" | "b" => FrameType::B,
            _ => FrameType::Unknown,
        }
    }

    fn as_char(self) -> char {
        match self {
            FrameType::I => 'I',
            FrameType::P => 'P',
            FrameType::B => 'B',
            FrameType::Unknown => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRecord {
    pub index: u64,
    pub frame_type: FrameType,
    /// Encoded frame size in bytes.
    pub size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContentClass {
    News,
    Sports,
    Movie,
    Demo,
    Unknown,
}

impl ContentClass {
    pub const ALL: [ContentClass; 5] = [
        ContentClass::News,
        ContentClass::Sports,
        ContentClass::Movie,
        ContentClass::Demo,
        ContentClass::Unknown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ContentClass::News => "news",
            ContentClass::Sports => "sports",
            ContentClass::Movie => "movie",
            ContentClass::Demo => "demo",
            ContentClass::Unknown => "unknown",
        }
    }
}

impl fmt::Display for ContentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ContentClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        ContentClass::ALL
            .into_iter()
            .find(|c| c.name() == lower)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown content class {s:?}")))
    }
}

/// A parsed frame-size sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoTrace {
    id: String,
    frames: Vec<FrameRecord>,
    fps: f64,
    content_class: ContentClass,
}

impl VideoTrace {
    pub fn new(id: impl Into<String>, frames: Vec<FrameRecord>, fps: f64, content_class: ContentClass) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidFps(fps));
        }
        if let Some(pos) = frames.windows(2).position(|w| w[1].index <= w[0].index) {
            return Err(Error::MalformedLine {
                line: pos + 2,
                content: frames[pos + 1].index.to_string(),
                reason: "frame index not strictly increasing",
            });
        }
        Ok(Self {
            id: id.into(),
            frames,
            fps,
            content_class,
        })
    }

    /// Builds a trace from bare sizes, numbering frames from zero.
    pub fn from_sizes(
        id: impl Into<String>,
        sizes: impl IntoIterator<Item = u64>,
        fps: f64,
        content_class: ContentClass,
    ) -> Result<Self> {
        let frames = sizes
            .into_iter()
            .enumerate()
            .map(|(k, size)| FrameRecord {
                index: k as u64,
                frame_type: FrameType::Unknown,
                size,
            })
            .collect();
        Self::new(id, frames, fps, content_class)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn frames(&self) -> &[FrameRecord] {
        &self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn content_class(&self) -> ContentClass {
        self.content_class
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Bits per second carried by one byte per slot.
    pub fn bits_per_byte_slot(&self) -> f64 {
        8.0 * self.fps
    }

    pub fn size_at(&self, frame: usize) -> u64 {
        self.frames[frame].size
    }

    /// Rate of frame `k` in bits/s.
    pub fn frame_rate(&self, frame: usize) -> f64 {
        self.frames[frame].size as f64 * self.bits_per_byte_slot()
    }

    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.frame_rate(k))
    }

    pub fn with_class(mut self, class: ContentClass) -> Self {
        self.content_class = class;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Parses the text trace format. `id` labels the result.
    pub fn parse_str(id: impl Into<String>, text: &str, fps_override: Option<f64>) -> Result<Self> {
        let mut id = id.into();
        let mut fps_header = None;
        let mut class = ContentClass::Unknown;
        let mut frames = Vec::new();

        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.trim().split_once('=') {
                    let value = value.trim();
                    match key.trim() {
                        "fps" => {
                            let fps = value.parse::<f64>().map_err(|_| Error::MalformedLine {
                                line: line_no,
                                content: raw.to_string(),
                                reason: "fps directive is not a number",
                            })?;
                            fps_header = Some(fps);
                        }
                        "class" => {
                            class = value.parse().map_err(|_| Error::MalformedLine {
                                line: line_no,
                                content: raw.to_string(),
                                reason: "unknown content class",
                            })?;
                        }
                        "id" => id = value.to_string(),
                        _ => {}
                    }
                }
                continue;
            }

            let fields: Vec<&str> = line.split_whitespace().collect();
            let malformed = |reason| Error::MalformedLine {
                line: line_no,
                content: raw.to_string(),
                reason,
            };
            let record = match fields.as_slice() {
                [size] => FrameRecord {
                    index: frames.len() as u64,
                    frame_type: FrameType::Unknown,
                    size: size
                        .parse()
                        .map_err(|_| malformed("frame size is not a non-negative integer"))?,
                },
                [index, kind, size] => FrameRecord {
                    index: index
                        .parse()
                        .map_err(|_| malformed("frame index is not a non-negative integer"))?,
                    frame_type: FrameType::from_token(kind),
                    size: size
                        .parse()
                        .map_err(|_| malformed("frame size is not a non-negative integer"))?,
                },
                _ => return Err(malformed("expected `<size>` or `<index> <type> <size>`")),
            };
            if let Some(prev) = frames.last() {
                let prev: &FrameRecord = prev;
                if record.index <= prev.index {
                    return Err(malformed("frame index not strictly increasing"));
                }
            }
            frames.push(record);
        }

        if frames.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let fps = fps_header.or(fps_override).ok_or(Error::MissingFps)?;
        Self::new(id, frames, fps, class)
    }

    /// Serializes to the three-column text format with all directives, so
    /// that `parse_str` reproduces an identical trace.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.frames.len() * 12 + 64);
        out.push_str(&format!("# id={}\n", self.id));
        out.push_str(&format!("# fps={}\n", self.fps));
        out.push_str(&format!("# class={}\n", self.content_class));
        for f in &self.frames {
            out.push_str(&format!("{} {} {}\n", f.index, f.frame_type.as_char(), f.size));
        }
        out
    }
}

/// Reads and parses a trace file; the id defaults to the file stem.
pub fn parse_trace_file(path: impl AsRef<Path>, fps_override: Option<f64>) -> Result<VideoTrace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    VideoTrace::parse_str(id, &text, fps_override)
}

/// Loads every `*.trace` / `*.txt` file of a directory, sorted by file name.
pub fn load_trace_dir(dir: impl AsRef<Path>, fps_override: Option<f64>) -> Result<Vec<VideoTrace>> {
    let dir = dir.as_ref();
    let io_err = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let is_trace = matches!(path.extension().and_then(|e| e.to_str()), Some("trace") | Some("txt"));
        if path.is_file() && is_trace {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    paths.iter().map(|p| parse_trace_file(p, fps_override)).collect()
}

/// A flow replaying `trace` from `start_offset`, wrapping at the trace end.
#[derive(Debug, Clone)]
pub struct FlowInstance {
    trace: Arc<VideoTrace>,
    start_offset: usize,
    flow_id: u64,
}

impl FlowInstance {
    /// `start_offset` is reduced modulo the trace length.
    pub fn new(trace: Arc<VideoTrace>, start_offset: usize, flow_id: u64) -> Self {
        let start_offset = start_offset % trace.len();
        Self {
            trace,
            start_offset,
            flow_id,
        }
    }

    pub fn trace(&self) -> &VideoTrace {
        &self.trace
    }

    pub fn start_offset(&self) -> usize {
        self.start_offset
    }

    pub fn flow_id(&self) -> u64 {
        self.flow_id
    }

    pub fn fps(&self) -> f64 {
        self.trace.fps
    }

    fn frame_at(&self, slot: u64) -> usize {
        let len = self.trace.len() as u64;
        ((self.start_offset as u64 + slot % len) % len) as usize
    }

    /// Bytes sent in `slot`.
    pub fn bytes_at(&self, slot: u64) -> u64 {
        self.trace.size_at(self.frame_at(slot))
    }

    /// x_i(l, t): rate of this flow during `slot`, in bits/s.
    pub fn rate_at(&self, slot: u64) -> f64 {
        self.bytes_at(slot) as f64 * self.trace.bits_per_byte_slot()
    }
}

pub fn flow_rate_at(flow: &FlowInstance, slot: u64) -> f64 {
    flow.rate_at(slot)
}

/// Declared per-flow rate range `[min_rate, max_rate]` in bits/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRateBounds {
    min_rate: f64,
    max_rate: f64,
}

impl FlowRateBounds {
    pub fn new(min_rate: f64, max_rate: f64) -> Result<Self> {
        let ok = min_rate.is_finite() && max_rate.is_finite() && min_rate >= 0.0 && min_rate <= max_rate;
        if !ok {
            return Err(Error::InvalidBounds {
                min: min_rate,
                max: max_rate,
            });
        }
        Ok(Self { min_rate, max_rate })
    }

    pub fn min_rate(&self) -> f64 {
        self.min_rate
    }

    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    pub fn width(&self) -> f64 {
        self.max_rate - self.min_rate
    }

    pub fn contains(&self, rate: f64) -> bool {
        rate >= self.min_rate && rate <= self.max_rate
    }
}
