//! Frame sampling, per-frame quality metrics and visual-error detection.
//!
//! Each sampled frame gets a mean luminance (normalized to `[0, 1]`) and a
//! focus score (variance of the Laplacian on the 8-bit scale). Runs of dark,
//! blurry or camera-moving frames become [`ErrorSegment`]s.

pub mod detect;
pub mod frame;
pub mod provider;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use detect::{
    build_error_segments, classify_frames, combine_flags, detect_motion, FrameFlags, QualityFlags,
};
pub use frame::{compute_focus_score, compute_luminance, GrayFrame};
pub use provider::{Detections, FixtureFrameProvider, FrameProvider, MemoryFrameProvider};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("frame {0} is missing")]
    MissingFrame(usize),
    #[error("cannot decode {0}: {1}")]
    Decode(PathBuf, String),
    #[error("malformed detections: {0}")]
    Detections(String),
    #[error("invalid analysis config: {0}")]
    InvalidConfig(String),
    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}

/// Bounding box in pixels of the original frame, serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Intersection with the `[0, w) × [0, h)` frame.
    pub fn clipped(&self, frame_w: f64, frame_h: f64) -> Self {
        let x0 = self.x.clamp(0.0, frame_w);
        let y0 = self.y.clamp(0.0, frame_h);
        let x1 = (self.x + self.width).clamp(0.0, frame_w);
        let y1 = (self.y + self.height).clamp(0.0, frame_h);
        Self {
            x: x0,
            y: y0,
            width: (x1 - x0).max(0.0),
            height: (y1 - y0).max(0.0),
        }
    }
}

impl From<[f64; 4]> for BoundingBox {
    fn from([x, y, width, height]: [f64; 4]) -> Self {
        Self { x, y, width, height }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x, b.y, b.width, b.height]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDetection {
    pub label: String,
    pub confidence: f64,
    pub bbox: BoundingBox,
}

impl ObjectDetection {
    pub fn new(label: &str, confidence: f64, bbox: [f64; 4]) -> Self {
        Self {
            label: label.to_owned(),
            confidence,
            bbox: bbox.into(),
        }
    }
}

/// Measurements for one sampled frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: usize,
    pub time: f64,
    pub mean_luminance: f64,
    pub focus_score: f64,
    #[serde(default)]
    pub objects: Vec<ObjectDetection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Dark,
    Blur,
    CameraMoving,
}

impl ErrorKind {
    /// Wording shown to the editor.
    pub fn label(self) -> &'static str {
        match self {
            ErrorKind::Dark => "Bad lighting",
            ErrorKind::Blur => "Camera blur",
            ErrorKind::CameraMoving => "Camera moving",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Dark => "dark",
            ErrorKind::Blur => "blur",
            ErrorKind::CameraMoving => "camera moving",
        }
    }
}

/// Half-open `[start, end)` span of footage with a visual error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSegment {
    pub kind: ErrorKind,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Sampled frames per second of footage.
    pub sample_rate: f64,
    pub dark_threshold: f64,
    pub blur_threshold: f64,
    pub min_error_frames: usize,
    pub motion_window: usize,
    pub motion_similarity_threshold: f64,
    /// `[width, height]` used for luminance.
    pub downsample_size: [usize; 2],
    /// Detections at or below this confidence are dropped.
    pub min_confidence: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            sample_rate: 1.0,
            dark_threshold: 0.25,
            blur_threshold: 5.0,
            min_error_frames: 4,
            motion_window: 4,
            motion_similarity_threshold: 0.5,
            downsample_size: [100, 100],
            min_confidence: 0.3,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let positive = [
            ("sample_rate", self.sample_rate),
            ("dark_threshold", self.dark_threshold),
            ("blur_threshold", self.blur_threshold),
            ("motion_similarity_threshold", self.motion_similarity_threshold),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(AnalysisError::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.min_error_frames == 0 {
            return Err(AnalysisError::InvalidConfig("min_error_frames must be >= 1".into()));
        }
        if self.motion_window == 0 {
            return Err(AnalysisError::InvalidConfig("motion_window must be >= 1".into()));
        }
        if self.downsample_size.contains(&0) {
            return Err(AnalysisError::InvalidConfig("downsample_size must be non-zero".into()));
        }
        if !(0.0..1.0).contains(&self.min_confidence) {
            return Err(AnalysisError::InvalidConfig("min_confidence must be in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn frame_time(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate
    }
}

/// Measures every frame of `provider` and attaches its detections.
///
/// Frames are processed in parallel; the result is ordered by index and does
/// not depend on scheduling.
pub fn analyze_frames(
    provider: &dyn FrameProvider,
    detections: &Detections,
    config: &AnalysisConfig,
) -> Result<Vec<FrameRecord>, AnalysisError> {
    config.validate()?;
    (0..provider.len())
        .into_par_iter()
        .map(|index| {
            let frame = provider.frame(index)?;
            let focus_score = compute_focus_score(&frame)?;
            let mean_luminance = compute_luminance(&frame.scaled(1.0 / 255.0), config)?;
            Ok(FrameRecord {
                index,
                time: config.frame_time(index),
                mean_luminance,
                focus_score,
                objects: detections.for_frame(
                    index,
                    config.min_confidence,
                    frame.width() as f64,
                    frame.height() as f64,
                ),
            })
        })
        .collect()
}

/// Full per-frame flags for already-measured records.
pub fn frame_flags(records: &[FrameRecord], config: &AnalysisConfig) -> Vec<FrameFlags> {
    combine_flags(&classify_frames(records, config), &detect_motion(records, config))
}

/// Records → error segments in one step.
pub fn detect_errors(records: &[FrameRecord], config: &AnalysisConfig) -> Vec<ErrorSegment> {
    build_error_segments(&frame_flags(records, config), config)
}
