//! Frame sources and detection ingestion.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use super::frame::GrayFrame;
use super::{AnalysisError, ObjectDetection};

/// Anything that can hand out sampled frames by index.
///
/// Frames come back on the 8-bit `[0, 255]` scale.
pub trait FrameProvider: Sync {
    fn len(&self) -> usize;

    fn frame(&self, index: usize) -> Result<GrayFrame, AnalysisError>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads `NNNNNN.pgm` (or `.png`) files from a directory. File stems are the
/// frame indices and must run contiguously from zero.
#[derive(Debug, Clone)]
pub struct FixtureFrameProvider {
    files: Vec<PathBuf>,
}

impl FixtureFrameProvider {
    pub fn open(dir: &Path) -> Result<Self, AnalysisError> {
        let entries = fs::read_dir(dir).map_err(|e| AnalysisError::Io(dir.to_path_buf(), e))?;
        let mut indexed = BTreeMap::new();
        for entry in entries {
            let path = entry.map_err(|e| AnalysisError::Io(dir.to_path_buf(), e))?.path();
            let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
            if !matches!(ext.as_deref(), Some("pgm") | Some("png")) {
                continue;
            }
            let Some(index) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(|s| s.parse::<usize>().ok())
            else {
                continue;
            };
            if let Some(prev) = indexed.insert(index, path.clone()) {
                return Err(AnalysisError::InvalidFrame(format!(
                    "duplicate frame index {index}: {} and {}",
                    prev.display(),
                    path.display()
                )));
            }
        }
        for (expected, &index) in indexed.keys().enumerate() {
            if expected != index {
                return Err(AnalysisError::MissingFrame(expected));
            }
        }
        Ok(Self {
            files: indexed.into_values().collect(),
        })
    }
}

impl FrameProvider for FixtureFrameProvider {
    fn len(&self) -> usize {
        self.files.len()
    }

    fn frame(&self, index: usize) -> Result<GrayFrame, AnalysisError> {
        let path = self.files.get(index).ok_or(AnalysisError::MissingFrame(index))?;
        let img = image::open(path)
            .map_err(|e| AnalysisError::Decode(path.clone(), e.to_string()))?
            .into_luma8();
        GrayFrame::from_u8(img.width() as usize, img.height() as usize, img.as_raw())
    }
}

/// In-memory provider, mostly for tests and the C API.
#[derive(Debug, Clone, Default)]
pub struct MemoryFrameProvider {
    pub frames: Vec<GrayFrame>,
}

impl FrameProvider for MemoryFrameProvider {
    fn len(&self) -> usize {
        self.frames.len()
    }

    fn frame(&self, index: usize) -> Result<GrayFrame, AnalysisError> {
        self.frames.get(index).cloned().ok_or(AnalysisError::MissingFrame(index))
    }
}

/// Object detections per frame index, as read from `detections.json`:
/// `{ "<frame_index>": [{label, confidence, bbox: [x, y, w, h]}] }`.
#[derive(Debug, Clone, Default)]
pub struct Detections {
    by_frame: HashMap<usize, Vec<ObjectDetection>>,
}

impl Detections {
    pub fn from_json(text: &str) -> Result<Self, AnalysisError> {
        let raw: BTreeMap<String, Vec<ObjectDetection>> =
            serde_json::from_str(text).map_err(|e| AnalysisError::Detections(e.to_string()))?;
        let mut by_frame = HashMap::with_capacity(raw.len());
        for (key, dets) in raw {
            let index = key
                .parse::<usize>()
                .map_err(|_| AnalysisError::Detections(format!("frame key {key:?} is not an index")))?;
            by_frame.insert(index, dets);
        }
        Ok(Self { by_frame })
    }

    pub fn insert(&mut self, index: usize, dets: Vec<ObjectDetection>) {
        self.by_frame.insert(index, dets);
    }

    /// Detections of one frame above `min_confidence`, clipped to the frame.
    pub fn for_frame(&self, index: usize, min_confidence: f64, width: f64, height: f64) -> Vec<ObjectDetection> {
        self.by_frame
            .get(&index)
            .map(|dets| {
                dets.iter()
                    .filter(|d| d.confidence > min_confidence)
                    .map(|d| ObjectDetection {
                        bbox: d.bbox.clipped(width, height),
                        ..d.clone()
                    })
                    .collect()
            })
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_pgm_directory() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..3u8 {
            let img = image::GrayImage::from_pixel(4, 3, image::Luma([i * 50]));
            img.save(dir.path().join(format!("{i:06}.pgm"))).unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let provider = FixtureFrameProvider::open(dir.path()).unwrap();
        assert_eq!(provider.len(), 3);
        let f = provider.frame(2).unwrap();
        assert_eq!((f.width(), f.height()), (4, 3));
        assert!(f.pixels().iter().all(|&v| v == 100.0));
    }

    #[test]
    fn gap_in_indices_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        for i in [0, 2] {
            image::GrayImage::new(3, 3).save(dir.path().join(format!("{i:06}.pgm"))).unwrap();
        }
        assert!(matches!(FixtureFrameProvider::open(dir.path()), Err(AnalysisError::MissingFrame(1))));
    }

    #[test]
    fn detections_filter_low_confidence() {
        let d = Detections::from_json(
            r#"{"0": [{"label": "cup", "confidence": 0.3, "bbox": [0, 0, 5, 5]},
                      {"label": "plate", "confidence": 0.31, "bbox": [90, 90, 50, 50]}]}"#,
        )
        .unwrap();
        let got = d.for_frame(0, 0.3, 100.0, 100.0);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].label, "plate");
        assert_eq!(got[0].bbox.width, 10.0);
        assert!(d.for_frame(7, 0.3, 100.0, 100.0).is_empty());
    }

    #[test]
    fn bad_detection_key() {
        assert!(Detections::from_json(r#"{"x": []}"#).is_err());
    }
}
