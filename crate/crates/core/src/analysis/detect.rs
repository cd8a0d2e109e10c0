//! Per-frame quality flags and their aggregation into error segments.

use std::collections::BTreeSet;

use crate::labels::{jaccard, label_set};

use super::{AnalysisConfig, ErrorKind, ErrorSegment, FrameRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QualityFlags {
    pub is_dark: bool,
    pub is_blurry: bool,
}

/// All three per-frame flags, indexed by frame index.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameFlags {
    pub is_dark: bool,
    pub is_blurry: bool,
    pub is_moving: bool,
}

/// Strict thresholding: a value equal to the threshold is clean.
pub fn classify_frames(records: &[FrameRecord], config: &AnalysisConfig) -> Vec<QualityFlags> {
    records
        .iter()
        .map(|r| QualityFlags {
            is_dark: r.mean_luminance < config.dark_threshold,
            is_blurry: r.focus_score < config.blur_threshold,
        })
        .collect()
}

/// Flags frames whose surrounding object sets change too often.
///
/// For frame `i` the window covers the `motion_window` consecutive pairs
/// `(f, f+1)` for `f` in `i - w/2 ..= i - w/2 + w - 1`, clipped to the pairs
/// that exist. The frame is moving when the mean pair Jaccard is below
/// `motion_similarity_threshold`. A frame with no pairs in range is never
/// moving.
pub fn detect_motion(records: &[FrameRecord], config: &AnalysisConfig) -> Vec<bool> {
    let n = records.len();
    if n < 2 || config.motion_window == 0 {
        return vec![false; n];
    }
    let sets: Vec<BTreeSet<&str>> = records.iter().map(label_set).collect();
    let pair_sim: Vec<f64> = sets.windows(2).map(|w| jaccard(&w[0], &w[1])).collect();
    let window = config.motion_window as isize;
    let last_pair = pair_sim.len() as isize - 1;

    (0..n as isize)
        .map(|i| {
            let lo = (i - window / 2).max(0);
            let hi = (i - window / 2 + window - 1).min(last_pair);
            if lo > hi {
                return false;
            }
            let slice = &pair_sim[lo as usize..=hi as usize];
            let mean = slice.iter().sum::<f64>() / slice.len() as f64;
            mean < config.motion_similarity_threshold
        })
        .collect()
}

/// Merges the three flag streams into one per-frame stream.
pub fn combine_flags(quality: &[QualityFlags], moving: &[bool]) -> Vec<FrameFlags> {
    quality
        .iter()
        .zip(moving)
        .map(|(q, &m)| FrameFlags {
            is_dark: q.is_dark,
            is_blurry: q.is_blurry,
            is_moving: m,
        })
        .collect()
}

/// Maximal runs `[first, last]` of `true` with at least `min_len` entries.
fn runs(flags: impl Iterator<Item = bool>, min_len: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    let mut len = 0;
    for (i, f) in flags.enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s >= min_len {
                    out.push((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
        len = i + 1;
    }
    if let Some(s) = start {
        if len - s >= min_len {
            out.push((s, len - 1));
        }
    }
    out
}

/// Turns per-frame flags (position = frame index) into error segments.
///
/// * Dark: each maximal run of at least `min_error_frames` dark frames.
/// * Blur / CameraMoving: each maximal run of at least `min_error_frames`
///   blurry frames. The run is emitted as `CameraMoving` when it overlaps a
///   run of at least `min_error_frames` moving frames, otherwise as `Blur`.
///   Motion runs without blur are not errors on their own.
///
/// A run over frames `a..=b` spans `[a / rate, (b + 1) / rate)`. Output is
/// sorted by start time, then kind.
pub fn build_error_segments(flags: &[FrameFlags], config: &AnalysisConfig) -> Vec<ErrorSegment> {
    let min = config.min_error_frames.max(1);
    let rate = config.sample_rate;
    let span = |(a, b): (usize, usize)| (a as f64 / rate, (b + 1) as f64 / rate);

    let mut out: Vec<ErrorSegment> = runs(flags.iter().map(|f| f.is_dark), min)
        .into_iter()
        .map(|r| {
            let (start, end) = span(r);
            ErrorSegment {
                kind: ErrorKind::Dark,
                start,
                end,
            }
        })
        .collect();

    let moving = runs(flags.iter().map(|f| f.is_moving), min);
    for (a, b) in runs(flags.iter().map(|f| f.is_blurry), min) {
        let co_moving = moving.iter().any(|&(ma, mb)| ma <= b && a <= mb);
        let (start, end) = span((a, b));
        out.push(ErrorSegment {
            kind: if co_moving {
                ErrorKind::CameraMoving
            } else {
                ErrorKind::Blur
            },
            start,
            end,
        });
    }
    out.sort_by(|x, y| x.start.total_cmp(&y.start).then(x.kind.cmp(&y.kind)));
    out
}
