//! Grayscale frames and the two per-frame quality metrics.

use super::{AnalysisConfig, AnalysisError};

/// Row-major grayscale pixel grid.
///
/// The value scale is up to the caller: [`compute_luminance`] expects
/// `[0, 1]`, [`compute_focus_score`] expects `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, AnalysisError> {
        if pixels.len() != width * height {
            return Err(AnalysisError::InvalidFrame(format!(
                "expected {}x{} = {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// 8-bit samples kept on the `[0, 255]` scale.
    pub fn from_u8(width: usize, height: usize, samples: &[u8]) -> Result<Self, AnalysisError> {
        Self::new(width, height, samples.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Same grid with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|v| v * factor).collect(),
        }
    }

    /// Area-average resample to at most `target_w × target_h`.
    ///
    /// Each output pixel is the coverage-weighted mean of the source pixels
    /// its footprint overlaps. Axes already at or below the target are left
    /// alone, so the grid is never upsampled.
    pub fn downsample_area(&self, target_w: usize, target_h: usize) -> Self {
        let out_w = target_w.clamp(1, self.width.max(1));
        let out_h = target_h.clamp(1, self.height.max(1));
        if out_w == self.width && out_h == self.height {
            return self.clone();
        }
        let col_weights = area_weights(self.width, out_w);
        let row_weights = area_weights(self.height, out_h);

        // Horizontal pass: height × out_w.
        let mut horiz = vec![0.0; self.height * out_w];
        for y in 0..self.height {
            let row = &self.pixels[y * self.width..(y + 1) * self.width];
            for (ox, taps) in col_weights.iter().enumerate() {
                horiz[y * out_w + ox] = taps.iter().map(|&(sx, w)| row[sx] * w).sum();
            }
        }
        // Vertical pass.
        let mut pixels = vec![0.0; out_w * out_h];
        for (oy, taps) in row_weights.iter().enumerate() {
            for ox in 0..out_w {
                pixels[oy * out_w + ox] = taps.iter().map(|&(sy, w)| horiz[sy * out_w + ox] * w).sum();
            }
        }
        Self {
            width: out_w,
            height: out_h,
            pixels,
        }
    }
}

/// For each output cell, the source indices it overlaps and their normalized
/// coverage weights.
fn area_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let lo = o as f64 * scale;
            let hi = (o + 1) as f64 * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src);
            (first..last)
                .filter_map(|s| {
                    let overlap = (hi.min((s + 1) as f64) - lo.max(s as f64)).max(0.0);
                    (overlap > 0.0).then_some((s, overlap / scale))
                })
                .collect()
        })
        .collect()
}

/// Mean luminance of a `[0, 1]` frame after area-downsampling to
/// `config.downsample_size`.
pub fn compute_luminance(frame: &GrayFrame, config: &AnalysisConfig) -> Result<f64, AnalysisError> {
    if frame.is_empty() {
        return Err(AnalysisError::InvalidFrame("empty frame".into()));
    }
    let [w, h] = config.downsample_size;
    let small = frame.downsample_area(w, h);
    let n = small.pixels.len() as f64;
    Ok(small.pixels.iter().sum::<f64>() / n)
}

/// Population variance of the 4-neighbour Laplacian over interior pixels of a
/// `[0, 255]` frame.
pub fn compute_focus_score(frame: &GrayFrame) -> Result<f64, AnalysisError> {
    let (w, h) = (frame.width, frame.height);
    if w < 3 || h < 3 {
        return Err(AnalysisError::InvalidFrame(format!(
            "focus score needs at least 3x3 pixels, got {w}x{h}"
        )));
    }
    let mut responses = Vec::with_capacity((w - 2) * (h - 2));
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let lap = frame.get(x, y - 1) + frame.get(x - 1, y) + frame.get(x + 1, y) + frame.get(x, y + 1)
                - 4.0 * frame.get(x, y);
            responses.push(lap);
        }
    }
    let n = responses.len() as f64;
    let mean = responses.iter().sum::<f64>() / n;
    Ok(responses.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n)
}
