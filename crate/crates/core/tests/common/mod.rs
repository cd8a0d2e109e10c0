//! Synthetic 11-minute cooking project shared by the integration tests.
//!
//! Layout, one frame per second:
//!
//! * scenes by object set: 0..150 mixing, 150..300 pantry, 300..400
//!   microwave, 400..660 oven
//! * frames 100..110 dark, 200..206 smooth (blur), 450..458 smooth while the
//!   object set flickers (camera moving), 500..503 smooth but too short
//! * "microwave" is detected in six separate runs and spoken once
//! * a long silence inside the microwave scene

#![allow(dead_code)]

use std::fs;
use std::path::Path;

use avse_core::analysis::ObjectDetection;
use avse_core::transcript::{AlignedTranscript, WordToken};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FRAMES: usize = 660;
pub const DURATION: f64 = 660.0;
pub const WIDTH: usize = 120;
pub const HEIGHT: usize = 90;
pub const SCENE_STARTS: [f64; 4] = [0.0, 150.0, 300.0, 400.0];
pub const MICROWAVE_RUNS: [(usize, usize); 6] = [(300, 400), (420, 426), (440, 446), (460, 462), (600, 611), (630, 633)];
pub const SILENCE: (f64, f64) = (318.0, 346.0);

const CAPTIONS: [&str; 4] = [
    "A person mixing flour in a bowl",
    "A pantry shelf with cereal and snacks",
    "A microwave with a plate inside",
    "An oven with a baking tray",
];

const SENTENCES: [&str; 8] = [
    "First of all, we need some flour and two eggs.",
    "Then I mix everything together in the big glass bowl.",
    "Let me check the pantry shelf for a cereal box.",
    "These snacks are great for a quick afternoon energy boost.",
    "The plate should be warm before we serve the food.",
    "Now the oven tray goes in at two hundred degrees.",
    "We wait a few minutes while the dough rises slowly.",
    "Remember to wash your hands, and keep the counter clean.",
];

const MICROWAVE_SENTENCE: &str = "Now I carefully place the plate inside the microwave, okay.";

fn scene_of(frame: usize) -> usize {
    SCENE_STARTS.iter().rposition(|&s| s <= frame as f64).unwrap()
}

fn is_smooth(frame: usize) -> bool {
    (200..206).contains(&frame) || (450..458).contains(&frame) || (500..503).contains(&frame)
}

fn pixels(frame: usize) -> Vec<u8> {
    if is_smooth(frame) {
        // Affine ramp: zero Laplacian everywhere.
        return (0..WIDTH * HEIGHT)
            .map(|k| (20 + (k % WIDTH) + (k / WIDTH)) as u8)
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(frame as u64);
    let dark = (100..110).contains(&frame);
    (0..WIDTH * HEIGHT)
        .map(|_| {
            let v: u8 = rng.gen_range(30..=225);
            if dark {
                v / 10
            } else {
                v
            }
        })
        .collect()
}

fn det(label: &str, w: f64, h: f64) -> ObjectDetection {
    ObjectDetection::new(label, 0.9, [2.0, 2.0, w, h])
}

pub fn objects(frame: usize) -> Vec<ObjectDetection> {
    let mut out = match scene_of(frame) {
        0 => vec![det("person", 60.0, 80.0), det("bowl", 30.0, 20.0), det("flour", 10.0, 15.0)],
        1 => vec![
            det("shelf", 100.0, 40.0),
            det("cereal box", 20.0, 30.0),
            det("snacks", 15.0, 10.0),
            det("pantry", 110.0, 85.0),
        ],
        2 => vec![det("microwave", 70.0, 50.0), det("plate", 25.0, 25.0)],
        _ if (450..458).contains(&frame) => {
            let flicker = if frame % 2 == 0 { "hand" } else { "pan" };
            vec![det("oven", 90.0, 70.0), det(flicker, 20.0, 20.0)]
        }
        _ => vec![det("oven", 90.0, 70.0), det("tray", 40.0, 10.0)],
    };
    if frame >= 400 && MICROWAVE_RUNS.iter().any(|&(a, b)| (a..b).contains(&frame)) {
        out.push(det("microwave", 30.0, 30.0));
    }
    if (10..20).contains(&frame) {
        out.push(ObjectDetection::new("cat", 0.2, [0.0, 0.0, 5.0, 5.0]));
    }
    out
}

/// Sentences laid out per scene so that no line or gap straddles a scene
/// boundary; sentences overlapping [`SILENCE`] are dropped.
pub fn transcript() -> AlignedTranscript {
    let mut words = Vec::new();
    let mut counter = 0;
    let ends: Vec<f64> = SCENE_STARTS[1..].iter().copied().chain([DURATION]).collect();
    for (scene, (&s, &e)) in SCENE_STARTS.iter().zip(&ends).enumerate() {
        let len = e - s;
        let n = ((len - 7.4) / 7.5).floor() as usize + 1;
        let step = (len - 7.4) / (n - 1) as f64;
        for j in 0..n {
            let start = s + 1.0 + step * j as f64;
            let end = start + 4.9;
            if start < SILENCE.1 && SILENCE.0 < end {
                continue;
            }
            let sentence = if scene == 2 && j == 1 {
                MICROWAVE_SENTENCE
            } else {
                counter += 1;
                SENTENCES[counter % SENTENCES.len()]
            };
            for (k, w) in sentence.split_whitespace().enumerate() {
                let t = start + 0.5 * k as f64;
                words.push(WordToken::new(w, t, t + 0.4));
            }
        }
    }
    AlignedTranscript {
        source_duration: DURATION,
        words,
    }
}

pub fn write_pgm(path: &Path, width: usize, height: usize, data: &[u8]) {
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(data);
    fs::write(path, bytes).unwrap();
}

/// Writes the full project (frames, detections, transcript, captions) into
/// `root`.
pub fn write_project(root: &Path) {
    let frames = root.join("frames");
    fs::create_dir_all(&frames).unwrap();
    let mut detections = serde_json::Map::new();
    let mut captions = serde_json::Map::new();
    for i in 0..FRAMES {
        write_pgm(&frames.join(format!("{i:06}.pgm")), WIDTH, HEIGHT, &pixels(i));
        detections.insert(i.to_string(), serde_json::to_value(objects(i)).unwrap());
        captions.insert(i.to_string(), CAPTIONS[scene_of(i)].into());
    }
    fs::write(root.join("detections.json"), serde_json::Value::Object(detections).to_string()).unwrap();
    fs::write(root.join("captions.json"), serde_json::Value::Object(captions).to_string()).unwrap();
    fs::write(root.join("transcript.json"), transcript().to_json()).unwrap();
}

/// A fresh project in a temporary directory.
pub fn project() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_project(dir.path());
    dir
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let dest = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &dest);
        } else {
            fs::copy(entry.path(), dest).unwrap();
        }
    }
}

/// A fresh copy of the fixture with `analysis.json` and `script.json`
/// already written. The analyzed template is built once per test binary.
pub fn scripted_project() -> tempfile::TempDir {
    static TEMPLATE: std::sync::OnceLock<tempfile::TempDir> = std::sync::OnceLock::new();
    let template = TEMPLATE.get_or_init(|| {
        let dir = project();
        let p = avse_core::project::Project::open(dir.path(), None).unwrap();
        p.analyze().unwrap();
        p.script().unwrap();
        dir
    });
    let dir = tempfile::tempdir().unwrap();
    copy_dir(template.path(), dir.path());
    dir
}
