#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spacing-clust"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

pub fn write_points(dir: &Path, name: &str, points: &[Vec<f64>]) -> PathBuf {
    let mut text = String::new();
    for p in points {
        let row: Vec<String> = p.iter().map(f64::to_string).collect();
        let _ = writeln!(text, "{}", row.join(","));
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Gaussian blobs in the plane with the given sizes, centers on a circle of
/// radius `spread`, unit standard deviation.
pub fn blobs(sizes: &[usize], spread: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut points = Vec::new();
    for (c, &size) in sizes.iter().enumerate() {
        let angle = std::f64::consts::TAU * c as f64 / sizes.len() as f64;
        let (cx, cy) = (spread * angle.cos(), spread * angle.sin());
        for _ in 0..size {
            points.push(vec![cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)]);
        }
    }
    points
}

pub fn chaining_example() -> Vec<Vec<f64>> {
    vec![vec![100.0, 1.0], vec![100.0, 2.0], vec![200.0, 1.0], vec![200.0, 2.0], vec![100.0, 3.0]]
}

/// Isotropic Gaussian blobs, unit standard deviation, centers drawn uniformly
/// from `[-10, 10]²`.
pub fn make_blobs(sizes: &[usize], seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let centers: Vec<(f64, f64)> =
        sizes.iter().map(|_| (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0))).collect();
    let mut points = Vec::new();
    for (&(cx, cy), &size) in centers.iter().zip(sizes) {
        for _ in 0..size {
            points.push(vec![cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)]);
        }
    }
    points
}
