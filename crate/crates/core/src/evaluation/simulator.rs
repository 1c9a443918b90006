//! Synthetic cameras: a smooth scene passes through a per-camera sensor gain
//! (PRNU), an RGGB Bayer mosaic, a demosaicing algorithm, additive noise and
//! in-camera JPEG compression.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::manifest::{DatasetManifest, ManifestEntry, Split};
use crate::error::{Error, Result};
use crate::imaging::{decode_image, jpeg_encode, mirror_index, to_u8, write_png, RasterImage};
use crate::manipulation::{apply_manipulation, keyed_rng, randomize_training_set};

pub const MIN_CAPTURE_SIZE: usize = 64;
pub const NOISE_SIGMA: f64 = 2.0;
pub const DEFAULT_BENCHMARK_SIZE: usize = 256;
pub const TEST_FRACTION: f64 = 0.2;
pub const TEST_ALTERED_FRACTION: f64 = 0.5;
/// Training images are altered too, so the classifier sees every
/// manipulation before testing.
pub const DEFAULT_TRAIN_ALTERED_FRACTION: f64 = 0.5;

/// Sinusoids per scene channel.
const SCENE_WAVES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemosaicKind {
    Bilinear,
    /// Bilinear green, then bilinear interpolation of the R/G and B/G ratios.
    SmoothHue,
}

impl fmt::Display for DemosaicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DemosaicKind::Bilinear => "bilinear",
            DemosaicKind::SmoothHue => "smooth_hue",
        })
    }
}

impl FromStr for DemosaicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilinear" => Ok(DemosaicKind::Bilinear),
            "smooth_hue" => Ok(DemosaicKind::SmoothHue),
            other => Err(Error::arg(format!("unknown demosaic kind `{other}`"))),
        }
    }
}

/// Per-camera capture settings; the PRNU field is a deterministic function
/// of `(prnu_seed, row, col)`, so it is defined for any image size.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticCamera {
    pub camera_id: usize,
    pub prnu_seed: u64,
    /// Gain deviation bound; gains lie in `[1 − s, 1 + s]`, `s ≤ 0.1`.
    pub prnu_strength: f64,
    pub demosaic_kind: DemosaicKind,
    pub jpeg_quality: u8,
}

/// (strength, demosaic, quality) per camera id, cycled.
const PROFILES: [(f64, DemosaicKind, u8); 5] = [
    (0.07, DemosaicKind::Bilinear, 96),
    (0.08, DemosaicKind::SmoothHue, 93),
    (0.10, DemosaicKind::Bilinear, 92),
    (0.09, DemosaicKind::SmoothHue, 98),
    (0.085, DemosaicKind::Bilinear, 95),
];

impl SyntheticCamera {
    pub fn new(camera_id: usize, seed: u64) -> Self {
        let (prnu_strength, demosaic_kind, jpeg_quality) = PROFILES[camera_id % PROFILES.len()];
        Self {
            camera_id,
            prnu_seed: splitmix(seed ^ splitmix(camera_id as u64 + 1)),
            prnu_strength,
            demosaic_kind,
            jpeg_quality,
        }
    }

    pub fn label(&self) -> String {
        format!("cam{:02}", self.camera_id)
    }

    /// Multiplicative sensor gain at a pixel, uniform in `[1 − s, 1 + s]`.
    pub fn prnu_gain(&self, row: usize, col: usize) -> f64 {
        let h = splitmix(self.prnu_seed ^ splitmix(((row as u64) << 32) | col as u64));
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        1.0 + self.prnu_strength * (2.0 * u - 1.0)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D4_9BB1_3311_49EB);
    z ^ (z >> 31)
}

/// Channel of the RGGB filter at a site: 0 red, 1 green, 2 blue.
pub fn bayer_channel(row: usize, col: usize) -> usize {
    match (row % 2, col % 2) {
        (0, 0) => 0,
        (1, 1) => 2,
        _ => 1,
    }
}

/// Low-frequency scene, three channels of `f64` in roughly [25, 230].
fn scene(seed: u64, width: usize, height: usize) -> Vec<Vec<f64>> {
    let mut rng = keyed_rng(seed, 0);
    (0..3)
        .map(|_| {
            let base = rng.random_range(90.0..170.0);
            let waves: Vec<(f64, f64, f64, f64)> = (0..SCENE_WAVES)
                .map(|_| {
                    (
                        rng.random_range(5.0..14.0),
                        rng.random_range(-3.0..3.0),
                        rng.random_range(-3.0..3.0),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    )
                })
                .collect();
            let mut plane = Vec::with_capacity(width * height);
            for y in 0..height {
                for x in 0..width {
                    let (u, v) = (y as f64 / height as f64, x as f64 / width as f64);
                    let s: f64 = waves
                        .iter()
                        .map(|&(amp, fy, fx, ph)| amp * (std::f64::consts::TAU * (fy * u + fx * v) + ph).sin())
                        .sum();
                    plane.push(base + s);
                }
            }
            plane
        })
        .collect()
}

/// Mean of the same-channel mosaic samples at the given neighbour offsets.
fn neighbour_mean(mosaic: &[f64], w: usize, h: usize, y: usize, x: usize, offsets: &[(isize, isize)]) -> f64 {
    let sum: f64 = offsets
        .iter()
        .map(|&(dy, dx)| {
            let yy = mirror_index(y as isize + dy, h);
            let xx = mirror_index(x as isize + dx, w);
            mosaic[yy * w + xx]
        })
        .sum();
    sum / offsets.len() as f64
}

const CROSS: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];
const DIAG: [(isize, isize); 4] = [(-1, -1), (-1, 1), (1, -1), (1, 1)];
const HORIZ: [(isize, isize); 2] = [(0, -1), (0, 1)];
const VERT: [(isize, isize); 2] = [(-1, 0), (1, 0)];

/// Bilinear reconstruction of channel `c` from a single-channel mosaic.
/// Mirror padding keeps the Bayer parity at the borders.
fn bilinear_channel(mosaic: &[f64], w: usize, h: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let site = bayer_channel(y, x);
            out[y * w + x] = if site == c {
                mosaic[y * w + x]
            } else if c == 1 {
                neighbour_mean(mosaic, w, h, y, x, &CROSS)
            } else if site != 1 {
                neighbour_mean(mosaic, w, h, y, x, &DIAG)
            } else if bayer_channel(y, x ^ 1) == c {
                neighbour_mean(mosaic, w, h, y, x, &HORIZ)
            } else {
                neighbour_mean(mosaic, w, h, y, x, &VERT)
            };
        }
    }
    out
}

fn demosaic(mosaic: &[f64], w: usize, h: usize, kind: DemosaicKind) -> Vec<Vec<f64>> {
    let green = bilinear_channel(mosaic, w, h, 1);
    let chroma = |c: usize| match kind {
        DemosaicKind::Bilinear => bilinear_channel(mosaic, w, h, c),
        DemosaicKind::SmoothHue => {
            // Ratio to green at the channel's own sites, interpolated, then
            // rescaled by the full green plane.
            let ratio: Vec<f64> = mosaic.iter().zip(&green).map(|(&m, &g)| m / g.max(1.0)).collect();
            bilinear_channel(&ratio, w, h, c)
                .into_iter()
                .zip(&green)
                .map(|(r, &g)| r * g.max(1.0))
                .collect()
        }
    };
    let (red, blue) = (chroma(0), chroma(2));
    vec![red, green, blue]
}

/// Renders scene `scene_seed` through camera `cam`.
pub fn simulate_capture(cam: &SyntheticCamera, scene_seed: u64, width: usize, height: usize) -> Result<RasterImage> {
    if width < MIN_CAPTURE_SIZE || height < MIN_CAPTURE_SIZE {
        return Err(Error::arg(format!(
            "capture size must be at least {MIN_CAPTURE_SIZE}x{MIN_CAPTURE_SIZE}, got {width}x{height}"
        )));
    }
    let sc = scene(scene_seed, width, height);
    let mut mosaic = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            mosaic.push(sc[bayer_channel(y, x)][y * width + x] * cam.prnu_gain(y, x));
        }
    }
    let rgb = demosaic(&mosaic, width, height, cam.demosaic_kind);
    let mut rng = keyed_rng(scene_seed, cam.prnu_seed);
    let noise = Normal::new(0.0, NOISE_SIGMA).expect("valid sigma");
    let mut data = Vec::with_capacity(width * height * 3);
    for i in 0..width * height {
        for plane in &rgb {
            data.push(to_u8(plane[i] + noise.sample(&mut rng)));
        }
    }
    let img = RasterImage::new(width, height, 3, data)?;
    decode_image(&jpeg_encode(&img, cam.jpeg_quality)?)
}

/// I.i.d. Gaussian noise around mid-gray: an image with no demosaicing trace.
pub fn raw_noise_image(seed: u64, width: usize, height: usize) -> Result<RasterImage> {
    let mut rng = keyed_rng(seed, 1);
    let noise = Normal::new(128.0, 30.0).expect("valid sigma");
    let data = (0..width * height * 3).map(|_| to_u8(noise.sample(&mut rng))).collect();
    RasterImage::new(width, height, 3, data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkConfig {
    pub cameras: usize,
    pub per_camera: usize,
    pub seed: u64,
    pub size: usize,
    /// Fraction of the training split to alter (the test split always gets
    /// half altered).
    pub train_altered_fraction: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            cameras: 5,
            per_camera: 120,
            seed: 0,
            size: DEFAULT_BENCHMARK_SIZE,
            train_altered_fraction: DEFAULT_TRAIN_ALTERED_FRACTION,
        }
    }
}

/// Scene seed of capture `index` of camera `camera`.
fn scene_seed(seed: u64, camera: usize, index: usize) -> u64 {
    splitmix(seed ^ splitmix(((camera as u64) << 32) | index as u64).rotate_left(17))
}

/// Writes `<dir>/camXX/imgNNNN.png` and `<dir>/manifest.csv`.
///
/// Per camera, `round(0.2·per_camera)` seeded captures form the test split.
/// Half of every camera's test images are altered; the training split is
/// altered at `train_altered_fraction`. Altered images are stored already
/// manipulated.
pub fn build_synthetic_benchmark(dir: &Path, cfg: &BenchmarkConfig) -> Result<DatasetManifest> {
    if cfg.cameras == 0 || cfg.per_camera == 0 {
        return Err(Error::arg(
            "benchmark needs at least one camera and one image per camera",
        ));
    }
    let cams: Vec<SyntheticCamera> = (0..cfg.cameras).map(|k| SyntheticCamera::new(k, cfg.seed)).collect();
    let n_test = (TEST_FRACTION * cfg.per_camera as f64).round() as usize;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for cam in &cams {
        let mut order: Vec<(u64, usize)> = (0..cfg.per_camera)
            .map(|i| {
                (
                    keyed_rng(cfg.seed, scene_seed(cfg.seed, cam.camera_id, i)).random::<u64>(),
                    i,
                )
            })
            .collect();
        order.sort_unstable();
        let test_ids: Vec<usize> = order.iter().take(n_test).map(|&(_, i)| i).collect();
        for i in 0..cfg.per_camera {
            let path = format!("{}/img{i:04}.png", cam.label());
            if test_ids.contains(&i) {
                test.push(ManifestEntry::new(path, cam.label(), Split::Test));
            } else {
                train.push(ManifestEntry::new(path, cam.label(), Split::Train));
            }
        }
    }
    let mut entries = Vec::with_capacity(train.len() + test.len());
    if !train.is_empty() {
        let t = randomize_training_set(&DatasetManifest::new(train)?, cfg.train_altered_fraction, cfg.seed)?;
        entries.extend_from_slice(t.entries());
    }
    if !test.is_empty() {
        let t = randomize_training_set(&DatasetManifest::new(test)?, TEST_ALTERED_FRACTION, cfg.seed ^ 1)?;
        entries.extend_from_slice(t.entries());
    }
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = DatasetManifest::new(entries)?.with_root(dir);

    for cam in &cams {
        let sub = dir.join(cam.label());
        std::fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    }
    manifest.entries().par_iter().try_for_each(|e| -> Result<()> {
        let cam = &cams[e.label[3..].parse::<usize>().expect("generated label")];
        let index: usize = e.path[e.path.len() - 8..e.path.len() - 4]
            .parse()
            .expect("generated path");
        let img = simulate_capture(cam, scene_seed(cfg.seed, cam.camera_id, index), cfg.size, cfg.size)?;
        write_png(&manifest.resolve(e), &apply_manipulation(&img, e.manipulation)?)
    })?;
    manifest.write(&dir.join("manifest.csv"))?;
    Ok(manifest)
}
