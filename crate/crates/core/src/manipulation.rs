//! The eight image alterations used to build robust training sets, and the
//! seeded, class-stratified assignment of alterations to manifest entries.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::DatasetManifest;
use crate::imaging::{bicubic_resize, decode_image, jpeg_encode, to_u8, RasterImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ManipulationTag {
    #[default]
    None,
    Jpeg70,
    Jpeg90,
    Gamma08,
    Gamma12,
    Resize05,
    Resize08,
    Resize15,
    Resize20,
}

impl ManipulationTag {
    pub const ALL: [ManipulationTag; 9] = [
        ManipulationTag::None,
        ManipulationTag::Jpeg70,
        ManipulationTag::Jpeg90,
        ManipulationTag::Gamma08,
        ManipulationTag::Gamma12,
        ManipulationTag::Resize05,
        ManipulationTag::Resize08,
        ManipulationTag::Resize15,
        ManipulationTag::Resize20,
    ];

    /// The eight actual alterations (everything but `none`).
    pub const ALTERATIONS: [ManipulationTag; 8] = [
        ManipulationTag::Jpeg70,
        ManipulationTag::Jpeg90,
        ManipulationTag::Gamma08,
        ManipulationTag::Gamma12,
        ManipulationTag::Resize05,
        ManipulationTag::Resize08,
        ManipulationTag::Resize15,
        ManipulationTag::Resize20,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ManipulationTag::None => "none",
            ManipulationTag::Jpeg70 => "jpeg70",
            ManipulationTag::Jpeg90 => "jpeg90",
            ManipulationTag::Gamma08 => "gamma08",
            ManipulationTag::Gamma12 => "gamma12",
            ManipulationTag::Resize05 => "resize05",
            ManipulationTag::Resize08 => "resize08",
            ManipulationTag::Resize15 => "resize15",
            ManipulationTag::Resize20 => "resize20",
        }
    }

    pub fn is_altered(self) -> bool {
        self != ManipulationTag::None
    }
}

impl fmt::Display for ManipulationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManipulationTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ManipulationTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown manipulation `{s}`")))
    }
}

/// `v' = round(255 · (v / 255)^gamma)` per sample.
pub fn gamma_correct(img: &RasterImage, gamma: f64) -> Result<RasterImage> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::arg(format!("gamma must be > 0, got {gamma}")));
    }
    let lut: Vec<u8> = (0..=255u32)
        .map(|v| to_u8(255.0 * (f64::from(v) / 255.0).powf(gamma)))
        .collect();
    let data = img.data().iter().map(|&v| lut[v as usize]).collect();
    RasterImage::new(img.width(), img.height(), img.channels(), data)
}

fn jpeg_roundtrip(img: &RasterImage, quality: u8) -> Result<RasterImage> {
    let decoded = decode_image(&jpeg_encode(img, quality)?)?;
    debug_assert_eq!(decoded.channels(), img.channels());
    Ok(decoded)
}

pub fn apply_manipulation(img: &RasterImage, tag: ManipulationTag) -> Result<RasterImage> {
    match tag {
        ManipulationTag::None => Ok(img.clone()),
        ManipulationTag::Jpeg70 => jpeg_roundtrip(img, 70),
        ManipulationTag::Jpeg90 => jpeg_roundtrip(img, 90),
        ManipulationTag::Gamma08 => gamma_correct(img, 0.8),
        ManipulationTag::Gamma12 => gamma_correct(img, 1.2),
        ManipulationTag::Resize05 => bicubic_resize(img, 0.5),
        ManipulationTag::Resize08 => bicubic_resize(img, 0.8),
        ManipulationTag::Resize15 => bicubic_resize(img, 1.5),
        ManipulationTag::Resize20 => bicubic_resize(img, 2.0),
    }
}

/// Counter-style generator: one independent ChaCha stream per key.
pub(crate) fn keyed_rng(seed: u64, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng
}

/// Tags a `fraction` of each camera class with an alteration, the rest with
/// `none`.
///
/// Within every class `round(fraction · n_class)` entries are chosen by a
/// per-entry seeded score, and the k-th chosen entry of every class receives
/// the k-th kind of one shared seeded sequence (built from shuffled blocks of
/// all eight alterations), so equally sized classes get the same mix. Each
/// entry's score depends only on `(seed, entry index)`.
pub fn randomize_training_set(manifest: &DatasetManifest, altered_fraction: f64, seed: u64) -> Result<DatasetManifest> {
    if manifest.is_empty() {
        return Err(Error::arg("cannot randomize an empty manifest"));
    }
    if !(0.0..=1.0).contains(&altered_fraction) {
        return Err(Error::arg(format!(
            "altered fraction must be in [0,1], got {altered_fraction}"
        )));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in manifest.entries().iter().enumerate() {
        by_class.entry(e.label.as_str()).or_default().push(i);
    }
    let largest = by_class.values().map(Vec::len).max().unwrap_or(0);
    let mut kind_rng = keyed_rng(seed, u64::MAX);
    let mut kinds = Vec::with_capacity(largest + 8);
    while kinds.len() < largest {
        let mut block = ManipulationTag::ALTERATIONS;
        block.shuffle(&mut kind_rng);
        kinds.extend_from_slice(&block);
    }

    let mut tags = vec![ManipulationTag::None; manifest.len()];
    for members in by_class.values() {
        let n_alt = (altered_fraction * members.len() as f64).round() as usize;
        let mut scored: Vec<(u64, usize)> = members
            .iter()
            .map(|&i| (keyed_rng(seed, i as u64).next_u64(), i))
            .collect();
        scored.sort_unstable();
        for (k, &(_, i)) in scored.iter().take(n_alt).enumerate() {
            tags[i] = kinds[k];
        }
    }
    let mut out = manifest.clone();
    for (entry, tag) in out.entries_mut().iter_mut().zip(tags) {
        entry.manipulation = tag;
        entry.altered = tag.is_altered();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{ManifestEntry, Split};

    fn manifest(classes: usize, per_class: usize) -> DatasetManifest {
        let entries = (0..classes)
            .flat_map(|c| {
                (0..per_class)
                    .map(move |i| ManifestEntry::new(format!("cam{c}/img{i}.png"), format!("cam{c}"), Split::Train))
            })
            .collect();
        DatasetManifest::new(entries).unwrap()
    }

    #[test]
    fn tag_names_roundtrip() {
        for t in ManipulationTag::ALL {
            assert_eq!(t.name().parse::<ManipulationTag>().unwrap(), t);
        }
        assert!("jpeg80".parse::<ManipulationTag>().is_err());
    }

    #[test]
    fn gamma_examples() {
        let img = RasterImage::new(3, 1, 1, vec![0, 128, 255]).unwrap();
        for g in [0.5, 0.8, 1.2, 3.0] {
            let out = gamma_correct(&img, g).unwrap();
            assert_eq!(out.data()[0], 0);
            assert_eq!(out.data()[2], 255);
        }
        assert_eq!(gamma_correct(&img, 0.8).unwrap().data()[1], 147);
        assert_eq!(gamma_correct(&img, 1.0).unwrap(), img);
        assert!(gamma_correct(&img, 0.0).is_err());
    }

    #[test]
    fn gamma_is_monotone() {
        let img = RasterImage::from_fn(256, 1, 1, |_, x, _| x as u8).unwrap();
        for g in [0.8, 1.2] {
            let out = gamma_correct(&img, g).unwrap();
            assert!(out.data().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn manipulations_keep_channels() {
        let img = RasterImage::from_fn(200, 100, 3, |y, x, c| ((y * 3 + x * 5 + c * 40) % 256) as u8).unwrap();
        assert_eq!(apply_manipulation(&img, ManipulationTag::None).unwrap(), img);
        let r = apply_manipulation(&img, ManipulationTag::Resize05).unwrap();
        assert_eq!((r.width(), r.height()), (100, 50));
        let j = apply_manipulation(&img, ManipulationTag::Jpeg90).unwrap();
        assert_eq!((j.width(), j.height()), (200, 100));
        assert_ne!(j, img);
        for t in ManipulationTag::ALL {
            assert_eq!(apply_manipulation(&img, t).unwrap().channels(), 3);
        }
        let gray = RasterImage::filled(16, 16, &[40]).unwrap();
        for t in ManipulationTag::ALL {
            assert_eq!(apply_manipulation(&gray, t).unwrap().channels(), 1, "{t}");
        }
    }

    #[test]
    fn randomize_zero_fraction() {
        let m = randomize_training_set(&manifest(3, 7), 0.0, 4).unwrap();
        assert!(m
            .entries()
            .iter()
            .all(|e| e.manipulation == ManipulationTag::None && !e.altered));
    }

    #[test]
    fn randomize_full_fraction_is_reproducible() {
        let a = randomize_training_set(&manifest(1, 8), 1.0, 99).unwrap();
        let b = randomize_training_set(&manifest(1, 8), 1.0, 99).unwrap();
        assert!(a.entries().iter().all(|e| e.altered));
        assert_eq!(a, b);
        // A full block of eight covers every alteration once.
        let mut kinds: Vec<_> = a.entries().iter().map(|e| e.manipulation).collect();
        kinds.sort();
        assert_eq!(kinds, ManipulationTag::ALTERATIONS.to_vec());
    }

    #[test]
    fn randomize_is_stratified() {
        let m = randomize_training_set(&manifest(10, 20), 0.5, 7).unwrap();
        let mut mixes = Vec::new();
        for c in 0..10 {
            let label = format!("cam{c}");
            let mut kinds: Vec<_> = m
                .entries()
                .iter()
                .filter(|e| e.label == label && e.altered)
                .map(|e| e.manipulation)
                .collect();
            assert_eq!(kinds.len(), 10);
            kinds.sort();
            mixes.push(kinds);
        }
        assert!(mixes.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(
            randomize_training_set(&manifest(10, 20), 0.5, 8).unwrap(),
            m,
            "different seeds should give different assignments"
        );
    }

    #[test]
    fn randomize_rejects_bad_input() {
        assert!(randomize_training_set(&DatasetManifest::new(vec![]).unwrap(), 0.5, 1).is_err());
        assert!(randomize_training_set(&manifest(1, 2), 1.5, 1).is_err());
    }
}
