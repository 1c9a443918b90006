//! Subcommand bodies. Each returns the number of errors it reported; batch
//! commands keep going past unreadable inputs.

use std::fs;
use std::io::Write;
use std::path::{Component, Path, PathBuf};

use camtrace_core::evaluation::simulator::BenchmarkConfig;
use camtrace_core::evaluation::{build_synthetic_benchmark, entry_features, evaluate_vectors};
use camtrace_core::features::{extract_features, FeatureRow};
use camtrace_core::fingerprint::{export_fingerprint, fingerprint as fingerprint_image};
use camtrace_core::imaging::{read_image, write_png};
use camtrace_core::manipulation::{apply_manipulation, randomize_training_set};
use camtrace_core::{
    DatasetManifest, Error, FeatureTable, FeatureVector, ManifestEntry, ManipulationTag, Split, SvmParams,
    TwoLayerEnsemble,
};
use rayon::prelude::*;

use crate::{EvaluateArgs, ExtractArgs, FingerprintArgs, ManipulateArgs, PredictArgs, SimulateArgs, TrainArgs};

/// Prints one tab-separated line: `error`, kind, path (or `-`), message.
pub fn report_error(path: Option<&Path>, kind: &str, message: &str) {
    let path = path.map_or_else(|| "-".to_string(), |p| p.display().to_string());
    let message = message.replace(['\n', '\t'], " ");
    eprintln!("error\t{kind}\t{path}\t{message}");
}

fn report(path: Option<&Path>, e: &Error) {
    match e {
        Error::Inputs { failures } => {
            for (p, m) in failures {
                report_error(Some(p), e.kind(), m);
            }
        }
        Error::Io { path, source } => report_error(Some(path), e.kind(), &source.to_string()),
        _ => report_error(path, e.kind(), &e.to_string()),
    }
}

/// Runs a command that either fully succeeds or fails with one error.
fn single(path: Option<&Path>, r: camtrace_core::Result<()>) -> usize {
    match r {
        Ok(()) => 0,
        Err(e) => {
            report(path, &e);
            1
        }
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn create_dir(dir: &Path) -> camtrace_core::Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

/// Manifest path made relative (root and `..` dropped) with a new extension.
fn relative_output(path: &str, extension: &str) -> PathBuf {
    let rel: PathBuf = Path::new(path)
        .components()
        .filter(|c| matches!(c, Component::Normal(_)))
        .collect();
    rel.with_extension(extension)
}

/// `cam00/img0001.png` -> `cam00_img0001`.
fn flat_stem(path: &str) -> String {
    relative_output(path, "")
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("_")
}

pub fn simulate(a: SimulateArgs) -> usize {
    let cfg = BenchmarkConfig {
        cameras: a.cameras as usize,
        per_camera: a.per_camera as usize,
        seed: a.seed,
        size: a.size as usize,
        train_altered_fraction: a.train_altered_fraction,
    };
    single(
        Some(&a.out_dir),
        (|| {
            create_dir(&a.out_dir)?;
            let m = build_synthetic_benchmark(&a.out_dir, &cfg)?;
            println!(
                "wrote {} images and {}",
                m.len(),
                a.out_dir.join("manifest.csv").display()
            );
            Ok(())
        })(),
    )
}

pub fn manipulate(a: ManipulateArgs) -> usize {
    if !is_csv(&a.input) {
        if a.random {
            report_error(Some(&a.input), "argument", "--random needs a manifest input");
            return 1;
        }
        let tag = a.tag.unwrap_or_default();
        return single(
            Some(&a.input),
            (|| {
                let img = read_image(&a.input)?;
                write_png(&a.output, &apply_manipulation(&img, tag)?)
            })(),
        );
    }

    let manifest = match DatasetManifest::read(&a.input) {
        Ok(m) => m,
        Err(e) => {
            report(Some(&a.input), &e);
            return 1;
        }
    };
    let tags: Vec<ManipulationTag> = match (a.random, a.fraction) {
        (true, Some(f)) => match randomize_training_set(&manifest, f, a.seed) {
            Ok(m) => m.entries().iter().map(|e| e.manipulation).collect(),
            Err(e) => {
                report(Some(&a.input), &e);
                return 1;
            }
        },
        _ => vec![a.tag.unwrap_or_default(); manifest.len()],
    };
    if let Err(e) = create_dir(&a.output) {
        report(None, &e);
        return 1;
    }

    let results: Vec<camtrace_core::Result<ManifestEntry>> = manifest
        .entries()
        .par_iter()
        .zip(&tags)
        .map(|(entry, &tag)| {
            let img = read_image(&manifest.resolve(entry))?;
            let rel = relative_output(&entry.path, "png");
            let dest = a.output.join(&rel);
            if let Some(parent) = dest.parent() {
                create_dir(parent)?;
            }
            write_png(&dest, &apply_manipulation(&img, tag)?)?;
            // `none` leaves an earlier alteration in place.
            let recorded = if tag == ManipulationTag::None {
                entry.manipulation
            } else {
                tag
            };
            let mut out = ManifestEntry::new(
                rel.to_string_lossy().replace('\\', "/"),
                entry.label.clone(),
                entry.split,
            );
            out = out.with_manipulation(recorded);
            Ok(out)
        })
        .collect();

    let mut failures = 0;
    let mut entries = Vec::new();
    for (entry, r) in manifest.entries().iter().zip(results) {
        match r {
            Ok(e) => entries.push(e),
            Err(e) => {
                report(Some(&manifest.resolve(entry)), &e);
                failures += 1;
            }
        }
    }
    let out_manifest = a.output.join("manifest.csv");
    failures
        + single(
            Some(&out_manifest),
            DatasetManifest::new(entries).and_then(|m| m.write(&out_manifest)),
        )
}

pub fn extract(a: ExtractArgs) -> usize {
    let manifest = match DatasetManifest::read(&a.manifest) {
        Ok(m) => match a.split {
            Some(split) => m.split(split),
            None => m,
        },
        Err(e) => {
            report(Some(&a.manifest), &e);
            return 1;
        }
    };
    let results: Vec<_> = manifest
        .entries()
        .par_iter()
        .map(|e| entry_features(&manifest, e, a.blocks))
        .collect();
    let mut table = FeatureTable::new(a.blocks);
    let mut failures = 0;
    for (entry, r) in manifest.entries().iter().zip(results) {
        match r {
            Ok(v) => table.rows.push(FeatureRow {
                path: entry.path.clone(),
                label: v.label,
                altered: v.altered,
                values: v.values,
            }),
            Err(e) => {
                report(Some(&manifest.resolve(entry)), &e);
                failures += 1;
            }
        }
    }
    failures + single(Some(&a.output), table.write(&a.output))
}

pub fn fingerprint(a: FingerprintArgs) -> usize {
    let inputs: Vec<(PathBuf, String)> = if is_csv(&a.input) {
        match DatasetManifest::read(&a.input) {
            Ok(m) => m.entries().iter().map(|e| (m.resolve(e), flat_stem(&e.path))).collect(),
            Err(e) => {
                report(Some(&a.input), &e);
                return 1;
            }
        }
    } else {
        let stem = a
            .input
            .file_stem()
            .map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned());
        vec![(a.input.clone(), stem)]
    };
    if let Err(e) = create_dir(&a.out_dir) {
        report(None, &e);
        return 1;
    }
    let mut failures = 0;
    // Each fingerprint already spreads its crops over the worker pool.
    for (path, stem) in &inputs {
        let r = read_image(path)
            .and_then(|img| fingerprint_image(&img, a.crops, a.seed, a.shift_mode))
            .and_then(|fp| export_fingerprint(&fp, &a.out_dir, stem, a.format));
        if let Err(e) = r {
            report(Some(path), &e);
            failures += 1;
        }
    }
    failures
}

pub fn train(a: TrainArgs) -> usize {
    let params = SvmParams {
        lambda: a.lambda,
        epochs: a.epochs,
        seed: a.seed,
    };
    single(
        Some(&a.features),
        (|| {
            let table = FeatureTable::read(&a.features)?;
            let mut model = TwoLayerEnsemble::train(&table.vectors(), table.layout, params)?;
            model.finalize()?;
            model.save(&a.model)?;
            println!(
                "trained {} classes on {} rows ({} conflict models) -> {}",
                model.classes().len(),
                table.rows.len(),
                model.conflict_count(),
                a.model.display()
            );
            Ok(())
        })(),
    )
}

pub fn predict(a: PredictArgs) -> usize {
    let mut model = match TwoLayerEnsemble::load(&a.model) {
        Ok(m) => m,
        Err(e) => {
            report(Some(&a.model), &e);
            return 1;
        }
    };
    if let Some(path) = &a.train_features {
        let r = FeatureTable::read(path).and_then(|t| {
            if t.layout != model.layout() {
                return Err(Error::Argument(format!(
                    "training features use blocks `{}`, model uses `{}`",
                    t.layout,
                    model.layout()
                )));
            }
            model.attach_train_store(&t.vectors())
        });
        if let Err(e) = r {
            report(Some(path), &e);
            return 1;
        }
    }

    // (path, features) per input row, in input order.
    let mut failures = 0;
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for input in &a.inputs {
        if is_csv(input) {
            match FeatureTable::read(input) {
                Ok(t) if t.layout == model.layout() => rows.extend(t.rows.into_iter().map(|r| (r.path, r.values))),
                Ok(t) => {
                    report_error(
                        Some(input),
                        "argument",
                        &format!("features use blocks `{}`, model uses `{}`", t.layout, model.layout()),
                    );
                    failures += 1;
                }
                Err(e) => {
                    report(Some(input), &e);
                    failures += 1;
                }
            }
        } else {
            match read_image(input).and_then(|img| extract_features(&img, model.layout())) {
                Ok(v) => rows.push((input.display().to_string(), v)),
                Err(e) => {
                    report(Some(input), &e);
                    failures += 1;
                }
            }
        }
    }

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut write = |rec: [&str; 3]| w.write_record(rec).expect("writing to memory");
    write(["path", "predicted_label", "decision_margin"]);
    for (path, values) in &rows {
        match model.predict(values) {
            Ok(p) => write([path, &p.label, &p.margin.to_string()]),
            Err(e) => {
                report_error(Some(Path::new(path)), e.kind(), &e.to_string());
                failures += 1;
            }
        }
    }
    let bytes = w.into_inner().expect("in-memory writer");
    let written = match &a.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => std::io::stdout().write_all(&bytes).map_err(|e| Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
    };
    failures + single(a.out.as_deref(), written)
}

pub fn evaluate(a: EvaluateArgs) -> usize {
    let model = match TwoLayerEnsemble::load(&a.model) {
        Ok(m) => m,
        Err(e) => {
            report(Some(&a.model), &e);
            return 1;
        }
    };
    let manifest = match DatasetManifest::read(&a.manifest) {
        Ok(m) => m,
        Err(e) => {
            report(Some(&a.manifest), &e);
            return 1;
        }
    };
    let test = manifest.split(Split::Test);
    let scored = if test.is_empty() { manifest } else { test };
    let results: Vec<_> = scored
        .entries()
        .par_iter()
        .map(|e| entry_features(&scored, e, model.layout()))
        .collect();
    let mut failures = 0;
    let mut vectors: Vec<FeatureVector> = Vec::new();
    for (entry, r) in scored.entries().iter().zip(results) {
        match r {
            Ok(v) => vectors.push(v),
            Err(e) => {
                report(Some(&scored.resolve(entry)), &e);
                failures += 1;
            }
        }
    }
    if vectors.is_empty() {
        report_error(Some(&a.manifest), "argument", "no readable images to evaluate");
        return failures + 1;
    }
    failures
        + single(
            Some(&a.manifest),
            (|| {
                let r = evaluate_vectors(&model, &vectors)?;
                println!("weighted_accuracy\t{}", r.weighted_accuracy);
                let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
                println!("unaltered_accuracy\t{}", opt(r.unaltered_accuracy));
                println!("altered_accuracy\t{}", opt(r.altered_accuracy));
                println!("samples\t{}", r.samples);
                if let Some(path) = &a.report {
                    fs::write(path, r.to_json()?).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                }
                Ok(())
            })(),
        )
}
