//! Dataset manifests, the weighted accuracy metric, the synthetic camera
//! simulator and experiment orchestration.

mod experiment;
mod manifest;
mod metric;
pub mod simulator;

pub use experiment::{entry_features, evaluate_vectors, manifest_features, run_experiment, ExperimentConfig};
pub use manifest::{DatasetManifest, ManifestEntry, Split, MANIFEST_HEADER};
pub use metric::{
    weighted_accuracy, weighted_accuracy_labeled, WeightedAccuracyReport, ALTERED_WEIGHT, UNALTERED_WEIGHT,
};
pub use simulator::{build_synthetic_benchmark, simulate_capture, BenchmarkConfig, DemosaicKind, SyntheticCamera};
