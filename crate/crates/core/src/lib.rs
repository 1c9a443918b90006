//! Source camera identification from intrinsic image traces.
//!
//! The crate extracts three families of physically grounded features from an
//! image and classifies them with a two-layer linear SVM ensemble:
//!
//! * sensor pattern noise ([`spn`]): bilateral-denoise residual, strongest 4%
//!   of values, summarized into 25 statistics;
//! * colour filter array interpolation ([`cfa`]): periodicity of the
//!   anti-diagonal variance signal of the high-passed green channel;
//! * texture ([`glcm`]): co-occurrence statistics of a hybrid-edge sharpened
//!   gray image.
//!
//! [`fingerprint`] produces averaged FFT noise spectra for downstream deep
//! networks, [`manipulation`] builds robust training sets, and
//! [`evaluation`] holds the weighted accuracy metric, dataset manifests and a
//! synthetic camera simulator.

pub mod cfa;
pub mod classifier;
mod error;
pub mod evaluation;
pub mod features;
pub mod fingerprint;
pub mod glcm;
pub mod imaging;
pub mod manipulation;
pub mod spn;

pub use classifier::{LinearSvm, OneVsRest, Prediction, Route, Standardizer, SvmParams, TwoLayerEnsemble};
pub use error::{Error, Result};
pub use evaluation::{DatasetManifest, ExperimentConfig, ManifestEntry, Split, WeightedAccuracyReport};
pub use features::{FeatureLayout, FeatureTable, FeatureVector};
pub use imaging::{Kernel, Plane, RasterImage};
pub use manipulation::ManipulationTag;
