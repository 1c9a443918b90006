//! Two-layer linear SVM ensemble over image feature vectors.

mod ensemble;
mod model_io;
mod standardize;
mod svm;

pub use ensemble::{Prediction, Route, TwoLayerEnsemble};
pub use model_io::MODEL_MAGIC;
pub use standardize::Standardizer;
pub use svm::{train_binary, LinearSvm, OneVsRest, SvmParams};
