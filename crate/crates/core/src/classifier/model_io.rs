//! Line-oriented text serialization of a [`TwoLayerEnsemble`].
//!
//! ```text
//! CAMTRACE-MODEL v1
//! classes: 2
//! class: canon
//! class: nikon
//! layout: spn,cfa,glcm
//! params: <lambda> <epochs> <seed>
//! standardization: <dim>
//! mean: <dim values>
//! scale: <dim values>
//! binary: 0
//! weights: <dim values>
//! bias: <value>
//! ...one binary block per class...
//! conflict: 0 1
//! ...one binary block per subset class...
//! end
//! ```
//!
//! Floats use 17 significant digits, which round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::ensemble::TwoLayerEnsemble;
use super::standardize::Standardizer;
use super::svm::{LinearSvm, OneVsRest, SvmParams};
use crate::error::{Error, Result};
use crate::features::FeatureLayout;

pub const MODEL_MAGIC: &str = "CAMTRACE-MODEL v1";

fn push_floats(out: &mut String, key: &str, values: &[f64]) {
    out.push_str(key);
    out.push(':');
    for v in values {
        write!(out, " {v:.16e}").expect("string write");
    }
    out.push('\n');
}

fn push_binary(out: &mut String, class: usize, m: &LinearSvm) {
    writeln!(out, "binary: {class}").expect("string write");
    push_floats(out, "weights", &m.weights);
    push_floats(out, "bias", &[m.bias]);
}

impl TwoLayerEnsemble {
    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        out.push_str(MODEL_MAGIC);
        out.push('\n');
        writeln!(out, "classes: {}", self.classes.len()).expect("string write");
        for c in &self.classes {
            writeln!(out, "class: {c}").expect("string write");
        }
        writeln!(out, "layout: {}", self.layout).expect("string write");
        writeln!(
            out,
            "params: {:.16e} {} {}",
            self.params.lambda, self.params.epochs, self.params.seed
        )
        .expect("string write");
        writeln!(out, "standardization: {}", self.standardizer.dim()).expect("string write");
        push_floats(&mut out, "mean", &self.standardizer.mean);
        push_floats(&mut out, "scale", &self.standardizer.scale);
        for (c, m) in self.binaries.iter().enumerate() {
            push_binary(&mut out, c, m);
        }
        for (subset, ovr) in self.conflict_models() {
            let ids: Vec<String> = subset.iter().map(usize::to_string).collect();
            writeln!(out, "conflict: {}", ids.join(" ")).expect("string write");
            for (&c, m) in ovr.classes.iter().zip(&ovr.models) {
                push_binary(&mut out, c, m);
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_model_str(text: &str) -> Result<Self> {
        let mut r = Reader {
            lines: text.lines().enumerate(),
        };
        let magic = r.next_line("header")?;
        if magic != MODEL_MAGIC {
            return Err(Error::format(
                "header",
                format!("expected `{MODEL_MAGIC}`, found `{magic}`"),
            ));
        }
        let n_classes: usize = r.parse_one("classes")?;
        let mut classes = Vec::with_capacity(n_classes);
        for _ in 0..n_classes {
            let name = r.field("class")?;
            if name.is_empty() {
                return Err(Error::format("class", "empty class name"));
            }
            classes.push(name.to_string());
        }
        let layout: FeatureLayout = r
            .field("layout")?
            .parse()
            .map_err(|e: Error| Error::format("layout", e.to_string()))?;
        let params_line = r.field("params")?;
        let parts: Vec<&str> = params_line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::format("params", "expected `lambda epochs seed`"));
        }
        let params = SvmParams {
            lambda: parse_num("params", parts[0])?,
            epochs: parse_num("params", parts[1])?,
            seed: parse_num("params", parts[2])?,
        };
        let dim: usize = r.parse_one("standardization")?;
        if dim != layout.len() {
            return Err(Error::format(
                "standardization",
                format!("dimension {dim} does not match layout `{layout}`"),
            ));
        }
        let mean = r.floats("mean", dim)?;
        let scale = r.floats("scale", dim)?;
        if scale.iter().any(|&s| s.is_nan() || s <= 0.0) {
            return Err(Error::format("scale", "scale values must be positive"));
        }
        let standardizer = Standardizer { mean, scale };
        let mut binaries = Vec::with_capacity(n_classes);
        for c in 0..n_classes {
            binaries.push(r.binary(c, dim)?);
        }
        let mut conflicts = BTreeMap::new();
        loop {
            let line = r.next_line("conflict")?;
            if line == "end" {
                break;
            }
            let rest = strip_key(line, "conflict")?;
            let subset = rest
                .split_whitespace()
                .map(|t| parse_num::<usize>("conflict", t))
                .collect::<Result<Vec<_>>>()?;
            if subset.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::format("conflict", "class ids must be strictly ascending"));
            }
            let models = subset.iter().map(|&c| r.binary(c, dim)).collect::<Result<Vec<_>>>()?;
            conflicts.insert(
                subset.clone(),
                OneVsRest {
                    classes: subset,
                    models,
                },
            );
        }
        TwoLayerEnsemble::from_parts(classes, layout, params, standardizer, binaries, conflicts)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_model_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_model_str(&text)
    }
}

fn parse_num<T: std::str::FromStr>(field: &str, token: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::format(field, format!("cannot parse `{token}`")))
}

fn strip_key<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(':'))
        .map(|r| r.strip_prefix(' ').unwrap_or(r))
        .ok_or_else(|| Error::format(key, format!("expected `{key}:`, found `{line}`")))
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn next_line(&mut self, field: &str) -> Result<&'a str> {
        self.lines
            .next()
            .map(|(_, l)| l)
            .ok_or_else(|| Error::format(field, "unexpected end of model file"))
    }

    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line(key)?;
        strip_key(line, key)
    }

    fn parse_one<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        parse_num(key, v.trim())
    }

    fn floats(&mut self, key: &str, n: usize) -> Result<Vec<f64>> {
        let values = self
            .field(key)?
            .split_whitespace()
            .map(|t| parse_num::<f64>(key, t))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != n {
            return Err(Error::format(
                key,
                format!("expected {n} values, found {}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::format(key, "values must be finite"));
        }
        Ok(values)
    }

    fn binary(&mut self, class: usize, dim: usize) -> Result<LinearSvm> {
        let id: usize = self.parse_one("binary")?;
        if id != class {
            return Err(Error::format("binary", format!("expected class {class}, found {id}")));
        }
        let weights = self.floats("weights", dim)?;
        let bias = self.floats("bias", 1)?[0];
        Ok(LinearSvm { weights, bias })
    }
}
