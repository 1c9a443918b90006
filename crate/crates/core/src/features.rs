//! Assembly of the per-image classifier feature vector.
//!
//! The full layout is 47 values: the SPN block (`f0..f24`), the CFA block
//! (`f25..f26`) and the GLCM block (`f27..f46`). Disabled blocks are omitted
//! but enabled ones keep their global column indices.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::cfa::{detect_interpolation, CFA_FEATURE_LEN};
use crate::error::{Error, Result};
use crate::glcm::{glcm_feature_block, GLCM_FEATURE_LEN};
use crate::imaging::RasterImage;
use crate::spn::{spn_feature_block, SPN_FEATURE_LEN};

pub const FULL_FEATURE_LEN: usize = SPN_FEATURE_LEN + CFA_FEATURE_LEN + GLCM_FEATURE_LEN;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FeatureLayout {
    pub spn: bool,
    pub cfa: bool,
    pub glcm: bool,
}

impl Default for FeatureLayout {
    fn default() -> Self {
        Self::ALL
    }
}

impl FeatureLayout {
    pub const ALL: FeatureLayout = FeatureLayout {
        spn: true,
        cfa: true,
        glcm: true,
    };

    pub fn is_empty(&self) -> bool {
        !(self.spn || self.cfa || self.glcm)
    }

    pub fn len(&self) -> usize {
        self.columns().len()
    }

    /// Global indices (into the 47-value layout) of the enabled columns.
    pub fn columns(&self) -> Vec<usize> {
        let mut cols = Vec::with_capacity(FULL_FEATURE_LEN);
        if self.spn {
            cols.extend(0..SPN_FEATURE_LEN);
        }
        if self.cfa {
            cols.extend(SPN_FEATURE_LEN..SPN_FEATURE_LEN + CFA_FEATURE_LEN);
        }
        if self.glcm {
            cols.extend(SPN_FEATURE_LEN + CFA_FEATURE_LEN..FULL_FEATURE_LEN);
        }
        cols
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns().into_iter().map(|i| format!("f{i}")).collect()
    }

    /// Recovers the layout from column names as written by
    /// [`FeatureLayout::column_names`].
    pub fn from_column_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut idx = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let i = n
                .strip_prefix('f')
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| Error::format("feature header", format!("bad feature column `{n}`")))?;
            idx.push(i);
        }
        let has = |range: std::ops::Range<usize>| range.clone().all(|i| idx.contains(&i));
        let layout = FeatureLayout {
            spn: has(0..SPN_FEATURE_LEN),
            cfa: has(SPN_FEATURE_LEN..SPN_FEATURE_LEN + CFA_FEATURE_LEN),
            glcm: has(SPN_FEATURE_LEN + CFA_FEATURE_LEN..FULL_FEATURE_LEN),
        };
        if layout.columns() != idx {
            return Err(Error::format(
                "feature header",
                format!("columns {idx:?} do not form a block layout"),
            ));
        }
        Ok(layout)
    }
}

impl fmt::Display for FeatureLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.spn, "spn"), (self.cfa, "cfa"), (self.glcm, "glcm")]
            .into_iter()
            .filter_map(|(on, n)| on.then_some(n))
            .collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for FeatureLayout {
    type Err = Error;

    /// Comma-separated block names, e.g. `spn,glcm`.
    fn from_str(s: &str) -> Result<Self> {
        let mut layout = FeatureLayout {
            spn: false,
            cfa: false,
            glcm: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "spn" => layout.spn = true,
                "cfa" => layout.cfa = true,
                "glcm" => layout.glcm = true,
                other => return Err(Error::arg(format!("unknown feature block `{other}`"))),
            }
        }
        if layout.is_empty() {
            return Err(Error::arg("at least one feature block must be enabled"));
        }
        Ok(layout)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Option<String>,
    pub altered: bool,
    pub standardized: bool,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            label: None,
            altered: false,
            standardized: false,
        }
    }
}

/// Extracts the enabled feature blocks of one image.
pub fn extract_features(img: &RasterImage, layout: FeatureLayout) -> Result<Vec<f64>> {
    if layout.is_empty() {
        return Err(Error::arg("feature layout has no enabled blocks"));
    }
    let mut out = Vec::with_capacity(layout.len());
    if layout.spn {
        out.extend(spn_feature_block(img)?);
    }
    if layout.cfa {
        let score = if img.channels() == 3 {
            detect_interpolation(img)?
        } else {
            // Gray images carry no colour-filter trace.
            crate::cfa::CfaScore {
                peak_ratio: 0.0,
                is_interpolated: false,
            }
        };
        out.extend(score.to_features());
    }
    if layout.glcm {
        out.extend(glcm_feature_block(img)?);
    }
    debug_assert_eq!(out.len(), layout.len());
    Ok(out)
}

/// Fixed leading columns of a feature table.
pub const FEATURE_TABLE_PREFIX: [&str; 3] = ["path", "label", "altered"];

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub path: String,
    pub label: Option<String>,
    pub altered: bool,
    pub values: Vec<f64>,
}

impl FeatureRow {
    pub fn to_vector(&self) -> FeatureVector {
        FeatureVector {
            values: self.values.clone(),
            label: self.label.clone(),
            altered: self.altered,
            standardized: false,
        }
    }
}

/// Feature CSV: `path,label,altered,f<i>...`, one row per image. An empty
/// label means unlabelled. Values use the shortest exact decimal form.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub layout: FeatureLayout,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn new(layout: FeatureLayout) -> Self {
        Self {
            layout,
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header: Vec<String> = FEATURE_TABLE_PREFIX.iter().map(|s| s.to_string()).collect();
        header.extend(self.layout.column_names());
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            if r.values.len() != self.layout.len() {
                return Err(Error::arg(format!(
                    "row `{}` has {} values, layout needs {}",
                    r.path,
                    r.values.len(),
                    self.layout.len()
                )));
            }
            let mut rec = vec![
                r.path.clone(),
                r.label.clone().unwrap_or_default(),
                r.altered.to_string(),
            ];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::format("features", e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::format("features", e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r.headers().map_err(csv_err)?.clone();
        let names: Vec<&str> = header.iter().collect();
        if names.len() < 4 || names[..3] != FEATURE_TABLE_PREFIX {
            return Err(Error::format(
                "feature header",
                format!("expected `path,label,altered,f...`, got `{}`", names.join(",")),
            ));
        }
        let layout = FeatureLayout::from_column_names(&names[3..])?;
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let field = format!("features line {}", i + 2);
            let rec = rec.map_err(|e| Error::format(&field, e.to_string()))?;
            if rec.len() != names.len() {
                return Err(Error::format(
                    field,
                    format!("expected {} columns, got {}", names.len(), rec.len()),
                ));
            }
            let altered = rec[2]
                .parse::<bool>()
                .map_err(|_| Error::format(&field, format!("bad altered flag `{}`", &rec[2])))?;
            let values = rec
                .iter()
                .skip(3)
                .map(|t| match t.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::format(&field, format!("bad feature value `{t}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(FeatureRow {
                path: rec[0].to_string(),
                label: (!rec[1].is_empty()).then(|| rec[1].to_string()),
                altered,
                values,
            });
        }
        Ok(Self { layout, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn vectors(&self) -> Vec<FeatureVector> {
        self.rows.iter().map(FeatureRow::to_vector).collect()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::format("features", e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_parsing() {
        assert_eq!("spn,cfa,glcm".parse::<FeatureLayout>().unwrap(), FeatureLayout::ALL);
        let l: FeatureLayout = "cfa".parse().unwrap();
        assert_eq!(l.column_names(), vec!["f25", "f26"]);
        assert_eq!(FeatureLayout::from_column_names(&l.column_names()).unwrap(), l);
        assert_eq!(FeatureLayout::ALL.len(), 47);
        assert!("".parse::<FeatureLayout>().is_err());
        assert!("spn,hog".parse::<FeatureLayout>().is_err());
        assert!(FeatureLayout::from_column_names(&["f0", "f1"]).is_err());
    }

    #[test]
    fn table_roundtrip() {
        let layout: FeatureLayout = "cfa".parse().unwrap();
        let mut t = FeatureTable::new(layout);
        t.rows.push(FeatureRow {
            path: "a,b.png".into(),
            label: Some("cam0".into()),
            altered: true,
            values: vec![0.1, -3.5e-7],
        });
        t.rows.push(FeatureRow {
            path: "c.png".into(),
            label: None,
            altered: false,
            values: vec![1.0 / 3.0, 0.0],
        });
        let text = t.to_csv().unwrap();
        assert!(text.starts_with("path,label,altered,f25,f26\n\"a,b.png\",cam0,true,0.1,"));
        assert_eq!(FeatureTable::from_csv(&text).unwrap(), t);
        assert!(FeatureTable::from_csv("path,label,altered,f25,f26\nx,y,maybe,1,2\n").is_err());
        assert!(FeatureTable::from_csv("path,label,altered,f25,f26\nx,y,true,1,NaN\n").is_err());
        assert!(FeatureTable::from_csv("path,label,f25,f26\n").is_err());
    }

    #[test]
    fn constant_image_vector() {
        let img = RasterImage::filled(32, 32, &[100, 100, 100]).unwrap();
        let v = extract_features(&img, FeatureLayout::ALL).unwrap();
        assert_eq!(v.len(), 47);
        assert!(v.iter().all(|x| x.is_finite()));
        // Zero residual: every moment and quantile is zero, histogram mass sits
        // in the bin holding 0.
        assert!(v[..9].iter().all(|&x| x == 0.0));
        assert_eq!(v[9 + 8], 1.0);
        assert_eq!(&v[25..27], &[0.0, 0.0]);
        for chunk in v[27..].chunks(5) {
            assert_eq!(chunk, &[0.0, 0.0, 1.0, 1.0, 1.0]);
        }
    }
}
