use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manipulation::ManipulationTag;

pub const MANIFEST_HEADER: [&str; 5] = ["path", "label", "altered", "manipulation", "split"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::arg(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub label: String,
    pub altered: bool,
    pub manipulation: ManipulationTag,
    pub split: Split,
}

impl ManifestEntry {
    /// Unaltered entry.
    pub fn new(path: impl Into<String>, label: impl Into<String>, split: Split) -> Self {
        Self {
            path: path.into(),
            label: label.into(),
            altered: false,
            manipulation: ManipulationTag::None,
            split,
        }
    }

    pub fn with_manipulation(mut self, tag: ManipulationTag) -> Self {
        self.manipulation = tag;
        self.altered = tag.is_altered();
        self
    }
}

/// Image list with labels, alteration tags and train/test assignment.
///
/// Relative paths resolve against [`DatasetManifest::root`], which is set to
/// the manifest file's directory when read from disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    root: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        validate(&entries)?;
        Ok(Self { entries, root: None })
    }

    pub fn with_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.root = Some(root.into());
        self
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [ManifestEntry] {
        &mut self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        match &self.root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Sorted distinct camera labels.
    pub fn classes(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| e.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn split(&self, split: Split) -> DatasetManifest {
        DatasetManifest {
            entries: self.entries.iter().filter(|e| e.split == split).cloned().collect(),
            root: self.root.clone(),
        }
    }

    /// Concatenation; fails on duplicate paths.
    pub fn merge(&self, other: &DatasetManifest) -> Result<DatasetManifest> {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(DatasetManifest::new(entries)?.with_root_opt(self.root.clone()))
    }

    fn with_root_opt(mut self, root: Option<PathBuf>) -> Self {
        self.root = root;
        self
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for e in &self.entries {
            w.serialize(e).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::format("manifest", e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::format("manifest", e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = r.headers().map_err(csv_err)?.clone();
        if header.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
            return Err(Error::format(
                "manifest header",
                format!(
                    "expected `{}`, got `{}`",
                    MANIFEST_HEADER.join(","),
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        let mut entries = Vec::new();
        for (line, row) in r.deserialize::<ManifestEntry>().enumerate() {
            let e = row.map_err(|e| Error::format(format!("manifest line {}", line + 2), e.to_string()))?;
            entries.push(e);
        }
        Self::new(entries)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self::from_csv(&text)?.with_root(root))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::format("csv", e.to_string())
}

fn validate(entries: &[ManifestEntry]) -> Result<()> {
    let mut seen = HashSet::new();
    for e in entries {
        if !seen.insert(e.path.as_str()) {
            return Err(Error::arg(format!("duplicate manifest path `{}`", e.path)));
        }
        if e.altered != e.manipulation.is_altered() {
            return Err(Error::arg(format!(
                "entry `{}`: altered={} contradicts manipulation `{}`",
                e.path, e.altered, e.manipulation
            )));
        }
        if e.label.is_empty() {
            return Err(Error::arg(format!("entry `{}` has an empty label", e.path)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_and_header() {
        let m = DatasetManifest::new(vec![
            ManifestEntry::new("a.png", "cam0", Split::Train),
            ManifestEntry::new("b.png", "cam1", Split::Test).with_manipulation(ManipulationTag::Gamma12),
        ])
        .unwrap();
        let text = m.to_csv().unwrap();
        assert_eq!(
            text,
            "path,label,altered,manipulation,split\na.png,cam0,false,none,train\nb.png,cam1,true,gamma12,test\n"
        );
        assert_eq!(DatasetManifest::from_csv(&text).unwrap(), m);
        assert_eq!(m.classes(), vec!["cam0", "cam1"]);
        assert_eq!(m.split(Split::Test).len(), 1);
    }

    #[test]
    fn rejects_invalid_manifests() {
        let dup = vec![
            ManifestEntry::new("a.png", "x", Split::Train),
            ManifestEntry::new("a.png", "y", Split::Test),
        ];
        assert!(DatasetManifest::new(dup).is_err());
        let mut bad = ManifestEntry::new("a.png", "x", Split::Train);
        bad.altered = true;
        assert!(DatasetManifest::new(vec![bad]).is_err());
        assert!(DatasetManifest::from_csv("path,label\na,b\n").is_err());
        assert!(DatasetManifest::from_csv("path,label,altered,manipulation,split\na,b,false,none,valid\n").is_err());
    }

    #[test]
    fn resolves_relative_paths() {
        let m = DatasetManifest::new(vec![ManifestEntry::new("img/a.png", "x", Split::Train)])
            .unwrap()
            .with_root("/data");
        assert_eq!(m.resolve(&m.entries()[0]), PathBuf::from("/data/img/a.png"));
    }
}
