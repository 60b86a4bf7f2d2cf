//! CSV manifests: one image per row with its identity, set tag and eye (and chin) positions.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Landmarks, Point};

pub const HEADER: [&str; 9] = ["path", "label", "set", "lx", "ly", "rx", "ry", "cx", "cy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Row {
    path: String,
    label: String,
    set: String,
    lx: f64,
    ly: f64,
    rx: f64,
    ry: f64,
    cx: Option<f64>,
    cy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// As written in the manifest.
    pub path: String,
    /// `path` resolved against the manifest's directory.
    pub resolved: PathBuf,
    pub label: String,
    pub set: String,
    pub landmarks: Landmarks<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Parse(e.to_string()))?
            .clone();
        for required in &HEADER[..7] {
            if !headers.iter().any(|h| h == *required) {
                return Err(Error::Parse(format!("manifest lacks column '{required}'")));
            }
        }
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::Parse(format!("manifest line {line}: {e}")))?;
            if !seen.insert(record.iter().collect::<Vec<_>>().join("\u{1f}")) {
                return Err(Error::InvalidArgument(format!(
                    "manifest line {line} duplicates an earlier row"
                )));
            }
            let row: Row = record
                .deserialize(Some(&headers))
                .map_err(|e| Error::Parse(format!("manifest line {line}: {e}")))?;
            entries.push(row.into_entry(base_dir, line)?);
        }
        Ok(Self { entries })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.entries {
            let chin = e.landmarks.chin;
            w.serialize(Row {
                path: e.path.clone(),
                label: e.label.clone(),
                set: e.set.clone(),
                lx: e.landmarks.left_eye.x,
                ly: e.landmarks.left_eye.y,
                rx: e.landmarks.right_eye.x,
                ry: e.landmarks.right_eye.y,
                cx: chin.map(|c| c.x),
                cy: chin.map(|c| c.y),
            })
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    /// Rows whose set tag equals `set`; every row when `set` is `None`.
    pub fn subset(&self, set: Option<&str>) -> Vec<ManifestEntry> {
        self.entries
            .iter()
            .filter(|e| set.is_none_or(|s| e.set == s))
            .cloned()
            .collect()
    }
}

impl Row {
    fn into_entry(self, base_dir: &Path, line: usize) -> Result<ManifestEntry> {
        if self.path.is_empty() || self.label.is_empty() {
            return Err(Error::Parse(format!(
                "manifest line {line}: empty path or label"
            )));
        }
        let left = Point::new(self.lx, self.ly);
        let right = Point::new(self.rx, self.ry);
        let landmarks = match (self.cx, self.cy) {
            (Some(cx), Some(cy)) => Landmarks::three_point(left, right, Point::new(cx, cy)),
            (None, None) => Landmarks::two_point(left, right),
            _ => {
                return Err(Error::Parse(format!(
                    "manifest line {line}: chin needs both cx and cy"
                )))
            }
        };
        let resolved = base_dir.join(&self.path);
        Ok(ManifestEntry {
            path: self.path,
            resolved,
            label: self.label,
            set: self.set,
            landmarks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "path,label,set,lx,ly,rx,ry,cx,cy\n\
                        a.pgm,alice,fa,10,20,40,20.5,25,60\n\
                        b.pgm,bob,fb,11,21,41,21,,\n";

    #[test]
    fn parses_two_and_three_point_rows() {
        let m = Manifest::parse(TEXT, Path::new("data")).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[0].resolved, Path::new("data").join("a.pgm"));
        assert_eq!(m.entries[0].landmarks.chin, Some(Point::new(25.0, 60.0)));
        assert_eq!(m.entries[1].landmarks.chin, None);
        assert_eq!(m.subset(Some("fb")).len(), 1);
        assert_eq!(m.subset(None).len(), 2);
    }

    #[test]
    fn chin_columns_are_optional() {
        let m = Manifest::parse(
            "path,label,set,lx,ly,rx,ry\nx.pgm,x,s,1,2,3,4\n",
            Path::new(""),
        )
        .unwrap();
        assert_eq!(m.entries[0].landmarks.chin, None);
    }

    #[test]
    fn duplicate_rows_are_rejected() {
        let text = format!("{TEXT}b.pgm,bob,fb,11,21,41,21,,\n");
        assert!(Manifest::parse(&text, Path::new("")).is_err());
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let bad = [
            "path,label,set,lx,ly,rx,ry\nx.pgm,x,s,1,two,3,4\n",
            "path,label,set,lx,ly,rx\nx.pgm,x,s,1,2,3\n",
            "path,label,set,lx,ly,rx,ry,cx,cy\nx.pgm,x,s,1,2,3,4,5,\n",
            "path,label,set,lx,ly,rx,ry\n,x,s,1,2,3,4\n",
        ];
        for text in bad {
            assert!(Manifest::parse(text, Path::new("")).is_err(), "{text}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let m = Manifest::parse(TEXT, Path::new("")).unwrap();
        let again = Manifest::parse(&m.to_csv().unwrap(), Path::new("")).unwrap();
        assert_eq!(m, again);
    }
}
