//! Binary model container.
//!
//! Layout: the 8-byte magic `LGPCAMDL`, a little-endian `u32` format version, a `u32` section
//! count, then named sections. Each section is a `u16` name length, the UTF-8 name, a `u64`
//! payload length and the payload. Numbers are little-endian; reals are `f64`.
//!
//! | section       | payload                                                        |
//! |---------------|----------------------------------------------------------------|
//! | `config`      | pipeline configuration as `key=value` text                     |
//! | `layout`      | layout tag, `N`, `q`, matching components, training-set size   |
//! | `mean`        | `N` reals                                                      |
//! | `eigenvalues` | `q` reals                                                      |
//! | `basis`       | `q * N` reals, one row per component                           |
//! | `gallery`     | entry count, then per entry: label length, label, coordinates  |

use std::path::Path;

use super::config::PipelineConfig;
use super::pipeline::ModelContainer;
use crate::error::{Error, Result};
use crate::features::LayoutTag;
use crate::subspace::{Gallery, Projection, SubspaceModel};

pub const MAGIC: &[u8; 8] = b"LGPCAMDL";
pub const FORMAT_VERSION: u32 = 1;
const SECTIONS: [&str; 6] = [
    "config",
    "layout",
    "mean",
    "eigenvalues",
    "basis",
    "gallery",
];

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn reals(&mut self, values: &[f64]) {
        for v in values {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
    fn section(&mut self, name: &str, payload: &[u8]) {
        self.u16(name.len() as u16);
        self.0.extend_from_slice(name.as_bytes());
        self.u64(payload.len() as u64);
        self.0.extend_from_slice(payload);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Format(format!("truncated {}", self.what)));
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("2 bytes"),
        ))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format(format!("oversized {}", self.what)))
    }
    fn reals(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format(format!("oversized {}", self.what)))?;
        Ok(self
            .take(bytes)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
    fn finish(&self) -> Result<()> {
        if self.bytes.is_empty() {
            Ok(())
        } else {
            Err(Error::Format(format!(
                "{} trailing bytes after {}",
                self.bytes.len(),
                self.what
            )))
        }
    }
}

pub fn encode(container: &ModelContainer) -> Vec<u8> {
    let model = &container.model;
    let mut out = Writer::default();
    out.0.extend_from_slice(MAGIC);
    out.u32(FORMAT_VERSION);
    out.u32(SECTIONS.len() as u32);

    out.section("config", container.config.to_text().as_bytes());

    let mut layout = Writer::default();
    layout.u64(model.layout().0);
    layout.u64(model.dim() as u64);
    layout.u64(model.components() as u64);
    layout.u64(container.components as u64);
    layout.u64(model.trained_on() as u64);
    out.section("layout", &layout.0);

    for (name, values) in [
        ("mean", model.mean()),
        ("eigenvalues", model.eigenvalues()),
        ("basis", model.basis()),
    ] {
        let mut w = Writer::default();
        w.reals(values);
        out.section(name, &w.0);
    }

    let mut gallery = Writer::default();
    gallery.u64(container.gallery.len() as u64);
    for entry in container.gallery.entries() {
        gallery.u32(entry.label.len() as u32);
        gallery.0.extend_from_slice(entry.label.as_bytes());
        gallery.reals(entry.projection.coords());
    }
    out.section("gallery", &gallery.0);
    out.0
}

pub fn decode(bytes: &[u8]) -> Result<ModelContainer> {
    let mut r = Reader {
        bytes,
        what: "header",
    };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Format("not a model container (bad magic)".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported container version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let count = r.u32()?;
    if count as usize != SECTIONS.len() {
        return Err(Error::Format(format!(
            "expected {} sections, found {count}",
            SECTIONS.len()
        )));
    }
    let mut payloads = Vec::with_capacity(SECTIONS.len());
    for expected in SECTIONS {
        r.what = "section header";
        let name_len = r.u16()? as usize;
        let name = r.take(name_len)?;
        if name != expected.as_bytes() {
            return Err(Error::Format(format!(
                "expected section '{expected}', found '{}'",
                String::from_utf8_lossy(name)
            )));
        }
        r.what = expected;
        let len = r.len()?;
        payloads.push(r.take(len)?);
    }
    r.what = "last section";
    r.finish()?;

    let config_text = std::str::from_utf8(payloads[0])
        .map_err(|_| Error::Format("config section is not UTF-8".into()))?;
    let config: PipelineConfig = config_text.parse()?;

    let mut layout = Reader {
        bytes: payloads[1],
        what: "layout",
    };
    let tag = LayoutTag(layout.u64()?);
    let n = layout.len()?;
    let q = layout.len()?;
    let components = layout.len()?;
    let trained_on = layout.len()?;
    layout.finish()?;

    let section = |index: usize, what: &'static str, len: usize| -> Result<Vec<f64>> {
        let mut r = Reader {
            bytes: payloads[index],
            what,
        };
        let values = r.reals(len)?;
        r.finish()?;
        Ok(values)
    };
    let mean = section(2, "mean", n)?;
    let eigenvalues = section(3, "eigenvalues", q)?;
    let basis = section(
        4,
        "basis",
        q.checked_mul(n)
            .ok_or_else(|| Error::Format("oversized basis".into()))?,
    )?;
    let model = SubspaceModel::from_parts(mean, eigenvalues, basis, trained_on, tag)?;

    let mut g = Reader {
        bytes: payloads[5],
        what: "gallery",
    };
    let entries = g.len()?;
    let mut gallery = Gallery::new(tag);
    for _ in 0..entries {
        let label_len = g.u32()? as usize;
        let label = std::str::from_utf8(g.take(label_len)?)
            .map_err(|_| Error::Format("gallery label is not UTF-8".into()))?
            .to_string();
        let coords = g.reals(components)?;
        gallery.enroll(label, Projection::new(coords, tag)?)?;
    }
    g.finish()?;

    let container = ModelContainer {
        config,
        model,
        gallery,
        components,
    };
    container.validate()?;
    Ok(container)
}

pub fn save(container: &ModelContainer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(container)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<ModelContainer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}
