//! Binary field snapshots with a JSON metadata sidecar.
//!
//! Layout: four little-endian `u64` header words `(d, n, N, components)`
//! followed by row-major complex doubles `(re, im)`, component-major, then
//! site-major, then matrix entry.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lie::GroupKind;

use super::{GaugeField, MatField, TorusGrid};

/// Sidecar description of a snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    /// Spatial dimension.
    pub d: usize,
    /// Points per side.
    pub n: usize,
    /// Matrix size.
    pub matrix_dim: usize,
    /// Number of components.
    pub components: usize,
    /// Structure group name.
    pub group: String,
    /// Inner product convention.
    pub inner_product: String,
    /// Free-form annotations (time, step, seed, ...).
    #[serde(default)]
    pub annotations: serde_json::Map<String, serde_json::Value>,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

/// Writes `a` to `path` and its metadata to `path.json`.
pub fn write_field(path: &Path, a: &GaugeField, annotations: serde_json::Map<String, serde_json::Value>) -> Result<()> {
    let grid = a.grid();
    let n = a.group().matrix_dim();
    let mut buf = Vec::with_capacity(32 + a.comps().len() * grid.sites() * n * n * 16);
    for w in [grid.d(), grid.n(), n, a.comps().len()] {
        buf.extend_from_slice(&(w as u64).to_le_bytes());
    }
    for c in a.comps() {
        for z in c.data() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    fs::File::create(path)?.write_all(&buf)?;
    let meta = FieldMetadata {
        d: grid.d(),
        n: grid.n(),
        matrix_dim: n,
        components: a.comps().len(),
        group: a.group().to_string(),
        inner_product: "-Tr(XY)".into(),
        annotations,
    };
    fs::write(sidecar(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

/// Reads a snapshot written by [`write_field`].
pub fn read_field(path: &Path) -> Result<(GaugeField, FieldMetadata)> {
    let meta: FieldMetadata = serde_json::from_str(&fs::read_to_string(sidecar(path))?)?;
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 32 {
        return Err(invalid("truncated field header"));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i * 8..i * 8 + 8].try_into().expect("8 bytes")) as usize;
    let (d, n, nm, comps) = (word(0), word(1), word(2), word(3));
    if (d, n, nm, comps) != (meta.d, meta.n, meta.matrix_dim, meta.components) {
        return Err(invalid("binary header disagrees with metadata sidecar"));
    }
    let group: GroupKind = meta.group.parse()?;
    let grid = TorusGrid::new(d, n)?;
    let per = grid.sites() * nm * nm;
    if bytes.len() != 32 + comps * per * 16 {
        return Err(invalid("field body has the wrong length"));
    }
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
    let mut fields = Vec::with_capacity(comps);
    for c in 0..comps {
        let data = (0..per)
            .map(|k| {
                let o = 32 + (c * per + k) * 16;
                Complex64::new(f(o), f(o + 8))
            })
            .collect();
        fields.push(MatField::from_raw(grid, nm, data)?);
    }
    Ok((GaugeField::from_components(group, fields)?, meta))
}
