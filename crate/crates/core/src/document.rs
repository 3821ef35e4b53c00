//! JSON state documents.
//!
//! ```json
//! { "dims": [2, 2], "kind": "pure", "data": [[0.7071067811865476, 0.0], ...] }
//! ```
//!
//! Complex entries are `[re, im]` pairs. Mixed states store a row-major list
//! of rows. An optional header carries a description, the factor already
//! applied to the stored entries (`scale`), and a SHA-256 checksum over the
//! little-endian bytes of every `re, im` in storage order.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GmeError, Result};
use crate::state::{AnyState, DensityMatrix, PureState, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentHeader {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Informational: the stored entries already include this factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DocumentData {
    Pure(Vec<[f64; 2]>),
    Mixed(Vec<Vec<[f64; 2]>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateDocument {
    pub dims: Vec<usize>,
    pub header: Option<DocumentHeader>,
    pub data: DocumentData,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    #[allow(dead_code)]
    dims: Vec<usize>,
    kind: StateKind,
    #[allow(dead_code)]
    #[serde(default)]
    header: Option<DocumentHeader>,
    #[allow(dead_code)]
    data: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Typed<T> {
    dims: Vec<usize>,
    #[allow(dead_code)]
    kind: StateKind,
    #[serde(default)]
    header: Option<DocumentHeader>,
    data: T,
}

fn json_error(e: serde_json::Error) -> GmeError {
    GmeError::Parse(format!("line {} column {}: {}", e.line(), e.column(), e))
}

fn to_c64(p: &[f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl StateDocument {
    pub fn kind(&self) -> StateKind {
        match self.data {
            DocumentData::Pure(_) => StateKind::Pure,
            DocumentData::Mixed(_) => StateKind::Mixed,
        }
    }

    /// Structural parse plus checksum verification; no physical validation.
    pub fn parse(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text).map_err(json_error)?;
        let doc = match env.kind {
            StateKind::Pure => {
                let t: Typed<Vec<[f64; 2]>> = serde_json::from_str(text).map_err(json_error)?;
                Self { dims: t.dims, header: t.header, data: DocumentData::Pure(t.data) }
            }
            StateKind::Mixed => {
                let t: Typed<Vec<Vec<[f64; 2]>>> = serde_json::from_str(text).map_err(json_error)?;
                Self { dims: t.dims, header: t.header, data: DocumentData::Mixed(t.data) }
            }
        };
        doc.check_shape()?;
        doc.check_checksum()?;
        Ok(doc)
    }

    fn check_shape(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(GmeError::Parse("field dims: must list at least one party".into()));
        }
        if let Some((i, d)) = self.dims.iter().enumerate().find(|(_, &d)| d < 2) {
            return Err(GmeError::Parse(format!("field dims[{i}]: local dimension {d} is below 2")));
        }
        let total = self
            .dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| GmeError::Parse("field dims: product overflows".into()))?;
        match &self.data {
            DocumentData::Pure(v) if v.len() != total => {
                Err(GmeError::Parse(format!("field data: expected {total} amplitudes, found {}", v.len())))
            }
            DocumentData::Mixed(rows) => {
                if rows.len() != total {
                    return Err(GmeError::Parse(format!("field data: expected {total} rows, found {}", rows.len())));
                }
                match rows.iter().position(|r| r.len() != total) {
                    Some(i) => Err(GmeError::Parse(format!(
                        "field data[{i}]: expected {total} entries, found {}",
                        rows[i].len()
                    ))),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    fn check_checksum(&self) -> Result<()> {
        if let Some(expected) = self.header.as_ref().and_then(|h| h.checksum.as_ref()) {
            let actual = self.checksum();
            if !expected.eq_ignore_ascii_case(&actual) {
                return Err(GmeError::Checksum { expected: expected.clone(), actual });
            }
        }
        Ok(())
    }

    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        let mut feed = |p: &[f64; 2]| {
            h.update(p[0].to_le_bytes());
            h.update(p[1].to_le_bytes());
        };
        match &self.data {
            DocumentData::Pure(v) => v.iter().for_each(&mut feed),
            DocumentData::Mixed(rows) => rows.iter().flatten().for_each(&mut feed),
        }
        hex::encode(h.finalize())
    }

    pub fn from_pure(psi: &PureState, description: Option<String>) -> Self {
        let mut doc = Self {
            dims: psi.dims().to_vec(),
            header: None,
            data: DocumentData::Pure(psi.amplitudes().iter().map(pair).collect()),
        };
        doc.seal(description);
        doc
    }

    pub fn from_density(rho: &DensityMatrix, description: Option<String>) -> Self {
        let m = rho.matrix();
        let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(&m[(i, j)])).collect()).collect();
        let mut doc = Self { dims: rho.dims().to_vec(), header: None, data: DocumentData::Mixed(rows) };
        doc.seal(description);
        doc
    }

    fn seal(&mut self, description: Option<String>) {
        let checksum = Some(self.checksum());
        self.header = Some(DocumentHeader { description, scale: None, checksum });
    }

    /// Validates norm or trace, hermiticity and positivity within `tol`.
    pub fn to_state(&self, tol: f64) -> Result<AnyState> {
        match &self.data {
            DocumentData::Pure(v) => {
                Ok(AnyState::Pure(PureState::with_tol(self.dims.clone(), v.iter().map(to_c64).collect(), tol)?))
            }
            DocumentData::Mixed(rows) => {
                let d = rows.len();
                let m = DMatrix::from_fn(d, d, |i, j| to_c64(&rows[i][j]));
                Ok(AnyState::Mixed(DensityMatrix::with_tol(self.dims.clone(), m, tol)?))
            }
        }
    }

    /// Pretty JSON with one complex entry (pure) or one row (mixed) per line.
    /// Floats use the shortest representation that parses back to the same bits.
    pub fn to_json(&self) -> String {
        let num = |x: f64| serde_json::to_string(&x).expect("finite float");
        let entry = |p: &[f64; 2]| format!("[{}, {}]", num(p[0]), num(p[1]));
        let mut out = String::from("{\n");
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "  \"dims\": [{}],", dims.join(", "));
        let kind = match self.kind() {
            StateKind::Pure => "pure",
            StateKind::Mixed => "mixed",
        };
        let _ = writeln!(out, "  \"kind\": \"{kind}\",");
        if let Some(h) = &self.header {
            let text = serde_json::to_string_pretty(h).expect("header serializes");
            let _ = writeln!(out, "  \"header\": {},", text.replace('\n', "\n  "));
        }
        out.push_str("  \"data\": [\n");
        let lines: Vec<String> = match &self.data {
            DocumentData::Pure(v) => v.iter().map(entry).collect(),
            DocumentData::Mixed(rows) => {
                rows.iter().map(|r| format!("[{}]", r.iter().map(entry).collect::<Vec<_>>().join(", "))).collect()
            }
        };
        for (k, line) in lines.iter().enumerate() {
            let sep = if k + 1 < lines.len() { "," } else { "" };
            let _ = writeln!(out, "    {line}{sep}");
        }
        out.push_str("  ]\n}\n");
        out
    }
}

pub fn parse_state(text: &str, tol: f64) -> Result<AnyState> {
    StateDocument::parse(text)?.to_state(tol)
}

pub fn read_document(path: impl AsRef<Path>) -> Result<(StateDocument, String)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GmeError::Parse(format!("{}: {e}", path.display())))?;
    let doc = StateDocument::parse(&text).map_err(|e| match e {
        GmeError::Parse(msg) => GmeError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok((doc, text))
}

pub fn parse_state_file(path: impl AsRef<Path>, tol: f64) -> Result<AnyState> {
    read_document(path)?.0.to_state(tol)
}
