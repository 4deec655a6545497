//! JSON persistence.
//!
//! Output is canonical: object keys sorted, no insignificant whitespace, and
//! every float written with 17 significant digits so that reading it back
//! gives the same bits. Complex numbers are `[re, im]` pairs and matrices are
//! row-major nested arrays.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::Formatter;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::kernel::OperatorKernel;
use crate::linalg::CMat;
use crate::linearisation::Linearisation;
use crate::module::AdjointableOp;

pub const SCHEMA_VERSION: u32 = 1;

struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value == 0.0 {
            // keeps -0.0 and 0.0 apart without exponent noise
            return writer.write_all(if value.is_sign_negative() { b"-0.0" } else { b"0.0" });
        }
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Canonical serialisation of any serialisable value.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // Going through Value sorts object keys.
    let tree = serde_json::to_value(value).map_err(|e| Error::Parse { path: "<memory>".into(), message: e.to_string() })?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    tree.serialize(&mut ser).map_err(|e| Error::Parse { path: "<memory>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

fn parse_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Parse { path: path.display().to_string(), message: e.to_string() }
}

pub fn write_canonical<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_canonical_string(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a JSON file, checks `schema_version` and deserialises it.
pub fn read_versioned<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    from_versioned_str(&text).map_err(|e| match e {
        Error::Parse { message, .. } => parse_error(path, message),
        other => other,
    })
}

pub fn from_versioned_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let tree: Value = serde_json::from_str(text).map_err(|e| Error::Parse { path: "<memory>".into(), message: e.to_string() })?;
    let found = tree
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse { path: "schema_version".into(), message: "missing or not an integer".into() })?;
    if found != SCHEMA_VERSION as u64 {
        return Err(Error::VersionMismatch { expected: SCHEMA_VERSION, found: found as u32 });
    }
    serde_json::from_value(tree).map_err(|e| Error::Parse { path: "<memory>".into(), message: e.to_string() })
}

/// A complex matrix in the `[[[re, im], ...], ...]` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct JsonMatrix(pub CMat);

impl Serialize for JsonMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = &self.0;
        let rows: Vec<Vec<[f64; 2]>> =
            (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect();
        if m.nrows() == 0 {
            // an empty matrix still needs its column count to round-trip
            return (0usize, m.ncols()).serialize(s);
        }
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for JsonMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Empty(usize, usize),
            Rows(Vec<Vec<[f64; 2]>>),
        }
        match Raw::deserialize(d)? {
            Raw::Empty(r, c) => {
                if r != 0 {
                    return Err(serde::de::Error::custom("only empty matrices use the [0, cols] form"));
                }
                Ok(JsonMatrix(CMat::zeros(0, c)))
            }
            Raw::Rows(rows) => {
                let ncols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(serde::de::Error::custom("ragged matrix rows"));
                }
                Ok(JsonMatrix(CMat::from_fn(rows.len(), ncols, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1]))))
            }
        }
    }
}

fn to_json(ms: &[CMat]) -> Vec<JsonMatrix> {
    ms.iter().cloned().map(JsonMatrix).collect()
}

fn from_json(ms: Vec<JsonMatrix>) -> Vec<CMat> {
    ms.into_iter().map(|m| m.0).collect()
}

/// An `N x N` array of kernel values, each a list of component matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelFile {
    pub schema_version: u32,
    pub shape: AlgebraShape,
    pub rank: usize,
    pub points: usize,
    pub values: Vec<Vec<Vec<JsonMatrix>>>,
}

impl KernelFile {
    pub fn from_kernel(k: &OperatorKernel) -> Self {
        let values = (0..k.points())
            .map(|x| (0..k.points()).map(|y| to_json(k.get(x, y).components())).collect())
            .collect();
        Self { schema_version: SCHEMA_VERSION, shape: k.shape().clone(), rank: k.rank(), points: k.points(), values }
    }

    pub fn into_kernel(self) -> Result<OperatorKernel> {
        kernel_from_values(&self.shape, self.rank, self.points, self.values, "values")
    }
}

/// Builds a kernel from nested value arrays, naming the JSON path of the first
/// malformed entry.
pub fn kernel_from_values(
    shape: &AlgebraShape,
    rank: usize,
    points: usize,
    values: Vec<Vec<Vec<JsonMatrix>>>,
    path: &str,
) -> Result<OperatorKernel> {
    if values.len() != points || values.iter().any(|row| row.len() != points) {
        return Err(Error::Dimension(format!("{path}: expected a {points} x {points} array")));
    }
    let mut flat = Vec::with_capacity(points * points);
    for (x, row) in values.into_iter().enumerate() {
        for (y, comps) in row.into_iter().enumerate() {
            let op = AdjointableOp::new(shape.clone(), rank, from_json(comps))
                .map_err(|e| Error::Dimension(format!("{path}[{x}][{y}]: {e}")))?;
            flat.push(op);
        }
    }
    OperatorKernel::new(shape.clone(), rank, points, flat)
}

/// SHA-256 of the canonical kernel JSON, hex encoded.
pub fn kernel_hash(k: &OperatorKernel) -> String {
    let text = to_canonical_string(&KernelFile::from_kernel(k)).expect("kernel serialises");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorEntry {
    pub dim: usize,
    pub factor: JsonMatrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearisationFile {
    pub schema_version: u32,
    pub shape: AlgebraShape,
    pub rank: usize,
    pub points: usize,
    pub tol: f64,
    pub kernel_hash: Option<String>,
    pub components: Vec<FactorEntry>,
}

impl LinearisationFile {
    pub fn new(lin: &Linearisation, kernel: Option<&OperatorKernel>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            shape: lin.shape().clone(),
            rank: lin.rank(),
            points: lin.points(),
            tol: lin.tol(),
            kernel_hash: kernel.map(kernel_hash),
            components: lin
                .factors()
                .iter()
                .map(|f| FactorEntry { dim: f.nrows(), factor: JsonMatrix(f.clone()) })
                .collect(),
        }
    }

    pub fn into_linearisation(self) -> Result<Linearisation> {
        for (i, c) in self.components.iter().enumerate() {
            if c.factor.0.nrows() != c.dim {
                return Err(Error::Dimension(format!("components[{i}]: dim {} but factor has {} rows", c.dim, c.factor.0.nrows())));
            }
        }
        let factors = self.components.into_iter().map(|c| c.factor.0).collect();
        Linearisation::from_factors(self.shape, self.rank, self.points, self.tol, factors)
    }
}

pub fn save_kernel(path: &Path, k: &OperatorKernel) -> Result<()> {
    write_canonical(path, &KernelFile::from_kernel(k))
}

pub fn load_kernel(path: &Path) -> Result<OperatorKernel> {
    read_versioned::<KernelFile>(path)?.into_kernel()
}

pub fn save_linearisation(path: &Path, lin: &Linearisation, kernel: Option<&OperatorKernel>) -> Result<()> {
    write_canonical(path, &LinearisationFile::new(lin, kernel))
}

/// The linearisation and the hash of the kernel it was built from, if
/// recorded.
pub fn load_linearisation(path: &Path) -> Result<(Linearisation, Option<String>)> {
    let file: LinearisationFile = read_versioned(path)?;
    let hash = file.kernel_hash.clone();
    Ok((file.into_linearisation()?, hash))
}
