//! On-disk layout: one raw little-endian array per tensor plus a JSON
//! manifest, with optional `.npy` (format 1.0) copies of each array.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::BcKind;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::grid::Grid;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LAYOUT: &str = "sample-major [N, S, S]; row-major with x as the slow axis";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32le,
    F64le,
    U32le,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::F32le | Dtype::U32le => 4,
            Dtype::F64le => 8,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::F32le => "f32le",
            Dtype::F64le => "f64le",
            Dtype::U32le => "u32le",
        }
    }

    fn npy_descr(self) -> &'static str {
        match self {
            Dtype::F32le => "<f4",
            Dtype::F64le => "<f8",
            Dtype::U32le => "<u4",
        }
    }
}

/// Element precision of the emitted field grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F32,
    F64,
}

impl Precision {
    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            32 => Some(Precision::F32),
            64 => Some(Precision::F64),
            _ => None,
        }
    }

    pub fn dtype(self) -> Dtype {
        match self {
            Precision::F32 => Dtype::F32le,
            Precision::F64 => Dtype::F64le,
        }
    }

    /// Rounds a value to what this precision stores.
    pub fn quantize(self, v: f64) -> f64 {
        match self {
            Precision::F32 => v as f32 as f64,
            Precision::F64 => v,
        }
    }

    /// Unit round-off of the stored type.
    pub fn epsilon(self) -> f64 {
        match self {
            Precision::F32 => f32::EPSILON as f64,
            Precision::F64 => f64::EPSILON,
        }
    }
}

/// Which operator family a dataset was generated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorFamily {
    Poisson,
    DivformFixed,
    DivformParam,
    Semilinear,
}

impl OperatorFamily {
    pub const ALL: [OperatorFamily; 4] = [
        OperatorFamily::Poisson,
        OperatorFamily::DivformFixed,
        OperatorFamily::DivformParam,
        OperatorFamily::Semilinear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorFamily::Poisson => "poisson",
            OperatorFamily::DivformFixed => "divform-fixed",
            OperatorFamily::DivformParam => "divform-param",
            OperatorFamily::Semilinear => "semilinear",
        }
    }

    /// Whether samples carry `(α, δ)` input channels and per-sample matrix
    /// parameters.
    pub fn is_parametric(self) -> bool {
        self == OperatorFamily::DivformParam
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayEntry {
    pub name: String,
    pub file: String,
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub npy: Option<String>,
}

impl ArrayEntry {
    pub fn byte_len(&self) -> u64 {
        self.shape.iter().product::<usize>() as u64 * self.dtype.size() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub operator: OperatorFamily,
    pub bc: BcKind,
    pub resolution: usize,
    pub includes_boundary: bool,
    pub num_samples: usize,
    pub m_min: u32,
    pub m_max: u32,
    pub master_seed: u64,
    pub dtype: Dtype,
    pub layout: String,
    pub arrays: Vec<ArrayEntry>,
    pub generated_at_unix: u64,
}

impl DatasetManifest {
    /// Reads and version-checks a manifest without touching the arrays.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|source| Error::ManifestParse {
            path: path.to_path_buf(),
            source,
        })?;
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::InvalidManifest("missing integer \"version\" key".into()))?;
        if version != MANIFEST_VERSION as u64 {
            return Err(Error::UnknownVersion(version.min(u32::MAX as u64) as u32));
        }
        serde_json::from_value(value).map_err(|source| Error::ManifestParse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&tmp, text + "\n").map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn array(&self, name: &str) -> Option<&ArrayEntry> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.resolution, self.includes_boundary)
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        FieldSpec::new(self.bc, self.m_min, self.m_max, self.master_seed)
    }

    pub fn precision(&self) -> Result<Precision> {
        match self.dtype {
            Dtype::F32le => Ok(Precision::F32),
            Dtype::F64le => Ok(Precision::F64),
            Dtype::U32le => Err(Error::InvalidManifest("grid dtype must be f32le or f64le".into())),
        }
    }

    /// Checks that every referenced array exists with the byte length its
    /// shape implies.
    pub fn check_files(&self, dir: &Path) -> Result<()> {
        for entry in &self.arrays {
            let path = dir.join(&entry.file);
            let meta = match fs::metadata(&path) {
                Ok(m) => m,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::MissingArrayFile { path }),
                Err(e) => return Err(Error::io(path, e)),
            };
            if meta.len() != entry.byte_len() {
                return Err(Error::ShapeMismatch {
                    path,
                    expected: entry.byte_len(),
                    actual: meta.len(),
                });
            }
        }
        Ok(())
    }
}

/// Appends values to a raw array stream in a fixed dtype.
pub struct ArrayWriter<W: Write> {
    inner: W,
    dtype: Dtype,
    buf: Vec<u8>,
}

impl<W: Write> ArrayWriter<W> {
    pub fn new(inner: W, dtype: Dtype) -> Self {
        Self {
            inner,
            dtype,
            buf: Vec::new(),
        }
    }

    pub fn write_f64s(&mut self, values: &[f64]) -> std::io::Result<()> {
        self.buf.clear();
        match self.dtype {
            Dtype::F32le => {
                for &v in values {
                    self.buf.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
            Dtype::F64le => {
                for &v in values {
                    self.buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            Dtype::U32le => {
                for &v in values {
                    self.buf.extend_from_slice(&(v as u32).to_le_bytes());
                }
            }
        }
        self.inner.write_all(&self.buf)
    }

    pub fn write_u32(&mut self, v: u32) -> std::io::Result<()> {
        debug_assert_eq!(self.dtype, Dtype::U32le);
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn into_inner(self) -> W {
        self.inner
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

/// Reads fixed-size chunks from a raw array stream.
pub struct ArrayReader<R: Read> {
    inner: R,
    dtype: Dtype,
    buf: Vec<u8>,
}

impl<R: Read> ArrayReader<R> {
    pub fn new(inner: R, dtype: Dtype) -> Self {
        Self {
            inner,
            dtype,
            buf: Vec::new(),
        }
    }

    pub fn read_f64s(&mut self, count: usize) -> std::io::Result<Vec<f64>> {
        self.buf.resize(count * self.dtype.size(), 0);
        self.inner.read_exact(&mut self.buf)?;
        let out = match self.dtype {
            Dtype::F32le => self
                .buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
            Dtype::F64le => self
                .buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
            Dtype::U32le => self
                .buf
                .chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
        };
        Ok(out)
    }

    pub fn read_u32(&mut self) -> std::io::Result<u32> {
        let mut b = [0u8; 4];
        self.inner.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
}

/// `.npy` format 1.0 header for a C-ordered array; total header length is
/// padded to a multiple of 64 bytes.
pub fn npy_header(dtype: Dtype, shape: &[usize]) -> Vec<u8> {
    let shape_str = match shape {
        [n] => format!("({n},)"),
        _ => format!(
            "({})",
            shape.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
        ),
    };
    let mut dict = format!(
        "{{'descr': '{}', 'fortran_order': False, 'shape': {}, }}",
        dtype.npy_descr(),
        shape_str
    );
    let preamble = 10;
    let unpadded = preamble + dict.len() + 1;
    let padded = unpadded.div_ceil(64) * 64;
    dict.push_str(&" ".repeat(padded - unpadded));
    dict.push('\n');
    let mut out = Vec::with_capacity(padded);
    out.extend_from_slice(b"\x93NUMPY");
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out
}

/// Writes `<stem>.npy` next to a finished raw array.
pub(crate) fn write_npy_mirror(dir: &Path, entry: &ArrayEntry) -> Result<String> {
    let raw_path = dir.join(&entry.file);
    let npy_name = Path::new(&entry.file)
        .with_extension("npy")
        .to_string_lossy()
        .into_owned();
    let npy_path = dir.join(&npy_name);
    let mut src = BufReader::new(File::open(&raw_path).map_err(|e| Error::io(&raw_path, e))?);
    let mut dst = BufWriter::new(File::create(&npy_path).map_err(|e| Error::io(&npy_path, e))?);
    dst.write_all(&npy_header(entry.dtype, &entry.shape))
        .and_then(|_| std::io::copy(&mut src, &mut dst).map(|_| ()))
        .and_then(|_| dst.flush())
        .map_err(|e| Error::io(&npy_path, e))?;
    Ok(npy_name)
}

pub(crate) fn open_reader(dir: &Path, entry: &ArrayEntry) -> Result<(PathBuf, ArrayReader<BufReader<File>>)> {
    let path = dir.join(&entry.file);
    let file = File::open(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArrayFile { path: path.clone() },
        _ => Error::io(&path, e),
    })?;
    Ok((path, ArrayReader::new(BufReader::new(file), entry.dtype)))
}
