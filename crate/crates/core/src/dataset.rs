//! Sample assembly, dataset generation and streaming reads.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::basis::BcKind;
use crate::error::{Error, Result};
use crate::field::{sample_field, FieldSpec, GridBasis, RandomField};
use crate::grid::Grid;
use crate::io::{
    open_reader, write_npy_mirror, ArrayEntry, ArrayReader, ArrayWriter, DatasetManifest, Dtype, OperatorFamily,
    Precision, LAYOUT, MANIFEST_FILE, MANIFEST_VERSION,
};
use crate::operators::{apply_on_grid, sample_coefficient_matrix, CoefficientMatrix, OperatorKind};
use crate::parallel::Executor;
use crate::rng::{SampleRng, StreamPurpose};

/// Samples generated per parallel batch before they are written in order.
const BATCH: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMeta {
    pub sample_index: u64,
    pub truncation: u32,
    pub bc: BcKind,
    pub family: OperatorFamily,
    pub matrix_params: Option<[f64; 4]>,
}

/// One `(f, [α, δ], u)` training example on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub f: Vec<f64>,
    pub u: Vec<f64>,
    /// `(α, δ)` grids for the parametric family.
    pub coeff_channels: Option<(Vec<f64>, Vec<f64>)>,
    pub meta: SampleMeta,
}

impl SampleRecord {
    /// The record as it reads back after storage at `precision`.
    pub fn quantized(&self, precision: Precision) -> SampleRecord {
        let q = |v: &Vec<f64>| v.iter().map(|&x| precision.quantize(x)).collect::<Vec<_>>();
        SampleRecord {
            f: q(&self.f),
            u: q(&self.u),
            coeff_channels: self.coeff_channels.as_ref().map(|(a, d)| (q(a), q(d))),
            meta: self.meta,
        }
    }
}

/// The operator a given sample uses. The parametric family draws its matrix
/// from the sample's own matrix stream.
pub fn operator_for_sample(family: OperatorFamily, master_seed: u64, sample_index: u64) -> OperatorKind {
    match family {
        OperatorFamily::Poisson => OperatorKind::Poisson,
        OperatorFamily::Semilinear => OperatorKind::Semilinear,
        OperatorFamily::DivformFixed => OperatorKind::DivergenceForm(CoefficientMatrix::Fixed),
        OperatorFamily::DivformParam => {
            let mut rng = SampleRng::for_sample(master_seed, sample_index, StreamPurpose::CoefficientMatrix);
            OperatorKind::DivergenceForm(sample_coefficient_matrix(&mut rng))
        }
    }
}

/// Evaluates `u`, `f` and, for diagonal-linear matrices, the `(α, δ)` grids.
pub fn build_record(
    field: &RandomField,
    family: OperatorFamily,
    op: &OperatorKind,
    basis: &GridBasis,
) -> Result<SampleRecord> {
    let (u, f) = apply_on_grid(field, op, basis)?;
    let matrix = op.matrix();
    let coeff_channels = if family.is_parametric() {
        let pts = basis.grid().points();
        let (alpha, delta) = pts
            .iter()
            .map(|&(x, y)| {
                let e = matrix.entries(x, y);
                (e.a11, e.a22)
            })
            .unzip();
        Some((alpha, delta))
    } else {
        None
    };
    Ok(SampleRecord {
        f,
        u,
        coeff_channels,
        meta: SampleMeta {
            sample_index: field.sample_index(),
            truncation: field.truncation() as u32,
            bc: field.bc(),
            family,
            matrix_params: matrix.params(),
        },
    })
}

/// Draws and evaluates sample `index` of a dataset.
pub fn make_sample(spec: &FieldSpec, family: OperatorFamily, basis: &GridBasis, index: u64) -> Result<SampleRecord> {
    let field = sample_field(spec, index);
    let op = operator_for_sample(family, spec.master_seed, index);
    build_record(&field, family, &op, basis)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetConfig {
    pub spec: FieldSpec,
    pub family: OperatorFamily,
    pub grid: Grid,
    pub num_samples: usize,
    pub precision: Precision,
    pub npy_mirror: bool,
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.num_samples == 0 {
            return Err(Error::InvalidFieldSpec("sample count must be >= 1".into()));
        }
        Ok(())
    }

    fn array_entries(&self) -> Vec<ArrayEntry> {
        let n = self.grid.len();
        let grid_shape = vec![self.num_samples, n, n];
        let dtype = self.precision.dtype();
        let entry = |name: &str, dtype: Dtype, shape: Vec<usize>| ArrayEntry {
            name: name.to_string(),
            file: format!("{name}.bin"),
            dtype,
            shape,
            npy: None,
        };
        let mut out = vec![
            entry("f", dtype, grid_shape.clone()),
            entry("u", dtype, grid_shape.clone()),
        ];
        if self.family.is_parametric() {
            out.push(entry("alpha", dtype, grid_shape.clone()));
            out.push(entry("delta", dtype, grid_shape));
            out.push(entry("matrix_params", Dtype::F64le, vec![self.num_samples, 4]));
        }
        out.push(entry("truncation", Dtype::U32le, vec![self.num_samples]));
        out
    }

    pub fn manifest(&self) -> DatasetManifest {
        DatasetManifest {
            version: MANIFEST_VERSION,
            operator: self.family,
            bc: self.spec.bc,
            resolution: self.grid.resolution(),
            includes_boundary: self.grid.includes_boundary(),
            num_samples: self.num_samples,
            m_min: self.spec.m_min,
            m_max: self.spec.m_max,
            master_seed: self.spec.master_seed,
            dtype: self.precision.dtype(),
            layout: LAYOUT.to_string(),
            arrays: self.array_entries(),
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

/// Output streams for every array of a dataset.
pub struct RecordWriter<W: Write> {
    f: ArrayWriter<W>,
    u: ArrayWriter<W>,
    coeff: Option<(ArrayWriter<W>, ArrayWriter<W>, ArrayWriter<W>)>,
    truncation: ArrayWriter<W>,
}

impl<W: Write> RecordWriter<W> {
    /// `make` is called once per array name of `cfg`, in manifest order.
    pub fn new(cfg: &DatasetConfig, mut make: impl FnMut(&ArrayEntry) -> std::io::Result<W>) -> std::io::Result<Self> {
        let mut writers = Vec::new();
        for entry in cfg.array_entries() {
            writers.push(ArrayWriter::new(make(&entry)?, entry.dtype));
        }
        let mut it = writers.into_iter();
        let f = it.next().expect("f array");
        let u = it.next().expect("u array");
        let coeff = if cfg.family.is_parametric() {
            Some((it.next().unwrap(), it.next().unwrap(), it.next().unwrap()))
        } else {
            None
        };
        let truncation = it.next().expect("truncation array");
        Ok(Self {
            f,
            u,
            coeff,
            truncation,
        })
    }

    pub fn write_record(&mut self, rec: &SampleRecord) -> std::io::Result<()> {
        self.f.write_f64s(&rec.f)?;
        self.u.write_f64s(&rec.u)?;
        if let Some((alpha, delta, params)) = &mut self.coeff {
            let (a, d) = rec
                .coeff_channels
                .as_ref()
                .ok_or_else(|| std::io::Error::other("parametric record without coefficient channels"))?;
            alpha.write_f64s(a)?;
            delta.write_f64s(d)?;
            let m = rec
                .meta
                .matrix_params
                .ok_or_else(|| std::io::Error::other("parametric record without matrix parameters"))?;
            params.write_f64s(&m)?;
        }
        self.truncation.write_u32(rec.meta.truncation)
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.f.flush()?;
        self.u.flush()?;
        if let Some((a, d, p)) = &mut self.coeff {
            a.flush()?;
            d.flush()?;
            p.flush()?;
        }
        self.truncation.flush()
    }
}

/// Generates every sample of `cfg` and streams the records, in index order,
/// into `writer`. Samples are computed in parallel batches.
pub fn generate_into<W: Write>(cfg: &DatasetConfig, writer: &mut RecordWriter<W>, executor: &Executor) -> Result<()> {
    cfg.validate()?;
    let basis = GridBasis::new(cfg.spec.bc, cfg.grid, cfg.spec.m_max as usize);
    let total = cfg.num_samples as u64;
    let mut start = 0;
    while start < total {
        let end = (start + BATCH).min(total);
        let batch = executor.map_range(start..end, |k| make_sample(&cfg.spec, cfg.family, &basis, k));
        for rec in batch {
            writer
                .write_record(&rec?)
                .map_err(|e| Error::io("<dataset stream>", e))?;
        }
        start = end;
    }
    writer.flush().map_err(|e| Error::io("<dataset stream>", e))
}

/// Writes a dataset into `out_dir` and returns its manifest.
///
/// The manifest is written last; if anything fails, the array files created
/// so far are removed.
pub fn generate_dataset(cfg: &DatasetConfig, out_dir: &Path, executor: &Executor) -> Result<DatasetManifest> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = cfg.manifest();
    let created: Vec<PathBuf> = manifest.arrays.iter().map(|a| out_dir.join(&a.file)).collect();

    let result = (|| {
        let mut writer = RecordWriter::new(cfg, |entry| File::create(out_dir.join(&entry.file)).map(BufWriter::new))
            .map_err(|e| Error::io(out_dir, e))?;
        generate_into(cfg, &mut writer, executor).map_err(|e| relabel_stream_error(e, out_dir))?;
        drop(writer);
        if cfg.npy_mirror {
            for entry in manifest.arrays.iter_mut() {
                entry.npy = Some(write_npy_mirror(out_dir, entry)?);
            }
        }
        manifest.check_files(out_dir)?;
        manifest.write(&out_dir.join(MANIFEST_FILE))
    })();

    if let Err(e) = result {
        for path in &created {
            let _ = fs::remove_file(path);
            let _ = fs::remove_file(path.with_extension("npy"));
        }
        return Err(e);
    }
    Ok(manifest)
}

fn relabel_stream_error(e: Error, dir: &Path) -> Error {
    match e {
        Error::Io { path, source } if path.as_os_str() == "<dataset stream>" => Error::Io {
            path: dir.to_path_buf(),
            source,
        },
        other => other,
    }
}

/// Opens a dataset for streaming reads; see [`DatasetReader`].
pub fn read_dataset(manifest_path: &Path) -> Result<DatasetReader> {
    DatasetReader::open(manifest_path)
}

type FileReader = ArrayReader<BufReader<File>>;

/// Yields the records of a dataset in index order.
pub struct DatasetReader {
    manifest: DatasetManifest,
    dir: PathBuf,
    points: usize,
    next: u64,
    f: (PathBuf, FileReader),
    u: (PathBuf, FileReader),
    coeff: Option<[(PathBuf, FileReader); 3]>,
    truncation: (PathBuf, FileReader),
}

impl DatasetReader {
    pub fn open(manifest_path: &Path) -> Result<Self> {
        let manifest = DatasetManifest::load(manifest_path)?;
        let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
        manifest.precision()?;
        let grid = manifest.grid()?;
        manifest.check_files(&dir)?;

        let open = |name: &str| -> Result<(PathBuf, FileReader)> {
            let entry = manifest
                .array(name)
                .ok_or_else(|| Error::InvalidManifest(format!("no \"{name}\" array listed")))?;
            let expected: Vec<usize> = match name {
                "truncation" => vec![manifest.num_samples],
                "matrix_params" => vec![manifest.num_samples, 4],
                _ => vec![manifest.num_samples, grid.len(), grid.len()],
            };
            if entry.shape != expected {
                return Err(Error::ShapeMismatch {
                    path: dir.join(&entry.file),
                    expected: expected.iter().product::<usize>() as u64 * entry.dtype.size() as u64,
                    actual: entry.byte_len(),
                });
            }
            open_reader(&dir, entry)
        };
        let f = open("f")?;
        let u = open("u")?;
        let coeff = if manifest.operator.is_parametric() {
            Some([open("alpha")?, open("delta")?, open("matrix_params")?])
        } else {
            None
        };
        let truncation = open("truncation")?;
        Ok(Self {
            points: grid.num_points(),
            manifest,
            dir,
            next: 0,
            f,
            u,
            coeff,
            truncation,
        })
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn read_next(&mut self) -> Result<SampleRecord> {
        let n = self.points;
        let read = |(path, r): &mut (PathBuf, FileReader), count: usize| {
            r.read_f64s(count).map_err(|e| Error::io(path.as_path(), e))
        };
        let f = read(&mut self.f, n)?;
        let u = read(&mut self.u, n)?;
        let (coeff_channels, matrix_params) = match &mut self.coeff {
            Some([a, d, p]) => {
                let alpha = read(a, n)?;
                let delta = read(d, n)?;
                let m = read(p, 4)?;
                (Some((alpha, delta)), Some([m[0], m[1], m[2], m[3]]))
            }
            None => (None, None),
        };
        let (tpath, treader) = &mut self.truncation;
        let truncation = treader.read_u32().map_err(|e| Error::io(tpath.as_path(), e))?;
        let rec = SampleRecord {
            f,
            u,
            coeff_channels,
            meta: SampleMeta {
                sample_index: self.next,
                truncation,
                bc: self.manifest.bc,
                family: self.manifest.operator,
                matrix_params,
            },
        };
        self.next += 1;
        Ok(rec)
    }
}

impl Iterator for DatasetReader {
    type Item = Result<SampleRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.manifest.num_samples as u64 {
            return None;
        }
        Some(self.read_next())
    }
}

/// Closed-form right-hand sides outside the trigonometric training family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OodRhs {
    /// `x − y`
    LinearDiff,
    /// `|x − 0.5|·|y − 0.5|`
    CornerAbs,
}

impl OodRhs {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            OodRhs::LinearDiff => x - y,
            OodRhs::CornerAbs => (x - 0.5).abs() * (y - 0.5).abs(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OodRhs::LinearDiff => "linear_diff",
            OodRhs::CornerAbs => "corner_abs",
        }
    }
}

pub fn ood_rhs(name: OodRhs, grid: &Grid) -> Vec<f64> {
    grid.points().into_iter().map(|(x, y)| name.eval(x, y)).collect()
}
