//! Independent checks of generated data.
//!
//! Nothing here reuses the analytic differentiation of
//! [`crate::operators`]: residuals come from finite differences of `u`,
//! the Poisson inverse from a discrete sine transform, and orthonormality
//! from quadrature.

pub mod dst;
pub mod fd;
pub mod quadrature;
pub mod residual;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::basis::BcKind;
use crate::dataset::{read_dataset, SampleRecord};
use crate::error::Result;
use crate::field::{sample_field, FieldSpec, GridBasis, RandomField};
use crate::grid::Grid;
use crate::io::{OperatorFamily, Precision};
use crate::parallel::Executor;

pub use dst::dst_poisson_inverse;
pub use fd::fd_apply;
pub use quadrature::{h1_gram, h1_inner_product};
pub use residual::{residual_check, residual_check_field, ResidualReport, ORDER_RANGE, RESIDUAL_C0};

/// Relative max-norm tolerance of the sine-transform round trip.
pub const DST_TOLERANCE: f64 = 1e-10;

/// Records verified per parallel batch.
const BATCH: usize = 256;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Also evaluate on the refined grid and estimate the convergence order.
    pub refine: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordReport {
    pub sample_index: u64,
    pub truncation: usize,
    /// Coarse check resolution; exceeds the dataset's when `M` requires it.
    pub check_resolution: usize,
    pub coarse_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fine_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    pub bound: f64,
    pub stored_mismatch: f64,
    /// Relative max error of the sine-transform inverse (Dirichlet Poisson only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dst_error: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub records: usize,
    pub passed: usize,
    pub failed: usize,
    pub median_order: Option<f64>,
    pub max_coarse_residual: f64,
    pub max_stored_mismatch: f64,
    pub max_dst_error: Option<f64>,
    pub all_passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub manifest: PathBuf,
    pub operator: OperatorFamily,
    pub bc: BcKind,
    pub resolution: usize,
    pub refine: bool,
    pub residual_constant_c0: f64,
    pub residual_bound: &'static str,
    pub order_range: [f64; 2],
    pub records: Vec<RecordReport>,
    pub summary: Summary,
}

/// Relative max error of recovering `u` from the analytic `f` at the
/// interior nodes `k/(S−1)` of a boundary-inclusive grid.
pub fn dst_roundtrip_error(field: &RandomField, grid: &Grid) -> Result<f64> {
    let basis = GridBasis::new(field.bc(), *grid, field.truncation());
    let u = field.spectral_grid(&basis, |_| 1.0);
    let f = field.spectral_grid(&basis, |lambda| lambda);
    let n = grid.len();
    let f_in = fd::interior(&f, n);
    let u_in = fd::interior(&u, n);
    let s = if grid.includes_boundary() { n - 1 } else { n + 1 };
    let rec = dst_poisson_inverse(&f_in, s, field.bc())?;
    let err = rec.iter().zip(&u_in).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = u_in.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    Ok(if scale == 0.0 { err } else { err / scale })
}

fn verify_record(
    record: &SampleRecord,
    spec: &FieldSpec,
    grid: &Grid,
    precision: Precision,
    options: VerifyOptions,
) -> Result<RecordReport> {
    let field = sample_field(spec, record.meta.sample_index);
    let check = residual_check(record, &field, grid, precision)?;
    let (mut passed, mut failure) = if options.refine {
        (check.passed, check.failure.clone())
    } else {
        // Coarse grid only: no order estimate, bound at the coarse spacing.
        let op = residual::operator_of(record)?;
        let coarse_grid = residual::check_grid(grid, field.truncation());
        let bound = residual::residual_bound(&field, &op, coarse_grid.spacing());
        if check.stored_ok != Some(true) {
            (false, check.failure.clone())
        } else if check.coarse_residual > bound {
            (
                false,
                Some(format!(
                    "coarse residual {:.3e} exceeds bound {bound:.3e}",
                    check.coarse_residual
                )),
            )
        } else {
            (true, None)
        }
    };

    let dst_error = if record.meta.family == OperatorFamily::Poisson
        && record.meta.bc == BcKind::Dirichlet
        && grid.includes_boundary()
        && field.truncation() + 2 <= grid.len()
    {
        let e = dst_roundtrip_error(&field, grid)?;
        if e > DST_TOLERANCE {
            passed = false;
            failure.get_or_insert_with(|| format!("sine-transform round trip error {e:.3e}"));
        }
        Some(e)
    } else {
        None
    };

    Ok(RecordReport {
        sample_index: record.meta.sample_index,
        truncation: field.truncation(),
        check_resolution: check.coarse_resolution,
        coarse_residual: check.coarse_residual,
        fine_residual: options.refine.then_some(check.fine_residual),
        order: if options.refine { check.order } else { None },
        bound: check.bound,
        stored_mismatch: check.stored_mismatch.unwrap_or(0.0),
        dst_error,
        passed,
        failure,
    })
}

/// Verifies every record of a dataset; reports are ordered by sample index.
pub fn verify_dataset(manifest_path: &Path, options: VerifyOptions, executor: &Executor) -> Result<VerifyReport> {
    let mut reader = read_dataset(manifest_path)?;
    let manifest = reader.manifest().clone();
    let spec = manifest.field_spec()?;
    let grid = manifest.grid()?;
    let precision = manifest.precision()?;

    let mut records = Vec::with_capacity(manifest.num_samples);
    loop {
        let batch: Vec<SampleRecord> = reader.by_ref().take(BATCH).collect::<Result<_>>()?;
        if batch.is_empty() {
            break;
        }
        let reports = executor.map_slice(&batch, |rec| verify_record(rec, &spec, &grid, precision, options));
        for r in reports {
            records.push(r?);
        }
    }

    let passed = records.iter().filter(|r| r.passed).count();
    let mut orders: Vec<f64> = records.iter().filter_map(|r| r.order).collect();
    let summary = Summary {
        records: records.len(),
        passed,
        failed: records.len() - passed,
        median_order: median(&mut orders),
        max_coarse_residual: records.iter().map(|r| r.coarse_residual).fold(0.0, f64::max),
        max_stored_mismatch: records.iter().map(|r| r.stored_mismatch).fold(0.0, f64::max),
        max_dst_error: records.iter().filter_map(|r| r.dst_error).reduce(f64::max),
        all_passed: passed == records.len(),
    };
    Ok(VerifyReport {
        manifest: manifest_path.to_path_buf(),
        operator: manifest.operator,
        bc: manifest.bc,
        resolution: manifest.resolution,
        refine: options.refine,
        residual_constant_c0: RESIDUAL_C0,
        residual_bound: "C0 * kappa_A * max|a_ij| * (M*pi)^4 * h^2",
        order_range: [*ORDER_RANGE.start(), *ORDER_RANGE.end()],
        records,
        summary,
    })
}

/// Median of the finite values; sorts in place.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
