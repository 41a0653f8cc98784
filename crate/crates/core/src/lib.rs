//! Synthetic `(f, [α, δ], u)` training data for elliptic neural operators,
//! generated without solving a PDE.
//!
//! A solution `u` is drawn as a random truncated expansion in the Dirichlet
//! (sine) or Neumann (cosine) eigenbasis of the Laplacian on the unit
//! square, and the matching right-hand side `f` is obtained by applying the
//! differential operator analytically:
//!
//! * Poisson, `−Δu = f`
//! * divergence form, `−div(A∇u) = f`, with a fixed or a per-sample
//!   diagonal-linear `A`
//! * semilinear, `−Δu + e^{2u} = f`
//!
//! The [`verify`] module checks generated data independently with finite
//! differences, a sine-transform Poisson inverse, and quadrature.
//!
//! ```
//! use synthop::{BcKind, FieldSpec, Grid, GridBasis, OperatorKind};
//!
//! let spec = FieldSpec::new(BcKind::Dirichlet, 1, 20, 42).unwrap();
//! let field = synthop::sample_field(&spec, 0);
//! let grid = Grid::with_boundary(64).unwrap();
//! let basis = GridBasis::new(spec.bc, grid, 20);
//! let (u, f) = synthop::apply_on_grid(&field, &OperatorKind::Poisson, &basis).unwrap();
//! assert_eq!(u.len(), 64 * 64);
//! assert_eq!(f.len(), 64 * 64);
//! ```

pub mod basis;
pub mod dataset;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod operators;
pub mod parallel;
pub mod rng;
pub mod verify;

pub use basis::{eigenvalue, eval_basis, BasisValue, BcKind, EigenIndex};
pub use dataset::{
    build_record, generate_dataset, generate_into, make_sample, ood_rhs, read_dataset, DatasetConfig, DatasetReader,
    OodRhs, RecordWriter, SampleMeta, SampleRecord,
};
pub use error::{Error, Result};
pub use field::{eval_field, sample_field, FieldGrids, FieldSpec, GridBasis, RandomField};
pub use grid::Grid;
pub use io::{DatasetManifest, Dtype, OperatorFamily, Precision, MANIFEST_FILE};
pub use operators::{
    apply_divergence_form, apply_on_grid, apply_poisson, apply_semilinear, sample_coefficient_matrix,
    CoefficientMatrix, ExpTwoU, OperatorKind, Reaction,
};
pub use parallel::{Execution, Executor};
pub use rng::{SampleRng, StreamPurpose};
