//! Closed-form right-hand sides `f = −div(A∇u) + c(u)` for the supported
//! operator families.

use serde::{Deserialize, Serialize};

use crate::basis::BasisValue;
use crate::error::{Error, Result};
use crate::field::{GridBasis, RandomField};
use crate::rng::SampleRng;

/// Inclusive support of the diagonal-linear parameters.
pub const DIAGONAL_PARAM_RANGE: (f64, f64) = (0.1, 5.0);

/// The enumerated coefficient matrices `A(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum CoefficientMatrix {
    Identity,
    /// `[[x², sin(xy)], [x + y, y]]`, used verbatim even though it is not
    /// symmetric.
    Fixed,
    /// `diag(m1·x + m2·y, m3·x + m4·y)`.
    DiagonalLinear {
        m: [f64; 4],
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixEntries {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

/// The entry partials that appear in `div(A∇u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryPartials {
    pub dx_a11: f64,
    pub dx_a12: f64,
    pub dy_a21: f64,
    pub dy_a22: f64,
}

impl CoefficientMatrix {
    pub fn diagonal_linear(m: [f64; 4]) -> Result<Self> {
        let a = CoefficientMatrix::DiagonalLinear { m };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if let CoefficientMatrix::DiagonalLinear { m } = self {
            let (lo, hi) = DIAGONAL_PARAM_RANGE;
            for (k, &v) in m.iter().enumerate() {
                if !(lo..=hi).contains(&v) {
                    return Err(Error::CoefficientOutOfRange { index: k + 1, value: v });
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self, x: f64, y: f64) -> MatrixEntries {
        match *self {
            CoefficientMatrix::Identity => MatrixEntries {
                a11: 1.0,
                a12: 0.0,
                a21: 0.0,
                a22: 1.0,
            },
            CoefficientMatrix::Fixed => MatrixEntries {
                a11: x * x,
                a12: (x * y).sin(),
                a21: x + y,
                a22: y,
            },
            CoefficientMatrix::DiagonalLinear { m } => MatrixEntries {
                a11: m[0] * x + m[1] * y,
                a12: 0.0,
                a21: 0.0,
                a22: m[2] * x + m[3] * y,
            },
        }
    }

    pub fn partials(&self, x: f64, y: f64) -> EntryPartials {
        match *self {
            CoefficientMatrix::Identity => EntryPartials {
                dx_a11: 0.0,
                dx_a12: 0.0,
                dy_a21: 0.0,
                dy_a22: 0.0,
            },
            CoefficientMatrix::Fixed => EntryPartials {
                dx_a11: 2.0 * x,
                dx_a12: y * (x * y).cos(),
                dy_a21: 1.0,
                dy_a22: 1.0,
            },
            CoefficientMatrix::DiagonalLinear { m } => EntryPartials {
                dx_a11: m[0],
                dx_a12: 0.0,
                dy_a21: 0.0,
                dy_a22: m[3],
            },
        }
    }

    /// Upper bound on `Σ|entries| + Σ|entry partials|` over the unit square.
    pub fn magnitude_bound(&self) -> f64 {
        match *self {
            CoefficientMatrix::Identity => 2.0,
            // x² ≤ 1, |sin(xy)| ≤ sin 1, x + y ≤ 2, y ≤ 1; 2x ≤ 2, |y cos(xy)| ≤ 1
            CoefficientMatrix::Fixed => 1.0 + 1f64.sin() + 2.0 + 1.0 + 2.0 + 1.0 + 1.0 + 1.0,
            CoefficientMatrix::DiagonalLinear { m } => (m[0] + m[1]) + (m[2] + m[3]) + m[0] + m[3],
        }
    }

    pub fn params(&self) -> Option<[f64; 4]> {
        match *self {
            CoefficientMatrix::DiagonalLinear { m } => Some(m),
            _ => None,
        }
    }
}

/// Draws a diagonal-linear matrix with `m1..m4` i.i.d. uniform on `[0.1, 5]`.
pub fn sample_coefficient_matrix(rng: &mut SampleRng) -> CoefficientMatrix {
    let (lo, hi) = DIAGONAL_PARAM_RANGE;
    let m = [(); 4].map(|_| rng.uniform(lo, hi));
    CoefficientMatrix::DiagonalLinear { m }
}

/// Zeroth-order nonlinearity `c(u)`.
pub trait Reaction {
    fn eval(&self, u: f64) -> f64;
}

/// `c(u) = e^{2u}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpTwoU;

impl Reaction for ExpTwoU {
    fn eval(&self, u: f64) -> f64 {
        (2.0 * u).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    /// `−Δu`
    Poisson,
    /// `−div(A∇u)`
    DivergenceForm(CoefficientMatrix),
    /// `−Δu + e^{2u}`
    Semilinear,
}

impl OperatorKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorKind::DivergenceForm(a) => a.validate(),
            _ => Ok(()),
        }
    }

    pub fn matrix(&self) -> CoefficientMatrix {
        match *self {
            OperatorKind::DivergenceForm(a) => a,
            OperatorKind::Poisson | OperatorKind::Semilinear => CoefficientMatrix::Identity,
        }
    }

    /// `f` at one point from the field's value and partials there.
    pub fn rhs_at(&self, d: &BasisValue, x: f64, y: f64) -> f64 {
        match self {
            OperatorKind::Poisson => -(d.uxx + d.uyy),
            OperatorKind::DivergenceForm(a) => divergence_rhs(a, d, x, y),
            OperatorKind::Semilinear => -(d.uxx + d.uyy) + ExpTwoU.eval(d.u),
        }
    }
}

fn divergence_rhs(a: &CoefficientMatrix, d: &BasisValue, x: f64, y: f64) -> f64 {
    let e = a.entries(x, y);
    let p = a.partials(x, y);
    -(e.a11 * d.uxx
        + (e.a12 + e.a21) * d.uxy
        + e.a22 * d.uyy
        + (p.dx_a11 + p.dy_a21) * d.ux
        + (p.dx_a12 + p.dy_a22) * d.uy)
}

pub fn apply_poisson(field: &RandomField, points: &[(f64, f64)]) -> Vec<f64> {
    apply(field, &OperatorKind::Poisson, points)
}

pub fn apply_divergence_form(field: &RandomField, a: &CoefficientMatrix, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    a.validate()?;
    Ok(apply(field, &OperatorKind::DivergenceForm(*a), points))
}

pub fn apply_semilinear(field: &RandomField, points: &[(f64, f64)]) -> Vec<f64> {
    apply(field, &OperatorKind::Semilinear, points)
}

fn apply(field: &RandomField, op: &OperatorKind, points: &[(f64, f64)]) -> Vec<f64> {
    points
        .iter()
        .map(|&(x, y)| op.rhs_at(&field.eval(x, y), x, y))
        .collect()
}

/// `u` and `f` on a grid.
///
/// Poisson and semilinear use the spectral route `−Δu = Σ a_ij λ_ij u_ij`;
/// the divergence form needs every partial and goes through
/// [`RandomField::eval_grid`].
pub fn apply_on_grid(field: &RandomField, op: &OperatorKind, basis: &GridBasis) -> Result<(Vec<f64>, Vec<f64>)> {
    op.validate()?;
    match op {
        OperatorKind::Poisson => {
            let u = field.spectral_grid(basis, |_| 1.0);
            let f = field.spectral_grid(basis, |lambda| lambda);
            Ok((u, f))
        }
        OperatorKind::Semilinear => {
            let u = field.spectral_grid(basis, |_| 1.0);
            let mut f = field.spectral_grid(basis, |lambda| lambda);
            for (fv, &uv) in f.iter_mut().zip(&u) {
                *fv += ExpTwoU.eval(uv);
            }
            Ok((u, f))
        }
        OperatorKind::DivergenceForm(_) => {
            let g = field.eval_grid(basis);
            let coords = basis.grid().coords();
            let n = coords.len();
            let mut f = Vec::with_capacity(n * n);
            for (ix, &x) in coords.iter().enumerate() {
                for (iy, &y) in coords.iter().enumerate() {
                    f.push(op.rhs_at(&g.at(ix * n + iy), x, y));
                }
            }
            Ok((g.u, f))
        }
    }
}
