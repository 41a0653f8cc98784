//! Random fields `u = Σ a_ij u_ij` over a truncated eigenbasis.

use serde::{Deserialize, Serialize};

use crate::basis::{axis_factor, eigenvalue, eval_basis, BasisValue, BcKind, EigenIndex};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::{SampleRng, StreamPurpose};

/// Dataset-level sampling policy: boundary family, truncation range and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub bc: BcKind,
    pub m_min: u32,
    pub m_max: u32,
    pub master_seed: u64,
}

impl FieldSpec {
    pub fn new(bc: BcKind, m_min: u32, m_max: u32, master_seed: u64) -> Result<Self> {
        let spec = Self {
            bc,
            m_min,
            m_max,
            master_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_min == 0 || self.m_min > self.m_max {
            return Err(Error::InvalidFieldSpec(format!(
                "need 1 <= m_min <= m_max, got m_min = {}, m_max = {}",
                self.m_min, self.m_max
            )));
        }
        Ok(())
    }
}

/// A truncated expansion with an `M × M` coefficient matrix, stored row-major
/// with `(i, j)` at `(i−1)·M + (j−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomField {
    bc: BcKind,
    truncation: usize,
    coeffs: Vec<f64>,
    sample_index: u64,
}

impl RandomField {
    pub fn from_coeffs(bc: BcKind, truncation: usize, coeffs: Vec<f64>, sample_index: u64) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidField("truncation order must be >= 1".into()));
        }
        if coeffs.len() != truncation * truncation {
            return Err(Error::InvalidField(format!(
                "{} coefficients for truncation {truncation}",
                coeffs.len()
            )));
        }
        Ok(Self {
            bc,
            truncation,
            coeffs,
            sample_index,
        })
    }

    pub fn zeros(bc: BcKind, truncation: usize) -> Result<Self> {
        Self::from_coeffs(bc, truncation, vec![0.0; truncation * truncation], 0)
    }

    /// A field with a single unit coefficient on mode `idx`.
    pub fn single_mode(bc: BcKind, idx: EigenIndex) -> Self {
        let m = idx.i().max(idx.j()) as usize;
        let mut coeffs = vec![0.0; m * m];
        coeffs[(idx.i() as usize - 1) * m + idx.j() as usize - 1] = 1.0;
        Self {
            bc,
            truncation: m,
            coeffs,
            sample_index: 0,
        }
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    /// Coefficient `a_ij` with 1-based indices.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[(i - 1) * self.truncation + (j - 1)]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// `c1·a + c2·b`, coefficient-wise. Both fields must share `bc` and `M`.
    pub fn linear_combination(c1: f64, a: &RandomField, c2: f64, b: &RandomField) -> Result<Self> {
        if a.bc != b.bc {
            return Err(Error::BoundaryConditionMismatch);
        }
        if a.truncation != b.truncation {
            return Err(Error::InvalidField("truncation orders differ".into()));
        }
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| c1 * x + c2 * y).collect();
        Ok(Self {
            bc: a.bc,
            truncation: a.truncation,
            coeffs,
            sample_index: a.sample_index,
        })
    }

    fn modes(&self) -> impl Iterator<Item = (EigenIndex, f64)> + '_ {
        let m = self.truncation;
        self.coeffs.iter().enumerate().map(move |(k, &a)| {
            let idx = EigenIndex::new((k / m + 1) as u32, (k % m + 1) as u32).expect("1-based indices are positive");
            (idx, a)
        })
    }

    /// Value and partials at one point, summed mode by mode.
    pub fn eval(&self, x: f64, y: f64) -> BasisValue {
        let mut acc = BasisValue::ZERO;
        for (idx, a) in self.modes() {
            if a != 0.0 {
                acc += a * eval_basis(idx, self.bc, x, y);
            }
        }
        acc
    }

    pub fn eval_points(&self, points: &[(f64, f64)]) -> Vec<BasisValue> {
        points.iter().map(|&(x, y)| self.eval(x, y)).collect()
    }

    /// Value and all partials on a grid, using the separable structure of
    /// the basis. `basis` must cover at least this field's truncation.
    pub fn eval_grid(&self, basis: &GridBasis) -> FieldGrids {
        basis.check(self);
        let m = self.truncation;
        let scaled: Vec<f64> = self.modes().map(|(idx, a)| a / eigenvalue(idx).sqrt()).collect();
        let t = &basis.table;
        let n = t.points;
        let y_v = contract_y(&scaled, m, &t.value, n);
        let y_d1 = contract_y(&scaled, m, &t.d1, n);
        let y_d2 = contract_y(&scaled, m, &t.d2, n);
        FieldGrids {
            n,
            u: contract_x(&t.value, &y_v, m, n),
            ux: contract_x(&t.d1, &y_v, m, n),
            uy: contract_x(&t.value, &y_d1, m, n),
            uxx: contract_x(&t.d2, &y_v, m, n),
            uyy: contract_x(&t.value, &y_d2, m, n),
            uxy: contract_x(&t.d1, &y_d1, m, n),
        }
    }

    /// `Σ a_ij · w(λ_ij) · u_ij` on a grid; `w ≡ 1` gives the field itself.
    pub fn spectral_grid(&self, basis: &GridBasis, weight: impl Fn(f64) -> f64) -> Vec<f64> {
        basis.check(self);
        let m = self.truncation;
        let scaled: Vec<f64> = self
            .modes()
            .map(|(idx, a)| {
                let lambda = eigenvalue(idx);
                a * weight(lambda) / lambda.sqrt()
            })
            .collect();
        let t = &basis.table;
        let y_v = contract_y(&scaled, m, &t.value, t.points);
        contract_x(&t.value, &y_v, m, t.points)
    }
}

/// Draws the field for one sample: `M` uniform on `[m_min, m_max]`, then
/// `a_ij ~ N(0, 1/(i+j))` (variance `1/(i+j)`) in row-major order.
pub fn sample_field(spec: &FieldSpec, sample_index: u64) -> RandomField {
    let mut rng = SampleRng::for_sample(spec.master_seed, sample_index, StreamPurpose::FieldCoefficients);
    let m = rng.uniform_int(spec.m_min, spec.m_max) as usize;
    let mut coeffs = Vec::with_capacity(m * m);
    for i in 1..=m {
        for j in 1..=m {
            let sd = ((i + j) as f64).recip().sqrt();
            coeffs.push(sd * rng.standard_normal());
        }
    }
    RandomField {
        bc: spec.bc,
        truncation: m,
        coeffs,
        sample_index,
    }
}

/// Pointwise evaluation of a field; see [`RandomField::eval`].
pub fn eval_field(field: &RandomField, points: &[(f64, f64)]) -> Vec<BasisValue> {
    field.eval_points(points)
}

/// Grid channels, each `n × n` in grid storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrids {
    pub n: usize,
    pub u: Vec<f64>,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub uxx: Vec<f64>,
    pub uyy: Vec<f64>,
    pub uxy: Vec<f64>,
}

impl FieldGrids {
    pub fn at(&self, k: usize) -> BasisValue {
        BasisValue {
            u: self.u[k],
            ux: self.ux[k],
            uy: self.uy[k],
            uxx: self.uxx[k],
            uyy: self.uyy[k],
            uxy: self.uxy[k],
        }
    }
}

#[derive(Debug, Clone)]
struct AxisTable {
    points: usize,
    // mode-major: entry (n−1)·points + k
    value: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

/// 1-D factor tables for one grid, boundary family and maximum mode,
/// shared by every field evaluated on that grid.
#[derive(Debug, Clone)]
pub struct GridBasis {
    bc: BcKind,
    grid: Grid,
    max_mode: usize,
    table: AxisTable,
}

impl GridBasis {
    pub fn new(bc: BcKind, grid: Grid, max_mode: usize) -> Self {
        let coords = grid.coords();
        let points = coords.len();
        let mut value = Vec::with_capacity(max_mode * points);
        let mut d1 = Vec::with_capacity(max_mode * points);
        let mut d2 = Vec::with_capacity(max_mode * points);
        for n in 1..=max_mode as u32 {
            for &x in &coords {
                let f = axis_factor(bc, n, x);
                value.push(f.value);
                d1.push(f.d1);
                d2.push(f.d2);
            }
        }
        Self {
            bc,
            grid,
            max_mode,
            table: AxisTable { points, value, d1, d2 },
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn bc(&self) -> BcKind {
        self.bc
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    fn check(&self, field: &RandomField) {
        assert_eq!(self.bc, field.bc, "grid basis and field boundary conditions differ");
        assert!(
            field.truncation <= self.max_mode,
            "field truncation {} exceeds grid basis {}",
            field.truncation,
            self.max_mode
        );
    }
}

// t[i][q] = Σ_j c[i][j] · y[j][q]
fn contract_y(c: &[f64], m: usize, y: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let row = &mut out[i * n..(i + 1) * n];
        for j in 0..m {
            let cij = c[i * m + j];
            if cij == 0.0 {
                continue;
            }
            for (o, &yv) in row.iter_mut().zip(&y[j * n..(j + 1) * n]) {
                *o += cij * yv;
            }
        }
    }
    out
}

// out[p][q] = Σ_i x[i][p] · t[i][q]
fn contract_x(x: &[f64], t: &[f64], m: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for p in 0..n {
        let row = &mut out[p * n..(p + 1) * n];
        for i in 0..m {
            let xv = x[i * n + p];
            if xv == 0.0 {
                continue;
            }
            for (o, &tv) in row.iter_mut().zip(&t[i * n..(i + 1) * n]) {
                *o += xv * tv;
            }
        }
    }
    out
}
