//! Laplacian eigenpairs on the unit square.
//!
//! Dirichlet modes are `sin(iπx) sin(jπy)`, Neumann modes are
//! `cos(iπx) cos(jπy)`; both families share the eigenvalue
//! `(iπ)² + (jπ)²` and are normalized by `1/√λ`. All derivatives are
//! closed-form products of sines and cosines.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Homogeneous boundary condition on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    /// `u = 0` on the boundary; sine family.
    Dirichlet,
    /// `∇u · ν = 0` on the boundary; cosine family.
    Neumann,
}

impl BcKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
        }
    }
}

/// A mode `(i, j)` with `i, j >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EigenIndex {
    i: u32,
    j: u32,
}

impl EigenIndex {
    pub fn new(i: u32, j: u32) -> Result<Self> {
        if i == 0 || j == 0 {
            return Err(Error::InvalidMode { i, j });
        }
        Ok(Self { i, j })
    }

    pub fn i(self) -> u32 {
        self.i
    }

    pub fn j(self) -> u32 {
        self.j
    }

    pub fn eigenvalue(self) -> f64 {
        eigenvalue(self)
    }
}

/// `(iπ)² + (jπ)²`, shared by both boundary families.
pub fn eigenvalue(idx: EigenIndex) -> f64 {
    let kx = wavenumber(idx.i);
    let ky = wavenumber(idx.j);
    kx * kx + ky * ky
}

#[inline]
pub(crate) fn wavenumber(n: u32) -> f64 {
    n as f64 * PI
}

/// A function value together with its partial derivatives up to second order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BasisValue {
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
    pub uxx: f64,
    pub uyy: f64,
    pub uxy: f64,
}

impl BasisValue {
    pub const ZERO: BasisValue = BasisValue {
        u: 0.0,
        ux: 0.0,
        uy: 0.0,
        uxx: 0.0,
        uyy: 0.0,
        uxy: 0.0,
    };

    pub fn laplacian(&self) -> f64 {
        self.uxx + self.uyy
    }
}

impl Add for BasisValue {
    type Output = BasisValue;

    fn add(self, rhs: BasisValue) -> BasisValue {
        BasisValue {
            u: self.u + rhs.u,
            ux: self.ux + rhs.ux,
            uy: self.uy + rhs.uy,
            uxx: self.uxx + rhs.uxx,
            uyy: self.uyy + rhs.uyy,
            uxy: self.uxy + rhs.uxy,
        }
    }
}

impl AddAssign for BasisValue {
    fn add_assign(&mut self, rhs: BasisValue) {
        *self = *self + rhs;
    }
}

impl Mul<BasisValue> for f64 {
    type Output = BasisValue;

    fn mul(self, rhs: BasisValue) -> BasisValue {
        BasisValue {
            u: self * rhs.u,
            ux: self * rhs.ux,
            uy: self * rhs.uy,
            uxx: self * rhs.uxx,
            uyy: self * rhs.uyy,
            uxy: self * rhs.uxy,
        }
    }
}

/// One-dimensional factor `sin(nπx)` or `cos(nπx)` with its first two
/// derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFactor {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Evaluates the 1-D factor of mode `n` at `x`.
///
/// `sin(nπx)` is returned as exactly zero at `x ∈ {0, 1}` rather than
/// trusting `sin(nπ)` to round to zero.
pub fn axis_factor(bc: BcKind, n: u32, x: f64) -> AxisFactor {
    let k = wavenumber(n);
    let on_edge = x == 0.0 || x == 1.0;
    let s = if on_edge { 0.0 } else { (k * x).sin() };
    let c = (k * x).cos();
    match bc {
        BcKind::Dirichlet => AxisFactor {
            value: s,
            d1: k * c,
            d2: -k * k * s,
        },
        BcKind::Neumann => AxisFactor {
            value: c,
            d1: -k * s,
            d2: -k * k * c,
        },
    }
}

/// Normalized basis function `φ_ij / √λ_ij` and its partials at `(x, y)`.
pub fn eval_basis(idx: EigenIndex, bc: BcKind, x: f64, y: f64) -> BasisValue {
    let norm = eigenvalue(idx).sqrt().recip();
    let fx = axis_factor(bc, idx.i, x);
    let fy = axis_factor(bc, idx.j, y);
    BasisValue {
        u: norm * fx.value * fy.value,
        ux: norm * fx.d1 * fy.value,
        uy: norm * fx.value * fy.d1,
        uxx: norm * fx.d2 * fy.value,
        uyy: norm * fx.value * fy.d2,
        uxy: norm * fx.d1 * fy.d1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // 2π², 5π² and 1/(π√2) to 17 significant digits (computed with mpmath at 30 digits).
    const TWO_PI_SQ: f64 = 19.739208802178717;
    const FIVE_PI_SQ: f64 = 49.34802200544679;
    const INV_PI_SQRT2: f64 = 0.22507907903927651;

    fn idx(i: u32, j: u32) -> EigenIndex {
        EigenIndex::new(i, j).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert!((eigenvalue(idx(1, 1)) - TWO_PI_SQ).abs() < 1e-12);
        assert!((eigenvalue(idx(1, 2)) - FIVE_PI_SQ).abs() < 1e-12);
        assert_eq!(eigenvalue(idx(3, 7)), eigenvalue(idx(7, 3)));
    }

    #[test]
    fn zero_mode_rejected() {
        assert!(matches!(EigenIndex::new(0, 3), Err(Error::InvalidMode { i: 0, j: 3 })));
        assert!(EigenIndex::new(2, 0).is_err());
    }

    #[test]
    fn center_and_corner_values() {
        let d = eval_basis(idx(1, 1), BcKind::Dirichlet, 0.5, 0.5);
        assert!((d.u - INV_PI_SQRT2).abs() < 1e-15);

        let n = eval_basis(idx(1, 1), BcKind::Neumann, 0.0, 0.0);
        assert!((n.u - INV_PI_SQRT2).abs() < 1e-15);
        assert_eq!(n.ux, 0.0);
        assert_eq!(n.uy, 0.0);
    }

    #[test]
    fn dirichlet_boundary_is_exactly_zero() {
        for i in 1..=30 {
            for j in 1..=30 {
                for &(x, y) in &[(0.0, 0.3), (1.0, 0.7), (0.42, 0.0), (0.9, 1.0), (1.0, 1.0)] {
                    assert_eq!(eval_basis(idx(i, j), BcKind::Dirichlet, x, y).u, 0.0);
                }
            }
        }
    }

    #[test]
    fn neumann_normal_derivative_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let id = idx(rng.random_range(1..=40), rng.random_range(1..=40));
            let t: f64 = rng.random();
            let edges = [
                (0.0, t, -1.0, 0.0),
                (1.0, t, 1.0, 0.0),
                (t, 0.0, 0.0, -1.0),
                (t, 1.0, 0.0, 1.0),
            ];
            for (x, y, nx, ny) in edges {
                let b = eval_basis(id, BcKind::Neumann, x, y);
                assert!((b.ux * nx + b.uy * ny).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn eigenfunction_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let id = idx(rng.random_range(1..=50), rng.random_range(1..=50));
            let bc = if rng.random::<bool>() {
                BcKind::Dirichlet
            } else {
                BcKind::Neumann
            };
            let (x, y): (f64, f64) = (rng.random(), rng.random());
            let b = eval_basis(id, bc, x, y);
            let lambda = eigenvalue(id);
            assert!((b.laplacian() + lambda * b.u).abs() <= 1e-10 * lambda * b.u.abs().max(1.0));
        }
    }

    /// Central differences of the value reproduce the analytic partials at O(h²).
    #[test]
    fn finite_difference_agreement() {
        let bcs = [BcKind::Dirichlet, BcKind::Neumann];
        for bc in bcs {
            for &(i, j) in &[(1, 1), (2, 3), (4, 1), (5, 5)] {
                let id = idx(i, j);
                let (x, y) = (0.37, 0.61);
                let errs = |h: f64| {
                    let v = |dx: f64, dy: f64| eval_basis(id, bc, x + dx, y + dy).u;
                    let b = eval_basis(id, bc, x, y);
                    let c = v(0.0, 0.0);
                    [
                        ((v(h, 0.0) - v(-h, 0.0)) / (2.0 * h) - b.ux).abs(),
                        ((v(0.0, h) - v(0.0, -h)) / (2.0 * h) - b.uy).abs(),
                        ((v(h, 0.0) - 2.0 * c + v(-h, 0.0)) / (h * h) - b.uxx).abs(),
                        ((v(0.0, h) - 2.0 * c + v(0.0, -h)) / (h * h) - b.uyy).abs(),
                        ((v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4.0 * h * h) - b.uxy).abs(),
                    ]
                };
                let coarse = errs(1e-2);
                let fine = errs(5e-3);
                for (c, f) in coarse.iter().zip(fine.iter()) {
                    let ratio = c / f;
                    assert!((3.2..=4.8).contains(&ratio), "mode ({i},{j}) {bc:?}: ratio {ratio}");
                }
            }
        }
    }
}
