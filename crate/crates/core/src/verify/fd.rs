//! Second-order finite differences of a sampled `u` grid.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::operators::{CoefficientMatrix, OperatorKind};

/// Applies the operator to `u_grid` with centered differences and returns
/// the `(n−2)²` values at the interior nodes, in grid storage order.
///
/// Second derivatives use the 3-point stencil, the mixed derivative the
/// 4-corner cross `(u₊₊ − u₊₋ − u₋₊ + u₋₋)/(4h²)`, first derivatives the
/// centered difference. Matrix entries are evaluated in closed form at the
/// nodes.
pub fn fd_apply(u_grid: &[f64], grid: &Grid, op: &OperatorKind) -> Result<Vec<f64>> {
    let n = grid.len();
    if n < 3 {
        return Err(Error::GridTooSmall(n));
    }
    if u_grid.len() != n * n {
        return Err(Error::GridShape {
            expected: n * n,
            actual: u_grid.len(),
        });
    }
    op.validate()?;
    let h = grid.spacing();
    let coords = grid.coords();
    let at = |ix: usize, iy: usize| u_grid[ix * n + iy];
    let (inv_h2, inv_2h, inv_4h2) = (1.0 / (h * h), 1.0 / (2.0 * h), 1.0 / (4.0 * h * h));

    let mut out = Vec::with_capacity((n - 2) * (n - 2));
    for ix in 1..n - 1 {
        for iy in 1..n - 1 {
            let c = at(ix, iy);
            let uxx = (at(ix + 1, iy) - 2.0 * c + at(ix - 1, iy)) * inv_h2;
            let uyy = (at(ix, iy + 1) - 2.0 * c + at(ix, iy - 1)) * inv_h2;
            let value = match op {
                OperatorKind::Poisson => -(uxx + uyy),
                OperatorKind::Semilinear => -(uxx + uyy) + (2.0 * c).exp(),
                OperatorKind::DivergenceForm(a) => {
                    let ux = (at(ix + 1, iy) - at(ix - 1, iy)) * inv_2h;
                    let uy = (at(ix, iy + 1) - at(ix, iy - 1)) * inv_2h;
                    let uxy =
                        (at(ix + 1, iy + 1) - at(ix + 1, iy - 1) - at(ix - 1, iy + 1) + at(ix - 1, iy - 1)) * inv_4h2;
                    divergence_stencil(a, coords[ix], coords[iy], ux, uy, uxx, uyy, uxy)
                }
            };
            out.push(value);
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn divergence_stencil(a: &CoefficientMatrix, x: f64, y: f64, ux: f64, uy: f64, uxx: f64, uyy: f64, uxy: f64) -> f64 {
    let e = a.entries(x, y);
    let p = a.partials(x, y);
    -(e.a11 * uxx
        + e.a12 * uxy
        + e.a21 * uxy
        + e.a22 * uyy
        + p.dx_a11 * ux
        + p.dx_a12 * uy
        + p.dy_a21 * ux
        + p.dy_a22 * uy)
}

/// Interior block of a full grid, in the same order as [`fd_apply`] output.
pub fn interior(values: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((n - 2) * (n - 2));
    for ix in 1..n - 1 {
        out.extend_from_slice(&values[ix * n + 1..ix * n + n - 1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sampled(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        grid.points().into_iter().map(|(x, y)| f(x, y)).collect()
    }

    #[test]
    fn laplacian_of_eigenfunction() {
        let errs: Vec<f64> = [33, 65]
            .iter()
            .map(|&s| {
                let grid = Grid::with_boundary(s).unwrap();
                let u = sampled(&grid, |x, y| (PI * x).sin() * (PI * y).sin());
                let f = fd_apply(&u, &grid, &OperatorKind::Poisson).unwrap();
                let expect = interior(&u, grid.len());
                f.iter()
                    .zip(&expect)
                    .map(|(fv, uv)| (fv - 2.0 * PI * PI * uv).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let ratio = errs[0] / errs[1];
        assert!((3.8..=4.2).contains(&ratio), "ratio {ratio}");
        assert!(errs[1] < 1e-2);
    }

    #[test]
    fn constant_zero_grid() {
        let grid = Grid::with_boundary(9).unwrap();
        let u = vec![0.0; grid.num_points()];
        assert!(fd_apply(&u, &grid, &OperatorKind::Poisson)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(fd_apply(&u, &grid, &OperatorKind::Semilinear)
            .unwrap()
            .iter()
            .all(|&v| v == 1.0));
        let div = OperatorKind::DivergenceForm(CoefficientMatrix::Fixed);
        assert!(fd_apply(&u, &grid, &div).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stencils_exact_on_quadratics() {
        // u = x² + 3xy − y²: every centered stencil is exact for quadratics.
        let grid = Grid::with_boundary(7).unwrap();
        let u = sampled(&grid, |x, y| x * x + 3.0 * x * y - y * y);
        let a = CoefficientMatrix::Fixed;
        let f = fd_apply(&u, &grid, &OperatorKind::DivergenceForm(a)).unwrap();
        let coords = grid.coords();
        let mut k = 0;
        for &x in &coords[1..6] {
            for &y in &coords[1..6] {
                let (ux, uy, uxx, uyy, uxy) = (2.0 * x + 3.0 * y, 3.0 * x - 2.0 * y, 2.0, -2.0, 3.0);
                let e = a.entries(x, y);
                let p = a.partials(x, y);
                let exact = -(e.a11 * uxx
                    + (e.a12 + e.a21) * uxy
                    + e.a22 * uyy
                    + (p.dx_a11 + p.dy_a21) * ux
                    + (p.dx_a12 + p.dy_a22) * uy);
                assert!((f[k] - exact).abs() < 1e-10, "{} vs {exact}", f[k]);
                k += 1;
            }
        }
    }

    #[test]
    fn rejects_small_or_misshapen_grids() {
        let grid = Grid::with_boundary(4).unwrap();
        assert!(matches!(
            fd_apply(&[0.0; 15], &grid, &OperatorKind::Poisson),
            Err(Error::GridShape {
                expected: 16,
                actual: 15
            })
        ));
        assert!(matches!(Grid::with_boundary(2), Err(Error::GridTooSmall(2))));
    }
}
