//! Composite-trapezoid H¹ inner products `∫ ∇u · ∇v` on the unit square.

use crate::basis::BcKind;
use crate::error::{Error, Result};
use crate::field::{GridBasis, RandomField};
use crate::grid::Grid;

fn trapezoid_weights(grid: &Grid) -> Result<Vec<f64>> {
    if !grid.includes_boundary() {
        return Err(Error::InvalidField(
            "trapezoid quadrature needs a grid with boundary nodes".into(),
        ));
    }
    let n = grid.len();
    let h = grid.spacing();
    Ok((0..n).map(|k| if k == 0 || k == n - 1 { 0.5 * h } else { h }).collect())
}

struct Gradient {
    ux: Vec<f64>,
    uy: Vec<f64>,
}

fn gradient(field: &RandomField, grid: &Grid) -> Gradient {
    let basis = GridBasis::new(field.bc(), *grid, field.truncation());
    let g = field.eval_grid(&basis);
    Gradient { ux: g.ux, uy: g.uy }
}

fn weighted_dot(a: &Gradient, b: &Gradient, w: &[f64]) -> f64 {
    let n = w.len();
    let mut total = 0.0;
    for (ix, wx) in w.iter().enumerate() {
        let row: f64 = w
            .iter()
            .enumerate()
            .map(|(iy, wy)| {
                let k = ix * n + iy;
                wy * (a.ux[k] * b.ux[k] + a.uy[k] * b.uy[k])
            })
            .sum();
        total += wx * row;
    }
    total
}

/// `⟨a, b⟩ = ∫ ∇a · ∇b` using analytic gradients at the grid nodes.
pub fn h1_inner_product(a: &RandomField, b: &RandomField, grid: &Grid) -> Result<f64> {
    if a.bc() != b.bc() {
        return Err(Error::BoundaryConditionMismatch);
    }
    let w = trapezoid_weights(grid)?;
    Ok(weighted_dot(&gradient(a, grid), &gradient(b, grid), &w))
}

/// Gram matrix of `fields` under [`h1_inner_product`], row-major `K × K`.
pub fn h1_gram(fields: &[RandomField], grid: &Grid) -> Result<Vec<f64>> {
    if let Some(first) = fields.first() {
        if fields.iter().any(|f| f.bc() != first.bc()) {
            return Err(Error::BoundaryConditionMismatch);
        }
    }
    let w = trapezoid_weights(grid)?;
    let grads: Vec<Gradient> = fields.iter().map(|f| gradient(f, grid)).collect();
    let k = fields.len();
    let mut gram = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let v = weighted_dot(&grads[a], &grads[b], &w);
            gram[a * k + b] = v;
            gram[b * k + a] = v;
        }
    }
    Ok(gram)
}

/// Single-mode fields for every `(i, j)` with `1 ≤ i, j ≤ side`, `i` slow.
pub fn leading_basis_fields(bc: BcKind, side: u32) -> Vec<RandomField> {
    (1..=side)
        .flat_map(|i| (1..=side).map(move |j| (i, j)))
        .map(|(i, j)| {
            let idx = crate::basis::EigenIndex::new(i, j).expect("indices start at 1");
            RandomField::single_mode(bc, idx)
        })
        .collect()
}

/// Largest `|G − target·I|` entry.
pub fn max_deviation_from_scaled_identity(gram: &[f64], k: usize, target: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..k {
        for b in 0..k {
            let expect = if a == b { target } else { 0.0 };
            worst = worst.max((gram[a * k + b] - expect).abs());
        }
    }
    worst
}
