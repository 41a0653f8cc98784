//! Discrete sine transform inverse of the Poisson problem, by direct
//! summation. Verification only; never part of data generation.

use std::f64::consts::PI;

use crate::basis::{BcKind, EigenIndex};
use crate::error::{Error, Result};

/// `sin(π·m·k/s)` for `m, k = 1..s−1`, with the argument reduced mod `2s`.
fn sine_matrix(s: usize) -> Vec<f64> {
    let n = s - 1;
    let mut out = Vec::with_capacity(n * n);
    for m in 1..s {
        for k in 1..s {
            let r = (m * k) % (2 * s);
            out.push((PI * r as f64 / s as f64).sin());
        }
    }
    out
}

/// Separable 2-D transform `out = S · data · Sᵀ` with a symmetric sine matrix.
fn transform(data: &[f64], sines: &[f64], n: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; n * n];
    // along y: tmp[k][m] = Σ_l data[k][l] · S[m][l]
    for k in 0..n {
        let row = &data[k * n..(k + 1) * n];
        for m in 0..n {
            let srow = &sines[m * n..(m + 1) * n];
            tmp[k * n + m] = row.iter().zip(srow).map(|(a, b)| a * b).sum();
        }
    }
    // along x: out[p][m] = Σ_k S[p][k] · tmp[k][m]
    let mut out = vec![0.0; n * n];
    for p in 0..n {
        for k in 0..n {
            let s = sines[p * n + k];
            for m in 0..n {
                out[p * n + m] += s * tmp[k * n + m];
            }
        }
    }
    out
}

/// Recovers `u` from `f = −Δu` sampled at the interior nodes `k/s`,
/// `k = 1..s−1` (`(s−1)²` values, grid storage order).
///
/// Each discrete sine mode `(i, j)` is divided by the continuous eigenvalue
/// `(iπ)² + (jπ)²`, so the inverse is exact for fields with truncation
/// `M ≤ s−1`.
pub fn dst_poisson_inverse(f: &[f64], s: usize, bc: BcKind) -> Result<Vec<f64>> {
    if bc != BcKind::Dirichlet {
        return Err(Error::DirichletOnly);
    }
    if s < 2 {
        return Err(Error::GridTooSmall(s));
    }
    let n = s - 1;
    if f.len() != n * n {
        return Err(Error::GridShape {
            expected: n * n,
            actual: f.len(),
        });
    }
    let sines = sine_matrix(s);
    let mut coeffs = transform(f, &sines, n);
    for i in 0..n {
        for j in 0..n {
            let lambda = EigenIndex::new(i as u32 + 1, j as u32 + 1)?.eigenvalue();
            coeffs[i * n + j] /= lambda;
        }
    }
    let mut u = transform(&coeffs, &sines, n);
    // S² = (s/2)·I per axis
    let scale = (2.0 / s as f64).powi(2);
    for v in &mut u {
        *v *= scale;
    }
    Ok(u)
}
