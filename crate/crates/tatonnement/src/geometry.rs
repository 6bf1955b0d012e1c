//! Sphere geometry helpers shared by the steppers and the analysis layer.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Norm below which a vector cannot be meaningfully normalized.
pub const DEGENERATE_NORM: f64 = 1e-14;

/// Orthogonal projection of `v` onto the tangent space of the sphere
/// through `p` (the complement of the radial direction).
pub fn project_tangent(p: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    check_same_dim(p, v)?;
    let p_norm_sq = p.norm_squared();
    if p_norm_sq.sqrt() < DEGENERATE_NORM {
        return Err(Error::DegenerateVector { norm: p_norm_sq.sqrt() });
    }
    Ok(v - p * (p.dot(v) / p_norm_sq))
}

/// Angle in [0, pi] between two nonzero vectors, as arccos of the clamped
/// normalized dot product. Roundoff makes values below ~1e-8 indistinguishable
/// from zero.
pub fn angle_between(u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    check_same_dim(u, v)?;
    let nu = u.norm();
    let nv = v.norm();
    if nu < DEGENERATE_NORM || nv < DEGENERATE_NORM {
        return Err(Error::DegenerateVector { norm: nu.min(nv) });
    }
    let c = (u.dot(v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(c.acos())
}

/// Rescale to unit Euclidean norm.
pub fn renormalize(v: &DVector<f64>) -> Result<DVector<f64>> {
    let n = v.norm();
    if n < DEGENERATE_NORM || !n.is_finite() {
        return Err(Error::DegenerateVector { norm: n });
    }
    Ok(v / n)
}

/// Orthonormal basis of the hyperplane orthogonal to `p`, as the columns of
/// an n x (n-1) matrix. Uses the Householder reflector mapping e1 to p/|p|,
/// whose remaining columns span the complement exactly.
pub fn tangent_basis(p: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = p.len();
    if n < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: n });
    }
    let u = renormalize(p)?;
    let mut basis = DMatrix::zeros(n, n - 1);
    if 1.0 - u[0] < 1e-12 {
        // u is (numerically) e1 itself; the coordinate axes 2..n already work.
        for j in 0..n - 1 {
            basis[(j + 1, j)] = 1.0;
        }
        return Ok(basis);
    }
    // v = u - e1, H = I - 2 v v^T / |v|^2 sends e1 to u; columns 2..n of H
    // are orthonormal and orthogonal to u.
    let mut v = u.clone();
    v[0] -= 1.0;
    let v_norm_sq = v.norm_squared();
    for j in 0..n - 1 {
        let col = j + 1;
        let scale = 2.0 * v[col] / v_norm_sq;
        for i in 0..n {
            let e = if i == col { 1.0 } else { 0.0 };
            basis[(i, j)] = e - scale * v[i];
        }
    }
    Ok(basis)
}

fn check_same_dim(a: &DVector<f64>, b: &DVector<f64>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(())
}
