use nalgebra::{DMatrix, DVector};

use super::MorError;

pub const DEFAULT_DEFLATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ArnoldiBasis {
    /// N × k, orthonormal columns.
    pub v: DMatrix<f64>,
    /// (k+1) × k without breakdown, k × k after it.
    pub h: DMatrix<f64>,
    pub k: usize,
    pub breakdown: bool,
    /// The (k+1)-th basis vector, absent after breakdown.
    pub next: Option<DVector<f64>>,
}

/// Orthonormal basis of span{b, A b, …, A^(q−1) b} by modified Gram-Schmidt
/// with one full reorthogonalization pass.
pub fn arnoldi<F>(
    mut apply_a: F,
    b: &DVector<f64>,
    q: usize,
    deflation_tol: f64,
) -> Result<ArnoldiBasis, MorError>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>, MorError>,
{
    let n = b.len();
    let beta = b.norm();
    if beta == 0.0 || !beta.is_finite() {
        return Err(MorError::ZeroStartVector);
    }
    if q == 0 {
        return Err(MorError::Order { q, n });
    }
    let q = q.min(n);
    let mut basis: Vec<DVector<f64>> = vec![b / beta];
    let mut h = DMatrix::zeros(q + 1, q);
    for j in 0..q {
        let av = apply_a(&basis[j])?;
        let av_norm = av.norm();
        let mut w = av;
        for (i, vi) in basis.iter().enumerate() {
            let c = vi.dot(&w);
            h[(i, j)] = c;
            w.axpy(-c, vi, 1.0);
        }
        for (i, vi) in basis.iter().enumerate() {
            let c = vi.dot(&w);
            h[(i, j)] += c;
            w.axpy(-c, vi, 1.0);
        }
        let w_norm = w.norm();
        if w_norm <= deflation_tol * av_norm || w_norm == 0.0 {
            let k = j + 1;
            return Ok(ArnoldiBasis {
                v: DMatrix::from_columns(&basis),
                h: h.view((0, 0), (k, k)).into_owned(),
                k,
                breakdown: true,
                next: None,
            });
        }
        h[(j + 1, j)] = w_norm;
        basis.push(w / w_norm);
    }
    let next = basis.pop();
    Ok(ArnoldiBasis {
        v: DMatrix::from_columns(&basis),
        h,
        k: q,
        breakdown: false,
        next,
    })
}

/// ‖VᵀV − I‖ in the max norm.
pub fn orthonormality_error(v: &DMatrix<f64>) -> f64 {
    let g = v.transpose() * v;
    (g - DMatrix::identity(v.ncols(), v.ncols())).amax()
}
