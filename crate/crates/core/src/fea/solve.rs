use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{FeaError, SystemMatrices};

#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub frequency: f64,
    /// Mass-normalized: φᵀMφ = 1.
    pub shape: DVector<f64>,
}

/// Lowest `n_modes` solutions of K φ = ω² M φ, ascending.
pub fn modal_analysis(sys: &SystemMatrices, n_modes: usize) -> Result<Vec<Mode>, FeaError> {
    generalized_modes(&sys.m, &sys.k, n_modes)
}

pub fn generalized_modes(
    m: &DMatrix<f64>,
    k: &DMatrix<f64>,
    n_modes: usize,
) -> Result<Vec<Mode>, FeaError> {
    let n = m.nrows();
    if n_modes > n {
        return Err(FeaError::TooManyModes {
            requested: n_modes,
            size: n,
        });
    }
    let l = m.clone().cholesky().ok_or(FeaError::SingularMass)?.l();
    let x = l.solve_lower_triangular(k).ok_or(FeaError::SingularMass)?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(FeaError::SingularMass)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lt = l.transpose();
    order
        .into_iter()
        .take(n_modes)
        .map(|i| {
            let shape = lt
                .solve_upper_triangular(&eig.eigenvectors.column(i).into_owned())
                .ok_or(FeaError::SingularMass)?;
            Ok(Mode {
                frequency: eig.eigenvalues[i].max(0.0).sqrt() / (2.0 * PI),
                shape,
            })
        })
        .collect()
}

/// Solves K u = f.
pub fn static_solve(sys: &SystemMatrices, load: &DVector<f64>) -> Result<DVector<f64>, FeaError> {
    if load.len() != sys.size() {
        return Err(FeaError::InvalidModel(format!(
            "load has {} entries, system has {}",
            load.len(),
            sys.size()
        )));
    }
    let chol = sys
        .k
        .clone()
        .cholesky()
        .ok_or(FeaError::SingularStiffness)?;
    let u = chol.solve(load);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(FeaError::SingularStiffness);
    }
    Ok(u)
}
