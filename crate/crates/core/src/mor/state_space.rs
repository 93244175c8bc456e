use nalgebra::{DMatrix, DVector};

use crate::fea::{Dof, SystemMatrices};

use super::MorError;

/// `ẋ = A x + b u`, `y = c x`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    /// FEA degrees of freedom behind the second-order coordinates, when known.
    pub dof_map: Option<Vec<(usize, Dof)>>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DMatrix<f64>) -> Result<Self, MorError> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n || b.len() != n || c.ncols() != n {
            return Err(MorError::Dimensions(format!(
                "A {}x{}, b {}, c {}x{}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            dof_map: None,
        })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }
}

/// First-order realization of `M ü + Cd u̇ + K u = B f` in energy
/// coordinates `(Ω Lᵀu, Lᵀu̇)` with `M = L Lᵀ` and `Ω² = L⁻¹ K L⁻ᵀ`:
///
/// ```text
/// A = [ 0   Ω ]    b = [ 0     ]    c = [ C L⁻ᵀ Ω⁻¹   0 ]
///     [ −Ω −C̃ ]        [ L⁻¹ B ]
/// ```
///
/// `A + Aᵀ = diag(0, −2C̃)` is negative semidefinite, and stays so under
/// any orthogonal projection, so reduced models cannot gain unstable poles.
pub fn to_first_order(sys: &SystemMatrices) -> Result<StateSpace, MorError> {
    let n = sys.size();
    if sys.b_load.ncols() != 1 {
        return Err(MorError::Dimensions(format!(
            "exactly one input column required, found {}",
            sys.b_load.ncols()
        )));
    }
    let chol = sys
        .m
        .clone()
        .cholesky()
        .ok_or(MorError::MassNotPositiveDefinite)?;
    let l = chol.l();
    // L⁻¹ X L⁻ᵀ for symmetric X
    let congruent = |x: &DMatrix<f64>| -> Option<DMatrix<f64>> {
        let y = l.solve_lower_triangular(x)?;
        let z = l.solve_lower_triangular(&y.transpose())?;
        Some((&z + z.transpose()) * 0.5)
    };
    let k = congruent(&sys.k).ok_or(MorError::MassNotPositiveDefinite)?;
    let cd = congruent(&sys.cd).ok_or(MorError::MassNotPositiveDefinite)?;
    let eig = k.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| !(v > 0.0)) {
        return Err(MorError::StiffnessNotPositiveDefinite);
    }
    let q = &eig.eigenvectors;
    let root = eig.eigenvalues.map(f64::sqrt);
    let omega = q * DMatrix::from_diagonal(&root) * q.transpose();
    let omega_inv = q * DMatrix::from_diagonal(&root.map(|v| 1.0 / v)) * q.transpose();
    let lb = l
        .solve_lower_triangular(&sys.b_load)
        .ok_or(MorError::MassNotPositiveDefinite)?;
    // C L⁻ᵀ = (L⁻¹ Cᵀ)ᵀ
    let cl = l
        .solve_lower_triangular(&sys.c_out.transpose())
        .ok_or(MorError::MassNotPositiveDefinite)?
        .transpose();

    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, n), (n, n)).copy_from(&omega);
    a.view_mut((n, 0), (n, n)).copy_from(&(-&omega));
    a.view_mut((n, n), (n, n)).copy_from(&(-cd));
    let mut b = DVector::zeros(2 * n);
    b.rows_mut(n, n).copy_from(&lb.column(0));
    let mut c = DMatrix::zeros(sys.c_out.nrows(), 2 * n);
    c.view_mut((0, 0), (sys.c_out.nrows(), n))
        .copy_from(&(cl * omega_inv));
    Ok(StateSpace {
        a,
        b,
        c,
        dof_map: Some(sys.dof_map.clone()),
    })
}
