//! Macromodeling: first-order realization of the FEA system and Arnoldi
//! model order reduction, transfer functions, and the reduced-model bundle.

mod arnoldi;
mod bundle;
mod reduce;
mod spectrum;
mod state_space;
mod transfer;

use thiserror::Error;

pub use arnoldi::{arnoldi, orthonormality_error, ArnoldiBasis, DEFAULT_DEFLATION_TOL};
pub use bundle::{export_reduced, import_reduced, reduced_files};
pub use reduce::{krylov_basis, markov_parameters, moments, reduce, ReducedModel, ReductionMode};
pub use spectrum::{balance, eigenvalues};
pub use state_space::{to_first_order, StateSpace};
pub use transfer::{imaginary_axis, transfer_function, LinearSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorError {
    #[error("mass matrix is not positive definite")]
    MassNotPositiveDefinite,
    #[error("stiffness matrix is not positive definite")]
    StiffnessNotPositiveDefinite,
    #[error("start vector is zero")]
    ZeroStartVector,
    #[error("order {q} is not in 1..={n}")]
    Order { q: usize, n: usize },
    #[error("A − s0·I is singular at s0 = {0}")]
    SingularShift(f64),
    #[error("sI − A is singular at s = {re}+{im}i")]
    SingularAt { re: f64, im: f64 },
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
}

#[cfg(test)]
mod tests {
    use nalgebra::{Complex, DMatrix, DVector};

    use super::*;
    use crate::fea::SystemMatrices;

    fn one_dof(m: f64, k: f64, cd: f64) -> SystemMatrices {
        SystemMatrices {
            m: DMatrix::from_element(1, 1, m),
            k: DMatrix::from_element(1, 1, k),
            cd: DMatrix::from_element(1, 1, cd),
            b_load: DMatrix::from_element(1, 1, 1.0),
            c_out: DMatrix::from_element(1, 1, 1.0),
            dof_map: vec![(0, 0)],
        }
    }

    #[test]
    fn first_order_one_dof() {
        let ss = to_first_order(&one_dof(1.0, 4.0, 0.0)).unwrap();
        assert_eq!(ss.a, DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]));
        let ev = eigenvalues(&ss.a).unwrap();
        let mut im: Vec<f64> = ev.iter().map(|e| e.im).collect();
        im.sort_by(f64::total_cmp);
        assert!((im[0] + 2.0).abs() < 1e-14 && (im[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn static_limit_and_rolloff() {
        let ss = to_first_order(&one_dof(1.0, 1.0, 0.0)).unwrap();
        let h = transfer_function(&ss, &[Complex::new(0.0, 0.0), Complex::new(0.0, 1e6)]).unwrap();
        assert!((h[0][0] - Complex::new(1.0, 0.0)).norm() < 1e-15);
        assert!(h[1][0].norm() < 1e-11);
    }

    #[test]
    fn singular_point_reported() {
        let ss = to_first_order(&one_dof(1.0, 1.0, 0.0)).unwrap();
        assert!(matches!(
            transfer_function(&ss, &[Complex::new(0.0, 1.0)]),
            Err(MorError::SingularAt { .. })
        ));
    }

    #[test]
    fn mode_text() {
        assert_eq!(
            "direct".parse::<ReductionMode>().unwrap(),
            ReductionMode::Direct
        );
        assert_eq!(
            "shift:1e3".parse::<ReductionMode>().unwrap(),
            ReductionMode::ShiftInvert(1000.0)
        );
        assert!("shift:".parse::<ReductionMode>().is_err());
    }

    #[test]
    fn order_bounds() {
        let ss = StateSpace::new(
            DMatrix::identity(2, 2) * -1.0,
            DVector::from_element(2, 1.0),
            DMatrix::from_element(1, 2, 1.0),
        )
        .unwrap();
        assert!(matches!(
            reduce(&ss, 3, ReductionMode::Direct),
            Err(MorError::Order { .. })
        ));
        assert!(matches!(
            reduce(&ss, 0, ReductionMode::Direct),
            Err(MorError::Order { .. })
        ));
        assert!(matches!(
            reduce(&ss, 1, ReductionMode::ShiftInvert(-1.0)),
            Err(MorError::SingularShift(_))
        ));
    }
}
