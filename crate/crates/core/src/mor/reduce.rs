use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::fea::Dof;

use super::arnoldi::{arnoldi, ArnoldiBasis, DEFAULT_DEFLATION_TOL};
use super::{MorError, StateSpace};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReductionMode {
    /// Krylov space of A itself; matches Markov parameters.
    Direct,
    /// Krylov space of (A − s0 I)⁻¹; matches moments about `s0` (rad/s).
    ShiftInvert(f64),
}

impl Default for ReductionMode {
    fn default() -> Self {
        ReductionMode::ShiftInvert(0.0)
    }
}

impl fmt::Display for ReductionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionMode::Direct => f.write_str("direct"),
            ReductionMode::ShiftInvert(s0) => write!(f, "shift:{s0}"),
        }
    }
}

impl std::str::FromStr for ReductionMode {
    type Err = String;

    /// `direct` or `shift:<s0>`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "direct" {
            return Ok(ReductionMode::Direct);
        }
        s.strip_prefix("shift:")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .map(ReductionMode::ShiftInvert)
            .ok_or_else(|| format!("expected `direct` or `shift:<s0>`, got `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducedModel {
    pub a_r: DMatrix<f64>,
    pub b_r: DVector<f64>,
    pub c_r: DMatrix<f64>,
    /// Projection basis, N × q. Empty (N = 0 columns) when loaded from disk.
    pub v: DMatrix<f64>,
    pub mode: ReductionMode,
    /// True when the Krylov space became invariant before reaching the
    /// requested order; the reduced model is then exact on it.
    pub breakdown: bool,
    pub source_order: usize,
    pub dof_map: Option<Vec<(usize, Dof)>>,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.a_r.nrows()
    }

    pub fn as_state_space(&self) -> StateSpace {
        StateSpace {
            a: self.a_r.clone(),
            b: self.b_r.clone(),
            c: self.c_r.clone(),
            dof_map: None,
        }
    }
}

/// Projects `ss` onto an order-`q` Krylov basis: A_r = VᵀAV, b_r = Vᵀb, c_r = cV.
pub fn reduce(ss: &StateSpace, q: usize, mode: ReductionMode) -> Result<ReducedModel, MorError> {
    let basis = krylov_basis(ss, q, mode)?;
    let v = basis.v;
    let a_r = v.transpose() * &ss.a * &v;
    let b_r = v.transpose() * &ss.b;
    let c_r = &ss.c * &v;
    Ok(ReducedModel {
        a_r,
        b_r,
        c_r,
        v,
        mode,
        breakdown: basis.breakdown,
        source_order: ss.order(),
        dof_map: ss.dof_map.clone(),
    })
}

pub fn krylov_basis(
    ss: &StateSpace,
    q: usize,
    mode: ReductionMode,
) -> Result<ArnoldiBasis, MorError> {
    let n = ss.order();
    if q == 0 || q > n {
        return Err(MorError::Order { q, n });
    }
    match mode {
        ReductionMode::Direct => arnoldi(|x| Ok(&ss.a * x), &ss.b, q, DEFAULT_DEFLATION_TOL),
        ReductionMode::ShiftInvert(s0) => {
            let shifted = &ss.a - DMatrix::identity(n, n) * s0;
            let lu = shifted.lu();
            if !lu.is_invertible() {
                return Err(MorError::SingularShift(s0));
            }
            let solve = |x: &DVector<f64>| {
                lu.solve(x)
                    .filter(|y| y.iter().all(|v| v.is_finite()))
                    .ok_or(MorError::SingularShift(s0))
            };
            let start = solve(&ss.b)?;
            arnoldi(solve, &start, q, DEFAULT_DEFLATION_TOL)
        }
    }
}

/// c·Aʲ·b for j = 0..count.
pub fn markov_parameters(ss: &StateSpace, count: usize) -> Vec<DVector<f64>> {
    let mut x = ss.b.clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(&ss.c * &x);
        x = &ss.a * x;
    }
    out
}

/// c·(A − s0 I)^(−j−1)·b for j = 0..count.
pub fn moments(ss: &StateSpace, s0: f64, count: usize) -> Result<Vec<DVector<f64>>, MorError> {
    let n = ss.order();
    let lu = (&ss.a - DMatrix::identity(n, n) * s0).lu();
    let mut x = ss.b.clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        x = lu.solve(&x).ok_or(MorError::SingularShift(s0))?;
        out.push(&ss.c * &x);
    }
    Ok(out)
}
