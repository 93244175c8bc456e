use nalgebra::{Complex, DMatrix, DVector};

use super::{MorError, ReducedModel, StateSpace};

/// Anything with `(A, b, c)`.
pub trait LinearSystem {
    fn a(&self) -> &DMatrix<f64>;
    fn b(&self) -> &DVector<f64>;
    fn c(&self) -> &DMatrix<f64>;
}

impl LinearSystem for StateSpace {
    fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    fn b(&self) -> &DVector<f64> {
        &self.b
    }
    fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
}

impl LinearSystem for ReducedModel {
    fn a(&self) -> &DMatrix<f64> {
        &self.a_r
    }
    fn b(&self) -> &DVector<f64> {
        &self.b_r
    }
    fn c(&self) -> &DMatrix<f64> {
        &self.c_r
    }
}

/// H(s) = c (sI − A)⁻¹ b at each point, one complex entry per output.
/// A is brought to Hessenberg form once, A = Q H Qᵀ, so each point costs
/// one O(N²) solve with sI − H.
pub fn transfer_function<S: LinearSystem + ?Sized>(
    sys: &S,
    s: &[Complex<f64>],
) -> Result<Vec<DVector<Complex<f64>>>, MorError> {
    let n = sys.a().nrows();
    let hess = sys.a().clone().hessenberg();
    let q = hess.q();
    let h = hess.h();
    let qb = q.tr_mul(sys.b());
    let cq = (sys.c() * &q).map(|v| Complex::new(v, 0.0));
    let scale = s.iter().map(|z| z.norm()).fold(h.amax(), f64::max);
    // pivots this small mean s sits on an eigenvalue
    let tol = n as f64 * f64::EPSILON * scale;
    s.iter()
        .map(|&si| {
            let x = solve_shifted_hessenberg(&h, si, &qb, tol).ok_or(MorError::SingularAt {
                re: si.re,
                im: si.im,
            })?;
            Ok(&cq * x)
        })
        .collect()
}

/// (sI − H) x = b for upper Hessenberg H, by elimination with adjacent-row
/// pivoting.
fn solve_shifted_hessenberg(
    h: &DMatrix<f64>,
    s: Complex<f64>,
    b: &DVector<f64>,
    tol: f64,
) -> Option<DVector<Complex<f64>>> {
    let n = h.nrows();
    let mut m = h.map(|v| Complex::new(-v, 0.0));
    for i in 0..n {
        m[(i, i)] += s;
    }
    let mut x = b.map(|v| Complex::new(v, 0.0));
    for k in 0..n.saturating_sub(1) {
        if m[(k + 1, k)].norm() > m[(k, k)].norm() {
            m.swap_rows(k, k + 1);
            x.swap_rows(k, k + 1);
        }
        let pivot = m[(k, k)];
        if !(pivot.norm() > tol) {
            return None;
        }
        let f = m[(k + 1, k)] / pivot;
        if f != Complex::new(0.0, 0.0) {
            for j in k..n {
                let v = m[(k, j)];
                m[(k + 1, j)] -= f * v;
            }
            let v = x[k];
            x[k + 1] -= f * v;
        }
    }
    for k in (0..n).rev() {
        let pivot = m[(k, k)];
        if !(pivot.norm() > tol) {
            return None;
        }
        let mut v = x[k];
        for j in k + 1..n {
            v -= m[(k, j)] * x[j];
        }
        x[k] = v / pivot;
    }
    x.iter()
        .all(|v| v.re.is_finite() && v.im.is_finite())
        .then_some(x)
}

/// Points `j·ω` for the given angular frequencies.
pub fn imaginary_axis(omegas: &[f64]) -> Vec<Complex<f64>> {
    omegas.iter().map(|&w| Complex::new(0.0, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hessenberg_solve_matches_dense_lu() {
        let n = 9;
        let a = DMatrix::from_fn(n, n, |i, j| {
            ((3 * i + 7 * j) % 11) as f64 - 5.0 - if i == j { 20.0 } else { 0.0 }
        });
        let b = DVector::from_fn(n, |i, _| 1.0 + i as f64);
        let c = DMatrix::from_fn(2, n, |i, j| (i + j) as f64 - 4.0);
        let ss = StateSpace::new(a.clone(), b.clone(), c.clone()).unwrap();
        let pts = [
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 3.7),
            Complex::new(-1.0, 40.0),
        ];
        let h = transfer_function(&ss, &pts).unwrap();
        for (s, got) in pts.iter().zip(&h) {
            let m = DMatrix::from_diagonal_element(n, n, *s) - a.map(|v| Complex::new(v, 0.0));
            let x = m.lu().solve(&b.map(|v| Complex::new(v, 0.0))).unwrap();
            let want = c.map(|v| Complex::new(v, 0.0)) * x;
            assert!((got - &want).norm() < 1e-12 * want.norm());
        }
    }
}
