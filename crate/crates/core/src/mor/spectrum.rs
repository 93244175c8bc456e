use nalgebra::{Complex, DMatrix};

/// Diagonal similarity by powers of two that evens out row and column norms.
pub fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let s = c + r;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (c + r) < 0.95 * s {
                done = false;
                a.row_mut(i).scale_mut(1.0 / f);
                a.column_mut(i).scale_mut(f);
            }
        }
    }
}

/// Eigenvalues of a balanced copy of `a`; `None` when the QR iteration
/// does not settle.
///
/// Spectra symmetric about the imaginary axis (undamped mechanics) can stall
/// the double-shift QR, so a real shift is tried when the plain one fails.
pub fn eigenvalues(a: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    let n = a.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut b = a.clone();
    balance(&mut b);
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for sigma in [0.0, 0.1 * scale, 0.37 * scale] {
        let shifted = &b + DMatrix::identity(n, n) * sigma;
        if let Some(s) = nalgebra::linalg::Schur::try_new(shifted, f64::EPSILON, 100 * n) {
            return Some(
                s.complex_eigenvalues()
                    .iter()
                    .map(|e| e - Complex::new(sigma, 0.0))
                    .collect(),
            );
        }
    }
    None
}
