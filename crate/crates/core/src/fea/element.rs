use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::schematic::Material;

pub type Mat12 = SMatrix<f64, 12, 12>;

/// Rectangular cross-section properties, width in-plane and thickness along z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Section {
    pub area: f64,
    /// Second moment for bending out of plane (deflection along local z).
    pub iy: f64,
    /// Second moment for bending in plane (deflection along local y).
    pub iz: f64,
    /// Saint-Venant torsion constant.
    pub j: f64,
}

impl Section {
    pub fn rectangle(width: f64, thickness: f64) -> Self {
        let (a, b) = (width.max(thickness), width.min(thickness));
        let r = b / a;
        Self {
            area: width * thickness,
            iy: width * thickness.powi(3) / 12.0,
            iz: thickness * width.powi(3) / 12.0,
            j: a * b.powi(3) * (1.0 / 3.0 - 0.21 * r * (1.0 - r.powi(4) / 12.0)),
        }
    }
}

/// Local stiffness and consistent mass of a 2-node Euler-Bernoulli beam.
/// DOF order per node: ux, uy, uz, rx, ry, rz; local x runs node 1 → node 2.
pub fn beam_element_matrices(
    length: f64,
    width: f64,
    thickness: f64,
    material: &Material,
) -> (Mat12, Mat12) {
    let s = Section::rectangle(width, thickness);
    let (e, g, rho, l) = (
        material.youngs_modulus,
        material.shear_modulus(),
        material.density,
        length,
    );
    let mut k = Mat12::zeros();
    let set = |m: &mut Mat12, i: usize, j: usize, v: f64| {
        m[(i, j)] = v;
        m[(j, i)] = v;
    };

    let ea = e * s.area / l;
    set(&mut k, 0, 0, ea);
    set(&mut k, 6, 6, ea);
    set(&mut k, 0, 6, -ea);
    let gj = g * s.j / l;
    set(&mut k, 3, 3, gj);
    set(&mut k, 9, 9, gj);
    set(&mut k, 3, 9, -gj);

    // in-plane bending: uy, rz
    let ei = e * s.iz;
    let (a, b, c, d) = (
        12.0 * ei / l.powi(3),
        6.0 * ei / l.powi(2),
        4.0 * ei / l,
        2.0 * ei / l,
    );
    set(&mut k, 1, 1, a);
    set(&mut k, 7, 7, a);
    set(&mut k, 1, 7, -a);
    set(&mut k, 1, 5, b);
    set(&mut k, 1, 11, b);
    set(&mut k, 5, 7, -b);
    set(&mut k, 7, 11, -b);
    set(&mut k, 5, 5, c);
    set(&mut k, 11, 11, c);
    set(&mut k, 5, 11, d);

    // out-of-plane bending: uz, ry
    let ei = e * s.iy;
    let (a, b, c, d) = (
        12.0 * ei / l.powi(3),
        6.0 * ei / l.powi(2),
        4.0 * ei / l,
        2.0 * ei / l,
    );
    set(&mut k, 2, 2, a);
    set(&mut k, 8, 8, a);
    set(&mut k, 2, 8, -a);
    set(&mut k, 2, 4, -b);
    set(&mut k, 2, 10, -b);
    set(&mut k, 4, 8, b);
    set(&mut k, 8, 10, b);
    set(&mut k, 4, 4, c);
    set(&mut k, 10, 10, c);
    set(&mut k, 4, 10, d);

    let mut m = Mat12::zeros();
    let ml = rho * s.area * l;
    set(&mut m, 0, 0, ml / 3.0);
    set(&mut m, 6, 6, ml / 3.0);
    set(&mut m, 0, 6, ml / 6.0);
    let jl = rho * (s.iy + s.iz) * l;
    set(&mut m, 3, 3, jl / 3.0);
    set(&mut m, 9, 9, jl / 3.0);
    set(&mut m, 3, 9, jl / 6.0);

    let f = ml / 420.0;
    set(&mut m, 1, 1, 156.0 * f);
    set(&mut m, 7, 7, 156.0 * f);
    set(&mut m, 1, 7, 54.0 * f);
    set(&mut m, 1, 5, 22.0 * l * f);
    set(&mut m, 1, 11, -13.0 * l * f);
    set(&mut m, 5, 7, 13.0 * l * f);
    set(&mut m, 7, 11, -22.0 * l * f);
    set(&mut m, 5, 5, 4.0 * l * l * f);
    set(&mut m, 11, 11, 4.0 * l * l * f);
    set(&mut m, 5, 11, -3.0 * l * l * f);

    set(&mut m, 2, 2, 156.0 * f);
    set(&mut m, 8, 8, 156.0 * f);
    set(&mut m, 2, 8, 54.0 * f);
    set(&mut m, 2, 4, -22.0 * l * f);
    set(&mut m, 2, 10, 13.0 * l * f);
    set(&mut m, 4, 8, -13.0 * l * f);
    set(&mut m, 8, 10, 22.0 * l * f);
    set(&mut m, 4, 4, 4.0 * l * l * f);
    set(&mut m, 10, 10, 4.0 * l * l * f);
    set(&mut m, 4, 10, -3.0 * l * l * f);
    (k, m)
}

/// Rows are the local axes in global coordinates. Local z stays as close to
/// global z as the beam direction allows.
pub fn local_frame(p1: Vector3<f64>, p2: Vector3<f64>) -> Matrix3<f64> {
    let ex = (p2 - p1).normalize();
    let up = if ex.z.abs() > 0.999 {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let ey = up.cross(&ex).normalize();
    let ez = ex.cross(&ey);
    Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()])
}

/// Element matrices in global coordinates.
pub fn global_element_matrices(
    p1: Vector3<f64>,
    p2: Vector3<f64>,
    width: f64,
    thickness: f64,
    material: &Material,
) -> (Mat12, Mat12) {
    let (k, m) = beam_element_matrices((p2 - p1).norm(), width, thickness, material);
    let r = local_frame(p1, p2);
    let mut t = Mat12::zeros();
    for b in 0..4 {
        t.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(&r);
    }
    (t.transpose() * k * t, t.transpose() * m * t)
}

/// Near-zero eigenvalues (below `1e-6` of the largest) of `k` after the
/// rotations are rescaled to lengths by `scale`, so that every entry is N/m.
pub fn rigid_mode_count(k: &nalgebra::DMatrix<f64>, scale: f64) -> usize {
    let mut s = k.clone();
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            let f = |r: usize| if r % 6 >= 3 { 1.0 / scale } else { 1.0 };
            s[(i, j)] *= f(i) * f(j);
        }
    }
    let ev = s.symmetric_eigenvalues();
    let max = ev.amax();
    ev.iter().filter(|v| v.abs() < 1e-6 * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_six_rigid_modes() {
        let (k, m) = beam_element_matrices(200e-6, 4e-6, 2e-6, &Material::silicon());
        assert!((k - k.transpose()).abs().max() == 0.0);
        assert!((m - m.transpose()).abs().max() == 0.0);
        assert!(m.cholesky().is_some());
        assert_eq!(
            rigid_mode_count(
                &nalgebra::DMatrix::from_column_slice(12, 12, k.as_slice()),
                200e-6
            ),
            6
        );
    }

    #[test]
    fn frame_of_in_plane_beam() {
        let r = local_frame(Vector3::zeros(), Vector3::new(0.0, 1.0, 0.0));
        assert!((r.row(1) - Vector3::new(-1.0, 0.0, 0.0).transpose()).norm() < 1e-15);
        assert!((r.row(2) - Vector3::z().transpose()).norm() < 1e-15);
    }
}
