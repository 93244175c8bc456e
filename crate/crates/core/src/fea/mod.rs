//! 3D Euler-Bernoulli beam finite elements with rigid-plate masses:
//! model construction from a netlist, assembly, modal and static solves,
//! and Matrix Market export.

mod assemble;
mod element;
mod export;
mod model;
mod solve;

use thiserror::Error;

pub use assemble::{assemble, SystemMatrices};
pub use element::{
    beam_element_matrices, global_element_matrices, local_frame, rigid_mode_count, Mat12, Section,
};
pub use export::{export_system, import_system, system_files, SYSTEM_FILES};
pub use model::{build_fea_model, BeamElement, Dof, FeaModel, Plane, PointMass, DOFS_PER_NODE};
pub use solve::{generalized_modes, modal_analysis, static_solve, Mode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeaError {
    #[error("structure containing node {node} has no anchor")]
    Unanchored { node: usize },
    #[error("mass matrix is not positive definite after constraint elimination")]
    SingularMass,
    #[error("stiffness matrix is singular")]
    SingularStiffness,
    #[error("{requested} modes requested from a system of size {size}")]
    TooManyModes { requested: usize, size: usize },
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use nalgebra::{DVector, Vector3};

    use super::*;
    use crate::geometry::{ProcessStack, StackLayer};
    use crate::schematic::{parse_netlist, Material};

    const L: f64 = 200e-6;
    const W: f64 = 4e-6;
    const T: f64 = 2e-6;

    fn cantilever(elements: usize) -> FeaModel {
        let mut m = FeaModel::default();
        for i in 0..=elements {
            m.add_node(Vector3::new(L * i as f64 / elements as f64, 0.0, 0.0));
        }
        for i in 0..elements {
            m.elements.push(BeamElement {
                nodes: [i, i + 1],
                width: W,
                thickness: T,
                material: Material::silicon(),
            });
        }
        m.fix_node(0);
        m
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn cantilever_tip_deflection() {
        let model = cantilever(1);
        let sys = assemble(&model, &[(1, 1, 1.0)], &[(1, 1)]).unwrap();
        let p = 1e-6;
        let u = static_solve(&sys, &(&sys.b_load.column(0) * p)).unwrap();
        let tip = (&sys.c_out * &u)[0];
        let e = Material::silicon().youngs_modulus;
        let iz = T * W.powi(3) / 12.0;
        assert!(rel(tip, p * L.powi(3) / (3.0 * e * iz)) < 1e-9);
    }

    #[test]
    fn fixed_guided_matches_lumped() {
        let mut model = cantilever(1);
        for d in [0, 2, 3, 4, 5] {
            model.fixed_dofs.insert((1, d));
        }
        let sys = assemble(&model, &[], &[]).unwrap();
        assert_eq!(sys.size(), 1);
        let e = Material::silicon().youngs_modulus;
        assert!(rel(sys.k[(0, 0)], e * T * W.powi(3) / L.powi(3)) < 1e-9);
    }

    #[test]
    fn cantilever_first_mode() {
        let sys = assemble(&cantilever(10), &[], &[]).unwrap();
        let modes = modal_analysis(&sys, 3).unwrap();
        let mat = Material::silicon();
        let iy = W * T.powi(3) / 12.0;
        let analytic = 1.8751f64.powi(2) / (2.0 * PI)
            * (mat.youngs_modulus * iy / (mat.density * W * T * L.powi(4))).sqrt();
        assert!(rel(modes[0].frequency, analytic) < 1e-3);
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let dot = (a.shape.transpose() * &sys.m * &b.shape)[0];
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn free_free_element() {
        let mut model = cantilever(1);
        model.fixed_dofs.clear();
        let sys = assemble(&model, &[], &[]).unwrap();
        assert_eq!(rigid_mode_count(&sys.k, L), 6);
        assert_eq!(sys.cd, sys.k.clone() * 0.0);
    }

    #[test]
    fn static_solve_basics() {
        let sys = assemble(&cantilever(3), &[(3, 1, 1.0), (2, 2, 1.0)], &[]).unwrap();
        let zero = DVector::zeros(sys.size());
        assert_eq!(static_solve(&sys, &zero).unwrap(), zero);
        let f1 = sys.b_load.column(0).into_owned() * 1e-6;
        let f2 = sys.b_load.column(1).into_owned() * 3e-7;
        let u = static_solve(&sys, &(&f1 + &f2)).unwrap();
        let sum = static_solve(&sys, &f1).unwrap() + static_solve(&sys, &f2).unwrap();
        assert!((&u - sum).norm() <= 1e-10 * u.norm());
        assert!((&sys.k * &u - (&f1 + &f2)).norm() < 1e-10 * (&f1 + &f2).norm());
    }

    #[test]
    fn too_many_modes() {
        let sys = assemble(&cantilever(1), &[], &[]).unwrap();
        assert!(matches!(
            modal_analysis(&sys, 7),
            Err(FeaError::TooManyModes {
                requested: 7,
                size: 6
            })
        ));
    }

    #[test]
    fn rigid_links_conserve_mass() {
        let mut model = FeaModel::default();
        let master = model.add_node(Vector3::new(0.0, 0.0, 0.0));
        for (x, y) in [(1e-4, 0.0), (0.0, 1e-4), (-1e-4, 2e-5)] {
            let s = model.add_node(Vector3::new(x, y, 0.0));
            model.rigid_links.push((master, s));
            model.point_masses.push(PointMass {
                node: s,
                mass: 1e-9,
                inertia: [1e-20; 3],
            });
        }
        model.point_masses.push(PointMass {
            node: master,
            mass: 2e-9,
            inertia: [1e-20; 3],
        });
        let sys = assemble(&model, &[], &[]).unwrap();
        assert_eq!(sys.size(), 6);
        for d in 0..3 {
            assert!(rel(sys.m[(d, d)], 5e-9) < 1e-12);
        }
    }

    fn stack() -> ProcessStack {
        ProcessStack::new(
            "p",
            vec![
                StackLayer::new("ANCHOR", 0, 2_000, "oxide"),
                StackLayer::new("STRUCT", 2_000, 2_000, "si"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn build_anchored_beam() {
        let n = parse_netlist(
            "anchor a node=(g) w=10u h=10u anchor_layer=ANCHOR pos=(-10u,-5u) layer=STRUCT\n\
             beam b node=(g,t) l=200u w=4u layer=STRUCT\n",
        )
        .unwrap();
        let model = build_fea_model(&n, &Material::silicon(), &stack(), 1).unwrap();
        assert_eq!(model.nodes.len(), 2);
        assert_eq!(model.elements.len(), 1);
        assert_eq!(model.fixed_dofs.len(), 6);
        assert_eq!(model.nodes[model.node("t").unwrap()].x, 200e-6);
    }

    #[test]
    fn build_mass_with_four_beams() {
        let n = parse_netlist(
            "anchor a node=(g) w=10u h=500u anchor_layer=ANCHOR pos=(-10u,0) layer=STRUCT\n\
             anchor b node=(g) w=10u h=500u anchor_layer=ANCHOR pos=(600u,0) layer=STRUCT\n\
             mass m node=(x) w=200u h=200u pos=(200u,150u) layer=STRUCT\n\
             beam b1 node=(g,x) l=200u w=4u pos=(0,200u) layer=STRUCT\n\
             beam b2 node=(g,x) l=200u w=4u pos=(0,300u) layer=STRUCT\n\
             beam b3 node=(x,g) l=200u w=4u pos=(400u,200u) layer=STRUCT\n\
             beam b4 node=(x,g) l=200u w=4u pos=(400u,300u) layer=STRUCT\n",
        )
        .unwrap();
        let model = build_fea_model(&n, &Material::silicon(), &stack(), 2).unwrap();
        assert_eq!(model.point_masses.len(), 1);
        assert_eq!(model.rigid_links.len(), 4);
        assert_eq!(model.elements.len(), 8);
        assert!(model
            .rigid_links
            .iter()
            .all(|&(m, _)| m == model.mass_nodes["m"]));
        assert!(assemble(&model, &[], &[]).is_ok());
    }

    #[test]
    fn unanchored_structure_rejected() {
        let n = parse_netlist(
            "mass m node=(x) w=200u h=200u layer=STRUCT\n\
             beam b node=(x,y) l=200u w=4u pos=(200u,100u) layer=STRUCT\n",
        )
        .unwrap();
        assert!(matches!(
            build_fea_model(&n, &Material::silicon(), &stack(), 1),
            Err(FeaError::Unanchored { .. })
        ));
    }
}
