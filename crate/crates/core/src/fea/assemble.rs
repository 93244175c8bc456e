use nalgebra::{DMatrix, SMatrix};

use super::element::global_element_matrices;
use super::model::{Dof, FeaModel, DOFS_PER_NODE};
use super::FeaError;

/// Constrained second-order system `M ü + Cd u̇ + K u = B f`, `y = C u`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemMatrices {
    pub m: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub cd: DMatrix<f64>,
    pub b_load: DMatrix<f64>,
    pub c_out: DMatrix<f64>,
    /// (node, dof) of each retained coordinate.
    pub dof_map: Vec<(usize, Dof)>,
}

impl SystemMatrices {
    pub fn size(&self) -> usize {
        self.dof_map.len()
    }

    pub fn index_of(&self, node: usize, dof: Dof) -> Option<usize> {
        self.dof_map.iter().position(|&x| x == (node, dof))
    }
}

/// Each full-model DOF as a combination of retained coordinates.
pub(crate) struct Reduction {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub dof_map: Vec<(usize, Dof)>,
}

pub(crate) fn reduction(model: &FeaModel) -> Reduction {
    let n = model.nodes.len();
    let mut master = vec![None; n];
    for &(m, s) in &model.rigid_links {
        master[s] = Some(m);
    }
    let mut index = vec![[None; DOFS_PER_NODE]; n];
    let mut dof_map = Vec::new();
    for node in 0..n {
        if master[node].is_some() {
            continue;
        }
        for d in 0..DOFS_PER_NODE {
            if !model.fixed_dofs.contains(&(node, d as Dof)) {
                index[node][d] = Some(dof_map.len());
                dof_map.push((node, d as Dof));
            }
        }
    }
    let mut rows = Vec::with_capacity(n * DOFS_PER_NODE);
    for node in 0..n {
        for d in 0..DOFS_PER_NODE {
            let row = match master[node] {
                None => index[node][d].map(|i| vec![(i, 1.0)]).unwrap_or_default(),
                Some(m) => {
                    let r = model.nodes[node] - model.nodes[m];
                    // u_s = u_m + θ_m × r, θ_s = θ_m
                    let terms: Vec<(usize, f64)> = match d {
                        0 => vec![(0, 1.0), (4, r.z), (5, -r.y)],
                        1 => vec![(1, 1.0), (5, r.x), (3, -r.z)],
                        2 => vec![(2, 1.0), (3, r.y), (4, -r.x)],
                        _ => vec![(d, 1.0)],
                    };
                    terms
                        .into_iter()
                        .filter(|&(_, c)| c != 0.0)
                        .filter_map(|(md, c)| index[m][md].map(|i| (i, c)))
                        .collect()
                }
            };
            rows.push(row);
        }
    }
    Reduction { rows, dof_map }
}

fn scatter(target: &mut DMatrix<f64>, rows: &[&Vec<(usize, f64)>], local: &[f64], size: usize) {
    for a in 0..size {
        for b in 0..size {
            let v = local[a + b * size];
            if v == 0.0 {
                continue;
            }
            for &(i, ci) in rows[a] {
                for &(j, cj) in rows[b] {
                    target[(i, j)] += ci * cj * v;
                }
            }
        }
    }
}

/// Global M, K in the retained coordinates. Each input `(node, dof, scale)`
/// becomes one column of `b_load`, each output `(node, dof)` one row of
/// `c_out`.
pub fn assemble(
    model: &FeaModel,
    inputs: &[(usize, Dof, f64)],
    outputs: &[(usize, Dof)],
) -> Result<SystemMatrices, FeaError> {
    model.check()?;
    let red = reduction(model);
    let n = red.dof_map.len();
    if n == 0 {
        return Err(FeaError::InvalidModel("every DOF is constrained".into()));
    }
    let mut k = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    let full = |node: usize, d: usize| &red.rows[node * DOFS_PER_NODE + d];

    for e in &model.elements {
        let [a, b] = e.nodes;
        let (ke, me) = global_element_matrices(
            model.nodes[a],
            model.nodes[b],
            e.width,
            e.thickness,
            &e.material,
        );
        let rows: Vec<_> = (0..12).map(|i| full(e.nodes[i / 6], i % 6)).collect();
        scatter(&mut k, &rows, ke.as_slice(), 12);
        scatter(&mut m, &rows, me.as_slice(), 12);
    }
    for p in &model.point_masses {
        let mut local = SMatrix::<f64, 6, 6>::zeros();
        for i in 0..3 {
            local[(i, i)] = p.mass;
            local[(i + 3, i + 3)] = p.inertia[i];
        }
        let rows: Vec<_> = (0..6).map(|i| full(p.node, i)).collect();
        scatter(&mut m, &rows, local.as_slice(), 6);
    }
    // exact symmetry regardless of summation order
    let k = (&k + k.transpose()) * 0.5;
    let m = (&m + m.transpose()) * 0.5;
    if m.clone().cholesky().is_none() {
        return Err(FeaError::SingularMass);
    }

    let mut b_load = DMatrix::zeros(n, inputs.len());
    for (col, &(node, d, scale)) in inputs.iter().enumerate() {
        check_dof(model, node, d)?;
        for &(i, c) in full(node, d as usize) {
            b_load[(i, col)] += scale * c;
        }
    }
    let mut c_out = DMatrix::zeros(outputs.len(), n);
    for (row, &(node, d)) in outputs.iter().enumerate() {
        check_dof(model, node, d)?;
        for &(i, c) in full(node, d as usize) {
            c_out[(row, i)] += c;
        }
    }
    let cd = &m * model.alpha + &k * model.beta;
    Ok(SystemMatrices {
        m,
        k,
        cd,
        b_load,
        c_out,
        dof_map: red.dof_map,
    })
}

fn check_dof(model: &FeaModel, node: usize, d: Dof) -> Result<(), FeaError> {
    if node >= model.nodes.len() || d as usize >= DOFS_PER_NODE {
        return Err(FeaError::InvalidModel(format!("no DOF ({node}, {d})")));
    }
    Ok(())
}
