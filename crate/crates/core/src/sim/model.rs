use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::geometry::ProcessStack;
use crate::mor::{ReducedModel, StateSpace};
use crate::schematic::{lumped_params, ComponentKind, Geometry, LumpedParams, Material, Netlist};

use super::SimError;

/// Direction of motion the lumped model resolves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Axis {
    #[default]
    X,
    Y,
    Z,
}

impl Axis {
    fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(format!("axis must be x, y or z, got `{s}`")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

/// Force in, displacement out: `ż = A z + b F`, attachment displacement = `c[0]·z`.
#[derive(Clone, Debug, PartialEq)]
pub struct Macromodel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
}

impl Macromodel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    fn check(&self) -> Result<(), String> {
        let q = self.a.nrows();
        if q == 0 || self.a.ncols() != q {
            return Err(format!("A is {}x{}", self.a.nrows(), self.a.ncols()));
        }
        if self.b.len() != q || self.c.ncols() != q || self.c.nrows() == 0 {
            return Err(format!(
                "b has {} rows and c is {}x{} for order {q}",
                self.b.len(),
                self.c.nrows(),
                self.c.ncols()
            ));
        }
        Ok(())
    }
}

impl From<&ReducedModel> for Macromodel {
    fn from(r: &ReducedModel) -> Self {
        Self {
            a: r.a_r.clone(),
            b: r.b_r.clone(),
            c: r.c_r.clone(),
        }
    }
}

impl From<&StateSpace> for Macromodel {
    fn from(s: &StateSpace) -> Self {
        Self {
            a: s.a.clone(),
            b: s.b.clone(),
            c: s.c.clone(),
        }
    }
}

/// A macromodel standing in for the netlist instances in `covers`.
///
/// A covered rigid mass is part of the macromodel: its inertia must be inside
/// the FEA system the model came from.
#[derive(Clone, Debug, PartialEq)]
pub struct MacromodelAttachment {
    pub model: Macromodel,
    pub node: String,
    pub covers: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    pub axis: Axis,
    /// Rayleigh damping on the lumped part, `αM + βK`.
    pub alpha: f64,
    pub beta: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            axis: Axis::X,
            alpha: 0.0,
            beta: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombPort {
    pub node: String,
    /// F/m along the finger direction.
    pub dc_dx: f64,
    pub rest_capacitance: f64,
    /// Finger direction projected on the analysis axis.
    pub projection: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Probe {
    Displacement(String),
    Velocity(String),
    Capacitance(String),
    Current(String),
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::Displacement(n) => write!(f, "x({n})"),
            Probe::Velocity(n) => write!(f, "v({n})"),
            Probe::Capacitance(c) => write!(f, "cap({c})"),
            Probe::Current(c) => write!(f, "i({c})"),
        }
    }
}

impl FromStr for Probe {
    type Err = SimError;

    /// `x(node)`, `v(node)`, `cap(comb)` or `i(comb)`.
    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = || SimError::UnknownProbe(s.to_string());
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let arg = rest
            .strip_suffix(')')
            .filter(|a| !a.is_empty())
            .ok_or_else(bad)?;
        let arg = arg.to_string();
        match head {
            "x" => Ok(Probe::Displacement(arg)),
            "v" => Ok(Probe::Velocity(arg)),
            "cap" => Ok(Probe::Capacitance(arg)),
            "i" => Ok(Probe::Current(arg)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct NodeMap {
    grounded: bool,
    /// Displacement as a row over the state.
    x: DVector<f64>,
    /// dy/dt per unit force, `None` for grounded and massless nodes.
    f: Option<DVector<f64>>,
}

/// Linear system `ẏ = A y + forcing(t)`.
///
/// State layout: lumped displacements, lumped velocities, then each
/// macromodel's internal states in attachment order.
#[derive(Clone, Debug, PartialEq)]
pub struct SimModel {
    pub axis: Axis,
    pub states: Vec<String>,
    pub a: DMatrix<f64>,
    pub combs: BTreeMap<String, CombPort>,
    /// Lumped mass and condensed stiffness over the lumped DOFs.
    pub m_lumped: DMatrix<f64>,
    pub k_lumped: DMatrix<f64>,
    nodes: BTreeMap<String, NodeMap>,
    probes: Vec<Probe>,
}

impl SimModel {
    pub fn state_count(&self) -> usize {
        self.a.nrows()
    }

    pub fn lumped_dofs(&self) -> usize {
        self.m_lumped.nrows()
    }

    pub fn probes(&self) -> &[Probe] {
        &self.probes
    }

    pub fn with_probes(mut self, probes: Vec<Probe>) -> Result<Self, SimError> {
        for p in &probes {
            self.check_probe(p)?;
        }
        self.probes = probes;
        Ok(self)
    }

    pub fn check_probe(&self, p: &Probe) -> Result<(), SimError> {
        match p {
            Probe::Displacement(n) | Probe::Velocity(n) => {
                self.displacement_row(n)?;
            }
            Probe::Capacitance(c) | Probe::Current(c) => {
                self.comb(c)?;
            }
        }
        Ok(())
    }

    pub fn comb(&self, name: &str) -> Result<&CombPort, SimError> {
        self.combs
            .get(name)
            .ok_or_else(|| SimError::UnknownInstance(name.to_string()))
    }

    /// Row `r` with node displacement `r·y`.
    pub fn displacement_row(&self, node: &str) -> Result<&DVector<f64>, SimError> {
        self.nodes
            .get(node)
            .map(|m| &m.x)
            .ok_or_else(|| SimError::UnknownNode(node.to_string()))
    }

    /// Change of `ẏ` per newton applied at `node` along the axis.
    pub fn force_column(&self, node: &str) -> Result<&DVector<f64>, SimError> {
        let m = self
            .nodes
            .get(node)
            .ok_or_else(|| SimError::UnknownNode(node.to_string()))?;
        if m.grounded {
            return Err(SimError::GroundedAndDriven(node.to_string()));
        }
        m.f.as_ref()
            .ok_or_else(|| SimError::MasslessNode(node.to_string()))
    }

    /// ½vᵀMv + ½xᵀKx over the lumped DOFs.
    pub fn lumped_energy(&self, y: &DVector<f64>) -> f64 {
        let n = self.lumped_dofs();
        let x = y.rows(0, n);
        let v = y.rows(n, n);
        0.5 * (v.dot(&(&self.m_lumped * v)) + x.dot(&(&self.k_lumped * x)))
    }

    /// Plain second-order system `M ẍ + Cd ẋ + K x = f` on named DOFs.
    pub fn from_second_order(
        names: &[&str],
        m: &DMatrix<f64>,
        k: &DMatrix<f64>,
        cd: &DMatrix<f64>,
    ) -> Result<Self, SimError> {
        let n = names.len();
        if m.shape() != (n, n) || k.shape() != (n, n) || cd.shape() != (n, n) {
            return Err(SimError::PortMismatch(
                "matrix sizes disagree with names".into(),
            ));
        }
        let lu = m.clone().lu();
        let minv = lu.try_inverse().ok_or(SimError::SingularMass)?;
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, n), (n, n)).fill_with_identity();
        a.view_mut((n, 0), (n, n)).copy_from(&(-&minv * k));
        a.view_mut((n, n), (n, n)).copy_from(&(-&minv * cd));
        let mut nodes = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            let mut x = DVector::zeros(2 * n);
            x[i] = 1.0;
            let mut f = DVector::zeros(2 * n);
            f.rows_mut(n, n).copy_from(&minv.column(i));
            nodes.insert(
                name.to_string(),
                NodeMap {
                    grounded: false,
                    x,
                    f: Some(f),
                },
            );
        }
        let states = state_names(names.iter().map(|s| s.to_string()).collect(), &[]);
        Ok(Self {
            axis: Axis::X,
            states,
            a,
            combs: BTreeMap::new(),
            m_lumped: m.clone(),
            k_lumped: k.clone(),
            probes: names
                .iter()
                .map(|s| Probe::Displacement(s.to_string()))
                .collect(),
            nodes,
        })
    }
}

fn state_names(lumped: Vec<String>, macros: &[(String, usize)]) -> Vec<String> {
    let mut out: Vec<String> = lumped.iter().map(|n| format!("x({n})")).collect();
    out.extend(lumped.iter().map(|n| format!("v({n})")));
    for (node, q) in macros {
        out.extend((0..*q).map(|k| format!("z{k}({node})")));
    }
    out
}

/// Spring constant of a beam along the axis. In-plane axes mix the axial and
/// lateral stiffness by the beam direction.
fn axis_stiffness(k: &crate::schematic::BeamStiffness, angle_deg: f64, axis: Axis) -> f64 {
    let (s, c) = angle_deg.to_radians().sin_cos();
    match axis {
        Axis::X => k.axial * c * c + k.lateral * s * s,
        Axis::Y => k.axial * s * s + k.lateral * c * c,
        Axis::Z => k.out_of_plane,
    }
}

/// Lumped equations of motion along one axis, with macromodels in place of
/// the instances they cover. Massless spring junctions are condensed out.
pub fn build_sim_model(
    n: &Netlist,
    m: &Material,
    stack: &ProcessStack,
    macromodels: &[MacromodelAttachment],
    options: SimOptions,
) -> Result<SimModel, SimError> {
    let known: BTreeSet<&str> = n.nodes();
    let mut covered = BTreeSet::new();
    let mut attach: Vec<&str> = Vec::new();
    for mm in macromodels {
        mm.model
            .check()
            .map_err(|e| SimError::PortMismatch(format!("macromodel at {}: {e}", mm.node)))?;
        if !known.contains(mm.node.as_str()) {
            return Err(SimError::UnknownNode(mm.node.clone()));
        }
        if attach.contains(&mm.node.as_str()) {
            return Err(SimError::PortMismatch(format!(
                "two macromodels attach to {}",
                mm.node
            )));
        }
        attach.push(&mm.node);
        for c in &mm.covers {
            if n.instance(c).is_none() {
                return Err(SimError::UnknownInstance(c.clone()));
            }
            covered.insert(c.as_str());
        }
    }

    let lumped = |inst| lumped_params(inst, m, stack).map_err(|e| SimError::Netlist(e.to_string()));
    let grounded: BTreeSet<&str> = n
        .instances
        .iter()
        .filter(|i| i.kind() == ComponentKind::Anchor)
        .flat_map(|i| i.nodes.iter().map(String::as_str))
        .collect();
    if let Some(node) = attach.iter().find(|a| grounded.contains(**a)) {
        return Err(SimError::GroundedAndDriven(node.to_string()));
    }

    let mut masses: BTreeMap<&str, f64> = BTreeMap::new();
    let mut springs = Vec::new();
    let mut combs = BTreeMap::new();
    for inst in n
        .instances
        .iter()
        .filter(|i| !covered.contains(i.name.as_str()))
    {
        match (&inst.geometry, lumped(inst)?) {
            (Geometry::RigidMass { .. }, LumpedParams::Mass { mass, .. }) => {
                let node = inst.nodes[0].as_str();
                if attach.contains(&node) {
                    return Err(SimError::PortMismatch(format!(
                        "{} sits on macromodel node {node}; cover it",
                        inst.name
                    )));
                }
                if !grounded.contains(node) {
                    *masses.entry(node).or_default() += mass;
                }
            }
            (Geometry::Beam { .. }, LumpedParams::Spring(k)) => {
                let k = axis_stiffness(&k, inst.angle, options.axis);
                springs.push((inst.nodes[0].as_str(), inst.nodes[1].as_str(), k));
            }
            (
                Geometry::LinearComb(p) | Geometry::BiasComb(p),
                LumpedParams::Comb {
                    dc_dx,
                    rest_capacitance,
                },
            ) => {
                let (ux, uy) = p.orient.unit();
                let (s, c) = inst.angle.to_radians().sin_cos();
                let d = [ux * c - uy * s, ux * s + uy * c, 0.0];
                let axis = options.axis.unit();
                combs.insert(
                    inst.name.clone(),
                    CombPort {
                        node: inst.nodes[0].clone(),
                        dc_dx,
                        rest_capacitance,
                        projection: d[0] * axis[0] + d[1] * axis[1] + d[2] * axis[2],
                    },
                );
            }
            _ => {}
        }
    }

    // primary nodes: lumped DOFs then attachments; junctions get condensed
    let lumped_nodes: Vec<&str> = masses.keys().copied().collect();
    let nl = lumped_nodes.len();
    let mut primary: Vec<&str> = lumped_nodes.clone();
    primary.extend(attach.iter().copied());
    let np = primary.len();
    let mut junctions: Vec<&str> = Vec::new();
    for &(a, b, _) in &springs {
        for node in [a, b] {
            if !grounded.contains(node) && !primary.contains(&node) && !junctions.contains(&node) {
                junctions.push(node);
            }
        }
    }
    junctions.sort_unstable();
    let index = |node: &str| -> Option<usize> {
        if grounded.contains(node) {
            return None;
        }
        primary
            .iter()
            .position(|p| *p == node)
            .or_else(|| junctions.iter().position(|j| *j == node).map(|j| np + j))
    };
    let nall = np + junctions.len();
    let mut k_all = DMatrix::<f64>::zeros(nall, nall);
    for &(a, b, k) in &springs {
        let (ia, ib) = (index(a), index(b));
        if let Some(i) = ia {
            k_all[(i, i)] += k;
        }
        if let Some(j) = ib {
            k_all[(j, j)] += k;
        }
        if let (Some(i), Some(j)) = (ia, ib) {
            k_all[(i, j)] -= k;
            k_all[(j, i)] -= k;
        }
    }
    let nj = junctions.len();
    let k_pp = k_all.view((0, 0), (np, np)).into_owned();
    // x_J = T x_P
    let (k_eff, t) = if nj == 0 {
        (k_pp, DMatrix::zeros(0, np))
    } else {
        let k_jj = k_all.view((np, np), (nj, nj)).into_owned();
        let k_jp = k_all.view((np, 0), (nj, np)).into_owned();
        let chol = k_jj.cholesky().ok_or_else(|| {
            SimError::PortMismatch(format!("spring junctions {junctions:?} are not held"))
        })?;
        let t = -chol.solve(&k_jp);
        let k_eff = &k_pp + k_jp.transpose() * &t;
        (k_eff, t)
    };

    let orders: Vec<usize> = macromodels.iter().map(|mm| mm.model.order()).collect();
    let ns = 2 * nl + orders.iter().sum::<usize>();
    let mut offsets = Vec::with_capacity(orders.len());
    let mut at = 2 * nl;
    for q in &orders {
        offsets.push(at);
        at += q;
    }

    // primary displacement rows
    let mut p_map = DMatrix::<f64>::zeros(np, ns);
    for i in 0..nl {
        p_map[(i, i)] = 1.0;
    }
    for (k, mm) in macromodels.iter().enumerate() {
        p_map
            .view_mut((nl + k, offsets[k]), (1, orders[k]))
            .copy_from(&mm.model.c.row(0));
    }

    let mass_vec: Vec<f64> = lumped_nodes.iter().map(|n| masses[n]).collect();
    if mass_vec.iter().any(|&v| !(v > 0.0)) {
        return Err(SimError::SingularMass);
    }
    let k_ll = k_eff.view((0, 0), (nl, nl)).into_owned();
    let m_ll = DMatrix::from_diagonal(&DVector::from_vec(mass_vec.clone()));
    let cd = &m_ll * options.alpha + &k_ll * options.beta;
    let spring_rows = -(&k_eff * &p_map); // np × ns: spring force on each primary node

    let mut a = DMatrix::<f64>::zeros(ns, ns);
    for i in 0..nl {
        a[(i, nl + i)] = 1.0;
        let mut row = a.row_mut(nl + i);
        row += spring_rows.row(i) / mass_vec[i];
        for j in 0..nl {
            a[(nl + i, nl + j)] -= cd[(i, j)] / mass_vec[i];
        }
    }
    for (k, mm) in macromodels.iter().enumerate() {
        let (o, q) = (offsets[k], orders[k]);
        let mut block = a.view_mut((o, o), (q, q));
        block += &mm.model.a;
        let coupling = &mm.model.b * spring_rows.row(nl + k);
        let mut rows = a.rows_mut(o, q);
        rows += coupling;
    }

    let mut nodes = BTreeMap::new();
    for (i, name) in primary.iter().enumerate() {
        let mut f = DVector::zeros(ns);
        if i < nl {
            f[nl + i] = 1.0 / mass_vec[i];
        } else {
            let k = i - nl;
            f.rows_mut(offsets[k], orders[k])
                .copy_from(&macromodels[k].model.b);
        }
        nodes.insert(
            name.to_string(),
            NodeMap {
                grounded: false,
                x: p_map.row(i).transpose(),
                f: Some(f),
            },
        );
    }
    for (j, name) in junctions.iter().enumerate() {
        nodes.insert(
            name.to_string(),
            NodeMap {
                grounded: false,
                x: (t.row(j) * &p_map).transpose(),
                f: None,
            },
        );
    }
    for name in &grounded {
        nodes.insert(
            name.to_string(),
            NodeMap {
                grounded: true,
                x: DVector::zeros(ns),
                f: None,
            },
        );
    }

    let mut probes: Vec<Probe> = primary
        .iter()
        .map(|p| Probe::Displacement(p.to_string()))
        .collect();
    probes.extend(
        combs
            .iter()
            .filter(|(_, c)| nodes.get(&c.node).is_some_and(|m| !m.grounded))
            .map(|(name, _)| Probe::Capacitance(name.clone())),
    );
    let macro_names: Vec<(String, usize)> = macromodels
        .iter()
        .map(|mm| (mm.node.clone(), mm.model.order()))
        .collect();
    let model = SimModel {
        axis: options.axis,
        states: state_names(
            lumped_nodes.iter().map(|s| s.to_string()).collect(),
            &macro_names,
        ),
        a,
        combs,
        m_lumped: m_ll,
        k_lumped: k_ll,
        nodes,
        probes: Vec::new(),
    };
    model.with_probes(probes)
}
