//! System-level behavioral simulation: lumped equations of motion from a
//! netlist, macromodel attachment, RK4 transient and small-signal AC.

mod ac;
mod compare;
mod config;
mod model;
mod source;
mod transient;

use thiserror::Error;

pub use ac::{frequency_response, AcInput};
pub use compare::{compare_results, Comparison, ProbeError};
pub use config::{MacromodelSpec, RunConfig};
pub use model::{
    build_sim_model, Axis, CombPort, Macromodel, MacromodelAttachment, Probe, SimModel, SimOptions,
};
pub use source::{Source, Target, Waveform};
pub use transient::{suggest_dt, transient, transient_from, SimResult, SimStats};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("node {0} is both grounded and driven")]
    GroundedAndDriven(String),
    #[error("node {0} carries no mass and cannot take a force")]
    MasslessNode(String),
    #[error("macromodel port mismatch: {0}")]
    PortMismatch(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown instance {0}")]
    UnknownInstance(String),
    #[error("cannot resolve probe `{0}`")]
    UnknownProbe(String),
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("mass matrix is singular")]
    SingularMass,
    #[error("{0}")]
    Netlist(String),
    #[error("need dt > 0 and t_end > 0, got dt={dt} t_end={t_end}")]
    InvalidStep { dt: f64, t_end: f64 },
    #[error("state became non-finite at t = {time} s")]
    Diverged { time: f64 },
    #[error("response is singular at {0} Hz")]
    SingularAt(f64),
    #[error("results share no probes")]
    DisjointProbes,
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

impl SimModel {
    /// Static comb force along the axis at `volts`, N.
    pub fn comb_force(&self, comb: &str, volts: f64) -> Result<f64, SimError> {
        let c = self.comb(comb)?;
        Ok(0.5 * c.dc_dx * volts * volts * c.projection)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use nalgebra::{DMatrix, DVector};

    use super::*;
    use crate::geometry::{ProcessStack, StackLayer};
    use crate::mor::{reduce, to_first_order, ReductionMode};
    use crate::schematic::{parse_netlist, Material};

    fn oscillator(m: f64, k: f64, c: f64) -> SimModel {
        let one = |v| DMatrix::from_element(1, 1, v);
        SimModel::from_second_order(&["x"], &one(m), &one(k), &one(c)).unwrap()
    }

    fn max_err_cos(dt: f64) -> f64 {
        let w = 2.0 * PI;
        let model = oscillator(1.0, w * w, 0.0);
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let r = transient_from(&model, &[], 10.0, dt, Some(&y0)).unwrap();
        let x = r.signal("x(x)").unwrap();
        r.time
            .iter()
            .zip(x)
            .map(|(t, x)| (x - (w * t).cos()).abs())
            .fold(0.0, f64::max)
    }

    fn stack() -> ProcessStack {
        ProcessStack::new(
            "soi",
            vec![
                StackLayer::new("ANCHOR", 0, 2_000, "oxide"),
                StackLayer::new("STRUCT", 2_000, 2_000, "si"),
            ],
        )
        .unwrap()
    }

    const SPRING_MASS: &str = "process \"soi\"\n\
        anchor a1 node=(g) w=10u h=10u anchor_layer=ANCHOR pos=(0u,0u) layer=STRUCT\n\
        beam b1 node=(g,n1) l=200u w=2u pos=(10u,5u) layer=STRUCT\n\
        mass m1 node=(n1) w=400u h=400u pos=(210u,-195u) layer=STRUCT\n\
        lincomb c1 node=(n1) fingers=20 fl=40u fw=2u gap=2u overlap=20u orient=+y pos=(300u,205u) layer=STRUCT\n";

    fn spring_mass() -> SimModel {
        let n = parse_netlist(SPRING_MASS).unwrap();
        let opts = SimOptions {
            axis: Axis::Y,
            ..SimOptions::default()
        };
        build_sim_model(&n, &Material::silicon(), &stack(), &[], opts).unwrap()
    }

    #[test]
    fn analytic_cosine() {
        assert!(max_err_cos(1e-3) < 1e-6);
    }

    #[test]
    fn fourth_order() {
        let ratio = max_err_cos(2e-3) / max_err_cos(1e-3);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }

    /// Relative energy change over `steps` steps of `period / per_period`.
    fn energy_drift(per_period: f64, steps: f64) -> f64 {
        let model = oscillator(2.0, 3.0, 0.0)
            .with_probes(vec![
                Probe::Displacement("x".into()),
                Probe::Velocity("x".into()),
            ])
            .unwrap();
        let dt = 2.0 * PI / 1.5f64.sqrt() / per_period;
        let mut y = DVector::from_vec(vec![0.3, -0.1]);
        let e0 = model.lumped_energy(&y);
        let r = transient_from(&model, &[], dt * steps, dt, Some(&y)).unwrap();
        y[0] = *r.signal("x(x)").unwrap().last().unwrap();
        y[1] = *r.signal("v(x)").unwrap().last().unwrap();
        (model.lumped_energy(&y) - e0) / e0
    }

    #[test]
    fn energy_drift_matches_rk4_amplification() {
        // |R(iz)|² = 1 − z⁶/72 + z⁸/576 per step
        let z = 2.0 * PI / 100.0;
        let per_step = 1.0 - z.powi(6) / 72.0 + z.powi(8) / 576.0;
        let expected = per_step.powf(1e4) - 1.0;
        let got = energy_drift(100.0, 1e4);
        assert!(
            ((got - expected) / expected).abs() < 1e-3,
            "{got} {expected}"
        );
        assert!(energy_drift(200.0, 1e4).abs() < 1e-6);
    }

    #[test]
    fn zero_input_stays_zero() {
        let r = transient(&spring_mass(), &[], 1e-4, 1e-7).unwrap();
        assert!(r
            .signals
            .iter()
            .all(|(_, v)| v.iter().all(|&x| x == 0.0 || x == v[0])));
        assert_eq!(r.time.len(), 1001);
    }

    #[test]
    fn one_dof_counts() {
        let model = spring_mass();
        assert_eq!((model.lumped_dofs(), model.state_count()), (1, 2));
        assert_eq!(model.states, vec!["x(n1)", "v(n1)"]);
    }

    #[test]
    fn comb_force_value() {
        let model = spring_mass();
        assert!((model.comb("c1").unwrap().dc_dx - 3.5416e-10).abs() < 1e-15);
        let f = model.comb_force("c1", 10.0).unwrap();
        assert!((f - 1.7708e-8).abs() < 1e-14);
    }

    #[test]
    fn dc_response_is_compliance() {
        let model = spring_mass();
        let k = model.k_lumped[(0, 0)];
        let h = frequency_response(
            &model,
            &AcInput::Force("n1".into()),
            &Probe::Displacement("n1".into()),
            &[0.0],
        )
        .unwrap();
        assert!(((h[0].as_ref().unwrap().re - 1.0 / k) * k).abs() < 1e-10);
    }

    #[test]
    fn resonance_peak() {
        let model = oscillator(1.0, 1.0, 1e-3);
        let f0 = 1.0 / (2.0 * PI);
        let freqs: Vec<f64> = (1..200).map(|i| f0 * i as f64 / 100.0).collect();
        let h = frequency_response(
            &model,
            &AcInput::Force("x".into()),
            &Probe::Displacement("x".into()),
            &freqs,
        )
        .unwrap();
        let peak = (0..h.len())
            .max_by(|&a, &b| {
                h[a].as_ref()
                    .unwrap()
                    .norm()
                    .total_cmp(&h[b].as_ref().unwrap().norm())
            })
            .unwrap();
        assert_eq!(peak, 99);
        let undamped = oscillator(1.0, 1.0, 0.0);
        let h = frequency_response(
            &undamped,
            &AcInput::Force("x".into()),
            &Probe::Displacement("x".into()),
            &[f0],
        )
        .unwrap();
        assert!(matches!(h[0], Err(SimError::SingularAt(_))));
    }

    #[test]
    fn grounded_source_rejected() {
        let model = spring_mass();
        let s = Source::force("g", Waveform::Dc(1.0));
        assert_eq!(
            transient(&model, &[s], 1e-6, 1e-7).unwrap_err(),
            SimError::GroundedAndDriven("g".into())
        );
    }

    #[test]
    fn exact_macromodel_substitution() {
        let model = oscillator(2.0, 5.0, 0.1);
        // same oscillator as a macromodel on a massless node
        let sys = crate::fea::SystemMatrices {
            m: DMatrix::from_element(1, 1, 2.0),
            k: DMatrix::from_element(1, 1, 5.0),
            cd: DMatrix::from_element(1, 1, 0.1),
            b_load: DMatrix::from_element(1, 1, 1.0),
            c_out: DMatrix::from_element(1, 1, 1.0),
            dof_map: vec![(0, 0)],
        };
        let ss = to_first_order(&sys).unwrap();
        let r = reduce(&ss, 2, ReductionMode::ShiftInvert(0.0)).unwrap();
        let n = parse_netlist(
            "process \"soi\"\nmass m1 node=(p) w=10u h=10u pos=(0u,0u) layer=STRUCT\n",
        )
        .unwrap();
        let att = MacromodelAttachment {
            model: Macromodel::from(&r),
            node: "p".into(),
            covers: vec!["m1".into()],
        };
        let macro_model = build_sim_model(
            &n,
            &Material::silicon(),
            &stack(),
            &[att],
            SimOptions::default(),
        )
        .unwrap();
        assert_eq!(macro_model.state_count(), 2);
        let src = |node: &str| {
            vec![Source::force(
                node,
                Waveform::Pulse {
                    amplitude: 1.0,
                    t_on: 0.0,
                    t_off: 1.0,
                },
            )]
        };
        let a = transient(&macro_model, &src("p"), 5.0, 1e-3).unwrap();
        let b = transient(&model, &src("x"), 5.0, 1e-3).unwrap();
        let (xa, xb) = (a.signal("x(p)").unwrap(), b.signal("x(x)").unwrap());
        let num: f64 = xa.iter().zip(xb).map(|(p, q)| (p - q).powi(2)).sum();
        let den: f64 = xb.iter().map(|q| q * q).sum();
        assert!((num / den).sqrt() < 1e-10);
    }
}
