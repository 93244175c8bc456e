use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::mor::eigenvalues;
use crate::units::format_f64;

use super::model::{Probe, SimModel};
use super::source::{Source, Target, Waveform};
use super::SimError;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SimStats {
    pub steps: usize,
    /// Integration loop only.
    pub wall: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub time: Vec<f64>,
    pub signals: Vec<(String, Vec<f64>)>,
    pub stats: SimStats,
}

impl SimResult {
    pub fn signal(&self, name: &str) -> Option<&[f64]> {
        self.signals
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// `t,<probe>...` header, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for (name, _) in &self.signals {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (i, t) in self.time.iter().enumerate() {
            out.push_str(&format_f64(*t));
            for (_, v) in &self.signals {
                let _ = write!(out, ",{}", format_f64(v[i]));
            }
            out.push('\n');
        }
        out
    }
}

enum Drive {
    Force(Waveform),
    /// Comb force goes with the square of the summed voltage.
    Voltage(Vec<Waveform>),
}

impl Drive {
    fn value(&self, t: f64) -> f64 {
        match self {
            Drive::Force(w) => w.value(t),
            Drive::Voltage(ws) => {
                let v: f64 = ws.iter().map(|w| w.value(t)).sum();
                v * v
            }
        }
    }
}

/// ẏ = A y + Σ col·u(t)
struct Forcing {
    terms: Vec<(DVector<f64>, Drive)>,
    voltages: BTreeMap<String, Vec<Waveform>>,
}

impl Forcing {
    fn new(model: &SimModel, sources: &[Source]) -> Result<Self, SimError> {
        let mut terms = Vec::new();
        let mut voltages: BTreeMap<String, Vec<Waveform>> = BTreeMap::new();
        for s in sources {
            s.waveform.check()?;
            match &s.target {
                Target::Force(node) => {
                    terms.push((model.force_column(node)?.clone(), Drive::Force(s.waveform)));
                }
                Target::Voltage(comb) => {
                    model.comb(comb)?;
                    voltages.entry(comb.clone()).or_default().push(s.waveform);
                }
            }
        }
        for (name, ws) in &voltages {
            let c = model.comb(name)?;
            let col = model.force_column(&c.node)? * (0.5 * c.dc_dx * c.projection);
            terms.push((col, Drive::Voltage(ws.clone())));
        }
        Ok(Self { terms, voltages })
    }

    fn voltage(&self, comb: &str, t: f64) -> f64 {
        self.voltages
            .get(comb)
            .map_or(0.0, |ws| ws.iter().map(|w| w.value(t)).sum())
    }

    fn eval(&self, a: &DMatrix<f64>, t: f64, y: &DVector<f64>, out: &mut DVector<f64>) {
        out.gemv(1.0, a, y, 0.0);
        for (col, d) in &self.terms {
            let u = d.value(t);
            if u != 0.0 {
                out.axpy(u, col, 1.0);
            }
        }
    }
}

/// Probe as `row·y + Σ feed·u(t)`, optionally scaled by a comb voltage.
struct ProbeEval {
    row: DVector<f64>,
    feed: Vec<f64>,
    offset: f64,
    voltage_of: Option<String>,
}

impl ProbeEval {
    fn new(model: &SimModel, forcing: &Forcing, p: &Probe) -> Result<Self, SimError> {
        let velocity = |x: &DVector<f64>| {
            let row = model.a.tr_mul(x);
            let feed = forcing.terms.iter().map(|(c, _)| x.dot(c)).collect();
            (row, feed)
        };
        let none = vec![0.0; forcing.terms.len()];
        Ok(match p {
            Probe::Displacement(n) => Self {
                row: model.displacement_row(n)?.clone(),
                feed: none,
                offset: 0.0,
                voltage_of: None,
            },
            Probe::Velocity(n) => {
                let (row, feed) = velocity(model.displacement_row(n)?);
                Self {
                    row,
                    feed,
                    offset: 0.0,
                    voltage_of: None,
                }
            }
            Probe::Capacitance(c) => {
                let comb = model.comb(c)?;
                Self {
                    row: model.displacement_row(&comb.node)? * (comb.dc_dx * comb.projection),
                    feed: none,
                    offset: comb.rest_capacitance,
                    voltage_of: None,
                }
            }
            Probe::Current(c) => {
                let comb = model.comb(c)?;
                let (row, feed) = velocity(model.displacement_row(&comb.node)?);
                let g = comb.dc_dx * comb.projection;
                Self {
                    row: row * g,
                    feed: feed.into_iter().map(|f| f * g).collect(),
                    offset: 0.0,
                    voltage_of: Some(c.clone()),
                }
            }
        })
    }

    fn value(&self, forcing: &Forcing, t: f64, y: &DVector<f64>) -> f64 {
        let mut v = self.offset + self.row.dot(y);
        for (f, (_, d)) in self.feed.iter().zip(&forcing.terms) {
            if *f != 0.0 {
                v += f * d.value(t);
            }
        }
        match &self.voltage_of {
            Some(c) => v * forcing.voltage(c, t),
            None => v,
        }
    }
}

/// Fixed-step classical RK4 from the zero state.
pub fn transient(
    model: &SimModel,
    sources: &[Source],
    t_end: f64,
    dt: f64,
) -> Result<SimResult, SimError> {
    transient_from(model, sources, t_end, dt, None)
}

/// As [`transient`], starting from `y0` when given.
pub fn transient_from(
    model: &SimModel,
    sources: &[Source],
    t_end: f64,
    dt: f64,
    y0: Option<&DVector<f64>>,
) -> Result<SimResult, SimError> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(SimError::InvalidStep { dt, t_end });
    }
    let n = model.state_count();
    let mut y = match y0 {
        Some(y0) if y0.len() != n => {
            return Err(SimError::PortMismatch(format!(
                "initial state has {} entries, model has {n}",
                y0.len()
            )))
        }
        Some(y0) => y0.clone(),
        None => DVector::zeros(n),
    };
    let forcing = Forcing::new(model, sources)?;
    let probes: Vec<ProbeEval> = model
        .probes()
        .iter()
        .map(|p| ProbeEval::new(model, &forcing, p))
        .collect::<Result<_, _>>()?;
    let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;

    let mut time = Vec::with_capacity(steps + 1);
    let mut signals: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); probes.len()];
    let record = |t: f64, y: &DVector<f64>, time: &mut Vec<f64>, signals: &mut Vec<Vec<f64>>| {
        time.push(t);
        for (s, p) in signals.iter_mut().zip(&probes) {
            s.push(p.value(&forcing, t, y));
        }
    };
    record(0.0, &y, &mut time, &mut signals);

    let a = &model.a;
    let (mut k1, mut k2, mut k3, mut k4) = (
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
    );
    let mut tmp = DVector::zeros(n);
    let start = Instant::now();
    for i in 0..steps {
        let t = i as f64 * dt;
        forcing.eval(a, t, &y, &mut k1);
        tmp.copy_from(&y);
        tmp.axpy(0.5 * dt, &k1, 1.0);
        forcing.eval(a, t + 0.5 * dt, &tmp, &mut k2);
        tmp.copy_from(&y);
        tmp.axpy(0.5 * dt, &k2, 1.0);
        forcing.eval(a, t + 0.5 * dt, &tmp, &mut k3);
        tmp.copy_from(&y);
        tmp.axpy(dt, &k3, 1.0);
        forcing.eval(a, t + dt, &tmp, &mut k4);
        k2 += &k3;
        k1.axpy(2.0, &k2, 1.0);
        k1 += &k4;
        y.axpy(dt / 6.0, &k1, 1.0);
        let t_next = (i + 1) as f64 * dt;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(SimError::Diverged { time: t_next });
        }
        record(t_next, &y, &mut time, &mut signals);
    }
    let wall = start.elapsed();

    Ok(SimResult {
        time,
        signals: model
            .probes()
            .iter()
            .map(|p| p.to_string())
            .zip(signals)
            .collect(),
        stats: SimStats { steps, wall },
    })
}

/// Largest RK4-stable step for the model's fastest eigenvalue, with margin.
pub fn suggest_dt(model: &SimModel) -> f64 {
    let rho = spectral_radius(&model.a);
    if rho > 0.0 {
        // RK4 stability reaches |λdt| ≈ 2.8 on the imaginary axis
        2.0 / rho
    } else {
        f64::INFINITY
    }
}

fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if let Some(ev) = eigenvalues(a) {
        return ev.iter().map(|e| e.norm()).fold(0.0, f64::max);
    }
    let n = a.nrows();
    // growth rate of repeated products, with margin for slow convergence
    let mut x = DVector::from_fn(n, |i, _| 1.0 + (i % 7) as f64 / 7.0);
    let mut log_growth = 0.0;
    let iters = 400;
    for _ in 0..iters {
        x = a * x;
        let norm = x.norm();
        if norm == 0.0 {
            return 0.0;
        }
        log_growth += norm.ln();
        x /= norm;
    }
    1.5 * (log_growth / iters as f64).exp()
}
