use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};

use crate::mor::{transfer_function, StateSpace};

use super::model::{Probe, SimModel};
use super::SimError;

#[derive(Clone, Debug, PartialEq)]
pub enum AcInput {
    Force(String),
    /// Small-signal voltage on a comb biased at `bias` volts.
    Voltage {
        comb: String,
        bias: f64,
    },
}

/// H(j2πf) from the input to the probe, linearized about the zero state.
/// Each point fails on its own when it hits an undamped pole.
pub fn frequency_response(
    model: &SimModel,
    input: &AcInput,
    output: &Probe,
    freqs: &[f64],
) -> Result<Vec<Result<Complex<f64>, SimError>>, SimError> {
    let b = match input {
        AcInput::Force(node) => model.force_column(node)?.clone(),
        AcInput::Voltage { comb, bias } => {
            let c = model.comb(comb)?;
            // d(½ C' V²)/dV at the bias
            model.force_column(&c.node)? * (c.dc_dx * c.projection * bias)
        }
    };
    // (row, times s, constant gain)
    let (row, derivative, gain) = match output {
        Probe::Displacement(n) => (model.displacement_row(n)?.clone(), false, 1.0),
        Probe::Velocity(n) => (model.displacement_row(n)?.clone(), true, 1.0),
        Probe::Capacitance(c) => {
            let comb = model.comb(c)?;
            (
                model.displacement_row(&comb.node)?.clone(),
                false,
                comb.dc_dx * comb.projection,
            )
        }
        Probe::Current(c) => {
            let comb = model.comb(c)?;
            let bias = match input {
                AcInput::Voltage { comb: ic, bias } if ic == c => *bias,
                _ => 0.0,
            };
            (
                model.displacement_row(&comb.node)?.clone(),
                true,
                bias * comb.dc_dx * comb.projection,
            )
        }
    };
    let ss = StateSpace {
        a: model.a.clone(),
        b,
        c: DMatrix::from_row_slice(1, row.len(), row.as_slice()),
        dof_map: None,
    };
    Ok(freqs
        .iter()
        .map(|&f| {
            let s = Complex::new(0.0, 2.0 * PI * f);
            let h = transfer_function(&ss, &[s]).map_err(|_| SimError::SingularAt(f))?;
            let h = h[0][0] * gain;
            Ok(if derivative { h * s } else { h })
        })
        .collect())
}
