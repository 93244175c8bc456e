use thiserror::Error;

use crate::geometry::ProcessStack;
use crate::units::{nm_to_m, EPSILON_0};

use super::netlist::{ComponentInstance, Geometry, Material};

/// Fixed-guided Euler-Bernoulli spring constants, N/m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamStiffness {
    pub axial: f64,
    /// In-plane, perpendicular to the beam axis.
    pub lateral: f64,
    pub out_of_plane: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LumpedParams {
    Spring(BeamStiffness),
    /// kg and kg·m² about the out-of-plane axis through the centroid.
    Mass {
        mass: f64,
        rotary_inertia: f64,
    },
    /// F/m and F.
    Comb {
        dc_dx: f64,
        rest_capacitance: f64,
    },
    Ground,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LumpedError {
    #[error("{instance}: layer {layer} is not in the process stack")]
    UnknownLayer { instance: String, layer: String },
    #[error("{instance}: layer {layer} has zero thickness")]
    ZeroThickness { instance: String, layer: String },
}

pub fn lumped_params(
    c: &ComponentInstance,
    m: &Material,
    stack: &ProcessStack,
) -> Result<LumpedParams, LumpedError> {
    let layer = stack
        .layer(&c.layer)
        .ok_or_else(|| LumpedError::UnknownLayer {
            instance: c.name.clone(),
            layer: c.layer.clone(),
        })?;
    if layer.thickness <= 0 {
        return Err(LumpedError::ZeroThickness {
            instance: c.name.clone(),
            layer: c.layer.clone(),
        });
    }
    let t = nm_to_m(layer.thickness);
    let e = m.youngs_modulus;
    Ok(match &c.geometry {
        Geometry::Beam { length, width } => {
            let (l, w) = (nm_to_m(*length), nm_to_m(*width));
            LumpedParams::Spring(BeamStiffness {
                axial: e * w * t / l,
                lateral: e * t * w.powi(3) / l.powi(3),
                out_of_plane: e * w * t.powi(3) / l.powi(3),
            })
        }
        Geometry::RigidMass { width, height } => {
            let (w, h) = (nm_to_m(*width), nm_to_m(*height));
            let mass = m.density * t * w * h;
            LumpedParams::Mass {
                mass,
                rotary_inertia: mass * (w * w + h * h) / 12.0,
            }
        }
        Geometry::LinearComb(p) | Geometry::BiasComb(p) => {
            let base = 2.0 * p.fingers as f64 * EPSILON_0 * t / nm_to_m(p.gap);
            LumpedParams::Comb {
                dc_dx: base,
                rest_capacitance: base * nm_to_m(p.overlap),
            }
        }
        Geometry::Anchor { .. } => LumpedParams::Ground,
    })
}
