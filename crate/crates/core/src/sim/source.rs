use std::f64::consts::PI;
use std::fmt;

use super::SimError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Waveform {
    Dc(f64),
    /// `amplitude` from `at` onward.
    Step {
        amplitude: f64,
        at: f64,
    },
    /// `amplitude` on `[t_on, t_off)`.
    Pulse {
        amplitude: f64,
        t_on: f64,
        t_off: f64,
    },
    /// Hz and rad.
    Sine {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
}

impl Waveform {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Waveform::Dc(v) => v,
            Waveform::Step { amplitude, at } => {
                if t >= at {
                    amplitude
                } else {
                    0.0
                }
            }
            Waveform::Pulse {
                amplitude,
                t_on,
                t_off,
            } => {
                if t >= t_on && t < t_off {
                    amplitude
                } else {
                    0.0
                }
            }
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (2.0 * PI * frequency * t + phase).sin(),
        }
    }

    pub fn check(&self) -> Result<(), SimError> {
        match *self {
            Waveform::Pulse { t_on, t_off, .. } if !(t_off > t_on) => {
                Err(SimError::InvalidSource("pulse needs t_off > t_on".into()))
            }
            Waveform::Sine { frequency, .. } if !(frequency > 0.0) => {
                Err(SimError::InvalidSource("sine needs frequency > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Waveform::Dc(v) => write!(f, "dc {v}"),
            Waveform::Step { amplitude, at } => write!(f, "step {amplitude} {at}"),
            Waveform::Pulse {
                amplitude,
                t_on,
                t_off,
            } => write!(f, "pulse {amplitude} {t_on} {t_off}"),
            Waveform::Sine {
                amplitude,
                frequency,
                phase,
            } => write!(f, "sine {amplitude} {frequency} {phase}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    /// Force in N along the analysis axis on a node.
    Force(String),
    /// Voltage in V across a comb instance.
    Voltage(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    pub waveform: Waveform,
    pub target: Target,
}

impl Source {
    pub fn force(node: &str, waveform: Waveform) -> Self {
        Self {
            waveform,
            target: Target::Force(node.to_string()),
        }
    }

    pub fn voltage(comb: &str, waveform: Waveform) -> Self {
        Self {
            waveform,
            target: Target::Voltage(comb.to_string()),
        }
    }

    /// `force <node> <waveform...>` or `voltage <comb> <waveform...>` where the
    /// waveform is `dc v`, `step a t0`, `pulse a t_on t_off` or `sine a f phase`.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let bad = || SimError::InvalidSource(format!("cannot parse source `{text}`"));
        let t: Vec<&str> = text.split_whitespace().collect();
        if t.len() < 3 {
            return Err(bad());
        }
        let nums: Vec<f64> = t[3..]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let waveform = match (t[2], nums.as_slice()) {
            ("dc", [v]) => Waveform::Dc(*v),
            ("step", [a]) => Waveform::Step {
                amplitude: *a,
                at: 0.0,
            },
            ("step", [a, at]) => Waveform::Step {
                amplitude: *a,
                at: *at,
            },
            ("pulse", [a, on, off]) => Waveform::Pulse {
                amplitude: *a,
                t_on: *on,
                t_off: *off,
            },
            ("sine", [a, f]) => Waveform::Sine {
                amplitude: *a,
                frequency: *f,
                phase: 0.0,
            },
            ("sine", [a, f, p]) => Waveform::Sine {
                amplitude: *a,
                frequency: *f,
                phase: *p,
            },
            _ => return Err(bad()),
        };
        waveform.check()?;
        let target = match t[0] {
            "force" => Target::Force(t[1].to_string()),
            "voltage" => Target::Voltage(t[1].to_string()),
            _ => return Err(bad()),
        };
        Ok(Self { waveform, target })
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.target {
            Target::Force(n) => write!(f, "force {n} {}", self.waveform),
            Target::Voltage(c) => write!(f, "voltage {c} {}", self.waveform),
        }
    }
}
