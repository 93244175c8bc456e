//! Length quantities on the integer nanometer grid and their text forms.
//!
//! Text lengths carry an optional unit suffix: `u` for micrometers, `n` for
//! nanometers, no suffix for meters. Every length is quantized to the
//! nearest nanometer when read.

/// Signed integer nanometers. All mask and solid geometry lives on this grid.
pub type Nm = i64;

pub const NM_PER_M: f64 = 1e9;

/// Vacuum permittivity used by the comb capacitance formulas, F/m.
pub const EPSILON_0: f64 = 8.854e-12;

pub fn nm_to_m(v: Nm) -> f64 {
    v as f64 / NM_PER_M
}

pub fn m_to_nm(v: f64) -> Nm {
    (v * NM_PER_M).round() as Nm
}

/// Parses `200u`, `35n`, `1.5e-6`.
pub fn parse_length(text: &str) -> Result<Nm, String> {
    let (mantissa, scale) = if let Some(m) = text.strip_suffix('u') {
        (m, 1e3)
    } else if let Some(m) = text.strip_suffix('n') {
        (m, 1.0)
    } else {
        (text, NM_PER_M)
    };
    let value: f64 = mantissa
        .parse()
        .map_err(|_| format!("invalid length `{text}`"))?;
    let nm = value * scale;
    if !nm.is_finite() || nm.abs() > 9.0e15 {
        return Err(format!("length `{text}` out of range"));
    }
    Ok(nm.round() as Nm)
}

/// Exact micrometer rendering with a `u` suffix: 1500 -> `1.5u`, -2 -> `-0.002u`.
pub fn format_um(v: Nm) -> String {
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    let whole = a / 1000;
    let frac = a % 1000;
    if frac == 0 {
        format!("{sign}{whole}u")
    } else {
        let digits = format!("{frac:03}");
        format!("{sign}{whole}.{}u", digits.trim_end_matches('0'))
    }
}

/// 17 significant digits, enough for an exact `f64` round trip.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}
