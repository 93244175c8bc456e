//! Extruded-solid-model text format.
//!
//! ```text
//! esm 1
//! stack soi
//! solid gyro
//! prism layer=STRUCT z0=2000 z1=52000 poly=(0,0 100000,0 100000,100000 0,100000)
//! ```
//!
//! Coordinates are integer nanometers. The `solid` line is present only for
//! named models. `#` starts a comment.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Point, Polygon, Prism, SolidModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EsmError {
    #[error("line {line}: bad header, expected `esm 1`")]
    BadHeader { line: usize },
    #[error("line {line}: prism z1 ({z1}) must exceed z0 ({z0})")]
    EmptyInterval { line: usize, z0: i64, z1: i64 },
    #[error("line {line}: malformed polygon: {message}")]
    BadPolygon { line: usize, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

pub fn emit_esm(model: &SolidModel) -> String {
    let mut out = String::from("esm 1\n");
    let _ = writeln!(out, "stack {}", model.stack_ref);
    if !model.name.is_empty() {
        let _ = writeln!(out, "solid {}", model.name);
    }
    for p in model.prisms() {
        let _ = write!(
            out,
            "prism layer={} z0={} z1={} poly=(",
            p.layer, p.z0, p.z1
        );
        for (i, v) in p.footprint.vertices().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push_str(")\n");
    }
    out
}

pub fn parse_esm(text: &str) -> Result<SolidModel, EsmError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, "esm 1")) => {}
        Some((line, _)) => return Err(EsmError::BadHeader { line }),
        None => return Err(EsmError::BadHeader { line: 1 }),
    }
    let mut model = SolidModel::new("", "");
    let mut have_stack = false;
    for (line, l) in lines {
        let syntax = |message: String| EsmError::Syntax { line, message };
        let (head, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        let rest = rest.trim();
        match head {
            "stack" if !have_stack && !rest.is_empty() => {
                model.stack_ref = rest.to_string();
                have_stack = true;
            }
            "solid" if !rest.is_empty() => model.name = rest.to_string(),
            "prism" => {
                let prism = parse_prism(line, rest)?;
                if prism.z1 <= prism.z0 {
                    return Err(EsmError::EmptyInterval {
                        line,
                        z0: prism.z0,
                        z1: prism.z1,
                    });
                }
                model.add(prism).map_err(|e| EsmError::BadPolygon {
                    line,
                    message: e.to_string(),
                })?;
            }
            _ => return Err(syntax(format!("unexpected `{l}`"))),
        }
    }
    if !have_stack {
        return Err(EsmError::Syntax {
            line: 1,
            message: "missing `stack` line".into(),
        });
    }
    Ok(model)
}

fn parse_prism(line: usize, rest: &str) -> Result<Prism, EsmError> {
    let syntax = |message: String| EsmError::Syntax { line, message };
    let (fields, poly) = rest
        .split_once("poly=(")
        .ok_or_else(|| syntax("missing poly=(...)".into()))?;
    let poly = poly
        .strip_suffix(')')
        .ok_or_else(|| syntax("unterminated poly".into()))?;
    let (mut layer, mut z0, mut z1) = (None, None, None);
    for tok in fields.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected key=value, got `{tok}`")))?;
        let int = || {
            v.parse::<i64>()
                .map_err(|_| syntax(format!("bad integer `{v}`")))
        };
        match k {
            "layer" => layer = Some(v.to_string()),
            "z0" => z0 = Some(int()?),
            "z1" => z1 = Some(int()?),
            _ => return Err(syntax(format!("unknown key `{k}`"))),
        }
    }
    let bad_poly = |message: String| EsmError::BadPolygon { line, message };
    let mut pts = Vec::new();
    for pair in poly.split_whitespace() {
        let (x, y) = pair
            .split_once(',')
            .ok_or_else(|| bad_poly(format!("vertex `{pair}`")))?;
        let x = x
            .parse()
            .map_err(|_| bad_poly(format!("vertex `{pair}`")))?;
        let y = y
            .parse()
            .map_err(|_| bad_poly(format!("vertex `{pair}`")))?;
        pts.push(Point::new(x, y));
    }
    let footprint = Polygon::new(pts);
    if footprint.len() < 3 || !footprint.is_simple() {
        return Err(bad_poly(
            "fewer than 3 vertices or self-intersecting".into(),
        ));
    }
    Ok(Prism {
        layer: layer.ok_or_else(|| syntax("missing layer".into()))?,
        footprint,
        z0: z0.ok_or_else(|| syntax("missing z0".into()))?,
        z1: z1.ok_or_else(|| syntax("missing z1".into()))?,
    })
}
