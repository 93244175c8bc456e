//! Caltech Intermediate Form, restricted to `DS DF L B P C E`.
//!
//! One CIF unit is a centimicron (10 nm). The emitter is canonical: layers
//! by name, shapes in normalized vertex order, `B` for rectangles whose
//! center lands on the CIF grid and `P` for everything else. A cell name
//! other than the symbol number is carried by the `9 <name>;` extension.

use std::fmt::Write as _;

use thiserror::Error;

use crate::units::Nm;

use super::{Layout, Point, Polygon};

const NM_PER_UNIT: Nm = 10;
const SYMBOL: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CifError {
    #[error("line {line}: unsupported CIF command `{command}`")]
    Unsupported { line: usize, command: String },
    #[error("line {line}: non-integer value `{token}`")]
    NonInteger { line: usize, token: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("unterminated symbol definition starting at line {line}")]
    Unterminated { line: usize },
    #[error("layer {layer}: vertex ({x}, {y}) nm is not on the 10 nm CIF grid")]
    OffGrid { layer: String, x: Nm, y: Nm },
    #[error("name `{0}` cannot be written to CIF")]
    BadName(String),
}

#[derive(Debug, Default)]
pub struct CifParse {
    pub layout: Layout,
    pub warnings: Vec<String>,
}

pub fn emit_cif(layout: &Layout) -> Result<String, CifError> {
    let mut out = String::new();
    let _ = writeln!(out, "DS {SYMBOL} 1 1;");
    if layout.cell_name != SYMBOL.to_string() {
        check_name(&layout.cell_name)?;
        let _ = writeln!(out, "9 {};", layout.cell_name);
    }
    for layer in layout.layers() {
        check_name(layer)?;
        let _ = writeln!(out, "L {layer};");
        for p in layout.layer(layer) {
            for v in p.vertices() {
                if v.x % NM_PER_UNIT != 0 || v.y % NM_PER_UNIT != 0 {
                    return Err(CifError::OffGrid {
                        layer: layer.to_string(),
                        x: v.x,
                        y: v.y,
                    });
                }
            }
            match p.as_rect() {
                Some(r)
                    if (r.x0 + r.x1) % (2 * NM_PER_UNIT) == 0
                        && (r.y0 + r.y1) % (2 * NM_PER_UNIT) == 0 =>
                {
                    let _ = writeln!(
                        out,
                        "B {} {} {} {};",
                        r.width() / NM_PER_UNIT,
                        r.height() / NM_PER_UNIT,
                        (r.x0 + r.x1) / (2 * NM_PER_UNIT),
                        (r.y0 + r.y1) / (2 * NM_PER_UNIT)
                    );
                }
                _ => {
                    out.push('P');
                    for v in p.vertices() {
                        let _ = write!(out, " {} {}", v.x / NM_PER_UNIT, v.y / NM_PER_UNIT);
                    }
                    out.push_str(";\n");
                }
            }
        }
    }
    let _ = writeln!(out, "DF;");
    let _ = writeln!(out, "C {SYMBOL};");
    out.push_str("E\n");
    Ok(out)
}

fn check_name(name: &str) -> Result<(), CifError> {
    if name.is_empty()
        || name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ';' | '(' | ')'))
    {
        Err(CifError::BadName(name.to_string()))
    } else {
        Ok(())
    }
}

pub fn parse_cif(text: &str) -> Result<Layout, CifError> {
    parse_cif_with_warnings(text).map(|p| p.layout)
}

/// Splits into `(line, command)` pairs, dropping parenthesized comments.
fn commands(text: &str) -> Result<Vec<(usize, String)>, CifError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start_line = 1;
    let mut line = 1;
    let mut depth = 0usize;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
        }
        match c {
            '(' => depth += 1,
            ')' if depth > 0 => depth -= 1,
            ')' => {
                return Err(CifError::Malformed {
                    line,
                    message: "unbalanced `)`".into(),
                })
            }
            _ if depth > 0 => {}
            ';' => {
                let cmd = cur.trim().to_string();
                if !cmd.is_empty() {
                    out.push((start_line, cmd));
                }
                cur.clear();
            }
            _ => {
                if cur.trim().is_empty() && !c.is_whitespace() {
                    start_line = line;
                }
                cur.push(c);
            }
        }
    }
    if depth > 0 {
        return Err(CifError::Malformed {
            line,
            message: "unterminated comment".into(),
        });
    }
    let tail = cur.trim();
    if !tail.is_empty() {
        out.push((start_line, tail.to_string()));
    }
    Ok(out)
}

fn integers(line: usize, body: &str) -> Result<Vec<i64>, CifError> {
    body.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i64>().map_err(|_| CifError::NonInteger {
                line,
                token: t.to_string(),
            })
        })
        .collect()
}

struct Scale {
    num: i64,
    den: i64,
}

impl Scale {
    fn apply(&self, line: usize, v: i64) -> Result<Nm, CifError> {
        let scaled = v * self.num;
        if scaled % self.den != 0 {
            return Err(CifError::NonInteger {
                line,
                token: format!("{v}*{}/{}", self.num, self.den),
            });
        }
        Ok(scaled / self.den * NM_PER_UNIT)
    }
}

pub fn parse_cif_with_warnings(text: &str) -> Result<CifParse, CifError> {
    let mut result = CifParse::default();
    let mut layer: Option<String> = None;
    let mut open_symbol: Option<(usize, u32)> = None;
    let mut defined: Option<u32> = None;
    let mut scale = Scale { num: 1, den: 1 };
    let mut ended = false;

    for (line, cmd) in commands(text)? {
        if ended {
            result
                .warnings
                .push(format!("line {line}: text after `E` ignored"));
            break;
        }
        let first = cmd.chars().next().unwrap_or(' ');
        let rest = cmd[first.len_utf8()..].trim_start();
        match first {
            '0'..='9' => {
                if first == '9'
                    && !rest.starts_with(|c: char| c.is_ascii_digit())
                    && open_symbol.is_some()
                {
                    let name = rest.trim();
                    if name.is_empty() {
                        return Err(CifError::Malformed {
                            line,
                            message: "empty symbol name".into(),
                        });
                    }
                    result.layout.cell_name = name.to_string();
                } else {
                    result
                        .warnings
                        .push(format!("line {line}: extension command `{cmd}` ignored"));
                }
            }
            'D' => {
                let sub = rest.chars().next().unwrap_or(' ');
                let args = rest[sub.len_utf8().min(rest.len())..].trim();
                match sub {
                    'S' => {
                        if open_symbol.is_some() || defined.is_some() {
                            return Err(CifError::Unsupported {
                                line,
                                command: "nested or multiple DS".into(),
                            });
                        }
                        let v = integers(line, args)?;
                        let (n, a, b) = match v.as_slice() {
                            [n] => (*n, 1, 1),
                            [n, a, b] => (*n, *a, *b),
                            _ => {
                                return Err(CifError::Malformed {
                                    line,
                                    message: "DS expects 1 or 3 integers".into(),
                                })
                            }
                        };
                        if a <= 0 || b <= 0 || n < 0 {
                            return Err(CifError::Malformed {
                                line,
                                message: "DS scale must be positive".into(),
                            });
                        }
                        scale = Scale { num: a, den: b };
                        open_symbol = Some((line, n as u32));
                        result.layout.cell_name = n.to_string();
                        layer = None;
                    }
                    'F' => {
                        let (_, n) = open_symbol.take().ok_or_else(|| CifError::Malformed {
                            line,
                            message: "DF without DS".into(),
                        })?;
                        defined = Some(n);
                        scale = Scale { num: 1, den: 1 };
                    }
                    _ => {
                        return Err(CifError::Unsupported {
                            line,
                            command: cmd.clone(),
                        })
                    }
                }
            }
            'L' => {
                let name = rest.trim();
                if name.is_empty() {
                    return Err(CifError::Malformed {
                        line,
                        message: "L without layer name".into(),
                    });
                }
                layer = Some(name.to_string());
            }
            'B' => {
                let v = integers(line, rest)?;
                match v.as_slice() {
                    [l, w, cx, cy] | [l, w, cx, cy, 1, 0] => {
                        if *l <= 0 || *w <= 0 {
                            return Err(CifError::Malformed {
                                line,
                                message: "box with non-positive size".into(),
                            });
                        }
                        let (l, w) = (scale.apply(line, *l)?, scale.apply(line, *w)?);
                        let (cx, cy) = (scale.apply(line, *cx)?, scale.apply(line, *cy)?);
                        let poly =
                            Polygon::rect(cx - l / 2, cy - w / 2, cx - l / 2 + l, cy - w / 2 + w);
                        add_shape(&mut result.layout, &layer, line, poly)?;
                    }
                    [_, _, _, _, _, _] => {
                        return Err(CifError::Unsupported {
                            line,
                            command: "rotated box".into(),
                        })
                    }
                    _ => {
                        return Err(CifError::Malformed {
                            line,
                            message: "B expects 4 integers".into(),
                        })
                    }
                }
            }
            'P' => {
                let v = integers(line, rest)?;
                if v.len() % 2 != 0 || v.len() < 6 {
                    return Err(CifError::Malformed {
                        line,
                        message: "P expects at least 3 coordinate pairs".into(),
                    });
                }
                let mut pts = Vec::with_capacity(v.len() / 2);
                for c in v.chunks(2) {
                    pts.push(Point::new(
                        scale.apply(line, c[0])?,
                        scale.apply(line, c[1])?,
                    ));
                }
                add_shape(&mut result.layout, &layer, line, Polygon::new(pts))?;
            }
            'C' => {
                let v = integers(line, rest).map_err(|_| CifError::Unsupported {
                    line,
                    command: format!("transformed call `{cmd}`"),
                })?;
                match v.as_slice() {
                    [n] if Some(*n as u32) == defined => {}
                    [_] => {
                        return Err(CifError::Malformed {
                            line,
                            message: format!("call of undefined symbol in `{cmd}`"),
                        })
                    }
                    _ => {
                        return Err(CifError::Unsupported {
                            line,
                            command: cmd.clone(),
                        })
                    }
                }
            }
            'E' if rest.is_empty() => ended = true,
            _ => {
                return Err(CifError::Unsupported {
                    line,
                    command: cmd.clone(),
                })
            }
        }
    }
    if let Some((line, _)) = open_symbol {
        return Err(CifError::Unterminated { line });
    }
    if !ended {
        result.warnings.push("missing final `E`".into());
    }
    Ok(result)
}

fn add_shape(
    layout: &mut Layout,
    layer: &Option<String>,
    line: usize,
    poly: Polygon,
) -> Result<(), CifError> {
    let layer = layer.as_deref().ok_or_else(|| CifError::Malformed {
        line,
        message: "geometry before any `L` command".into(),
    })?;
    if !poly.is_simple() {
        return Err(CifError::Malformed {
            line,
            message: "self-intersecting polygon".into(),
        });
    }
    layout.add(layer, &poly).map_err(|e| CifError::Malformed {
        line,
        message: e.to_string(),
    })
}
