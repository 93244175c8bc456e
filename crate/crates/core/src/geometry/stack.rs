use std::fmt::Write as _;

use crate::units::{format_um, parse_length, Nm};

use super::GeometryError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackLayer {
    pub mask: String,
    pub z0: Nm,
    pub thickness: Nm,
    pub material: String,
}

impl StackLayer {
    pub fn new(mask: &str, z0: Nm, thickness: Nm, material: &str) -> Self {
        Self {
            mask: mask.to_string(),
            z0,
            thickness,
            material: material.to_string(),
        }
    }

    pub fn z1(&self) -> Nm {
        self.z0 + self.thickness
    }
}

/// Ordered fabrication layers shared by every geometric flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProcessStack {
    pub name: String,
    layers: Vec<StackLayer>,
}

impl ProcessStack {
    /// Layers are sorted by `z0`; mask names must be unique and thicknesses positive.
    pub fn new(name: &str, mut layers: Vec<StackLayer>) -> Result<Self, GeometryError> {
        for (i, l) in layers.iter().enumerate() {
            if l.mask.is_empty() {
                return Err(GeometryError::InvalidStack("empty mask name".into()));
            }
            if l.thickness <= 0 {
                return Err(GeometryError::InvalidStack(format!(
                    "layer {} has non-positive thickness",
                    l.mask
                )));
            }
            if layers[..i].iter().any(|o| o.mask == l.mask) {
                return Err(GeometryError::InvalidStack(format!(
                    "duplicate mask {}",
                    l.mask
                )));
            }
        }
        layers.sort_by_key(|l| l.z0);
        Ok(Self {
            name: name.to_string(),
            layers,
        })
    }

    pub fn layers(&self) -> &[StackLayer] {
        &self.layers
    }

    pub fn layer(&self, mask: &str) -> Option<&StackLayer> {
        self.layers.iter().find(|l| l.mask == mask)
    }

    pub fn require(&self, mask: &str) -> Result<&StackLayer, GeometryError> {
        self.layer(mask)
            .ok_or_else(|| GeometryError::UnknownLayer(mask.to_string()))
    }

    /// Text form:
    ///
    /// ```text
    /// stack poly2
    /// layer ANCHOR z0=0u t=2u material=oxide
    /// ```
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let bad = |line: usize, msg: String| GeometryError::StackSyntax { line, message: msg };
        let mut name = None;
        let mut layers = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            match tokens.next() {
                Some("stack") => {
                    let n = tokens
                        .next()
                        .ok_or_else(|| bad(line_no, "missing stack name".into()))?;
                    name = Some(n.to_string());
                }
                Some("layer") => {
                    let mask = tokens
                        .next()
                        .ok_or_else(|| bad(line_no, "missing mask name".into()))?;
                    let (mut z0, mut t, mut material) = (None, None, None);
                    for tok in tokens {
                        let (k, v) = tok.split_once('=').ok_or_else(|| {
                            bad(line_no, format!("expected key=value, got `{tok}`"))
                        })?;
                        match k {
                            "z0" => z0 = Some(parse_length(v).map_err(|e| bad(line_no, e))?),
                            "t" => t = Some(parse_length(v).map_err(|e| bad(line_no, e))?),
                            "material" => material = Some(v.to_string()),
                            _ => return Err(bad(line_no, format!("unknown key `{k}`"))),
                        }
                    }
                    layers.push(StackLayer {
                        mask: mask.to_string(),
                        z0: z0.ok_or_else(|| bad(line_no, "missing z0".into()))?,
                        thickness: t.ok_or_else(|| bad(line_no, "missing t".into()))?,
                        material: material
                            .ok_or_else(|| bad(line_no, "missing material".into()))?,
                    });
                }
                Some(other) => return Err(bad(line_no, format!("unknown statement `{other}`"))),
                None => {}
            }
        }
        let name = name.ok_or_else(|| bad(1, "missing `stack <name>` line".into()))?;
        Self::new(&name, layers)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("stack {}\n", self.name);
        for l in &self.layers {
            let _ = writeln!(
                out,
                "layer {} z0={} t={} material={}",
                l.mask,
                format_um(l.z0),
                format_um(l.thickness),
                l.material
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let text = "stack soi\nlayer STRUCT z0=2u t=50u material=si\nlayer ANCHOR z0=0u t=2u material=oxide\n";
        let s = ProcessStack::parse(text).unwrap();
        assert_eq!(s.layers()[0].mask, "ANCHOR");
        assert_eq!(s.layer("STRUCT").unwrap().z1(), 52_000);
        assert_eq!(ProcessStack::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_stacks() {
        assert!(ProcessStack::new("s", vec![StackLayer::new("A", 0, 0, "m")]).is_err());
        assert!(ProcessStack::new(
            "s",
            vec![
                StackLayer::new("A", 0, 1, "m"),
                StackLayer::new("A", 1, 1, "m")
            ]
        )
        .is_err());
        assert!(ProcessStack::parse("layer A z0=0 t=1u material=m\n").is_err());
        assert!(ProcessStack::parse("stack s\nlayer A z0=0 material=m\n").is_err());
    }
}
