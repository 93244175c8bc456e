use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::geometry::Point;
use crate::units::{format_um, parse_length, Nm};

#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub name: String,
    /// Pa
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// kg/m³
    pub density: f64,
}

impl Material {
    pub fn new(name: &str, youngs_modulus: f64, poisson_ratio: f64, density: f64) -> Self {
        Self {
            name: name.to_string(),
            youngs_modulus,
            poisson_ratio,
            density,
        }
    }

    /// Single-crystal-averaged silicon values used throughout the fixtures.
    pub fn silicon() -> Self {
        Self::new("si", 160e9, 0.22, 2330.0)
    }

    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    pub fn is_valid(&self) -> bool {
        self.youngs_modulus > 0.0 && self.density > 0.0 && (0.0..0.5).contains(&self.poisson_ratio)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    Beam,
    RigidMass,
    LinearComb,
    BiasComb,
    Anchor,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 5] = [
        ComponentKind::Beam,
        ComponentKind::RigidMass,
        ComponentKind::LinearComb,
        ComponentKind::BiasComb,
        ComponentKind::Anchor,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ComponentKind::Beam => "beam",
            ComponentKind::RigidMass => "mass",
            ComponentKind::LinearComb => "lincomb",
            ComponentKind::BiasComb => "biascomb",
            ComponentKind::Anchor => "anchor",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    fn param_schema(self) -> &'static [&'static str] {
        match self {
            ComponentKind::Beam => &["l", "w"],
            ComponentKind::RigidMass => &["w", "h"],
            ComponentKind::LinearComb | ComponentKind::BiasComb => {
                &["fingers", "fl", "fw", "gap", "overlap", "orient"]
            }
            ComponentKind::Anchor => &["w", "h", "anchor_layer"],
        }
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Direction the comb fingers point, away from the spine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orient {
    PosX,
    PosY,
    NegX,
    NegY,
}

impl Orient {
    /// Counter-clockwise quarter turns from `+x`.
    pub fn quarters(self) -> i32 {
        match self {
            Orient::PosX => 0,
            Orient::PosY => 1,
            Orient::NegX => 2,
            Orient::NegY => 3,
        }
    }

    pub fn from_quarters(q: i32) -> Self {
        match q.rem_euclid(4) {
            0 => Orient::PosX,
            1 => Orient::PosY,
            2 => Orient::NegX,
            _ => Orient::NegY,
        }
    }

    /// Unit vector in the plane.
    pub fn unit(self) -> (f64, f64) {
        match self {
            Orient::PosX => (1.0, 0.0),
            Orient::PosY => (0.0, 1.0),
            Orient::NegX => (-1.0, 0.0),
            Orient::NegY => (0.0, -1.0),
        }
    }

    fn text(self) -> &'static str {
        match self {
            Orient::PosX => "+x",
            Orient::PosY => "+y",
            Orient::NegX => "-x",
            Orient::NegY => "-y",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "+x" => Some(Orient::PosX),
            "+y" => Some(Orient::PosY),
            "-x" | "−x" => Some(Orient::NegX),
            "-y" | "−y" => Some(Orient::NegY),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombParams {
    pub fingers: u32,
    pub finger_length: Nm,
    pub finger_width: Nm,
    pub gap: Nm,
    /// Engaged length with the stator fingers; electrical only.
    pub overlap: Nm,
    pub orient: Orient,
}

impl CombParams {
    pub fn pitch(&self) -> Nm {
        self.finger_width + self.gap
    }

    /// Extent of the finger array along the spine.
    pub fn span(&self) -> Nm {
        let n = self.fingers as Nm;
        n * self.finger_width + (n - 1).max(0) * self.gap
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Geometry {
    Beam {
        length: Nm,
        width: Nm,
    },
    RigidMass {
        width: Nm,
        height: Nm,
    },
    LinearComb(CombParams),
    BiasComb(CombParams),
    Anchor {
        width: Nm,
        height: Nm,
        anchor_layer: String,
    },
}

impl Geometry {
    pub fn kind(&self) -> ComponentKind {
        match self {
            Geometry::Beam { .. } => ComponentKind::Beam,
            Geometry::RigidMass { .. } => ComponentKind::RigidMass,
            Geometry::LinearComb(_) => ComponentKind::LinearComb,
            Geometry::BiasComb(_) => ComponentKind::BiasComb,
            Geometry::Anchor { .. } => ComponentKind::Anchor,
        }
    }

    pub fn comb(&self) -> Option<&CombParams> {
        match self {
            Geometry::LinearComb(c) | Geometry::BiasComb(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentInstance {
    pub name: String,
    pub nodes: Vec<String>,
    pub geometry: Geometry,
    pub position: Point,
    /// Degrees, counter-clockwise.
    pub angle: f64,
    pub layer: String,
}

impl ComponentInstance {
    pub fn kind(&self) -> ComponentKind {
        self.geometry.kind()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Netlist {
    pub process: String,
    pub materials: Vec<Material>,
    pub instances: Vec<ComponentInstance>,
}

impl Netlist {
    pub fn instance(&self, name: &str) -> Option<&ComponentInstance> {
        self.instances.iter().find(|i| i.name == name)
    }

    pub fn material(&self, name: &str) -> Option<&Material> {
        self.materials.iter().find(|m| m.name == name)
    }

    pub fn count_by_kind(&self) -> BTreeMap<ComponentKind, usize> {
        let mut out = BTreeMap::new();
        for i in &self.instances {
            *out.entry(i.kind()).or_insert(0) += 1;
        }
        out
    }

    pub fn count(&self, kind: ComponentKind) -> usize {
        self.instances.iter().filter(|i| i.kind() == kind).count()
    }

    pub fn nodes(&self) -> BTreeSet<&str> {
        self.instances
            .iter()
            .flat_map(|i| i.nodes.iter().map(String::as_str))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("line {line}: syntax error at `{token}`: {message}")]
    Syntax {
        line: usize,
        token: String,
        message: String,
    },
    #[error("line {line}: duplicate name `{name}`")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: unknown component kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: `{instance}` is missing required parameter `{param}`")]
    MissingParam {
        line: usize,
        instance: String,
        param: String,
    },
}

/// Splits on whitespace outside parentheses and double quotes.
fn tokenize(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut quoted = false;
    let mut start = None;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '(' if !quoted => depth += 1,
            ')' if !quoted => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth <= 0 && !quoted {
            if let Some(s) = start.take() {
                out.push(&line[s..i]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&line[s..]);
    }
    out
}

fn paren_list(v: &str) -> Option<Vec<&str>> {
    let inner = v.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-' | '$' | '[' | ']'))
}

pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    let mut netlist = Netlist::default();
    let mut names = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tokens = tokenize(body);
        let syntax = |token: &str, message: &str| NetlistError::Syntax {
            line,
            token: token.to_string(),
            message: message.to_string(),
        };
        match tokens[0] {
            "process" => {
                let [_, name] = tokens.as_slice() else {
                    return Err(syntax(body, "expected `process \"<name>\"`"));
                };
                let name = name
                    .strip_prefix('"')
                    .and_then(|n| n.strip_suffix('"'))
                    .ok_or_else(|| syntax(name, "process name must be quoted"))?;
                netlist.process = name.to_string();
            }
            "material" => {
                let name = *tokens
                    .get(1)
                    .ok_or_else(|| syntax(body, "missing material name"))?;
                if !is_identifier(name) {
                    return Err(syntax(name, "invalid material name"));
                }
                if netlist.material(name).is_some() {
                    return Err(NetlistError::DuplicateName {
                        line,
                        name: name.to_string(),
                    });
                }
                let (mut e, mut nu, mut rho) = (None, None, None);
                for tok in &tokens[2..] {
                    let (k, v) = tok
                        .split_once('=')
                        .ok_or_else(|| syntax(tok, "expected key=value"))?;
                    let x: f64 = v.parse().map_err(|_| syntax(tok, "invalid number"))?;
                    match k {
                        "E" => e = Some(x),
                        "nu" => nu = Some(x),
                        "rho" => rho = Some(x),
                        _ => return Err(syntax(tok, "unknown material property")),
                    }
                }
                let missing = |p: &str| NetlistError::MissingParam {
                    line,
                    instance: name.to_string(),
                    param: p.to_string(),
                };
                netlist.materials.push(Material::new(
                    name,
                    e.ok_or_else(|| missing("E"))?,
                    nu.ok_or_else(|| missing("nu"))?,
                    rho.ok_or_else(|| missing("rho"))?,
                ));
            }
            word => {
                let kind =
                    ComponentKind::from_keyword(word).ok_or_else(|| NetlistError::UnknownKind {
                        line,
                        kind: word.to_string(),
                    })?;
                let inst = parse_instance(line, kind, &tokens[1..])?;
                if !names.insert(inst.name.clone()) {
                    return Err(NetlistError::DuplicateName {
                        line,
                        name: inst.name,
                    });
                }
                netlist.instances.push(inst);
            }
        }
    }
    Ok(netlist)
}

fn parse_instance(
    line: usize,
    kind: ComponentKind,
    tokens: &[&str],
) -> Result<ComponentInstance, NetlistError> {
    let syntax = |token: &str, message: &str| NetlistError::Syntax {
        line,
        token: token.to_string(),
        message: message.to_string(),
    };
    let name = *tokens
        .first()
        .ok_or_else(|| syntax(kind.keyword(), "missing instance name"))?;
    if !is_identifier(name) || name.contains('=') {
        return Err(syntax(name, "invalid instance name"));
    }
    let mut kv: BTreeMap<&str, (&str, &str)> = BTreeMap::new();
    for tok in &tokens[1..] {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| syntax(tok, "expected key=value"))?;
        let known =
            kind.param_schema().contains(&k) || matches!(k, "node" | "pos" | "layer" | "angle");
        if !known {
            return Err(syntax(tok, &format!("unknown parameter for {kind}")));
        }
        if kv.insert(k, (v, tok)).is_some() {
            return Err(syntax(tok, "parameter given twice"));
        }
    }
    let missing = |p: &str| NetlistError::MissingParam {
        line,
        instance: name.to_string(),
        param: p.to_string(),
    };
    for p in kind.param_schema() {
        if !kv.contains_key(p) {
            return Err(missing(p));
        }
    }
    let len = |k: &str| -> Result<Nm, NetlistError> {
        let (v, tok) = kv[k];
        parse_length(v).map_err(|e| syntax(tok, &e))
    };

    let geometry = match kind {
        ComponentKind::Beam => Geometry::Beam {
            length: len("l")?,
            width: len("w")?,
        },
        ComponentKind::RigidMass => Geometry::RigidMass {
            width: len("w")?,
            height: len("h")?,
        },
        ComponentKind::Anchor => {
            let (v, tok) = kv["anchor_layer"];
            if !is_identifier(v) {
                return Err(syntax(tok, "invalid layer name"));
            }
            Geometry::Anchor {
                width: len("w")?,
                height: len("h")?,
                anchor_layer: v.to_string(),
            }
        }
        ComponentKind::LinearComb | ComponentKind::BiasComb => {
            let (v, tok) = kv["fingers"];
            let fingers: u32 = v
                .parse()
                .map_err(|_| syntax(tok, "finger count must be an integer"))?;
            let (v, tok) = kv["orient"];
            let orient =
                Orient::parse(v).ok_or_else(|| syntax(tok, "orient must be one of +x -x +y -y"))?;
            let params = CombParams {
                fingers,
                finger_length: len("fl")?,
                finger_width: len("fw")?,
                gap: len("gap")?,
                overlap: len("overlap")?,
                orient,
            };
            if kind == ComponentKind::LinearComb {
                Geometry::LinearComb(params)
            } else {
                Geometry::BiasComb(params)
            }
        }
    };

    let (v, tok) = *kv.get("node").ok_or_else(|| missing("node"))?;
    let nodes: Vec<String> = paren_list(v)
        .ok_or_else(|| syntax(tok, "node list must be parenthesized"))?
        .into_iter()
        .map(|n| {
            if is_identifier(n) {
                Ok(n.to_string())
            } else {
                Err(syntax(tok, "invalid node name"))
            }
        })
        .collect::<Result<_, _>>()?;
    let (layer, tok) = *kv.get("layer").ok_or_else(|| missing("layer"))?;
    if !is_identifier(layer) {
        return Err(syntax(tok, "invalid layer name"));
    }
    let position = match kv.get("pos") {
        None => Point::default(),
        Some(&(v, tok)) => match paren_list(v).as_deref() {
            Some([x, y]) => Point::new(
                parse_length(x).map_err(|e| syntax(tok, &e))?,
                parse_length(y).map_err(|e| syntax(tok, &e))?,
            ),
            _ => return Err(syntax(tok, "pos must be (x,y)")),
        },
    };
    let angle = match kv.get("angle") {
        None => 0.0,
        Some(&(v, tok)) => v
            .parse::<f64>()
            .ok()
            .filter(|a| a.is_finite())
            .ok_or_else(|| syntax(tok, "invalid angle"))?,
    };
    Ok(ComponentInstance {
        name: name.to_string(),
        nodes,
        geometry,
        position,
        angle,
        layer: layer.to_string(),
    })
}

/// Canonical text: materials then instances in list order, fixed
/// parameter order, lengths in micrometers.
pub fn serialize_netlist(netlist: &Netlist) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "process \"{}\"", netlist.process);
    for m in &netlist.materials {
        let _ = writeln!(
            out,
            "material {} E={} nu={} rho={}",
            m.name, m.youngs_modulus, m.poisson_ratio, m.density
        );
    }
    for inst in &netlist.instances {
        let _ = write!(
            out,
            "{} {} node=({})",
            inst.kind().keyword(),
            inst.name,
            inst.nodes.join(",")
        );
        match &inst.geometry {
            Geometry::Beam { length, width } => {
                let _ = write!(out, " l={} w={}", format_um(*length), format_um(*width));
            }
            Geometry::RigidMass { width, height } => {
                let _ = write!(out, " w={} h={}", format_um(*width), format_um(*height));
            }
            Geometry::LinearComb(c) | Geometry::BiasComb(c) => {
                let _ = write!(
                    out,
                    " fingers={} fl={} fw={} gap={} overlap={} orient={}",
                    c.fingers,
                    format_um(c.finger_length),
                    format_um(c.finger_width),
                    format_um(c.gap),
                    format_um(c.overlap),
                    c.orient.text()
                );
            }
            Geometry::Anchor {
                width,
                height,
                anchor_layer,
            } => {
                let _ = write!(
                    out,
                    " w={} h={} anchor_layer={}",
                    format_um(*width),
                    format_um(*height),
                    anchor_layer
                );
            }
        }
        let _ = write!(
            out,
            " pos=({},{}) layer={}",
            format_um(inst.position.x),
            format_um(inst.position.y),
            inst.layer
        );
        if inst.angle != 0.0 {
            let _ = write!(out, " angle={}", inst.angle);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN: &str = "\
process \"poly2\"
material si E=160e9 nu=0.22 rho=2330   # silicon
anchor a1 node=(n1) w=40u h=40u anchor_layer=ANCHOR pos=(0,0) layer=STRUCT
beam b1 node=(n1,n2) l=200u w=2u pos=(40u,20u) layer=STRUCT
mass m1 node=(n2) w=400u h=400u pos=(240u,-180u) layer=STRUCT
lincomb c1 node=(n2) fingers=20 fl=40u fw=2u gap=2u overlap=20u orient=+x pos=(640u,0u) layer=STRUCT
";

    #[test]
    fn empty_input() {
        let n = parse_netlist("").unwrap();
        assert!(n.instances.is_empty() && n.materials.is_empty());
        assert_eq!(serialize_netlist(&n), "process \"\"\n");
    }

    #[test]
    fn parses_chain() {
        let n = parse_netlist(CHAIN).unwrap();
        assert_eq!(n.process, "poly2");
        assert_eq!(n.materials[0], Material::new("si", 160e9, 0.22, 2330.0));
        assert_eq!(n.instances.len(), 4);
        assert_eq!(n.instances[2].position, Point::new(240_000, -180_000));
        let c = n.instances[3].geometry.comb().unwrap();
        assert_eq!((c.fingers, c.pitch(), c.orient), (20, 4_000, Orient::PosX));
    }

    #[test]
    fn serialize_round_trip() {
        let n = parse_netlist(CHAIN).unwrap();
        let text = serialize_netlist(&n);
        assert_eq!(parse_netlist(&text).unwrap(), n);
        assert_eq!(serialize_netlist(&parse_netlist(&text).unwrap()), text);
    }

    #[test]
    fn position_in_micrometers() {
        let mut n = Netlist::default();
        n.instances.push(ComponentInstance {
            name: "m".into(),
            nodes: vec!["a".into()],
            geometry: Geometry::RigidMass {
                width: 1_000,
                height: 1_000,
            },
            position: Point::new(1_500, 0),
            angle: 0.0,
            layer: "STRUCT".into(),
        });
        assert!(serialize_netlist(&n).contains("pos=(1.5u,0u)"));
    }

    #[test]
    fn missing_width_reported() {
        let err = parse_netlist("beam b1 l=200u").unwrap_err();
        assert_eq!(
            err,
            NetlistError::MissingParam {
                line: 1,
                instance: "b1".into(),
                param: "w".into()
            }
        );
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(
            parse_netlist("spring s1 k=1"),
            Err(NetlistError::UnknownKind { line: 1, .. })
        ));
        let dup = "mass m node=(a) w=1u h=1u layer=S\nmass m node=(b) w=1u h=1u layer=S\n";
        assert!(matches!(
            parse_netlist(dup),
            Err(NetlistError::DuplicateName { line: 2, .. })
        ));
        match parse_netlist("\n\nbeam b node=(a,b) l=2x w=1u layer=S") {
            Err(NetlistError::Syntax { line, token, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(token, "l=2x");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_netlist("beam b l=1u w=1u layer=S"),
            Err(NetlistError::MissingParam { param, .. }) if param == "node"
        ));
        assert!(matches!(
            parse_netlist("mass m node=(a) w=1u h=1u bogus=3 layer=S"),
            Err(NetlistError::Syntax { .. })
        ));
    }

    #[test]
    fn angle_only_when_nonzero() {
        let text = "process \"p\"\nbeam b node=(a,b) l=10u w=1u pos=(0u,0u) layer=S angle=90\n";
        let n = parse_netlist(text).unwrap();
        assert_eq!(n.instances[0].angle, 90.0);
        assert_eq!(serialize_netlist(&n), text);
    }
}
