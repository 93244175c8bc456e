use std::path::{Path, PathBuf};

use super::model::{Axis, Probe};
use super::source::Source;
use super::SimError;

#[derive(Clone, Debug, PartialEq)]
pub struct MacromodelSpec {
    /// Reduced-model bundle directory.
    pub dir: PathBuf,
    pub node: String,
    pub covers: Vec<String>,
}

/// `key = value` run description. Relative paths resolve against the
/// directory holding the file.
///
/// ```text
/// netlist = gyro.net
/// stack = soi.stack
/// axis = x
/// dt = 1e-8
/// t_end = 1e-4
/// source = voltage c1 sine 10 5e4 0
/// probe = x(n1)
/// macromodel = flex node=n1 covers=b1,b2,m1
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub netlist: PathBuf,
    pub stack: PathBuf,
    /// Material name from the netlist; the first one when absent.
    pub material: Option<String>,
    pub axis: Axis,
    /// `None` picks a stable step from the model.
    pub dt: Option<f64>,
    /// Required for transient runs only.
    pub t_end: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub sources: Vec<Source>,
    pub probes: Vec<Probe>,
    pub macromodels: Vec<MacromodelSpec>,
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, SimError> {
        let (mut netlist, mut stack) = (None, None);
        let mut cfg = RunConfig {
            netlist: PathBuf::new(),
            stack: PathBuf::new(),
            material: None,
            axis: Axis::X,
            dt: None,
            t_end: None,
            alpha: 0.0,
            beta: 0.0,
            sources: Vec::new(),
            probes: Vec::new(),
            macromodels: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let err = |message: String| SimError::Config { line, message };
            let (key, value) = l
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| err(format!("{key}: `{v}` is not a number")))
            };
            match key {
                "netlist" => netlist = Some(base.join(value)),
                "stack" => stack = Some(base.join(value)),
                "material" => cfg.material = Some(value.to_string()),
                "axis" => cfg.axis = value.parse().map_err(err)?,
                "dt" => cfg.dt = Some(num(value)?),
                "t_end" => cfg.t_end = Some(num(value)?),
                "alpha" => cfg.alpha = num(value)?,
                "beta" => cfg.beta = num(value)?,
                "source" => cfg
                    .sources
                    .push(Source::parse(value).map_err(|e| err(e.to_string()))?),
                "probe" => cfg
                    .probes
                    .push(value.parse().map_err(|e: SimError| err(e.to_string()))?),
                "macromodel" => {
                    let mut parts = value.split_whitespace();
                    let dir = parts
                        .next()
                        .ok_or_else(|| err("macromodel needs a directory".into()))?;
                    let (mut node, mut covers) = (None, Vec::new());
                    for p in parts {
                        match p.split_once('=') {
                            Some(("node", n)) => node = Some(n.to_string()),
                            Some(("covers", c)) => {
                                covers = c
                                    .split(',')
                                    .filter(|s| !s.is_empty())
                                    .map(String::from)
                                    .collect()
                            }
                            _ => return Err(err(format!("unexpected `{p}`"))),
                        }
                    }
                    cfg.macromodels.push(MacromodelSpec {
                        dir: base.join(dir),
                        node: node.ok_or_else(|| err("macromodel needs node=".into()))?,
                        covers,
                    });
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        let missing = |k: &str| SimError::Config {
            line: 0,
            message: format!("missing `{k}`"),
        };
        cfg.netlist = netlist.ok_or_else(|| missing("netlist"))?;
        cfg.stack = stack.ok_or_else(|| missing("stack"))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_config() {
        let text = "netlist = a.net\nstack = s.stack # comment\naxis = z\nt_end = 1e-3\n\
                    source = force n1 pulse 1e-6 0 1e-4\nprobe = x(n1)\n\
                    macromodel = flex node=n1 covers=b1,m1\n";
        let c = RunConfig::parse(text, Path::new("/d")).unwrap();
        assert_eq!(c.netlist, PathBuf::from("/d/a.net"));
        assert_eq!(c.axis, Axis::Z);
        assert_eq!(c.dt, None);
        assert_eq!(c.sources.len(), 1);
        assert_eq!(c.probes, vec![Probe::Displacement("n1".into())]);
        assert_eq!(c.macromodels[0].covers, vec!["b1", "m1"]);
    }

    #[test]
    fn errors_carry_lines() {
        let e = RunConfig::parse("netlist = a\nfoo = 1\n", Path::new(".")).unwrap_err();
        assert!(matches!(e, SimError::Config { line: 2, .. }));
        assert!(RunConfig::parse("netlist = a\n", Path::new(".")).is_err());
    }
}
