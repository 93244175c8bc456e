use super::transient::SimResult;
use super::SimError;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeError {
    pub probe: String,
    /// ‖a − b‖₂ / ‖b‖₂ on the common grid.
    pub relative_l2: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub probes: Vec<ProbeError>,
    /// Wall time of `reference` over that of `test`.
    pub wall_ratio: f64,
}

impl Comparison {
    pub fn worst_relative_l2(&self) -> f64 {
        self.probes
            .iter()
            .map(|p| p.relative_l2)
            .fold(0.0, f64::max)
    }
}

/// Linear interpolation of `(t, v)` at `x`, clamped to the ends.
fn interp(t: &[f64], v: &[f64], x: f64) -> f64 {
    match t.partition_point(|&ti| ti <= x) {
        0 => v[0],
        i if i >= t.len() => v[t.len() - 1],
        i => {
            let (t0, t1) = (t[i - 1], t[i]);
            let w = (x - t0) / (t1 - t0);
            v[i - 1] * (1.0 - w) + v[i] * w
        }
    }
}

/// Errors of `test` against `reference` on the shared probes, after moving
/// the finer run onto the coarser time grid.
pub fn compare_results(test: &SimResult, reference: &SimResult) -> Result<Comparison, SimError> {
    let coarse_is_test = test.time.len() <= reference.time.len();
    let grid: &[f64] = if coarse_is_test {
        &test.time
    } else {
        &reference.time
    };
    let t_max = test
        .time
        .last()
        .copied()
        .unwrap_or(0.0)
        .min(reference.time.last().copied().unwrap_or(0.0));
    let grid: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&t| t <= t_max * (1.0 + 1e-12))
        .collect();
    let on_grid = |r: &SimResult, v: &[f64], is_coarse: bool| -> Vec<f64> {
        if is_coarse {
            v[..grid.len()].to_vec()
        } else {
            grid.iter().map(|&x| interp(&r.time, v, x)).collect()
        }
    };
    let mut probes = Vec::new();
    for (name, tv) in &test.signals {
        let Some(rv) = reference.signal(name) else {
            continue;
        };
        let a = on_grid(test, tv, coarse_is_test);
        let b = on_grid(reference, rv, !coarse_is_test);
        let (mut diff2, mut ref2, mut max_abs) = (0.0, 0.0, 0.0f64);
        for (x, y) in a.iter().zip(&b) {
            let d = x - y;
            diff2 += d * d;
            ref2 += y * y;
            max_abs = max_abs.max(d.abs());
        }
        let relative_l2 = if ref2 > 0.0 {
            (diff2 / ref2).sqrt()
        } else {
            diff2.sqrt()
        };
        probes.push(ProbeError {
            probe: name.clone(),
            relative_l2,
            max_abs,
        });
    }
    if probes.is_empty() {
        return Err(SimError::DisjointProbes);
    }
    let (tw, rw) = (
        test.stats.wall.as_secs_f64(),
        reference.stats.wall.as_secs_f64(),
    );
    let wall_ratio = if tw == rw {
        1.0
    } else if tw > 0.0 {
        rw / tw
    } else {
        f64::INFINITY
    };
    Ok(Comparison { probes, wall_ratio })
}
