use std::collections::BTreeMap;

use rayon::prelude::*;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::damping::sample_damping;
use crate::error::{Error, Result};
use crate::functionals::ComplexField;
use crate::geometry::Vec2;
use crate::mesh::{generate_mesh, Mesh, PointGrid};
use crate::solver::{run_simulation, sample_initial_condition, RunOptions};

/// Probe points per axis for field comparisons.
pub const PROBE_RESOLUTION: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n_cells: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_cells: usize,
    pub dt: f64,
    pub h: f64,
    /// Max-norm difference of the `E₀` trajectory against the finest level.
    pub e0_error: f64,
    /// Probe-grid L² difference of the final field against the finest level.
    pub field_error: f64,
    /// Probe-grid L² difference against the next finer level.
    pub field_increment: Option<f64>,
    /// `log₂(field_error / next field_error)`.
    pub observed_order: Option<f64>,
    /// `log₂(field_increment / next field_increment)`.
    pub richardson_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub t_final: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:e}"));
        let mut s = String::from(
            "n_cells,dt,h,e0_error,field_error,field_increment,observed_order,richardson_order\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{},{},{}\n",
                r.n_cells,
                r.dt,
                r.h,
                r.e0_error,
                r.field_error,
                opt(r.field_increment),
                opt(r.observed_order),
                opt(r.richardson_order)
            ));
        }
        s
    }
}

/// Parses `"(500,0.0039);(2000,0.0039)"`.
pub fn parse_levels(s: &str) -> Result<Vec<Level>> {
    let bad = |m: &str| Error::InvalidConfig(format!("levels `{s}`: {m}"));
    let mut out = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let inner = part
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(|| bad("expected (cells,dt)"))?;
        let (c, d) = inner.split_once(',').ok_or_else(|| bad("expected (cells,dt)"))?;
        let n_cells = c.trim().parse().map_err(|_| bad("bad cell count"))?;
        let dt: f64 = d.trim().parse().map_err(|_| bad("bad time step"))?;
        if !(dt > 0.0) {
            return Err(bad("time step must be positive"));
        }
        out.push(Level { n_cells, dt });
    }
    if out.is_empty() {
        return Err(bad("no levels"));
    }
    Ok(out)
}

struct LevelRun {
    h: f64,
    e0: Vec<(f64, f64)>,
    probes: Vec<Complex64>,
}



/// Runs every level to `t_final` and compares against the last (finest)
/// level. `E₀` is recorded on the coarsest time grid so all levels share
/// sample times; every level's `dt` must divide the coarsest one.
pub fn convergence_study(base: &ExperimentConfig, levels: &[Level], t_final: f64) -> Result<ConvergenceTable> {
    if levels.is_empty() {
        return Err(Error::InvalidConfig("convergence study needs at least one level".into()));
    }
    let dt_max = levels.iter().map(|l| l.dt).fold(0.0, f64::max);
    let record: Vec<usize> = levels
        .iter()
        .map(|l| {
            let r = dt_max / l.dt;
            if (r - r.round()).abs() > 1e-9 * r {
                Err(Error::InvalidConfig(format!(
                    "time step {} does not divide the coarsest step {dt_max}",
                    l.dt
                )))
            } else {
                Ok(r.round() as usize)
            }
        })
        .collect::<Result<_>>()?;

    let mut meshes = BTreeMap::new();
    for l in levels {
        if !meshes.contains_key(&l.n_cells) {
            let mut cfg = base.clone();
            cfg.n_cells = l.n_cells;
            let mesh = match &base.mesh_file {
                Some(_) if levels.iter().all(|m| m.n_cells == l.n_cells) => cfg.build_mesh()?,
                _ => generate_mesh(&base.domain, &cfg.mesh_options())?,
            };
            meshes.insert(l.n_cells, mesh);
        }
    }

    let probe_points = probe_grid(base, PROBE_RESOLUTION);
    let runs: Vec<LevelRun> = levels
        .par_iter()
        .zip(record.par_iter())
        .map(|(l, &every)| {
            let mesh = &meshes[&l.n_cells];
            let mut cfg = base.clone();
            cfg.dt = l.dt;
            let damping = sample_damping(&cfg.damping, mesh)?;
            let y0 = sample_initial_condition(&cfg.initial, mesh);
            let out = run_simulation(
                mesh,
                &damping,
                &y0,
                &cfg.scheme(),
                &RunOptions {
                    t_final,
                    record_every: every,
                    snapshot_every: None,
                },
            )?;
            Ok(LevelRun {
                h: mesh.h(),
                e0: out.series.iter().map(|s| (s.t, s.e0)).collect(),
                probes: sample_on_probes(mesh, &out.final_field, &probe_points),
            })
        })
        .collect::<Result<_>>()?;

    let (dx, dy) = probe_spacing(base, PROBE_RESOLUTION);
    let field_diff = |a: &LevelRun, b: &LevelRun| {
        let sq: Vec<f64> = a.probes.iter().zip(&b.probes).map(|(u, v)| (u - v).norm_sqr()).collect();
        (crate::functionals::pairwise_sum(&sq) * dx * dy).sqrt()
    };
    let reference = runs.last().expect("non-empty");
    let mut rows: Vec<ConvergenceRow> = levels
        .iter()
        .zip(&runs)
        .enumerate()
        .map(|(i, (l, r))| ConvergenceRow {
            n_cells: l.n_cells,
            dt: l.dt,
            h: r.h,
            e0_error: e0_difference(&r.e0, &reference.e0),
            field_error: field_diff(r, reference),
            field_increment: runs.get(i + 1).map(|next| field_diff(r, next)),
            observed_order: None,
            richardson_order: None,
        })
        .collect();
    for i in 0..rows.len().saturating_sub(1) {
        let next = rows[i + 1];
        if next.field_error > 0.0 {
            rows[i].observed_order = Some((rows[i].field_error / next.field_error).log2());
        }
        if let (Some(a), Some(b)) = (rows[i].field_increment, next.field_increment) {
            if b > 0.0 {
                rows[i].richardson_order = Some((a / b).log2());
            }
        }
    }
    Ok(ConvergenceTable { t_final, rows })
}

fn e0_difference(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            debug_assert!((x.0 - y.0).abs() <= 1e-9 * x.0.max(1.0));
            (x.1 - y.1).abs()
        })
        .fold(0.0, f64::max)
}

fn probe_spacing(base: &ExperimentConfig, n: usize) -> (f64, f64) {
    let bb = base.domain.bounding_box();
    (bb.width() / n as f64, bb.height() / n as f64)
}

/// Cell-centred points of a uniform `n × n` grid over the bounding box,
/// restricted to the domain interior.
pub fn probe_grid(base: &ExperimentConfig, n: usize) -> Vec<Vec2> {
    let bb = base.domain.bounding_box();
    let (dx, dy) = probe_spacing(base, n);
    let mut pts = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let p = Vec2::new(bb.min.x + (i as f64 + 0.5) * dx, bb.min.y + (j as f64 + 0.5) * dy);
            if base.domain.contains(p) {
                pts.push(p);
            }
        }
    }
    pts
}

/// Evaluates a piecewise-constant field at each probe through the cell
/// whose generator is nearest.
pub fn sample_on_probes(mesh: &Mesh, field: &ComplexField, probes: &[Vec2]) -> Vec<Complex64> {
    let bb = mesh.domain().bounding_box();
    let spacing = (mesh.total_area() / mesh.n_cells() as f64).sqrt();
    let grid = PointGrid::new(mesh.points(), bb.inflate(spacing), spacing);
    probes
        .iter()
        .map(|&p| field.values()[grid.nearest(p).expect("non-empty mesh")])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_parse() {
        let l = parse_levels("(500, 0.0039); (2000,0.001953125)").unwrap();
        assert_eq!(l, vec![Level { n_cells: 500, dt: 0.0039 }, Level { n_cells: 2000, dt: 0.001953125 }]);
        assert!(parse_levels("").is_err());
        assert!(parse_levels("500,0.1").is_err());
        assert!(parse_levels("(500,-1)").is_err());
    }

    #[test]
    fn probes_inside_domain() {
        let cfg = ExperimentConfig::reduced(super::super::Example::III);
        let pts = probe_grid(&cfg, 50);
        assert!(pts.iter().all(|&p| cfg.domain.contains(p)));
        let frac = pts.len() as f64 / 2500.0;
        let expected = cfg.domain.area() / 1600.0;
        assert!((frac - expected).abs() < 0.03, "{frac} vs {expected}");
    }
}
