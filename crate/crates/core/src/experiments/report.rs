use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ConservationStats, DecayFit, ExperimentConfig, ExperimentResult};
use crate::error::{Error, Result};
use crate::functionals::{ComplexField, FunctionalSample};
use crate::geometry::Vec2;
use crate::mesh::Mesh;

pub const SERIES_HEADER: &str = "step,t,E0,E1,l2,h1,l2p,linf,picard_iters,krylov_iters";
pub const SNAPSHOT_HEADER: &str = "cell_id,x,y,re,im";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub n_cells: usize,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub steps: usize,
    pub picard_iters_total: usize,
    pub picard_iters_max: usize,
    pub picard_iters_mean: f64,
    pub krylov_iters_total: usize,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub fit: Option<DecayFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
    pub conservation: ConservationStats,
    pub config: ExperimentConfig,
    pub mesh: MeshStats,
    pub solver: SolverStats,
    /// Fraction of cells with positive damping.
    pub damped_fraction: f64,
}

impl Summary {
    pub fn from_result(r: &ExperimentResult) -> Self {
        let out = &r.output;
        let damped = r.damping.support_cells().len() as f64 / r.mesh.n_cells() as f64;
        Summary {
            fit: r.fit,
            fit_error: r.fit_error.clone(),
            conservation: r.conservation,
            config: r.config.clone(),
            mesh: MeshStats {
                n_cells: r.mesh.n_cells(),
                h: r.mesh.h(),
            },
            solver: SolverStats {
                steps: out.steps,
                picard_iters_total: out.picard_iters_total,
                picard_iters_max: out.picard_iters_max,
                picard_iters_mean: out.picard_iters_total as f64 / out.steps.max(1) as f64,
                krylov_iters_total: out.krylov_iters_total,
            },
            damped_fraction: damped,
        }
    }
}

pub fn series_csv(series: &[FunctionalSample]) -> String {
    let mut s = String::from(SERIES_HEADER);
    s.push('\n');
    for r in series {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.step, r.t, r.e0, r.e1, r.l2, r.h1, r.l2p, r.linf, r.picard_iters, r.krylov_iters
        );
    }
    s
}

pub fn snapshot_csv(mesh: &Mesh, field: &ComplexField) -> String {
    let mut s = String::from(SNAPSHOT_HEADER);
    s.push('\n');
    for (c, v) in mesh.cells().iter().zip(field.values()) {
        let _ = writeln!(s, "{},{},{},{},{}", c.id, c.point.x, c.point.y, v.re, v.im);
    }
    s
}

fn damping_csv(r: &ExperimentResult) -> String {
    let mut s = String::from("cell_id,x,y,a\n");
    for (c, a) in r.mesh.cells().iter().zip(r.damping.values()) {
        let _ = writeln!(s, "{},{},{},{}", c.id, c.point.x, c.point.y, a);
    }
    s
}

fn fit_text(r: &ExperimentResult) -> String {
    match (&r.fit, &r.fit_error) {
        (Some(f), _) => format!(
            "gamma = {}\nC = {}\nr2 = {}\nwindow = [{}, {}]\nsamples = {}\n",
            f.gamma, f.c, f.r_squared, f.window[0], f.window[1], f.samples
        ),
        (None, Some(e)) => format!("fit unavailable: {e}\n"),
        (None, None) => "fit unavailable\n".to_string(),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `series.csv`, `fit.txt`, `summary.json`, `damping.csv` and, when
/// snapshots were taken, `snapshots/step_NNNNNNNN.csv` into `dir`.
pub fn emit_report(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<Summary> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("series.csv"), &series_csv(&result.output.series))?;
    write(&dir.join("fit.txt"), &fit_text(result))?;
    write(&dir.join("damping.csv"), &damping_csv(result))?;
    let summary = Summary::from_result(result);
    write(&dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    if !result.output.snapshots.is_empty() {
        let snap_dir = dir.join("snapshots");
        fs::create_dir_all(&snap_dir).map_err(|e| Error::io(&snap_dir, e))?;
        for s in &result.output.snapshots {
            let path = snap_dir.join(format!("step_{:08}.csv", s.step));
            write(&path, &snapshot_csv(&result.mesh, &s.field))?;
        }
    }
    Ok(summary)
}

/// Reads a snapshot CSV back as `(cell_id, point, value)` rows.
pub fn read_snapshot_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, Vec2, Complex64)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SNAPSHOT_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: format!("expected header `{SNAPSHOT_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let err = |column: usize, message: String| Error::Parse {
            line: i + 1,
            column,
            message,
        };
        if fields.len() != 5 {
            return Err(err(1, format!("expected 5 fields, found {}", fields.len())));
        }
        let id = fields[0].parse().map_err(|e| err(1, format!("{e}")))?;
        let mut nums = [0.0; 4];
        for (k, slot) in nums.iter_mut().enumerate() {
            *slot = fields[k + 1].parse().map_err(|e| err(k + 2, format!("{e}")))?;
        }
        rows.push((id, Vec2::new(nums[0], nums[1]), Complex64::new(nums[2], nums[3])));
    }
    Ok(rows)
}
