//! Experiment driver: the four reference setups, custom runs, decay fits,
//! convergence studies and report files.

mod convergence;
mod fit;
mod report;

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use convergence::{convergence_study, parse_levels, ConvergenceRow, ConvergenceTable, Level};
pub use fit::{fit_decay_rate, DecayFit};
pub use report::{emit_report, read_snapshot_csv, series_csv, Summary};

use crate::damping::{sample_damping, DampingField, DampingPreset, DampingProfile};
use crate::error::{Error, Result};
use crate::functionals::FunctionalSample;
use crate::mesh::{generate_mesh, load_mesh, save_mesh, DomainSpec, Mesh, MeshOptions};
use crate::solver::{run_simulation, sample_initial_condition, InitialCondition, RunOptions, SchemeConfig, SimulationOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example {
    I,
    II,
    III,
    IV,
    Custom,
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Example::I),
            "II" | "2" => Ok(Example::II),
            "III" | "3" => Ok(Example::III),
            "IV" | "4" => Ok(Example::IV),
            "CUSTOM" => Ok(Example::Custom),
            _ => Err(Error::InvalidConfig(format!("unknown example `{s}`"))),
        }
    }
}

/// Full-size parameters or a reduced scale for quick runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Full,
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub example: Example,
    pub domain: DomainSpec,
    pub n_cells: usize,
    pub seed: u64,
    pub lloyd_max_iters: usize,
    pub dt: f64,
    pub t_final: f64,
    pub p: f64,
    pub damping: DampingPreset,
    pub initial: InitialCondition,
    pub record_every: usize,
    pub snapshot_every: Option<usize>,
    pub picard_tol: f64,
    pub krylov_tol: f64,
    pub nonlinearity: bool,
    pub jacobi: bool,
    /// Defaults to `[0.1 T, T]`.
    pub fit_window: Option<(f64, f64)>,
    pub mesh_file: Option<PathBuf>,
    pub save_mesh: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Full-size parameters. Time steps are the dyadic values 2⁻⁸, 2⁻⁶ and 2⁻⁵.
    pub fn full(example: Example) -> Self {
        let disk = DomainSpec::disk(10.0).expect("valid disk");
        let mut c = ExperimentConfig {
            example,
            domain: disk,
            n_cells: 2000,
            seed: 1,
            lloyd_max_iters: 200,
            dt: 1.0 / 256.0,
            t_final: 500.0,
            p: 2.0,
            damping: DampingPreset::Profile(DampingProfile::Example1),
            initial: InitialCondition::Example1,
            record_every: 64,
            snapshot_every: None,
            picard_tol: 1e-6,
            krylov_tol: 1e-10,
            nonlinearity: true,
            jacobi: false,
            fit_window: None,
            mesh_file: None,
            save_mesh: None,
        };
        match example {
            Example::I | Example::Custom => {}
            Example::II => c.damping = DampingPreset::Profile(DampingProfile::Example2),
            Example::III => {
                c.domain = DomainSpec::annulus(5.0, 20.0).expect("valid annulus");
                c.n_cells = 5000;
                c.dt = 1.0 / 64.0;
                c.damping = DampingPreset::Profile(DampingProfile::Example3);
                c.initial = InitialCondition::Example3;
                c.record_every = 16;
            }
            Example::IV => {
                c.domain = DomainSpec::annulus(7.0, 20.0).expect("valid annulus");
                c.n_cells = 5000;
                c.dt = 1.0 / 32.0;
                c.t_final = 10_000.0;
                c.damping = DampingPreset::Profile(DampingProfile::Example4);
                c.initial = InitialCondition::Example3;
                c.record_every = 32;
            }
        }
        c
    }

    /// Reduced scale: 500 cells and T = 100 for I/II (and custom), 1000
    /// cells and T = 200 for III/IV.
    pub fn reduced(example: Example) -> Self {
        let mut c = Self::full(example);
        match example {
            Example::I | Example::II | Example::Custom => {
                c.n_cells = 500;
                c.t_final = 100.0;
            }
            Example::III | Example::IV => {
                c.n_cells = 1000;
                c.t_final = 200.0;
            }
        }
        c
    }

    pub fn with_scale(example: Example, scale: Scale) -> Self {
        match scale {
            Scale::Full => Self::full(example),
            Scale::Reduced => Self::reduced(example),
        }
    }

    pub fn scheme(&self) -> SchemeConfig {
        let mut s = SchemeConfig::new(self.dt, self.p);
        s.picard_tol = self.picard_tol;
        s.krylov_tol = self.krylov_tol;
        s.nonlinearity_enabled = self.nonlinearity;
        s.jacobi = self.jacobi;
        s
    }

    pub fn window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((0.1 * self.t_final, self.t_final))
    }

    pub fn mesh_options(&self) -> MeshOptions {
        MeshOptions {
            lloyd_max_iters: self.lloyd_max_iters,
            ..MeshOptions::new(&self.domain, self.n_cells, self.seed)
        }
    }

    /// Generates (or loads) the mesh, saving it if requested.
    pub fn build_mesh(&self) -> Result<Mesh> {
        let mesh = match &self.mesh_file {
            Some(path) => {
                let m = load_mesh(path)?;
                if m.transmissibilities_ready() {
                    m
                } else {
                    crate::mesh::compute_transmissibilities(m)?
                }
            }
            None => generate_mesh(&self.domain, &self.mesh_options())?,
        };
        if let Some(path) = &self.save_mesh {
            save_mesh(&mesh, path)?;
        }
        Ok(mesh)
    }
}

/// Drift and boundedness monitors over a recorded series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationStats {
    /// `max_n |E₀ⁿ − E₀⁰| / E₀⁰`
    pub mass_drift: f64,
    /// `max_n |E₁ⁿ − E₁⁰| / E₁⁰`
    pub energy_drift: f64,
    /// Largest single-interval increase of `E₀`, relative to `E₀⁰`.
    pub mass_max_increase: f64,
    /// Smallest `C ≥ 0` with `E₁ⁿ ≤ E₁⁰ + C tₙ` on all samples.
    pub energy_growth_constant: f64,
    pub linf_max: f64,
    /// `max |y|` over the run divided by its maximum over the first 10%.
    pub linf_growth: f64,
}

impl ConservationStats {
    pub fn from_series(series: &[FunctionalSample]) -> Self {
        let first = series[0];
        let rel = |v: f64, r: f64| if r > 0.0 { v / r } else { v };
        let mut st = ConservationStats {
            mass_drift: 0.0,
            energy_drift: 0.0,
            mass_max_increase: 0.0,
            energy_growth_constant: 0.0,
            linf_max: 0.0,
            linf_growth: 1.0,
        };
        for w in series.windows(2) {
            st.mass_max_increase = st.mass_max_increase.max(rel(w[1].e0 - w[0].e0, first.e0));
        }
        for s in series {
            st.mass_drift = st.mass_drift.max(rel((s.e0 - first.e0).abs(), first.e0));
            st.energy_drift = st.energy_drift.max(rel((s.e1 - first.e1).abs(), first.e1));
            if s.t > 0.0 {
                st.energy_growth_constant = st.energy_growth_constant.max((s.e1 - first.e1) / s.t);
            }
            st.linf_max = st.linf_max.max(s.linf);
        }
        let t_end = series.last().map_or(0.0, |s| s.t);
        let early = series
            .iter()
            .filter(|s| s.t <= 0.1 * t_end)
            .map(|s| s.linf)
            .fold(0.0, f64::max);
        st.linf_growth = if early > 0.0 { st.linf_max / early } else { 1.0 };
        st
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub mesh: Mesh,
    pub damping: DampingField,
    pub output: SimulationOutput,
    /// `None` when the window holds too few samples or the mass vanished.
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    pub conservation: ConservationStats,
}

/// Builds the mesh, samples damping and initial data, runs the scheme and
/// fits the mass decay rate.
pub fn run_example(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let mesh = config.build_mesh()?;
    run_on_mesh(config, mesh)
}

pub fn run_on_mesh(config: &ExperimentConfig, mesh: Mesh) -> Result<ExperimentResult> {
    let damping = sample_damping(&config.damping, &mesh)?;
    let y0 = sample_initial_condition(&config.initial, &mesh);
    let output = run_simulation(
        &mesh,
        &damping,
        &y0,
        &config.scheme(),
        &RunOptions {
            t_final: config.t_final,
            record_every: config.record_every,
            snapshot_every: config.snapshot_every,
        },
    )?;
    let pairs: Vec<(f64, f64)> = output.series.iter().map(|s| (s.t, s.e0)).collect();
    let (fit, fit_error) = match fit_decay_rate(&pairs, config.window()) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let conservation = ConservationStats::from_series(&output.series);
    Ok(ExperimentResult {
        config: config.clone(),
        mesh,
        damping,
        output,
        fit,
        fit_error,
        conservation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_parameters() {
        let i = ExperimentConfig::full(Example::I);
        assert_eq!(i.dt, 1.0 / 256.0);
        assert_eq!((i.n_cells, i.t_final, i.p), (2000, 500.0, 2.0));
        let ii = ExperimentConfig::full(Example::II);
        assert_eq!(ii.damping, DampingPreset::Profile(DampingProfile::Example2));
        let iii = ExperimentConfig::full(Example::III);
        assert_eq!(iii.dt, 0.015625);
        assert_eq!(iii.domain, DomainSpec::annulus(5.0, 20.0).unwrap());
        assert_eq!(iii.n_cells, 5000);
        let iv = ExperimentConfig::full(Example::IV);
        assert_eq!(iv.dt, 0.03125);
        assert_eq!(iv.t_final, 10_000.0);
        assert_eq!(iv.domain, DomainSpec::annulus(7.0, 20.0).unwrap());
        assert_eq!(iv.initial, InitialCondition::Example3);
        let r = ExperimentConfig::reduced(Example::IV);
        assert_eq!((r.n_cells, r.t_final), (1000, 200.0));
        assert_eq!(ExperimentConfig::reduced(Example::II).window(), (10.0, 100.0));
    }

    #[test]
    fn example_names() {
        assert_eq!("iv".parse::<Example>().unwrap(), Example::IV);
        assert_eq!("2".parse::<Example>().unwrap(), Example::II);
        assert!("V".parse::<Example>().is_err());
    }
}
