use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gmres::{gmres, GmresOptions};
use super::sparse::CsrMatrix;
use crate::damping::DampingField;
use crate::error::{Error, Result};
use crate::functionals::{pairwise_sum, ComplexField, FunctionalSample};
use crate::geometry::Vec2;
use crate::mesh::Mesh;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: f64,
    /// Scheme exponent: potential energy density `|y|^{2p}/(2p)`.
    pub p: f64,
    /// Relative L² change between Picard iterates that ends the loop.
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub krylov_tol: f64,
    pub krylov_restart: usize,
    pub krylov_max_iters: usize,
    pub nonlinearity_enabled: bool,
    /// Below this relative gap between `|y^{n+1}|²` and `|y^n|²` the
    /// nonlinear coefficient uses its analytic limit.
    pub ratio_epsilon: f64,
    pub jacobi: bool,
}

impl SchemeConfig {
    pub fn new(dt: f64, p: f64) -> Self {
        SchemeConfig {
            dt,
            p,
            picard_tol: 1e-6,
            picard_max_iters: 100,
            krylov_tol: 1e-10,
            krylov_restart: 50,
            krylov_max_iters: 10_000,
            nonlinearity_enabled: true,
            ratio_epsilon: 1e-12,
            jacobi: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return bad(format!("p must be positive, got {}", self.p));
        }
        for (name, v) in [
            ("picard_tol", self.picard_tol),
            ("krylov_tol", self.krylov_tol),
            ("ratio_epsilon", self.ratio_epsilon),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        for (name, v) in [
            ("picard_max_iters", self.picard_max_iters),
            ("krylov_restart", self.krylov_restart),
            ("krylov_max_iters", self.krylov_max_iters),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn gmres_options(&self) -> GmresOptions {
        GmresOptions {
            tol: self.krylov_tol,
            restart: self.krylov_restart,
            max_iters: self.krylov_max_iters,
            jacobi: self.jacobi,
        }
    }
}

/// `(s₁^p − s₀^p)/(s₁ − s₀)` with `s = |z|²`, continued by `p s^{p−1}` at
/// the midpoint when the two moduli (nearly) coincide.
pub fn nonlinear_coefficient(z_new: Complex64, z_old: Complex64, p: f64, ratio_epsilon: f64) -> f64 {
    if p == 1.0 {
        return 1.0;
    }
    let s1 = z_new.norm_sqr();
    let s0 = z_old.norm_sqr();
    let scale = s1.max(s0).max(f64::MIN_POSITIVE);
    if (s1 - s0).abs() > ratio_epsilon * scale {
        secant_power(s1, s0, p)
    } else {
        let s = 0.5 * (s1 + s0);
        power_derivative(s, p)
    }
}

/// `p s^{p−1}`, taken as its limit (0, or 1 for p = 1) at s = 0.
fn power_derivative(s: f64, p: f64) -> f64 {
    if s > 0.0 {
        p * s.powf(p - 1.0)
    } else if p == 1.0 {
        1.0
    } else if p > 1.0 {
        0.0
    } else {
        // Unbounded derivative; the coefficient multiplies a zero value.
        0.0
    }
}

/// Divided difference of `s ↦ s^p` without cancellation or overflow:
/// `lo^{p−1} · expm1(p·ln1p(δ))/δ` with `δ = (hi − lo)/lo` for nearby
/// values, `hi^{p−1} (1 − r^p)/(1 − r)` with `r = lo/hi` otherwise.
fn secant_power(s1: f64, s0: f64, p: f64) -> f64 {
    let (lo, hi) = if s1 < s0 { (s1, s0) } else { (s0, s1) };
    if hi >= 2.0 * lo {
        let r = lo / hi;
        return hi.powf(p - 1.0) * (1.0 - r.powf(p)) / (1.0 - r);
    }
    let delta = (hi - lo) / lo;
    lo.powf(p - 1.0) * (p * delta.ln_1p()).exp_m1() / delta
}

/// Per-step linear system `A y^{n+1} = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseComplexSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<Complex64>,
}

/// The parts of the step operator that do not depend on the nonlinear
/// coefficient, for one mesh, damping field and time step.
#[derive(Debug, Clone)]
struct StepOperator {
    dt: f64,
    /// `i m/Δt + ½ L + i m a/2`, `L` the two-point flux operator.
    base: CsrMatrix,
    diag_pos: Vec<usize>,
    area: Vec<f64>,
}

impl StepOperator {
    fn new(mesh: &Mesh, damping: &DampingField, dt: f64) -> Result<Self> {
        mesh.require_transmissibilities()?;
        let n = mesh.n_cells();
        if damping.values().len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: damping.values().len(),
            });
        }
        let mut trip = Vec::with_capacity(n + 2 * mesh.faces().len());
        for (c, &a) in mesh.cells().iter().zip(damping.values()) {
            trip.push((c.id, c.id, I * (c.area / dt) + I * (0.5 * c.area * a)));
        }
        for f in mesh.faces() {
            let half = 0.5 * f.transmissibility;
            trip.push((f.cell_k, f.cell_k, Complex64::new(-half, 0.0)));
            if let Some(l) = f.cell_l {
                trip.push((l, l, Complex64::new(-half, 0.0)));
                trip.push((f.cell_k, l, Complex64::new(half, 0.0)));
                trip.push((l, f.cell_k, Complex64::new(half, 0.0)));
            }
        }
        let base = CsrMatrix::from_triplets(n, trip);
        let diag_pos = base.diag_positions();
        Ok(StepOperator {
            dt,
            base,
            diag_pos,
            area: mesh.cells().iter().map(|c| c.area).collect(),
        })
    }

    /// `2i m/Δt · y − A_base y`: the `y^n` part of the right-hand side
    /// that does not involve `q`.
    fn linear_rhs(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.base.matvec(y);
        for ((o, &m), &yk) in out.iter_mut().zip(&self.area).zip(y) {
            *o = I * (2.0 * m / self.dt) * yk - *o;
        }
        out
    }

    fn system(&self, y_n: &[Complex64], linear_rhs: &[Complex64], q: &[f64], p: f64) -> SparseComplexSystem {
        let mut matrix = self.base.clone();
        let vals = matrix.values_mut();
        let mut rhs = linear_rhs.to_vec();
        for k in 0..q.len() {
            let w = self.area[k] / (2.0 * p) * q[k];
            vals[self.diag_pos[k]] -= w;
            rhs[k] += w * y_n[k];
        }
        SparseComplexSystem { matrix, rhs }
    }
}

/// Builds the system for `y^{n+1}` with the nonlinear coefficient frozen
/// at `q`.
pub fn assemble_step_system(
    mesh: &Mesh,
    damping: &DampingField,
    y_n: &ComplexField,
    q: &[f64],
    config: &SchemeConfig,
) -> Result<SparseComplexSystem> {
    config.validate()?;
    y_n.check_mesh(mesh)?;
    if q.len() != mesh.n_cells() {
        return Err(Error::DimensionMismatch {
            expected: mesh.n_cells(),
            got: q.len(),
        });
    }
    let op = StepOperator::new(mesh, damping, config.dt)?;
    let zeros;
    let q = if config.nonlinearity_enabled {
        q
    } else {
        zeros = vec![0.0; q.len()];
        &zeros
    };
    let lin = op.linear_rhs(y_n.values());
    Ok(op.system(y_n.values(), &lin, q, config.p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub field: ComplexField,
    pub picard_iters: usize,
    pub final_picard_residual: f64,
    pub krylov_iters_total: usize,
}

/// Reusable stepping state for one mesh and damping field.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    mesh: &'a Mesh,
    config: SchemeConfig,
    op: StepOperator,
    damping: &'a DampingField,
}

fn weighted_norm(area: &[f64], v: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = v.zip(area).map(|(s, m)| s * m).collect();
    pairwise_sum(&terms).sqrt()
}

impl<'a> Stepper<'a> {
    pub fn new(mesh: &'a Mesh, damping: &'a DampingField, config: SchemeConfig) -> Result<Self> {
        config.validate()?;
        let op = StepOperator::new(mesh, damping, config.dt)?;
        Ok(Stepper {
            mesh,
            config,
            op,
            damping,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    /// Advances `y_n` by `dt` (which may differ from the configured step,
    /// e.g. for a final partial step).
    pub fn step_with_dt(&mut self, y_n: &ComplexField, dt: f64) -> Result<StepResult> {
        y_n.check_mesh(self.mesh)?;
        if dt != self.op.dt {
            self.op = StepOperator::new(self.mesh, self.damping, dt)?;
        }
        let cfg = self.config;
        let n = self.mesh.n_cells();
        let yn = y_n.values();
        let lin = self.op.linear_rhs(yn);
        let gm = cfg.gmres_options();

        if !cfg.nonlinearity_enabled {
            let sys = self.op.system(yn, &lin, &vec![0.0; n], cfg.p);
            let out = gmres(&sys.matrix, &sys.rhs, yn, &gm)?;
            return Ok(StepResult {
                field: ComplexField::from_raw(out.solution, y_n.mesh_id()),
                picard_iters: 1,
                final_picard_residual: 0.0,
                krylov_iters_total: out.iters,
            });
        }

        let mut current = yn.to_vec();
        let mut q = vec![0.0; n];
        let mut history = Vec::new();
        let mut krylov = 0;
        for it in 1..=cfg.picard_max_iters {
            for k in 0..n {
                q[k] = nonlinear_coefficient(current[k], yn[k], cfg.p, cfg.ratio_epsilon);
            }
            let sys = self.op.system(yn, &lin, &q, cfg.p);
            let out = gmres(&sys.matrix, &sys.rhs, &current, &gm)?;
            krylov += out.iters;
            let next = out.solution;
            let diff = weighted_norm(&self.op.area, next.iter().zip(&current).map(|(a, b)| (a - b).norm_sqr()));
            let size = weighted_norm(&self.op.area, next.iter().map(|z| z.norm_sqr()));
            let res = if size > 0.0 { diff / size } else { diff };
            history.push(res);
            current = next;
            if diff <= cfg.picard_tol * size {
                return Ok(StepResult {
                    field: ComplexField::from_raw(current, y_n.mesh_id()),
                    picard_iters: it,
                    final_picard_residual: res,
                    krylov_iters_total: krylov,
                });
            }
        }
        Err(Error::PicardNonConvergence {
            iters: cfg.picard_max_iters,
            history,
        })
    }

    pub fn step(&mut self, y_n: &ComplexField) -> Result<StepResult> {
        let dt = self.config.dt;
        self.step_with_dt(y_n, dt)
    }
}

/// One time step: Picard iteration on the nonlinear coefficient, GMRES for
/// each frozen linear system.
pub fn picard_step(mesh: &Mesh, damping: &DampingField, y_n: &ComplexField, config: &SchemeConfig) -> Result<StepResult> {
    Stepper::new(mesh, damping, *config)?.step(y_n)
}

/// Gaussian initial data `A exp(−(|x − c|² + i k (x₁ − c₁)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// `½ exp(−((x−1)² + (y−1)² + (i/2)(x−1)))`
    Example1,
    /// `exp(−(x² + (y−10)² + (i/2)x))`
    Example3,
    Gaussian {
        amplitude: f64,
        center: Vec2,
        wavenumber: f64,
    },
}

impl InitialCondition {
    fn params(&self) -> (f64, Vec2, f64) {
        match *self {
            InitialCondition::Example1 => (0.5, Vec2::new(1.0, 1.0), 0.5),
            InitialCondition::Example3 => (1.0, Vec2::new(0.0, 10.0), 0.5),
            InitialCondition::Gaussian {
                amplitude,
                center,
                wavenumber,
            } => (amplitude, center, wavenumber),
        }
    }

    pub fn evaluate(&self, x: Vec2) -> Complex64 {
        let (amp, c, k) = self.params();
        let d = x - c;
        amp * (-Complex64::new(d.norm_sq(), k * d.x)).exp()
    }
}

pub fn sample_initial_condition(ic: &InitialCondition, mesh: &Mesh) -> ComplexField {
    ComplexField::from_fn(mesh, |x| ic.evaluate(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub t_final: f64,
    pub record_every: usize,
    pub snapshot_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub field: ComplexField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub series: Vec<FunctionalSample>,
    pub final_field: ComplexField,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub picard_iters_total: usize,
    pub picard_iters_max: usize,
    pub krylov_iters_total: usize,
}

/// Number of steps to reach `t_final`; a final shortened step covers any
/// remainder.
pub(crate) fn step_count(t_final: f64, dt: f64) -> usize {
    let ratio = t_final / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

pub fn run_simulation(
    mesh: &Mesh,
    damping: &DampingField,
    y0: &ComplexField,
    config: &SchemeConfig,
    opts: &RunOptions,
) -> Result<SimulationOutput> {
    config.validate()?;
    y0.check_mesh(mesh)?;
    if !(opts.t_final >= config.dt) {
        return Err(Error::InvalidConfig(format!(
            "final time {} is shorter than one step {}",
            opts.t_final, config.dt
        )));
    }
    if opts.record_every == 0 || opts.snapshot_every == Some(0) {
        return Err(Error::InvalidConfig("record/snapshot intervals must be at least 1".into()));
    }
    let n_steps = step_count(opts.t_final, config.dt);
    let mut stepper = Stepper::new(mesh, damping, *config)?;
    let mut y = y0.clone();
    let mut series = vec![FunctionalSample::measure(&y, mesh, config.p, 0, 0.0)?];
    let mut snapshots = Vec::new();
    if opts.snapshot_every.is_some() {
        snapshots.push(Snapshot {
            step: 0,
            t: 0.0,
            field: y.clone(),
        });
    }
    let (mut pic_total, mut pic_max, mut kry_total) = (0, 0, 0);
    for step in 1..=n_steps {
        let t_prev = (step - 1) as f64 * config.dt;
        let (dt, t) = if step == n_steps {
            (opts.t_final - t_prev, opts.t_final)
        } else {
            (config.dt, step as f64 * config.dt)
        };
        let dt = if (dt - config.dt).abs() <= 1e-9 * config.dt { config.dt } else { dt };
        let res = stepper.step_with_dt(&y, dt).map_err(|e| Error::Step {
            step,
            source: Box::new(e),
        })?;
        pic_total += res.picard_iters;
        pic_max = pic_max.max(res.picard_iters);
        kry_total += res.krylov_iters_total;
        y = res.field;
        if step % opts.record_every == 0 || step == n_steps {
            let mut s = FunctionalSample::measure(&y, mesh, config.p, step, t)?;
            s.picard_iters = res.picard_iters;
            s.krylov_iters = res.krylov_iters_total;
            series.push(s);
        }
        if let Some(every) = opts.snapshot_every {
            if step % every == 0 || step == n_steps {
                snapshots.push(Snapshot {
                    step,
                    t,
                    field: y.clone(),
                });
            }
        }
    }
    Ok(SimulationOutput {
        series,
        final_field: y,
        snapshots,
        steps: n_steps,
        picard_iters_total: pic_total,
        picard_iters_max: pic_max,
        krylov_iters_total: kry_total,
    })
}
