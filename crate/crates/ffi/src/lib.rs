//! C ABI for the `nlsfv` simulator.
//!
//! Every fallible function returns an [`NlsfvStatus`]; on failure the
//! message is available from [`nlsfv_last_error_message`] on the same
//! thread. Handles are opaque and must be released with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use nlsfv::damping::{sample_damping, DampingField, DampingPreset};
use nlsfv::experiments::{emit_report, run_example, Example, ExperimentConfig, Scale};
use nlsfv::functionals::{energy_e1, mass_e0};
use nlsfv::mesh::{generate_mesh, load_mesh, save_mesh, MeshOptions};
use nlsfv::solver::{sample_initial_condition, InitialCondition, SchemeConfig, Stepper};
use nlsfv::{ComplexField, DomainSpec, Error, Mesh};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsfvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    MeshError = 4,
    SolverError = 5,
    IoError = 6,
    ParseError = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsfvInitial {
    /// `½ exp(−((x−1)² + (y−1)² + (i/2)(x−1)))`
    Example1 = 1,
    /// `exp(−(x² + (y−10)² + (i/2)x))`
    Example3 = 3,
}

/// Scheme parameters; obtain defaults from [`nlsfv_scheme_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsfvSchemeParams {
    pub dt: f64,
    pub p: f64,
    pub picard_tol: f64,
    pub picard_max_iters: u32,
    pub krylov_tol: f64,
    pub krylov_restart: u32,
    pub krylov_max_iters: u32,
    pub nonlinearity_enabled: bool,
    pub jacobi: bool,
}

pub struct NlsfvMesh {
    mesh: Mesh,
}

pub struct NlsfvSimulation {
    mesh: Mesh,
    damping: DampingField,
    config: SchemeConfig,
    field: ComplexField,
    steps: u64,
    time: f64,
    picard_iters: u64,
    krylov_iters: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> NlsfvStatus {
    match err {
        Error::InvalidDomain(_) | Error::InvalidConfig(_) | Error::DimensionMismatch { .. } | Error::MeshMismatch { .. } => {
            NlsfvStatus::InvalidConfig
        }
        Error::Seeding { .. }
        | Error::DegenerateCell { .. }
        | Error::ZeroDistance { .. }
        | Error::MissingTransmissibility { .. } => NlsfvStatus::MeshError,
        Error::KrylovNonConvergence { .. } | Error::PicardNonConvergence { .. } | Error::Step { .. } => {
            NlsfvStatus::SolverError
        }
        Error::Io { .. } => NlsfvStatus::IoError,
        Error::Parse { .. } | Error::Schema { .. } | Error::SchemaVersion { .. } | Error::Json(_) => NlsfvStatus::ParseError,
        Error::InsufficientData(_) | Error::NonpositiveMass { .. } => NlsfvStatus::InvalidArgument,
    }
}

enum Failure {
    Status(NlsfvStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(NlsfvStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Status(NlsfvStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NlsfvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NlsfvStatus::Ok
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            let mut msg = e.to_string();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                msg.push_str(": ");
                msg.push_str(&s.to_string());
                src = s.source();
            }
            set_last_error(msg);
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            NlsfvStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the most recent failure on this thread, or null. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn nlsfv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn nlsfv_scheme_params_default(dt: f64, p: f64) -> NlsfvSchemeParams {
    let c = SchemeConfig::new(dt, p);
    NlsfvSchemeParams {
        dt: c.dt,
        p: c.p,
        picard_tol: c.picard_tol,
        picard_max_iters: c.picard_max_iters as u32,
        krylov_tol: c.krylov_tol,
        krylov_restart: c.krylov_restart as u32,
        krylov_max_iters: c.krylov_max_iters as u32,
        nonlinearity_enabled: c.nonlinearity_enabled,
        jacobi: c.jacobi,
    }
}

fn scheme_config(p: &NlsfvSchemeParams) -> SchemeConfig {
    let mut c = SchemeConfig::new(p.dt, p.p);
    c.picard_tol = p.picard_tol;
    c.picard_max_iters = p.picard_max_iters as usize;
    c.krylov_tol = p.krylov_tol;
    c.krylov_restart = p.krylov_restart as usize;
    c.krylov_max_iters = p.krylov_max_iters as usize;
    c.nonlinearity_enabled = p.nonlinearity_enabled;
    c.jacobi = p.jacobi;
    c
}

/// Generates a centroidal Voronoi mesh of the domain described by `domain`
/// (`"disk:R"` or `"annulus:RI,RO"`).
///
/// # Safety
/// `domain` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_mesh_generate(
    domain: *const c_char,
    n_cells: usize,
    seed: u64,
    out: *mut *mut NlsfvMesh,
) -> NlsfvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let domain = DomainSpec::parse(read_str(domain, "domain")?)?;
        let mesh = generate_mesh(&domain, &MeshOptions::new(&domain, n_cells, seed))?;
        *out = Box::into_raw(Box::new(NlsfvMesh { mesh }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_mesh_load(path: *const c_char, out: *mut *mut NlsfvMesh) -> NlsfvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let mut mesh = load_mesh(read_str(path, "path")?)?;
        if !mesh.transmissibilities_ready() {
            mesh = nlsfv::mesh::compute_transmissibilities(mesh)?;
        }
        *out = Box::into_raw(Box::new(NlsfvMesh { mesh }));
        Ok(())
    })
}

/// # Safety
/// `mesh` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_mesh_save(mesh: *const NlsfvMesh, path: *const c_char) -> NlsfvStatus {
    guard(|| {
        let m = handle(mesh, "mesh")?;
        save_mesh(&m.mesh, read_str(path, "path")?)?;
        Ok(())
    })
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_mesh_n_cells(mesh: *const NlsfvMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.n_cells())
}

/// Largest cell diameter, or NaN for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_mesh_h(mesh: *const NlsfvMesh) -> f64 {
    mesh.as_ref().map_or(f64::NAN, |m| m.mesh.h())
}

/// Copies cell generators as interleaved `x, y` pairs into `xy`, which
/// must hold `2 * len` doubles with `len` equal to the cell count.
///
/// # Safety
/// `mesh` must be a live handle and `xy` valid for `2 * len` writes.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_mesh_cell_points(mesh: *const NlsfvMesh, xy: *mut f64, len: usize) -> NlsfvStatus {
    guard(|| {
        let m = handle(mesh, "mesh")?;
        if xy.is_null() {
            return Err(null("xy"));
        }
        if len != m.mesh.n_cells() {
            return Err(invalid(format!("buffer holds {len} cells, mesh has {}", m.mesh.n_cells())));
        }
        let buf = std::slice::from_raw_parts_mut(xy, 2 * len);
        for (c, dst) in m.mesh.cells().iter().zip(buf.chunks_exact_mut(2)) {
            dst[0] = c.point.x;
            dst[1] = c.point.y;
        }
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_mesh_free(mesh: *mut NlsfvMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Creates a simulation on a copy of `mesh` with damping preset `damping`
/// (`"zero"`, `"example1"`…`"example4"`, `"constant:C"`, …) and initial
/// data `initial`, one of the [`NlsfvInitial`] values.
///
/// # Safety
/// `mesh` must be a live handle, `damping` a NUL-terminated string,
/// `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_new(
    mesh: *const NlsfvMesh,
    damping: *const c_char,
    initial: i32,
    params: *const NlsfvSchemeParams,
    out: *mut *mut NlsfvSimulation,
) -> NlsfvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let m = handle(mesh, "mesh")?;
        let params = handle(params, "params")?;
        let config = scheme_config(params);
        config.validate()?;
        let preset = DampingPreset::parse(read_str(damping, "damping")?)?;
        let mesh = m.mesh.clone();
        let damping = sample_damping(&preset, &mesh)?;
        let ic = match initial {
            x if x == NlsfvInitial::Example1 as i32 => InitialCondition::Example1,
            x if x == NlsfvInitial::Example3 as i32 => InitialCondition::Example3,
            other => return Err(invalid(format!("unknown initial condition {other}"))),
        };
        let field = sample_initial_condition(&ic, &mesh);
        *out = Box::into_raw(Box::new(NlsfvSimulation {
            mesh,
            damping,
            config,
            field,
            steps: 0,
            time: 0.0,
            picard_iters: 0,
            krylov_iters: 0,
        }));
        Ok(())
    })
}

/// Advances `n_steps` time steps. On failure the state is left at the last
/// completed step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_step(sim: *mut NlsfvSimulation, n_steps: u64) -> NlsfvStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        let mut stepper = Stepper::new(&s.mesh, &s.damping, s.config)?;
        for _ in 0..n_steps {
            let r = stepper.step(&s.field)?;
            s.field = r.field;
            s.steps += 1;
            s.time = s.steps as f64 * s.config.dt;
            s.picard_iters += r.picard_iters as u64;
            s.krylov_iters += r.krylov_iters_total as u64;
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_time(sim: *const NlsfvSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.time)
}

/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_steps(sim: *const NlsfvSimulation) -> u64 {
    sim.as_ref().map_or(0, |s| s.steps)
}

/// Total Picard and Krylov iterations so far.
///
/// # Safety
/// `sim` must be a live handle; the output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_iterations(
    sim: *const NlsfvSimulation,
    picard: *mut u64,
    krylov: *mut u64,
) -> NlsfvStatus {
    guard(|| {
        let s = handle(sim, "sim")?;
        if let Some(p) = picard.as_mut() {
            *p = s.picard_iters;
        }
        if let Some(k) = krylov.as_mut() {
            *k = s.krylov_iters;
        }
        Ok(())
    })
}

/// Writes the mass `E₀` of the current field.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_mass(sim: *const NlsfvSimulation, out: *mut f64) -> NlsfvStatus {
    guard(|| {
        let s = handle(sim, "sim")?;
        *out_ptr(out, "out")? = mass_e0(&s.field, &s.mesh)?;
        Ok(())
    })
}

/// Writes the energy `E₁` of the current field.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_energy(sim: *const NlsfvSimulation, out: *mut f64) -> NlsfvStatus {
    guard(|| {
        let s = handle(sim, "sim")?;
        *out_ptr(out, "out")? = energy_e1(&s.field, &s.mesh, s.config.p)?;
        Ok(())
    })
}

/// Copies the current field into `re` and `im`, each of length `len`
/// equal to the cell count.
///
/// # Safety
/// `sim` must be a live handle and `re`, `im` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_get_field(
    sim: *const NlsfvSimulation,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> NlsfvStatus {
    guard(|| {
        let s = handle(sim, "sim")?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        if len != s.field.len() {
            return Err(invalid(format!("buffer length {len}, field has {}", s.field.len())));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, len), std::slice::from_raw_parts_mut(im, len));
        for (k, v) in s.field.values().iter().enumerate() {
            re[k] = v.re;
            im[k] = v.im;
        }
        Ok(())
    })
}

/// Replaces the current field.
///
/// # Safety
/// `sim` must be a live handle and `re`, `im` valid for `len` reads.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_set_field(
    sim: *mut NlsfvSimulation,
    re: *const f64,
    im: *const f64,
    len: usize,
) -> NlsfvStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let values = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        s.field = ComplexField::new(&s.mesh, values)?;
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_simulation_free(sim: *mut NlsfvSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs a reference example (`"I"`…`"IV"`) and writes its report into
/// `out_dir`. A positive `t_final` overrides the final time.
///
/// # Safety
/// `example` and `out_dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn nlsfv_run_example(
    example: *const c_char,
    reduced: bool,
    t_final: f64,
    out_dir: *const c_char,
) -> NlsfvStatus {
    guard(|| {
        let ex: Example = read_str(example, "example")?.parse()?;
        let scale = if reduced { Scale::Reduced } else { Scale::Full };
        let mut cfg = ExperimentConfig::with_scale(ex, scale);
        if t_final > 0.0 {
            cfg.t_final = t_final;
        }
        let dir = PathBuf::from(read_str(out_dir, "out_dir")?);
        let result = run_example(&cfg)?;
        emit_report(&result, dir)?;
        Ok(())
    })
}
