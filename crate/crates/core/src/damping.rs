//! Damping coefficients `a(x) ≥ 0`, their sampling onto meshes, and checks
//! of the structural assumptions placed on them: the gradient bound
//! `|∇a|² ≤ C a` and the geometric control condition.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::mesh::{DomainSpec, Mesh};

/// Analytic damping profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampingProfile {
    Zero,
    /// `(r − 8)²` on `8 ≤ r ≤ 10`.
    Example1,
    /// `(e^{r−8} − 1)²` on `8 ≤ r ≤ 10`.
    Example2,
    /// `(r − 17)²` on `r ≥ 17`.
    Example3,
    /// `(r − 17)²` on `r ≥ 17` with polar angle in `(−π, 0)`.
    Example4,
    /// `(r − r0)²` on `r ≥ r0`.
    RadialQuadratic { r0: f64 },
    Constant { value: f64 },
    Scaled { factor: f64, base: Box<DampingProfile> },
}

impl DampingProfile {
    pub fn evaluate(&self, p: Vec2) -> f64 {
        let r = p.norm();
        match self {
            DampingProfile::Zero => 0.0,
            DampingProfile::Example1 => {
                if (8.0..=10.0).contains(&r) {
                    (r - 8.0).powi(2)
                } else {
                    0.0
                }
            }
            DampingProfile::Example2 => {
                if (8.0..=10.0).contains(&r) {
                    (r - 8.0).exp_m1().powi(2)
                } else {
                    0.0
                }
            }
            DampingProfile::Example3 => radial_quadratic(r, 17.0),
            DampingProfile::Example4 => {
                let a = p.angle();
                if a > -PI && a < 0.0 {
                    radial_quadratic(r, 17.0)
                } else {
                    0.0
                }
            }
            DampingProfile::RadialQuadratic { r0 } => radial_quadratic(r, *r0),
            DampingProfile::Constant { value } => value.max(0.0),
            DampingProfile::Scaled { factor, base } => factor.max(0.0) * base.evaluate(p),
        }
    }

    /// Exact `sup |∇a|²/a` over the support, where a closed form exists.
    pub fn analytic_ratio_sup(&self) -> Option<f64> {
        match self {
            DampingProfile::Zero => None,
            // |∇a|² = 4 (r − r0)² = 4a
            DampingProfile::Example1
            | DampingProfile::Example3
            | DampingProfile::Example4
            | DampingProfile::RadialQuadratic { .. } => Some(4.0),
            // |∇a|²/a = 4 e^{2(r−8)}, largest at r = 10
            DampingProfile::Example2 => Some(4.0 * 4f64.exp()),
            DampingProfile::Constant { .. } => Some(0.0),
            DampingProfile::Scaled { factor, base } => base.analytic_ratio_sup().map(|s| factor * s),
        }
    }

    /// Radius of a disk containing the support (for sampling); `None` when
    /// the support is unbounded.
    pub fn support_extent(&self) -> Option<f64> {
        match self {
            DampingProfile::Example1 | DampingProfile::Example2 => Some(10.0),
            DampingProfile::Scaled { base, .. } => base.support_extent(),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            DampingProfile::Zero => "zero".into(),
            DampingProfile::Example1 => "example1".into(),
            DampingProfile::Example2 => "example2".into(),
            DampingProfile::Example3 => "example3".into(),
            DampingProfile::Example4 => "example4".into(),
            DampingProfile::RadialQuadratic { r0 } => format!("radial_quadratic:{r0}"),
            DampingProfile::Constant { value } => format!("constant:{value}"),
            DampingProfile::Scaled { factor, base } => format!("{}x{}", factor, base.name()),
        }
    }
}

fn radial_quadratic(r: f64, r0: f64) -> f64 {
    if r >= r0 {
        (r - r0).powi(2)
    } else {
        0.0
    }
}

/// Either an analytic profile or per-cell values read from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingPreset {
    Profile(DampingProfile),
    Custom(Vec<f64>),
}

impl DampingPreset {
    /// Parses a CLI name: `zero`, `example1`…`example4`, `constant:C`,
    /// `radial_quadratic:R0`, or `custom:<path>` (JSON `{cell_id: value}`).
    pub fn parse(name: &str) -> Result<Self> {
        let profile = match name {
            "zero" => DampingProfile::Zero,
            "example1" => DampingProfile::Example1,
            "example2" => DampingProfile::Example2,
            "example3" => DampingProfile::Example3,
            "example4" => DampingProfile::Example4,
            other => {
                let (kind, arg) = other
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown damping `{other}`")))?;
                let num = || {
                    arg.parse::<f64>()
                        .map_err(|_| Error::InvalidConfig(format!("bad number in damping `{other}`")))
                };
                match kind {
                    "custom" => return load_custom_damping(arg).map(DampingPreset::Custom),
                    "constant" => DampingProfile::Constant { value: num()? },
                    "radial_quadratic" => DampingProfile::RadialQuadratic { r0: num()? },
                    _ => return Err(Error::InvalidConfig(format!("unknown damping `{other}`"))),
                }
            }
        };
        Ok(DampingPreset::Profile(profile))
    }
}

/// Reads `{ "<cell_id>": value, ... }`; cells not listed get 0.
pub fn load_custom_damping(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let map: BTreeMap<String, f64> = serde_json::from_str(&text)?;
    let mut values = Vec::new();
    for (k, v) in map {
        let id: usize = k
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{}: bad cell id `{k}`", path.display())))?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "{}: damping for cell {id} must be finite and nonnegative",
                path.display()
            )));
        }
        if values.len() <= id {
            values.resize(id + 1, 0.0);
        }
        values[id] = v;
    }
    Ok(values)
}

pub fn evaluate_damping(profile: &DampingProfile, p: Vec2) -> f64 {
    profile.evaluate(p)
}

/// Per-cell damping values `a(x_K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingField {
    values: Vec<f64>,
    preset: DampingPreset,
}

impl DampingField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn preset(&self) -> &DampingPreset {
        &self.preset
    }

    /// Cells where the damping is active.
    pub fn support_cells(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] > 0.0).collect()
    }

    /// Smallest positive value, if any cell is damped.
    pub fn positive_infimum(&self) -> Option<f64> {
        self.values.iter().copied().filter(|&v| v > 0.0).reduce(f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

pub fn sample_damping(preset: &DampingPreset, mesh: &Mesh) -> Result<DampingField> {
    let values = match preset {
        DampingPreset::Profile(p) => mesh.cells().iter().map(|c| p.evaluate(c.point)).collect(),
        DampingPreset::Custom(v) => {
            if v.len() > mesh.n_cells() {
                return Err(Error::DimensionMismatch {
                    expected: mesh.n_cells(),
                    got: v.len(),
                });
            }
            let mut v = v.clone();
            v.resize(mesh.n_cells(), 0.0);
            v
        }
    };
    Ok(DampingField {
        values,
        preset: preset.clone(),
    })
}

/// Polar sampling grid for [`damping_ratio_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSampling {
    /// Samples cover the disk of this radius.
    pub extent: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

impl RatioSampling {
    pub fn new(extent: f64, n_radial: usize) -> Self {
        RatioSampling {
            extent,
            n_radial,
            n_angular: 64,
        }
    }

    fn radial_step(&self) -> f64 {
        self.extent / (self.n_radial.max(2) - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBound {
    /// Sampled `max |∇a|²/a`; `+∞` when the ratio blows up at the support
    /// edge.
    pub sup_ratio: f64,
    pub analytic_sup: Option<f64>,
    pub samples_used: usize,
}

/// Estimates `sup |∇a|²/a` with central differences of step half the
/// radial spacing. Points whose stencil touches `{a = 0}` are skipped,
/// which excludes a collar around the zero set.
pub fn damping_ratio_bound(profile: &DampingProfile, sampling: &RatioSampling) -> RatioBound {
    let (sup, used) = sampled_ratio_sup(&|p| profile.evaluate(p), sampling);
    // Refinement test: halve the spacing and see whether the supremum keeps
    // growing like the inverse distance to the zero set.
    let finer = RatioSampling {
        n_radial: 2 * sampling.n_radial - 1,
        ..*sampling
    };
    let sup = if used > 0 && diverges(&|p| profile.evaluate(p), &finer, sup) {
        f64::INFINITY
    } else {
        sup
    };
    RatioBound {
        sup_ratio: sup,
        analytic_sup: profile.analytic_ratio_sup(),
        samples_used: used,
    }
}

fn diverges(f: &dyn Fn(Vec2) -> f64, fine: &RatioSampling, coarse_sup: f64) -> bool {
    let (fine_sup, _) = sampled_ratio_sup(f, fine);
    // Bounded ratios change by O(h) under refinement; 1/dist growth
    // nearly doubles.
    coarse_sup > 0.0 && fine_sup > 1.5 * coarse_sup
}

pub(crate) fn sampled_ratio_sup(f: &dyn Fn(Vec2) -> f64, s: &RatioSampling) -> (f64, usize) {
    let dr = s.radial_step();
    let fd = 0.5 * dr;
    let mut sup: f64 = 0.0;
    let mut used = 0;
    for ir in 0..s.n_radial {
        let r = ir as f64 * dr;
        let n_ang = if ir == 0 { 1 } else { s.n_angular };
        for ia in 0..n_ang {
            let th = -PI + (ia as f64 + 0.5) * 2.0 * PI / n_ang as f64;
            let p = Vec2::new(r * th.cos(), r * th.sin());
            let a = f(p);
            if !(a > 0.0) {
                continue;
            }
            let ax = [f(p + Vec2::new(fd, 0.0)), f(p - Vec2::new(fd, 0.0))];
            let ay = [f(p + Vec2::new(0.0, fd)), f(p - Vec2::new(0.0, fd))];
            if ax.iter().chain(&ay).any(|&v| !(v > 0.0)) {
                continue;
            }
            let gx = (ax[0] - ax[1]) / (2.0 * fd);
            let gy = (ay[0] - ay[1]) / (2.0 * fd);
            sup = sup.max((gx * gx + gy * gy) / a);
            used += 1;
        }
    }
    (sup, used)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub point: Vec2,
    pub normal: Vec2,
    pub obstacle: bool,
    /// `(x − x⁰)·ν(x)`
    pub multiplier_flux: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricReport {
    pub covered: bool,
    pub samples: usize,
    pub violations: Vec<BoundarySample>,
}

/// Checks the geometric control condition for observer `x⁰`: every
/// boundary point with `(x − x⁰)·ν > 0` must be damped, and obstacle
/// boundaries must satisfy `(x − x⁰)·ν ≤ 0`.
///
/// Damping is read a relative distance `1e-9` inside the domain so that
/// profiles whose support ends exactly on the boundary count as active.
pub fn check_geometric_condition(
    domain: &DomainSpec,
    profile: &DampingProfile,
    observer: Vec2,
    n_boundary_samples: usize,
) -> GeometricReport {
    let inset = 1e-9 * domain.diameter();
    let mut violations = Vec::new();
    let mut samples = 0;
    for circle in domain.boundary_circles() {
        for j in 0..n_boundary_samples {
            let th = 2.0 * PI * (j as f64 + 0.5) / n_boundary_samples as f64;
            let point = Vec2::new(circle.radius * th.cos(), circle.radius * th.sin());
            let normal = circle.outward_normal(point).expect("boundary point away from origin");
            let flux = (point - observer).dot(normal);
            let damping = profile.evaluate(point - normal * inset);
            samples += 1;
            let ok = (flux <= 0.0 || damping > 0.0) && (!circle.obstacle || flux <= 0.0);
            if !ok {
                violations.push(BoundarySample {
                    point,
                    normal,
                    obstacle: circle.obstacle,
                    multiplier_flux: flux,
                    damping,
                });
            }
        }
    }
    GeometricReport {
        covered: violations.is_empty(),
        samples,
        violations,
    }
}
