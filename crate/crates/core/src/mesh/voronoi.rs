//! Voronoi meshing with Lloyd relaxation over signed-distance domains.
//!
//! Generators close to the boundary are mirrored across it, so the bisector
//! between a generator and its mirror image becomes a straight boundary
//! face tangent to the curved boundary. Each cell is the intersection of the
//! half-planes defined by nearby generators and mirror images, clipped
//! against the (inflated) bounding box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{DomainSpec, Mesh, PointGrid, PolygonCell};
use crate::error::{Error, Result};
use crate::geometry::{centroid, polar_moment_about, LabeledPolygon, Vec2};

/// Knobs for [`generate_mesh`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    pub n_cells: usize,
    pub seed: u64,
    pub lloyd_max_iters: usize,
    /// Stop once every generator is within this distance of its cell
    /// centroid.
    pub lloyd_tol: f64,
}

impl MeshOptions {
    /// Defaults: 200 Lloyd sweeps, tolerance `1e-3 * diameter / sqrt(n)`.
    pub fn new(domain: &DomainSpec, n_cells: usize, seed: u64) -> Self {
        MeshOptions {
            n_cells,
            seed,
            lloyd_max_iters: 200,
            lloyd_tol: 1e-3 * domain.diameter() / (n_cells.max(1) as f64).sqrt(),
        }
    }
}

/// Convergence history of the Lloyd iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LloydReport {
    /// Max generator-to-centroid distance, one entry per Voronoi sweep.
    pub max_displacement: Vec<f64>,
    /// Quantization energy `Σ_K ∫_K |x − x_K|² dx` per sweep.
    pub energy: Vec<f64>,
    pub converged: bool,
}

impl LloydReport {
    pub fn iterations(&self) -> usize {
        self.max_displacement.len().saturating_sub(1)
    }
}

pub fn generate_mesh(domain: &DomainSpec, opts: &MeshOptions) -> Result<Mesh> {
    generate_mesh_with_report(domain, opts).map(|(m, _)| m)
}

pub fn generate_mesh_with_report(domain: &DomainSpec, opts: &MeshOptions) -> Result<(Mesh, LloydReport)> {
    if opts.n_cells == 0 {
        return Err(Error::InvalidConfig("n_cells must be at least 1".into()));
    }
    let n = opts.n_cells;
    let mut generators = seed_points(domain, n, opts.seed)?;
    let spacing = (domain.area() / n as f64).sqrt();
    let mut report = LloydReport::default();

    let mut iter = 0;
    let cells = loop {
        let cells = voronoi_cells(domain, &generators, spacing);
        let moved: Vec<(Vec2, f64)> = cells
            .iter()
            .zip(&generators)
            .map(|(c, &g)| {
                if c.vertices.len() < 3 {
                    (g, 0.0)
                } else {
                    let ct = centroid(&c.vertices);
                    (ct, ct.dist(g))
                }
            })
            .collect();
        let dmax = moved.iter().map(|m| m.1).fold(0.0, f64::max);
        report.max_displacement.push(dmax);
        report.energy.push(
            cells
                .iter()
                .zip(&generators)
                .map(|(c, &g)| polar_moment_about(&c.vertices, g))
                .sum(),
        );
        if dmax <= opts.lloyd_tol {
            report.converged = true;
            break cells;
        }
        if iter >= opts.lloyd_max_iters {
            break cells;
        }
        for (g, (ct, _)) in generators.iter_mut().zip(moved) {
            *g = pull_inside(domain, ct, spacing);
        }
        iter += 1;
    };

    let threshold = 1e-12 * domain.area() / n as f64;
    let mut polys = Vec::with_capacity(n);
    for (i, (poly, &g)) in cells.into_iter().zip(&generators).enumerate() {
        let area = poly.area();
        if poly.len() < 3 || !(area >= threshold) {
            return Err(Error::DegenerateCell {
                cell: i,
                area,
                threshold,
            });
        }
        polys.push(PolygonCell {
            point: g,
            neighbors: poly
                .labels
                .iter()
                .map(|l| match l {
                    Site::Generator(j) => Some(*j),
                    Site::Mirror(_) | Site::Frame => None,
                })
                .collect(),
            vertices: poly.vertices,
        });
    }
    Ok((Mesh::from_polygons(*domain, polys)?, report))
}

fn seed_points(domain: &DomainSpec, n: usize, seed: u64) -> Result<Vec<Vec2>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bbox = domain.bounding_box();
    let max_attempts = 1000 * n + 10_000;
    let mut pts = Vec::with_capacity(n);
    let mut attempts = 0;
    while pts.len() < n {
        if attempts >= max_attempts {
            return Err(Error::Seeding {
                requested: n,
                attempts,
            });
        }
        attempts += 1;
        let p = Vec2::new(
            rng.gen_range(bbox.min.x..bbox.max.x),
            rng.gen_range(bbox.min.y..bbox.max.y),
        );
        if domain.contains(p) {
            pts.push(p);
        }
    }
    Ok(pts)
}

/// Centroids of boundary cells can poke out of the curved domain; nudge
/// them back so their mirror images stay outside.
fn pull_inside(domain: &DomainSpec, p: Vec2, spacing: f64) -> Vec2 {
    let margin = 1e-3 * spacing;
    let mut q = p;
    for circle in domain.boundary_circles() {
        let d = circle.signed_distance(q);
        if d > -margin {
            if let Some(nrm) = circle.outward_normal(q) {
                q = q - nrm * (d + margin);
            }
        }
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Site {
    Generator(usize),
    Mirror(usize),
    Frame,
}

/// Mirror images of generators within `1.5 * spacing` of a boundary circle
/// (capped at half the outer radius so very coarse meshes keep a fixed
/// point at the centre).
fn mirror_points(domain: &DomainSpec, generators: &[Vec2], spacing: f64) -> Vec<(Vec2, usize)> {
    let alpha = (1.5 * spacing).min(0.5 * domain.outer_radius());
    let mut out = Vec::new();
    for circle in domain.boundary_circles() {
        for (i, &g) in generators.iter().enumerate() {
            let d = circle.signed_distance(g);
            if d.abs() >= alpha {
                continue;
            }
            let Some(r) = circle.reflect(g) else { continue };
            if r.dist(g) <= 1e-12 * spacing || domain.signed_distance(r) <= 0.0 {
                continue;
            }
            out.push((r, i));
        }
    }
    out
}

/// Clipped Voronoi cell of every generator, with edge labels naming the
/// site on the other side.
fn voronoi_cells(domain: &DomainSpec, generators: &[Vec2], spacing: f64) -> Vec<LabeledPolygon<Site>> {
    let n = generators.len();
    let mirrors = mirror_points(domain, generators, spacing);
    let mut sites: Vec<Vec2> = generators.to_vec();
    sites.extend(mirrors.iter().map(|m| m.0));
    let frame = domain.bounding_box().inflate(0.01 * domain.diameter());
    let grid = PointGrid::new(sites, frame, spacing);
    let label = |j: usize| {
        if j < n {
            Site::Generator(j)
        } else {
            Site::Mirror(mirrors[j - n].1)
        }
    };

    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = generators[i];
            let mut poly = LabeledPolygon::rectangle(&frame, [Site::Frame; 4]);
            let mut candidates = Vec::new();
            let last = grid.max_ring(p);
            for k in 0..=last {
                candidates.clear();
                grid.for_each_in_ring(p, k, |j| candidates.push(j));
                let reach = 2.0 * poly.max_radius(p);
                for &j in &candidates {
                    if j == i {
                        continue;
                    }
                    let q = grid.points()[j];
                    if q.dist(p) >= reach {
                        continue;
                    }
                    poly.clip(p.midpoint(q), q - p, label(j));
                }
                // All sites within k * cell of p are processed; farther ones
                // cannot cut the polygon.
                if k as f64 * grid.cell_size() >= 2.0 * poly.max_radius(p) {
                    break;
                }
            }
            poly
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::convex_contains_strict;
    use crate::mesh::{validate_admissibility, FaceKind};

    #[test]
    fn single_cell_converges_to_centre() {
        let d = DomainSpec::disk(1.0).unwrap();
        let (m, rep) = generate_mesh_with_report(&d, &MeshOptions::new(&d, 1, 5)).unwrap();
        assert_eq!(m.n_cells(), 1);
        let p = m.cells()[0].point;
        assert!(rep.converged, "{rep:?} {p:?}");
        assert!(p.norm() < 1e-9, "generator at {p:?}");
    }

    #[test]
    fn small_disk_mesh_is_consistent() {
        let d = DomainSpec::disk(10.0).unwrap();
        let m = generate_mesh(&d, &MeshOptions::new(&d, 120, 11)).unwrap();
        assert_eq!(m.n_cells(), 120);
        let rep = validate_admissibility(&m, 1e-9);
        assert!(rep.pass, "{rep:?}");
        let mut seen = vec![0usize; m.faces().len()];
        for c in m.cells() {
            assert!(c.area > 0.0 && c.diameter > 0.0);
            assert!(c.face_ids.len() >= 3);
            assert!(convex_contains_strict(&c.vertices, c.point));
            for &f in &c.face_ids {
                seen[f] += 1;
            }
        }
        for f in m.faces() {
            let expected = if f.kind == FaceKind::Interior { 2 } else { 1 };
            assert_eq!(seen[f.id], expected, "face {f:?}");
            assert!(f.transmissibility > 0.0 || f.measure == 0.0);
        }
        let poly = m.polygonal_domain_area();
        assert!((m.total_area() - poly).abs() <= 1e-12 * poly);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let d = DomainSpec::annulus(5.0, 20.0).unwrap();
        let opts = MeshOptions {
            lloyd_max_iters: 20,
            ..MeshOptions::new(&d, 300, 42)
        };
        let a = generate_mesh(&d, &opts).unwrap();
        let b = generate_mesh(&d, &opts).unwrap();
        assert_eq!(a, b);
        let c = generate_mesh(&d, &MeshOptions { seed: 43, ..opts }).unwrap();
        assert_ne!(a.id(), c.id());
    }

    #[test]
    fn zero_cells_rejected() {
        let d = DomainSpec::disk(1.0).unwrap();
        assert!(generate_mesh(&d, &MeshOptions::new(&d, 0, 0)).is_err());
    }
}
