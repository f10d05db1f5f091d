//! Admissible polygonal meshes for two-point-flux finite volumes.
//!
//! A [`Mesh`] is immutable once built. Cells carry their representative
//! point (the Voronoi generator for generated meshes), faces carry their
//! measure and transmissibility.

mod domain;
mod grid;
mod io;
mod voronoi;

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

pub use domain::{BoundaryCircle, DomainKind, DomainSpec};
pub use grid::PointGrid;
pub use io::{load_mesh, mesh_from_json, mesh_to_json, save_mesh, MESH_SCHEMA_VERSION};
pub use voronoi::{generate_mesh, generate_mesh_with_report, LloydReport, MeshOptions};

use crate::error::{Error, Result};
use crate::geometry::{self, point_segment_distance, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub point: Vec2,
    pub area: f64,
    pub face_ids: Vec<usize>,
    pub diameter: f64,
    /// Counter-clockwise polygon. May be empty for meshes loaded from files
    /// that did not store vertices.
    pub vertices: Vec<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: usize,
    pub kind: FaceKind,
    pub cell_k: usize,
    pub cell_l: Option<usize>,
    pub measure: f64,
    /// `NaN` until [`compute_transmissibilities`] has run.
    pub transmissibility: f64,
    pub midpoint: Vec2,
    /// Segment end points, counter-clockwise with respect to `cell_k`.
    pub endpoints: [Vec2; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    domain: DomainSpec,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    h: f64,
    id: u64,
}

/// One cell handed to [`Mesh::from_polygons`]: its point, its
/// counter-clockwise polygon, and for each polygon edge the neighbouring
/// cell (`None` for boundary edges).
#[derive(Debug, Clone)]
pub struct PolygonCell {
    pub point: Vec2,
    pub vertices: Vec<Vec2>,
    pub neighbors: Vec<Option<usize>>,
}

impl Mesh {
    /// Assembles a mesh from explicit polygons and computes face
    /// transmissibilities.
    pub fn from_polygons(domain: DomainSpec, polys: Vec<PolygonCell>) -> Result<Mesh> {
        let n = polys.len();
        for (i, p) in polys.iter().enumerate() {
            if p.vertices.len() != p.neighbors.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.vertices.len(),
                    got: p.neighbors.len(),
                });
            }
            if p.vertices.len() < 3 {
                return Err(Error::DegenerateCell {
                    cell: i,
                    area: 0.0,
                    threshold: 0.0,
                });
            }
            if let Some(&Some(j)) = p.neighbors.iter().find(|nb| matches!(nb, Some(j) if *j >= n || *j == i)) {
                return Err(Error::InvalidConfig(format!("cell {i} lists invalid neighbour {j}")));
            }
        }

        // Interior faces keyed by (low, high); geometry from the low cell when
        // both sides report the edge.
        let mut interior: BTreeMap<(usize, usize), (usize, [Vec2; 2])> = BTreeMap::new();
        for (i, p) in polys.iter().enumerate() {
            let m = p.vertices.len();
            for e in 0..m {
                if let Some(j) = p.neighbors[e] {
                    let key = (i.min(j), i.max(j));
                    let seg = [p.vertices[e], p.vertices[(e + 1) % m]];
                    match interior.get(&key) {
                        Some(&(owner, _)) if owner == key.0 => {}
                        _ => {
                            interior.insert(key, (i, seg));
                        }
                    }
                }
            }
        }

        let mut faces = Vec::new();
        let mut pair_face = BTreeMap::new();
        for (&(k, l), &(owner, seg)) in &interior {
            // Orient counter-clockwise with respect to cell_k = low index.
            let endpoints = if owner == k { seg } else { [seg[1], seg[0]] };
            let id = faces.len();
            pair_face.insert((k, l), id);
            faces.push(Face {
                id,
                kind: FaceKind::Interior,
                cell_k: k,
                cell_l: Some(l),
                measure: endpoints[0].dist(endpoints[1]),
                transmissibility: f64::NAN,
                midpoint: endpoints[0].midpoint(endpoints[1]),
                endpoints,
            });
        }

        let mut cells = Vec::with_capacity(n);
        for (i, p) in polys.into_iter().enumerate() {
            let m = p.vertices.len();
            let mut face_ids = Vec::with_capacity(m);
            for e in 0..m {
                match p.neighbors[e] {
                    Some(j) => {
                        let fid = pair_face[&(i.min(j), i.max(j))];
                        if !face_ids.contains(&fid) {
                            face_ids.push(fid);
                        }
                    }
                    None => {
                        let endpoints = [p.vertices[e], p.vertices[(e + 1) % m]];
                        let id = faces.len();
                        faces.push(Face {
                            id,
                            kind: FaceKind::Boundary,
                            cell_k: i,
                            cell_l: None,
                            measure: endpoints[0].dist(endpoints[1]),
                            transmissibility: f64::NAN,
                            midpoint: endpoints[0].midpoint(endpoints[1]),
                            endpoints,
                        });
                        face_ids.push(id);
                    }
                }
            }
            cells.push(Cell {
                id: i,
                point: p.point,
                area: geometry::signed_area(&p.vertices),
                face_ids,
                diameter: geometry::diameter(&p.vertices),
                vertices: p.vertices,
            });
        }
        // Interior faces seen from one side only still belong to both cells.
        for f in &faces {
            if let Some(l) = f.cell_l {
                for c in [f.cell_k, l] {
                    if !cells[c].face_ids.contains(&f.id) {
                        cells[c].face_ids.push(f.id);
                    }
                }
            }
        }

        compute_transmissibilities(Mesh::from_parts(domain, cells, faces)?)
    }

    /// Wraps already consistent cells and faces. Checks index ranges and
    /// recomputes `h` and the mesh id.
    pub fn from_parts(domain: DomainSpec, cells: Vec<Cell>, faces: Vec<Face>) -> Result<Mesh> {
        let n = cells.len();
        for (i, c) in cells.iter().enumerate() {
            if c.id != i {
                return Err(Error::Schema {
                    field: format!("cells[{i}].id"),
                    message: format!("expected {i}, found {}", c.id),
                });
            }
            if let Some(&bad) = c.face_ids.iter().find(|&&f| f >= faces.len()) {
                return Err(Error::Schema {
                    field: format!("cells[{i}].face_ids"),
                    message: format!("face {bad} out of range"),
                });
            }
        }
        for (i, f) in faces.iter().enumerate() {
            let bad_l = match (f.kind, f.cell_l) {
                (FaceKind::Interior, Some(l)) => l >= n || l == f.cell_k,
                (FaceKind::Boundary, None) => false,
                _ => true,
            };
            if f.id != i || f.cell_k >= n || bad_l {
                return Err(Error::Schema {
                    field: format!("faces[{i}]"),
                    message: "inconsistent id, kind or cell indices".into(),
                });
            }
        }
        let h = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        let id = fingerprint(&cells, &faces);
        Ok(Mesh {
            domain,
            cells,
            faces,
            h,
            id,
        })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Geometry fingerprint used to tie fields to the mesh they live on.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn total_area(&self) -> f64 {
        crate::functionals::pairwise_sum(&self.cells.iter().map(|c| c.area).collect::<Vec<_>>())
    }

    /// Area enclosed by the boundary faces (shoelace over the polygonal
    /// domain boundary).
    pub fn polygonal_domain_area(&self) -> f64 {
        let terms: Vec<f64> = self
            .faces
            .iter()
            .filter(|f| f.kind == FaceKind::Boundary)
            .map(|f| 0.5 * f.endpoints[0].cross(f.endpoints[1]))
            .collect();
        crate::functionals::pairwise_sum(&terms)
    }

    pub fn transmissibilities_ready(&self) -> bool {
        self.faces.iter().all(|f| f.transmissibility.is_finite())
    }

    pub(crate) fn require_transmissibilities(&self) -> Result<()> {
        match self.faces.iter().find(|f| !f.transmissibility.is_finite()) {
            Some(f) => Err(Error::MissingTransmissibility { face: f.id }),
            None => Ok(()),
        }
    }

    /// Cell points, in cell order.
    pub fn points(&self) -> Vec<Vec2> {
        self.cells.iter().map(|c| c.point).collect()
    }
}

fn fingerprint(cells: &[Cell], faces: &[Face]) -> u64 {
    let mut h = DefaultHasher::new();
    cells.len().hash(&mut h);
    faces.len().hash(&mut h);
    for c in cells {
        c.point.x.to_bits().hash(&mut h);
        c.point.y.to_bits().hash(&mut h);
        c.area.to_bits().hash(&mut h);
    }
    for f in faces {
        f.cell_k.hash(&mut h);
        f.cell_l.hash(&mut h);
        f.measure.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Fills every face's transmissibility: `m(σ)/|x_K − x_L|` inside,
/// `m(σ)/d(x_K, σ)` on the boundary.
pub fn compute_transmissibilities(mut mesh: Mesh) -> Result<Mesh> {
    for f in &mut mesh.faces {
        let xk = mesh.cells[f.cell_k].point;
        let d = match f.cell_l {
            Some(l) => xk.dist(mesh.cells[l].point),
            None => point_segment_distance(xk, f.endpoints[0], f.endpoints[1]),
        };
        if !(d > 0.0) {
            return Err(Error::ZeroDistance { face: f.id });
        }
        f.transmissibility = f.measure / d;
    }
    Ok(mesh)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub orthogonality_max: f64,
    pub area_defect: f64,
    pub pass: bool,
}

/// Measures how far the mesh is from two-point-flux admissibility.
///
/// `orthogonality_max` is the largest `|t·(x_L − x_K)| / |x_L − x_K|` over
/// interior faces with unit tangent `t`; `area_defect` compares the total
/// cell area with the analytic domain area.
pub fn validate_admissibility(mesh: &Mesh, tol: f64) -> AdmissibilityReport {
    let mut orth: f64 = 0.0;
    for f in &mesh.faces {
        let Some(l) = f.cell_l else { continue };
        let seg = f.endpoints[1] - f.endpoints[0];
        let len = seg.norm();
        if len == 0.0 {
            continue;
        }
        let tangent = seg * (1.0 / len);
        let d = mesh.cells[l].point - mesh.cells[f.cell_k].point;
        orth = orth.max(tangent.dot(d).abs() / d.norm());
    }
    let area = mesh.domain.area();
    let area_defect = (mesh.total_area() - area).abs() / area;
    AdmissibilityReport {
        orthogonality_max: orth,
        area_defect,
        pass: orth <= tol,
    }
}
