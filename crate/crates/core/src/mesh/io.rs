//! JSON persistence for meshes (`schema_version` 1).
//!
//! Besides the required keys, cells may carry `diameter` and `vertices`
//! and faces may carry `endpoints`; all three are written by [`save_mesh`]
//! and optional on load. `tau` may be omitted, in which case the face is
//! loaded without a transmissibility.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Cell, DomainSpec, Face, FaceKind, Mesh};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

pub const MESH_SCHEMA_VERSION: i64 = 1;

#[derive(Serialize, Deserialize)]
struct MeshFile {
    schema_version: i64,
    domain: DomainSpec,
    h: f64,
    cells: Vec<CellRecord>,
    faces: Vec<FaceRecord>,
}

#[derive(Serialize, Deserialize)]
struct CellRecord {
    id: usize,
    point: Vec2,
    area: f64,
    face_ids: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vec2>>,
}

#[derive(Serialize, Deserialize)]
struct FaceRecord {
    id: usize,
    kind: FaceKind,
    cell_k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cell_l: Option<usize>,
    measure: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    midpoint: Vec2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    endpoints: Option<[Vec2; 2]>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<i64>,
}

pub fn mesh_to_json(mesh: &Mesh) -> String {
    let file = MeshFile {
        schema_version: MESH_SCHEMA_VERSION,
        domain: *mesh.domain(),
        h: mesh.h(),
        cells: mesh
            .cells()
            .iter()
            .map(|c| CellRecord {
                id: c.id,
                point: c.point,
                area: c.area,
                face_ids: c.face_ids.clone(),
                diameter: Some(c.diameter),
                vertices: (!c.vertices.is_empty()).then(|| c.vertices.clone()),
            })
            .collect(),
        faces: mesh
            .faces()
            .iter()
            .map(|f| FaceRecord {
                id: f.id,
                kind: f.kind,
                cell_k: f.cell_k,
                cell_l: f.cell_l,
                measure: f.measure,
                tau: f.transmissibility.is_finite().then_some(f.transmissibility),
                midpoint: f.midpoint,
                endpoints: Some(f.endpoints),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("mesh serializes")
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn mesh_from_json(text: &str) -> Result<Mesh> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(parse_error)?;
    match probe.schema_version {
        Some(MESH_SCHEMA_VERSION) => {}
        Some(found) => {
            return Err(Error::SchemaVersion {
                found,
                expected: MESH_SCHEMA_VERSION,
            })
        }
        None => {
            return Err(Error::Schema {
                field: "schema_version".into(),
                message: "missing".into(),
            })
        }
    }
    let file: MeshFile = serde_json::from_str(text).map_err(parse_error)?;

    let faces: Vec<Face> = file
        .faces
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            if r.kind == FaceKind::Interior && r.cell_l.is_none() {
                return Err(Error::Schema {
                    field: format!("faces[{i}].cell_l"),
                    message: "required for interior faces".into(),
                });
            }
            let endpoints = match (r.endpoints, r.tau) {
                (Some(e), _) => e,
                (None, Some(_)) => [r.midpoint, r.midpoint],
                (None, None) => {
                    return Err(Error::Schema {
                        field: format!("faces[{i}]"),
                        message: "needs either `tau` or `endpoints`".into(),
                    })
                }
            };
            Ok(Face {
                id: r.id,
                kind: r.kind,
                cell_k: r.cell_k,
                cell_l: r.cell_l,
                measure: r.measure,
                transmissibility: r.tau.unwrap_or(f64::NAN),
                midpoint: r.midpoint,
                endpoints,
            })
        })
        .collect::<Result<_>>()?;

    let cells: Vec<Cell> = file
        .cells
        .into_iter()
        .map(|r| {
            let vertices = r.vertices.unwrap_or_default();
            let diameter = r.diameter.unwrap_or_else(|| {
                if vertices.len() >= 3 {
                    crate::geometry::diameter(&vertices)
                } else {
                    // Lower bound from the face midpoints.
                    let mids: Vec<Vec2> = r
                        .face_ids
                        .iter()
                        .filter_map(|&f| faces.get(f).map(|f| f.midpoint))
                        .collect();
                    crate::geometry::diameter(&mids)
                }
            });
            Cell {
                id: r.id,
                point: r.point,
                area: r.area,
                face_ids: r.face_ids,
                diameter,
                vertices,
            }
        })
        .collect();

    Mesh::from_parts(file.domain, cells, faces)
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, mesh_to_json(mesh)).map_err(|e| Error::io(path, e))
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    mesh_from_json(&text)
}
