//! Legacy VTK ASCII writer for unstructured meshes with optional point and
//! cell data. Coordinates and values print in shortest round-trip form, so
//! a reparse recovers the exact f64 bits.

use std::fmt::Write as _;
use std::path::Path;

use fealcore::error::{FealError, Result};
use fealcore::mesh::Mesh;

/// A field attached to the mesh: nodal scalars, nodal vectors (padded to
/// three components in the file), or per-cell scalars.
#[derive(Clone, Debug)]
pub enum VtkField {
    PointScalar {
        name: String,
        values: Vec<f64>,
    },
    /// `values` holds GD components per node, interleaved.
    PointVector {
        name: String,
        values: Vec<f64>,
    },
    CellScalar {
        name: String,
        values: Vec<f64>,
    },
}

/// Render the mesh and fields as a legacy VTK ASCII string.
pub fn vtk_string(mesh: &Mesh, fields: &[VtkField]) -> Result<String> {
    let nn = mesh.num_nodes();
    let nc = mesh.num_cells();
    let gd = mesh.geo_dim();
    let nv = mesh.kind().num_vertices();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("fealcore export\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {nn} double");
    for k in 0..nn {
        let x = mesh.node().row(k);
        for j in 0..3 {
            if j > 0 {
                out.push(' ');
            }
            if j < gd {
                let _ = write!(out, "{}", x[j]);
            } else {
                out.push('0');
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "CELLS {nc} {}", nc * (nv + 1));
    for c in 0..nc {
        let _ = write!(out, "{nv}");
        for &v in mesh.cell().row(c) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "CELL_TYPES {nc}");
    let code = mesh.kind().vtk_code();
    for _ in 0..nc {
        let _ = writeln!(out, "{code}");
    }

    let point_fields: Vec<&VtkField> = fields
        .iter()
        .filter(|f| {
            matches!(
                f,
                VtkField::PointScalar { .. } | VtkField::PointVector { .. }
            )
        })
        .collect();
    let cell_fields: Vec<&VtkField> = fields
        .iter()
        .filter(|f| matches!(f, VtkField::CellScalar { .. }))
        .collect();

    if !point_fields.is_empty() {
        let _ = writeln!(out, "POINT_DATA {nn}");
        for field in point_fields {
            match field {
                VtkField::PointScalar { name, values } => {
                    if values.len() != nn {
                        return Err(FealError::ShapeMismatch {
                            expected: format!("{nn} nodal values"),
                            got: format!("{}", values.len()),
                        });
                    }
                    let _ = writeln!(out, "SCALARS {name} double 1");
                    out.push_str("LOOKUP_TABLE default\n");
                    for v in values {
                        let _ = writeln!(out, "{v}");
                    }
                }
                VtkField::PointVector { name, values } => {
                    if values.len() != nn * gd {
                        return Err(FealError::ShapeMismatch {
                            expected: format!("{} interleaved nodal components", nn * gd),
                            got: format!("{}", values.len()),
                        });
                    }
                    let _ = writeln!(out, "VECTORS {name} double");
                    for k in 0..nn {
                        for j in 0..3 {
                            if j > 0 {
                                out.push(' ');
                            }
                            if j < gd {
                                let _ = write!(out, "{}", values[k * gd + j]);
                            } else {
                                out.push('0');
                            }
                        }
                        out.push('\n');
                    }
                }
                VtkField::CellScalar { .. } => unreachable!(),
            }
        }
    }
    if !cell_fields.is_empty() {
        let _ = writeln!(out, "CELL_DATA {nc}");
        for field in cell_fields {
            if let VtkField::CellScalar { name, values } = field {
                if values.len() != nc {
                    return Err(FealError::ShapeMismatch {
                        expected: format!("{nc} cell values"),
                        got: format!("{}", values.len()),
                    });
                }
                let _ = writeln!(out, "SCALARS {name} double 1");
                out.push_str("LOOKUP_TABLE default\n");
                for v in values {
                    let _ = writeln!(out, "{v}");
                }
            }
        }
    }
    Ok(out)
}

/// Write the mesh and fields to a legacy VTK file.
pub fn export_vtk(mesh: &Mesh, fields: &[VtkField], path: &Path) -> Result<()> {
    let text = vtk_string(mesh, fields)?;
    std::fs::write(path, text)
        .map_err(|e| FealError::InvalidArgument(format!("writing {}: {e}", path.display())))
}
