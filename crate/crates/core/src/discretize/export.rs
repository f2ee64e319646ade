use std::io::Write;

use serde::Serialize;

use super::form::{AssembledForm, WaveFunction};
use super::grid::{Grid, NodeKind};
use crate::error::Result;

/// Summary of a discretization, for diagnostics output.
#[derive(Debug, Clone, Serialize)]
pub struct GridDiagnostics {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub nodes: usize,
    pub free_nodes: usize,
    pub histogram: Vec<(NodeKind, usize)>,
    pub edges: usize,
    pub links: usize,
    pub area: f64,
    pub surface: f64,
    pub magnetic: bool,
}

impl GridDiagnostics {
    pub fn of(grid: &Grid, form: Option<&AssembledForm>) -> Self {
        Self {
            dim: grid.dim,
            shape: grid.shape[..grid.dim].to_vec(),
            origin: grid.origin[..grid.dim].to_vec(),
            spacing: grid.spacing[..grid.dim].to_vec(),
            nodes: grid.len(),
            free_nodes: grid.free_count(),
            histogram: grid.histogram(),
            edges: grid.edges.len(),
            links: form.map_or(0, |f| f.links.len()),
            area: grid.area,
            surface: grid.surface_total(),
            magnetic: form.is_some_and(|f| !f.real),
        }
    }
}

/// Write a wave function as CSV with columns `x[,y],re,im,abs`.
pub fn write_wavefunction_csv<W: Write>(out: &mut W, grid: &Grid, psi: &WaveFunction) -> Result<()> {
    let header = if grid.dim == 1 { "x,re,im,abs" } else { "x,y,re,im,abs" };
    writeln!(out, "{header}")?;
    for (n, v) in psi.values.iter().enumerate() {
        if grid.kind[n] == NodeKind::Exterior {
            continue;
        }
        let x = grid.coords(n);
        let coords: Vec<String> = x.iter().map(|c| format!("{c:.12e}")).collect();
        writeln!(
            out,
            "{},{:.12e},{:.12e},{:.12e}",
            coords.join(","),
            v.re,
            v.im,
            v.norm()
        )?;
    }
    Ok(())
}
