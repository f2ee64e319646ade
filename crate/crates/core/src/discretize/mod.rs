//! Lattice discretization of the magnetic Robin quadratic form.

mod export;
mod form;
mod grid;

pub use export::{write_wavefunction_csv, GridDiagnostics};
pub use form::{
    assemble, assemble_shared, evaluate, gauge_transform, link_phase, AssembledForm, Evaluation, Link, WaveFunction,
};
pub use grid::{build_grid, disk_rect_area, Edge, Grid, NodeKind, Truncation, MIN_NODES_PER_AXIS};
