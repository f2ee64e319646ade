use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, Domain, GeometrySpec};

/// Minimum number of nodes per axis.
pub const MIN_NODES_PER_AXIS: usize = 8;

/// Classification of a lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Interior,
    /// On the physical boundary with a Robin (or Neumann) condition.
    Robin,
    /// On the physical boundary with a Dirichlet condition (value fixed to 0).
    Dirichlet,
    /// On the artificial truncation boundary (value fixed to 0).
    Truncation,
    /// Outside the domain; carries no unknown.
    Exterior,
}

impl NodeKind {
    /// Whether the node carries an unknown.
    pub fn is_free(self) -> bool {
        matches!(self, NodeKind::Interior | NodeKind::Robin)
    }

    /// Whether the value is pinned to zero.
    pub fn is_fixed(self) -> bool {
        matches!(self, NodeKind::Dirichlet | NodeKind::Truncation)
    }
}

/// A lattice edge between neighbouring nodes `a < b` along `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub axis: usize,
    /// Edge length times the measure of its dual face.  The kinetic term of
    /// the edge is `weight · |Δψ / spacing|²`.
    pub weight: f64,
}

/// Box that bounds the computation on unbounded domains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truncation {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Truncation {
    /// The cube `center + [−half_width, half_width]^d`.
    pub fn cube(center: &[f64], half_width: f64) -> Self {
        Self {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }
    }

    /// Box adapted to a half-space: `[−L, L]^{d−1} × [0, L]`.
    pub fn half_space(dim: usize, half_width: f64) -> Self {
        let mut lo = vec![-half_width; dim];
        let hi = vec![half_width; dim];
        lo[dim - 1] = 0.0;
        Self { lo, hi }
    }

    /// Scale every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|v| v * factor).collect(),
            hi: self.hi.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Uniform lattice over a domain (or its truncation) with quadrature data.
#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    pub dim: usize,
    /// Nodes per axis; the second entry is 1 in dimension one.
    pub shape: [usize; 2],
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub kind: Vec<NodeKind>,
    /// Volume quadrature weight per node.  The weights sum to `area`.
    pub weight: Vec<f64>,
    /// Boundary measure attached to each Robin node.
    pub surface: Vec<f64>,
    pub edges: Vec<Edge>,
    /// Measure of the discretized region.
    pub area: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.shape[0] * j
    }

    pub fn indices(&self, n: usize) -> (usize, usize) {
        (n % self.shape[0], n / self.shape[0])
    }

    /// Coordinates of node `n` as a `dim`-vector.
    pub fn coords(&self, n: usize) -> Vec<f64> {
        let (i, j) = self.indices(n);
        let x = self.origin[0] + i as f64 * self.spacing[0];
        if self.dim == 1 {
            vec![x]
        } else {
            vec![x, self.origin[1] + j as f64 * self.spacing[1]]
        }
    }

    pub fn is_free(&self, n: usize) -> bool {
        self.kind[n].is_free()
    }

    pub fn free_count(&self) -> usize {
        self.kind.iter().filter(|k| k.is_free()).count()
    }

    /// Node counts per classification.
    pub fn histogram(&self) -> Vec<(NodeKind, usize)> {
        let kinds = [
            NodeKind::Interior,
            NodeKind::Robin,
            NodeKind::Dirichlet,
            NodeKind::Truncation,
            NodeKind::Exterior,
        ];
        kinds
            .iter()
            .map(|k| (*k, self.kind.iter().filter(|x| *x == k).count()))
            .collect()
    }

    /// Total Robin surface measure.
    pub fn surface_total(&self) -> f64 {
        self.surface.iter().sum()
    }

    /// Smallest lattice spacing.
    pub fn min_spacing(&self) -> f64 {
        if self.dim == 1 {
            self.spacing[0]
        } else {
            self.spacing[0].min(self.spacing[1])
        }
    }
}

fn axis_nodes(len: f64, spacing: f64, axis: usize) -> Result<(usize, f64)> {
    let n = (len / spacing).round() as usize + 1;
    if n < MIN_NODES_PER_AXIS {
        return Err(Error::DomainTooSmall { axis, nodes: n });
    }
    Ok((n, len / (n - 1) as f64))
}

/// Face types of a box-shaped computational region, per axis and side.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Face {
    Physical,
    Truncated,
}

/// Build the lattice for `spec` with the given spacing.  Unbounded domains
/// need a truncation box; bounded ones ignore it.
pub fn build_grid(spec: &GeometrySpec, spacing: f64, truncation: Option<&Truncation>) -> Result<Grid> {
    spec.validate()?;
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidArgument("spacing must be positive".into()));
    }
    if spec.dim > 2 {
        return Err(Error::InvalidArgument(
            "lattices are available in dimensions 1 and 2 only".into(),
        ));
    }
    let d = spec.dim;
    let need_trunc =
        || truncation.ok_or_else(|| Error::InvalidArgument("unbounded domain needs a truncation box".into()));
    let check_trunc = |t: &Truncation| -> Result<()> {
        if t.lo.len() != d || t.hi.len() != d || t.lo.iter().zip(&t.hi).any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidArgument("malformed truncation box".into()));
        }
        Ok(())
    };
    let dirichlet = matches!(spec.boundary, BoundaryCondition::Dirichlet);
    match &spec.domain {
        Domain::Disk { center, radius } => disk_grid(*center, *radius, spacing, dirichlet),
        Domain::Rectangle { lo, hi } => {
            let faces = vec![[Face::Physical, Face::Physical]; d];
            box_grid(lo, hi, &faces, spacing, dirichlet)
        }
        Domain::WholeSpace => {
            let t = need_trunc()?;
            check_trunc(t)?;
            let faces = vec![[Face::Truncated, Face::Truncated]; d];
            box_grid(&t.lo, &t.hi, &faces, spacing, dirichlet)
        }
        Domain::HalfSpace => {
            let t = need_trunc()?;
            check_trunc(t)?;
            let mut lo = t.lo.clone();
            let mut faces = vec![[Face::Truncated, Face::Truncated]; d];
            if lo[d - 1] <= 0.0 {
                lo[d - 1] = 0.0;
                faces[d - 1][0] = Face::Physical;
            }
            if !(t.hi[d - 1] > lo[d - 1]) {
                return Err(Error::InvalidArgument("truncation box misses the half-space".into()));
            }
            box_grid(&lo, &t.hi, &faces, spacing, dirichlet)
        }
        Domain::Strip { half_width } => {
            let t = need_trunc()?;
            check_trunc(t)?;
            let lo = vec![t.lo[0], -half_width];
            let hi = vec![t.hi[0], *half_width];
            let faces = vec![[Face::Truncated, Face::Truncated], [Face::Physical, Face::Physical]];
            box_grid(&lo, &hi, &faces, spacing, dirichlet)
        }
    }
}

fn box_grid(lo: &[f64], hi: &[f64], faces: &[[Face; 2]], spacing: f64, dirichlet: bool) -> Result<Grid> {
    let d = lo.len();
    let mut shape = [1usize; 2];
    let mut step = [1.0f64; 2];
    let mut origin = [0.0f64; 2];
    for k in 0..d {
        let (n, s) = axis_nodes(hi[k] - lo[k], spacing, k)?;
        shape[k] = n;
        step[k] = s;
        origin[k] = lo[k];
    }
    let total = shape[0] * shape[1];
    let mut kind = vec![NodeKind::Interior; total];
    let mut weight = vec![0.0; total];
    let mut surface = vec![0.0; total];

    // Which face (if any) a node index lies on, per axis.
    let side = |k: usize, i: usize| -> Option<usize> {
        if i == 0 {
            Some(0)
        } else if i + 1 == shape[k] {
            Some(1)
        } else {
            None
        }
    };
    let trap = |k: usize, i: usize| step[k] * if side(k, i).is_some() { 0.5 } else { 1.0 };

    for j in 0..shape[1] {
        for i in 0..shape[0] {
            let n = i + shape[0] * j;
            let idx = [i, j];
            let mut w = 1.0;
            let mut truncated = false;
            let mut physical = false;
            for k in 0..d {
                w *= trap(k, idx[k]);
                if let Some(s) = side(k, idx[k]) {
                    match faces[k][s] {
                        Face::Truncated => truncated = true,
                        Face::Physical => physical = true,
                    }
                }
            }
            weight[n] = w;
            kind[n] = if truncated {
                NodeKind::Truncation
            } else if physical {
                if dirichlet {
                    NodeKind::Dirichlet
                } else {
                    NodeKind::Robin
                }
            } else {
                NodeKind::Interior
            };
            if kind[n] == NodeKind::Robin {
                // Trapezoid measure along every physical face the node lies on.
                let mut sigma = 0.0;
                for k in 0..d {
                    if side(k, idx[k]).map(|s| faces[k][s]) == Some(Face::Physical) {
                        let mut face_measure = 1.0;
                        for m in 0..d {
                            if m != k {
                                face_measure *= trap(m, idx[m]);
                            }
                        }
                        sigma += face_measure;
                    }
                }
                surface[n] = sigma;
            }
        }
    }

    let mut edges = Vec::new();
    for j in 0..shape[1] {
        for i in 0..shape[0] {
            let idx = [i, j];
            for k in 0..d {
                if idx[k] + 1 >= shape[k] {
                    continue;
                }
                let a = i + shape[0] * j;
                let b = if k == 0 { a + 1 } else { a + shape[0] };
                let mut w = step[k];
                for m in 0..d {
                    if m != k {
                        w *= trap(m, idx[m]);
                    }
                }
                edges.push(Edge {
                    a,
                    b,
                    axis: k,
                    weight: w,
                });
            }
        }
    }
    let area = (0..d).map(|k| hi[k] - lo[k]).product();
    Ok(Grid {
        dim: d,
        shape,
        origin,
        spacing: step,
        kind,
        weight,
        surface,
        edges,
        area,
    })
}

/// `∫ √(R² − x²) dx` antiderivative.
fn circle_primitive(x: f64, r: f64) -> f64 {
    let x = x.clamp(-r, r);
    0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
}

/// Area of the intersection of the disk of radius `r` centred at the origin
/// with the rectangle `[x0, x1] × [y0, y1]`.
pub fn disk_rect_area(r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let a = x0.max(-r);
    let b = x1.min(r);
    if !(b > a) || !(y1 > y0) {
        return 0.0;
    }
    let mut breaks = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let xc = (r * r - y * y).sqrt();
            for x in [-xc, xc] {
                if x > a && x < b {
                    breaks.push(x);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for w in breaks.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let m = 0.5 * (u + v);
        let c = (r * r - m * m).max(0.0).sqrt();
        let upper_is_circle = c < y1;
        let lower_is_circle = -c > y0;
        let upper = if upper_is_circle { c } else { y1 };
        let lower = if lower_is_circle { -c } else { y0 };
        if upper <= lower {
            continue;
        }
        let circ = circle_primitive(v, r) - circle_primitive(u, r);
        let up = if upper_is_circle { circ } else { y1 * (v - u) };
        let low = if lower_is_circle { -circ } else { y0 * (v - u) };
        area += up - low;
    }
    area
}

fn disk_grid(center: [f64; 2], radius: f64, spacing: f64, dirichlet: bool) -> Result<Grid> {
    let (n_inner, s) = axis_nodes(2.0 * radius, spacing, 0)?;
    let n = n_inner + 2;
    let shape = [n, n];
    let origin = [center[0] - radius - s, center[1] - radius - s];
    let total = n * n;
    let pos = |i: usize| -> f64 { -radius - s + i as f64 * s }; // relative to centre
    let inside = |i: usize, j: usize| pos(i).hypot(pos(j)) <= radius * (1.0 + 1e-12);
    let index = |i: usize, j: usize| i + n * j;

    // Map each node to the free node that receives its cell's measure.
    let mut owner = vec![usize::MAX; total];
    for j in 0..n {
        for i in 0..n {
            if inside(i, j) {
                owner[index(i, j)] = index(i, j);
                continue;
            }
            let mut best: Option<(f64, usize)> = None;
            for reach in 1..=2i64 {
                for dj in -reach..=reach {
                    for di in -reach..=reach {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                            continue;
                        }
                        let (ii, jj) = (ii as usize, jj as usize);
                        if !inside(ii, jj) {
                            continue;
                        }
                        let dist = ((di * di + dj * dj) as f64).sqrt() + 1e-9 * pos(ii).hypot(pos(jj));
                        if best.is_none_or(|(bd, _)| dist < bd) {
                            best = Some((dist, index(ii, jj)));
                        }
                    }
                }
                if best.is_some() {
                    break;
                }
            }
            if let Some((_, m)) = best {
                owner[index(i, j)] = m;
            }
        }
    }

    let mut weight = vec![0.0; total];
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (pos(i), pos(j));
            let a = disk_rect_area(radius, x - 0.5 * s, x + 0.5 * s, y - 0.5 * s, y + 0.5 * s);
            if a > 0.0 {
                let m = owner[index(i, j)];
                if m == usize::MAX {
                    return Err(Error::DomainTooSmall {
                        axis: 0,
                        nodes: n_inner,
                    });
                }
                weight[m] += a;
            }
        }
    }

    // Arc length of the circle inside every cell.
    let mut surface = vec![0.0; total];
    let mut angles = vec![0.0, std::f64::consts::TAU];
    for k in 0..=n {
        let line = -radius - s + (k as f64 - 0.5) * s;
        if line.abs() < radius {
            let c = (line / radius).acos();
            let sn = (line / radius).asin();
            for t in [
                c,
                std::f64::consts::TAU - c,
                sn.rem_euclid(std::f64::consts::TAU),
                std::f64::consts::PI - sn,
            ] {
                angles.push(t.rem_euclid(std::f64::consts::TAU));
            }
        }
    }
    angles.sort_by(f64::total_cmp);
    for w in angles.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            continue;
        }
        let t = 0.5 * (w[0] + w[1]);
        let (x, y) = (radius * t.cos(), radius * t.sin());
        let i = ((x + radius + s) / s).round() as usize;
        let j = ((y + radius + s) / s).round() as usize;
        let m = owner[index(i.min(n - 1), j.min(n - 1))];
        if m != usize::MAX {
            surface[m] += radius * dt;
        }
    }

    let mut kind = vec![NodeKind::Exterior; total];
    for j in 0..n {
        for i in 0..n {
            let m = index(i, j);
            if inside(i, j) {
                kind[m] = if surface[m] > 0.0 {
                    if dirichlet {
                        NodeKind::Dirichlet
                    } else {
                        NodeKind::Robin
                    }
                } else {
                    NodeKind::Interior
                };
            }
        }
    }

    // Edges between inside nodes, weighted by the part of the dual face inside the disk.
    let chord = |line: f64, lo: f64, hi: f64| -> f64 {
        if line.abs() >= radius {
            return 0.0;
        }
        let c = (radius * radius - line * line).sqrt();
        (hi.min(c) - lo.max(-c)).max(0.0)
    };
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if !inside(i, j) {
                continue;
            }
            if i + 1 < n && inside(i + 1, j) {
                let len = chord(pos(i) + 0.5 * s, pos(j) - 0.5 * s, pos(j) + 0.5 * s);
                edges.push(Edge {
                    a: index(i, j),
                    b: index(i + 1, j),
                    axis: 0,
                    weight: s * len,
                });
            }
            if j + 1 < n && inside(i, j + 1) {
                let len = chord(pos(j) + 0.5 * s, pos(i) - 0.5 * s, pos(i) + 0.5 * s);
                edges.push(Edge {
                    a: index(i, j),
                    b: index(i, j + 1),
                    axis: 1,
                    weight: s * len,
                });
            }
        }
    }
    if dirichlet {
        surface.iter_mut().for_each(|v| *v = 0.0);
    }
    Ok(Grid {
        dim: 2,
        shape,
        origin,
        spacing: [s, s],
        kind,
        weight,
        surface,
        edges,
        area: std::f64::consts::PI * radius * radius,
    })
}
