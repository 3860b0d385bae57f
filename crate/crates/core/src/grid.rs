//! Computational domains: uniform lattices over intervals, disks and boxes,
//! with the boundary-distance field and the truncation radius for exterior data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Disk,
    Box,
}

/// Uniform grid on a bounded domain. Interior nodes are the lattice points
/// `center + h * (j, k)` that lie strictly inside the geometry.
///
/// The lattice is anchored at the domain center, so the center itself is a
/// node whenever it is interior; 1D example: interval of half-length 1 with
/// `h = 0.5` has nodes `{-0.5, 0, 0.5}`.
#[derive(Debug, Clone)]
pub struct DomainGrid {
    pub dim: usize,
    pub kind: DomainKind,
    /// Half-length (interval), radius (disk), or half-widths per axis (box).
    pub extent: Vec<f64>,
    pub center: Vec<f64>,
    pub h: f64,
    /// Exterior data beyond this radius (from the center) is a single constant.
    pub r_trunc: f64,
    nodes: Vec<f64>, // dim-interleaved coordinates
    distance: Vec<f64>,
    // lattice index bookkeeping for O(1) point -> node lookup
    lat_min: [i64; 2],
    lat_size: [usize; 2],
    lat_to_node: Vec<i32>, // -1 when the lattice point is not interior
}

impl DomainGrid {
    pub fn n_nodes(&self) -> usize {
        self.distance.len()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes_flat(&self) -> &[f64] {
        &self.nodes
    }

    pub fn distance(&self, i: usize) -> f64 {
        self.distance[i]
    }

    pub fn distances(&self) -> &[f64] {
        &self.distance
    }

    /// Distance to the boundary, closed form per geometry; negative outside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self.kind {
            DomainKind::Interval => self.extent[0] - (x[0] - self.center[0]).abs(),
            DomainKind::Disk => {
                let dx = x[0] - self.center[0];
                let dy = x[1] - self.center[1];
                self.extent[0] - (dx * dx + dy * dy).sqrt()
            }
            DomainKind::Box => {
                let mut d = f64::INFINITY;
                for a in 0..self.dim {
                    d = d.min(self.extent[a] - (x[a] - self.center[a]).abs());
                }
                d
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) > 0.0
    }

    /// Radius of the largest ball centered at `center` inscribed in the domain.
    pub fn inradius(&self) -> f64 {
        match self.kind {
            DomainKind::Interval | DomainKind::Disk => self.extent[0],
            DomainKind::Box => self.extent.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            DomainKind::Interval | DomainKind::Disk => 2.0 * self.extent[0],
            DomainKind::Box => {
                2.0 * self.extent.iter().map(|e| e * e).sum::<f64>().sqrt()
            }
        }
    }

    pub fn radius_from_center(&self, x: &[f64]) -> f64 {
        let mut r2 = 0.0;
        for a in 0..self.dim {
            let d = x[a] - self.center[a];
            r2 += d * d;
        }
        r2.sqrt()
    }

    /// Node index of the lattice point at `x`, if `x` is an interior node.
    pub fn node_at(&self, x: &[f64]) -> Option<usize> {
        let mut idx = [0i64; 2];
        for a in 0..self.dim {
            let xi = (x[a] - self.center[a]) / self.h;
            let j = xi.round() as i64;
            // must sit on the lattice to within rounding noise
            if (xi - j as f64).abs() > 1e-9 {
                return None;
            }
            idx[a] = j;
        }
        self.lattice_node(idx[0], idx[1])
    }

    /// Node index of the lattice point with integer coordinates (j, k).
    pub fn lattice_node(&self, j: i64, k: i64) -> Option<usize> {
        for (a, &ja) in [j, k][..self.dim].iter().enumerate() {
            if ja < self.lat_min[a] || ja >= self.lat_min[a] + self.lat_size[a] as i64 {
                return None;
            }
        }
        let flat = if self.dim == 2 {
            (k - self.lat_min[1]) as usize * self.lat_size[0] + (j - self.lat_min[0]) as usize
        } else {
            (j - self.lat_min[0]) as usize
        };
        let v = self.lat_to_node[flat];
        if v < 0 {
            None
        } else {
            Some(v as usize)
        }
    }

    pub fn lattice_point(&self, j: i64, k: i64) -> [f64; 2] {
        let mut p = [0.0; 2];
        p[0] = self.center[0] + self.h * j as f64;
        if self.dim == 2 {
            p[1] = self.center[1] + self.h * k as f64;
        }
        p
    }
}

/// Builds a grid. `extent` takes one value for interval/disk, `dim` values for box.
pub fn build_grid(
    dim: usize,
    kind: DomainKind,
    extent: &[f64],
    center: &[f64],
    h: f64,
    r_trunc: f64,
) -> Result<DomainGrid> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidGrid(format!("dim must be 1 or 2, got {dim}")));
    }
    match kind {
        DomainKind::Interval if dim != 1 => {
            return Err(Error::InvalidGrid("interval requires dim = 1".into()))
        }
        DomainKind::Disk if dim != 2 => {
            return Err(Error::InvalidGrid("disk requires dim = 2".into()))
        }
        _ => {}
    }
    let n_ext = if kind == DomainKind::Box { dim } else { 1 };
    if extent.len() != n_ext {
        return Err(Error::InvalidGrid(format!(
            "expected {n_ext} extent value(s), got {}",
            extent.len()
        )));
    }
    if extent.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidGrid("extent must be positive".into()));
    }
    if center.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "expected {dim} center coordinate(s), got {}",
            center.len()
        )));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidGrid("h must be positive".into()));
    }
    let max_extent = extent.iter().cloned().fold(0.0, f64::max);
    if h >= max_extent {
        return Err(Error::InvalidGrid(format!("h = {h} must be smaller than extent {max_extent}")));
    }

    let mut g = DomainGrid {
        dim,
        kind,
        extent: extent.to_vec(),
        center: center.to_vec(),
        h,
        r_trunc,
        nodes: Vec::new(),
        distance: Vec::new(),
        lat_min: [0; 2],
        lat_size: [1; 2],
        lat_to_node: Vec::new(),
    };

    if r_trunc <= g.diameter() {
        return Err(Error::InvalidGrid(format!(
            "r_trunc = {r_trunc} must exceed the domain diameter {}",
            g.diameter()
        )));
    }

    // lattice bounding box
    let half = |a: usize| match kind {
        DomainKind::Box => g.extent[a],
        _ => g.extent[0],
    };
    let mut lat_min = [0i64; 2];
    let mut lat_size = [1usize; 2];
    for a in 0..dim {
        let m = (half(a) / h).ceil() as i64;
        lat_min[a] = -m;
        lat_size[a] = (2 * m + 1) as usize;
    }
    g.lat_min = lat_min;
    g.lat_size = lat_size;
    g.lat_to_node = vec![-1; lat_size[0] * lat_size[1].max(1)];

    let krange = if dim == 2 {
        lat_min[1]..lat_min[1] + lat_size[1] as i64
    } else {
        0..1
    };
    for k in krange {
        for j in lat_min[0]..lat_min[0] + lat_size[0] as i64 {
            let p = g.lattice_point(j, k);
            let d = g.signed_distance(&p[..dim]);
            if d > 0.0 {
                let idx = g.nodes.len() / dim;
                let flat = if dim == 2 {
                    (k - lat_min[1]) as usize * lat_size[0] + (j - lat_min[0]) as usize
                } else {
                    (j - lat_min[0]) as usize
                };
                g.lat_to_node[flat] = idx as i32;
                g.nodes.extend_from_slice(&p[..dim]);
                g.distance.push(d);
            }
        }
    }

    if g.n_nodes() < 3 {
        return Err(Error::InvalidGrid(format!(
            "grid has only {} interior node(s); refine h",
            g.n_nodes()
        )));
    }
    Ok(g)
}
