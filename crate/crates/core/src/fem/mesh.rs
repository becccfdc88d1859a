use std::io::{self, Write};

use super::FemError;

/// Computational domain: an axis-aligned box in 1–3 dimensions or the
/// Fichera cube `(−1,1)³ \ (−1,0]³`.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Fichera,
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain::Box { lo: vec![lo], hi: vec![hi] }
    }

    pub fn unit_square() -> Self {
        Domain::Box {
            lo: vec![0.0; 2],
            hi: vec![1.0; 2],
        }
    }

    pub fn unit_cube() -> Self {
        Domain::Box {
            lo: vec![0.0; 3],
            hi: vec![1.0; 3],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Fichera => 3,
        }
    }

    /// Bounding box `(lo, hi)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Fichera => (vec![-1.0; 3], vec![1.0; 3]),
        }
    }

    /// Whether a grid cell with this center is part of the domain.
    fn keeps_cell(&self, center: &[f64; 3]) -> bool {
        match self {
            Domain::Box { .. } => true,
            Domain::Fichera => !(center[0] < 0.0 && center[1] < 0.0 && center[2] < 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshSpec {
    pub domain: Domain,
    pub h: f64,
    /// 1 for linear (P1/Q1), 2 for quadratic (Q2) Lagrange elements.
    pub element_order: usize,
}

/// Where a boundary facet sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryLabel {
    /// Face `x_axis = lo` of the bounding box.
    Lower(usize),
    /// Face `x_axis = hi` of the bounding box.
    Upper(usize),
    /// Interior face exposed by a removed region, normal along `axis`.
    Reentrant(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    /// Mesh node indices, local tensor order with the first axis fastest.
    pub nodes: Vec<usize>,
    /// Lower corner.
    pub origin: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFacet {
    pub element: usize,
    pub axis: usize,
    /// 0 for the element's lower face along `axis`, 1 for the upper.
    pub side: usize,
    pub label: BoundaryLabel,
}

/// Uniform tensor-product mesh with cube cells of side `h`.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub element_order: usize,
    pub h: f64,
    /// Cells per axis of the bounding grid (1 for unused axes).
    pub cells: [usize; 3],
    pub vertices: Vec<[f64; 3]>,
    pub elements: Vec<Element>,
    pub boundary_facets: Vec<BoundaryFacet>,
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Local node indices lying on face `(axis, side)` of an element.
    pub fn facet_local_nodes(&self, axis: usize, side: usize) -> Vec<usize> {
        let k = self.element_order + 1;
        let n_local = k.pow(self.dim as u32);
        (0..n_local)
            .filter(|&a| super::basis::split(a, k, self.dim)[axis] == side * self.element_order)
            .collect()
    }

    /// Physical center of a boundary facet.
    pub fn facet_center(&self, f: &BoundaryFacet) -> [f64; 3] {
        let mut c = self.elements[f.element].origin;
        for (d, cd) in c.iter_mut().enumerate().take(self.dim) {
            *cd += if d == f.axis { f.side as f64 * self.h } else { 0.5 * self.h };
        }
        c
    }
}

/// Builds a uniform mesh; nodes are numbered lexicographically by grid
/// coordinate with the first axis fastest.
pub fn build_mesh(spec: &MeshSpec) -> Result<Mesh, FemError> {
    let order = spec.element_order;
    if order != 1 && order != 2 {
        return Err(FemError::UnsupportedElementOrder(order));
    }
    let h = spec.h;
    if !(h > 0.0) || !h.is_finite() {
        return Err(FemError::IncompatibleResolution(format!("mesh size {h} is not positive")));
    }
    let dim = spec.domain.dim();
    let (lo, hi) = spec.domain.bounds();
    let mut cells = [1usize; 3];
    for d in 0..dim {
        let len = hi[d] - lo[d];
        let c = len / h;
        let rc = c.round();
        if rc < 1.0 || (c - rc).abs() > 1e-9 * c.max(1.0) {
            return Err(FemError::IncompatibleResolution(format!(
                "h = {h} does not tile an edge of length {len}"
            )));
        }
        cells[d] = rc as usize;
    }
    if spec.domain == Domain::Fichera {
        // the removed octant must be a union of whole cells
        let half = cells[0] / 2;
        if cells[0] % 2 != 0 || half == 0 {
            return Err(FemError::IncompatibleResolution(format!(
                "h = {h} does not place the reentrant corner on the grid"
            )));
        }
    }
    let mut lo3 = [0.0; 3];
    lo3[..dim].copy_from_slice(&lo[..dim]);

    // active cells
    let ncell_total = cells[0] * cells[1] * cells[2];
    let mut active = vec![false; ncell_total];
    for (c, act) in active.iter_mut().enumerate() {
        let ci = split3(c, &cells);
        let mut center = [0.0; 3];
        for d in 0..dim {
            center[d] = lo3[d] + (ci[d] as f64 + 0.5) * h;
        }
        *act = spec.domain.keeps_cell(&center);
    }

    // grid nodes used by active cells
    let mut nodes_per = [1usize; 3];
    for d in 0..dim {
        nodes_per[d] = order * cells[d] + 1;
    }
    let ngrid = nodes_per[0] * nodes_per[1] * nodes_per[2];
    let k = order + 1;
    let n_local = k.pow(dim as u32);
    let local_offsets: Vec<[usize; 3]> = (0..n_local).map(|a| super::basis::split(a, k, dim)).collect();
    let mut used = vec![false; ngrid];
    for c in (0..ncell_total).filter(|&c| active[c]) {
        let ci = split3(c, &cells);
        for off in &local_offsets {
            used[grid_flat(&ci, off, order, &nodes_per)] = true;
        }
    }
    let mut compact = vec![usize::MAX; ngrid];
    let mut vertices = Vec::new();
    let hn = h / order as f64;
    for g in 0..ngrid {
        if used[g] {
            compact[g] = vertices.len();
            let gi = split3(g, &nodes_per);
            let mut x = [0.0; 3];
            for d in 0..dim {
                x[d] = lo3[d] + gi[d] as f64 * hn;
            }
            vertices.push(x);
        }
    }

    let mut elements = Vec::new();
    let mut cell_to_element = vec![usize::MAX; ncell_total];
    for c in (0..ncell_total).filter(|&c| active[c]) {
        let ci = split3(c, &cells);
        let nodes = local_offsets
            .iter()
            .map(|off| compact[grid_flat(&ci, off, order, &nodes_per)])
            .collect();
        let mut origin = [0.0; 3];
        for d in 0..dim {
            origin[d] = lo3[d] + ci[d] as f64 * h;
        }
        cell_to_element[c] = elements.len();
        elements.push(Element { nodes, origin });
    }

    let mut boundary_facets = Vec::new();
    for c in (0..ncell_total).filter(|&c| active[c]) {
        let ci = split3(c, &cells);
        for axis in 0..dim {
            for side in 0..2 {
                let at_edge = if side == 0 { ci[axis] == 0 } else { ci[axis] + 1 == cells[axis] };
                let label = if at_edge {
                    Some(if side == 0 {
                        BoundaryLabel::Lower(axis)
                    } else {
                        BoundaryLabel::Upper(axis)
                    })
                } else {
                    let mut nb = ci;
                    nb[axis] = if side == 0 { nb[axis] - 1 } else { nb[axis] + 1 };
                    let nbc = nb[0] + cells[0] * (nb[1] + cells[1] * nb[2]);
                    (!active[nbc]).then_some(BoundaryLabel::Reentrant(axis))
                };
                if let Some(label) = label {
                    boundary_facets.push(BoundaryFacet {
                        element: cell_to_element[c],
                        axis,
                        side,
                        label,
                    });
                }
            }
        }
    }

    Ok(Mesh {
        dim,
        element_order: order,
        h,
        cells,
        vertices,
        elements,
        boundary_facets,
    })
}

fn split3(mut idx: usize, n: &[usize; 3]) -> [usize; 3] {
    let i = idx % n[0];
    idx /= n[0];
    let j = idx % n[1];
    [i, j, idx / n[1]]
}

fn grid_flat(cell: &[usize; 3], off: &[usize; 3], order: usize, nodes_per: &[usize; 3]) -> usize {
    let g = [
        order * cell[0] + off[0],
        order * cell[1] + off[1],
        order * cell[2] + off[2],
    ];
    g[0] + nodes_per[0] * (g[1] + nodes_per[1] * g[2])
}

/// Writes nodal values as a CSV point cloud: `x[,y[,z]],name1,...`.
///
/// `node_of_row` maps each value row to a mesh node (e.g. the free DOFs).
pub fn write_point_cloud<W: Write>(
    mesh: &Mesh,
    node_of_row: &[usize],
    fields: &[(&str, &[f64])],
    mut w: W,
) -> io::Result<()> {
    let axes = ["x", "y", "z"];
    let mut header: Vec<&str> = axes[..mesh.dim].to_vec();
    header.extend(fields.iter().map(|(n, _)| *n));
    writeln!(w, "{}", header.join(","))?;
    for (row, &node) in node_of_row.iter().enumerate() {
        let x = mesh.vertices[node];
        let mut cols: Vec<String> = x[..mesh.dim].iter().map(|v| format!("{v:.16e}")).collect();
        cols.extend(fields.iter().map(|(_, vals)| format!("{:.16e}", vals[row])));
        writeln!(w, "{}", cols.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_counts() {
        let m = build_mesh(&MeshSpec {
            domain: Domain::interval(0.0, 1.0),
            h: 1.0 / 10.0,
            element_order: 1,
        })
        .unwrap();
        assert_eq!(m.num_elements(), 10);
        assert_eq!(m.num_nodes(), 11);
        assert_eq!(m.boundary_facets.len(), 2);
        assert_eq!(m.boundary_facets[0].label, BoundaryLabel::Lower(0));
        assert_eq!(m.boundary_facets[1].label, BoundaryLabel::Upper(0));
        assert!((m.vertices[10][0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_square_counts() {
        let m = build_mesh(&MeshSpec {
            domain: Domain::unit_square(),
            h: 0.25,
            element_order: 2,
        })
        .unwrap();
        assert_eq!(m.num_elements(), 16);
        assert_eq!(m.num_nodes(), 81);
        assert_eq!(m.boundary_facets.len(), 16);
        assert_eq!(m.elements[0].nodes.len(), 9);
        assert_eq!(m.facet_local_nodes(0, 1), vec![2, 5, 8]);
    }

    #[test]
    fn fichera_cell_and_node_counts() {
        let m = build_mesh(&MeshSpec {
            domain: Domain::Fichera,
            h: 0.5,
            element_order: 1,
        })
        .unwrap();
        assert_eq!(m.num_elements(), 56);
        // 5³ grid nodes minus those strictly inside the removed octant
        assert_eq!(m.num_nodes(), 125 - 8);
        let reentrant = m
            .boundary_facets
            .iter()
            .filter(|f| matches!(f.label, BoundaryLabel::Reentrant(_)))
            .count();
        assert_eq!(reentrant, 3 * 4);
        // outer surface: 6 faces of 16 minus 3 faces' missing quarter
        assert_eq!(m.boundary_facets.len() - reentrant, 6 * 16 - 3 * 4);
    }

    #[test]
    fn incompatible_resolution_rejected() {
        let r = build_mesh(&MeshSpec {
            domain: Domain::interval(0.0, 1.0),
            h: 0.3,
            element_order: 1,
        });
        assert!(matches!(r, Err(FemError::IncompatibleResolution(_))));
        let r = build_mesh(&MeshSpec {
            domain: Domain::Fichera,
            h: 2.0 / 3.0,
            element_order: 1,
        });
        assert!(matches!(r, Err(FemError::IncompatibleResolution(_))));
    }
}
