use crate::error::{Error, Result};

/// Structured triangulation of `(−1, 1)²`.
///
/// Nodes are numbered row by row, `id = j (n + 1) + i` for the node at
/// `(−1 + 2i/n, −1 + 2j/n)`. Each cell is split along its rising diagonal
/// into two counterclockwise right triangles.
#[derive(Clone, Debug)]
pub struct Mesh {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    cells: usize,
    h_max_target: f64,
}

/// Builds the structured mesh with `n = ⌈2√2 / h_max⌉` cells per axis, so
/// that every edge (the cell diagonal being the longest) is at most `h_max`.
pub fn build_mesh(h_max: f64) -> Result<Mesh> {
    if !(h_max > 0.0) || !h_max.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "h_max must be positive, got {h_max}"
        )));
    }
    let ratio = 2.0 * std::f64::consts::SQRT_2 / h_max;
    // guard against 3.0000000000000004-style round-up
    let cells = ((ratio - 1e-9).ceil() as usize).max(1);
    let mut mesh = Mesh::structured(cells)?;
    mesh.h_max_target = h_max;
    Ok(mesh)
}

impl Mesh {
    pub fn structured(cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidArgument("mesh needs at least one cell".into()));
        }
        let n = cells;
        let h = 2.0 / n as f64;
        let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
        let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([-1.0 + h * i as f64, -1.0 + h * j as f64]);
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (p00, p10, p11, p01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([p00, p10, p11]);
                triangles.push([p00, p11, p01]);
            }
        }
        Ok(Self {
            nodes,
            triangles,
            boundary,
            cells: n,
            h_max_target: h * std::f64::consts::SQRT_2,
        })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[bool] {
        &self.boundary
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_boundary_nodes(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn h_max_target(&self) -> f64 {
        self.h_max_target
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| !self.boundary[i]).collect()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area of triangle `t` (positive for counterclockwise).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn max_edge_length(&self) -> f64 {
        (0..self.triangles.len())
            .flat_map(|t| {
                let p = self.triangle_coords(t);
                (0..3).map(move |k| {
                    let (a, b) = (p[k], p[(k + 1) % 3]);
                    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
                })
            })
            .fold(0.0, f64::max)
    }

    /// Evaluates the P1 function with nodal `values` at `point ∈ Ω̄`.
    pub fn interpolate(&self, values: &[f64], point: [f64; 2]) -> f64 {
        let n = self.cells;
        let h = 2.0 / n as f64;
        let locate = |c: f64| {
            let s = (c + 1.0) / h;
            let i = (s.floor().max(0.0) as usize).min(n - 1);
            (i, s - i as f64)
        };
        let (i, s) = locate(point[0]);
        let (j, r) = locate(point[1]);
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let (v00, v10, v11, v01) = (
            values[id(i, j)],
            values[id(i + 1, j)],
            values[id(i + 1, j + 1)],
            values[id(i, j + 1)],
        );
        if s >= r {
            v00 + s * (v10 - v00) + r * (v11 - v10)
        } else {
            v00 + r * (v01 - v00) + s * (v11 - v01)
        }
    }
}
