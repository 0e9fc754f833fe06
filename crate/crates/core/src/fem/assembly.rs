use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

/// P1 stiffness and mass matrices of a mesh.
#[derive(Clone, Debug)]
pub struct FemOperators {
    /// Stiffness of the weak Laplacian on all nodes, before boundary
    /// conditions.
    pub stiffness_full: CsrMatrix,
    /// Stiffness restricted to interior nodes (homogeneous Dirichlet rows
    /// and columns eliminated), in the order of `interior`.
    pub stiffness: CsrMatrix,
    /// Mass matrix on all nodes.
    pub mass: CsrMatrix,
    /// Global ids of the interior nodes.
    pub interior: Vec<usize>,
    /// Global id → position in `interior`.
    pub interior_index: Vec<Option<usize>>,
}

fn checked_area(p: &[[f64; 2]; 3]) -> Result<f64> {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    let scale = p
        .iter()
        .flat_map(|q| {
            p.iter()
                .map(move |r| (q[0] - r[0]).powi(2) + (q[1] - r[1]).powi(2))
        })
        .fold(0.0, f64::max);
    if !(area.abs() > 1e-14 * scale) {
        return Err(Error::InvalidArgument(format!("degenerate triangle {p:?}")));
    }
    Ok(area.abs())
}

/// `∫ ∇φ_a · ∇φ_b` over one triangle.
pub fn local_stiffness(p: &[[f64; 2]; 3]) -> Result<[[f64; 3]; 3]> {
    let area = checked_area(p)?;
    let grads: Vec<[f64; 2]> = (0..3)
        .map(|a| {
            let (j, k) = ((a + 1) % 3, (a + 2) % 3);
            [p[j][1] - p[k][1], p[k][0] - p[j][0]]
        })
        .collect();
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] = (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]) / (4.0 * area);
        }
    }
    Ok(out)
}

/// `∫ φ_a φ_b` over one triangle.
pub fn local_mass(p: &[[f64; 2]; 3]) -> Result<[[f64; 3]; 3]> {
    let area = checked_area(p)?;
    let mut out = [[area / 12.0; 3]; 3];
    for (a, row) in out.iter_mut().enumerate() {
        row[a] = area / 6.0;
    }
    Ok(out)
}

pub fn assemble_operators(mesh: &Mesh) -> Result<FemOperators> {
    let n = mesh.num_nodes();
    let mut k_trip = Vec::with_capacity(9 * mesh.triangles().len());
    let mut m_trip = Vec::with_capacity(9 * mesh.triangles().len());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let coords = mesh.triangle_coords(t);
        let ke = local_stiffness(&coords)?;
        let me = local_mass(&coords)?;
        for a in 0..3 {
            for b in 0..3 {
                k_trip.push((tri[a], tri[b], ke[a][b]));
                m_trip.push((tri[a], tri[b], me[a][b]));
            }
        }
    }
    let stiffness_full = CsrMatrix::from_triplets(n, n, &k_trip)?;
    let mass = CsrMatrix::from_triplets(n, n, &m_trip)?;
    let interior = mesh.interior_nodes();
    let mut interior_index = vec![None; n];
    for (pos, &g) in interior.iter().enumerate() {
        interior_index[g] = Some(pos);
    }
    let stiffness = stiffness_full.submatrix(&interior, &interior);
    Ok(FemOperators {
        stiffness_full,
        stiffness,
        mass,
        interior,
        interior_index,
    })
}
