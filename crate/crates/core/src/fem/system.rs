use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::{CsrMatrix, SpdFactor};
use crate::mesh::{BoundaryTag, TaggedMesh};

/// P1 stiffness matrix `∫∇φᵢ·∇φⱼ` of a counter-clockwise triangle.
pub fn element_stiffness(p: &[Point; 3]) -> [[f64; 3]; 3] {
    let area = crate::mesh::triangle_area(p[0], p[1], p[2]);
    let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
    let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    k
}

/// P1 mass matrix `∫φᵢφⱼ`.
pub fn element_mass(p: &[Point; 3]) -> [[f64; 3]; 3] {
    let area = crate::mesh::triangle_area(p[0], p[1], p[2]);
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    m
}

/// 1-D P1 mass on a boundary edge of length `len`, by 2-point Gauss.
pub fn edge_mass(len: f64) -> [[f64; 2]; 2] {
    let g = 0.5 / 3f64.sqrt();
    let mut m = [[0.0; 2]; 2];
    for s in [0.5 - g, 0.5 + g] {
        let phi = [1.0 - s, s];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += 0.5 * len * phi[i] * phi[j];
            }
        }
    }
    m
}

/// Assembled bilinear forms on one mesh, restricted to the free (non-Dirichlet)
/// degrees of freedom. Discrete fields are `Vec<f64>` indexed by free dof.
#[derive(Debug)]
pub struct FemSystem {
    mesh: Arc<TaggedMesh>,
    robin_coefficient: f64,
    sigma_weight: f64,
    free: Vec<usize>,
    dof_of_node: Vec<Option<usize>>,
    mass_full: CsrMatrix,
    mass: CsrMatrix,
    stiffness: CsrMatrix,
    robin: CsrMatrix,
    operator: CsrMatrix,
    warnings: Vec<String>,
    operator_factor: OnceLock<std::result::Result<SpdFactor, String>>,
    mass_factor: OnceLock<std::result::Result<SpdFactor, String>>,
    stiffness_factor: OnceLock<std::result::Result<SpdFactor, String>>,
}

/// Assembles M, A and the Robin boundary mass R (scaled by `sigma_weight`)
/// and eliminates Dirichlet nodes. The V-form operator is `S = A + a R`.
pub fn assemble(mesh: &TaggedMesh, robin_coefficient: f64, sigma_weight: f64) -> Result<FemSystem> {
    assemble_shared(Arc::new(mesh.clone()), robin_coefficient, sigma_weight)
}

pub fn assemble_shared(mesh: Arc<TaggedMesh>, robin_coefficient: f64, sigma_weight: f64) -> Result<FemSystem> {
    if !(robin_coefficient >= 0.0) || !robin_coefficient.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "robin coefficient a = {robin_coefficient} must be finite and non-negative"
        )));
    }
    if !(sigma_weight >= 0.0) || !sigma_weight.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma weight {sigma_weight} must be finite and non-negative"
        )));
    }
    let n = mesh.num_nodes();
    let mut tm = Vec::with_capacity(9 * mesh.num_triangles());
    let mut ta = Vec::with_capacity(9 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        let (km, ka) = (element_mass(&p), element_stiffness(&p));
        for i in 0..3 {
            for j in 0..3 {
                tm.push((tri[i], tri[j], km[i][j]));
                ta.push((tri[i], tri[j], ka[i][j]));
            }
        }
    }
    let mut tr = Vec::new();
    for (edge, len) in mesh.boundary_mass_support(BoundaryTag::Robin) {
        let me = edge_mass(len);
        for i in 0..2 {
            for j in 0..2 {
                tr.push((edge.nodes[i], edge.nodes[j], sigma_weight * me[i][j]));
            }
        }
    }
    let mass_full = CsrMatrix::from_triplets(n, n, &tm);
    let stiffness_full = CsrMatrix::from_triplets(n, n, &ta);
    let robin_full = CsrMatrix::from_triplets(n, n, &tr);

    let mut is_dirichlet = vec![false; n];
    for v in mesh.tagged_nodes(BoundaryTag::Dirichlet) {
        is_dirichlet[v] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&v| !is_dirichlet[v]).collect();
    let mut dof_of_node = vec![None; n];
    for (k, &v) in free.iter().enumerate() {
        dof_of_node[v] = Some(k);
    }
    let mass = mass_full.principal_submatrix(&free);
    let stiffness = stiffness_full.principal_submatrix(&free);
    let robin = robin_full.principal_submatrix(&free);
    let operator = stiffness.add_scaled(robin_coefficient, &robin);

    let mut warnings = Vec::new();
    let has_dirichlet = free.len() < n;
    if !has_dirichlet && (robin_coefficient == 0.0 || sigma_weight == 0.0 || robin.nnz() == 0) {
        warnings.push(
            "no Dirichlet boundary and no active Robin term: the V-norm degenerates and S is singular".to_string(),
        );
    }
    Ok(FemSystem {
        mesh,
        robin_coefficient,
        sigma_weight,
        free,
        dof_of_node,
        mass_full,
        mass,
        stiffness,
        robin,
        operator,
        warnings,
        operator_factor: OnceLock::new(),
        mass_factor: OnceLock::new(),
        stiffness_factor: OnceLock::new(),
    })
}

impl FemSystem {
    pub fn mesh(&self) -> &TaggedMesh {
        &self.mesh
    }

    pub fn shared_mesh(&self) -> Arc<TaggedMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn robin_coefficient(&self) -> f64 {
        self.robin_coefficient
    }

    pub fn sigma_weight(&self) -> f64 {
        self.sigma_weight
    }

    /// Number of free degrees of freedom.
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Mesh node of each free dof.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        self.dof_of_node[node]
    }

    pub fn has_dirichlet(&self) -> bool {
        self.free.len() < self.mesh.num_nodes()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Mass matrix on free dofs.
    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// Mass matrix on all nodes.
    pub fn mass_full(&self) -> &CsrMatrix {
        &self.mass_full
    }

    /// Stiffness matrix on free dofs.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    /// σ-weighted Robin boundary mass on free dofs.
    pub fn robin(&self) -> &CsrMatrix {
        &self.robin
    }

    /// `S = A + a R` on free dofs.
    pub fn operator(&self) -> &CsrMatrix {
        &self.operator
    }

    /// Nodal interpolant of `f` on the free dofs.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        let nodes = self.mesh.nodes();
        self.free.iter().map(|&v| f(nodes[v])).collect()
    }

    /// Nodal interpolant of `f` on every mesh node.
    pub fn interpolate_nodal(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        self.mesh.nodes().iter().map(|&p| f(p)).collect()
    }

    /// Nodal values on every mesh node, zero on Dirichlet nodes.
    pub fn expand(&self, field: &[f64]) -> Vec<f64> {
        assert_eq!(field.len(), self.dim());
        let mut out = vec![0.0; self.mesh.num_nodes()];
        for (&v, &x) in self.free.iter().zip(field) {
            out[v] = x;
        }
        out
    }

    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        assert_eq!(nodal.len(), self.mesh.num_nodes());
        self.free.iter().map(|&v| nodal[v]).collect()
    }

    /// Load vector `(f, φᵢ)` on free dofs for a source given at every node.
    pub fn load_nodal(&self, f: &[f64]) -> Vec<f64> {
        self.restrict(&self.mass_full.mul_vec(f))
    }

    /// Load vector for a source given on the free dofs (zero on Dirichlet nodes).
    pub fn load(&self, f: &[f64]) -> Vec<f64> {
        self.mass.mul_vec(f)
    }

    fn cached<'a>(
        cell: &'a OnceLock<std::result::Result<SpdFactor, String>>,
        matrix: &CsrMatrix,
        what: &str,
    ) -> Result<&'a SpdFactor> {
        cell.get_or_init(|| SpdFactor::new(matrix, what).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::Singular(e.clone()))
    }

    /// Cholesky factor of `S`, computed once.
    pub fn operator_factor(&self) -> Result<&SpdFactor> {
        if self.dim() == 0 {
            return Err(Error::Singular("every node is a Dirichlet node; there are no unknowns".into()));
        }
        let what = if self.has_dirichlet() {
            "S = A + aR".to_string()
        } else {
            format!(
                "S = A + aR with no Dirichlet boundary (a = {}, sigma weight = {})",
                self.robin_coefficient, self.sigma_weight
            )
        };
        // A semidefinite S can factor without a pivot failure, so the
        // degenerate layout is rejected up front.
        if !self.has_dirichlet() && (self.robin_coefficient == 0.0 || self.robin.max_abs() == 0.0) {
            return Err(Error::Singular(format!("{what} is singular: constants lie in its kernel")));
        }
        Self::cached(&self.operator_factor, &self.operator, &what)
    }

    /// Cholesky factor of the free-dof mass matrix.
    pub fn mass_factor(&self) -> Result<&SpdFactor> {
        Self::cached(&self.mass_factor, &self.mass, "mass matrix")
    }

    /// Cholesky factor of the free-dof stiffness matrix; needs a Dirichlet part.
    pub fn stiffness_factor(&self) -> Result<&SpdFactor> {
        if !self.has_dirichlet() {
            return Err(Error::Singular("stiffness matrix without Dirichlet boundary".into()));
        }
        Self::cached(&self.stiffness_factor, &self.stiffness, "stiffness matrix A")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle() {
        let p = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        let k = element_stiffness(&p);
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
        let m = element_mass(&p);
        for row in m {
            assert!((row.iter().sum::<f64>() - 0.5 / 3.0).abs() < 1e-15);
        }
        let e = edge_mass(0.3);
        assert!((e[0][0] - 0.1).abs() < 1e-15 && (e[0][1] - 0.05).abs() < 1e-15);
    }
}
