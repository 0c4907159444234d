//! First-order (P1) finite elements on triangle meshes, with quasi-periodic
//! vertex identification.
//!
//! Quasi-periodicity `u(right) = e^{iφ} u(left)` is imposed by congruence:
//! right-side vertices are eliminated in favor of their left partners with a
//! phase factor, so the reduced stiffness/mass pair stays Hermitian. The
//! phase `e^{iφ}` is computed exactly at the two special points used by
//! every sweep (`φ = 0 → 1`, `φ = π → −1`).

use crate::geometry::Region;
use crate::linalg::CscMatrix;
use crate::mesh::TriMesh;
use crate::scalar::{Cplx, Real};

/// `e^{iφ}`, exact at `φ ∈ {0, π}`.
pub fn phase_factor<T: Real>(phi: T) -> Cplx<T> {
    if phi == T::zero() {
        Cplx::new(T::one(), T::zero())
    } else if phi == T::pi() {
        Cplx::new(-T::one(), T::zero())
    } else {
        Cplx::new(phi.cos(), phi.sin())
    }
}

/// Element stiffness matrix `K_e[i][j] = area · ∇λ_i · ∇λ_j`.
pub fn element_stiffness<T: Real>(p: &[[T; 2]; 3]) -> [[T; 3]; 3] {
    let b = [
        p[1][1] - p[2][1],
        p[2][1] - p[0][1],
        p[0][1] - p[1][1],
    ];
    let c = [
        p[2][0] - p[1][0],
        p[0][0] - p[2][0],
        p[1][0] - p[0][0],
    ];
    let twice_area = b[0] * c[1] - b[1] * c[0];
    // b0 c1 - b1 c0 = (y1-y2)(x0-x2) - (y2-y0)(x2-x1) = 2A for CCW triangles
    let scale = (T::lit(4.0) * (twice_area * T::half())).recip();
    let mut k = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) * scale;
        }
    }
    k
}

/// Element mass matrix `(area/12) · [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn element_mass<T: Real>(area: T) -> [[T; 3]; 3] {
    let off = area / T::lit(12.0);
    let diag = off * T::two();
    [
        [diag, off, off],
        [off, diag, off],
        [off, off, diag],
    ]
}

/// Vertex-to-reduced-DOF map after periodic identification.
#[derive(Clone, Debug)]
pub struct DofMap<T> {
    /// Reduced index per vertex.
    pub index: Vec<usize>,
    /// Phase factor per vertex: `u[v] = factor[v] · û[index[v]]`.
    pub factor: Vec<Cplx<T>>,
    pub n_reduced: usize,
}

/// Build the DOF map for a mesh at the given quasi-periodic phase factor.
/// Meshes without periodic pairs get the identity map.
pub fn dof_map<T: Real>(mesh: &TriMesh<T>, phase: Cplx<T>) -> DofMap<T> {
    let n = mesh.n_vertices();
    let one = Cplx::new(T::one(), T::zero());
    let mut partner = vec![usize::MAX; n];
    for &(left, right) in &mesh.periodic_pairs {
        partner[right] = left;
    }
    let mut index = vec![usize::MAX; n];
    let mut factor = vec![one; n];
    let mut next = 0usize;
    for v in 0..n {
        if partner[v] == usize::MAX {
            index[v] = next;
            next += 1;
        }
    }
    for v in 0..n {
        if partner[v] != usize::MAX {
            index[v] = index[partner[v]];
            factor[v] = phase;
        }
    }
    DofMap {
        index,
        factor,
        n_reduced: next,
    }
}

/// Assemble the reduced stiffness and mass matrices. Both come out of one
/// element loop and share their sparsity pattern exactly.
pub fn assemble<T: Real>(mesh: &TriMesh<T>, dofs: &DofMap<T>) -> (CscMatrix<T>, CscMatrix<T>) {
    let mut triplets: Vec<(usize, usize, Cplx<T>, Cplx<T>)> =
        Vec::with_capacity(mesh.n_triangles() * 9);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = [
            mesh.vertices[tri[0]],
            mesh.vertices[tri[1]],
            mesh.vertices[tri[2]],
        ];
        let ke = element_stiffness(&p);
        let me = element_mass(mesh.triangle_area(t));
        for i in 0..3 {
            let ri = dofs.index[tri[i]];
            let fi = dofs.factor[tri[i]].conj();
            for j in 0..3 {
                let rj = dofs.index[tri[j]];
                let w = fi * dofs.factor[tri[j]];
                triplets.push((
                    ri,
                    rj,
                    w * Cplx::new(ke[i][j], T::zero()),
                    w * Cplx::new(me[i][j], T::zero()),
                ));
            }
        }
    }
    CscMatrix::pair_from_triplets(dofs.n_reduced, dofs.n_reduced, &triplets)
}

/// Reduced load vector for a source given per (triangle, region, cell) at
/// each vertex. The source is interpolated linearly per element, which keeps
/// region-wise discontinuous sources exact on each side of an interface.
pub fn load_vector_by<T, F>(mesh: &TriMesh<T>, dofs: &DofMap<T>, f: F) -> Vec<Cplx<T>>
where
    T: Real,
    F: Fn(usize, Region, usize, [T; 2]) -> Cplx<T>,
{
    let zero = Cplx::new(T::zero(), T::zero());
    let mut load = vec![zero; dofs.n_reduced];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let region = mesh.regions[t];
        let cell = mesh.cell_of[t];
        let fe = [
            f(t, region, cell, mesh.vertices[tri[0]]),
            f(t, region, cell, mesh.vertices[tri[1]]),
            f(t, region, cell, mesh.vertices[tri[2]]),
        ];
        let me = element_mass(mesh.triangle_area(t));
        for i in 0..3 {
            let mut s = zero;
            for j in 0..3 {
                s += fe[j] * Cplx::new(me[i][j], T::zero());
            }
            load[dofs.index[tri[i]]] += dofs.factor[tri[i]].conj() * s;
        }
    }
    load
}

/// Expand a reduced vector back to vertex values.
pub fn expand<T: Real>(dofs: &DofMap<T>, reduced: &[Cplx<T>]) -> Vec<Cplx<T>> {
    (0..dofs.index.len())
        .map(|v| dofs.factor[v] * reduced[dofs.index[v]])
        .collect()
}

/// `∫ |u|²` over the triangles whose region satisfies the predicate,
/// computed exactly for the P1 interpolant through the element mass matrix.
pub fn mass_norm_sq_by<T, P>(mesh: &TriMesh<T>, u: &[Cplx<T>], pred: P) -> T
where
    T: Real,
    P: Fn(Region) -> bool,
{
    let mut total = T::zero();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if !pred(mesh.regions[t]) {
            continue;
        }
        let me = element_mass(mesh.triangle_area(t));
        for i in 0..3 {
            for j in 0..3 {
                total += (u[tri[i]].conj() * u[tri[j]]).re * me[i][j];
            }
        }
    }
    total
}
