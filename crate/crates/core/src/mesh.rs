//! Structured conforming triangulations of period cells and bounded
//! waveguides.
//!
//! Every mesh is a tensor-product grid per region (strip, passage, room)
//! split into axis-aligned right triangles along SW–NE diagonals. The
//! passage span of the x-partition is spliced bitwise-identically into both
//! the strip and the room partitions, and vertices on shared interfaces are
//! reused by index, never matched by coordinate. Grids grade geometrically
//! toward the passage corners, where the solution has its corner layers.
//!
//! Refinement halves every partition interval, which for this family is
//! exactly uniform 4-way triangle refinement and preserves all structure
//! metadata (strip grid, splice indices) without any coordinate lookups.

use crate::geometry::{CellGeometry, Region};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Knobs controlling mesh density.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MeshControls<T> {
    /// Cells per region extent for the uniform directions.
    pub n_base: usize,
    /// Geometric grading factor in (0, 1); adjacent graded cells grow by `1/ratio`.
    pub grading_ratio: T,
    /// Hard cap on mesh vertices.
    pub vertex_cap: usize,
    /// Maximum height/width ratio of passage grid cells.
    pub aspect_limit: T,
}

impl<T: Real> Default for MeshControls<T> {
    fn default() -> Self {
        Self {
            n_base: 4,
            grading_ratio: T::lit(0.7),
            vertex_cap: 60_000,
            aspect_limit: T::lit(20.0),
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("vertex budget exceeded: mesh needs {needed} vertices, cap is {cap}")]
    VertexBudget { needed: usize, cap: usize },
    #[error("invalid mesh controls: {0}")]
    BadControls(String),
    #[error("waveguide must contain at least one cell")]
    NoCells,
}

/// `n + 1` points from `a` to `b`, endpoints exact.
pub fn uniform_partition<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    assert!(n >= 1 && b > a);
    let mut pts = Vec::with_capacity(n + 1);
    pts.push(a);
    let len = b - a;
    let nn = T::from_usize(n).unwrap();
    for i in 1..n {
        pts.push(a + len * T::from_usize(i).unwrap() / nn);
    }
    pts.push(b);
    pts
}

/// Geometrically graded points on `[a, b]`.
///
/// Cell widths start at `finest` at the fine end and grow by `1/ratio` per
/// cell, saturating at `coarsest`; the leftover is merged into the coarsest
/// cell when small, kept as its own cell otherwise. `fine_at_start` puts the
/// fine end at `a`, otherwise at `b`. Endpoints are exact.
pub fn graded_points<T: Real>(
    a: T,
    b: T,
    fine_at_start: bool,
    finest: T,
    coarsest: T,
    ratio: T,
) -> Vec<T> {
    assert!(b > a, "empty interval");
    assert!(finest > T::zero() && ratio > T::zero() && ratio < T::one());
    let coarsest = coarsest.max(finest);
    let len = b - a;
    let mut widths: Vec<T> = Vec::new();
    let mut sum = T::zero();
    let mut w = finest.min(len);
    while sum + w < len {
        widths.push(w);
        sum += w;
        w = (w / ratio).min(coarsest);
    }
    let rem = len - sum;
    match widths.last_mut() {
        None => widths.push(rem),
        Some(last) => {
            if rem < *last * T::half() {
                *last += rem;
            } else {
                widths.push(rem);
            }
        }
    }
    let mut pts = Vec::with_capacity(widths.len() + 1);
    if fine_at_start {
        pts.push(a);
        let mut acc = a;
        for &w in &widths[..widths.len() - 1] {
            acc += w;
            pts.push(acc);
        }
        pts.push(b);
    } else {
        pts.push(b);
        let mut acc = b;
        for &w in &widths[..widths.len() - 1] {
            acc -= w;
            pts.push(acc);
        }
        pts.push(a);
        pts.reverse();
    }
    debug_assert!(pts.windows(2).all(|p| p[1] > p[0]));
    pts
}

fn interleave_midpoints<T: Real>(p: &[T]) -> Vec<T> {
    if p.len() < 2 {
        return p.to_vec();
    }
    let mut out = Vec::with_capacity(2 * p.len() - 1);
    out.push(p[0]);
    for w in p.windows(2) {
        out.push((w[0] + w[1]) * T::half());
        out.push(w[1]);
    }
    out
}

/// Per-region 1-D partitions of one period cell, in the coordinates of the
/// first cell of the mesh. The passage x-span appears verbatim inside both
/// `strip_x` (between `pass_lo` and `pass_hi`) and `room_x` (between
/// `room_lo` and `room_hi`).
#[derive(Clone, Debug)]
pub struct CellPartitions<T> {
    pub strip_x: Vec<T>,
    pub strip_y: Vec<T>,
    pub pass_lo: usize,
    pub pass_hi: usize,
    pub passage_y: Vec<T>,
    pub room_x: Vec<T>,
    pub room_lo: usize,
    pub room_hi: usize,
    pub room_y: Vec<T>,
}

impl<T: Real> CellPartitions<T> {
    pub fn build(cell: &CellGeometry<T>, ctl: &MeshControls<T>) -> Result<Self, MeshError> {
        check_controls(ctl)?;
        let n = ctl.n_base;
        let nn = T::from_usize(n).unwrap();
        let strip_y = uniform_partition(cell.strip.y0, cell.strip.y1, n);
        match &cell.protuberance {
            None => Ok(Self {
                strip_x: uniform_partition(cell.strip.x0, cell.strip.x1, n),
                strip_y,
                pass_lo: 0,
                pass_hi: 0,
                passage_y: Vec::new(),
                room_x: Vec::new(),
                room_lo: 0,
                room_hi: 0,
                room_y: Vec::new(),
            }),
            Some(prot) => {
                let d = prot.passage.width();
                let h = prot.passage.height();
                let span = uniform_partition(prot.passage.x0, prot.passage.x1, 2);
                let ratio = ctl.grading_ratio;
                let coarse_s = cell.eps / nn;
                let left = graded_points(cell.strip.x0, prot.passage.x0, false, d, coarse_s, ratio);
                let right = graded_points(prot.passage.x1, cell.strip.x1, true, d, coarse_s, ratio);
                let mut strip_x = left;
                let pass_lo = strip_x.len() - 1;
                strip_x.extend_from_slice(&span[1..]);
                let pass_hi = strip_x.len() - 1;
                strip_x.extend_from_slice(&right[1..]);

                let coarse_r = prot.room.width() / nn;
                let rleft = graded_points(prot.room.x0, prot.passage.x0, false, d, coarse_r, ratio);
                let rright = graded_points(prot.passage.x1, prot.room.x1, true, d, coarse_r, ratio);
                let mut room_x = rleft;
                let room_lo = room_x.len() - 1;
                room_x.extend_from_slice(&span[1..]);
                let room_hi = room_x.len() - 1;
                room_x.extend_from_slice(&rright[1..]);

                // keep passage cells below the aspect cap: n_y >= 2h / (aspect * d)
                let ny_min = (T::two() * h / (ctl.aspect_limit * d)).ceil();
                let n_pass_y = ny_min.to_usize().unwrap_or(2).max(2);
                let passage_y = uniform_partition(prot.passage.y0, prot.passage.y1, n_pass_y);
                let room_y = uniform_partition(prot.room.y0, prot.room.y1, n);
                Ok(Self {
                    strip_x,
                    strip_y,
                    pass_lo,
                    pass_hi,
                    passage_y,
                    room_x,
                    room_lo,
                    room_hi,
                    room_y,
                })
            }
        }
    }

    /// Partitions with every interval split at its midpoint.
    pub fn halved(&self) -> Self {
        Self {
            strip_x: interleave_midpoints(&self.strip_x),
            strip_y: interleave_midpoints(&self.strip_y),
            pass_lo: self.pass_lo * 2,
            pass_hi: self.pass_hi * 2,
            passage_y: interleave_midpoints(&self.passage_y),
            room_x: interleave_midpoints(&self.room_x),
            room_lo: self.room_lo * 2,
            room_hi: self.room_hi * 2,
            room_y: interleave_midpoints(&self.room_y),
        }
    }

    fn decorated(&self) -> bool {
        !self.passage_y.is_empty()
    }

    /// Exact vertex count of a mesh over `n_cells` copies.
    fn vertex_count(&self, n_cells: usize) -> usize {
        let cols = n_cells * (self.strip_x.len() - 1) + 1;
        let mut count = cols * self.strip_y.len();
        if self.decorated() {
            let pass_cols = self.pass_hi - self.pass_lo + 1;
            let per_cell = pass_cols * (self.passage_y.len() - 1)
                + self.room_x.len() * self.room_y.len()
                - pass_cols;
            count += n_cells * per_cell;
        }
        count
    }
}

fn check_controls<T: Real>(ctl: &MeshControls<T>) -> Result<(), MeshError> {
    if ctl.n_base < 1 {
        return Err(MeshError::BadControls("n_base must be at least 1".into()));
    }
    if !(ctl.grading_ratio > T::zero() && ctl.grading_ratio < T::one()) {
        return Err(MeshError::BadControls(format!(
            "grading_ratio must lie in (0,1), got {}",
            ctl.grading_ratio
        )));
    }
    if !(ctl.aspect_limit >= T::one()) {
        return Err(MeshError::BadControls(format!(
            "aspect_limit must be >= 1, got {}",
            ctl.aspect_limit
        )));
    }
    if ctl.vertex_cap < 9 {
        return Err(MeshError::BadControls("vertex_cap too small".into()));
    }
    Ok(())
}

/// Tensor grid of the strip backbone: global x-lines (across all cells),
/// the shared y-lines, and the vertex id at each grid point.
#[derive(Clone, Debug)]
pub struct StripStructure<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    /// `vid[ix][iy]` is the vertex at `(x[ix], y[iy])`.
    pub vid: Vec<Vec<usize>>,
}

/// Quality summary of a triangulation.
#[derive(Clone, Copy, Debug)]
pub struct MeshQuality<T> {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub min_area: T,
    /// max over triangles of (longest edge)² / (2·area)
    pub max_aspect: T,
}

/// Conforming triangulation of one or more period cells.
#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    pub vertices: Vec<[T; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Region tag per triangle.
    pub regions: Vec<Region>,
    /// Index of the period cell each triangle belongs to.
    pub cell_of: Vec<usize>,
    /// Edges on the geometric boundary, as sorted vertex pairs.
    pub boundary_edges: Vec<[usize; 2]>,
    /// Left/right vertex identifications for quasi-periodic conditions
    /// (empty for bounded waveguides).
    pub periodic_pairs: Vec<(usize, usize)>,
    /// Structured view of the strip backbone.
    pub strip: StripStructure<T>,
    cells: Vec<CellGeometry<T>>,
    partitions: CellPartitions<T>,
    floquet: bool,
    controls: MeshControls<T>,
}

/// Mesh of a single period cell with left/right sides identified for
/// quasi-periodic boundary conditions.
pub fn triangulate<T: Real>(
    cell: &CellGeometry<T>,
    controls: &MeshControls<T>,
) -> Result<TriMesh<T>, MeshError> {
    let parts = CellPartitions::build(cell, controls)?;
    build_mesh(vec![*cell], parts, true, *controls)
}

/// Mesh of a bounded waveguide given as a row of translated cells; the
/// outer boundary is plain (Neumann), no identifications.
pub fn triangulate_waveguide<T: Real>(
    cells: &[CellGeometry<T>],
    controls: &MeshControls<T>,
) -> Result<TriMesh<T>, MeshError> {
    if cells.is_empty() {
        return Err(MeshError::NoCells);
    }
    let parts = CellPartitions::build(&cells[0], controls)?;
    build_mesh(cells.to_vec(), parts, false, *controls)
}

fn build_mesh<T: Real>(
    cells: Vec<CellGeometry<T>>,
    parts: CellPartitions<T>,
    floquet: bool,
    controls: MeshControls<T>,
) -> Result<TriMesh<T>, MeshError> {
    let needed = parts.vertex_count(cells.len());
    if needed > controls.vertex_cap {
        return Err(MeshError::VertexBudget {
            needed,
            cap: controls.vertex_cap,
        });
    }
    let nx_s = parts.strip_x.len();
    let ny_s = parts.strip_y.len();
    let base_x0 = cells[0].strip.x0;

    let mut vertices: Vec<[T; 2]> = Vec::with_capacity(needed);
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut regions: Vec<Region> = Vec::new();
    let mut cell_of: Vec<usize> = Vec::new();
    let mut strip_x_global: Vec<T> = Vec::new();
    let mut strip_vid: Vec<Vec<usize>> = Vec::new();
    let mut prev_last_col: Option<Vec<usize>> = None;

    for (cj, cell) in cells.iter().enumerate() {
        let dx = cell.strip.x0 - base_x0;
        // strip columns
        let mut cols: Vec<Vec<usize>> = Vec::with_capacity(nx_s);
        for ix in 0..nx_s {
            if ix == 0 {
                if let Some(shared) = prev_last_col.take() {
                    cols.push(shared);
                    continue;
                }
            }
            let x = parts.strip_x[ix] + dx;
            let col: Vec<usize> = parts
                .strip_y
                .iter()
                .map(|&y| {
                    vertices.push([x, y]);
                    vertices.len() - 1
                })
                .collect();
            cols.push(col);
        }
        let emit_quads = |cols: &[Vec<usize>],
                              region: Region,
                              triangles: &mut Vec<[usize; 3]>,
                              regions: &mut Vec<Region>,
                              cell_of: &mut Vec<usize>| {
            for ix in 0..cols.len() - 1 {
                let ny = cols[ix].len();
                for iy in 0..ny - 1 {
                    let sw = cols[ix][iy];
                    let se = cols[ix + 1][iy];
                    let ne = cols[ix + 1][iy + 1];
                    let nw = cols[ix][iy + 1];
                    triangles.push([sw, se, ne]);
                    triangles.push([sw, ne, nw]);
                    regions.push(region);
                    regions.push(region);
                    cell_of.push(cj);
                    cell_of.push(cj);
                }
            }
        };
        emit_quads(&cols, Region::Strip, &mut triangles, &mut regions, &mut cell_of);

        if cell.protuberance.is_some() && parts.decorated() {
            let npy = parts.passage_y.len();
            let mut pcols: Vec<Vec<usize>> = Vec::with_capacity(parts.pass_hi - parts.pass_lo + 1);
            for ix in parts.pass_lo..=parts.pass_hi {
                let x = parts.strip_x[ix] + dx;
                let mut col = Vec::with_capacity(npy);
                col.push(cols[ix][ny_s - 1]);
                for iy in 1..npy {
                    vertices.push([x, parts.passage_y[iy]]);
                    col.push(vertices.len() - 1);
                }
                pcols.push(col);
            }
            emit_quads(&pcols, Region::Passage, &mut triangles, &mut regions, &mut cell_of);

            let nxr = parts.room_x.len();
            let nyr = parts.room_y.len();
            let mut rcols: Vec<Vec<usize>> = Vec::with_capacity(nxr);
            for ix in 0..nxr {
                let x = parts.room_x[ix] + dx;
                let mut col = Vec::with_capacity(nyr);
                if ix >= parts.room_lo && ix <= parts.room_hi {
                    col.push(pcols[ix - parts.room_lo][npy - 1]);
                } else {
                    vertices.push([x, parts.room_y[0]]);
                    col.push(vertices.len() - 1);
                }
                for iy in 1..nyr {
                    vertices.push([x, parts.room_y[iy]]);
                    col.push(vertices.len() - 1);
                }
                rcols.push(col);
            }
            emit_quads(&rcols, Region::Room, &mut triangles, &mut regions, &mut cell_of);
        }

        for (ix, col) in cols.iter().enumerate() {
            if cj > 0 && ix == 0 {
                continue;
            }
            strip_x_global.push(parts.strip_x[ix] + dx);
            strip_vid.push(col.clone());
        }
        prev_last_col = Some(cols.last().unwrap().clone());
    }
    debug_assert_eq!(vertices.len(), needed);

    let periodic_pairs = if floquet {
        strip_vid[0]
            .iter()
            .zip(strip_vid.last().unwrap())
            .map(|(&l, &r)| (l, r))
            .collect()
    } else {
        Vec::new()
    };

    let boundary_edges = boundary_of(&triangles, vertices.len());

    Ok(TriMesh {
        vertices,
        triangles,
        regions,
        cell_of,
        boundary_edges,
        periodic_pairs,
        strip: StripStructure {
            x: strip_x_global,
            y: parts.strip_y.clone(),
            vid: strip_vid,
        },
        cells,
        partitions: parts,
        floquet,
        controls,
    })
}

fn boundary_of(triangles: &[[usize; 3]], _n_vertices: usize) -> Vec<[usize; 2]> {
    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(triangles.len() * 3);
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edges.push([a.min(b), a.max(b)]);
        }
    }
    edges.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < edges.len() {
        let mut j = i + 1;
        while j < edges.len() && edges[j] == edges[i] {
            j += 1;
        }
        if j - i == 1 {
            out.push(edges[i]);
        }
        i = j;
    }
    out
}

impl<T: Real> TriMesh<T> {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// The period cells this mesh covers.
    pub fn cells(&self) -> &[CellGeometry<T>] {
        &self.cells
    }

    pub fn eps(&self) -> T {
        self.cells[0].eps
    }

    pub fn is_floquet(&self) -> bool {
        self.floquet
    }

    /// Uniform 4-way refinement (every partition interval halved).
    pub fn refine(&self) -> Result<Self, MeshError> {
        build_mesh(
            self.cells.clone(),
            self.partitions.halved(),
            self.floquet,
            self.controls,
        )
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangles[t];
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let pc = self.vertices[c];
        ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])) * T::half()
    }

    pub fn quality(&self) -> MeshQuality<T> {
        let mut min_area = T::infinity();
        let mut max_aspect = T::zero();
        for t in 0..self.triangles.len() {
            let area = self.triangle_area(t);
            min_area = min_area.min(area);
            let [a, b, c] = self.triangles[t];
            let mut longest_sq = T::zero();
            for (p, q) in [(a, b), (b, c), (c, a)] {
                let dx = self.vertices[p][0] - self.vertices[q][0];
                let dy = self.vertices[p][1] - self.vertices[q][1];
                longest_sq = longest_sq.max(dx * dx + dy * dy);
            }
            max_aspect = max_aspect.max(longest_sq / (T::two() * area));
        }
        MeshQuality {
            vertex_count: self.n_vertices(),
            triangle_count: self.n_triangles(),
            min_area,
            max_aspect,
        }
    }

    /// Structural audit: positive orientation, conformity (every edge on one
    /// or two triangles), disc topology via Euler's formula, and region
    /// areas matching the geometry exactly.
    pub fn validate(&self) -> Result<(), String> {
        for t in 0..self.triangles.len() {
            if !(self.triangle_area(t) > T::zero()) {
                return Err(format!("triangle {t} is not positively oriented"));
            }
        }
        let mut edges: Vec<[usize; 2]> = Vec::with_capacity(self.triangles.len() * 3);
        for t in &self.triangles {
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                edges.push([a.min(b), a.max(b)]);
            }
        }
        edges.sort_unstable();
        let mut unique_edges = 0usize;
        let mut i = 0;
        while i < edges.len() {
            let mut j = i + 1;
            while j < edges.len() && edges[j] == edges[i] {
                j += 1;
            }
            if j - i > 2 {
                return Err(format!(
                    "edge {:?} shared by {} triangles",
                    edges[i],
                    j - i
                ));
            }
            unique_edges += 1;
            i = j;
        }
        let v = self.vertices.len() as isize;
        let e = unique_edges as isize;
        let f = self.triangles.len() as isize;
        if v - e + f != 1 {
            return Err(format!("Euler characteristic V-E+F = {} != 1", v - e + f));
        }
        let mut area = [T::zero(); 3];
        for t in 0..self.triangles.len() {
            let slot = match self.regions[t] {
                Region::Strip => 0,
                Region::Passage => 1,
                Region::Room => 2,
            };
            area[slot] += self.triangle_area(t);
        }
        let mut expect = [T::zero(); 3];
        for cell in &self.cells {
            expect[0] += cell.strip.area();
            if let Some(p) = &cell.protuberance {
                expect[1] += p.passage.area();
                expect[2] += p.room.area();
            }
        }
        for s in 0..3 {
            let scale = expect[s].max(T::one());
            if (area[s] - expect[s]).abs() > T::lit(1e-12) * scale {
                return Err(format!(
                    "region {s} area {} != geometric {}",
                    area[s], expect[s]
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::{QTarget, RoomSpec, ScalingLaw};

    fn decorated_cell(eps: f64) -> CellGeometry<f64> {
        let law = ScalingLaw::new(QTarget::Finite(1.0), 1.0).unwrap();
        let p = law.params_at(&RoomSpec::new(0.5, 0.5, 0.25), eps).unwrap();
        CellGeometry::from_params(&p)
    }

    #[test]
    fn plain_strip_counts() {
        let cell = CellGeometry::strip_only(1.0);
        let ctl = MeshControls {
            n_base: 2,
            ..MeshControls::default()
        };
        let mesh = triangulate(&cell, &ctl).unwrap();
        assert_eq!(mesh.n_vertices(), 9);
        assert_eq!(mesh.n_triangles(), 8);
        assert_eq!(mesh.boundary_edges.len(), 8);
        assert_eq!(mesh.periodic_pairs.len(), 3);
        mesh.validate().unwrap();
    }

    #[test]
    fn refine_multiplies_triangles_by_four() {
        let cell = CellGeometry::strip_only(1.0);
        let ctl = MeshControls {
            n_base: 2,
            ..MeshControls::default()
        };
        let mesh = triangulate(&cell, &ctl).unwrap();
        let fine = mesh.refine().unwrap();
        assert_eq!(fine.n_triangles(), 4 * mesh.n_triangles());
        assert_eq!(fine.boundary_edges.len(), 2 * mesh.boundary_edges.len());
        assert_eq!(fine.n_vertices(), 25);
        assert_eq!(fine.periodic_pairs.len(), 5);
        fine.validate().unwrap();
    }

    #[test]
    fn decorated_cell_mesh_is_conforming() {
        let mesh = triangulate(&decorated_cell(0.2), &MeshControls::default()).unwrap();
        mesh.validate().unwrap();
        // all three regions present
        use crate::geometry::Region::*;
        for want in [Strip, Passage, Room] {
            assert!(mesh.regions.iter().any(|&r| r == want), "{want:?} missing");
        }
        // The passage splice runs two columns of width d/2 through the strip,
        // so the strip cells under the passage are tall and thin by design:
        // aspect tops out near (eps/n_base)/(d/2), here 0.05/0.001 = 50.
        // These are axis-aligned right triangles (max angle 90 degrees), so
        // interpolation quality is governed by the leg lengths, not the ratio.
        let q = mesh.quality();
        assert!(q.min_area > 0.0);
        assert!(q.max_aspect > 1.0 && q.max_aspect <= 60.0, "aspect {}", q.max_aspect);
        // passage triangles individually respect the aspect cap
        for t in 0..mesh.n_triangles() {
            if mesh.regions[t] == crate::geometry::Region::Passage {
                let [a, b, c] = mesh.triangles[t];
                let mut longest_sq: f64 = 0.0;
                for (p, q) in [(a, b), (b, c), (c, a)] {
                    let dx = mesh.vertices[p][0] - mesh.vertices[q][0];
                    let dy = mesh.vertices[p][1] - mesh.vertices[q][1];
                    longest_sq = longest_sq.max(dx * dx + dy * dy);
                }
                let aspect = longest_sq / (2.0 * mesh.triangle_area(t));
                assert!(aspect <= 21.0, "passage aspect {aspect}");
            }
        }
        let fine = mesh.refine().unwrap();
        fine.validate().unwrap();
        assert_eq!(fine.n_triangles(), 4 * mesh.n_triangles());
    }

    #[test]
    fn passage_span_is_spliced_bitwise() {
        let mesh = triangulate(&decorated_cell(0.2), &MeshControls::default()).unwrap();
        let p = &mesh.partitions;
        for t in 0..=(p.pass_hi - p.pass_lo) {
            assert_eq!(p.strip_x[p.pass_lo + t], p.room_x[p.room_lo + t]);
        }
        let fine = p.halved();
        for t in 0..=(fine.pass_hi - fine.pass_lo) {
            assert_eq!(fine.strip_x[fine.pass_lo + t], fine.room_x[fine.room_lo + t]);
        }
    }

    #[test]
    fn waveguide_shares_interface_columns() {
        let cell = decorated_cell(0.2);
        let cells = crate::geometry::build_bounded_waveguide(1.0, &cell).unwrap();
        let mesh = triangulate_waveguide(&cells, &MeshControls::default()).unwrap();
        mesh.validate().unwrap();
        assert!(mesh.periodic_pairs.is_empty());
        let single = triangulate_waveguide(&cells[..1], &MeshControls::default()).unwrap();
        // shared interfaces: 4 duplicated columns removed
        assert_eq!(
            mesh.n_vertices(),
            5 * single.n_vertices() - 4 * mesh.strip.y.len()
        );
        // strip x-grid strictly increasing across cells
        assert!(mesh.strip.x.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn vertex_budget_is_enforced() {
        let ctl = MeshControls {
            vertex_cap: 20,
            ..MeshControls::default()
        };
        match triangulate(&decorated_cell(0.2), &ctl) {
            Err(MeshError::VertexBudget { needed, cap }) => {
                assert!(needed > cap);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn graded_points_respect_bounds() {
        let pts = graded_points(0.0, 1.0, true, 0.01, 0.25, 0.7);
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 1.0);
        let widths: Vec<f64> = pts.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(widths[0] <= 0.01 + 1e-15);
        for w in &widths {
            assert!(*w > 0.0 && *w <= 0.25 * 1.5 + 1e-15);
        }
        // mirrored variant is the exact reflection
        let rev = graded_points(0.0, 1.0, false, 0.01, 0.25, 0.7);
        let widths_rev: Vec<f64> = rev.windows(2).map(|w| w[1] - w[0]).collect();
        for (a, b) in widths.iter().zip(widths_rev.iter().rev()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn strip_structure_covers_grid() {
        let mesh = triangulate(&decorated_cell(0.2), &MeshControls::default()).unwrap();
        let s = &mesh.strip;
        assert_eq!(s.vid.len(), s.x.len());
        for (ix, col) in s.vid.iter().enumerate() {
            assert_eq!(col.len(), s.y.len());
            for (iy, &v) in col.iter().enumerate() {
                assert_eq!(mesh.vertices[v][0], s.x[ix]);
                assert_eq!(mesh.vertices[v][1], s.y[iy]);
            }
        }
    }
}
