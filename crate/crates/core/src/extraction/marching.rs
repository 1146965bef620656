//! Marching cubes over a [`ScalarGrid`].
//!
//! Cases are not tabulated. For each cell the iso-crossings on the six faces
//! are joined into directed segments, the segments chain into closed loops,
//! and each loop is fan-triangulated. Ambiguous faces always separate the
//! inside corners, so neighbouring cells agree on shared faces and the output
//! is closed wherever the surface does not leave the grid. This covers all
//! 256 corner configurations.

use std::collections::HashMap;

use crate::extraction::grid::ScalarGrid;
use crate::mesh::Mesh;

/// Corner `c` sits at offset `(c & 1, (c >> 1) & 1, c >> 2)`.
const CORNER_OFFSETS: [[usize; 3]; 8] =
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]];

/// Face corners, counter-clockwise seen from outside the cell.
const FACES: [[usize; 4]; 6] = [[0, 4, 6, 2], [1, 3, 7, 5], [0, 1, 5, 4], [2, 6, 7, 3], [0, 2, 3, 1], [4, 5, 7, 6]];

/// Local edge id for a corner pair (order-insensitive): lower corner and axis.
fn edge_id(a: usize, b: usize) -> usize {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let axis = (hi ^ lo).trailing_zeros() as usize;
    // 4 cell edges per axis, indexed by the lower corner's other two bits.
    let rest = match axis {
        0 => lo >> 1,
        1 => (lo & 1) | ((lo >> 2) << 1),
        _ => lo & 3,
    };
    axis * 4 + rest
}

/// Extracts the level set `iso` with linear edge interpolation. Vertices
/// below `iso` count as inside; normals point toward larger values. A grid
/// with no sign change yields an empty mesh.
pub fn marching_cubes(grid: &ScalarGrid, iso: f64) -> Mesh {
    let [nx, ny, nz] = grid.dims;
    let mut mesh = Mesh::default();
    if nx < 2 || ny < 2 || nz < 2 {
        return mesh;
    }
    let mut vertex_of: HashMap<u64, u32> = HashMap::new();
    let mut corner_vals = [0.0; 8];
    let mut local = [u32::MAX; 12];
    let mut next = [usize::MAX; 12];
    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let mut mask = 0u8;
                for (c, off) in CORNER_OFFSETS.iter().enumerate() {
                    let v = grid.get(i + off[0], j + off[1], k + off[2]);
                    corner_vals[c] = v;
                    if v < iso {
                        mask |= 1 << c;
                    }
                }
                if mask == 0 || mask == 0xff {
                    continue;
                }
                local.fill(u32::MAX);
                next.fill(usize::MAX);
                let inside = |c: usize| mask & (1 << c) != 0;
                for face in FACES {
                    // Walk the face; a segment starts where the walk enters
                    // the inside and ends where it next leaves.
                    let mut start = None;
                    let mut first_end = None;
                    for s in 0..4 {
                        let (a, b) = (face[s], face[(s + 1) % 4]);
                        match (inside(a), inside(b)) {
                            (false, true) => start = Some(edge_id(a, b)),
                            (true, false) => {
                                let e = edge_id(a, b);
                                match start.take() {
                                    Some(st) => next[st] = e,
                                    None => first_end = Some(e),
                                }
                            }
                            _ => {}
                        }
                    }
                    if let (Some(st), Some(e)) = (start, first_end) {
                        next[st] = e;
                    }
                }
                for e in 0..12 {
                    if next[e] != usize::MAX && local[e] == u32::MAX {
                        local[e] = edge_vertex(grid, iso, [i, j, k], e, &corner_vals, &mut vertex_of, &mut mesh);
                    }
                }
                for startv in 0..12 {
                    if next[startv] == usize::MAX {
                        continue;
                    }
                    let mut lp = Vec::with_capacity(12);
                    let mut e = startv;
                    while next[e] != usize::MAX {
                        lp.push(local[e]);
                        let n = next[e];
                        next[e] = usize::MAX;
                        e = n;
                    }
                    for t in 1..lp.len().saturating_sub(1) {
                        mesh.triangles.push([lp[0], lp[t], lp[t + 1]]);
                    }
                }
            }
        }
    }
    mesh
}

fn edge_vertex(
    grid: &ScalarGrid,
    iso: f64,
    cell: [usize; 3],
    e: usize,
    vals: &[f64; 8],
    vertex_of: &mut HashMap<u64, u32>,
    mesh: &mut Mesh,
) -> u32 {
    let axis = e / 4;
    let rest = e % 4;
    let lo = match axis {
        0 => rest << 1,
        1 => (rest & 1) | ((rest >> 1) << 2),
        _ => rest,
    };
    let hi = lo | (1 << axis);
    let o = CORNER_OFFSETS[lo];
    let (gi, gj, gk) = (cell[0] + o[0], cell[1] + o[1], cell[2] + o[2]);
    let key = grid.index(gi, gj, gk) as u64 * 3 + axis as u64;
    *vertex_of.entry(key).or_insert_with(|| {
        let (a, b) = (vals[lo], vals[hi]);
        let t = ((iso - a) / (b - a)).clamp(0.0, 1.0);
        let mut p = grid.position(gi, gj, gk);
        p[axis] += t * grid.spacing;
        mesh.vertices.push(p);
        (mesh.vertices.len() - 1) as u32
    })
}

/// Signed volume enclosed by a closed, consistently oriented mesh.
pub fn enclosed_volume(mesh: &Mesh) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|v| mesh.vertices[v as usize]);
            a.dot(&b.cross(&c)) / 6.0
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;
    use proptest::prelude::*;

    fn cell_grid(mask: u8) -> ScalarGrid {
        let mut vals = vec![0.0; 8];
        for (c, o) in CORNER_OFFSETS.iter().enumerate() {
            vals[o[0] + 2 * o[1] + 4 * o[2]] = if mask & (1 << c) != 0 { -1.0 } else { 1.0 };
        }
        ScalarGrid::new([2, 2, 2], Vec3::zeros(), 1.0, vals).unwrap()
    }

    #[test]
    fn edge_ids_are_a_bijection() {
        let mut seen = [false; 12];
        for a in 0..8 {
            for bit in 0..3 {
                let b = a ^ (1 << bit);
                if a < b {
                    let e = edge_id(a, b);
                    assert!(!seen[e]);
                    seen[e] = true;
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn constant_grid_is_empty() {
        assert!(marching_cubes(&cell_grid(0), 0.0).is_empty());
        assert!(marching_cubes(&cell_grid(0xff), 0.0).is_empty());
    }

    #[test]
    fn single_corner_gives_one_triangle() {
        let m = marching_cubes(&cell_grid(1), 0.0);
        assert_eq!(m.triangles.len(), 1);
        assert_eq!(m.vertices.len(), 3);
        // Midpoints of the three edges at the origin corner.
        for v in &m.vertices {
            assert!((v.sum() - 0.5).abs() < 1e-12);
        }
        let [a, b, c] = m.triangle(0);
        let n = (b - a).cross(&(c - a));
        assert!(n.dot(&Vec3::repeat(1.0)) > 0.0, "normal must point away from the inside corner");
    }

    proptest! {
        // Every configuration: each vertex has a matching in/out degree,
        // normals face the positive side and each loop is a disk.
        #[test]
        fn every_case_is_consistent(mask in 1u8..255) {
            let m = marching_cubes(&cell_grid(mask), 0.0);
            prop_assert!(!m.is_empty());
            let topo = m.topology();
            prop_assert_eq!(topo.non_manifold_edges, 0);
            prop_assert_eq!(topo.misoriented_edges, 0);
            let g = cell_grid(mask);
            for t in 0..m.triangles.len() {
                let [a, b, c] = m.triangle(t);
                let centroid = (a + b + c) / 3.0;
                let n = (b - a).cross(&(c - a));
                // Trilinear gradient at the centroid.
                let grad = trilinear_gradient(&g, &centroid);
                prop_assert!(n.dot(&grad) >= -1e-12);
            }
        }
    }

    fn trilinear_gradient(g: &ScalarGrid, p: &Vec3) -> Vec3 {
        let h = 1e-6;
        let f = |q: Vec3| {
            let mut s = 0.0;
            for o in CORNER_OFFSETS {
                let w: f64 = (0..3).map(|a| if o[a] == 1 { q[a] } else { 1.0 - q[a] }).product();
                s += w * g.get(o[0], o[1], o[2]);
            }
            s
        };
        Vec3::new(
            f(p + Vec3::x() * h) - f(p - Vec3::x() * h),
            f(p + Vec3::y() * h) - f(p - Vec3::y() * h),
            f(p + Vec3::z() * h) - f(p - Vec3::z() * h),
        ) / (2.0 * h)
    }

    #[test]
    fn sphere_is_closed_genus_zero() {
        for res in [17, 64] {
            let g = ScalarGrid::sample_unit_cube(res, |p| p.norm() - 0.3).unwrap();
            let m = marching_cubes(&g, 0.0);
            let topo = m.topology();
            assert!(topo.is_closed(), "{topo:?}");
            assert!(topo.is_consistently_oriented());
            assert_eq!(topo.euler_characteristic(), 2);
            let vol = enclosed_volume(&m);
            let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.027;
            assert!(vol > 0.0 && (vol - exact).abs() / exact < 0.05, "{vol}");
        }
    }

    #[test]
    fn torus_has_genus_one() {
        let g = ScalarGrid::sample_unit_cube(64, |p| {
            let q = (p.x * p.x + p.z * p.z).sqrt() - 0.25;
            (q * q + p.y * p.y).sqrt() - 0.1
        })
        .unwrap();
        let topo = marching_cubes(&g, 0.0).topology();
        assert!(topo.is_closed());
        assert_eq!(topo.euler_characteristic(), 0);
    }

    #[test]
    fn sigmoid_level_matches_raw_level() {
        let alpha = 32.0;
        let g = ScalarGrid::sample_unit_cube(128, |p| p.norm() - 0.3).unwrap();
        let raw = marching_cubes(&g, 0.0);
        let sig = marching_cubes(&g.map(|v| crate::sigmoid::sigmoid(v, alpha)), 0.5);
        assert_eq!(raw.vertices.len(), sig.vertices.len());
        assert_eq!(raw.triangles, sig.triangles);
        let worst = raw.vertices.iter().zip(&sig.vertices).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(worst <= 1e-3 * g.spacing);
    }
}
