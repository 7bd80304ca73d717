//! Spinning and twist-spinning arcs into closed surfaces in 4-space.
//!
//! Spinning revolves the upper half-space `{z ≥ 0}` about the boundary
//! plane `{z = 0}`: the point `(x, y, z)` sweeps the circle
//! `(x, y, z·cosθ, z·sinθ)` in `(x, y, u, v)` coordinates. An arc with
//! endpoints on the boundary plane sweeps a closed surface — a sphere
//! knotted the way the arc was.
//!
//! Twist-spinning additionally rotates the knotted part of the arc while
//! it spins: the vertices strictly inside a [`TwistBall`] are rigidly
//! rotated about the ball's axis by `n·θ` before the copy at angle `θ` is
//! emitted. The punctures sit on the axis, so every copy of the arc is
//! still continuous, and after a full revolution the interior has turned
//! exactly `n` times.
//!
//! The mesh layout is fixed and documented on [`spin`]: two pole vertices
//! and `m` rings of profile vertices, fans at the poles, and quad bands
//! split on the `(ring j, profile i) – (ring j+1, profile i+1)` diagonal.
//! All audits (closedness, orientation, Euler characteristic, embedding,
//! rotational symmetry) work on that explicit triangle list.

use crate::arc::{PolylineArc, TwistBall};
use crate::bvh::{within_radius_4d, Bvh};
use crate::geom::{pt_tri_dist, tri_tri_intersect_4d, Aabb4, Vec3, Vec4, EPS_INTERSECT};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use thiserror::Error;

/// Errors from surface construction and audits.
#[derive(Debug, Error, PartialEq)]
pub enum SpinError {
    /// Fewer rings than the minimum needed for a sane closed mesh.
    #[error("need at least {min} rings, got {got}")]
    TooFewRings { got: usize, min: usize },
    /// Twist-spinning needs the ring count to be a multiple of the twist
    /// count so a full revolution closes up exactly.
    #[error("ring count {rings} must be a multiple of twist count {twists}")]
    RingsNotMultiple { rings: usize, twists: usize },
    /// The arc violates the proper-embedding contract.
    #[error("arc is not properly embedded: {0}")]
    InvalidArc(&'static str),
    /// The twist ball does not match the arc it is used with.
    #[error("twist ball does not fit the arc: {0}")]
    BallMismatch(&'static str),
    /// The triangle list is not a closed surface mesh.
    #[error("malformed surface topology: {0}")]
    MalformedTopology(&'static str),
    /// Symmetry order must be at least 1.
    #[error("symmetry order must be at least 1, got {0}")]
    BadOrder(usize),
}

/// Closed triangulated surface in 4-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface4 {
    pub vertices: Vec<Vec4>,
    /// Oriented triangles as vertex-index triples.
    pub triangles: Vec<[u32; 3]>,
    /// Number of revolution rings the mesh was built with (0 when the
    /// mesh did not come from spinning).
    pub rings: usize,
}

/// Result of [`check_rotational_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// The order `k` that was tested (rotation by `2π/k` in the `(u, v)`
    /// plane).
    pub order_tested: usize,
    /// Largest distance from a rotated vertex to the original surface.
    /// When `exact_on_vertices` holds this is the largest vertex-matching
    /// error instead (a few ulps).
    pub max_deviation: f64,
    /// Whether every rotated vertex coincides with a mesh vertex within
    /// `1e-12` of the surface scale.
    pub exact_on_vertices: bool,
}

const MIN_RINGS: usize = 8;

fn check_arc_for_spin(arc: &PolylineArc) -> Result<(), SpinError> {
    let n = arc.vertices.len();
    if n < 4 {
        return Err(SpinError::InvalidArc("fewer than four vertices"));
    }
    if arc.vertices[0].z != 0.0 || arc.vertices[n - 1].z != 0.0 {
        return Err(SpinError::InvalidArc("endpoints must lie exactly on z = 0"));
    }
    if arc.vertices[1..n - 1].iter().any(|v| v.z <= 0.0) {
        return Err(SpinError::InvalidArc(
            "interior vertices must lie strictly above z = 0",
        ));
    }
    Ok(())
}

/// Assembles the revolution mesh from per-ring profile positions.
///
/// `profile(i, j)` must return the 4-space position of profile vertex `i`
/// (1 ≤ i ≤ a−2, interior arc vertices) on ring `j`.
fn assemble<F: Fn(usize, usize) -> Vec4>(arc: &PolylineArc, m: usize, profile: F) -> Surface4 {
    let a = arc.vertices.len();
    let start = arc.vertices[0];
    let end = arc.vertices[a - 1];
    let mut vertices = Vec::with_capacity(2 + (a - 2) * m);
    vertices.push(Vec4::new(start.x, start.y, 0.0, 0.0));
    for i in 1..a - 1 {
        for j in 0..m {
            vertices.push(profile(i, j));
        }
    }
    vertices.push(Vec4::new(end.x, end.y, 0.0, 0.0));

    let pole_start = 0u32;
    let pole_end = (1 + (a - 2) * m) as u32;
    let ring = |i: usize, j: usize| (1 + (i - 1) * m + j % m) as u32;

    let mut triangles = Vec::with_capacity(2 * m * (a - 2));
    for j in 0..m {
        triangles.push([pole_start, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..a - 2 {
        for j in 0..m {
            let (p00, p10) = (ring(i, j), ring(i + 1, j));
            let (p11, p01) = (ring(i + 1, j + 1), ring(i, j + 1));
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }
    for j in 0..m {
        triangles.push([pole_end, ring(a - 2, j + 1), ring(a - 2, j)]);
    }
    Surface4 {
        vertices,
        triangles,
        rings: m,
    }
}

/// Spins an arc into a closed surface of revolution in 4-space using `m`
/// rings (at least 8).
///
/// Mesh layout: vertex 0 is the pole swept by the first arc endpoint,
/// interior arc vertex `i` contributes ring vertices `1 + (i−1)·m + j`
/// at angles `θ_j = 2πj/m`, and the last vertex `1 + (a−2)·m` is the
/// other pole. Fans close the poles; each band quad is split on its
/// `(i, j)–(i+1, j+1)` diagonal. For an arc with `a` vertices the mesh
/// has `2 + (a−2)·m` vertices, `3m(a−2)` edges and `2m(a−2)` triangles —
/// Euler characteristic 2 at every resolution.
pub fn spin(arc: &PolylineArc, m: usize) -> Result<Surface4, SpinError> {
    check_arc_for_spin(arc)?;
    if m < MIN_RINGS {
        return Err(SpinError::TooFewRings {
            got: m,
            min: MIN_RINGS,
        });
    }
    Ok(assemble(arc, m, |i, j| {
        let p = arc.vertices[i];
        let theta = TAU * j as f64 / m as f64;
        Vec4::new(p.x, p.y, p.z * theta.cos(), p.z * theta.sin())
    }))
}

/// Rotates `p` about the line `(center, axis)` by `angle` (Rodrigues).
#[inline]
fn rotate_about_axis(p: Vec3, center: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let v = p - center;
    let (s, c) = angle.sin_cos();
    center + v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// Twist-spins an arc: while the copy at angle `θ_j` is emitted, the arc
/// vertices strictly inside `ball` are rigidly rotated about the ball's
/// axis by `n·θ_j`.
///
/// `m` must be a positive multiple of `max(n, 1)` (and at least 8) so the
/// final ring returns to the initial position. With `n = 0` the result is
/// bit-for-bit identical to [`spin`].
pub fn twist_spin(
    arc: &PolylineArc,
    ball: &TwistBall,
    n: usize,
    m: usize,
) -> Result<Surface4, SpinError> {
    if n == 0 {
        return spin(arc, m);
    }
    check_arc_for_spin(arc)?;
    if m < MIN_RINGS {
        return Err(SpinError::TooFewRings {
            got: m,
            min: MIN_RINGS,
        });
    }
    if !m.is_multiple_of(n) {
        return Err(SpinError::RingsNotMultiple {
            rings: m,
            twists: n,
        });
    }
    let (p0, p1) = ball.punctures;
    let a = arc.vertices.len();
    if p0 >= p1 || p1 >= a {
        return Err(SpinError::BallMismatch(
            "puncture indices out of order or range",
        ));
    }
    let tol = EPS_INTERSECT * arc.scale();
    for &p in [p0, p1].iter() {
        if (arc.vertices[p].dist(ball.center) - ball.radius).abs() > tol {
            return Err(SpinError::BallMismatch(
                "puncture vertex is not on the sphere",
            ));
        }
    }
    if (ball.axis.norm() - 1.0).abs() > tol {
        return Err(SpinError::BallMismatch("axis is not a unit vector"));
    }
    Ok(assemble(arc, m, |i, j| {
        let theta = TAU * j as f64 / m as f64;
        let p = if i > p0 && i < p1 {
            rotate_about_axis(arc.vertices[i], ball.center, ball.axis, n as f64 * theta)
        } else {
            arc.vertices[i]
        };
        Vec4::new(p.x, p.y, p.z * theta.cos(), p.z * theta.sin())
    }))
}

impl Surface4 {
    /// Positions of triangle `t`'s corners.
    #[inline]
    pub fn triangle(&self, t: usize) -> [Vec4; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Bounding box of each triangle, in triangle order.
    pub fn triangle_boxes(&self) -> Vec<Aabb4> {
        self.triangles
            .iter()
            .map(|t| {
                let pts = [
                    self.vertices[t[0] as usize],
                    self.vertices[t[1] as usize],
                    self.vertices[t[2] as usize],
                ];
                Aabb4::from_points(&pts).expect("triangle always has points")
            })
            .collect()
    }

    /// Diagonal of the surface's bounding box — the scale relative
    /// tolerances are multiplied by.
    pub fn scale(&self) -> f64 {
        match Aabb4::from_points(&self.vertices) {
            Some(b) => (b.hi - b.lo).norm(),
            None => 0.0,
        }
    }

    /// Whether every edge bounds exactly two triangles.
    pub fn is_closed(&self) -> bool {
        match edge_counts(self) {
            Ok(counts) => counts.values().all(|&(f, r)| f + r == 2),
            Err(_) => false,
        }
    }

    /// Whether the triangle orientations are globally consistent: every
    /// edge is traversed once in each direction.
    pub fn is_consistently_oriented(&self) -> bool {
        match edge_counts(self) {
            Ok(counts) => counts.values().all(|&(f, r)| f == 1 && r == 1),
            Err(_) => false,
        }
    }
}

/// Forward/reverse usage counts per undirected edge `(lo, hi)`.
type EdgeCounts = BTreeMap<(u32, u32), (u32, u32)>;

/// Directed edge usage: for each undirected edge, how often it appears in
/// forward (`lo → hi`) and reverse orientation.
fn edge_counts(surface: &Surface4) -> Result<EdgeCounts, SpinError> {
    let v = surface.vertices.len() as u32;
    let mut counts: EdgeCounts = BTreeMap::new();
    for t in &surface.triangles {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(SpinError::MalformedTopology(
                "triangle with repeated vertex",
            ));
        }
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if a >= v || b >= v {
                return Err(SpinError::MalformedTopology("vertex index out of range"));
            }
            let e = counts.entry((a.min(b), a.max(b))).or_insert((0, 0));
            if a < b {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    Ok(counts)
}

/// Euler characteristic `V − E + F` of a surface mesh.
///
/// Fails on malformed topology: repeated vertices in a triangle, indices
/// out of range, or an edge bounding more than two triangles.
pub fn euler_characteristic(surface: &Surface4) -> Result<i64, SpinError> {
    let counts = edge_counts(surface)?;
    if counts.values().any(|&(f, r)| f + r > 2) {
        return Err(SpinError::MalformedTopology(
            "edge bounding more than two triangles",
        ));
    }
    Ok(surface.vertices.len() as i64 - counts.len() as i64 + surface.triangles.len() as i64)
}

/// Rotation of 4-space by `angle` in the `(u, v)` plane.
#[inline]
fn rotate_uv(p: Vec4, angle: f64) -> Vec4 {
    let (s, c) = angle.sin_cos();
    Vec4::new(p.x, p.y, p.u * c - p.v * s, p.u * s + p.v * c)
}

/// Tests whether the surface is invariant under rotation by `2π/order` in
/// the `(u, v)` plane.
///
/// First tries to match every rotated vertex to an original vertex within
/// `1e-12` of the surface scale (a hash grid makes this linear). If that
/// succeeds the symmetry is exact on vertices and therefore on the whole
/// piecewise-linear surface. Otherwise the report carries the largest
/// distance from a rotated vertex to the original surface, computed
/// against nearby triangles.
pub fn check_rotational_symmetry(
    surface: &Surface4,
    order: usize,
) -> Result<SymmetryReport, SpinError> {
    if order == 0 {
        return Err(SpinError::BadOrder(order));
    }
    let angle = TAU / order as f64;
    let scale = surface.scale();
    let exact_tol = 1e-12 * scale.max(f64::MIN_POSITIVE);

    // Hash grid over the original vertices.
    let cell = (exact_tol * 4.0).max(f64::MIN_POSITIVE);
    let key = |p: Vec4| -> (i64, i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.u / cell).floor() as i64,
            (p.v / cell).floor() as i64,
        )
    };
    let mut grid: BTreeMap<(i64, i64, i64, i64), Vec<u32>> = BTreeMap::new();
    for (i, &p) in surface.vertices.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i as u32);
    }

    let mut exact = true;
    let mut max_match = 0.0f64;
    let mut unmatched: Vec<Vec4> = Vec::new();
    for &p in &surface.vertices {
        let rp = rotate_uv(p, angle);
        let (kx, ky, ku, kv) = key(rp);
        let mut best = f64::INFINITY;
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for du in -1..=1i64 {
                    for dv in -1..=1i64 {
                        if let Some(cellv) = grid.get(&(kx + dx, ky + dy, ku + du, kv + dv)) {
                            for &i in cellv {
                                best = best.min(rp.dist(surface.vertices[i as usize]));
                            }
                        }
                    }
                }
            }
        }
        if best <= exact_tol {
            max_match = max_match.max(best);
        } else {
            exact = false;
            unmatched.push(rp);
        }
    }

    if exact {
        return Ok(SymmetryReport {
            order_tested: order,
            max_deviation: max_match,
            exact_on_vertices: true,
        });
    }

    // Vertex matching failed: measure the true deviation of each rotated
    // vertex from the surface itself.
    let boxes = surface.triangle_boxes();
    let bvh = Bvh::build(&boxes);
    let mut max_dev = max_match;
    for rp in unmatched {
        // Upper bound from the nearest original vertex, then refine
        // against every triangle whose box lies within that bound.
        let mut bound = f64::INFINITY;
        for &q in &surface.vertices {
            bound = bound.min(rp.dist(q));
        }
        let mut best = bound;
        for t in within_radius_4d(&bvh, &boxes, rp, bound) {
            let [a, b, c] = surface.triangle(t as usize);
            best = best.min(pt_tri_dist(rp, a, b, c));
        }
        max_dev = max_dev.max(best);
    }
    Ok(SymmetryReport {
        order_tested: order,
        max_deviation: max_dev,
        exact_on_vertices: false,
    })
}

/// Pairs of non-adjacent triangles that intersect in 4-space.
///
/// An empty result certifies (at mesh resolution) that the surface is
/// embedded. Pairs sharing a mesh vertex are skipped: their contact along
/// shared simplices is not a self-intersection.
pub fn surface_embedding_violations(surface: &Surface4, tol: f64) -> Vec<(u32, u32)> {
    let abs_tol = tol * surface.scale();
    let boxes = surface.triangle_boxes();
    let bvh = Bvh::build(&boxes);
    let mut out = Vec::new();
    for (s, t) in bvh.self_pairs(&boxes, abs_tol) {
        let ts = surface.triangles[s as usize];
        let tt = surface.triangles[t as usize];
        if ts.iter().any(|a| tt.contains(a)) {
            continue;
        }
        if tri_tri_intersect_4d(
            &surface.triangle(s as usize),
            &surface.triangle(t as usize),
            abs_tol,
        ) {
            out.push((s, t));
        }
    }
    out
}

/// Torus of revolution embedded in 4-space (inside the hyperplane
/// `u = 0`), standing on end so both coordinate height functions are
/// honest Morse functions with one minimum, one maximum and two saddles.
///
/// Used as the Euler-characteristic-0 control fixture for event
/// detection.
pub fn torus_surface(
    major_segments: usize,
    minor_segments: usize,
    major_radius: f64,
    minor_radius: f64,
) -> Surface4 {
    let (mm, nn) = (major_segments.max(3), minor_segments.max(3));
    let mut vertices = Vec::with_capacity(mm * nn);
    for a in 0..mm {
        let psi = TAU * a as f64 / mm as f64;
        for b in 0..nn {
            let phi = TAU * b as f64 / nn as f64;
            let rim = major_radius + minor_radius * phi.cos();
            vertices.push(Vec4::new(
                minor_radius * phi.sin(),
                rim * psi.cos(),
                0.0,
                rim * psi.sin(),
            ));
        }
    }
    let idx = |a: usize, b: usize| (a % mm * nn + b % nn) as u32;
    let mut triangles = Vec::with_capacity(2 * mm * nn);
    for a in 0..mm {
        for b in 0..nn {
            let (p00, p10) = (idx(a, b), idx(a + 1, b));
            let (p11, p01) = (idx(a + 1, b + 1), idx(a, b + 1));
            triangles.push([p00, p10, p11]);
            triangles.push([p00, p11, p01]);
        }
    }
    Surface4 {
        vertices,
        triangles,
        rings: mm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::{default_twist_ball, make_trefoil_arc, make_unknotted_arc};

    #[test]
    fn mesh_counts_and_layout_are_frozen() {
        let arc = make_unknotted_arc(1.0, 10).unwrap();
        let s = spin(&arc, 12).unwrap();
        assert_eq!(s.vertices.len(), 98);
        assert_eq!(s.triangles.len(), 192);
        assert_eq!(euler_characteristic(&s).unwrap(), 2);
        // Edge count from the characteristic: E = V + F − χ.
        assert_eq!(98 + 192 - 2, 288);
        // Layout: vertex 1 + (i−1)·m + j is arc vertex i spun to ring j.
        let p = arc.vertices[3];
        let theta = TAU * 5.0 / 12.0;
        let want = Vec4::new(p.x, p.y, p.z * theta.cos(), p.z * theta.sin());
        assert_eq!(s.vertices[1 + 2 * 12 + 5], want);
        // Poles close the mesh.
        assert_eq!(s.vertices[0], Vec4::new(0.0, 1.0, 0.0, 0.0));
        assert_eq!(s.vertices[1 + 8 * 12], Vec4::new(0.0, -1.0, 0.0, 0.0));
    }

    #[test]
    fn spun_surfaces_are_closed_oriented_spheres() {
        for (samples, m) in [(24, 8), (36, 12)] {
            let arc = make_trefoil_arc(1.0, samples).unwrap();
            let s = spin(&arc, m).unwrap();
            assert!(s.is_closed());
            assert!(s.is_consistently_oriented());
            assert_eq!(euler_characteristic(&s).unwrap(), 2);
        }
    }

    #[test]
    fn twist_spun_surfaces_keep_the_audits() {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        for n in [1, 2, 3] {
            let s = twist_spin(&arc, &ball, n, 12).unwrap();
            assert!(s.is_closed(), "n={n}");
            assert!(s.is_consistently_oriented(), "n={n}");
            assert_eq!(euler_characteristic(&s).unwrap(), 2, "n={n}");
        }
    }

    #[test]
    fn zero_twists_reproduce_plain_spinning_exactly() {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        let a = spin(&arc, 16).unwrap();
        let b = twist_spin(&arc, &ball, 0, 16).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parameter_contracts_are_enforced() {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        assert_eq!(
            spin(&arc, 4),
            Err(SpinError::TooFewRings { got: 4, min: 8 })
        );
        assert_eq!(
            twist_spin(&arc, &ball, 5, 12),
            Err(SpinError::RingsNotMultiple {
                rings: 12,
                twists: 5
            })
        );
        let mut bad_ball = ball.clone();
        bad_ball.radius *= 1.5;
        assert!(matches!(
            twist_spin(&arc, &bad_ball, 2, 12),
            Err(SpinError::BallMismatch(_))
        ));
        let mut bad_arc = arc.clone();
        bad_arc.vertices[0].z = 0.5;
        assert!(matches!(spin(&bad_arc, 12), Err(SpinError::InvalidArc(_))));
    }

    #[test]
    fn euler_characteristic_rejects_malformed_meshes() {
        // Three triangles around one edge.
        let s = Surface4 {
            vertices: vec![
                Vec4::new(0.0, 0.0, 0.0, 0.0),
                Vec4::new(1.0, 0.0, 0.0, 0.0),
                Vec4::new(0.0, 1.0, 0.0, 0.0),
                Vec4::new(0.0, 0.0, 1.0, 0.0),
                Vec4::new(0.0, 0.0, 0.0, 1.0),
            ],
            triangles: vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]],
            rings: 0,
        };
        assert!(matches!(
            euler_characteristic(&s),
            Err(SpinError::MalformedTopology(_))
        ));
        let degenerate = Surface4 {
            vertices: vec![Vec4::ZERO, Vec4::new(1.0, 0.0, 0.0, 0.0)],
            triangles: vec![[0, 0, 1]],
            rings: 0,
        };
        assert!(euler_characteristic(&degenerate).is_err());
    }

    #[test]
    fn spun_surfaces_are_embedded() {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let s = spin(&arc, 12).unwrap();
        assert!(surface_embedding_violations(&s, EPS_INTERSECT).is_empty());
        let unknot = make_unknotted_arc(1.0, 12).unwrap();
        let s = spin(&unknot, 10).unwrap();
        assert!(surface_embedding_violations(&s, EPS_INTERSECT).is_empty());
    }

    #[test]
    fn rotational_symmetry_matches_the_twist_structure() {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        // Plain spinning: symmetric under any order dividing the ring count.
        let s = spin(&arc, 12).unwrap();
        for order in [2, 3, 4, 6, 12] {
            let rep = check_rotational_symmetry(&s, order).unwrap();
            assert!(rep.exact_on_vertices, "order {order}");
            assert!(rep.max_deviation <= 1e-12 * s.scale());
        }
        // An order that does not divide the ring count lands between rings.
        let rep = check_rotational_symmetry(&s, 5).unwrap();
        assert!(!rep.exact_on_vertices);
        assert!(rep.max_deviation > 0.0);

        // Two twists: a half turn is a symmetry (the interior picks up a
        // full extra turn), a quarter turn is not (an extra half turn).
        let t = twist_spin(&arc, &ball, 2, 12).unwrap();
        let half = check_rotational_symmetry(&t, 2).unwrap();
        assert!(half.exact_on_vertices);
        let quarter = check_rotational_symmetry(&t, 4).unwrap();
        assert!(!quarter.exact_on_vertices);
        assert!(
            quarter.max_deviation > 0.1,
            "quarter-turn deviation should be macroscopic, got {}",
            quarter.max_deviation
        );
    }

    #[test]
    fn torus_fixture_has_characteristic_zero() {
        let t = torus_surface(24, 12, 2.0, 0.5);
        assert_eq!(euler_characteristic(&t).unwrap(), 0);
        assert!(t.is_closed());
        assert!(t.is_consistently_oriented());
    }
}
