//! Geometric primitives shared across the pipeline: vectors in two, three
//! and four dimensions, small dense linear solvers, proximity queries for
//! segments and triangles, and a triangle–triangle intersection routine
//! that reports *combinatorial tags* for the endpoints of each
//! intersection segment.
//!
//! The tags are what make double-curve stitching exact: two triangle pairs
//! that share an endpoint of the same double curve report the same tag
//! (the mesh edge, edge pair, or vertex the endpoint lies on), so curves
//! are joined by key lookup instead of fuzzy position matching.
//!
//! Tolerances here are absolute distances. Callers are expected to scale
//! the relative baselines [`EPS_INTERSECT`] and [`EPS_STITCH`] by the size
//! of the model (for meshes, the diagonal of the bounding box).

use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Baseline relative tolerance for intersection predicates.
///
/// Multiply by the model scale before comparing distances.
pub const EPS_INTERSECT: f64 = 1e-9;

/// Baseline relative tolerance for stitching intersection segments into
/// curves and for clustering triple points.
pub const EPS_STITCH: f64 = 1e-7;

macro_rules! impl_vec_ops {
    ($name:ident, $($f:ident),+) => {
        impl Add for $name {
            type Output = Self;
            #[inline]
            fn add(self, o: Self) -> Self {
                Self { $($f: self.$f + o.$f),+ }
            }
        }
        impl Sub for $name {
            type Output = Self;
            #[inline]
            fn sub(self, o: Self) -> Self {
                Self { $($f: self.$f - o.$f),+ }
            }
        }
        impl Neg for $name {
            type Output = Self;
            #[inline]
            fn neg(self) -> Self {
                Self { $($f: -self.$f),+ }
            }
        }
        impl Mul<f64> for $name {
            type Output = Self;
            #[inline]
            fn mul(self, k: f64) -> Self {
                Self { $($f: self.$f * k),+ }
            }
        }
        impl Div<f64> for $name {
            type Output = Self;
            #[inline]
            fn div(self, k: f64) -> Self {
                Self { $($f: self.$f / k),+ }
            }
        }
        impl $name {
            /// Component-wise construction.
            #[inline]
            pub const fn new($($f: f64),+) -> Self {
                Self { $($f),+ }
            }
            /// All components zero.
            pub const ZERO: Self = Self { $($f: 0.0),+ };
            /// Dot product.
            #[inline]
            pub fn dot(self, o: Self) -> f64 {
                let mut acc = 0.0;
                $(acc += self.$f * o.$f;)+
                acc
            }
            /// Squared Euclidean norm.
            #[inline]
            pub fn norm_sq(self) -> f64 {
                self.dot(self)
            }
            /// Euclidean norm.
            #[inline]
            pub fn norm(self) -> f64 {
                self.norm_sq().sqrt()
            }
            /// Distance to another point.
            #[inline]
            pub fn dist(self, o: Self) -> f64 {
                (self - o).norm()
            }
            /// Unit vector in the same direction; `None` if shorter than `tol`.
            #[inline]
            pub fn normalized(self, tol: f64) -> Option<Self> {
                let n = self.norm();
                if n <= tol {
                    None
                } else {
                    Some(self / n)
                }
            }
            /// Component-wise minimum.
            #[inline]
            pub fn min(self, o: Self) -> Self {
                Self { $($f: self.$f.min(o.$f)),+ }
            }
            /// Component-wise maximum.
            #[inline]
            pub fn max(self, o: Self) -> Self {
                Self { $($f: self.$f.max(o.$f)),+ }
            }
        }
        impl InnerSpace for $name {
            #[inline]
            fn dot_i(self, o: Self) -> f64 {
                self.dot(o)
            }
        }
    };
}

/// Point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

/// Point or vector in 3-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Point or vector in 4-space. Coordinates are named `(x, y, u, v)`: the
/// spinning construction revolves the `z` coordinate of an arc into the
/// `(u, v)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec4 {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

impl_vec_ops!(Vec2, x, y);
impl_vec_ops!(Vec3, x, y, z);
impl_vec_ops!(Vec4, x, y, u, v);

impl Vec2 {
    /// Z-component of the cross product of two planar vectors.
    #[inline]
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

impl Vec3 {
    /// Cross product.
    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }
}

impl Vec4 {
    /// The coordinate selected by `axis` (0 = x, 1 = y, 2 = u, 3 = v).
    #[inline]
    pub fn coord(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.u,
            _ => self.v,
        }
    }

    /// Drops the coordinate selected by `axis`, keeping the other three in
    /// `(x, y, u, v)` order.
    #[inline]
    pub fn drop_coord(self, axis: usize) -> Vec3 {
        match axis {
            0 => Vec3::new(self.y, self.u, self.v),
            1 => Vec3::new(self.x, self.u, self.v),
            2 => Vec3::new(self.x, self.y, self.v),
            _ => Vec3::new(self.x, self.y, self.u),
        }
    }
}

/// Minimal inner-product interface so proximity helpers can be written
/// once for every dimension.
pub trait InnerSpace:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    /// Dot product (named to avoid clashing with the inherent method).
    fn dot_i(self, o: Self) -> f64;

    /// Squared norm.
    #[inline]
    fn norm_sq_i(self) -> f64 {
        self.dot_i(self)
    }
}

/// Distance from point `p` to the segment `a..b`, any dimension.
#[inline]
pub fn pt_seg_dist<V: InnerSpace>(p: V, a: V, b: V) -> f64 {
    let d = b - a;
    let dd = d.norm_sq_i();
    let t = if dd > 0.0 {
        ((p - a).dot_i(d) / dd).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p - (a + d * t)).norm_sq_i().sqrt()
}

/// Minimum distance between segments `a0..a1` and `b0..b1`, any dimension.
///
/// Standard clamped quadratic minimisation over the unit square of
/// parameters, robust to degenerate (point-like) segments.
pub fn seg_seg_dist<V: InnerSpace>(a0: V, a1: V, b0: V, b1: V) -> f64 {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let r = a0 - b0;
    let a = d1.norm_sq_i();
    let e = d2.norm_sq_i();
    let f = d2.dot_i(r);
    let (mut s, mut t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm_sq_i().sqrt();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot_i(r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot_i(d2);
            let denom = a * e - b * b;
            s = if denom != 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    ((a0 + d1 * s) - (b0 + d2 * t)).norm_sq_i().sqrt()
}

/// Distance from a point to the solid triangle `t0 t1 t2`, any dimension.
///
/// Projects onto the triangle's plane through a 2×2 Gram system; if the
/// projection falls outside the triangle, falls back to the nearest edge.
pub fn pt_tri_dist<V: InnerSpace>(p: V, t0: V, t1: V, t2: V) -> f64 {
    let e1 = t1 - t0;
    let e2 = t2 - t0;
    let w = p - t0;
    let g11 = e1.norm_sq_i();
    let g12 = e1.dot_i(e2);
    let g22 = e2.norm_sq_i();
    let b1 = w.dot_i(e1);
    let b2 = w.dot_i(e2);
    let det = g11 * g22 - g12 * g12;
    if det > f64::EPSILON * g11.max(g22).max(1.0) {
        let s = (g22 * b1 - g12 * b2) / det;
        let t = (g11 * b2 - g12 * b1) / det;
        if s >= 0.0 && t >= 0.0 && s + t <= 1.0 {
            return (w - (e1 * s + e2 * t)).norm_sq_i().sqrt();
        }
    }
    pt_seg_dist(p, t0, t1)
        .min(pt_seg_dist(p, t1, t2))
        .min(pt_seg_dist(p, t2, t0))
}

/// Proper crossing of planar segments `a0..a1` and `b0..b1`.
///
/// Returns the interior parameters `(s, t)` when the segments cross
/// transversally away from their endpoints (margin `tol` in parameter
/// space); `None` for disjoint, touching, or parallel configurations.
#[inline]
pub fn seg_seg_cross_2d(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2, tol: f64) -> Option<(f64, f64)> {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let den = d1.cross(d2);
    if den.abs() < tol {
        return None;
    }
    let r = b0 - a0;
    let s = r.cross(d2) / den;
    let t = r.cross(d1) / den;
    if s > tol && s < 1.0 - tol && t > tol && t < 1.0 - tol {
        Some((s, t))
    } else {
        None
    }
}

/// Solves the 3×3 system `a · x = b` by Gaussian elimination with partial
/// pivoting. `None` when the matrix is singular to working precision.
pub fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    gauss_solve::<3, 4>(&mut m)
}

/// Solves the 4×4 system `a · x = b`; `None` when singular.
pub fn solve4(a: [[f64; 4]; 4], b: [f64; 4]) -> Option<[f64; 4]> {
    let mut m = [[0.0; 5]; 4];
    for i in 0..4 {
        m[i][..4].copy_from_slice(&a[i]);
        m[i][4] = b[i];
    }
    gauss_solve::<4, 5>(&mut m)
}

fn gauss_solve<const N: usize, const M: usize>(m: &mut [[f64; M]; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..N {
            let k = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (x, p) in m[row][col..M].iter_mut().zip(&pivot_row[col..M]) {
                *x -= k * p;
            }
        }
    }
    let mut x = [0.0; N];
    for col in (0..N).rev() {
        let mut acc = m[col][N];
        for c in col + 1..N {
            acc -= m[col][c] * x[c];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

/// Row-major 4×4 matrix, used for rotations of 4-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    /// Identity matrix.
    pub const IDENTITY: Self = {
        let mut m = [[0.0; 4]; 4];
        m[0][0] = 1.0;
        m[1][1] = 1.0;
        m[2][2] = 1.0;
        m[3][3] = 1.0;
        Self(m)
    };

    /// Matrix–vector product.
    #[inline]
    pub fn mul_vec(&self, p: Vec4) -> Vec4 {
        let v = [p.x, p.y, p.u, p.v];
        let mut out = [0.0; 4];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        Vec4::new(out[0], out[1], out[2], out[3])
    }

    /// Transpose. For the rotations produced by [`cayley_rotation`] this is
    /// the inverse.
    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in self.0.iter().enumerate() {
            for (j, &val) in row.iter().enumerate() {
                m[j][i] = val;
            }
        }
        Self(m)
    }

    /// The column selected by `axis` as a vector (the image of the
    /// corresponding coordinate axis).
    pub fn column(&self, axis: usize) -> Vec4 {
        Vec4::new(
            self.0[0][axis],
            self.0[1][axis],
            self.0[2][axis],
            self.0[3][axis],
        )
    }
}

/// Rotation of 4-space via the Cayley transform `R = (I − S)⁻¹ (I + S)`
/// of the skew-symmetric matrix built from the six given parameters.
///
/// Always a proper rotation; small parameters give rotations close to the
/// identity, which is how projection directions are perturbed.
pub fn cayley_rotation(params: [f64; 6]) -> Mat4 {
    let [a, b, c, d, e, f] = params;
    let s = [
        [0.0, a, b, c],
        [-a, 0.0, d, e],
        [-b, -d, 0.0, f],
        [-c, -e, -f, 0.0],
    ];
    let mut i_minus = [[0.0; 4]; 4];
    let mut i_plus = [[0.0; 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            let id = if r == col { 1.0 } else { 0.0 };
            i_minus[r][col] = id - s[r][col];
            i_plus[r][col] = id + s[r][col];
        }
    }
    // Solve (I − S) X = (I + S) column by column. I − S is invertible for
    // every real skew-symmetric S, so the unwrap never fires.
    let mut out = [[0.0; 4]; 4];
    for col in 0..4 {
        let rhs = [
            i_plus[0][col],
            i_plus[1][col],
            i_plus[2][col],
            i_plus[3][col],
        ];
        let x = solve4(i_minus, rhs).expect("I - S is always invertible for skew S");
        for r in 0..4 {
            out[r][col] = x[r];
        }
    }
    Mat4(out)
}

/// Axis-aligned box in 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb3 {
    pub lo: Vec3,
    pub hi: Vec3,
}

/// Axis-aligned box in 4-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb4 {
    pub lo: Vec4,
    pub hi: Vec4,
}

/// Interface the BVH needs from a bounding volume.
pub trait Bounds: Copy {
    /// Box containing both operands.
    fn union(self, o: Self) -> Self;
    /// Whether the boxes, each inflated by `margin / 2`, overlap.
    fn intersects(self, o: Self, margin: f64) -> bool;
    /// Centroid coordinate along `axis`.
    fn centroid(self, axis: usize) -> f64;
    /// Number of axes (3 or 4).
    const DIM: usize;
    /// Extent along `axis`.
    fn extent(self, axis: usize) -> f64;
}

macro_rules! impl_bounds {
    ($name:ident, $vec:ident, $dim:expr, $($f:ident),+) => {
        impl $name {
            /// Smallest box containing all `points`; `None` if empty.
            pub fn from_points(points: &[$vec]) -> Option<Self> {
                let (&first, rest) = points.split_first()?;
                let mut lo = first;
                let mut hi = first;
                for &p in rest {
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
                Some(Self { lo, hi })
            }

            /// Squared distance from `p` to the box (zero inside).
            #[inline]
            pub fn dist_sq(self, p: $vec) -> f64 {
                let mut acc = 0.0;
                $(
                    let d = (self.lo.$f - p.$f).max(0.0).max(p.$f - self.hi.$f);
                    acc += d * d;
                )+
                acc
            }
        }
        impl Bounds for $name {
            const DIM: usize = $dim;

            #[inline]
            fn union(self, o: Self) -> Self {
                Self { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
            }

            #[inline]
            fn intersects(self, o: Self, margin: f64) -> bool {
                $(
                    if self.lo.$f - margin > o.hi.$f || o.lo.$f - margin > self.hi.$f {
                        return false;
                    }
                )+
                true
            }

            #[inline]
            fn centroid(self, axis: usize) -> f64 {
                let lo = [$(self.lo.$f),+];
                let hi = [$(self.hi.$f),+];
                0.5 * (lo[axis] + hi[axis])
            }

            #[inline]
            fn extent(self, axis: usize) -> f64 {
                let lo = [$(self.lo.$f),+];
                let hi = [$(self.hi.$f),+];
                hi[axis] - lo[axis]
            }
        }
    };
}

impl_bounds!(Aabb3, Vec3, 3, x, y, z);
impl_bounds!(Aabb4, Vec4, 4, x, y, u, v);

/// Combinatorial tag for an endpoint of a triangle–triangle intersection
/// segment: the mesh feature the endpoint lies on.
///
/// Tags are the stitch keys for double curves. Adjacent triangle pairs
/// along the same curve report equal tags at their shared endpoint:
///
/// * [`SegEnd::Edge`]: the curve crosses edge `edge` of one triangle while
///   staying interior to triangle `other_tri`; the neighbouring triangle
///   across `edge` produces the same `(edge, other_tri)` key.
/// * [`SegEnd::EdgeEdge`]: the curve crosses edges of *both* triangles at
///   once. For surfaces of revolution meshed in phase this happens at
///   every ring plane, so it is a first-class case, not a degeneracy.
/// * [`SegEnd::Vertex`]: a mesh vertex lies exactly on the other triangle;
///   rare, and rejected by the genericity certificate unless a run opts
///   into symmetric (unperturbed) projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegEnd {
    /// Crossing of one mesh edge with the interior of triangle `other_tri`.
    Edge { edge: (u32, u32), other_tri: u32 },
    /// Simultaneous crossing of an edge from each triangle.
    EdgeEdge { e1: (u32, u32), e2: (u32, u32) },
    /// A mesh vertex lying on the other triangle.
    Vertex { v: u32, other_tri: u32 },
}

/// One segment of the intersection of two triangles, with tagged ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsectSegment {
    pub a: Vec3,
    pub b: Vec3,
    pub end_a: SegEnd,
    pub end_b: SegEnd,
}

/// Outcome of intersecting two triangles in 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TriTriOutcome {
    /// No contact within tolerance.
    Disjoint,
    /// Contact of measure zero (a point, or a sliver shorter than `tol`).
    Touch,
    /// The triangles lie in a common plane; the caller decides whether
    /// their overlap is genuine.
    Coplanar,
    /// Proper crossing along a segment.
    Segment(IsectSegment),
}

/// Endpoint of a triangle's crossing interval with the other plane,
/// before the intervals of the two triangles are overlapped.
#[derive(Clone, Copy)]
enum LocalEnd {
    Edge(u32, u32),
    Vertex(u32),
}

/// Crossing interval of one triangle with the other triangle's plane:
/// parameters along the intersection line plus the geometric points and
/// the features realising them.
struct Interval {
    t: [f64; 2],
    p: [Vec3; 2],
    end: [LocalEnd; 2],
}

fn classify(d: f64, tol: f64) -> i8 {
    if d > tol {
        1
    } else if d < -tol {
        -1
    } else {
        0
    }
}

/// Crossing interval of triangle `p` (vertex ids `pid`) with the plane of
/// the other triangle, given signed distances `d` and the intersection
/// line direction `dir`. `None` means the triangle only touches the plane
/// in a point (or a genuinely degenerate configuration).
fn crossing_interval(
    p: &[Vec3; 3],
    pid: &[u32; 3],
    d: &[f64; 3],
    s: &[i8; 3],
    dir: Vec3,
) -> Option<Interval> {
    let zeros: Vec<usize> = (0..3).filter(|&i| s[i] == 0).collect();
    let mut pts: Vec<(Vec3, LocalEnd)> = Vec::with_capacity(2);
    match zeros.len() {
        0 => {
            // One vertex on one side, two on the other: the two edges from
            // the lone vertex cross the plane.
            let lone = (0..3).find(|&i| s[i] != s[(i + 1) % 3] && s[i] != s[(i + 2) % 3])?;
            for k in [1, 2] {
                let j = (lone + k) % 3;
                let t = d[lone] / (d[lone] - d[j]);
                let pt = p[lone] + (p[j] - p[lone]) * t;
                pts.push((pt, LocalEnd::Edge(pid[lone], pid[j])));
            }
        }
        1 => {
            let z = zeros[0];
            let (i, j) = ((z + 1) % 3, (z + 2) % 3);
            if s[i] == s[j] {
                // Vertex touches the plane from one side: point contact.
                return None;
            }
            let t = d[i] / (d[i] - d[j]);
            let pt = p[i] + (p[j] - p[i]) * t;
            pts.push((p[z], LocalEnd::Vertex(pid[z])));
            pts.push((pt, LocalEnd::Edge(pid[i], pid[j])));
        }
        2 => {
            // A whole edge lies in the plane.
            pts.push((p[zeros[0]], LocalEnd::Vertex(pid[zeros[0]])));
            pts.push((p[zeros[1]], LocalEnd::Vertex(pid[zeros[1]])));
        }
        _ => return None, // coplanar, handled by the caller
    }
    let (a, b) = (pts[0], pts[1]);
    let (ta, tb) = (a.0.dot(dir), b.0.dot(dir));
    if ta <= tb {
        Some(Interval {
            t: [ta, tb],
            p: [a.0, b.0],
            end: [a.1, b.1],
        })
    } else {
        Some(Interval {
            t: [tb, ta],
            p: [b.0, a.0],
            end: [b.1, a.1],
        })
    }
}

fn canon_edge(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Combines the interval-end features of the two triangles when both
/// realise the same endpoint of the overlap (within tolerance).
fn combine_ends(a: LocalEnd, b: LocalEnd, tri_a: u32, tri_b: u32) -> SegEnd {
    match (a, b) {
        (LocalEnd::Vertex(v), _) => SegEnd::Vertex {
            v,
            other_tri: tri_b,
        },
        (_, LocalEnd::Vertex(v)) => SegEnd::Vertex {
            v,
            other_tri: tri_a,
        },
        (LocalEnd::Edge(a0, a1), LocalEnd::Edge(b0, b1)) => {
            let ea = canon_edge(a0, a1);
            let eb = canon_edge(b0, b1);
            let (e1, e2) = if ea <= eb { (ea, eb) } else { (eb, ea) };
            SegEnd::EdgeEdge { e1, e2 }
        }
    }
}

fn lone_end(e: LocalEnd, other_tri: u32) -> SegEnd {
    match e {
        LocalEnd::Vertex(v) => SegEnd::Vertex { v, other_tri },
        LocalEnd::Edge(a, b) => SegEnd::Edge {
            edge: canon_edge(a, b),
            other_tri,
        },
    }
}

/// Intersects triangles `p` and `q` in 3-space.
///
/// `pid`/`qid` are global vertex ids and `p_tri`/`q_tri` global triangle
/// ids; they only label the combinatorial tags of the result. `tol` is an
/// absolute distance below which points are considered incident.
///
/// Triangle pairs sharing a global vertex id should be skipped by the
/// caller — their contact along shared simplices is not a surface
/// self-intersection.
pub fn tri_tri_intersection(
    p: &[Vec3; 3],
    pid: &[u32; 3],
    p_tri: u32,
    q: &[Vec3; 3],
    qid: &[u32; 3],
    q_tri: u32,
    tol: f64,
) -> TriTriOutcome {
    let n_q = (q[1] - q[0]).cross(q[2] - q[0]);
    let nq_len = n_q.norm();
    let n_p = (p[1] - p[0]).cross(p[2] - p[0]);
    let np_len = n_p.norm();
    if nq_len < tol * tol || np_len < tol * tol {
        // Degenerate (needle) triangle: treat as no proper crossing.
        return TriTriOutcome::Touch;
    }

    // Signed distances of p's vertices to q's plane, and vice versa.
    let dp: [f64; 3] = std::array::from_fn(|i| (p[i] - q[0]).dot(n_q) / nq_len);
    let sp: [i8; 3] = std::array::from_fn(|i| classify(dp[i], tol));
    if sp.iter().all(|&s| s > 0) || sp.iter().all(|&s| s < 0) {
        return TriTriOutcome::Disjoint;
    }
    let dq: [f64; 3] = std::array::from_fn(|i| (q[i] - p[0]).dot(n_p) / np_len);
    let sq: [i8; 3] = std::array::from_fn(|i| classify(dq[i], tol));
    if sq.iter().all(|&s| s > 0) || sq.iter().all(|&s| s < 0) {
        return TriTriOutcome::Disjoint;
    }

    if sp.iter().all(|&s| s == 0) {
        return TriTriOutcome::Coplanar;
    }

    let dir = match n_p
        .cross(n_q)
        .normalized(tol * np_len.sqrt() * nq_len.sqrt())
    {
        Some(d) => d,
        // Parallel distinct planes (the coplanar case returned above).
        None => return TriTriOutcome::Disjoint,
    };

    let ip = match crossing_interval(p, pid, &dp, &sp, dir) {
        Some(i) => i,
        None => return TriTriOutcome::Touch,
    };
    let iq = match crossing_interval(q, qid, &dq, &sq, dir) {
        Some(i) => i,
        None => return TriTriOutcome::Touch,
    };

    let lo = ip.t[0].max(iq.t[0]);
    let hi = ip.t[1].min(iq.t[1]);
    if hi - lo <= tol {
        // Separated intervals, or an overlap of measure zero (for example
        // the mirrored pair of an edge-through-edge contact).
        return if hi - lo < -tol {
            TriTriOutcome::Disjoint
        } else {
            TriTriOutcome::Touch
        };
    }

    let pick = |bound: usize, want_max: bool| -> (Vec3, SegEnd) {
        let (tp, tq) = (ip.t[bound], iq.t[bound]);
        let p_realises = if want_max { tp >= tq } else { tp <= tq };
        let tie = (tp - tq).abs() <= tol;
        if tie {
            let pt = (ip.p[bound] + iq.p[bound]) * 0.5;
            (pt, combine_ends(ip.end[bound], iq.end[bound], p_tri, q_tri))
        } else if p_realises {
            (ip.p[bound], lone_end(ip.end[bound], q_tri))
        } else {
            (iq.p[bound], lone_end(iq.end[bound], p_tri))
        }
    };

    let (pa, ea) = pick(0, true); // lower bound: the larger of the two minima
    let (pb, eb) = pick(1, false); // upper bound: the smaller of the two maxima
    if pa.dist(pb) <= tol {
        return TriTriOutcome::Touch;
    }
    TriTriOutcome::Segment(IsectSegment {
        a: pa,
        b: pb,
        end_a: ea,
        end_b: eb,
    })
}

/// Whether two coplanar triangles overlap with positive area (separating
/// axis test in their common plane). Used to decide whether a
/// [`TriTriOutcome::Coplanar`] pair is a genuine failure of genericity.
pub fn coplanar_triangles_overlap(p: &[Vec3; 3], q: &[Vec3; 3], tol: f64) -> bool {
    let n = (p[1] - p[0]).cross(p[2] - p[0]);
    // Project out the dominant normal component.
    let (i, j) = if n.x.abs() >= n.y.abs() && n.x.abs() >= n.z.abs() {
        (1, 2)
    } else if n.y.abs() >= n.z.abs() {
        (0, 2)
    } else {
        (0, 1)
    };
    let flat = |v: Vec3| -> Vec2 {
        let c = [v.x, v.y, v.z];
        Vec2::new(c[i], c[j])
    };
    let a: Vec<Vec2> = p.iter().map(|&v| flat(v)).collect();
    let b: Vec<Vec2> = q.iter().map(|&v| flat(v)).collect();
    let separated_by = |poly: &[Vec2], other: &[Vec2]| -> bool {
        for k in 0..3 {
            let edge = poly[(k + 1) % 3] - poly[k];
            let axis = Vec2::new(-edge.y, edge.x);
            let pr = |pts: &[Vec2]| {
                let vals: Vec<f64> = pts.iter().map(|&v| v.dot(axis)).collect();
                (
                    vals.iter().cloned().fold(f64::INFINITY, f64::min),
                    vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                )
            };
            let (lo_a, hi_a) = pr(poly);
            let (lo_b, hi_b) = pr(other);
            if hi_a <= lo_b + tol || hi_b <= lo_a + tol {
                return true;
            }
        }
        false
    };
    !(separated_by(&a, &b) || separated_by(&b, &a))
}

/// Whether two triangles in 4-space intersect (within `tol`).
///
/// Generic 2-planes in 4-space meet in a point; the routine solves the
/// 4×4 system for the plane parameters and checks both barycentric
/// containments. Near-parallel configurations fall back to a distance
/// test so genuine contacts are never silently missed.
pub fn tri_tri_intersect_4d(p: &[Vec4; 3], q: &[Vec4; 3], tol: f64) -> bool {
    let e1 = p[1] - p[0];
    let e2 = p[2] - p[0];
    let f1 = q[1] - q[0];
    let f2 = q[2] - q[0];
    let rhs = q[0] - p[0];
    let a = [
        [e1.x, e2.x, -f1.x, -f2.x],
        [e1.y, e2.y, -f1.y, -f2.y],
        [e1.u, e2.u, -f1.u, -f2.u],
        [e1.v, e2.v, -f1.v, -f2.v],
    ];
    match solve4(a, [rhs.x, rhs.y, rhs.u, rhs.v]) {
        Some([s1, s2, t1, t2]) => {
            let scale = e1.norm().max(e2.norm()).max(f1.norm()).max(f2.norm());
            let bt = if scale > 0.0 { tol / scale } else { tol };
            s1 >= -bt
                && s2 >= -bt
                && s1 + s2 <= 1.0 + bt
                && t1 >= -bt
                && t2 >= -bt
                && t1 + t2 <= 1.0 + bt
        }
        None => {
            // Parallel or degenerate: fall back to explicit distance.
            tri_tri_dist_4d(p, q) <= tol
        }
    }
}

/// Minimum distance between two (possibly disjoint) triangles in 4-space,
/// via vertex–triangle and edge–edge distances.
pub fn tri_tri_dist_4d(p: &[Vec4; 3], q: &[Vec4; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for &v in p.iter() {
        best = best.min(pt_tri_dist(v, q[0], q[1], q[2]));
    }
    for &v in q.iter() {
        best = best.min(pt_tri_dist(v, p[0], p[1], p[2]));
    }
    for i in 0..3 {
        for j in 0..3 {
            best = best.min(seg_seg_dist(p[i], p[(i + 1) % 3], q[j], q[(j + 1) % 3]));
        }
    }
    best
}
