//! Properly embedded polygonal arcs in upper half-space and the twist
//! balls that isolate their knotted part.
//!
//! An arc here is a polyline whose endpoints lie exactly on the boundary
//! plane `z = 0` and whose interior vertices lie strictly above it.
//! Spinning such an arc about the boundary plane produces a closed
//! surface in 4-space (see [`crate::spin`]); the arc's `(y, z)` shadow
//! determines all double points of the standard projection of that
//! surface, which is why the constructors below are designed around their
//! shadows.
//!
//! [`make_trefoil_arc`] routes a trefoil tangle: its shadow has exactly
//! three transversal crossings that alternate over/under along the arc,
//! all concentrated in a "flower" region that a round ball can enclose.
//! The remainder of the route exists to leave that ball cleanly and reach
//! the boundary plane without creating further shadow crossings:
//!
//! ```text
//!       arch (big circular detour back to the plane)
//!      ╭────────────────────────╮
//!      N  neck                  │
//!      │  sweep (const radius)  │
//!      ╰──╮ ╭──╴ flower with 3  │
//!         │ │    alternating    │
//!         S ╵    crossings      │
//!   ──────┴──────────────────────┴────  z = 0
//! ```
//!
//! [`default_twist_ball`] searches all vertex pairs for the most robust
//! admissible ball: every shadow crossing strictly inside, the two
//! punctures antipodal vertices on the sphere, the rest of the arc
//! strictly outside, and the arc leaving each puncture outward so it
//! crosses the sphere exactly twice.

use crate::geom::{pt_seg_dist, seg_seg_cross_2d, seg_seg_dist, Vec2, Vec3, EPS_INTERSECT};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Errors from arc construction and twist-ball selection.
#[derive(Debug, Error, PartialEq)]
pub enum ArcError {
    /// The requested sample count cannot hold the route's joints and
    /// mandatory interior vertices.
    #[error("arc needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    /// The scale must be positive and finite.
    #[error("arc scale must be positive and finite, got {0}")]
    BadScale(f64),
    /// No vertex-pair ball satisfies all admissibility conditions.
    #[error("no admissible twist ball: no vertex pair isolates the crossings")]
    NoAdmissibleBall,
}

/// Polygonal arc, properly embedded in the upper half-space `z ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolylineArc {
    /// Vertices in order along the arc. First and last lie on `z = 0`.
    pub vertices: Vec<Vec3>,
}

/// Round ball meeting an arc in exactly two antipodal vertices.
///
/// Rotating the ball's interior about `axis` while spinning the arc
/// produces twist-spun surfaces; the punctures are fixed by that rotation,
/// so the arc stays continuous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistBall {
    pub center: Vec3,
    pub radius: f64,
    /// Unit vector from the first puncture towards the second.
    pub axis: Vec3,
    /// Vertex indices of the two punctures (antipodal on the sphere).
    pub punctures: (usize, usize),
}

/// A single failed arc invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Vertex or segment indices the violation refers to.
    pub indices: Vec<usize>,
    /// Signed slack of the failed predicate (distance, height, …).
    pub gap: f64,
}

/// What an arc invariant violation is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Fewer than four vertices.
    TooFewVertices,
    /// An endpoint is off the boundary plane `z = 0`.
    EndpointOffBoundary,
    /// An interior vertex is on or below the boundary plane.
    InteriorNotAbove,
    /// Two consecutive vertices coincide.
    DuplicateVertex,
    /// The arc reverses onto itself at a vertex.
    FoldBack,
    /// Two non-adjacent segments come within tolerance of each other.
    SelfIntersection,
}

/// Result of [`validate_arc`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// A transversal crossing of the arc's `(y, z)` shadow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowCrossing {
    /// Index of the earlier segment involved.
    pub seg_a: usize,
    /// Index of the later segment involved.
    pub seg_b: usize,
    /// Interior parameter of the crossing on segment `seg_a`.
    pub s: f64,
    /// Interior parameter of the crossing on segment `seg_b`.
    pub t: f64,
    /// Depth (`x`) of the two strands at the crossing point.
    pub x_a: f64,
    pub x_b: f64,
    /// The shadow point `(y, z)` itself.
    pub point: Vec2,
}

// --- Trefoil route constants (unit scale) ------------------------------
//
// The flower curve t ↦ (sin 3t, sin t + 2 sin 2t, LIFT + cos t − 2 cos 2t)
// traces a trefoil shadow with three alternating crossings while the x
// coordinate separates the strands at every crossing by at least 1.25.
// It is trimmed slightly short of a full period and the two loose ends
// are routed to the boundary plane: one drops straight down (the south
// side), the other exits along a constant-radius sweep, a short straight
// neck to the top pole, and a wide circular arch back down to z = 0 far
// from the flower. The sweep/neck split keeps the exit strongly outward
// at the top pole so the pole pair stays an admissible twist ball even at
// coarse sampling.

const FLOWER_LIFT: f64 = 4.8;
const FLOWER_TRIM: f64 = 0.35;
const SOUTH_Z: f64 = 0.8;
const NORTH_Z: f64 = 8.8;
const SWEEP_RADIUS: f64 = 3.5;
const SWEEP_END_PHI: f64 = FRAC_PI_2 - 0.12;
const ARCH_CENTER_Y: f64 = 3.2;
const ARCH_CENTER_Z: f64 = SOUTH_Z;

/// Joints between route pieces, in order along the arc.
fn route_joints() -> [Vec3; 8] {
    let cut_a = flower(PI - FLOWER_TRIM);
    let cut_b = flower(FLOWER_TRIM - PI);
    let phi_b = (cut_b.z - FLOWER_LIFT).atan2(cut_b.y);
    let arch_r = arch_radius();
    [
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(0.0, 0.0, SOUTH_Z),
        cut_a,
        cut_b,
        sweep_point(phi_b),
        sweep_point(SWEEP_END_PHI),
        Vec3::new(0.0, 0.0, NORTH_Z),
        Vec3::new(
            0.0,
            ARCH_CENTER_Y + (arch_r * arch_r - ARCH_CENTER_Z * ARCH_CENTER_Z).sqrt(),
            0.0,
        ),
    ]
}

#[inline]
fn flower(t: f64) -> Vec3 {
    Vec3::new(
        (3.0 * t).sin(),
        t.sin() + 2.0 * (2.0 * t).sin(),
        FLOWER_LIFT + t.cos() - 2.0 * (2.0 * t).cos(),
    )
}

#[inline]
fn sweep_point(phi: f64) -> Vec3 {
    Vec3::new(
        0.0,
        SWEEP_RADIUS * phi.cos(),
        FLOWER_LIFT + SWEEP_RADIUS * phi.sin(),
    )
}

#[inline]
fn arch_radius() -> f64 {
    (ARCH_CENTER_Y * ARCH_CENTER_Y + (NORTH_Z - ARCH_CENTER_Z) * (NORTH_Z - ARCH_CENTER_Z)).sqrt()
}

#[inline]
fn arch_point(a: f64) -> Vec3 {
    let r = arch_radius();
    Vec3::new(
        0.0,
        ARCH_CENTER_Y + r * a.cos(),
        ARCH_CENTER_Z + r * a.sin(),
    )
}

/// The seven route pieces between consecutive joints.
#[derive(Clone, Copy)]
struct Piece {
    eval: fn(f64) -> Vec3,
    t0: f64,
    t1: f64,
    /// Interior vertices this piece must receive regardless of budget.
    min_interior: usize,
    /// Multiplier on arc length when distributing spare vertices.
    weight_boost: f64,
}

fn route_pieces() -> [Piece; 7] {
    let joints = route_joints();
    let cut_b = joints[3];
    let phi_b = (cut_b.z - FLOWER_LIFT).atan2(cut_b.y);
    let arch_r = arch_radius();
    let a_n = (NORTH_Z - ARCH_CENTER_Z).atan2(-ARCH_CENTER_Y);
    let a_f = -(ARCH_CENTER_Z / arch_r).asin();
    fn entry(t: f64) -> Vec3 {
        Vec3::new(0.0, 0.0, SOUTH_Z * t)
    }
    fn a_link(t: f64) -> Vec3 {
        let s = Vec3::new(0.0, 0.0, SOUTH_Z);
        let c = flower(PI - FLOWER_TRIM);
        s + (c - s) * t
    }
    fn b_link(t: f64) -> Vec3 {
        let c = flower(FLOWER_TRIM - PI);
        let phi_b = (c.z - FLOWER_LIFT).atan2(c.y);
        let q = sweep_point(phi_b);
        c + (q - c) * t
    }
    fn neck(t: f64) -> Vec3 {
        let e = sweep_point(SWEEP_END_PHI);
        let n = Vec3::new(0.0, 0.0, NORTH_Z);
        e + (n - e) * t
    }
    [
        Piece {
            eval: entry,
            t0: 0.0,
            t1: 1.0,
            min_interior: 0,
            weight_boost: 1.0,
        },
        Piece {
            eval: a_link,
            t0: 0.0,
            t1: 1.0,
            min_interior: 0,
            weight_boost: 1.0,
        },
        Piece {
            eval: flower,
            t0: PI - FLOWER_TRIM,
            t1: FLOWER_TRIM - PI,
            min_interior: 11,
            weight_boost: 1.5,
        },
        Piece {
            eval: b_link,
            t0: 0.0,
            t1: 1.0,
            min_interior: 0,
            weight_boost: 1.0,
        },
        Piece {
            eval: sweep_point,
            t0: phi_b,
            t1: SWEEP_END_PHI,
            min_interior: 3,
            weight_boost: 1.0,
        },
        Piece {
            eval: neck,
            t0: 0.0,
            t1: 1.0,
            min_interior: 0,
            weight_boost: 1.0,
        },
        Piece {
            eval: arch_point,
            t0: a_n,
            t1: a_f,
            min_interior: 2,
            weight_boost: 1.0,
        },
    ]
}

fn piece_length(p: &Piece) -> f64 {
    const STEPS: usize = 2048;
    let mut total = 0.0;
    let mut prev = (p.eval)(p.t0);
    for k in 1..=STEPS {
        let cur = (p.eval)(p.t0 + (p.t1 - p.t0) * k as f64 / STEPS as f64);
        total += prev.dist(cur);
        prev = cur;
    }
    total
}

/// Distributes the vertex budget over the pieces: mandatory minima first,
/// then spare vertices by largest remainder on length-weighted quotas.
fn allocate_interior(samples: usize, pieces: &[Piece; 7]) -> Result<[usize; 7], ArcError> {
    let joints = 8;
    let min_total: usize = pieces.iter().map(|p| p.min_interior).sum::<usize>() + joints;
    if samples < min_total {
        return Err(ArcError::TooFewSamples {
            got: samples,
            min: min_total,
        });
    }
    let extra = samples - min_total;
    let weights: Vec<f64> = pieces
        .iter()
        .map(|p| piece_length(p) * p.weight_boost)
        .collect();
    let total_w: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / total_w * extra as f64).collect();
    let mut counts: [usize; 7] = std::array::from_fn(|i| quotas[i] as usize);
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..7).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - counts[a] as f64;
        let fb = quotas[b] - counts[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(extra - assigned) {
        counts[i] += 1;
    }
    for (c, p) in counts.iter_mut().zip(pieces.iter()) {
        *c += p.min_interior;
    }
    Ok(counts)
}

/// Builds the knotted arc whose shadow is a trefoil tangle.
///
/// `samples` is the exact number of vertices (at least 24: the 8 route
/// joints plus mandatory interior vertices that preserve the three shadow
/// crossings at any resolution). All coordinates scale linearly with
/// `scale`, so `make_trefoil_arc(s, n)` is exactly the unit arc times `s`.
pub fn make_trefoil_arc(scale: f64, samples: usize) -> Result<PolylineArc, ArcError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(ArcError::BadScale(scale));
    }
    let pieces = route_pieces();
    let counts = allocate_interior(samples, &pieces)?;
    let joints = route_joints();
    let mut vertices = Vec::with_capacity(samples);
    vertices.push(joints[0]);
    for (idx, piece) in pieces.iter().enumerate() {
        let k = counts[idx];
        for j in 1..=k {
            let t = piece.t0 + (piece.t1 - piece.t0) * j as f64 / (k + 1) as f64;
            vertices.push((piece.eval)(t));
        }
        vertices.push(joints[idx + 1]);
    }
    debug_assert_eq!(vertices.len(), samples);
    // The boundary contract is exact, not approximate.
    vertices.first_mut().unwrap().z = 0.0;
    vertices.last_mut().unwrap().z = 0.0;
    for v in &mut vertices {
        *v = *v * scale;
    }
    Ok(PolylineArc { vertices })
}

/// Builds an unknotted arc: a half circle standing on the boundary plane
/// in the `(y, z)` plane, endpoints exactly at `(0, ±scale, 0)`.
///
/// Its shadow has no crossings, so the spun surface is embedded and the
/// standard projection of that surface is a round sphere.
pub fn make_unknotted_arc(scale: f64, samples: usize) -> Result<PolylineArc, ArcError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(ArcError::BadScale(scale));
    }
    if samples < 4 {
        return Err(ArcError::TooFewSamples {
            got: samples,
            min: 4,
        });
    }
    let mut vertices: Vec<Vec3> = (0..samples)
        .map(|k| {
            let phi = PI * k as f64 / (samples - 1) as f64;
            Vec3::new(0.0, phi.cos(), phi.sin())
        })
        .collect();
    vertices[0] = Vec3::new(0.0, 1.0, 0.0);
    vertices[samples - 1] = Vec3::new(0.0, -1.0, 0.0);
    for v in &mut vertices {
        *v = *v * scale;
    }
    Ok(PolylineArc { vertices })
}

impl PolylineArc {
    /// Diagonal of the arc's bounding box: the scale every relative
    /// tolerance is multiplied by.
    pub fn scale(&self) -> f64 {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for &v in &self.vertices[1..] {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (hi - lo).norm()
    }
}

/// Checks the proper-embedding invariants of an arc.
///
/// `tol` is relative; it is multiplied by the arc's bounding-box diagonal
/// before distances are compared. Endpoint heights are compared exactly:
/// the boundary contract is `z == 0`, not `z ≈ 0`.
pub fn validate_arc(arc: &PolylineArc, tol: f64) -> ValidationReport {
    let mut violations = Vec::new();
    let n = arc.vertices.len();
    if n < 4 {
        violations.push(Violation {
            kind: ViolationKind::TooFewVertices,
            indices: vec![n],
            gap: n as f64 - 4.0,
        });
        return ValidationReport {
            ok: false,
            violations,
        };
    }
    let v = &arc.vertices;
    let abs_tol = tol * arc.scale();
    for (idx, vert) in [(0usize, v[0]), (n - 1, v[n - 1])] {
        if vert.z != 0.0 {
            violations.push(Violation {
                kind: ViolationKind::EndpointOffBoundary,
                indices: vec![idx],
                gap: vert.z,
            });
        }
    }
    for (idx, vert) in v.iter().enumerate().take(n - 1).skip(1) {
        if vert.z <= 0.0 {
            violations.push(Violation {
                kind: ViolationKind::InteriorNotAbove,
                indices: vec![idx],
                gap: vert.z,
            });
        }
    }
    for i in 0..n - 1 {
        if v[i].dist(v[i + 1]) <= abs_tol {
            violations.push(Violation {
                kind: ViolationKind::DuplicateVertex,
                indices: vec![i, i + 1],
                gap: v[i].dist(v[i + 1]),
            });
        }
    }
    for i in 1..n - 1 {
        let (a, b) = (v[i] - v[i - 1], v[i + 1] - v[i]);
        if let (Some(a), Some(b)) = (a.normalized(abs_tol), b.normalized(abs_tol)) {
            if a.dot(b) < -1.0 + 1e-9 {
                violations.push(Violation {
                    kind: ViolationKind::FoldBack,
                    indices: vec![i],
                    gap: a.dot(b) + 1.0,
                });
            }
        }
    }
    // Segments sharing a vertex are skipped (j starts at i + 2); the arc
    // is open, so the first and last segments are not adjacent and are
    // checked like any other pair.
    for i in 0..n - 1 {
        for j in i + 2..n - 1 {
            let d = seg_seg_dist(v[i], v[i + 1], v[j], v[j + 1]);
            if d <= abs_tol {
                violations.push(Violation {
                    kind: ViolationKind::SelfIntersection,
                    indices: vec![i, j],
                    gap: d,
                });
            }
        }
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// All transversal crossings of the arc's `(y, z)` shadow, sorted along
/// the arc. Each is a future double circle of the spun surface's standard
/// projection.
pub fn shadow_crossings(arc: &PolylineArc) -> Vec<ShadowCrossing> {
    let v = &arc.vertices;
    let n = v.len();
    let shadow = |p: Vec3| Vec2::new(p.y, p.z);
    let mut out = Vec::new();
    for i in 0..n.saturating_sub(1) {
        for j in i + 2..n - 1 {
            let Some((s, t)) = seg_seg_cross_2d(
                shadow(v[i]),
                shadow(v[i + 1]),
                shadow(v[j]),
                shadow(v[j + 1]),
                1e-12,
            ) else {
                continue;
            };
            let pa = v[i] + (v[i + 1] - v[i]) * s;
            let pb = v[j] + (v[j + 1] - v[j]) * t;
            out.push(ShadowCrossing {
                seg_a: i,
                seg_b: j,
                s,
                t,
                x_a: pa.x,
                x_b: pb.x,
                point: Vec2::new(pa.y, pa.z),
            });
        }
    }
    out.sort_by(|a, b| {
        (a.seg_a as f64 + a.s)
            .total_cmp(&(b.seg_a as f64 + b.s))
            .then(a.seg_b.cmp(&b.seg_b))
    });
    out
}

/// Number of transversal crossings of the arc with the plane `y = level`.
///
/// A horizontal slice of the spun surface at height `y = level` consists
/// of one circle per crossing, so this predicts frame component counts.
pub fn plane_crossings(arc: &PolylineArc, level: f64) -> usize {
    arc.vertices
        .windows(2)
        .filter(|w| (w[0].y - level) * (w[1].y - level) < 0.0)
        .count()
}

/// Selects the most robust twist ball among all vertex-pair candidates.
///
/// A candidate takes vertices `i < j` as antipodal punctures (center at
/// their midpoint). It is admissible when the ball stays strictly above
/// the boundary plane, every shadow-crossing segment lies in `i..j`, the
/// vertices between the punctures are strictly inside, the rest of
/// the arc stays strictly outside, and the arc departs each puncture
/// outward (so it crosses the sphere exactly twice).
///
/// Candidates are ranked by robustness margin (the smallest clearance of
/// any of those predicates) in coarse buckets of 0.5% of the arc size,
/// then by smaller radius, higher center and lower indices. The bucketing
/// keeps the choice stable: near-tied margins defer to the tighter,
/// better-centered ball.
pub fn default_twist_ball(arc: &PolylineArc) -> Result<TwistBall, ArcError> {
    let v = &arc.vertices;
    let n = v.len();
    let diag = arc.scale();
    let tol = EPS_INTERSECT * diag;
    let bucket = 0.005 * diag;
    let quant = 1e-6 * diag;
    let crossing_segs: Vec<usize> = {
        let mut s: Vec<usize> = shadow_crossings(arc)
            .iter()
            .flat_map(|c| [c.seg_a, c.seg_b])
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let q = |x: f64| (x / quant).round() as i64;
    let mut best: Option<([i64; 3], usize, usize)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let center = (v[i] + v[j]) * 0.5;
            let radius = v[i].dist(v[j]) * 0.5;
            let mut margin = center.z - radius;
            if margin <= tol {
                continue;
            }
            if crossing_segs.iter().any(|&s| s < i || s >= j) {
                continue;
            }
            let mut ok = true;
            for p in &v[i + 1..j] {
                let slack = radius - p.dist(center);
                if slack <= tol {
                    ok = false;
                    break;
                }
                margin = margin.min(slack);
            }
            if !ok {
                continue;
            }
            // Outward departure at the punctures: the exterior-adjacent
            // chord must not dive back into the sphere. Interior-adjacent
            // chords are strictly inward automatically (convexity).
            for (p, other, exterior) in [
                (i, i.wrapping_sub(1), true),
                (i, i + 1, false),
                (j, j - 1, false),
                (j, j + 1, true),
            ] {
                if other >= n {
                    continue;
                }
                let d = v[other] - v[p];
                let len = d.norm();
                if len < tol {
                    ok = false;
                    break;
                }
                if exterior {
                    let radial = (v[p] - center) * (1.0 / radius);
                    if d.dot(radial) / len <= 1e-9 {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            for k in (0..i).chain(j..n - 1) {
                let slack = if k + 1 == i || k == j {
                    // Puncture-adjacent exterior chord: its far endpoint
                    // must clear the sphere (the near endpoint is ON it).
                    let far = if k + 1 == i { v[k] } else { v[k + 1] };
                    far.dist(center) - radius
                } else {
                    pt_seg_dist(center, v[k], v[k + 1]) - radius
                };
                if slack <= tol {
                    ok = false;
                    break;
                }
                margin = margin.min(slack);
            }
            if !ok {
                continue;
            }
            let key = [-((margin / bucket).floor() as i64), q(radius), -q(center.z)];
            let better = match &best {
                None => true,
                Some((bk, bi, bj)) => (key, i, j) < (*bk, *bi, *bj),
            };
            if better {
                best = Some((key, i, j));
            }
        }
    }
    let (_, i, j) = best.ok_or(ArcError::NoAdmissibleBall)?;
    let center = (v[i] + v[j]) * 0.5;
    let radius = v[i].dist(v[j]) * 0.5;
    let axis = (v[j] - v[i]) * (1.0 / (2.0 * radius));
    Ok(TwistBall {
        center,
        radius,
        axis,
        punctures: (i, j),
    })
}
