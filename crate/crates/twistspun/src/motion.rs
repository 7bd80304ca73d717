//! Motion pictures: hyperplane slices of surfaces and diagrams.
//!
//! A 2-knot is watched as a movie by slicing it along a one-parameter
//! family of hyperplanes and reading each slice as a link. Three
//! families are supported: vertical (`v = t`) and horizontal (`y = t`)
//! slices of an embedded surface in 4-space, and radial half-plane
//! slices of a projected diagram in 3-space, rotating about the
//! diagram's symmetry axis. Critical events of the slicing parameter
//! are detected by PL Morse theory (lower-link classification at mesh
//! vertices) and frames requested exactly at a critical value are
//! nudged off it by a documented epsilon and flagged.
//!
//! Frame coordinate conventions: every frame curve is a 3D polyline
//! whose coordinate 0 is the viewing depth for planar projection, so a
//! planar diagram of any frame is read by dropping that coordinate.
//! Vertical frames carry `(x, y, u)`, horizontal frames `(x, u, v)`,
//! and radial frames `(w, r, y)` where `r` is the distance from the
//! rotation axis and `w` the projection depth inherited from the
//! diagram. Closed curves repeat their first point at the end; radial
//! slices close their pole-to-pole arcs along the rotation axis (the
//! half-plane boundary), which no other curve point touches.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{BrokenSurface, Diagram3};
use crate::exec::ExecMode;
use crate::geom::{seg_seg_dist, Vec3, Vec4, EPS_INTERSECT};
use crate::spin::Surface4;

/// Relative step (times the parameter span) used to nudge a frame value
/// off a critical value; retried with growing multiples.
pub const FRAME_NUDGE: f64 = 1e-6;

/// Default number of frame values for the vertical and horizontal
/// families.
pub const DEFAULT_FRAME_COUNT: usize = 41;

/// Default number of radial angles.
pub const DEFAULT_RADIAL_ANGLES: usize = 32;

/// Absolute parameter tolerance used by the normal-form checker (the
/// normal-form levels are the fixed values -2, -1, 1, 2).
pub const NORMAL_FORM_TOL: f64 = 1e-6;

/// Nudge attempts before a frame value is given up on.
const MAX_NUDGES: usize = 8;

/// Largest relative distance of a diagram's poles from the rotation
/// axis for radial slicing to proceed.
const POLE_AXIS_LIMIT: f64 = 0.01;

/// Failures of slicing or event detection.
#[derive(Debug, Error, PartialEq)]
pub enum MotionError {
    /// The frame-value (or angle) list was empty.
    #[error("no frame values requested")]
    NoFrames,
    /// Radial slicing requires the rotation axis to be the first image
    /// coordinate, which only the first-axis projection provides.
    #[error("radial slicing requires a diagram projected along axis 0, got {0}")]
    WrongDropAxis(usize),
    /// The diagram's poles sit too far from the rotation axis, so
    /// half-plane frames would not meet the surface at the poles.
    #[error("diagram poles sit {dist:.3e} from the rotation axis (limit {limit:.3e})")]
    PolesOffAxis { dist: f64, limit: f64 },
    /// A frame value could not be moved off the surface's vertex levels.
    #[error("frame value {value} still hits a vertex level after {attempts} nudges")]
    NudgeFailed { value: f64, attempts: usize },
    /// The slice met the mesh non-generically (an edge inside the slice
    /// plane, or a stitch node of degree other than two).
    #[error("degenerate slice: {0}")]
    SliceDegeneracy(String),
    /// Critical events are defined for the vertical and horizontal
    /// families only.
    #[error("event detection runs on the vertical or horizontal family only")]
    RadialEvents,
}

/// The three slicing families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceFamily {
    Vertical,
    Horizontal,
    Radial,
}

impl std::fmt::Display for SliceFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SliceFamily::Vertical => write!(f, "vertical"),
            SliceFamily::Horizontal => write!(f, "horizontal"),
            SliceFamily::Radial => write!(f, "radial"),
        }
    }
}

/// One slice of a motion picture.
///
/// Curves follow the repeat-first-point convention for closedness; see
/// the module docs for the per-family coordinate layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    /// The parameter actually sliced at (after any nudge).
    pub parameter: f64,
    /// True when the requested value hit a vertex level and was nudged;
    /// flagged frames are excluded from invariant assertions.
    pub nudged: bool,
    pub curves: Vec<Vec<Vec3>>,
    /// Break marks: midpoints of slice segments that cross the removed
    /// under-bands of a broken diagram.
    pub breaks: Vec<Vec3>,
}

impl Frame {
    /// Number of link components in the frame.
    pub fn component_count(&self) -> usize {
        self.curves.len()
    }
}

/// Whether a frame curve is closed (repeat-first-point convention).
pub fn curve_is_closed(curve: &[Vec3]) -> bool {
    curve.len() > 2 && curve.first() == curve.last()
}

/// Kind of a critical event of the slicing parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Minimum,
    Maximum,
    Saddle,
}

/// A critical event of the height function on the surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalEvent {
    /// Parameter (height) at which the event happens.
    pub value: f64,
    pub kind: EventKind,
    /// 1 for ordinary events; a monkey saddle (lower link with `c`
    /// components) is reported once with multiplicity `c - 1`, never
    /// silently split.
    pub multiplicity: usize,
    /// Location in the family's 3D slice coordinates.
    pub location: Vec3,
    /// Whole critical circle for symmetry-aligned (untilted) slicing:
    /// the vertices of the critical plateau in mesh order. Degenerate
    /// events may change the frame component count by more than one,
    /// and the Morse balance is only asserted for tilted directions.
    pub degenerate_set: Option<Vec<Vec3>>,
}

/// A sliced movie: ordered frames plus the critical events between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionPicture {
    pub family: SliceFamily,
    /// Frames ordered by strictly increasing parameter.
    pub frames: Vec<Frame>,
    /// Critical events ordered by value (empty for the radial family,
    /// whose singular angles are reported through frame nudge flags).
    pub events: Vec<CriticalEvent>,
    /// Human-readable description of the sliced object.
    pub source: String,
}

/// The four normal-form conditions, individually and combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub ok: bool,
    /// Every minimum sits at parameter -2.
    pub minima_at_minus_two: bool,
    /// Every maximum sits at parameter 2.
    pub maxima_at_plus_two: bool,
    /// Every saddle sits at parameter -1 or 1.
    pub saddles_at_unit_levels: bool,
    /// The frame nearest parameter 0 is a connected (one-component) link.
    pub middle_frame_connected: bool,
}

/// `count` evenly spaced frame values spanning `[lo, hi]` padded by 5%
/// on each side. A single frame sits at the middle of the range.
pub fn frame_values(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let pad = 0.05 * (hi - lo);
    let (a, b) = (lo - pad, hi + pad);
    if count <= 1 {
        return vec![0.5 * (a + b); count];
    }
    (0..count)
        .map(|k| a + (b - a) * k as f64 / (count - 1) as f64)
        .collect()
}

/// Evenly spaced frame values: `DEFAULT_FRAME_COUNT` values spanning
/// `[lo, hi]` padded by 5% on each side.
pub fn default_frame_values(lo: f64, hi: f64) -> Vec<f64> {
    frame_values(lo, hi, DEFAULT_FRAME_COUNT)
}

/// `count` evenly spaced radial angles over `[0, 2π)`.
pub fn radial_angles(count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| std::f64::consts::TAU * k as f64 / count.max(1) as f64)
        .collect()
}

/// Evenly spaced radial angles: `DEFAULT_RADIAL_ANGLES` values over
/// `[0, 2π)`.
pub fn default_radial_angles() -> Vec<f64> {
    radial_angles(DEFAULT_RADIAL_ANGLES)
}

// --- Plane marching core ----------------------------------------------

/// Stitch node of a slice: a crossed mesh edge or an on-plane vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SliceKey {
    Edge(u32, u32),
    Vert(u32),
}

/// One closed slice polyline in cyclic order: `tris[i]` is the triangle
/// producing the segment from `points[i]` to `points[(i+1) % n]`, and
/// `keys[i]` the stitch node at `points[i]`.
struct RawLoop {
    points: Vec<Vec4>,
    keys: Vec<SliceKey>,
    tris: Vec<u32>,
}

#[derive(Clone, Copy)]
struct SliceNode {
    key: SliceKey,
    p: Vec4,
}

/// Crossing point of edge `(a, b)` with the zero level of `f`, computed
/// from the canonical vertex order so both incident triangles produce
/// bitwise-identical nodes.
fn edge_node(pos: &[Vec4], f: &[f64], a: u32, b: u32) -> SliceNode {
    let (lo, hi) = (a.min(b), a.max(b));
    let (fa, fb) = (f[lo as usize], f[hi as usize]);
    let t = fa / (fa - fb);
    let (pa, pb) = (pos[lo as usize], pos[hi as usize]);
    SliceNode {
        key: SliceKey::Edge(lo, hi),
        p: pa + (pb - pa) * t,
    }
}

/// Marches the zero level of the per-vertex function `f` across the
/// mesh and stitches the crossing segments into closed loops.
///
/// A vertex lies on the plane exactly when `f` is bitwise zero (callers
/// force that for intended on-plane vertices and nudge everything else
/// away). Every stitch node must join exactly two segment ends, which
/// holds for a generic plane through a closed surface.
fn march_loops(
    pos: &[Vec4],
    triangles: &[[u32; 3]],
    f: &[f64],
) -> Result<Vec<RawLoop>, MotionError> {
    let mut segs: Vec<(SliceNode, SliceNode, u32)> = Vec::new();
    for (ti, tri) in triangles.iter().enumerate() {
        let fv = [f[tri[0] as usize], f[tri[1] as usize], f[tri[2] as usize]];
        let zeros: Vec<usize> = (0..3).filter(|&k| fv[k] == 0.0).collect();
        let pos_count = fv.iter().filter(|&&x| x > 0.0).count();
        let neg_count = fv.iter().filter(|&&x| x < 0.0).count();
        match zeros.len() {
            0 => {
                if pos_count == 0 || neg_count == 0 {
                    continue;
                }
                // Exactly one vertex sits alone on its side.
                let lone = (0..3)
                    .find(|&k| {
                        let s = fv[k] > 0.0;
                        (fv[(k + 1) % 3] > 0.0) != s && (fv[(k + 2) % 3] > 0.0) != s
                    })
                    .expect("mixed signs have a lone vertex");
                let (a, b, c) = (tri[lone], tri[(lone + 1) % 3], tri[(lone + 2) % 3]);
                let n1 = edge_node(pos, f, a, b);
                let n2 = edge_node(pos, f, a, c);
                segs.push((n1, n2, ti as u32));
            }
            1 => {
                // A segment only when the other two vertices straddle the
                // plane; otherwise the triangle touches at the vertex.
                if pos_count == 1 && neg_count == 1 {
                    let v = tri[zeros[0]];
                    let (b, c) = (tri[(zeros[0] + 1) % 3], tri[(zeros[0] + 2) % 3]);
                    let n1 = SliceNode {
                        key: SliceKey::Vert(v),
                        p: pos[v as usize],
                    };
                    let n2 = edge_node(pos, f, b, c);
                    segs.push((n1, n2, ti as u32));
                }
            }
            _ => {
                return Err(MotionError::SliceDegeneracy(format!(
                    "triangle {ti} has an edge inside the slice plane"
                )));
            }
        }
    }

    let mut by_key: BTreeMap<SliceKey, Vec<(usize, u8)>> = BTreeMap::new();
    for (i, s) in segs.iter().enumerate() {
        by_key.entry(s.0.key).or_default().push((i, 0));
        by_key.entry(s.1.key).or_default().push((i, 1));
    }
    for (key, ends) in &by_key {
        if ends.len() != 2 {
            return Err(MotionError::SliceDegeneracy(format!(
                "slice node {key:?} joins {} segment ends (2 expected)",
                ends.len()
            )));
        }
    }

    let mut visited = vec![false; segs.len()];
    let mut loops = Vec::new();
    for start in 0..segs.len() {
        if visited[start] {
            continue;
        }
        let mut points = Vec::new();
        let mut keys = Vec::new();
        let mut tris = Vec::new();
        let (mut cur, mut entry) = (start, 0u8);
        loop {
            visited[cur] = true;
            let seg = &segs[cur];
            let (n_in, n_out) = if entry == 0 {
                (seg.0, seg.1)
            } else {
                (seg.1, seg.0)
            };
            points.push(n_in.p);
            keys.push(n_in.key);
            tris.push(seg.2);
            let exit_side = 1 - entry;
            let ends = &by_key[&n_out.key];
            let &(next, next_side) = ends
                .iter()
                .find(|&&(s, d)| !(s == cur && d == exit_side))
                .expect("degree checked above");
            if next == start && next_side == 0 {
                break;
            }
            if visited[next] {
                return Err(MotionError::SliceDegeneracy(
                    "slice walk revisited a segment before closing".into(),
                ));
            }
            cur = next;
            entry = next_side;
        }
        loops.push(RawLoop { points, keys, tris });
    }
    Ok(loops)
}

// --- Vertical / horizontal surface slicing ----------------------------

fn family_axis(family: SliceFamily) -> usize {
    match family {
        SliceFamily::Vertical => 3,
        SliceFamily::Horizontal => 1,
        SliceFamily::Radial => unreachable!("radial slices take a diagram"),
    }
}

fn surface_scale(surface: &Surface4) -> f64 {
    let mut lo = surface.vertices[0];
    let mut hi = surface.vertices[0];
    for &p in &surface.vertices[1..] {
        lo = lo.min(p);
        hi = hi.max(p);
    }
    let d = hi - lo;
    d.dot(d).sqrt().max(f64::MIN_POSITIVE)
}

/// One vertical or horizontal frame; `t_req` is nudged off vertex levels
/// with growing multiples of `FRAME_NUDGE * span`.
fn build_surface_frame(
    surface: &Surface4,
    axis: usize,
    t_req: f64,
    tol: f64,
    span: f64,
) -> Result<Frame, MotionError> {
    let mut t = t_req;
    let mut nudged = false;
    for attempt in 1..=MAX_NUDGES {
        if surface
            .vertices
            .iter()
            .any(|p| (p.coord(axis) - t).abs() <= tol)
        {
            t = t_req + FRAME_NUDGE * span * attempt as f64;
            nudged = true;
            continue;
        }
        let f: Vec<f64> = surface.vertices.iter().map(|p| p.coord(axis) - t).collect();
        let loops = march_loops(&surface.vertices, &surface.triangles, &f)?;
        let curves = loops
            .into_iter()
            .map(|lp| {
                let mut c: Vec<Vec3> = lp.points.iter().map(|p| p.drop_coord(axis)).collect();
                if let Some(&first) = c.first() {
                    c.push(first);
                }
                c
            })
            .collect();
        return Ok(Frame {
            parameter: t,
            nudged,
            curves,
            breaks: Vec::new(),
        });
    }
    Err(MotionError::NudgeFailed {
        value: t_req,
        attempts: MAX_NUDGES,
    })
}

fn slice_surface(
    surface: &Surface4,
    family: SliceFamily,
    frame_values: &[f64],
    mode: ExecMode,
) -> Result<MotionPicture, MotionError> {
    if frame_values.is_empty() {
        return Err(MotionError::NoFrames);
    }
    let axis = family_axis(family);
    let tol = EPS_INTERSECT * surface_scale(surface);
    let (lo, hi) = surface
        .vertices
        .iter()
        .map(|p| p.coord(axis))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        });
    let span = (hi - lo).max(tol);

    let mut values: Vec<f64> = frame_values.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let events = detect_events(surface, family, 0.0, 0)?;
    let results = mode.map(&values, |&t| {
        build_surface_frame(surface, axis, t, tol, span)
    });
    let mut frames = Vec::with_capacity(results.len());
    for r in results {
        frames.push(r?);
    }
    Ok(MotionPicture {
        family,
        frames,
        events,
        source: format!(
            "surface({} vertices, {} triangles, {} rings)",
            surface.vertices.len(),
            surface.triangles.len(),
            surface.rings
        ),
    })
}

/// Slices the surface along hyperplanes `{v = t}`, one frame per value,
/// in `(x, y, u)` coordinates.
pub fn slice_vertical(
    surface: &Surface4,
    frame_values: &[f64],
    mode: ExecMode,
) -> Result<MotionPicture, MotionError> {
    slice_surface(surface, SliceFamily::Vertical, frame_values, mode)
}

/// Slices the surface along hyperplanes `{y = t}`, one frame per value,
/// in `(x, u, v)` coordinates.
pub fn slice_horizontal(
    surface: &Surface4,
    frame_values: &[f64],
    mode: ExecMode,
) -> Result<MotionPicture, MotionError> {
    slice_surface(surface, SliceFamily::Horizontal, frame_values, mode)
}

// --- Radial diagram slicing --------------------------------------------

/// One radial frame at (nudged) angle `theta`; see `slice_radial`.
fn build_radial_frame(
    diagram: &Diagram3,
    broken: Option<&BrokenSurface>,
    theta_req: f64,
    tol: f64,
    poles: (u32, u32),
) -> Result<Frame, MotionError> {
    let verts = &diagram.vertices;
    let is_pole = |i: usize| i as u32 == poles.0 || i as u32 == poles.1;
    let mut theta = theta_req;
    let mut nudged = false;
    for attempt in 1..=MAX_NUDGES {
        let (s, c) = theta.sin_cos();
        // Image coordinates are (y, u, v); the rotation axis is the
        // first one, so the half-plane at angle theta is
        // {u sinθ - v cosθ = 0, u cosθ + v sinθ ≥ 0}.
        let f: Vec<f64> = verts
            .iter()
            .enumerate()
            .map(|(i, p)| if is_pole(i) { 0.0 } else { p.y * s - p.z * c })
            .collect();
        if f.iter()
            .enumerate()
            .any(|(i, &x)| !is_pole(i) && x.abs() <= tol)
        {
            theta = theta_req + FRAME_NUDGE * std::f64::consts::TAU * attempt as f64;
            nudged = true;
            continue;
        }
        // Pack the depth channel as the fourth coordinate so slice
        // points interpolate it exactly.
        let packed: Vec<Vec4> = verts
            .iter()
            .zip(&diagram.depths)
            .map(|(p, &w)| Vec4 {
                x: p.x,
                y: p.y,
                u: p.z,
                v: w,
            })
            .collect();
        let loops = march_loops(&packed, &diagram.triangles, &f)?;

        // Radial frame coordinates: (depth, axis distance, axial).
        let radius = |p: Vec4| p.y * c + p.u * s;
        let to_frame = |p: Vec4| Vec3::new(p.v, radius(p), p.x);
        let in_gap = |tri: u32| broken.is_some_and(|b| b.gap_triangles.binary_search(&tri).is_ok());

        let mut curves: Vec<Vec<Vec3>> = Vec::new();
        let mut breaks: Vec<Vec3> = Vec::new();
        let mut keep_breaks = |points: &[Vec4], tris: &[u32], wrap: bool| {
            let n = points.len();
            let upper = if wrap { n } else { n - 1 };
            for i in 0..upper {
                if in_gap(tris[i]) {
                    let mid = (points[i] + points[(i + 1) % n]) * 0.5;
                    breaks.push(to_frame(mid));
                }
            }
        };

        for lp in &loops {
            let n = lp.points.len();
            let pole_at: Vec<usize> = (0..n)
                .filter(|&i| matches!(lp.keys[i], SliceKey::Vert(_)))
                .collect();
            if pole_at.is_empty() {
                // A loop away from the axis belongs entirely to one
                // half-plane; keep the near side.
                let side = lp
                    .points
                    .iter()
                    .map(|&p| radius(p))
                    .max_by(f64::total_cmp)
                    .unwrap_or(-1.0);
                if side <= 0.0 {
                    continue;
                }
                let mut curve: Vec<Vec3> = lp.points.iter().map(|&p| to_frame(p)).collect();
                curve.push(curve[0]);
                keep_breaks(&lp.points, &lp.tris, true);
                curves.push(curve);
            } else {
                // Split at the poles; each arc lies in one half-plane.
                // Arcs on the near side close along the rotation axis.
                for (k, &start) in pole_at.iter().enumerate() {
                    let end = pole_at[(k + 1) % pole_at.len()];
                    let len = (end + n - start) % n;
                    let len = if len == 0 { n } else { len };
                    let idx: Vec<usize> = (0..=len).map(|d| (start + d) % n).collect();
                    let side = idx
                        .iter()
                        .map(|&i| radius(lp.points[i]))
                        .max_by(f64::total_cmp)
                        .unwrap_or(-1.0);
                    if side <= 0.0 {
                        continue;
                    }
                    let pts: Vec<Vec4> = idx.iter().map(|&i| lp.points[i]).collect();
                    let tris: Vec<u32> = idx.iter().map(|&i| lp.tris[i]).collect();
                    let mut curve: Vec<Vec3> = pts.iter().map(|&p| to_frame(p)).collect();
                    curve.push(curve[0]);
                    keep_breaks(&pts, &tris, false);
                    curves.push(curve);
                }
            }
        }
        return Ok(Frame {
            parameter: theta,
            nudged,
            curves,
            breaks,
        });
    }
    Err(MotionError::NudgeFailed {
        value: theta_req,
        attempts: MAX_NUDGES,
    })
}

/// Slices a projected diagram along closed half-planes through its
/// rotation axis, one frame per angle, in `(depth, radius, axial)`
/// coordinates.
///
/// Requires a first-axis projection so the rotation axis is the image's
/// first coordinate, with both surface poles on it. Pole-to-pole arcs
/// are closed along the axis (no other curve point touches it). When a
/// broken surface is supplied, slice segments crossing its under-band
/// triangles are recorded as break marks. Angle values are taken mod 2π;
/// angles hitting mesh vertices are nudged and flagged. The radial
/// family carries no event list.
pub fn slice_radial(
    diagram: &Diagram3,
    broken: Option<&BrokenSurface>,
    angles: &[f64],
    mode: ExecMode,
) -> Result<MotionPicture, MotionError> {
    if angles.is_empty() {
        return Err(MotionError::NoFrames);
    }
    if diagram.drop_axis != 0 {
        return Err(MotionError::WrongDropAxis(diagram.drop_axis));
    }
    let scale = diagram.scale();
    let tol = EPS_INTERSECT * scale;
    let poles = (0u32, diagram.vertices.len() as u32 - 1);
    let off_axis = [poles.0, poles.1]
        .iter()
        .map(|&p| {
            let v = diagram.vertices[p as usize];
            v.y.hypot(v.z)
        })
        .fold(0.0, f64::max);
    let limit = POLE_AXIS_LIMIT * scale;
    if off_axis > limit {
        return Err(MotionError::PolesOffAxis {
            dist: off_axis,
            limit,
        });
    }

    let mut values: Vec<f64> = angles
        .iter()
        .map(|a| a.rem_euclid(std::f64::consts::TAU))
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();

    let results = mode.map(&values, |&theta| {
        build_radial_frame(diagram, broken, theta, tol, poles)
    });
    let mut frames = Vec::with_capacity(results.len());
    for r in results {
        frames.push(r?);
    }
    Ok(MotionPicture {
        family: SliceFamily::Radial,
        frames,
        events: Vec::new(),
        source: format!(
            "{}({} vertices, {} triangles, drop axis {})",
            if broken.is_some() {
                "broken-diagram"
            } else {
                "diagram"
            },
            diagram.vertices.len(),
            diagram.triangles.len(),
            diagram.drop_axis
        ),
    })
}

// --- PL Morse events ----------------------------------------------------

/// Per-vertex link edges: for every triangle `[a, b, c]`, vertex `a`
/// receives the opposite edge `(b, c)`, and cyclically.
fn vertex_links(vertex_count: usize, triangles: &[[u32; 3]]) -> Vec<Vec<(u32, u32)>> {
    let mut links = vec![Vec::new(); vertex_count];
    for t in triangles {
        for k in 0..3 {
            links[t[k] as usize].push((t[(k + 1) % 3], t[(k + 2) % 3]));
        }
    }
    links
}

/// Connected components of the subset `keep` of a vertex link, using
/// the link's own edges.
fn link_components(link: &[(u32, u32)], keep: &dyn Fn(u32) -> bool) -> usize {
    let mut verts: Vec<u32> = Vec::new();
    for &(a, b) in link {
        for v in [a, b] {
            if keep(v) && !verts.contains(&v) {
                verts.push(v);
            }
        }
    }
    if verts.is_empty() {
        return 0;
    }
    let mut comp: Vec<usize> = (0..verts.len()).collect();
    let index = |v: u32, verts: &[u32]| verts.iter().position(|&w| w == v);
    for &(a, b) in link {
        if keep(a) && keep(b) {
            let (ia, ib) = (index(a, &verts).unwrap(), index(b, &verts).unwrap());
            let (ra, rb) = (comp[ia], comp[ib]);
            if ra != rb {
                for c in comp.iter_mut() {
                    if *c == rb {
                        *c = ra;
                    }
                }
            }
        }
    }
    let mut roots: Vec<usize> = comp.clone();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Classification of one vertex under the simulated-simplicity order
/// `(height, index)`.
enum VertexClass {
    Regular,
    Minimum,
    Maximum,
    Saddle(usize),
}

fn classify_vertex(i: u32, h: &[f64], link: &[(u32, u32)]) -> VertexClass {
    let lower = |j: u32| (h[j as usize], j) < (h[i as usize], i);
    let upper = |j: u32| (h[j as usize], j) > (h[i as usize], i);
    let low = link_components(link, &lower);
    let up = link_components(link, &upper);
    match (low, up) {
        (0, _) => VertexClass::Minimum,
        (_, 0) => VertexClass::Maximum,
        (1, _) => VertexClass::Regular,
        (c, _) => VertexClass::Saddle(c - 1),
    }
}

/// Detects the critical events of the slicing parameter on the surface
/// by PL Morse theory.
///
/// The height is the family coordinate (`v` for vertical, `y` for
/// horizontal), optionally tilted by a seeded direction jitter of
/// magnitude `tilt` to break symmetry. Each vertex is classified by the
/// component count of its lower link under the simulated-simplicity
/// order `(height, vertex index)`: empty lower link is a minimum, empty
/// upper link a maximum, `c ≥ 2` components a saddle of multiplicity
/// `c - 1`.
///
/// With `tilt = 0`, symmetry-aligned slicing can put whole circles of
/// vertices at one height. Critical vertices on such a plateau are
/// merged into a single event carrying the plateau as `degenerate_set`,
/// classified by the plateau's contracted link (nothing below it is a
/// minimum, nothing above a maximum, a split lower link a saddle); a
/// plateau whose contracted link is regular yields no event. The PL
/// Morse balance `#min + #max - #saddles = χ` therefore holds for
/// tilted directions, and is only asserted there.
pub fn detect_events(
    surface: &Surface4,
    family: SliceFamily,
    tilt: f64,
    seed: u64,
) -> Result<Vec<CriticalEvent>, MotionError> {
    if family == SliceFamily::Radial {
        return Err(MotionError::RadialEvents);
    }
    let axis = family_axis(family);
    let dir = if tilt > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = Vec4 {
            x: tilt * rng.gen_range(-1.0..1.0),
            y: tilt * rng.gen_range(-1.0..1.0),
            u: tilt * rng.gen_range(-1.0..1.0),
            v: tilt * rng.gen_range(-1.0..1.0),
        };
        match axis {
            1 => d.y += 1.0,
            _ => d.v += 1.0,
        }
        let norm = d.dot(d).sqrt();
        d * (1.0 / norm)
    } else {
        let mut d = Vec4 {
            x: 0.0,
            y: 0.0,
            u: 0.0,
            v: 0.0,
        };
        match axis {
            1 => d.y = 1.0,
            _ => d.v = 1.0,
        }
        d
    };

    let n = surface.vertices.len();
    let h: Vec<f64> = surface.vertices.iter().map(|p| p.dot(dir)).collect();
    let links = vertex_links(n, &surface.triangles);

    let location = |i: usize| surface.vertices[i].drop_coord(axis);
    let mut singles: Vec<(u32, VertexClass)> = Vec::new();
    for i in 0..n as u32 {
        match classify_vertex(i, &h, &links[i as usize]) {
            VertexClass::Regular => {}
            class => singles.push((i, class)),
        }
    }

    let mut events: Vec<CriticalEvent> = Vec::new();
    let mut consumed = vec![false; n];

    if tilt == 0.0 {
        // Group equal heights, split into mesh-connected plateaus, and
        // merge the critical vertices each plateau contains.
        let mut by_height: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for (i, &hi) in h.iter().enumerate() {
            let canon = if hi == 0.0 { 0.0f64 } else { hi };
            by_height.entry(canon.to_bits()).or_default().push(i as u32);
        }
        let critical: std::collections::BTreeSet<u32> = singles.iter().map(|&(i, _)| i).collect();
        for group in by_height.values() {
            if group.len() < 2 {
                continue;
            }
            let in_group: std::collections::BTreeSet<u32> = group.iter().copied().collect();
            let mut seen: std::collections::BTreeSet<u32> = std::collections::BTreeSet::new();
            for &start in group {
                if seen.contains(&start) {
                    continue;
                }
                // Flood the plateau component through mesh edges.
                let mut comp = vec![start];
                let mut stack = vec![start];
                seen.insert(start);
                while let Some(v) = stack.pop() {
                    for &(a, b) in &links[v as usize] {
                        for w in [a, b] {
                            if in_group.contains(&w) && seen.insert(w) {
                                comp.push(w);
                                stack.push(w);
                            }
                        }
                    }
                }
                if comp.len() < 2 || !comp.iter().any(|v| critical.contains(v)) {
                    continue;
                }
                comp.sort_unstable();
                for &v in &comp {
                    consumed[v as usize] = true;
                }
                // Classify the contracted plateau by its outside link.
                let height = h[start as usize];
                let inside: std::collections::BTreeSet<u32> = comp.iter().copied().collect();
                let mut low: Vec<u32> = Vec::new();
                let mut up: Vec<u32> = Vec::new();
                for &v in &comp {
                    for &(a, b) in &links[v as usize] {
                        for w in [a, b] {
                            if !inside.contains(&w) {
                                if h[w as usize] < height && !low.contains(&w) {
                                    low.push(w);
                                } else if h[w as usize] > height && !up.contains(&w) {
                                    up.push(w);
                                }
                            }
                        }
                    }
                }
                // Components of the lower outside link, joined whenever
                // two of its vertices share a triangle with the plateau.
                let comp_count = |side: &[u32]| -> usize {
                    if side.is_empty() {
                        return 0;
                    }
                    let mut cc: Vec<usize> = (0..side.len()).collect();
                    for t in &surface.triangles {
                        if !t.iter().any(|v| inside.contains(v)) {
                            continue;
                        }
                        let here: Vec<usize> = t
                            .iter()
                            .filter_map(|v| side.iter().position(|&s| s == *v))
                            .collect();
                        for w in here.windows(2) {
                            let (ra, rb) = (cc[w[0]], cc[w[1]]);
                            if ra != rb {
                                for c in cc.iter_mut() {
                                    if *c == rb {
                                        *c = ra;
                                    }
                                }
                            }
                        }
                    }
                    let mut roots = cc;
                    roots.sort_unstable();
                    roots.dedup();
                    roots.len()
                };
                let c_low = comp_count(&low);
                let c_up = comp_count(&up);
                let (kind, multiplicity) = match (c_low, c_up) {
                    (0, _) => (EventKind::Minimum, 1),
                    (_, 0) => (EventKind::Maximum, 1),
                    (1, 1) => continue, // regular plateau after contraction
                    (c, _) => (EventKind::Saddle, c - 1),
                };
                let set: Vec<Vec3> = comp.iter().map(|&v| location(v as usize)).collect();
                let centroid = set.iter().fold(Vec3::new(0.0, 0.0, 0.0), |a, &p| a + p)
                    * (1.0 / set.len() as f64);
                events.push(CriticalEvent {
                    value: height,
                    kind,
                    multiplicity,
                    location: centroid,
                    degenerate_set: Some(set),
                });
            }
        }
    }

    for (i, class) in singles {
        if consumed[i as usize] {
            continue;
        }
        let (kind, multiplicity) = match class {
            VertexClass::Minimum => (EventKind::Minimum, 1),
            VertexClass::Maximum => (EventKind::Maximum, 1),
            VertexClass::Saddle(m) => (EventKind::Saddle, m),
            VertexClass::Regular => unreachable!(),
        };
        events.push(CriticalEvent {
            value: h[i as usize],
            kind,
            multiplicity,
            location: location(i as usize),
            degenerate_set: None,
        });
    }

    events.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.location.x.total_cmp(&b.location.x))
            .then(a.location.y.total_cmp(&b.location.y))
            .then(a.location.z.total_cmp(&b.location.z))
    });
    Ok(events)
}

/// Evaluates the four normal-form conditions on a motion picture:
/// minima at parameter -2, maxima at 2, saddles at ±1, and a connected
/// link at parameter 0 (checked on the frame nearest 0). Comparisons
/// use the absolute tolerance [`NORMAL_FORM_TOL`].
pub fn check_normal_form(mp: &MotionPicture) -> NormalFormReport {
    let near = |a: f64, b: f64| (a - b).abs() <= NORMAL_FORM_TOL;
    let mut minima = true;
    let mut maxima = true;
    let mut saddles = true;
    for e in &mp.events {
        match e.kind {
            EventKind::Minimum => minima &= near(e.value, -2.0),
            EventKind::Maximum => maxima &= near(e.value, 2.0),
            EventKind::Saddle => saddles &= near(e.value, -1.0) || near(e.value, 1.0),
        }
    }
    let middle = mp
        .frames
        .iter()
        .min_by(|a, b| a.parameter.abs().total_cmp(&b.parameter.abs()));
    let connected = middle.is_some_and(|f| f.curves.len() == 1);
    NormalFormReport {
        ok: minima && maxima && saddles && connected,
        minima_at_minus_two: minima,
        maxima_at_plus_two: maxima,
        saddles_at_unit_levels: saddles,
        middle_frame_connected: connected,
    }
}

/// Smallest distance between distinct curves of a frame, and between
/// non-adjacent segments within one curve; `f64::INFINITY` when the
/// frame has no such pair. Regular-value frames of an embedded surface
/// keep this above the stitching tolerance.
pub fn frame_separation(frame: &Frame) -> f64 {
    let curves = &frame.curves;
    let mut best = f64::INFINITY;
    for (ci, c) in curves.iter().enumerate() {
        let closed = curve_is_closed(c);
        let n = c.len() - 1; // segment count under repeat-first convention
                             // Non-adjacent self distances.
        for i in 0..n {
            for j in (i + 2)..n {
                if closed && i == 0 && j == n - 1 {
                    continue;
                }
                best = best.min(seg_seg_dist(c[i], c[i + 1], c[j], c[j + 1]));
            }
        }
        // Distances to later curves.
        for other in curves.iter().skip(ci + 1) {
            for i in 0..n {
                for j in 0..other.len() - 1 {
                    best = best.min(seg_seg_dist(c[i], c[i + 1], other[j], other[j + 1]));
                }
            }
        }
    }
    best
}
