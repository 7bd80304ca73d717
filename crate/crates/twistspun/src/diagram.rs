//! Projection of surfaces in 4-space to broken-surface diagrams in
//! 3-space.
//!
//! A generic projection of an embedded closed surface misses genuine
//! singularities of the *map* only: the image has double curves where two
//! sheets cross, isolated triple points where three sheets meet, and (for
//! unperturbed, symmetry-preserving projections) possibly branch points
//! where a double curve ends at a mesh vertex. [`project_generic`]
//! produces the projected mesh together with a genericity certificate;
//! [`compute_singularity_set`] extracts the double curves, triple points
//! and branch points; [`break_sheets`] cuts the under-sheet along every
//! double curve, yielding the broken-surface presentation whose sheet
//! count is a diagram invariant.
//!
//! Exactness strategy: the meshes produced by spinning are "in phase" —
//! every ring plane contains edges of *both* sheets through a double
//! curve, so the curve crosses edges of both triangles at once at every
//! ring. Fuzzy position matching would be hopeless there; instead every
//! intersection segment carries combinatorial endpoint tags
//! ([`crate::geom::SegEnd`]) and curves are stitched by exact tag
//! equality. Measure-zero contacts (the mirrored triangle pairs at those
//! ring crossings) are classified as touches and discarded.
//!
//! Fold chatter: where the projection direction grazes the surface the
//! image folds over itself, and the two PL layers of a fold — which in
//! the smooth picture are tangent and disjoint — cross each other at
//! shallow angles. These artifact crossings always join triangles that
//! are combinatorially close (within [`LOCAL_COLLAR`] rings and sectors
//! of each other), while crossings that witness actual knotting join
//! far-apart parts of the mesh. The stitcher therefore assembles *all*
//! crossings into curves first and then discards components consisting
//! entirely of collar-local pairs.

use crate::bvh::Bvh;
use crate::exec::ExecMode;
use crate::geom::{
    cayley_rotation, coplanar_triangles_overlap, pt_seg_dist, solve3, tri_tri_intersection, Aabb3,
    IsectSegment, SegEnd, TriTriOutcome, Vec3, Vec4, EPS_INTERSECT, EPS_STITCH,
};
use crate::spin::Surface4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Default relative width of the gap cut into under-sheets when breaking.
pub const DEFAULT_BAND_WIDTH: f64 = 0.01;

/// Combinatorial radius (in rings and sectors) below which a crossing
/// triangle pair counts as two layers of one local patch rather than two
/// distinct sheets. PL fold chatter lives strictly inside this collar;
/// crossings that witness knotting join patches several rings apart.
pub const LOCAL_COLLAR: i64 = 2;

const MAX_ATTEMPTS: usize = 8;

/// Errors from projection and singularity extraction.
#[derive(Debug, Error, PartialEq)]
pub enum DiagramError {
    /// Every perturbation attempt left a degeneracy in the image.
    #[error("projection stayed degenerate after {attempts} attempts")]
    GenericityFailure { attempts: usize },
    /// The intersection segments do not assemble into curves.
    #[error("double-curve stitching failed: {0}")]
    StitchingFailure(String),
    /// The requested gap band would merge distinct double curves.
    #[error("sheet-break band {band} is over-broad: {reason}")]
    OverBroadBand { band: f64, reason: String },
    /// The surface has no triangles to project.
    #[error("surface has no triangles")]
    EmptySurface,
    /// Axis index outside `0..4`.
    #[error("drop axis must be 0..4 (x, y, u, v), got {0}")]
    BadAxis(usize),
}

/// Genericity certificate of a projection: what the pair scan of the
/// projected mesh found.
///
/// `clean` means the image is generic at mesh resolution: no coplanar
/// overlaps, no vertex lying on a non-adjacent triangle, no degenerate
/// triangles, no coincident vertices. Touch-grade contacts are generic
/// (they are the mirrored companions of edge-through-edge crossings) and
/// only counted for information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenericityCertificate {
    /// Projection attempts used (1 = first perturbation worked).
    pub attempts: usize,
    /// No degeneracies at all in the accepted attempt.
    pub clean: bool,
    /// Coplanar triangle pairs overlapping with positive area.
    pub coplanar_overlaps: usize,
    /// Intersection segments with an endpoint at a mesh vertex.
    pub vertex_contacts: usize,
    /// Projected triangles with (near-)zero area.
    pub degenerate_triangles: usize,
    /// Distinct mesh vertices landing on the same projected point.
    pub coincident_vertices: usize,
    /// Proper crossing segments found (informational).
    pub crossing_segments: usize,
    /// Measure-zero contacts discarded (informational).
    pub touch_contacts: usize,
}

/// A surface mesh projected to 3-space, with per-vertex depth along the
/// dropped axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagram3 {
    /// Projected vertex positions.
    pub vertices: Vec<Vec3>,
    /// Triangles, same combinatorics as the source surface.
    pub triangles: Vec<[u32; 3]>,
    /// Depth of each vertex along the dropped axis; larger is nearer the
    /// viewer ("over").
    pub depths: Vec<f64>,
    /// Which axis of `(x, y, u, v)` was dropped (0..4).
    pub drop_axis: usize,
    /// The 4-space direction that was projected out, in the original
    /// surface coordinates (the rotated axis pulled back).
    pub projection_direction: Vec4,
    /// Cayley parameters of the perturbation rotation actually applied.
    pub rotation_params: [f64; 6],
    /// Ring count inherited from the source surface.
    pub rings: usize,
    /// Scan results for the accepted projection.
    pub certificate: GenericityCertificate,
}

/// One double curve of a diagram: the stitched polyline where two sheets
/// cross.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleCurve {
    /// Polyline through the stitched segment endpoints. For closed curves
    /// the last point equals the first.
    pub points: Vec<Vec3>,
    pub closed: bool,
}

/// Isolated point where three sheets of the image meet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriplePoint {
    pub position: Vec3,
    /// The three pairwise-crossing triangles realising the point.
    pub triangles: [u32; 3],
}

/// Point where a double curve terminates (only at mesh vertices lying on
/// another sheet; absent from perturbed generic projections).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub position: Vec3,
    /// Index of the curve that ends here.
    pub curve: usize,
}

/// Internal record: one stitched intersection segment plus provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSegment {
    pub tri_a: u32,
    pub tri_b: u32,
    pub a: Vec3,
    pub b: Vec3,
    #[serde(skip)]
    pub end_a: Option<SegEnd>,
    #[serde(skip)]
    pub end_b: Option<SegEnd>,
}

/// The complete singularity set of a projected diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularitySet {
    pub curves: Vec<DoubleCurve>,
    pub triple_points: Vec<TriplePoint>,
    pub branch_points: Vec<BranchPoint>,
    /// The raw stitched segments, grouped by curve, in walk order.
    pub curve_segments: Vec<Vec<CurveSegment>>,
    /// Fold-chatter components discarded during classification: curves
    /// all of whose crossings joined collar-local triangle pairs.
    pub chatter_curves: usize,
}

/// Headline counts of a diagram's singularity set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularitySummary {
    pub double_curve_count: usize,
    pub triple_point_count: usize,
    pub branch_point_count: usize,
    pub sheet_count: usize,
}

/// Sheets of a diagram after cutting under-sheets along double curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokenSurface {
    /// Connected components of the broken surface.
    pub sheet_count: usize,
    /// Components of the cut locus on the surface: the under-side arcs
    /// and loops of the double curves.
    pub under_arcs: usize,
    /// Transversal self-crossings of the cut locus. These are the
    /// under-preimages of triple points: the bottom sheet of a triple
    /// point is cut by both curves through it.
    pub under_crossings: usize,
    /// Mesh edges (canonical vertex pairs) the cut crosses on the under
    /// side (rendering aid).
    pub cut_edges: Vec<(u32, u32)>,
    /// Under-side triangles within the gap band of a double curve
    /// (rendered as the visual gap).
    pub gap_triangles: Vec<u32>,
    /// Relative band width used.
    pub band_width: f64,
}

/// Search over candidate projection directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSearch {
    /// Direction (original coordinates) achieving the fewest triple points.
    pub best_direction: Vec4,
    pub best_triple_count: usize,
    /// One entry per candidate, in order; failed candidates stay in the
    /// trace with `triple_count: None`.
    pub trace: Vec<CandidateOutcome>,
}

/// Outcome of one candidate direction in [`optimize_projection`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOutcome {
    pub index: usize,
    pub direction: Vec4,
    /// `None` when the candidate was rejected (degenerate projection or
    /// stitching failure).
    pub triple_count: Option<usize>,
}

fn diagram_scale(vertices: &[Vec3]) -> f64 {
    match Aabb3::from_points(vertices) {
        Some(b) => (b.hi - b.lo).norm(),
        None => 0.0,
    }
}

/// Patch coordinates (band, sector) of a triangle in the spun mesh
/// layout: pole fans are bands `0` and `quad_bands + 1`, the quad band
/// between rings `i` and `i + 1` is band `i`.
fn tri_patch(t: u32, triangle_count: usize, rings: usize) -> (i64, i64) {
    let (t, m) = (t as usize, rings);
    let quad_tris = triangle_count - 2 * m; // triangles in the quad bands
    if t < m {
        (0, t as i64)
    } else if t >= m + quad_tris {
        ((quad_tris / (2 * m)) as i64 + 1, (t - m - quad_tris) as i64)
    } else {
        (
            ((t - m) / (2 * m)) as i64 + 1,
            (((t - m) % (2 * m)) / 2) as i64,
        )
    }
}

/// Whether two triangles lie within the local collar of each other
/// (fold-chatter candidates rather than witnesses of knotting).
fn is_local_pair(a: u32, b: u32, triangle_count: usize, rings: usize) -> bool {
    if rings == 0 {
        return false;
    }
    let (band_a, sec_a) = tri_patch(a, triangle_count, rings);
    let (band_b, sec_b) = tri_patch(b, triangle_count, rings);
    let dsec = (sec_a - sec_b).rem_euclid(rings as i64);
    let dsec = dsec.min(rings as i64 - dsec);
    (band_a - band_b).abs() <= LOCAL_COLLAR && dsec <= LOCAL_COLLAR
}

/// Rotates the surface by the Cayley rotation of `params`, drops
/// `drop_axis`, and scans the image for degeneracies.
fn project_once(
    surface: &Surface4,
    drop_axis: usize,
    params: [f64; 6],
    attempts: usize,
    mode: ExecMode,
) -> Diagram3 {
    let rot = cayley_rotation(params);
    let vertices: Vec<Vec3> = surface
        .vertices
        .iter()
        .map(|&v| rot.mul_vec(v).drop_coord(drop_axis))
        .collect();
    let depths: Vec<f64> = surface
        .vertices
        .iter()
        .map(|&v| rot.mul_vec(v).coord(drop_axis))
        .collect();
    // The dropped direction, pulled back to original coordinates: the
    // rotated coordinate axis is row `drop_axis` of R, i.e. column of Rᵀ.
    let projection_direction = rot.transpose().column(drop_axis);

    let mut diagram = Diagram3 {
        vertices,
        triangles: surface.triangles.clone(),
        depths,
        drop_axis,
        projection_direction,
        rotation_params: params,
        rings: surface.rings,
        certificate: GenericityCertificate {
            attempts,
            clean: false,
            coplanar_overlaps: 0,
            vertex_contacts: 0,
            degenerate_triangles: 0,
            coincident_vertices: 0,
            crossing_segments: 0,
            touch_contacts: 0,
        },
    };
    diagram.certificate = scan_certificate(&diagram, mode);
    diagram
}

/// Pair scan of a projected mesh, producing its genericity certificate.
fn scan_certificate(diagram: &Diagram3, mode: ExecMode) -> GenericityCertificate {
    let scale = diagram_scale(&diagram.vertices);
    let tol = EPS_INTERSECT * scale;
    let mut cert = GenericityCertificate {
        attempts: diagram.certificate.attempts,
        clean: false,
        coplanar_overlaps: 0,
        vertex_contacts: 0,
        degenerate_triangles: 0,
        coincident_vertices: 0,
        crossing_segments: 0,
        touch_contacts: 0,
    };

    for t in &diagram.triangles {
        let [a, b, c] = [
            diagram.vertices[t[0] as usize],
            diagram.vertices[t[1] as usize],
            diagram.vertices[t[2] as usize],
        ];
        if (b - a).cross(c - a).norm() <= tol * scale {
            cert.degenerate_triangles += 1;
        }
    }

    // Coincident projected vertices via a quantised grid.
    let cell = tol.max(f64::MIN_POSITIVE) * 2.0;
    let mut grid: BTreeMap<(i64, i64, i64), Vec<u32>> = BTreeMap::new();
    for (i, &p) in diagram.vertices.iter().enumerate() {
        grid.entry((
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ))
        .or_default()
        .push(i as u32);
    }
    for (key, cellv) in &grid {
        for (k, &i) in cellv.iter().enumerate() {
            let pi = diagram.vertices[i as usize];
            for &j in &cellv[k + 1..] {
                if pi.dist(diagram.vertices[j as usize]) <= tol {
                    cert.coincident_vertices += 1;
                }
            }
            // Neighbouring cells, forward half-space to avoid double counts.
            for (dx, dy, dz) in NEIGHBOR_HALF {
                if let Some(other) = grid.get(&(key.0 + dx, key.1 + dy, key.2 + dz)) {
                    for &j in other {
                        if pi.dist(diagram.vertices[j as usize]) <= tol {
                            cert.coincident_vertices += 1;
                        }
                    }
                }
            }
        }
    }

    for outcome in intersect_all_pairs(diagram, mode, false) {
        match outcome {
            PairOutcome::Segment(seg) => {
                cert.crossing_segments += 1;
                // A vertex landing on another sheet is a degeneracy only
                // between far-apart patches; inside the local collar it is
                // ordinary fold structure (the two layers share vertices).
                if !is_local_pair(seg.tri_a, seg.tri_b, diagram.triangles.len(), diagram.rings) {
                    for end in [seg.seg.end_a, seg.seg.end_b] {
                        if matches!(end, SegEnd::Vertex { .. }) {
                            cert.vertex_contacts += 1;
                        }
                    }
                }
            }
            PairOutcome::Touch => cert.touch_contacts += 1,
            PairOutcome::CoplanarOverlap => cert.coplanar_overlaps += 1,
        }
    }

    cert.clean = cert.coplanar_overlaps == 0
        && cert.vertex_contacts == 0
        && cert.degenerate_triangles == 0
        && cert.coincident_vertices == 0;
    cert
}

/// Forward half of the 26-neighbourhood (so each pair is visited once).
const NEIGHBOR_HALF: [(i64, i64, i64); 13] = [
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 0),
    (1, 0, 1),
    (0, 1, 1),
    (1, 1, 1),
    (1, -1, 0),
    (1, 0, -1),
    (0, 1, -1),
    (1, 1, -1),
    (1, -1, 1),
    (-1, 1, 1),
];

/// A stitched segment together with the triangle pair that produced it.
#[derive(Debug, Clone, Copy)]
struct PairSegment {
    tri_a: u32,
    tri_b: u32,
    seg: IsectSegment,
}

enum PairOutcome {
    Segment(PairSegment),
    Touch,
    CoplanarOverlap,
}

/// Runs the exact triangle–triangle predicate over all candidate pairs.
///
/// With `exhaustive` set, every non-adjacent pair is tested (the
/// quadratic reference path); otherwise candidates come from the BVH.
fn intersect_all_pairs(diagram: &Diagram3, mode: ExecMode, exhaustive: bool) -> Vec<PairOutcome> {
    let scale = diagram_scale(&diagram.vertices);
    let tol = EPS_INTERSECT * scale;
    let pairs: Vec<(u32, u32)> = if exhaustive {
        let n = diagram.triangles.len() as u32;
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect()
    } else {
        let boxes: Vec<Aabb3> = diagram
            .triangles
            .iter()
            .map(|t| {
                Aabb3::from_points(&[
                    diagram.vertices[t[0] as usize],
                    diagram.vertices[t[1] as usize],
                    diagram.vertices[t[2] as usize],
                ])
                .expect("triangles are non-empty")
            })
            .collect();
        Bvh::build(&boxes).self_pairs(&boxes, tol)
    };

    let results = mode.flat_map(&pairs, |&(i, j)| {
        let ti = diagram.triangles[i as usize];
        let tj = diagram.triangles[j as usize];
        // Triangles sharing an edge meet exactly along it (both planes
        // contain the edge's line, and a triangle meets the line of its
        // own edge in that edge alone) — never a crossing. A single
        // shared vertex still allows a genuine transversal crossing
        // through both interiors, so those pairs are kept.
        let shared = ti.iter().filter(|v| tj.contains(v)).count();
        if shared >= 2 {
            return Vec::new();
        }
        let pi = [
            diagram.vertices[ti[0] as usize],
            diagram.vertices[ti[1] as usize],
            diagram.vertices[ti[2] as usize],
        ];
        let pj = [
            diagram.vertices[tj[0] as usize],
            diagram.vertices[tj[1] as usize],
            diagram.vertices[tj[2] as usize],
        ];
        match tri_tri_intersection(&pi, &ti, i, &pj, &tj, j, tol) {
            TriTriOutcome::Disjoint => Vec::new(),
            // A vertex-sharing pair always touches at the shared vertex;
            // only report touches that carry information.
            TriTriOutcome::Touch if shared == 0 => vec![PairOutcome::Touch],
            TriTriOutcome::Touch => Vec::new(),
            TriTriOutcome::Coplanar => {
                if coplanar_triangles_overlap(&pi, &pj, tol) {
                    vec![PairOutcome::CoplanarOverlap]
                } else {
                    Vec::new()
                }
            }
            TriTriOutcome::Segment(seg) => {
                vec![PairOutcome::Segment(PairSegment {
                    tri_a: i,
                    tri_b: j,
                    seg,
                })]
            }
        }
    });
    results
}

/// Projects a surface to 3-space along a generic direction.
///
/// The image is the surface rotated by a small random rotation (Cayley
/// transform seeded from `seed`, magnitude `perturb_magnitude`) with the
/// `drop_axis` coordinate removed. If the scan finds a genuine
/// degeneracy — coplanar overlapping sheets, a vertex on another sheet,
/// collapsed triangles or coincident vertices — the rotation is re-seeded
/// and retried, up to 8 times, before failing.
///
/// `perturb_magnitude == 0.0` requests the *symmetric* projection: no
/// rotation, a single attempt, and borderline incidences are accepted and
/// recorded in the certificate instead of failing. Surfaces of revolution
/// project cleanly this way, and keeping the exact symmetry is what makes
/// their diagrams exactly symmetric in turn.
pub fn project_generic(
    surface: &Surface4,
    drop_axis: usize,
    perturb_magnitude: f64,
    seed: u64,
    mode: ExecMode,
) -> Result<Diagram3, DiagramError> {
    if surface.triangles.is_empty() {
        return Err(DiagramError::EmptySurface);
    }
    if drop_axis >= 4 {
        return Err(DiagramError::BadAxis(drop_axis));
    }
    if perturb_magnitude == 0.0 {
        return Ok(project_once(surface, drop_axis, [0.0; 6], 1, mode));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        let params: [f64; 6] =
            std::array::from_fn(|_| rng.gen_range(-1.0..1.0) * perturb_magnitude);
        let diagram = project_once(surface, drop_axis, params, attempt + 1, mode);
        if diagram.certificate.clean {
            return Ok(diagram);
        }
    }
    Err(DiagramError::GenericityFailure {
        attempts: MAX_ATTEMPTS,
    })
}

impl Diagram3 {
    /// Bounding-box diagonal of the projected mesh.
    pub fn scale(&self) -> f64 {
        diagram_scale(&self.vertices)
    }

    /// Projected corner positions of triangle `t`.
    #[inline]
    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Depth of the sheet `tri` at a point of its projected image
    /// (barycentric interpolation of vertex depths).
    pub fn depth_on_triangle(&self, tri: u32, point: Vec3) -> f64 {
        let t = self.triangles[tri as usize];
        let [a, b, c] = self.triangle(tri as usize);
        let (e1, e2, w) = (b - a, c - a, point - a);
        let (g11, g12, g22) = (e1.dot(e1), e1.dot(e2), e2.dot(e2));
        let (b1, b2) = (w.dot(e1), w.dot(e2));
        let det = g11 * g22 - g12 * g12;
        let (s, t_par) = if det.abs() > f64::MIN_POSITIVE {
            ((g22 * b1 - g12 * b2) / det, (g11 * b2 - g12 * b1) / det)
        } else {
            (0.0, 0.0)
        };
        let d = [
            self.depths[t[0] as usize],
            self.depths[t[1] as usize],
            self.depths[t[2] as usize],
        ];
        d[0] * (1.0 - s - t_par) + d[1] * s + d[2] * t_par
    }
}

/// Extracts the singularity set of a projected diagram: double curves
/// stitched by exact endpoint tags, triple points from mutually crossing
/// triangle triples, and branch points where curves terminate.
pub fn compute_singularity_set(
    diagram: &Diagram3,
    mode: ExecMode,
) -> Result<SingularitySet, DiagramError> {
    let segments = collect_segments(diagram, mode, false)?;
    assemble_singularities(diagram, segments)
}

/// Reference variant of [`compute_singularity_set`] that tests every
/// triangle pair instead of consulting the BVH. Quadratic; exists so the
/// culled path can be cross-checked against it.
pub fn compute_singularity_set_exhaustive(
    diagram: &Diagram3,
    mode: ExecMode,
) -> Result<SingularitySet, DiagramError> {
    let segments = collect_segments(diagram, mode, true)?;
    assemble_singularities(diagram, segments)
}

fn collect_segments(
    diagram: &Diagram3,
    mode: ExecMode,
    exhaustive: bool,
) -> Result<Vec<PairSegment>, DiagramError> {
    let mut segments = Vec::new();
    for outcome in intersect_all_pairs(diagram, mode, exhaustive) {
        match outcome {
            PairOutcome::Segment(s) => segments.push(s),
            PairOutcome::Touch => {}
            PairOutcome::CoplanarOverlap => {
                return Err(DiagramError::StitchingFailure(
                    "coplanar sheets overlap with positive area".into(),
                ));
            }
        }
    }
    Ok(segments)
}

fn assemble_singularities(
    diagram: &Diagram3,
    segments: Vec<PairSegment>,
) -> Result<SingularitySet, DiagramError> {
    // --- Stitch double curves by endpoint tag -------------------------
    let mut by_key: BTreeMap<SegEnd, Vec<(usize, u8)>> = BTreeMap::new();
    for (i, s) in segments.iter().enumerate() {
        by_key.entry(s.seg.end_a).or_default().push((i, 0));
        by_key.entry(s.seg.end_b).or_default().push((i, 1));
    }
    for (key, ends) in &by_key {
        if ends.len() > 2 {
            return Err(DiagramError::StitchingFailure(format!(
                "stitch key {key:?} joins {} segment ends (at most 2 expected)",
                ends.len()
            )));
        }
    }

    let other_end = |key: &SegEnd, seg: usize, side: u8| -> Option<(usize, u8)> {
        by_key
            .get(key)?
            .iter()
            .copied()
            .find(|&(s, d)| !(s == seg && d == side))
    };

    let mut visited = vec![false; segments.len()];
    let mut curves = Vec::new();
    let mut curve_segments = Vec::new();
    let mut branch_points = Vec::new();

    for start in 0..segments.len() {
        if visited[start] {
            continue;
        }
        // Walk backwards from `start` to find the chain's beginning (or
        // detect a closed loop).
        let (mut seg, mut entry_side) = (start, 0u8);
        let mut closed = false;
        loop {
            let key = end_of(&segments[seg], entry_side);
            match other_end(&key, seg, entry_side) {
                Some((prev, prev_side)) => {
                    if prev == start && prev_side == 1 {
                        closed = true;
                        break;
                    }
                    // Continue backwards: enter `prev` at its other end.
                    seg = prev;
                    entry_side = 1 - prev_side;
                    if seg == start {
                        closed = true;
                        break;
                    }
                }
                None => break,
            }
        }

        // Forward walk from (seg, entry_side), collecting points.
        let first_seg = seg;
        let first_side = entry_side;
        let mut points = vec![point_of(&segments[seg], entry_side)];
        let mut chain = Vec::new();
        loop {
            visited[seg] = true;
            let s = &segments[seg];
            let exit_side = 1 - entry_side;
            points.push(point_of(s, exit_side));
            chain.push(orient_segment(s, entry_side));
            let key = end_of(s, exit_side);
            match other_end(&key, seg, exit_side) {
                Some((next, next_side)) => {
                    if next == first_seg && next_side == first_side {
                        break; // closed loop completed
                    }
                    if visited[next] {
                        // Shouldn't happen with degree ≤ 2 keys.
                        return Err(DiagramError::StitchingFailure(
                            "walk revisited a segment before closing".into(),
                        ));
                    }
                    seg = next;
                    entry_side = next_side;
                }
                None => break,
            }
        }

        curves.push(DoubleCurve { points, closed });
        curve_segments.push(chain);
    }

    // An open end is legitimate only inside a fold: there the double
    // curve terminates at a PL umbrella (the branch point), its last
    // crossing joining two layers of one local patch. An unmatched end
    // on a far pair means a stitch partner went missing — a bug, not
    // geometry — and is reported as such.
    let (tri_count, rings) = (diagram.triangles.len(), diagram.rings);
    for (curve, chain) in curves.iter().zip(&curve_segments) {
        if curve.closed {
            continue;
        }
        for s in [chain.first(), chain.last()].into_iter().flatten() {
            if !is_local_pair(s.tri_a, s.tri_b, tri_count, rings) {
                return Err(DiagramError::StitchingFailure(format!(
                    "double curve ends on the far pair ({}, {}) away from any fold",
                    s.tri_a, s.tri_b
                )));
            }
        }
    }

    // Classify: a component whose every crossing joins collar-local
    // triangles is PL fold chatter (layers of one patch grazing each
    // other), not part of the knot's double-point set.
    let mut chatter_curves = 0;
    let mut kept = Vec::with_capacity(curves.len());
    let mut kept_segments = Vec::with_capacity(curves.len());
    for (curve, chain) in curves.into_iter().zip(curve_segments) {
        let local = chain
            .iter()
            .all(|s| is_local_pair(s.tri_a, s.tri_b, tri_count, rings));
        if local {
            chatter_curves += 1;
        } else {
            kept.push(curve);
            kept_segments.push(chain);
        }
    }
    let (curves, curve_segments) = (kept, kept_segments);
    for (curve_index, curve) in curves.iter().enumerate() {
        if !curve.closed {
            branch_points.push(BranchPoint {
                position: curve.points[0],
                curve: curve_index,
            });
            branch_points.push(BranchPoint {
                position: *curve.points.last().expect("chain has points"),
                curve: curve_index,
            });
        }
    }

    // --- Triple points -------------------------------------------------
    // Built from the kept curves only: a "triple" in which one pairwise
    // crossing is fold chatter is two layers of one sheet meeting a
    // second sheet, not three sheets.
    let scale = diagram.scale();
    let cluster_tol = EPS_STITCH * scale;
    let mut partners: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut pair_set: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
    for s in curve_segments.iter().flatten() {
        partners.entry(s.tri_a).or_default().push(s.tri_b);
        partners.entry(s.tri_b).or_default().push(s.tri_a);
        pair_set.insert((s.tri_a.min(s.tri_b), s.tri_a.max(s.tri_b)));
    }
    let mut triples = Vec::new();
    for (&t, list) in &partners {
        for (i, &b) in list.iter().enumerate() {
            for &c in &list[i + 1..] {
                let (lo, hi) = (b.min(c), b.max(c));
                if t < lo && pair_set.contains(&(lo, hi)) {
                    if let Some(p) = triple_point_position(diagram, t, lo, hi, cluster_tol) {
                        triples.push(TriplePoint {
                            position: p,
                            triangles: [t, lo, hi],
                        });
                    }
                }
            }
        }
    }
    // Deduplicate geometric clusters (adjacent triangle triples can see
    // the same point when it lies near a mesh edge).
    triples.sort_by(|a, b| {
        a.position
            .x
            .total_cmp(&b.position.x)
            .then(a.position.y.total_cmp(&b.position.y))
            .then(a.position.z.total_cmp(&b.position.z))
    });
    let mut deduped: Vec<TriplePoint> = Vec::new();
    'outer: for t in triples {
        for d in deduped.iter().rev() {
            if d.position.dist(t.position) <= cluster_tol * 2.0 {
                continue 'outer;
            }
            if t.position.x - d.position.x > cluster_tol * 2.0 {
                break;
            }
        }
        deduped.push(t);
    }

    Ok(SingularitySet {
        curves,
        triple_points: deduped,
        branch_points,
        curve_segments,
        chatter_curves,
    })
}

#[inline]
fn end_of(s: &PairSegment, side: u8) -> SegEnd {
    if side == 0 {
        s.seg.end_a
    } else {
        s.seg.end_b
    }
}

#[inline]
fn point_of(s: &PairSegment, side: u8) -> Vec3 {
    if side == 0 {
        s.seg.a
    } else {
        s.seg.b
    }
}

fn orient_segment(s: &PairSegment, entry_side: u8) -> CurveSegment {
    let (a, b, end_a, end_b) = if entry_side == 0 {
        (s.seg.a, s.seg.b, s.seg.end_a, s.seg.end_b)
    } else {
        (s.seg.b, s.seg.a, s.seg.end_b, s.seg.end_a)
    };
    CurveSegment {
        tri_a: s.tri_a,
        tri_b: s.tri_b,
        a,
        b,
        end_a: Some(end_a),
        end_b: Some(end_b),
    }
}

/// Intersection point of the planes of three mutually crossing triangles,
/// verified to lie on (or within `tol` of) all three.
fn triple_point_position(diagram: &Diagram3, t1: u32, t2: u32, t3: u32, tol: f64) -> Option<Vec3> {
    let mut rows = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (k, &t) in [t1, t2, t3].iter().enumerate() {
        let [a, b, c] = diagram.triangle(t as usize);
        let n = (b - a).cross(c - a);
        rows[k] = [n.x, n.y, n.z];
        rhs[k] = n.dot(a);
    }
    let x = solve3(rows, rhs)?;
    let p = Vec3::new(x[0], x[1], x[2]);
    for &t in &[t1, t2, t3] {
        let [a, b, c] = diagram.triangle(t as usize);
        if crate::geom::pt_tri_dist(p, a, b, c) > tol {
            return None;
        }
    }
    Some(p)
}

/// Vertex pair owning a mesh edge of triangle `tri` that matches `edge`.
fn triangle_owns_edge(triangles: &[[u32; 3]], tri: u32, edge: (u32, u32)) -> bool {
    let t = triangles[tri as usize];
    let mut count = 0;
    for k in 0..3 {
        let (a, b) = (t[k], t[(k + 1) % 3]);
        if (a.min(b), a.max(b)) == edge {
            count += 1;
        }
    }
    count > 0
}

/// Whether triangle `under` continues on the same sheet across a stitch
/// junction. The junction `key` names the mesh feature the curve crosses;
/// two under triangles lie on the same sheet exactly when they share that
/// feature's sheet-side: the unchanged triangle of an `Edge` or `Vertex`
/// crossing, or a common crossed edge otherwise.
fn same_under_sheet(
    triangles: &[[u32; 3]],
    under_prev: u32,
    key: Option<SegEnd>,
    under_next: u32,
) -> bool {
    let Some(key) = key else { return false };
    let owns = |tri: u32, e: (u32, u32)| triangle_owns_edge(triangles, tri, e);
    let has = |tri: u32, v: u32| triangles[tri as usize].contains(&v);
    match key {
        SegEnd::Edge { edge, other_tri } => {
            (under_prev == other_tri && under_next == other_tri)
                || (owns(under_prev, edge) && owns(under_next, edge))
        }
        SegEnd::EdgeEdge { e1, e2 } => {
            (owns(under_prev, e1) && owns(under_next, e1))
                || (owns(under_prev, e2) && owns(under_next, e2))
        }
        SegEnd::Vertex { v, other_tri } => {
            (under_prev == other_tri && under_next == other_tri)
                || (has(under_prev, v) && has(under_next, v))
        }
    }
}

/// Whether chain positions `s1` and `s2` are consecutive (they share a
/// stitch junction rather than crossing transversally).
#[inline]
fn chain_adjacent(s1: usize, s2: usize, len: usize, closed: bool) -> bool {
    s1.abs_diff(s2) == 1 || (closed && s1.abs_diff(s2) == len - 1)
}

/// Transversal crossing strictly inside both coplanar segments, tested in
/// the plane with normal `normal`.
fn proper_crossing(a1: Vec3, b1: Vec3, a2: Vec3, b2: Vec3, normal: Vec3) -> bool {
    let (nx, ny, nz) = (normal.x.abs(), normal.y.abs(), normal.z.abs());
    let axis = if nx >= ny && nx >= nz {
        0
    } else if ny >= nz {
        1
    } else {
        2
    };
    let flat = |v: Vec3| -> (f64, f64) {
        match axis {
            0 => (v.y, v.z),
            1 => (v.z, v.x),
            _ => (v.x, v.y),
        }
    };
    let (p1, q1, p2, q2) = (flat(a1), flat(b1), flat(a2), flat(b2));
    let d1 = (q1.0 - p1.0, q1.1 - p1.1);
    let d2 = (q2.0 - p2.0, q2.1 - p2.1);
    let denom = d1.0 * d2.1 - d1.1 * d2.0;
    if denom.abs() <= EPS_STITCH * d1.0.hypot(d1.1) * d2.0.hypot(d2.1) {
        return false; // parallel or grazing, not a transversal crossing
    }
    let r = (p2.0 - p1.0, p2.1 - p1.1);
    let s = (r.0 * d2.1 - r.1 * d2.0) / denom;
    let t = (r.0 * d1.1 - r.1 * d1.0) / denom;
    s > EPS_STITCH && s < 1.0 - EPS_STITCH && t > EPS_STITCH && t < 1.0 - EPS_STITCH
}

/// Union-find over the cut-locus runs.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new() -> Self {
        Self { parent: Vec::new() }
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    fn grow(&mut self, n: usize) {
        let start = self.parent.len();
        self.parent.extend(start..start + n);
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn root_count(&mut self) -> usize {
        (0..self.parent.len())
            .filter(|&i| self.parent[i] == i)
            .count()
    }
}

/// Cuts the under-sheet along every double curve and counts the sheets of
/// the broken surface.
///
/// At each stitched segment the two sheets' depths at the segment
/// midpoint decide which is under; the under sheet is cut along the
/// curve. The preimage of the cut on the surface is a 1-complex of arcs
/// and loops: an arc ends where the under side flips to the other sheet
/// (the sheets trade depth order, as happens inside a fold) or at a
/// branch point, and two arcs cross inside one triangle exactly where a
/// triple point's bottom sheet passes under both others. Sheets are the
/// faces of this complex, counted with the Euler relation
/// `faces = 1 + components - nodes + edges` for a graph embedded in a
/// sphere. An arc with free ends therefore separates nothing, a closed
/// loop adds one face, and each crossing adds a face once its runs are
/// already connected.
///
/// `band_width` (relative to the diagram scale) selects under-side
/// triangles near a curve into `gap_triangles` for rendering. Past a
/// quarter of the diagram the band stops being a gap at all and the
/// request is rejected as over-broad.
pub fn break_sheets(
    diagram: &Diagram3,
    singularities: &SingularitySet,
    band_width: f64,
) -> Result<BrokenSurface, DiagramError> {
    if band_width >= 0.25 {
        return Err(DiagramError::OverBroadBand {
            band: band_width,
            reason: "band is a quarter of the diagram scale or more".into(),
        });
    }
    let scale = diagram.scale();
    let band_abs = band_width * scale;

    // Under side of every segment, and the mesh edges the cut crosses
    // there (the rendering aid; the count below never uses them).
    let mut cut: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
    let mut under_of: Vec<Vec<u32>> = Vec::with_capacity(singularities.curve_segments.len());
    for chain in &singularities.curve_segments {
        let mut unders = Vec::with_capacity(chain.len());
        for seg in chain {
            let mid = (seg.a + seg.b) * 0.5;
            let depth_a = diagram.depth_on_triangle(seg.tri_a, mid);
            let depth_b = diagram.depth_on_triangle(seg.tri_b, mid);
            let under = if depth_a < depth_b {
                seg.tri_a
            } else {
                seg.tri_b
            };
            unders.push(under);
            for end in [seg.end_a, seg.end_b].into_iter().flatten() {
                match end {
                    SegEnd::Edge { edge, .. } => {
                        if triangle_owns_edge(&diagram.triangles, under, edge) {
                            cut.insert(edge);
                        }
                    }
                    SegEnd::EdgeEdge { e1, e2 } => {
                        for e in [e1, e2] {
                            if triangle_owns_edge(&diagram.triangles, under, e) {
                                cut.insert(e);
                            }
                        }
                    }
                    // Vertex contacts (branch points) do not cross edges.
                    SegEnd::Vertex { .. } => {}
                }
            }
        }
        under_of.push(unders);
    }

    // Gap band: under-side triangles within the band of their own curve.
    let mut gap: std::collections::BTreeSet<u32> = std::collections::BTreeSet::new();
    if band_abs > 0.0 {
        for (unders, curve) in under_of.iter().zip(&singularities.curves) {
            for &tri in unders {
                let corners = diagram.triangle(tri as usize);
                let near = curve.points.windows(2).any(|w| {
                    corners
                        .iter()
                        .any(|&c| pt_seg_dist(c, w[0], w[1]) <= band_abs)
                });
                if near {
                    gap.insert(tri);
                }
            }
        }
    }

    // --- Cut-locus graph: nodes, edges, and constant-sheet runs -------
    let mut uf = UnionFind::new();
    let mut nodes = 0usize;
    let mut graph_edges = 0usize;
    let mut run_of: Vec<Vec<usize>> = Vec::with_capacity(under_of.len());
    for (ci, chain) in singularities.curve_segments.iter().enumerate() {
        let closed = singularities.curves[ci].closed;
        let unders = &under_of[ci];
        let l = chain.len();
        // Junction j sits between segments j and (j+1) % l; the cut locus
        // breaks there when the under side flips to the other sheet.
        let junctions = if closed { l } else { l - 1 };
        let mut is_flip = vec![false; junctions];
        let mut flips = 0usize;
        for (j, flag) in is_flip.iter_mut().enumerate() {
            let k = (j + 1) % l;
            if !same_under_sheet(&diagram.triangles, unders[j], chain[j].end_b, unders[k]) {
                *flag = true;
                flips += 1;
            }
        }
        let base = uf.len();
        let mut label = 0usize;
        let mut ids = Vec::with_capacity(l);
        for k in 0..l {
            ids.push(base + label);
            if is_flip.get(k).copied().unwrap_or(false) {
                label += 1;
            }
        }
        let labels = ids.last().map_or(0, |&id| id - base + 1);
        uf.grow(labels);
        if closed && flips == 0 {
            // One closed loop: every junction is a node.
            nodes += l;
        } else if closed {
            // `flips` open arcs; each flip junction splits into one
            // dangling node per sheet. The run through the unflipped
            // seam junction wraps around.
            if !is_flip[l - 1] && labels > 1 {
                uf.union(base, base + labels - 1);
            }
            nodes += l + flips;
        } else {
            nodes += l + 1 + flips;
        }
        graph_edges += l;
        run_of.push(ids);
    }

    // Transversal crossings between chords that share an under triangle.
    let mut by_tri: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for (ci, unders) in under_of.iter().enumerate() {
        for (k, &u) in unders.iter().enumerate() {
            by_tri.entry(u).or_default().push((ci, k));
        }
    }
    let mut crossings = 0usize;
    for (&tri, list) in &by_tri {
        if list.len() < 2 {
            continue;
        }
        let [p, q, r] = diagram.triangle(tri as usize);
        let normal = (q - p).cross(r - p);
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                let (c1, s1) = list[i];
                let (c2, s2) = list[j];
                if c1 == c2
                    && chain_adjacent(s1, s2, under_of[c1].len(), singularities.curves[c1].closed)
                {
                    continue;
                }
                let sa = &singularities.curve_segments[c1][s1];
                let sb = &singularities.curve_segments[c2][s2];
                if proper_crossing(sa.a, sa.b, sb.a, sb.b, normal) {
                    crossings += 1;
                    let (r1, r2) = (run_of[c1][s1], run_of[c2][s2]);
                    uf.union(r1, r2);
                }
            }
        }
    }
    nodes += crossings;
    graph_edges += 2 * crossings;

    let components = uf.root_count();
    let faces = 1 + components as i64 + graph_edges as i64 - nodes as i64;
    debug_assert!(faces >= 1, "cut-locus Euler count came out below 1");

    Ok(BrokenSurface {
        sheet_count: faces.max(1) as usize,
        under_arcs: components,
        under_crossings: crossings,
        cut_edges: cut.into_iter().collect(),
        gap_triangles: gap.into_iter().collect(),
        band_width,
    })
}

/// Headline counts for a diagram: double curves, triple points, branch
/// points, and sheets after breaking with the default band.
pub fn singularity_summary(
    diagram: &Diagram3,
    singularities: &SingularitySet,
) -> Result<SingularitySummary, DiagramError> {
    let broken = break_sheets(diagram, singularities, DEFAULT_BAND_WIDTH)?;
    Ok(SingularitySummary {
        double_curve_count: singularities.curves.len(),
        triple_point_count: singularities.triple_points.len(),
        branch_point_count: singularities.branch_points.len(),
        sheet_count: broken.sheet_count,
    })
}

/// Searches seeded candidate directions for the projection with the
/// fewest triple points.
///
/// Candidate 0 is the unperturbed axis projection; the rest are Cayley
/// rotations with broadly sampled parameters. Candidates whose projection
/// is degenerate or whose image fails to stitch stay in the trace with no
/// triple count and are skipped for the optimum.
pub fn optimize_projection(
    surface: &Surface4,
    drop_axis: usize,
    candidate_count: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<ProjectionSearch, DiagramError> {
    if surface.triangles.is_empty() {
        return Err(DiagramError::EmptySurface);
    }
    if drop_axis >= 4 {
        return Err(DiagramError::BadAxis(drop_axis));
    }
    let params: Vec<(usize, [f64; 6])> = (0..candidate_count.max(1))
        .map(|k| {
            if k == 0 {
                return (k, [0.0; 6]);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            (k, std::array::from_fn(|_| rng.gen_range(-0.3..0.3)))
        })
        .collect();

    let outcomes = mode.map(&params, |&(index, p)| {
        let diagram = project_once(surface, drop_axis, p, 1, ExecMode::Sequential);
        let direction = diagram.projection_direction;
        if !(diagram.certificate.clean
            || (index == 0 && diagram.certificate.coplanar_overlaps == 0))
        {
            return CandidateOutcome {
                index,
                direction,
                triple_count: None,
            };
        }
        match compute_singularity_set(&diagram, ExecMode::Sequential) {
            Ok(sing) => CandidateOutcome {
                index,
                direction,
                triple_count: Some(sing.triple_points.len()),
            },
            Err(_) => CandidateOutcome {
                index,
                direction,
                triple_count: None,
            },
        }
    });

    let best = outcomes
        .iter()
        .filter_map(|c| c.triple_count.map(|t| (t, c.index, c.direction)))
        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    match best {
        Some((t, _, dir)) => Ok(ProjectionSearch {
            best_direction: dir,
            best_triple_count: t,
            trace: outcomes,
        }),
        None => Err(DiagramError::GenericityFailure {
            attempts: candidate_count,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::{default_twist_ball, make_trefoil_arc, make_unknotted_arc};
    use crate::spin::{spin, twist_spin};

    fn spun_trefoil_diagram() -> Diagram3 {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let surface = spin(&arc, 16).unwrap();
        project_generic(&surface, 0, 0.0, 0, ExecMode::Sequential).unwrap()
    }

    #[test]
    fn unknot_projects_to_an_embedded_sphere() {
        let arc = make_unknotted_arc(1.0, 12).unwrap();
        let surface = spin(&arc, 12).unwrap();
        let d = project_generic(&surface, 0, 0.0, 7, ExecMode::Sequential).unwrap();
        assert!(d.certificate.clean, "{:?}", d.certificate);
        assert_eq!(d.certificate.crossing_segments, 0);
        let sing = compute_singularity_set(&d, ExecMode::Sequential).unwrap();
        assert!(sing.curves.is_empty());
        assert!(sing.triple_points.is_empty());
        let summary = singularity_summary(&d, &sing).unwrap();
        assert_eq!(summary.sheet_count, 1);
        assert_eq!(summary.branch_point_count, 0);
    }

    #[test]
    fn spun_trefoil_has_three_closed_double_circles() {
        let d = spun_trefoil_diagram();
        assert!(d.certificate.clean, "{:?}", d.certificate);
        let sing = compute_singularity_set(&d, ExecMode::Sequential).unwrap();
        assert_eq!(
            sing.curves.len(),
            3,
            "one double circle per shadow crossing"
        );
        for c in &sing.curves {
            assert!(c.closed);
            assert!(c.points.len() > 8);
        }
        assert!(sing.triple_points.is_empty());
        assert!(sing.branch_points.is_empty());
        assert_eq!(sing.chatter_curves, 0);
        let broken = break_sheets(&d, &sing, DEFAULT_BAND_WIDTH).unwrap();
        assert_eq!(broken.sheet_count, 4);
        assert!(!broken.cut_edges.is_empty());
    }

    #[test]
    fn double_circles_lie_on_revolved_crossing_radii() {
        // Every double circle of the symmetric projection circles the
        // revolution axis near the shadow crossing's (y, r) — "near" up
        // to the chordal error of the coarse mesh — and the matching is
        // a bijection between circles and shadow crossings.
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let crossings = crate::arc::shadow_crossings(&arc);
        let d = spun_trefoil_diagram();
        let sing = compute_singularity_set(&d, ExecMode::Sequential).unwrap();
        assert_eq!(sing.curves.len(), crossings.len());
        let mut matched = vec![false; crossings.len()];
        for curve in &sing.curves {
            // Projected coordinates are (y, u, v): compare the curve's
            // mean (y, uv-radius) against each crossing's shadow (y, z).
            let mid_y: f64 =
                curve.points.iter().map(|p| p.x).sum::<f64>() / curve.points.len() as f64;
            let mean_r: f64 = curve
                .points
                .iter()
                .map(|p| (p.y * p.y + p.z * p.z).sqrt())
                .sum::<f64>()
                / curve.points.len() as f64;
            let hit = crossings
                .iter()
                .position(|c| (c.point.x - mid_y).hypot(c.point.y - mean_r) < 0.25);
            let hit = hit.unwrap_or_else(|| {
                panic!("curve at (y={mid_y}, r={mean_r}) matches no shadow crossing")
            });
            assert!(!matched[hit], "two double circles matched one crossing");
            matched[hit] = true;
        }
        assert!(matched.iter().all(|&m| m));
    }

    #[test]
    fn bvh_and_exhaustive_singularity_sets_agree() {
        let d = spun_trefoil_diagram();
        let fast = compute_singularity_set(&d, ExecMode::Sequential).unwrap();
        let slow = compute_singularity_set_exhaustive(&d, ExecMode::Parallel).unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn perturbed_projection_keeps_the_summary() {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let surface = spin(&arc, 16).unwrap();
        let d = project_generic(&surface, 0, 1e-3, 42, ExecMode::Sequential).unwrap();
        assert!(d.certificate.clean);
        assert_eq!(d.certificate.attempts, 1);
        let sing = compute_singularity_set(&d, ExecMode::Sequential).unwrap();
        assert_eq!(sing.curves.len(), 3);
        assert!(sing.curves.iter().all(|c| c.closed));
        let broken = break_sheets(&d, &sing, DEFAULT_BAND_WIDTH).unwrap();
        assert_eq!(broken.sheet_count, 4);
    }

    #[test]
    fn projection_direction_is_recorded() {
        let arc = make_unknotted_arc(1.0, 8).unwrap();
        let surface = spin(&arc, 8).unwrap();
        let d = project_generic(&surface, 2, 0.0, 0, ExecMode::Sequential).unwrap();
        assert_eq!(d.projection_direction, Vec4::new(0.0, 0.0, 1.0, 0.0));
        let d = project_generic(&surface, 2, 1e-3, 5, ExecMode::Sequential).unwrap();
        assert!((d.projection_direction.norm() - 1.0).abs() < 1e-12);
        assert!(d.projection_direction.u > 0.99);
    }

    #[test]
    fn twist_spun_diagram_stitches_under_perturbation() {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        let surface = twist_spin(&arc, &ball, 2, 24).unwrap();
        let d = project_generic(&surface, 0, 1e-3, 9, ExecMode::Sequential).unwrap();
        assert!(d.certificate.clean, "{:?}", d.certificate);
        let sing = compute_singularity_set(&d, ExecMode::Sequential).unwrap();
        assert!(
            sing.curves.len() > 3,
            "twisting adds double curves beyond the three spun circles, got {}",
            sing.curves.len()
        );
        // The twisted band folds over in the image, so some double curves
        // terminate at PL umbrella points inside folds — branch points,
        // always two per open curve.
        let open = sing.curves.iter().filter(|c| !c.closed).count();
        assert!(
            open > 0,
            "a twisted image must fold and carry branch points"
        );
        assert_eq!(sing.branch_points.len(), 2 * open);
        let broken = break_sheets(&d, &sing, DEFAULT_BAND_WIDTH).unwrap();
        assert!(broken.sheet_count >= 4, "got {} sheets", broken.sheet_count);
        // Triple points on the bottom sheet show up as crossings of the
        // cut locus; without them the Euler count could not exceed one.
        assert!(broken.under_crossings > 0);
        // The same cut locus, recounted from a different perturbation,
        // gives the same sheet count: the count is combinatorial.
        let d2 = project_generic(&surface, 0, 1e-3, 10, ExecMode::Sequential).unwrap();
        let sing2 = compute_singularity_set(&d2, ExecMode::Sequential).unwrap();
        let broken2 = break_sheets(&d2, &sing2, DEFAULT_BAND_WIDTH).unwrap();
        assert_eq!(broken2.sheet_count, broken.sheet_count);
    }

    #[test]
    fn symmetric_twist_spun_projection_reports_its_coincidences() {
        // The unperturbed projection of a twisted surface is *not*
        // generic: exact symmetry can force two double-curve branches
        // through one edge–edge point, which the stitcher refuses rather
        // than resolving arbitrarily. The perturbed path is the supported
        // route for twisted surfaces.
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        let surface = twist_spin(&arc, &ball, 2, 24).unwrap();
        let d = project_generic(&surface, 0, 0.0, 0, ExecMode::Sequential).unwrap();
        match compute_singularity_set(&d, ExecMode::Sequential) {
            Err(DiagramError::StitchingFailure(msg)) => {
                assert!(msg.contains("segment ends"), "unexpected message: {msg}");
            }
            other => panic!("expected a stitching failure, got {other:?}"),
        }
    }

    #[test]
    fn over_broad_band_is_rejected() {
        let d = spun_trefoil_diagram();
        let sing = compute_singularity_set(&d, ExecMode::Sequential).unwrap();
        let err = break_sheets(&d, &sing, 0.5).unwrap_err();
        assert!(matches!(err, DiagramError::OverBroadBand { .. }));
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let arc = make_unknotted_arc(1.0, 8).unwrap();
        let surface = spin(&arc, 8).unwrap();
        assert_eq!(
            project_generic(&surface, 4, 0.0, 0, ExecMode::Sequential).unwrap_err(),
            DiagramError::BadAxis(4)
        );
        let empty = Surface4 {
            vertices: Vec::new(),
            triangles: Vec::new(),
            rings: 0,
        };
        assert_eq!(
            project_generic(&empty, 0, 0.0, 0, ExecMode::Sequential).unwrap_err(),
            DiagramError::EmptySurface
        );
    }

    #[test]
    fn projection_search_prefers_fewer_triples() {
        let arc = make_unknotted_arc(1.0, 8).unwrap();
        let surface = spin(&arc, 8).unwrap();
        let search = optimize_projection(&surface, 0, 4, 11, ExecMode::Sequential).unwrap();
        assert_eq!(search.best_triple_count, 0);
        assert_eq!(search.trace.len(), 4);
        assert!(search
            .trace
            .iter()
            .all(|c| (c.direction.norm() - 1.0).abs() < 1e-12));
    }
}
