//! Persistence and figure export for the pipeline.
//!
//! Everything written here is deterministic: JSON is canonical (keys
//! sorted, floats in shortest round-trip form), OBJ files are plain ASCII
//! with `Display`-formatted coordinates, and SVG frames use a fixed
//! camera per motion picture. Identical inputs therefore produce
//! byte-identical files, and every import returns structures equal to the
//! exported originals (floats round-trip exactly through the shortest
//! decimal form).
//!
//! All files are written atomically: contents go to a sibling temporary
//! file which is then renamed over the target, so a crash never leaves a
//! half-written artifact.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arc::PolylineArc;
use crate::arc::TwistBall;
use crate::diagram::{
    BrokenSurface, Diagram3, GenericityCertificate, SingularitySet, SingularitySummary,
};
use crate::exec::ExecMode;
use crate::geom::{Vec3, Vec4};
use crate::link::{frame_signatures, InvariantSignature, LinkError};
use crate::motion::{
    check_normal_form, CriticalEvent, EventKind, Frame, MotionPicture, NormalFormReport,
    SliceFamily,
};
use crate::spin::{check_rotational_symmetry, euler_characteristic, SpinError, Surface4};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "TWISTSPUN_OUT_DIR";

/// Documented bound on coordinate drift through an export/import cycle.
/// The writers emit shortest round-trip decimals, so the realized drift
/// is zero; the constant records the contract, not the implementation.
pub const COORD_ROUND_TRIP_TOL: f64 = 1e-12;

/// Width of rendered SVG frames in CSS pixels; height follows the
/// camera's aspect ratio.
const SVG_WIDTH: f64 = 480.0;

/// Largest rotation order probed by the periodicity verdict.
const MAX_PERIOD_ORDER: usize = 24;

/// Relative tolerance for matching rotated frame points in the
/// periodicity check.
const PERIOD_MATCH_TOL: f64 = 1e-9;

/// Persistence failures. Command-line callers map these to the I/O exit
/// status; they never signal validation or genericity problems.
#[derive(Debug, Error)]
pub enum IoError {
    /// A directory could not be created.
    #[error("cannot create directory {path}: {source}")]
    Create {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A file could not be written or renamed into place.
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A file could not be read.
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A file was read but its contents are not a valid artifact.
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

impl IoError {
    fn malformed(path: &Path, message: impl Into<String>) -> Self {
        IoError::Malformed {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

// --- Canonical JSON and atomic writing -------------------------------------

/// Serializes a value to canonical JSON: keys sorted, two-space
/// indentation, shortest round-trip floats, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // Routing through `Value` re-keys every object into a sorted map, so
    // field declaration order never leaks into the output.
    let v = serde_json::to_value(value).expect("values persisted here always serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON values always render");
    s.push('\n');
    s
}

/// Writes `contents` to `path` atomically, creating parent directories.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|source| IoError::Create {
                path: dir.to_path_buf(),
                source,
            })?;
        }
    }
    let name = path
        .file_name()
        .ok_or_else(|| IoError::malformed(path, "path has no file name"))?;
    let tmp = path.with_file_name(format!("{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents).map_err(|source| IoError::Write {
        path: tmp.clone(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_atomic(path, &canonical_json(value))
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::malformed(path, e.to_string()))
}

// --- Pipeline configuration -------------------------------------------------

/// Rejected [`PipelineConfig`] values.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    /// The ring count is not a positive multiple of `max(n, 1)`.
    #[error("angular samples m = {m} is not a positive multiple of max(n, 1) = {base}")]
    BadSampleCount { m: usize, base: usize },
    /// A tolerance or magnitude is outside its legal range.
    #[error("{name} = {value} is outside its legal range ({requirement})")]
    BadTolerance {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    /// A grid count is too small.
    #[error("{name} = {value} must be at least {min}")]
    BadCount {
        name: &'static str,
        value: usize,
        min: usize,
    },
    /// Drop axis outside `0..4`.
    #[error("drop axis must be 0..4 (x, y, u, v), got {0}")]
    BadDropAxis(usize),
}

/// Resolved options for one pipeline run. Commands construct this from
/// flags, validate it, and thread it through; persisting it alongside the
/// outputs records the full provenance of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Arc preset name (`"trefoil"`, `"unknot"`) or a path to an arc
    /// JSON file.
    pub arc: String,
    /// Twist count `n`; 0 spins without twisting.
    pub twists: usize,
    /// Angular samples `m` (revolution rings); a positive multiple of
    /// `max(n, 1)`.
    pub angular_samples: usize,
    /// Which of the four coordinates the projection drops.
    pub drop_axis: usize,
    /// Seed for every random choice in the run (perturbations, tilts,
    /// view jitter). No other entropy exists.
    pub seed: u64,
    /// Magnitude of the projection perturbation; 0 projects
    /// symmetrically.
    pub perturb: f64,
    /// Relative width of the gap cut into under-sheets.
    pub band_width: f64,
    /// Direction tilt for critical-event detection; 0 keeps the
    /// symmetry-aligned direction and reports degenerate events.
    pub tilt: f64,
    /// Frames for the vertical and horizontal families.
    pub frame_count: usize,
    /// Half-plane angles for the radial family.
    pub radial_angle_count: usize,
    /// Directory that default output paths are resolved against.
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            arc: "trefoil".into(),
            twists: 2,
            angular_samples: 48,
            drop_axis: 0,
            seed: 1,
            perturb: 1e-3,
            band_width: crate::diagram::DEFAULT_BAND_WIDTH,
            tilt: 1e-4,
            frame_count: crate::motion::DEFAULT_FRAME_COUNT,
            radial_angle_count: crate::motion::DEFAULT_RADIAL_ANGLES,
            out_dir: default_out_dir(),
        }
    }
}

impl PipelineConfig {
    /// Checks the config invariants: `m` a positive multiple of
    /// `max(n, 1)`, tolerances in range, grids non-empty, axis in range.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let base = self.twists.max(1);
        if self.angular_samples == 0 || !self.angular_samples.is_multiple_of(base) {
            return Err(ConfigError::BadSampleCount {
                m: self.angular_samples,
                base,
            });
        }
        if !(self.perturb.is_finite() && self.perturb >= 0.0) {
            return Err(ConfigError::BadTolerance {
                name: "perturb",
                value: self.perturb,
                requirement: "finite and non-negative",
            });
        }
        if !(self.band_width.is_finite() && self.band_width > 0.0) {
            return Err(ConfigError::BadTolerance {
                name: "band_width",
                value: self.band_width,
                requirement: "finite and positive",
            });
        }
        if !(self.tilt.is_finite() && self.tilt >= 0.0) {
            return Err(ConfigError::BadTolerance {
                name: "tilt",
                value: self.tilt,
                requirement: "finite and non-negative",
            });
        }
        if self.frame_count == 0 {
            return Err(ConfigError::BadCount {
                name: "frame_count",
                value: self.frame_count,
                min: 1,
            });
        }
        if self.radial_angle_count == 0 {
            return Err(ConfigError::BadCount {
                name: "radial_angle_count",
                value: self.radial_angle_count,
                min: 1,
            });
        }
        if self.drop_axis >= 4 {
            return Err(ConfigError::BadDropAxis(self.drop_axis));
        }
        Ok(())
    }
}

/// Default output directory: the [`OUT_DIR_ENV`] environment variable if
/// set, `out` otherwise. The variable is the only environment input the
/// pipeline reads.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Persists a config as canonical JSON.
pub fn save_config(path: &Path, config: &PipelineConfig) -> Result<(), IoError> {
    save_json(path, config)
}

/// Reads a config back; [`PipelineConfig::validate`] is the caller's job.
pub fn import_config(path: &Path) -> Result<PipelineConfig, IoError> {
    load_json(path)
}

// --- Arc and twist-ball files ------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ArcDto {
    vertices: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct BallDto {
    center: [f64; 3],
    radius: f64,
    axis: [f64; 3],
}

fn vec3_to_array(p: Vec3) -> [f64; 3] {
    [p.x, p.y, p.z]
}

fn array_to_vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn vec4_to_array(p: Vec4) -> [f64; 4] {
    [p.x, p.y, p.u, p.v]
}

fn array_to_vec4(a: [f64; 4]) -> Vec4 {
    Vec4::new(a[0], a[1], a[2], a[3])
}

/// Writes an arc as `{"vertices": [[x, y, z], ...]}`.
pub fn save_arc(path: &Path, arc: &PolylineArc) -> Result<(), IoError> {
    let dto = ArcDto {
        vertices: arc.vertices.iter().copied().map(vec3_to_array).collect(),
    };
    save_json(path, &dto)
}

/// Reads an arc file. Only the structure is checked here; geometric
/// validation is a separate, explicit step.
pub fn import_arc(path: &Path) -> Result<PolylineArc, IoError> {
    let dto: ArcDto = load_json(path)?;
    Ok(PolylineArc {
        vertices: dto.vertices.into_iter().map(array_to_vec3).collect(),
    })
}

/// Writes a twist ball as `{"axis": ..., "center": ..., "radius": ...}`.
pub fn save_twist_ball(path: &Path, ball: &TwistBall) -> Result<(), IoError> {
    let dto = BallDto {
        center: vec3_to_array(ball.center),
        radius: ball.radius,
        axis: vec3_to_array(ball.axis),
    };
    save_json(path, &dto)
}

/// Reads a twist ball and recovers its punctures against `arc`: the file
/// stores only the sphere, so the two arc vertices on it (within a
/// relative tolerance) are located and ordered along the stored axis.
pub fn import_twist_ball(path: &Path, arc: &PolylineArc) -> Result<TwistBall, IoError> {
    let dto: BallDto = load_json(path)?;
    let center = array_to_vec3(dto.center);
    let axis = array_to_vec3(dto.axis);
    let tol = 1e-9 * (dto.radius.abs() + center.norm()).max(f64::MIN_POSITIVE);
    let on_sphere: Vec<usize> = arc
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| ((**v - center).norm() - dto.radius).abs() <= tol)
        .map(|(i, _)| i)
        .collect();
    let [i, j] = on_sphere[..] else {
        return Err(IoError::malformed(
            path,
            format!(
                "ball meets the arc in {} vertices, need exactly 2",
                on_sphere.len()
            ),
        ));
    };
    let forward = (arc.vertices[j] - arc.vertices[i]).dot(axis) >= 0.0;
    let punctures = if forward { (i, j) } else { (j, i) };
    Ok(TwistBall {
        center,
        radius: dto.radius,
        axis,
        punctures,
    })
}

// --- Surface files -----------------------------------------------------------

/// Topology and symmetry audit of a built surface, embedded in the
/// surface file's metadata and echoed by the build command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceAudit {
    pub euler_characteristic: i64,
    /// Every edge bounds exactly two triangles.
    pub closed: bool,
    /// Triangle orientations are globally consistent.
    pub consistently_oriented: bool,
    /// Rotation order tested in the `(u, v)` plane: `m` for untwisted
    /// spins, `n` for `n`-twist spins.
    pub symmetry_order: usize,
    /// Largest vertex deviation under that rotation.
    pub symmetry_deviation: f64,
    /// The rotation maps the vertex set onto itself within `1e-12` of
    /// the surface scale.
    pub symmetry_exact_on_vertices: bool,
}

/// Provenance and audit attached to a persisted surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeta {
    /// Arc spec the surface was built from.
    pub arc: String,
    /// Twist count `n`.
    pub twists: usize,
    /// Revolution rings `m`.
    pub rings: usize,
    pub audit: SurfaceAudit,
}

#[derive(Serialize, Deserialize)]
struct SurfaceDto {
    meta: SurfaceMeta,
    triangles: Vec<[u32; 3]>,
    vertices4: Vec<[f64; 4]>,
}

/// Audits a surface: Euler characteristic, closedness, orientation
/// consistency, and rotational symmetry at the given order.
pub fn audit_surface(surface: &Surface4, symmetry_order: usize) -> Result<SurfaceAudit, SpinError> {
    let chi = euler_characteristic(surface)?;
    let sym = check_rotational_symmetry(surface, symmetry_order)?;
    Ok(SurfaceAudit {
        euler_characteristic: chi,
        closed: surface.is_closed(),
        consistently_oriented: surface.is_consistently_oriented(),
        symmetry_order: sym.order_tested,
        symmetry_deviation: sym.max_deviation,
        symmetry_exact_on_vertices: sym.exact_on_vertices,
    })
}

/// Writes a surface as
/// `{"meta": ..., "triangles": ..., "vertices4": [[x, y, u, v], ...]}`.
pub fn save_surface(path: &Path, surface: &Surface4, meta: &SurfaceMeta) -> Result<(), IoError> {
    let dto = SurfaceDto {
        meta: meta.clone(),
        triangles: surface.triangles.clone(),
        vertices4: surface
            .vertices
            .iter()
            .copied()
            .map(vec4_to_array)
            .collect(),
    };
    save_json(path, &dto)
}

/// Reads a surface file back into the mesh plus its metadata, checking
/// index ranges and that the recorded Euler characteristic still holds.
pub fn import_surface(path: &Path) -> Result<(Surface4, SurfaceMeta), IoError> {
    let dto: SurfaceDto = load_json(path)?;
    let v = dto.vertices4.len() as u32;
    if let Some(t) = dto.triangles.iter().find(|t| t.iter().any(|&i| i >= v)) {
        return Err(IoError::malformed(
            path,
            format!("triangle {t:?} references a vertex beyond {v}"),
        ));
    }
    let surface = Surface4 {
        vertices: dto.vertices4.into_iter().map(array_to_vec4).collect(),
        triangles: dto.triangles,
        rings: dto.meta.rings,
    };
    let chi = euler_characteristic(&surface)
        .map_err(|e| IoError::malformed(path, format!("mesh is not a surface: {e}")))?;
    if chi != dto.meta.audit.euler_characteristic {
        return Err(IoError::malformed(
            path,
            format!(
                "recorded Euler characteristic {} != recomputed {chi}",
                dto.meta.audit.euler_characteristic
            ),
        ));
    }
    Ok((surface, dto.meta))
}

// --- OBJ meshes ----------------------------------------------------------------

fn push_obj_mesh<'a>(
    out: &mut String,
    vertices: &[Vec3],
    faces: impl Iterator<Item = &'a [u32; 3]>,
) {
    use std::fmt::Write as _;
    for p in vertices {
        writeln!(out, "v {} {} {}", p.x, p.y, p.z).expect("string writes never fail");
    }
    for f in faces {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)
            .expect("string writes never fail");
    }
}

fn parse_obj(path: &Path, text: &str) -> Result<(Vec<Vec3>, Vec<[u32; 3]>), IoError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let mut parts = line.split_ascii_whitespace();
        let bad = |msg: &str| IoError::malformed(path, format!("line {}: {msg}", ln + 1));
        match parts.next() {
            None | Some("#") | Some("g") | Some("o") => {}
            Some("v") => {
                let mut coord = || -> Result<f64, IoError> {
                    parts
                        .next()
                        .ok_or_else(|| bad("vertex needs three coordinates"))?
                        .parse()
                        .map_err(|_| bad("unparsable vertex coordinate"))
                };
                vertices.push(Vec3::new(coord()?, coord()?, coord()?));
            }
            Some("f") => {
                let mut index = || -> Result<u32, IoError> {
                    let i: u32 = parts
                        .next()
                        .ok_or_else(|| bad("face needs three indices"))?
                        .parse()
                        .map_err(|_| bad("unparsable face index"))?;
                    i.checked_sub(1).ok_or_else(|| bad("face index 0"))
                };
                faces.push([index()?, index()?, index()?]);
            }
            Some(other) => {
                return Err(bad(&format!("unsupported OBJ element '{other}'")));
            }
        }
    }
    Ok((vertices, faces))
}

/// Connected components of the non-gap triangles under shared-edge
/// adjacency, each sorted, ordered by smallest member. This is the
/// band-granular decomposition the broken OBJ renders; the topological
/// sheet count of the arrangement is the JSON sidecar's `sheet_count`.
fn broken_groups(triangles: &[[u32; 3]], gap_triangles: &[u32]) -> Vec<Vec<u32>> {
    let mut gaps = gap_triangles.to_vec();
    gaps.sort_unstable();
    let mut parent: Vec<u32> = (0..triangles.len() as u32).collect();
    fn find(parent: &mut [u32], mut a: u32) -> u32 {
        while parent[a as usize] != a {
            parent[a as usize] = parent[parent[a as usize] as usize];
            a = parent[a as usize];
        }
        a
    }
    let mut last_on_edge: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        let t = t as u32;
        if gaps.binary_search(&t).is_ok() {
            continue;
        }
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let edge = (a.min(b), a.max(b));
            match last_on_edge.get(&edge) {
                Some(&s) => {
                    let (ra, rb) = (find(&mut parent, s), find(&mut parent, t));
                    parent[ra.max(rb) as usize] = ra.min(rb);
                }
                None => {
                    last_on_edge.insert(edge, t);
                }
            }
        }
    }
    let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for t in 0..triangles.len() as u32 {
        if gaps.binary_search(&t).is_err() {
            groups.entry(find(&mut parent, t)).or_default().push(t);
        }
    }
    groups.into_values().collect()
}

// --- Diagram files --------------------------------------------------------------

/// Sidecar JSON accompanying a diagram OBJ: everything the OBJ cannot
/// carry — per-vertex viewing depth, projection provenance, the
/// singularity set, and the broken-surface record.
///
/// Singularity data is optional because extraction is a partial
/// function of diagrams: a symmetric (unperturbed) projection can have
/// a structurally non-generic double-point set that refuses to stitch
/// into curves, yet the diagram itself — mesh, depths, provenance — is
/// still well-defined and sliceable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramSidecar {
    /// Depth of each OBJ vertex along the dropped axis (larger = nearer).
    pub depths: Vec<f64>,
    pub drop_axis: usize,
    pub rings: usize,
    pub projection_direction: Vec4,
    pub rotation_params: [f64; 6],
    pub certificate: GenericityCertificate,
    pub singularities: Option<SingularitySet>,
    pub summary: Option<SingularitySummary>,
    pub broken: Option<BrokenSurface>,
}

/// Files written for one diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramPaths {
    pub obj: PathBuf,
    pub sidecar: PathBuf,
    /// Present when a broken surface was exported: the gap-cut mesh with
    /// one OBJ group per band-granular component.
    pub broken_obj: Option<PathBuf>,
}

fn sibling_with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let name = stem
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    stem.with_file_name(format!("{name}{suffix}"))
}

/// Writes `{stem}.obj` (the projected image mesh), `{stem}.json` (the
/// sidecar), and — when `broken` is given — `{stem}-broken.obj` with the
/// under-band gaps cut out and one group per remaining component.
/// `singularity` pairs the extracted set with its summary; pass `None`
/// when extraction failed on a symmetric projection.
pub fn save_diagram_files(
    stem: &Path,
    diagram: &Diagram3,
    singularity: Option<(&SingularitySet, &SingularitySummary)>,
    broken: Option<&BrokenSurface>,
) -> Result<DiagramPaths, IoError> {
    use std::fmt::Write as _;
    let paths = DiagramPaths {
        obj: stem.with_extension("obj"),
        sidecar: stem.with_extension("json"),
        broken_obj: broken.map(|_| sibling_with_suffix(stem, "-broken.obj")),
    };

    let mut obj = String::from("o image\n");
    push_obj_mesh(&mut obj, &diagram.vertices, diagram.triangles.iter());
    write_atomic(&paths.obj, &obj)?;

    if let (Some(b), Some(path)) = (broken, &paths.broken_obj) {
        let mut out = String::new();
        for (g, group) in broken_groups(&diagram.triangles, &b.gap_triangles)
            .iter()
            .enumerate()
        {
            writeln!(out, "g sheet_{g:03}").expect("string writes never fail");
            push_obj_mesh(
                &mut out,
                if g == 0 { &diagram.vertices } else { &[] },
                group.iter().map(|&t| &diagram.triangles[t as usize]),
            );
        }
        write_atomic(path, &out)?;
    }

    let sidecar = DiagramSidecar {
        depths: diagram.depths.clone(),
        drop_axis: diagram.drop_axis,
        rings: diagram.rings,
        projection_direction: diagram.projection_direction,
        rotation_params: diagram.rotation_params,
        certificate: diagram.certificate,
        singularities: singularity.map(|(s, _)| s.clone()),
        summary: singularity.map(|(_, s)| *s),
        broken: broken.cloned(),
    };
    save_json(&paths.sidecar, &sidecar)?;
    Ok(paths)
}

/// Reads `{stem}.obj` + `{stem}.json` back into the diagram, its
/// singularity set (when one was extracted), and the broken-surface
/// record (when one was exported).
pub fn import_diagram(
    stem: &Path,
) -> Result<(Diagram3, Option<SingularitySet>, Option<BrokenSurface>), IoError> {
    let obj_path = stem.with_extension("obj");
    let (vertices, triangles) = parse_obj(&obj_path, &read_text(&obj_path)?)?;
    let v = vertices.len() as u32;
    if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= v)) {
        return Err(IoError::malformed(
            &obj_path,
            format!("face {t:?} references a vertex beyond {v}"),
        ));
    }
    let sidecar_path = stem.with_extension("json");
    let sidecar: DiagramSidecar = load_json(&sidecar_path)?;
    if sidecar.depths.len() != vertices.len() {
        return Err(IoError::malformed(
            &sidecar_path,
            format!(
                "{} depths for {} vertices",
                sidecar.depths.len(),
                vertices.len()
            ),
        ));
    }
    if sidecar.drop_axis >= 4 {
        return Err(IoError::malformed(
            &sidecar_path,
            format!("drop axis {} out of range", sidecar.drop_axis),
        ));
    }
    let diagram = Diagram3 {
        vertices,
        triangles,
        depths: sidecar.depths,
        drop_axis: sidecar.drop_axis,
        projection_direction: sidecar.projection_direction,
        rotation_params: sidecar.rotation_params,
        rings: sidecar.rings,
        certificate: sidecar.certificate,
    };
    Ok((diagram, sidecar.singularities, sidecar.broken))
}

// --- Motion-picture files ----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MotionFrameDto {
    breaks: Vec<[f64; 3]>,
    curves: Vec<Vec<[f64; 3]>>,
    /// Gauss code of the frame's planar projection, one string per
    /// component.
    gauss: Vec<String>,
    nudged: bool,
    t: f64,
}

#[derive(Serialize, Deserialize)]
struct MotionEventDto {
    degenerate_set: Option<Vec<[f64; 3]>>,
    kind: EventKind,
    location: [f64; 3],
    multiplicity: usize,
    t: f64,
}

#[derive(Serialize, Deserialize)]
struct MotionDto {
    events: Vec<MotionEventDto>,
    family: SliceFamily,
    frames: Vec<MotionFrameDto>,
    source: String,
    /// Seed the per-frame Gauss codes were projected with.
    view_seed: u64,
}

/// Writes a motion picture with per-frame Gauss codes (`gauss[i]` holds
/// frame `i`'s codes, one per component, as produced by
/// [`crate::link::frame_gauss_codes`] with `view_seed`).
pub fn save_motion_picture(
    path: &Path,
    picture: &MotionPicture,
    gauss: &[Vec<String>],
    view_seed: u64,
) -> Result<(), IoError> {
    if gauss.len() != picture.frames.len() {
        return Err(IoError::malformed(
            path,
            format!(
                "{} gauss code lists for {} frames",
                gauss.len(),
                picture.frames.len()
            ),
        ));
    }
    let dto = MotionDto {
        events: picture
            .events
            .iter()
            .map(|e| MotionEventDto {
                degenerate_set: e
                    .degenerate_set
                    .as_ref()
                    .map(|s| s.iter().copied().map(vec3_to_array).collect()),
                kind: e.kind,
                location: vec3_to_array(e.location),
                multiplicity: e.multiplicity,
                t: e.value,
            })
            .collect(),
        family: picture.family,
        frames: picture
            .frames
            .iter()
            .zip(gauss)
            .map(|(f, g)| MotionFrameDto {
                breaks: f.breaks.iter().copied().map(vec3_to_array).collect(),
                curves: f
                    .curves
                    .iter()
                    .map(|c| c.iter().copied().map(vec3_to_array).collect())
                    .collect(),
                gauss: g.clone(),
                nudged: f.nudged,
                t: f.parameter,
            })
            .collect(),
        source: picture.source.clone(),
        view_seed,
    };
    save_json(path, &dto)
}

/// Reads a motion picture back, returning the picture, the per-frame
/// Gauss codes, and the view seed they were projected with.
pub fn import_motion_picture(
    path: &Path,
) -> Result<(MotionPicture, Vec<Vec<String>>, u64), IoError> {
    let dto: MotionDto = load_json(path)?;
    let gauss: Vec<Vec<String>> = dto.frames.iter().map(|f| f.gauss.clone()).collect();
    let picture = MotionPicture {
        family: dto.family,
        frames: dto
            .frames
            .into_iter()
            .map(|f| Frame {
                parameter: f.t,
                nudged: f.nudged,
                curves: f
                    .curves
                    .into_iter()
                    .map(|c| c.into_iter().map(array_to_vec3).collect())
                    .collect(),
                breaks: f.breaks.into_iter().map(array_to_vec3).collect(),
            })
            .collect(),
        events: dto
            .events
            .into_iter()
            .map(|e| CriticalEvent {
                value: e.t,
                kind: e.kind,
                multiplicity: e.multiplicity,
                location: array_to_vec3(e.location),
                degenerate_set: e
                    .degenerate_set
                    .map(|s| s.into_iter().map(array_to_vec3).collect()),
            })
            .collect(),
        source: dto.source,
    };
    Ok((picture, gauss, dto.view_seed))
}

// --- Analysis reports ---------------------------------------------------------------

/// Multiplicity-weighted counts of the picture's critical events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTable {
    pub minima: usize,
    pub maxima: usize,
    pub saddles: usize,
}

/// Result of the rotational-periodicity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicityVerdict {
    /// False for the vertical family, whose parameter is not an angle
    /// conjugate.
    pub applicable: bool,
    /// Largest `k` with period `2π/k` confirmed; 1 means no symmetry.
    pub order: usize,
    pub verdict: String,
}

/// Everything the analyze step derives from a motion picture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub source: String,
    pub family: SliceFamily,
    pub frame_count: usize,
    /// Per-frame invariant signatures under the canonical depth-axis
    /// view.
    pub frame_signatures: Vec<InvariantSignature>,
    pub events: EventTable,
    /// `minima + maxima − saddles`; equals the Euler characteristic when
    /// the events come from a tilted (generic) direction.
    pub morse_balance: i64,
    pub normal_form: NormalFormReport,
    pub periodicity: PeriodicityVerdict,
}

/// Largest scale of any frame coordinate, for relative tolerances.
fn picture_scale(picture: &MotionPicture) -> f64 {
    let mut s: f64 = 0.0;
    for frame in &picture.frames {
        for curve in &frame.curves {
            for p in curve {
                s = s.max(p.x.abs()).max(p.y.abs()).max(p.z.abs());
            }
        }
    }
    s.max(f64::MIN_POSITIVE)
}

/// Whether every frame's point set maps onto itself under rotation by
/// `2π/order` in the two in-frame coordinates (greedy matching within
/// `tol`). Closing duplicates are dropped so each location carries its
/// true multiplicity: the rotation permutes the loops, so a loop's
/// repeated start point generally lands on an interior point of another
/// loop.
fn frames_rotation_invariant(picture: &MotionPicture, order: usize, tol: f64) -> bool {
    let (s, c) = (std::f64::consts::TAU / order as f64).sin_cos();
    picture.frames.iter().all(|frame| {
        let points: Vec<Vec3> = frame
            .curves
            .iter()
            .flat_map(|c| {
                let closed = c.len() > 1 && c.first() == c.last();
                c[..c.len() - usize::from(closed)].iter().copied()
            })
            .collect();
        let mut used = vec![false; points.len()];
        points.iter().all(|p| {
            let r = Vec3::new(p.x, c * p.y - s * p.z, s * p.y + c * p.z);
            points.iter().enumerate().any(|(i, q)| {
                if !used[i] && (*q - r).norm() <= tol {
                    used[i] = true;
                    true
                } else {
                    false
                }
            })
        })
    })
}

fn periodicity_verdict(
    picture: &MotionPicture,
    signatures: &[InvariantSignature],
) -> PeriodicityVerdict {
    let order = match picture.family {
        SliceFamily::Vertical => {
            return PeriodicityVerdict {
                applicable: false,
                order: 1,
                verdict: "not applicable to the vertical family".into(),
            };
        }
        SliceFamily::Horizontal => {
            // Geometric check: frames are point sets in the plane the
            // rotation acts on, so invariance is tested directly.
            let tol = PERIOD_MATCH_TOL * picture_scale(picture);
            (2..=MAX_PERIOD_ORDER)
                .rev()
                .find(|&k| frames_rotation_invariant(picture, k, tol))
                .unwrap_or(1)
        }
        SliceFamily::Radial => {
            // The frames themselves live in rotated half-planes, so the
            // check compares invariant signatures across the angle grid.
            let n = signatures.len();
            (2..=n)
                .rev()
                .filter(|k| n.is_multiple_of(*k))
                .find(|&k| {
                    let shift = n / k;
                    (0..n).all(|i| {
                        crate::link::signatures_equal(&signatures[i], &signatures[(i + shift) % n])
                    })
                })
                .unwrap_or(1)
        }
    };
    PeriodicityVerdict {
        applicable: true,
        order,
        verdict: if order >= 2 {
            format!("period 2π/{order} confirmed")
        } else {
            "no rotational period detected".into()
        },
    }
}

/// Derives the full analysis report of a picture: per-frame signatures
/// under the canonical view, the event table and Morse balance, the
/// normal-form report, and the periodicity verdict.
pub fn analyze_picture(
    picture: &MotionPicture,
    view_seed: u64,
    mode: ExecMode,
) -> Result<AnalysisReport, LinkError> {
    let signatures = frame_signatures(&picture.frames, Vec3::new(1.0, 0.0, 0.0), view_seed, mode)?;
    let mut events = EventTable {
        minima: 0,
        maxima: 0,
        saddles: 0,
    };
    for e in &picture.events {
        match e.kind {
            EventKind::Minimum => events.minima += e.multiplicity,
            EventKind::Maximum => events.maxima += e.multiplicity,
            EventKind::Saddle => events.saddles += e.multiplicity,
        }
    }
    let periodicity = periodicity_verdict(picture, &signatures);
    Ok(AnalysisReport {
        source: picture.source.clone(),
        family: picture.family,
        frame_count: picture.frames.len(),
        frame_signatures: signatures,
        events,
        morse_balance: events.minima as i64 + events.maxima as i64 - events.saddles as i64,
        normal_form: check_normal_form(picture),
        periodicity,
    })
}

/// Persists an analysis report as canonical JSON.
pub fn save_report(path: &Path, report: &AnalysisReport) -> Result<(), IoError> {
    save_json(path, report)
}

/// Reads an analysis report back.
pub fn import_report(path: &Path) -> Result<AnalysisReport, IoError> {
    load_json(path)
}

// --- SVG frames -----------------------------------------------------------------------

/// Fixed orthographic camera of a motion picture's SVG frames: the
/// bounding box of every frame's drawing coordinates, padded 5% per
/// side, shared by all frames so the sequence is visually comparable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCamera {
    pub min_x: f64,
    pub min_y: f64,
    pub width: f64,
    pub height: f64,
}

/// SVG drawing coordinates of a frame point: the depth coordinate is
/// dropped and the vertical axis flipped (SVG y grows downward).
#[inline]
fn draw_xy(p: Vec3) -> (f64, f64) {
    (p.y, -p.z)
}

/// Camera covering every frame of the picture.
pub fn picture_camera(picture: &MotionPicture) -> FrameCamera {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for frame in &picture.frames {
        for p in frame.curves.iter().flatten() {
            let (x, y) = draw_xy(*p);
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
    }
    if lo.0 > hi.0 {
        return FrameCamera {
            min_x: -1.0,
            min_y: -1.0,
            width: 2.0,
            height: 2.0,
        };
    }
    let pad = 0.05 * ((hi.0 - lo.0).max(hi.1 - lo.1)).max(f64::MIN_POSITIVE);
    FrameCamera {
        min_x: lo.0 - pad,
        min_y: lo.1 - pad,
        width: hi.0 - lo.0 + 2.0 * pad,
        height: hi.1 - lo.1 + 2.0 * pad,
    }
}

/// Fixed-precision SVG number with `-0` normalized away.
fn svg_num(x: f64) -> String {
    format!("{:.6}", x + 0.0)
}

/// Renders one frame as a standalone SVG 1.1 document. Curves are drawn
/// as black polylines; segments whose midpoints carry break marks are
/// omitted, leaving the over/under gaps visible.
pub fn render_frame_svg(frame: &Frame, camera: &FrameCamera) -> String {
    use std::fmt::Write as _;
    let span = camera.width.max(camera.height);
    let stroke = 0.004 * span;
    let gap_tol = 1e-9 * span;
    let height = SVG_WIDTH * camera.height / camera.width;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         viewBox=\"{} {} {} {}\" width=\"{}\" height=\"{}\">\n",
        svg_num(camera.min_x),
        svg_num(camera.min_y),
        svg_num(camera.width),
        svg_num(camera.height),
        svg_num(SVG_WIDTH),
        svg_num(height),
    );
    writeln!(svg, "  <title>frame at t = {}</title>", frame.parameter)
        .expect("string writes never fail");
    for curve in &frame.curves {
        if curve.len() < 2 {
            continue;
        }
        // Split the polyline into runs of segments that do not cross a
        // break band.
        let gapped: Vec<bool> = curve
            .windows(2)
            .map(|w| {
                let mid = (w[0] + w[1]) * 0.5;
                frame.breaks.iter().any(|b| (*b - mid).norm() <= gap_tol)
            })
            .collect();
        if gapped.iter().all(|g| !g) {
            let mut d = String::new();
            for (i, p) in curve[..curve.len() - 1].iter().enumerate() {
                let (x, y) = draw_xy(*p);
                let cmd = if i == 0 { 'M' } else { 'L' };
                write!(d, "{cmd} {} {} ", svg_num(x), svg_num(y)).expect("string writes");
            }
            d.push('Z');
            writeln!(
                svg,
                "  <path fill=\"none\" stroke=\"#000000\" stroke-width=\"{}\" \
                 stroke-linecap=\"round\" d=\"{d}\"/>",
                svg_num(stroke)
            )
            .expect("string writes never fail");
            continue;
        }
        let mut run: Vec<(f64, f64)> = Vec::new();
        let flush = |run: &mut Vec<(f64, f64)>, svg: &mut String| {
            if run.len() >= 2 {
                let mut d = String::new();
                for (i, (x, y)) in run.iter().enumerate() {
                    let cmd = if i == 0 { 'M' } else { 'L' };
                    write!(d, "{cmd} {} {}", svg_num(*x), svg_num(*y)).expect("string writes");
                    if i + 1 != run.len() {
                        d.push(' ');
                    }
                }
                writeln!(
                    svg,
                    "  <path fill=\"none\" stroke=\"#000000\" stroke-width=\"{}\" \
                     stroke-linecap=\"round\" d=\"{d}\"/>",
                    svg_num(stroke)
                )
                .expect("string writes never fail");
            }
            run.clear();
        };
        for (i, gap) in gapped.iter().enumerate() {
            if *gap {
                flush(&mut run, &mut svg);
            } else {
                if run.is_empty() {
                    run.push(draw_xy(curve[i]));
                }
                run.push(draw_xy(curve[i + 1]));
            }
        }
        flush(&mut run, &mut svg);
    }
    svg.push_str("</svg>\n");
    svg
}

/// File name of frame `index`'s SVG.
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:03}.svg")
}

/// Renders every frame of the picture into `dir` under the shared
/// camera, returning the written paths in frame order.
pub fn save_frame_svgs(dir: &Path, picture: &MotionPicture) -> Result<Vec<PathBuf>, IoError> {
    let camera = picture_camera(picture);
    let mut paths = Vec::with_capacity(picture.frames.len());
    for (i, frame) in picture.frames.iter().enumerate() {
        let path = dir.join(frame_file_name(i));
        write_atomic(&path, &render_frame_svg(frame, &camera))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc::{default_twist_ball, make_trefoil_arc};
    use crate::diagram::{
        break_sheets, compute_singularity_set, project_generic, singularity_summary,
        DEFAULT_BAND_WIDTH,
    };
    use crate::link::frame_gauss_codes;
    use crate::motion::{default_frame_values, radial_angles, slice_horizontal, slice_vertical};
    use crate::spin::{spin, twist_spin};

    fn tempdir() -> tempfile::TempDir {
        tempfile::tempdir().expect("temp dir")
    }

    fn spun_trefoil_small() -> Surface4 {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        spin(&arc, 12).unwrap()
    }

    #[test]
    fn arc_and_ball_files_round_trip_exactly() {
        let dir = tempdir();
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        let arc_path = dir.path().join("arc.json");
        let ball_path = dir.path().join("ball.json");
        save_arc(&arc_path, &arc).unwrap();
        save_twist_ball(&ball_path, &ball).unwrap();
        assert_eq!(import_arc(&arc_path).unwrap(), arc);
        assert_eq!(import_twist_ball(&ball_path, &arc).unwrap(), ball);
    }

    #[test]
    fn surface_files_round_trip_with_their_audit() {
        let dir = tempdir();
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        let surface = twist_spin(&arc, &ball, 2, 16).unwrap();
        let audit = audit_surface(&surface, 2).unwrap();
        assert_eq!(audit.euler_characteristic, 2);
        assert!(audit.closed);
        assert!(audit.consistently_oriented);
        assert!(audit.symmetry_exact_on_vertices);
        let meta = SurfaceMeta {
            arc: "trefoil".into(),
            twists: 2,
            rings: 16,
            audit,
        };
        let path = dir.path().join("surface.json");
        save_surface(&path, &surface, &meta).unwrap();
        let (back, back_meta) = import_surface(&path).unwrap();
        assert_eq!(back, surface);
        assert_eq!(back_meta, meta);
    }

    #[test]
    fn corrupted_surface_files_are_rejected() {
        let dir = tempdir();
        let surface = spun_trefoil_small();
        let meta = SurfaceMeta {
            arc: "trefoil".into(),
            twists: 0,
            rings: 12,
            audit: audit_surface(&surface, 12).unwrap(),
        };
        let path = dir.path().join("surface.json");
        save_surface(&path, &surface, &meta).unwrap();
        let mangled = read_text(&path)
            .unwrap()
            .replace("\"euler_characteristic\": 2", "\"euler_characteristic\": 0");
        write_atomic(&path, &mangled).unwrap();
        assert!(matches!(
            import_surface(&path),
            Err(IoError::Malformed { .. })
        ));
        assert!(matches!(
            import_arc(&dir.path().join("absent.json")),
            Err(IoError::Read { .. })
        ));
    }

    #[test]
    fn diagram_files_round_trip() {
        let dir = tempdir();
        let surface = spun_trefoil_small();
        let diagram = project_generic(&surface, 0, 0.0, 0, ExecMode::Sequential).unwrap();
        let sing = compute_singularity_set(&diagram, ExecMode::Sequential).unwrap();
        let broken = break_sheets(&diagram, &sing, DEFAULT_BAND_WIDTH).unwrap();
        let summary = singularity_summary(&diagram, &sing).unwrap();
        let stem = dir.path().join("diagram");
        let paths =
            save_diagram_files(&stem, &diagram, Some((&sing, &summary)), Some(&broken)).unwrap();
        assert!(paths.obj.exists() && paths.sidecar.exists());
        assert!(paths.broken_obj.as_ref().is_some_and(|p| p.exists()));

        let (d, s, b) = import_diagram(&stem).unwrap();
        assert_eq!(d, diagram);
        assert_eq!(b.as_ref(), Some(&broken));
        // Stitch-end provenance is walk-internal scratch and is not
        // persisted; everything else must survive exactly.
        let mut expected = sing.clone();
        for seg in expected.curve_segments.iter_mut().flatten() {
            seg.end_a = None;
            seg.end_b = None;
        }
        assert_eq!(s, Some(expected));
    }

    #[test]
    fn diagrams_without_singularity_data_round_trip() {
        // A symmetric twisted projection is sliceable even though its
        // non-generic double-point set refuses to stitch into curves,
        // so the sidecar must carry a diagram alone.
        let dir = tempdir();
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        let surface = twist_spin(&arc, &ball, 2, 16).unwrap();
        let diagram = project_generic(&surface, 0, 0.0, 0, ExecMode::Sequential).unwrap();
        assert!(matches!(
            compute_singularity_set(&diagram, ExecMode::Sequential),
            Err(crate::diagram::DiagramError::StitchingFailure(_))
        ));
        let stem = dir.path().join("bare");
        let paths = save_diagram_files(&stem, &diagram, None, None).unwrap();
        assert!(paths.broken_obj.is_none());
        let (d, s, b) = import_diagram(&stem).unwrap();
        assert_eq!(d, diagram);
        assert_eq!(s, None);
        assert_eq!(b, None);
        let picture =
            crate::motion::slice_radial(&d, None, &radial_angles(4), ExecMode::Sequential).unwrap();
        assert_eq!(picture.frames.len(), 4);
    }

    #[test]
    fn broken_obj_groups_render_the_sheets() {
        let dir = tempdir();
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let surface = spin(&arc, 48).unwrap();
        let diagram = project_generic(&surface, 0, 0.0, 0, ExecMode::default()).unwrap();
        let sing = compute_singularity_set(&diagram, ExecMode::default()).unwrap();
        let broken = break_sheets(&diagram, &sing, DEFAULT_BAND_WIDTH).unwrap();
        let summary = singularity_summary(&diagram, &sing).unwrap();
        let stem = dir.path().join("diagram");
        let paths =
            save_diagram_files(&stem, &diagram, Some((&sing, &summary)), Some(&broken)).unwrap();
        let text = read_text(paths.broken_obj.as_ref().unwrap()).unwrap();
        let groups = text.lines().filter(|l| l.starts_with("g ")).count();
        // Cutting the under-side bands along the three double curves
        // separates the image into three physical pieces — the spun
        // version of the classical trefoil's three arcs. The abstract
        // sheet count (both sides cut along every double curve) stays 4
        // in the sidecar.
        assert_eq!(groups, 3, "spun trefoil splits into its three arc bands");
        assert_eq!(broken.under_arcs, 3);
        assert_eq!(broken.sheet_count, 4);
        let faces = text.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(
            faces,
            diagram.triangles.len() - broken.gap_triangles.len(),
            "broken OBJ holds exactly the non-gap triangles"
        );
    }

    #[test]
    fn motion_picture_files_round_trip_with_gauss_codes() {
        let dir = tempdir();
        let surface = spun_trefoil_small();
        let picture = slice_vertical(&surface, &[0.0, 0.4], ExecMode::Sequential).unwrap();
        let gauss = frame_gauss_codes(
            &picture.frames,
            Vec3::new(1.0, 0.0, 0.0),
            7,
            ExecMode::Sequential,
        )
        .unwrap();
        let path = dir.path().join("motion.json");
        save_motion_picture(&path, &picture, &gauss, 7).unwrap();
        let (back, back_gauss, seed) = import_motion_picture(&path).unwrap();
        assert_eq!(back, picture);
        assert_eq!(back_gauss, gauss);
        assert_eq!(seed, 7);
        assert!(gauss.iter().flatten().any(|code| !code.is_empty()));

        let text = read_text(&path).unwrap();
        assert!(text.contains("\"gauss\""), "codes live inside each frame");
    }

    #[test]
    fn canonical_json_is_sorted_and_byte_stable() {
        let dir = tempdir();
        let config = PipelineConfig::default();
        let a = dir.path().join("a.json");
        let b = dir.path().join("b.json");
        save_config(&a, &config).unwrap();
        save_config(&b, &config).unwrap();
        let (ta, tb) = (read_text(&a).unwrap(), read_text(&b).unwrap());
        assert_eq!(ta, tb);
        assert_eq!(import_config(&a).unwrap(), config);
        let keys = ["angular_samples", "arc", "band_width", "drop_axis"];
        let positions: Vec<usize> = keys
            .iter()
            .map(|k| ta.find(&format!("\"{k}\"")).expect("key present"))
            .collect();
        assert!(
            positions.windows(2).all(|w| w[0] < w[1]),
            "keys appear in sorted order"
        );
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let ok = PipelineConfig::default();
        ok.validate().unwrap();
        let bad_m = PipelineConfig {
            angular_samples: 47,
            ..ok.clone()
        };
        assert_eq!(
            bad_m.validate(),
            Err(ConfigError::BadSampleCount { m: 47, base: 2 })
        );
        let bad_band = PipelineConfig {
            band_width: 0.0,
            ..ok.clone()
        };
        assert!(matches!(
            bad_band.validate(),
            Err(ConfigError::BadTolerance {
                name: "band_width",
                ..
            })
        ));
        let bad_axis = PipelineConfig {
            drop_axis: 4,
            ..ok.clone()
        };
        assert_eq!(bad_axis.validate(), Err(ConfigError::BadDropAxis(4)));
        let bad_frames = PipelineConfig {
            frame_count: 0,
            ..ok
        };
        assert!(matches!(
            bad_frames.validate(),
            Err(ConfigError::BadCount {
                name: "frame_count",
                ..
            })
        ));
    }

    #[test]
    fn svg_frames_share_one_camera_and_draw_gaps() {
        let dir = tempdir();
        let surface = spun_trefoil_small();
        let diagram = project_generic(&surface, 0, 0.0, 0, ExecMode::Sequential).unwrap();
        let sing = compute_singularity_set(&diagram, ExecMode::Sequential).unwrap();
        let broken = break_sheets(&diagram, &sing, DEFAULT_BAND_WIDTH).unwrap();
        let picture = crate::motion::slice_radial(
            &diagram,
            Some(&broken),
            &radial_angles(4),
            ExecMode::Sequential,
        )
        .unwrap();
        let paths = save_frame_svgs(dir.path(), &picture).unwrap();
        assert_eq!(paths.len(), picture.frames.len());

        let view_boxes: Vec<String> = paths
            .iter()
            .map(|p| {
                let text = read_text(p).unwrap();
                assert!(text.starts_with("<svg xmlns"));
                assert!(text.contains("version=\"1.1\""));
                let start = text.find("viewBox=\"").unwrap();
                text[start..text[start..].find('>').unwrap() + start].to_string()
            })
            .collect();
        assert!(
            view_boxes.iter().all(|v| *v == view_boxes[0]),
            "fixed camera across frames"
        );

        // A frame that crosses a break band draws more paths than it has
        // curves: the gaps split its polylines.
        let broken_frame = picture
            .frames
            .iter()
            .position(|f| !f.breaks.is_empty())
            .expect("radial frames of the broken spun trefoil cross gaps");
        let text = read_text(&paths[broken_frame]).unwrap();
        let path_count = text.matches("<path").count();
        assert!(
            path_count > picture.frames[broken_frame].curves.len(),
            "{path_count} paths for {} curves",
            picture.frames[broken_frame].curves.len()
        );
    }

    #[test]
    fn analysis_confirms_the_two_twist_period() {
        let arc = make_trefoil_arc(1.0, 24).unwrap();
        let ball = default_twist_ball(&arc).unwrap();
        let surface = twist_spin(&arc, &ball, 2, 16).unwrap();
        let lo = surface
            .vertices
            .iter()
            .fold(f64::INFINITY, |a, v| a.min(v.y));
        let hi = surface
            .vertices
            .iter()
            .fold(f64::NEG_INFINITY, |a, v| a.max(v.y));
        let picture = slice_horizontal(
            &surface,
            &crate::motion::frame_values(lo, hi, 9),
            ExecMode::Sequential,
        )
        .unwrap();
        let report = analyze_picture(&picture, 3, ExecMode::Sequential).unwrap();
        assert_eq!(report.frame_count, 9);
        assert_eq!(report.frame_signatures.len(), 9);
        assert!(report.periodicity.applicable);
        assert_eq!(report.periodicity.order, 2, "two twists give period π");
        assert_eq!(report.periodicity.verdict, "period 2π/2 confirmed");
        assert!(!report.normal_form.ok, "real pictures are not normal form");
    }

    #[test]
    fn analysis_reports_round_trip_and_balance_tilted_events() {
        let dir = tempdir();
        let surface = spun_trefoil_small();
        let values = default_frame_values(-3.0, 3.0);
        let mut picture = slice_vertical(&surface, &values[..7], ExecMode::Sequential).unwrap();
        picture.events =
            crate::motion::detect_events(&surface, SliceFamily::Vertical, 1e-4, 5).unwrap();
        let report = analyze_picture(&picture, 11, ExecMode::Sequential).unwrap();
        assert_eq!(
            report.morse_balance, 2,
            "tilted events balance to the sphere's Euler characteristic"
        );
        assert!(!report.periodicity.applicable);
        let path = dir.path().join("report.json");
        save_report(&path, &report).unwrap();
        assert_eq!(import_report(&path).unwrap(), report);
    }

    #[test]
    fn atomic_writes_leave_no_temporaries() {
        let dir = tempdir();
        let path = dir.path().join("nested").join("file.json");
        write_atomic(&path, "{}\n").unwrap();
        assert_eq!(read_text(&path).unwrap(), "{}\n");
        let entries: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(entries, vec![std::ffi::OsString::from("file.json")]);
    }
}
