//! Construction and analysis of spun and twist-spun 2-knots.
//!
//! The pipeline starts from a properly embedded polygonal arc in upper
//! half-space (endpoints on the boundary plane, interior strictly above
//! it), revolves it into a closed surface in 4-space — optionally twisting
//! the knotted part of the arc while it spins — and then studies the
//! result two ways:
//!
//! * **Broken-surface diagrams** ([`diagram`]): project the surface to
//!   3-space along a generic direction, extract the double curves, triple
//!   points and branch points of the image, and break the sheets along the
//!   double curves to record over/under information.
//! * **Motion pictures** ([`motion`]): slice the surface (or a projected
//!   diagram) along a one-parameter family of hyperplanes and treat each
//!   frame as a classical knot or link diagram, tracking how frames change
//!   across critical levels.
//!
//! Frames and other classical diagrams are analysed in [`link`] with Fox
//! 3-colorings, linking matrices and Reidemeister moves, which supplies
//! cheap invariant-level cross-checks of the 4-dimensional constructions.
//!
//! All geometry is plain `f64`; every tolerance in the crate is expressed
//! relative to the size of the model it is applied to. Randomness only
//! enters through explicit seeds, so every pipeline run is reproducible
//! bit for bit.

pub mod arc;
pub mod bvh;
pub mod diagram;
pub mod exec;
pub mod geom;
pub mod io;
pub mod link;
pub mod motion;
pub mod spin;

pub use arc::{
    default_twist_ball, make_trefoil_arc, make_unknotted_arc, validate_arc, ArcError, PolylineArc,
    TwistBall, ValidationReport,
};
pub use diagram::{
    break_sheets, compute_singularity_set, compute_singularity_set_exhaustive,
    optimize_projection, project_generic, singularity_summary, BrokenSurface, Diagram3,
    DiagramError, GenericityCertificate, ProjectionSearch, SingularitySet, SingularitySummary,
    DEFAULT_BAND_WIDTH,
};
pub use exec::ExecMode;
pub use geom::{Vec2, Vec3, Vec4};
pub use io::{
    analyze_picture, audit_surface, canonical_json, default_out_dir, import_arc, import_config,
    import_diagram, import_motion_picture, import_report, import_surface, import_twist_ball,
    picture_camera, render_frame_svg, save_arc, save_config, save_diagram_files, save_frame_svgs,
    save_motion_picture, save_report, save_surface, save_twist_ball, write_atomic, AnalysisReport,
    ConfigError, DiagramPaths, DiagramSidecar, EventTable, FrameCamera, IoError,
    PeriodicityVerdict, PipelineConfig, SurfaceAudit, SurfaceMeta, OUT_DIR_ENV,
};
pub use link::{
    frame_gauss_codes, frame_signatures, hopf_link_diagram, linking_matrix, planar_project_frame,
    signature, signatures_equal, square_knot_diagram, trefoil_diagram, tricoloring_count,
    unknot_diagram, unlink_diagram, InvariantSignature, LinkDiagram, LinkError,
};
pub use motion::{
    check_normal_form, default_frame_values, default_radial_angles, detect_events, frame_values,
    radial_angles, slice_horizontal, slice_radial, slice_vertical, CriticalEvent, EventKind, Frame,
    MotionError, MotionPicture, NormalFormReport, SliceFamily,
};
pub use spin::{
    check_rotational_symmetry, euler_characteristic, spin, surface_embedding_violations,
    torus_surface, twist_spin, SpinError, Surface4, SymmetryReport,
};
