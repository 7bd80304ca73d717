//! Command-line front end for the spun/twist-spun 2-knot pipeline.
//!
//! Five subcommands mirror the pipeline stages: `build` revolves an arc
//! into a surface, `project` drops it to a broken-surface diagram,
//! `slice` cuts either artifact into a motion picture with SVG frames,
//! `analyze` derives invariants and verdicts from a picture, and
//! `export` re-renders the figures of a persisted picture.
//!
//! Every command reads and writes the canonical on-disk formats from
//! [`twistspun::io`], so identical invocations produce byte-identical
//! files. All randomness comes from explicit `--seed` flags; the only
//! environment input is the default output directory. Exit status
//! classifies failures: 0 success, 1 invalid input, 2 genericity failure
//! (retry with another seed or tolerance), 3 file I/O.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twistspun::diagram::DEFAULT_BAND_WIDTH;
use twistspun::{
    analyze_picture, audit_surface, break_sheets, compute_singularity_set, default_out_dir,
    default_twist_ball, detect_events, frame_gauss_codes, frame_values, import_arc, import_diagram,
    import_motion_picture, import_surface, make_trefoil_arc, make_unknotted_arc, project_generic,
    radial_angles, save_diagram_files, save_frame_svgs, save_motion_picture, save_report,
    save_surface, slice_horizontal, slice_radial, slice_vertical, spin, twist_spin, validate_arc,
    AnalysisReport, ArcError, ConfigError, DiagramError, ExecMode, IoError, LinkError, MotionError,
    MotionPicture, PipelineConfig, PolylineArc, SingularitySummary, SliceFamily, SpinError,
    SurfaceMeta, Vec3,
};

const EXIT_VALIDATION: u8 = 1;
const EXIT_GENERICITY: u8 = 2;
const EXIT_IO: u8 = 3;

/// Samples used for the named arc presets.
const TREFOIL_SAMPLES: usize = 24;
const UNKNOT_SAMPLES: usize = 12;

#[derive(Parser)]
#[command(
    name = "twistspun",
    version,
    about = "Spun and twist-spun 2-knots: build surfaces, project diagrams, \
             slice motion pictures, analyze invariants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Revolve an arc into a spun or twist-spun surface and audit it.
    Build(BuildArgs),
    /// Project a surface to a broken-surface diagram and extract its
    /// singularities.
    Project(ProjectArgs),
    /// Slice a surface (vertical, horizontal) or a diagram (radial) into
    /// a motion picture with one SVG per frame.
    Slice(SliceArgs),
    /// Derive per-frame invariants, the event balance, the normal-form
    /// report, and the periodicity verdict of a motion picture.
    Analyze(AnalyzeArgs),
    /// Re-render the SVG frames of a persisted motion picture.
    Export(ExportArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Arc preset ("trefoil", "unknot") or path to an arc JSON file.
    #[arg(long, default_value = "trefoil")]
    arc: String,
    /// Twist count; 0 spins without twisting.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Angular samples (revolution rings); a positive multiple of
    /// max(n, 1).
    #[arg(long, default_value_t = 48)]
    m: usize,
    /// Output surface file [default: <out dir>/surface.json].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Surface JSON file produced by `build`.
    surface: PathBuf,
    /// Coordinate the projection drops (0 = x, 1 = y, 2 = u, 3 = v).
    #[arg(long, default_value_t = 0)]
    drop: usize,
    /// Perturbation magnitude for the generic direction; 0 projects
    /// symmetrically.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Seed for the perturbation draws.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Relative width of the gap cut into under-sheets.
    #[arg(long, default_value_t = DEFAULT_BAND_WIDTH)]
    band: f64,
    /// Output stem; writes <stem>.obj, <stem>.json, <stem>-broken.obj
    /// [default: <out dir>/diagram].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SliceArgs {
    /// Surface JSON (vertical, horizontal) or diagram stem (radial).
    source: PathBuf,
    /// Hyperplane family: vertical, horizontal, or radial.
    #[arg(long, value_parser = parse_family)]
    family: SliceFamily,
    /// Frame count (radial: number of half-plane angles).
    #[arg(long, default_value_t = twistspun::motion::DEFAULT_FRAME_COUNT)]
    frames: usize,
    /// Tilt magnitude for critical-event detection; 0 keeps the
    /// symmetry-aligned direction. Ignored for the radial family.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Seed for the tilt draws and the Gauss-code view jitter.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory [default: <out dir>/slices-<family>].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Motion-picture JSON file produced by `slice`.
    picture: PathBuf,
    /// Seed for the view jitter of the per-frame planar projections.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output report file [default: <out dir>/report.json].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Motion-picture JSON file produced by `slice`.
    picture: PathBuf,
    /// Output directory for the SVG frames [default: <out dir>/frames].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<SliceFamily, String> {
    match s {
        "vertical" => Ok(SliceFamily::Vertical),
        "horizontal" => Ok(SliceFamily::Horizontal),
        "radial" => Ok(SliceFamily::Radial),
        other => Err(format!(
            "unknown family '{other}', expected vertical, horizontal, or radial"
        )),
    }
}

/// A failed run, classified by exit status.
enum Failure {
    Validation(String),
    Genericity(String),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<ArcError> for Failure {
    fn from(e: ArcError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<SpinError> for Failure {
    fn from(e: SpinError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<DiagramError> for Failure {
    fn from(e: DiagramError) -> Self {
        match e {
            DiagramError::GenericityFailure { .. } | DiagramError::StitchingFailure(_) => {
                Failure::Genericity(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<MotionError> for Failure {
    fn from(e: MotionError) -> Self {
        match e {
            MotionError::NudgeFailed { .. } | MotionError::SliceDegeneracy(_) => {
                Failure::Genericity(e.to_string())
            }
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<LinkError> for Failure {
    fn from(e: LinkError) -> Self {
        match e {
            LinkError::DegenerateProjection { .. } => Failure::Genericity(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are validation failures; --help and --version
            // land here too and succeed.
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Genericity(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("hint: retry with a different --seed or a larger --tol");
            ExitCode::from(EXIT_GENERICITY)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Project(args) => cmd_project(args),
        Command::Slice(args) => cmd_slice(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Export(args) => cmd_export(args),
    }
}

/// Resolves an `--arc` value: a named preset or a JSON file, which is
/// validated against the proper-embedding contract before use.
fn resolve_arc(spec: &str) -> Result<PolylineArc, Failure> {
    match spec {
        "trefoil" => Ok(make_trefoil_arc(1.0, TREFOIL_SAMPLES)?),
        "unknot" => Ok(make_unknotted_arc(1.0, UNKNOT_SAMPLES)?),
        path => {
            let arc = import_arc(Path::new(path))?;
            let report = validate_arc(&arc, 1e-9);
            if !report.ok {
                return Err(Failure::Validation(format!(
                    "arc file {path} is not properly embedded; first violation: {:?}",
                    report.violations[0]
                )));
            }
            Ok(arc)
        }
    }
}

fn cmd_build(args: BuildArgs) -> Result<(), Failure> {
    let config = PipelineConfig {
        arc: args.arc.clone(),
        twists: args.n,
        angular_samples: args.m,
        ..PipelineConfig::default()
    };
    config.validate()?;

    let arc = resolve_arc(&args.arc)?;
    let surface = if args.n == 0 {
        spin(&arc, args.m)?
    } else {
        let ball = default_twist_ball(&arc)?;
        twist_spin(&arc, &ball, args.n, args.m)?
    };
    // An untwisted spin is symmetric under every ring step; a twisted one
    // only under the full twist-phase period.
    let order = if args.n == 0 { args.m } else { args.n };
    let audit = audit_surface(&surface, order)?;
    println!(
        "surface: {} vertices, {} triangles ({} rings, {} twists)",
        surface.vertices.len(),
        surface.triangles.len(),
        args.m,
        args.n
    );
    println!(
        "audit: Euler characteristic {}, closed {}, consistently oriented {}",
        audit.euler_characteristic, audit.closed, audit.consistently_oriented
    );
    println!(
        "symmetry: order {} exact on vertices {} (max deviation {:.3e})",
        audit.symmetry_order, audit.symmetry_exact_on_vertices, audit.symmetry_deviation
    );

    let meta = SurfaceMeta {
        arc: args.arc,
        twists: args.n,
        rings: args.m,
        audit,
    };
    let out = args
        .out
        .unwrap_or_else(|| default_out_dir().join("surface.json"));
    save_surface(&out, &surface, &meta)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_project(args: ProjectArgs) -> Result<(), Failure> {
    let config = PipelineConfig {
        drop_axis: args.drop,
        perturb: args.tol,
        seed: args.seed,
        band_width: args.band,
        ..PipelineConfig::default()
    };
    config.validate()?;

    let (surface, _meta) = import_surface(&args.surface)?;
    let mode = ExecMode::default();
    let diagram = project_generic(&surface, args.drop, args.tol, args.seed, mode)?;
    // A symmetric projection (--tol 0) is allowed to have a structurally
    // non-generic double-point set; the diagram is still written, just
    // without singularity data. Perturbed projections must be generic.
    let extracted = match compute_singularity_set(&diagram, mode) {
        Ok(s) => Some(s),
        Err(e @ DiagramError::StitchingFailure(_)) if args.tol == 0.0 => {
            eprintln!("warning: symmetric projection has a non-generic singularity set ({e})");
            eprintln!("warning: writing the diagram without singularity data");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let (singularity, broken) = match &extracted {
        Some(singularities) => {
            let broken = break_sheets(&diagram, singularities, args.band)?;
            let summary = SingularitySummary {
                double_curve_count: singularities.curves.len(),
                triple_point_count: singularities.triple_points.len(),
                branch_point_count: singularities.branch_points.len(),
                sheet_count: broken.sheet_count,
            };
            println!(
                "singularities: {} double curves, {} triple points, {} branch points",
                summary.double_curve_count, summary.triple_point_count, summary.branch_point_count
            );
            println!(
                "sheets: {} (cut along {} under-side arcs)",
                summary.sheet_count, broken.under_arcs
            );
            (Some((singularities, summary)), Some(broken))
        }
        None => (None, None),
    };

    let stem = args
        .out
        .unwrap_or_else(|| default_out_dir().join("diagram"));
    let paths = save_diagram_files(
        &stem,
        &diagram,
        singularity.as_ref().map(|(s, sum)| (*s, sum)),
        broken.as_ref(),
    )?;
    println!("wrote {}", paths.obj.display());
    println!("wrote {}", paths.sidecar.display());
    if let Some(b) = paths.broken_obj {
        println!("wrote {}", b.display());
    }
    Ok(())
}

/// Strips a `.json`/`.obj` extension so `slice` and radial sources
/// accept either the stem or one of the diagram's files.
fn diagram_stem(path: &Path) -> PathBuf {
    match path.extension() {
        Some(e) if e == "json" || e == "obj" => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

fn cmd_slice(args: SliceArgs) -> Result<(), Failure> {
    let config = PipelineConfig {
        tilt: args.tol,
        seed: args.seed,
        frame_count: args.frames,
        radial_angle_count: args.frames,
        ..PipelineConfig::default()
    };
    config.validate()?;

    let mode = ExecMode::default();
    let picture = match args.family {
        SliceFamily::Vertical | SliceFamily::Horizontal => {
            let (surface, _meta) = import_surface(&args.source)?;
            // The vertical family sweeps the in-plane rotation coordinate
            // v; the horizontal family sweeps the height y.
            let axis = if args.family == SliceFamily::Vertical {
                3
            } else {
                1
            };
            let (lo, hi) = surface
                .vertices
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p.coord(axis)), hi.max(p.coord(axis)))
                });
            let values = frame_values(lo, hi, args.frames);
            let mut picture = match args.family {
                SliceFamily::Vertical => slice_vertical(&surface, &values, mode)?,
                _ => slice_horizontal(&surface, &values, mode)?,
            };
            if args.tol > 0.0 {
                // Replace the symmetry-aligned (often degenerate) events
                // with those of a generically tilted direction.
                picture.events = detect_events(&surface, args.family, args.tol, args.seed)?;
            }
            picture
        }
        SliceFamily::Radial => {
            let stem = diagram_stem(&args.source);
            let (diagram, _singularities, broken) = import_diagram(&stem)?;
            slice_radial(&diagram, broken.as_ref(), &radial_angles(args.frames), mode)?
        }
    };

    for (i, frame) in picture.frames.iter().enumerate() {
        if frame.nudged {
            eprintln!(
                "warning: frame {i} sat on a critical level; nudged to t = {}",
                frame.parameter
            );
        }
    }

    let gauss = frame_gauss_codes(&picture.frames, Vec3::new(1.0, 0.0, 0.0), args.seed, mode)
        .map_err(|e| match (&e, args.family) {
            // Frames of a perturbed diagram can split their pole loop
            // into arcs that share the axis closure — non-generic from
            // every view. The symmetric projection does not.
            (LinkError::DegenerateProjection { .. }, SliceFamily::Radial) => {
                Failure::Genericity(format!(
                    "{e}; perturbed diagrams can touch the slicing axis non-generically — \
                     re-project symmetrically (project --tol 0) and slice that"
                ))
            }
            _ => Failure::from(e),
        })?;
    let dir = args
        .out
        .unwrap_or_else(|| default_out_dir().join(format!("slices-{}", args.family)));
    let motion_path = dir.join("motion.json");
    save_motion_picture(&motion_path, &picture, &gauss, args.seed)?;
    let svgs = save_frame_svgs(&dir, &picture)?;
    println!(
        "sliced {} frames ({} critical events) from {}",
        picture.frames.len(),
        picture.events.len(),
        picture.source
    );
    println!("wrote {}", motion_path.display());
    println!("wrote {} SVG frames to {}", svgs.len(), dir.display());
    Ok(())
}

fn print_report(report: &AnalysisReport, picture: &MotionPicture) {
    println!("source: {}", report.source);
    println!("family: {}, {} frames", report.family, report.frame_count);
    println!("frame signatures:");
    for (frame, sig) in picture.frames.iter().zip(&report.frame_signatures) {
        println!(
            "  t = {:>12.6}  components {:>2}  crossings {:>3}  tricolorings {:>6}  total linking {:>3}",
            frame.parameter,
            sig.component_count,
            sig.crossing_count_reduced,
            sig.tricoloring_count,
            sig.total_linking
        );
    }
    println!(
        "events: {} minima, {} maxima, {} saddles; balance {}",
        report.events.minima, report.events.maxima, report.events.saddles, report.morse_balance
    );
    let nf = &report.normal_form;
    println!(
        "normal form: {} (minima at -2: {}, maxima at +2: {}, saddles at \u{00b1}1: {}, middle frame connected: {})",
        if nf.ok { "satisfied" } else { "not satisfied" },
        nf.minima_at_minus_two,
        nf.maxima_at_plus_two,
        nf.saddles_at_unit_levels,
        nf.middle_frame_connected
    );
    println!("periodicity: {}", report.periodicity.verdict);
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let (picture, _gauss, _view_seed) = import_motion_picture(&args.picture)?;
    let report = analyze_picture(&picture, args.seed, ExecMode::default())?;
    print_report(&report, &picture);
    let out = args
        .out
        .unwrap_or_else(|| default_out_dir().join("report.json"));
    save_report(&out, &report)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<(), Failure> {
    let (picture, _gauss, _view_seed) = import_motion_picture(&args.picture)?;
    let dir = args.out.unwrap_or_else(|| default_out_dir().join("frames"));
    let svgs = save_frame_svgs(&dir, &picture)?;
    println!("wrote {} SVG frames to {}", svgs.len(), dir.display());
    Ok(())
}
