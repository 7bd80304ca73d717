//! End-to-end drive of the library pipeline: build a trefoil arc, spin and
//! twist-spin it, project both surfaces to broken diagrams, slice the
//! twisted surface into a motion picture, and compute link invariants of
//! one frame. Prints the summary counts at every stage; exits nonzero on
//! the first pipeline error.

use twistspun::{
    break_sheets, compute_singularity_set, default_frame_values, default_radial_angles,
    default_twist_ball, euler_characteristic, make_trefoil_arc, planar_project_frame,
    project_generic, signature, slice_radial, slice_vertical, spin, twist_spin, ExecMode, Vec3,
};

const BAND_WIDTH: f64 = twistspun::diagram::DEFAULT_BAND_WIDTH;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mode = ExecMode::default();
    let arc = make_trefoil_arc(1.0, 24)?;
    println!("arc: {} vertices", arc.vertices.len());

    // Plain spin: the projection is already generic, so no perturbation.
    let spun = spin(&arc, 48)?;
    println!(
        "spun surface: {} vertices, chi = {}",
        spun.vertices.len(),
        euler_characteristic(&spun)?
    );
    let diagram = project_generic(&spun, 0, 0.0, 0, mode)?;
    let sing = compute_singularity_set(&diagram, mode)?;
    let broken = break_sheets(&diagram, &sing, BAND_WIDTH)?;
    println!(
        "spun diagram: {} double curves, {} triple points, {} branch points, {} sheets",
        sing.curves.len(),
        sing.triple_points.len(),
        sing.branch_points.len(),
        broken.sheet_count,
    );

    // Two twists: the symmetric projection is non-generic, so perturb.
    let ball = default_twist_ball(&arc)?;
    let twisted = twist_spin(&arc, &ball, 2, 48)?;
    println!(
        "twisted surface: {} vertices, chi = {}",
        twisted.vertices.len(),
        euler_characteristic(&twisted)?
    );
    let tw_diagram = project_generic(&twisted, 0, 1e-3, 1, mode)?;
    let tw_sing = compute_singularity_set(&tw_diagram, mode)?;
    let tw_broken = break_sheets(&tw_diagram, &tw_sing, BAND_WIDTH)?;
    println!(
        "twisted diagram: {} double curves, {} triple points, {} branch points, {} sheets",
        tw_sing.curves.len(),
        tw_sing.triple_points.len(),
        tw_sing.branch_points.len(),
        tw_broken.sheet_count,
    );

    // Motion picture along vertical hyperplanes, plus invariants of the
    // frame nearest the middle of the parameter range.
    let (lo, hi) = twisted
        .vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v.coord(3)), hi.max(v.coord(3)))
        });
    let picture = slice_vertical(&twisted, &default_frame_values(lo, hi), mode)?;
    println!(
        "vertical slices: {} frames, {} critical events",
        picture.frames.len(),
        picture.events.len(),
    );
    let middle = &picture.frames[picture.frames.len() / 2];
    let link = planar_project_frame(middle, Vec3::new(1.0, 0.0, 0.0), 7)?;
    let sig = signature(&link);
    println!(
        "middle frame at t = {:.4}: {} components, {} crossings reduced, {} colorings, total linking {}",
        middle.parameter,
        sig.component_count,
        sig.crossing_count_reduced,
        sig.tricoloring_count,
        sig.total_linking,
    );

    // Radial slices come from the unperturbed diagram so the half-planes
    // hit the rotation axis exactly.
    let symmetric = project_generic(&twisted, 0, 0.0, 0, mode)?;
    let radial = slice_radial(&symmetric, None, &default_radial_angles(), mode)?;
    println!("radial slices: {} frames", radial.frames.len());

    Ok(())
}
