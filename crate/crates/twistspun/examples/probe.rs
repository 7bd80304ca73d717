//! Scratch probe: perturbation-magnitude stability and slice invariants.

use twistspun::{
    check_rotational_symmetry, compute_singularity_set, default_twist_ball, detect_events,
    frame_signatures, make_trefoil_arc, project_generic, radial_angles, singularity_summary,
    slice_horizontal, slice_radial, slice_vertical, spin, torus_surface, twist_spin, ExecMode,
    SliceFamily, Vec3,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mode = ExecMode::Parallel;
    let arc = make_trefoil_arc(1.0, 24)?;
    let ball = default_twist_ball(&arc)?;

    // Perturbation magnitude stability.
    for tol in [1e-4f64] {
        for m in [48usize, 96] {
            let surface = twist_spin(&arc, &ball, 2, m)?;
            let mut line = format!("tol={tol:.0e} m={m}:");
            for seed in 1u64..=5 {
                let diagram = project_generic(&surface, 0, tol, seed, mode)?;
                let sing = compute_singularity_set(&diagram, mode)?;
                let s = singularity_summary(&diagram, &sing)?;
                line += &format!(" ({},{})", s.triple_point_count, s.sheet_count);
            }
            println!("{line}");
        }
    }

    // Vertical slice invariants of the spun trefoil.
    let surface = spin(&arc, 48)?;
    let (lo, hi) = surface
        .vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.v), b.max(p.v))
        });
    println!("v range [{lo:.4}, {hi:.4}]");
    let range = hi - lo;
    let values = [
        0.0,
        lo + 0.02 * range,
        lo + 0.04 * range,
        hi - 0.02 * range,
        hi - 0.04 * range,
    ];
    let picture = slice_vertical(&surface, &values, mode)?;
    let sigs = frame_signatures(&picture.frames, Vec3::new(1.0, 0.0, 0.0), 7, mode)?;
    for (f, s) in picture.frames.iter().zip(&sigs) {
        println!(
            "vertical t={:+.4} nudged={}: comps={} colorings={}",
            f.parameter, f.nudged, s.component_count, s.tricoloring_count
        );
    }

    // Horizontal slices vs the arc-crossing oracle.
    let (ylo, yhi) = arc
        .vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.y), b.max(p.y))
        });
    println!("arc y range [{ylo:.4}, {yhi:.4}]");
    let yr = yhi - ylo;
    let hvalues: Vec<f64> = (1..8).map(|k| ylo + yr * k as f64 / 8.0 + 0.0123).collect();
    let hp = slice_horizontal(&surface, &hvalues, mode)?;
    let hsigs = frame_signatures(&hp.frames, Vec3::new(1.0, 0.0, 0.0), 7, mode)?;
    for (f, s) in hp.frames.iter().zip(&hsigs) {
        let k = arc
            .vertices
            .windows(2)
            .filter(|w| (w[0].y - f.parameter) * (w[1].y - f.parameter) < 0.0)
            .count();
        println!(
            "horizontal t={:+.4} nudged={}: oracle k={k} comps={} colorings={}",
            f.parameter, f.nudged, s.component_count, s.tricoloring_count
        );
    }

    // Morse balances with tilt.
    for (name, surf) in [
        ("spun", spin(&arc, 48)?),
        ("twisted", twist_spin(&arc, &ball, 2, 48)?),
        ("torus", torus_surface(24, 12, 1.0, 0.35)),
    ] {
        for family in [SliceFamily::Vertical, SliceFamily::Horizontal] {
            let events = detect_events(&surf, family, 1e-4, 5)?;
            let balance: i64 = events
                .iter()
                .map(|e| match e.kind {
                    twistspun::EventKind::Saddle => -(e.multiplicity as i64),
                    _ => e.multiplicity as i64,
                })
                .sum();
            println!("{name} {family}: balance {balance} ({} events)", events.len());
        }
    }

    // Radial half-turn signature pairs on the symmetric twisted diagram.
    let tsurface = twist_spin(&arc, &ball, 2, 48)?;
    let tdiagram = project_generic(&tsurface, 0, 0.0, 1, mode)?;
    let rp = slice_radial(&tdiagram, None, &radial_angles(32), mode)?;
    let rsigs = frame_signatures(&rp.frames, Vec3::new(1.0, 0.0, 0.0), 7, mode)?;
    let mut pairs_ok = 0;
    for i in 0..16 {
        let (a, b) = (&rsigs[i], &rsigs[i + 16]);
        if twistspun::signatures_equal(a, b) {
            pairs_ok += 1;
        } else {
            println!(
                "radial pair {i}: ({},{}) vs ({},{})",
                a.component_count, a.tricoloring_count, b.component_count, b.tricoloring_count
            );
        }
    }
    println!("radial pairs equal: {pairs_ok}/16");

    // Horizontal frame half-turn deviation on the twisted surface.
    let hvals: Vec<f64> = (0..9).map(|k| ylo + yr * (k as f64 + 0.5) / 9.0).collect();
    let hp2 = slice_horizontal(&tsurface, &hvals, mode)?;
    let mut worst = 0.0f64;
    for frame in &hp2.frames {
        let pts: Vec<Vec3> = frame
            .curves
            .iter()
            .flat_map(|c| {
                let closed = c.len() > 1 && c.first() == c.last();
                c[..c.len() - usize::from(closed)].iter().copied()
            })
            .collect();
        for p in &pts {
            let r = Vec3::new(p.x, -p.y, -p.z);
            let d = pts
                .iter()
                .map(|q| {
                    ((q.x - r.x).powi(2) + (q.y - r.y).powi(2) + (q.z - r.z).powi(2)).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    println!("horizontal frame half-turn worst deviation {worst:.3e}");

    // Surface-level symmetry reports.
    let r2 = check_rotational_symmetry(&tsurface, 2)?;
    let r4 = check_rotational_symmetry(&tsurface, 4)?;
    println!(
        "order 2: exact={} dev={:.3e}; order 4: exact={} dev={:.3e}",
        r2.exact_on_vertices, r2.max_deviation, r4.exact_on_vertices, r4.max_deviation
    );
    Ok(())
}
