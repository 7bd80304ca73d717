//! Classical link diagrams extracted from motion-picture frames, and the
//! isotopy-invariant signatures computed from them.
//!
//! A regular frame (disjoint closed curves in 3-space) becomes a planar
//! link diagram by orthographic projection: crossings are found by a
//! sweep over the projected segments, and each crossing records which
//! strand passes over (larger depth toward the viewer wins). Diagrams
//! are stored as oriented Gauss codes — per component, the cyclic
//! sequence of over/under passes — from which the module derives the
//! over-arc segmentation, Fox 3-coloring counts over the 3-element
//! field, linking matrices, and greedy Reidemeister reductions.
//!
//! Conventions, fixed throughout:
//! - The viewer sits on the positive side of the view direction, so the
//!   strand with the **larger** depth (`point · view`) passes over.
//! - The projection basis `(e1, e2, view)` is right-handed; a crossing
//!   is positive when the over-strand direction crosses the under-strand
//!   direction counterclockwise (positive planar cross product).
//! - Arc bookkeeping: every under-pass ends one arc and starts the
//!   next, so `arcs = crossings + (components without under-passes)`.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::ExecMode;
use crate::geom::{Vec2, Vec3, EPS_INTERSECT};
use crate::motion::Frame;

/// Magnitude of one step of seeded view rotation used to escape a
/// degenerate projection (tangency, triple incidence, depth tie).
const VIEW_JITTER: f64 = 1e-5;

/// Bounded retries of view jitter before giving up on a frame.
const MAX_VIEW_RETRIES: usize = 12;

/// Largest kernel dimension for which `3^dim` is returned exactly.
const MAX_COLOR_EXPONENT: u32 = 40;

/// Failures of diagram extraction or manipulation.
#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    /// The view direction had (near) zero length.
    #[error("view direction has zero length")]
    BadView,
    /// A frame curve does not repeat its first point.
    #[error("frame curve {0} is not closed")]
    OpenCurve(usize),
    /// The projection stayed degenerate through every jitter retry.
    #[error("projection still degenerate after {retries} view rotations: {reason}")]
    DegenerateProjection { retries: usize, reason: String },
    /// A pass list did not encode a valid diagram.
    #[error("malformed Gauss code: {0}")]
    MalformedCode(String),
    /// A Reidemeister move was applied where its pattern does not hold.
    #[error("move does not apply: {0}")]
    BadMove(String),
}

/// One visit of a strand to a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pass {
    /// Crossing id, unique within the diagram.
    pub crossing: usize,
    /// True when the strand passes over at this crossing.
    pub over: bool,
    /// Crossing sign, `+1` or `-1`; both passes of a crossing agree.
    pub sign: i8,
}

/// A crossing record: which components meet, with what sign, and which
/// arcs participate (indices into [`LinkDiagram::arcs`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub over_component: usize,
    pub under_component: usize,
    pub sign: i8,
    /// Arc carrying the over-strand through the crossing.
    pub over_arc: usize,
    /// Arc arriving at the under-pass.
    pub under_arc_in: usize,
    /// Arc leaving the under-pass.
    pub under_arc_out: usize,
}

/// One over-arc of the segmentation: a maximal strand piece bounded by
/// under-passes (a component without under-passes is a single arc).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcSpan {
    pub component: usize,
    /// Pass position (within the component) of the under-pass at which
    /// the arc begins; 0 for the single arc of an under-free component.
    pub start_pass: usize,
}

/// An oriented link diagram in Gauss-code form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDiagram {
    /// Per component, the cyclic sequence of crossing passes. Crossing
    /// ids are canonical: numbered by first encounter walking the
    /// components in order.
    pub passes: Vec<Vec<Pass>>,
    /// One record per crossing, indexed by crossing id.
    pub crossings: Vec<Crossing>,
    /// Number of link components.
    pub components: usize,
    /// Textual Gauss code per component, e.g. `"O1+ U2+ O3+ U1+ O2+ U3+"`.
    pub gauss_code: Vec<String>,
    /// Over-arc segmentation; arc ids index this list.
    pub arcs: Vec<ArcSpan>,
    /// View direction that produced the diagram (after any jitter);
    /// synthetic diagrams carry the default `(1, 0, 0)`.
    pub view_direction: Vec3,
    /// How many seeded view rotations were needed to escape degeneracy.
    pub jitter_retries: usize,
}

/// Invariants bundled for comparing frames; see [`signatures_equal`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantSignature {
    pub component_count: usize,
    /// Crossings left after greedy kink/bigon removal. Reported for
    /// inspection only: greedy simplification is not canonical, so this
    /// field does not participate in [`signatures_equal`].
    pub crossing_count_reduced: usize,
    /// Number of Fox 3-colorings; always a power of 3 and at least 3.
    pub tricoloring_count: u64,
    /// Pairwise linking numbers, symmetric with zero diagonal.
    pub linking_matrix: Vec<Vec<i64>>,
    /// Sum of the linking numbers over unordered component pairs.
    pub total_linking: i64,
}

impl LinkDiagram {
    /// Builds a diagram from per-component pass lists, renumbering
    /// crossings canonically (by first encounter) and deriving crossing
    /// records, arcs, and Gauss strings.
    pub fn from_passes(
        passes: Vec<Vec<Pass>>,
        view_direction: Vec3,
        jitter_retries: usize,
    ) -> Result<Self, LinkError> {
        // Canonical crossing numbering by first encounter.
        let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
        for comp in &passes {
            for p in comp {
                let next = renumber.len();
                renumber.entry(p.crossing).or_insert(next);
            }
        }
        let passes: Vec<Vec<Pass>> = passes
            .into_iter()
            .map(|comp| {
                comp.into_iter()
                    .map(|p| Pass {
                        crossing: renumber[&p.crossing],
                        ..p
                    })
                    .collect()
            })
            .collect();
        let crossing_count = renumber.len();

        // Validate: each crossing passed exactly once over, once under,
        // with one sign.
        let mut over_seen: Vec<Option<(usize, usize)>> = vec![None; crossing_count];
        let mut under_seen: Vec<Option<(usize, usize)>> = vec![None; crossing_count];
        let mut signs: Vec<Option<i8>> = vec![None; crossing_count];
        for (ci, comp) in passes.iter().enumerate() {
            for (pi, p) in comp.iter().enumerate() {
                if p.sign != 1 && p.sign != -1 {
                    return Err(LinkError::MalformedCode(format!(
                        "crossing {} has sign {}",
                        p.crossing, p.sign
                    )));
                }
                match signs[p.crossing] {
                    None => signs[p.crossing] = Some(p.sign),
                    Some(s) if s != p.sign => {
                        return Err(LinkError::MalformedCode(format!(
                            "crossing {} passed with both signs",
                            p.crossing
                        )));
                    }
                    _ => {}
                }
                let slot = if p.over {
                    &mut over_seen
                } else {
                    &mut under_seen
                };
                if slot[p.crossing].replace((ci, pi)).is_some() {
                    return Err(LinkError::MalformedCode(format!(
                        "crossing {} passed {} twice",
                        p.crossing,
                        if p.over { "over" } else { "under" }
                    )));
                }
            }
        }
        for c in 0..crossing_count {
            if over_seen[c].is_none() || under_seen[c].is_none() {
                return Err(LinkError::MalformedCode(format!(
                    "crossing {c} lacks an over or under pass"
                )));
            }
        }

        // Over-arc segmentation: arcs start at under-passes.
        let mut arcs: Vec<ArcSpan> = Vec::new();
        let mut arc_of_position: Vec<Vec<usize>> = Vec::new();
        for (ci, comp) in passes.iter().enumerate() {
            let unders: Vec<usize> = (0..comp.len()).filter(|&p| !comp[p].over).collect();
            let base = arcs.len();
            let mut positions = vec![usize::MAX; comp.len()];
            if unders.is_empty() {
                arcs.push(ArcSpan {
                    component: ci,
                    start_pass: 0,
                });
                positions.fill(base);
            } else {
                for &u in &unders {
                    arcs.push(ArcSpan {
                        component: ci,
                        start_pass: u,
                    });
                }
                // Positions strictly after unders[j] and up to the next
                // under-pass belong to arc j (cyclically).
                for (p, slot) in positions.iter_mut().enumerate() {
                    let j = match unders.binary_search(&p) {
                        Ok(j) => j,                 // the under-pass starting arc j
                        Err(0) => unders.len() - 1, // before the first: wraps
                        Err(j) => j - 1,
                    };
                    *slot = base + j;
                }
            }
            arc_of_position.push(positions);
        }

        // Crossing records.
        let mut crossings = Vec::with_capacity(crossing_count);
        for c in 0..crossing_count {
            let (oc, op) = over_seen[c].unwrap();
            let (uc, up) = under_seen[c].unwrap();
            let unders: Vec<usize> = (0..passes[uc].len())
                .filter(|&p| !passes[uc][p].over)
                .collect();
            let j = unders.binary_search(&up).expect("under pass position");
            let base = arc_of_position[uc][up] - j; // first arc id of uc
            let prev = (j + unders.len() - 1) % unders.len();
            crossings.push(Crossing {
                over_component: oc,
                under_component: uc,
                sign: signs[c].unwrap(),
                over_arc: arc_of_position[oc][op],
                under_arc_in: base + prev,
                under_arc_out: base + j,
            });
        }

        let under_free = passes
            .iter()
            .filter(|comp| comp.iter().all(|p| p.over))
            .count();
        debug_assert_eq!(arcs.len(), crossing_count + under_free);

        let gauss_code = passes
            .iter()
            .map(|comp| {
                comp.iter()
                    .map(|p| {
                        format!(
                            "{}{}{}",
                            if p.over { 'O' } else { 'U' },
                            p.crossing + 1,
                            if p.sign > 0 { '+' } else { '-' }
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();

        Ok(LinkDiagram {
            components: passes.len(),
            passes,
            crossings,
            gauss_code,
            arcs,
            view_direction,
            jitter_retries,
        })
    }

    /// Builds a synthetic diagram (reference knots, move tests) with the
    /// default view metadata.
    pub fn from_code(passes: Vec<Vec<Pass>>) -> Result<Self, LinkError> {
        Self::from_passes(passes, Vec3::new(1.0, 0.0, 0.0), 0)
    }

    fn rebuilt(&self, passes: Vec<Vec<Pass>>) -> Result<Self, LinkError> {
        Self::from_passes(passes, self.view_direction, self.jitter_retries)
    }

    /// Largest crossing id plus one (for allocating move crossings).
    fn next_crossing_id(&self) -> usize {
        self.crossings.len()
    }

    // --- Reidemeister moves ------------------------------------------

    /// Adds a kink on `component` before pass `position` (0 ..= len).
    /// `over_first` picks the chirality of the pass order.
    pub fn r1_add(
        &self,
        component: usize,
        position: usize,
        sign: i8,
        over_first: bool,
    ) -> Result<Self, LinkError> {
        let mut passes = self.passes.clone();
        let comp = passes
            .get_mut(component)
            .ok_or_else(|| LinkError::BadMove(format!("no component {component}")))?;
        if position > comp.len() {
            return Err(LinkError::BadMove(format!(
                "position {position} beyond component of {} passes",
                comp.len()
            )));
        }
        let c = self.next_crossing_id();
        let pair = if over_first {
            [
                Pass {
                    crossing: c,
                    over: true,
                    sign,
                },
                Pass {
                    crossing: c,
                    over: false,
                    sign,
                },
            ]
        } else {
            [
                Pass {
                    crossing: c,
                    over: false,
                    sign,
                },
                Pass {
                    crossing: c,
                    over: true,
                    sign,
                },
            ]
        };
        comp.splice(position..position, pair);
        self.rebuilt(passes)
    }

    /// Crossings removable by a Reidemeister I move: both passes sit
    /// cyclically adjacent on one component.
    pub fn r1_sites(&self) -> Vec<usize> {
        let mut sites = Vec::new();
        for comp in &self.passes {
            let n = comp.len();
            if n < 2 {
                continue;
            }
            for p in 0..n {
                let q = (p + 1) % n;
                if comp[p].crossing == comp[q].crossing {
                    sites.push(comp[p].crossing);
                }
            }
        }
        sites.sort_unstable();
        sites.dedup();
        sites
    }

    /// Removes the kink at `crossing` (its passes must be adjacent).
    pub fn r1_remove(&self, crossing: usize) -> Result<Self, LinkError> {
        if !self.r1_sites().contains(&crossing) {
            return Err(LinkError::BadMove(format!(
                "crossing {crossing} is not a kink"
            )));
        }
        let passes = self
            .passes
            .iter()
            .map(|comp| {
                comp.iter()
                    .copied()
                    .filter(|p| p.crossing != crossing)
                    .collect()
            })
            .collect();
        self.rebuilt(passes)
    }

    /// Pokes the strand at `over` across the strand at `under`: inserts
    /// two over-passes before `over.1` on component `over.0`, and the
    /// matching under-passes before `under.1` on component `under.0`.
    /// The two new crossings carry opposite signs (`sign` and `-sign`),
    /// so linking numbers are unchanged.
    pub fn r2_add(
        &self,
        over: (usize, usize),
        under: (usize, usize),
        sign: i8,
    ) -> Result<Self, LinkError> {
        let mut passes = self.passes.clone();
        for &(comp, pos) in [&over, &under] {
            let len = passes
                .get(comp)
                .ok_or_else(|| LinkError::BadMove(format!("no component {comp}")))?
                .len();
            if pos > len {
                return Err(LinkError::BadMove(format!(
                    "position {pos} beyond component of {len} passes"
                )));
            }
        }
        let c = self.next_crossing_id();
        let d = c + 1;
        let over_pair = [
            Pass {
                crossing: c,
                over: true,
                sign,
            },
            Pass {
                crossing: d,
                over: true,
                sign: -sign,
            },
        ];
        let under_pair = [
            Pass {
                crossing: c,
                over: false,
                sign,
            },
            Pass {
                crossing: d,
                over: false,
                sign: -sign,
            },
        ];
        // Insert at the higher position first so the lower index stays valid.
        if over.0 == under.0 {
            let comp = &mut passes[over.0];
            if over.1 >= under.1 {
                comp.splice(over.1..over.1, over_pair);
                comp.splice(under.1..under.1, under_pair);
            } else {
                comp.splice(under.1..under.1, under_pair);
                comp.splice(over.1..over.1, over_pair);
            }
        } else {
            passes[over.0].splice(over.1..over.1, over_pair);
            passes[under.0].splice(under.1..under.1, under_pair);
        }
        self.rebuilt(passes)
    }

    /// Crossing pairs removable by a Reidemeister II move: adjacent
    /// over-passes of `c, d` on one strand, adjacent under-passes on
    /// another, with opposite signs.
    pub fn r2_sites(&self) -> Vec<(usize, usize)> {
        let mut over_pairs = Vec::new();
        let mut under_pairs = Vec::new();
        for comp in &self.passes {
            let n = comp.len();
            if n < 2 {
                continue;
            }
            for p in 0..n {
                let (a, b) = (comp[p], comp[(p + 1) % n]);
                if a.crossing == b.crossing {
                    continue;
                }
                let key = (a.crossing.min(b.crossing), a.crossing.max(b.crossing));
                if a.over && b.over {
                    over_pairs.push(key);
                } else if !a.over && !b.over {
                    under_pairs.push(key);
                }
            }
        }
        let mut sites: Vec<(usize, usize)> = over_pairs
            .into_iter()
            .filter(|key| under_pairs.contains(key))
            .filter(|&(c, d)| self.crossings[c].sign == -self.crossings[d].sign)
            .collect();
        sites.sort_unstable();
        sites.dedup();
        sites
    }

    /// Undoes the bigon formed by crossings `c` and `d`.
    pub fn r2_remove(&self, c: usize, d: usize) -> Result<Self, LinkError> {
        let key = (c.min(d), c.max(d));
        if !self.r2_sites().contains(&key) {
            return Err(LinkError::BadMove(format!(
                "crossings {c} and {d} do not bound a bigon"
            )));
        }
        let passes = self
            .passes
            .iter()
            .map(|comp| {
                comp.iter()
                    .copied()
                    .filter(|p| p.crossing != c && p.crossing != d)
                    .collect()
            })
            .collect();
        self.rebuilt(passes)
    }

    /// Triangle sites for a Reidemeister III move. Each site names the
    /// three adjacent pass pairs (component, first position) to swap:
    /// the top strand passes over twice, the bottom under twice, the
    /// middle one of each.
    pub fn r3_sites(&self) -> Vec<R3Site> {
        // All cyclically adjacent pass pairs.
        struct Adj {
            comp: usize,
            pos: usize,
            a: Pass,
            b: Pass,
        }
        let mut adj = Vec::new();
        for (ci, comp) in self.passes.iter().enumerate() {
            let n = comp.len();
            if n < 2 {
                continue;
            }
            for p in 0..n {
                adj.push(Adj {
                    comp: ci,
                    pos: p,
                    a: comp[p],
                    b: comp[(p + 1) % n],
                });
            }
        }
        let mut sites = Vec::new();
        for top in &adj {
            if !(top.a.over && top.b.over) || top.a.crossing == top.b.crossing {
                continue;
            }
            // Try both assignments of the top's crossings to the middle
            // and bottom strands.
            for (tm, tb) in [
                (top.a.crossing, top.b.crossing),
                (top.b.crossing, top.a.crossing),
            ] {
                for middle in &adj {
                    // Middle strand: under at tm, over at the third crossing.
                    let mb = if !middle.a.over && middle.a.crossing == tm && middle.b.over {
                        middle.b.crossing
                    } else if !middle.b.over && middle.b.crossing == tm && middle.a.over {
                        middle.a.crossing
                    } else {
                        continue;
                    };
                    if mb == tm || mb == tb {
                        continue;
                    }
                    for bottom in &adj {
                        // Bottom strand: under at both tb and mb.
                        let hit = !bottom.a.over
                            && !bottom.b.over
                            && ((bottom.a.crossing == tb && bottom.b.crossing == mb)
                                || (bottom.a.crossing == mb && bottom.b.crossing == tb));
                        if hit {
                            sites.push(R3Site {
                                pairs: [
                                    (top.comp, top.pos),
                                    (middle.comp, middle.pos),
                                    (bottom.comp, bottom.pos),
                                ],
                            });
                        }
                    }
                }
            }
        }
        sites.sort_unstable_by_key(|s| s.pairs);
        sites.dedup_by_key(|s| {
            let mut k = s.pairs;
            k.sort_unstable();
            k
        });
        sites
    }

    /// Slides the top strand across the crossing of the other two:
    /// swaps the two passes of each adjacent pair named by `site`.
    pub fn r3(&self, site: &R3Site) -> Result<Self, LinkError> {
        if !self.r3_sites().iter().any(|s| {
            let (mut a, mut b) = (s.pairs, site.pairs);
            a.sort_unstable();
            b.sort_unstable();
            a == b
        }) {
            return Err(LinkError::BadMove("not a triangle site".into()));
        }
        let mut passes = self.passes.clone();
        for &(comp, pos) in &site.pairs {
            let n = passes[comp].len();
            passes[comp].swap(pos, (pos + 1) % n);
        }
        self.rebuilt(passes)
    }

    /// Greedy simplification: removes kinks and bigons until none apply.
    /// Best-effort — the result is not a canonical minimal diagram.
    pub fn reduced(&self) -> Self {
        let mut d = self.clone();
        loop {
            if let Some(&c) = d.r1_sites().first() {
                d = d.r1_remove(c).expect("listed kink removes");
            } else if let Some(&(c, e)) = d.r2_sites().first() {
                d = d.r2_remove(c, e).expect("listed bigon removes");
            } else {
                return d;
            }
        }
    }

    /// Applies `moves` random Reidemeister moves (insertions, removals,
    /// and triangle slides, as available), seeded for reproducibility.
    /// Every invariant field of the signature is preserved.
    pub fn shuffled(&self, moves: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = self.clone();
        for _ in 0..moves {
            let r1 = d.r1_sites();
            let r2 = d.r2_sites();
            let r3 = d.r3_sites();
            // Menu: 0 = add kink, 1 = poke, 2 = remove kink, 3 = remove
            // bigon, 4 = triangle slide.
            let mut menu = vec![0, 1];
            if !r1.is_empty() {
                menu.push(2);
            }
            if !r2.is_empty() {
                menu.push(3);
            }
            if !r3.is_empty() {
                menu.push(4);
            }
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            d = match menu[rng.gen_range(0..menu.len())] {
                0 => {
                    let comp = rng.gen_range(0..d.components);
                    let pos = rng.gen_range(0..=d.passes[comp].len());
                    d.r1_add(comp, pos, sign, rng.gen_bool(0.5))
                }
                1 => {
                    let oc = rng.gen_range(0..d.components);
                    let uc = rng.gen_range(0..d.components);
                    let op = rng.gen_range(0..=d.passes[oc].len());
                    let up = rng.gen_range(0..=d.passes[uc].len());
                    d.r2_add((oc, op), (uc, up), sign)
                }
                2 => d.r1_remove(r1[rng.gen_range(0..r1.len())]),
                3 => {
                    let (c, e) = r2[rng.gen_range(0..r2.len())];
                    d.r2_remove(c, e)
                }
                _ => d.r3(&r3[rng.gen_range(0..r3.len())]),
            }
            .expect("moves from listed sites apply");
        }
        d
    }
}

/// A Reidemeister III site: three adjacent pass pairs, each given as
/// (component, position of the pair's first pass).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct R3Site {
    pub pairs: [(usize, usize); 3],
}

// --- Frame projection ---------------------------------------------------

#[derive(Clone, Copy)]
struct Seg {
    curve: usize,
    index: usize,
    a: Vec2,
    b: Vec2,
    depth_a: f64,
    depth_b: f64,
}

/// A detected crossing between two projected segments, before pass
/// assembly: parameters locate the crossing on each segment.
struct Hit {
    over: (usize, usize, f64),
    under: (usize, usize, f64),
    sign: i8,
}

enum SweepOutcome {
    Crossings(Vec<Hit>),
    Degenerate(String),
}

fn orthonormal_basis(view: Vec3) -> Result<(Vec3, Vec3, Vec3), LinkError> {
    let v = view.normalized(1e-12).ok_or(LinkError::BadView)?;
    let helper = if v.x.abs() <= v.y.abs() && v.x.abs() <= v.z.abs() {
        Vec3::new(1.0, 0.0, 0.0)
    } else if v.y.abs() <= v.z.abs() {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let e1 = helper
        .cross(v)
        .normalized(1e-12)
        .ok_or(LinkError::BadView)?;
    let e2 = v.cross(e1);
    Ok((e1, e2, v))
}

/// Collects the crossings of the projected frame, or reports the first
/// degeneracy met (tangency, overlap, triple incidence, depth tie).
fn sweep_crossings(segs: &[Seg], scale: f64) -> SweepOutcome {
    let eps = EPS_INTERSECT;
    let eps_abs = eps * scale;
    let mut order: Vec<usize> = (0..segs.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (segs[i].a.x.min(segs[i].b.x), segs[j].a.x.min(segs[j].b.x));
        a.total_cmp(&b)
    });

    let adjacent = |s: &Seg, t: &Seg, curve_len: usize| {
        s.curve == t.curve
            && (s.index.abs_diff(t.index) == 1 || s.index.abs_diff(t.index) == curve_len - 1)
    };

    let mut hits: Vec<Hit> = Vec::new();
    let mut active: Vec<usize> = Vec::new();
    let mut curve_segments: BTreeMap<usize, usize> = BTreeMap::new();
    for s in segs {
        *curve_segments.entry(s.curve).or_insert(0) += 1;
    }

    for &si in &order {
        let s = &segs[si];
        let min_x = s.a.x.min(s.b.x);
        active.retain(|&ti| segs[ti].a.x.max(segs[ti].b.x) >= min_x - eps_abs);
        for &ti in &active {
            let t = &segs[ti];
            if adjacent(s, t, curve_segments[&s.curve]) {
                continue;
            }
            let d1 = s.b - s.a;
            let d2 = t.b - t.a;
            let denom = d1.cross(d2);
            let rel = t.a - s.a;
            if denom.abs() <= eps * d1.norm() * d2.norm() {
                // Parallel: degenerate only when the lines overlap.
                let off = rel.cross(d1).abs();
                if off <= eps_abs * d1.norm().max(1.0) {
                    let (lo1, hi1) = (s.a.x.min(s.b.x), s.a.x.max(s.b.x));
                    let (lo2, hi2) = (t.a.x.min(t.b.x), t.a.x.max(t.b.x));
                    let (lo1y, hi1y) = (s.a.y.min(s.b.y), s.a.y.max(s.b.y));
                    let (lo2y, hi2y) = (t.a.y.min(t.b.y), t.a.y.max(t.b.y));
                    if hi1.min(hi2) - lo1.max(lo2) > eps_abs
                        || hi1y.min(hi2y) - lo1y.max(lo2y) > eps_abs
                    {
                        return SweepOutcome::Degenerate("collinear overlapping segments".into());
                    }
                }
                continue;
            }
            let u = rel.cross(d2) / denom;
            let w = rel.cross(d1) / denom;
            let inside = |x: f64| x > eps && x < 1.0 - eps;
            let near_boundary = |x: f64| x >= -eps && x <= 1.0 + eps && !inside(x);
            if inside(u) && inside(w) {
                let depth_s = s.depth_a + (s.depth_b - s.depth_a) * u;
                let depth_t = t.depth_a + (t.depth_b - t.depth_a) * w;
                if (depth_s - depth_t).abs() <= eps_abs {
                    return SweepOutcome::Degenerate("depth tie at a crossing".into());
                }
                let (over, under, sign_dirs) = if depth_s > depth_t {
                    ((s.curve, s.index, u), (t.curve, t.index, w), d1.cross(d2))
                } else {
                    ((t.curve, t.index, w), (s.curve, s.index, u), d2.cross(d1))
                };
                hits.push(Hit {
                    over,
                    under,
                    sign: if sign_dirs > 0.0 { 1 } else { -1 },
                });
            } else if (near_boundary(u) && w >= -eps && w <= 1.0 + eps)
                || (near_boundary(w) && u >= -eps && u <= 1.0 + eps)
            {
                return SweepOutcome::Degenerate("crossing at a segment endpoint".into());
            }
        }
        active.push(si);
    }

    // Triple incidences: two crossings nearly coincident on one segment.
    let mut on_segment: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for h in &hits {
        on_segment
            .entry((h.over.0, h.over.1))
            .or_default()
            .push(h.over.2);
        on_segment
            .entry((h.under.0, h.under.1))
            .or_default()
            .push(h.under.2);
    }
    for params in on_segment.values_mut() {
        params.sort_by(f64::total_cmp);
        if params.windows(2).any(|w| w[1] - w[0] <= eps) {
            return SweepOutcome::Degenerate("triple incidence on a segment".into());
        }
    }
    SweepOutcome::Crossings(hits)
}

/// Projects a frame orthographically along `view_direction` and reads
/// off the link diagram.
///
/// Crossings are found by an x-sweep over the projected segments; the
/// strand with larger depth (`point · view`) passes over. Degenerate
/// incidences — tangencies, collinear overlaps, endpoint hits, triple
/// points, depth ties — are escaped by seeded infinitesimal rotations
/// of the view, recorded in the result's `jitter_retries` and final
/// `view_direction`. Fails with [`LinkError::DegenerateProjection`]
/// when the degeneracy survives every retry.
pub fn planar_project_frame(
    frame: &Frame,
    view_direction: Vec3,
    seed: u64,
) -> Result<LinkDiagram, LinkError> {
    for (ci, curve) in frame.curves.iter().enumerate() {
        if curve.len() < 2 || curve.first() != curve.last() {
            return Err(LinkError::OpenCurve(ci));
        }
    }
    let (base1, base2, base_view) = orthonormal_basis(view_direction)?;

    let mut last_reason = String::from("no attempt");
    for attempt in 0..=MAX_VIEW_RETRIES {
        let view = if attempt == 0 {
            base_view
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
            let tilt = VIEW_JITTER * attempt as f64;
            let jittered = base_view
                + base1 * (tilt * rng.gen_range(-1.0..1.0))
                + base2 * (tilt * rng.gen_range(-1.0..1.0));
            jittered.normalized(1e-12).ok_or(LinkError::BadView)?
        };
        let (e1, e2, v) = orthonormal_basis(view)?;

        let mut segs: Vec<Seg> = Vec::new();
        let mut lo = Vec2 {
            x: f64::INFINITY,
            y: f64::INFINITY,
        };
        let mut hi = Vec2 {
            x: f64::NEG_INFINITY,
            y: f64::NEG_INFINITY,
        };
        let mut depth_span = (f64::INFINITY, f64::NEG_INFINITY);
        for (ci, curve) in frame.curves.iter().enumerate() {
            let flat: Vec<(Vec2, f64)> = curve
                .iter()
                .map(|&p| {
                    (
                        Vec2 {
                            x: p.dot(e1),
                            y: p.dot(e2),
                        },
                        p.dot(v),
                    )
                })
                .collect();
            for (q, d) in &flat {
                lo = lo.min(*q);
                hi = hi.max(*q);
                depth_span = (depth_span.0.min(*d), depth_span.1.max(*d));
            }
            for k in 0..flat.len() - 1 {
                segs.push(Seg {
                    curve: ci,
                    index: k,
                    a: flat[k].0,
                    b: flat[k + 1].0,
                    depth_a: flat[k].1,
                    depth_b: flat[k + 1].1,
                });
            }
        }
        let scale = ((hi - lo).norm().max(depth_span.1 - depth_span.0)).max(1e-12);

        match sweep_crossings(&segs, scale) {
            SweepOutcome::Degenerate(reason) => last_reason = reason,
            SweepOutcome::Crossings(hits) => {
                // Assemble passes: sort each curve's passes along it by
                // (segment index, parameter, crossing id, over flag, sign).
                type RawPass = (usize, f64, usize, bool, i8);
                let mut per_curve: Vec<Vec<RawPass>> = vec![Vec::new(); frame.curves.len()];
                for (id, h) in hits.iter().enumerate() {
                    per_curve[h.over.0].push((h.over.1, h.over.2, id, true, h.sign));
                    per_curve[h.under.0].push((h.under.1, h.under.2, id, false, h.sign));
                }
                let passes: Vec<Vec<Pass>> = per_curve
                    .into_iter()
                    .map(|mut list| {
                        list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
                        list.into_iter()
                            .map(|(_, _, id, over, sign)| Pass {
                                crossing: id,
                                over,
                                sign,
                            })
                            .collect()
                    })
                    .collect();
                return LinkDiagram::from_passes(passes, view, attempt);
            }
        }
    }
    Err(LinkError::DegenerateProjection {
        retries: MAX_VIEW_RETRIES,
        reason: last_reason,
    })
}

/// Signatures of many frames at once, using the execution mode for the
/// embarrassingly parallel per-frame work.
pub fn frame_signatures(
    frames: &[Frame],
    view_direction: Vec3,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<InvariantSignature>, LinkError> {
    let results = mode.map(frames, |frame| {
        planar_project_frame(frame, view_direction, seed).map(|d| signature(&d))
    });
    results.into_iter().collect()
}

/// Gauss codes of many frames at once: one string per curve component,
/// in the frame's component order.
pub fn frame_gauss_codes(
    frames: &[Frame],
    view_direction: Vec3,
    seed: u64,
    mode: ExecMode,
) -> Result<Vec<Vec<String>>, LinkError> {
    let results = mode.map(frames, |frame| {
        planar_project_frame(frame, view_direction, seed).map(|d| d.gauss_code)
    });
    results.into_iter().collect()
}

// --- Invariants -----------------------------------------------------------

/// Number of Fox 3-colorings of the diagram: solutions over the
/// 3-element field of the per-crossing relation
/// `2·over = under_in + under_out` (equivalently, the three arc colors
/// at each crossing sum to zero mod 3). Always a power of 3, at least 3,
/// and invariant under Reidemeister moves.
pub fn tricoloring_count(diagram: &LinkDiagram) -> u64 {
    let arcs = diagram.arcs.len();
    // Relation rows mod 3; 2·o − i − u ≡ o + i + u (mod 3).
    let mut rows: Vec<Vec<u8>> = diagram
        .crossings
        .iter()
        .map(|c| {
            let mut row = vec![0u8; arcs];
            for arc in [c.over_arc, c.under_arc_in, c.under_arc_out] {
                row[arc] = (row[arc] + 1) % 3;
            }
            row
        })
        .collect();
    let mut rank = 0usize;
    for col in 0..arcs {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col]; // 1⁻¹ = 1, 2⁻¹ = 2 in GF(3)
        for x in rows[rank].iter_mut() {
            *x = (*x * inv) % 3;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let factor = row[col];
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + (3 - factor * p % 3) % 3) % 3;
                }
            }
        }
        rank += 1;
    }
    let dim = (arcs - rank) as u32;
    assert!(
        dim <= MAX_COLOR_EXPONENT,
        "coloring kernel dimension {dim} overflows the exact count"
    );
    3u64.pow(dim)
}

/// Pairwise linking numbers: entry `(i, j)`, `i ≠ j`, is half the signed
/// sum of the crossings between components `i` and `j`; the diagonal is
/// zero. The matrix is symmetric and integral for closed curves.
pub fn linking_matrix(diagram: &LinkDiagram) -> Vec<Vec<i64>> {
    let n = diagram.components;
    let mut sums = vec![vec![0i64; n]; n];
    for c in &diagram.crossings {
        if c.over_component != c.under_component {
            sums[c.over_component][c.under_component] += c.sign as i64;
            sums[c.under_component][c.over_component] += c.sign as i64;
        }
    }
    for row in &mut sums {
        for entry in row.iter_mut() {
            debug_assert_eq!(*entry % 2, 0, "signed sums between closed curves are even");
            *entry /= 2;
        }
    }
    sums
}

/// Bundles the comparison invariants of a diagram. The reduced crossing
/// count comes from greedy simplification and is informational only.
pub fn signature(diagram: &LinkDiagram) -> InvariantSignature {
    let matrix = linking_matrix(diagram);
    let total = matrix
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().skip(i + 1))
        .sum();
    InvariantSignature {
        component_count: diagram.components,
        crossing_count_reduced: diagram.reduced().crossings.len(),
        tricoloring_count: tricoloring_count(diagram),
        linking_matrix: matrix,
        total_linking: total,
    }
}

/// Exact equality of the invariant fields: component count, coloring
/// count, and linking data. The reduced crossing count is excluded —
/// greedy simplification is not canonical, so equal links can reduce to
/// different crossing counts. Equality is necessary but not sufficient
/// for the frames to present the same motion.
pub fn signatures_equal(a: &InvariantSignature, b: &InvariantSignature) -> bool {
    a.component_count == b.component_count
        && a.tricoloring_count == b.tricoloring_count
        && a.linking_matrix == b.linking_matrix
        && a.total_linking == b.total_linking
}

// --- Reference diagrams ---------------------------------------------------

/// Crossing-free unknot diagram.
pub fn unknot_diagram() -> LinkDiagram {
    LinkDiagram::from_code(vec![Vec::new()]).expect("empty code is well formed")
}

/// Crossing-free unlink of `m` components.
pub fn unlink_diagram(m: usize) -> LinkDiagram {
    LinkDiagram::from_code(vec![Vec::new(); m]).expect("empty code is well formed")
}

fn pass(crossing: usize, over: bool, sign: i8) -> Pass {
    Pass {
        crossing,
        over,
        sign,
    }
}

/// Standard positive trefoil, `O1+ U2+ O3+ U1+ O2+ U3+`.
pub fn trefoil_diagram() -> LinkDiagram {
    LinkDiagram::from_code(vec![vec![
        pass(0, true, 1),
        pass(1, false, 1),
        pass(2, true, 1),
        pass(0, false, 1),
        pass(1, true, 1),
        pass(2, false, 1),
    ]])
    .expect("reference code is well formed")
}

/// Square knot: the connected sum of the trefoil and its mirror image
/// (six crossings, three of each sign).
pub fn square_knot_diagram() -> LinkDiagram {
    LinkDiagram::from_code(vec![vec![
        pass(0, true, 1),
        pass(1, false, 1),
        pass(2, true, 1),
        pass(0, false, 1),
        pass(1, true, 1),
        pass(2, false, 1),
        pass(3, false, -1),
        pass(4, true, -1),
        pass(5, false, -1),
        pass(3, true, -1),
        pass(4, false, -1),
        pass(5, true, -1),
    ]])
    .expect("reference code is well formed")
}

/// Positive Hopf link: two components, two positive crossings,
/// linking number +1.
pub fn hopf_link_diagram() -> LinkDiagram {
    LinkDiagram::from_code(vec![
        vec![pass(0, true, 1), pass(1, false, 1)],
        vec![pass(0, false, 1), pass(1, true, 1)],
    ])
    .expect("reference code is well formed")
}
