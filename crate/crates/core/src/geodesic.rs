//! Straight-line geodesic flow through flat simplices with randomized
//! branching at codimension-one faces.
//!
//! Motion inside a maximal simplex is a straight chart line. On reaching a
//! codimension-one face transversally, the trajectory keeps its intrinsic
//! tangential velocity components and rebuilds the normal component of the
//! same magnitude along the inward normal of a uniformly chosen coface
//! other than the incoming one. A face with a single coface absorbs. Hits
//! that land within a barycentric tube of `1e-9` around the codimension-two
//! skeleton abort the segment and trigger an immediate direction renewal
//! just inside the carrier.

use rand::Rng;
use serde::Serialize;

use crate::complex::{Complex, ComplexError, Point, SimplexRef};
use crate::linalg;
use crate::rng;

/// Barycentric half-width of the tube around the codim-2 skeleton.
pub const SKELETON_EPS: f64 = 1e-9;
/// Barycentric retreat used to step back inside the carrier after a
/// skeleton hit.
const RETREAT_EPS: f64 = 1e-9;
/// Direction renormalization tolerance after a crossing.
const DIR_TOL: f64 = 1e-12;

/// A point of phase space: maximal carrier simplex, barycentric position
/// and a unit direction in the carrier chart.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub carrier: usize,
    pub bary: Vec<f64>,
    pub dir: Vec<f64>,
}

impl PhasePoint {
    /// The carried position as a point of the complex.
    pub fn point(&self, c: &Complex) -> Point {
        Point::new(
            SimplexRef {
                dim: c.dimension(),
                idx: self.carrier,
            },
            self.bary.clone(),
        )
    }

    /// Chart position within the carrier.
    pub fn chart_position(&self, c: &Complex) -> Vec<f64> {
        c.simplex(SimplexRef {
            dim: c.dimension(),
            idx: self.carrier,
        })
        .chart_position(&self.bary)
    }

    /// Whether barycentric coordinates and direction norm are within
    /// tolerance.
    pub fn is_valid(&self, c: &Complex) -> bool {
        let sum: f64 = self.bary.iter().sum();
        self.bary.len() == c.dimension() + 1
            && (sum - 1.0).abs() <= 1e-12
            && self.bary.iter().all(|&b| b >= -1e-12)
            && (linalg::norm(&self.dir) - 1.0).abs() <= 1e-12
    }
}

/// A transversal hit of a codimension-one face.
#[derive(Clone, Debug)]
pub struct FaceHit {
    pub face: SimplexRef,
    /// Barycentric position on the face, canonical vertex order.
    pub face_bary: Vec<f64>,
    /// Carrier the trajectory came from.
    pub incoming: usize,
    /// Tangential velocity components in the face's intrinsic chart.
    pub tangential: Vec<f64>,
    /// Inward-normal component magnitude of the reversed velocity; positive
    /// for transversal hits.
    pub cos_theta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowEventKind {
    Segment,
    Crossing,
    SkeletonHit,
    Absorbed,
}

/// One event along a trajectory.
#[derive(Clone, Debug)]
pub struct FlowEvent {
    pub kind: FlowEventKind,
    /// Elapsed flow time at the event.
    pub time: f64,
    pub carrier: usize,
    pub bary: Vec<f64>,
}

/// Which cofaces a crossing may continue into.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BranchRule {
    /// Continue into a uniformly chosen coface other than the incoming one.
    #[default]
    ExcludeIncoming,
    /// Continue into any coface uniformly, incoming included (sensitivity
    /// variant).
    AllCofaces,
}

/// Outcome of advancing within one simplex.
#[derive(Clone, Debug)]
pub enum Advance {
    /// Budget exhausted strictly inside the simplex.
    Interior { consumed: f64 },
    /// First transversal exit through a codimension-one face.
    Hit { hit: FaceHit, consumed: f64 },
    /// Hit fell inside the skeleton tube; phase retreated just inside the
    /// carrier and needs a direction renewal.
    Skeleton { consumed: f64 },
}

/// Outcome of a crossing.
#[derive(Clone, Debug)]
pub enum Crossing {
    Entered(PhasePoint),
    /// Single-coface (boundary) face: the trajectory is absorbed.
    Absorbed,
}

/// Move along the straight chart line from `p` at `speed` for at most
/// `budget` time. Mutates `p` to the reached position (on the face for a
/// hit).
pub fn advance_in_simplex(
    c: &Complex,
    p: &mut PhasePoint,
    budget: f64,
    speed: f64,
) -> Advance {
    debug_assert!(budget >= 0.0 && speed > 0.0);
    debug_assert!(p.is_valid(c), "invalid phase point {p:?}");
    let n = c.dimension();
    let k = n + 1;
    let geom = c.carrier_geometry(p.carrier);

    // Barycentric rates of the chart direction: solves M w = (dir, 0).
    let mut w = vec![0.0; k];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut s = 0.0;
        for r in 0..n {
            s += geom.bary_inv[j * k + r] * p.dir[r];
        }
        *wj = s;
    }

    let s_max = budget * speed;
    let mut s_exit = f64::INFINITY;
    let mut j_exit = usize::MAX;
    for (j, (&wj, &bj)) in w.iter().zip(&p.bary).enumerate() {
        if wj < 0.0 {
            let s = -bj / wj;
            if s < s_exit {
                s_exit = s;
                j_exit = j;
            }
        }
    }

    if s_exit >= s_max {
        step_bary(&mut p.bary, &w, s_max);
        return Advance::Interior { consumed: budget };
    }

    // Hit coordinates on the facet opposite local vertex j_exit.
    let facet = &geom.facets[j_exit];
    let mut b_hit = p.bary.clone();
    step_bary(&mut b_hit, &w, s_exit);
    b_hit[j_exit] = 0.0;
    renormalize_bary(&mut b_hit);
    let face_bary: Vec<f64> = facet
        .face_vertex_local
        .iter()
        .map(|&l| b_hit[l])
        .collect();

    // Codim-2 tube: a vanishing face coordinate means the hit is within
    // eps of the skeleton (never triggered for one-complexes, which have
    // no codimension-two skeleton).
    if n >= 2 && face_bary.iter().any(|&b| b < SKELETON_EPS) {
        let s_retreat = (s_exit - RETREAT_EPS).max(0.0);
        step_bary(&mut p.bary, &w, s_retreat);
        renormalize_bary(&mut p.bary);
        return Advance::Skeleton {
            consumed: s_retreat / speed,
        };
    }

    let cos_theta = -linalg::dot(&p.dir, &facet.normal_in);
    debug_assert!(cos_theta > 0.0, "non-transversal exit");
    // Tangential part in the carrier chart, then in the face chart via the
    // transpose of the facet isometry.
    let mut tang_carrier = p.dir.clone();
    for (t, nu) in tang_carrier.iter_mut().zip(&facet.normal_in) {
        *t += cos_theta * nu;
    }
    let mut tangential = vec![0.0; n.saturating_sub(1)];
    for (cidx, t) in tangential.iter_mut().enumerate() {
        let mut s = 0.0;
        for (r, tc) in tang_carrier.iter().enumerate() {
            s += facet.tangent_map[r * (n - 1) + cidx] * tc;
        }
        *t = s;
    }
    debug_assert!(
        (linalg::norm_sq(&tangential) + cos_theta * cos_theta - 1.0).abs() < 1e-9,
        "tangential/normal split broke"
    );

    p.bary = b_hit;
    Advance::Hit {
        hit: FaceHit {
            face: SimplexRef {
                dim: n - 1,
                idx: facet.face,
            },
            face_bary,
            incoming: p.carrier,
            tangential,
            cos_theta,
        },
        consumed: s_exit / speed,
    }
}

fn step_bary(bary: &mut [f64], w: &[f64], s: f64) {
    for (b, r) in bary.iter_mut().zip(w) {
        *b += s * r;
        if *b < 0.0 {
            debug_assert!(*b > -1e-9, "barycentric drift");
            *b = 0.0;
        }
    }
}

fn renormalize_bary(bary: &mut [f64]) {
    let sum: f64 = bary.iter().sum();
    debug_assert!((sum - 1.0).abs() < 1e-9);
    for b in bary.iter_mut() {
        *b /= sum;
    }
}

/// Continue a transversal hit into a coface chosen by the branch rule.
pub fn cross_face<R: Rng + ?Sized>(
    c: &Complex,
    hit: &FaceHit,
    rule: BranchRule,
    rng: &mut R,
) -> Crossing {
    let cofaces = c.cofaces(hit.face);
    let target = match rule {
        BranchRule::ExcludeIncoming => {
            if cofaces.len() <= 1 {
                return Crossing::Absorbed;
            }
            let others: Vec<usize> = cofaces
                .iter()
                .copied()
                .filter(|&m| m != hit.incoming)
                .collect();
            others[rng.random_range(0..others.len())]
        }
        BranchRule::AllCofaces => cofaces[rng.random_range(0..cofaces.len())],
    };
    Crossing::Entered(enter_through_face(c, target, hit.face, &hit.face_bary, &hit.tangential, hit.cos_theta))
}

/// Build the phase point entering `carrier` through `face` at the given
/// face position, tangential face-chart velocity and inward-normal
/// component.
pub(crate) fn enter_through_face(
    c: &Complex,
    carrier: usize,
    face: SimplexRef,
    face_bary: &[f64],
    tangential: &[f64],
    cos_theta: f64,
) -> PhasePoint {
    let n = c.dimension();
    let k = n + 1;
    let geom = c.carrier_geometry(carrier);
    let (j, facet) = geom
        .facets
        .iter()
        .enumerate()
        .find(|(_, f)| f.face == face.idx)
        .expect("carrier contains the face");

    let mut bary = vec![0.0; k];
    for (a, &l) in facet.face_vertex_local.iter().enumerate() {
        bary[l] = face_bary[a];
    }
    bary[j] = 0.0;

    let mut dir = vec![0.0; n];
    for (r, d) in dir.iter_mut().enumerate() {
        let mut s = 0.0;
        for (cidx, t) in tangential.iter().enumerate() {
            s += facet.tangent_map[r * (n - 1) + cidx] * t;
        }
        *d = s + cos_theta * facet.normal_in[r];
    }
    let norm = linalg::normalize(&mut dir);
    debug_assert!((norm - 1.0).abs() < DIR_TOL * 1e3, "direction drifted: {norm}");

    PhasePoint {
        carrier,
        bary,
        dir,
    }
}

/// Status of a finished flow.
#[derive(Clone, Debug, PartialEq)]
pub enum FlowStatus {
    /// Budget consumed; final phase returned.
    Completed(PhasePoint),
    /// Absorbed at a boundary face before the budget ran out.
    Absorbed { at_time: f64 },
}

/// Trace the generalized geodesic flow for time `t` at the given speed,
/// recording an event per crossing, skeleton renewal and the terminal
/// segment. Total traversed length is exactly `speed * t` unless absorbed.
pub fn flow<R: Rng + ?Sized>(
    c: &Complex,
    start: PhasePoint,
    t: f64,
    speed: f64,
    rule: BranchRule,
    rng: &mut R,
) -> (FlowStatus, Vec<FlowEvent>) {
    let mut events = Vec::new();
    let mut phase = start;
    let mut elapsed = 0.0;
    if t == 0.0 {
        return (FlowStatus::Completed(phase), events);
    }
    loop {
        let budget = t - elapsed;
        match advance_in_simplex(c, &mut phase, budget, speed) {
            Advance::Interior { .. } => {
                events.push(FlowEvent {
                    kind: FlowEventKind::Segment,
                    time: t,
                    carrier: phase.carrier,
                    bary: phase.bary.clone(),
                });
                return (FlowStatus::Completed(phase), events);
            }
            Advance::Hit { hit, consumed } => {
                elapsed += consumed;
                match cross_face(c, &hit, rule, rng) {
                    Crossing::Entered(next) => {
                        phase = next;
                        events.push(FlowEvent {
                            kind: FlowEventKind::Crossing,
                            time: elapsed,
                            carrier: phase.carrier,
                            bary: phase.bary.clone(),
                        });
                    }
                    Crossing::Absorbed => {
                        events.push(FlowEvent {
                            kind: FlowEventKind::Absorbed,
                            time: elapsed,
                            carrier: phase.carrier,
                            bary: phase.bary.clone(),
                        });
                        return (FlowStatus::Absorbed { at_time: elapsed }, events);
                    }
                }
            }
            Advance::Skeleton { consumed } => {
                elapsed += consumed;
                phase.dir = rng::sample_unit_sphere(rng, c.dimension());
                events.push(FlowEvent {
                    kind: FlowEventKind::SkeletonHit,
                    time: elapsed,
                    carrier: phase.carrier,
                    bary: phase.bary.clone(),
                });
            }
        }
    }
}

/// Uniform direction on the link of a point, returned as a full phase
/// point in a maximal carrier.
///
/// Interior points of maximal simplices sample the whole unit sphere;
/// interior points of codimension-one simplices sample a uniform coface and
/// a uniform hemisphere; vertices of two-complexes sample the angle graph
/// by arc length.
pub fn sample_uniform_link<R: Rng + ?Sized>(
    c: &Complex,
    at: &Point,
    rng: &mut R,
) -> Result<PhasePoint, ComplexError> {
    use crate::complex::LinkStructure::*;
    let n = c.dimension();
    match c.link_at(at)? {
        FullSphere { carrier, .. } => {
            let support = c.support(at)?;
            let point = Point::new(support, restrict_to_support(c, at)?);
            let bary = c.lift_bary(&point, carrier);
            Ok(PhasePoint {
                carrier,
                bary,
                dir: rng::sample_unit_sphere(rng, n),
            })
        }
        Hemispheres { face, cofaces, .. } => {
            let carrier = cofaces[rng.random_range(0..cofaces.len())];
            let support = c.support(at)?;
            debug_assert_eq!(support.idx, face);
            let point = Point::new(support, restrict_to_support(c, at)?);
            let bary = c.lift_bary(&point, carrier);
            let geom = c.carrier_geometry(carrier);
            let facet = geom
                .facets
                .iter()
                .find(|f| f.face == face)
                .expect("coface contains face");
            let mut dir = rng::sample_unit_sphere(rng, n);
            let inward = linalg::dot(&dir, &facet.normal_in);
            if inward < 0.0 {
                for d in dir.iter_mut() {
                    *d = -*d;
                }
            }
            Ok(PhasePoint {
                carrier,
                bary,
                dir,
            })
        }
        VertexGraph(g) => {
            let total = g.total_length();
            let mut u = rng.random::<f64>() * total;
            let mut chosen = g.arcs.len() - 1;
            for (i, arc) in g.arcs.iter().enumerate() {
                if u < arc.length {
                    chosen = i;
                    break;
                }
                u -= arc.length;
            }
            let arc = &g.arcs[chosen];
            let phi = u.min(arc.length);
            let carrier = arc.face.idx;
            let tri = c.simplex(arc.face);
            let vid = g.vertex;
            let local = tri
                .vertices()
                .iter()
                .position(|&w| w == vid)
                .expect("vertex in face");
            // Unit edge directions out of the vertex, ordered to match the
            // arc endpoints.
            let edge_dir = |node: SimplexRef| -> Vec<f64> {
                let e = c.simplex(node);
                let other = e.vertices().iter().find(|&&w| w != vid).unwrap();
                let ol = tri.vertices().iter().position(|w| w == other).unwrap();
                let mut v: Vec<f64> = tri
                    .chart(ol)
                    .iter()
                    .zip(tri.chart(local))
                    .map(|(a, b)| a - b)
                    .collect();
                linalg::normalize(&mut v);
                v
            };
            let e1 = edge_dir(g.nodes[arc.a]);
            let e2 = edge_dir(g.nodes[arc.b]);
            let theta = arc.length;
            let sin_t = theta.sin();
            let (c1, c2) = if sin_t.abs() < 1e-12 {
                (1.0 - phi / theta, phi / theta)
            } else {
                ((theta - phi).sin() / sin_t, phi.sin() / sin_t)
            };
            let mut dir: Vec<f64> = e1
                .iter()
                .zip(&e2)
                .map(|(a, b)| c1 * a + c2 * b)
                .collect();
            linalg::normalize(&mut dir);
            let mut bary = vec![0.0; n + 1];
            bary[local] = 1.0;
            Ok(PhasePoint {
                carrier,
                bary,
                dir,
            })
        }
    }
}

fn restrict_to_support(c: &Complex, p: &Point) -> Result<Vec<f64>, ComplexError> {
    let support = c.support(p)?;
    let sup = c.simplex(support);
    let carrier = c.simplex(p.carrier);
    let mut out = vec![0.0; support.dim + 1];
    for (b, v) in p.bary.iter().zip(carrier.vertices()) {
        if *b > 0.0 {
            if let Some(l) = sup.vertices().iter().position(|w| w == v) {
                out[l] += *b;
            }
        }
    }
    Ok(out)
}

/// Sample the Liouville law on one side of a codimension-one face: position
/// uniform on the face, direction on the inward hemisphere of `side` with
/// density proportional to the cosine of the angle to the inward normal.
pub fn sample_liouville<R: Rng + ?Sized>(
    c: &Complex,
    face: SimplexRef,
    side: usize,
    rng: &mut R,
) -> PhasePoint {
    let n = c.dimension();
    debug_assert_eq!(face.dim, n - 1);
    // Uniform barycentric point on the face (Dirichlet(1, ..., 1)).
    let mut face_bary: Vec<f64> = (0..n).map(|_| rng::sample_exp(rng, 1.0)).collect();
    let sum: f64 = face_bary.iter().sum();
    for b in face_bary.iter_mut() {
        *b /= sum;
    }
    // Cosine-weighted hemisphere: uniform disk in the tangent plane lifted
    // to the sphere.
    let ball = rng::sample_unit_ball(rng, n - 1);
    let cos_theta = (1.0 - linalg::norm_sq(&ball)).sqrt();
    enter_through_face(c, side, face, &face_bary, &ball, cos_theta)
}

/// Signed angle of a hit in the face frame for two-complexes: magnitude
/// from `cos_theta`, sign from the single tangential component.
pub fn signed_incidence_angle(hit: &FaceHit) -> f64 {
    let theta = hit.cos_theta.clamp(-1.0, 1.0).acos();
    if hit.tangential.first().copied().unwrap_or(0.0) < 0.0 {
        -theta
    } else {
        theta
    }
}

/// Signed angle of a phase point relative to a facet of its carrier.
pub fn signed_angle_to_face(c: &Complex, phase: &PhasePoint, face: SimplexRef) -> f64 {
    let geom = c.carrier_geometry(phase.carrier);
    let n = c.dimension();
    let facet = geom
        .facets
        .iter()
        .find(|f| f.face == face.idx)
        .expect("face bounds carrier");
    let cos = linalg::dot(&phase.dir, &facet.normal_in).clamp(-1.0, 1.0);
    let theta = cos.acos();
    if n < 2 {
        return theta;
    }
    let mut tang = 0.0;
    for r in 0..n {
        tang += facet.tangent_map[r * (n - 1)] * phase.dir[r];
    }
    if tang < 0.0 {
        -theta
    } else {
        theta
    }
}

#[cfg(test)]
mod tests;
