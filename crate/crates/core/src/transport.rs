//! The isotropic transport process: geodesic motion with unit-rate
//! exponential renewal clocks and uniform link resampling of the direction,
//! absorbed into a cemetery state at boundary faces.
//!
//! Monte Carlo estimators for the direction-averaging operator, the
//! semigroups of the pure flow and of the full process, and their resolvent
//! operators live here too. All estimators run one ChaCha stream per sample
//! and reduce in index order, so results are independent of thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{Complex, ComplexError, Point, SimplexRef};
use crate::geodesic::{
    self, Advance, BranchRule, Crossing, FlowEvent, FlowEventKind, PhasePoint,
};
use crate::rng::{derive_seed, path_rng, sample_exp, sample_unit_sphere, PathRng};
use crate::stats::Estimate;

/// Simulation parameters shared by the estimators.
#[derive(Clone, Copy, Debug)]
pub struct TransportParams {
    pub speed: f64,
    pub branch_rule: BranchRule,
}

impl Default for TransportParams {
    fn default() -> Self {
        TransportParams {
            speed: 1.0,
            branch_rule: BranchRule::default(),
        }
    }
}

/// State of the renewal chain: index, phase and renewal time.
#[derive(Clone, Debug)]
pub struct ChainState {
    pub k: usize,
    pub z: PhasePoint,
    pub tau: f64,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PathDiagnostics {
    pub renewals: usize,
    pub crossings: usize,
    pub skeleton_hits: usize,
}

/// A simulated trajectory: renewal chain, flow events, and the cemetery
/// flag. Queries after absorption return `None` (the cemetery).
#[derive(Clone, Debug)]
pub struct PathSample {
    pub states: Vec<ChainState>,
    pub events: Vec<FlowEvent>,
    pub horizon: f64,
    pub cemetery: bool,
    /// (master seed, path index) identifying the random stream.
    pub seed: (u64, u64),
    pub diagnostics: PathDiagnostics,
}

/// Notes emitted while a walker advances.
pub enum WalkerNote<'a> {
    Crossing(&'a PhasePoint, f64),
    SkeletonRenewal(&'a PhasePoint, f64),
    Renewal(&'a PhasePoint, f64, usize),
    Absorbed(&'a PhasePoint, f64),
    /// Budget reached; final phase.
    Paused(&'a PhasePoint, f64),
}

/// Event-driven simulator of one transport path.
pub struct Walker<'c> {
    c: &'c Complex,
    params: TransportParams,
    rng: PathRng,
    phase: PhasePoint,
    flow_time: f64,
    next_renewal: f64,
    renewal_index: usize,
    cemetery: bool,
    cum_length: f64,
    diagnostics: PathDiagnostics,
}

impl<'c> Walker<'c> {
    /// Start a walker at `x0` with a uniform link direction and an
    /// exponential clock.
    pub fn new(
        c: &'c Complex,
        x0: &Point,
        params: TransportParams,
        mut rng: PathRng,
    ) -> Result<Self, ComplexError> {
        let phase = geodesic::sample_uniform_link(c, x0, &mut rng)?;
        let first = sample_exp(&mut rng, 1.0);
        Ok(Walker {
            c,
            params,
            rng,
            phase,
            flow_time: 0.0,
            next_renewal: first,
            renewal_index: 0,
            cemetery: false,
            cum_length: 0.0,
            diagnostics: PathDiagnostics::default(),
        })
    }

    /// Resume from a full phase point with a fresh exponential clock;
    /// exact in law by memorylessness of the clocks.
    pub fn resume(
        c: &'c Complex,
        phase: PhasePoint,
        params: TransportParams,
        mut rng: PathRng,
    ) -> Self {
        let first = sample_exp(&mut rng, 1.0);
        Walker {
            c,
            params,
            rng,
            phase,
            flow_time: 0.0,
            next_renewal: first,
            renewal_index: 0,
            cemetery: false,
            cum_length: 0.0,
            diagnostics: PathDiagnostics::default(),
        }
    }

    pub fn phase(&self) -> Option<&PhasePoint> {
        (!self.cemetery).then_some(&self.phase)
    }

    pub fn position(&self) -> Option<Point> {
        self.phase().map(|p| p.point(self.c))
    }

    pub fn is_absorbed(&self) -> bool {
        self.cemetery
    }

    pub fn flow_time(&self) -> f64 {
        self.flow_time
    }

    pub fn diagnostics(&self) -> PathDiagnostics {
        self.diagnostics
    }

    /// Total geodesic length traversed so far; equals speed times flow time
    /// for unabsorbed paths.
    pub fn traversed_length(&self) -> f64 {
        self.cum_length
    }

    /// Give up the walker, keeping its random stream.
    pub fn into_rng(self) -> PathRng {
        self.rng
    }

    /// Drive the walker to the given flow time, reporting every event.
    pub fn advance_to<F: FnMut(WalkerNote<'_>)>(&mut self, t: f64, mut note: F) {
        while !self.cemetery && self.flow_time < t {
            let renewal_first = self.next_renewal <= t;
            let stop = if renewal_first { self.next_renewal } else { t };
            let budget = stop - self.flow_time;
            match geodesic::advance_in_simplex(self.c, &mut self.phase, budget, self.params.speed)
            {
                Advance::Interior { consumed } => {
                    self.cum_length += consumed * self.params.speed;
                    self.flow_time = stop;
                    if renewal_first {
                        self.renew(&mut note);
                    }
                }
                Advance::Hit { hit, consumed } => {
                    self.account(consumed);
                    match geodesic::cross_face(
                        self.c,
                        &hit,
                        self.params.branch_rule,
                        &mut self.rng,
                    ) {
                        Crossing::Entered(next) => {
                            self.phase = next;
                            self.diagnostics.crossings += 1;
                            note(WalkerNote::Crossing(&self.phase, self.flow_time));
                        }
                        Crossing::Absorbed => {
                            self.cemetery = true;
                            note(WalkerNote::Absorbed(&self.phase, self.flow_time));
                            return;
                        }
                    }
                }
                Advance::Skeleton { consumed } => {
                    self.account(consumed);
                    // Measure-zero event: immediate renewal just inside.
                    self.phase.dir = sample_unit_sphere(&mut self.rng, self.c.dimension());
                    self.next_renewal = self.flow_time + sample_exp(&mut self.rng, 1.0);
                    self.diagnostics.skeleton_hits += 1;
                    self.renewal_index += 1;
                    note(WalkerNote::SkeletonRenewal(&self.phase, self.flow_time));
                }
            }
        }
        if !self.cemetery {
            note(WalkerNote::Paused(&self.phase, self.flow_time));
        }
    }

    fn renew<F: FnMut(WalkerNote<'_>)>(&mut self, note: &mut F) {
        self.phase.dir = sample_unit_sphere(&mut self.rng, self.c.dimension());
        self.next_renewal += sample_exp(&mut self.rng, 1.0);
        self.renewal_index += 1;
        self.diagnostics.renewals += 1;
        note(WalkerNote::Renewal(
            &self.phase,
            self.flow_time,
            self.renewal_index,
        ));
    }

    fn account(&mut self, consumed: f64) {
        self.flow_time += consumed;
        self.cum_length += consumed * self.params.speed;
        debug_assert!(
            self.cum_length <= self.params.speed * self.flow_time * (1.0 + 1e-12) + 1e-9,
            "finite speed bound violated"
        );
    }
}

/// Direction resampling plus waiting increment, as one renewal step.
///
/// Returns the renewed phase and the incremented time.
pub fn sample_renewal<R: Rng + ?Sized>(
    c: &Complex,
    z: &PhasePoint,
    t: f64,
    rng: &mut R,
) -> (PhasePoint, f64) {
    let mut z2 = z.clone();
    z2.dir = sample_unit_sphere(rng, c.dimension());
    (z2, t + sample_exp(rng, 1.0))
}

/// Simulate a full path up to the given flow horizon, recording the renewal
/// chain and all flow events.
pub fn simulate_path(
    c: &Complex,
    x0: &Point,
    horizon: f64,
    params: TransportParams,
    seed: u64,
    path_index: u64,
) -> Result<PathSample, ComplexError> {
    let rng = path_rng(seed, path_index);
    let mut walker = Walker::new(c, x0, params, rng)?;
    let mut states = vec![ChainState {
        k: 0,
        z: walker.phase.clone(),
        tau: 0.0,
    }];
    let mut events = Vec::new();
    walker.advance_to(horizon, |n| match n {
        WalkerNote::Crossing(p, t) => events.push(FlowEvent {
            kind: FlowEventKind::Crossing,
            time: t,
            carrier: p.carrier,
            bary: p.bary.clone(),
        }),
        WalkerNote::SkeletonRenewal(p, t) => {
            events.push(FlowEvent {
                kind: FlowEventKind::SkeletonHit,
                time: t,
                carrier: p.carrier,
                bary: p.bary.clone(),
            });
            states.push(ChainState {
                k: states.len(),
                z: p.clone(),
                tau: t,
            });
        }
        WalkerNote::Renewal(p, t, _) => states.push(ChainState {
            k: states.len(),
            z: p.clone(),
            tau: t,
        }),
        WalkerNote::Absorbed(p, t) => events.push(FlowEvent {
            kind: FlowEventKind::Absorbed,
            time: t,
            carrier: p.carrier,
            bary: p.bary.clone(),
        }),
        WalkerNote::Paused(p, t) => {
            if horizon > 0.0 {
                events.push(FlowEvent {
                    kind: FlowEventKind::Segment,
                    time: t,
                    carrier: p.carrier,
                    bary: p.bary.clone(),
                });
            }
        }
    });
    Ok(PathSample {
        states,
        events,
        horizon,
        cemetery: walker.is_absorbed(),
        seed: (seed, path_index),
        diagnostics: walker.diagnostics(),
    })
}

/// Positions of one path at the given increasing flow times; `None` is the
/// cemetery.
pub fn observe_path(
    c: &Complex,
    x0: &Point,
    times: &[f64],
    params: TransportParams,
    seed: u64,
    path_index: u64,
) -> Result<Vec<Option<Point>>, ComplexError> {
    debug_assert!(times.windows(2).all(|w| w[0] <= w[1]));
    let rng = path_rng(seed, path_index);
    let mut walker = Walker::new(c, x0, params, rng)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        walker.advance_to(t, |_| {});
        out.push(walker.position());
    }
    Ok(out)
}

/// Which semigroup an evaluation runs under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemigroupKind {
    /// Pure geodesic flow from a uniform initial link direction, no
    /// renewals.
    PureFlow,
    /// The full transport process.
    Transport,
}

/// How a two-stage evaluation restarts at the intermediate time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartKind {
    /// Resume from the full phase (position and direction) with a fresh
    /// clock; exact by memorylessness.
    Phase,
    /// Restart from the position only, with a fresh uniform direction.
    Position,
}

/// Monte Carlo average of a phase function over uniform link directions.
pub fn eval_p<F>(c: &Complex, f: F, x: &Point, n_samples: usize, seed: u64) -> Estimate
where
    F: Fn(&Complex, &PhasePoint) -> f64 + Sync,
{
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let z = geodesic::sample_uniform_link(c, x, &mut rng).expect("x in complex");
            f(c, &z)
        })
        .collect();
    Estimate::from_values(&values)
}

/// Pure geodesic flow from a uniform link direction; `None` if absorbed.
fn flow_endpoint<R: Rng>(
    c: &Complex,
    x: &Point,
    t: f64,
    params: TransportParams,
    rng: &mut R,
) -> Option<Point> {
    let z = geodesic::sample_uniform_link(c, x, rng).expect("x in complex");
    match geodesic::flow(c, z, t, params.speed, params.branch_rule, rng) {
        (geodesic::FlowStatus::Completed(p), _) => Some(p.point(c)),
        (geodesic::FlowStatus::Absorbed { .. }, _) => None,
    }
}

/// Estimate the semigroup applied to `f` at `x`: the pure-flow variant
/// averages `f` along geodesic flow from a uniform link direction, the
/// transport variant averages `f(Y_t)`. Absorbed paths contribute
/// `f(D) = 0`.
#[allow(clippy::too_many_arguments)]
pub fn eval_tt<F>(
    c: &Complex,
    f: F,
    x: &Point,
    t: f64,
    kind: SemigroupKind,
    params: TransportParams,
    n_samples: usize,
    seed: u64,
) -> Estimate
where
    F: Fn(&Complex, &Point) -> f64 + Sync,
{
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let end = match kind {
                SemigroupKind::PureFlow => flow_endpoint(c, x, t, params, &mut rng),
                SemigroupKind::Transport => {
                    let mut w = Walker::new(c, x, params, rng).expect("x in complex");
                    w.advance_to(t, |_| {});
                    w.position()
                }
            };
            end.map_or(0.0, |p| f(c, &p))
        })
        .collect();
    Estimate::from_values(&values)
}

/// Two-stage semigroup evaluation: run to `t`, restart per `restart`, run
/// to `t + s`, then average `f`.
#[allow(clippy::too_many_arguments)]
pub fn eval_tt_nested<F>(
    c: &Complex,
    f: F,
    x: &Point,
    t: f64,
    s: f64,
    restart: RestartKind,
    params: TransportParams,
    n_samples: usize,
    seed: u64,
) -> Estimate
where
    F: Fn(&Complex, &Point) -> f64 + Sync,
{
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let rng = path_rng(seed, i);
            let mut w = Walker::new(c, x, params, rng).expect("x in complex");
            w.advance_to(t, |_| {});
            if w.is_absorbed() {
                return 0.0;
            }
            let mid_phase = w.phase.clone();
            let rng = w.into_rng();
            let end = match restart {
                RestartKind::Phase => {
                    let mut w2 = Walker::resume(c, mid_phase, params, rng);
                    w2.advance_to(s, |_| {});
                    w2.position()
                }
                RestartKind::Position => {
                    let mid = mid_phase.point(c);
                    let mut w2 = Walker::new(c, &mid, params, rng).expect("mid in complex");
                    w2.advance_to(s, |_| {});
                    w2.position()
                }
            };
            end.map_or(0.0, |p| f(c, &p))
        })
        .collect();
    Estimate::from_values(&values)
}

/// Resolvent estimate via an exponential time draw: the integral of
/// `exp(-lambda t) T_t f` equals the mean of `f` at an `Exp(lambda)` time,
/// divided by `lambda`.
#[allow(clippy::too_many_arguments)]
pub fn eval_resolvent<F>(
    c: &Complex,
    f: F,
    x: &Point,
    lambda: f64,
    kind: SemigroupKind,
    params: TransportParams,
    n_samples: usize,
    seed: u64,
) -> Estimate
where
    F: Fn(&Complex, &Point) -> f64 + Sync,
{
    assert!(lambda > 0.0);
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let t = sample_exp(&mut rng, lambda);
            let end = match kind {
                SemigroupKind::PureFlow => flow_endpoint(c, x, t, params, &mut rng),
                SemigroupKind::Transport => {
                    let mut w = Walker::new(c, x, params, rng).expect("x in complex");
                    w.advance_to(t, |_| {});
                    w.position()
                }
            };
            end.map_or(0.0, |p| f(c, &p)) / lambda
        })
        .collect();
    Estimate::from_values(&values)
}

/// Report of the resolvent series consistency check.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesCheck {
    pub lhs: Estimate,
    pub rhs_partial: Estimate,
    pub tail_bound: f64,
    pub pass: bool,
}

/// Compare the full resolvent against the partial sum of iterated
/// pure-flow resolvents at rate `lambda + 1`, with one uniform link
/// resampling between consecutive iterates. The tail of the series is
/// bounded by `sup|f| (lambda+1)^-(n_terms+1) / lambda`.
#[allow(clippy::too_many_arguments)]
pub fn resolvent_series_check<F>(
    c: &Complex,
    f: F,
    f_sup: f64,
    x: &Point,
    lambda: f64,
    n_terms: usize,
    params: TransportParams,
    n_samples: usize,
    seed: u64,
) -> SeriesCheck
where
    F: Fn(&Complex, &Point) -> f64 + Sync,
{
    assert!(lambda > 0.0);
    let lhs = eval_resolvent(
        c,
        &f,
        x,
        lambda,
        SemigroupKind::Transport,
        params,
        n_samples,
        derive_seed(seed, 1),
    );

    let rate = lambda + 1.0;
    let rhs_values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(derive_seed(seed, 2), i);
            let mut total = 0.0;
            let mut weight = 1.0;
            let mut at = x.clone();
            for _ in 0..=n_terms {
                weight /= rate;
                let z = geodesic::sample_uniform_link(c, &at, &mut rng).expect("point in complex");
                let t = sample_exp(&mut rng, rate);
                match geodesic::flow(c, z, t, params.speed, params.branch_rule, &mut rng) {
                    (geodesic::FlowStatus::Completed(p), _) => {
                        let pt = p.point(c);
                        total += weight * f(c, &pt);
                        at = pt;
                    }
                    (geodesic::FlowStatus::Absorbed { .. }, _) => break,
                }
            }
            total
        })
        .collect();
    let rhs_partial = Estimate::from_values(&rhs_values);

    let tail_bound = f_sup * rate.powi(-(n_terms as i32 + 1)) / lambda;
    let diff = (lhs.value - rhs_partial.value).abs();
    // Constant f saturates the tail bound exactly; allow f64 rounding.
    let slack = 1e-12 * (1.0 + lhs.value.abs());
    let pass = diff <= tail_bound + 3.0 * lhs.combined_std_error(&rhs_partial) + slack;
    SeriesCheck {
        lhs,
        rhs_partial,
        tail_bound,
        pass,
    }
}

/// Piecewise-linear resolvent field on a barycentric grid, for checks that
/// need the resolvent as a function of the position.
pub struct ResolventField {
    subdiv: usize,
    /// Per maximal simplex, node values indexed by the lattice enumeration.
    values: Vec<Vec<f64>>,
    lambda: f64,
}

impl ResolventField {
    /// Estimate the transport resolvent of `f` on a barycentric lattice of
    /// the given subdivision over every maximal simplex.
    #[allow(clippy::too_many_arguments)]
    pub fn estimate<F>(
        c: &Complex,
        f: F,
        lambda: f64,
        subdiv: usize,
        samples_per_node: usize,
        params: TransportParams,
        seed: u64,
    ) -> Self
    where
        F: Fn(&Complex, &Point) -> f64 + Sync,
    {
        let n = c.dimension();
        assert!(n <= 2, "grid field supports dimension <= 2");
        let mut values = Vec::with_capacity(c.count(n));
        for m in 0..c.count(n) {
            let nodes = lattice_nodes(n, subdiv);
            let vals: Vec<f64> = nodes
                .par_iter()
                .enumerate()
                .map(|(ni, node)| {
                    let bary: Vec<f64> =
                        node.iter().map(|&a| a as f64 / subdiv as f64).collect();
                    let p = Point::new(SimplexRef { dim: n, idx: m }, bary);
                    eval_resolvent(
                        c,
                        &f,
                        &p,
                        lambda,
                        SemigroupKind::Transport,
                        params,
                        samples_per_node,
                        derive_seed(seed, (m * 1_000_003 + ni) as u64),
                    )
                    .value
                })
                .collect();
            values.push(vals);
        }
        ResolventField {
            subdiv,
            values,
            lambda,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Piecewise-linear interpolation at a point.
    pub fn eval(&self, c: &Complex, p: &Point) -> f64 {
        let n = c.dimension();
        let (m, bary) = c.to_maximal(p).expect("point in complex");
        let s = self.subdiv;
        let u: Vec<f64> = bary.iter().map(|b| b * s as f64).collect();
        let fl: Vec<usize> = u.iter().map(|x| (x.floor() as usize).min(s)).collect();
        let theta: Vec<f64> = u.iter().zip(&fl).map(|(x, &f)| x - f as f64).collect();
        let r = s - fl.iter().sum::<usize>().min(s);
        let node_val = |node: &[usize]| -> f64 {
            self.values[m][lattice_index(n, s, node)]
        };
        match r {
            0 => node_val(&fl),
            1 => {
                // Up-simplex: corners fl + e_i weighted by fractional parts.
                let mut acc = 0.0;
                for i in 0..=n {
                    let mut corner = fl.clone();
                    corner[i] += 1;
                    acc += theta[i] * node_val(&corner);
                }
                acc
            }
            _ => {
                // Down-simplex: corners fl + 1 - e_i weighted by 1 - theta.
                let mut acc = 0.0;
                for i in 0..=n {
                    let mut corner: Vec<usize> = fl.iter().map(|&x| x + 1).collect();
                    corner[i] -= 1;
                    acc += (1.0 - theta[i]) * node_val(&corner);
                }
                acc
            }
        }
    }
}

/// Barycentric lattice nodes of a `dim`-simplex at the given subdivision.
fn lattice_nodes(dim: usize, subdiv: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    match dim {
        1 => {
            for a in 0..=subdiv {
                out.push(vec![a, subdiv - a]);
            }
        }
        2 => {
            for a in 0..=subdiv {
                for b in 0..=(subdiv - a) {
                    out.push(vec![a, b, subdiv - a - b]);
                }
            }
        }
        _ => unreachable!("dimension <= 2"),
    }
    out
}

fn lattice_index(dim: usize, subdiv: usize, node: &[usize]) -> usize {
    match dim {
        1 => node[0],
        2 => {
            let a = node[0];
            let b = node[1];
            // Sum of row lengths before a: rows have subdiv+1-a entries.
            let before: usize = (0..a).map(|r| subdiv + 1 - r).sum();
            before + b
        }
        _ => unreachable!("dimension <= 2"),
    }
}
