//! The dual graph of a complex and the face-choice Markov chain.
//!
//! The dual graph has one vertex per maximal simplex (each of degree n+1)
//! and one per codimension-one simplex (degree = its coface count), with an
//! edge per incidence. The induced chain lives on the codimension-one
//! vertices: from `x`, choose an incident maximal simplex uniformly, then
//! one of its n other codimension-one faces uniformly. For one-complexes
//! this is exactly the simple random walk on the graph.
//!
//! Recurrence/transience diagnostics: return-probability estimation by
//! direct walking, and effective resistance of the unit-conductance chain
//! network from the origin to shorted spheres of growing radius. Bounded
//! resistance indicates transience, divergence indicates recurrence.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{Backing, Complex, ComplexError, SimplexRef};
use crate::rng::path_rng;
use crate::stats::Estimate;

/// The bipartite dual graph, with the chain structures precomputed.
#[derive(Clone, Debug)]
pub struct DualGraph {
    dimension: usize,
    /// Per maximal simplex: its n+1 codimension-one faces.
    top_faces: Vec<Vec<usize>>,
    /// Per codimension-one simplex: the maximal simplices containing it.
    codim1_cofaces: Vec<Vec<usize>>,
    /// Truncation-marked codimension-one vertices absorb the chain.
    absorbing: Vec<bool>,
}

impl DualGraph {
    /// Build the dual graph of a complex.
    pub fn build(c: &Complex) -> DualGraph {
        let n = c.dimension();
        let top_faces: Vec<Vec<usize>> = (0..c.count(n))
            .map(|i| c.facets(SimplexRef { dim: n, idx: i }).to_vec())
            .collect();
        let codim1_cofaces: Vec<Vec<usize>> = (0..c.count(n - 1))
            .map(|i| c.cofaces(SimplexRef { dim: n - 1, idx: i }).to_vec())
            .collect();
        let absorbing = (0..c.count(n - 1))
            .map(|i| c.is_truncation_face(i))
            .collect();
        DualGraph {
            dimension: n,
            top_faces,
            codim1_cofaces,
            absorbing,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn v_top_count(&self) -> usize {
        self.top_faces.len()
    }

    pub fn v_codim1_count(&self) -> usize {
        self.codim1_cofaces.len()
    }

    /// Incidence edges; every top vertex has degree n+1.
    pub fn edge_count(&self) -> usize {
        self.top_faces.iter().map(Vec::len).sum()
    }

    /// Degree of a codimension-one vertex: its maximal coface count.
    pub fn deg(&self, x: usize) -> usize {
        self.codim1_cofaces[x].len()
    }

    pub fn is_absorbing(&self, x: usize) -> bool {
        self.absorbing[x]
    }

    pub fn top_faces(&self, z: usize) -> &[usize] {
        &self.top_faces[z]
    }

    pub fn cofaces(&self, x: usize) -> &[usize] {
        &self.codim1_cofaces[x]
    }

    /// Exact transition probabilities out of `x`, merged over parallel
    /// routes.
    pub fn transition_row(&self, x: usize) -> Vec<(usize, f64)> {
        let deg = self.deg(x) as f64;
        let n = self.dimension as f64;
        let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
        for &z in &self.codim1_cofaces[x] {
            for &y in &self.top_faces[z] {
                if y != x {
                    *acc.entry(y).or_insert(0.0) += 1.0 / (deg * n);
                }
            }
        }
        acc.into_iter().collect()
    }
}

/// One step of the face-choice chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    To(usize),
    /// The walk reached a truncation-boundary vertex and stops.
    Absorbed,
}

/// Advance the chain from codimension-one vertex `x`: uniform maximal
/// coface, then uniform among its other faces. Truncation vertices absorb.
pub fn chain_step<R: Rng + ?Sized>(g: &DualGraph, x: usize, rng: &mut R) -> Step {
    if g.absorbing[x] {
        return Step::Absorbed;
    }
    let cofaces = &g.codim1_cofaces[x];
    debug_assert!(!cofaces.is_empty());
    let z = cofaces[rng.random_range(0..cofaces.len())];
    let faces = &g.top_faces[z];
    // n other faces of the chosen maximal simplex.
    let k = rng.random_range(0..faces.len() - 1);
    let mut count = 0;
    for &y in faces {
        if y != x {
            if count == k {
                return Step::To(y);
            }
            count += 1;
        }
    }
    unreachable!("x is a face of z");
}

/// Return-probability statistics of the chain.
#[derive(Clone, Debug, Serialize)]
pub struct WalkStats {
    pub origin: usize,
    pub horizon: usize,
    pub n_walks: usize,
    pub returned: usize,
    /// Walks that hit the truncation boundary before returning.
    pub absorbed: usize,
    pub return_probability: Estimate,
}

/// Fraction of chain walks from `origin` that revisit it within `horizon`
/// steps.
pub fn estimate_return(
    g: &DualGraph,
    origin: usize,
    horizon: usize,
    n_walks: usize,
    seed: u64,
) -> WalkStats {
    assert!(!g.is_absorbing(origin), "origin must be interior");
    let outcomes: Vec<(bool, bool)> = (0..n_walks as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let mut at = origin;
            for _ in 0..horizon {
                match chain_step(g, at, &mut rng) {
                    Step::To(y) => {
                        if y == origin {
                            return (true, false);
                        }
                        at = y;
                    }
                    Step::Absorbed => return (false, true),
                }
            }
            (false, false)
        })
        .collect();
    let returned = outcomes.iter().filter(|o| o.0).count();
    let absorbed = outcomes.iter().filter(|o| o.1).count();
    WalkStats {
        origin,
        horizon,
        n_walks,
        returned,
        absorbed,
        return_probability: Estimate::from_binomial(returned, n_walks),
    }
}

/// Effective resistance from the origin to the shorted sphere of each
/// radius.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResistanceShell {
    pub r: usize,
    pub r_eff: f64,
    pub increment: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum DualError {
    #[error("origin is on the truncation boundary")]
    AbsorbingOrigin,
    #[error("sphere of radius {0} is empty (ball exhausted the graph)")]
    BallExhausted(usize),
    #[error("linear solve failed to converge")]
    SolveFailed,
    #[error("complex error: {0}")]
    Complex(#[from] ComplexError),
}

/// Unit-conductance network of the chain: one conductor of weight `1/n`
/// between every pair of codimension-one faces of each maximal simplex.
/// For one-complexes this is the graph itself with unit resistors.
fn conductances(g: &DualGraph) -> Vec<Vec<(usize, f64)>> {
    let w = 1.0 / g.dimension as f64;
    let mut adj: Vec<std::collections::BTreeMap<usize, f64>> =
        vec![Default::default(); g.v_codim1_count()];
    for faces in &g.top_faces {
        for (i, &a) in faces.iter().enumerate() {
            for &b in &faces[(i + 1)..] {
                *adj[a].entry(b).or_insert(0.0) += w;
                *adj[b].entry(a).or_insert(0.0) += w;
            }
        }
    }
    adj.into_iter()
        .map(|m| m.into_iter().collect())
        .collect()
}

/// Solve for the effective resistance between `origin` and the shorted
/// sphere of radius `r`, for every `r` up to `max_radius` (or until the
/// ball exhausts the graph). Resistance is nondecreasing in the radius.
pub fn effective_resistance(
    g: &DualGraph,
    origin: usize,
    max_radius: usize,
) -> Result<Vec<ResistanceShell>, DualError> {
    let adj = conductances(g);
    // Hop distances in the chain network.
    let mut dist = vec![usize::MAX; adj.len()];
    dist[origin] = 0;
    let mut queue = std::collections::VecDeque::from([origin]);
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }

    let mut out: Vec<ResistanceShell> = Vec::new();
    let mut prev = 0.0;
    for r in 1..=max_radius {
        if !dist.contains(&r) {
            break;
        }
        // Unknowns: nodes strictly inside the sphere; the sphere is ground.
        let interior: Vec<usize> = (0..adj.len()).filter(|&v| dist[v] < r).collect();
        let pos: std::collections::HashMap<usize, usize> = interior
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let m = interior.len();
        let mut diag = vec![0.0; m];
        let mut offdiag: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (i, &v) in interior.iter().enumerate() {
            for &(w, cond) in &adj[v] {
                if dist[w] > r {
                    continue;
                }
                diag[i] += cond;
                if let Some(&j) = pos.get(&w) {
                    offdiag[i].push((j, cond));
                }
            }
        }
        let mut rhs = vec![0.0; m];
        rhs[pos[&origin]] = 1.0;
        let v = solve_grounded_laplacian(&diag, &offdiag, &rhs)?;
        let r_eff = v[pos[&origin]];
        let increment = r_eff - prev;
        debug_assert!(increment > -1e-9, "resistance must not decrease");
        out.push(ResistanceShell {
            r,
            r_eff,
            increment,
        });
        prev = r_eff;
    }
    if out.is_empty() {
        return Err(DualError::BallExhausted(1));
    }
    Ok(out)
}

/// Effective resistance between two codimension-one vertices of the chain
/// network.
pub fn pairwise_resistance(g: &DualGraph, a: usize, b: usize) -> Result<f64, DualError> {
    assert_ne!(a, b);
    let adj = conductances(g);
    // Ground b; inject one ampere at a; unknowns are all other nodes in
    // the component of a.
    let mut reach = vec![false; adj.len()];
    reach[a] = true;
    let mut queue = std::collections::VecDeque::from([a]);
    let mut found = false;
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            if w == b {
                found = true;
                continue;
            }
            if !reach[w] {
                reach[w] = true;
                queue.push_back(w);
            }
        }
    }
    if !found && !adj[b].iter().any(|&(w, _)| reach[w]) {
        return Err(DualError::BallExhausted(0));
    }
    let interior: Vec<usize> = (0..adj.len()).filter(|&v| reach[v] && v != b).collect();
    let pos: std::collections::HashMap<usize, usize> = interior
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let m = interior.len();
    let mut diag = vec![0.0; m];
    let mut offdiag: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (i, &v) in interior.iter().enumerate() {
        for &(w, cond) in &adj[v] {
            diag[i] += cond;
            if w != b {
                if let Some(&j) = pos.get(&w) {
                    offdiag[i].push((j, cond));
                }
            }
        }
    }
    let mut rhs = vec![0.0; m];
    rhs[pos[&a]] = 1.0;
    let v = solve_grounded_laplacian(&diag, &offdiag, &rhs)?;
    Ok(v[pos[&a]])
}

/// Conjugate gradients with Jacobi preconditioning on the grounded
/// Laplacian (symmetric positive definite once the sphere is grounded).
fn solve_grounded_laplacian(
    diag: &[f64],
    offdiag: &[Vec<(usize, f64)>],
    rhs: &[f64],
) -> Result<Vec<f64>, DualError> {
    let m = diag.len();
    if diag.iter().any(|&d| d <= 1e-12) {
        return Err(DualError::SolveFailed);
    }
    let apply = |x: &[f64], out: &mut Vec<f64>| {
        for i in 0..m {
            let mut s = diag[i] * x[i];
            for &(j, c) in &offdiag[i] {
                s -= c * x[j];
            }
            out[i] = s;
        }
    };
    let mut x = vec![0.0; m];
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let rhs_norm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-14 * rhs_norm.max(1e-300);
    let mut ap = vec![0.0; m];
    for _ in 0..(10 * m + 50) {
        let res_norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if res_norm <= tol {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(DualError::SolveFailed);
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..m {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res_norm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if res_norm <= tol * 100.0 {
        Ok(x)
    } else {
        Err(DualError::SolveFailed)
    }
}

/// Outcome of the branching-criterion classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Classification {
    /// All hypotheses hold: nonpositively curved, simply connected,
    /// complete noncompact, and at least three maximal cofaces at every
    /// interior codimension-one simplex. Brownian motion is transient.
    Transient { clause: String },
    /// The first failing hypothesis; the criterion has no converse.
    NotCovered { reason: String },
}

/// Classify transience by the branching criterion for complexes of
/// dimension at most two: a complete simply connected nonpositively curved
/// noncompact complex in which every interior codimension-one simplex has
/// at least three maximal cofaces carries a transient Brownian motion.
pub fn classify_transience(c: &Complex) -> Result<Classification, ComplexError> {
    let n = c.dimension();
    if n > 2 {
        return Err(ComplexError::UnsupportedDimension(n));
    }
    let not = |reason: &str| Classification::NotCovered {
        reason: reason.to_string(),
    };
    if !c.check_admissible() {
        return Ok(not("complex is not admissible"));
    }

    // Completeness / noncompactness: the materialized ball must represent
    // an infinite boundaryless complex, so the only deficient faces are the
    // truncation frontier.
    let truncated = !c.truncation_faces().is_empty();
    let genuine_boundary = (0..c.count(n - 1)).any(|i| {
        !c.is_truncation_face(i) && c.cofaces(SimplexRef { dim: n - 1, idx: i }).len() < 2
    });
    if !truncated {
        return Ok(not(if c.flags().boundaryless {
            "complex is compact (noncompactness required)"
        } else {
            "complex has boundary (completeness fails)"
        }));
    }
    if genuine_boundary {
        return Ok(not("complex has genuine boundary beyond the truncation"));
    }

    match c.simply_connected() {
        Some(true) => {}
        Some(false) => return Ok(not("complex is not simply connected")),
        None => return Ok(not("simple connectivity not established")),
    }

    if n == 2 && c.flags().cat0 != Some(true) {
        return Ok(not("link condition fails (curvature not nonpositive)"));
    }

    let deficient = (0..c.count(n - 1)).find(|&i| {
        !c.is_truncation_face(i) && c.cofaces(SimplexRef { dim: n - 1, idx: i }).len() < 3
    });
    if deficient.is_some() {
        return Ok(not(
            "branching hypothesis fails: an interior codimension-one simplex has fewer than three maximal cofaces",
        ));
    }

    let clause = match n {
        1 => "one-dimensional: every interior vertex meets at least three edges".to_string(),
        _ => "two-dimensional: every interior edge meets at least three faces".to_string(),
    };
    debug_assert!(matches!(c.backing(), Backing::Generated { .. }) || truncated);
    Ok(Classification::Transient { clause })
}

#[cfg(test)]
mod tests;
