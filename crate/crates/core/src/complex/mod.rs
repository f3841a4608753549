//! Piecewise-flat simplicial complexes.
//!
//! A complex is built from declared simplices plus a global table of
//! squared edge lengths. Every simplex of dimension `k >= 1` gets a derived
//! Cartesian chart: coordinates for its `k+1` vertices in `R^k` obtained by
//! a pivoted square-root factorization of the Gram matrix of the squared
//! lengths. Degenerate simplices (Cayley-Menger determinant not strictly
//! positive) are rejected at build time.
//!
//! Complexes are immutable after construction and safe to share across
//! threads.

mod document;
mod generate;
mod links;

pub use document::ComplexDocument;
pub use generate::{plane_rings_for_reach, GeneratorSpec, SIMPLEX_BUDGET};
pub use links::{Cat0Report, LinkArc, LinkGraph, LinkStructure};

use std::collections::{BTreeMap, HashMap, HashSet};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::linalg;

/// Identifier of a vertex as declared in the input document.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

/// Handle of a simplex: dimension plus index within that dimension's table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexRef {
    pub dim: usize,
    pub idx: usize,
}

/// A flat Euclidean simplex: vertices, squared edge lengths and the derived
/// chart (one row of `dim` coordinates per vertex).
#[derive(Clone, Debug)]
pub struct MetricSimplex {
    vertices: Vec<VertexId>,
    sq_lengths: Vec<f64>,
    chart: Vec<Vec<f64>>,
}

impl MetricSimplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Vertices in canonical (sorted) order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Squared distance between local vertices `i` and `j`.
    pub fn sq_length(&self, i: usize, j: usize) -> f64 {
        let k = self.vertices.len();
        self.sq_lengths[i * k + j]
    }

    /// Chart coordinates of local vertex `i` (length `dim`).
    pub fn chart(&self, i: usize) -> &[f64] {
        &self.chart[i]
    }

    /// Chart position of a barycentric point of this simplex.
    pub fn chart_position(&self, bary: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut x = vec![0.0; d];
        for (b, row) in bary.iter().zip(&self.chart) {
            for (xi, ri) in x.iter_mut().zip(row) {
                *xi += b * ri;
            }
        }
        x
    }

    fn local_index(&self, v: VertexId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }
}

/// Validation flags computed at build time.
#[derive(Clone, Copy, Debug)]
pub struct ComplexFlags {
    pub connected: bool,
    pub boundaryless: bool,
    pub admissible: bool,
    pub cat0: Option<bool>,
}

/// Whether the complex was given explicitly or materialized by a generator.
#[derive(Clone, Debug, PartialEq)]
pub enum Backing {
    Explicit,
    Generated { spec: String, radius: usize },
}

/// Per-facet crossing data of a maximal simplex.
#[derive(Clone, Debug)]
pub(crate) struct FacetGeometry {
    /// Index of the (n-1)-simplex this facet is glued to.
    pub face: usize,
    /// Canonical face vertex position -> local vertex index in the carrier.
    pub face_vertex_local: Vec<usize>,
    /// Inward unit normal in the carrier chart.
    pub normal_in: Vec<f64>,
    /// Row-major n x (n-1) isometry taking face-chart vectors to
    /// carrier-chart vectors tangent to the facet.
    pub tangent_map: Vec<f64>,
}

/// Precomputed geometry of one maximal simplex.
#[derive(Clone, Debug)]
pub(crate) struct CarrierGeometry {
    /// Row-major (n+1)x(n+1) inverse of [chart^T; 1]: maps (x, 1) to
    /// barycentric coordinates and (d, 0) to barycentric rates.
    pub bary_inv: Vec<f64>,
    /// Facet j lies opposite local vertex j.
    pub facets: Vec<FacetGeometry>,
}

/// A point of the complex: a carrier simplex and barycentric coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub carrier: SimplexRef,
    pub bary: Vec<f64>,
}

impl Point {
    pub fn new(carrier: SimplexRef, bary: Vec<f64>) -> Self {
        debug_assert_eq!(bary.len(), carrier.dim + 1);
        Point { carrier, bary }
    }

    /// The point sitting at a vertex.
    pub fn at_vertex(c: &Complex, v: VertexId) -> Option<Self> {
        let idx = c.simplex_index(&[v])?;
        Some(Point::new(SimplexRef { dim: 0, idx }, vec![1.0]))
    }

    /// Barycentric midpoint of a simplex.
    pub fn midpoint(s: SimplexRef) -> Self {
        let k = s.dim + 1;
        Point::new(s, vec![1.0 / k as f64; k])
    }
}

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("document version {0} unsupported (expected 1)")]
    Version(u32),
    #[error("unsupported boundary policy {0:?} (expected \"absorbing\")")]
    BoundaryPolicy(String),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(u32),
    #[error("unknown vertex {0} referenced by a simplex or length entry")]
    UnknownVertex(u32),
    #[error("simplex {0:?} listed under dimension {1}")]
    DimensionMismatch(Vec<u32>, usize),
    #[error("missing squared length for edge ({0}, {1})")]
    MissingLength(u32, u32),
    #[error("inconsistent squared length for edge ({0}, {1}): {2} vs {3}")]
    InconsistentLength(u32, u32, f64, f64),
    #[error("nonpositive squared length for edge ({0}, {1})")]
    NonpositiveLength(u32, u32),
    #[error("degenerate simplex {0:?}: Cayley-Menger determinant is not strictly positive")]
    DegenerateSimplex(Vec<u32>),
    #[error("chart does not reproduce edge lengths for simplex {0:?}")]
    ChartCheck(Vec<u32>),
    #[error("complex has no simplex of its declared dimension {0}")]
    NoMaximalSimplex(usize),
    #[error("dimension {0} unsupported for this operation")]
    UnsupportedDimension(usize),
    #[error("point lies outside the complex")]
    PointOutside,
    #[error("generator needs {0} simplices, over the {1} budget")]
    TooLarge(usize, usize),
    #[error("io error: {0}")]
    Io(String),
}

/// Raw build input, either parsed from a document or produced by a
/// generator.
#[derive(Clone, Debug, Default)]
pub struct ComplexBuildInput {
    pub dimension: usize,
    pub vertices: Vec<u32>,
    pub simplices_by_dim: BTreeMap<usize, Vec<Vec<u32>>>,
    pub sq_edge_lengths: Vec<(u32, u32, f64)>,
}

/// A validated piecewise-flat simplicial complex.
#[derive(Clone, Debug)]
pub struct Complex {
    dimension: usize,
    simplices: Vec<Vec<MetricSimplex>>,
    index: HashMap<Vec<VertexId>, SimplexRef>,
    /// faces[d][i][j] = index of the facet of simplex (d, i) opposite its
    /// local vertex j (d >= 1).
    faces: Vec<Vec<Vec<usize>>>,
    /// cofaces[d][i] = indices of (d+1)-simplices containing (d, i).
    cofaces: Vec<Vec<Vec<usize>>>,
    /// stars[d][i] = indices of maximal simplices containing (d, i).
    stars: Vec<Vec<Vec<usize>>>,
    carriers: Vec<CarrierGeometry>,
    sq_lengths: HashMap<(u32, u32), f64>,
    truncation: HashSet<usize>,
    embedding: Option<Vec<[f64; 2]>>,
    flags: ComplexFlags,
    backing: Backing,
    origin_hint: Option<SimplexRef>,
    simply_connected: Option<bool>,
}

impl Complex {
    /// Build and validate a complex from raw input.
    pub fn build(input: ComplexBuildInput) -> Result<Self, ComplexError> {
        let n = input.dimension;
        if n == 0 {
            return Err(ComplexError::UnsupportedDimension(0));
        }

        let mut declared: Vec<u32> = input.vertices.clone();
        declared.sort_unstable();
        for w in declared.windows(2) {
            if w[0] == w[1] {
                return Err(ComplexError::DuplicateVertex(w[0]));
            }
        }
        let declared_set: HashSet<u32> = declared.iter().copied().collect();

        // Length table with duplicate detection.
        let mut sq_lengths: HashMap<(u32, u32), f64> = HashMap::new();
        for &(a, b, v) in &input.sq_edge_lengths {
            if !declared_set.contains(&a) {
                return Err(ComplexError::UnknownVertex(a));
            }
            if !declared_set.contains(&b) {
                return Err(ComplexError::UnknownVertex(b));
            }
            if v <= 0.0 || !v.is_finite() {
                return Err(ComplexError::NonpositiveLength(a, b));
            }
            let key = (a.min(b), a.max(b));
            if let Some(&old) = sq_lengths.get(&key) {
                if old != v {
                    return Err(ComplexError::InconsistentLength(key.0, key.1, old, v));
                }
            }
            sq_lengths.insert(key, v);
        }

        // Canonicalize declared simplices and close downward.
        let mut by_dim: Vec<HashSet<Vec<u32>>> = vec![HashSet::new(); n + 1];
        for v in &declared {
            by_dim[0].insert(vec![*v]);
        }
        for (&d, list) in &input.simplices_by_dim {
            if d > n {
                if let Some(s) = list.first() {
                    return Err(ComplexError::DimensionMismatch(s.clone(), d));
                }
                continue;
            }
            for s in list {
                if s.len() != d + 1 {
                    return Err(ComplexError::DimensionMismatch(s.clone(), d));
                }
                let mut s = s.clone();
                s.sort_unstable();
                for w in s.windows(2) {
                    if w[0] == w[1] {
                        return Err(ComplexError::DimensionMismatch(s.clone(), d));
                    }
                }
                for &v in &s {
                    if !declared_set.contains(&v) {
                        return Err(ComplexError::UnknownVertex(v));
                    }
                }
                by_dim[d].insert(s);
            }
        }
        if by_dim[n].is_empty() {
            return Err(ComplexError::NoMaximalSimplex(n));
        }
        for d in (1..=n).rev() {
            let parents: Vec<Vec<u32>> = by_dim[d].iter().cloned().collect();
            for s in parents {
                for skip in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(skip);
                    by_dim[d - 1].insert(f);
                }
            }
        }

        let sq = |a: u32, b: u32| -> Result<f64, ComplexError> {
            sq_lengths
                .get(&(a.min(b), a.max(b)))
                .copied()
                .ok_or(ComplexError::MissingLength(a.min(b), a.max(b)))
        };

        // Deterministic simplex order, then charts.
        let mut simplices: Vec<Vec<MetricSimplex>> = Vec::with_capacity(n + 1);
        let mut index: HashMap<Vec<VertexId>, SimplexRef> = HashMap::new();
        for (d, dim_set) in by_dim.iter().enumerate() {
            let mut list: Vec<Vec<u32>> = dim_set.iter().cloned().collect();
            list.sort();
            let mut out = Vec::with_capacity(list.len());
            for (i, verts) in list.into_iter().enumerate() {
                let k = verts.len();
                let mut table = vec![0.0; k * k];
                for a in 0..k {
                    for b in (a + 1)..k {
                        let v = sq(verts[a], verts[b])?;
                        table[a * k + b] = v;
                        table[b * k + a] = v;
                    }
                }
                let chart = if d == 0 {
                    vec![Vec::new()]
                } else {
                    let mut gram = DMatrix::zeros(d, d);
                    for a in 1..k {
                        for b in 1..k {
                            gram[(a - 1, b - 1)] =
                                0.5 * (table[a] + table[b] - table[a * k + b]);
                        }
                    }
                    let rows = linalg::pivoted_sqrt_factor(&gram)
                        .ok_or_else(|| ComplexError::DegenerateSimplex(verts.clone()))?;
                    let mut chart = Vec::with_capacity(k);
                    chart.push(vec![0.0; d]);
                    chart.extend(rows);
                    chart
                };
                let s = MetricSimplex {
                    vertices: verts.iter().map(|&v| VertexId(v)).collect(),
                    sq_lengths: table,
                    chart,
                };
                // The chart must reproduce every edge length to relative 1e-12.
                for a in 0..k {
                    for b in (a + 1)..k {
                        let mut dd = 0.0;
                        for (xa, xb) in s.chart[a].iter().zip(&s.chart[b]) {
                            dd += (xa - xb) * (xa - xb);
                        }
                        let want = s.sq_length(a, b);
                        if (dd - want).abs() > 1e-12 * want.max(1.0) {
                            return Err(ComplexError::ChartCheck(verts.clone()));
                        }
                    }
                }
                index.insert(s.vertices.clone(), SimplexRef { dim: d, idx: i });
                out.push(s);
            }
            simplices.push(out);
        }

        // Face / coface tables.
        let mut faces: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
        let mut cofaces: Vec<Vec<Vec<usize>>> = (0..=n)
            .map(|d| vec![Vec::new(); simplices[d].len()])
            .collect();
        for d in 1..=n {
            let mut per = Vec::with_capacity(simplices[d].len());
            for (i, s) in simplices[d].iter().enumerate() {
                let mut fs = Vec::with_capacity(d + 1);
                for skip in 0..=d {
                    let mut fv: Vec<VertexId> = s.vertices.clone();
                    fv.remove(skip);
                    let fref = index[&fv];
                    fs.push(fref.idx);
                    cofaces[d - 1][fref.idx].push(i);
                }
                per.push(fs);
            }
            faces[d] = per;
        }
        for list in &mut cofaces {
            for c in list.iter_mut() {
                c.sort_unstable();
                c.dedup();
            }
        }

        // Stars: maximal simplices containing each simplex.
        let mut stars: Vec<Vec<Vec<usize>>> = (0..=n)
            .map(|d| vec![Vec::new(); simplices[d].len()])
            .collect();
        stars[n] = (0..simplices[n].len()).map(|i| vec![i]).collect();
        for d in (0..n).rev() {
            for i in 0..simplices[d].len() {
                let mut acc: Vec<usize> = Vec::new();
                for &cf in &cofaces[d][i] {
                    acc.extend_from_slice(&stars[d + 1][cf]);
                }
                acc.sort_unstable();
                acc.dedup();
                stars[d][i] = acc;
            }
        }

        // Carrier geometry of maximal simplices.
        let mut carriers = Vec::with_capacity(simplices[n].len());
        for (i, s) in simplices[n].iter().enumerate() {
            let k = n + 1;
            let mut m = DMatrix::zeros(k, k);
            for c in 0..k {
                for r in 0..n {
                    m[(r, c)] = s.chart[c][r];
                }
                m[(n, c)] = 1.0;
            }
            let inv = linalg::invert(&m)
                .ok_or_else(|| ComplexError::DegenerateSimplex(
                    s.vertices.iter().map(|v| v.0).collect(),
                ))?;
            let mut bary_inv = vec![0.0; k * k];
            for r in 0..k {
                for c in 0..k {
                    bary_inv[r * k + c] = inv[(r, c)];
                }
            }
            let mut facets = Vec::with_capacity(k);
            for j in 0..k {
                let face_idx = faces[n][i][j];
                let face = &simplices[n - 1][face_idx];
                let face_vertex_local: Vec<usize> = face
                    .vertices
                    .iter()
                    .map(|&v| s.local_index(v).expect("face vertex in carrier"))
                    .collect();
                // Inward normal = normalized gradient of the barycentric
                // coordinate that vanishes on this facet.
                let mut normal_in: Vec<f64> = (0..n).map(|r| bary_inv[j * k + r]).collect();
                linalg::normalize(&mut normal_in);
                // Isometry face chart -> carrier chart.
                let tangent_map = if n == 1 {
                    Vec::new()
                } else {
                    let base = face_vertex_local[0];
                    let mut q = DMatrix::zeros(n - 1, n - 1);
                    let mut p = DMatrix::zeros(n, n - 1);
                    for c in 1..n {
                        for r in 0..(n - 1) {
                            q[(r, c - 1)] = face.chart[c][r] - face.chart[0][r];
                        }
                        let lc = face_vertex_local[c];
                        for r in 0..n {
                            p[(r, c - 1)] = s.chart[lc][r] - s.chart[base][r];
                        }
                    }
                    let qinv = linalg::invert(&q).ok_or_else(|| {
                        ComplexError::DegenerateSimplex(
                            face.vertices.iter().map(|v| v.0).collect(),
                        )
                    })?;
                    let a = p * qinv;
                    let mut t = vec![0.0; n * (n - 1)];
                    for r in 0..n {
                        for c in 0..(n - 1) {
                            t[r * (n - 1) + c] = a[(r, c)];
                        }
                    }
                    t
                };
                facets.push(FacetGeometry {
                    face: face_idx,
                    face_vertex_local,
                    normal_in,
                    tangent_map,
                });
            }
            carriers.push(CarrierGeometry { bary_inv, facets });
        }

        let mut complex = Complex {
            dimension: n,
            simplices,
            index,
            faces,
            cofaces,
            stars,
            carriers,
            sq_lengths,
            truncation: HashSet::new(),
            embedding: None,
            flags: ComplexFlags {
                connected: false,
                boundaryless: false,
                admissible: false,
                cat0: None,
            },
            backing: Backing::Explicit,
            origin_hint: None,
            simply_connected: None,
        };
        complex.flags = complex.compute_flags();
        Ok(complex)
    }

    fn compute_flags(&self) -> ComplexFlags {
        let connected = self.is_connected();
        let boundaryless = self
            .cofaces[self.dimension - 1]
            .iter()
            .all(|c| c.len() >= 2);
        let admissible = connected && self.check_admissible_inner();
        let cat0 = if self.dimension <= 2 {
            Some(self.check_cat0().map(|r| r.cat0).unwrap_or(false))
        } else {
            None
        };
        ComplexFlags {
            connected,
            boundaryless,
            admissible,
            cat0,
        }
    }

    fn is_connected(&self) -> bool {
        let nv = self.simplices[0].len();
        if nv == 0 {
            return false;
        }
        let mut uf = UnionFind::new(nv);
        for e in &self.simplices[1] {
            let a = self.simplex_index(&[e.vertices[0]]).unwrap();
            let b = self.simplex_index(&[e.vertices[1]]).unwrap();
            uf.union(a, b);
        }
        let root = uf.find(0);
        (1..nv).all(|i| uf.find(i) == root)
    }

    /// Finite star-connectivity reduction of admissibility: around every
    /// simplex of codimension >= 2, the maximal simplices must be connected
    /// through shared codimension-one faces; in addition every simplex must
    /// lie in some maximal simplex.
    fn check_admissible_inner(&self) -> bool {
        let n = self.dimension;
        for d in 0..n {
            for i in 0..self.simplices[d].len() {
                if self.stars[d][i].is_empty() {
                    return false;
                }
            }
        }
        if n < 2 {
            return true;
        }
        for d in 0..=(n - 2) {
            for i in 0..self.simplices[d].len() {
                if !self.star_is_edge_connected(SimplexRef { dim: d, idx: i }) {
                    return false;
                }
            }
        }
        true
    }

    fn star_is_edge_connected(&self, s: SimplexRef) -> bool {
        let n = self.dimension;
        let star = &self.stars[s.dim][s.idx];
        if star.len() <= 1 {
            return true;
        }
        let pos: HashMap<usize, usize> =
            star.iter().enumerate().map(|(p, &m)| (m, p)).collect();
        let mut uf = UnionFind::new(star.len());
        for &tau in &self.simplices_above(s, n - 1) {
            // Every coface of a codim-1 simplex containing s lies in the
            // star of s; chain them together.
            let cf = &self.cofaces[n - 1][tau];
            for w in cf.windows(2) {
                if let (Some(&a), Some(&b)) = (pos.get(&w[0]), pos.get(&w[1])) {
                    uf.union(a, b);
                }
            }
        }
        let root = uf.find(0);
        (1..star.len()).all(|i| uf.find(i) == root)
    }

    /// Indices of `dim_up`-simplices containing `s`.
    pub(crate) fn simplices_above(&self, s: SimplexRef, dim_up: usize) -> Vec<usize> {
        assert!(dim_up >= s.dim);
        let mut cur = vec![s.idx];
        let mut d = s.dim;
        while d < dim_up {
            let mut next: Vec<usize> = Vec::new();
            for &i in &cur {
                next.extend_from_slice(&self.cofaces[d][i]);
            }
            next.sort_unstable();
            next.dedup();
            cur = next;
            d += 1;
        }
        cur
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, Vec::len)
    }

    pub fn simplex(&self, s: SimplexRef) -> &MetricSimplex {
        &self.simplices[s.dim][s.idx]
    }

    /// Look up a simplex index by its (sorted) vertex ids.
    pub fn simplex_ref(&self, vertices: &[u32]) -> Option<SimplexRef> {
        let mut v: Vec<VertexId> = vertices.iter().map(|&x| VertexId(x)).collect();
        v.sort_unstable();
        self.index.get(&v).copied()
    }

    fn simplex_index(&self, vertices: &[VertexId]) -> Option<usize> {
        let mut v = vertices.to_vec();
        v.sort_unstable();
        self.index.get(&v).map(|r| r.idx)
    }

    pub fn cofaces(&self, s: SimplexRef) -> &[usize] {
        &self.cofaces[s.dim][s.idx]
    }

    /// Facet indices of a simplex; entry `j` is opposite local vertex `j`.
    pub fn facets(&self, s: SimplexRef) -> &[usize] {
        &self.faces[s.dim][s.idx]
    }

    /// Maximal simplices containing `s`.
    pub fn star(&self, s: SimplexRef) -> &[usize] {
        &self.stars[s.dim][s.idx]
    }

    pub fn flags(&self) -> ComplexFlags {
        self.flags
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn sq_length(&self, a: u32, b: u32) -> Option<f64> {
        self.sq_lengths.get(&(a.min(b), a.max(b))).copied()
    }

    pub(crate) fn carrier_geometry(&self, max_idx: usize) -> &CarrierGeometry {
        &self.carriers[max_idx]
    }

    pub fn is_truncation_face(&self, codim1_idx: usize) -> bool {
        self.truncation.contains(&codim1_idx)
    }

    pub fn truncation_faces(&self) -> &HashSet<usize> {
        &self.truncation
    }

    pub(crate) fn mark_truncation(&mut self, codim1_idx: usize) {
        self.truncation.insert(codim1_idx);
    }

    pub(crate) fn set_backing(&mut self, backing: Backing) {
        self.backing = backing;
    }

    pub(crate) fn set_embedding(&mut self, per_vertex: Vec<[f64; 2]>) {
        assert_eq!(per_vertex.len(), self.simplices[0].len());
        self.embedding = Some(per_vertex);
    }

    pub(crate) fn set_origin_hint(&mut self, s: SimplexRef) {
        self.origin_hint = Some(s);
    }

    pub(crate) fn set_simply_connected(&mut self, v: bool) {
        self.simply_connected = Some(v);
    }

    /// Whether the complex is known to be simply connected (generators set
    /// this; loaded complexes leave it undetermined).
    pub fn simply_connected(&self) -> Option<bool> {
        self.simply_connected
    }

    /// Supply the simple-connectivity flag for a loaded complex; the
    /// classification requires it and cannot compute it in general.
    pub fn assume_simply_connected(&mut self, value: bool) {
        self.simply_connected = Some(value);
    }

    /// Generator-suggested start simplex for dual-graph walks: a central
    /// codimension-one simplex.
    pub fn origin_hint(&self) -> Option<SimplexRef> {
        self.origin_hint
    }

    /// Whether the complex carries a global flat embedding into the plane.
    pub fn has_embedding(&self) -> bool {
        self.embedding.is_some()
    }

    /// Embed a point into the plane when a global flat embedding exists.
    pub fn embed(&self, p: &Point) -> Option<[f64; 2]> {
        let emb = self.embedding.as_ref()?;
        let s = self.simplex(p.carrier);
        let mut x = [0.0; 2];
        for (b, v) in p.bary.iter().zip(s.vertices()) {
            let vi = self.simplex_index(&[*v]).unwrap();
            x[0] += b * emb[vi][0];
            x[1] += b * emb[vi][1];
        }
        Some(x)
    }

    /// Map a chart direction of a maximal carrier into the global plane
    /// embedding (an isometry when the embedding exists).
    pub fn embed_direction(&self, carrier: usize, dir: &[f64]) -> Option<[f64; 2]> {
        let emb = self.embedding.as_ref()?;
        let n = self.dimension;
        let s = &self.simplices[n][carrier];
        let at = |l: usize| {
            let vi = self.simplex_index(&[s.vertices()[l]]).unwrap();
            emb[vi]
        };
        // Solve chart edge vectors -> embedded edge vectors, apply to dir.
        let mut p = DMatrix::zeros(n, n);
        let mut e = DMatrix::zeros(2, n);
        let base = at(0);
        for c in 1..=n {
            for r in 0..n {
                p[(r, c - 1)] = s.chart[c][r] - s.chart[0][r];
            }
            let ec = at(c);
            e[(0, c - 1)] = ec[0] - base[0];
            e[(1, c - 1)] = ec[1] - base[1];
        }
        let pinv = linalg::invert(&p)?;
        let l = e * pinv;
        let mut out = [0.0; 2];
        for r in 0..2 {
            for c in 0..n {
                out[r] += l[(r, c)] * dir[c];
            }
        }
        Some(out)
    }

    /// Report of the boundaryless check: every codimension-one simplex with
    /// exactly one coface.
    pub fn check_boundaryless(&self) -> BoundaryReport {
        let n = self.dimension;
        let boundary: Vec<SimplexRef> = self.cofaces[n - 1]
            .iter()
            .enumerate()
            .filter(|(_, c)| c.len() == 1)
            .map(|(i, _)| SimplexRef { dim: n - 1, idx: i })
            .collect();
        BoundaryReport {
            boundaryless: boundary.is_empty(),
            boundary_simplices: boundary,
        }
    }

    /// Admissibility per the star-connectivity reduction.
    pub fn check_admissible(&self) -> bool {
        self.flags.admissible
    }

    /// Smallest simplex supporting a point: vertices with positive
    /// barycentric weight.
    pub fn support(&self, p: &Point) -> Result<SimplexRef, ComplexError> {
        const TOL: f64 = 1e-12;
        let sum: f64 = p.bary.iter().sum();
        if p.bary.len() != p.carrier.dim + 1
            || (sum - 1.0).abs() > 1e-9
            || p.bary.iter().any(|&b| b < -TOL)
        {
            return Err(ComplexError::PointOutside);
        }
        let s = self.simplex(p.carrier);
        let verts: Vec<VertexId> = p
            .bary
            .iter()
            .zip(s.vertices())
            .filter(|(b, _)| **b > TOL)
            .map(|(_, v)| *v)
            .collect();
        if verts.is_empty() {
            return Err(ComplexError::PointOutside);
        }
        self.index
            .get(&verts)
            .copied()
            .ok_or(ComplexError::PointOutside)
    }

    /// Express a point in the barycentric coordinates of a maximal simplex
    /// containing it. Returns the carrier index and the coordinates.
    pub fn to_maximal(&self, p: &Point) -> Result<(usize, Vec<f64>), ComplexError> {
        let n = self.dimension;
        if p.carrier.dim == n {
            return Ok((p.carrier.idx, p.bary.clone()));
        }
        let star = self.star(p.carrier);
        let &m = star.first().ok_or(ComplexError::PointOutside)?;
        Ok((m, self.lift_bary(p, m)))
    }

    /// Lift barycentric coordinates on a sub-simplex into a containing
    /// maximal simplex.
    pub(crate) fn lift_bary(&self, p: &Point, max_idx: usize) -> Vec<f64> {
        let n = self.dimension;
        let sub = self.simplex(p.carrier);
        let max = &self.simplices[n][max_idx];
        let mut bary = vec![0.0; n + 1];
        for (b, v) in p.bary.iter().zip(sub.vertices()) {
            let li = max.local_index(*v).expect("point carrier inside star");
            bary[li] += b;
        }
        bary
    }

    /// Intrinsic distance between two points when it is computable exactly:
    /// via the global flat embedding, along a one-complex, or within a
    /// shared maximal simplex.
    pub fn distance(&self, a: &Point, b: &Point) -> Option<f64> {
        if let (Some(pa), Some(pb)) = (self.embed(a), self.embed(b)) {
            let dx = pa[0] - pb[0];
            let dy = pa[1] - pb[1];
            return Some((dx * dx + dy * dy).sqrt());
        }
        if self.dimension == 1 {
            return self.graph_distance(a, b);
        }
        // Shared maximal carrier: the straight chart segment realizes the
        // distance inside one flat simplex.
        let sa = self.support(a).ok()?;
        let sb = self.support(b).ok()?;
        let star_a = self.star(sa);
        let common: Vec<usize> = self
            .star(sb)
            .iter()
            .copied()
            .filter(|m| star_a.contains(m))
            .collect();
        let mut best: Option<f64> = None;
        for m in common {
            let ba = self.lift_bary(&Point::new(sa, self.restrict_bary(a, sa)), m);
            let bb = self.lift_bary(&Point::new(sb, self.restrict_bary(b, sb)), m);
            let s = &self.simplices[self.dimension][m];
            let xa = s.chart_position(&ba);
            let xb = s.chart_position(&bb);
            let d = xa
                .iter()
                .zip(&xb)
                .map(|(p, q)| (p - q) * (p - q))
                .sum::<f64>()
                .sqrt();
            best = Some(best.map_or(d, |x: f64| x.min(d)));
        }
        best
    }

    fn restrict_bary(&self, p: &Point, sup: SimplexRef) -> Vec<f64> {
        let s = self.simplex(p.carrier);
        let target = self.simplex(sup);
        let mut out = vec![0.0; sup.dim + 1];
        for (b, v) in p.bary.iter().zip(s.vertices()) {
            if *b > 0.0 {
                let li = target.local_index(*v).expect("support vertex");
                out[li] += *b;
            }
        }
        out
    }

    /// Exact path distance along a one-dimensional complex (Dijkstra over
    /// vertices plus offsets within the carrier edges).
    fn graph_distance(&self, a: &Point, b: &Point) -> Option<f64> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        assert_eq!(self.dimension, 1);
        let nv = self.simplices[0].len();
        // Position of a point on an edge: (vertex index, offset) pairs.
        let ends = |p: &Point| -> Vec<(usize, f64)> {
            match p.carrier.dim {
                0 => vec![(p.carrier.idx, 0.0)],
                1 => {
                    let e = self.simplex(p.carrier);
                    let len = e.sq_length(0, 1).sqrt();
                    let v0 = self.simplex_index(&[e.vertices[0]]).unwrap();
                    let v1 = self.simplex_index(&[e.vertices[1]]).unwrap();
                    vec![(v0, p.bary[1] * len), (v1, p.bary[0] * len)]
                }
                _ => unreachable!("dimension 1"),
            }
        };
        let starts = ends(a);
        let goals = ends(b);
        // Same edge: direct offset.
        if a.carrier.dim == 1 && b.carrier.dim == 1 && a.carrier.idx == b.carrier.idx {
            let e = self.simplex(a.carrier);
            let len = e.sq_length(0, 1).sqrt();
            return Some(((a.bary[1] - b.bary[1]) * len).abs());
        }
        let mut dist = vec![f64::INFINITY; nv];
        let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
        for &(v, off) in &starts {
            if off < dist[v] {
                dist[v] = off;
                heap.push(Reverse((OrdF64(off), v)));
            }
        }
        while let Some(Reverse((OrdF64(d), v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &e in &self.cofaces[0][v] {
                let edge = &self.simplices[1][e];
                let len = edge.sq_length(0, 1).sqrt();
                let v0 = self.simplex_index(&[edge.vertices[0]]).unwrap();
                let v1 = self.simplex_index(&[edge.vertices[1]]).unwrap();
                let w = if v0 == v { v1 } else { v0 };
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Reverse((OrdF64(nd), w)));
                }
            }
        }
        let mut best = f64::INFINITY;
        for &(v, off) in &goals {
            best = best.min(dist[v] + off);
        }
        best.is_finite().then_some(best)
    }
}

/// Result of [`Complex::check_boundaryless`].
#[derive(Clone, Debug)]
pub struct BoundaryReport {
    pub boundaryless: bool,
    pub boundary_simplices: Vec<SimplexRef>,
}

#[derive(Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}
