//! Links of points and the CAT(0) link condition for two-complexes.
//!
//! Interior points of maximal simplices see a full unit sphere, interior
//! points of codimension-one simplices see one hemisphere per coface, and
//! vertices of two-complexes see a metric graph whose nodes are the
//! incident edges and whose arcs carry the interior angles of the incident
//! faces. The link condition requires every simple loop in that graph to
//! have length at least 2*pi.

use std::collections::HashMap;

use super::{Complex, ComplexError, Point, SimplexRef, VertexId};

/// Arc of a vertex link graph: the interior angle of `face` at the vertex,
/// connecting its two incident edges.
#[derive(Clone, Debug)]
pub struct LinkArc {
    pub a: usize,
    pub b: usize,
    pub face: SimplexRef,
    pub length: f64,
}

/// Metric graph of unit directions at a vertex of a two-complex.
#[derive(Clone, Debug)]
pub struct LinkGraph {
    pub vertex: VertexId,
    /// Edges of the complex incident to the vertex.
    pub nodes: Vec<SimplexRef>,
    pub arcs: Vec<LinkArc>,
}

impl LinkGraph {
    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }

    /// Length of the shortest simple loop, if any loop exists.
    ///
    /// Computed as the girth of the metric multigraph: for every arc,
    /// the shortest path between its endpoints avoiding that arc, plus the
    /// arc itself. Positive arc lengths make the optimum simple.
    pub fn shortest_loop(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (skip, arc) in self.arcs.iter().enumerate() {
            let d = self.shortest_path(arc.a, arc.b, skip);
            if let Some(d) = d {
                let loop_len = d + arc.length;
                best = Some(best.map_or(loop_len, |b: f64| b.min(loop_len)));
            }
        }
        best
    }

    fn shortest_path(&self, from: usize, to: usize, skip_arc: usize) -> Option<f64> {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.nodes.len()];
        for (i, arc) in self.arcs.iter().enumerate() {
            if i == skip_arc {
                continue;
            }
            adj[arc.a].push((arc.b, arc.length));
            adj[arc.b].push((arc.a, arc.length));
        }
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        dist[from] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((super::OrdF64(0.0), from)));
        while let Some(Reverse((super::OrdF64(d), v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if v == to {
                return Some(d);
            }
            for &(w, len) in &adj[v] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Reverse((super::OrdF64(nd), w)));
                }
            }
        }
        None
    }
}

/// Link of a point, by the class of its support.
#[derive(Clone, Debug)]
pub enum LinkStructure {
    /// Interior of a maximal simplex: one full unit sphere.
    FullSphere { carrier: usize, dim: usize },
    /// Interior of a codimension-one simplex: one hemisphere per coface.
    Hemispheres {
        face: usize,
        cofaces: Vec<usize>,
        carrier_dim: usize,
    },
    /// Vertex of a two-complex: the angle graph.
    VertexGraph(LinkGraph),
}

impl LinkStructure {
    /// Total measure of the link: sphere surface for interior points,
    /// hemisphere count times hemisphere measure for codim-1 points, and
    /// total arc length for vertex graphs.
    pub fn total_measure(&self) -> f64 {
        match self {
            LinkStructure::FullSphere { dim, .. } => sphere_measure(*dim),
            LinkStructure::Hemispheres {
                cofaces,
                carrier_dim,
                ..
            } => cofaces.len() as f64 * 0.5 * sphere_measure(*carrier_dim),
            LinkStructure::VertexGraph(g) => g.total_length(),
        }
    }
}

/// Surface measure of the unit sphere in `dim`-dimensional chart space;
/// `dim == 1` gives the two-point sphere counting measure 2.
fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => {
            let d = dim as f64;
            2.0 * std::f64::consts::PI.powf(d / 2.0) / gamma_half(dim)
        }
    }
}

fn gamma_half(dim: usize) -> f64 {
    // Gamma(dim/2) for integer dim >= 1.
    let mut x = dim as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.5 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 1.0).abs() < 1e-12 {
        acc
    } else {
        acc * std::f64::consts::PI.sqrt()
    }
}

/// Report of the CAT(0) link condition check.
#[derive(Clone, Debug)]
pub struct Cat0Report {
    pub cat0: bool,
    /// Per vertex: shortest simple link loop, when one exists.
    pub vertex_loops: Vec<(VertexId, Option<f64>)>,
    /// Vertices whose shortest loop falls below 2*pi, with the loop length.
    pub violations: Vec<(VertexId, f64)>,
}

impl Complex {
    /// Link of a point: a full sphere in the interior of a maximal simplex,
    /// hemispheres over an interior point of a codimension-one simplex, or
    /// the angle graph at a vertex of a two-complex.
    pub fn link_at(&self, p: &Point) -> Result<LinkStructure, ComplexError> {
        let n = self.dimension();
        let support = self.support(p)?;
        if support.dim == n {
            return Ok(LinkStructure::FullSphere {
                carrier: support.idx,
                dim: n,
            });
        }
        if support.dim == n - 1 {
            return Ok(LinkStructure::Hemispheres {
                face: support.idx,
                cofaces: self.cofaces(support).to_vec(),
                carrier_dim: n,
            });
        }
        if support.dim == 0 && n == 2 {
            return Ok(LinkStructure::VertexGraph(self.vertex_link(support.idx)));
        }
        Err(ComplexError::UnsupportedDimension(n))
    }

    /// Angle graph at a vertex of a two-complex.
    pub(crate) fn vertex_link(&self, vertex_idx: usize) -> LinkGraph {
        assert_eq!(self.dimension(), 2);
        let vref = SimplexRef { dim: 0, idx: vertex_idx };
        let vid = self.simplex(vref).vertices()[0];
        let edges = self.cofaces(vref);
        let node_pos: HashMap<usize, usize> =
            edges.iter().enumerate().map(|(p, &e)| (e, p)).collect();
        let nodes: Vec<SimplexRef> = edges
            .iter()
            .map(|&e| SimplexRef { dim: 1, idx: e })
            .collect();
        let mut arcs = Vec::new();
        for &f in &self.simplices_above(vref, 2) {
            let fref = SimplexRef { dim: 2, idx: f };
            let tri = self.simplex(fref);
            let local = tri
                .vertices()
                .iter()
                .position(|&w| w == vid)
                .expect("vertex in own star");
            // The two edges of the face at the vertex are the facets not
            // opposite it.
            let facets = self.facets(fref);
            let mut at_vertex = (0..3).filter(|&j| j != local);
            let e1 = facets[at_vertex.next().unwrap()];
            let e2 = facets[at_vertex.next().unwrap()];
            arcs.push(LinkArc {
                a: node_pos[&e1],
                b: node_pos[&e2],
                face: fref,
                length: interior_angle(tri, local),
            });
        }
        LinkGraph {
            vertex: vid,
            nodes,
            arcs,
        }
    }

    /// CAT(0) link condition for complexes of dimension at most two: every
    /// simple loop in every vertex link has length at least 2*pi. Flat
    /// faces and straight edges satisfy the other curvature conditions
    /// automatically. One-dimensional complexes have discrete links and
    /// pass trivially.
    pub fn check_cat0(&self) -> Result<Cat0Report, ComplexError> {
        let n = self.dimension();
        if n > 2 {
            return Err(ComplexError::UnsupportedDimension(n));
        }
        if n < 2 {
            return Ok(Cat0Report {
                cat0: true,
                vertex_loops: Vec::new(),
                violations: Vec::new(),
            });
        }
        const TOL: f64 = 1e-9;
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut vertex_loops = Vec::new();
        let mut violations = Vec::new();
        for vi in 0..self.count(0) {
            let link = self.vertex_link(vi);
            let shortest = link.shortest_loop();
            vertex_loops.push((link.vertex, shortest));
            if let Some(len) = shortest {
                if len < two_pi - TOL {
                    violations.push((link.vertex, len));
                }
            }
        }
        Ok(Cat0Report {
            cat0: violations.is_empty(),
            vertex_loops,
            violations,
        })
    }
}

/// Interior angle of a flat triangle at local vertex `local`, from squared
/// edge lengths via the law of cosines.
pub(crate) fn interior_angle(tri: &super::MetricSimplex, local: usize) -> f64 {
    let others: Vec<usize> = (0..3).filter(|&j| j != local).collect();
    let b2 = tri.sq_length(local, others[0]);
    let c2 = tri.sq_length(local, others[1]);
    let a2 = tri.sq_length(others[0], others[1]);
    let cos = (b2 + c2 - a2) / (2.0 * (b2 * c2).sqrt());
    cos.clamp(-1.0, 1.0).acos()
}
