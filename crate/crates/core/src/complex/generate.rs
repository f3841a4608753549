//! Standard test complexes, materialized to a finite combinatorial radius
//! with the truncation frontier marked absorbing.
//!
//! * `plane`: equilateral triangulation of the flat plane, truncated at a
//!   ring count around the center vertex; globally embedded.
//! * `fan`: m unit equilateral triangles sharing one spine edge. `fan:2` is
//!   the flat rhombus and carries an embedding.
//! * `book`: the branching complex in which every interior edge has exactly
//!   m triangle cofaces, grown breadth-first from a base edge. Gluing is
//!   tree-like (each new triangle attaches along a single edge with a fresh
//!   apex), so the complex is simply connected and every vertex link is a
//!   tree.
//! * `tree`: the d-regular tree with unit edges.
//! * `line`: the integer line with unit edges.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{Backing, Complex, ComplexBuildInput, ComplexError, SimplexRef};

/// Cap on the number of simplices a generator may materialize.
pub const SIMPLEX_BUDGET: usize = 4_000_000;

/// Which standard complex to build.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// Triangulated flat plane with the given number of rings.
    Plane { rings: usize },
    /// m triangles sharing a spine edge.
    Fan { m: usize },
    /// Every interior edge has exactly m cofaces; faces materialized to the
    /// given breadth-first generation count.
    Book { m: usize, radius: usize },
    /// d-regular tree of the given radius.
    Tree { degree: usize, radius: usize },
    /// Integer line segment [-radius, radius].
    Line { radius: usize },
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Plane { rings } => write!(f, "plane:{rings}"),
            GeneratorSpec::Fan { m } => write!(f, "fan:{m}"),
            GeneratorSpec::Book { m, radius } => write!(f, "book:{m}:{radius}"),
            GeneratorSpec::Tree { degree, radius } => write!(f, "tree:{degree}:{radius}"),
            GeneratorSpec::Line { radius } => write!(f, "line:{radius}"),
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = ComplexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || ComplexError::Parse(format!("bad generator spec {s:?}"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["plane", r] => Ok(GeneratorSpec::Plane { rings: num(r)? }),
            ["fan", m] => Ok(GeneratorSpec::Fan { m: num(m)? }),
            ["book", m] => Ok(GeneratorSpec::Book {
                m: num(m)?,
                radius: 4,
            }),
            ["book", m, r] => Ok(GeneratorSpec::Book {
                m: num(m)?,
                radius: num(r)?,
            }),
            ["tree", d] => Ok(GeneratorSpec::Tree {
                degree: num(d)?,
                radius: 12,
            }),
            ["tree", d, r] => Ok(GeneratorSpec::Tree {
                degree: num(d)?,
                radius: num(r)?,
            }),
            ["line", r] => Ok(GeneratorSpec::Line { radius: num(r)? }),
            _ => Err(bad()),
        }
    }
}

/// Materialize a standard complex.
pub fn generate(spec: &GeneratorSpec) -> Result<Complex, ComplexError> {
    let mut complex = match spec {
        GeneratorSpec::Plane { rings } => plane(*rings)?,
        GeneratorSpec::Fan { m } => fan(*m)?,
        GeneratorSpec::Book { m, radius } => book(*m, *radius)?,
        GeneratorSpec::Tree { degree, radius } => tree(*degree, *radius)?,
        GeneratorSpec::Line { radius } => line(*radius)?,
    };
    let radius = match spec {
        GeneratorSpec::Plane { rings } => *rings,
        GeneratorSpec::Fan { .. } => 1,
        GeneratorSpec::Book { radius, .. } => *radius,
        GeneratorSpec::Tree { radius, .. } => *radius,
        GeneratorSpec::Line { radius } => *radius,
    };
    complex.set_backing(Backing::Generated {
        spec: spec.to_string(),
        radius,
    });
    Ok(complex)
}

impl Complex {
    /// Convenience wrapper around [`generate`].
    pub fn generate(spec: &GeneratorSpec) -> Result<Complex, ComplexError> {
        generate(spec)
    }
}

fn check_budget(estimate: usize) -> Result<(), ComplexError> {
    if estimate > SIMPLEX_BUDGET {
        return Err(ComplexError::TooLarge(estimate, SIMPLEX_BUDGET));
    }
    Ok(())
}

fn hexdist(a: i64, b: i64) -> i64 {
    (a.abs() + b.abs() + (a + b).abs()) / 2
}

fn plane(rings: usize) -> Result<Complex, ComplexError> {
    if rings == 0 {
        return Err(ComplexError::Parse("plane needs at least one ring".into()));
    }
    let r = rings as i64;
    let nv_est = 1 + 3 * rings * (rings + 1);
    check_budget(nv_est * 7)?;

    let mut coords: Vec<(i64, i64)> = Vec::with_capacity(nv_est);
    for a in -r..=r {
        for b in -r..=r {
            if hexdist(a, b) <= r {
                coords.push((a, b));
            }
        }
    }
    coords.sort_unstable();
    let id_of: std::collections::HashMap<(i64, i64), u32> = coords
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i as u32))
        .collect();

    let mut faces: Vec<Vec<u32>> = Vec::new();
    let mut push_face = |x: (i64, i64), y: (i64, i64), z: (i64, i64)| {
        if let (Some(&a), Some(&b), Some(&c)) = (id_of.get(&x), id_of.get(&y), id_of.get(&z)) {
            faces.push(vec![a, b, c]);
        }
    };
    // Anchors one step outside the ball can still contribute a face whose
    // corners all lie inside.
    for a in (-r - 1)..=r {
        for b in (-r - 1)..=r {
            push_face((a, b), (a + 1, b), (a, b + 1));
            push_face((a + 1, b), (a, b + 1), (a + 1, b + 1));
        }
    }

    let vertices: Vec<u32> = (0..coords.len() as u32).collect();
    let mut lengths = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for f in &faces {
        for i in 0..3 {
            for j in (i + 1)..3 {
                let key = (f[i].min(f[j]), f[i].max(f[j]));
                if seen.insert(key) {
                    lengths.push((key.0, key.1, 1.0));
                }
            }
        }
    }
    let mut input = ComplexBuildInput {
        dimension: 2,
        vertices,
        simplices_by_dim: BTreeMap::new(),
        sq_edge_lengths: lengths,
    };
    input.simplices_by_dim.insert(2, faces);
    let mut c = Complex::build(input)?;

    mark_single_coface_truncation(&mut c);
    let embed: Vec<[f64; 2]> = coords
        .iter()
        .map(|&(a, b)| {
            [
                a as f64 + 0.5 * b as f64,
                b as f64 * 3f64.sqrt() / 2.0,
            ]
        })
        .collect();
    c.set_embedding(embed);
    let center = id_of[&(0, 0)];
    let right = id_of[&(1, 0)];
    c.set_origin_hint(c.simplex_ref(&[center, right]).expect("center edge"));
    c.set_simply_connected(true);
    Ok(c)
}

fn fan(m: usize) -> Result<Complex, ComplexError> {
    if m == 0 {
        return Err(ComplexError::Parse("fan needs at least one face".into()));
    }
    check_budget(m * 8)?;
    let mut faces = Vec::with_capacity(m);
    let mut lengths = vec![(0u32, 1u32, 1.0f64)];
    for k in 0..m {
        let apex = (k + 2) as u32;
        faces.push(vec![0, 1, apex]);
        lengths.push((0, apex, 1.0));
        lengths.push((1, apex, 1.0));
    }
    let mut input = ComplexBuildInput {
        dimension: 2,
        vertices: (0..(m + 2) as u32).collect(),
        simplices_by_dim: BTreeMap::new(),
        sq_edge_lengths: lengths,
    };
    input.simplices_by_dim.insert(2, faces);
    let mut c = Complex::build(input)?;
    if m == 2 {
        // The rhombus is globally flat: spine on the x axis, apexes above
        // and below.
        let h = 3f64.sqrt() / 2.0;
        c.set_embedding(vec![[0.0, 0.0], [1.0, 0.0], [0.5, h], [0.5, -h]]);
    }
    c.set_origin_hint(c.simplex_ref(&[0, 1]).expect("spine"));
    c.set_simply_connected(true);
    Ok(c)
}

fn book(m: usize, radius: usize) -> Result<Complex, ComplexError> {
    if m < 2 {
        return Err(ComplexError::Parse(
            "book needs at least two faces per edge".into(),
        ));
    }
    if radius == 0 {
        return Err(ComplexError::Parse("book needs radius >= 1".into()));
    }
    // Faces per generation grow by a factor 2(m-1).
    let mut est: usize = 1;
    let mut gen_faces = m;
    for _ in 0..radius {
        est = est.saturating_add(gen_faces * 8);
        gen_faces = gen_faces.saturating_mul(2 * (m - 1));
        check_budget(est)?;
    }

    let mut next_vertex: u32 = 2;
    let mut faces: Vec<Vec<u32>> = Vec::new();
    let mut lengths: Vec<(u32, u32, f64)> = vec![(0, 1, 1.0)];
    //

    // Frontier edges still missing cofaces: (vertex pair, cofaces so far).
    let mut frontier: Vec<((u32, u32), usize)> = vec![((0, 1), 0)];
    for _ in 0..radius {
        let mut next_frontier = Vec::new();
        for ((u, w), have) in frontier {
            for _ in have..m {
                let apex = next_vertex;
                next_vertex += 1;
                faces.push(vec![u, w, apex]);
                lengths.push((u.min(apex), u.max(apex), 1.0));
                lengths.push((w.min(apex), w.max(apex), 1.0));
                next_frontier.push(((u.min(apex), u.max(apex)), 1));
                next_frontier.push(((w.min(apex), w.max(apex)), 1));
            }
        }
        frontier = next_frontier;
    }

    let mut input = ComplexBuildInput {
        dimension: 2,
        vertices: (0..next_vertex).collect(),
        simplices_by_dim: BTreeMap::new(),
        sq_edge_lengths: lengths,
    };
    input.simplices_by_dim.insert(2, faces);
    let mut c = Complex::build(input)?;
    for ((u, w), _) in frontier {
        let s = c.simplex_ref(&[u, w]).expect("frontier edge");
        c.mark_truncation(s.idx);
    }
    c.set_origin_hint(c.simplex_ref(&[0, 1]).expect("base edge"));
    c.set_simply_connected(true);
    Ok(c)
}

fn tree(degree: usize, radius: usize) -> Result<Complex, ComplexError> {
    if degree < 2 || radius == 0 {
        return Err(ComplexError::Parse(
            "tree needs degree >= 2 and radius >= 1".into(),
        ));
    }
    let mut est: usize = 1;
    let mut layer = degree;
    for _ in 0..radius {
        est = est.saturating_add(layer * 2);
        layer = layer.saturating_mul(degree - 1);
        check_budget(est)?;
    }

    let mut next_vertex: u32 = 1;
    let mut edges: Vec<Vec<u32>> = Vec::new();
    let mut frontier: Vec<u32> = vec![0];
    let mut leaves: Vec<u32> = Vec::new();
    for depth in 0..radius {
        let mut next_frontier = Vec::new();
        for v in frontier {
            let children = if depth == 0 { degree } else { degree - 1 };
            for _ in 0..children {
                let w = next_vertex;
                next_vertex += 1;
                edges.push(vec![v, w]);
                next_frontier.push(w);
            }
        }
        frontier = next_frontier;
    }
    leaves.extend(frontier);

    let lengths: Vec<(u32, u32, f64)> =
        edges.iter().map(|e| (e[0], e[1], 1.0)).collect();
    let mut input = ComplexBuildInput {
        dimension: 1,
        vertices: (0..next_vertex).collect(),
        simplices_by_dim: BTreeMap::new(),
        sq_edge_lengths: lengths,
    };
    input.simplices_by_dim.insert(1, edges);
    let mut c = Complex::build(input)?;
    for v in leaves {
        let s = c.simplex_ref(&[v]).expect("leaf");
        c.mark_truncation(s.idx);
    }
    c.set_origin_hint(c.simplex_ref(&[0]).expect("root"));
    c.set_simply_connected(true);
    Ok(c)
}

fn line(radius: usize) -> Result<Complex, ComplexError> {
    if radius == 0 {
        return Err(ComplexError::Parse("line needs radius >= 1".into()));
    }
    let nv = 2 * radius + 1;
    check_budget(nv * 2)?;
    let edges: Vec<Vec<u32>> = (0..nv as u32 - 1).map(|i| vec![i, i + 1]).collect();
    let lengths: Vec<(u32, u32, f64)> =
        edges.iter().map(|e| (e[0], e[1], 1.0)).collect();
    let mut input = ComplexBuildInput {
        dimension: 1,
        vertices: (0..nv as u32).collect(),
        simplices_by_dim: BTreeMap::new(),
        sq_edge_lengths: lengths,
    };
    input.simplices_by_dim.insert(1, edges);
    let mut c = Complex::build(input)?;
    for v in [0u32, (nv - 1) as u32] {
        let s = c.simplex_ref(&[v]).expect("endpoint");
        c.mark_truncation(s.idx);
    }
    let emb: Vec<[f64; 2]> = (0..nv)
        .map(|i| [i as f64 - radius as f64, 0.0])
        .collect();
    c.set_embedding(emb);
    c.set_origin_hint(c.simplex_ref(&[radius as u32]).expect("center"));
    c.set_simply_connected(true);
    Ok(c)
}

fn mark_single_coface_truncation(c: &mut Complex) {
    let n = c.dimension();
    let marks: Vec<usize> = (0..c.count(n - 1))
        .filter(|&i| c.cofaces(SimplexRef { dim: n - 1, idx: i }).len() == 1)
        .collect();
    for i in marks {
        c.mark_truncation(i);
    }
}

/// Ring count needed so a ball of chart radius `reach` around the center of
/// a generated plane stays clear of the truncation ring, with a ten percent
/// margin. The inradius of the ring-r hexagon is r * sqrt(3)/2.
pub fn plane_rings_for_reach(reach: f64) -> usize {
    let needed = (reach * 1.1) / (3f64.sqrt() / 2.0);
    needed.ceil() as usize + 1
}
