//! The complex-definition document.
//!
//! JSON with fields, in writer order: `version`, `dimension`, `vertices`,
//! `simplices` (map dimension -> vertex-id lists), `sq_edge_lengths`
//! (triples `[a, b, value]`), `boundary_policy`. The reader accepts keys in
//! any order; the writer emits them exactly in that order with sorted,
//! canonical contents so identical complexes serialize identically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Complex, ComplexBuildInput, ComplexError};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexDocument {
    pub version: u32,
    pub dimension: usize,
    pub vertices: Vec<u32>,
    pub simplices: BTreeMap<String, Vec<Vec<u32>>>,
    pub sq_edge_lengths: Vec<(u32, u32, f64)>,
    pub boundary_policy: String,
}

impl ComplexDocument {
    pub fn from_json(text: &str) -> Result<Self, ComplexError> {
        serde_json::from_str(text).map_err(|e| ComplexError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn into_build_input(self) -> Result<ComplexBuildInput, ComplexError> {
        if self.version != 1 {
            return Err(ComplexError::Version(self.version));
        }
        if self.boundary_policy != "absorbing" {
            return Err(ComplexError::BoundaryPolicy(self.boundary_policy));
        }
        let mut simplices_by_dim = BTreeMap::new();
        for (k, v) in self.simplices {
            let d: usize = k
                .parse()
                .map_err(|_| ComplexError::Parse(format!("bad simplex dimension key {k:?}")))?;
            simplices_by_dim.insert(d, v);
        }
        Ok(ComplexBuildInput {
            dimension: self.dimension,
            vertices: self.vertices,
            simplices_by_dim,
            sq_edge_lengths: self.sq_edge_lengths,
        })
    }
}

impl Complex {
    /// Parse and validate a complex-definition document.
    pub fn load(text: &str) -> Result<Complex, ComplexError> {
        Complex::build(ComplexDocument::from_json(text)?.into_build_input()?)
    }

    /// Emit the canonical document for this complex (all dimensions listed,
    /// everything sorted).
    pub fn to_document(&self) -> ComplexDocument {
        let mut vertices: Vec<u32> = self
            .simplex_iter(0)
            .map(|s| s.vertices()[0].0)
            .collect();
        vertices.sort_unstable();
        let mut simplices = BTreeMap::new();
        for d in 1..=self.dimension() {
            let mut list: Vec<Vec<u32>> = self
                .simplex_iter(d)
                .map(|s| s.vertices().iter().map(|v| v.0).collect())
                .collect();
            list.sort();
            simplices.insert(d.to_string(), list);
        }
        let mut sq_edge_lengths: Vec<(u32, u32, f64)> = self
            .simplex_iter(1)
            .map(|e| {
                let a = e.vertices()[0].0;
                let b = e.vertices()[1].0;
                (a, b, e.sq_length(0, 1))
            })
            .collect();
        sq_edge_lengths.sort_by_key(|x| (x.0, x.1));
        ComplexDocument {
            version: 1,
            dimension: self.dimension(),
            vertices,
            simplices,
            sq_edge_lengths,
            boundary_policy: "absorbing".to_string(),
        }
    }

    fn simplex_iter(&self, dim: usize) -> impl Iterator<Item = &super::MetricSimplex> {
        (0..self.count(dim)).map(move |i| self.simplex(super::SimplexRef { dim, idx: i }))
    }
}
