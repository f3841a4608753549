//! Emission of data files and reports.
//!
//! CSV schemas:
//!   * trajectory log: `path_id,event_index,kind,time,carrier_simplex,bary_0..bary_n`
//!     (renewal rows carry the chain states, including the initial draw);
//!   * finite-dimensional dumps: `path_id,t_index,t,carrier_simplex,bary_0..bary_n[,x,y]`
//!     with the embedded coordinates appended when the complex has a global
//!     flat embedding; cemetery rows write `D` for the carrier;
//!   * resistance: `r,R_eff,increment`.
//!
//! The dual-graph dump is an edge list `u v` with a header naming the two
//! vertex classes. Every writer is deterministic: identical inputs yield
//! byte-identical text.

use std::fmt::Write as _;

use crate::complex::Complex;
use crate::dual::{DualGraph, ResistanceShell};
use crate::scaling::EmpiricalFdd;
use crate::transport::PathSample;

fn kind_name(kind: crate::geodesic::FlowEventKind) -> &'static str {
    use crate::geodesic::FlowEventKind::*;
    match kind {
        Segment => "segment",
        Crossing => "crossing",
        SkeletonHit => "skeleton_hit",
        Absorbed => "absorbed",
    }
}

/// Trajectory event log for a batch of paths.
pub fn paths_csv(c: &Complex, paths: &[PathSample]) -> String {
    let n = c.dimension();
    let mut out = String::from("path_id,event_index,kind,time,carrier_simplex");
    for i in 0..=n {
        let _ = write!(out, ",bary_{i}");
    }
    out.push('\n');
    for (pid, path) in paths.iter().enumerate() {
        // Merge chain states (as renewal rows) and flow events by time.
        let mut rows: Vec<(f64, u8, String, usize, Vec<f64>)> = Vec::new();
        for s in &path.states {
            rows.push((s.tau, 0, "renewal".to_string(), s.z.carrier, s.z.bary.clone()));
        }
        for e in &path.events {
            rows.push((
                e.time,
                1,
                kind_name(e.kind).to_string(),
                e.carrier,
                e.bary.clone(),
            ));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (idx, (time, _, kind, carrier, bary)) in rows.iter().enumerate() {
            let _ = write!(out, "{pid},{idx},{kind},{time},{carrier}");
            for b in bary {
                let _ = write!(out, ",{b}");
            }
            out.push('\n');
        }
    }
    out
}

/// Finite-dimensional distribution dump.
pub fn fdd_csv(c: &Complex, fdd: &EmpiricalFdd) -> String {
    let n = c.dimension();
    let embedded = c.has_embedding();
    let mut out = String::from("path_id,t_index,t,carrier_simplex");
    for i in 0..=n {
        let _ = write!(out, ",bary_{i}");
    }
    if embedded {
        out.push_str(",x,y");
    }
    out.push('\n');
    for (pid, tuple) in fdd.samples.iter().enumerate() {
        for (ti, (t, pos)) in fdd.times.iter().zip(tuple).enumerate() {
            match pos {
                Some(p) => {
                    let _ = write!(out, "{pid},{ti},{t},{}", p.carrier.idx);
                    for b in &p.bary {
                        let _ = write!(out, ",{b}");
                    }
                    if embedded {
                        let e = c.embed(p).expect("embedding present");
                        let _ = write!(out, ",{},{}", e[0], e[1]);
                    }
                }
                None => {
                    let _ = write!(out, "{pid},{ti},{t},D");
                    for _ in 0..=n {
                        out.push(',');
                    }
                    if embedded {
                        out.push_str(",,");
                    }
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Effective-resistance report.
pub fn resistance_csv(shells: &[ResistanceShell]) -> String {
    let mut out = String::from("r,R_eff,increment\n");
    for s in shells {
        let _ = writeln!(out, "{},{},{}", s.r, s.r_eff, s.increment);
    }
    out
}

/// Dual-graph edge list: top vertices are `t<i>` (maximal simplices), face
/// vertices are `f<j>` (codimension-one simplices).
pub fn dual_edges_text(g: &DualGraph) -> String {
    let mut out = String::from(
        "# dual graph: t<i> = maximal simplex vertices, f<j> = codimension-one simplex vertices\n",
    );
    for z in 0..g.v_top_count() {
        for &x in g.top_faces(z) {
            let _ = writeln!(out, "t{z} f{x}");
        }
    }
    out
}
