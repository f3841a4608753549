use super::*;
use crate::complex::GeneratorSpec;
use crate::rng::path_rng;
use crate::stats;

fn fan(m: usize) -> Complex {
    Complex::generate(&GeneratorSpec::Fan { m }).unwrap()
}

fn max_ref(c: &Complex, idx: usize) -> SimplexRef {
    SimplexRef {
        dim: c.dimension(),
        idx,
    }
}

/// Phase at the centroid of carrier 0 aiming at the given barycentric
/// target within the same carrier.
fn centroid_phase_toward(c: &Complex, carrier: usize, target_bary: &[f64]) -> PhasePoint {
    let n = c.dimension();
    let s = c.simplex(max_ref(c, carrier));
    let centroid = vec![1.0 / (n as f64 + 1.0); n + 1];
    let from = s.chart_position(&centroid);
    let to = s.chart_position(target_bary);
    let mut dir: Vec<f64> = to.iter().zip(&from).map(|(a, b)| a - b).collect();
    linalg::normalize(&mut dir);
    PhasePoint {
        carrier,
        bary: centroid,
        dir,
    }
}

#[test]
fn advance_hits_edge_midpoint_at_inradius() {
    let c = fan(1);
    // Aim from the centroid at the midpoint of the facet opposite local
    // vertex 2, i.e. barycentric (1/2, 1/2, 0).
    let mut p = centroid_phase_toward(&c, 0, &[0.5, 0.5, 0.0]);
    match advance_in_simplex(&c, &mut p, 10.0, 1.0) {
        Advance::Hit { hit, consumed } => {
            let inradius = 1.0 / (2.0 * 3f64.sqrt());
            assert!((consumed - inradius).abs() < 1e-12, "consumed {consumed}");
            assert!((hit.cos_theta - 1.0).abs() < 1e-12);
            assert!(hit.face_bary.iter().all(|b| (b - 0.5).abs() < 1e-9));
        }
        other => panic!("expected hit, got {other:?}"),
    }
}

#[test]
fn advance_respects_budget() {
    let c = fan(1);
    let mut p = centroid_phase_toward(&c, 0, &[0.5, 0.5, 0.0]);
    let start = p.chart_position(&c);
    match advance_in_simplex(&c, &mut p, 0.1, 1.0) {
        Advance::Interior { consumed } => {
            assert_eq!(consumed, 0.1);
            let end = p.chart_position(&c);
            let moved: f64 = start
                .iter()
                .zip(&end)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!((moved - 0.1).abs() < 1e-12);
        }
        other => panic!("expected interior, got {other:?}"),
    }
}

#[test]
fn advance_into_vertex_is_skeleton_hit() {
    let c = fan(1);
    let mut p = centroid_phase_toward(&c, 0, &[0.0, 0.0, 1.0]);
    match advance_in_simplex(&c, &mut p, 10.0, 1.0) {
        Advance::Skeleton { consumed } => {
            assert!(consumed > 0.0);
            assert!(p.bary.iter().all(|&b| b >= 0.0));
            assert!(p.bary[2] < 1.0);
        }
        other => panic!("expected skeleton hit, got {other:?}"),
    }
}

#[test]
fn perpendicular_crossing_takes_inward_normal_with_uniform_branch() {
    let c = fan(3);
    let spine = c.simplex_ref(&[0, 1]).unwrap();
    let hit = FaceHit {
        face: spine,
        face_bary: vec![0.5, 0.5],
        incoming: 0,
        tangential: vec![0.0],
        cos_theta: 1.0,
    };
    let mut rng = path_rng(17, 0);
    let mut counts = [0usize; 3];
    let n_trials = 100_000;
    for _ in 0..n_trials {
        match cross_face(&c, &hit, BranchRule::ExcludeIncoming, &mut rng) {
            Crossing::Entered(p) => {
                assert_ne!(p.carrier, 0, "incoming branch excluded");
                counts[p.carrier] += 1;
                // Outgoing direction is the inward normal of the target.
                let geom = c.carrier_geometry(p.carrier);
                let facet = geom.facets.iter().find(|f| f.face == spine.idx).unwrap();
                for (d, nu) in p.dir.iter().zip(&facet.normal_in) {
                    assert!((d - nu).abs() < 1e-12);
                }
            }
            Crossing::Absorbed => panic!("spine has three cofaces"),
        }
    }
    // Each of the two admissible branches at frequency 1/2 within 3 sigma.
    let p = 0.5f64;
    let sigma = (p * (1.0 - p) / n_trials as f64).sqrt();
    for &count in &counts[1..] {
        let freq = count as f64 / n_trials as f64;
        assert!((freq - 0.5).abs() < 3.0 * sigma, "freq {freq}");
    }
}

#[test]
fn rhombus_crossing_continues_straight() {
    let c = fan(2);
    let mut rng = path_rng(5, 0);
    // From inside face 0, aim across the spine with an oblique angle.
    let start = PhasePoint {
        carrier: 0,
        bary: vec![0.4, 0.35, 0.25],
        dir: Vec::new(),
    };
    let s = c.simplex(max_ref(&c, 0));
    let from = s.chart_position(&start.bary);
    let target = s.chart_position(&[0.55, 0.45, 0.0]);
    let mut dir: Vec<f64> = target.iter().zip(&from).map(|(a, b)| a - b).collect();
    linalg::normalize(&mut dir);
    let start = PhasePoint { dir, ..start };

    let p0 = c.embed(&start.point(&c)).unwrap();
    let d0 = c.embed_direction(0, &start.dir).unwrap();
    let t = 0.45;
    let (status, events) = flow(&c, start, t, 1.0, BranchRule::default(), &mut rng);
    let end = match status {
        FlowStatus::Completed(p) => p,
        other => panic!("absorbed unexpectedly: {other:?}"),
    };
    assert!(events.iter().any(|e| e.kind == FlowEventKind::Crossing));
    assert_eq!(end.carrier, 1, "crossed into the other face");
    let p1 = c.embed(&end.point(&c)).unwrap();
    for r in 0..2 {
        assert!((p1[r] - (p0[r] + t * d0[r])).abs() < 1e-9);
    }
    // Direction is unchanged in the plane.
    let d1 = c.embed_direction(end.carrier, &end.dir).unwrap();
    for r in 0..2 {
        assert!((d1[r] - d0[r]).abs() < 1e-9);
    }
}

#[test]
fn cos_theta_preserved_exactly_across_crossings() {
    let c = fan(3);
    let spine = c.simplex_ref(&[0, 1]).unwrap();
    let mut rng = path_rng(23, 1);
    for i in 0..200 {
        let phase = sample_liouville(&c, spine, i % 3, &mut rng);
        // Advance until the spine or a side is hit; only spine hits cross.
        let mut p = phase.clone();
        match advance_in_simplex(&c, &mut p, 100.0, 1.0) {
            Advance::Hit { hit, .. } => {
                if let Crossing::Entered(next) =
                    cross_face(&c, &hit, BranchRule::default(), &mut rng)
                {
                    let geom = c.carrier_geometry(next.carrier);
                    let facet = geom
                        .facets
                        .iter()
                        .find(|f| f.face == hit.face.idx)
                        .unwrap();
                    let cos_out = linalg::dot(&next.dir, &facet.normal_in);
                    assert!(
                        (cos_out - hit.cos_theta).abs() < 1e-12,
                        "cos mismatch {cos_out} vs {}",
                        hit.cos_theta
                    );
                }
            }
            Advance::Skeleton { .. } => {}
            Advance::Interior { .. } => panic!("budget was generous"),
        }
    }
}

#[test]
fn flow_zero_time_is_identity() {
    let c = fan(2);
    let start = centroid_phase_toward(&c, 0, &[0.5, 0.5, 0.0]);
    let mut rng = path_rng(1, 0);
    let (status, events) = flow(&c, start.clone(), 0.0, 1.0, BranchRule::default(), &mut rng);
    assert!(events.is_empty());
    assert_eq!(status, FlowStatus::Completed(start));
}

#[test]
fn flow_event_times_strictly_increase_and_length_is_exact() {
    let c = Complex::generate(&GeneratorSpec::Plane { rings: 14 }).unwrap();
    let center = c.origin_hint().unwrap();
    let mut rng = path_rng(9, 3);
    let mut crossings = 0usize;
    for i in 0..30 {
        let start = sample_uniform_link(&c, &Point::midpoint(center), &mut rng).unwrap();
        let p0 = c.embed(&start.point(&c)).unwrap();
        let d0 = c.embed_direction(start.carrier, &start.dir).unwrap();
        let t = 10.0;
        let (status, events) = flow(&c, start, t, 1.0, BranchRule::default(), &mut rng);
        let mut last = 0.0;
        for e in &events {
            assert!(e.time > last || (e.time == last && last == 0.0), "times increase");
            last = e.time;
            // Every event lies on the straight embedded line.
            let at = c
                .embed(&Point::new(max_ref(&c, e.carrier), e.bary.clone()))
                .unwrap();
            let along: f64 = e.time;
            let expect = [p0[0] + along * d0[0], p0[1] + along * d0[1]];
            assert!(
                (at[0] - expect[0]).abs() < 1e-9 && (at[1] - expect[1]).abs() < 1e-9,
                "flow {i} event off the line"
            );
            if e.kind == FlowEventKind::Crossing {
                crossings += 1;
            }
        }
        match status {
            FlowStatus::Completed(end) => {
                let p1 = c.embed(&end.point(&c)).unwrap();
                let dist =
                    ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
                assert!((dist - t).abs() < 1e-9, "arc length exact");
            }
            FlowStatus::Absorbed { .. } => panic!("plane sized to avoid absorption"),
        }
    }
    assert!(crossings >= 100, "only {crossings} crossings exercised");
}

#[test]
fn fan3_flows_from_spine_visit_faces_uniformly() {
    let c = fan(3);
    let spine = c.simplex_ref(&[0, 1]).unwrap();
    let mut rng = path_rng(31, 0);
    let n_flows = 10_000usize;
    let mut first = [0usize; 3];
    let mut visited = [0usize; 3];
    for _ in 0..n_flows {
        let start = sample_uniform_link(&c, &Point::midpoint(spine), &mut rng).unwrap();
        let mut seen = [false; 3];
        seen[start.carrier] = true;
        first[start.carrier] += 1;
        let (_, events) = flow(&c, start, 5.0, 1.0, BranchRule::default(), &mut rng);
        for e in &events {
            if e.kind == FlowEventKind::Crossing {
                seen[e.carrier] = true;
            }
        }
        for (v, s) in visited.iter_mut().zip(seen) {
            if s {
                *v += 1;
            }
        }
    }
    let sigma_first = (n_flows as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
    for &f in &first {
        assert!(
            (f as f64 - n_flows as f64 / 3.0).abs() < 3.0 * sigma_first,
            "first-face counts {first:?}"
        );
    }
    // Ever-visited indicators are symmetric across faces; compare pairwise.
    for i in 0..3 {
        for j in (i + 1)..3 {
            let pi = visited[i] as f64 / n_flows as f64;
            let pj = visited[j] as f64 / n_flows as f64;
            let p = 0.5 * (pi + pj);
            let sigma = (2.0 * p * (1.0 - p) / n_flows as f64).sqrt();
            assert!((pi - pj).abs() < 3.0 * sigma, "visited {visited:?}");
        }
    }
}

#[test]
fn liouville_angle_law_matches_analytic_cdf() {
    let c = fan(3);
    let spine = c.simplex_ref(&[0, 1]).unwrap();
    let mut rng = path_rng(41, 0);
    let n = 200_000;
    let mut angles = Vec::with_capacity(n);
    let mut cos_sum = 0.0;
    let mut cos_sq_sum = 0.0;
    for _ in 0..n {
        let p = sample_liouville(&c, spine, 0, &mut rng);
        let theta = signed_angle_to_face(&c, &p, spine);
        assert!(theta.abs() < std::f64::consts::FRAC_PI_2, "cos weight vanishes at the equator");
        angles.push(theta);
        let cos = theta.cos();
        cos_sum += cos;
        cos_sq_sum += cos * cos;
    }
    let d = stats::ks_statistic_cdf(&angles, |t| 0.5 * (1.0 + t.sin()));
    assert!(d < 0.01, "KS distance {d}");
    // Mean of cos(theta) under the cosine-weighted law is pi/4.
    let mean = cos_sum / n as f64;
    let var = cos_sq_sum / n as f64 - mean * mean;
    let se = (var / n as f64).sqrt();
    assert!(
        (mean - std::f64::consts::FRAC_PI_4).abs() < 3.0 * se,
        "mean {mean}"
    );
}

#[test]
fn liouville_law_invariant_under_one_crossing() {
    let c = fan(3);
    let spine = c.simplex_ref(&[0, 1]).unwrap();
    let mut rng = path_rng(47, 0);
    let n = 20_000;
    let fresh: Vec<f64> = (0..n)
        .map(|_| {
            let p = sample_liouville(&c, spine, 0, &mut rng);
            signed_angle_to_face(&c, &p, spine)
        })
        .collect();
    let crossed: Vec<f64> = (0..n)
        .map(|_| {
            let p = sample_liouville(&c, spine, 0, &mut rng);
            // Interpret the sampled phase as the branch continuation of an
            // incoming trajectory (same tangential, reversed normal) and
            // push it through one crossing.
            let hit = FaceHit {
                face: spine,
                face_bary: face_bary_of(&c, &p, spine),
                incoming: p.carrier,
                tangential: vec![signed_tangential(&c, &p, spine)],
                cos_theta: linalg::dot(&p.dir, &normal_of(&c, p.carrier, spine)),
            };
            match cross_face(&c, &hit, BranchRule::default(), &mut rng) {
                Crossing::Entered(q) => signed_angle_to_face(&c, &q, spine),
                Crossing::Absorbed => unreachable!(),
            }
        })
        .collect();
    let d = stats::ks_statistic_two_sample(&fresh, &crossed);
    let thr = stats::ks_two_sample_threshold(n, n, 0.01);
    assert!(d < thr.max(0.015), "KS {d} threshold {thr}");
}

fn normal_of(c: &Complex, carrier: usize, face: SimplexRef) -> Vec<f64> {
    c.carrier_geometry(carrier)
        .facets
        .iter()
        .find(|f| f.face == face.idx)
        .unwrap()
        .normal_in
        .clone()
}

fn face_bary_of(c: &Complex, p: &PhasePoint, face: SimplexRef) -> Vec<f64> {
    let geom = c.carrier_geometry(p.carrier);
    let facet = geom.facets.iter().find(|f| f.face == face.idx).unwrap();
    facet
        .face_vertex_local
        .iter()
        .map(|&l| p.bary[l])
        .collect()
}

fn signed_tangential(c: &Complex, p: &PhasePoint, face: SimplexRef) -> f64 {
    let geom = c.carrier_geometry(p.carrier);
    let n = c.dimension();
    let facet = geom.facets.iter().find(|f| f.face == face.idx).unwrap();
    let mut t = 0.0;
    for r in 0..n {
        t += facet.tangent_map[r * (n - 1)] * p.dir[r];
    }
    t
}

#[test]
fn boundary_face_absorbs() {
    let c = fan(1);
    let side = c.facets(max_ref(&c, 0))[0];
    let hit = FaceHit {
        face: SimplexRef { dim: 1, idx: side },
        face_bary: vec![0.5, 0.5],
        incoming: 0,
        tangential: vec![0.0],
        cos_theta: 1.0,
    };
    let mut rng = path_rng(2, 2);
    assert!(matches!(
        cross_face(&c, &hit, BranchRule::default(), &mut rng),
        Crossing::Absorbed
    ));
}

#[test]
fn all_cofaces_rule_can_return_to_incoming() {
    let c = fan(3);
    let spine = c.simplex_ref(&[0, 1]).unwrap();
    let hit = FaceHit {
        face: spine,
        face_bary: vec![0.5, 0.5],
        incoming: 0,
        tangential: vec![0.0],
        cos_theta: 1.0,
    };
    let mut rng = path_rng(3, 0);
    let mut saw_incoming = false;
    for _ in 0..200 {
        if let Crossing::Entered(p) = cross_face(&c, &hit, BranchRule::AllCofaces, &mut rng) {
            if p.carrier == 0 {
                saw_incoming = true;
            }
        }
    }
    assert!(saw_incoming);
}

#[test]
fn one_complex_crossing_continues_away_from_vertex() {
    let c = Complex::generate(&GeneratorSpec::Line { radius: 3 }).unwrap();
    // Start in the middle edge moving right; it should pass straight
    // through interior vertices.
    let mid = c.simplex_ref(&[3, 4]).unwrap();
    let start = sample_uniform_link(&c, &Point::midpoint(mid), &mut path_rng(8, 0)).unwrap();
    let e0 = c.embed(&start.point(&c)).unwrap();
    let d0 = c.embed_direction(start.carrier, &start.dir).unwrap();
    let mut rng = path_rng(8, 1);
    let (status, _) = flow(&c, start, 1.6, 1.0, BranchRule::default(), &mut rng);
    match status {
        FlowStatus::Completed(end) => {
            let e1 = c.embed(&end.point(&c)).unwrap();
            assert!((e1[0] - (e0[0] + 1.6 * d0[0])).abs() < 1e-9);
        }
        other => panic!("{other:?}"),
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Tangential/normal split is orthonormal for random Liouville
        /// samples on random fans.
        #[test]
        fn liouville_samples_are_valid_phases(m in 2usize..6, seed in 0u64..500) {
            let c = fan(m);
            let spine = c.simplex_ref(&[0, 1]).unwrap();
            let mut rng = path_rng(seed, 0);
            let side = (seed % m as u64) as usize;
            let p = sample_liouville(&c, spine, side, &mut rng);
            prop_assert!(p.is_valid(&c));
            prop_assert_eq!(p.carrier, side);
        }

        /// Crossings preserve cos(theta) and never pick the incoming face.
        #[test]
        fn crossing_preserves_angle(m in 3usize..6, seed in 0u64..500) {
            let c = fan(m);
            let spine = c.simplex_ref(&[0, 1]).unwrap();
            let mut rng = path_rng(seed, 1);
            let p = sample_liouville(&c, spine, 0, &mut rng);
            let mut q = p.clone();
            if let Advance::Hit { hit, .. } = advance_in_simplex(&c, &mut q, 1e9, 1.0) {
                if let Crossing::Entered(next) = cross_face(&c, &hit, BranchRule::default(), &mut rng) {
                    prop_assert!(next.carrier != hit.incoming);
                    let nu = normal_of(&c, next.carrier, hit.face);
                    let cos_out = linalg::dot(&next.dir, &nu);
                    prop_assert!((cos_out - hit.cos_theta).abs() < 1e-12);
                    prop_assert!(next.is_valid(&c));
                }
            }
        }
    }
}
