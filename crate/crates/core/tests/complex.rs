mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crf_core::complex::{build_complex, DecorationVector, FaceGluing, GluingSpec, PolyhedralMetric};
use crf_core::tet::{classify_degeneration, is_realizable, DegenerationClass, EdgeLengths6, TetShape, EDGES};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{figure_eight, fixture};

fn perms() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|x| p.contains(&x)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn inverse(p: [usize; 4]) -> [usize; 4] {
    let mut q = [0; 4];
    for i in 0..4 {
        q[p[i]] = i;
    }
    q
}

/// A closed gluing of `n` tetrahedra from a random pairing of faces and
/// random face maps.
fn random_gluing(n: usize, seed: u64) -> GluingSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faces: Vec<(usize, usize)> = (0..n).flat_map(|t| (0..4).map(move |f| (t, f))).collect();
    for i in (1..faces.len()).rev() {
        faces.swap(i, rng.gen_range(0..=i));
    }
    let mut gluings = vec![vec![None; 4]; n];
    for pair in faces.chunks(2) {
        let ((t1, f1), (t2, f2)) = (pair[0], pair[1]);
        let choices: Vec<[usize; 4]> = perms().into_iter().filter(|p| p[f1] == f2).collect();
        let p = choices[rng.gen_range(0..choices.len())];
        gluings[t1][f1] = Some(FaceGluing { tet: t2, face: f2, perm: p });
        gluings[t2][f2] = Some(FaceGluing { tet: t1, face: f1, perm: inverse(p) });
    }
    GluingSpec { tets: n, gluings, vertex_flags: BTreeMap::new() }
}

#[test]
fn figure_eight_euler_characteristic() {
    let c = figure_eight();
    assert_eq!(c.edge_count(), 2);
    assert_eq!(c.vertex_count(), 1);
    // The vertex link is triangulated by one triangle per tetrahedron corner.
    // Its vertices are edge ends, its edges are face corners (each shared by
    // two triangles).
    let triangles = 4 * c.tet_count() as i64;
    let link_vertices = 2 * c.edge_count() as i64;
    let link_edges = 3 * triangles / 2;
    assert_eq!(link_vertices - link_edges + triangles, 0);
}

#[test]
fn figure_eight_vertex_sums_by_enumeration() {
    let c = figure_eight();
    let m = PolyhedralMetric(vec![0.37, -0.81]);
    // each tet-edge incidence contributes its length to both end vertices;
    // dividing by the valence counts each edge class once per end
    let mut sum = 0.0;
    for t in 0..c.tet_count() {
        for (e, &(a, b)) in EDGES.iter().enumerate() {
            let class = c.edge_of(t, e);
            let valence = c.edge_classes()[class].incidences.len() as f64;
            for v in [a, b] {
                if c.vertex_of(t, v) == 0 {
                    sum += m.0[class] / valence;
                }
            }
        }
    }
    let got = c.vertex_length_sums(&m).unwrap();
    assert!((got[0] - sum).abs() < 1e-14);
    assert!((got[0] - 2.0 * (0.37 - 0.81)).abs() < 1e-14);
    assert_eq!(c.vertex_length_sums(&PolyhedralMetric(vec![0.0, 0.0])).unwrap(), vec![0.0]);
}

#[test]
fn residual_detects_non_decoration_direction() {
    let c = figure_eight();
    let m = PolyhedralMetric(vec![0.1, 0.2]);
    // (1, -1) is orthogonal to the column (2, 2) of the incidence matrix
    let moved = PolyhedralMetric(vec![0.1 + 0.05, 0.2 - 0.05]);
    let (_, r) = c.decoration_residual(&m, &moved).unwrap();
    assert!((r - 0.05 * 2f64.sqrt()).abs() < 1e-14);
    let (w, r) = c.decoration_residual(&m, &m).unwrap();
    assert!(r == 0.0 && w.0[0].abs() < 1e-15);
}

#[test]
fn one_tet_omega_contributes_pi() {
    let c = fixture("one_tet_22.json");
    let shape = TetShape::TWO_TWO;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ideal_ideal = c.canonical_edges(0)[5];
    let hyper_hyper = c.canonical_edges(0)[0];
    let mixed = 3 - ideal_ideal - hyper_hyper;
    let m = loop {
        let mut v = vec![0.0; 3];
        v[hyper_hyper] = rng.gen_range(0.01..3.0);
        v[ideal_ideal] = rng.gen_range(-3.0..3.0);
        v[mixed] = rng.gen_range(-3.0..3.0);
        let m = PolyhedralMetric(v);
        if classify_degeneration(shape, &c.tet_lengths(0, &m)).unwrap() == DegenerationClass::Omega1 {
            break m;
        }
    };
    assert!(c.curvature(&m).is_err());
    let k = c.extended_curvature(&m).unwrap();
    assert!((k.0[hyper_hyper] - PI).abs() < 1e-12);
    assert!((k.0[ideal_ideal] - PI).abs() < 1e-12);
    assert!((k.0[mixed] - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn one_tet_valence_one_edges() {
    let c = fixture("one_tet_22.json");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seen = 0;
    while seen < 100 {
        let m = PolyhedralMetric(vec![rng.gen_range(0.01..2.0), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]);
        let m = PolyhedralMetric(
            (0..3).map(|e| if e == c.canonical_edges(0)[0] { m.0[0].abs() } else { m.0[e] }).collect(),
        );
        let Ok(k) = c.curvature(&m) else { continue };
        seen += 1;
        for (e, v) in c.edge_valences().valences.iter().enumerate() {
            if *v == 1 {
                assert!(k.0[e] > PI && k.0[e] < 2.0 * PI);
            }
        }
    }
}

#[test]
fn extended_curvature_is_continuous_on_segments() {
    let c = figure_eight();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let step: f64 = 1e-6;
    for _ in 0..5 {
        let a: [f64; 2] = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
        let b: [f64; 2] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let n = (len / step) as usize;
        let at = |i: usize| {
            let t = i as f64 / n as f64;
            PolyhedralMetric(vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
        };
        let mut prev = c.extended_curvature(&at(0)).unwrap();
        for i in 1..=n {
            let cur = c.extended_curvature(&at(i)).unwrap();
            // square-root profile at the frontier: jump ≲ C·sqrt(step)
            for e in 0..2 {
                assert!((cur.0[e] - prev.0[e]).abs() < 10.0 * step.sqrt(), "segment jump at {i}/{n}");
            }
            prev = cur;
        }
    }
}

#[test]
fn zero_decoration_is_identity() {
    let c = figure_eight();
    let m = PolyhedralMetric(vec![2.0, -1.0]);
    let w = DecorationVector(vec![0.0]);
    assert_eq!(c.apply_decoration(&m, &w).unwrap(), m);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn orbits_partition(n in 1usize..5, seed in any::<u64>()) {
        match build_complex(random_gluing(n, seed)) {
            Ok(c) => {
                let edge_total: usize = c.edge_valences().valences.iter().sum();
                prop_assert_eq!(edge_total, 6 * n);
                let mut seen = vec![vec![false; 6]; n];
                for class in c.edge_classes() {
                    for &(t, e) in &class.incidences {
                        prop_assert!(!seen[t][e]);
                        seen[t][e] = true;
                    }
                }
                let mut vertex_sizes = vec![0usize; c.vertex_count()];
                for t in 0..n {
                    for v in 0..4 {
                        vertex_sizes[c.vertex_of(t, v)] += 1;
                    }
                }
                prop_assert_eq!(vertex_sizes.iter().sum::<usize>(), 4 * n);
                prop_assert!(vertex_sizes.iter().all(|&s| s > 0));
            }
            Err(e) => {
                // only orientation problems are possible for closed gluings
                prop_assert!(matches!(e, crf_core::error::ValidationError::NonCyclicEdge { .. }), "{e}");
            }
        }
    }

    #[test]
    fn extended_agrees_on_decorated(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let c = figure_eight();
        let m = PolyhedralMetric(vec![a, b]);
        prop_assume!(c.is_decorated(&m));
        prop_assert_eq!(c.curvature(&m).unwrap(), c.extended_curvature(&m).unwrap());
    }

    #[test]
    fn decoration_equivariance(a in -3.0f64..3.0, b in -3.0f64..3.0, w in -2.0f64..2.0) {
        let c = figure_eight();
        let m = PolyhedralMetric(vec![a, b]);
        let shifted = c.apply_decoration(&m, &DecorationVector(vec![w])).unwrap();
        let (k1, k2) = (c.extended_curvature(&m).unwrap(), c.extended_curvature(&shifted).unwrap());
        for e in 0..2 {
            prop_assert!((k1.0[e] - k2.0[e]).abs() < 1e-12);
        }
        let (back, r) = c.decoration_residual(&m, &shifted).unwrap();
        prop_assert!(r < 1e-12 && (back.0[0] - w).abs() < 1e-12);
        let s1 = c.vertex_length_sums(&m).unwrap()[0];
        let s2 = c.vertex_length_sums(&shifted).unwrap()[0];
        prop_assert!((s2 - s1 - 8.0 * w).abs() < 1e-12);
    }

    #[test]
    fn valence_bounds_curvature(n in 1usize..4, seed in any::<u64>(), x in proptest::collection::vec(-1.0f64..1.0, 18)) {
        let Ok(c) = build_complex(random_gluing(n, seed)) else { return Ok(()) };
        let m = PolyhedralMetric(x[..c.edge_count()].to_vec());
        if let Ok(k) = c.curvature(&m) {
            for (e, &v) in c.edge_valences().valences.iter().enumerate() {
                prop_assert!(k.0[e] > 2.0 * PI - PI * v as f64);
                prop_assert!(k.0[e] < 2.0 * PI);
            }
        }
        let k = c.extended_curvature(&m).unwrap();
        for (e, &v) in c.edge_valences().valences.iter().enumerate() {
            prop_assert!(k.0[e] >= 2.0 * PI - PI * v as f64 - 1e-12);
        }
    }

    #[test]
    fn decorated_iff_every_tet_realizable(n in 1usize..4, seed in any::<u64>(), x in proptest::collection::vec(-1.0f64..1.0, 18)) {
        let Ok(c) = build_complex(random_gluing(n, seed)) else { return Ok(()) };
        let m = PolyhedralMetric(x[..c.edge_count()].to_vec());
        let each = (0..n).all(|t| {
            let l: EdgeLengths6 = c.tet_lengths(t, &m);
            is_realizable(c.tet_shape(t), &l)
        });
        prop_assert_eq!(c.is_decorated(&m), each);
        prop_assert_eq!(c.curvature(&m).is_ok(), each);
    }
}
