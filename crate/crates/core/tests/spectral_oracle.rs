mod common;

use proptest::prelude::*;
use rabishift::spectral::{
    build_active_poles, eigenvector, solve_quasienergies, QuasiEnergySpectrum,
};
use rabishift::{Geometry, SystemParams, UEV};

fn solve(p: &SystemParams) -> QuasiEnergySpectrum {
    solve_quasienergies(&build_active_poles(p).unwrap()).unwrap()
}

/// Roots and silent levels merged into one `(λ, weight)` list.
fn all_levels(spec: &QuasiEnergySpectrum) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = spec.roots.iter().map(|r| (r.offset, r.weight)).collect();
    for &(e, mult) in &spec.silent_levels {
        v.extend(std::iter::repeat_n((e, 0.0), mult));
    }
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn assert_matches_dense(p: &SystemParams) {
    let spec = solve(p);
    let ours = all_levels(&spec);
    let dense = common::dense_bordered(p);
    assert_eq!(ours.len(), dense.len(), "level count for {p:?}");
    for (i, (a, b)) in ours.iter().zip(&dense).enumerate() {
        assert!((a.0 - b.0).abs() <= 1e-10, "level {i}: {} vs {}", a.0, b.0);
        assert!((a.1 - b.1).abs() <= 1e-9, "weight {i}: {} vs {}", a.1, b.1);
    }
    assert!(spec.interlacing_holds());
    assert!(spec.weight_closure_defect().abs() <= 1e-10);
}

#[test]
fn chain_roots_match_dense_bordered_matrix() {
    for n in [1usize, 2, 3, 7, 20, 64, 121, 200] {
        for d in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            let p = SystemParams::from_collective(
                Geometry::Chain { n },
                0.25,
                1.5,
                30.0 * UEV,
                d * 30.0 * UEV,
            );
            assert_matches_dense(&p);
        }
    }
}

#[test]
fn chain_roots_match_dense_in_strong_coupling() {
    // Coupling comparable to the bandwidth exercises the exterior brackets.
    for n in [5usize, 40] {
        let p = SystemParams::from_collective(Geometry::Chain { n }, 1e-3, 1.5, 2e-3, 1e-3);
        assert_matches_dense(&p);
    }
}

#[test]
fn well_roots_match_dense_with_degenerate_poles() {
    for n in [2usize, 3, 6, 9, 12, 14] {
        for d in [-2.0, 0.0, 1.0] {
            let p = SystemParams::from_collective(
                Geometry::Well { nx: n, ny: n },
                0.25,
                1.5,
                30.0 * UEV,
                d * 30.0 * UEV,
            );
            let spec = solve(&p);
            if n >= 3 {
                assert!(
                    spec.poles.poles.iter().any(|q| q.multiplicity > 1),
                    "expected merged poles at n = {n}"
                );
            }
            assert_matches_dense(&p);
        }
    }
}

#[test]
fn rectangular_well_matches_dense() {
    let p =
        SystemParams::from_collective(Geometry::Well { nx: 5, ny: 9 }, 0.2, 1.5, 50.0 * UEV, 0.0);
    assert_matches_dense(&p);
}

#[test]
fn eigenvectors_solve_the_bordered_problem() {
    let p = SystemParams::from_collective(
        Geometry::Chain { n: 31 },
        0.01,
        1.5,
        200.0 * UEV,
        50.0 * UEV,
    );
    let spec = solve(&p);
    let g = p.coupling_g;
    for m in 0..spec.roots.len() {
        let v = eigenvector(&spec, m).unwrap();
        let r = &spec.roots[m];
        let norm: f64 = v.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!((v[0] * v[0] - r.weight).abs() < 1e-12);
        // Exciton rows: gγ_j·v0 + (ε_j − λ)v_j = 0.
        for (j, pole) in spec.poles.poles.iter().enumerate() {
            let row = g * pole.coupling * v[0] + spec.pole_distance(r, j) * v[j + 1];
            assert!(
                row.abs() < 1e-12 * (g * pole.coupling).max(1e-30) + 1e-20,
                "root {m} row {j}: {row:e}"
            );
        }
    }
}

#[test]
fn zero_coupling_puts_unit_weight_on_photon() {
    let p = SystemParams::from_collective(Geometry::Chain { n: 9 }, 0.25, 1.5, 0.0, 5.0 * UEV);
    let spec = solve(&p);
    let heavy: Vec<_> = spec.roots.iter().filter(|r| r.weight > 0.0).collect();
    assert_eq!(heavy.len(), 1);
    assert_eq!(heavy[0].weight, 1.0);
    assert!((heavy[0].offset - 5.0 * UEV).abs() < 1e-15);
}

#[test]
fn jaynes_cummings_limit() {
    let g = 30.0 * UEV;
    let p = SystemParams::from_collective(Geometry::Chain { n: 1 }, 0.25, 1.5, g, 0.0);
    let spec = solve(&p);
    assert_eq!(spec.roots.len(), 2);
    assert!((spec.roots[0].offset + g).abs() < 1e-10);
    assert!((spec.roots[1].offset - g).abs() < 1e-10);
    assert!((spec.roots[0].weight - 0.5).abs() < 1e-10);
    assert!((spec.roots[1].weight - 0.5).abs() < 1e-10);
}

#[test]
fn near_pole_roots_keep_relative_precision() {
    // Full-scale chain: many roots sit within a few ulps of their poles.
    let p = SystemParams::from_collective(Geometry::Chain { n: 2000 }, 0.25, 1.5, 30.0 * UEV, 0.0);
    let spec = solve(&p);
    assert!(spec.interlacing_holds());
    assert!(spec.weight_closure_defect().abs() < 1e-12);
    for m in 0..spec.roots.len() {
        assert!(
            spec.residual(m) < 1e-10,
            "root {m} residual {:e}",
            spec.residual(m)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interlacing_and_closure(n in 1usize..90, w in 1e-4f64..0.5, gc in 1e-6f64..1e-3, d in -3.0f64..3.0) {
        let p = SystemParams::from_collective(Geometry::Chain { n }, w, 1.5, gc, d * gc);
        let spec = solve(&p);
        prop_assert!(spec.interlacing_holds());
        prop_assert!(spec.weight_closure_defect().abs() <= 1e-10);
        prop_assert!(spec.roots.iter().all(|r| r.weight > 0.0 && r.weight <= 1.0));
        prop_assert!(spec.roots.windows(2).all(|x| x[0].offset < x[1].offset));
    }

    #[test]
    fn roots_match_dense_for_random_chains(n in 1usize..40, w in 1e-4f64..0.5, gc in 1e-6f64..1e-3, d in -3.0f64..3.0) {
        let p = SystemParams::from_collective(Geometry::Chain { n }, w, 1.5, gc, d * gc);
        let spec = solve(&p);
        let dense = common::dense_bordered(&p);
        for (r, (e, wt)) in spec.roots.iter().zip(&dense) {
            prop_assert!((r.offset - e).abs() <= 1e-10);
            prop_assert!((r.weight - wt).abs() <= 1e-9);
        }
    }
}
