mod common;

use num_complex::Complex64;
use rabishift::refmodels::*;
use rabishift::{HBAR_EV_NS, UEV};

const G: f64 = 30.0 * UEV;

fn slow_period(mu: f64) -> f64 {
    2.0 * std::f64::consts::PI * HBAR_EV_NS / (std::f64::consts::SQRT_2 * G * mu)
}

#[test]
fn exact_propagator_matches_rk4() {
    let params = ThreeLevelParams {
        g: G,
        mu: 0.3,
        delta: -10.0 * UEV,
        upper_offset: 25.0 * UEV,
    };
    let prop = ThreeLevelPropagator::new(&params).unwrap();
    let h = params.hamiltonian();
    let flat: Vec<f64> = (0..9).map(|i| h[i / 3][i % 3]).collect();
    let psi0 = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    ];
    for t in [0.01, 0.1, 0.4] {
        let oracle = common::rk4(&flat, &psi0, t, 40_000);
        for (a, b) in prop.amplitudes(t).iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}

/// Largest closed-form deviation per level over `[0, t_max]`.
fn closed_form_deviation(mu: f64, t_max: f64) -> [f64; 3] {
    let prop = ThreeLevelPropagator::new(&ThreeLevelParams::resonant(G, mu)).unwrap();
    let samples = 20_000;
    let mut worst = [0.0f64; 3];
    for i in 0..=samples {
        let t = t_max * i as f64 / samples as f64;
        let exact = prop.populations(t);
        assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let closed = three_level_populations_closed(G, mu, t);
        for k in 0..3 {
            worst[k] = worst[k].max((exact[k] - closed[k]).abs());
        }
    }
    worst
}

#[test]
fn closed_forms_are_first_order_accurate() {
    // The direct gμ coupling admixes the off-resonant lower polariton with
    // amplitude ~μ/(2√2), so deviations are O(μ), not O(μ²).
    for mu in [0.01, 0.003] {
        let dev = closed_form_deviation(mu, 5.0 * slow_period(mu));
        assert!(
            dev[2] <= 0.5 * mu,
            "μ={mu}: upper-level deviation {:e}",
            dev[2]
        );
        assert!(dev.iter().all(|&d| d <= 5.0 * mu), "μ={mu}: {dev:?}");
    }
    // Halving μ roughly halves the deviation.
    let a = closed_form_deviation(0.01, 0.5 * slow_period(0.01))[2];
    let b = closed_form_deviation(0.005, 0.5 * slow_period(0.005))[2];
    assert!((a / b - 2.0).abs() < 0.2, "{a:e} / {b:e}");
}

#[test]
fn fast_averaged_upper_population_peaks_at_one_half() {
    let mu = 0.01;
    let prop = ThreeLevelPropagator::new(&ThreeLevelParams::resonant(G, mu)).unwrap();
    let fast = std::f64::consts::PI * HBAR_EV_NS / G;
    let around = slow_period(mu) / 2.0;
    let mut best: f64 = 0.0;
    let mut raw: f64 = 0.0;
    for i in -200..=200 {
        let centre = around + i as f64 * fast / 10.0;
        let avg: f64 = (0..64)
            .map(|j| prop.populations(centre + (j as f64 / 64.0 - 0.5) * fast)[2])
            .sum::<f64>()
            / 64.0;
        best = best.max(avg);
        raw = raw.max(prop.populations(centre)[2]);
    }
    assert!((best - 0.5).abs() < 1e-3, "{best}");
    assert!((raw - 0.5).abs() < 0.5 * mu, "{raw}");
}

#[test]
fn upper_level_peaks_at_one_half() {
    let mu = 0.01;
    let t = slow_period(mu) / 2.0;
    let closed = three_level_populations_closed(G, mu, t);
    assert!((closed[2] - 0.5).abs() < 1e-12);
    for i in 0..1000 {
        let c = three_level_populations_closed(G, mu, i as f64 * 0.37);
        assert!(c[2] <= 0.5 + 1e-15);
    }
}

#[test]
fn zero_mu_leaves_upper_level_empty() {
    let prop = ThreeLevelPropagator::new(&ThreeLevelParams::resonant(G, 0.0)).unwrap();
    for i in 0..100 {
        assert_eq!(prop.populations(i as f64 * 0.05)[2], 0.0);
    }
}

#[test]
fn resonance_scan_finds_formula() {
    let mu = 0.01;
    for delta in [-2.0 * G, 0.0, G] {
        let expect = resonant_offset(delta, G);
        let step = 0.002 * G;
        let grid: Vec<f64> = (-200..=200).map(|i| expect + i as f64 * step).collect();
        let (best, _) = scan_resonant_offset(delta, G, mu, &grid).unwrap();
        assert!(
            (best - expect).abs() <= step,
            "δ = {delta:e}: {best:e} vs {expect:e}"
        );
    }
}

#[test]
fn closed_form_spectral_lines() {
    // |C₀|² is exactly 3/8 + ¼cos(ω₊t) + ¼cos(ω₋t) + ⅛cos(Ωt) with
    // ω± = 2g/ħ ± gμ/(√2ħ), Ω = √2gμ/ħ; anything left over is another line.
    let mu = 0.05;
    let w_plus = 2.0 * G / HBAR_EV_NS + G * mu / (std::f64::consts::SQRT_2 * HBAR_EV_NS);
    let w_minus = 2.0 * G / HBAR_EV_NS - G * mu / (std::f64::consts::SQRT_2 * HBAR_EV_NS);
    let slow = std::f64::consts::SQRT_2 * G * mu / HBAR_EV_NS;
    let t_max = 4.0 * slow_period(mu);
    for i in 0..=10_000 {
        let t = t_max * i as f64 / 10_000.0;
        let lines = 0.375
            + 0.25 * (w_plus * t).cos()
            + 0.25 * (w_minus * t).cos()
            + 0.125 * (slow * t).cos();
        let residual = three_level_populations_closed(G, mu, t)[0] - lines;
        assert!(residual.abs() < 1e-10, "t={t}: {residual:e}");
    }
}
