//! Browser bindings: one-photon spectrum, one-photon dynamics and the
//! three-level model. Energies cross the boundary in μeV, times in ns, and
//! results come back as flat `Float64Array`s in row-major order.

use rabishift::dynamics::{evaluate_series, SeriesOptions, TimeGrid};
use rabishift::refmodels::{
    resonant_offset, three_level_populations_closed, ThreeLevelParams, ThreeLevelPropagator,
};
use rabishift::spectral::{build_active_poles, solve_quasienergies, QuasiEnergySpectrum};
use rabishift::{Geometry, SystemParams, UEV};
use wasm_bindgen::prelude::*;

/// Largest chain the page will solve; keeps the tab responsive.
pub const MAX_DEMO_SITES: usize = 20_000;

const SITE_ENERGY: f64 = 1.5;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn solve(
    n: usize,
    hop_w_uev: f64,
    coupling_uev: f64,
    detuning_uev: f64,
) -> Result<QuasiEnergySpectrum, JsError> {
    if n == 0 || n > MAX_DEMO_SITES {
        return Err(err(format!("chain length must be in 1..={MAX_DEMO_SITES}")));
    }
    let p = SystemParams::from_collective(
        Geometry::Chain { n },
        hop_w_uev * UEV,
        SITE_ENERGY,
        coupling_uev * UEV,
        detuning_uev * UEV,
    );
    p.validate().map_err(err)?;
    let poles = build_active_poles(&p).map_err(err)?;
    solve_quasienergies(&poles).map_err(err)
}

/// Quasi-energies of a chain with `n` atoms: rows `[λ − ε₀ (μeV), weight]`.
#[wasm_bindgen]
pub fn spectrum(
    n: usize,
    hop_w_uev: f64,
    coupling_uev: f64,
    detuning_uev: f64,
) -> Result<Vec<f64>, JsError> {
    let spec = solve(n, hop_w_uev, coupling_uev, detuning_uev)?;
    Ok(spec
        .roots
        .iter()
        .flat_map(|r| [r.offset / UEV, r.weight])
        .collect())
}

/// Populations after one photon enters the empty chain: rows
/// `[t, exciton_total, collective, residual, photon]`.
#[wasm_bindgen]
pub fn dynamics(
    n: usize,
    hop_w_uev: f64,
    coupling_uev: f64,
    detuning_uev: f64,
    t_max_ns: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let spec = solve(n, hop_w_uev, coupling_uev, detuning_uev)?;
    let grid = TimeGrid::uniform(t_max_ns, points).map_err(err)?;
    let s = evaluate_series(&spec, &grid, &SeriesOptions::default()).map_err(err)?;
    Ok((0..s.times.len())
        .flat_map(|i| {
            [
                s.times[i],
                s.exciton_total[i],
                s.collective_pop[i],
                s.residual[i],
                s.photon_pop[i],
            ]
        })
        .collect())
}

/// Three-level model with the upper level placed at the resonant offset:
/// rows `[t, |C₀|², |C₁|², |C₂|², closed-form |C₂|²]` (the last is NaN off
/// zero detuning).
#[wasm_bindgen]
pub fn three_level(
    g_uev: f64,
    mu: f64,
    detuning_uev: f64,
    t_max_ns: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let (g, delta) = (g_uev * UEV, detuning_uev * UEV);
    let p = ThreeLevelParams {
        g,
        mu,
        delta,
        upper_offset: resonant_offset(delta, g),
    };
    let prop = ThreeLevelPropagator::new(&p).map_err(err)?;
    let grid = TimeGrid::uniform(t_max_ns, points).map_err(err)?;
    let closed = delta == 0.0 && p.closed_form_valid();
    Ok(grid
        .times
        .iter()
        .flat_map(|&t| {
            let e = prop.populations(t);
            let c2 = if closed {
                three_level_populations_closed(g, mu, t)[2]
            } else {
                f64::NAN
            };
            [t, e[0], e[1], e[2], c2]
        })
        .collect())
}
