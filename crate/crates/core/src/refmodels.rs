//! Closed-form reference models.
//!
//! The two-level polariton is the photon coupled to the collective symmetric
//! exciton alone. The three-level model adds a weakly coupled upper level
//! `Δ` above the main one; its closed forms hold at `δ = 0`, `Δ = g` to first
//! order in `μ`, and an exact 3×3 propagator covers arbitrary parameters.
//! All energies are offsets from the lowest exciton level `ε₀`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::params::HBAR_EV_NS;

/// Lower and upper two-level polariton energies with the weights of the
/// initial photon state on each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelPolariton {
    pub lower: f64,
    pub upper: f64,
    pub weight_lower: f64,
    pub weight_upper: f64,
}

/// `λ± = δ/2 ± √((δ/2)² + G²)` for photon detuning `δ` and collective
/// coupling `G = g√N`.
pub fn two_level_polariton(detuning: f64, collective_coupling: f64) -> TwoLevelPolariton {
    let half = 0.5 * detuning;
    let root = half.hypot(collective_coupling);
    let (lower, upper) = (half - root, half + root);
    // Photon weight on an eigenvector (G, λ − δ) of [[δ, G], [G, 0]].
    let photon_weight = |lambda: f64| {
        let a = collective_coupling;
        let b = lambda - detuning;
        let den = a * a + b * b;
        if den == 0.0 {
            0.5
        } else {
            a * a / den
        }
    };
    let (weight_lower, weight_upper) = if collective_coupling == 0.0 {
        if detuning < 0.0 {
            (1.0, 0.0)
        } else if detuning > 0.0 {
            (0.0, 1.0)
        } else {
            (0.5, 0.5)
        }
    } else {
        (photon_weight(lower), photon_weight(upper))
    };
    TwoLevelPolariton {
        lower,
        upper,
        weight_lower,
        weight_upper,
    }
}

/// Parameters of the three-level model: ground-plus-photon level at `δ`,
/// main level at 0 coupled by `g`, upper level at `Δ` coupled by `g·μ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelParams {
    pub g: f64,
    pub mu: f64,
    pub delta: f64,
    #[serde(rename = "Delta")]
    pub upper_offset: f64,
}

impl ThreeLevelParams {
    /// The resonant configuration `δ = 0`, `Δ = g`.
    pub fn resonant(g: f64, mu: f64) -> Self {
        ThreeLevelParams {
            g,
            mu,
            delta: 0.0,
            upper_offset: g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(Error::domain(format!(
                "mu must be non-negative, got {}",
                self.mu
            )));
        }
        if !(self.g >= 0.0) {
            return Err(Error::domain(format!(
                "g must be non-negative, got {}",
                self.g
            )));
        }
        Ok(())
    }

    /// The first-order closed forms are only trusted in this regime.
    pub fn closed_form_valid(&self) -> bool {
        self.mu <= 0.1
    }

    /// Hamiltonian in the basis (ground + photon, main, upper).
    pub fn hamiltonian(&self) -> [[f64; 3]; 3] {
        let gm = self.g * self.mu;
        [
            [self.delta, self.g, gm],
            [self.g, 0.0, 0.0],
            [gm, 0.0, self.upper_offset],
        ]
    }
}

/// First-order quasi-energies `−g`, `g ∓ gμ/√2` of the resonant
/// configuration, ascending.
pub fn three_level_quasienergies_linear(g: f64, mu: f64) -> [f64; 3] {
    let s = g * mu / SQRT_2;
    [-g, g - s, g + s]
}

/// Exact eigenvalues of the 3×3 Hamiltonian, ascending.
pub fn three_level_quasienergies_exact(params: &ThreeLevelParams) -> Result<[f64; 3]> {
    let h = params.hamiltonian();
    let flat: Vec<f64> = (0..9).map(|i| h[i % 3][i / 3]).collect();
    let e = symmetric_eigen(3, &flat)?;
    Ok([e.values[0], e.values[1], e.values[2]])
}

/// Closed-form populations `(|C₀|², |C₁|², |C₂|²)` at `t` (ns) for `δ = 0`,
/// `Δ = g`, starting from the ground-plus-photon state.
pub fn three_level_populations_closed(g: f64, mu: f64, t: f64) -> [f64; 3] {
    let fast = 2.0 * g * t / HBAR_EV_NS;
    let beat = g * mu * t / (SQRT_2 * HBAR_EV_NS);
    let slow = SQRT_2 * g * mu * t / HBAR_EV_NS;
    let common = 0.375 + 0.125 * slow.cos();
    let osc = 0.5 * fast.cos() * beat.cos();
    [common + osc, common - osc, 0.25 * (1.0 - slow.cos())]
}

/// Exact propagator of the three-level model by eigen-decomposition.
#[derive(Debug, Clone)]
pub struct ThreeLevelPropagator {
    values: [f64; 3],
    vectors: [[f64; 3]; 3],
}

impl ThreeLevelPropagator {
    pub fn new(params: &ThreeLevelParams) -> Result<Self> {
        params.validate()?;
        let h = params.hamiltonian();
        let flat: Vec<f64> = (0..9).map(|i| h[i % 3][i / 3]).collect();
        let e = symmetric_eigen(3, &flat)?;
        let mut vectors = [[0.0; 3]; 3];
        for (j, col) in vectors.iter_mut().enumerate() {
            col.copy_from_slice(e.vector(j));
        }
        Ok(ThreeLevelPropagator {
            values: [e.values[0], e.values[1], e.values[2]],
            vectors,
        })
    }

    pub fn quasienergies(&self) -> [f64; 3] {
        self.values
    }

    /// Amplitudes at `t` (ns) from the ground-plus-photon state.
    pub fn amplitudes(&self, t: f64) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (v, &e) in self.vectors.iter().zip(&self.values) {
            let phase = Complex64::from_polar(v[0], -e * t / HBAR_EV_NS);
            for (o, &c) in out.iter_mut().zip(v) {
                *o += phase * c;
            }
        }
        out
    }

    pub fn populations(&self, t: f64) -> [f64; 3] {
        self.amplitudes(t).map(|c| c.norm_sqr())
    }

    /// Infinite-time average of each population.
    pub fn time_averaged_populations(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        // Degenerate eigenvalues would add cross terms; the spectrum of this
        // model is non-degenerate whenever μ > 0.
        for v in &self.vectors {
            let w = v[0] * v[0];
            for (o, c) in out.iter_mut().zip(v) {
                *o += w * c * c;
            }
        }
        out
    }
}

/// Upper-level offset `Δ = ½(δ + √(4g² + δ²))` at which the upper level is
/// resonant with the upper polariton.
pub fn resonant_offset(delta: f64, g: f64) -> f64 {
    0.5 * (delta + (4.0 * g * g + delta * delta).sqrt())
}

/// Scans `Δ` over `grid` and returns the grid value maximising the
/// time-averaged upper-level population, with the averages.
pub fn scan_resonant_offset(delta: f64, g: f64, mu: f64, grid: &[f64]) -> Result<(f64, Vec<f64>)> {
    if grid.is_empty() {
        return Err(Error::domain("empty Δ grid"));
    }
    let mut averages = Vec::with_capacity(grid.len());
    for &d in grid {
        let prop = ThreeLevelPropagator::new(&ThreeLevelParams {
            g,
            mu,
            delta,
            upper_offset: d,
        })?;
        averages.push(prop.time_averaged_populations()[2]);
    }
    let best = averages
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| grid[i])
        .unwrap_or(grid[0]);
    Ok((best, averages))
}
