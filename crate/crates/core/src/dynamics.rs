//! Spectral propagation of the one-photon sector.
//!
//! With weights `w_m = b_m² = 1/P_m`, the state grown from `|1 photon; 0⟩` is
//!
//! ```text
//! φ(t)   = Σ_m w_m e^{−iλ_m t/ħ}                       (photon)
//! C_k(t) = gγ_k Σ_m w_m e^{−iλ_m t/ħ} / (λ_m − ε_j(k))  (mode k in pole j)
//! ```
//!
//! Phases are taken relative to the lowest exciton level, which only changes the
//! global phase. Observables are evaluated directly from these sums at each
//! requested time.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::HBAR_EV_NS;
use crate::spectral::{eigenvector, ModeLabel, QuasiEnergySpectrum};

/// Roots lighter than this are dropped from the propagation sums; the total
/// dropped weight is reported by [`SpectralPropagator::dropped_weight`].
pub const DEFAULT_ROOT_CUTOFF: f64 = 1e-18;

/// Above this many `root × mode` terms per time point the exciton total is
/// taken from completeness instead of the explicit mode sum.
pub const DIRECT_SUM_BUDGET: usize = 4_000_000;

/// Label of a basis state of the one-photon sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorLabel {
    /// `|1 photon; 0 excitons⟩`.
    Photon,
    /// `|0 photons; mode⟩`.
    Mode(ModeLabel),
}

/// One-photon-sector state at time `time` (ns). `amplitudes[0]` is the photon,
/// the rest follow [`basis_labels`].
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub time: f64,
    pub amplitudes: Vec<Complex64>,
}

impl SectorState {
    pub fn photon_population(&self) -> f64 {
        self.amplitudes[0].norm_sqr()
    }

    pub fn exciton_population(&self) -> f64 {
        self.amplitudes[1..].iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Labels of the one-photon sector: the photon, then every active mode in
/// pole order (ascending energy, group members in enumeration order).
pub fn basis_labels(spec: &QuasiEnergySpectrum) -> Vec<SectorLabel> {
    std::iter::once(SectorLabel::Photon)
        .chain(
            spec.poles
                .poles
                .iter()
                .flat_map(|p| p.members.iter().map(|m| SectorLabel::Mode(m.label))),
        )
        .collect()
}

/// Precomputed propagation data for one spectrum.
#[derive(Debug, Clone)]
pub struct SpectralPropagator<'a> {
    spec: &'a QuasiEnergySpectrum,
    /// Retained root indices.
    kept: Vec<usize>,
    dropped_weight: f64,
    /// For each mode in basis order: (pole index, g·γ).
    modes: Vec<(usize, f64, ModeLabel)>,
    collective_norm: f64,
}

impl<'a> SpectralPropagator<'a> {
    pub fn new(spec: &'a QuasiEnergySpectrum) -> Self {
        Self::with_cutoff(spec, DEFAULT_ROOT_CUTOFF)
    }

    pub fn with_cutoff(spec: &'a QuasiEnergySpectrum, cutoff: f64) -> Self {
        let mut kept = Vec::new();
        let mut dropped_weight = 0.0;
        for (m, r) in spec.roots.iter().enumerate() {
            if r.weight >= cutoff && r.weight > 0.0 {
                kept.push(m);
            } else {
                dropped_weight += r.weight;
            }
        }
        let g = spec.poles.coupling_g;
        let modes = spec
            .poles
            .poles
            .iter()
            .enumerate()
            .flat_map(|(j, p)| p.members.iter().map(move |m| (j, g * m.gamma, m.label)))
            .collect();
        SpectralPropagator {
            spec,
            kept,
            dropped_weight,
            modes,
            collective_norm: spec.poles.coupling_mass().sqrt(),
        }
    }

    pub fn spectrum(&self) -> &QuasiEnergySpectrum {
        self.spec
    }

    pub fn kept_roots(&self) -> usize {
        self.kept.len()
    }

    pub fn dropped_weight(&self) -> f64 {
        self.dropped_weight
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode_labels(&self) -> impl Iterator<Item = ModeLabel> + '_ {
        self.modes.iter().map(|m| m.2)
    }

    /// `w_m e^{−iλ_m t/ħ}` for every retained root.
    fn phased_weights(&self, t: f64) -> Vec<Complex64> {
        self.kept
            .iter()
            .map(|&m| {
                let r = &self.spec.roots[m];
                Complex64::from_polar(r.weight, -r.offset * t / HBAR_EV_NS)
            })
            .collect()
    }

    fn mode_amplitude(&self, phased: &[Complex64], mode: usize) -> Complex64 {
        let (j, g_gamma, _) = self.modes[mode];
        // An uncoupled mode stays empty, even when a root sits on its pole.
        if g_gamma == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, &m) in phased.iter().zip(&self.kept) {
            let d = self.spec.pole_distance(&self.spec.roots[m], j);
            acc -= a / d;
        }
        acc * g_gamma
    }

    /// Full state at `t`.
    pub fn state(&self, t: f64) -> SectorState {
        let phased = self.phased_weights(t);
        let mut amplitudes = Vec::with_capacity(self.modes.len() + 1);
        amplitudes.push(phased.iter().sum());
        for k in 0..self.modes.len() {
            amplitudes.push(self.mode_amplitude(&phased, k));
        }
        SectorState {
            time: t,
            amplitudes,
        }
    }

    pub fn photon_amplitude(&self, t: f64) -> Complex64 {
        self.phased_weights(t).iter().sum()
    }

    /// Overlap with the collective symmetric exciton, from the secular
    /// identity `g²G(λ_m) = ħω − λ_m`, in `O(M)`.
    pub fn collective_amplitude(&self, t: f64) -> Complex64 {
        let g = self.spec.poles.coupling_g;
        if g == 0.0 || self.collective_norm == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let scale = -1.0 / (g * self.collective_norm);
        self.kept
            .iter()
            .zip(self.phased_weights(t))
            .map(|(&m, a)| a * (self.spec.shaft_distance(&self.spec.roots[m]) * scale))
            .sum()
    }

    /// `|C_k(t)|` for the selected modes (indices into the mode list).
    pub fn mode_magnitudes(&self, t: f64, modes: &[usize]) -> Vec<f64> {
        let phased = self.phased_weights(t);
        modes
            .iter()
            .map(|&k| self.mode_amplitude(&phased, k).norm())
            .collect()
    }

    /// Infinite-time average of `|C_k|²` for every mode, assuming a
    /// non-degenerate root spectrum.
    pub fn time_averaged_mode_populations(&self) -> Vec<f64> {
        self.modes
            .iter()
            .map(|&(j, g_gamma, _)| {
                if g_gamma == 0.0 {
                    return 0.0;
                }
                self.kept
                    .iter()
                    .map(|&m| {
                        let r = &self.spec.roots[m];
                        let a = r.weight * g_gamma / self.spec.pole_distance(r, j);
                        a * a
                    })
                    .sum()
            })
            .collect()
    }

    /// `⟨H⟩` of the propagated state relative to `ε₀`; constant
    /// in time.
    pub fn energy(&self) -> f64 {
        self.kept
            .iter()
            .map(|&m| self.spec.roots[m].weight * self.spec.roots[m].offset)
            .sum()
    }
}

/// Propagates `|1 photon; 0⟩` to time `t` (ns).
pub fn propagate_spectral(spec: &QuasiEnergySpectrum, t: f64) -> SectorState {
    SpectralPropagator::new(spec).state(t)
}

/// Population of the collective symmetric exciton `Σ_k (γ_k/√N)|k⟩`.
pub fn collective_population(state: &SectorState, spec: &QuasiEnergySpectrum) -> f64 {
    let norm = spec.poles.coupling_mass().sqrt();
    let gammas = spec
        .poles
        .poles
        .iter()
        .flat_map(|p| p.members.iter().map(|m| m.gamma));
    let overlap: Complex64 = state.amplitudes[1..]
        .iter()
        .zip(gammas)
        .map(|(c, g)| c * (g / norm))
        .sum();
    overlap.norm_sqr()
}

/// Exciton population outside the collective state.
pub fn residual_population(state: &SectorState, spec: &QuasiEnergySpectrum) -> f64 {
    state.exciton_population() - collective_population(state, spec)
}

/// `⟨H⟩` of an arbitrary sector state, relative to `ε₀`.
pub fn energy_expectation(state: &SectorState, spec: &QuasiEnergySpectrum) -> f64 {
    let g = spec.poles.coupling_g;
    let photon = state.amplitudes[0];
    let mut e = spec.poles.shaft * photon.norm_sqr();
    let mut i = 1;
    for p in &spec.poles.poles {
        for m in &p.members {
            let c = state.amplitudes[i];
            e += p.offset * c.norm_sqr() + 2.0 * g * m.gamma * (photon.conj() * c).re;
            i += 1;
        }
    }
    e
}

/// Contiguous window of mode indices `lo..=hi` (applied to both axes for a
/// well).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeWindow {
    pub lo: usize,
    pub hi: usize,
}

impl ModeWindow {
    fn contains(&self, label: &ModeLabel) -> bool {
        match *label {
            ModeLabel::Chain { k } => (self.lo..=self.hi).contains(&k),
            ModeLabel::Well { kx, ky } => {
                (self.lo..=self.hi).contains(&kx) && (self.lo..=self.hi).contains(&ky)
            }
        }
    }
}

/// Mode indices (into the propagator's mode list) inside `window`.
pub fn select_modes(
    prop: &SpectralPropagator<'_>,
    window: ModeWindow,
    n_max: usize,
) -> Result<Vec<usize>> {
    if window.lo == 0 || window.hi > n_max || window.lo > window.hi {
        return Err(Error::domain(format!(
            "mode window {}..={} outside 1..={n_max}",
            window.lo, window.hi
        )));
    }
    Ok(prop
        .mode_labels()
        .enumerate()
        .filter(|(_, l)| window.contains(l))
        .map(|(i, _)| i)
        .collect())
}

/// `|C_k(t)|` for the active modes inside `window`.
pub fn per_mode_populations(
    state: &SectorState,
    spec: &QuasiEnergySpectrum,
    window: ModeWindow,
    n_max: usize,
) -> Result<Vec<(ModeLabel, f64)>> {
    let prop = SpectralPropagator::new(spec);
    let idx = select_modes(&prop, window, n_max)?;
    let labels: Vec<ModeLabel> = prop.mode_labels().collect();
    Ok(idx
        .into_iter()
        .map(|i| (labels[i], state.amplitudes[i + 1].norm()))
        .collect())
}

/// Lower-polariton eigenstate (root 0) in the one-photon basis.
pub fn lower_polariton_state(spec: &QuasiEnergySpectrum) -> Result<SectorState> {
    let v = eigenvector(spec, spec.lower_index())?;
    let mut amplitudes = vec![Complex64::new(v[0], 0.0)];
    let g = spec.poles.coupling_g;
    let root = &spec.roots[spec.lower_index()];
    for (j, p) in spec.poles.poles.iter().enumerate() {
        let d = spec.pole_distance(root, j);
        for m in &p.members {
            amplitudes.push(Complex64::new(-v[0] * g * m.gamma / d, 0.0));
        }
    }
    Ok(SectorState {
        time: 0.0,
        amplitudes,
    })
}

/// `‖(H − λ)ψ‖` for a real eigen-candidate `state` of the bordered
/// Hamiltonian at quasi-energy offset `lambda`.
pub fn eigen_residual(state: &SectorState, spec: &QuasiEnergySpectrum, lambda: f64) -> f64 {
    let g = spec.poles.coupling_g;
    let photon = state.amplitudes[0];
    let mut photon_row = (spec.poles.shaft - lambda) * photon;
    let mut sq = 0.0;
    let mut i = 1;
    for p in &spec.poles.poles {
        for m in &p.members {
            let c = state.amplitudes[i];
            photon_row += g * m.gamma * c;
            sq += (g * m.gamma * photon + (p.offset - lambda) * c).norm_sqr();
            i += 1;
        }
    }
    (sq + photon_row.norm_sqr()).sqrt()
}

/// Uniform or split-scale time grid (ns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub times: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(t_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 || !(t_max > 0.0) {
            return Err(Error::domain(
                "time grid needs t_max > 0 and at least two points",
            ));
        }
        let dt = t_max / (n_points - 1) as f64;
        Ok(TimeGrid {
            times: (0..n_points).map(|i| i as f64 * dt).collect(),
        })
    }

    /// `n_prefix` points on `[0, prefix_end)` followed by the remaining
    /// points spread over `[prefix_end, t_max]`.
    pub fn with_dense_prefix(
        t_max: f64,
        n_points: usize,
        prefix_end: f64,
        n_prefix: usize,
    ) -> Result<Self> {
        if !(prefix_end > 0.0 && prefix_end < t_max) || n_prefix == 0 || n_points < n_prefix + 2 {
            return Err(Error::domain(
                "dense prefix must lie inside (0, t_max) and leave at least two tail points",
            ));
        }
        let dp = prefix_end / n_prefix as f64;
        let n_tail = n_points - n_prefix;
        let dt = (t_max - prefix_end) / (n_tail - 1) as f64;
        let times = (0..n_prefix)
            .map(|i| i as f64 * dp)
            .chain((0..n_tail).map(|i| prefix_end + i as f64 * dt))
            .collect();
        Ok(TimeGrid { times })
    }

    /// The default split grid: 2000 points over 3 ns, 500 of them below 0.15 ns.
    pub fn default_split() -> Self {
        Self::with_dense_prefix(3.0, 2000, 0.15, 500).expect("valid default grid")
    }
}

/// How the exciton total of a time series was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExcitonTotalMethod {
    /// Explicit `Σ_k |C_k|²`.
    ModeSum,
    /// `Σ_m w_m − |φ|²` from the completeness of the quasi-energy states.
    Completeness,
}

/// Sampled one-photon observables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub exciton_total: Vec<f64>,
    pub collective_pop: Vec<f64>,
    pub residual: Vec<f64>,
    pub photon_pop: Vec<f64>,
    /// `1 − (photon + exciton)` with the mode sum, or the weight-closure
    /// defect when the completeness route is used.
    pub checksum: Vec<f64>,
    pub method: ExcitonTotalMethod,
    pub mode_labels: Vec<ModeLabel>,
    /// `|C_k(t)|` per time (outer) and selected mode (inner).
    pub mode_magnitudes: Vec<Vec<f64>>,
}

/// Options for [`evaluate_series`].
#[derive(Debug, Clone, Default)]
pub struct SeriesOptions {
    pub window: Option<ModeWindow>,
    /// Also export modes whose time-averaged population exceeds this.
    pub population_threshold: Option<f64>,
    /// Force the explicit mode sum regardless of cost.
    pub force_mode_sum: bool,
}

/// Evaluates the observables of the one-photon dynamics on `grid`.
pub fn evaluate_series(
    spec: &QuasiEnergySpectrum,
    grid: &TimeGrid,
    opts: &SeriesOptions,
) -> Result<TimeSeries> {
    let prop = SpectralPropagator::new(spec);
    let n_max = spec
        .poles
        .poles
        .iter()
        .flat_map(|p| p.members.iter())
        .map(|m| match m.label {
            ModeLabel::Chain { k } => k,
            ModeLabel::Well { kx, ky } => kx.max(ky),
        })
        .max()
        .unwrap_or(1);
    let mut selected = match opts.window {
        Some(w) => select_modes(&prop, w, n_max.max(w.lo))?,
        None => Vec::new(),
    };
    if let Some(thr) = opts.population_threshold {
        let avg = prop.time_averaged_mode_populations();
        selected.extend(
            avg.iter()
                .enumerate()
                .filter(|(_, &p)| p > thr)
                .map(|(i, _)| i),
        );
        selected.sort_unstable();
        selected.dedup();
    }
    let labels: Vec<ModeLabel> = prop.mode_labels().collect();
    let mode_labels = selected.iter().map(|&i| labels[i]).collect();

    let direct = opts.force_mode_sum || prop.kept_roots() * prop.n_modes() <= DIRECT_SUM_BUDGET;
    let closure = 1.0 - prop.dropped_weight() - spec.weight_closure_defect();
    let sample = |t: f64| -> (f64, f64, f64, f64, Vec<f64>) {
        let photon = prop.photon_amplitude(t).norm_sqr();
        let coll = prop.collective_amplitude(t).norm_sqr();
        let (exciton, check) = if direct {
            let s = prop.state(t);
            let ex = s.exciton_population();
            (ex, 1.0 - photon - ex)
        } else {
            // Kept weights sum to `closure`; the defect is what this route can certify.
            (closure - photon, 1.0 - closure)
        };
        let mags = if selected.is_empty() {
            Vec::new()
        } else {
            prop.mode_magnitudes(t, &selected)
        };
        (exciton, coll, photon, check, mags)
    };

    let rows: Vec<(f64, f64, f64, f64, Vec<f64>)> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            grid.times.par_iter().map(|&t| sample(t)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            grid.times.iter().map(|&t| sample(t)).collect()
        }
    };

    let mut out = TimeSeries {
        times: grid.times.clone(),
        exciton_total: Vec::with_capacity(rows.len()),
        collective_pop: Vec::with_capacity(rows.len()),
        residual: Vec::with_capacity(rows.len()),
        photon_pop: Vec::with_capacity(rows.len()),
        checksum: Vec::with_capacity(rows.len()),
        method: if direct {
            ExcitonTotalMethod::ModeSum
        } else {
            ExcitonTotalMethod::Completeness
        },
        mode_labels,
        mode_magnitudes: Vec::with_capacity(rows.len()),
    };
    for (ex, coll, ph, check, mags) in rows {
        out.exciton_total.push(ex);
        out.collective_pop.push(coll);
        out.residual.push(ex - coll);
        out.photon_pop.push(ph);
        out.checksum.push(check);
        out.mode_magnitudes.push(mags);
    }
    Ok(out)
}
