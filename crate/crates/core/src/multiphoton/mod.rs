//! The two-excitation sector: two photons shared between the cavity mode and
//! a hard-core exciton chain.
//!
//! The Hamiltonian is assembled exactly in the site basis, so exciton ↔
//! biexciton transition elements never have to be written down; free-state
//! populations come from projecting the site-basis state afterwards.
//!
//! Two engines are available. Up to [`DENSE_SECTOR_CAP`] states per
//! reflection-parity sector the spectrum is diagonalized outright; beyond
//! that, states are propagated with short-iteration Lanczos steps and the
//! spectrum seen from `|2; 0⟩` is estimated by a Lanczos density.

mod dense;
mod hamiltonian;
mod krylov;
mod project;

pub use dense::{
    BlockWeights, DenseTwoSector, Parity, ParitySectors, TwoSectorLevel, TwoSectorSpectrum,
    DENSE_SECTOR_CAP,
};
pub use hamiltonian::{
    build_two_sector_hamiltonian, two_sector_basis, SparseHamiltonian, TwoSectorBasis,
    TwoSectorLabel,
};
pub use krylov::{lanczos_density, propagate_krylov, KrylovOptions, KrylovStats};
pub use project::{
    observables, project_free_states, FreeStateProjection, FreeStateProjector, TwoSectorObservables,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Largest chain handled by the two-excitation engines.
pub const MAX_TWO_SECTOR_SITES: usize = 400;

/// Default number of Lanczos steps for spectra beyond the dense cap.
pub const DEFAULT_LANCZOS_STEPS: usize = 300;

/// Time points propagated together by the dense engine.
const DENSE_TIME_CHUNK: usize = 64;

/// `|2; 0⟩` as a sector state.
pub fn vacuum_state(basis: &TwoSectorBasis) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); basis.dim()];
    psi[TwoSectorBasis::VACUUM] = Complex64::new(1.0, 0.0);
    psi
}

fn check_capacity(basis: &TwoSectorBasis) -> Result<()> {
    if basis.n_sites() > MAX_TWO_SECTOR_SITES {
        return Err(Error::Capacity {
            what: "two-excitation chain length",
            requested: basis.n_sites(),
            cap: MAX_TWO_SECTOR_SITES,
        });
    }
    Ok(())
}

/// How a two-excitation spectrum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumMethod {
    Dense,
    Lanczos,
}

/// Dense spectrum with weights on `|2; 0⟩`. Fails with a capacity error above
/// the dense cap; use [`two_sector_density`] there.
pub fn two_sector_quasienergies(params: &SystemParams) -> Result<TwoSectorSpectrum> {
    check_capacity(&two_sector_basis(params)?)?;
    let (basis, h) = build_two_sector_hamiltonian(params)?;
    Ok(DenseTwoSector::new(basis, &h)?.spectrum())
}

/// Spectrum seen from `|2; 0⟩`: exact when within the dense cap, otherwise a
/// Lanczos density with `steps` Ritz values (odd levels are then absent).
pub fn two_sector_density(
    params: &SystemParams,
    steps: usize,
) -> Result<(TwoSectorSpectrum, SpectrumMethod)> {
    check_capacity(&two_sector_basis(params)?)?;
    let (basis, h) = build_two_sector_hamiltonian(params)?;
    if ParitySectors::new(&basis).max_dim() <= DENSE_SECTOR_CAP {
        return Ok((
            DenseTwoSector::new(basis, &h)?.spectrum(),
            SpectrumMethod::Dense,
        ));
    }
    let mut start = vec![0.0; basis.dim()];
    start[TwoSectorBasis::VACUUM] = 1.0;
    let levels = lanczos_density(&h, &start, steps)?
        .into_iter()
        .map(|(energy, weight)| TwoSectorLevel {
            energy,
            weight,
            parity: Parity::Even,
        })
        .collect();
    Ok((TwoSectorSpectrum { levels }, SpectrumMethod::Lanczos))
}

/// Options for [`two_sector_dynamics`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSectorRunOptions {
    pub krylov: KrylovOptions,
    /// Force the Krylov engine even when the dense one would fit.
    pub force_krylov: bool,
    /// Free-state projections are averaged over samples with `t ≤` this (ns).
    pub average_until: f64,
    /// At most this many samples enter the projection average; 0 skips the
    /// projection.
    pub max_projection_samples: usize,
}

impl Default for TwoSectorRunOptions {
    fn default() -> Self {
        TwoSectorRunOptions {
            krylov: KrylovOptions::default(),
            force_krylov: false,
            average_until: 3.0,
            max_projection_samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagationMethod {
    Dense,
    Krylov,
}

/// Sampled two-excitation trajectory from `|2; 0⟩`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSectorRun {
    pub n_sites: usize,
    pub method: PropagationMethod,
    pub times: Vec<f64>,
    pub observables: Vec<TwoSectorObservables>,
    /// `1 − ‖ψ‖²` per sample.
    pub unitarity_defect: Vec<f64>,
    /// `|⟨H⟩(t) − ⟨H⟩(0)|` over the energy spread `‖Hψ₀‖`.
    pub energy_drift: Vec<f64>,
    /// Time-averaged free-state populations.
    pub averaged_projection: FreeStateProjection,
    pub projection_samples: usize,
    pub krylov: Option<KrylovStats>,
}

impl TwoSectorRun {
    pub fn max_unitarity_defect(&self) -> f64 {
        self.unitarity_defect
            .iter()
            .fold(0.0, |a, &b| a.max(b.abs()))
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.energy_drift.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn max_biexciton(&self) -> f64 {
        self.observables
            .iter()
            .fold(0.0, |a, o| a.max(o.biexciton_total))
    }

    pub fn min_vacuum(&self) -> f64 {
        self.observables
            .iter()
            .fold(f64::INFINITY, |a, o| a.min(o.vacuum))
    }
}

/// Propagates `|2; 0⟩` over `times` (ascending, ns).
pub fn two_sector_dynamics(
    params: &SystemParams,
    times: &[f64],
    opts: &TwoSectorRunOptions,
) -> Result<TwoSectorRun> {
    Ok(two_sector_study(params, times, opts, None)?.1)
}

/// [`two_sector_density`] and [`two_sector_dynamics`] together, sharing one
/// dense decomposition when it fits. `lanczos_steps = None` skips the
/// spectrum.
pub fn two_sector_study(
    params: &SystemParams,
    times: &[f64],
    opts: &TwoSectorRunOptions,
    lanczos_steps: Option<usize>,
) -> Result<(Option<(TwoSectorSpectrum, SpectrumMethod)>, TwoSectorRun)> {
    check_capacity(&two_sector_basis(params)?)?;
    let (basis, h) = build_two_sector_hamiltonian(params)?;
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || times[0] < 0.0 {
        return Err(Error::domain(
            "time grid must be non-empty, non-negative and strictly increasing",
        ));
    }
    let psi0 = vacuum_state(&basis);
    let (e0, e2) = h.moments(&psi0);
    let spread = (e2 - e0 * e0)
        .max(0.0)
        .sqrt()
        .max(e0.abs())
        .max(f64::MIN_POSITIVE);

    // Evenly thinned averaging samples inside the window.
    let in_window: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] <= opts.average_until)
        .collect();
    let averaged: std::collections::BTreeSet<usize> = if opts.max_projection_samples == 0 {
        Default::default()
    } else {
        let stride = in_window.len().div_ceil(opts.max_projection_samples).max(1);
        in_window.iter().copied().step_by(stride).collect()
    };

    let projector = FreeStateProjector::new(basis);
    let mut run = TwoSectorRun {
        n_sites: basis.n_sites(),
        method: PropagationMethod::Dense,
        times: times.to_vec(),
        observables: Vec::with_capacity(times.len()),
        unitarity_defect: Vec::with_capacity(times.len()),
        energy_drift: Vec::with_capacity(times.len()),
        averaged_projection: FreeStateProjection::zeros(basis.n_sites()),
        projection_samples: averaged.len(),
        krylov: None,
    };
    let scale = 1.0 / averaged.len().max(1) as f64;
    let mut record = |i: usize, psi: &[Complex64]| -> Result<()> {
        let obs = observables(&basis, psi);
        let norm2: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let (e, _) = h.moments(psi);
        run.observables.push(obs);
        run.unitarity_defect.push(1.0 - norm2);
        run.energy_drift.push((e - e0).abs() / spread);
        if averaged.contains(&i) {
            let p = projector.project(psi)?;
            run.averaged_projection.accumulate(&p, scale);
        }
        Ok(())
    };

    let dense_fits = ParitySectors::new(&basis).max_dim() <= DENSE_SECTOR_CAP;
    let dense = if dense_fits && (lanczos_steps.is_some() || !opts.force_krylov) {
        Some(DenseTwoSector::new(basis, &h)?)
    } else {
        None
    };
    let spectrum = match (lanczos_steps, &dense) {
        (None, _) => None,
        (Some(_), Some(d)) => Some((d.spectrum(), SpectrumMethod::Dense)),
        (Some(steps), None) => {
            let mut start = vec![0.0; basis.dim()];
            start[TwoSectorBasis::VACUUM] = 1.0;
            let levels = lanczos_density(&h, &start, steps)?
                .into_iter()
                .map(|(energy, weight)| TwoSectorLevel {
                    energy,
                    weight,
                    parity: Parity::Even,
                })
                .collect();
            Some((TwoSectorSpectrum { levels }, SpectrumMethod::Lanczos))
        }
    };
    match &dense {
        Some(d) if !opts.force_krylov => {
            for (c, chunk) in times.chunks(DENSE_TIME_CHUNK).enumerate() {
                for (k, psi) in d.states(chunk).iter().enumerate() {
                    record(c * DENSE_TIME_CHUNK + k, psi)?;
                }
            }
        }
        _ => {
            let stats = propagate_krylov(&h, &psi0, times, &opts.krylov, &mut record)?;
            run.method = PropagationMethod::Krylov;
            run.krylov = Some(stats);
        }
    }
    Ok((spectrum, run))
}
