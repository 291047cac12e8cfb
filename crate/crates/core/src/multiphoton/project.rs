//! Observables of two-excitation states and their projection on free
//! exciton and biexciton states.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::TwoSectorBasis;
use crate::basis::{mode_transform, PairIndex};
use crate::error::{Error, Result};

/// Block populations and collective-mode overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSectorObservables {
    pub vacuum: f64,
    pub exciton_total: f64,
    pub biexciton_total: f64,
    /// Population of `|1 photon⟩ ⊗ (1/√N)Σ_n|n⟩`.
    pub collective_exciton: f64,
    /// Population of the normalised `(R†)²|0⟩`.
    pub collective_biexciton: f64,
}

impl TwoSectorObservables {
    pub fn total(&self) -> f64 {
        self.vacuum + self.exciton_total + self.biexciton_total
    }

    pub fn exciton_residual(&self) -> f64 {
        self.exciton_total - self.collective_exciton
    }

    pub fn biexciton_residual(&self) -> f64 {
        self.biexciton_total - self.collective_biexciton
    }
}

pub fn observables(basis: &TwoSectorBasis, psi: &[Complex64]) -> TwoSectorObservables {
    let n = basis.n_sites() as f64;
    let one = &psi[basis.one_block()];
    let pairs = &psi[basis.pair_block()];
    let sum_one: Complex64 = one.iter().sum();
    let sum_pairs: Complex64 = pairs.iter().sum();
    TwoSectorObservables {
        vacuum: psi[TwoSectorBasis::VACUUM].norm_sqr(),
        exciton_total: one.iter().map(|c| c.norm_sqr()).sum(),
        biexciton_total: pairs.iter().map(|c| c.norm_sqr()).sum(),
        collective_exciton: sum_one.norm_sqr() / n,
        collective_biexciton: sum_pairs.norm_sqr() * 2.0 / (n * (n - 1.0)),
    }
}

/// Populations of the free states `|1 photon; k⟩` and `|0 photons; k1 < k2⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeStateProjection {
    pub vacuum: f64,
    /// Index `k − 1`.
    pub excitons: Vec<f64>,
    /// Ordered as [`PairIndex`] over `(k1, k2)`.
    pub biexcitons: Vec<f64>,
}

impl FreeStateProjection {
    pub fn zeros(n: usize) -> Self {
        FreeStateProjection {
            vacuum: 0.0,
            excitons: vec![0.0; n],
            biexcitons: vec![0.0; PairIndex::new(n).count()],
        }
    }

    pub fn total(&self) -> f64 {
        self.vacuum + self.excitons.iter().sum::<f64>() + self.biexcitons.iter().sum::<f64>()
    }

    pub fn accumulate(&mut self, other: &FreeStateProjection, scale: f64) {
        self.vacuum += scale * other.vacuum;
        self.excitons
            .iter_mut()
            .zip(&other.excitons)
            .for_each(|(a, b)| *a += scale * b);
        self.biexcitons
            .iter_mut()
            .zip(&other.biexcitons)
            .for_each(|(a, b)| *a += scale * b);
    }
}

/// Projects with the free-fermion eigenbasis of the hard-core hopping block.
/// Biexciton amplitudes are `Xᵀ A X` with `A` the antisymmetrised pair
/// amplitudes and `X` the mode transform.
#[derive(Debug, Clone)]
pub struct FreeStateProjector {
    basis: TwoSectorBasis,
    x: Mat<f64>,
}

impl FreeStateProjector {
    pub fn new(basis: TwoSectorBasis) -> Self {
        let n = basis.n_sites();
        let xt = mode_transform(n);
        FreeStateProjector {
            basis,
            x: Mat::from_fn(n, n, |i, j| xt[i * n + j]),
        }
    }

    pub fn project(&self, psi: &[Complex64]) -> Result<FreeStateProjection> {
        let b = &self.basis;
        if psi.len() != b.dim() {
            return Err(Error::domain(format!(
                "state length {} does not match sector dimension {}",
                psi.len(),
                b.dim()
            )));
        }
        let n = b.n_sites();
        let one = &psi[b.one_block()];
        let excitons = (0..n)
            .map(|k| {
                let c: Complex64 = (0..n).map(|s| one[s] * self.x[(s, k)]).sum();
                c.norm_sqr()
            })
            .collect();

        let pairs = PairIndex::new(n);
        let mut biexcitons = vec![0.0; pairs.count()];
        for part in [|c: Complex64| c.re, |c: Complex64| c.im] {
            let mut a = Mat::<f64>::zeros(n, n);
            for (s1, s2) in pairs.pairs() {
                let v = part(psi[b.pair(s1, s2)]);
                a[(s1 - 1, s2 - 1)] = v;
                a[(s2 - 1, s1 - 1)] = -v;
            }
            let m = self.x.transpose() * &a * &self.x;
            for (p, (k1, k2)) in pairs.pairs().enumerate() {
                biexcitons[p] += m[(k1 - 1, k2 - 1)].powi(2);
            }
        }
        Ok(FreeStateProjection {
            vacuum: psi[0].norm_sqr(),
            excitons,
            biexcitons,
        })
    }
}

/// One-shot convenience over [`FreeStateProjector`].
pub fn project_free_states(
    basis: &TwoSectorBasis,
    psi: &[Complex64],
) -> Result<FreeStateProjection> {
    FreeStateProjector::new(*basis).project(psi)
}
