//! Dense diagonalization of the two-excitation sector, reduced by the chain
//! reflection `n → N+1−n`.
//!
//! The reflection commutes with the Hamiltonian and fixes `|2; 0⟩`, so only
//! the even sector carries weight; its eigenvectors are kept, the odd sector
//! contributes eigenvalues only.

use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{SparseHamiltonian, TwoSectorBasis};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, symmetric_eigenvalues, SymmetricEigen};
use crate::params::HBAR_EV_NS;

/// Largest parity-sector dimension handed to the dense eigensolver.
pub const DENSE_SECTOR_CAP: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Symmetry-adapted basis vectors, each with one or two site-basis entries.
#[derive(Debug, Clone)]
pub struct ParitySectors {
    pub even: Vec<Vec<(usize, f64)>>,
    pub odd: Vec<Vec<(usize, f64)>>,
}

impl ParitySectors {
    pub fn new(basis: &TwoSectorBasis) -> Self {
        let refl = basis.reflection();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (i, &j) in refl.iter().enumerate() {
            if j == i {
                even.push(vec![(i, 1.0)]);
            } else if i < j {
                even.push(vec![(i, s), (j, s)]);
                odd.push(vec![(i, s), (j, -s)]);
            }
        }
        ParitySectors { even, odd }
    }

    pub fn max_dim(&self) -> usize {
        self.even.len().max(self.odd.len())
    }

    /// Projected Hamiltonian `Pᵀ H P`, column-major.
    fn project(h: &SparseHamiltonian, vectors: &[Vec<(usize, f64)>]) -> Vec<f64> {
        let m = vectors.len();
        // Position and coefficient of every site index inside the sector.
        let mut slot = vec![(usize::MAX, 0.0); h.dim()];
        for (q, v) in vectors.iter().enumerate() {
            for &(i, c) in v {
                slot[i] = (q, c);
            }
        }
        let mut a = vec![0.0; m * m];
        for (q, v) in vectors.iter().enumerate() {
            for &(i, ci) in v {
                for (j, hij) in h.row(i) {
                    let (p, cj) = slot[j];
                    if p != usize::MAX {
                        a[q * m + p] += cj * hij * ci;
                    }
                }
            }
        }
        a
    }
}

/// One dressed level of the two-excitation sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSectorLevel {
    /// Energy relative to `2ħω` (eV).
    pub energy: f64,
    /// `|⟨2; 0|ψ⟩|²`.
    pub weight: f64,
    pub parity: Parity,
}

/// Levels sorted by energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSectorSpectrum {
    pub levels: Vec<TwoSectorLevel>,
}

impl TwoSectorSpectrum {
    pub fn weight_sum(&self) -> f64 {
        self.levels.iter().map(|l| l.weight).sum()
    }

    /// The `k` heaviest levels, re-sorted by energy.
    pub fn dominant(&self, k: usize) -> Vec<TwoSectorLevel> {
        let mut by_weight = self.levels.clone();
        by_weight.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then(a.energy.total_cmp(&b.energy))
        });
        by_weight.truncate(k);
        by_weight.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        by_weight
    }
}

/// Block weights of a sector state: vacuum, one-exciton, pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockWeights {
    pub vacuum: f64,
    pub one_exciton: f64,
    pub biexciton: f64,
}

impl BlockWeights {
    pub fn of_real(basis: &TwoSectorBasis, v: &[f64]) -> Self {
        let sq = |r: std::ops::Range<usize>| v[r].iter().map(|x| x * x).sum();
        BlockWeights {
            vacuum: v[0] * v[0],
            one_exciton: sq(basis.one_block()),
            biexciton: sq(basis.pair_block()),
        }
    }
}

/// Dense eigen-decomposition of the two-excitation sector.
#[derive(Debug, Clone)]
pub struct DenseTwoSector {
    basis: TwoSectorBasis,
    sectors: ParitySectors,
    even: SymmetricEigen,
    odd_values: Vec<f64>,
}

impl DenseTwoSector {
    pub fn new(basis: TwoSectorBasis, h: &SparseHamiltonian) -> Result<Self> {
        let sectors = ParitySectors::new(&basis);
        if sectors.max_dim() > DENSE_SECTOR_CAP {
            return Err(Error::Capacity {
                what: "dense parity-sector dimension",
                requested: sectors.max_dim(),
                cap: DENSE_SECTOR_CAP,
            });
        }
        let even = symmetric_eigen(
            sectors.even.len(),
            &ParitySectors::project(h, &sectors.even),
        )?;
        let odd_values =
            symmetric_eigenvalues(sectors.odd.len(), &ParitySectors::project(h, &sectors.odd))?;
        Ok(DenseTwoSector {
            basis,
            sectors,
            even,
            odd_values,
        })
    }

    pub fn basis(&self) -> &TwoSectorBasis {
        &self.basis
    }

    /// All levels with their weight on `|2; 0⟩`.
    pub fn spectrum(&self) -> TwoSectorSpectrum {
        // The vacuum is the first even basis vector, with coefficient 1.
        let mut levels: Vec<TwoSectorLevel> = (0..self.even.dim)
            .map(|j| {
                let c = self.even.vector(j)[0];
                TwoSectorLevel {
                    energy: self.even.values[j],
                    weight: c * c,
                    parity: Parity::Even,
                }
            })
            .chain(self.odd_values.iter().map(|&e| TwoSectorLevel {
                energy: e,
                weight: 0.0,
                parity: Parity::Odd,
            }))
            .collect();
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        TwoSectorSpectrum { levels }
    }

    pub fn even_len(&self) -> usize {
        self.even.dim
    }

    pub fn even_energy(&self, j: usize) -> f64 {
        self.even.values[j]
    }

    /// Even eigenvector `j` in the site basis.
    pub fn even_vector(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.basis.dim()];
        for (q, &c) in self.even.vector(j).iter().enumerate() {
            for &(i, s) in &self.sectors.even[q] {
                v[i] += s * c;
            }
        }
        v
    }

    /// Index of the even eigenvector with the largest vacuum weight among
    /// those with energy closest to `target`, scanning the `k` heaviest.
    pub fn dominant_even_near(&self, target: f64, k: usize) -> usize {
        let mut idx: Vec<usize> = (0..self.even.dim).collect();
        idx.sort_by(|&a, &b| {
            let wa = self.even.vector(a)[0].powi(2);
            let wb = self.even.vector(b)[0].powi(2);
            wb.total_cmp(&wa)
        });
        idx.truncate(k.max(1));
        idx.into_iter()
            .min_by(|&a, &b| {
                (self.even.values[a] - target)
                    .abs()
                    .total_cmp(&(self.even.values[b] - target).abs())
            })
            .expect("non-empty even sector")
    }

    /// `e^{−iHt/ħ}|2; 0⟩` in the site basis.
    pub fn state(&self, t: f64) -> Vec<Complex64> {
        self.states(&[t]).pop().expect("one time in, one state out")
    }

    /// [`Self::state`] at several times, as one matrix product per real and
    /// imaginary part.
    pub fn states(&self, times: &[f64]) -> Vec<Vec<Complex64>> {
        let m = self.even.dim;
        let v = MatRef::from_column_major_slice(&self.even.vectors, m, m);
        let phased: Vec<Complex64> = times
            .iter()
            .flat_map(|&t| {
                (0..m).map(move |j| {
                    Complex64::from_polar(
                        self.even.vector(j)[0],
                        -self.even.values[j] * t / HBAR_EV_NS,
                    )
                })
            })
            .collect();
        let re = v * Mat::from_fn(m, times.len(), |j, k| phased[k * m + j].re);
        let im = v * Mat::from_fn(m, times.len(), |j, k| phased[k * m + j].im);
        (0..times.len())
            .map(|k| {
                let mut psi = vec![Complex64::new(0.0, 0.0); self.basis.dim()];
                for (q, members) in self.sectors.even.iter().enumerate() {
                    let r = Complex64::new(re[(q, k)], im[(q, k)]);
                    for &(i, s) in members {
                        psi[i] += r * s;
                    }
                }
                psi
            })
            .collect()
    }
}
