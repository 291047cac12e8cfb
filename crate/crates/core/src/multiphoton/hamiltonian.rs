//! Site basis and sparse Hamiltonian of the two-excitation sector.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::PairIndex;
use crate::error::{Error, Result};
use crate::params::{Geometry, SystemParams};

/// Basis state of the two-excitation sector of an `N`-site chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoSectorLabel {
    /// `|2 photons; vacuum⟩`.
    Vacuum,
    /// `|1 photon; site n⟩`.
    OneExciton { site: usize },
    /// `|0 photons; sites a < b⟩`.
    Pair { a: usize, b: usize },
}

/// Ordering: the vacuum first, then `|1; n⟩` for `n = 1..N`, then site pairs
/// `a < b` lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoSectorBasis {
    n: usize,
    pairs: PairIndex,
}

impl TwoSectorBasis {
    pub const VACUUM: usize = 0;

    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!(
                "two-excitation sector needs at least 2 sites, got {n}"
            )));
        }
        Ok(TwoSectorBasis {
            n,
            pairs: PairIndex::new(n),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 + self.n + self.pairs.count()
    }

    /// Index of `|1; site⟩` (1-based site).
    #[inline]
    pub fn one(&self, site: usize) -> usize {
        site
    }

    /// Index of the pair `a < b`.
    #[inline]
    pub fn pair(&self, a: usize, b: usize) -> usize {
        1 + self.n + self.pairs.index(a, b)
    }

    /// Range of indices of the one-exciton block.
    pub fn one_block(&self) -> std::ops::Range<usize> {
        1..1 + self.n
    }

    pub fn pair_block(&self) -> std::ops::Range<usize> {
        1 + self.n..self.dim()
    }

    pub fn labels(&self) -> impl Iterator<Item = TwoSectorLabel> + '_ {
        std::iter::once(TwoSectorLabel::Vacuum)
            .chain((1..=self.n).map(|site| TwoSectorLabel::OneExciton { site }))
            .chain(
                self.pairs
                    .pairs()
                    .map(|(a, b)| TwoSectorLabel::Pair { a, b }),
            )
    }

    pub fn index_of(&self, label: TwoSectorLabel) -> Result<usize> {
        match label {
            TwoSectorLabel::Vacuum => Ok(Self::VACUUM),
            TwoSectorLabel::OneExciton { site } if (1..=self.n).contains(&site) => {
                Ok(self.one(site))
            }
            TwoSectorLabel::Pair { a, b } if a >= 1 && a < b && b <= self.n => Ok(self.pair(a, b)),
            other => Err(Error::domain(format!(
                "{other:?} is not a state of the {}-site sector",
                self.n
            ))),
        }
    }

    /// Image of every basis index under the chain reflection `n → N+1−n`.
    pub fn reflection(&self) -> Vec<usize> {
        let r = |n: usize| self.n + 1 - n;
        self.labels()
            .map(|l| match l {
                TwoSectorLabel::Vacuum => Self::VACUUM,
                TwoSectorLabel::OneExciton { site } => self.one(r(site)),
                TwoSectorLabel::Pair { a, b } => self.pair(r(b), r(a)),
            })
            .collect()
    }
}

/// Real symmetric Hamiltonian in coordinate form (upper triangle, diagonal
/// included, sorted by row then column) with a full CSR copy for products.
/// Energies are relative to `2ħω`.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Rows below this are multiplied serially.
#[cfg(feature = "parallel")]
const PARALLEL_ROWS: usize = 16_384;

impl SparseHamiltonian {
    /// Assembles from upper-triangle triplets; duplicates are summed.
    pub fn from_upper(dim: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r > c || c >= dim) {
            return Err(Error::domain(format!(
                "entry ({r}, {c}) is not in the upper triangle of a {dim}-matrix"
            )));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        entries.dedup_by(|next, kept| {
            if next.0 == kept.0 && next.1 == kept.1 {
                kept.2 += next.2;
                true
            } else {
                false
            }
        });
        let mut counts = vec![0usize; dim + 1];
        for &(r, c, _) in &entries {
            counts[r + 1] += 1;
            if r != c {
                counts[c + 1] += 1;
            }
        }
        for i in 0..dim {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut fill = counts;
        let nnz = row_ptr[dim];
        let mut cols = vec![0; nnz];
        let mut vals = vec![0.0; nnz];
        for &(r, c, v) in &entries {
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
            if r != c {
                cols[fill[c]] = r;
                vals[fill[c]] = v;
                fill[c] += 1;
            }
        }
        // Column order inside each row keeps products deterministic.
        for i in 0..dim {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            let mut row: Vec<(usize, f64)> = cols[lo..hi]
                .iter()
                .copied()
                .zip(vals[lo..hi].iter().copied())
                .collect();
            row.sort_by_key(|e| e.0);
            for (k, (c, v)) in row.into_iter().enumerate() {
                cols[lo + k] = c;
                vals[lo + k] = v;
            }
        }
        Ok(SparseHamiltonian {
            dim,
            entries,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored upper-triangle entries `(row, col, value)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// `(col, value)` pairs of row `i` of the full matrix.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi]
            .iter()
            .copied()
            .zip(self.vals[lo..hi].iter().copied())
    }

    /// Largest Gershgorin row sum `Σ_j |H_ij|`.
    pub fn gershgorin_radius(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn row_dot<T>(&self, i: usize, x: &[T]) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        self.row(i).map(|(c, v)| x[c] * v).sum()
    }

    fn apply<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + Send + Sync + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        #[cfg(feature = "parallel")]
        if self.dim >= PARALLEL_ROWS {
            use rayon::prelude::*;
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
            return;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }

    /// `y = H x` for a complex vector.
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply(x, y)
    }

    /// `y = H x` for a real vector.
    pub fn matvec_real(&self, x: &[f64], y: &mut [f64]) {
        self.apply(x, y)
    }

    /// `⟨x|H|x⟩` and `‖Hx‖²`.
    pub fn moments(&self, x: &[Complex64]) -> (f64, f64) {
        let mut hx = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec(x, &mut hx);
        let e = x.iter().zip(&hx).map(|(a, b)| (a.conj() * b).re).sum();
        let e2 = hx.iter().map(|v| v.norm_sqr()).sum();
        (e, e2)
    }

    /// Dense column-major copy (small dimensions only).
    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.dim * self.dim];
        for &(r, c, v) in &self.entries {
            a[c * self.dim + r] = v;
            a[r * self.dim + c] = v;
        }
        a
    }
}

/// Checks that `params` describe a chain and returns its basis.
pub fn two_sector_basis(params: &SystemParams) -> Result<TwoSectorBasis> {
    params.validate()?;
    match params.geometry() {
        Geometry::Chain { n } => TwoSectorBasis::new(n),
        Geometry::Well { .. } => Err(Error::domain(
            "the two-excitation sector is implemented for chains only",
        )),
    }
}

/// Assembles the two-excitation Hamiltonian in the site basis, relative to
/// `2ħω`. Hopping moves one excitation to an empty neighbouring site with
/// amplitude `−w`; `b` on two photons carries `√2`.
pub fn build_two_sector_hamiltonian(
    params: &SystemParams,
) -> Result<(TwoSectorBasis, SparseHamiltonian)> {
    let basis = two_sector_basis(params)?;
    let n = basis.n_sites();
    let w = params.hop_w;
    let g = params.coupling_g;
    // ε − ħω = (ε − ε₀) − δ avoids subtracting two ~eV numbers.
    let one_diag = params.site_to_lowest() - params.detuning();
    let pair_diag = 2.0 * one_diag;

    let mut e = Vec::with_capacity(basis.dim() * 4);
    e.push((TwoSectorBasis::VACUUM, TwoSectorBasis::VACUUM, 0.0));
    for site in 1..=n {
        let i = basis.one(site);
        e.push((TwoSectorBasis::VACUUM, i, g * std::f64::consts::SQRT_2));
        e.push((i, i, one_diag));
        if site < n {
            e.push((i, basis.one(site + 1), -w));
        }
    }
    for a in 1..n {
        for b in a + 1..=n {
            let p = basis.pair(a, b);
            e.push((basis.one(a), p, g));
            e.push((basis.one(b), p, g));
            e.push((p, p, pair_diag));
            // Forward moves only; the reverse moves are the transposed entries.
            if a + 1 < b {
                e.push((p, basis.pair(a + 1, b), -w));
            }
            if b < n {
                e.push((p, basis.pair(a, b + 1), -w));
            }
        }
    }
    let h = SparseHamiltonian::from_upper(basis.dim(), e)?;
    Ok((basis, h))
}
