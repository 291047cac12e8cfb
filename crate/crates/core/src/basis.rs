//! Field-free exciton and biexciton eigenbases.
//!
//! Site and mode indices are 1-based, as in the standing-wave solution
//! `χ_nk = √(2/(N+1))·sin(πnk/(N+1))`. Energies are reported both as absolute
//! values and as offsets above the lowest level `ε₀`; the offsets use
//! product-of-sines forms so that levels a few neV above `ε₀` keep full
//! relative precision.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

fn check_index(what: &str, k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("{what} = {k} outside 1..={n}")));
    }
    Ok(())
}

/// Amplitude `χ_nk` of mode `k` on site `n` of an `len`-site chain.
pub fn mode_shape(n: usize, k: usize, len: usize) -> Result<f64> {
    check_index("site", n, len)?;
    check_index("mode", k, len)?;
    Ok(mode_shape_unchecked(n, k, len))
}

#[inline]
pub(crate) fn mode_shape_unchecked(n: usize, k: usize, len: usize) -> f64 {
    let l1 = (len + 1) as f64;
    // Reduce n·k modulo 2(N+1) so the sine argument stays small.
    let nk = (n * k) % (2 * (len + 1));
    (2.0 / l1).sqrt() * (PI * nk as f64 / l1).sin()
}

/// Dense `len × len` mode transform, row-major with `[(n-1)·len + (k-1)] = χ_nk`.
/// The matrix is symmetric and orthogonal.
pub fn mode_transform(len: usize) -> Vec<f64> {
    let mut x = vec![0.0; len * len];
    for n in 1..=len {
        for k in n..=len {
            let v = mode_shape_unchecked(n, k, len);
            x[(n - 1) * len + (k - 1)] = v;
            x[(k - 1) * len + (n - 1)] = v;
        }
    }
    x
}

/// `E_k − (ε − 2w)` (height above the band edge) for a chain of `len` sites,
/// evaluated as `4w·sin²(πk/(2(N+1)))`.
#[inline]
pub fn mode_offset(k: usize, len: usize, hop_w: f64) -> f64 {
    let s = (PI * k as f64 / (2.0 * (len + 1) as f64)).sin();
    4.0 * hop_w * s * s
}

/// `E_k − E_1` for a chain of `len` sites, evaluated as
/// `4w·sin(a(k−1))·sin(a(k+1))` with `a = π/(2(N+1))`, which stays exact for
/// levels a few neV apart.
#[inline]
pub fn level_offset(k: usize, len: usize, hop_w: f64) -> f64 {
    let a = PI / (2.0 * (len + 1) as f64);
    4.0 * hop_w * (a * (k as f64 - 1.0)).sin() * (a * (k as f64 + 1.0)).sin()
}

/// Single-exciton energy `ε − 2w·cos(πk/(N+1))` of chain mode `k`.
pub fn exciton_energy_1d(k: usize, params: &SystemParams) -> Result<f64> {
    let n = params.n_atoms_x;
    check_index("mode", k, n)?;
    Ok(params.site_energy - 2.0 * params.hop_w * (PI * k as f64 / (n + 1) as f64).cos())
}

/// Photon-coupling amplitude `γ_k = Σ_n χ_nk` of chain mode `k`.
///
/// Closed form `√((1−(−1)^k)/(N+1))·cot(πk/(2(N+1)))`; exactly zero for even `k`.
pub fn oscillator_amplitude_1d(k: usize, len: usize) -> Result<f64> {
    check_index("mode", k, len)?;
    Ok(oscillator_amplitude_unchecked(k, len))
}

#[inline]
pub(crate) fn oscillator_amplitude_unchecked(k: usize, len: usize) -> f64 {
    if k.is_multiple_of(2) {
        return 0.0;
    }
    let l1 = (len + 1) as f64;
    (2.0 / l1).sqrt() / (PI * k as f64 / (2.0 * l1)).tan()
}

/// Exact 2D amplitude: the separable product of the two 1D sums.
pub fn oscillator_amplitude_2d(kx: usize, ky: usize, nx: usize, ny: usize) -> Result<f64> {
    Ok(oscillator_amplitude_1d(kx, nx)? * oscillator_amplitude_1d(ky, ny)?)
}

/// Large-`N` form `4√((1−(−1)^kx)(1−(−1)^ky)(Nx+1)(Ny+1))/(π²·kx·ky)` of the 2D
/// amplitude. Diagnostic only; dynamics always use [`oscillator_amplitude_2d`].
pub fn oscillator_amplitude_2d_asymptotic(
    kx: usize,
    ky: usize,
    nx: usize,
    ny: usize,
) -> Result<f64> {
    check_index("kx", kx, nx)?;
    check_index("ky", ky, ny)?;
    let px = if kx % 2 == 1 { 2.0 } else { 0.0 };
    let py = if ky % 2 == 1 { 2.0 } else { 0.0 };
    let num = 4.0 * (px * py * (nx + 1) as f64 * (ny + 1) as f64).sqrt();
    Ok(num / (PI * PI * kx as f64 * ky as f64))
}

/// A single-exciton standing wave of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitonMode1D {
    pub k: usize,
    pub energy: f64,
    /// `energy − ε₀`, evaluated without cancellation.
    pub offset: f64,
    pub gamma: f64,
    pub active: bool,
}

/// A single-exciton mode of the square well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcitonMode2D {
    pub kx: usize,
    pub ky: usize,
    pub energy: f64,
    pub offset: f64,
    pub gamma: f64,
    pub active: bool,
}

/// A free two-exciton state `|2, k1, k2⟩` with `k1 < k2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiexcitonLabel {
    pub k1: usize,
    pub k2: usize,
    pub energy: f64,
    /// `energy − 2ε₀`.
    pub offset: f64,
}

/// All chain modes in ascending `k`.
pub fn chain_modes(params: &SystemParams) -> Vec<ExcitonMode1D> {
    let n = params.n_atoms_x;
    let e0 = params.lowest_level();
    (1..=n)
        .map(|k| {
            let offset = level_offset(k, n, params.hop_w);
            ExcitonMode1D {
                k,
                energy: e0 + offset,
                offset,
                gamma: oscillator_amplitude_unchecked(k, n),
                active: k % 2 == 1,
            }
        })
        .collect()
}

/// All well modes in lexicographic `(kx, ky)` order.
pub fn well_modes(params: &SystemParams) -> Vec<ExcitonMode2D> {
    let (nx, ny) = (params.n_atoms_x, params.n_atoms_y.max(1));
    let e0 = params.lowest_level();
    let mut out = Vec::with_capacity(nx * ny);
    for kx in 1..=nx {
        let ox = level_offset(kx, nx, params.hop_w);
        let gx = oscillator_amplitude_unchecked(kx, nx);
        for ky in 1..=ny {
            let offset = ox + level_offset(ky, ny, params.hop_w);
            out.push(ExcitonMode2D {
                kx,
                ky,
                energy: e0 + offset,
                offset,
                gamma: gx * oscillator_amplitude_unchecked(ky, ny),
                active: kx % 2 == 1 && ky % 2 == 1,
            });
        }
    }
    out
}

/// Biexciton energy `2ε − 2w[cos(πk1/(N+1)) + cos(πk2/(N+1))]`.
pub fn biexciton_energy(k1: usize, k2: usize, params: &SystemParams) -> Result<f64> {
    let n = params.n_atoms_x;
    check_index("k1", k1, n)?;
    check_index("k2", k2, n)?;
    if k1 >= k2 {
        return Err(Error::domain(format!(
            "biexciton labels need k1 < k2, got ({k1}, {k2})"
        )));
    }
    Ok(exciton_energy_1d(k1, params)? + exciton_energy_1d(k2, params)?)
}

/// All `N(N−1)/2` biexciton labels in lexicographic `(k1, k2)` order.
pub fn biexciton_labels(params: &SystemParams) -> Vec<BiexcitonLabel> {
    let n = params.n_atoms_x;
    let e0 = params.lowest_level();
    let offsets: Vec<f64> = (1..=n).map(|k| level_offset(k, n, params.hop_w)).collect();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for k1 in 1..n {
        for k2 in k1 + 1..=n {
            let offset = offsets[k1 - 1] + offsets[k2 - 1];
            out.push(BiexcitonLabel {
                k1,
                k2,
                energy: 2.0 * e0 + offset,
                offset,
            });
        }
    }
    out
}

/// Indexing of unordered site (or mode) pairs `a < b` of an `len`-element set,
/// in lexicographic order. Indices passed in are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    len: usize,
}

impl PairIndex {
    pub fn new(len: usize) -> Self {
        PairIndex { len }
    }

    pub fn count(&self) -> usize {
        self.len * self.len.saturating_sub(1) / 2
    }

    /// Position of the pair `(a, b)`, `1 ≤ a < b ≤ len`.
    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a >= 1 && a < b && b <= self.len);
        let a0 = a - 1;
        a0 * (2 * self.len - a0 - 1) / 2 + (b - a - 1)
    }

    /// Iterates `(a, b)` in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let len = self.len;
        (1..len).flat_map(move |a| (a + 1..=len).map(move |b| (a, b)))
    }
}

/// Site-pair amplitudes of the free biexciton `|2, k1, k2⟩`, ordered as
/// [`PairIndex`]: `χ_{n1 k1}χ_{n2 k2} − χ_{n1 k2}χ_{n2 k1}` for `n1 < n2`.
pub fn biexciton_coefficients(k1: usize, k2: usize, len: usize) -> Result<Vec<f64>> {
    check_index("k1", k1, len)?;
    check_index("k2", k2, len)?;
    if k1 >= k2 {
        return Err(Error::domain(format!(
            "biexciton labels need k1 < k2, got ({k1}, {k2})"
        )));
    }
    let c1: Vec<f64> = (1..=len)
        .map(|n| mode_shape_unchecked(n, k1, len))
        .collect();
    let c2: Vec<f64> = (1..=len)
        .map(|n| mode_shape_unchecked(n, k2, len))
        .collect();
    let idx = PairIndex::new(len);
    Ok(idx
        .pairs()
        .map(|(a, b)| c1[a - 1] * c2[b - 1] - c2[a - 1] * c1[b - 1])
        .collect())
}

/// Mode-basis coefficients `γ_k/√N` (odd `k` only) of the collective
/// symmetric exciton `(1/√N)·Σ_n a_n†|0⟩`.
pub fn collective_state_1d(len: usize) -> Result<Vec<(usize, f64)>> {
    if len == 0 {
        return Err(Error::domain("chain length must be at least 1"));
    }
    let norm = (len as f64).sqrt();
    Ok((1..=len)
        .step_by(2)
        .map(|k| (k, oscillator_amplitude_unchecked(k, len) / norm))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params3() -> SystemParams {
        SystemParams::chain(3, 0.25, 1.0, 0.0, 1.0)
    }

    #[test]
    fn mode_shape_examples() {
        assert!((mode_shape(1, 1, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((mode_shape(1, 2, 3).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(mode_shape(0, 1, 3).is_err());
        assert!(mode_shape(1, 4, 3).is_err());
    }

    #[test]
    fn exciton_energy_examples() {
        let p = params3();
        assert!((exciton_energy_1d(2, &p).unwrap() - 1.0).abs() < 1e-15);
        assert!((exciton_energy_1d(1, &p).unwrap() - 0.6464466).abs() < 1e-7);
        assert!(exciton_energy_1d(4, &p).is_err());
    }

    #[test]
    fn quantization_gap_large_chain() {
        let n = 20000;
        let gap = mode_offset(1, n, 0.25);
        let expected = 0.25 * PI * PI / (20001.0f64 * 20001.0);
        assert!((gap - expected).abs() / expected < 1e-8);
        assert!((gap - 6.168e-9).abs() < 1e-12);
    }

    #[test]
    fn oscillator_examples() {
        assert_eq!(oscillator_amplitude_1d(2, 3).unwrap(), 0.0);
        assert!((oscillator_amplitude_1d(1, 1).unwrap() - 1.0).abs() < 1e-15);
        let g1 = oscillator_amplitude_1d(1, 3).unwrap();
        let g3 = oscillator_amplitude_1d(3, 3).unwrap();
        assert!((g1 - 1.7071068).abs() < 1e-7);
        assert!((g3 - 0.2928932).abs() < 1e-7);
        assert!((g1 * g1 + g3 * g3 - 3.0).abs() < 1e-14);
    }

    #[test]
    fn oscillator_2d_examples() {
        assert_eq!(oscillator_amplitude_2d(2, 1, 3, 3).unwrap(), 0.0);
        assert!((oscillator_amplitude_2d(1, 1, 3, 3).unwrap() - 2.9142136).abs() < 1e-7);
        let exact = oscillator_amplitude_2d(1, 1, 4001, 4001).unwrap();
        let asym = oscillator_amplitude_2d_asymptotic(1, 1, 4001, 4001).unwrap();
        assert!((exact / asym - 1.0).abs() < 1e-3);
    }

    #[test]
    fn biexciton_energy_examples() {
        let p = params3();
        assert!((biexciton_energy(1, 3, &p).unwrap() - 2.0).abs() < 1e-15);
        assert!((biexciton_energy(1, 2, &p).unwrap() - 1.6464466).abs() < 1e-7);
        assert!(biexciton_energy(2, 2, &p).is_err());
        assert!(biexciton_energy(3, 1, &p).is_err());
        let p5 = SystemParams::chain(5, 0.25, 1.0, 0.0, 1.0);
        assert_eq!(biexciton_labels(&p5).len(), 10);
    }

    #[test]
    fn biexciton_coefficient_examples() {
        let a = biexciton_coefficients(1, 2, 4).unwrap();
        let b = biexciton_coefficients(1, 3, 4).unwrap();
        let norm: f64 = a.iter().map(|x| x * x).sum();
        let overlap: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((norm - 1.0).abs() < 1e-14);
        assert!(overlap.abs() < 1e-14);
        assert!(biexciton_coefficients(2, 2, 4).is_err());
    }

    #[test]
    fn collective_examples() {
        let c1 = collective_state_1d(1).unwrap();
        assert_eq!(c1.len(), 1);
        assert!((c1[0].1 - 1.0).abs() < 1e-15);
        let c3 = collective_state_1d(3).unwrap();
        assert_eq!(c3.len(), 2);
        assert!((c3[0].1 - 0.98559).abs() < 1e-5);
        assert!((c3[1].1 - 0.16910).abs() < 1e-5);
        // Site image is uniform.
        let n = 5;
        let c5 = collective_state_1d(n).unwrap();
        for site in 1..=n {
            let amp: f64 = c5
                .iter()
                .map(|&(k, c)| c * mode_shape(site, k, n).unwrap())
                .sum();
            assert!((amp - 1.0 / (n as f64).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn pair_index_is_dense_and_ordered() {
        let idx = PairIndex::new(6);
        for (i, (a, b)) in idx.pairs().enumerate() {
            assert_eq!(idx.index(a, b), i);
        }
        assert_eq!(idx.count(), 15);
    }

    #[test]
    fn mode_enumeration_order() {
        let p = SystemParams::well(3, 2, 0.25, 1.5, 0.0, 0.5);
        let modes = well_modes(&p);
        let labels: Vec<_> = modes.iter().map(|m| (m.kx, m.ky)).collect();
        assert_eq!(labels, vec![(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)]);
        assert!(modes
            .iter()
            .all(|m| m.active == (m.kx % 2 == 1 && m.ky % 2 == 1)));
        for m in &modes {
            let direct =
                1.5 - 0.5 * (PI * m.kx as f64 / 4.0).cos() - 0.5 * (PI * m.ky as f64 / 3.0).cos();
            assert!((m.energy - direct).abs() < 1e-14);
        }
    }
}
