//! Short-iteration Lanczos propagation and Lanczos spectral densities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::SparseHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::params::HBAR_EV_NS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovOptions {
    /// Krylov subspace size per step.
    pub subspace: usize,
    /// Bound on the estimated error norm of a single step.
    pub step_tol: f64,
    /// Hard cap on Hamiltonian applications for one trajectory.
    pub max_matvecs: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            subspace: 30,
            step_tol: 1e-12,
            max_matvecs: 2_000_000,
        }
    }
}

/// Work summary of one trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KrylovStats {
    pub matvecs: usize,
    pub steps: usize,
    /// Sum of per-step error estimates.
    pub error_bound: f64,
}

struct Subspace {
    basis: Vec<Vec<Complex64>>,
    values: Vec<f64>,
    /// Column-major eigenvectors of the tridiagonal matrix.
    vectors: Vec<f64>,
    /// Norm of the residual direction; zero on an invariant subspace.
    beta_last: f64,
    norm: f64,
}

impl Subspace {
    fn build(
        h: &SparseHamiltonian,
        psi: &[Complex64],
        m_max: usize,
        stats: &mut KrylovStats,
    ) -> Result<Self> {
        let dim = h.dim();
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let m_max = m_max.min(dim).max(1);
        let mut basis: Vec<Vec<Complex64>> = vec![psi.iter().map(|c| c / norm).collect()];
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta = Vec::with_capacity(m_max);
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        // Breakdown threshold relative to the operator scale.
        let scale = h.gershgorin_radius().max(f64::MIN_POSITIVE);
        let beta_last = loop {
            let j = basis.len() - 1;
            h.matvec(&basis[j], &mut w);
            stats.matvecs += 1;
            // ⟨v|H|v⟩ is real for a symmetric H.
            alpha.push(
                basis[j]
                    .iter()
                    .zip(&w)
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum::<f64>(),
            );
            // Full re-orthogonalisation, applied twice.
            for _ in 0..2 {
                for v in &basis {
                    let c: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let b = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if b <= 1e-13 * scale {
                break 0.0;
            }
            if basis.len() == m_max {
                break b;
            }
            beta.push(b);
            basis.push(w.iter().map(|c| c / b).collect());
        };
        let m = basis.len();
        let mut t = vec![0.0; m * m];
        for j in 0..m {
            t[j * m + j] = alpha[j];
            if j + 1 < m {
                t[j * m + j + 1] = beta[j];
                t[(j + 1) * m + j] = beta[j];
            }
        }
        let eig = symmetric_eigen(m, &t)?;
        Ok(Subspace {
            basis,
            values: eig.values,
            vectors: eig.vectors,
            beta_last,
            norm,
        })
    }

    fn coefficients(&self, tau: f64) -> Vec<Complex64> {
        let m = self.basis.len();
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..m {
            let q = &self.vectors[k * m..(k + 1) * m];
            let phase = Complex64::from_polar(q[0] * self.norm, -self.values[k] * tau / HBAR_EV_NS);
            for (ci, &qi) in c.iter_mut().zip(q) {
                *ci += phase * qi;
            }
        }
        c
    }

    /// Bound on `‖ψ_exact(τ) − ψ_Krylov(τ)‖` from the residual
    /// `β_m c_m(s) v_{m+1}`: `(β_m/ħ)∫₀^τ |c_m(s)| ds`, by the trapezoid rule.
    fn error(&self, tau: f64) -> f64 {
        if self.beta_last == 0.0 || tau == 0.0 {
            return 0.0;
        }
        const NODES: usize = 16;
        let m = self.basis.len();
        let mut acc = 0.0;
        for i in 0..=NODES {
            let s = tau * i as f64 / NODES as f64;
            let c = self.coefficients(s)[m - 1].norm();
            acc += if i == 0 || i == NODES { 0.5 * c } else { c };
        }
        self.beta_last * acc * (tau / NODES as f64) / HBAR_EV_NS
    }

    fn combine(&self, c: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (v, &ck) in self.basis.iter().zip(c) {
            for (o, &vi) in out.iter_mut().zip(v) {
                *o += ck * vi;
            }
        }
    }
}

/// Propagates `psi0` under `h` and calls `emit(i, state)` at every
/// `times[i]` (ascending, starting at or after 0).
pub fn propagate_krylov(
    h: &SparseHamiltonian,
    psi0: &[Complex64],
    times: &[f64],
    opts: &KrylovOptions,
    mut emit: impl FnMut(usize, &[Complex64]) -> Result<()>,
) -> Result<KrylovStats> {
    if times.windows(2).any(|w| !(w[1] >= w[0])) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::domain(
            "output times must be non-negative and ascending",
        ));
    }
    let mut stats = KrylovStats::default();
    let mut psi = psi0.to_vec();
    let mut now = 0.0;
    let mut next = 0;
    while next < times.len() && times[next] <= now {
        emit(next, &psi)?;
        next += 1;
    }
    while next < times.len() {
        if stats.matvecs > opts.max_matvecs {
            return Err(Error::Capacity {
                what: "Krylov matrix-vector products",
                requested: stats.matvecs,
                cap: opts.max_matvecs,
            });
        }
        let sub = Subspace::build(h, &psi, opts.subspace, &mut stats)?;
        stats.steps += 1;
        // Serve as many output times as the subspace allows.
        let mut served = false;
        while next < times.len() {
            let tau = times[next] - now;
            let err = sub.error(tau);
            if err > opts.step_tol {
                break;
            }
            let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
            sub.combine(&sub.coefficients(tau), &mut out);
            emit(next, &out)?;
            if next + 1 == times.len() || sub.error(times[next + 1] - now) > opts.step_tol {
                stats.error_bound += err;
                psi = out;
                now = times[next];
                next += 1;
                served = true;
                break;
            }
            next += 1;
            served = true;
        }
        if served {
            continue;
        }
        // Largest acceptable step towards the next output time, by bisection.
        let (mut lo, mut hi) = (0.0, times[next] - now);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if sub.error(mid) <= opts.step_tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if !(lo > 0.0) {
            return Err(Error::Tolerance(format!(
                "Krylov step at t = {now:e} ns cannot meet the error bound {:e}",
                opts.step_tol
            )));
        }
        stats.error_bound += sub.error(lo);
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        sub.combine(&sub.coefficients(lo), &mut out);
        psi = out;
        now += lo;
    }
    Ok(stats)
}

/// Lanczos estimate of the spectral density of `start`: Ritz values with
/// weights `|⟨start|θ⟩|²`, using full re-orthogonalisation.
pub fn lanczos_density(
    h: &SparseHamiltonian,
    start: &[f64],
    steps: usize,
) -> Result<Vec<(f64, f64)>> {
    let dim = h.dim();
    if start.len() != dim {
        return Err(Error::domain("start vector has the wrong length"));
    }
    let norm2: f64 = start.iter().map(|x| x * x).sum();
    if !(norm2 > 0.0) {
        return Err(Error::domain("start vector is zero"));
    }
    let steps = steps.min(dim).max(1);
    let scale = h.gershgorin_radius().max(f64::MIN_POSITIVE);
    let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / norm2.sqrt()).collect()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![0.0; dim];
    loop {
        let j = basis.len() - 1;
        h.matvec_real(&basis[j], &mut w);
        alpha.push(basis[j].iter().zip(&w).map(|(a, b)| a * b).sum::<f64>());
        for _ in 0..2 {
            for v in &basis {
                let c: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if basis.len() == steps || b <= 1e-13 * scale {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let m = alpha.len();
    let mut t = vec![0.0; m * m];
    for j in 0..m {
        t[j * m + j] = alpha[j];
        if j + 1 < m {
            t[j * m + j + 1] = beta[j];
            t[(j + 1) * m + j] = beta[j];
        }
    }
    let eig = symmetric_eigen(m, &t)?;
    Ok((0..m)
        .map(|k| (eig.values[k], norm2 * eig.vector(k)[0].powi(2)))
        .collect())
}
