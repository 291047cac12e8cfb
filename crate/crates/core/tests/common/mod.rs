#![allow(dead_code)]

use num_complex::Complex64;
use rabishift::basis::{chain_modes, well_modes};
use rabishift::linalg::symmetric_eigen;
use rabishift::{Geometry, SystemParams};

/// Unmerged active modes `(offset, γ)` of `params`, ascending.
pub fn active_modes(params: &SystemParams) -> Vec<(f64, f64)> {
    let mut m: Vec<(f64, f64)> = match params.geometry() {
        Geometry::Chain { .. } => chain_modes(params)
            .into_iter()
            .filter(|m| m.active)
            .map(|m| (m.offset, m.gamma))
            .collect(),
        Geometry::Well { .. } => well_modes(params)
            .into_iter()
            .filter(|m| m.active)
            .map(|m| (m.offset, m.gamma))
            .collect(),
    };
    m.sort_by(|a, b| a.0.total_cmp(&b.0));
    m
}

/// Dense bordered matrix (photon first) in offsets from the band bottom,
/// diagonalized directly: `(λ, photon weight)` ascending.
pub fn dense_bordered(params: &SystemParams) -> Vec<(f64, f64)> {
    let modes = active_modes(params);
    let dim = modes.len() + 1;
    let mut a = vec![0.0; dim * dim];
    a[0] = params.detuning();
    for (j, &(e, g)) in modes.iter().enumerate() {
        a[(j + 1) * dim + j + 1] = e;
        a[(j + 1) * dim] = params.coupling_g * g;
        a[j + 1] = params.coupling_g * g;
    }
    let eig = symmetric_eigen(dim, &a).unwrap();
    (0..dim)
        .map(|k| (eig.values[k], eig.vector(k)[0].powi(2)))
        .collect()
}

/// Classical RK4 for `iħ dψ/dt = Hψ` with a dense real symmetric `h`
/// (row-major), in eV and ns.
pub fn rk4(h: &[f64], psi0: &[Complex64], t: f64, steps: usize) -> Vec<Complex64> {
    let n = psi0.len();
    let dt = t / steps as f64;
    let f = |psi: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let s: Complex64 = (0..n).map(|j| psi[j] * h[i * n + j]).sum();
                s * Complex64::new(0.0, -1.0 / rabishift::HBAR_EV_NS)
            })
            .collect()
    };
    let axpy = |x: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
        x.iter().zip(k).map(|(a, b)| a + b * s).collect()
    };
    let mut psi = psi0.to_vec();
    for _ in 0..steps {
        let k1 = f(&psi);
        let k2 = f(&axpy(&psi, &k1, dt / 2.0));
        let k3 = f(&axpy(&psi, &k2, dt / 2.0));
        let k4 = f(&axpy(&psi, &k3, dt));
        for i in 0..n {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    psi
}
