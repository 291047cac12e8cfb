//! One-photon quasi-energy spectrum.
//!
//! In the sector spanned by `|1 photon; 0⟩` and the active single-exciton
//! modes the Hamiltonian is an arrowhead matrix: the photon level `ħω`
//! bordering the diagonal of pole energies `ε_j`, with border entries `g·γ_j`.
//! Its eigenvalues are the roots of
//!
//! ```text
//! f(λ) = (ħω − λ) − g²·G(λ),    G(λ) = Σ_j γ_j² / (ε_j − λ)
//! ```
//!
//! which is strictly decreasing between consecutive poles, so exactly one
//! root lies in each gap, one below the lowest pole and one above the
//! highest. Each root is stored relative to its nearest pole ("anchor") so
//! that roots pinned within a few ulps of a pole keep full precision in
//! every pole distance `ε_j − λ`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::basis::{chain_modes, well_modes};
use crate::error::{Error, Result};
use crate::params::{Geometry, SystemParams};
use crate::refmodels::{two_level_polariton, TwoLevelPolariton};

/// Poles whose energies agree within this fraction of the absolute energy
/// scale are merged into one degenerate group.
pub const DEGENERACY_RTOL: f64 = 1e-12;

/// Guard band around poles for direct evaluation of `G`, in units of
/// machine epsilon times the spectral span.
pub const POLE_GUARD_ULPS: f64 = 1e3;

/// Bisection narrows each bracket to this fraction of its width before the
/// Newton phase.
const BISECTION_RTOL: f64 = 1e-3;

const MAX_REFINEMENT_STEPS: usize = 200;

/// Label of a single-exciton mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    Chain { k: usize },
    Well { kx: usize, ky: usize },
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeLabel::Chain { k } => write!(f, "{k}"),
            ModeLabel::Well { kx, ky } => write!(f, "{kx}:{ky}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleMember {
    pub label: ModeLabel,
    pub gamma: f64,
}

/// One distinct active pole; degenerate modes are merged with
/// `coupling = √(Σ γ²)` over the group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    /// Pole energy relative to [`ActivePoleSet::reference`].
    pub offset: f64,
    pub coupling: f64,
    pub multiplicity: usize,
    pub members: Vec<PoleMember>,
}

/// Distinct active poles in ascending energy, with the photon level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivePoleSet {
    /// Absolute energy (the lowest exciton level `ε₀`) that offsets are measured from.
    pub reference: f64,
    pub poles: Vec<Pole>,
    /// `ħω − reference`.
    pub shaft: f64,
    pub coupling_g: f64,
}

impl ActivePoleSet {
    /// Builds a pole set from raw `(offset, γ, label)` modes, merging
    /// degenerate energies. Modes with `γ = 0` are dropped.
    pub fn from_modes(
        reference: f64,
        shaft: f64,
        coupling_g: f64,
        merge_tol: f64,
        mut modes: Vec<(f64, f64, ModeLabel)>,
    ) -> Result<Self> {
        modes.retain(|m| m.1 != 0.0);
        if modes.is_empty() {
            return Err(Error::domain("no active modes"));
        }
        modes.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then(a.2.cmp(&b.2))
        });
        let mut poles: Vec<Pole> = Vec::new();
        // Per group: first offset, Σγ²·offset.
        let mut groups: Vec<(f64, f64)> = Vec::new();
        for (offset, gamma, label) in modes {
            match (poles.last_mut(), groups.last_mut()) {
                (Some(p), Some(g)) if (offset - g.0).abs() <= merge_tol => {
                    p.members.push(PoleMember { label, gamma });
                    p.multiplicity += 1;
                    g.1 += gamma * gamma * offset;
                }
                _ => {
                    groups.push((offset, gamma * gamma * offset));
                    poles.push(Pole {
                        offset,
                        coupling: 0.0,
                        multiplicity: 1,
                        members: vec![PoleMember { label, gamma }],
                    });
                }
            }
        }
        for (p, g) in poles.iter_mut().zip(&groups) {
            let mass: f64 = p.members.iter().map(|m| m.gamma * m.gamma).sum();
            if p.multiplicity > 1 {
                // Members may differ at rounding level; use the coupling-weighted centre.
                p.offset = g.1 / mass;
            }
            p.coupling = mass.sqrt();
        }
        Ok(ActivePoleSet {
            reference,
            poles,
            shaft,
            coupling_g,
        })
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// `Σ_j γ_j²` over all active modes; equals the site count.
    pub fn coupling_mass(&self) -> f64 {
        self.poles.iter().map(|p| p.coupling * p.coupling).sum()
    }

    pub fn photon_energy(&self) -> f64 {
        self.reference + self.shaft
    }

    /// Width of the interval containing all poles and the photon level.
    pub fn span(&self) -> f64 {
        let lo = self.poles.first().map_or(0.0, |p| p.offset).min(self.shaft);
        let hi = self.poles.last().map_or(0.0, |p| p.offset).max(self.shaft);
        hi - lo
    }

    fn guard_band(&self) -> f64 {
        POLE_GUARD_ULPS
            * f64::EPSILON
            * self
                .span()
                .max(self.coupling_g * self.coupling_mass().sqrt())
    }
}

/// Active poles of a chain (odd `k`) or a well (odd `kx` and `ky`), relative
/// to the lowest exciton level.
pub fn build_active_poles(params: &SystemParams) -> Result<ActivePoleSet> {
    params.validate()?;
    let reference = params.lowest_level();
    let shaft = params.photon_energy - reference;
    let merge_tol = DEGENERACY_RTOL * (params.site_energy.abs() + 4.0 * params.hop_w);
    let modes: Vec<(f64, f64, ModeLabel)> = match params.geometry() {
        Geometry::Chain { .. } => chain_modes(params)
            .into_iter()
            .filter(|m| m.active)
            .map(|m| (m.offset, m.gamma, ModeLabel::Chain { k: m.k }))
            .collect(),
        Geometry::Well { .. } => well_modes(params)
            .into_iter()
            .filter(|m| m.active)
            .map(|m| (m.offset, m.gamma, ModeLabel::Well { kx: m.kx, ky: m.ky }))
            .collect(),
    };
    // Chain poles are non-degenerate; merging only ever applies to wells.
    let tol = if params.n_atoms_y == 0 {
        0.0
    } else {
        merge_tol
    };
    ActivePoleSet::from_modes(reference, shaft, params.coupling_g, tol, modes)
}

/// `G(λ) = Σ_j γ_j²/(ε_j − λ)` at `lambda` (an offset from the pole-set
/// reference). Fails inside the guard band of a pole.
pub fn secular_g(lambda: f64, poles: &ActivePoleSet) -> Result<f64> {
    let guard = poles.guard_band();
    let mut g = 0.0;
    for (j, p) in poles.poles.iter().enumerate() {
        let d = p.offset - lambda;
        if d.abs() <= guard {
            return Err(Error::PoleProximity {
                lambda,
                pole: j,
                distance: d.abs(),
            });
        }
        g += p.coupling * p.coupling / d;
    }
    Ok(g)
}

/// Branch classification of a quasi-energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// The isolated root below all poles.
    Lower,
    /// The highest-weight root above `ε₀`.
    UpperStar,
    Background,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::UpperStar => "upper-star",
            Branch::Background => "background",
        }
    }
}

/// One quasi-energy `λ_m` with its normalisation `P_m` and weight `b_m² = 1/P_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiEnergy {
    /// `λ_m − reference`.
    pub offset: f64,
    /// Pole the root is measured from, `None` for a root not tied to a pole.
    pub anchor: Option<usize>,
    /// `λ_m − ε_anchor` (or `λ_m − reference` without anchor).
    pub tau: f64,
    pub norm: f64,
    pub weight: f64,
    pub branch: Branch,
}

/// Solution of the one-photon quasi-energy problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasiEnergySpectrum {
    pub poles: ActivePoleSet,
    /// Roots in ascending order.
    pub roots: Vec<QuasiEnergy>,
    /// Deflated eigenvalues `(offset, multiplicity)` pinned at degenerate
    /// poles; they carry no photon component and zero weight.
    pub silent_levels: Vec<(f64, usize)>,
}

impl QuasiEnergySpectrum {
    pub fn reference(&self) -> f64 {
        self.poles.reference
    }

    /// Root offsets `λ_m − ε₀`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.offset).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.weight).collect()
    }

    /// `ε_j − λ_m` evaluated from the anchor, never by cancelling two
    /// absolute energies.
    #[inline]
    pub fn pole_distance(&self, root: &QuasiEnergy, j: usize) -> f64 {
        match root.anchor {
            Some(a) if a == j => -root.tau,
            Some(a) => (self.poles.poles[j].offset - self.poles.poles[a].offset) - root.tau,
            None => self.poles.poles[j].offset - root.offset,
        }
    }

    /// `ħω − λ_m`, equal to `g²G(λ_m)` at a root.
    #[inline]
    pub fn shaft_distance(&self, root: &QuasiEnergy) -> f64 {
        match root.anchor {
            Some(a) => (self.poles.shaft - self.poles.poles[a].offset) - root.tau,
            None => self.poles.shaft - root.offset,
        }
    }

    /// Relative residual of the secular equation at root `m`, scaled by the
    /// largest term entering it.
    pub fn residual(&self, m: usize) -> f64 {
        let r = &self.roots[m];
        if r.weight == 0.0 {
            return 0.0;
        }
        let g2 = self.poles.coupling_g * self.poles.coupling_g;
        let mut sum = 0.0;
        let mut scale = self.shaft_distance(r).abs();
        for (j, p) in self.poles.poles.iter().enumerate() {
            let term = g2 * p.coupling * p.coupling / self.pole_distance(r, j);
            scale = scale.max(term.abs());
            sum += term;
        }
        (self.shaft_distance(r) - sum).abs() / scale.max(f64::MIN_POSITIVE)
    }

    /// `1 − Σ_m b_m²`.
    pub fn weight_closure_defect(&self) -> f64 {
        1.0 - self.roots.iter().map(|r| r.weight).sum::<f64>()
    }

    /// Checks that roots strictly interlace the distinct poles.
    pub fn interlacing_holds(&self) -> bool {
        if self.poles.coupling_g == 0.0 {
            return true;
        }
        let p = &self.poles.poles;
        if self.roots.len() != p.len() + 1 {
            return false;
        }
        self.roots.iter().enumerate().all(|(m, r)| {
            let above = m == 0 || self.pole_distance(r, m - 1) < 0.0;
            let below = m == p.len() || self.pole_distance(r, m) > 0.0;
            above && below
        })
    }

    /// Index of the lower-branch root.
    pub fn lower_index(&self) -> usize {
        0
    }

    /// Index of the highest-weight root above `ε₀` (`λ*`).
    pub fn upper_star_index(&self) -> Option<usize> {
        self.roots
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, r)| r.offset > 0.0)
            .max_by(|a, b| {
                a.1.weight
                    .partial_cmp(&b.1.weight)
                    .unwrap_or(Ordering::Equal)
            })
            .map(|(m, _)| m)
    }
}

/// Anchored evaluation of the secular function near pole `a`:
/// returns `(f, φ, φ')` where `f = r(τ) + A/τ`, `φ = τ·r(τ) + A`.
fn anchored_eval(poles: &ActivePoleSet, a: usize, tau: f64) -> (f64, f64, f64) {
    let g2 = poles.coupling_g * poles.coupling_g;
    let ea = poles.poles[a].offset;
    let mut r = (poles.shaft - ea) - tau;
    let mut dr = -1.0;
    for (i, p) in poles.poles.iter().enumerate() {
        if i == a {
            continue;
        }
        let d = (p.offset - ea) - tau;
        let c = g2 * p.coupling * p.coupling / d;
        r -= c;
        dr -= c / d;
    }
    let big_a = g2 * poles.poles[a].coupling * poles.poles[a].coupling;
    let phi = tau * r + big_a;
    let f = if tau == 0.0 {
        f64::INFINITY.copysign(big_a)
    } else {
        r + big_a / tau
    };
    (f, phi, r + tau * dr)
}

/// Sign of `f` at `tau` from the anchored evaluation.
#[inline]
fn f_sign(phi: f64, tau: f64) -> f64 {
    if tau > 0.0 {
        phi
    } else {
        -phi
    }
}

/// Solves `f = 0` for `τ` in the open bracket `(lo, hi)` around anchor `a`,
/// where `f(lo) > 0 > f(hi)`.
fn refine_root(
    poles: &ActivePoleSet,
    index: usize,
    a: usize,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let width0 = hi - lo;
    let mut steps = 0;
    while hi - lo > BISECTION_RTOL * width0 {
        let mid = 0.5 * (lo + hi);
        let (_, phi, _) = anchored_eval(poles, a, mid);
        let s = f_sign(phi, mid);
        if s > 0.0 {
            lo = mid;
        } else if s < 0.0 {
            hi = mid;
        } else {
            return Ok(mid);
        }
        steps += 1;
    }
    // Newton on φ(τ) = τ·f(τ), which is smooth at the anchor.
    let mut tau = 0.5 * (lo + hi);
    if tau == 0.0 {
        tau = if hi > 0.0 { 0.5 * hi } else { 0.5 * lo };
    }
    while steps < MAX_REFINEMENT_STEPS {
        steps += 1;
        let (_, phi, dphi) = anchored_eval(poles, a, tau);
        let s = f_sign(phi, tau);
        if s > 0.0 {
            lo = tau;
        } else if s < 0.0 {
            hi = tau;
        } else {
            return Ok(tau);
        }
        let mut next = tau - phi / dphi;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let tol = 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE);
        if (next - tau).abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(next);
        }
        tau = next;
    }
    Err(Error::Bracketing {
        index,
        detail: format!("no convergence after {MAX_REFINEMENT_STEPS} steps; anchor {a}, bracket ({lo:e}, {hi:e})"),
    })
}

/// Finds an exterior bracket by geometric expansion away from the anchor.
fn expand_exterior(poles: &ActivePoleSet, index: usize, a: usize, direction: f64) -> Result<f64> {
    let scale = poles
        .span()
        .max(poles.coupling_g * poles.coupling_mass().sqrt())
        .max((poles.shaft - poles.poles[a].offset).abs())
        .max(f64::MIN_POSITIVE.sqrt());
    let mut step = scale;
    for _ in 0..2000 {
        let tau = direction * step;
        let (_, phi, _) = anchored_eval(poles, a, tau);
        let s = f_sign(phi, tau);
        // Below the lowest pole f must turn positive; above the highest, negative.
        if (direction < 0.0 && s > 0.0) || (direction > 0.0 && s < 0.0) {
            return Ok(tau);
        }
        step *= 2.0;
    }
    Err(Error::Bracketing {
        index,
        detail: format!("exterior bracket expansion failed from anchor {a}"),
    })
}

fn solve_root(poles: &ActivePoleSet, m: usize) -> Result<(usize, f64)> {
    let n = poles.poles.len();
    if m == 0 {
        let a = 0;
        let lo = expand_exterior(poles, m, a, -1.0)?;
        return refine_root(poles, m, a, lo, 0.0).map(|t| (a, t));
    }
    if m == n {
        let a = n - 1;
        let hi = expand_exterior(poles, m, a, 1.0)?;
        return refine_root(poles, m, a, 0.0, hi).map(|t| (a, t));
    }
    let (left, right) = (m - 1, m);
    let gap = poles.poles[right].offset - poles.poles[left].offset;
    let mid = 0.5 * gap;
    let (_, phi, _) = anchored_eval(poles, left, mid);
    let s = f_sign(phi, mid);
    if s > 0.0 {
        // Root in the right half: anchor on the right pole.
        refine_root(poles, m, right, mid - gap, 0.0).map(|t| (right, t))
    } else if s < 0.0 {
        refine_root(poles, m, left, 0.0, mid).map(|t| (left, t))
    } else {
        Ok((left, mid))
    }
}

/// Normalisation `P_m = 1 + g²Σ_j γ_j²/(ε_j − λ_m)²` of a root.
fn root_norm(spec: &QuasiEnergySpectrum, root: &QuasiEnergy) -> f64 {
    let g2 = spec.poles.coupling_g * spec.poles.coupling_g;
    let mut p = 1.0;
    for (j, pole) in spec.poles.poles.iter().enumerate() {
        let d = spec.pole_distance(root, j);
        p += g2 * pole.coupling * pole.coupling / (d * d);
    }
    p
}

/// Finds all `M + 1` quasi-energies, their normalisations and weights for the
/// initial state `|1 photon; 0⟩`, and labels the branches.
pub fn solve_quasienergies(poles: &ActivePoleSet) -> Result<QuasiEnergySpectrum> {
    if poles.is_empty() {
        return Err(Error::domain("empty pole set"));
    }
    let silent_levels = poles
        .poles
        .iter()
        .filter(|p| p.multiplicity > 1)
        .map(|p| (p.offset, p.multiplicity - 1))
        .collect();

    if poles.coupling_g == 0.0 {
        return Ok(decoupled_spectrum(poles, silent_levels));
    }

    let n = poles.poles.len();
    let solved: Vec<Result<(usize, f64)>> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..=n)
                .into_par_iter()
                .map(|m| solve_root(poles, m))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..=n).map(|m| solve_root(poles, m)).collect()
        }
    };

    let mut spec = QuasiEnergySpectrum {
        poles: poles.clone(),
        roots: Vec::with_capacity(n + 1),
        silent_levels,
    };
    for r in solved {
        let (a, tau) = r?;
        spec.roots.push(QuasiEnergy {
            offset: poles.poles[a].offset + tau,
            anchor: Some(a),
            tau,
            norm: 0.0,
            weight: 0.0,
            branch: Branch::Background,
        });
    }
    let norms: Vec<f64> = spec.roots.iter().map(|r| root_norm(&spec, r)).collect();
    for (r, p) in spec.roots.iter_mut().zip(norms) {
        r.norm = p;
        r.weight = 1.0 / p;
    }
    label_branches(&mut spec);
    Ok(spec)
}

fn decoupled_spectrum(
    poles: &ActivePoleSet,
    silent_levels: Vec<(f64, usize)>,
) -> QuasiEnergySpectrum {
    let mut roots: Vec<QuasiEnergy> = poles
        .poles
        .iter()
        .enumerate()
        .map(|(j, p)| QuasiEnergy {
            offset: p.offset,
            anchor: Some(j),
            tau: 0.0,
            norm: f64::INFINITY,
            weight: 0.0,
            branch: Branch::Background,
        })
        .collect();
    let photon = QuasiEnergy {
        offset: poles.shaft,
        anchor: None,
        tau: poles.shaft,
        norm: 1.0,
        weight: 1.0,
        branch: if poles.shaft < poles.poles[0].offset {
            Branch::Lower
        } else {
            Branch::UpperStar
        },
    };
    let at = roots.partition_point(|r| r.offset <= poles.shaft);
    roots.insert(at, photon);
    QuasiEnergySpectrum {
        poles: poles.clone(),
        roots,
        silent_levels,
    }
}

fn label_branches(spec: &mut QuasiEnergySpectrum) {
    for r in &mut spec.roots {
        r.branch = Branch::Background;
    }
    spec.roots[0].branch = Branch::Lower;
    if let Some(m) = spec.upper_star_index() {
        spec.roots[m].branch = Branch::UpperStar;
    }
}

/// Normalised eigenvector of root `m`: photon component `P_m^{-1/2}`
/// followed by one component `P_m^{-1/2}·gγ_j/(λ_m − ε_j)` per distinct pole
/// (the group-coupled combination for degenerate poles).
pub fn eigenvector(spec: &QuasiEnergySpectrum, m: usize) -> Result<Vec<f64>> {
    let root = spec
        .roots
        .get(m)
        .ok_or_else(|| Error::domain(format!("root index {m} out of range")))?;
    if !root.norm.is_finite() {
        return Err(Error::SingularEigenvector(spec.reference() + root.offset));
    }
    let scale = root.norm.sqrt().recip();
    let g = spec.poles.coupling_g;
    let mut v = Vec::with_capacity(spec.poles.len() + 1);
    v.push(scale);
    for (j, p) in spec.poles.poles.iter().enumerate() {
        let d = spec.pole_distance(root, j);
        if d == 0.0 {
            return Err(Error::SingularEigenvector(spec.reference() + root.offset));
        }
        v.push(-scale * g * p.coupling / d);
    }
    Ok(v)
}

/// Weights `b_m² = 1/P_m` of the initial state `|1 photon; 0⟩`.
pub fn initial_weights(spec: &QuasiEnergySpectrum) -> Vec<f64> {
    spec.weights()
}

/// Branch summary with the two-level overlay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub lower: usize,
    pub upper_star: Option<usize>,
    pub overlay: TwoLevelPolariton,
}

/// Identifies `λ₀` and `λ*` and computes the two-level polariton overlay
/// with collective coupling `g·√(Σγ²)`.
pub fn identify_branches(spec: &QuasiEnergySpectrum) -> BranchReport {
    let poles = &spec.poles;
    let overlay = two_level_polariton(poles.shaft, poles.coupling_g * poles.coupling_mass().sqrt());
    BranchReport {
        lower: spec.lower_index(),
        upper_star: spec.upper_star_index(),
        overlay,
    }
}
