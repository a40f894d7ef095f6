//! Two identical bosons in a total-momentum sector `P`.
//!
//! A sector state is `Σ_q A(q) B†_{P/2+q} B†_{P/2−q} |0⟩` with `A(q) = A(−q)`
//! over the relative grid, and `⟨A|B⟩ = 2 Σ_q A*(q) B(q)`. In this basis
//!
//! ```text
//! (H A)(q) = −Ω cos q · A(q) + (U/N) Σ_q' A(q'),   Ω = 2J cos(½P − φ)
//! ```
//!
//! so eigenvalues solve `(1/N) Σ_q 1/(ω + cos q) = 1/𝒦` with `ω = E/Ω` and
//! `𝒦 = U/Ω`, and `A(q) ∝ 1/(ω + cos q)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::lattice::{GridKind, LatticeError, Momentum, MomentumGrid, RingLattice, TotalMomentum};
use crate::math;
use crate::ramp::RampSchedule;
use crate::roots::{bisect_decreasing, RootError};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum TwoError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("parameter is not finite")]
    NonFinite,
    #[error("total momentum belongs to a {got}-site ring, lattice has {want} sites")]
    SiteMismatch { got: usize, want: usize },
    #[error("found {found} eigenvalues, pole structure requires {expected}")]
    RootCount { expected: usize, found: usize },
    #[error("state is not bound (ω = {0} lies inside the continuum)")]
    NotBound(f64),
    #[error("interaction must be non-zero")]
    ZeroInteraction,
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("norm drifted by {drift:e} during the ramp; reduce the step")]
    NormDrift { drift: f64 },
    #[error("amplitude vector has length {got}, sector has {want}")]
    WrongLength { got: usize, want: usize },
}

/// `|Ω|` below `OMEGA_FLOOR·max(|J|, 1)` is treated as zero.
pub const OMEGA_FLOOR: f64 = 1e-12;
/// Roots closer than this to a pole carry a conditioning warning.
pub const NEAR_POLE: f64 = 1e-10;
/// Bisection width in `ω`.
pub const ROOT_TOL: f64 = 1e-13;

/// `Ω = 2J cos(½P − φ)`
pub fn omega_scale(tunneling: f64, total: f64, phase: f64) -> f64 {
    2.0 * tunneling * math::cos(0.5 * total - phase)
}

/// Relative grid that makes `½P ± q` run over every single-particle momentum.
pub fn relative_grid(sites: usize, total: TotalMomentum) -> Result<MomentumGrid, TwoError> {
    if total.sites() != sites {
        return Err(TwoError::SiteMismatch {
            got: total.sites(),
            want: sites,
        });
    }
    Ok(MomentumGrid::new(sites, total.relative_kind())?)
}

/// Parameters of one total-momentum sector.
#[derive(Debug, Clone, PartialEq)]
pub struct DimerSector {
    total: TotalMomentum,
    phase: f64,
    tunneling: f64,
    interaction: f64,
    grid: MomentumGrid,
    omega: f64,
}

impl DimerSector {
    pub fn new(sites: usize, total: TotalMomentum, phase: f64, tunneling: f64, interaction: f64) -> Result<Self, TwoError> {
        if !(phase.is_finite() && tunneling.is_finite() && interaction.is_finite()) {
            return Err(TwoError::NonFinite);
        }
        let grid = relative_grid(sites, total)?;
        Ok(Self {
            total,
            phase,
            tunneling,
            interaction,
            grid,
            omega: omega_scale(tunneling, total.value(), phase),
        })
    }

    pub fn sites(&self) -> usize {
        self.grid.sites()
    }

    pub fn total(&self) -> TotalMomentum {
        self.total
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn tunneling(&self) -> f64 {
        self.tunneling
    }

    pub fn interaction(&self) -> f64 {
        self.interaction
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    /// `Ω`, possibly negative or zero.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `𝒦 = U/Ω` (infinite when `Ω = 0`).
    pub fn coupling(&self) -> f64 {
        self.interaction / self.omega
    }

    pub fn is_collapsed(&self) -> bool {
        self.omega.abs() < OMEGA_FLOOR * self.tunneling.abs().max(1.0)
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        Self {
            phase,
            omega: omega_scale(self.tunneling, self.total.value(), phase),
            ..self.clone()
        }
    }

    fn orbits(&self) -> Vec<Orbit> {
        orbits(&self.grid)
    }
}

/// A set `{q, −q}` of grid positions sharing `cos q`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Orbit {
    pub members: Vec<usize>,
    pub cos: f64,
}

pub(crate) fn orbits(grid: &MomentumGrid) -> Vec<Orbit> {
    let mut out: Vec<Orbit> = Vec::new();
    let mut seen = vec![false; grid.len()];
    for (i, q) in grid.iter().enumerate() {
        if seen[i] {
            continue;
        }
        seen[i] = true;
        let mut members = vec![i];
        if let Some(j) = grid.position(-q) {
            if j != i {
                seen[j] = true;
                members.push(j);
            }
        }
        let rep = if q.half_steps() <= 0 { -q } else { q };
        out.push(Orbit {
            members,
            cos: math::cos(rep.value()),
        });
    }
    out
}

/// `cos q` per grid position, shared exactly between `q` and `−q`.
pub(crate) fn grid_cosines(grid: &MomentumGrid) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for o in orbits(grid) {
        for &i in &o.members {
            out[i] = o.cos;
        }
    }
    out
}

/// Every root of `(1/N) Σ_i w_i/(ω − p_i) − 1/𝒦` for distinct poles `p_i`
/// sorted ascending, with positive weights. Returns them ascending.
pub(crate) fn secular_roots(poles: &[(f64, f64)], sites: f64, coupling: f64) -> Result<Vec<f64>, TwoError> {
    let inv = 1.0 / coupling;
    let g = |w: f64| poles.iter().map(|&(p, m)| m / (w - p)).sum::<f64>() / sites - inv;
    let dg = |w: f64| -poles.iter().map(|&(p, m)| m / ((w - p) * (w - p))).sum::<f64>() / sites;
    let mut brackets: Vec<(f64, f64)> = poles.windows(2).map(|w| (w[0].0, w[1].0)).collect();
    let (p_min, p_max) = (poles[0].0, poles[poles.len() - 1].0);
    // at p ± 2𝒦 every term is bounded by 1/(2𝒦), so g has the required sign
    if coupling > 0.0 {
        brackets.push((p_max, p_max + 2.0 * coupling));
    } else {
        brackets.insert(0, (p_min + 2.0 * coupling, p_min));
    }
    let mut roots = Vec::with_capacity(brackets.len());
    for (lo, hi) in brackets {
        let b = bisect_decreasing(g, lo, hi, ROOT_TOL)?;
        roots.push(b.polish(g, dg));
    }
    if roots.len() != poles.len() {
        return Err(TwoError::RootCount {
            expected: poles.len(),
            found: roots.len(),
        });
    }
    Ok(roots)
}

/// Stationary (or, after a ramp, evolved) pair state in one sector.
#[derive(Debug, Clone, PartialEq)]
pub struct DimerState {
    sector: DimerSector,
    energy: f64,
    amplitudes: Vec<Complex64>,
    normalization: Option<f64>,
    near_pole: bool,
    on_site: bool,
}

impl DimerState {
    pub fn sector(&self) -> &DimerSector {
        &self.sector
    }

    /// `E/ℏ` in the rotating frame; `⟨H⟩` for non-stationary states.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `ω = E/(ℏΩ)`, absent when `Ω = 0`.
    pub fn omega(&self) -> Option<f64> {
        (!self.sector.is_collapsed()).then(|| self.energy / self.sector.omega())
    }

    /// `A(q)` in relative-grid order.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, q: Momentum) -> Option<Complex64> {
        self.sector.grid.position(q).map(|i| self.amplitudes[i])
    }

    /// `C(ω)` for transcendental roots.
    pub fn normalization(&self) -> Option<f64> {
        self.normalization
    }

    /// Root lies within `NEAR_POLE` of a pole; one orbit dominates.
    pub fn near_pole(&self) -> bool {
        self.near_pole
    }

    /// Outside the continuum: `|ω| > 1`, or the on-site pair when `Ω = 0`.
    pub fn is_bound(&self) -> bool {
        match self.omega() {
            Some(w) => w.abs() > 1.0,
            None => self.on_site,
        }
    }

    /// `2 Σ A*(q) B(q)`
    pub fn inner(&self, other: &DimerState) -> Complex64 {
        pair_inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn norm_sqr(&self) -> f64 {
        2.0 * self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>()
    }

    /// A state of `sector` with the given relative amplitudes.
    pub fn from_amplitudes(sector: DimerSector, amplitudes: Vec<Complex64>) -> Result<Self, TwoError> {
        if amplitudes.len() != sector.grid.len() {
            return Err(TwoError::WrongLength {
                got: amplitudes.len(),
                want: sector.grid.len(),
            });
        }
        let energy = sector_energy(&sector, &amplitudes);
        Ok(Self {
            sector,
            energy,
            amplitudes,
            normalization: None,
            near_pole: false,
            on_site: false,
        })
    }
}

fn pair_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * 2.0
}

/// Every eigenstate of the sector, sorted by `E` ascending. The number of
/// states equals the number of distinct `cos q` on the relative grid.
pub fn solve_dimer_spectrum(
    sites: usize,
    total: TotalMomentum,
    phase: f64,
    tunneling: f64,
    interaction: f64,
) -> Result<Vec<DimerState>, TwoError> {
    let sector = DimerSector::new(sites, total, phase, tunneling, interaction)?;
    solve_sector(&sector)
}

pub fn solve_sector(sector: &DimerSector) -> Result<Vec<DimerState>, TwoError> {
    let orbits = sector.orbits();
    let n = sector.sites();
    let u = sector.interaction;
    let mut states = if u == 0.0 {
        free_states(sector, &orbits)
    } else if sector.is_collapsed() {
        collapsed_states(sector, &orbits)
    } else {
        bound_and_scattering_states(sector, &orbits)?
    };
    debug_assert_eq!(states.len(), orbits.len());
    debug_assert!(states.iter().all(|s| s.amplitudes.len() == n));
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(states)
}

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

fn free_states(sector: &DimerSector, orbits: &[Orbit]) -> Vec<DimerState> {
    let n = sector.sites();
    orbits
        .iter()
        .map(|o| {
            let a = 1.0 / math::sqrt(2.0 * o.members.len() as f64);
            let mut amps = zeros(n);
            for &i in &o.members {
                amps[i] = Complex64::new(a, 0.0);
            }
            DimerState {
                sector: sector.clone(),
                energy: -sector.omega * o.cos,
                amplitudes: amps,
                normalization: None,
                near_pole: false,
                on_site: false,
            }
        })
        .collect()
}

/// `Ω = 0`: the constant `A` at `E = U`, and the rest of the symmetric space
/// (Gram–Schmidt from orbit indicators) at `E = 0`.
fn collapsed_states(sector: &DimerSector, orbits: &[Orbit]) -> Vec<DimerState> {
    let n = sector.sites();
    let c = 1.0 / math::sqrt(2.0 * n as f64);
    let pair = vec![Complex64::new(c, 0.0); n];
    let mut basis: Vec<Vec<Complex64>> = vec![pair];
    for o in orbits.iter().skip(1) {
        let mut v = zeros(n);
        for &i in &o.members {
            v[i] = Complex64::new(1.0, 0.0);
        }
        for b in &basis {
            let p = pair_inner(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= y * p);
        }
        let norm = math::sqrt(pair_inner(&v, &v).re);
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
        .into_iter()
        .enumerate()
        .map(|(k, amps)| DimerState {
            sector: sector.clone(),
            energy: if k == 0 { sector.interaction } else { 0.0 },
            amplitudes: amps,
            normalization: None,
            near_pole: false,
            on_site: k == 0,
        })
        .collect()
}

fn bound_and_scattering_states(sector: &DimerSector, orbits: &[Orbit]) -> Result<Vec<DimerState>, TwoError> {
    let n = sector.sites();
    let mut poles: Vec<(f64, f64)> = orbits.iter().map(|o| (-o.cos, o.members.len() as f64)).collect();
    poles.sort_by(|a, b| a.0.total_cmp(&b.0));
    let roots = secular_roots(&poles, n as f64, sector.coupling())?;
    let cosines = grid_cosines(&sector.grid);
    Ok(roots
        .into_iter()
        .map(|w| {
            let (amplitudes, c, dmin) = pole_amplitudes(w, &cosines, 2.0);
            // orbit partners share cos q exactly, so A(q) = A(−q) holds bit for bit
            DimerState {
                sector: sector.clone(),
                energy: w * sector.omega,
                amplitudes,
                normalization: Some(c),
                near_pole: dmin < NEAR_POLE,
                on_site: false,
            }
        })
        .collect())
}

/// `A = C/(ω + c)` normalized so that `weight·Σ|A|² = 1`, evaluated as
/// `(d_min/d)/‖·‖` to stay finite near a pole. Returns `(A, C, d_min)`.
pub(crate) fn pole_amplitudes(w: f64, cosines: &[f64], weight: f64) -> (Vec<Complex64>, f64, f64) {
    let dmin = cosines.iter().map(|c| (w + c).abs()).fold(f64::INFINITY, f64::min);
    let scaled: Vec<f64> = cosines.iter().map(|c| dmin / (w + c)).collect();
    let s = math::sqrt(weight * scaled.iter().map(|x| x * x).sum::<f64>());
    let amps = scaled.iter().map(|x| Complex64::new(x / s, 0.0)).collect();
    (amps, dmin / s, dmin)
}

fn apply_sector(sector: &DimerSector, a: &[Complex64], out: &mut [Complex64], cosines: &[f64]) {
    let n = a.len() as f64;
    let mean = a.iter().sum::<Complex64>() * (sector.interaction / n);
    for ((o, x), c) in out.iter_mut().zip(a).zip(cosines) {
        *o = x * (-sector.omega * c) + mean;
    }
}

fn sector_energy(sector: &DimerSector, a: &[Complex64]) -> f64 {
    let cosines = grid_cosines(&sector.grid);
    let mut ha = zeros(a.len());
    apply_sector(sector, a, &mut ha, &cosines);
    let num = pair_inner(a, &ha).re;
    let den = pair_inner(a, a).re;
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// `E_b = sgn(U)·√(Ω² + U²)`
pub fn bound_energy_large_n(omega: f64, interaction: f64) -> Result<f64, TwoError> {
    if interaction == 0.0 {
        return Err(TwoError::ZeroInteraction);
    }
    Ok(math::signum(interaction) * math::hypot(omega, interaction))
}

/// Large-N bound-state density of a single-particle momentum `q`, given
/// `𝒦` and `½P`:
///
/// ```text
/// f(q) = (1/2π) (|𝒦|/s) (|𝒦| / (s + sgn𝒦·cos(q − ½P)))²,  s = √(1 + 𝒦²)
/// ```
///
/// An infinite `𝒦` returns the uniform limit `1/2π`.
pub fn density_from_coupling(q: f64, half_total: f64, coupling: f64) -> f64 {
    if !coupling.is_finite() {
        return 1.0 / math::TAU;
    }
    let k = coupling.abs();
    let s = math::sqrt(1.0 + k * k);
    let c = math::signum(coupling) * math::cos(q - half_total);
    let r = k / (s + c);
    k / s * r * r / math::TAU
}

/// `f(q)` at `𝒦(P) = U/(2J cos(½P − φ))`. `Ω = 0` gives the uniform limit.
pub fn momentum_density_large_n(q: f64, total: f64, phase: f64, tunneling: f64, interaction: f64) -> Result<f64, TwoError> {
    if interaction == 0.0 {
        return Err(TwoError::ZeroInteraction);
    }
    let omega = omega_scale(tunneling, total, phase);
    let coupling = if omega.abs() < OMEGA_FLOOR * tunneling.abs().max(1.0) {
        f64::INFINITY
    } else {
        interaction / omega
    };
    Ok(density_from_coupling(q, 0.5 * total, coupling))
}

/// Probability of finding either atom with single-particle momentum `k`,
/// `∝ |A(½P − k)|²`, over the integer grid.
pub fn momentum_probabilities_finite_n(state: &DimerState) -> Result<Vec<(Momentum, f64)>, TwoError> {
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(TwoError::NotNormalized(n2));
    }
    Ok(pair_momentum_probabilities(state.sector(), state.amplitudes()))
}

/// As [`momentum_probabilities_finite_n`] for raw sector amplitudes, normalized
/// to unit total.
pub fn pair_momentum_probabilities(sector: &DimerSector, amps: &[Complex64]) -> Vec<(Momentum, f64)> {
    let single = MomentumGrid::new(sector.sites(), GridKind::Integer).expect("sites >= 2");
    let half = sector.total.half();
    let raw: Vec<(Momentum, f64)> = single
        .iter()
        .map(|k| {
            let q = half - k;
            let i = sector.grid.position(q).expect("½P − k lies on the relative grid");
            (k, amps[i].norm_sqr())
        })
        .collect();
    let total: f64 = raw.iter().map(|r| r.1).sum();
    raw.into_iter().map(|(k, p)| (k, p / total)).collect()
}

/// Momentum of the largest probability (first one on ties).
pub fn peak_momentum(probabilities: &[(Momentum, f64)]) -> Momentum {
    let mut best = probabilities[0];
    for &p in &probabilities[1..] {
        if p.1 > best.1 {
            best = p;
        }
    }
    best.0
}

/// rms relative separation of a bound state, in sites.
pub fn rms_size(state: &DimerState) -> Result<f64, TwoError> {
    if !state.is_bound() {
        return Err(TwoError::NotBound(state.omega().unwrap_or(0.0)));
    }
    Ok(relative_rms(state.sector(), state.amplitudes()))
}

/// `√(Σ n²|ψ(n)|² / Σ|ψ(n)|²)` with `ψ(n) = Σ_q A(q) e^{iqn}` and `n` the
/// minimal-image separation.
pub fn relative_rms(sector: &DimerSector, amps: &[Complex64]) -> f64 {
    let lattice = RingLattice::unit(sector.sites()).expect("sites >= 2");
    let qs = sector.grid.values();
    let (mut num, mut den) = (0.0, 0.0);
    for n in lattice.indices() {
        let psi: Complex64 = qs.iter().zip(amps).map(|(&q, a)| a * math::cis(q * n as f64)).sum();
        let p = psi.norm_sqr();
        num += (n * n) as f64 * p;
        den += p;
    }
    math::sqrt(num / den)
}

/// Extreme-energy state on the side of `sgn U` (the bound state when one
/// exists).
pub fn bound_state(spectrum: &[DimerState]) -> &DimerState {
    let u = spectrum[0].sector.interaction;
    if u >= 0.0 {
        &spectrum[spectrum.len() - 1]
    } else {
        &spectrum[0]
    }
}

/// One sample of a ramp trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampSample {
    pub time: f64,
    pub phase: f64,
    pub omega: f64,
    /// `|⟨bound(φ(t))|ψ(t)⟩|²`
    pub fidelity: f64,
    pub rms_size: f64,
    pub peak: Momentum,
    pub norm_drift: f64,
}

#[derive(Debug, Clone)]
pub struct RampOutcome {
    pub trace: Vec<RampSample>,
    pub final_state: DimerState,
}

/// Sector Schrödinger equation under `Ω(t) = 2J cos(½P − φ(t))`, fixed-step
/// RK4 at the schedule's step. The trace is sampled every `sample_every`
/// steps and at the end.
pub fn evolve_dimer_ramp(initial: &DimerState, ramp: &RampSchedule, sample_every: usize) -> Result<RampOutcome, TwoError> {
    let n2 = initial.norm_sqr();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(TwoError::NotNormalized(n2));
    }
    let base = initial.sector().clone();
    let cosines = grid_cosines(&base.grid);
    let n = cosines.len();
    let mut a = initial.amplitudes().to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (zeros(n), zeros(n), zeros(n), zeros(n), zeros(n));
    let mi = Complex64::new(0.0, -1.0);
    let times = ramp.times();
    let every = sample_every.max(1);
    let mut trace = Vec::new();

    let sample = |t: f64, a: &[Complex64]| -> Result<RampSample, TwoError> {
        let sector = base.with_phase(ramp.phase(t));
        let spectrum = solve_sector(&sector)?;
        let bound = bound_state(&spectrum);
        let fidelity = pair_inner(bound.amplitudes(), a).norm_sqr();
        let norm = pair_inner(a, a).re;
        Ok(RampSample {
            time: t,
            phase: sector.phase,
            omega: sector.omega,
            fidelity,
            rms_size: relative_rms(&sector, a),
            peak: peak_momentum(&pair_momentum_probabilities(&sector, a)),
            norm_drift: (norm - n2).abs(),
        })
    };

    trace.push(sample(0.0, &a)?);
    for (step, w) in times.windows(2).enumerate() {
        let (t, h) = (w[0], w[1] - w[0]);
        let s0 = base.with_phase(ramp.phase(t));
        let sm = base.with_phase(ramp.phase(t + 0.5 * h));
        let s1 = base.with_phase(ramp.phase(t + h));
        apply_sector(&s0, &a, &mut k1, &cosines);
        for i in 0..n {
            k1[i] *= mi;
            tmp[i] = a[i] + k1[i] * (0.5 * h);
        }
        apply_sector(&sm, &tmp, &mut k2, &cosines);
        for i in 0..n {
            k2[i] *= mi;
            tmp[i] = a[i] + k2[i] * (0.5 * h);
        }
        apply_sector(&sm, &tmp, &mut k3, &cosines);
        for i in 0..n {
            k3[i] *= mi;
            tmp[i] = a[i] + k3[i] * h;
        }
        apply_sector(&s1, &tmp, &mut k4, &cosines);
        for i in 0..n {
            k4[i] *= mi;
            a[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        let last = step + 2 == times.len();
        if (step + 1) % every == 0 || last {
            let s = sample(w[1], &a)?;
            if s.norm_drift > 1e-8 {
                return Err(TwoError::NormDrift { drift: s.norm_drift });
            }
            trace.push(s);
        }
    }
    let drift = (pair_inner(&a, &a).re - n2).abs();
    if drift > 1e-8 {
        return Err(TwoError::NormDrift { drift });
    }
    let end = base.with_phase(ramp.phase(ramp.duration()));
    let final_state = DimerState::from_amplitudes(end, a)?;
    Ok(RampOutcome { trace, final_state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramp::PhaseProfile;
    use proptest::prelude::*;

    fn energies(v: &[DimerState]) -> Vec<f64> {
        v.iter().map(DimerState::energy).collect()
    }

    #[test]
    fn relative_grids() {
        let g = relative_grid(4, TotalMomentum::new(0, 4)).unwrap();
        assert_eq!(g.kind(), GridKind::Integer);
        let g = relative_grid(4, TotalMomentum::new(1, 4)).unwrap();
        let want = [-0.75, -0.25, 0.25, 0.75].map(|x| x * math::PI);
        for (a, b) in g.values().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(relative_grid(5, TotalMomentum::new(1, 4)).is_err());
    }

    #[test]
    fn relative_grid_by_brute_force_membership() {
        // the chosen grid is the unique π/N-multiple shift keeping ½P ± q on the lattice
        for n in 2..9usize {
            for p in TotalMomentum::all(n) {
                let grid = relative_grid(n, p).unwrap();
                let single = MomentumGrid::new(n, GridKind::Integer).unwrap();
                for shift in 0..2 {
                    let ok = (0..n as i64).all(|j| {
                        let q = Momentum::from_half_steps(2 * j + shift, n);
                        single.contains(p.half() + q) && single.contains(p.half() - q)
                    });
                    let expected = (shift == 0) == (grid.kind() == GridKind::Integer);
                    assert_eq!(ok, expected, "n={n} P={}", p.steps());
                }
                let mut plus: Vec<Momentum> = grid.iter().map(|q| p.half() + q).collect();
                plus.sort();
                assert_eq!(plus, single.momenta());
            }
        }
    }

    #[test]
    fn omega_scale_examples() {
        assert_eq!(omega_scale(1.0, 0.0, 0.0), 2.0);
        for phi in [-1.0, 0.2, 2.5] {
            assert!((omega_scale(1.3, 2.0 * phi, phi) - 2.6).abs() < 1e-15);
        }
        assert!(omega_scale(1.0, 0.0, -math::PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn non_interacting_sector_is_free() {
        let s = solve_dimer_spectrum(6, TotalMomentum::new(0, 6), 0.3, 1.0, 0.0).unwrap();
        let om = omega_scale(1.0, 0.0, 0.3);
        let mut want: Vec<f64> = [0.0, 1.0, 2.0, 3.0]
            .iter()
            .map(|k| -om * math::cos(k * math::PI / 3.0))
            .collect();
        want.sort_by(f64::total_cmp);
        assert_eq!(s.len(), 4);
        for (a, b) in energies(&s).iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(s.iter().all(|st| (st.norm_sqr() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn collapsed_sector_is_on_site_pair() {
        for n in [3usize, 4, 7, 10] {
            let s = solve_dimer_spectrum(n, TotalMomentum::new(0, n), math::PI / 2.0, 1.0, 4.0).unwrap();
            let e = energies(&s);
            assert_eq!(*e.last().unwrap(), 4.0);
            assert!(e[..e.len() - 1].iter().all(|&x| x == 0.0));
            let top = bound_state(&s);
            assert!(top.is_bound());
            assert!(rms_size(top).unwrap() < 1e-14);
            let probs = momentum_probabilities_finite_n(top).unwrap();
            assert!(probs.iter().all(|p| (p.1 - 1.0 / n as f64).abs() < 1e-15));
            for a in &s {
                for b in &s {
                    let want = if core::ptr::eq(a, b) { 1.0 } else { 0.0 };
                    assert!((a.inner(b) - want).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn bound_energy_examples() {
        assert!((bound_energy_large_n(2.0, 4.0).unwrap() - 4.472_135_954_999_579).abs() < 1e-14);
        assert!((bound_energy_large_n(2.0, 1e-9).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(bound_energy_large_n(0.0, -3.0).unwrap(), -3.0);
        assert!(bound_energy_large_n(1.0, 0.0).is_err());
    }

    #[test]
    fn density_examples() {
        let f = density_from_coupling(math::PI, 0.0, 1.0);
        let want = 1.0 / (math::TAU * math::sqrt(2.0) * (math::sqrt(2.0) - 1.0).powi(2));
        assert!((f - want).abs() < 1e-14);
        assert!((f - 0.656).abs() < 1e-3);
        assert!((density_from_coupling(0.3, 0.0, 1e9) - 1.0 / math::TAU).abs() < 1e-8);
        // spinning to φ = π flips the sign of 𝒦
        for q in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            let spun = momentum_density_large_n(q, 0.0, math::PI, 0.5, 1.0).unwrap();
            let flipped = momentum_density_large_n(q, 0.0, 0.0, 0.5, -1.0).unwrap();
            assert!((spun - flipped).abs() < 1e-14);
        }
        assert_eq!(momentum_density_large_n(0.0, 0.0, math::PI / 2.0, 1.0, 1.0).unwrap(), 1.0 / math::TAU);
    }

    #[test]
    fn attractive_pair_peaks_at_zero() {
        let s = solve_dimer_spectrum(16, TotalMomentum::new(0, 16), 0.0, 1.0, -2.0).unwrap();
        let probs = momentum_probabilities_finite_n(bound_state(&s)).unwrap();
        assert_eq!(peak_momentum(&probs), Momentum::from_index(0, 16));
        let s = solve_dimer_spectrum(16, TotalMomentum::new(0, 16), 0.0, 1.0, 2.0).unwrap();
        let probs = momentum_probabilities_finite_n(bound_state(&s)).unwrap();
        assert_eq!(peak_momentum(&probs), Momentum::from_index(-8, 16));
    }

    #[test]
    fn continuum_states_have_no_size() {
        let s = solve_dimer_spectrum(12, TotalMomentum::new(0, 12), 0.0, 1.0, 3.0).unwrap();
        assert!(matches!(rms_size(&s[0]), Err(TwoError::NotBound(_))));
    }

    #[test]
    fn quench_is_identity() {
        let s = solve_dimer_spectrum(8, TotalMomentum::new(0, 8), 0.0, 1.0, 4.0).unwrap();
        let b = bound_state(&s).clone();
        let ramp = RampSchedule::new(PhaseProfile::Linear { start: 0.0, end: math::PI, ramp_time: 0.0 }, 0.0, 0.01).unwrap();
        let out = evolve_dimer_ramp(&b, &ramp, 1).unwrap();
        assert_eq!(out.final_state.amplitudes(), b.amplitudes());
    }

    proptest! {
        #[test]
        fn sector_invariants(
            n in 2usize..14, p in 0i64..14, phi in -3.2f64..3.2, j in -2.0f64..2.0, u in -6.0f64..6.0,
        ) {
            prop_assume!(j.abs() > 1e-3 && u.abs() > 1e-3);
            let total = TotalMomentum::new(p % n as i64, n);
            let s = solve_dimer_spectrum(n, total, phi, j, u).unwrap();
            let grid = relative_grid(n, total).unwrap();
            prop_assert_eq!(s.len(), orbits(&grid).len());
            for st in &s {
                prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
                for q in grid.iter() {
                    prop_assert_eq!(st.amplitude(q), st.amplitude(-q));
                }
                let resid: f64 = {
                    let cos: Vec<f64> = grid.iter().map(|q| math::cos(q.value())).collect();
                    let mut h = zeros(n);
                    apply_sector(st.sector(), st.amplitudes(), &mut h, &cos);
                    h.iter().zip(st.amplitudes()).map(|(x, a)| (x - a * st.energy()).norm()).fold(0.0, f64::max)
                };
                prop_assert!(resid < 1e-9 * j.abs().max(u.abs()));
            }
        }

        #[test]
        fn momentum_and_phase_interchange(
            n in 3usize..12, p in 0i64..12, k in -3i64..3, phi in -2.0f64..2.0, u in -5.0f64..5.0,
        ) {
            prop_assume!(u.abs() > 1e-3);
            let delta = math::TAU * k as f64 / n as f64;
            let a = solve_dimer_spectrum(n, TotalMomentum::new(p, n), phi, 1.0, u).unwrap();
            let b = solve_dimer_spectrum(n, TotalMomentum::new(p + 2 * k, n), phi + delta, 1.0, u).unwrap();
            for (x, y) in energies(&a).iter().zip(energies(&b)) {
                prop_assert!((x - y).abs() < 1e-12 * u.abs().max(1.0));
            }
        }

        #[test]
        fn density_integrates_to_one(k in prop_oneof![-20.0f64..-0.2, 0.2f64..20.0], half in -3.0f64..3.0) {
            let total = crate::quad::integrate_adaptive(|q| density_from_coupling(q, half, k), -math::PI, math::PI, 1e-11).unwrap();
            prop_assert!((total - 1.0).abs() < 1e-8);
        }
    }
}
