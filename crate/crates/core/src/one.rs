//! A single atom on the rotating ring.
//!
//! The rotating-frame Hamiltonian is `H = −(J/2) Σ_n (e^{iφ} b†_{n+1} b_n + h.c.)`,
//! diagonal in lattice momentum with `ω_q = −J cos(q − φ)`. Site amplitudes
//! `c_n` and momentum amplitudes `c̃_q` are related by
//! `c_n = N^{-1/2} Σ_q e^{iqn} c̃_q`, with `q` on the integer grid.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::lattice::{GridKind, LatticeError, Momentum, MomentumGrid};
use crate::linalg::DenseMatrix;
use crate::math;
use crate::quad::GaussLegendre;
use crate::ramp::{trig_integrals, RampSchedule};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum OneError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("parameter is not finite")]
    NonFinite,
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("state has {got} amplitudes, lattice has {want} sites")]
    WrongLength { got: usize, want: usize },
    #[error("lattice spacing must be positive, got {0}")]
    BadSpacing(f64),
}

/// Tight-binding parameters shared by the one- and two-atom models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HubbardParams {
    pub sites: usize,
    pub tunneling: f64,
    pub phase: f64,
    pub interaction: f64,
}

impl HubbardParams {
    pub fn new(sites: usize, tunneling: f64, phase: f64, interaction: f64) -> Result<Self, OneError> {
        if sites < 2 {
            return Err(LatticeError::TooFewSites(sites).into());
        }
        if !(tunneling.is_finite() && phase.is_finite() && interaction.is_finite()) {
            return Err(OneError::NonFinite);
        }
        Ok(Self {
            sites,
            tunneling,
            phase,
            interaction,
        })
    }

    pub fn with_phase(self, phase: f64) -> Self {
        Self { phase, ..self }
    }

    fn grid(&self) -> MomentumGrid {
        MomentumGrid::new(self.sites, GridKind::Integer).expect("sites >= 2")
    }
}

/// `ω_q = −J cos(q − φ)`
pub fn dispersion(q: f64, tunneling: f64, phase: f64) -> f64 {
    -tunneling * math::cos(q - phase)
}

/// `(q, ω_q)` over the integer grid, in grid order.
pub fn dispersion_spectrum(params: &HubbardParams) -> Vec<(Momentum, f64)> {
    params
        .grid()
        .iter()
        .map(|q| (q, dispersion(q.value(), params.tunneling, params.phase)))
        .collect()
}

/// Lowest single-particle level and every momentum within `tol` of it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStates {
    pub energy: f64,
    pub momenta: Vec<Momentum>,
}

impl GroundStates {
    pub fn is_degenerate(&self) -> bool {
        self.momenta.len() > 1
    }
}

/// Default degeneracy tolerance, `1e-9·|J|`.
pub fn default_degeneracy_tol(params: &HubbardParams) -> f64 {
    1e-9 * params.tunneling.abs()
}

pub fn ground_state_set(params: &HubbardParams, tol: f64) -> GroundStates {
    let spectrum = dispersion_spectrum(params);
    let energy = spectrum.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let momenta = spectrum
        .iter()
        .filter(|s| s.1 - energy <= tol)
        .map(|s| s.0)
        .collect();
    GroundStates { energy, momenta }
}

/// `v_g = a·J·sin(q − φ)`
pub fn group_velocity(q: f64, params: &HubbardParams, spacing: f64) -> Result<f64, OneError> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(OneError::BadSpacing(spacing));
    }
    Ok(spacing * params.tunneling * math::sin(q - params.phase))
}

/// Dense position-space hopping matrix with link phase `φ + link_phases[n]` on
/// the link `n → n+1`.
pub fn hopping_matrix_with_links(sites: usize, tunneling: f64, phase: f64, link_phases: &[f64]) -> DenseMatrix {
    assert_eq!(link_phases.len(), sites);
    let mut h = DenseMatrix::zeros(sites);
    for n in 0..sites {
        let m = (n + 1) % sites;
        let t = math::cis(phase + link_phases[n]) * (-0.5 * tunneling);
        h[(m, n)] += t;
        h[(n, m)] += t.conj();
    }
    h
}

pub fn hopping_matrix(params: &HubbardParams) -> DenseMatrix {
    hopping_matrix_with_links(
        params.sites,
        params.tunneling,
        params.phase,
        &alloc::vec![0.0; params.sites],
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Coefficients of the site functions, `n = 0…N−1`.
    Site,
    /// Coefficients over the integer momentum grid, in grid order.
    Momentum,
}

/// One-atom state in the momentum-translated rotating frame. A momentum
/// label `q` reads out in the lab frame as momentum `ℏq/a`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParticleState {
    amplitudes: Vec<Complex64>,
    basis: Basis,
}

impl OneParticleState {
    pub fn new(amplitudes: Vec<Complex64>, basis: Basis) -> Result<Self, OneError> {
        if amplitudes.len() < 2 {
            return Err(LatticeError::TooFewSites(amplitudes.len()).into());
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(OneError::NonFinite);
        }
        Ok(Self { amplitudes, basis })
    }

    pub fn normalized(mut amplitudes: Vec<Complex64>, basis: Basis) -> Result<Self, OneError> {
        let n = crate::linalg::norm(&amplitudes);
        if !(n > 0.0) {
            return Err(OneError::NotNormalized(0.0));
        }
        amplitudes.iter_mut().for_each(|z| *z /= n);
        Self::new(amplitudes, basis)
    }

    pub fn momentum_eigenstate(q: Momentum) -> Result<Self, OneError> {
        let grid = MomentumGrid::new(q.sites(), GridKind::Integer)?;
        let pos = grid.position(q).ok_or(LatticeError::OffGrid {
            value: q.value(),
            sites: q.sites(),
        })?;
        let mut amps = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
        amps[pos] = Complex64::new(1.0, 0.0);
        Self::new(amps, Basis::Momentum)
    }

    pub fn site_localized(sites: usize, n: usize) -> Result<Self, OneError> {
        let mut amps = alloc::vec![Complex64::new(0.0, 0.0); sites];
        amps[n % sites.max(1)] = Complex64::new(1.0, 0.0);
        Self::new(amps, Basis::Site)
    }

    /// `c_n ∝ exp(−(n−n₀)²/4w²)·e^{iqn}` with minimal-image `n − n₀`, so that
    /// `w` is the rms width of `|c_n|²` in sites.
    pub fn gaussian_packet(sites: usize, center: f64, width: f64, q: f64) -> Result<Self, OneError> {
        let amps = (0..sites)
            .map(|n| {
                let d = minimal_image(n as f64 - center, sites);
                math::cis(q * n as f64) * math::exp(-d * d / (4.0 * width * width))
            })
            .collect();
        Self::normalized(amps, Basis::Site)
    }

    pub fn sites(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn to_basis(&self, basis: Basis) -> Self {
        if basis == self.basis {
            return self.clone();
        }
        let grid = MomentumGrid::new(self.sites(), GridKind::Integer).expect("sites >= 2");
        let qs = grid.values();
        let n = self.sites();
        let scale = 1.0 / math::sqrt(n as f64);
        let amplitudes = match basis {
            Basis::Momentum => qs
                .iter()
                .map(|&q| {
                    (0..n)
                        .map(|s| math::cis(-q * s as f64) * self.amplitudes[s])
                        .sum::<Complex64>()
                        * scale
                })
                .collect(),
            Basis::Site => (0..n)
                .map(|s| {
                    qs.iter()
                        .zip(&self.amplitudes)
                        .map(|(&q, c)| math::cis(q * s as f64) * c)
                        .sum::<Complex64>()
                        * scale
                })
                .collect(),
        };
        Self { amplitudes, basis }
    }

    fn check_normalized(&self) -> Result<(), OneError> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() > 1e-10 {
            return Err(OneError::NotNormalized(n2));
        }
        Ok(())
    }
}

/// `|c̃_q|²` over the integer grid. Label `q` is the lab-frame momentum `ℏq/a`.
pub fn momentum_distribution(state: &OneParticleState) -> Result<Vec<(Momentum, f64)>, OneError> {
    state.check_normalized()?;
    let m = state.to_basis(Basis::Momentum);
    let grid = MomentumGrid::new(state.sites(), GridKind::Integer)?;
    Ok(grid.iter().zip(m.amplitudes()).map(|(q, c)| (q, c.norm_sqr())).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// The ramp rate exceeds the adiabatic guard `0.1·|J|`.
    FastRamp { max_rate: f64, limit: f64 },
}

/// Adiabaticity guard for a one-atom ramp.
pub fn adiabatic_warning(ramp: &RampSchedule, tunneling: f64) -> Option<Warning> {
    let limit = 0.1 * tunneling.abs();
    let max_rate = ramp.max_rate();
    (max_rate > limit).then_some(Warning::FastRamp { max_rate, limit })
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<OneParticleState>,
    pub warnings: Vec<Warning>,
}

/// Exact evolution under `φ(t)`: each momentum amplitude acquires
/// `exp(−i∫ω_q dt) = exp(iJ[cos q·∫cos φ + sin q·∫sin φ])`.
///
/// States are returned in the momentum basis at every `sample_times` entry
/// (sorted, non-negative). The phase integrals use 8-point Gauss–Legendre
/// on pieces no longer than the schedule step.
pub fn evolve_one_particle(
    state: &OneParticleState,
    params: &HubbardParams,
    ramp: &RampSchedule,
    sample_times: &[f64],
) -> Result<Trajectory, OneError> {
    if state.sites() != params.sites {
        return Err(OneError::WrongLength {
            got: state.sites(),
            want: params.sites,
        });
    }
    state.check_normalized()?;
    let start = state.to_basis(Basis::Momentum);
    let qs = params.grid().values();
    let rule = GaussLegendre::new(8);

    let mut times = Vec::with_capacity(sample_times.len());
    let mut states = Vec::with_capacity(sample_times.len());
    let (mut t, mut ic, mut is) = (0.0, 0.0, 0.0);
    for &target in sample_times {
        if !(target.is_finite() && target >= t) {
            return Err(OneError::NonFinite);
        }
        let pieces = math::round(((target - t) / ramp.step()).max(1.0)) as usize;
        let dt = (target - t) / pieces as f64;
        for k in 0..pieces {
            let a = t + k as f64 * dt;
            let b = if k + 1 == pieces { target } else { a + dt };
            let (c, s) = trig_integrals(ramp.profile(), &rule, a, b);
            ic += c;
            is += s;
        }
        t = target;
        let j = params.tunneling;
        let amplitudes = qs
            .iter()
            .zip(start.amplitudes())
            .map(|(&q, c)| c * math::cis(j * (math::cos(q) * ic + math::sin(q) * is)))
            .collect();
        times.push(target);
        states.push(OneParticleState {
            amplitudes,
            basis: Basis::Momentum,
        });
    }
    let warnings = adiabatic_warning(ramp, params.tunneling).into_iter().collect();
    Ok(Trajectory { times, states, warnings })
}

/// `H(φ)·c` in the site basis.
fn apply_hopping(c: &[Complex64], tunneling: f64, phase: f64, out: &mut [Complex64]) {
    let n = c.len();
    let fwd = math::cis(phase) * (-0.5 * tunneling);
    let bwd = fwd.conj();
    for s in 0..n {
        out[s] = fwd * c[(s + n - 1) % n] + bwd * c[(s + 1) % n];
    }
}

/// Fixed-step RK4 integration of `i dc/dt = H(φ(t)) c` in the site basis
/// over the whole schedule, with extra step boundaries at the profile's
/// breakpoints. Independent of the momentum-space propagator.
pub fn evolve_position_rk4(
    state: &OneParticleState,
    params: &HubbardParams,
    ramp: &RampSchedule,
) -> Result<OneParticleState, OneError> {
    if state.sites() != params.sites {
        return Err(OneError::WrongLength {
            got: state.sites(),
            want: params.sites,
        });
    }
    state.check_normalized()?;
    let mut c = state.to_basis(Basis::Site).amplitudes;
    let n = c.len();
    let zero = Complex64::new(0.0, 0.0);
    let mi = Complex64::new(0.0, -1.0);
    let (mut k1, mut k2, mut k3, mut k4) = (alloc::vec![zero; n], alloc::vec![zero; n], alloc::vec![zero; n], alloc::vec![zero; n]);
    let mut tmp = alloc::vec![zero; n];
    let j = params.tunneling;
    // steps never straddle a kink of φ(t)
    let mut times = ramp.times();
    times.extend(ramp.profile().breakpoints().into_iter().filter(|&b| b > 0.0 && b < ramp.duration()));
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| *a - *b < 1e-12 * ramp.step());
    for w in times.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let pm = ramp.phase(t + 0.5 * h);
        apply_hopping(&c, j, ramp.phase(t), &mut k1);
        for i in 0..n {
            k1[i] *= mi;
            tmp[i] = c[i] + k1[i] * (0.5 * h);
        }
        apply_hopping(&tmp, j, pm, &mut k2);
        for i in 0..n {
            k2[i] *= mi;
            tmp[i] = c[i] + k2[i] * (0.5 * h);
        }
        apply_hopping(&tmp, j, pm, &mut k3);
        for i in 0..n {
            k3[i] *= mi;
            tmp[i] = c[i] + k3[i] * h;
        }
        apply_hopping(&tmp, j, ramp.phase(t + h), &mut k4);
        for i in 0..n {
            k4[i] *= mi;
            c[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    Ok(OneParticleState {
        amplitudes: c,
        basis: Basis::Site,
    })
}

/// `x` mapped to `[−N/2, N/2)`.
pub fn minimal_image(x: f64, sites: usize) -> f64 {
    let n = sites as f64;
    x - n * math::floor(x / n + 0.5)
}

/// Circular-mean position of `|c_n|²` in sites, in `[0, N)`.
pub fn centroid(state: &OneParticleState) -> f64 {
    let site = state.to_basis(Basis::Site);
    let n = site.sites() as f64;
    let z: Complex64 = site
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(s, c)| math::cis(math::TAU * s as f64 / n) * c.norm_sqr())
        .sum();
    math::rem_euclid(math::atan2(z.im, z.re) * n / math::TAU, n)
}

/// rms spread of `|c_n|²` about its circular mean, in sites.
pub fn rms_width(state: &OneParticleState) -> f64 {
    let site = state.to_basis(Basis::Site);
    let c = centroid(state);
    let n = site.sites();
    let var: f64 = site
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(s, a)| {
            let d = minimal_image(s as f64 - c, n);
            d * d * a.norm_sqr()
        })
        .sum();
    math::sqrt(var)
}

/// Unwraps a sequence of ring positions so consecutive values differ by less
/// than `N/2`.
pub fn unwrap_positions(positions: &[f64], sites: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(positions.len());
    let mut offset = 0.0;
    for (i, &p) in positions.iter().enumerate() {
        if i > 0 {
            let prev = positions[i - 1];
            offset += minimal_image(p - prev, sites) - (p - prev);
        }
        out.push(p + offset);
    }
    out
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigvalsh;
    use crate::ramp::PhaseProfile;
    use proptest::prelude::*;

    fn params(n: usize, j: f64, phi: f64) -> HubbardParams {
        HubbardParams::new(n, j, phi, 0.0).unwrap()
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn four_site_spectrum() {
        let s = dispersion_spectrum(&params(4, 1.0, 0.0));
        let want = [1.0, 0.0, -1.0, 0.0];
        for ((_, w), e) in s.iter().zip(want) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn three_site_crossing() {
        let s = dispersion_spectrum(&params(3, 1.0, math::PI / 3.0));
        assert!((s[0].1 - 1.0).abs() < 1e-15);
        assert!((s[1].1 + 0.5).abs() < 1e-15);
        assert!((s[2].1 + 0.5).abs() < 1e-15);
    }

    #[test]
    fn dense_matrix_agrees_with_dispersion() {
        let p = params(5, 1.0, 0.17);
        let dense = eigvalsh(&hopping_matrix(&p)).unwrap();
        let closed = sorted(dispersion_spectrum(&p).into_iter().map(|s| s.1).collect());
        for (a, b) in dense.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_states_follow_parity() {
        let g = ground_state_set(&params(3, -1.0, 0.0), 1e-9);
        assert_eq!(g.momenta, [Momentum::from_index(-1, 3), Momentum::from_index(1, 3)]);
        assert!((g.energy + 0.5).abs() < 1e-15);

        let g = ground_state_set(&params(4, -1.0, 0.0), 1e-9);
        assert_eq!(g.momenta, [Momentum::from_index(-2, 4)]);
        assert!((g.momenta[0].value() + math::PI).abs() < 1e-15);

        let g = ground_state_set(&params(4, 1.0, 0.3 * math::PI), 1e-9);
        assert_eq!(g.momenta, [Momentum::from_index(1, 4)]);
    }

    #[test]
    fn group_velocity_examples() {
        let p = params(8, 1.0, 0.2);
        assert!(group_velocity(0.2, &p, 1.0).unwrap().abs() < 1e-16);
        assert!((group_velocity(0.2 + math::PI / 2.0, &p, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let small = params(8, 1.0, 1e-4);
        assert!((group_velocity(0.0, &small, 1.0).unwrap() + 1e-4).abs() < 1e-12);
        assert!(group_velocity(0.0, &p, 0.0).is_err());
    }

    #[test]
    fn basis_round_trip_and_point_transform() {
        let s = OneParticleState::site_localized(6, 0).unwrap();
        let d = momentum_distribution(&s).unwrap();
        assert!(d.iter().all(|x| (x.1 - 1.0 / 6.0).abs() < 1e-15));
        let packet = OneParticleState::gaussian_packet(16, 5.0, 2.0, 0.3).unwrap();
        let back = packet.to_basis(Basis::Momentum).to_basis(Basis::Site);
        for (a, b) in packet.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn packet_width_matches_request() {
        let p = OneParticleState::gaussian_packet(128, 20.0, 6.0, 0.0).unwrap();
        assert!((rms_width(&p) - 6.0).abs() < 1e-6);
        assert!((centroid(&p) - 20.0).abs() < 1e-10);
    }

    #[test]
    fn stationary_eigenstate_phase() {
        let p = params(8, 1.0, 0.4);
        let q = Momentum::from_index(0, 8);
        let s = OneParticleState::momentum_eigenstate(q).unwrap();
        let ramp = RampSchedule::new(PhaseProfile::Constant(0.4), 7.0, 0.5).unwrap();
        let traj = evolve_one_particle(&s, &p, &ramp, &[3.0, 7.0]).unwrap();
        let k = MomentumGrid::new(8, GridKind::Integer).unwrap().position(q).unwrap();
        for (t, st) in traj.times.iter().zip(&traj.states) {
            let want = math::cis(math::cos(0.4) * t);
            assert!((st.amplitudes()[k] - want).norm() < 1e-14);
        }
        assert!(traj.warnings.is_empty());
    }

    #[test]
    fn fast_ramp_is_flagged() {
        let p = params(8, 1.0, 0.0);
        let ramp = RampSchedule::new(PhaseProfile::Linear { start: 0.0, end: 1.0, ramp_time: 1.0 }, 2.0, 0.1).unwrap();
        let s = OneParticleState::site_localized(8, 0).unwrap();
        let traj = evolve_one_particle(&s, &p, &ramp, &[2.0]).unwrap();
        assert!(matches!(traj.warnings[..], [Warning::FastRamp { .. }]));
    }

    #[test]
    fn rejects_unnormalized_state() {
        let p = params(4, 1.0, 0.0);
        let s = OneParticleState::new(alloc::vec![Complex64::new(1.0, 0.0); 4], Basis::Site).unwrap();
        let ramp = RampSchedule::new(PhaseProfile::Constant(0.0), 1.0, 0.1).unwrap();
        assert!(matches!(evolve_one_particle(&s, &p, &ramp, &[1.0]), Err(OneError::NotNormalized(_))));
    }

    #[test]
    fn unwrap_and_fit() {
        let raw = [62.0, 63.5, 1.0, 2.5];
        let u = unwrap_positions(&raw, 64);
        assert_eq!(u, [62.0, 63.5, 65.0, 66.5]);
        assert!((fit_slope(&[0.0, 1.0, 2.0, 3.0], &u) - 1.5).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn spectrum_periodic_in_phase_step(n in 2usize..12, j in -3.0f64..3.0, phi in -4.0f64..4.0) {
            let a = sorted(dispersion_spectrum(&params(n, j, phi)).into_iter().map(|s| s.1).collect());
            let b = sorted(dispersion_spectrum(&params(n, j, phi + math::TAU / n as f64)).into_iter().map(|s| s.1).collect());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn sign_flip_equivalence_iff_even(n in 2usize..10, frac in 0.05f64..0.4) {
            // odd-N spectra coincide accidentally at φ = (2k+1)π/2N
            let phi = frac * math::PI / n as f64 + 0.01;
            let a = sorted(dispersion_spectrum(&params(n, 1.0, phi)).into_iter().map(|s| s.1).collect());
            let b = sorted(dispersion_spectrum(&params(n, -1.0, phi)).into_iter().map(|s| s.1).collect());
            let same = a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12);
            prop_assert_eq!(same, n % 2 == 0);
        }

        #[test]
        fn populations_survive_any_ramp(
            n in 2usize..20, j in -2.0f64..2.0, p0 in -1.0f64..1.0, p1 in -1.0f64..1.0,
            q in -3.0f64..3.0, t in 0.1f64..40.0,
        ) {
            let p = params(n, j, p0);
            let s = OneParticleState::gaussian_packet(n, 0.0, 1.5, q).unwrap();
            let ramp = RampSchedule::new(PhaseProfile::Cosine { start: p0, end: p1, ramp_time: t }, t, 0.5).unwrap();
            let before = momentum_distribution(&s).unwrap();
            let traj = evolve_one_particle(&s, &p, &ramp, &[0.5 * t, t]).unwrap();
            for st in &traj.states {
                prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
                let after = momentum_distribution(st).unwrap();
                for (x, y) in before.iter().zip(&after) {
                    prop_assert!((x.1 - y.1).abs() < 1e-14);
                }
            }
        }
    }
}
