//! Two distinguishable atoms with their own tunneling `J₁, J₂` and rotation
//! phases `φ₁, φ₂`.
//!
//! `A(q)` is the amplitude of atom 1 at `½P + q` and atom 2 at `½P − q`;
//! the inner product is the plain `Σ A*B`. The kinetic term reduces to
//! `−Ω cos(q + β)` with `Ωe^{iβ} = J₁e^{i(½P−φ₁)} + J₂e^{−i(½P−φ₂)}`, and the
//! interaction `U₁₂/2` per doubly occupied site gives `𝒦 = U₁₂/(2Ω)`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::lattice::{LatticeError, Momentum, MomentumGrid, TotalMomentum};
use crate::math;
use crate::two::{density_from_coupling, pole_amplitudes, relative_grid, secular_roots, TwoError, OMEGA_FLOOR};

/// Poles `−cos(q + β)` closer than this are treated as one.
pub const POLE_CLUSTER_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum HeteroError {
    #[error(transparent)]
    Two(#[from] TwoError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("both tunneling amplitudes vanish")]
    NoKinetics,
    #[error("the closed-form density assumes J₁ = J₂ (relative difference {0:e})")]
    UnequalTunneling(f64),
    #[error("parameter is not finite")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeteroParams {
    pub sites: usize,
    pub tunnelings: (f64, f64),
    pub phases: (f64, f64),
    pub interaction: f64,
}

impl HeteroParams {
    pub fn new(sites: usize, tunnelings: (f64, f64), phases: (f64, f64), interaction: f64) -> Result<Self, HeteroError> {
        if sites < 2 {
            return Err(LatticeError::TooFewSites(sites).into());
        }
        let all = [tunnelings.0, tunnelings.1, phases.0, phases.1, interaction];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(HeteroError::NonFinite);
        }
        if tunnelings.0 == 0.0 && tunnelings.1 == 0.0 {
            return Err(HeteroError::NoKinetics);
        }
        Ok(Self {
            sites,
            tunnelings,
            phases,
            interaction,
        })
    }
}

/// `(Ω, β)` with `Ω ≥ 0` and `β` on the principal branch of the
/// two-argument angle, `β ∈ −½(φ₁−φ₂) + (−π, π]`.
pub fn hetero_scales(params: &HeteroParams, total: f64) -> Result<(f64, f64), HeteroError> {
    let (j1, j2) = params.tunnelings;
    let (p1, p2) = params.phases;
    if j1 == 0.0 && j2 == 0.0 {
        return Err(HeteroError::NoKinetics);
    }
    if !total.is_finite() {
        return Err(HeteroError::NonFinite);
    }
    let s = 0.5 * (total - p1 - p2);
    let x = (j1 + j2) * math::cos(s);
    let y = (j1 - j2) * math::sin(s);
    let omega = math::hypot(x, y);
    let beta = math::atan2(y, x) - 0.5 * (p1 - p2);
    Ok((omega, beta))
}

/// Keeps `β` continuous along a parameter path by choosing, at each point,
/// the `2π` image nearest the previous value.
#[derive(Debug, Clone, Default)]
pub struct BetaTracker {
    last: Option<f64>,
}

impl BetaTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn unwrap(&mut self, beta: f64) -> f64 {
        let out = match self.last {
            None => beta,
            Some(prev) => beta - math::TAU * math::round((beta - prev) / math::TAU),
        };
        self.last = Some(out);
        out
    }

    pub fn last(&self) -> Option<f64> {
        self.last
    }
}

/// A sweep over total momentum (or any path through parameters) that
/// carries the `β` branch from point to point.
#[derive(Debug, Clone)]
pub struct HeteroSweep {
    tracker: BetaTracker,
}

impl HeteroSweep {
    pub fn new() -> Self {
        Self {
            tracker: BetaTracker::new(),
        }
    }

    pub fn scales(&mut self, params: &HeteroParams, total: f64) -> Result<(f64, f64), HeteroError> {
        let (omega, beta) = hetero_scales(params, total)?;
        Ok((omega, self.tracker.unwrap(beta)))
    }
}

impl Default for HeteroSweep {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeteroSector {
    params: HeteroParams,
    total: TotalMomentum,
    grid: MomentumGrid,
    omega: f64,
    beta: f64,
}

impl HeteroSector {
    pub fn new(params: &HeteroParams, total: TotalMomentum) -> Result<Self, HeteroError> {
        let grid = relative_grid(params.sites, total)?;
        let (omega, beta) = hetero_scales(params, total.value())?;
        Ok(Self {
            params: *params,
            total,
            grid,
            omega,
            beta,
        })
    }

    /// Same sector with `β` replaced, e.g. by a branch carried along a sweep.
    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..self.clone() }
    }

    pub fn params(&self) -> &HeteroParams {
        &self.params
    }

    pub fn total(&self) -> TotalMomentum {
        self.total
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `𝒦 = U₁₂/(2Ω)`
    pub fn coupling(&self) -> f64 {
        self.params.interaction / (2.0 * self.omega)
    }

    pub fn is_collapsed(&self) -> bool {
        let (j1, j2) = self.params.tunnelings;
        self.omega.abs() < OMEGA_FLOOR * j1.abs().max(j2.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeteroState {
    sector: HeteroSector,
    energy: f64,
    amplitudes: Vec<Complex64>,
    near_pole: bool,
}

impl HeteroState {
    pub fn sector(&self) -> &HeteroSector {
        &self.sector
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn omega(&self) -> Option<f64> {
        (!self.sector.is_collapsed()).then(|| self.energy / self.sector.omega)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, q: Momentum) -> Option<Complex64> {
        self.sector.grid.position(q).map(|i| self.amplitudes[i])
    }

    pub fn near_pole(&self) -> bool {
        self.near_pole
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn inner(&self, other: &HeteroState) -> Complex64 {
        crate::linalg::inner(&self.amplitudes, &other.amplitudes)
    }
}

pub fn solve_hetero_spectrum(params: &HeteroParams, total: TotalMomentum) -> Result<Vec<HeteroState>, HeteroError> {
    solve_hetero_sector(&HeteroSector::new(params, total)?)
}

/// All `N` eigenstates of a sector, sorted by energy.
pub fn solve_hetero_sector(sector: &HeteroSector) -> Result<Vec<HeteroState>, HeteroError> {
    let n = sector.grid.len();
    let cosines: Vec<f64> = sector.grid.iter().map(|q| math::cos(q.value() + sector.beta)).collect();
    let u = sector.params.interaction;
    let state = |energy: f64, amplitudes: Vec<Complex64>, near_pole: bool| HeteroState {
        sector: sector.clone(),
        energy,
        amplitudes,
        near_pole,
    };
    let mut states = Vec::with_capacity(n);
    if u == 0.0 {
        for (i, c) in cosines.iter().enumerate() {
            let mut a = vec![Complex64::new(0.0, 0.0); n];
            a[i] = Complex64::new(1.0, 0.0);
            states.push(state(-sector.omega * c, a, false));
        }
    } else if sector.is_collapsed() {
        let all: Vec<usize> = (0..n).collect();
        let c = 1.0 / math::sqrt(n as f64);
        states.push(state(0.5 * u, vec![Complex64::new(c, 0.0); n], false));
        for v in zero_sum_vectors(&all, n) {
            states.push(state(0.0, v, false));
        }
    } else {
        let clusters = cluster_poles(&cosines);
        let poles: Vec<(f64, f64)> = clusters.iter().map(|c| (c.pole, c.members.len() as f64)).collect();
        for w in secular_roots(&poles, n as f64, sector.coupling())? {
            let (a, _, dmin) = pole_amplitudes(w, &cosines, 1.0);
            states.push(state(w * sector.omega, a, dmin < crate::two::NEAR_POLE));
        }
        for c in &clusters {
            for v in zero_sum_vectors(&c.members, n) {
                states.push(state(sector.omega * c.pole, v, false));
            }
        }
    }
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(states)
}

struct Cluster {
    pole: f64,
    members: Vec<usize>,
}

fn cluster_poles(cosines: &[f64]) -> Vec<Cluster> {
    let mut order: Vec<usize> = (0..cosines.len()).collect();
    order.sort_by(|&a, &b| (-cosines[a]).total_cmp(&-cosines[b]));
    let mut out: Vec<Cluster> = Vec::new();
    for i in order {
        let p = -cosines[i];
        match out.last_mut() {
            Some(c) if (p - c.pole).abs() <= POLE_CLUSTER_TOL => c.members.push(i),
            _ => out.push(Cluster { pole: p, members: vec![i] }),
        }
    }
    for c in &mut out {
        c.pole = -c.members.iter().map(|&i| cosines[i]).sum::<f64>() / c.members.len() as f64;
    }
    out
}

/// Orthonormal vectors supported on `members` with zero component sum.
fn zero_sum_vectors(members: &[usize], n: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for k in 1..members.len() {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[members[0]] = Complex64::new(1.0, 0.0);
        v[members[k]] = Complex64::new(-1.0, 0.0);
        for b in &basis {
            let p = crate::linalg::inner(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= y * p);
        }
        let norm = crate::linalg::norm(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    basis
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    One,
    Two,
}

/// Large-N density value; `uniform_limit` marks a vanishing `cos[½(P−φ₁−φ₂)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeteroDensity {
    pub value: f64,
    pub uniform_limit: bool,
}

/// Relative tunneling mismatch above which the closed-form density is refused.
pub const EQUAL_TUNNELING_TOL: f64 = 1e-9;

/// Large-N momentum density of one species for equal tunneling:
///
/// ```text
/// f(q) = (|𝒦|³/2π√(1+𝒦²)) / (sgn𝒦·√(1+𝒦²) + cos(q − ½P ± β))²
/// 𝒦(P) = U₁₂ / (2J cos[½(P − φ₁ − φ₂)]),   β = −½(φ₁ − φ₂)
/// ```
///
/// with `+β` for species 1 and `−β` for species 2.
pub fn hetero_momentum_density(q: f64, params: &HeteroParams, total: f64, species: Species) -> Result<HeteroDensity, HeteroError> {
    let (j1, j2) = params.tunnelings;
    let mismatch = (j1 - j2).abs() / (j1.abs() + j2.abs());
    if !(mismatch < EQUAL_TUNNELING_TOL) {
        return Err(HeteroError::UnequalTunneling(mismatch));
    }
    if params.interaction == 0.0 {
        return Err(TwoError::ZeroInteraction.into());
    }
    let (p1, p2) = params.phases;
    let beta = -0.5 * (p1 - p2);
    let denom = 2.0 * j1 * math::cos(0.5 * (total - p1 - p2));
    let uniform_limit = denom.abs() < OMEGA_FLOOR * j1.abs().max(1.0);
    let coupling = if uniform_limit { f64::INFINITY } else { params.interaction / denom };
    let half = match species {
        Species::One => 0.5 * total - beta,
        Species::Two => 0.5 * total + beta,
    };
    Ok(HeteroDensity {
        value: density_from_coupling(q, half, coupling),
        uniform_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::two::solve_dimer_spectrum;
    use proptest::prelude::*;

    fn params(j1: f64, j2: f64, p1: f64, p2: f64, u: f64, n: usize) -> HeteroParams {
        HeteroParams::new(n, (j1, j2), (p1, p2), u).unwrap()
    }

    #[test]
    fn symmetric_reduction() {
        let p = params(1.3, 1.3, 0.4, 0.4, 1.0, 8);
        for total in [0.0, 0.5, 1.2] {
            let (om, beta) = hetero_scales(&p, total).unwrap();
            assert!((om - 2.6 * math::cos(0.5 * total - 0.4).abs()).abs() < 1e-14);
            assert!(beta.abs() < 1e-15);
        }
        // past the zero of cos(½P − φ) the same reduction needs β = π with Ω ≥ 0
        let (_, beta) = hetero_scales(&p, 4.0).unwrap();
        assert!((beta - math::PI).abs() < 1e-15);
    }

    #[test]
    fn single_mobile_species() {
        let p = params(0.7, 0.0, 0.3, -0.2, 1.0, 8);
        for total in [-1.0, 0.0, 0.9] {
            let (om, beta) = hetero_scales(&p, total).unwrap();
            assert!((om - 0.7).abs() < 1e-15);
            let want = 0.5 * total - 0.3;
            assert!((crate::lattice::wrap_momentum(beta - want)).abs() < 1e-14);
        }
        assert!(HeteroParams::new(4, (0.0, 0.0), (0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn beta_sweep_is_continuous() {
        let p = params(1.0, 0.4, 0.3, 0.1, 1.0, 8);
        let mut sweep = HeteroSweep::new();
        let steps = 4000;
        let mut prev: Option<f64> = None;
        let mut raw_jump = 0.0f64;
        let mut last_raw: Option<f64> = None;
        for k in 0..=steps {
            // P − φ₁ − φ₂ runs across π and beyond
            let total = 0.4 + 12.0 * k as f64 / steps as f64;
            let (_, b) = sweep.scales(&p, total).unwrap();
            let (_, raw) = hetero_scales(&p, total).unwrap();
            if let Some(x) = prev {
                assert!((b - x).abs() < 0.01, "jump at P={total}");
            }
            if let Some(x) = last_raw {
                raw_jump = raw_jump.max((raw - x).abs());
            }
            prev = Some(b);
            last_raw = Some(raw);
        }
        // the principal branch alone does jump
        assert!(raw_jump > 3.0);
    }

    #[test]
    fn free_spectrum() {
        let p = params(1.0, 0.5, 0.2, 0.1, 0.0, 6);
        let s = solve_hetero_spectrum(&p, TotalMomentum::new(1, 6)).unwrap();
        let sector = HeteroSector::new(&p, TotalMomentum::new(1, 6)).unwrap();
        let mut want: Vec<f64> = sector
            .grid()
            .iter()
            .map(|q| -sector.omega() * math::cos(q.value() + sector.beta()))
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in s.iter().zip(&want) {
            assert!((a.energy() - b).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_species_match_identical_bosons() {
        for (n, k, u) in [(8usize, 0i64, 3.0), (7, 2, -1.5), (6, 1, 2.0)] {
            let total = TotalMomentum::new(k, n);
            let p = params(1.0, 1.0, 0.2, 0.2, 2.0 * u, n);
            let hetero = solve_hetero_spectrum(&p, total).unwrap();
            let bosons = solve_dimer_spectrum(n, total, 0.2, 1.0, u).unwrap();
            let sector = HeteroSector::new(&p, total).unwrap();
            assert!(sector.beta().abs() < 1e-15);
            // the boson roots plus the antisymmetric levels −Ω cos q, q ≠ ±q
            let mut want: Vec<f64> = bosons.iter().map(|s| s.energy()).collect();
            for q in sector.grid().iter() {
                if q.half_steps() > 0 && -q != q {
                    want.push(-sector.omega() * math::cos(q.value()));
                }
            }
            want.sort_by(f64::total_cmp);
            assert_eq!(hetero.len(), want.len());
            for (a, b) in hetero.iter().zip(&want) {
                assert!((a.energy() - b).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn collapsed_sector() {
        // J₁ = J₂ and ½(P − φ₁ − φ₂) = π/2 switch the kinetic term off
        let p = params(1.0, 1.0, -0.5 * math::PI, -0.5 * math::PI, 3.0, 5);
        let s = solve_hetero_spectrum(&p, TotalMomentum::new(0, 5)).unwrap();
        assert_eq!(s.last().unwrap().energy(), 1.5);
        assert!(s[..4].iter().all(|x| x.energy() == 0.0));
    }

    #[test]
    fn density_species_shift() {
        let (p1, p2) = (0.9, 0.3);
        let p = params(1.0, 1.0, p1, p2, -2.0, 64);
        let total = -(p1 + p2);
        let f1 = |q| hetero_momentum_density(q, &p, total, Species::One).unwrap().value;
        let f2 = |q| hetero_momentum_density(q, &p, total, Species::Two).unwrap().value;
        let argmax = |f: &dyn Fn(f64) -> f64| {
            (0..20000)
                .map(|i| -math::PI + math::TAU * i as f64 / 20000.0)
                .max_by(|a, b| f(*a).total_cmp(&f(*b)))
                .unwrap()
        };
        // with the ±β assignment above, species 1 peaks at −φ₂ and species 2 at −φ₁
        assert!((argmax(&f1) + p2).abs() < 1e-3);
        assert!((argmax(&f2) + p1).abs() < 1e-3);
        let q = params(1.0, 1.0, 0.4, 0.4, -1.0, 64);
        for x in [-2.0, 0.1, 1.0] {
            let a = hetero_momentum_density(x, &q, 0.3, Species::One).unwrap().value;
            let b = crate::two::momentum_density_large_n(x, 0.3, 0.4, 1.0, -1.0).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
        assert!(hetero_momentum_density(0.0, &params(1.0, 0.9, 0.0, 0.0, 1.0, 8), 0.0, Species::One).is_err());
        let flat = hetero_momentum_density(0.2, &params(1.0, 1.0, 0.0, 0.0, 1.0, 8), math::PI, Species::Two).unwrap();
        assert!(flat.uniform_limit);
        assert!((flat.value - 1.0 / math::TAU).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn invariants(
            n in 2usize..10, k in 0i64..10, j1 in 0.1f64..2.0, j2 in -2.0f64..2.0,
            p1 in -3.0f64..3.0, p2 in -3.0f64..3.0, u in -5.0f64..5.0, shift in -3i64..3,
        ) {
            prop_assume!(u.abs() > 1e-3);
            let p = params(j1, j2, p1, p2, u, n);
            let sector = HeteroSector::new(&p, TotalMomentum::new(k % n as i64, n)).unwrap();
            let s = solve_hetero_sector(&sector).unwrap();
            prop_assert_eq!(s.len(), n);
            for (i, a) in s.iter().enumerate() {
                prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
                for b in &s[i + 1..] {
                    prop_assert!(a.inner(b).norm() < 1e-8);
                }
            }
            let moved = solve_hetero_sector(&sector.with_beta(sector.beta() + math::TAU * shift as f64 / n as f64)).unwrap();
            for (a, b) in s.iter().zip(&moved) {
                prop_assert!((a.energy() - b.energy()).abs() < 1e-10 * u.abs().max(1.0));
            }
        }

        #[test]
        fn densities_integrate_to_one(
            pp in -3.0f64..3.0, p1 in -2.0f64..2.0, p2 in -2.0f64..2.0, u in prop_oneof![-8.0f64..-0.5, 0.5f64..8.0],
        ) {
            let p = params(1.0, 1.0, p1, p2, u, 64);
            for sp in [Species::One, Species::Two] {
                let d = hetero_momentum_density(0.0, &p, pp, sp).unwrap();
                prop_assume!(!d.uniform_limit);
                let total = crate::quad::integrate_adaptive(
                    |q| hetero_momentum_density(q, &p, pp, sp).unwrap().value, -math::PI, math::PI, 1e-11,
                ).unwrap();
                prop_assert!((total - 1.0).abs() < 1e-8);
            }
        }
    }
}
