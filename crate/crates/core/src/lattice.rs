//! Ring geometry, lattice-momentum grids, and rotation-phase bookkeeping.
//!
//! Lattice momenta are dimensionless (`q = a·k`). Grid momenta are stored as
//! exact integer multiples of π/N so that membership and modular comparisons
//! never depend on a floating tolerance; the float value is derived on demand.
//! The canonical interval is `[-π, π)`, with π identified with -π.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::math::{self, PI, TAU};
use crate::HBAR;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum LatticeError {
    #[error("a ring lattice needs at least two sites, got {0}")]
    TooFewSites(usize),
    #[error("lattice spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("atom mass must be positive and finite, got {0}")]
    BadMass(f64),
    #[error("rotation parameter must be finite, got {0}")]
    NonFinite(f64),
    #[error("momentum {value} is not a multiple of 2π/{sites}")]
    OffGrid { value: f64, sites: usize },
}

/// Reduce `q` to the canonical interval `[-π, π)`. Identity on canonical input.
pub fn wrap_momentum(q: f64) -> f64 {
    if (-PI..PI).contains(&q) {
        return q;
    }
    let mut r = q - TAU * math::floor((q + PI) / TAU);
    if r >= PI {
        r -= TAU;
    }
    if r < -PI {
        r += TAU;
    }
    r
}

/// N-site ring with spacing `a`; circumference `L = N·a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingLattice {
    sites: usize,
    spacing: f64,
}

impl RingLattice {
    pub fn new(sites: usize, spacing: f64) -> Result<Self, LatticeError> {
        if sites < 2 {
            return Err(LatticeError::TooFewSites(sites));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(LatticeError::BadSpacing(spacing));
        }
        Ok(Self { sites, spacing })
    }

    /// Ring with unit spacing, the convention of the Hubbard-level modules.
    pub fn unit(sites: usize) -> Result<Self, LatticeError> {
        Self::new(sites, 1.0)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn circumference(&self) -> f64 {
        self.sites as f64 * self.spacing
    }

    pub fn is_even(&self) -> bool {
        self.sites.is_multiple_of(2)
    }

    /// First and last site index: `-N/2..=N/2-1` for even N,
    /// `-(N-1)/2..=(N-1)/2` for odd N.
    pub fn index_range(&self) -> (i64, i64) {
        let n = self.sites as i64;
        if n % 2 == 0 {
            (-n / 2, n / 2 - 1)
        } else {
            (-(n - 1) / 2, (n - 1) / 2)
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let (lo, hi) = self.index_range();
        lo..=hi
    }

    /// `x_n = n·a`
    pub fn site_position(&self, n: i64) -> f64 {
        n as f64 * self.spacing
    }

    /// `k_n = 2πn/L`
    pub fn wave_vector(&self, n: i64) -> f64 {
        TAU * n as f64 / self.circumference()
    }

    pub fn momentum_grid(&self, kind: GridKind) -> MomentumGrid {
        build_momentum_grid(self, kind)
    }
}

/// Exact lattice momentum `q = π·half_steps/N`, kept in canonical form
/// `half_steps ∈ [-N, N)`.
///
/// Even `half_steps` are ordinary ("integer") lattice momenta, odd ones sit
/// halfway between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Momentum {
    half_steps: i64,
    sites: usize,
}

impl Momentum {
    pub fn from_half_steps(half_steps: i64, sites: usize) -> Self {
        let n = sites as i64;
        Self {
            half_steps: (half_steps + n).rem_euclid(2 * n) - n,
            sites,
        }
    }

    /// The single-particle momentum `2πn/N`.
    pub fn from_index(n: i64, sites: usize) -> Self {
        Self::from_half_steps(2 * n, sites)
    }

    /// Snap a float onto the nearest multiple of π/N, if it is within `tol`.
    pub fn from_value(q: f64, sites: usize, tol: f64) -> Option<Self> {
        let x = q * sites as f64 / PI;
        let h = math::round(x);
        if (x - h).abs() * PI / sites as f64 <= tol {
            Some(Self::from_half_steps(h as i64, sites))
        } else {
            None
        }
    }

    pub fn half_steps(&self) -> i64 {
        self.half_steps
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn value(&self) -> f64 {
        PI * (self.half_steps as f64 / self.sites as f64)
    }

    pub fn kind(&self) -> GridKind {
        if self.half_steps % 2 == 0 {
            GridKind::Integer
        } else {
            GridKind::HalfInteger
        }
    }

    /// Single-particle index `n` with `q = 2πn/N`, for integer momenta.
    pub fn index(&self) -> Option<i64> {
        (self.half_steps % 2 == 0).then_some(self.half_steps / 2)
    }

}

impl core::ops::Neg for Momentum {
    type Output = Self;

    fn neg(self) -> Self {
        Self::from_half_steps(-self.half_steps, self.sites)
    }
}

impl core::ops::Add for Momentum {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        debug_assert_eq!(self.sites, other.sites);
        Self::from_half_steps(self.half_steps + other.half_steps, self.sites)
    }
}

impl core::ops::Sub for Momentum {
    type Output = Self;

    fn sub(self, other: Self) -> Self {
        debug_assert_eq!(self.sites, other.sites);
        Self::from_half_steps(self.half_steps - other.half_steps, self.sites)
    }
}

impl PartialOrd for Momentum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Momentum {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.half_steps * other.sites as i64).cmp(&(other.half_steps * self.sites as i64))
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π/{}", self.half_steps, self.sites)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    /// `q ∈ {2πn/N}`
    Integer,
    /// Integer grid shifted by π/N.
    HalfInteger,
}

/// N lattice momenta of one kind, sorted ascending in `[-π, π)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentumGrid {
    sites: usize,
    kind: GridKind,
    values: Vec<Momentum>,
}

impl MomentumGrid {
    pub fn new(sites: usize, kind: GridKind) -> Result<Self, LatticeError> {
        if sites < 2 {
            return Err(LatticeError::TooFewSites(sites));
        }
        let n = sites as i64;
        // smallest half-step count in [-N, N) with the parity of `kind`
        let want_odd = kind == GridKind::HalfInteger;
        let first = if ((-n).rem_euclid(2) == 1) == want_odd { -n } else { -n + 1 };
        let values = (0..n)
            .map(|i| Momentum::from_half_steps(first + 2 * i, sites))
            .collect();
        Ok(Self { sites, kind, values })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn momenta(&self) -> &[Momentum] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = Momentum> + '_ {
        self.values.iter().copied()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.iter().map(Momentum::value).collect()
    }

    /// Position of `q` in the sorted grid.
    pub fn position(&self, q: Momentum) -> Option<usize> {
        if q.sites != self.sites || q.kind() != self.kind {
            return None;
        }
        let first = self.values[0].half_steps;
        Some(((q.half_steps - first) / 2) as usize)
    }

    pub fn contains(&self, q: Momentum) -> bool {
        self.position(q).is_some()
    }
}

pub fn build_momentum_grid(lattice: &RingLattice, kind: GridKind) -> MomentumGrid {
    MomentumGrid::new(lattice.sites(), kind).expect("RingLattice guarantees N >= 2")
}

/// Total lattice momentum of a pair, `P = 2π·steps/N`.
///
/// `P` and `P + 2π` describe the same pair states (the relative grid and the
/// sign of the frequency scale change together); `steps` is kept as given so
/// that the frequency scale is evaluated at the caller's representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TotalMomentum {
    steps: i64,
    sites: usize,
}

impl TotalMomentum {
    pub fn new(steps: i64, sites: usize) -> Self {
        Self { steps, sites }
    }

    pub fn from_value(p: f64, sites: usize) -> Result<Self, LatticeError> {
        let x = p * sites as f64 / TAU;
        let k = math::round(x);
        if !p.is_finite() || (x - k).abs() > 1e-9 {
            return Err(LatticeError::OffGrid { value: p, sites });
        }
        Ok(Self::new(k as i64, sites))
    }

    pub fn steps(&self) -> i64 {
        self.steps
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn value(&self) -> f64 {
        TAU * self.steps as f64 / self.sites as f64
    }

    /// `½P` as an exact (possibly half-integer) lattice momentum.
    pub fn half(&self) -> Momentum {
        Momentum::from_half_steps(self.steps, self.sites)
    }

    /// Kind of relative-momentum grid that keeps `½P ± q` on the lattice.
    pub fn relative_kind(&self) -> GridKind {
        if self.steps.rem_euclid(2) == 0 {
            GridKind::Integer
        } else {
            GridKind::HalfInteger
        }
    }

    /// Every total momentum of an N-site ring, one representative per sector.
    pub fn all(sites: usize) -> impl Iterator<Item = TotalMomentum> {
        (0..sites as i64).map(move |k| TotalMomentum::new(k, sites))
    }
}

/// Rotation of the ring at velocity `v` for an atom of mass `m`.
///
/// `Φ = m·v·L/ℏ` is the end-to-end twist, `φ = Φ/N` the per-site twist that
/// enters the hopping terms, and `k_v = m·v/ℏ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSpec {
    velocity: f64,
    mass: f64,
    twist: f64,
    phase: f64,
    wave_number: f64,
}

impl RotationSpec {
    pub fn from_velocity(velocity: f64, mass: f64, lattice: &RingLattice) -> Result<Self, LatticeError> {
        check_mass(mass)?;
        check_finite(velocity)?;
        let wave_number = mass * velocity / HBAR;
        let twist = wave_number * lattice.circumference();
        Ok(Self {
            velocity,
            mass,
            twist,
            phase: twist / lattice.sites() as f64,
            wave_number,
        })
    }

    pub fn from_twist(twist: f64, mass: f64, lattice: &RingLattice) -> Result<Self, LatticeError> {
        check_mass(mass)?;
        check_finite(twist)?;
        let wave_number = twist / lattice.circumference();
        Ok(Self {
            velocity: HBAR * wave_number / mass,
            mass,
            twist,
            phase: twist / lattice.sites() as f64,
            wave_number,
        })
    }

    pub fn from_phase(phase: f64, mass: f64, lattice: &RingLattice) -> Result<Self, LatticeError> {
        check_finite(phase)?;
        let mut spec = Self::from_twist(phase * lattice.sites() as f64, mass, lattice)?;
        spec.phase = phase;
        Ok(spec)
    }

    pub fn stationary(mass: f64, lattice: &RingLattice) -> Result<Self, LatticeError> {
        Self::from_velocity(0.0, mass, lattice)
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// End-to-end twist `Φ`.
    pub fn twist(&self) -> f64 {
        self.twist
    }

    /// Per-site twist `φ`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// `k_v = m·v/ℏ`
    pub fn wave_number(&self) -> f64 {
        self.wave_number
    }
}

fn check_mass(mass: f64) -> Result<(), LatticeError> {
    if mass.is_finite() && mass > 0.0 {
        Ok(())
    } else {
        Err(LatticeError::BadMass(mass))
    }
}

fn check_finite(x: f64) -> Result<(), LatticeError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(LatticeError::NonFinite(x))
    }
}
