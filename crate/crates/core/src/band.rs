//! Continuum band structure of the rotating ring and the Wannier functions
//! of its lowest band.
//!
//! In the momentum-translated rotating frame the Hamiltonian is
//! `H' = −(1/2m) ∂² + V(x)` acting on functions with the twisted boundary
//! condition `Ψ(x + L) = e^{−ik_v L} Ψ(x)`. Bloch momenta are
//! `K_n = k_n − k_v` with `k_n = 2πn/L`, and each Bloch state is expanded in
//! plane waves `e^{i(K_n + 2πj/a)x}`, `|j| ≤ M`. The constant `−½mv²` is
//! dropped from every energy: `frame_offset()` returns it.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::lattice::{LatticeError, RingLattice, RotationSpec};
use crate::linalg::{eigh, DenseMatrix, LinalgError};
use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BandError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("basis cutoff must be at least 4, got {0}")]
    BadCutoff(usize),
    #[error("potential samples: {0}")]
    BadPotential(&'static str),
    #[error("diagonalization failed at Bloch index n = {n}: {source}")]
    Diagonalization { n: i64, source: LinalgError },
    #[error("cutoff too small: lowest band at n = {n} has weight {weight:e} in the outermost plane waves")]
    CutoffTooSmall { n: i64, weight: f64 },
    #[error("potential is flat; there is no lattice to localize on")]
    FlatPotential,
    #[error("lowest band is not separated from the next (gap {gap:e})")]
    NoBandGap { gap: f64 },
    #[error("Bloch state n = {n} vanishes at x = 0; the phase convention is undefined")]
    NodeAtOrigin { n: i64 },
    #[error("Wannier functions are not orthonormal (max Gram deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("tunneling quadrature did not converge (change {change:e} on doubling)")]
    QuadratureNotConverged { change: f64 },
    #[error("trap frequency must be positive and finite, got {0}")]
    BadTrapFrequency(f64),
}

/// Periodic potential over one lattice period `a`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `V(x) = V₀ sin²(πx/a)`
    Sinusoidal { depth: f64 },
    /// Uniform samples `V(j·a/S)`, `j = 0…S−1`, band-limited by DFT.
    Sampled { values: Vec<f64> },
}

impl Potential {
    pub fn sinusoidal(depth: f64) -> Self {
        Potential::Sinusoidal { depth }
    }

    /// Samples `V(j·a/S)` for `j = 0…S−1`.
    pub fn sampled(values: Vec<f64>) -> Result<Self, BandError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(BandError::BadPotential("non-finite value"));
        }
        if values.len() < 3 {
            return Err(BandError::BadPotential("need at least 3 samples per period"));
        }
        Ok(Potential::Sampled { values })
    }

    /// Uniform `(x, V)` samples covering one period starting at `x = 0`,
    /// optionally closed by a repeated point at `x = a`.
    pub fn from_table(points: &[(f64, f64)], spacing: f64) -> Result<Self, BandError> {
        if points.len() < 3 {
            return Err(BandError::BadPotential("need at least 3 samples per period"));
        }
        let last = points[points.len() - 1];
        let closed = (last.0 - spacing).abs() <= 1e-9 * spacing;
        let open = if closed { &points[..points.len() - 1] } else { points };
        let dx = spacing / open.len() as f64;
        for (j, &(x, _)) in open.iter().enumerate() {
            if (x - j as f64 * dx).abs() > 1e-9 * spacing {
                return Err(BandError::BadPotential("x column must be uniform over [0, a)"));
            }
        }
        if closed {
            let scale = points.iter().fold(1.0f64, |m, p| m.max(p.1.abs()));
            if (last.1 - points[0].1).abs() > 1e-8 * scale {
                return Err(BandError::BadPotential("V(a) differs from V(0)"));
            }
        }
        Self::sampled(open.iter().map(|p| p.1).collect())
    }

    /// Fourier coefficients `V̂(j)` for `|j| ≤ max`, index `j + max`.
    fn coefficients(&self, max: usize) -> Vec<Complex64> {
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * max + 1];
        match self {
            Potential::Sinusoidal { depth } => {
                c[max] = Complex64::new(0.5 * depth, 0.0);
                if max >= 1 {
                    c[max - 1] = Complex64::new(-0.25 * depth, 0.0);
                    c[max + 1] = Complex64::new(-0.25 * depth, 0.0);
                }
            }
            Potential::Sampled { values } => {
                let s = values.len();
                for j in -(max as i64)..=max as i64 {
                    // keep only harmonics the samples can resolve
                    if 2 * j.unsigned_abs() as usize >= s {
                        continue;
                    }
                    let sum: Complex64 = values
                        .iter()
                        .enumerate()
                        .map(|(k, v)| math::cis(-math::TAU * (j * k as i64) as f64 / s as f64) * v)
                        .sum();
                    c[(j + max as i64) as usize] = sum / s as f64;
                }
            }
        }
        c
    }

    fn is_flat(&self) -> bool {
        match self {
            Potential::Sinusoidal { depth } => *depth == 0.0,
            Potential::Sampled { values } => {
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
                let c = self.coefficients(values.len() / 2);
                let mid = values.len() / 2;
                c.iter().enumerate().all(|(i, z)| i == mid || z.norm() < 1e-12 * scale)
            }
        }
    }
}

/// Everything that defines the continuum problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumProblem {
    pub lattice: RingLattice,
    pub rotation: RotationSpec,
    pub potential: Potential,
    /// plane waves per Bloch momentum: `2M + 1`
    pub cutoff: usize,
    /// largest allowed weight in the outermost plane waves of the lowest band
    pub cutoff_weight: f64,
}

impl ContinuumProblem {
    pub fn new(lattice: RingLattice, rotation: RotationSpec, potential: Potential, cutoff: usize) -> Result<Self, BandError> {
        if cutoff < 4 {
            return Err(BandError::BadCutoff(cutoff));
        }
        Ok(Self {
            lattice,
            rotation,
            potential,
            cutoff,
            cutoff_weight: 1e-8,
        })
    }

    pub fn mass(&self) -> f64 {
        self.rotation.mass()
    }

    /// `E_R = π²/(2ma²)`
    pub fn recoil_energy(&self) -> f64 {
        recoil_energy(self.mass(), self.lattice.spacing())
    }

    /// `−k_v²/(2m)`, the constant dropped from every reported energy.
    pub fn frame_offset(&self) -> f64 {
        let k = self.rotation.wave_number();
        -k * k / (2.0 * self.mass())
    }

    fn reciprocal(&self) -> f64 {
        math::TAU / self.lattice.spacing()
    }

    /// Same problem with the lattice at rest.
    pub fn stationary(&self) -> Self {
        let rotation = RotationSpec::stationary(self.mass(), &self.lattice).expect("mass already validated");
        Self { rotation, ..self.clone() }
    }

    /// Plane-wave Hamiltonian at Bloch momentum `K` (Hermitian by construction).
    pub fn hamiltonian(&self, k: f64) -> DenseMatrix {
        let m = self.cutoff;
        let g = self.reciprocal();
        let v = self.potential.coefficients(2 * m);
        let mass = self.mass();
        DenseMatrix::from_fn(2 * m + 1, |i, j| {
            let d = i as i64 - j as i64;
            let mut h = v[(d + 2 * m as i64) as usize];
            if i == j {
                let p = k + g * (i as f64 - m as f64);
                h += p * p / (2.0 * mass);
            }
            h
        })
    }
}

/// `E_R = ℏ²π²/(2ma²)`
pub fn recoil_energy(mass: f64, spacing: f64) -> f64 {
    math::PI * math::PI / (2.0 * mass * spacing * spacing)
}

/// All bands at one Bloch momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochMomentum {
    /// lattice index `n`
    pub index: i64,
    /// `k_n = 2πn/L`
    pub lab: f64,
    /// `K_n = k_n − k_v`
    pub shifted: f64,
    /// ascending energies, one per band
    pub energies: Vec<f64>,
    /// plane-wave coefficients per band, `Σ|c|² = 1`
    pub coefficients: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlochSolution {
    problem: ContinuumProblem,
    momenta: Vec<BlochMomentum>,
}

pub fn solve_bloch(problem: &ContinuumProblem) -> Result<BlochSolution, BandError> {
    if problem.cutoff < 4 {
        return Err(BandError::BadCutoff(problem.cutoff));
    }
    let m = problem.cutoff;
    let kv = problem.rotation.wave_number();
    let mut momenta = Vec::with_capacity(problem.lattice.sites());
    for n in problem.lattice.indices() {
        let lab = problem.lattice.wave_vector(n);
        let shifted = lab - kv;
        let eig = eigh(&problem.hamiltonian(shifted)).map_err(|source| BandError::Diagonalization { n, source })?;
        let coefficients: Vec<Vec<Complex64>> = (0..2 * m + 1).map(|b| eig.vector(b)).collect();
        let weight = coefficients[0][0].norm_sqr() + coefficients[0][2 * m].norm_sqr();
        if weight > problem.cutoff_weight {
            return Err(BandError::CutoffTooSmall { n, weight });
        }
        momenta.push(BlochMomentum {
            index: n,
            lab,
            shifted,
            energies: eig.values,
            coefficients,
        });
    }
    let mut sol = BlochSolution {
        problem: problem.clone(),
        momenta,
    };
    sol.fix_phases();
    Ok(sol)
}

impl BlochSolution {
    pub fn problem(&self) -> &ContinuumProblem {
        &self.problem
    }

    pub fn momenta(&self) -> &[BlochMomentum] {
        &self.momenta
    }

    /// Lowest-band energies in lattice-index order.
    pub fn lowest_band(&self) -> Vec<f64> {
        self.momenta.iter().map(|k| k.energies[0]).collect()
    }

    /// `max − min` of the lowest band.
    pub fn bandwidth(&self) -> f64 {
        let b = self.lowest_band();
        b.iter().copied().fold(f64::NEG_INFINITY, f64::max) - b.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Smallest separation between the lowest and the next band.
    pub fn band_gap(&self) -> f64 {
        let top = self.momenta.iter().map(|k| k.energies[0]).fold(f64::NEG_INFINITY, f64::max);
        let next = self.momenta.iter().map(|k| k.energies[1]).fold(f64::INFINITY, f64::min);
        next - top
    }

    /// Rescales every state so that `Ψ(0)` is real and positive. States with
    /// `|Ψ(0)|` at round-off level are left alone.
    pub fn fix_phases(&mut self) {
        for k in &mut self.momenta {
            for c in &mut k.coefficients {
                let at0: Complex64 = c.iter().sum();
                if at0.norm() > 1e-12 {
                    let ph = at0.conj() / at0.norm();
                    c.iter_mut().for_each(|z| *z *= ph);
                }
            }
        }
    }

    /// Multiplies one state by `e^{iθ}`, e.g. to test the phase convention.
    pub fn rephase(&mut self, position: usize, band: usize, theta: f64) {
        let ph = math::cis(theta);
        self.momenta[position].coefficients[band].iter_mut().for_each(|z| *z *= ph);
    }

    /// `Ψ(x)` normalized over the ring.
    pub fn bloch_state(&self, position: usize, band: usize, x: f64) -> Complex64 {
        let k = &self.momenta[position];
        plane_wave_sum(&k.coefficients[band], k.shifted, self.problem.reciprocal(), x) / math::sqrt(self.problem.lattice.circumference())
    }

    /// `u(x) = e^{−iKx} Ψ(x)`, periodic over `a`.
    pub fn periodic_part(&self, position: usize, band: usize, x: f64) -> Complex64 {
        self.bloch_state(position, band, x) * math::cis(-self.momenta[position].shifted * x)
    }

    /// `max |Ψ(x + L) − e^{−ik_v L} Ψ(x)|` over `samples` points of one period.
    pub fn twist_residual(&self, samples: usize) -> f64 {
        let l = self.problem.lattice.circumference();
        let a = self.problem.lattice.spacing();
        let twist = math::cis(-self.problem.rotation.wave_number() * l);
        let mut worst = 0.0f64;
        for p in 0..self.momenta.len() {
            for band in 0..self.momenta[p].energies.len() {
                for s in 0..samples {
                    let x = a * s as f64 / samples as f64;
                    let d = self.bloch_state(p, band, x + l) - twist * self.bloch_state(p, band, x);
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }

    /// Largest phase-convention violation `|arg Ψ(0)|` over the lowest band.
    pub fn phase_defect(&self) -> f64 {
        self.momenta
            .iter()
            .map(|k| {
                let z: Complex64 = k.coefficients[0].iter().sum();
                math::atan2(z.im, z.re).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn plane_wave_sum(c: &[Complex64], k: f64, g: f64, x: f64) -> Complex64 {
    let m = (c.len() / 2) as f64;
    c.iter()
        .enumerate()
        .map(|(j, z)| z * math::cis((k + g * (j as f64 - m)) * x))
        .sum()
}

/// Lowest-band Wannier functions.
#[derive(Debug, Clone, PartialEq)]
pub struct WannierSet {
    problem: ContinuumProblem,
    /// `(k_n, K_n, coefficients)` of phase-fixed lowest-band states
    states: Vec<(f64, f64, Vec<Complex64>)>,
    gram_deviation: f64,
}

/// Builds `W(x) = N^{−1/2} Σ_n Ψ_n(x)` and the site functions
/// `W_s(x) = N^{−1/2} Σ_n e^{−ik_n x_s} Ψ_n(x) = e^{−ik_v x_s} W(x − x_s)`,
/// re-applying the phase convention first.
pub fn build_wannier(solution: &BlochSolution) -> Result<WannierSet, BandError> {
    let problem = &solution.problem;
    if problem.potential.is_flat() {
        return Err(BandError::FlatPotential);
    }
    let gap = solution.band_gap();
    if gap < 1e-6 * problem.recoil_energy() {
        return Err(BandError::NoBandGap { gap });
    }
    let mut fixed = solution.clone();
    fixed.fix_phases();
    for k in &fixed.momenta {
        let at0: Complex64 = k.coefficients[0].iter().sum();
        if at0.norm() <= 1e-12 {
            return Err(BandError::NodeAtOrigin { n: k.index });
        }
    }
    let states = fixed
        .momenta
        .iter()
        .map(|k| (k.lab, k.shifted, k.coefficients[0].clone()))
        .collect();
    let mut set = WannierSet {
        problem: problem.clone(),
        states,
        gram_deviation: 0.0,
    };
    let gram = set.gram(4 * (problem.cutoff + 1));
    let n = gram.dim();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - want).norm());
        }
    }
    if dev > 1e-8 {
        return Err(BandError::NotOrthonormal { deviation: dev });
    }
    set.gram_deviation = dev;
    Ok(set)
}

impl WannierSet {
    pub fn problem(&self) -> &ContinuumProblem {
        &self.problem
    }

    pub fn sites(&self) -> usize {
        self.states.len()
    }

    /// Largest `|(W_m, W_n) − δ_mn|` found at construction.
    pub fn gram_deviation(&self) -> f64 {
        self.gram_deviation
    }

    fn norm(&self) -> f64 {
        1.0 / math::sqrt(self.sites() as f64 * self.problem.lattice.circumference())
    }

    /// `W(x)` continued by the twisted boundary condition.
    pub fn w0(&self, x: f64) -> Complex64 {
        let g = self.problem.reciprocal();
        self.states
            .iter()
            .map(|(_, k, c)| plane_wave_sum(c, *k, g, x))
            .sum::<Complex64>()
            * self.norm()
    }

    /// `W` restricted to `[−L/2, L/2)`, zero outside.
    pub fn w0_truncated(&self, x: f64) -> Complex64 {
        let half = 0.5 * self.problem.lattice.circumference();
        if (-half..half).contains(&x) {
            self.w0(x)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `W_s(x)` for site `s` (lattice index).
    pub fn site_function(&self, site: i64, x: f64) -> Complex64 {
        let g = self.problem.reciprocal();
        let xs = self.problem.lattice.site_position(site);
        self.states
            .iter()
            .map(|(lab, k, c)| math::cis(-lab * xs) * plane_wave_sum(c, *k, g, x))
            .sum::<Complex64>()
            * self.norm()
    }

    /// `(H' W)(x)` with the kinetic term applied to each plane wave exactly.
    pub fn apply_hamiltonian_w0(&self, x: f64) -> Complex64 {
        let g = self.problem.reciprocal();
        let mass = self.problem.mass();
        let kinetic: Complex64 = self
            .states
            .iter()
            .map(|(_, k, c)| {
                let m = (c.len() / 2) as f64;
                c.iter()
                    .enumerate()
                    .map(|(j, z)| {
                        let p = k + g * (j as f64 - m);
                        z * math::cis(p * x) * (p * p / (2.0 * mass))
                    })
                    .sum::<Complex64>()
            })
            .sum::<Complex64>()
            * self.norm();
        kinetic + self.w0(x) * self.potential_at(x)
    }

    fn potential_at(&self, x: f64) -> f64 {
        match &self.problem.potential {
            Potential::Sinusoidal { depth } => {
                let s = math::sin(math::PI * x / self.problem.lattice.spacing());
                depth * s * s
            }
            p @ Potential::Sampled { .. } => {
                let m = 2 * self.problem.cutoff;
                let c = p.coefficients(m);
                let g = self.problem.reciprocal();
                c.iter()
                    .enumerate()
                    .map(|(j, z)| z * math::cis(g * (j as f64 - m as f64) * x))
                    .sum::<Complex64>()
                    .re
            }
        }
    }

    /// Gram matrix `(W_r, W_s)` by trapezoid quadrature on the ring with
    /// `points_per_period` nodes per lattice period.
    pub fn gram(&self, points_per_period: usize) -> DenseMatrix {
        let n = self.sites();
        let lat = &self.problem.lattice;
        let total = points_per_period * n;
        let dx = lat.circumference() / total as f64;
        let sites: Vec<i64> = lat.indices().collect();
        let samples: Vec<Vec<Complex64>> = sites
            .iter()
            .map(|&s| (0..total).map(|i| self.site_function(s, i as f64 * dx)).collect())
            .collect();
        DenseMatrix::from_fn(n, |r, s| {
            samples[r].iter().zip(&samples[s]).map(|(a, b)| a.conj() * b).sum::<Complex64>() * dx
        })
    }

    /// `Σ_s |(W_s, Ψ_k)|²` for each lowest-band Bloch state.
    pub fn sum_rule(&self, points_per_period: usize) -> Vec<f64> {
        let lat = &self.problem.lattice;
        let total = points_per_period * self.sites();
        let dx = lat.circumference() / total as f64;
        let g = self.problem.reciprocal();
        let ln = 1.0 / math::sqrt(lat.circumference());
        let xs: Vec<f64> = (0..total).map(|i| i as f64 * dx).collect();
        let w: Vec<Vec<Complex64>> = lat
            .indices()
            .map(|s| xs.iter().map(|&x| self.site_function(s, x)).collect())
            .collect();
        self.states
            .iter()
            .map(|(_, k, c)| {
                let psi: Vec<Complex64> = xs.iter().map(|&x| plane_wave_sum(c, *k, g, x) * ln).collect();
                w.iter()
                    .map(|ws| (ws.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum::<Complex64>() * dx).norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Fraction of `∫|W|²` inside `[−a/2, a/2)`.
    pub fn central_fraction(&self, points_per_period: usize) -> f64 {
        let a = self.problem.lattice.spacing();
        let l = self.problem.lattice.circumference();
        let total = points_per_period * self.sites();
        let dx = l / total as f64;
        let (mut inside, mut all) = (0.0, 0.0);
        for i in 0..total {
            let x = -0.5 * l + i as f64 * dx;
            let p = self.w0(x).norm_sqr();
            all += p;
            if x >= -0.5 * a && x < 0.5 * a {
                inside += p;
            }
        }
        inside / all
    }

    /// Largest distance between a site and the maximum of `|W_s|`, in units
    /// of `a`, over all sites.
    pub fn localization_offset(&self, points_per_period: usize) -> f64 {
        let lat = &self.problem.lattice;
        let l = lat.circumference();
        let total = points_per_period * self.sites();
        let dx = l / total as f64;
        lat.indices()
            .map(|s| {
                let xs = lat.site_position(s);
                let best = (0..total)
                    .map(|i| xs - 0.5 * l + i as f64 * dx)
                    .max_by(|a, b| self.site_function(s, *a).norm().total_cmp(&self.site_function(s, *b).norm()))
                    .unwrap_or(xs);
                (best - xs).abs() / lat.spacing()
            })
            .fold(0.0, f64::max)
    }
}

/// Tunneling element extracted from Wannier functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tunneling {
    /// `J e^{iθ} = −2 ∫ W*(x − a) (H' W)(x) dx` over one ring period
    pub complex: Complex64,
    pub magnitude: f64,
    pub phase: f64,
    /// `|J|` of the same lattice at rest
    pub stationary_magnitude: f64,
    /// `|J|/|J(φ = 0)| − 1`
    pub magnitude_shift: f64,
    /// the same integral with `W` cut to `[−L/2, L/2)`
    pub truncated: Complex64,
    /// harmonic-well estimate `ω e^{−mωa²}` with `ω` from the curvature at the well bottom
    pub harmonic: f64,
    /// quadrature nodes per lattice period at convergence
    pub points_per_period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Integrals {
    full: Complex64,
    truncated: Complex64,
}

fn tunneling_integrals(w: &WannierSet, points_per_period: usize) -> Integrals {
    let lat = &w.problem.lattice;
    let (a, l) = (lat.spacing(), lat.circumference());
    let total = points_per_period * w.sites();
    let dx = l / total as f64;
    let (mut full, mut truncated) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for i in 0..total {
        let x = -0.5 * l + i as f64 * dx;
        let hw = w.apply_hamiltonian_w0(x);
        let term = w.w0(x - a).conj() * hw;
        full += term;
        // the truncated copy shifted by a only overlaps on [a − L/2, L/2)
        if x >= a - 0.5 * l {
            truncated += term;
        }
    }
    Integrals {
        full: full * (-2.0 * dx),
        truncated: truncated * (-2.0 * dx),
    }
}

/// Evaluates `J e^{iθ}` by trapezoid quadrature, doubling the node count
/// until successive values agree to `1e−12` relative.
pub fn tunneling_element(wannier: &WannierSet) -> Result<Tunneling, BandError> {
    let (integrals, points) = converged_integrals(wannier)?;
    let problem = &wannier.problem;
    let stationary_magnitude = if problem.rotation.wave_number() == 0.0 {
        integrals.full.norm()
    } else {
        let rest = build_wannier(&solve_bloch(&problem.stationary())?)?;
        converged_integrals(&rest)?.0.full.norm()
    };
    let magnitude = integrals.full.norm();
    Ok(Tunneling {
        complex: integrals.full,
        magnitude,
        phase: math::atan2(integrals.full.im, integrals.full.re),
        stationary_magnitude,
        magnitude_shift: magnitude / stationary_magnitude - 1.0,
        truncated: integrals.truncated,
        harmonic: harmonic_surrogate(problem)?,
        points_per_period: points,
    })
}

fn converged_integrals(w: &WannierSet) -> Result<(Integrals, usize), BandError> {
    let mut points = 4 * (w.problem.cutoff + 1);
    let mut prev = tunneling_integrals(w, points);
    let mut change = f64::INFINITY;
    for _ in 0..4 {
        points *= 2;
        let next = tunneling_integrals(w, points);
        change = (next.full - prev.full).norm() / next.full.norm().max(f64::MIN_POSITIVE);
        prev = next;
        if change < 1e-12 {
            return Ok((prev, points));
        }
    }
    Err(BandError::QuadratureNotConverged { change })
}

/// `ω·exp(−mωa²/ℏ)`
pub fn harmonic_tunneling(trap_frequency: f64, mass: f64, spacing: f64) -> Result<f64, BandError> {
    if !(trap_frequency.is_finite() && trap_frequency > 0.0) {
        return Err(BandError::BadTrapFrequency(trap_frequency));
    }
    Ok(trap_frequency * math::exp(-mass * trap_frequency * spacing * spacing))
}

/// Harmonic estimate for the lattice of `problem`, with the trap frequency
/// from the curvature of `V` at its minimum.
fn harmonic_surrogate(problem: &ContinuumProblem) -> Result<f64, BandError> {
    let a = problem.lattice.spacing();
    let m = problem.mass();
    let curvature = match &problem.potential {
        // V₀ sin²(πx/a) ≈ V₀ (π/a)² x²
        Potential::Sinusoidal { depth } => 2.0 * depth * (math::PI / a) * (math::PI / a),
        p @ Potential::Sampled { values } => {
            let c = p.coefficients(values.len() / 2);
            let mid = (c.len() / 2) as i64;
            let g = math::TAU / a;
            let v = |x: f64| -> f64 {
                c.iter()
                    .enumerate()
                    .map(|(j, z)| z * math::cis(g * (j as i64 - mid) as f64 * x))
                    .sum::<Complex64>()
                    .re
            };
            let v2 = |x: f64| -> f64 {
                c.iter()
                    .enumerate()
                    .map(|(j, z)| {
                        let k = g * (j as i64 - mid) as f64;
                        -(z * math::cis(k * x)).re * k * k
                    })
                    .sum()
            };
            let steps = 4 * values.len().max(64);
            let xmin = (0..steps)
                .map(|i| a * i as f64 / steps as f64)
                .min_by(|x, y| v(*x).total_cmp(&v(*y)))
                .unwrap_or(0.0);
            v2(xmin)
        }
    };
    if !(curvature > 0.0) {
        return Err(BandError::FlatPotential);
    }
    harmonic_tunneling(math::sqrt(curvature / m), m, a)
}
