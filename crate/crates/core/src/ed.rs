//! Exact diagonalization of two atoms in the site basis.
//!
//! Used as an oracle for the sector solvers. The Hamiltonian is built from
//! its second-quantized action on Fock states, block-diagonalized with the
//! two-particle translation `T` (`T b†_n T† = b†_{n+1}`), and each block is
//! diagonalized densely. A state of total momentum `P` obeys
//! `T|ψ⟩ = e^{−iP}|ψ⟩`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::lattice::TotalMomentum;
use crate::linalg::{eigh, DenseMatrix, LinalgError};
use crate::math;
use crate::one::hopping_matrix_with_links;

/// Largest ring the dense oracle accepts.
pub const MAX_SITES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EdError {
    #[error("{0} sites exceeds the dense oracle cap of {MAX_SITES}")]
    TooLarge(usize),
    #[error("need at least 2 sites, got {0}")]
    TooSmall(usize),
    #[error("parameter is not finite")]
    NonFinite,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Two identical bosons (`n₁ ≤ n₂`) or two distinguishable atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Bosons,
    Distinguishable,
}

/// Fock basis of two atoms on `sites` sites.
#[derive(Debug, Clone)]
pub struct PairBasis {
    sites: usize,
    statistics: Statistics,
    states: Vec<(usize, usize)>,
    lookup: Vec<usize>,
}

impl PairBasis {
    pub fn new(sites: usize, statistics: Statistics) -> Self {
        let mut states = Vec::new();
        let mut lookup = vec![usize::MAX; sites * sites];
        for a in 0..sites {
            let start = if statistics == Statistics::Bosons { a } else { 0 };
            for b in start..sites {
                lookup[a * sites + b] = states.len();
                states.push((a, b));
            }
        }
        Self {
            sites,
            statistics,
            states,
            lookup,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        let (a, b) = match self.statistics {
            Statistics::Bosons if a > b => (b, a),
            _ => (a, b),
        };
        self.lookup[a * self.sites + b]
    }

    fn translate(&self, i: usize, by: usize) -> usize {
        let (a, b) = self.states[i];
        self.index((a + by) % self.sites, (b + by) % self.sites)
    }

    /// `H|i⟩` as `(index, amplitude)` terms; duplicates are possible.
    fn act(&self, h1: &DenseMatrix, h2: &DenseMatrix, onsite: f64, i: usize, out: &mut Vec<(usize, Complex64)>) {
        out.clear();
        let (a, b) = self.states[i];
        let n = self.sites;
        match self.statistics {
            Statistics::Distinguishable => {
                for m in 0..n {
                    if h1[(m, a)] != Complex64::new(0.0, 0.0) {
                        out.push((self.index(m, b), h1[(m, a)]));
                    }
                    if h2[(m, b)] != Complex64::new(0.0, 0.0) {
                        out.push((self.index(a, m), h2[(m, b)]));
                    }
                }
                if a == b {
                    out.push((i, Complex64::new(onsite, 0.0)));
                }
            }
            Statistics::Bosons => {
                // Σ h_mn b†_m b_n on normalized |a b⟩ via occupation factors
                let occ = |s: usize, x: usize, y: usize| (x == s) as usize + (y == s) as usize;
                let movers: &[usize] = if a == b { &[a] } else { &[a, b] };
                for &from in movers {
                    let nf = occ(from, a, b) as f64;
                    let rest = if from == a { b } else { a };
                    for m in 0..n {
                        let h = h1[(m, from)];
                        if h == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        // remove one atom at `from`, add one at `m`
                        let nm = occ(m, rest, usize::MAX) as f64;
                        out.push((self.index(m, rest), h * math::sqrt(nf * (nm + 1.0))));
                    }
                }
                if a == b {
                    out.push((i, Complex64::new(onsite * 2.0, 0.0)));
                }
            }
        }
    }
}

/// Dense Hamiltonian on the whole pair space. For bosons the on-site term
/// is `(U/2) n(n−1)`; for distinguishable atoms it is `U·n₁n₂`.
pub fn pair_hamiltonian(basis: &PairBasis, h1: &DenseMatrix, h2: &DenseMatrix, onsite: f64) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(basis.dim());
    let mut terms = Vec::new();
    for i in 0..basis.dim() {
        basis.act(h1, h2, onsite, i, &mut terms);
        for &(j, v) in &terms {
            h[(j, i)] += v;
        }
    }
    h
}

/// Eigenpairs of one total-momentum block, vectors in the Fock basis.
#[derive(Debug, Clone)]
pub struct EdSector {
    pub total: TotalMomentum,
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone)]
pub struct EdSpectrum {
    pub basis: PairBasis,
    pub sectors: Vec<EdSector>,
}

impl EdSpectrum {
    /// All eigenvalues, ascending.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.sectors.iter().flat_map(|s| s.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn sector(&self, steps: i64) -> &EdSector {
        let n = self.basis.sites as i64;
        &self.sectors[steps.rem_euclid(n) as usize]
    }
}

struct Orbits {
    /// representative index of every basis state
    rep_of: Vec<usize>,
    /// shift `s` with `state = T^s rep`
    shift_of: Vec<usize>,
    reps: Vec<usize>,
    length: Vec<usize>,
}

fn orbits(basis: &PairBasis) -> Orbits {
    let d = basis.dim();
    let mut rep_of = vec![usize::MAX; d];
    let mut shift_of = vec![0; d];
    let mut reps = Vec::new();
    let mut length = Vec::new();
    for i in 0..d {
        if rep_of[i] != usize::MAX {
            continue;
        }
        let mut j = i;
        let mut s = 0;
        loop {
            rep_of[j] = i;
            shift_of[j] = s;
            s += 1;
            j = basis.translate(j, 1);
            if j == i {
                break;
            }
        }
        reps.push(i);
        length.push(s);
    }
    Orbits {
        rep_of,
        shift_of,
        reps,
        length,
    }
}

fn check(sites: usize, values: &[f64]) -> Result<(), EdError> {
    if sites < 2 {
        return Err(EdError::TooSmall(sites));
    }
    if sites > MAX_SITES {
        return Err(EdError::TooLarge(sites));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EdError::NonFinite);
    }
    Ok(())
}

/// Momentum-resolved spectrum for arbitrary single-particle matrices that
/// commute with translation.
pub fn momentum_resolved(basis: PairBasis, h1: &DenseMatrix, h2: &DenseMatrix, onsite: f64) -> Result<EdSpectrum, EdError> {
    let n = basis.sites;
    let orb = orbits(&basis);
    let mut terms = Vec::new();
    let mut sectors = Vec::with_capacity(n);
    let input_scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| h1[(i, j)].norm() + h2[(i, j)].norm())
        .fold(2.0 * onsite.abs(), f64::max)
        .max(f64::MIN_POSITIVE);
    for k in 0..n as i64 {
        let total = TotalMomentum::new(k, n);
        let p = total.value();
        // allowed orbits: e^{iPL} = 1, i.e. k·L divisible by N
        let allowed: Vec<usize> = (0..orb.reps.len())
            .filter(|&r| (k as usize * orb.length[r]).is_multiple_of(n))
            .collect();
        let mut slot = vec![usize::MAX; orb.reps.len()];
        for (s, &r) in allowed.iter().enumerate() {
            slot[r] = s;
        }
        let rep_slot = |state: usize| {
            let rep = orb.rep_of[state];
            let r = orb.reps.binary_search(&rep).expect("representative");
            slot[r]
        };
        let dim = allowed.len();
        let mut block = DenseMatrix::zeros(dim);
        for (col, &r) in allowed.iter().enumerate() {
            basis.act(h1, h2, onsite, orb.reps[r], &mut terms);
            for &(c, v) in &terms {
                let row = rep_slot(c);
                if row == usize::MAX {
                    continue;
                }
                let la = orb.length[allowed[row]] as f64;
                let lr = orb.length[r] as f64;
                let phase = math::cis(-p * orb.shift_of[c] as f64);
                block[(row, col)] += v * phase * math::sqrt(lr / la);
            }
        }
        // entries are sums of phased terms; judge round-off against the inputs
        let defect = block.hermiticity_defect();
        if defect > 1e-12 * input_scale {
            return Err(LinalgError::NotHermitian(defect).into());
        }
        let block = DenseMatrix::from_fn(dim, |i, j| 0.5 * (block[(i, j)] + block[(j, i)].conj()));
        let eig = eigh(&block)?;
        let vectors = (0..dim)
            .map(|e| {
                let mut full = vec![Complex64::new(0.0, 0.0); basis.dim()];
                for (s, &r) in allowed.iter().enumerate() {
                    let coeff = eig.vectors[(s, e)] / math::sqrt(orb.length[r] as f64);
                    let mut j = orb.reps[r];
                    for step in 0..orb.length[r] {
                        full[j] += coeff * math::cis(p * step as f64);
                        j = basis.translate(j, 1);
                    }
                }
                full
            })
            .collect();
        sectors.push(EdSector {
            total,
            values: eig.values,
            vectors,
        });
    }
    Ok(EdSpectrum { basis, sectors })
}

/// Two identical bosons with `H = −(J/2)Σ(e^{iφ} b†_{n+1}b_n + h.c.) + (U/2)Σ n(n−1)`.
pub fn ed_oracle(sites: usize, phase: f64, tunneling: f64, interaction: f64) -> Result<EdSpectrum, EdError> {
    check(sites, &[phase, tunneling, interaction])?;
    let h = hopping_matrix_with_links(sites, tunneling, phase, &vec![0.0; sites]);
    momentum_resolved(PairBasis::new(sites, Statistics::Bosons), &h, &h, 0.5 * interaction)
}

/// Two distinguishable atoms with on-site interaction `(U₁₂/2)·n₁n₂`.
pub fn ed_hetero_oracle(
    sites: usize,
    tunnelings: (f64, f64),
    phases: (f64, f64),
    interaction: f64,
) -> Result<EdSpectrum, EdError> {
    check(sites, &[tunnelings.0, tunnelings.1, phases.0, phases.1, interaction])?;
    let zero = vec![0.0; sites];
    let h1 = hopping_matrix_with_links(sites, tunnelings.0, phases.0, &zero);
    let h2 = hopping_matrix_with_links(sites, tunnelings.1, phases.1, &zero);
    momentum_resolved(PairBasis::new(sites, Statistics::Distinguishable), &h1, &h2, 0.5 * interaction)
}

/// Spectrum of the whole boson pair space by one dense diagonalization,
/// with arbitrary link phases (no translation symmetry assumed).
pub fn ed_full_spectrum(sites: usize, tunneling: f64, phase: f64, link_phases: &[f64], interaction: f64) -> Result<Vec<f64>, EdError> {
    check(sites, &[phase, tunneling, interaction])?;
    let h = hopping_matrix_with_links(sites, tunneling, phase, link_phases);
    let basis = PairBasis::new(sites, Statistics::Bosons);
    Ok(eigh(&pair_hamiltonian(&basis, &h, &h, 0.5 * interaction))?.values)
}
