//! One-dimensional quadrature: Gauss–Legendre rules and adaptive
//! Gauss–Kronrod (7/15) integration.

use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("adaptive quadrature did not reach tolerance {tol:e} (estimated error {error:e})")]
    NoConvergence { tol: f64, error: f64 },
    #[error("integrand is not finite")]
    NonFinite,
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = math::cos(math::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d.is_finite() {
                dp = d;
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f(x) dx`
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// Adaptive `∫_a^b f` to absolute tolerance `tol`, bisecting the interval
/// with the largest error estimate.
pub fn integrate_adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = kronrod(&mut f, a, b);
    let mut pieces: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let error: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() || !error.is_finite() {
            return Err(QuadError::NonFinite);
        }
        if error <= tol {
            return Ok(total);
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(QuadError::NoConvergence { tol, error });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        let (v1, e1) = kronrod(&mut f, lo, m);
        let (v2, e2) = kronrod(&mut f, m, hi);
        pieces.push((lo, m, v1, e1));
        pieces.push((m, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1, 2, 5, 12, 40] {
            let rule = GaussLegendre::new(n);
            assert_eq!(rule.len(), n);
            for p in 0..(2 * n) {
                let got = rule.integrate(-1.0, 2.0, |x| x.powi(p as i32));
                let want = (2f64.powi(p as i32 + 1) - (-1f64).powi(p as i32 + 1)) / (p as f64 + 1.0);
                assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫ 1/(x² + ε²) over [-1, 1] = (2/ε) atan(1/ε)
        let eps = 1e-3;
        let got = integrate_adaptive(|x| 1.0 / (x * x + eps * eps), -1.0, 1.0, 1e-10).unwrap();
        let want = 2.0 / eps * math::atan(1.0 / eps);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn adaptive_reports_non_finite() {
        assert_eq!(integrate_adaptive(|_| f64::NAN, 0.0, 1.0, 1e-8), Err(QuadError::NonFinite));
    }
}
