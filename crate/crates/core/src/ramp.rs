//! Time-dependent rotation phase `φ(t)` and its integrals.

use alloc::vec::Vec;

use crate::math;
use crate::quad::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum RampError {
    #[error("ramp duration must be finite and non-negative, got {0}")]
    BadDuration(f64),
    #[error("integrator step must be finite and positive, got {0}")]
    BadStep(f64),
    #[error("piecewise profile needs strictly increasing times starting at 0")]
    BadKnots,
    #[error("profile parameter is not finite")]
    NonFinite,
}

/// Shape of `φ(t)`. Ramps reach their end value at `ramp_time` and hold it.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseProfile {
    Constant(f64),
    Linear { start: f64, end: f64, ramp_time: f64 },
    /// `start + (end − start)·(1 − cos(πt/ramp_time))/2`, smooth at both ends.
    Cosine { start: f64, end: f64, ramp_time: f64 },
    /// Linear interpolation between `(t, φ)` knots, constant after the last.
    Piecewise(Vec<(f64, f64)>),
}

impl PhaseProfile {
    pub fn phase(&self, t: f64) -> f64 {
        match *self {
            PhaseProfile::Constant(p) => p,
            PhaseProfile::Linear { start, end, ramp_time } => {
                if ramp_time <= 0.0 || t >= ramp_time {
                    end
                } else if t <= 0.0 {
                    start
                } else {
                    start + (end - start) * t / ramp_time
                }
            }
            PhaseProfile::Cosine { start, end, ramp_time } => {
                if ramp_time <= 0.0 || t >= ramp_time {
                    end
                } else if t <= 0.0 {
                    start
                } else {
                    start + (end - start) * 0.5 * (1.0 - math::cos(math::PI * t / ramp_time))
                }
            }
            PhaseProfile::Piecewise(ref knots) => {
                let (t0, p0) = knots[0];
                if t <= t0 {
                    return p0;
                }
                for w in knots.windows(2) {
                    let ((ta, pa), (tb, pb)) = (w[0], w[1]);
                    if t <= tb {
                        return pa + (pb - pa) * (t - ta) / (tb - ta);
                    }
                }
                knots[knots.len() - 1].1
            }
        }
    }

    /// `dφ/dt` (right derivative at kinks).
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            PhaseProfile::Constant(_) => 0.0,
            PhaseProfile::Linear { start, end, ramp_time } => {
                if ramp_time > 0.0 && (0.0..ramp_time).contains(&t) {
                    (end - start) / ramp_time
                } else {
                    0.0
                }
            }
            PhaseProfile::Cosine { start, end, ramp_time } => {
                if ramp_time > 0.0 && (0.0..ramp_time).contains(&t) {
                    (end - start) * 0.5 * math::PI / ramp_time * math::sin(math::PI * t / ramp_time)
                } else {
                    0.0
                }
            }
            PhaseProfile::Piecewise(ref knots) => {
                for w in knots.windows(2) {
                    let ((ta, pa), (tb, pb)) = (w[0], w[1]);
                    if t >= ta && t < tb {
                        return (pb - pa) / (tb - ta);
                    }
                }
                0.0
            }
        }
    }

    /// Largest `|dφ/dt|` on `[0, ∞)`. Instantaneous steps report infinity.
    pub fn max_rate(&self) -> f64 {
        match *self {
            PhaseProfile::Constant(_) => 0.0,
            PhaseProfile::Linear { start, end, ramp_time } => {
                if start == end {
                    0.0
                } else if ramp_time <= 0.0 {
                    f64::INFINITY
                } else {
                    (end - start).abs() / ramp_time
                }
            }
            PhaseProfile::Cosine { start, end, ramp_time } => {
                if start == end {
                    0.0
                } else if ramp_time <= 0.0 {
                    f64::INFINITY
                } else {
                    0.5 * math::PI * (end - start).abs() / ramp_time
                }
            }
            PhaseProfile::Piecewise(ref knots) => knots
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Times where `φ` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            PhaseProfile::Constant(_) => Vec::new(),
            PhaseProfile::Linear { ramp_time, .. } | PhaseProfile::Cosine { ramp_time, .. } => {
                if ramp_time > 0.0 {
                    alloc::vec![0.0, ramp_time]
                } else {
                    alloc::vec![0.0]
                }
            }
            PhaseProfile::Piecewise(ref knots) => knots.iter().map(|k| k.0).collect(),
        }
    }

    fn validate(&self) -> Result<(), RampError> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        let ok = match self {
            PhaseProfile::Constant(p) => finite(&[*p]),
            PhaseProfile::Linear { start, end, ramp_time } | PhaseProfile::Cosine { start, end, ramp_time } => {
                finite(&[*start, *end, *ramp_time])
            }
            PhaseProfile::Piecewise(knots) => {
                if knots.is_empty() || knots[0].0 != 0.0 || knots.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(RampError::BadKnots);
                }
                knots.iter().all(|k| k.0.is_finite() && k.1.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(RampError::NonFinite)
        }
    }
}

/// A phase profile run for `duration` with integrator step `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct RampSchedule {
    profile: PhaseProfile,
    duration: f64,
    step: f64,
}

impl RampSchedule {
    pub fn new(profile: PhaseProfile, duration: f64, step: f64) -> Result<Self, RampError> {
        profile.validate()?;
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(RampError::BadDuration(duration));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(RampError::BadStep(step));
        }
        Ok(Self { profile, duration, step })
    }

    pub fn profile(&self) -> &PhaseProfile {
        &self.profile
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn phase(&self, t: f64) -> f64 {
        self.profile.phase(t)
    }

    pub fn max_rate(&self) -> f64 {
        self.profile.max_rate()
    }

    /// Number of fixed steps covering `[0, duration]`; the last may be short.
    pub fn steps(&self) -> usize {
        let n = math::round(self.duration / self.step);
        let n = if n * self.step < self.duration * (1.0 - 1e-12) { n + 1.0 } else { n };
        n.max(if self.duration > 0.0 { 1.0 } else { 0.0 }) as usize
    }

    /// Step boundaries `t_0 = 0 < … < t_n = duration`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.steps();
        (0..=n)
            .map(|k| if k == n { self.duration } else { k as f64 * self.step })
            .collect()
    }
}

/// `(∫cos φ dt, ∫sin φ dt)` over `[t0, t1]`, split at profile breakpoints so
/// each piece is smooth.
pub fn trig_integrals(profile: &PhaseProfile, rule: &GaussLegendre, t0: f64, t1: f64) -> (f64, f64) {
    let mut cuts: Vec<f64> = alloc::vec![t0];
    cuts.extend(profile.breakpoints().into_iter().filter(|&b| b > t0 && b < t1));
    cuts.push(t1);
    let mut c = 0.0;
    let mut s = 0.0;
    for w in cuts.windows(2) {
        if let PhaseProfile::Constant(p) = *profile {
            c += math::cos(p) * (w[1] - w[0]);
            s += math::sin(p) * (w[1] - w[0]);
            continue;
        }
        c += rule.integrate(w[0], w[1], |t| math::cos(profile.phase(t)));
        s += rule.integrate(w[0], w[1], |t| math::sin(profile.phase(t)));
    }
    (c, s)
}
