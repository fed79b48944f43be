//! Delay law of a user's queue.
//!
//! The queueing delay `W(q)` has Laplace transform `P0 + P1 + P2`:
//! an atom `1-ρ` at zero, a closed-form staircase density
//! `p1(t) = λ(1-ρ)(1-f)^⌊t/τ⌋`, and a remainder `p2` recovered numerically
//! from samples of `P2` on the imaginary axis.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::qos::QueueState;

/// Default grid size for the numeric inversion.
pub const DEFAULT_SAMPLES: usize = 1 << 17;
/// Default horizon as a multiple of the delay bound.
pub const DEFAULT_HORIZON_FACTOR: f64 = 100.0;
/// Allowed deviation of the reconstructed total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
}

/// Mean and standard deviation of the service time `S = Nτ`, `N ~ Geom(f)`.
pub fn service_moments(q: &QueueState) -> Moments {
    let f = q.success;
    Moments {
        mean: q.tau / f,
        std: q.tau / f * (1.0 - f).sqrt(),
    }
}

/// Mean and standard deviation of the time spent waiting before service.
pub fn queue_moments(q: &QueueState) -> Result<Moments> {
    q.require_stable()?;
    let (f, x) = (q.success, q.load());
    let s = q.tau / f;
    let mean = s * (1.0 - f / 2.0) * x / (1.0 - x);
    // the usual closed form multiplied through by (1-f) so that f = 1 is finite
    let bracket = (1.0 - f) * (1.0 / ((1.0 - x) * (1.0 - x)) - 1.0)
        + f * f * x * (4.0 - x) / (12.0 * (1.0 - x) * (1.0 - x));
    Ok(Moments {
        mean,
        std: s * bracket.max(0.0).sqrt(),
    })
}

/// Queueing-to-service ratios of mean (`ν`) and standard deviation (`χ`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuChi {
    pub d: f64,
    /// `λτ/f` at the equilibrium.
    pub load: f64,
    pub nu: f64,
    pub chi: f64,
}

/// `λτ/f` at the Pareto-dominant equilibrium as a function of `d = Dλ`.
pub fn equilibrium_load(d: f64, success: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(domain("d = Dλ must be positive and finite"));
    }
    if !(success > 0.0 && success < 1.0) {
        return Err(domain("success probability must lie in (0, 1)"));
    }
    let u = 1.0 / d;
    Ok(2.0 / (1.0 + u + (1.0 + 2.0 * (1.0 - success) * u + u * u).sqrt()))
}

/// `ν` and `χ` at the equilibrium; they depend on `D` and `λ` only through
/// their product.
pub fn nu_chi(d: f64, success: f64) -> Result<NuChi> {
    let x = equilibrium_load(d, success)?;
    let f = success;
    let nu = (1.0 - f / 2.0) * x / (1.0 - x);
    let chi2 = 1.0 / ((1.0 - x) * (1.0 - x))
        + f * f * x * (4.0 - x) / (12.0 * (1.0 - f) * (1.0 - x) * (1.0 - x))
        - 1.0;
    Ok(NuChi {
        d,
        load: x,
        nu,
        chi: chi2.sqrt(),
    })
}

/// `e^z - 1` without cancellation near zero.
fn exp_m1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let h = (b / 2.0).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * h * h, a.exp() * b.sin())
}

/// Laplace transform of the service time.
pub fn service_transform(q: &QueueState, s: Complex64) -> Complex64 {
    q.success / (exp_m1(s * q.tau) + q.success)
}

/// Laplace transform of the queueing delay.
pub fn queue_transform(q: &QueueState, s: Complex64) -> Complex64 {
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    let e = exp_m1(s * q.tau);
    let g = e + q.success;
    (1.0 - q.load()) * s * g / (s * g - q.arrival_rate * e)
}

/// Transform of the atom at zero.
pub fn p0_transform(q: &QueueState) -> f64 {
    1.0 - q.load()
}

/// Transform of the staircase term; tends to `ρ(1-ρ)` at `s = 0`.
pub fn p1_transform(q: &QueueState, s: Complex64) -> Complex64 {
    let rho = q.load();
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(rho * (1.0 - rho), 0.0);
    }
    let e = exp_m1(s * q.tau);
    (1.0 - rho) * q.arrival_rate * e / (s * (e + q.success))
}

/// Transform of the remainder; tends to `ρ²` at `s = 0`.
pub fn p2_transform(q: &QueueState, s: Complex64) -> Complex64 {
    let rho = q.load();
    if s == Complex64::new(0.0, 0.0) {
        return Complex64::new(rho * rho, 0.0);
    }
    let lambda = q.arrival_rate;
    let e = exp_m1(s * q.tau);
    let g = e + q.success;
    (1.0 - rho) * lambda * lambda * e * e / (s * (s * g - lambda * e) * g)
}

/// Closed-form staircase density.
pub fn p1_density(q: &QueueState, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let n = (t / q.tau).floor();
    q.arrival_rate * (1.0 - q.load()) * (1.0 - q.success).powf(n)
}

/// `∫_0^c p1`, summed exactly over whole and partial steps.
pub fn p1_integral(q: &QueueState, c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    let (f, tau) = (q.success, q.tau);
    let r = 1.0 - f;
    let n = (c / tau).floor();
    let frac = c - n * tau;
    let rn = r.powf(n);
    q.arrival_rate * (1.0 - q.load()) * (tau * (1.0 - rn) / f + frac * rn)
}

/// Samples a real function's Laplace transform at `s = iω_k`,
/// `ω_k = 2πk/t_max`, and returns the Fourier-series reconstruction on
/// `t_n = n·t_max/N`.
pub fn invert_on_grid<F>(transform: F, t_max: f64, n: usize) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Complex64,
{
    if !n.is_power_of_two() || n < 4 {
        return Err(domain(format!(
            "sample count must be a power of two >= 4, got {n}"
        )));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(domain("horizon must be positive"));
    }
    let half = n / 2;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for (k, s) in spec.iter_mut().enumerate().take(half + 1) {
        let w = 2.0 * std::f64::consts::PI * k as f64 / t_max;
        *s = transform(Complex64::new(0.0, w));
    }
    // real signal: negative frequencies are conjugates, Nyquist is real
    spec[0].im = 0.0;
    spec[half].im = 0.0;
    for k in 1..half {
        spec[n - k] = spec[k].conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    Ok(spec.iter().map(|z| z.re / t_max).collect())
}

/// Queueing-delay law on `[0, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayDistribution {
    pub point: QueueState,
    pub atom_at_zero: f64,
    pub t_max: f64,
    pub step: f64,
    pub density_p1: Vec<f64>,
    pub density_p2: Vec<f64>,
    /// `∫_0^{t_n} p2`, trapezoidal.
    pub p2_cumulative: Vec<f64>,
    /// Atom plus both integrals at every grid point.
    pub cdf: Vec<f64>,
    pub mass: f64,
}

/// Remainder density sampled on the grid, clipped at zero.
pub fn p2_density(q: &QueueState, t_max: f64, n: usize) -> Result<Vec<f64>> {
    q.require_stable()?;
    let mut p = invert_on_grid(|s| p2_transform(q, s), t_max, n)?;
    for v in &mut p {
        *v = v.max(0.0);
    }
    Ok(p)
}

pub fn queue_delay_cdf(q: &QueueState, t_max: f64, n: usize) -> Result<DelayDistribution> {
    let p2 = p2_density(q, t_max, n)?;
    let step = t_max / n as f64;
    let atom = p0_transform(q);
    let mut cum = Vec::with_capacity(n);
    let mut acc = 0.0;
    cum.push(0.0);
    for w in p2.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * step;
        cum.push(acc);
    }
    let times = (0..n).map(|i| i as f64 * step);
    let p1: Vec<f64> = times.clone().map(|t| p1_density(q, t)).collect();
    let cdf: Vec<f64> = times
        .zip(&cum)
        .map(|(t, c)| (atom + p1_integral(q, t) + c).min(1.0))
        .collect();
    let mass = atom + p1_integral(q, (n - 1) as f64 * step) + acc;
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::Resolution { mass });
    }
    Ok(DelayDistribution {
        point: *q,
        atom_at_zero: atom,
        t_max,
        step,
        density_p1: p1,
        density_p2: p2,
        p2_cumulative: cum,
        cdf,
        mass,
    })
}

/// Default horizon `100·D` and `2^17` samples.
pub fn queue_delay_cdf_default(q: &QueueState, delay_bound: f64) -> Result<DelayDistribution> {
    queue_delay_cdf(q, DEFAULT_HORIZON_FACTOR * delay_bound, DEFAULT_SAMPLES)
}

impl DelayDistribution {
    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    /// Continuous part of the density at grid point `i`.
    pub fn pdf(&self, i: usize) -> f64 {
        self.density_p1[i] + self.density_p2[i]
    }

    /// `Pr{W(q) <= c}`, with `p1` integrated exactly and `p2` interpolated.
    pub fn cdf_at(&self, c: f64) -> f64 {
        if c < 0.0 {
            return 0.0;
        }
        let last = self.p2_cumulative.len() - 1;
        let x = c / self.step;
        let p2 = if x >= last as f64 {
            self.p2_cumulative[last]
        } else {
            let i = x.floor() as usize;
            let w = x - i as f64;
            self.p2_cumulative[i] * (1.0 - w) + self.p2_cumulative[i + 1] * w
        };
        (self.atom_at_zero + p1_integral(&self.point, c) + p2).min(1.0)
    }

    /// Total delay `W = W(q) + S`: convolution with the service law.
    pub fn total_delay_cdf(&self, c: f64) -> f64 {
        let (f, tau) = (self.point.success, self.point.tau);
        let mut weight = f;
        let mut sum = 0.0;
        let mut m = 1.0;
        while c - m * tau >= 0.0 && weight > 1e-17 {
            sum += weight * self.cdf_at(c - m * tau);
            weight *= 1.0 - f;
            m += 1.0;
        }
        sum
    }

    /// Mean and standard deviation of the reconstructed law.
    pub fn moments(&self) -> Moments {
        let q = &self.point;
        let (f, tau) = (q.success, q.tau);
        let r = 1.0 - f;
        let c = q.arrival_rate * (1.0 - q.load());
        // Σ rⁿ, Σ n rⁿ, Σ n² rⁿ
        let (s0, s1, s2) = (1.0 / f, r / (f * f), r * (1.0 + r) / (f * f * f));
        let m1_p1 = c * tau * tau / 2.0 * (2.0 * s1 + s0);
        let m2_p1 = c * tau.powi(3) / 3.0 * (3.0 * s2 + 3.0 * s1 + s0);
        let (mut m1, mut m2) = (0.0, 0.0);
        let last = self.density_p2.len() - 1;
        for (i, &p) in self.density_p2.iter().enumerate() {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            let t = self.time(i);
            m1 += w * t * p;
            m2 += w * t * t * p;
        }
        m1 = m1 * self.step + m1_p1;
        m2 = m2 * self.step + m2_p1;
        Moments {
            mean: m1,
            std: (m2 - m1 * m1).max(0.0).sqrt(),
        }
    }
}
