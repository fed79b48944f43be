//! Packet-success efficiency functions.
//!
//! An efficiency function `f(γ)` gives the probability that a packet sent at
//! SIR `γ` is received without error. It must satisfy `f(0) = 0`, increase
//! to 1, and be S-shaped. The energy-efficient operating point is the SIR
//! `γ*` maximising `f(γ)/γ`, the unique positive root of `γ f'(γ) = f(γ)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const BISECT_TOL: f64 = 1e-10;
const GAMMA_STAR_BRACKET: (f64, f64) = (1e-6, 64.0);
const MAX_SIR: f64 = 1e6;

/// An S-shaped packet-success function.
///
/// Implementors provide the raw curve and its slope; checked evaluation,
/// inversion and the `γ*` solve come for free. A new curve should pass
/// [`verify_sigmoid`] before it is handed to the equilibrium solvers,
/// since uniqueness of `γ*` depends on the S-shape.
pub trait SuccessCurve {
    /// `f(γ)` for `γ >= 0`, no argument checks.
    fn value(&self, gamma: f64) -> f64;

    /// `f'(γ)` for `γ >= 0`, no argument checks.
    fn slope(&self, gamma: f64) -> f64;

    /// `γ f'(γ) / f(γ)`. Override when `f` underflows near zero.
    fn elasticity(&self, gamma: f64) -> f64 {
        gamma * self.slope(gamma) / self.value(gamma)
    }

    fn eval(&self, gamma: f64) -> Result<f64> {
        check_sir(gamma)?;
        Ok(self.value(gamma))
    }

    fn derivative(&self, gamma: f64) -> Result<f64> {
        check_sir(gamma)?;
        Ok(self.slope(gamma))
    }

    /// Smallest SIR reaching success probability `eta`, by bisection.
    fn inverse(&self, eta: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::InfeasibleTarget { target: eta });
        }
        if eta == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.value(hi) <= eta {
            hi *= 2.0;
            if hi > MAX_SIR {
                return Err(Error::InfeasibleTarget { target: eta });
            }
        }
        let mut lo = 0.0;
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if self.value(mid) < eta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The SIR maximising `f(γ)/γ`.
    fn gamma_star(&self) -> Result<f64> {
        // sign(γf' - f) == sign(elasticity - 1) wherever f > 0
        let excess = |g: f64| self.elasticity(g) - 1.0;
        let (lo, mut hi) = GAMMA_STAR_BRACKET;
        if !(excess(lo) > 0.0) {
            return Err(Error::NoRoot(format!(
                "γf'(γ) - f(γ) is not positive at γ = {lo}; curve is not S-shaped"
            )));
        }
        while !(excess(hi) < 0.0) {
            hi *= 2.0;
            if hi > MAX_SIR {
                return Err(Error::NoRoot(
                    "no sign change of γf'(γ) - f(γ) below 1e6".into(),
                ));
            }
        }
        let changes = count_sign_changes(excess, lo, hi, 512);
        if changes != 1 {
            return Err(Error::NoRoot(format!(
                "expected one sign change of γf'(γ) - f(γ), found {changes}"
            )));
        }
        let (mut lo, mut hi) = (lo, hi);
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// `γ*` together with `f(γ*)`.
    fn optimum(&self) -> Result<Optimum> {
        let gamma = self.gamma_star()?;
        Ok(Optimum {
            gamma,
            success: self.value(gamma),
        })
    }
}

fn check_sir(gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("SIR must be nonnegative, got {gamma}")))
    }
}

fn count_sign_changes(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> usize {
    let (a, b) = (lo.ln(), hi.ln());
    let mut prev = g(lo) > 0.0;
    let mut changes = 0;
    for i in 1..=n {
        let x = (a + (b - a) * i as f64 / n as f64).exp();
        let cur = g(x) > 0.0;
        if cur != prev {
            changes += 1;
            prev = cur;
        }
    }
    changes
}

/// The energy-efficient operating point `(γ*, f(γ*))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub gamma: f64,
    pub success: f64,
}

impl Optimum {
    pub fn gamma_db(&self) -> f64 {
        10.0 * self.gamma.log10()
    }

    /// Peak energy efficiency `f(γ*)/γ*`.
    pub fn efficiency(&self) -> f64 {
        self.success / self.gamma
    }
}

/// `f(γ) = (1 - e^{-γ})^M`, the success probability of an `M`-bit packet
/// with independent bit errors at rate `e^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfficiencyModel {
    packet_size: u32,
}

impl EfficiencyModel {
    pub fn exponential(packet_size: u32) -> Result<Self> {
        if packet_size == 0 {
            return Err(domain("packet size must be at least 1 bit"));
        }
        Ok(Self { packet_size })
    }

    pub fn packet_size(&self) -> u32 {
        self.packet_size
    }

    /// `1 - f(γ)`, accurate when `f` is close to 1.
    pub fn failure(&self, gamma: f64) -> f64 {
        -(self.log_value(gamma)).exp_m1()
    }

    fn log_value(&self, gamma: f64) -> f64 {
        self.packet_size as f64 * (-(-gamma).exp()).ln_1p()
    }
}

impl SuccessCurve for EfficiencyModel {
    fn value(&self, gamma: f64) -> f64 {
        self.log_value(gamma).exp()
    }

    fn slope(&self, gamma: f64) -> f64 {
        let m = self.packet_size as f64;
        if self.packet_size == 1 {
            return (-gamma).exp();
        }
        if gamma == 0.0 {
            return 0.0;
        }
        (m.ln() - gamma + (m - 1.0) * (-(-gamma).exp()).ln_1p()).exp()
    }

    fn elasticity(&self, gamma: f64) -> f64 {
        // γ M e^{-γ} / (1 - e^{-γ})
        self.packet_size as f64 * gamma / gamma.exp_m1()
    }
}

/// Property suite any efficiency curve must pass before use: `f(0) = 0`,
/// values in `[0, 1]`, non-decreasing, approaching 1, and a single
/// convex-to-concave inflection.
pub fn verify_sigmoid<C: SuccessCurve + ?Sized>(curve: &C) -> Result<()> {
    if curve.value(0.0) != 0.0 {
        return Err(domain("f(0) must be 0"));
    }
    let n = 4000;
    let top = 200.0;
    let grid: Vec<f64> = (1..=n).map(|i| top * i as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&g| curve.value(g)).collect();
    if vals.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(domain("f must take values in [0, 1]"));
    }
    if vals.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("f must be non-decreasing"));
    }
    if *vals.last().unwrap() < 1.0 - 1e-9 {
        return Err(domain("f must approach 1"));
    }
    // curvature from the slope: rising then falling
    let slopes: Vec<f64> = grid.iter().map(|&g| curve.slope(g)).collect();
    let scale = slopes.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-9 * scale;
    let (mut rising, mut falling) = (false, false);
    for w in slopes.windows(2) {
        let d = w[1] - w[0];
        if d < -tol {
            falling = true;
        } else if d > tol {
            if falling {
                return Err(domain("f must have a single inflection point"));
            }
            rising = true;
        }
    }
    if !rising {
        return Err(domain("f has no convex region"));
    }
    if !falling {
        return Err(domain("f has no concave region"));
    }
    Ok(())
}
