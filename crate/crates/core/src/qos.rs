//! QoS requirements and the M/G/1-with-ARQ delay model behind them.
//!
//! A user asks for an average source rate `r` and an upper bound `D` on the
//! average total packet delay. Packets of `M` bits arrive as a Poisson
//! stream at `λ = r/M`, are sent in `τ = M/R` seconds at rate `R`, and are
//! retransmitted until received, so service time is `τ` times a geometric
//! count. Rates are bits/s, times seconds.

use serde::{Deserialize, Serialize};

use crate::efficiency::{Optimum, SuccessCurve};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosProfile {
    source_rate: f64,
    delay_bound: f64,
    packet_size: u32,
}

impl QosProfile {
    pub fn new(source_rate: f64, delay_bound: f64, packet_size: u32) -> Result<Self> {
        if !(source_rate > 0.0 && source_rate.is_finite()) {
            return Err(domain(format!(
                "source rate must be positive, got {source_rate}"
            )));
        }
        if !(delay_bound > 0.0 && delay_bound.is_finite()) {
            return Err(domain(format!(
                "delay bound must be positive, got {delay_bound}"
            )));
        }
        if packet_size == 0 {
            return Err(domain("packet size must be at least 1 bit"));
        }
        Ok(Self {
            source_rate,
            delay_bound,
            packet_size,
        })
    }

    pub fn from_kbps_ms(rate_kbps: f64, delay_ms: f64, packet_size: u32) -> Result<Self> {
        Self::new(rate_kbps * 1e3, delay_ms * 1e-3, packet_size)
    }

    pub fn source_rate(&self) -> f64 {
        self.source_rate
    }

    pub fn delay_bound(&self) -> f64 {
        self.delay_bound
    }

    pub fn packet_size(&self) -> u32 {
        self.packet_size
    }

    fn bits(&self) -> f64 {
        self.packet_size as f64
    }

    /// Packets per second, `λ = r/M`.
    pub fn arrival_rate(&self) -> f64 {
        self.source_rate / self.bits()
    }

    /// `d = Dλ`, the only combination of the QoS pair the delay ratios
    /// depend on at equilibrium.
    pub fn load_product(&self) -> f64 {
        self.delay_bound * self.arrival_rate()
    }

    pub fn transmission_time(&self, rate: f64) -> f64 {
        self.bits() / rate
    }

    /// Average total packet delay at rate `R` and success probability `f`:
    /// `τ (1 - λτ/2) / (f - λτ)`.
    pub fn mean_delay(&self, rate: f64, success: f64) -> Result<f64> {
        if !(rate > 0.0) {
            return Err(domain(format!("rate must be positive, got {rate}")));
        }
        let tau = self.transmission_time(rate);
        let lt = self.arrival_rate() * tau;
        if success <= lt {
            return Err(Error::UnstableQueue { load: lt / success });
        }
        Ok(tau * (1.0 - lt / 2.0) / (success - lt))
    }

    /// Success probability needed to meet the delay bound at rate `R`:
    /// `η = λτ + τ/D - λτ²/(2D)`.
    pub fn eta(&self, rate: f64) -> Result<f64> {
        let floor = self.bits() / self.delay_bound;
        if !(rate >= floor) {
            return Err(Error::RateBelowDelayFloor { rate, floor });
        }
        Ok(self.eta_unchecked(rate))
    }

    pub(crate) fn eta_unchecked(&self, rate: f64) -> f64 {
        let tau = self.transmission_time(rate);
        let lam = self.arrival_rate();
        let d = self.delay_bound;
        lam * tau + tau / d - lam * tau * tau / (2.0 * d)
    }

    /// Minimum SIR `γ̂ = f⁻¹(η(R))` that meets the delay bound at rate `R`.
    pub fn sir_requirement<C: SuccessCurve + ?Sized>(&self, rate: f64, curve: &C) -> Result<f64> {
        let eta = self.eta(rate)?;
        if eta >= 1.0 {
            return Err(Error::InfeasibleRate {
                rate,
                eta,
                omega_infinity: self.omega_infinity(),
            });
        }
        curve.inverse(eta)
    }

    /// The rate at which `η = 1`; the QoS pair is feasible only above it.
    pub fn omega_infinity(&self) -> f64 {
        let d = self.load_product();
        (self.bits() / self.delay_bound) * (1.0 + d + (1.0 + d * d).sqrt()) / 2.0
    }

    /// The rate at which the SIR requirement drops to `γ*`.
    pub fn omega_star(&self, optimum: &Optimum) -> f64 {
        self.rate_for_success(optimum.success)
    }

    /// The larger root of `η(R) = f`; `Ω*` when `f = f*`.
    pub fn rate_for_success(&self, success: f64) -> f64 {
        let d = self.load_product();
        let root = (1.0 + d * d + 2.0 * (1.0 - success) * d).sqrt();
        (self.bits() / self.delay_bound) * (1.0 + d + root) / (2.0 * success)
    }

    /// Share of network resources the user consumes, `1 / (1 + B/(Ω* γ*))`.
    pub fn size(&self, optimum: &Optimum, bandwidth: f64) -> Result<f64> {
        if !(bandwidth > 0.0) {
            return Err(domain(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(size_at_rate(
            self.omega_star(optimum),
            optimum.gamma,
            bandwidth,
        ))
    }

    pub fn queue_state(&self, rate: f64, success: f64) -> QueueState {
        QueueState {
            tau: self.transmission_time(rate),
            success,
            arrival_rate: self.arrival_rate(),
        }
    }

    /// The queue at the Pareto-dominant equilibrium: `R = Ω*`, `f = f*`.
    pub fn equilibrium_queue(&self, optimum: &Optimum) -> QueueState {
        self.queue_state(self.omega_star(optimum), optimum.success)
    }
}

/// `1 / (1 + B/(R γ))`.
pub fn size_at_rate(rate: f64, gamma: f64, bandwidth: f64) -> f64 {
    1.0 / (1.0 + bandwidth / (rate * gamma))
}

/// One user's queue: transmission time, per-attempt success probability and
/// packet arrival rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueState {
    pub tau: f64,
    pub success: f64,
    pub arrival_rate: f64,
}

impl QueueState {
    pub fn new(tau: f64, success: f64, arrival_rate: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(domain("transmission time must be positive"));
        }
        if !(success > 0.0 && success <= 1.0) {
            return Err(domain("success probability must lie in (0, 1]"));
        }
        if !(arrival_rate >= 0.0) {
            return Err(domain("arrival rate must be nonnegative"));
        }
        Ok(Self {
            tau,
            success,
            arrival_rate,
        })
    }

    /// `ρ = λτ/f`.
    pub fn load(&self) -> f64 {
        self.arrival_rate * self.tau / self.success
    }

    pub fn service_rate(&self) -> f64 {
        self.success / self.tau
    }

    pub fn mean_service(&self) -> f64 {
        self.tau / self.success
    }

    pub fn is_stable(&self) -> bool {
        self.load() < 1.0
    }

    pub(crate) fn require_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::UnstableQueue { load: self.load() })
        }
    }
}
