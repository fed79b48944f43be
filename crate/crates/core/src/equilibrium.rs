//! Nash equilibrium of the joint power and rate control game.
//!
//! Every user maximises bits per joule, `u = R f(γ)/p`, subject to its delay
//! bound. Utility depends on `(p, R)` only through the SIR, so any strategy
//! reaching `γ*` at a rate `R >= Ω*` is a best response. Setting every rate
//! to `Ω*` and solving the resulting linear SIR system gives the
//! Pareto-dominant equilibrium in closed form.

use serde::{Deserialize, Serialize};

use crate::efficiency::{Optimum, SuccessCurve};
use crate::error::{domain, Error, Result};
use crate::qos::{size_at_rate, QosProfile};

/// A user as seen by the access point: QoS pair plus channel gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub profile: QosProfile,
    pub gain: f64,
}

impl User {
    pub fn new(profile: QosProfile, gain: f64) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(domain(format!("channel gain must be positive, got {gain}")));
        }
        Ok(Self { profile, gain })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    bandwidth: f64,
    noise_power: f64,
    users: Vec<User>,
    max_power: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserAllocation {
    pub power: f64,
    pub rate: f64,
    pub sir: f64,
    /// bits per joule
    pub utility: f64,
    pub size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumAllocation {
    pub users: Vec<UserAllocation>,
    pub total_size: f64,
}

impl EquilibriumAllocation {
    pub fn powers(&self) -> Vec<f64> {
        self.users.iter().map(|u| u.power).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.users.iter().map(|u| u.rate).collect()
    }
}

/// Outcome of a single user's best response under a power cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedRate {
    pub rate: f64,
    pub sir: f64,
    pub power: f64,
    /// Whether the cap forced a departure from `(Ω*, γ*)`.
    pub binding: bool,
}

impl NetworkScenario {
    pub fn new(bandwidth: f64, noise_power: f64, users: Vec<User>) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(domain("bandwidth must be positive"));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(domain("noise power must be positive"));
        }
        Ok(Self {
            bandwidth,
            noise_power,
            users,
            max_power: None,
        })
    }

    pub fn with_max_power(mut self, max_power: f64) -> Result<Self> {
        if !(max_power > 0.0) {
            return Err(domain("maximum power must be positive"));
        }
        self.max_power = Some(max_power);
        Ok(self)
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn max_power(&self) -> Option<f64> {
        self.max_power
    }

    /// Matched-filter SIR of user `k`:
    /// `(B/R_k) p_k h_k / (σ² + Σ_{j≠k} p_j h_j)`.
    pub fn sir(&self, powers: &[f64], rates: &[f64], k: usize) -> f64 {
        (self.bandwidth / rates[k]) * powers[k] * self.effective_gain(powers, k)
    }

    /// `ĥ_k = h_k / (σ² + Σ_{j≠k} p_j h_j)`, so that `γ_k = (B/R_k) p_k ĥ_k`.
    pub fn effective_gain(&self, powers: &[f64], k: usize) -> f64 {
        let interference: f64 = self
            .users
            .iter()
            .zip(powers)
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, (u, p))| p * u.gain)
            .sum();
        self.users[k].gain / (self.noise_power + interference)
    }

    pub fn sizes(&self, optimum: &Optimum) -> Vec<f64> {
        self.users
            .iter()
            .map(|u| size_at_rate(u.profile.omega_star(optimum), optimum.gamma, self.bandwidth))
            .collect()
    }

    /// The Pareto-dominant equilibrium: `R_k = Ω_k*` and
    /// `p_k = (σ²/h_k) Φ_k / (1 - ΣΦ)`.
    pub fn solve_equilibrium(&self, optimum: &Optimum) -> Result<EquilibriumAllocation> {
        let rates: Vec<f64> = self
            .users
            .iter()
            .map(|u| u.profile.omega_star(optimum))
            .collect();
        let alloc = self.allocation_at_rates(optimum, &rates)?;
        if let Some(cap) = self.max_power {
            if let Some((user, a)) = alloc.users.iter().enumerate().find(|(_, a)| a.power > cap) {
                return Err(Error::PowerLimitBinding {
                    user,
                    required: a.power,
                    max_power: cap,
                });
            }
        }
        Ok(alloc)
    }

    /// The equilibrium in which every user reaches `γ*` at the given rates.
    /// Rates at or above `Ω*` give the non-dominant members of the family.
    pub fn allocation_at_rates(
        &self,
        optimum: &Optimum,
        rates: &[f64],
    ) -> Result<EquilibriumAllocation> {
        if self.users.is_empty() {
            return Err(domain("scenario has no users"));
        }
        if rates.len() != self.users.len() {
            return Err(domain("one rate per user required"));
        }
        let sizes: Vec<f64> = rates
            .iter()
            .map(|&r| size_at_rate(r, optimum.gamma, self.bandwidth))
            .collect();
        let total: f64 = sizes.iter().sum();
        if total >= 1.0 {
            return Err(Error::InfeasibleNetwork {
                total,
                excess: total - 1.0,
                sizes,
            });
        }
        let headroom = 1.0 - total;
        let users = self
            .users
            .iter()
            .zip(rates)
            .zip(&sizes)
            .map(|((u, &rate), &size)| UserAllocation {
                power: self.noise_power / u.gain * size / headroom,
                rate,
                sir: optimum.gamma,
                utility: self.utility_scale(u.gain, optimum) * headroom / (1.0 - size),
                size,
            })
            .collect();
        Ok(EquilibriumAllocation {
            users,
            total_size: total,
        })
    }

    /// `B h f(γ*) / (σ² γ*)`, the utility a lone user of vanishing size gets.
    pub fn utility_scale(&self, gain: f64, optimum: &Optimum) -> f64 {
        self.bandwidth * gain * optimum.success / (self.noise_power * optimum.gamma)
    }

    /// Closed-form equilibrium utility of user `k`:
    /// `(B h_k f*/(σ² γ*)) (1 - ΣΦ)/(1 - Φ_k)`.
    pub fn utility_at_equilibrium(
        &self,
        optimum: &Optimum,
        alloc: &EquilibriumAllocation,
        k: usize,
    ) -> f64 {
        let size = alloc.users[k].size;
        self.utility_scale(self.users[k].gain, optimum) * (1.0 - alloc.total_size) / (1.0 - size)
    }

    /// Best response of user `k` under the power cap, holding every other
    /// user at its unconstrained equilibrium power.
    pub fn solve_constrained_rate<C: SuccessCurve + ?Sized>(
        &self,
        curve: &C,
        optimum: &Optimum,
        k: usize,
    ) -> Result<ConstrainedRate> {
        let cap = self
            .max_power
            .ok_or_else(|| domain("scenario has no maximum power"))?;
        if k >= self.users.len() {
            return Err(domain(format!("no user {k}")));
        }
        let rates: Vec<f64> = self
            .users
            .iter()
            .map(|u| u.profile.omega_star(optimum))
            .collect();
        let alloc = self.allocation_at_rates(optimum, &rates)?;
        let gain = self.effective_gain(&alloc.powers(), k);
        constrained_best_response(
            &self.users[k].profile,
            curve,
            optimum,
            self.bandwidth,
            cap,
            gain,
        )
        .map_err(|e| match e {
            Error::QosUnachievable { max_power, .. } => {
                Error::QosUnachievable { user: k, max_power }
            }
            other => other,
        })
    }
}

/// Best response of one user whose power is capped at `max_power`, with
/// interference frozen into `effective_gain` (`γ = (B/R) p ĥ`).
///
/// When `γ*` is reachable at `Ω*` the answer is `(Ω*, γ*)`. Otherwise the
/// user transmits at full power at a rate `Ω̃` with
/// `Ω̃ = rate_for_success(f(γ̃))` and `γ̃ = B P ĥ / Ω̃`. That system has two
/// solutions bracketing the minimiser of `R γ̂(R)`; the one with the larger
/// `f(γ)/γ` is returned.
pub fn constrained_best_response<C: SuccessCurve + ?Sized>(
    profile: &QosProfile,
    curve: &C,
    optimum: &Optimum,
    bandwidth: f64,
    max_power: f64,
    effective_gain: f64,
) -> Result<ConstrainedRate> {
    if !(max_power >= 0.0) || !(effective_gain > 0.0) || !(bandwidth > 0.0) {
        return Err(domain(
            "power cap, effective gain and bandwidth must be positive",
        ));
    }
    let omega_star = profile.omega_star(optimum);
    let needed = optimum.gamma * omega_star / (bandwidth * effective_gain);
    if needed <= max_power {
        return Ok(ConstrainedRate {
            rate: omega_star,
            sir: optimum.gamma,
            power: needed,
            binding: false,
        });
    }
    let unachievable = Error::QosUnachievable { user: 0, max_power };
    // SIR-rate product available at full power
    let reach = bandwidth * max_power * effective_gain;
    if reach == 0.0 {
        return Err(unachievable);
    }

    let floor = profile.omega_infinity();
    let demand = |rate: f64| -> f64 {
        match profile.sir_requirement(rate, curve) {
            Ok(g) => rate * g,
            Err(_) => f64::INFINITY,
        }
    };
    let (rate_min, demand_min) = golden_min(demand, floor * (1.0 + 1e-12), omega_star);
    if demand_min > reach {
        return Err(unachievable);
    }
    // positive outside the feasible interval, nonpositive inside
    let gap = |rate: f64| profile.eta_unchecked(rate) - curve.value(reach / rate);
    let lower = bisect_rate(gap, floor, rate_min);
    let upper = bisect_rate(gap, omega_star, rate_min);

    let pick = |rate: f64| {
        let sir = reach / rate;
        (curve.value(sir) / sir, rate, sir)
    };
    let (a, b) = (pick(lower), pick(upper));
    let (_, rate, sir) = if a.0 >= b.0 { a } else { b };
    Ok(ConstrainedRate {
        rate,
        sir,
        power: max_power,
        binding: true,
    })
}

/// Minimise a unimodal function of the rate on a log scale.
fn golden_min(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c.exp()), g(d.exp()));
    while b - a > 1e-13 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c.exp());
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d.exp());
        }
    }
    let x = (0.5 * (a + b)).exp();
    (x, g(x))
}

/// Bisect between `outside` (where `gap > 0`) and `inside` (`gap <= 0`).
fn bisect_rate(gap: impl Fn(f64) -> f64, outside: f64, inside: f64) -> f64 {
    let (mut out, mut ins) = (outside, inside);
    for _ in 0..200 {
        let mid = 0.5 * (out + ins);
        if gap(mid) > 0.0 {
            out = mid;
        } else {
            ins = mid;
        }
        if (out - ins).abs() <= 1e-14 * ins.abs() {
            break;
        }
    }
    ins
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efficiency::EfficiencyModel;

    const B: f64 = 5e6;
    const NOISE: f64 = 1e-13;

    fn model() -> EfficiencyModel {
        EfficiencyModel::exponential(100).unwrap()
    }

    fn class_b_user(gain: f64) -> User {
        User::new(QosProfile::from_kbps_ms(50.0, 50.0, 100).unwrap(), gain).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(a.abs())
    }

    #[test]
    fn single_user_closed_form_power() {
        let opt = model().optimum().unwrap();
        let net = NetworkScenario::new(B, NOISE, vec![class_b_user(1e-10)]).unwrap();
        let alloc = net.solve_equilibrium(&opt).unwrap();
        let u = alloc.users[0];
        let expected = NOISE * opt.gamma * u.rate / (1e-10 * B);
        assert!(close(u.power, expected, 1e-12));
        assert!((u.power - 7.73e-5).abs() < 5e-7, "{}", u.power);
        let sir = net.sir(&alloc.powers(), &alloc.rates(), 0);
        assert!(close(sir, opt.gamma, 1e-12));
    }

    #[test]
    fn symmetric_sir() {
        let net = NetworkScenario::new(B, NOISE, vec![class_b_user(1e-10); 2]).unwrap();
        let (p, r) = (1e-3, 6e4);
        let sir = net.sir(&[p, p], &[r, r], 1);
        assert!(close(sir, (B / r) * p * 1e-10 / (NOISE + p * 1e-10), 1e-14));
    }

    #[test]
    fn capacity_thirteen_class_b_users() {
        let opt = model().optimum().unwrap();
        let net = NetworkScenario::new(B, NOISE, vec![class_b_user(1e-10); 13]).unwrap();
        assert!(net.solve_equilibrium(&opt).is_ok());
        let net = NetworkScenario::new(B, NOISE, vec![class_b_user(1e-10); 14]).unwrap();
        match net.solve_equilibrium(&opt) {
            Err(Error::InfeasibleNetwork { total, sizes, .. }) => {
                assert_eq!(sizes.len(), 14);
                assert!((total - 1.0046).abs() < 1e-4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn symmetric_powers_equal_and_grow() {
        let opt = model().optimum().unwrap();
        let mut last = 0.0;
        for k in 1..=13 {
            let net = NetworkScenario::new(B, NOISE, vec![class_b_user(1e-10); k]).unwrap();
            let alloc = net.solve_equilibrium(&opt).unwrap();
            let p0 = alloc.users[0].power;
            assert!(alloc.users.iter().all(|u| u.power == p0));
            assert!(p0 > last);
            last = p0;
        }
    }

    #[test]
    fn utility_matches_direct_ratio() {
        let opt = model().optimum().unwrap();
        let users = vec![class_b_user(1e-10), class_b_user(3e-11)];
        let net = NetworkScenario::new(B, NOISE, users).unwrap();
        let alloc = net.solve_equilibrium(&opt).unwrap();
        for (k, a) in alloc.users.iter().enumerate() {
            let direct = a.rate * opt.success / a.power;
            assert!(close(
                net.utility_at_equilibrium(&opt, &alloc, k),
                direct,
                1e-12
            ));
        }
    }

    #[test]
    fn utility_falls_when_others_grow() {
        let opt = model().optimum().unwrap();
        let me = class_b_user(1e-10);
        let small = User::new(QosProfile::from_kbps_ms(5.0, 10.0, 100).unwrap(), 1e-10).unwrap();
        let big = User::new(QosProfile::from_kbps_ms(150.0, 1000.0, 100).unwrap(), 1e-10).unwrap();
        let u_small = NetworkScenario::new(B, NOISE, vec![me, small])
            .unwrap()
            .solve_equilibrium(&opt)
            .unwrap()
            .users[0]
            .utility;
        let u_big = NetworkScenario::new(B, NOISE, vec![me, big])
            .unwrap()
            .solve_equilibrium(&opt)
            .unwrap()
            .users[0]
            .utility;
        assert!(u_big < u_small);
    }

    #[test]
    fn power_cap_binding_reported() {
        let opt = model().optimum().unwrap();
        let net = NetworkScenario::new(B, NOISE, vec![class_b_user(1e-10)])
            .unwrap()
            .with_max_power(1e-5)
            .unwrap();
        assert!(matches!(
            net.solve_equilibrium(&opt),
            Err(Error::PowerLimitBinding { user: 0, .. })
        ));
    }

    #[test]
    fn constrained_rate_not_binding_with_large_cap() {
        let m = model();
        let opt = m.optimum().unwrap();
        let net = NetworkScenario::new(B, NOISE, vec![class_b_user(1e-10)])
            .unwrap()
            .with_max_power(1.0)
            .unwrap();
        let c = net.solve_constrained_rate(&m, &opt, 0).unwrap();
        assert!(!c.binding);
        assert_eq!(c.sir, opt.gamma);
        assert_eq!(c.rate, net.users()[0].profile.omega_star(&opt));
    }

    #[test]
    fn constrained_rate_slightly_below_needed_power() {
        let m = model();
        let opt = m.optimum().unwrap();
        let user = class_b_user(1e-10);
        let p_star = NetworkScenario::new(B, NOISE, vec![user])
            .unwrap()
            .solve_equilibrium(&opt)
            .unwrap()
            .users[0]
            .power;
        let net = NetworkScenario::new(B, NOISE, vec![user])
            .unwrap()
            .with_max_power(0.99999 * p_star)
            .unwrap();
        let c = net.solve_constrained_rate(&m, &opt, 0).unwrap();
        let profile = user.profile;
        let omega_star = profile.omega_star(&opt);
        assert!(c.binding);
        // rate drops below Ω*, SIR rises above γ*
        assert!(c.rate < omega_star && c.sir > opt.gamma, "{c:?}");
        // delay bound still met with equality
        let w = profile.mean_delay(c.rate, m.value(c.sir)).unwrap();
        assert!(close(w, profile.delay_bound(), 1e-8));
        // both displayed equations hold
        assert!(close(
            c.rate,
            profile.rate_for_success(m.value(c.sir)),
            1e-8
        ));
        let gain = net.effective_gain(&[0.0], 0);
        assert!(close(c.sir, B / c.rate * c.power * gain, 1e-12));
        // efficiency strictly lower than at γ*
        assert!(m.value(c.sir) / c.sir < opt.efficiency());
    }

    #[test]
    fn constrained_rate_zero_power_unachievable() {
        let m = model();
        let opt = m.optimum().unwrap();
        let r = constrained_best_response(
            &QosProfile::from_kbps_ms(50.0, 50.0, 100).unwrap(),
            &m,
            &opt,
            B,
            0.0,
            1e3,
        );
        assert!(matches!(r, Err(Error::QosUnachievable { .. })));
        let r = constrained_best_response(
            &QosProfile::from_kbps_ms(50.0, 50.0, 100).unwrap(),
            &m,
            &opt,
            B,
            1e-9,
            1e3,
        );
        assert!(matches!(r, Err(Error::QosUnachievable { .. })));
    }

    #[test]
    fn constrained_choice_beats_other_fixed_point() {
        let m = model();
        let opt = m.optimum().unwrap();
        let profile = QosProfile::from_kbps_ms(50.0, 50.0, 100).unwrap();
        let gain = 1e-10 / NOISE;
        let needed = opt.gamma * profile.omega_star(&opt) / (B * gain);
        let cap = 0.99999 * needed;
        let c = constrained_best_response(&profile, &m, &opt, B, cap, gain).unwrap();
        // scan every feasible full-power rate; none has better f(γ)/γ
        let reach = B * cap * gain;
        let floor = profile.omega_infinity();
        let mut best = 0.0f64;
        for i in 1..20_000 {
            let rate = floor * (1.0 + i as f64 * 1e-4);
            let sir = reach / rate;
            if m.value(sir) >= profile.eta(rate).unwrap() {
                best = best.max(m.value(sir) / sir);
            }
        }
        let got = m.value(c.sir) / c.sir;
        assert!(got >= best * (1.0 - 1e-9), "{got} < {best}");
    }
}
