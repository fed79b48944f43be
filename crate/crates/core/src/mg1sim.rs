//! Discrete-event simulation of one user's queue: Poisson arrivals, FIFO
//! service, each packet retransmitted until it gets through.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{domain, Error, Result};
use crate::qos::QueueState;

pub const DEFAULT_BATCHES: usize = 30;
pub const DEFAULT_QUEUE_CAP: usize = 10_000_000;
pub const MIN_PACKETS: u64 = 10_000;
/// Histogram bins per transmission time.
pub const BINS_PER_TAU: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub arrival_rate: f64,
    pub tau: f64,
    pub success: f64,
    pub packets: u64,
    pub seed: u64,
    pub warmup_fraction: f64,
    pub batches: usize,
    pub queue_cap: usize,
    /// Queueing delays beyond this horizon fall in an overflow count.
    pub cdf_horizon: f64,
    /// Acknowledgement time added to every transmission; zero by default.
    pub ack_time: f64,
}

impl SimConfig {
    pub fn new(point: &QueueState, packets: u64, seed: u64) -> Self {
        let mean_wait = if point.is_stable() {
            crate::delay::queue_moments(point)
                .map(|m| m.mean)
                .unwrap_or(0.0)
        } else {
            0.0
        };
        Self {
            arrival_rate: point.arrival_rate,
            tau: point.tau,
            success: point.success,
            packets,
            seed,
            warmup_fraction: 0.1,
            batches: DEFAULT_BATCHES,
            queue_cap: DEFAULT_QUEUE_CAP,
            cdf_horizon: 50.0 * (mean_wait + point.tau / point.success),
            ack_time: 0.0,
        }
    }

    pub fn load(&self) -> f64 {
        self.arrival_rate * (self.tau + self.ack_time) / self.success
    }

    fn validate(&self) -> Result<()> {
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return Err(domain("arrival rate must be positive"));
        }
        if !(self.tau > 0.0) {
            return Err(domain("transmission time must be positive"));
        }
        if !(self.success > 0.0 && self.success <= 1.0) {
            return Err(domain("success probability must lie in (0, 1]"));
        }
        if self.packets < MIN_PACKETS {
            return Err(domain(format!(
                "packet budget must be at least {MIN_PACKETS}"
            )));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(domain("warmup fraction must lie in [0, 1)"));
        }
        if self.batches < 2 {
            return Err(domain("at least two batches required"));
        }
        if !(self.cdf_horizon > 0.0) {
            return Err(domain("CDF horizon must be positive"));
        }
        if !(self.ack_time >= 0.0) {
            return Err(domain("acknowledgement time must be nonnegative"));
        }
        if self.load() >= 1.0 {
            return Err(Error::UnstableQueue { load: self.load() });
        }
        Ok(())
    }
}

/// Sample mean, standard deviation and batch-means 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std: f64,
    pub half_width: f64,
    /// Standard error of the mean from batch means.
    pub std_error: f64,
}

/// Binned queueing delays with zero delays counted exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayHistogram {
    pub bin_width: f64,
    pub zeros: u64,
    pub counts: Vec<u64>,
    pub overflow: u64,
    pub total: u64,
}

impl DelayHistogram {
    fn new(bin_width: f64, horizon: f64) -> Self {
        Self {
            bin_width,
            zeros: 0,
            counts: vec![0; (horizon / bin_width).ceil() as usize],
            overflow: 0,
            total: 0,
        }
    }

    fn record(&mut self, x: f64) {
        self.total += 1;
        if x <= 0.0 {
            self.zeros += 1;
            return;
        }
        match self.counts.get_mut((x / self.bin_width) as usize) {
            Some(c) => *c += 1,
            None => self.overflow += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    /// Packets contributing to the statistics (after warmup).
    pub recorded: u64,
    pub total_delay: Estimate,
    pub queueing_delay: Estimate,
    pub service: Estimate,
    /// Time-averaged number of packets in the system.
    pub mean_in_system: f64,
    pub max_queue_len: usize,
    pub histogram: DelayHistogram,
}

/// Number of attempts until the first success, by inversion.
pub fn sample_transmissions<R: Rng + ?Sized>(rng: &mut R, success: f64) -> u64 {
    if success >= 1.0 {
        return 1;
    }
    let u = 1.0 - rng.random::<f64>();
    ((u.ln() / (1.0 - success).ln()).ceil() as u64).max(1)
}

#[derive(Default)]
struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn std(&self) -> f64 {
        if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).sqrt()
        } else {
            0.0
        }
    }
}

struct Batches {
    size: u64,
    sums: Vec<[f64; 3]>,
    filled: u64,
}

impl Batches {
    fn push(&mut self, v: [f64; 3]) {
        let i = (self.filled / self.size) as usize;
        if let Some(b) = self.sums.get_mut(i) {
            for k in 0..3 {
                b[k] += v[k];
            }
        }
        self.filled += 1;
    }

    fn estimate(&self, k: usize, running: &Running) -> Estimate {
        let means: Vec<f64> = self.sums.iter().map(|b| b[k] / self.size as f64).collect();
        let n = means.len() as f64;
        let m = means.iter().sum::<f64>() / n;
        let var = means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let t = StudentsT::new(0.0, 1.0, n - 1.0)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(1.96);
        Estimate {
            mean: running.mean,
            std: running.std(),
            half_width: t * se,
            std_error: se,
        }
    }
}

pub fn simulate(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let gaps = Exp::new(config.arrival_rate).map_err(|e| domain(e.to_string()))?;
    let slot = config.tau + config.ack_time;

    let warmup = (config.packets as f64 * config.warmup_fraction) as u64;
    let recorded = config.packets - warmup;
    let batch_size = recorded / config.batches as u64;
    if batch_size == 0 {
        return Err(domain("too few packets for the batch count"));
    }
    let mut batches = Batches {
        size: batch_size,
        sums: vec![[0.0; 3]; config.batches],
        filled: 0,
    };
    let mut stats: [Running; 3] = Default::default();
    let mut hist = DelayHistogram::new(config.tau / BINS_PER_TAU, config.cdf_horizon);

    // departure times of packets still in the system, oldest first
    let mut system: VecDeque<f64> = VecDeque::new();
    let mut now = 0.0f64;
    let mut last_event = 0.0f64;
    let mut area = 0.0f64;
    let mut window_start = 0.0f64;
    let mut max_len = 0usize;

    for i in 0..config.packets {
        let arrival = now + gaps.sample(&mut rng);
        let measuring = i >= warmup;
        if i == warmup {
            // flush departures before the window so the area starts clean
            while let Some(&d) = system.front() {
                if d > arrival {
                    break;
                }
                system.pop_front();
            }
            window_start = arrival;
            last_event = arrival;
        }
        while let Some(&d) = system.front() {
            if d > arrival {
                break;
            }
            if measuring {
                area += system.len() as f64 * (d - last_event);
                last_event = d;
            }
            system.pop_front();
        }
        if measuring {
            area += system.len() as f64 * (arrival - last_event);
            last_event = arrival;
        }

        let start = system.back().map_or(arrival, |&d| d.max(arrival));
        let service = sample_transmissions(&mut rng, config.success) as f64 * slot;
        system.push_back(start + service);
        max_len = max_len.max(system.len());
        if system.len() > config.queue_cap {
            return Err(Error::Divergence {
                queue_len: system.len(),
            });
        }
        now = arrival;

        if measuring {
            let wait = start - arrival;
            let total = wait + service;
            stats[0].push(total);
            stats[1].push(wait);
            stats[2].push(service);
            batches.push([total, wait, service]);
            hist.record(wait);
        }
    }
    if stats[0].n == 0 {
        return Err(Error::EmptySample);
    }
    let span = now - window_start;
    let mean_in_system = if span > 0.0 { area / span } else { 0.0 };

    Ok(SimReport {
        config: *config,
        recorded,
        total_delay: batches.estimate(0, &stats[0]),
        queueing_delay: batches.estimate(1, &stats[1]),
        service: batches.estimate(2, &stats[2]),
        mean_in_system,
        max_queue_len: max_len,
        histogram: hist,
    })
}

/// Empirical `Pr{W(q) <= t}` at each requested time, linear within a bin.
pub fn empirical_cdf(report: &SimReport, times: &[f64]) -> Result<Vec<f64>> {
    let h = &report.histogram;
    if h.total == 0 {
        return Err(Error::EmptySample);
    }
    let mut cumulative = Vec::with_capacity(h.counts.len() + 1);
    let mut acc = h.zeros;
    cumulative.push(acc);
    for &c in &h.counts {
        acc += c;
        cumulative.push(acc);
    }
    let n = h.total as f64;
    Ok(times
        .iter()
        .map(|&t| {
            if t < 0.0 {
                return 0.0;
            }
            let x = t / h.bin_width;
            let i = x.floor() as usize;
            if i >= h.counts.len() {
                return if t.is_infinite() || h.overflow == 0 {
                    1.0
                } else {
                    acc as f64 / n
                };
            }
            let w = x - i as f64;
            (cumulative[i] as f64 + w * h.counts[i] as f64) / n
        })
        .collect())
}
