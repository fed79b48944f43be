use eeqos::delay::{queue_delay_cdf, queue_moments};
use eeqos::mg1sim::{empirical_cdf, simulate, SimConfig};
use eeqos::QueueState;

fn sup_distance(q: &QueueState, packets: u64, seed: u64) -> f64 {
    let m = queue_moments(q).unwrap().mean;
    let t_max = 200.0 * (m + q.tau / q.success);
    let dist = queue_delay_cdf(q, t_max, 1 << 17).unwrap();
    let report = simulate(&SimConfig::new(q, packets, seed)).unwrap();
    let grid: Vec<f64> = (0..4000).map(|i| i as f64 * t_max / 40_000.0).collect();
    let sim = empirical_cdf(&report, &grid).unwrap();
    grid.iter()
        .zip(&sim)
        .map(|(&t, &s)| (dist.cdf_at(t) - s).abs())
        .fold(0.0, f64::max)
}

#[test]
fn reconstruction_matches_simulation() {
    for (i, &(tau, f, rho)) in [(1e-3, 0.9, 0.5), (2e-3, 0.6, 0.8), (5e-4, 0.3, 0.3)]
        .iter()
        .enumerate()
    {
        let q = QueueState::new(tau, f, rho * f / tau).unwrap();
        let d = sup_distance(&q, 1_000_000, 40 + i as u64);
        assert!(d < 0.02, "case {i}: sup distance {d}");
    }
}

#[test]
fn simulated_moments_match_closed_form() {
    let q = QueueState::new(1e-3, 0.7, 350.0).unwrap();
    let r = simulate(&SimConfig::new(&q, 2_000_000, 5)).unwrap();
    let m = queue_moments(&q).unwrap();
    assert!((r.queueing_delay.mean - m.mean).abs() < 3.0 * r.queueing_delay.std_error.max(1e-12));
    assert!((r.queueing_delay.std - m.std).abs() < 0.03 * m.std);
}
