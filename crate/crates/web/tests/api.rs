use eeqos_web::api;

#[test]
fn class_b_size() {
    let r = api::size_report(50.0, 50.0, 5.0, 100).unwrap();
    assert!((r.size - 0.0718).abs() < 2e-4);
    assert_eq!(r.capacity, 13);
    assert_eq!(r.goodput_bps, 650e3);
    assert!(api::size_report(50.0, 0.0, 5.0, 100).is_err());
}

#[test]
fn delay_curve_is_monotone() {
    let c = api::delay_curve(50.0, 50.0, 100, 200.0, 201).unwrap();
    assert_eq!(c.t_ms.len(), 201);
    assert!(c.queueing.windows(2).all(|w| w[1] >= w[0]));
    assert!(c.total.iter().zip(&c.queueing).all(|(t, q)| t <= q));
    assert!((c.queueing[50] - 0.6466).abs() < 1e-3);
    assert!(api::delay_curve(50.0, 50.0, 100, 200.0, 1).is_err());
}

#[test]
fn class_mix_losses() {
    let r = api::class_mix(23, 1, 0).unwrap();
    assert!((r.loss_percent.unwrap() - 10.0).abs() < 1.0);
    let over = api::class_mix(0, 14, 0).unwrap();
    assert!(!over.feasible);
    assert_eq!(over.loss_percent, None);
}

#[test]
fn efficiency_curve_points() {
    assert_eq!(api::success_probability(100, 0.0).unwrap(), 0.0);
    assert!(api::success_probability(100, 20.0).unwrap() > 0.999);
}
