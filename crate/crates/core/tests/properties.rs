use eeqos::admission::{objective, select_exact, select_greedy, single_class_optimum, Candidate};
use eeqos::delay::{nu_chi, queue_moments, service_moments};
use eeqos::efficiency::{EfficiencyModel, Optimum, SuccessCurve};
use eeqos::{NetworkScenario, QosProfile, User};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn optimum() -> Optimum {
    EfficiencyModel::exponential(100)
        .unwrap()
        .optimum()
        .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Random feasible scenario: users are drawn until one more would not fit.
fn random_scenario(rng: &mut ChaCha8Rng, opt: &Optimum) -> NetworkScenario {
    let bandwidth = 5e6;
    let k_max = rng.random_range(1..=12);
    let mut users = Vec::new();
    let mut total = 0.0;
    while users.len() < k_max {
        let rate = 10f64.powf(rng.random_range(3.0..5.3));
        let delay = 10f64.powf(rng.random_range(-2.0..0.3));
        let p = QosProfile::new(rate, delay, 100).unwrap();
        let size = p.size(opt, bandwidth).unwrap();
        if total + size >= 0.95 {
            break;
        }
        total += size;
        let gain = 10f64.powf(rng.random_range(-12.0..-8.0));
        users.push(User::new(p, gain).unwrap());
    }
    if users.is_empty() {
        let p = QosProfile::new(1e3, 0.5, 100).unwrap();
        users.push(User::new(p, 1e-10).unwrap());
    }
    NetworkScenario::new(bandwidth, 1e-13, users).unwrap()
}

#[test]
fn equilibrium_sir_and_delay_are_exact() {
    let opt = optimum();
    let curve = EfficiencyModel::exponential(100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let net = random_scenario(&mut rng, &opt);
        let alloc = net.solve_equilibrium(&opt).unwrap();
        let (powers, rates) = (alloc.powers(), alloc.rates());
        for (k, u) in net.users().iter().enumerate() {
            let sir = net.sir(&powers, &rates, k);
            assert!(rel(sir, opt.gamma) < 1e-9, "sir {sir}");
            let delay = u.profile.mean_delay(rates[k], curve.value(sir)).unwrap();
            assert!(rel(delay, u.profile.delay_bound()) < 1e-9);
        }
    }
}

#[test]
fn no_profitable_deviation() {
    let opt = optimum();
    let curve = EfficiencyModel::exponential(100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let net = random_scenario(&mut rng, &opt);
        let alloc = net.solve_equilibrium(&opt).unwrap();
        for (k, user) in net.users().iter().enumerate() {
            let base = alloc.users[k];
            let u_star = base.rate * curve.value(base.sir) / base.power;
            for rs in [1.0, 1.001, 1.01, 1.1, 1.5, 3.0] {
                for ps in [0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 2.0, 10.0] {
                    let (mut p, mut r) = (alloc.powers(), alloc.rates());
                    p[k] *= ps;
                    r[k] *= rs;
                    let sir = net.sir(&p, &r, k);
                    let f = curve.value(sir);
                    let ok = matches!(user.profile.mean_delay(r[k], f),
                        Ok(d) if d <= user.profile.delay_bound() * (1.0 + 1e-12));
                    if ok {
                        let u = r[k] * f / p[k];
                        assert!(
                            u <= u_star * (1.0 + 1e-9),
                            "rs {rs} ps {ps}: {u} > {u_star}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn tightness_for_random_profiles() {
    let opt = optimum();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let rate = 10f64.powf(rng.random_range(2.0..6.0));
        let delay = 10f64.powf(rng.random_range(-3.0..1.0));
        let p = QosProfile::new(rate, delay, 100).unwrap();
        let w = p.mean_delay(p.omega_star(&opt), opt.success).unwrap();
        assert!(rel(w, delay) < 1e-9);
    }
}

#[test]
fn size_grows_with_rate_and_shrinks_with_delay() {
    let opt = optimum();
    let size = |r: f64, d: f64| QosProfile::new(r, d, 100).unwrap().size(&opt, 5e6).unwrap();
    for &d in &[0.01, 0.05, 1.0] {
        assert!(size(5e3, d) < size(50e3, d));
        assert!(size(50e3, d) < size(150e3, d));
    }
    for &r in &[5e3, 50e3] {
        assert!(size(r, 0.01) > size(r, 0.05));
        assert!(size(r, 0.05) > size(r, 1.0));
    }
}

#[test]
fn nu_chi_depend_on_product_only() {
    let opt = optimum();
    let pairs = [
        (0.05, 500.0),
        (0.025, 1000.0),
        (0.1, 250.0),
        (0.5, 50.0),
        (0.0125, 2000.0),
    ];
    let want = nu_chi(25.0, opt.success).unwrap();
    for (d, lambda) in pairs {
        let p = QosProfile::new(lambda * 100.0, d, 100).unwrap();
        let q = p.equilibrium_queue(&opt);
        let (s, w) = (service_moments(&q), queue_moments(&q).unwrap());
        assert!(rel(w.mean / s.mean, want.nu) < 1e-12);
        assert!(rel(w.std / s.std, want.chi) < 1e-12);
    }
}

/// Every subset by recursion, ties broken towards the lexicographically
/// smallest index list.
fn brute_force(cands: &[Candidate]) -> Vec<usize> {
    fn walk(i: usize, cur: &mut Vec<usize>, cands: &[Candidate], best: &mut (f64, Vec<usize>)) {
        if i == cands.len() {
            let total: f64 = cur.iter().map(|&j| cands[j].size).sum();
            if total < 1.0 {
                let j = objective(cands, cur);
                let tie = (j - best.0).abs() <= 1e-12 * j.abs().max(best.0.abs());
                if (!tie && j > best.0) || (tie && *cur < best.1) {
                    *best = (j, cur.clone());
                }
            }
            return;
        }
        cur.push(i);
        walk(i + 1, cur, cands, best);
        cur.pop();
        walk(i + 1, cur, cands, best);
    }
    let mut best = (0.0, Vec::new());
    walk(0, &mut Vec::new(), cands, &mut best);
    best.1
}

fn candidates() -> impl Strategy<Value = Vec<Candidate>> {
    prop::collection::vec(
        (0.005f64..0.45, 0.2f64..5.0).prop_map(|(size, gain)| Candidate { size, gain }),
        1..=12,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn exact_matches_brute_force(cands in candidates()) {
        let exact = select_exact(&cands).unwrap();
        let brute = brute_force(&cands);
        let (je, jb) = (objective(&cands, &exact), objective(&cands, &brute));
        prop_assert!((je - jb).abs() <= 1e-12 * jb.max(1e-300));
        prop_assert_eq!(exact, brute);
    }

    #[test]
    fn greedy_never_beats_exact(cands in candidates()) {
        let exact = objective(&cands, &select_exact(&cands).unwrap());
        let greedy_set = select_greedy(&cands);
        let greedy = objective(&cands, &greedy_set);
        prop_assert!(greedy <= exact * (1.0 + 1e-12));
        let total: f64 = greedy_set.iter().map(|&i| cands[i].size).sum();
        prop_assert!(total < 1.0);
    }

    #[test]
    fn single_class_matches_integer_scan(size in 0.001f64..0.9) {
        let l = single_class_optimum(size).unwrap() as f64;
        let value = |l: f64| l * (1.0 - l * size);
        let mut best = 1.0;
        let mut n = 1.0;
        while n * size < 1.0 {
            if value(n) > value(best) + 1e-12 {
                best = n;
            }
            n += 1.0;
        }
        prop_assert!((value(l) - value(best)).abs() <= 1e-12);
    }
}
