//! Data behind the figures and the admission table, for the standard setting
//! `B = 5 MHz`, `M = 100`, `f(γ) = (1 - e^{-γ})^M`.

use serde::{Deserialize, Serialize};

use crate::admission::{network_capacity, utility_loss_table};
use crate::delay::{nu_chi, queue_delay_cdf_default, queue_moments, service_moments};
use crate::efficiency::{EfficiencyModel, Optimum, SuccessCurve};
use crate::error::{domain, Result};
use crate::qos::QosProfile;
use crate::report::{Cell, Table};

pub const BANDWIDTH: f64 = 5e6;
pub const PACKET_BITS: u32 = 100;

/// Class A, B and C as (source rate in bit/s, delay bound in s).
pub const CLASSES: [(f64, f64); 3] = [(5e3, 0.010), (50e3, 0.050), (150e3, 1.0)];

/// Table rows as counts of class A, B and C users; the first is the baseline.
pub const TABLE1_MIXES: [[u32; 3]; 6] = [
    [25, 0, 0],
    [23, 1, 0],
    [20, 0, 1],
    [18, 1, 1],
    [0, 7, 0],
    [0, 0, 3],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Table1,
}

impl std::str::FromStr for Figure {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "table1" => Ok(Figure::Table1),
            other => Err(domain(format!(
                "unknown figure `{other}` (expected fig2, fig3, fig4 or table1)"
            ))),
        }
    }
}

pub fn standard_optimum() -> Result<Optimum> {
    EfficiencyModel::exponential(PACKET_BITS)?.optimum()
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2Sweep {
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
}

impl Default for Fig2Sweep {
    fn default() -> Self {
        Self {
            d_min: 0.1,
            d_max: 1000.0,
            points: 41,
        }
    }
}

/// `ν` and `χ` against `d = Dλ`.
pub fn fig2(sweep: &Fig2Sweep) -> Result<Table> {
    if !(sweep.d_min > 0.0 && sweep.d_max >= sweep.d_min && sweep.points > 0) {
        return Err(domain(
            "fig2 sweep needs 0 < d_min <= d_max and at least one point",
        ));
    }
    let opt = standard_optimum()?;
    let mut t = Table::new(&["d", "nu", "chi"])
        .param("figure", "fig2")
        .param("M", PACKET_BITS)
        .param("f_star", opt.success);
    for d in log_space(sweep.d_min, sweep.d_max, sweep.points) {
        let nc = nu_chi(d, opt.success)?;
        t.push(vec![d.into(), nc.nu.into(), nc.chi.into()]);
    }
    Ok(t)
}

/// `ν` and `χ` from the full queue moments of given (rate, delay) pairs.
pub fn fig2_pairs(pairs: &[(f64, f64)]) -> Result<Table> {
    let opt = standard_optimum()?;
    let mut t = Table::new(&["source_rate_bps", "delay_bound_s", "d", "nu", "chi"])
        .param("figure", "fig2")
        .param("M", PACKET_BITS);
    for &(rate, delay) in pairs {
        let p = QosProfile::new(rate, delay, PACKET_BITS)?;
        let q = p.equilibrium_queue(&opt);
        let (s, w) = (service_moments(&q), queue_moments(&q)?);
        t.push(vec![
            rate.into(),
            delay.into(),
            p.load_product().into(),
            (w.mean / s.mean).into(),
            (w.std / s.std).into(),
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Sweep {
    /// Normalized delay `D·B` range.
    pub delay_norm_min: f64,
    pub delay_norm_max: f64,
    pub points: usize,
    pub source_rates: Vec<f64>,
    pub other_size: f64,
}

impl Default for Fig3Sweep {
    fn default() -> Self {
        Self {
            delay_norm_min: 1e3,
            delay_norm_max: 1e7,
            points: 41,
            source_rates: vec![5e3, 50e3, 150e3],
            other_size: 0.2,
        }
    }
}

/// Size, capacity, normalized rate, goodput and utility against `D·B`.
///
/// Utility is normalized by `Bh/σ²` and is zero where the user does not
/// fit beside the other users.
pub fn fig3(sweep: &Fig3Sweep) -> Result<Table> {
    if !(sweep.delay_norm_min > 0.0
        && sweep.delay_norm_max >= sweep.delay_norm_min
        && sweep.points > 0)
    {
        return Err(domain("fig3 sweep needs a positive, ordered delay range"));
    }
    if !(0.0..1.0).contains(&sweep.other_size) {
        return Err(domain("other-user size must lie in [0, 1)"));
    }
    let opt = standard_optimum()?;
    let mut t = Table::new(&[
        "source_rate_bps",
        "delay_norm",
        "size",
        "capacity",
        "rate_norm",
        "goodput_norm",
        "utility_norm",
    ])
    .param("figure", "fig3")
    .param("B", BANDWIDTH)
    .param("M", PACKET_BITS)
    .param("other_size", sweep.other_size);
    for &r in &sweep.source_rates {
        for dn in log_space(sweep.delay_norm_min, sweep.delay_norm_max, sweep.points) {
            let p = QosProfile::new(r, dn / BANDWIDTH, PACKET_BITS)?;
            let size = p.size(&opt, BANDWIDTH)?;
            let cap = network_capacity(size)?;
            let rest = 1.0 - sweep.other_size - size;
            let utility = if rest > 0.0 {
                opt.success / opt.gamma * rest / (1.0 - size)
            } else {
                0.0
            };
            t.push(vec![
                r.into(),
                dn.into(),
                size.into(),
                cap.into(),
                (p.omega_star(&opt) / BANDWIDTH).into(),
                (cap as f64 * r / BANDWIDTH).into(),
                utility.into(),
            ]);
        }
    }
    Ok(t)
}

/// Class-B queueing-delay CDF on `[0, horizon]` in 1 ms steps, with the
/// exact total-delay CDF alongside.
pub fn fig4(horizon: f64) -> Result<Table> {
    if !(horizon > 0.0) {
        return Err(domain("horizon must be positive"));
    }
    let opt = standard_optimum()?;
    let (rate, delay) = CLASSES[1];
    let p = QosProfile::new(rate, delay, PACKET_BITS)?;
    let q = p.equilibrium_queue(&opt);
    let dist = queue_delay_cdf_default(&q, delay)?;
    let mut t = Table::new(&["t_s", "t_norm", "queueing_cdf", "total_cdf"])
        .param("figure", "fig4")
        .param("source_rate_bps", rate)
        .param("delay_bound_s", delay)
        .param("B", BANDWIDTH)
        .param("M", PACKET_BITS);
    let steps = (horizon * 1e3).round() as usize;
    for i in 0..=steps {
        let c = i as f64 * 1e-3;
        t.push(vec![
            c.into(),
            (c * BANDWIDTH).into(),
            dist.cdf_at(c).into(),
            dist.total_delay_cdf(c).into(),
        ]);
    }
    Ok(t)
}

/// Class sizes at the standard setting.
pub fn class_sizes() -> Result<[f64; 3]> {
    let opt = standard_optimum()?;
    let mut out = [0.0; 3];
    for (o, &(r, d)) in out.iter_mut().zip(&CLASSES) {
        *o = QosProfile::new(r, d, PACKET_BITS)?.size(&opt, BANDWIDTH)?;
    }
    Ok(out)
}

/// Percentage loss in total utility of each class mix against 25 class-A users.
pub fn table1() -> Result<Table> {
    let sizes = class_sizes()?;
    let mixes: Vec<Vec<u32>> = TABLE1_MIXES.iter().map(|m| m.to_vec()).collect();
    let loss = utility_loss_table(&sizes, &mixes, &mixes[0])?;
    let mut t = Table::new(&["L_A", "L_B", "L_C", "loss_percent"])
        .param("figure", "table1")
        .param("size_A", sizes[0])
        .param("size_B", sizes[1])
        .param("size_C", sizes[2]);
    for (m, l) in mixes.iter().zip(loss) {
        t.push(vec![
            m[0].into(),
            m[1].into(),
            m[2].into(),
            Cell::Num(100.0 * l),
        ]);
    }
    Ok(t)
}

pub fn reproduce(figure: Figure) -> Result<Table> {
    match figure {
        Figure::Fig2 => fig2(&Fig2Sweep::default()),
        Figure::Fig3 => fig3(&Fig3Sweep::default()),
        Figure::Fig4 => fig4(0.3),
        Figure::Table1 => table1(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(c: &Cell) -> f64 {
        match c {
            Cell::Num(v) => *v,
            Cell::Int(i) => *i as f64,
            Cell::Text(_) => f64::NAN,
        }
    }

    #[test]
    fn table1_rows() {
        let t = table1().unwrap();
        let want = [0.0, 10.0, 30.0, 38.0, 71.0, 87.0];
        for (row, w) in t.rows.iter().zip(want) {
            assert!((num(&row[3]) - w).abs() < 1.0, "{row:?}");
        }
    }

    #[test]
    fn fig2_pairs_share_d() {
        let t = fig2_pairs(&[(50e3, 0.05), (25e3, 0.1), (100e3, 0.025)]).unwrap();
        let nu0 = num(&t.rows[0][3]);
        for row in &t.rows {
            assert!((num(&row[3]) - nu0).abs() < 1e-12 * nu0);
        }
    }

    #[test]
    fn fig3_contains_class_b_point() {
        let sweep = Fig3Sweep {
            delay_norm_min: 0.05 * BANDWIDTH,
            delay_norm_max: 0.05 * BANDWIDTH,
            points: 1,
            source_rates: vec![50e3],
            other_size: 0.2,
        };
        let t = fig3(&sweep).unwrap();
        let row = &t.rows[0];
        assert!((num(&row[2]) - 0.0718).abs() < 2e-4);
        assert_eq!(num(&row[3]), 13.0);
        assert!((num(&row[5]) * BANDWIDTH - 650e3).abs() < 1e-6);
    }

    #[test]
    fn fig4_has_delay_bound_row() {
        let t = fig4(0.1).unwrap();
        let row = &t.rows[50];
        assert!((num(&row[0]) - 0.05).abs() < 1e-12);
        assert!((num(&row[2]) - 0.63).abs() < 0.02);
    }

    #[test]
    fn reproduce_is_stable() {
        for f in [Figure::Fig2, Figure::Fig3, Figure::Table1] {
            assert_eq!(reproduce(f).unwrap(), reproduce(f).unwrap());
        }
        assert!("fig9".parse::<Figure>().is_err());
    }
}
