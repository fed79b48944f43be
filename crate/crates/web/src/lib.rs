//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string; failures
//! become a thrown `Error` carrying the solver's message.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

pub mod api {
    use eeqos::admission::{class_objective, network_capacity};
    use eeqos::delay::queue_delay_cdf;
    use eeqos::efficiency::{EfficiencyModel, SuccessCurve};
    use eeqos::reproduce::{class_sizes, TABLE1_MIXES};
    use eeqos::{Error, QosProfile, Result};
    use serde::Serialize;

    #[derive(Debug, Serialize)]
    pub struct SizeReport {
        pub gamma_star: f64,
        pub gamma_star_db: f64,
        pub omega_infinity_bps: f64,
        pub omega_star_bps: f64,
        pub size: f64,
        pub capacity: u32,
        pub goodput_bps: f64,
    }

    pub fn size_report(
        rate_kbps: f64,
        delay_ms: f64,
        bandwidth_mhz: f64,
        packet_bits: u32,
    ) -> Result<SizeReport> {
        let opt = EfficiencyModel::exponential(packet_bits)?.optimum()?;
        let p = QosProfile::from_kbps_ms(rate_kbps, delay_ms, packet_bits)?;
        let size = p.size(&opt, bandwidth_mhz * 1e6)?;
        let capacity = network_capacity(size)?;
        Ok(SizeReport {
            gamma_star: opt.gamma,
            gamma_star_db: opt.gamma_db(),
            omega_infinity_bps: p.omega_infinity(),
            omega_star_bps: p.omega_star(&opt),
            size,
            capacity,
            goodput_bps: capacity as f64 * p.source_rate(),
        })
    }

    #[derive(Debug, Serialize)]
    pub struct DelayCurve {
        pub t_ms: Vec<f64>,
        pub queueing: Vec<f64>,
        pub total: Vec<f64>,
        pub atom: f64,
        pub load: f64,
    }

    /// Queueing and total delay CDFs at the equilibrium operating point.
    pub fn delay_curve(
        rate_kbps: f64,
        delay_ms: f64,
        packet_bits: u32,
        horizon_ms: f64,
        points: usize,
    ) -> Result<DelayCurve> {
        if !(horizon_ms > 0.0) || !(2..=10_000).contains(&points) {
            return Err(Error::Domain(
                "need a positive horizon and 2..=10000 points".into(),
            ));
        }
        let opt = EfficiencyModel::exponential(packet_bits)?.optimum()?;
        let p = QosProfile::from_kbps_ms(rate_kbps, delay_ms, packet_bits)?;
        let q = p.equilibrium_queue(&opt);
        let dist = queue_delay_cdf(&q, 100.0 * p.delay_bound(), 1 << 16)?;
        let t_ms: Vec<f64> = (0..points)
            .map(|i| horizon_ms * i as f64 / (points - 1) as f64)
            .collect();
        Ok(DelayCurve {
            queueing: t_ms.iter().map(|t| dist.cdf_at(t * 1e-3)).collect(),
            total: t_ms
                .iter()
                .map(|t| dist.total_delay_cdf(t * 1e-3))
                .collect(),
            atom: dist.atom_at_zero,
            load: q.load(),
            t_ms,
        })
    }

    #[derive(Debug, Serialize)]
    pub struct MixReport {
        pub sizes: [f64; 3],
        pub total_size: f64,
        pub feasible: bool,
        /// Percentage loss against the best single-class network.
        pub loss_percent: Option<f64>,
    }

    /// Total-utility loss of a class A/B/C mix against 25 class-A users.
    pub fn class_mix(a: u32, b: u32, c: u32) -> Result<MixReport> {
        let sizes = class_sizes()?;
        let counts = [a, b, c];
        let total_size = sizes.iter().zip(counts).map(|(s, n)| s * n as f64).sum();
        let base = class_objective(&sizes, &TABLE1_MIXES[0])?;
        let loss_percent = match class_objective(&sizes, &counts) {
            Ok(j) => Some(100.0 * (1.0 - j / base)),
            Err(Error::InfeasibleNetwork { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(MixReport {
            sizes,
            total_size,
            feasible: loss_percent.is_some(),
            loss_percent,
        })
    }

    /// `f(γ)` for drawing the efficiency curve.
    pub fn success_probability(packet_bits: u32, gamma: f64) -> Result<f64> {
        EfficiencyModel::exponential(packet_bits)?.eval(gamma)
    }
}

fn to_js<T: serde::Serialize>(r: eeqos::Result<T>) -> Result<String, JsError> {
    match r {
        Ok(v) => serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string())),
        Err(e) => Err(JsError::new(&e.to_string())),
    }
}

#[wasm_bindgen]
pub fn size_report(
    rate_kbps: f64,
    delay_ms: f64,
    bandwidth_mhz: f64,
    packet_bits: u32,
) -> Result<String, JsError> {
    to_js(api::size_report(
        rate_kbps,
        delay_ms,
        bandwidth_mhz,
        packet_bits,
    ))
}

#[wasm_bindgen]
pub fn delay_curve(
    rate_kbps: f64,
    delay_ms: f64,
    packet_bits: u32,
    horizon_ms: f64,
    points: usize,
) -> Result<String, JsError> {
    to_js(api::delay_curve(
        rate_kbps,
        delay_ms,
        packet_bits,
        horizon_ms,
        points,
    ))
}

#[wasm_bindgen]
pub fn class_mix(a: u32, b: u32, c: u32) -> Result<String, JsError> {
    to_js(api::class_mix(a, b, c))
}
