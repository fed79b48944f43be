//! `eeqos`: solve, admit, analyse and simulate from the command line.
//!
//! Every subcommand writes a table (CSV with a `#` parameter line, or JSON)
//! to stdout or `--output`. Failures print one `error: ...` line to stderr
//! and exit with status 1.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eeqos::admission::{select_max_utility, Policy};
use eeqos::delay::{queue_delay_cdf, queue_moments, service_moments, DEFAULT_SAMPLES};
use eeqos::efficiency::{EfficiencyModel, SuccessCurve};
use eeqos::mg1sim::{empirical_cdf, simulate, SimConfig};
use eeqos::report::{Cell, Table};
use eeqos::reproduce::{self, Figure};
use eeqos::scenario::{OutputFormat, ScenarioFile};
use eeqos::{Error, QosProfile};

#[derive(Parser)]
#[command(
    name = "eeqos",
    version,
    about = "Energy-efficient power and rate control with delay QoS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format (overrides the scenario file).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// SIR maximising bits per joule for `(1 - e^-γ)^M`.
    GammaStar {
        /// Packet size M in bits.
        #[arg(long = "packet-bits", visible_alias = "M", value_parser = clap::value_parser!(u32).range(1..))]
        packet_bits: u32,
    },
    /// Minimum rates and size of one user.
    Size {
        #[command(flatten)]
        qos: QosArgs,
        #[arg(long, default_value_t = 5.0)]
        bandwidth_mhz: f64,
    },
    /// Equilibrium powers, rates and utilities for a scenario file.
    Equilibrium { scenario: PathBuf },
    /// Admission decision for the users of a scenario file.
    Admit {
        scenario: PathBuf,
        /// Overrides the scenario's policy.
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
    },
    /// Queueing-delay density and CDF at the equilibrium operating point.
    DelayCdf {
        #[command(flatten)]
        qos: QosArgs,
        /// Last time reported, in ms (default 6·D).
        #[arg(long)]
        horizon_ms: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        step_ms: f64,
        /// Inversion horizon as a multiple of D.
        #[arg(long, default_value_t = 100.0)]
        t_max_factor: f64,
        /// Inversion grid size (power of two).
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Simulate the equilibrium queue of one user.
    Simulate {
        #[command(flatten)]
        qos: QosArgs,
        #[arg(long, default_value_t = 1_000_000)]
        packets: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        warmup: f64,
        /// Also emit the empirical queueing-delay CDF every this many ms.
        #[arg(long)]
        cdf_step_ms: Option<f64>,
    },
    /// Data behind a figure or table.
    Reproduce {
        /// fig2, fig3, fig4 or table1
        figure: String,
        /// For fig2: rate_kbps:delay_ms pairs instead of the d sweep.
        #[arg(long, value_delimiter = ',')]
        qos: Vec<String>,
    },
}

#[derive(Args)]
struct QosArgs {
    #[arg(long)]
    rate_kbps: f64,
    #[arg(long)]
    delay_ms: f64,
    #[arg(long, default_value_t = 100)]
    packet_bits: u32,
}

impl QosArgs {
    fn profile(&self) -> eeqos::Result<QosProfile> {
        QosProfile::from_kbps_ms(self.rate_kbps, self.delay_ms, self.packet_bits)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    FeasibilityOnly,
    Exact,
    Greedy,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::FeasibilityOnly => Policy::FeasibilityOnly,
            PolicyArg::Exact => Policy::MaxUtilityExact,
            PolicyArg::Greedy => Policy::MaxUtilityGreedy,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> eeqos::Result<()> {
    let (table, file_format) = match &cli.command {
        Command::GammaStar { packet_bits } => (gamma_star(*packet_bits)?, None),
        Command::Size { qos, bandwidth_mhz } => (size(qos, *bandwidth_mhz)?, None),
        Command::Equilibrium { scenario } => {
            let s = ScenarioFile::load(scenario)?;
            (equilibrium(&s)?, Some(s.output.format))
        }
        Command::Admit { scenario, policy } => {
            let s = ScenarioFile::load(scenario)?;
            (admit(&s, policy.map(Policy::from))?, Some(s.output.format))
        }
        Command::DelayCdf {
            qos,
            horizon_ms,
            step_ms,
            t_max_factor,
            samples,
        } => (
            delay_cdf(qos, *horizon_ms, *step_ms, *t_max_factor, *samples)?,
            None,
        ),
        Command::Simulate {
            qos,
            packets,
            seed,
            warmup,
            cdf_step_ms,
        } => (sim(qos, *packets, *seed, *warmup, *cdf_step_ms)?, None),
        Command::Reproduce { figure, qos } => (reproduce_figure(figure, qos)?, None),
    };
    let json = matches!(
        (cli.format, file_format),
        (Some(Format::Json), _) | (None, Some(OutputFormat::Json))
    );
    let text = if json {
        table.to_json()? + "\n"
    } else {
        table.to_csv()?
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gamma_star(m: u32) -> eeqos::Result<Table> {
    let opt = EfficiencyModel::exponential(m)?.optimum()?;
    let mut t = Table::new(&["M", "gamma_star", "gamma_star_db", "success", "efficiency"])
        .param("model", "exponential")
        .param("M", m);
    t.push(vec![
        m.into(),
        opt.gamma.into(),
        opt.gamma_db().into(),
        opt.success.into(),
        opt.efficiency().into(),
    ]);
    Ok(t)
}

fn size(qos: &QosArgs, bandwidth_mhz: f64) -> eeqos::Result<Table> {
    let p = qos.profile()?;
    let b = bandwidth_mhz * 1e6;
    let opt = EfficiencyModel::exponential(qos.packet_bits)?.optimum()?;
    let size = p.size(&opt, b)?;
    let cap = eeqos::admission::network_capacity(size)?;
    let mut t = Table::new(&[
        "omega_infinity_bps",
        "omega_star_bps",
        "size",
        "capacity",
        "goodput_bps",
    ])
    .param("rate_kbps", qos.rate_kbps)
    .param("delay_ms", qos.delay_ms)
    .param("M", qos.packet_bits)
    .param("B_hz", b);
    t.push(vec![
        p.omega_infinity().into(),
        p.omega_star(&opt).into(),
        size.into(),
        cap.into(),
        (cap as f64 * p.source_rate()).into(),
    ]);
    Ok(t)
}

fn scenario_params(t: Table, s: &ScenarioFile) -> Table {
    let t = t
        .param("M", s.efficiency.packet_size.si())
        .param("B_hz", s.network.bandwidth.si())
        .param("noise_w", s.network.noise_power.si());
    match s.network.max_power {
        Some(p) => t.param("max_power_w", p.si()),
        None => t,
    }
}

fn equilibrium(s: &ScenarioFile) -> eeqos::Result<Table> {
    let net = s.network()?;
    let curve = s.model()?;
    let opt = curve.optimum()?;
    let header = [
        "user",
        "power_w",
        "rate_bps",
        "sir",
        "utility_bits_per_joule",
        "size",
        "power_capped",
    ];
    let mut t = scenario_params(Table::new(&header), s).param("gamma_star", opt.gamma);
    match net.solve_equilibrium(&opt) {
        Ok(alloc) => {
            for (k, u) in alloc.users.iter().enumerate() {
                t.push(vec![
                    k.into(),
                    u.power.into(),
                    u.rate.into(),
                    u.sir.into(),
                    u.utility.into(),
                    u.size.into(),
                    Cell::Int(0),
                ]);
            }
        }
        Err(Error::PowerLimitBinding { .. }) => {
            // capped users fall back to their full-power best response
            for k in 0..net.users().len() {
                let c = net.solve_constrained_rate(&curve, &opt, k)?;
                let utility = c.rate * curve.value(c.sir) / c.power;
                let size = eeqos::qos::size_at_rate(c.rate, c.sir, net.bandwidth());
                t.push(vec![
                    k.into(),
                    c.power.into(),
                    c.rate.into(),
                    c.sir.into(),
                    utility.into(),
                    size.into(),
                    Cell::Int(c.binding as i64),
                ]);
            }
        }
        Err(e) => return Err(e),
    }
    Ok(t)
}

fn admit(s: &ScenarioFile, policy: Option<Policy>) -> eeqos::Result<Table> {
    let opt = s.model()?.optimum()?;
    let mut req = s.admission_request(Policy::MaxUtilityExact)?;
    if let Some(p) = policy {
        req.policy = p;
    }
    let sizes = eeqos::admission::candidates(&req, &opt)?;
    let result = select_max_utility(&req, &opt)?;
    let mut t = scenario_params(Table::new(&["user", "size", "admitted"]), s)
        .param("policy", format!("{:?}", req.policy))
        .param("heuristic", result.heuristic)
        .param("total_size", result.total_size)
        .param("total_utility", result.total_utility);
    for (k, c) in sizes.iter().enumerate() {
        let admitted = result.admitted.contains(&k);
        t.push(vec![k.into(), c.size.into(), Cell::Int(admitted as i64)]);
    }
    Ok(t)
}

fn delay_cdf(
    qos: &QosArgs,
    horizon_ms: Option<f64>,
    step_ms: f64,
    t_max_factor: f64,
    samples: usize,
) -> eeqos::Result<Table> {
    if !(step_ms > 0.0) {
        return Err(Error::Domain("step must be positive".into()));
    }
    let p = qos.profile()?;
    let opt = EfficiencyModel::exponential(qos.packet_bits)?.optimum()?;
    let q = p.equilibrium_queue(&opt);
    let d = p.delay_bound();
    let dist = queue_delay_cdf(&q, t_max_factor * d, samples)?;
    let horizon = horizon_ms.map_or(6.0 * d, |h| h * 1e-3);
    let mut t = Table::new(&["t_s", "pdf", "cdf", "total_cdf"])
        .param("rate_kbps", qos.rate_kbps)
        .param("delay_ms", qos.delay_ms)
        .param("M", qos.packet_bits)
        .param("t_max_s", dist.t_max)
        .param("samples", samples)
        .param("atom", dist.atom_at_zero)
        .param("mass", dist.mass);
    let steps = (horizon / (step_ms * 1e-3)).round() as usize;
    for i in 0..=steps {
        let c = i as f64 * step_ms * 1e-3;
        let g = ((c / dist.step).round() as usize).min(dist.len() - 1);
        t.push(vec![
            c.into(),
            dist.pdf(g).into(),
            dist.cdf_at(c).into(),
            dist.total_delay_cdf(c).into(),
        ]);
    }
    Ok(t)
}

fn sim(
    qos: &QosArgs,
    packets: u64,
    seed: u64,
    warmup: f64,
    cdf_step_ms: Option<f64>,
) -> eeqos::Result<Table> {
    let p = qos.profile()?;
    let opt = EfficiencyModel::exponential(qos.packet_bits)?.optimum()?;
    let q = p.equilibrium_queue(&opt);
    let config = SimConfig {
        warmup_fraction: warmup,
        ..SimConfig::new(&q, packets, seed)
    };
    let r = simulate(&config)?;
    let base = |t: Table| {
        t.param("rate_kbps", qos.rate_kbps)
            .param("delay_ms", qos.delay_ms)
            .param("M", qos.packet_bits)
            .param("packets", packets)
            .param("seed", seed)
            .param("warmup", warmup)
    };
    if let Some(step) = cdf_step_ms {
        if !(step > 0.0) {
            return Err(Error::Domain("step must be positive".into()));
        }
        let n = (6.0 * p.delay_bound() / (step * 1e-3)).round() as usize;
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 * step * 1e-3).collect();
        let cdf = empirical_cdf(&r, &grid)?;
        let mut t = base(Table::new(&["t_s", "cdf"]));
        for (x, c) in grid.iter().zip(cdf) {
            t.push(vec![(*x).into(), c.into()]);
        }
        return Ok(t);
    }
    let (s, w) = (service_moments(&q), queue_moments(&q)?);
    let mut t = base(Table::new(&[
        "metric",
        "simulated",
        "half_width",
        "analytic",
    ]));
    let rows = [
        (
            "total_delay_mean",
            r.total_delay.mean,
            r.total_delay.half_width,
            w.mean + s.mean,
        ),
        (
            "queueing_delay_mean",
            r.queueing_delay.mean,
            r.queueing_delay.half_width,
            w.mean,
        ),
        ("queueing_delay_std", r.queueing_delay.std, f64::NAN, w.std),
        ("service_mean", r.service.mean, r.service.half_width, s.mean),
        ("service_std", r.service.std, f64::NAN, s.std),
        (
            "mean_in_system",
            r.mean_in_system,
            f64::NAN,
            q.arrival_rate * (w.mean + s.mean),
        ),
    ];
    for (name, sim, hw, exact) in rows {
        t.push(vec![name.into(), sim.into(), hw.into(), exact.into()]);
    }
    Ok(t)
}

fn reproduce_figure(figure: &str, qos: &[String]) -> eeqos::Result<Table> {
    let figure: Figure = figure.parse()?;
    if qos.is_empty() {
        return reproduce::reproduce(figure);
    }
    if figure != Figure::Fig2 {
        return Err(Error::Domain("--qos applies to fig2 only".into()));
    }
    let pairs = qos
        .iter()
        .map(|s| {
            let (r, d) = s
                .split_once(':')
                .ok_or_else(|| Error::Domain(format!("expected rate_kbps:delay_ms, got `{s}`")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Domain(format!("`{x}` is not a number")))
            };
            Ok((parse(r)? * 1e3, parse(d)? * 1e-3))
        })
        .collect::<eeqos::Result<Vec<_>>>()?;
    reproduce::fig2_pairs(&pairs)
}
