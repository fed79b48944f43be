//! TOML scenario files.
//!
//! ```toml
//! [efficiency]
//! model = "exponential"
//! packet_size = "100 bits"
//!
//! [network]
//! bandwidth = "5 MHz"
//! noise_power = "1e-13 W"
//! max_power = "1 W"          # optional
//!
//! [[users]]
//! source_rate = "50 kbps"
//! delay_bound = "50 ms"
//! gain = 1e-10               # or "-100 dB"
//! count = 13                 # optional, default 1
//!
//! [experiment]               # optional
//! policy = "max-utility-exact"
//!
//! [output]                   # optional
//! format = "csv"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::admission::{AdmissionRequest, Policy};
use crate::efficiency::EfficiencyModel;
use crate::equilibrium::{NetworkScenario, User};
use crate::error::{Error, Result};
use crate::qos::QosProfile;
use crate::units::{Bits, Duration, Frequency, Gain, Power, Rate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub efficiency: EfficiencySection,
    pub network: NetworkSection,
    #[serde(default)]
    pub users: Vec<UserSpec>,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelForm {
    /// `f(γ) = (1 - e^{-γ})^M`
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencySection {
    pub model: ModelForm,
    pub packet_size: Bits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub bandwidth: Frequency,
    pub noise_power: Power,
    #[serde(default)]
    pub max_power: Option<Power>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    pub source_rate: Rate,
    pub delay_bound: Duration,
    pub gain: Gain,
    #[serde(default = "one")]
    pub count: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub policy: Option<Policy>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl ScenarioFile {
    /// Parses a scenario; errors carry `line:column` of the offending key.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let (line, col) = line_col(text, s.start);
                    format!("{line}:{col}: ")
                })
                .unwrap_or_default();
            let msg = e.message().split_whitespace().collect::<Vec<_>>().join(" ");
            Error::Scenario(format!("{at}{msg}"))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn model(&self) -> Result<EfficiencyModel> {
        let bits = self.efficiency.packet_size.si();
        if bits.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&bits) {
            return Err(Error::Scenario(format!(
                "packet size must be a positive whole number of bits, got {bits}"
            )));
        }
        match self.efficiency.model {
            ModelForm::Exponential => EfficiencyModel::exponential(bits as u32),
        }
    }

    /// Users with `count` expanded, in file order.
    pub fn users(&self) -> Result<Vec<User>> {
        if self.users.is_empty() {
            return Err(Error::Scenario("no users listed".into()));
        }
        let m = self.model()?.packet_size();
        let mut out = Vec::new();
        for spec in &self.users {
            let profile = QosProfile::new(spec.source_rate.si(), spec.delay_bound.si(), m)?;
            let user = User::new(profile, spec.gain.0)?;
            out.extend(std::iter::repeat_n(user, spec.count as usize));
        }
        if out.is_empty() {
            return Err(Error::Scenario("every user entry has count 0".into()));
        }
        Ok(out)
    }

    pub fn network(&self) -> Result<NetworkScenario> {
        let net = NetworkScenario::new(
            self.network.bandwidth.si(),
            self.network.noise_power.si(),
            self.users()?,
        )?;
        match self.network.max_power {
            Some(p) => net.with_max_power(p.si()),
            None => Ok(net),
        }
    }

    pub fn admission_request(&self, default_policy: Policy) -> Result<AdmissionRequest> {
        Ok(AdmissionRequest {
            candidates: self.users()?,
            bandwidth: self.network.bandwidth.si(),
            noise_power: self.network.noise_power.si(),
            policy: self.experiment.policy.unwrap_or(default_policy),
        })
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}
