//! Physical quantities written as `"<number> <unit>"` strings.
//!
//! Every dimensioned value in a scenario file carries its unit; the parsed
//! value is stored in SI (bits/s, seconds, hertz, watts, bits).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

macro_rules! quantity {
    ($name:ident, $what:literal, $si:literal, [$($unit:literal => $scale:expr),* $(,)?]) => {
        #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(pub f64);

        impl $name {
            pub const UNITS: &'static [&'static str] = &[$($unit),*];

            pub fn si(self) -> f64 {
                self.0
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                let (value, unit) = split(s, $what)?;
                let scale: Option<&dyn Fn(f64) -> f64> = match unit {
                    $($unit => Some(&$scale),)*
                    _ => None,
                };
                match scale {
                    Some(to_si) => Ok($name(to_si(value))),
                    None => Err(format!(
                        "unknown {} unit `{unit}` (expected one of {})",
                        $what,
                        Self::UNITS.join(", ")
                    )),
                }
            }
        }

        impl TryFrom<String> for $name {
            type Error = String;

            fn try_from(s: String) -> Result<Self, String> {
                s.parse()
            }
        }

        impl From<$name> for String {
            fn from(q: $name) -> String {
                q.to_string()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $si)
            }
        }
    };
}

fn split<'a>(s: &'a str, what: &str) -> Result<(f64, &'a str), String> {
    let s = s.trim();
    let cut = s
        .find(|c: char| c.is_whitespace() || (c.is_alphabetic() && c != 'e' && c != 'E'))
        .ok_or_else(|| format!("{what} `{s}` has no unit"))?;
    let (num, unit) = s.split_at(cut);
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(format!("{what} `{s}` has no unit"));
    }
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("{what} `{s}`: `{}` is not a number", num.trim()))?;
    if !value.is_finite() {
        return Err(format!("{what} `{s}` is not finite"));
    }
    Ok((value, unit))
}

quantity!(Rate, "rate", "bps", [
    "bps" => |v| v,
    "kbps" => |v| v * 1e3,
    "Mbps" => |v| v * 1e6,
]);

quantity!(Duration, "duration", "s", [
    "s" => |v| v,
    "ms" => |v| v * 1e-3,
    "us" => |v| v * 1e-6,
]);

quantity!(Frequency, "bandwidth", "Hz", [
    "Hz" => |v| v,
    "kHz" => |v| v * 1e3,
    "MHz" => |v| v * 1e6,
    "GHz" => |v| v * 1e9,
]);

quantity!(Power, "power", "W", [
    "W" => |v| v,
    "mW" => |v| v * 1e-3,
    "uW" => |v| v * 1e-6,
    "nW" => |v| v * 1e-9,
    "dBW" => |v| 10f64.powf(v / 10.0),
    "dBm" => |v| 10f64.powf(v / 10.0) * 1e-3,
]);

quantity!(Bits, "packet size", "bits", [
    "bits" => |v| v,
    "bytes" => |v| v * 8.0,
]);

/// A dimensionless power gain, given as a plain number or in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GainRepr", into = "f64")]
pub struct Gain(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum GainRepr {
    Linear(f64),
    Text(String),
}

impl TryFrom<GainRepr> for Gain {
    type Error = String;

    fn try_from(r: GainRepr) -> Result<Self, String> {
        match r {
            GainRepr::Linear(v) => Ok(Gain(v)),
            GainRepr::Text(s) => match split(&s, "gain")? {
                (v, "dB") => Ok(Gain(10f64.powf(v / 10.0))),
                (_, u) => Err(format!(
                    "unknown gain unit `{u}` (expected dB or a plain number)"
                )),
            },
        }
    }
}

impl From<Gain> for f64 {
    fn from(g: Gain) -> f64 {
        g.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_units() {
        assert_eq!("50 kbps".parse::<Rate>().unwrap().si(), 50e3);
        assert_eq!("50kbps".parse::<Rate>().unwrap().si(), 50e3);
        assert_eq!("50 ms".parse::<Duration>().unwrap().si(), 0.05);
        assert_eq!("5 MHz".parse::<Frequency>().unwrap().si(), 5e6);
        assert_eq!("1e-13 W".parse::<Power>().unwrap().si(), 1e-13);
        assert!(("30 dBm".parse::<Power>().unwrap().si() - 1.0).abs() < 1e-12);
        assert_eq!("100 bits".parse::<Bits>().unwrap().si(), 100.0);
    }

    #[test]
    fn missing_or_wrong_unit() {
        assert!("50".parse::<Rate>().is_err());
        assert!("50 ms".parse::<Rate>().is_err());
        assert!("fast kbps".parse::<Rate>().is_err());
        assert!("inf s".parse::<Duration>().is_err());
    }

    #[test]
    fn display_round_trips() {
        let r: Rate = "59.65 kbps".parse().unwrap();
        assert_eq!(r.to_string().parse::<Rate>().unwrap(), r);
    }
}
