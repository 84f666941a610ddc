use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Maturation of juveniles: at a finite rate, or instantaneously (the
/// classical contact process).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Maturation {
    Rate(f64),
    Instant,
}

impl Serialize for Maturation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Maturation::Rate(g) => s.serialize_f64(*g),
            Maturation::Instant => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Maturation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(g) if g.is_infinite() && g > 0.0 => Ok(Maturation::Instant),
            Repr::Num(g) => Ok(Maturation::Rate(g)),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for Maturation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "contact" => Ok(Maturation::Instant),
            other => other
                .parse::<f64>()
                .map(Maturation::Rate)
                .map_err(|e| Error::Parse(format!("gamma {s:?}: {e}"))),
        }
    }
}

impl fmt::Display for Maturation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Maturation::Rate(g) => write!(f, "{g}"),
            Maturation::Instant => f.write_str("inf"),
        }
    }
}

/// Transmission rate per directed edge, maturation, and the extra juvenile
/// death rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    pub gamma: Maturation,
    pub delta: f64,
}

impl Params {
    pub fn new(lambda: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self {
            lambda,
            gamma: Maturation::Rate(gamma),
            delta,
        }
        .validated()
    }

    /// The `gamma = infinity` dynamics: births are mature immediately.
    pub fn contact(lambda: f64, delta: f64) -> Result<Self> {
        Self {
            lambda,
            gamma: Maturation::Instant,
            delta,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Param(format!("{name} must be finite and nonnegative, got {v}")))
            }
        };
        check("lambda", self.lambda)?;
        check("delta", self.delta)?;
        if let Maturation::Rate(g) = self.gamma {
            check("gamma", g)?;
        }
        Ok(self)
    }

    pub fn contact_mode(&self) -> bool {
        matches!(self.gamma, Maturation::Instant)
    }

    /// Finite maturation rate; zero in contact mode, where no maturation
    /// events are needed.
    pub fn gamma_rate(&self) -> f64 {
        match self.gamma {
            Maturation::Rate(g) => g,
            Maturation::Instant => 0.0,
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lambda={} gamma={} delta={}", self.lambda, self.gamma, self.delta)
    }
}

/// Which of the two processes is being run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// The two-stage contact process.
    #[default]
    Forward,
    /// The on-off process.
    Dual,
}
