//! Text renderings and JSON helpers for reports. Non-finite bounds are
//! written as the strings `"inf"`, `"-inf"` and `"nan"`.

use std::fmt;

use super::attack::AttackResult;
use super::verify::VerificationReport;

pub(crate) mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

pub(crate) mod opt_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::float::serialize(x, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::float")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>5} {:>6} {:>7} {:>14} {:>10} {:>8}", "block", "output", "feature", "bound", "status", "nodes")?;
        for (k, r) in self.features() {
            writeln!(
                f,
                "{:>5} {:>6} {:>7} {:>14.6e} {:>10} {:>8}",
                k, r.output, r.feature, r.bound, r.status, r.nodes
            )?;
        }
        writeln!(f, "U_alpha = {:.6e}", self.u_alpha)?;
        write!(
            f,
            "{} ({:.3}s, {} threads)",
            self.status, self.metadata.wall_time_secs, self.metadata.threads
        )
    }
}

impl fmt::Display for AttackResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.x_adv, self.f_adv) {
            (Some(x), Some(fa)) if self.found => write!(
                f,
                "attack found: f(x)={:.6e} f(x_adv)={fa:.6e} x_adv={x:?}",
                self.f_x
            ),
            _ if self.proven => write!(f, "no attack (proven, f(x)={:.6e})", self.f_x),
            _ => write!(f, "no attack found (unproven absence, f(x)={:.6e})", self.f_x),
        }
    }
}
