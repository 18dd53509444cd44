//! JSON has no infinities. Non-finite floats are written as the strings
//! `"inf"`, `"-inf"` and `"NaN"` and read back from either form.

use serde::{Deserialize, Deserializer, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Num(f64),
    Text(String),
}

fn decode<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
    match r {
        Repr::Num(x) => Ok(x),
        Repr::Text(s) => s
            .parse::<f64>()
            .map_err(|_| E::custom(format!("expected a number, got `{s}`"))),
    }
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&x.to_string())
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    decode(Repr::deserialize(d)?)
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => super::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(decode).transpose()
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct Row {
        #[serde(with = "super")]
        x: f64,
        #[serde(with = "super::option", default)]
        y: Option<f64>,
    }

    #[test]
    fn round_trips_non_finite_values() {
        for x in [f64::INFINITY, f64::NEG_INFINITY, 0.1, -3e300] {
            let row = Row { x, y: Some(x) };
            let json = serde_json::to_string(&row).unwrap();
            assert_eq!(serde_json::from_str::<Row>(&json).unwrap(), row);
        }
        let json = serde_json::to_string(&Row { x: 1.0, y: None }).unwrap();
        assert_eq!(json, r#"{"x":1.0,"y":null}"#);
        let nan: Row = serde_json::from_str(r#"{"x":"NaN"}"#).unwrap();
        assert!(nan.x.is_nan() && nan.y.is_none());
    }
}
