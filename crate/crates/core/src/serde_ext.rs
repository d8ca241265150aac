//! JSON has no infinity, so extended reals are written as numbers when finite
//! and as the strings `"inf"` / `"-inf"` otherwise.

use serde::{Deserialize, Deserializer, Serializer};

pub mod ext_real {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not a real: {other:?}"))),
            },
        }
    }
}

pub mod ext_real_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct W<'a>(#[serde(with = "super::ext_real")] &'a f64);
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&W(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "super::ext_real")] f64);
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct T {
        #[serde(with = "super::ext_real")]
        a: f64,
        #[serde(with = "super::ext_real_vec")]
        b: Vec<f64>,
    }

    #[test]
    fn infinity_round_trips() {
        let t = T {
            a: f64::INFINITY,
            b: vec![0.5, f64::INFINITY],
        };
        let text = serde_json::to_string(&t).unwrap();
        assert_eq!(text, r#"{"a":"inf","b":[0.5,"inf"]}"#);
        assert_eq!(serde_json::from_str::<T>(&text).unwrap(), t);
    }
}
