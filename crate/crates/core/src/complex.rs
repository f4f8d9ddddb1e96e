//! Complex scalar literals (`0.35+0.35i`, `-2j`, `0.5`) used by config files.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Parses a finite complex literal. Accepts a plain real (`0.5`), a pure
/// imaginary (`-0.25i`, `i`), or `re±imi`; `j` is accepted in place of `i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let err = || Error::ComplexParse(text.to_owned());
    let s = text.trim();
    if s.is_empty() || !s.is_ascii() {
        return Err(err());
    }
    let value = match s.strip_suffix(['i', 'j']) {
        None => Complex64::new(parse_real(s).ok_or_else(err)?, 0.0),
        Some(body) => {
            // Split at the last sign that is not a leading sign or an exponent sign.
            let bytes = body.as_bytes();
            let split = (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
            match split {
                Some(k) => Complex64::new(parse_real(&body[..k]).ok_or_else(err)?, parse_imag(&body[k..]).ok_or_else(err)?),
                None => Complex64::new(0.0, parse_imag(body).ok_or_else(err)?),
            }
        }
    };
    Ok(value)
}

fn parse_real(s: &str) -> Option<f64> {
    // f64::from_str accepts "inf" and "NaN"; those are not literals here.
    if !s.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-')) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_imag(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => parse_real(s),
    }
}

/// Formats so that [`parse_complex`] returns the identical value.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Serde adapter: reals serialize as JSON numbers, everything else as a
/// complex literal string. Either form is accepted on input.
pub mod serde_scalar {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(z: &Complex64, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if z.im == 0.0 {
            z.re.serialize(ser)
        } else {
            format_complex(*z).serialize(ser)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Complex64, D::Error> {
        match Repr::deserialize(de)? {
            Repr::Number(re) => Ok(Complex64::new(re, 0.0)),
            Repr::Text(s) => parse_complex(&s).map_err(serde::de::Error::custom),
        }
    }

    pub mod vec {
        use super::*;

        #[derive(Serialize, Deserialize)]
        #[serde(transparent)]
        struct Wrapped(#[serde(with = "super")] Complex64);

        pub fn serialize<S: Serializer>(v: &[Complex64], ser: S) -> std::result::Result<S::Ok, S::Error> {
            v.iter().map(|&z| Wrapped(z)).collect::<Vec<_>>().serialize(ser)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<Vec<Complex64>, D::Error> {
            Ok(Vec::<Wrapped>::deserialize(de)?.into_iter().map(|w| w.0).collect())
        }
    }
}
