//! Canonical JSON output.
//!
//! Floats are written with 17 significant digits, trailing zeros dropped,
//! so every value reads back to the same bits. Non-finite floats become
//! `null`. Field order is declaration order, which keeps output stable.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// 17 significant digits; positional for exponents in `-5..17`, otherwise
/// scientific.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let sign = if x < 0.0 { "-" } else { "" };
    let len = digits.len() as i32;
    let body = if (-5..17).contains(&exp) {
        if exp >= 0 {
            if len - 1 <= exp {
                format!("{digits}{}.0", "0".repeat((exp - (len - 1)) as usize))
            } else {
                let (int, frac) = digits.split_at(exp as usize + 1);
                format!("{int}.{frac}")
            }
        } else {
            format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
        }
    } else if len == 1 {
        format!("{digits}e{exp}")
    } else {
        format!("{}.{}e{exp}", &digits[..1], &digits[1..])
    };
    format!("{sign}{body}")
}

/// Two-space indented JSON with [`format_f64`] floats.
struct CanonicalFormatter<'a> {
    pretty: PrettyFormatter<'a>,
}

impl Formatter for CanonicalFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// Serializes `value` canonically, with a trailing newline.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let fmt = CanonicalFormatter {
        pretty: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    value.serialize(&mut ser).expect("report types serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn float_forms() {
        assert_eq!(format_f64(0.01), "0.01");
        assert_eq!(format_f64(1.0), "1.0");
        assert_eq!(format_f64(-250.0), "-250.0");
        assert_eq!(format_f64(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(format_f64(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_f64(0.5f64.powi(30)), "9.3132257461547852e-10");
        assert_eq!(format_f64(1e30), "1e30");
        assert_eq!(format_f64(1.5e20), "1.5e20");
        assert_eq!(format_f64(f64::NAN), "null");
        assert_eq!(format_f64(f64::INFINITY), "null");
        assert_eq!(format_f64(0.0), "0.0");
    }

    #[test]
    fn empty_suite_document() {
        let doc = json!({"checks": [], "pass": true});
        assert_eq!(to_canonical_json(&doc), "{\n  \"checks\": [],\n  \"pass\": true\n}\n");
    }

    #[test]
    fn non_finite_becomes_null() {
        #[derive(Serialize)]
        struct R {
            a: f64,
            b: Vec<f64>,
        }
        let s = to_canonical_json(&R {
            a: f64::NEG_INFINITY,
            b: vec![1.25, f64::NAN],
        });
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v, json!({"a": null, "b": [1.25, null]}));
    }

    proptest! {
        #[test]
        fn floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = format_f64(x);
            let back: f64 = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, x);
        }
    }
}
