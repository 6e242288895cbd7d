//! Stable number formatting for machine and human output.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use serde_json::{Number, Value};

/// `%.12e`-style rendering with twelve significant digits and a signed,
/// at-least-two-digit exponent: `2.50000000000e-01`. Non-finite values
/// become `inf`, `-inf` and `nan`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // no negative zero in output
    let x = if x == 0.0 { 0.0 } else { x };
    let raw = format!("{x:.11e}");
    let (mantissa, exp) = raw.split_once('e').expect("exponent formatting always has an `e`");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Rounded to six significant digits, shortest form: `0.25`, `1.5e-7`;
/// exponent notation outside `[1e-4, 1e6)`.
pub fn human(x: f64) -> String {
    if !x.is_finite() {
        return sci(x);
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("round trip of a formatted float");
    if rounded == 0.0 {
        return "0".into();
    }
    if rounded.abs() < 1e-4 || rounded.abs() >= 1e6 {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// JSON number for `x`; non-finite values become strings. Reals are
/// rendered with [`sci`] by [`to_json`].
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(sci(x));
    }
    Value::Number(Number::from_f64(if x == 0.0 { 0.0 } else { x }).expect("finite"))
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

/// Pretty JSON text with every real in [`sci`] form and integers as is.
pub fn to_json(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing a Value into memory cannot fail");
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

struct SciFormatter(PrettyFormatter<'static>);

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sci(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value.into())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}
