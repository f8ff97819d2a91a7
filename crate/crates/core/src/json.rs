//! Compact JSON with every `f64` written to 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// `x` in scientific notation with 17 significant digits; round-trips every finite double.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SigDigitsFormatter;

impl Formatter for SigDigitsFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_writer<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> serde_json::Result<()> {
    let mut ser = Serializer::with_formatter(writer, SigDigitsFormatter);
    value.serialize(&mut ser)
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    to_writer(&mut out, value).expect("serializing to memory");
    String::from_utf8(out).expect("JSON is UTF-8")
}
