// SPDX-License-Identifier: Apache-2.0

//! Text output helpers. Every float is written with 17 significant digits
//! so that it parses back to the identical `f64`.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

/// `x` with 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Default)]
struct Exact<F>(F);

macro_rules! forward_f64 {
    ($fmt:ty) => {
        impl Formatter for Exact<$fmt> {
            fn write_f64<W: ?Sized + io::Write>(
                &mut self,
                writer: &mut W,
                value: f64,
            ) -> io::Result<()> {
                writer.write_all(fmt_f64(value).as_bytes())
            }
            fn write_f32<W: ?Sized + io::Write>(
                &mut self,
                writer: &mut W,
                value: f32,
            ) -> io::Result<()> {
                writer.write_all(fmt_f64(value as f64).as_bytes())
            }
            fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.begin_array(w)
            }
            fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.end_array(w)
            }
            fn begin_array_value<W: ?Sized + io::Write>(
                &mut self,
                w: &mut W,
                first: bool,
            ) -> io::Result<()> {
                self.0.begin_array_value(w, first)
            }
            fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.end_array_value(w)
            }
            fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.begin_object(w)
            }
            fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.end_object(w)
            }
            fn begin_object_key<W: ?Sized + io::Write>(
                &mut self,
                w: &mut W,
                first: bool,
            ) -> io::Result<()> {
                self.0.begin_object_key(w, first)
            }
            fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.begin_object_value(w)
            }
            fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.end_object_value(w)
            }
        }
    };
}

forward_f64!(CompactFormatter);
forward_f64!(PrettyFormatter<'static>);

/// Compact JSON with 17-significant-digit floats.
pub fn to_json(value: &impl Serialize) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact(CompactFormatter));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Indented JSON with 17-significant-digit floats.
pub fn to_json_pretty(value: &impl Serialize) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}
