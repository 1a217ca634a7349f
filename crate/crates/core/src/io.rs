//! Text formats: 17-digit floats, CSV tables, JSON reports and short spec strings.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::Value;

use crate::dspace::ZonalDensity;
use crate::error::{Result, ZonalError};
use crate::geometry::ConvexBody;
use crate::special::canonical_exponent;
use crate::transforms::ConeProfile;

/// `x` with 17 significant digits in scientific notation; `NaN`/`inf` spelled out.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// JSON formatter that prints every float with 17 significant digits.
struct Fmt17<F>(F);

impl<F: Formatter> Formatter for Fmt17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt17(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn json_with<T: Serialize, F: Formatter>(v: &T, f: F) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fmt17(f));
    v.serialize(&mut ser)?;
    String::from_utf8(buf).map_err(|e| ZonalError::Io(e.to_string()))
}

/// Pretty JSON with 17-digit floats.
pub fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    json_with(&v, PrettyFormatter::new())
}

/// Single-line JSON with 17-digit floats.
pub fn to_json_line<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    json_with(&v, CompactFormatter)
}

/// Column table of floats with a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ZonalError::Validation(format!("CSV has no column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|&x| fmt17(x)))?;
        }
        let bytes = w.into_inner().map_err(|e| ZonalError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| ZonalError::Io(e.to_string()))
    }

    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|x| x.parse::<f64>().map_err(|_| ZonalError::Validation(format!("not a number in CSV: '{x}'"))))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != header.len() {
                return Err(ZonalError::Validation("CSV row length differs from header".into()));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv(fs::File::open(path)?)
    }
}

/// Profile table `(s, u)`; the rows `s = ±1` are mandatory and give the endpoint values.
pub fn profile_from_table(t: &Table) -> Result<ConeProfile> {
    let s = t.column("s")?;
    let u = t.column("u")?;
    let end = |sign: f64| {
        s.iter()
            .position(|&x| x == sign)
            .map(|k| u[k])
            .ok_or_else(|| ZonalError::Validation(format!("profile CSV lacks the endpoint row s = {sign}")))
    };
    let ends = (end(-1.0)?, end(1.0)?);
    let (si, ui): (Vec<f64>, Vec<f64>) = s.iter().zip(&u).filter(|(x, _)| x.abs() < 1.0).map(|(a, b)| (*a, *b)).unzip();
    ConeProfile::sampled(&si, &ui, ends, None)
}

/// Table of `(s, u(s))` on the given interior nodes plus the endpoint rows.
pub fn profile_to_table(u: &ConeProfile, s: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["s", "u"]);
    t.push(vec![-1.0, u.endpoint(-1.0)?]);
    for &x in s {
        t.push(vec![x, u.u(x)?]);
    }
    t.push(vec![1.0, u.endpoint(1.0)?]);
    Ok(t)
}

/// Valuation table rows `(body JSON, value)`.
pub fn read_valuation_table<R: Read>(r: R) -> Result<Vec<(ConvexBody, f64)>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(ZonalError::Validation("valuation table rows are (body, value)".into()));
        }
        let body: ConvexBody = serde_json::from_str(&rec[0])?;
        let v = rec[1].parse::<f64>().map_err(|_| ZonalError::Validation(format!("not a number: '{}'", &rec[1])))?;
        out.push((body, v));
    }
    Ok(out)
}

pub fn write_valuation_table(rows: &[(ConvexBody, f64)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["body", "value"])?;
    for (b, v) in rows {
        w.write_record([to_json_line(b)?, fmt17(*v)])?;
    }
    let bytes = w.into_inner().map_err(|e| ZonalError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ZonalError::Io(e.to_string()))
}

fn number(x: &str) -> Result<f64> {
    x.trim().parse::<f64>().map_err(|_| ZonalError::Validation(format!("not a number: '{x}'")))
}

fn numbers(x: &str) -> Result<Vec<f64>> {
    let x = x.trim().trim_start_matches('[').trim_end_matches(']');
    if x.trim().is_empty() {
        return Ok(vec![]);
    }
    x.split(',').map(number).collect()
}

/// Reads `@path` or a plain existing path, else returns the text itself.
fn inline_or_file(spec: &str) -> Result<String> {
    if let Some(p) = spec.strip_prefix('@') {
        return Ok(fs::read_to_string(p)?);
    }
    if !spec.trim_start().starts_with('{') && !spec.contains(':') && Path::new(spec).is_file() {
        return Ok(fs::read_to_string(spec)?);
    }
    Ok(spec.to_string())
}

/// Density from `power:β`, `poly:[c0,c1,...]`, `const:c`, `linear:c`, JSON or a JSON file.
/// The exponent defaults to `(n - j - 1) / 2`; `a=<value>;` in front overrides it.
pub fn parse_density(spec: &str, n: usize, j: usize) -> Result<ZonalDensity> {
    let text = inline_or_file(spec)?;
    let text = text.trim();
    let mut a = canonical_exponent(n, j);
    if text.starts_with('{') {
        let mut v: Value = serde_json::from_str(text)?;
        if let Value::Object(m) = &mut v {
            m.entry("a").or_insert(Value::from(a));
        }
        return Ok(serde_json::from_value(v)?);
    }
    let mut body = text;
    if let Some(rest) = text.strip_prefix("a=") {
        let (val, tail) =
            rest.split_once(';').ok_or_else(|| ZonalError::Validation("expected 'a=<value>;<density>'".into()))?;
        a = number(val)?;
        body = tail.trim();
    }
    let (kind, arg) = body.split_once(':').unwrap_or((body, ""));
    match kind {
        "power" => ZonalDensity::power(a, number(arg)?),
        "poly" => ZonalDensity::poly(a, numbers(arg)?),
        "const" => ZonalDensity::constant(a, if arg.is_empty() { 1.0 } else { number(arg)? }),
        "one" => ZonalDensity::constant(a, 1.0),
        "linear" => ZonalDensity::linear(a, if arg.is_empty() { 1.0 } else { number(arg)? }),
        _ => Err(ZonalError::Validation(format!("unknown density spec '{spec}'"))),
    }
}

/// Body from `cone:h`, `ball:r`, `disk:r`, `cylinder:r,L`, `frustum:r0,r1,L`, `cube`,
/// `revolution:[z0,r0,z1,r1,...]`, JSON or a JSON file; JSON may omit `n`.
pub fn parse_body(spec: &str, n: usize) -> Result<ConvexBody> {
    let text = inline_or_file(spec)?;
    let text = text.trim();
    if text.starts_with('{') {
        let mut v: Value = serde_json::from_str(text)?;
        if let Value::Object(m) = &mut v {
            m.entry("n").or_insert(Value::from(n));
        }
        let b: ConvexBody = serde_json::from_value(v)?;
        if b.n() != n {
            return Err(ZonalError::Validation(format!("body lives in R^{}, expected R^{n}", b.n())));
        }
        return Ok(b);
    }
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    let v = numbers(arg)?;
    let want = |k: usize| -> Result<()> {
        if v.len() == k {
            Ok(())
        } else {
            Err(ZonalError::Validation(format!("body spec '{kind}' takes {k} number(s), got {}", v.len())))
        }
    };
    match kind {
        "cone" => {
            want(1)?;
            ConvexBody::cone(n, v[0])
        }
        "ball" => {
            want(1)?;
            ConvexBody::ball(n, v[0])
        }
        "disk" => {
            want(1)?;
            ConvexBody::disk(n, v[0])
        }
        "cylinder" => {
            want(2)?;
            ConvexBody::cylinder(n, v[0], v[1])
        }
        "frustum" => {
            want(3)?;
            ConvexBody::frustum(n, v[0], v[1], v[2])
        }
        "cube" => {
            want(0)?;
            ConvexBody::cube(n)
        }
        "revolution" => {
            if v.len() < 4 || v.len() % 2 != 0 {
                return Err(ZonalError::Validation("revolution spec takes pairs z,r".into()));
            }
            ConvexBody::revolution(n, v.chunks(2).map(|c| [c[0], c[1]]).collect())
        }
        _ => Err(ZonalError::Validation(format!("unknown body spec '{spec}'"))),
    }
}
