//! Canonical text form of an [`Instance`].
//!
//! ```text
//! bundle-instance v1
//! n = 2
//! m = 1
//! reservation_kind = sqrt
//! alpha = 1.0000000000000000e0
//! u[0] = 4.0000000000000000e0 5.0000000000000000e0
//! c_unit = 0.0000000000000000e0 0.0000000000000000e0
//! c_serve = 0.0000000000000000e0
//! ```
//!
//! Values are written with 17 significant digits so parsing reproduces the
//! exact bits. Lines starting with `#` and blank lines are ignored.

use std::collections::HashMap;
use std::fmt::Write;

use super::{Instance, ReservationKind};
use crate::error::{Error, Result};

pub const INSTANCE_HEADER: &str = "bundle-instance v1";

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn fmt_row(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| fmt_f64(v))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "{INSTANCE_HEADER}").unwrap();
    writeln!(out, "n = {}", inst.n()).unwrap();
    writeln!(out, "m = {}", inst.m()).unwrap();
    writeln!(out, "reservation_kind = {}", inst.reservation_kind().tag()).unwrap();
    writeln!(out, "alpha = {}", fmt_row(inst.alpha())).unwrap();
    for (k, row) in inst.utility().iter().enumerate() {
        writeln!(out, "u[{k}] = {}", fmt_row(row)).unwrap();
    }
    writeln!(out, "c_unit = {}", fmt_row(inst.unit_cost())).unwrap();
    writeln!(out, "c_serve = {}", fmt_row(inst.serve_cost())).unwrap();
    out
}

pub(crate) fn parse_row(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::parse(line, format!("invalid number `{tok}`")))
        })
        .collect()
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, INSTANCE_HEADER)) => {}
        Some((line, other)) => {
            return Err(Error::parse(
                line,
                format!("expected header `{INSTANCE_HEADER}`, found `{other}`"),
            ))
        }
        None => return Err(Error::parse(1, "empty document")),
    }

    let mut fields: HashMap<String, (usize, String)> = HashMap::new();
    let mut last_line = 1;
    for (line, content) in lines {
        last_line = line;
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(line, "expected `key = value`"))?;
        let key = key.trim().to_string();
        if fields.contains_key(&key) {
            return Err(Error::parse(line, format!("duplicate field `{key}`")));
        }
        fields.insert(key, (line, value.trim().to_string()));
    }

    let mut take = |key: &str| {
        fields
            .remove(key)
            .ok_or_else(|| Error::parse(last_line, format!("missing field `{key}`")))
    };

    let (n_line, n_text) = take("n")?;
    let n: usize = n_text
        .parse()
        .map_err(|_| Error::parse(n_line, format!("invalid n `{n_text}`")))?;
    let (m_line, m_text) = take("m")?;
    let m: usize = m_text
        .parse()
        .map_err(|_| Error::parse(m_line, format!("invalid m `{m_text}`")))?;
    if n == 0 || m == 0 {
        return Err(Error::parse(n_line.min(m_line), "n and m must be positive"));
    }

    let (kind_line, kind_text) = take("reservation_kind")?;
    let kind = ReservationKind::from_tag(&kind_text).ok_or_else(|| {
        Error::parse(kind_line, format!("unknown reservation kind `{kind_text}`"))
    })?;

    let mut sized = |key: &str, len: usize| -> Result<Vec<f64>> {
        let (line, text) = take(key)?;
        let row = parse_row(line, &text)?;
        if row.len() != len {
            return Err(Error::parse(
                line,
                format!("`{key}` has {} entries, expected {len}", row.len()),
            ));
        }
        Ok(row)
    };

    let alpha = sized("alpha", m)?;
    let utility = (0..m)
        .map(|k| sized(&format!("u[{k}]"), n))
        .collect::<Result<Vec<_>>>()?;
    let unit_cost = sized("c_unit", n)?;
    let serve_cost = sized("c_serve", m)?;

    if let Some((key, (line, _))) = fields.into_iter().min_by_key(|(_, (l, _))| *l) {
        return Err(Error::parse(line, format!("unexpected field `{key}`")));
    }

    Instance::new(alpha, utility, unit_cost, serve_cost, kind)
        .map_err(|e| Error::parse(last_line, e.to_string()))
}
