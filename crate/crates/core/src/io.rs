//! Snapshot and report serialization.
//!
//! Binary frame layout (little endian):
//!
//! | offset | size | content                         |
//! |--------|------|---------------------------------|
//! | 0      | 4    | magic `ZKF1`                    |
//! | 4      | 4    | `nx` (u32)                      |
//! | 8      | 4    | `ny` (u32)                      |
//! | 12     | 1    | dtype, `1` = f64                |
//! | 13     | 3    | zero padding                    |
//! | 16     | 8    | `t` (f64)                       |
//! | 24     | 8·nx·ny | `u[i·ny + j]`, row-major in `x` |

use std::collections::BTreeSet;
use std::io::{BufRead, Read, Write};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::operators::{Field2D, GridSpec};
use crate::solver::Snapshot;

pub const FRAME_MAGIC: [u8; 4] = *b"ZKF1";
pub const DTYPE_F64: u8 = 1;
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), v);
    s.parse().unwrap_or(v)
}

/// Serializes `value` to JSON with every float rounded to 12 significant
/// digits; non-finite floats become `null`.
pub fn to_rounded_json<T: Serialize + ?Sized>(value: &T) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v);
    Ok(v)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            *v = serde_json::Number::from_f64(round_sig(x, SIGNIFICANT_DIGITS))
                .map(Value::Number)
                .unwrap_or(Value::Null);
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty, rounded JSON document with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, &to_rounded_json(value)?)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// One rounded JSON object per line.
pub fn write_json_lines<W: Write, T: Serialize>(mut w: W, items: impl IntoIterator<Item = T>) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, &to_rounded_json(&item)?)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Snapshots as CSV rows `t, x, y, u`.
pub fn write_snapshots_csv<W: Write>(w: W, grid: &GridSpec, snapshots: &[Snapshot]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "x", "y", "u"])?;
    let ys = grid.basis().nodes();
    for s in snapshots {
        for i in 0..s.u.nx() {
            let x = grid.x(i);
            for (j, &y) in ys.iter().enumerate() {
                wr.serialize((
                    round_sig(s.t, SIGNIFICANT_DIGITS),
                    round_sig(x, SIGNIFICANT_DIGITS),
                    round_sig(y, SIGNIFICANT_DIGITS),
                    round_sig(s.u.get(i, j), SIGNIFICANT_DIGITS),
                ))?;
            }
        }
    }
    wr.flush()?;
    Ok(())
}

/// Nodal samples read from CSV with columns `x, y, u` (a `t` column is
/// allowed and ignored), on a tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub field: Field2D,
}

pub fn read_field_csv<R: Read>(r: R) -> Result<SampledField> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("CSV lacks a `{name}` column")))
    };
    let (cx, cy, cu) = (col("x")?, col("y")?, col("u")?);
    let mut rows = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let get = |c: usize| -> Result<f64> {
            rec.get(c)
                .unwrap_or("")
                .parse()
                .map_err(|_| Error::Input(format!("row {}: column {} is not a number", k + 2, c + 1)))
        };
        rows.push((get(cx)?, get(cy)?, get(cu)?));
    }
    let key = |v: f64| (v * 1e9).round() as i64;
    let xs: BTreeSet<i64> = rows.iter().map(|r| key(r.0)).collect();
    let ys: BTreeSet<i64> = rows.iter().map(|r| key(r.1)).collect();
    let xs: Vec<i64> = xs.into_iter().collect();
    let ys: Vec<i64> = ys.into_iter().collect();
    let (nx, ny) = (xs.len(), ys.len());
    if rows.len() != nx * ny {
        return Err(Error::Input(format!(
            "{} rows do not form a tensor grid of {nx} x {ny} points",
            rows.len()
        )));
    }
    let mut field = Field2D::zeros(nx, ny);
    let mut seen = vec![false; nx * ny];
    for (x, y, u) in rows {
        let i = xs.binary_search(&key(x)).expect("collected above");
        let j = ys.binary_search(&key(y)).expect("collected above");
        if seen[i * ny + j] {
            return Err(Error::Input(format!("duplicate sample at x = {x}, y = {y}")));
        }
        seen[i * ny + j] = true;
        field.set(i, j, u);
    }
    Ok(SampledField {
        xs: xs.iter().map(|&k| k as f64 * 1e-9).collect(),
        ys: ys.iter().map(|&k| k as f64 * 1e-9).collect(),
        field,
    })
}

pub fn write_frame<W: Write>(mut w: W, t: f64, u: &Field2D) -> Result<()> {
    let dim = |n: usize| {
        u32::try_from(n).map_err(|_| Error::Input(format!("dimension {n} does not fit a frame header")))
    };
    w.write_all(&FRAME_MAGIC)?;
    w.write_all(&dim(u.nx())?.to_le_bytes())?;
    w.write_all(&dim(u.ny())?.to_le_bytes())?;
    w.write_all(&[DTYPE_F64, 0, 0, 0])?;
    w.write_all(&t.to_le_bytes())?;
    for v in u.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads one frame; `Ok(None)` at a clean end of stream.
pub fn read_frame<R: BufRead>(mut r: R) -> Result<Option<(f64, Field2D)>> {
    if r.fill_buf()?.is_empty() {
        return Ok(None);
    }
    let mut head = [0u8; 24];
    r.read_exact(&mut head)?;
    if head[0..4] != FRAME_MAGIC {
        return Err(Error::Input("bad frame magic".into()));
    }
    let nx = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes")) as usize;
    let ny = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    if head[12] != DTYPE_F64 {
        return Err(Error::Input(format!("unsupported frame dtype {}", head[12])));
    }
    let t = f64::from_le_bytes(head[16..24].try_into().expect("8 bytes"));
    let mut buf = vec![0u8; 8 * nx * ny];
    r.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Some((t, Field2D::from_vec(nx, ny, data)?)))
}
