//! Deterministic output formats.
//!
//! All floating point output goes through one formatter that prints 17
//! significant digits, enough to round-trip an f64 exactly, so repeated
//! runs produce byte-identical files. JSON objects keep insertion order.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::Error;
use crate::Result;

/// 17 significant digits; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    format!("{x:.16e}")
}

/// JSON tree with deterministic serialization.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn floats(xs: &[f64]) -> Json {
        Json::Array(xs.iter().map(|&x| Json::Float(x)).collect())
    }

    pub fn strs(xs: &[&str]) -> Json {
        Json::Array(xs.iter().map(|s| Json::Str(s.to_string())).collect())
    }

    fn escape(s: &str, out: &mut String) {
        out.push('"');
        for ch in s.chars() {
            match ch {
                '"' => out.push_str("\\\""),
                '\\' => out.push_str("\\\\"),
                '\n' => out.push_str("\\n"),
                '\r' => out.push_str("\\r"),
                '\t' => out.push_str("\\t"),
                c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
                c => out.push(c),
            }
        }
        out.push('"');
    }

    fn render(&self, indent: usize, out: &mut String) {
        const STEP: usize = 2;
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(v) => out.push_str(&v.to_string()),
            Json::Float(x) => {
                if x.is_finite() {
                    out.push_str(&fmt_f64(*x));
                } else {
                    // JSON has no literals for these; quote them.
                    Self::escape(&fmt_f64(*x), out);
                }
            }
            Json::Str(s) => Self::escape(s, out),
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                let inline = items
                    .iter()
                    .all(|i| matches!(i, Json::Float(_) | Json::Int(_) | Json::Bool(_)))
                    && items.len() <= 8;
                if inline {
                    out.push('[');
                    for (k, item) in items.iter().enumerate() {
                        if k > 0 {
                            out.push_str(", ");
                        }
                        item.render(indent, out);
                    }
                    out.push(']');
                } else {
                    out.push_str("[\n");
                    for (k, item) in items.iter().enumerate() {
                        out.push_str(&" ".repeat(indent + STEP));
                        item.render(indent + STEP, out);
                        if k + 1 < items.len() {
                            out.push(',');
                        }
                        out.push('\n');
                    }
                    out.push_str(&" ".repeat(indent));
                    out.push(']');
                }
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (k, (key, val)) in fields.iter().enumerate() {
                    out.push_str(&" ".repeat(indent + STEP));
                    Self::escape(key, out);
                    out.push_str(": ");
                    val.render(indent + STEP, out);
                    if k + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&" ".repeat(indent));
                out.push('}');
            }
        }
    }

    pub fn to_string_pretty(&self) -> String {
        let mut out = String::new();
        self.render(0, &mut out);
        out.push('\n');
        out
    }
}

/// Header line for trajectory CSV with `r` section coordinates and
/// `xi_dim` spin coordinates.
pub fn csv_header(r: usize, xi_dim: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for i in 1..=r {
        cols.push(format!("q_{i}"));
    }
    for i in 1..=r {
        cols.push(format!("p_{i}"));
    }
    for i in 1..=xi_dim {
        cols.push(format!("xi_{i}"));
    }
    cols.push("H".into());
    cols.push("casimir".into());
    cols.push("xi_k_norm".into());
    cols.join(",")
}

/// One CSV data row; column order must match `csv_header`.
pub fn csv_row(t: f64, q: &[f64], p: &[f64], xi: &[f64], h: f64, casimir: f64, xi_k_norm: f64) -> String {
    let mut cols = vec![fmt_f64(t)];
    cols.extend(q.iter().map(|&x| fmt_f64(x)));
    cols.extend(p.iter().map(|&x| fmt_f64(x)));
    cols.extend(xi.iter().map(|&x| fmt_f64(x)));
    cols.push(fmt_f64(h));
    cols.push(fmt_f64(casimir));
    cols.push(fmt_f64(xi_k_norm));
    cols.join(",")
}

const MATRIX_MAGIC: &[u8; 8] = b"POLARRED";

/// Writes a dense real matrix: 8-byte magic, u32 rows, u32 cols (little
/// endian), then row-major f64 entries.
pub fn write_matrix_binary(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(MATRIX_MAGIC)?;
    f.write_all(&(m.nrows() as u32).to_le_bytes())?;
    f.write_all(&(m.ncols() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.nrows() * m.ncols() * 8);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            buf.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Reads a matrix written by `write_matrix_binary`.
pub fn read_matrix_binary(path: &Path) -> Result<DMatrix<f64>> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::Config(format!("{}: not an operator dump", path.display())));
    }
    let mut dims = [0u8; 8];
    f.read_exact(&mut dims)?;
    let rows = u32::from_le_bytes(dims[0..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(dims[4..8].try_into().unwrap()) as usize;
    let mut data = vec![0u8; rows * cols * 8];
    f.read_exact(&mut data)?;
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let off = (i * cols + j) * 8;
            m[(i, j)] = f64::from_le_bytes(data[off..off + 8].try_into().unwrap());
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.125, -1.0 / 3.0, 1e-300, std::f64::consts::PI, 4.0 * (0.35f64).sin().powi(2)] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_output_is_deterministic_and_ordered() {
        let v = Json::obj(vec![
            ("zeta", Json::Float(0.5)),
            ("alpha", Json::Int(3)),
            ("list", Json::floats(&[1.0, 2.0])),
            ("name", Json::Str("su2-conj".into())),
        ]);
        let a = v.to_string_pretty();
        let b = v.to_string_pretty();
        assert_eq!(a, b);
        // Insertion order, not alphabetical.
        let zi = a.find("zeta").unwrap();
        let ai = a.find("alpha").unwrap();
        assert!(zi < ai);
        assert!(a.contains("5.0000000000000000e-1"));
    }

    #[test]
    fn json_escapes_strings() {
        let v = Json::Str("a\"b\\c\nd".into());
        assert_eq!(v.to_string_pretty(), "\"a\\\"b\\\\c\\nd\"\n");
    }

    #[test]
    fn csv_header_shape_matches_row() {
        let h = csv_header(2, 3);
        assert_eq!(h, "t,q_1,q_2,p_1,p_2,xi_1,xi_2,xi_3,H,casimir,xi_k_norm");
        let row = csv_row(0.0, &[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0, 7.0], 8.0, 9.0, 0.0);
        assert_eq!(h.split(',').count(), row.split(',').count());
    }

    #[test]
    fn matrix_binary_round_trips() {
        let dir = std::env::temp_dir().join(format!("polarred-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("op.bin");
        let m = DMatrix::from_fn(3, 5, |i, j| (i as f64) * 10.0 + j as f64 + 0.125);
        write_matrix_binary(&path, &m).unwrap();
        let back = read_matrix_binary(&path).unwrap();
        assert_eq!(m, back);
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[0..8], b"POLARRED");
        assert_eq!(bytes.len(), 16 + 3 * 5 * 8);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn matrix_binary_rejects_bad_magic() {
        let dir = std::env::temp_dir().join(format!("polarred-io-magic-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.bin");
        std::fs::write(&path, b"NOTMAGIC\x01\x00\x00\x00\x01\x00\x00\x00").unwrap();
        assert!(read_matrix_binary(&path).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
