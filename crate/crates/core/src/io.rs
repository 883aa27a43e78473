//! JSON and CSV serialization.
//!
//! Matrices are written as `{"dim_a": a, "dim_b": b, "rows": [[[re, im], ...], ...]}`
//! (or `{"dim": d, "rows": ...}` for a plain square matrix). Every float
//! carries 17 significant digits so that parsing returns the same bits.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::matops::{BipartiteMatrix, CMatrix, DensityMatrix, SquareComplexMatrix};
use crate::perm::Permutation;
use crate::states::FamilyWeights;
use crate::witness::{choi_matrix, DecompositionCheck, Verdict, WitnessSpec};

/// `%.17g`, with `.0` appended to integral values. Non-finite values
/// become `nan`, `inf` and `-inf`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0" } else { "0.0" }.into();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    if (-5..17).contains(&exp) {
        let body = if exp >= 0 {
            let int_len = exp as usize + 1;
            if digits.len() <= int_len {
                format!("{digits}{}.0", "0".repeat(int_len - digits.len()))
            } else {
                format!("{}.{}", &digits[..int_len], &digits[int_len..])
            }
        } else {
            format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
        };
        format!("{sign}{body}")
    } else {
        let (head, tail) = digits.split_at(1);
        let tail = if tail.is_empty() { "0" } else { tail };
        format!("{sign}{head}.{tail}e{exp}")
    }
}

struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-digit floats and a trailing newline. Non-finite
/// floats are written as `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn rows_of(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|s| [m[(r, s)].re, m[(r, s)].im])
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
struct BipartiteOut<'a, M: Serialize> {
    dim_a: usize,
    dim_b: usize,
    rows: Vec<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<&'a M>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decomposition: Option<&'a DecompositionCheck>,
}

#[derive(Serialize)]
struct SquareOut {
    dim: usize,
    rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct MatrixIn {
    dim_a: Option<usize>,
    dim_b: Option<usize>,
    dim: Option<usize>,
    rows: Vec<Vec<[f64; 2]>>,
    metadata: Option<WitnessMetadata>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessMetadata {
    pub n: usize,
    pub t: f64,
    pub perm: Vec<usize>,
    pub t_max: f64,
    pub verdict: Verdict,
}

pub fn bipartite_to_json(m: &BipartiteMatrix) -> Result<String> {
    to_json(&BipartiteOut::<()> {
        dim_a: m.dim_a(),
        dim_b: m.dim_b(),
        rows: rows_of(m.as_matrix()),
        metadata: None,
        decomposition: None,
    })
}

pub fn density_to_json(rho: &DensityMatrix) -> Result<String> {
    bipartite_to_json(rho.state())
}

pub fn square_to_json(m: &SquareComplexMatrix) -> Result<String> {
    to_json(&SquareOut {
        dim: m.dim(),
        rows: rows_of(m.as_matrix()),
    })
}

/// Witness matrix plus a `metadata` block and, when given, the numerical
/// check of its decomposition.
pub fn witness_to_json(
    w: &WitnessSpec,
    decomposition: Option<&DecompositionCheck>,
) -> Result<String> {
    let meta = WitnessMetadata {
        n: w.n(),
        t: w.t(),
        perm: w.perm().images(),
        t_max: w.t_max(),
        verdict: w.verdict(),
    };
    to_json(&BipartiteOut {
        dim_a: w.choi().dim_a(),
        dim_b: w.choi().dim_b(),
        rows: rows_of(w.choi().as_matrix()),
        metadata: Some(&meta),
        decomposition,
    })
}

fn parse_raw(text: &str) -> Result<MatrixIn> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>], dim: usize) -> Result<SquareComplexMatrix> {
    if rows.len() != dim {
        return Err(Error::Parse(format!(
            "expected {dim} rows, found {}",
            rows.len()
        )));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != dim) {
        return Err(Error::Parse(format!(
            "row {r} has {} entries, expected {dim}",
            row.len()
        )));
    }
    SquareComplexMatrix::new(CMatrix::from_fn(dim, dim, |r, s| {
        Complex64::new(rows[r][s][0], rows[r][s][1])
    }))
}

fn bipartite_from_raw(raw: &MatrixIn) -> Result<BipartiteMatrix> {
    match (raw.dim_a, raw.dim_b) {
        (Some(a), Some(b)) => BipartiteMatrix::new(a, b, matrix_from_rows(&raw.rows, a * b)?),
        _ => Err(Error::Parse(
            "bipartite matrix needs both dim_a and dim_b".into(),
        )),
    }
}

pub fn parse_bipartite(text: &str) -> Result<BipartiteMatrix> {
    bipartite_from_raw(&parse_raw(text)?)
}

/// Accepts either layout; a bipartite matrix is read as its full square.
pub fn parse_square(text: &str) -> Result<SquareComplexMatrix> {
    let raw = parse_raw(text)?;
    match (raw.dim, raw.dim_a, raw.dim_b) {
        (Some(d), None, None) => matrix_from_rows(&raw.rows, d),
        (None, Some(_), Some(_)) => Ok(bipartite_from_raw(&raw)?.into_square()),
        _ => Err(Error::Parse(
            "need either dim or both dim_a and dim_b".into(),
        )),
    }
}

pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(parse_bipartite(text)?)
}

/// Rebuilds the witness from its metadata and checks the stored matrix
/// against it.
pub fn parse_witness(text: &str) -> Result<WitnessSpec> {
    let raw = parse_raw(text)?;
    let meta = raw
        .metadata
        .as_ref()
        .ok_or_else(|| Error::Parse("witness file has no metadata block".into()))?;
    let p = Permutation::new(meta.perm.clone())?;
    let w = choi_matrix(meta.n, meta.t, &p)?;
    let stored = bipartite_from_raw(&raw)?;
    let deviation = stored
        .sub(w.choi())?
        .as_matrix()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if deviation > 1e-12 {
        return Err(Error::Parse(format!(
            "stored matrix differs from W_(n,t,perm) by {deviation:e}"
        )));
    }
    Ok(w)
}

struct WeightsOut<'a>(&'a FamilyWeights);

impl Serialize for WeightsOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Cycles<'a>(&'a [Vec<f64>]);
        impl Serialize for Cycles<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.len()))?;
                for (i, row) in self.0.iter().enumerate() {
                    map.serialize_entry(&(i + 1).to_string(), row)?;
                }
                map.end()
            }
        }
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("q0", &self.0.q0)?;
        map.serialize_entry("q", &Cycles(&self.0.q))?;
        map.serialize_entry("q_tilde", &self.0.q_tilde)?;
        map.end()
    }
}

/// `{"q0": r, "q": {"1": [...], ...}, "q_tilde": r}`, cycles numbered in
/// canonical order.
pub fn weights_to_json(w: &FamilyWeights) -> Result<String> {
    to_json(&WeightsOut(w))
}

#[derive(Deserialize)]
struct WeightsIn {
    q0: f64,
    q: BTreeMap<String, Vec<f64>>,
    q_tilde: f64,
}

pub fn parse_weights(text: &str, p: &Permutation) -> Result<FamilyWeights> {
    let raw: WeightsIn = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut indexed = BTreeMap::new();
    for (k, v) in raw.q {
        let s: usize = k
            .parse()
            .map_err(|_| Error::Parse(format!("cycle key {k:?} is not a positive integer")))?;
        indexed.insert(s, v);
    }
    let count = indexed.len();
    if indexed.keys().copied().ne(1..=count) {
        return Err(Error::Parse(format!(
            "cycle keys must be exactly 1..={count}"
        )));
    }
    FamilyWeights::new(p, raw.q0, indexed.into_values().collect(), raw.q_tilde)
}
