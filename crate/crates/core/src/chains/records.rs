//! Strict upper records of a sequence.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordChain {
    /// `Rₙ`, with `R₀ = 0`.
    pub record_indices: Vec<usize>,
    /// `Zₙ* = Z_{Rₙ}`.
    pub record_values: Vec<f64>,
    /// `Aₙ = Rₙ − Rₙ₋₁` for `n ≥ 1`.
    pub ages: Vec<usize>,
    /// `𝓡_N = #{n : Rₙ ≤ N}` for `N = 0, …, len − 1`.
    pub record_count_by_n: Vec<usize>,
}

impl RecordChain {
    pub fn record_count(&self, n: usize) -> usize {
        self.record_count_by_n[n.min(self.record_count_by_n.len() - 1)]
    }
}

/// Single pass; a value equal to the running maximum is not a record.
pub fn extract_records(values: &[f64]) -> Result<RecordChain> {
    if values.is_empty() {
        return invalid("record extraction needs a non-empty sequence");
    }
    let mut record_indices = vec![0];
    let mut record_values = vec![values[0]];
    let mut ages = Vec::new();
    let mut record_count_by_n = vec![1];
    for (r, &v) in values.iter().enumerate().skip(1) {
        if v > *record_values.last().unwrap_or(&f64::NEG_INFINITY) {
            ages.push(r - record_indices.last().copied().unwrap_or(0));
            record_indices.push(r);
            record_values.push(v);
        }
        record_count_by_n.push(record_indices.len());
    }
    Ok(RecordChain { record_indices, record_values, ages, record_count_by_n })
}

/// Quadratic reference: `r` is a record iff it beats every earlier value.
pub fn brute_force_records(values: &[f64]) -> Vec<usize> {
    (0..values.len()).filter(|&r| values[..r].iter().all(|&v| values[r] > v)).collect()
}

/// CSV `n, R_n, Z*_n, A_n, S_{R_n}`; `times[r]` is the jump time of value `r`.
/// `A_0` is left empty, as is the time column without `times`.
pub fn write_records_csv<W: Write>(out: W, chain: &RecordChain, times: Option<&[f64]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
    w.write_record(["n", "R_n", "Z_star_n", "A_n", "S_R_n"]).map_err(err)?;
    for (n, (&r, &z)) in chain.record_indices.iter().zip(&chain.record_values).enumerate() {
        let age = if n == 0 { String::new() } else { chain.ages[n - 1].to_string() };
        let s = times.and_then(|t| t.get(r)).map(|t| t.to_string()).unwrap_or_default();
        w.write_record([n.to_string(), r.to_string(), z.to_string(), age, s]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    Ok(())
}
