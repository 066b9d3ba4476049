//! Timing channel capacity estimation.
//!
//! Execution-time observations per secret input become an empirical
//! discrete memoryless channel (rows: inputs, columns: distinct observed
//! cycle counts), whose Shannon capacity is computed by the iterative
//! Blahut-Arimoto algorithm. Cycle counts are used as-is; no binning and no
//! small-sample correction is applied, so the estimate can slightly
//! overstate leakage for wide distributions at moderate sample counts.

use std::collections::BTreeMap;
use thiserror::Error;

/// Per-input-label lists of observed cycle counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingSamples {
    pub labels: Vec<String>,
    pub samples: Vec<Vec<u64>>,
}

/// Row-stochastic conditional distribution of observations given inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub inputs: Vec<String>,
    /// Sorted distinct observed cycle values.
    pub outputs: Vec<u64>,
    /// `rows[i][j]` = P(output j | input i); each row sums to 1.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub iterations: u32,
    /// Final difference between the upper and lower capacity bounds, in bits.
    pub bound_gap: f64,
    pub converged: bool,
}

/// Hard cap on distinct observed outputs, to bound channel memory.
pub const MAX_DISTINCT_OUTPUTS: usize = 1 << 16;

#[derive(Debug, Error, PartialEq)]
pub enum LeakageError {
    #[error("need at least 2 input labels, got {got}")]
    TooFewLabels { got: usize },
    #[error("label {label} has no samples")]
    EmptyLabel { label: String },
    #[error("{distinct} distinct outputs exceed the cap of {cap}")]
    TooManyOutputs { distinct: usize, cap: usize },
    #[error("channel matrix is not row-stochastic: {detail}")]
    BadMatrix { detail: String },
    #[error("tolerance must be positive and max_iter at least 1")]
    BadParameters,
    #[error("baseline capacity must be positive")]
    ZeroBaseline,
}

/// Build the empirical channel: outputs are the union of observed values and
/// row entries are per-label relative frequencies.
pub fn build_channel(s: &TimingSamples) -> Result<ChannelMatrix, LeakageError> {
    if s.labels.len() < 2 || s.labels.len() != s.samples.len() {
        return Err(LeakageError::TooFewLabels { got: s.labels.len() });
    }
    for (label, obs) in s.labels.iter().zip(&s.samples) {
        if obs.is_empty() {
            return Err(LeakageError::EmptyLabel { label: label.clone() });
        }
    }
    let mut index: BTreeMap<u64, usize> = BTreeMap::new();
    for obs in &s.samples {
        for &v in obs {
            let next = index.len();
            index.entry(v).or_insert(next);
        }
    }
    if index.len() > MAX_DISTINCT_OUTPUTS {
        return Err(LeakageError::TooManyOutputs {
            distinct: index.len(),
            cap: MAX_DISTINCT_OUTPUTS,
        });
    }
    // BTreeMap iterates in key order, but the insertion indices above are
    // discovery-ordered; rebuild them in sorted-output order.
    let outputs: Vec<u64> = index.keys().copied().collect();
    for (rank, (_, slot)) in index.iter_mut().enumerate() {
        *slot = rank;
    }
    let rows = s
        .samples
        .iter()
        .map(|obs| {
            let mut row = vec![0.0; outputs.len()];
            for &v in obs {
                row[index[&v]] += 1.0;
            }
            let n = obs.len() as f64;
            for p in &mut row {
                *p /= n;
            }
            row
        })
        .collect();
    Ok(ChannelMatrix {
        inputs: s.labels.clone(),
        outputs,
        rows,
    })
}

fn check_matrix(w: &ChannelMatrix) -> Result<(), LeakageError> {
    if w.rows.is_empty() || w.outputs.is_empty() {
        return Err(LeakageError::BadMatrix {
            detail: "empty matrix".to_string(),
        });
    }
    for (i, row) in w.rows.iter().enumerate() {
        if row.len() != w.outputs.len() {
            return Err(LeakageError::BadMatrix {
                detail: format!("row {i} has {} entries, expected {}", row.len(), w.outputs.len()),
            });
        }
        if row.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) {
            return Err(LeakageError::BadMatrix {
                detail: format!("row {i} has entries outside [0, 1]"),
            });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(LeakageError::BadMatrix {
                detail: format!("row {i} sums to {sum}"),
            });
        }
    }
    Ok(())
}

/// Iterative Blahut-Arimoto capacity of a discrete memoryless channel.
///
/// Alternates the output distribution `q = p W` with the exponentiated
/// update `p_i <- p_i * exp(D_i) / Z`, where `D_i = KL(W_i || q)` in nats.
/// At every step `sum_i p_i D_i` lower-bounds and `max_i D_i` upper-bounds
/// the capacity; iteration stops when they agree within `tol` (nats) and the
/// lower bound is returned, converted to bits. Exceeding `max_iter` returns
/// the current estimate flagged as non-converged.
pub fn ba_capacity(
    w: &ChannelMatrix,
    tol: f64,
    max_iter: u32,
) -> Result<CapacityResult, LeakageError> {
    if !(tol > 0.0) || max_iter < 1 {
        return Err(LeakageError::BadParameters);
    }
    check_matrix(w)?;
    let k = w.rows.len();
    let j = w.outputs.len();
    let ln2 = std::f64::consts::LN_2;
    let mut p = vec![1.0 / k as f64; k];
    let mut d = vec![0.0; k];
    let mut q = vec![0.0; j];
    let mut iterations = 0;
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    while iterations < max_iter {
        iterations += 1;
        q.iter_mut().for_each(|x| *x = 0.0);
        for (pi, row) in p.iter().zip(&w.rows) {
            for (qj, wij) in q.iter_mut().zip(row) {
                *qj += pi * wij;
            }
        }
        for (di, row) in d.iter_mut().zip(&w.rows) {
            *di = row
                .iter()
                .zip(&q)
                .filter(|(&wij, _)| wij > 0.0)
                .map(|(&wij, &qj)| wij * (wij / qj).ln())
                .sum();
        }
        upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lower = p.iter().zip(&d).map(|(pi, di)| pi * di).sum();
        if upper - lower < tol {
            return Ok(CapacityResult {
                capacity_bits: lower / ln2,
                iterations,
                bound_gap: (upper - lower) / ln2,
                converged: true,
            });
        }
        let mut z = 0.0;
        for (pi, di) in p.iter_mut().zip(&d) {
            *pi *= (di - upper).exp();
            z += *pi;
        }
        for pi in &mut p {
            *pi /= z;
        }
    }
    Ok(CapacityResult {
        capacity_bits: lower / ln2,
        iterations,
        bound_gap: (upper - lower) / ln2,
        converged: false,
    })
}

/// Leakage reduction of a countermeasure in percent:
/// `100 * (1 - treated / baseline)`.
pub fn capacity_reduction(baseline_bits: f64, treated_bits: f64) -> Result<f64, LeakageError> {
    if !(baseline_bits > 0.0) {
        return Err(LeakageError::ZeroBaseline);
    }
    Ok(100.0 * (1.0 - treated_bits / baseline_bits))
}
