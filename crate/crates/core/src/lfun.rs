//! `L(1, chi)` and the shifted `L(1, chi, a) = sum_{n >= 1} chi(n) / (n + a)`.
//!
//! Three routes are available and are meant to be compared against each other:
//!
//! * [`Method::ClosedDirect`]: `-(1/q) sum_{r=1}^{q} chi(r) psi((r + a) / q)`.
//! * [`Method::ClosedLemma1`]: `L(1, chi) - a * sum_n chi(n) / (n (n + a))`,
//!   with the tail series in closed form through a digamma difference
//!   (or Hurwitz zeta when `a = 0`).
//! * [`Method::Truncated`]: the partial sum up to `N`, with the rigorous tail
//!   bound `2q / (N + 1)` from partial summation and `|sum chi(n)| <= q`.
//!
//! The principal character is always rejected: its series diverges.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chars::CharacterTable;
use crate::error::{Error, Result};
use crate::specfun::{digamma, hurwitz_zeta, ShiftParam};

/// Absolute accuracy of one [`digamma`] evaluation on the arguments used here.
const DIGAMMA_ABS_ERROR: f64 = 1e-13;

/// Default truncation point for the oracle route, as a multiple of `q`.
pub const DEFAULT_CUTOFF_FACTOR: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedDirect,
    ClosedLemma1,
    Truncated,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ClosedDirect, Method::ClosedLemma1, Method::Truncated];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedDirect => "closed_direct",
            Method::ClosedLemma1 => "closed_lemma1",
            Method::Truncated => "truncated",
        }
    }

    /// The other closed-form route; `Truncated` maps to `ClosedDirect`.
    pub fn closed_counterpart(&self) -> Method {
        match self {
            Method::ClosedDirect => Method::ClosedLemma1,
            _ => Method::ClosedDirect,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// One evaluated `L(1, chi_j, a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftedLValue {
    pub q: u64,
    pub character: usize,
    pub a: ShiftParam,
    pub value: Complex64,
    pub method: Method,
    /// Rigorous tail bound for `Truncated`; a floating-point error estimate
    /// for the closed routes.
    pub error_bound: f64,
}

impl ShiftedLValue {
    /// `a < 1` lies outside the range assumed by the mean-value formulas.
    pub fn shift_below_one(&self) -> bool {
        self.a.is_below_one()
    }
}

/// `psi((r + a) / q)` for `r = 0..q`, where slot 0 stands for `r = q`.
fn digamma_row(q: u64, a: &ShiftParam) -> Result<Vec<f64>> {
    let qf = q as f64;
    let av = a.value();
    (0..q)
        .map(|r| {
            let r = if r == 0 { q } else { r };
            digamma((r as f64 + av) / qf)
        })
        .collect()
}

fn closed_error(weights: &[f64], q: u64) -> f64 {
    let mass: f64 = weights.iter().map(|w| w.abs()).sum();
    (mass * 8.0 * f64::EPSILON + q as f64 * DIGAMMA_ABS_ERROR) / q as f64
}

/// `L(1, chi_j) = -(1/q) sum_{r=1}^{q-1} chi_j(r) psi(r / q)`.
pub fn l1_chi(t: &CharacterTable, j: usize) -> Result<Complex64> {
    t.check_nonprincipal(j)?;
    let row = digamma_row(t.modulus(), &ShiftParam::zero())?;
    Ok(-t.weighted_residue_sum(j, &row) / t.modulus() as f64)
}

/// Precomputed residue weights for the tail series `sum chi(n) / (n (n + a))`.
fn tail_weights(q: u64, a: &ShiftParam) -> Result<Vec<f64>> {
    let qf = q as f64;
    if a.is_zero() {
        // sum chi(n) / n^2 = q^-2 sum_r chi(r) zeta(2, r / q)
        return (0..q)
            .map(|r| {
                let r = if r == 0 { q } else { r };
                Ok(hurwitz_zeta(2.0, r as f64 / qf)? / (qf * qf))
            })
            .collect();
    }
    let base = digamma_row(q, &ShiftParam::zero())?;
    let shifted = digamma_row(q, a)?;
    let scale = 1.0 / (a.value() * qf);
    Ok(shifted
        .iter()
        .zip(&base)
        .map(|(s, b)| (s - b) * scale)
        .collect())
}

/// `sum_{n >= 1} chi_j(n) / (n (n + a))`; for `a = 0` this is `L(2, chi_j)`.
pub fn shifted_tail_sum(t: &CharacterTable, j: usize, a: &ShiftParam) -> Result<Complex64> {
    t.check_nonprincipal(j)?;
    Ok(t.weighted_residue_sum(j, &tail_weights(t.modulus(), a)?))
}

pub fn l1_chi_a(
    t: &CharacterTable,
    j: usize,
    a: &ShiftParam,
    method: Method,
) -> Result<ShiftedLValue> {
    t.check_nonprincipal(j)?;
    let v = l_vector(t, a, method)?;
    Ok(v.entry(j).expect("non-principal entry present"))
}

/// Partial sum `sum_{n <= cutoff} chi_j(n) / (n + a)` with its tail bound.
pub fn l1_chi_a_truncated(
    t: &CharacterTable,
    j: usize,
    a: &ShiftParam,
    cutoff: u64,
) -> Result<ShiftedLValue> {
    t.check_nonprincipal(j)?;
    let v = l_vector_truncated(t, a, cutoff)?;
    Ok(v.entry(j).expect("non-principal entry present"))
}

/// L-values of every character mod `q` for one `(a, method)`; the principal
/// slot is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct LVector {
    pub q: u64,
    pub a: ShiftParam,
    pub method: Method,
    pub values: Vec<Option<Complex64>>,
    pub error_bounds: Vec<f64>,
}

impl LVector {
    pub fn get(&self, j: usize) -> Option<Complex64> {
        self.values.get(j).copied().flatten()
    }

    pub fn entry(&self, j: usize) -> Option<ShiftedLValue> {
        Some(ShiftedLValue {
            q: self.q,
            character: j,
            a: self.a,
            value: self.get(j)?,
            method: self.method,
            error_bound: self.error_bounds[j],
        })
    }

    /// Largest per-character deviation from another vector over the same table.
    pub fn max_deviation(&self, other: &LVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).norm()))
            .fold(0.0, f64::max)
    }
}

/// All non-principal `L(1, chi, a)` in one pass; `Truncated` uses the
/// default cutoff `10^4 q`.
pub fn l_vector(t: &CharacterTable, a: &ShiftParam, method: Method) -> Result<LVector> {
    let q = t.modulus();
    let phi = t.len();
    let mut values = vec![None; phi];
    let mut error_bounds = vec![0.0; phi];
    match method {
        Method::Truncated => return l_vector_truncated(t, a, DEFAULT_CUTOFF_FACTOR * q),
        Method::ClosedDirect => {
            let row = digamma_row(q, a)?;
            let err = closed_error(&row, q);
            for j in t.nonprincipal() {
                values[j] = Some(-t.weighted_residue_sum(j, &row) / q as f64);
                error_bounds[j] = err;
            }
        }
        Method::ClosedLemma1 => {
            let base = digamma_row(q, &ShiftParam::zero())?;
            let tails = tail_weights(q, a)?;
            let err = closed_error(&base, q) * (1.0 + 2.0 * a.value());
            for j in t.nonprincipal() {
                let l1 = -t.weighted_residue_sum(j, &base) / q as f64;
                let tail = t.weighted_residue_sum(j, &tails);
                values[j] = Some(l1 - tail * a.value());
                error_bounds[j] = err;
            }
        }
    }
    Ok(LVector {
        q,
        a: *a,
        method,
        values,
        error_bounds,
    })
}

/// Truncated-series L-values at an explicit cutoff (a multiple of `q`, at
/// least `10q`). Terms are grouped by residue class, which leaves the finite
/// sum unchanged but shares the work across characters.
pub fn l_vector_truncated(t: &CharacterTable, a: &ShiftParam, cutoff: u64) -> Result<LVector> {
    let q = t.modulus();
    if cutoff % q != 0 || cutoff < 10 * q {
        return Err(Error::InvalidCutoff { cutoff, q });
    }
    let periods = cutoff / q;
    let qf = q as f64;
    let av = a.value();
    // slot r mod q holds sum_{m < periods} 1 / (m q + r + a), r = 1..=q
    let class_sums: Vec<f64> = (0..q)
        .map(|r| {
            let r = if r == 0 { q } else { r } as f64 + av;
            (0..periods).rev().map(|m| 1.0 / (m as f64 * qf + r)).sum()
        })
        .collect();
    let bound = 2.0 * qf / (cutoff as f64 + 1.0);
    let mut values = vec![None; t.len()];
    let mut error_bounds = vec![0.0; t.len()];
    for j in t.nonprincipal() {
        values[j] = Some(t.weighted_residue_sum(j, &class_sums));
        error_bounds[j] = bound;
    }
    Ok(LVector {
        q,
        a: *a,
        method: Method::Truncated,
        values,
        error_bounds,
    })
}

/// `sum_{n >= 1} chi(n) / (n (n + a))` for every character, principal slot empty.
pub fn tail_vector(t: &CharacterTable, a: &ShiftParam) -> Result<Vec<Option<Complex64>>> {
    let w = tail_weights(t.modulus(), a)?;
    Ok((0..t.len())
        .map(|j| (j != t.principal_index()).then(|| t.weighted_residue_sum(j, &w)))
        .collect())
}
