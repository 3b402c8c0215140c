//! Real special functions behind the closed forms: digamma, Hurwitz zeta at
//! real `s > 1`, harmonic numbers, and the exact rational shift `a`.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `zeta(2) = pi^2 / 6`.
pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `B_2, B_4, ..., B_14`.
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Arguments are pushed up to this point before the asymptotic series is used.
const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// Digamma via upward recurrence to `x >= 10` and the asymptotic series
/// through `B_14`. Absolute error below `1e-13` on `x >= 1e-3`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            function: "digamma",
            argument: x,
        });
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_THRESHOLD {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut pow = inv2;
    let mut series = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        series += b / (2.0 * (k as f64 + 1.0)) * pow;
        pow *= inv2;
    }
    Ok(x.ln() - 0.5 / x - series - shift)
}

/// Hurwitz zeta `sum_{n >= 0} (n + alpha)^(-s)` for real `s > 1`, `alpha > 0`:
/// direct summation until `n + alpha >= 10`, then an Euler-Maclaurin tail.
pub fn hurwitz_zeta(s: f64, alpha: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::Domain {
            function: "hurwitz_zeta (s)",
            argument: s,
        });
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain {
            function: "hurwitz_zeta (alpha)",
            argument: alpha,
        });
    }
    let mut head = 0.0;
    let mut x = alpha;
    while x < ASYMPTOTIC_THRESHOLD {
        head += x.powf(-s);
        x += 1.0;
    }
    let x_pow = x.powf(-s);
    let mut tail = x * x_pow / (s - 1.0) + 0.5 * x_pow;
    // rising factorial s (s+1) ... (s+2k-2) over (2k)!, times x^(-s-2k+1)
    let mut coeff = s / 2.0;
    let mut term_pow = x_pow / x;
    let inv2 = 1.0 / (x * x);
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        tail += b * coeff * term_pow;
        let m = 2.0 * (k as f64 + 1.0);
        coeff *= (s + m - 1.0) * (s + m) / ((m + 1.0) * (m + 2.0));
        term_pow *= inv2;
    }
    Ok(head + tail)
}

/// `H_n = sum_{l=1}^{n} 1/l`, with `H_0 = 0`.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).rev().map(|l| 1.0 / l as f64).sum()
}

/// `sum_{l=lo+1}^{hi} 1/l`, zero when the range is empty.
pub fn harmonic_block(lo: u64, hi: u64) -> f64 {
    if hi <= lo {
        0.0
    } else {
        ((lo + 1)..=hi).rev().map(|l| 1.0 / l as f64).sum()
    }
}

/// Upper bound on numerator and denominator so the binary64 image is exact
/// up to the final division.
const MAX_SHIFT_PART: u64 = 1 << 53;

/// Non-negative rational shift `a = numerator / denominator`, kept reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(u64, u64)", into = "(u64, u64)")]
pub struct ShiftParam {
    numerator: u64,
    denominator: u64,
}

impl ShiftParam {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::InvalidShift("zero denominator".into()));
        }
        let g = numerator.gcd(&denominator);
        let (numerator, denominator) = (numerator / g, denominator / g);
        if numerator >= MAX_SHIFT_PART || denominator >= MAX_SHIFT_PART {
            return Err(Error::InvalidShift(format!(
                "{numerator}/{denominator} exceeds 2^53 in numerator or denominator"
            )));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn integer(n: u64) -> Self {
        Self::new(n, 1).expect("integer shift below 2^53")
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn is_integer(&self) -> bool {
        self.denominator == 1
    }

    pub fn as_integer(&self) -> Option<u64> {
        self.is_integer().then_some(self.numerator)
    }

    /// `a < 1`; allowed for L-values but flagged where the mean-value
    /// formulas assume `a >= 1`.
    pub fn is_below_one(&self) -> bool {
        self.numerator < self.denominator
    }

    /// Coprimality with `p`, vacuous for non-integer shifts.
    pub fn is_coprime_to(&self, p: u64) -> bool {
        match self.as_integer() {
            Some(n) => n.gcd(&p) == 1,
            None => true,
        }
    }
}

impl fmt::Display for ShiftParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.denominator)
        }
    }
}

impl TryFrom<(u64, u64)> for ShiftParam {
    type Error = Error;

    fn try_from((n, d): (u64, u64)) -> Result<Self> {
        Self::new(n, d)
    }
}

impl From<ShiftParam> for (u64, u64) {
    fn from(a: ShiftParam) -> Self {
        (a.numerator, a.denominator)
    }
}

impl FromStr for ShiftParam {
    type Err = Error;

    /// Accepts `"7/2"`, `"3"` or an exact decimal such as `"3.25"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidShift(format!("cannot parse {s:?}"));
        let digits = |t: &str| -> Result<u64> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse::<u64>().map_err(|_| bad())
        };
        if let Some((n, d)) = s.split_once('/') {
            return Self::new(digits(n.trim())?, digits(d.trim())?);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let int = if int.is_empty() { 0 } else { digits(int)? };
            let frac = frac.trim_end_matches('0');
            if frac.is_empty() {
                return Self::new(int, 1);
            }
            let den = 10u64
                .checked_pow(frac.len() as u32)
                .filter(|&d| d < MAX_SHIFT_PART)
                .ok_or_else(bad)?;
            let num = int
                .checked_mul(den)
                .and_then(|v| v.checked_add(digits(frac).ok()?))
                .ok_or_else(bad)?;
            return Self::new(num, den);
        }
        Self::new(digits(s)?, 1)
    }
}

/// `floor(a / d)` in exact integer arithmetic.
pub fn floor_ratio(a: &ShiftParam, d: u64) -> u64 {
    assert!(d >= 1, "floor_ratio divisor must be positive");
    (a.numerator as u128 / (a.denominator as u128 * d as u128)) as u64
}
