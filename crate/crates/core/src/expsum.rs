//! Polynomial exponential sums modulo a prime `p`.
//!
//! With `e(t) = exp(2 pi i t)`, the central objects are
//!
//! * the character-weighted sum `S(chi, f) = sum_{x=1}^{p-1} chi(x) e(f(x)/p)`;
//! * the difference polynomial `g(y, x) = f(xy) - f(y)` with coefficients
//!   `b_i = a_i (x^i - 1) mod p`;
//! * the incomplete sum `sum_{y=1}^{p-1} e(g(y, x)/p)`.
//!
//! `|S(chi, f)|^2 = (p - 1) + sum_{x=2}^{p-1} chi(x) sum_y e(g(y, x)/p)` holds
//! exactly; [`lemma2_defect`] measures how far floating point drifts from it.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::arith::{gcd, is_prime};
use crate::chars::CharacterTable;
use crate::error::{Error, Result};

/// Integer polynomial `a_0 + a_1 x + ... + a_k x^k`, `k >= 1`.
///
/// Trailing zero coefficients are kept: the nominal degree is the length of
/// the coefficient list minus one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Polynomial {
    coeffs: Vec<i64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidPolynomial(
                "need at least two coefficients a0,a1".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients reduced into `[0, p)`.
    pub fn reduce(&self, p: u64) -> Vec<u64> {
        self.coeffs
            .iter()
            .map(|&c| c.rem_euclid(p as i64) as u64)
            .collect()
    }

    /// `p | (a_0, ..., a_k)`.
    pub fn vanishes_mod(&self, p: u64) -> bool {
        self.reduce(p).iter().all(|&c| c == 0)
    }

    /// Largest `i` with `p` not dividing `a_i`, if any.
    pub fn effective_degree(&self, p: u64) -> Option<usize> {
        effective_degree(&self.reduce(p))
    }

    pub fn eval_mod(&self, x: u64, p: u64) -> u64 {
        horner_mod(&self.reduce(p), x, p)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    /// Comma-separated `a0,a1,...,ak`.
    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::InvalidPolynomial(format!("bad coefficient {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }
}

/// A random polynomial of degree `1..=max_degree` with coefficients in
/// `0..p` and a leading coefficient that is nonzero mod `p`.
pub fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, p: u64, max_degree: usize) -> Polynomial {
    let degree = rng.gen_range(1..=max_degree.max(1));
    let mut coeffs: Vec<i64> = (0..degree).map(|_| rng.gen_range(0..p) as i64).collect();
    coeffs.push(rng.gen_range(1..p) as i64);
    Polynomial { coeffs }
}

fn horner_mod(coeffs: &[u64], x: u64, p: u64) -> u64 {
    let (x, p) = (x as u128 % p as u128, p as u128);
    coeffs
        .iter()
        .rev()
        .fold(0u128, |acc, &c| (acc * x + c as u128) % p) as u64
}

fn effective_degree(reduced: &[u64]) -> Option<usize> {
    reduced.iter().rposition(|&c| c != 0)
}

fn require_prime(p: u64) -> Result<()> {
    if p >= 3 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Table of `e(v / p)` for `v = 0..p`.
#[derive(Clone, Debug)]
pub struct AdditiveRoots {
    p: u64,
    roots: Vec<Complex64>,
}

impl AdditiveRoots {
    pub fn new(p: u64) -> Self {
        let roots = (0..p)
            .map(|v| {
                let (s, c) = (std::f64::consts::TAU * v as f64 / p as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        Self { p, roots }
    }

    pub fn e(&self, v: u64) -> Complex64 {
        self.roots[(v % self.p) as usize]
    }
}

/// `g(y, x) = f(xy) - f(y)` reduced mod `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferencePoly {
    pub x: u64,
    pub coeffs: Vec<u64>,
    /// `p | (b_0, ..., b_k)`.
    pub degenerate: bool,
}

impl DifferencePoly {
    pub fn effective_degree(&self) -> Option<usize> {
        effective_degree(&self.coeffs)
    }
}

/// Coefficients `b_i = a_i (x^i - 1) mod p` of `f(xy) - f(y)`.
pub fn difference_poly(f: &Polynomial, x: u64, p: u64) -> Result<DifferencePoly> {
    require_prime(p)?;
    if x == 0 || x >= p {
        return Err(Error::InvalidArgument(format!("x = {x} not in 1..{p}")));
    }
    Ok(difference_poly_unchecked(&f.reduce(p), x, p))
}

fn difference_poly_unchecked(reduced: &[u64], x: u64, p: u64) -> DifferencePoly {
    let mut xi = 1u128;
    let coeffs: Vec<u64> = reduced
        .iter()
        .map(|&a| {
            let b = (a as u128 * ((xi + p as u128 - 1) % p as u128) % p as u128) as u64;
            xi = xi * x as u128 % p as u128;
            b
        })
        .collect();
    let degenerate = coeffs.iter().all(|&b| b == 0);
    DifferencePoly {
        x,
        coeffs,
        degenerate,
    }
}

fn complete_sum_with(roots: &AdditiveRoots, h: &[u64]) -> Complex64 {
    let p = roots.p;
    if h.iter().all(|&c| c % p == 0) {
        return Complex64::new((p - 1) as f64, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for y in 1..p {
        acc += roots.e(horner_mod(h, y, p));
    }
    acc
}

/// `sum_{y=1}^{p-1} e(h(y) / p)` for coefficients `h_0..h_k`; exactly
/// `p - 1` when `p` divides every coefficient.
pub fn complete_sum(p: u64, h: &[i64]) -> Result<Complex64> {
    require_prime(p)?;
    let reduced: Vec<u64> = h.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
    Ok(complete_sum_with(&AdditiveRoots::new(p), &reduced))
}

fn check_prime_table(t: &CharacterTable) -> Result<u64> {
    let p = t.modulus();
    require_prime(p)?;
    Ok(p)
}

fn weighted_char_sum_with(
    t: &CharacterTable,
    roots: &AdditiveRoots,
    j: usize,
    values_of_f: &[u64],
) -> Complex64 {
    let p = t.modulus();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 1..p {
        let v = t.exponent(j, x).expect("x is a unit mod p");
        acc += t.root(v) * roots.e(values_of_f[x as usize]);
    }
    acc
}

/// `S(chi_j, f) = sum_{x=1}^{p-1} chi_j(x) e(f(x) / p)` over a prime-modulus table.
pub fn weighted_char_sum(t: &CharacterTable, j: usize, f: &Polynomial) -> Result<Complex64> {
    let p = check_prime_table(t)?;
    t.check_index(j)?;
    let values: Vec<u64> = (0..p).map(|x| f.eval_mod(x, p)).collect();
    Ok(weighted_char_sum_with(t, &AdditiveRoots::new(p), j, &values))
}

/// `|S(chi, f)|^2` for every character mod `p`, indexed by character id.
pub fn weighted_char_sum_sq_all(t: &CharacterTable, f: &Polynomial) -> Result<Vec<f64>> {
    let p = check_prime_table(t)?;
    let roots = AdditiveRoots::new(p);
    let values: Vec<u64> = (0..p).map(|x| f.eval_mod(x, p)).collect();
    Ok((0..t.len())
        .map(|j| weighted_char_sum_with(t, &roots, j, &values).norm_sqr())
        .collect())
}

/// Incomplete sums `sum_{y=1}^{p-1} e(g(y, x)/p)` for `x = 0..p`; slots 0
/// and 1 are unused (`x = 1` gives the trivial `p - 1`).
pub fn difference_sums(p: u64, f: &Polynomial) -> Result<Vec<Complex64>> {
    require_prime(p)?;
    let roots = AdditiveRoots::new(p);
    let reduced = f.reduce(p);
    let mut out = vec![Complex64::new(0.0, 0.0); p as usize];
    for x in 1..p {
        let g = difference_poly_unchecked(&reduced, x, p);
        out[x as usize] = complete_sum_with(&roots, &g.coeffs);
    }
    Ok(out)
}

/// `max_chi | |S(chi, f)|^2 - (p-1) - sum_{x=2}^{p-1} chi(x) sum_y e(g(y,x)/p) |`.
pub fn lemma2_defect(t: &CharacterTable, f: &Polynomial) -> Result<f64> {
    let p = check_prime_table(t)?;
    let sq = weighted_char_sum_sq_all(t, f)?;
    let inner = difference_sums(p, f)?;
    let mut worst: f64 = 0.0;
    for (j, lhs) in sq.iter().enumerate() {
        let mut rhs = Complex64::new((p - 1) as f64, 0.0);
        for x in 2..p {
            rhs += t.root(t.exponent(j, x).expect("unit")) * inner[x as usize];
        }
        worst = worst.max((rhs - lhs).norm());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `p` does not divide every `b_i`.
    Generic,
    /// `p | (b_0, ..., b_k)`.
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchEntry {
    pub x: u64,
    pub branch: Branch,
    /// Degree of `g(., x)` after reduction mod `p`; zero when degenerate.
    pub effective_degree: usize,
    pub modulus: f64,
    /// `deg * sqrt(p) + 1` for generic `x`, `p - 1` for degenerate `x`.
    pub bound: f64,
    pub within_bound: bool,
    /// `|sum| / p^(1 - 1/k)`.
    pub normalized: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma3Report {
    pub p: u64,
    pub degree: usize,
    pub entries: Vec<BranchEntry>,
    pub degenerate_count: usize,
    /// Degenerate count is at most `k - 1` and at most `gcd(l, p-1) - 1` for
    /// every `l >= 1` with `p` not dividing `a_l`.
    pub degenerate_count_ok: bool,
    /// Every degenerate `x` satisfies `x >= p^(1/k)`.
    pub degenerate_size_ok: bool,
    pub max_normalized: f64,
}

impl Lemma3Report {
    pub fn all_within_bound(&self) -> bool {
        self.entries.iter().all(|e| e.within_bound)
    }

    pub fn holds(&self) -> bool {
        self.all_within_bound() && self.degenerate_count_ok && self.degenerate_size_ok
    }

    pub fn violations(&self) -> impl Iterator<Item = &BranchEntry> {
        self.entries.iter().filter(|e| !e.within_bound)
    }
}

/// Classifies each `x in 2..p-1` and checks the incomplete sum against the
/// Weil-type bound (generic branch) or the exact value `p - 1` (degenerate).
pub fn lemma3_report(p: u64, f: &Polynomial) -> Result<Lemma3Report> {
    require_prime(p)?;
    let reduced = f.reduce(p);
    if reduced.iter().all(|&c| c == 0) {
        return Err(Error::InvalidPolynomial(format!("p = {p} divides every coefficient of {f}")));
    }
    let live: Vec<u64> = (1..reduced.len())
        .filter(|&l| reduced[l] != 0)
        .map(|l| l as u64)
        .collect();
    if live.is_empty() {
        return Err(Error::InvalidPolynomial(format!(
            "{f} is constant mod {p}; every x would be degenerate"
        )));
    }
    let k = f.degree();
    let roots = AdditiveRoots::new(p);
    let sqrt_p = (p as f64).sqrt();
    let stated_scale = (p as f64).powf(1.0 - 1.0 / k as f64);
    let mut entries = Vec::with_capacity(p as usize);
    for x in 2..p {
        let g = difference_poly_unchecked(&reduced, x, p);
        let value = complete_sum_with(&roots, &g.coeffs);
        let modulus = value.norm();
        let entry = if g.degenerate {
            let exact = (value - (p - 1) as f64).norm() == 0.0;
            BranchEntry {
                x,
                branch: Branch::Degenerate,
                effective_degree: 0,
                modulus,
                bound: (p - 1) as f64,
                within_bound: exact,
                normalized: modulus / stated_scale,
            }
        } else {
            let d = g.effective_degree().expect("generic branch has a nonzero coefficient");
            let bound = d as f64 * sqrt_p + 1.0;
            BranchEntry {
                x,
                branch: Branch::Generic,
                effective_degree: d,
                modulus,
                bound,
                within_bound: modulus <= bound * (1.0 + 1e-12),
                normalized: modulus / stated_scale,
            }
        };
        entries.push(entry);
    }
    let degenerate: Vec<u64> = entries
        .iter()
        .filter(|e| e.branch == Branch::Degenerate)
        .map(|e| e.x)
        .collect();
    let sharp = live
        .iter()
        .map(|&l| gcd(l, p - 1) as usize - 1)
        .min()
        .expect("live is non-empty");
    let count = degenerate.len();
    let degenerate_count_ok = count <= k.saturating_sub(1) && count <= sharp;
    let threshold = (p as f64).powf(1.0 / k as f64);
    let degenerate_size_ok = degenerate.iter().all(|&x| x as f64 >= threshold);
    let max_normalized = entries.iter().map(|e| e.normalized).fold(0.0, f64::max);
    Ok(Lemma3Report {
        p,
        degree: k,
        entries,
        degenerate_count: count,
        degenerate_count_ok,
        degenerate_size_ok,
        max_normalized,
    })
}
