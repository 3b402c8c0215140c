//! Mean values of `|L(1, chi, a)|^2` over the non-principal characters mod `q`.
//!
//! For each target the module computes the exact left-hand side from the
//! L-value routes of [`crate::lfun`], the closed-form main term as stated,
//! and where possible an independent prediction (the diagonal of the
//! orthogonality expansion). Residuals are normalised by the order of the
//! stated error term:
//!
//! | target   | left-hand side                                   | normalisation          |
//! |----------|--------------------------------------------------|------------------------|
//! | `lemma4` | `sum chi(a) |L(1, chi)|^2`                       | `log^2 q`              |
//! | `eq1`    | `sum |L(1, chi, a)|^2`                           | `phi(q) log q / sqrt q`|
//! | `thm1`   | `sum chi(k) |L(1, chi, a)|^2`                    | `phi(q) log q / sqrt q`|
//! | `thm2`   | `sum |S(chi, f)|^2 |L(1, chi, a)|^2`, `q = p`    | `p^(2 - 1/k)`          |
//!
//! Main terms are compared, never asserted: tension between a main term and
//! the computed mean value is reported through [`MeanValueReport::tension`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, euler_phi, factorize, gcd, moebius_divisors, Factorization};
use crate::chars::{build_character_table, CharacterTable};
use crate::error::{Error, Result};
use crate::expsum::{self, Polynomial};
use crate::lfun::{self, LVector, Method};
use crate::specfun::{digamma, floor_ratio, harmonic, harmonic_block, hurwitz_zeta, ShiftParam, ZETA2};

/// A report is in tension when `|lhs - main| > TENSION_RATIO * |main|`.
pub const TENSION_RATIO: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Lemma4,
    Eq1,
    Thm1,
    Thm2,
}

impl Target {
    pub const ALL: [Target; 4] = [Target::Lemma4, Target::Eq1, Target::Thm1, Target::Thm2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Lemma4 => "lemma4",
            Target::Eq1 => "eq1",
            Target::Thm1 => "thm1",
            Target::Thm2 => "thm2",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown mean-value target {s:?}")))
    }
}

/// Where tables and L-value vectors come from; implemented by the on-disk
/// cache as well as by [`Compute`].
pub trait LSource: Sync {
    fn table(&self, q: u64) -> Result<Arc<CharacterTable>>;
    fn l_vector(&self, t: &CharacterTable, a: &ShiftParam, method: Method) -> Result<Arc<LVector>>;
}

/// Recomputes everything on demand.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compute;

impl LSource for Compute {
    fn table(&self, q: u64) -> Result<Arc<CharacterTable>> {
        build_character_table(q).map(Arc::new)
    }

    fn l_vector(&self, t: &CharacterTable, a: &ShiftParam, method: Method) -> Result<Arc<LVector>> {
        lfun::l_vector(t, a, method).map(Arc::new)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanValueQuery {
    pub target: Target,
    /// `q`, or the prime `p` for `thm2`.
    pub modulus: u64,
    /// Shift `a`; for `lemma4` the integer character argument.
    pub a: ShiftParam,
    /// Character argument `k` for `thm1`.
    pub k: Option<u64>,
    pub f: Option<Polynomial>,
    pub method: Method,
}

impl MeanValueQuery {
    pub fn lemma4(q: u64, a: u64) -> Self {
        Self::new(Target::Lemma4, q, ShiftParam::integer(a), None, None)
    }

    pub fn eq1(q: u64, a: ShiftParam) -> Self {
        Self::new(Target::Eq1, q, a, None, None)
    }

    pub fn thm1(q: u64, k: u64, a: ShiftParam) -> Self {
        Self::new(Target::Thm1, q, a, Some(k), None)
    }

    pub fn thm2(p: u64, f: Polynomial, a: ShiftParam) -> Self {
        Self::new(Target::Thm2, p, a, None, Some(f))
    }

    fn new(target: Target, modulus: u64, a: ShiftParam, k: Option<u64>, f: Option<Polynomial>) -> Self {
        Self {
            target,
            modulus,
            a,
            k,
            f,
            method: Method::ClosedDirect,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// The `k` column of a report: `k` for `thm1`, `deg f` for `thm2`.
    pub fn k_column(&self) -> Option<u64> {
        match self.target {
            Target::Thm1 => self.k,
            Target::Thm2 => self.f.as_ref().map(|f| f.degree() as u64),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.modulus;
        let reject = |why: String| Err(Error::InvalidQuery(format!("{} q = {q}: {why}", self.target)));
        if q < 3 {
            return reject("modulus must be at least 3".into());
        }
        let a = self.a;
        match self.target {
            Target::Lemma4 => match a.as_integer() {
                Some(n) if n >= 2 && gcd(n, q) == 1 => {}
                _ => return reject(format!("a = {a} must be an integer >= 2 coprime to q")),
            },
            Target::Eq1 => {
                if a.is_below_one() {
                    return reject(format!("a = {a} must be at least 1"));
                }
            }
            Target::Thm1 => {
                check_k(q, self.k).or_else(reject)?;
                if a.is_below_one() {
                    return reject(format!("a = {a} must be at least 1"));
                }
            }
            Target::Thm2 => {
                if !arith::is_prime(q) {
                    return reject("modulus must be an odd prime".into());
                }
                match &self.f {
                    None => return reject("a polynomial f is required".into()),
                    Some(f) if f.vanishes_mod(q) => {
                        return reject(format!("p divides every coefficient of f = {f}"))
                    }
                    Some(_) => {}
                }
                if a.is_below_one() {
                    return reject(format!("a = {a} must be at least 1"));
                }
                if !a.is_coprime_to(q) {
                    return reject(format!("integer a = {a} must be coprime to p"));
                }
            }
        }
        Ok(())
    }
}

fn check_k(q: u64, k: Option<u64>) -> std::result::Result<(), String> {
    match k {
        Some(k) if k >= 2 && gcd(k, q) == 1 => Ok(()),
        Some(k) => Err(format!("k = {k} must be an integer >= 2 coprime to q")),
        None => Err("k is required".into()),
    }
}

fn phi_of(q: u64) -> Result<(Factorization, f64)> {
    let f = factorize(q)?;
    let phi = euler_phi(&f) as f64;
    Ok((f, phi))
}

/// `prod_{p | q} (1 - p^-2)`.
fn inverse_square_product(f: &Factorization) -> f64 {
    f.primes().map(|p| 1.0 - 1.0 / (p as f64 * p as f64)).product()
}

/// `sum_{d | q} mu(d)/d * H_{floor(a / (scale d))}`.
fn moebius_harmonic(f: &Factorization, a: &ShiftParam, scale: u64) -> f64 {
    moebius_divisors(f)
        .into_iter()
        .map(|(d, mu)| mu as f64 / d as f64 * harmonic(floor_ratio(a, scale * d)))
        .sum()
}

/// `sum_{d | q} mu(d)/d^2 * zeta(2, a/d)`.
fn moebius_hurwitz(f: &Factorization, a: &ShiftParam) -> Result<f64> {
    moebius_divisors(f)
        .into_iter()
        .map(|(d, mu)| Ok(mu as f64 / (d as f64 * d as f64) * hurwitz_zeta(2.0, a.value() / d as f64)?))
        .sum()
}

/// `sum_{chi != chi_0} chi(x) |L_chi|^2` over one L-vector.
pub fn character_weighted_moment(t: &CharacterTable, l: &LVector, x: u64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in t.nonprincipal() {
        let (Some(chi), Some(v)) = (t.exponent(j, x), l.get(j)) else {
            continue;
        };
        acc += t.root(chi) * v.norm_sqr();
    }
    acc
}

/// `sum_{chi != chi_0} chi(a) |L(1, chi)|^2`; `l0` must hold the `a = 0` values.
pub fn lemma4_lhs(t: &CharacterTable, l0: &LVector, a: u64) -> Complex64 {
    character_weighted_moment(t, l0, a)
}

/// `(phi(q)/a) zeta(2) prod_{p | q} (1 - p^-2)`.
pub fn lemma4_main(q: u64, a: u64) -> Result<f64> {
    let (f, phi) = phi_of(q)?;
    Ok(phi / a as f64 * ZETA2 * inverse_square_product(&f))
}

/// `sum_{chi != chi_0} |L(1, chi, a)|^2`.
pub fn eq1_lhs(l: &LVector) -> f64 {
    l.values.iter().flatten().map(|v| v.norm_sqr()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Eq1Main {
    pub full: f64,
    /// The Hurwitz-zeta term alone; equals the diagonal
    /// `phi(q) sum_{(n, q) = 1} (n + a)^-2`.
    pub first_term_only: f64,
}

/// `phi(q) sum_{d|q} mu(d)/d^2 zeta(2, a/d) - (4 phi(q)/a) sum_{d|q} mu(d)/d H_{floor(a/d)}`.
pub fn eq1_main(q: u64, a: &ShiftParam) -> Result<Eq1Main> {
    let (f, phi) = phi_of(q)?;
    let first = phi * moebius_hurwitz(&f, a)?;
    let second = 4.0 * phi / a.value() * moebius_harmonic(&f, a, 1);
    Ok(Eq1Main {
        full: first - second,
        first_term_only: first,
    })
}

/// `sum_{chi != chi_0} chi(k) |L(1, chi, a)|^2`.
pub fn thm1_lhs(t: &CharacterTable, l: &LVector, k: u64) -> Complex64 {
    character_weighted_moment(t, l, k)
}

/// `phi(q) / (a (k - 1)) sum_{d|q} mu(d)/d sum_{l = floor(a/(kd)) + 1}^{floor(a/d)} 1/l`.
pub fn thm1_main(q: u64, k: u64, a: &ShiftParam) -> Result<f64> {
    let (f, phi) = phi_of(q)?;
    let inner: f64 = moebius_divisors(&f)
        .into_iter()
        .map(|(d, mu)| {
            mu as f64 / d as f64 * harmonic_block(floor_ratio(a, k * d), floor_ratio(a, d))
        })
        .sum();
    Ok(phi / (a.value() * (k - 1) as f64) * inner)
}

/// The `m = kn` diagonal of the orthogonality expansion of the `thm1` sum:
/// `phi(q) sum_{n >= 1, (n, q) = 1} 1 / ((n + a)(kn + a))`, evaluated by
/// Moebius inversion and partial fractions in closed digamma form.
pub fn thm1_diagonal_oracle(q: u64, k: u64, a: &ShiftParam) -> Result<f64> {
    check_k(q, Some(k)).map_err(Error::InvalidQuery)?;
    let (f, phi) = phi_of(q)?;
    let kf = k as f64;
    let av = a.value();
    let mut acc = 0.0;
    for (d, mu) in moebius_divisors(&f) {
        let df = d as f64;
        let inner = if a.is_zero() {
            ZETA2 / (kf * df * df)
        } else {
            (digamma(1.0 + av / df)? - digamma(1.0 + av / (kf * df))?) / (av * (kf - 1.0) * df)
        };
        acc += mu as f64 * inner;
    }
    Ok(phi * acc)
}

fn thm2_parts(t: &CharacterTable, f: &Polynomial) -> Result<u64> {
    let p = t.modulus();
    if !arith::is_prime(p) || p < 3 {
        return Err(Error::NotPrime(p));
    }
    if f.vanishes_mod(p) {
        return Err(Error::InvalidPolynomial(format!("p = {p} divides every coefficient of {f}")));
    }
    Ok(p)
}

/// `sum_{chi != chi_0} |S(chi, f)|^2 |L(1, chi, a)|^2`.
pub fn thm2_lhs_direct(t: &CharacterTable, f: &Polynomial, l: &LVector) -> Result<f64> {
    thm2_parts(t, f)?;
    let sq = expsum::weighted_char_sum_sq_all(t, f)?;
    Ok(t.nonprincipal()
        .filter_map(|j| Some(sq[j] * l.get(j)?.norm_sqr()))
        .sum())
}

/// The same quantity through the squared-sum decomposition:
/// `(p-1) sum |L|^2 + sum_{x=2}^{p-1} [sum_y e(g(y,x)/p)] sum_chi chi(x) |L|^2`.
pub fn thm2_lhs_decomposed(t: &CharacterTable, f: &Polynomial, l: &LVector) -> Result<f64> {
    Ok(thm2_decomposition(t, f, l)?.total().re)
}

/// Terms of the decomposition split by branch: degenerate `x` (where the
/// inner sum is exactly `p - 1`) and generic `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thm2Decomposition {
    pub diagonal: f64,
    pub generic: Complex64,
    pub degenerate: Complex64,
}

impl Thm2Decomposition {
    pub fn total(&self) -> Complex64 {
        self.generic + self.degenerate + self.diagonal
    }
}

pub fn thm2_decomposition(t: &CharacterTable, f: &Polynomial, l: &LVector) -> Result<Thm2Decomposition> {
    let p = thm2_parts(t, f)?;
    let inner = expsum::difference_sums(p, f)?;
    let mut generic = Complex64::new(0.0, 0.0);
    let mut degenerate = Complex64::new(0.0, 0.0);
    for x in 2..p {
        let term = inner[x as usize] * character_weighted_moment(t, l, x);
        if expsum::difference_poly(f, x, p)?.degenerate {
            degenerate += term;
        } else {
            generic += term;
        }
    }
    Ok(Thm2Decomposition {
        diagonal: (p - 1) as f64 * eq1_lhs(l),
        generic,
        degenerate,
    })
}

/// `p^2 sum_{d|p} mu(d)/d^2 zeta(2, a/d) - (4p^2/a) sum_{d|p} mu(d)/d H_{floor(a/d)}`.
///
/// The degree only enters through the normalisation; it is accepted here so
/// call sites read like the formula they evaluate.
pub fn thm2_main(p: u64, a: &ShiftParam, _k_deg: usize) -> Result<f64> {
    let (f, _) = phi_of(p)?;
    let p2 = p as f64 * p as f64;
    Ok(p2 * moebius_hurwitz(&f, a)? - 4.0 * p2 / a.value() * moebius_harmonic(&f, a, 1))
}

/// Expansion of the `thm1` sum through `L(1, chi, a) = L(1, chi) - a T(chi)`
/// with `T(chi) = sum chi(n) / (n (n + a))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossTerms {
    pub q: u64,
    pub k: u64,
    pub a: ShiftParam,
    /// `sum chi(k) |L(1, chi)|^2`.
    pub unshifted: Complex64,
    /// `sum chi(k) T(chi) L(1, conj chi)`.
    pub m1: Complex64,
    /// `sum chi(k) T(conj chi) L(1, chi)`.
    pub m2: Complex64,
    /// `sum chi(k) |T(chi)|^2`.
    pub m3: Complex64,
    /// `thm1` left-hand side from the direct digamma route.
    pub lhs: Complex64,
    /// `|lhs - (unshifted - a m1 - a m2 + a^2 m3)|`.
    pub recombination_defect: f64,
    pub predicted: PredictedCrossTerms,
}

/// Leading expressions for each piece of the expansion, as stated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PredictedCrossTerms {
    pub unshifted: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

pub fn cross_terms(t: &CharacterTable, k: u64, a: &ShiftParam) -> Result<CrossTerms> {
    let q = t.modulus();
    MeanValueQuery::thm1(q, k, *a).validate()?;
    let l0 = lfun::l_vector(t, &ShiftParam::zero(), Method::ClosedDirect)?;
    let la = lfun::l_vector(t, a, Method::ClosedDirect)?;
    let tails = lfun::tail_vector(t, a)?;
    let zero = Complex64::new(0.0, 0.0);
    let (mut unshifted, mut m1, mut m2, mut m3) = (zero, zero, zero, zero);
    for j in t.nonprincipal() {
        let chi_k = t.value(j, k as i64);
        let c = t.conjugate(j);
        let (l, l_bar) = (l0.get(j).unwrap(), l0.get(c).unwrap());
        let (tj, tj_bar) = (tails[j].unwrap(), tails[c].unwrap());
        unshifted += chi_k * l.norm_sqr();
        m1 += chi_k * tj * l_bar;
        m2 += chi_k * tj_bar * l;
        m3 += chi_k * tj.norm_sqr();
    }
    let av = a.value();
    let lhs = thm1_lhs(t, &la, k);
    let recombined = unshifted - m1 * av - m2 * av + m3 * av * av;

    let (f, phi) = phi_of(q)?;
    let kf = k as f64;
    let zeta_part = ZETA2 * inverse_square_product(&f);
    let h_a = moebius_harmonic(&f, a, 1);
    let h_ak = moebius_harmonic(&f, a, k);
    let predicted = PredictedCrossTerms {
        unshifted: phi / kf * zeta_part,
        m1: phi / (av * kf) * zeta_part - phi / (av * av * kf) * h_a,
        m2: phi / (av * kf) * zeta_part + phi / (av * av) * h_ak,
        m3: phi / (av * av * kf) * zeta_part + phi / (av.powi(3) * kf * (kf - 1.0)) * h_a
            - kf * phi / (av.powi(3) * (kf - 1.0)) * h_ak,
    };
    Ok(CrossTerms {
        q,
        k,
        a: *a,
        unshifted,
        m1,
        m2,
        m3,
        lhs,
        recombination_defect: (lhs - recombined).norm(),
        predicted,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanValueReport {
    pub query: MeanValueQuery,
    pub lhs: Complex64,
    pub lhs_imag_abs: f64,
    pub paper_main: f64,
    pub oracle_main: Option<f64>,
    /// `Re(lhs) - paper_main`.
    pub residual: f64,
    pub normalized_residual: f64,
    /// Largest deviation of the left-hand side between L-value routes.
    pub route_agreement: f64,
    /// `|residual| > 0.5 |paper_main|`.
    pub tension: bool,
    pub notes: Vec<String>,
}

fn left_hand_side(query: &MeanValueQuery, t: &CharacterTable, l: &LVector) -> Result<Complex64> {
    Ok(match query.target {
        Target::Lemma4 => lemma4_lhs(t, l, query.a.numerator()),
        Target::Eq1 => Complex64::new(eq1_lhs(l), 0.0),
        Target::Thm1 => thm1_lhs(t, l, query.k.expect("validated")),
        Target::Thm2 => Complex64::new(thm2_lhs_direct(t, query.f.as_ref().expect("validated"), l)?, 0.0),
    })
}

/// Evaluates one query: exact left-hand side, stated main term, oracle
/// prediction, residuals, and route agreement against the other closed route.
pub fn evaluate(query: &MeanValueQuery, src: &dyn LSource) -> Result<MeanValueReport> {
    query.validate()?;
    let q = query.modulus;
    let a = query.a;
    let t = src.table(q)?;
    let l_shift = match query.target {
        Target::Lemma4 => ShiftParam::zero(),
        _ => a,
    };
    let l = src.l_vector(&t, &l_shift, query.method)?;
    let lhs = left_hand_side(query, &t, &l)?;
    let other = src.l_vector(&t, &l_shift, query.method.closed_counterpart())?;
    let route_agreement = (left_hand_side(query, &t, &other)? - lhs).norm();

    let (_, phi) = phi_of(q)?;
    let log_q = (q as f64).ln();
    let mut notes = Vec::new();
    let (paper_main, oracle_main, scale) = match query.target {
        Target::Lemma4 => (lemma4_main(q, a.numerator())?, None, log_q * log_q),
        Target::Eq1 => {
            let m = eq1_main(q, &a)?;
            (m.full, Some(m.first_term_only), phi * log_q / (q as f64).sqrt())
        }
        Target::Thm1 => {
            let k = query.k.expect("validated");
            (
                thm1_main(q, k, &a)?,
                Some(thm1_diagonal_oracle(q, k, &a)?),
                phi * log_q / (q as f64).sqrt(),
            )
        }
        Target::Thm2 => {
            let deg = query.f.as_ref().expect("validated").degree();
            notes.push("divisor sums taken over d | p".to_string());
            if !a.is_integer() {
                notes.push("(a, p) = 1 not applicable to non-integer a".to_string());
            }
            let first = eq1_main(q, &a)?.first_term_only;
            (
                thm2_main(q, &a, deg)?,
                Some((q - 1) as f64 * first),
                (q as f64).powf(2.0 - 1.0 / deg as f64),
            )
        }
    };
    let residual = lhs.re - paper_main;
    Ok(MeanValueReport {
        query: query.clone(),
        lhs,
        lhs_imag_abs: lhs.im.abs(),
        paper_main,
        oracle_main,
        residual,
        normalized_residual: residual / scale,
        route_agreement,
        tension: residual.abs() > TENSION_RATIO * paper_main.abs(),
        notes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepParams {
    pub a: ShiftParam,
    pub k: Option<u64>,
    pub f: Option<Polynomial>,
    pub method: Method,
}

impl SweepParams {
    pub fn new(a: ShiftParam) -> Self {
        Self {
            a,
            k: None,
            f: None,
            method: Method::ClosedDirect,
        }
    }

    pub fn query(&self, target: Target, modulus: u64) -> MeanValueQuery {
        MeanValueQuery {
            target,
            modulus,
            a: self.a,
            k: self.k,
            f: self.f.clone(),
            method: self.method,
        }
    }
}

/// Least-squares fit `log|residual| = log C + beta log q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub constant: f64,
    pub points: usize,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Option<PowerFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && y.abs() > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    let n = logs.len() as f64;
    if logs.len() < 2 {
        return None;
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    Some(PowerFit {
        exponent,
        constant: (my - exponent * mx).exp(),
        points: logs.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedModulus {
    pub modulus: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualSeries {
    pub target: Target,
    /// One report per accepted modulus, ascending.
    pub reports: Vec<MeanValueReport>,
    pub skipped: Vec<SkippedModulus>,
    pub fit: Option<PowerFit>,
    /// `max |normalized_residual|`; zero for an empty series.
    pub max_abs_normalized: f64,
    pub tension_moduli: Vec<u64>,
}

/// Evaluates `target` at every modulus (deduplicated, ascending) on a pool of
/// `workers` threads (`0` = rayon default). Moduli that violate the target's
/// hypotheses are skipped and logged; numeric failures abort the sweep.
pub fn residual_sweep(
    target: Target,
    moduli: &[u64],
    params: &SweepParams,
    src: &dyn LSource,
    workers: usize,
) -> Result<ResidualSeries> {
    let mut moduli = moduli.to_vec();
    moduli.sort_unstable();
    moduli.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let outcomes: Vec<(u64, Result<MeanValueReport>)> = pool.install(|| {
        moduli
            .par_iter()
            .map(|&q| {
                let query = params.query(target, q);
                let outcome = match query.validate() {
                    Ok(()) => evaluate(&query, src),
                    Err(e) => Err(e),
                };
                (q, outcome)
            })
            .collect()
    });
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for (q, outcome) in outcomes {
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) if e.is_validation() => {
                log::warn!("skipping {target} at q = {q}: {e}");
                skipped.push(SkippedModulus {
                    modulus: q,
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    let points: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.query.modulus as f64, r.residual))
        .collect();
    Ok(ResidualSeries {
        target,
        fit: fit_power_law(&points),
        max_abs_normalized: reports
            .iter()
            .map(|r| r.normalized_residual.abs())
            .fold(0.0, f64::max),
        tension_moduli: reports
            .iter()
            .filter(|r| r.tension)
            .map(|r| r.query.modulus)
            .collect(),
        reports,
        skipped,
    })
}
