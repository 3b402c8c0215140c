//! Exact integer arithmetic: factorisation and the multiplicative functions
//! built on top of it.

use num_integer::Integer;

use crate::error::{Error, Result};

/// Largest input accepted by [`factorize`].
pub const MAX_FACTOR_INPUT: u64 = 1 << 32;

/// Prime decomposition of a positive integer, primes strictly ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `(prime, exponent)` pairs in ascending prime order; empty for `n = 1`.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    /// Recomputes `n` from the factor list.
    pub fn product(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }
}

/// Trial-division factorisation for `1 <= n <= 2^32`.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::ZeroModulus);
    }
    if n > MAX_FACTOR_INPUT {
        return Err(Error::TooLarge {
            what: "factorisation input",
            value: n,
            limit: MAX_FACTOR_INPUT,
        });
    }
    let mut rest = n;
    let mut factors = Vec::new();
    let mut push = |rest: &mut u64, p: u64| {
        let mut e = 0;
        while *rest % p == 0 {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(&mut rest, 2);
    let mut p = 3;
    while p * p <= rest {
        push(&mut rest, p);
        p += 2;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { n, factors })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes in the inclusive range `[lo, hi]`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&n| is_prime(n)).collect()
}

pub fn euler_phi(f: &Factorization) -> u64 {
    f.factors
        .iter()
        .map(|&(p, e)| p.pow(e - 1) * (p - 1))
        .product()
}

pub fn moebius(f: &Factorization) -> i8 {
    if f.factors.iter().any(|&(_, e)| e >= 2) {
        0
    } else if f.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All divisors of `n`, ascending.
pub fn divisors(f: &Factorization) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in &f.factors {
        let current = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..current {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Squarefree divisors paired with their Moebius value; the only divisors that
/// contribute to a Moebius-weighted divisor sum.
pub fn moebius_divisors(f: &Factorization) -> Vec<(u64, i8)> {
    let mut out = vec![(1u64, 1i8)];
    for p in f.primes() {
        let current = out.len();
        for i in 0..current {
            let (d, mu) = out[i];
            out.push((d * p, -mu));
        }
    }
    out.sort_unstable();
    out
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// True when the unit group mod `n` is cyclic: `n` in {1, 2, 4, p^e, 2p^e}.
pub fn has_primitive_root(f: &Factorization) -> bool {
    match f.factors() {
        [] => true,
        [(2, e)] => *e <= 2,
        [(p, _)] => *p != 2,
        [(2, 1), (p, _)] => *p != 2,
        _ => false,
    }
}

/// Smallest positive generator of the (cyclic) unit group mod `n`.
pub fn primitive_root(n: u64) -> Result<u64> {
    let f = factorize(n)?;
    if !has_primitive_root(&f) {
        return Err(Error::NotCyclic(n));
    }
    let order = euler_phi(&f);
    let order_primes: Vec<u64> = factorize(order)?.primes().collect();
    (1..n.max(2))
        .find(|&g| {
            gcd(g, n) == 1
                && order_primes
                    .iter()
                    .all(|&l| mod_pow(g, order / l, n) != 1 % n)
        })
        .ok_or(Error::NotCyclic(n))
}

/// Dense discrete-logarithm table for a cyclic unit group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DlogTable {
    modulus: u64,
    generator: u64,
    logs: Vec<u32>,
}

impl DlogTable {
    const NON_UNIT: u32 = u32::MAX;

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Exponent `e` with `g^e = u (mod modulus)`, or `None` for non-units.
    pub fn get(&self, u: u64) -> Option<u32> {
        let v = self.logs[(u % self.modulus) as usize];
        (v != Self::NON_UNIT).then_some(v)
    }

    /// Number of units, i.e. the group order.
    pub fn len(&self) -> usize {
        self.logs.iter().filter(|&&v| v != Self::NON_UNIT).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Walks the powers of `g` mod `modulus`; fails unless they cover every unit.
pub fn discrete_log_table(modulus: u64, g: u64) -> Result<DlogTable> {
    let f = factorize(modulus)?;
    let phi = euler_phi(&f);
    if phi > u32::MAX as u64 / 2 {
        return Err(Error::TooLarge {
            what: "discrete-log table size",
            value: modulus,
            limit: u32::MAX as u64 / 2,
        });
    }
    let not_generator = Error::NotGenerator {
        generator: g,
        modulus,
    };
    if gcd(g, modulus) != 1 {
        return Err(not_generator);
    }
    let mut logs = vec![DlogTable::NON_UNIT; modulus as usize];
    let mut v = 1 % modulus;
    for e in 0..phi {
        if logs[v as usize] != DlogTable::NON_UNIT {
            return Err(not_generator);
        }
        logs[v as usize] = e as u32;
        v = (v as u128 * g as u128 % modulus as u128) as u64;
    }
    Ok(DlogTable {
        modulus,
        generator: g % modulus.max(2),
        logs,
    })
}
