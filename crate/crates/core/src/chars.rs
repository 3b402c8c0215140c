//! The group of Dirichlet characters mod `q`.
//!
//! Character values are stored as integer exponents `v` modulo the exponent
//! `L` of the unit group, so that `chi(n) = exp(2 pi i v / L)`. Orthogonality
//! and multiplicativity therefore hold exactly at the integer level; floating
//! point enters only when [`CharacterTable::value`] converts an exponent.
//!
//! The unit group is split into cyclic components via CRT: one per odd prime
//! power (generated by its smallest primitive root), one for `4` (generator
//! `3`), and two for `2^e` with `e >= 3` (`-1` of order 2 and `5` of order
//! `2^(e-2)`). A character is a tuple `(t_1, ..., t_r)` with `0 <= t_i < m_i`
//! and `chi(g_i) = exp(2 pi i t_i / m_i)`; characters are numbered in
//! lexicographic order of these tuples, so id 0 is always principal.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, euler_phi, factorize, gcd, DlogTable};
use crate::error::{Error, Result};

/// Largest modulus accepted by [`build_character_table`].
pub const MAX_MODULUS: u64 = 100_000;

/// Cap on the dense `phi(q) x q` exponent matrix (entries).
pub const MAX_TABLE_ENTRIES: u64 = 1 << 28;

/// Format tag written into serialized tables.
pub const TABLE_FORMAT_VERSION: u32 = 1;

const ZERO: u32 = u32::MAX;

/// One cyclic factor of the unit group mod `q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// Prime-power factor of `q` this component lives in.
    pub prime_power: u64,
    pub generator: u64,
    pub order: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharacterTable {
    q: u64,
    phi: usize,
    exponent_modulus: u32,
    components: Vec<Component>,
    /// Row-major `phi x q`; `ZERO` marks `gcd(n, q) > 1`.
    exponents: Vec<u32>,
    conjugates: Vec<usize>,
    roots: Vec<Complex64>,
}

/// `exp(2 pi i v / l)`, exact at multiples of a quarter turn.
fn unit_root(v: u64, l: u64) -> Complex64 {
    let v = v % l;
    if (4 * v) % l == 0 {
        return match 4 * v / l {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = (std::f64::consts::TAU * v as f64 / l as f64).sin_cos();
    Complex64::new(c, s)
}

/// Discrete logs for one component, indexed by residue mod its prime power.
fn component_logs(c: &Component, sign_part: Option<bool>) -> Result<Vec<u32>> {
    let pk = c.prime_power;
    match sign_part {
        None => {
            let t: DlogTable = arith::discrete_log_table(pk, c.generator)?;
            Ok((0..pk).map(|u| t.get(u).unwrap_or(ZERO)).collect())
        }
        // 2^e with e >= 3: u = (-1)^s 5^b.
        Some(want_sign) => {
            let mut logs = vec![ZERO; pk as usize];
            let mut v = 1u64;
            for b in 0..(pk / 4) {
                if want_sign {
                    logs[v as usize] = 0;
                    logs[(pk - v) as usize] = 1;
                } else {
                    logs[v as usize] = b as u32;
                    logs[(pk - v) as usize] = b as u32;
                }
                v = v * 5 % pk;
            }
            Ok(logs)
        }
    }
}

/// Builds the full character group mod `q` (`1 <= q <= 10^5`, dense
/// exponent matrix at most [`MAX_TABLE_ENTRIES`] entries).
pub fn build_character_table(q: u64) -> Result<CharacterTable> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    if q > MAX_MODULUS {
        return Err(Error::TooLarge {
            what: "character table modulus",
            value: q,
            limit: MAX_MODULUS,
        });
    }
    let f = factorize(q)?;
    let phi = euler_phi(&f);
    if phi * q > MAX_TABLE_ENTRIES {
        return Err(Error::TooLarge {
            what: "character table entries",
            value: phi * q,
            limit: MAX_TABLE_ENTRIES,
        });
    }

    let mut components = Vec::new();
    let mut logs: Vec<Vec<u32>> = Vec::new();
    for &(p, e) in f.factors() {
        let pk = p.pow(e);
        match (p, e) {
            (2, 1) => {}
            (2, 2) => {
                let c = Component {
                    prime_power: 4,
                    generator: 3,
                    order: 2,
                };
                logs.push(component_logs(&c, None)?);
                components.push(c);
            }
            (2, _) => {
                let sign = Component {
                    prime_power: pk,
                    generator: pk - 1,
                    order: 2,
                };
                let five = Component {
                    prime_power: pk,
                    generator: 5,
                    order: (pk / 4) as u32,
                };
                logs.push(component_logs(&sign, Some(true))?);
                logs.push(component_logs(&five, Some(false))?);
                components.push(sign);
                components.push(five);
            }
            _ => {
                let c = Component {
                    prime_power: pk,
                    generator: arith::primitive_root(pk)?,
                    order: (pk / p * (p - 1)) as u32,
                };
                logs.push(component_logs(&c, None)?);
                components.push(c);
            }
        }
    }

    let l = components
        .iter()
        .fold(1u64, |acc, c| arith::lcm(acc, c.order as u64));
    let weights: Vec<u64> = components.iter().map(|c| l / c.order as u64).collect();
    let phi = phi as usize;
    let qs = q as usize;

    // Per-residue component logs, pre-weighted by L / m_i.
    let residue_logs: Vec<Option<Vec<u64>>> = (0..q)
        .map(|n| {
            (gcd(n, q) == 1).then(|| {
                components
                    .iter()
                    .zip(&logs)
                    .zip(&weights)
                    .map(|((c, lg), w)| lg[(n % c.prime_power) as usize] as u64 * w)
                    .collect()
            })
        })
        .collect();

    let tuples: Vec<Vec<u32>> = (0..phi).map(|j| decode_tuple(&components, j)).collect();
    let mut exponents = vec![ZERO; phi * qs];
    for (j, t) in tuples.iter().enumerate() {
        let row = &mut exponents[j * qs..(j + 1) * qs];
        for (n, logs) in residue_logs.iter().enumerate() {
            if let Some(logs) = logs {
                let v = t
                    .iter()
                    .zip(logs)
                    .map(|(&ti, &lg)| ti as u64 * lg % l)
                    .sum::<u64>()
                    % l;
                row[n] = v as u32;
            }
        }
    }
    let conjugates = tuples
        .iter()
        .map(|t| {
            let conj: Vec<u32> = t
                .iter()
                .zip(&components)
                .map(|(&ti, c)| (c.order - ti) % c.order)
                .collect();
            encode_tuple(&components, &conj)
        })
        .collect();

    Ok(CharacterTable {
        q,
        phi,
        exponent_modulus: l as u32,
        roots: (0..l).map(|v| unit_root(v, l)).collect(),
        components,
        exponents,
        conjugates,
    })
}

/// Mixed-radix decoding, first component most significant.
fn decode_tuple(components: &[Component], mut j: usize) -> Vec<u32> {
    let mut t = vec![0u32; components.len()];
    for (ti, c) in t.iter_mut().zip(components).rev() {
        *ti = (j % c.order as usize) as u32;
        j /= c.order as usize;
    }
    t
}

fn encode_tuple(components: &[Component], t: &[u32]) -> usize {
    t.iter()
        .zip(components)
        .fold(0usize, |acc, (&ti, c)| acc * c.order as usize + ti as usize)
}

impl CharacterTable {
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Number of characters, `phi(q)`.
    pub fn len(&self) -> usize {
        self.phi
    }

    pub fn is_empty(&self) -> bool {
        self.phi == 0
    }

    pub fn exponent_modulus(&self) -> u32 {
        self.exponent_modulus
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn principal_index(&self) -> usize {
        0
    }

    pub fn conjugate(&self, j: usize) -> usize {
        self.conjugates[j]
    }

    pub fn conjugate_map(&self) -> &[usize] {
        &self.conjugates
    }

    /// Component exponent tuple `(t_1, ..., t_r)` of character `j`.
    pub fn tuple(&self, j: usize) -> Vec<u32> {
        decode_tuple(&self.components, j)
    }

    pub fn check_index(&self, j: usize) -> Result<()> {
        if j < self.phi {
            Ok(())
        } else {
            Err(Error::CharacterOutOfRange {
                index: j,
                q: self.q,
                count: self.phi,
            })
        }
    }

    /// Rejects out-of-range and principal ids.
    pub fn check_nonprincipal(&self, j: usize) -> Result<()> {
        self.check_index(j)?;
        if j == self.principal_index() {
            Err(Error::PrincipalCharacter(self.q))
        } else {
            Ok(())
        }
    }

    /// Ids of every non-principal character, ascending.
    pub fn nonprincipal(&self) -> impl Iterator<Item = usize> {
        1..self.phi
    }

    pub fn residue(&self, n: i64) -> usize {
        n.rem_euclid(self.q as i64) as usize
    }

    /// Exponent `v` with `chi_j(n) = exp(2 pi i v / L)`, or `None` when
    /// `gcd(n, q) > 1`.
    pub fn exponent(&self, j: usize, n: u64) -> Option<u32> {
        let v = self.row(j)[(n % self.q) as usize];
        (v != ZERO).then_some(v)
    }

    pub(crate) fn row(&self, j: usize) -> &[u32] {
        let qs = self.q as usize;
        &self.exponents[j * qs..(j + 1) * qs]
    }

    /// `exp(2 pi i v / L)`.
    pub fn root(&self, v: u32) -> Complex64 {
        self.roots[v as usize]
    }

    /// `chi_j(n)`, zero exactly when `gcd(n, q) > 1`.
    pub fn value(&self, j: usize, n: i64) -> Complex64 {
        match self.row(j)[self.residue(n)] {
            ZERO => Complex64::new(0.0, 0.0),
            v => self.roots[v as usize],
        }
    }

    /// `chi_j(r)` for `r = 0..q`, as complex numbers.
    pub fn row_values(&self, j: usize) -> Vec<Complex64> {
        self.row(j)
            .iter()
            .map(|&v| match v {
                ZERO => Complex64::new(0.0, 0.0),
                v => self.roots[v as usize],
            })
            .collect()
    }

    /// Sum over residues `r = 1..=q` of `chi_j(r) * w[r mod q]`.
    pub(crate) fn weighted_residue_sum(&self, j: usize, weights: &[f64]) -> Complex64 {
        debug_assert_eq!(weights.len(), self.q as usize);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&v, &w) in self.row(j).iter().zip(weights) {
            if v != ZERO {
                acc += self.roots[v as usize] * w;
            }
        }
        acc
    }

    /// Units `0 <= n < q` in ascending order.
    pub fn units(&self) -> Vec<u64> {
        self.row(0)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != ZERO)
            .map(|(n, _)| n as u64)
            .collect()
    }

    /// Serializable form with the exponent matrix spelled out.
    pub fn to_record(&self) -> TableRecord {
        TableRecord {
            version: TABLE_FORMAT_VERSION,
            q: self.q,
            phi: self.phi,
            exponent_modulus: self.exponent_modulus,
            principal_index: self.principal_index(),
            components: self.components.clone(),
            conjugate_map: self.conjugates.clone(),
            exponents: (0..self.phi)
                .map(|j| {
                    self.row(j)
                        .iter()
                        .map(|&v| if v == ZERO { -1 } else { v as i64 })
                        .collect()
                })
                .collect(),
        }
    }

    /// Rebuilds a table from its record after checking shape, ranges, the
    /// principal row and the conjugate involution.
    pub fn from_record(r: TableRecord) -> Result<Self> {
        let bad = |why: &str| Error::InvalidArgument(format!("table record for q = {}: {why}", r.q));
        if r.version != TABLE_FORMAT_VERSION {
            return Err(bad("format version mismatch"));
        }
        if r.q == 0 || r.exponent_modulus == 0 {
            return Err(bad("zero modulus"));
        }
        let qs = r.q as usize;
        if r.exponents.len() != r.phi
            || r.conjugate_map.len() != r.phi
            || r.principal_index != 0
            || r.exponents.iter().any(|row| row.len() != qs)
        {
            return Err(bad("shape mismatch"));
        }
        let l = r.exponent_modulus as i64;
        let mut exponents = Vec::with_capacity(r.phi * qs);
        for row in &r.exponents {
            for &v in row {
                exponents.push(match v {
                    -1 => ZERO,
                    v if (0..l).contains(&v) => v as u32,
                    _ => return Err(bad("exponent out of range")),
                });
            }
        }
        let table = CharacterTable {
            q: r.q,
            phi: r.phi,
            exponent_modulus: r.exponent_modulus,
            roots: (0..l as u64).map(|v| unit_root(v, l as u64)).collect(),
            components: r.components,
            exponents,
            conjugates: r.conjugate_map,
        };
        let principal_ok = table
            .row(0)
            .iter()
            .enumerate()
            .all(|(n, &v)| (v == 0) == (gcd(n as u64, table.q) == 1));
        let conj_ok = (0..table.phi).all(|j| {
            let c = table.conjugates[j];
            c < table.phi
                && table.conjugates[c] == j
                && table.row(j).iter().zip(table.row(c)).all(|(&a, &b)| {
                    (a == ZERO && b == ZERO)
                        || (a != ZERO && b != ZERO && (a as i64 + b as i64) % l == 0)
                })
        });
        if !principal_ok || !conj_ok {
            return Err(bad("principal row or conjugate map inconsistent"));
        }
        Ok(table)
    }
}

/// On-disk form of a [`CharacterTable`]; `-1` encodes a zero value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRecord {
    pub version: u32,
    pub q: u64,
    pub phi: usize,
    pub exponent_modulus: u32,
    pub principal_index: usize,
    pub components: Vec<Component>,
    pub conjugate_map: Vec<usize>,
    pub exponents: Vec<Vec<i64>>,
}

/// `max |sum_chi chi(n) conj(chi(l)) - phi(q) [n = l]|` over unit pairs.
pub fn orthogonality_defect(t: &CharacterTable) -> f64 {
    let units = t.units();
    let l = t.exponent_modulus as u64;
    let phi = t.phi as f64;
    let mut worst: f64 = 0.0;
    let mut column_n = vec![0u32; t.phi];
    for &n in &units {
        for (j, slot) in column_n.iter_mut().enumerate() {
            *slot = t.row(j)[n as usize];
        }
        for &m in &units {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &vn) in column_n.iter().enumerate() {
                let vm = t.row(j)[m as usize] as u64;
                acc += t.roots[((vn as u64 + l - vm) % l) as usize];
            }
            if n == m {
                acc -= phi;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// `max_{j != principal} |sum_{n=1}^{q} chi_j(n)|`.
pub fn nonprincipal_period_sum_defect(t: &CharacterTable) -> f64 {
    let ones = vec![1.0; t.q as usize];
    t.nonprincipal()
        .map(|j| t.weighted_residue_sum(j, &ones).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(q: u64) -> CharacterTable {
        build_character_table(q).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn mod4_has_one_nonprincipal_character() {
        let t = table(4);
        assert_eq!(t.len(), 2);
        assert_eq!(t.value(1, 3), Complex64::new(-1.0, 0.0));
        assert_eq!(t.value(1, 1), Complex64::new(1.0, 0.0));
        assert_eq!(t.value(1, 2), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mod5_characters_follow_the_generator() {
        let t = table(5);
        assert_eq!(t.len(), 4);
        assert_eq!(t.components()[0].generator, 2);
        for j in 0..4 {
            let want = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 4.0);
            assert!(close(t.value(j, 2), want, 1e-15));
            assert_eq!(t.value(j, 10), Complex64::new(0.0, 0.0));
        }
        // chi(2) = i, 3 = 2^3 mod 5 so chi(3) = i^3 = -i.
        let j = (0..4).find(|&j| t.value(j, 2) == Complex64::new(0.0, 1.0)).unwrap();
        assert_eq!(t.value(j, 3), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn trivial_moduli() {
        let t = table(1);
        assert_eq!(t.len(), 1);
        assert_eq!(t.value(0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(t.value(0, 17), Complex64::new(1.0, 0.0));
        assert_eq!(orthogonality_defect(&t), 0.0);
        let t = table(2);
        assert_eq!(t.len(), 1);
        assert_eq!(t.value(0, 3), Complex64::new(1.0, 0.0));
        assert_eq!(t.value(0, 4), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_oversized_moduli() {
        assert!(matches!(build_character_table(0), Err(Error::ZeroModulus)));
        assert!(matches!(
            build_character_table(MAX_MODULUS + 1),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            build_character_table(99_991),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn two_generator_structure_for_powers_of_two() {
        let t = table(16);
        assert_eq!(t.len(), 8);
        assert_eq!(t.components().len(), 2);
        assert_eq!(t.exponent_modulus(), 4);
        assert!(orthogonality_defect(&t) < 1e-12);
        let t = table(8 * 9 * 5);
        assert_eq!(t.len(), 4 * 6 * 4);
        assert!(orthogonality_defect(&t) < 1e-9 * t.len() as f64);
    }

    #[test]
    fn orthogonality_examples() {
        assert!(orthogonality_defect(&table(5)) < 1e-9);
        assert!(orthogonality_defect(&table(3)) < 1e-12);
        assert_eq!(orthogonality_defect(&table(1)), 0.0);
    }

    #[test]
    fn period_sum_examples() {
        assert!(nonprincipal_period_sum_defect(&table(4)) < 1e-12);
        assert!(nonprincipal_period_sum_defect(&table(7)) < 1e-9);
        assert!(nonprincipal_period_sum_defect(&table(12)) < 1e-9);
    }

    #[test]
    fn table_invariants() {
        for q in 1..=120u64 {
            let t = table(q);
            let l = t.exponent_modulus() as u64;
            // principal row
            for n in 0..q {
                assert_eq!(t.exponent(0, n).is_some(), gcd(n, q) == 1);
                if let Some(v) = t.exponent(0, n) {
                    assert_eq!(v, 0);
                }
            }
            // rows pairwise distinct
            let mut rows: Vec<&[u32]> = (0..t.len()).map(|j| t.row(j)).collect();
            rows.sort();
            rows.dedup();
            assert_eq!(rows.len(), t.len(), "q = {q}");
            let units = t.units();
            for j in 0..t.len() {
                let c = t.conjugate(j);
                assert_eq!(t.conjugate(c), j);
                for &n in &units {
                    let (v, w) = (t.exponent(j, n).unwrap(), t.exponent(c, n).unwrap());
                    assert_eq!((v as u64 + w as u64) % l, 0);
                    for &m in &units {
                        let vm = t.exponent(j, m).unwrap() as u64;
                        let vnm = t.exponent(j, n * m % q).unwrap() as u64;
                        assert_eq!((v as u64 + vm) % l, vnm, "q = {q}, j = {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn record_round_trip_is_exact() {
        for q in [1u64, 4, 12, 35, 64, 97] {
            let t = table(q);
            let back = CharacterTable::from_record(t.to_record()).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn record_rejects_tampering() {
        let mut r = table(7).to_record();
        r.exponents[2][3] = 99;
        assert!(CharacterTable::from_record(r).is_err());
        let mut r = table(7).to_record();
        r.conjugate_map.swap(1, 2);
        assert!(CharacterTable::from_record(r).is_err());
        let mut r = table(7).to_record();
        r.version += 1;
        assert!(CharacterTable::from_record(r).is_err());
    }
}
