//! Exact Kloosterman sums `S(m1, m2; n; c)` with trivial nebentypus.
//!
//! `S = sum_{s1 s2 = n mod c} e(Tr((m1 s1 + m2 s2)/c))`, summed over pairs of
//! residues of `O/cO`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{ext_gcd, lcm_u64, rat_to_f64};
use crate::cyclotomic::CycloInt;
use crate::error::{invalid, Error, Result};
use crate::field::{FieldElement, TotallyRealField};
use crate::ideals::{factor_ideal, PrimeIdeal, PrincipalIdeal, Splitting};

/// Default cap on residue pairs visited by the double-loop enumeration.
pub const DEFAULT_PAIR_BUDGET: u64 = 10_000_000;

/// An exact Kloosterman sum `sum_a coeffs[a] zeta_q^a` plus a floating value.
#[derive(Clone, Debug)]
pub struct KloostermanValue {
    pub q: u64,
    pub coeffs: Vec<i64>,
    pub approx: Complex64,
    pub err: f64,
}

impl KloostermanValue {
    pub fn from_cyclo(c: CycloInt) -> Self {
        let (approx, err) = c.approx();
        KloostermanValue { q: c.q, coeffs: c.coeffs, approx, err }
    }

    pub fn to_cyclo(&self) -> CycloInt {
        CycloInt { q: self.q, coeffs: self.coeffs.clone() }
    }

    pub fn is_zero_exact(&self) -> bool {
        self.to_cyclo().is_zero()
    }

    pub fn eq_exact(&self, o: &KloostermanValue) -> bool {
        self.to_cyclo().eq_exact(&o.to_cyclo())
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.to_cyclo().as_integer()
    }

    pub fn mul(&self, o: &KloostermanValue) -> KloostermanValue {
        Self::from_cyclo(self.to_cyclo().mul(&o.to_cyclo()))
    }
}

/// `Tr(x) mod 1` in `[0, 1)`.
pub fn theta_angle(field: &TotallyRealField, x: &FieldElement) -> BigRational {
    let t = field.trace(x);
    &t - t.floor()
}

/// `O / cO` with residues `x + y w`, `0 <= x < h11`, `0 <= y < h22`.
struct ResidueRing {
    h11: i64,
    h12: i64,
    h22: i64,
    wp: i64,
    wq: i64,
    /// Primes dividing `c`: `(p, Some(root))` for degree one, `(p, None)` for inert.
    primes: Vec<(i64, Option<i64>)>,
    phi: u64,
}

impl ResidueRing {
    fn new(field: &TotallyRealField, c: &FieldElement) -> Result<Self> {
        let (ca, cb) = c.to_i64_pair().ok_or_else(|| Error::Validation(format!("modulus {c} must be integral")))?;
        if ca == 0 && cb == 0 {
            return invalid("modulus must be nonzero");
        }
        let (t, n) = field.w_trace_norm();
        let (wp, wq) = (-n, t);
        let ideal = PrincipalIdeal::new(field, c)?;
        let (h11, h12, h22) = if field.degree() == 1 {
            (ca.abs(), 0, 1)
        } else {
            // c = (ca, cb), c w = (cb wp, ca + cb wq)
            let v1 = (ca as i128, cb as i128);
            let v2 = ((cb * wp) as i128, (ca + cb * wq) as i128);
            let (g, u, v) = ext_gcd(v1.1, v2.1);
            let h22 = g;
            let h12 = u * v1.0 + v * v2.0;
            let det = (v1.0 * v2.1 - v1.1 * v2.0).abs();
            let h11 = det / h22;
            (h11 as i64, h12.rem_euclid(h11) as i64, h22 as i64)
        };
        let mut primes = Vec::new();
        let mut phi = (h11 as u64) * (h22 as u64);
        for (pi, _) in factor_ideal(field, &ideal) {
            primes.push((pi.p as i64, pi.root.map(|r| r as i64)));
            phi = phi / pi.norm * (pi.norm - 1);
        }
        if field.degree() == 1 {
            primes.iter_mut().for_each(|p| p.1 = Some(0));
        }
        Ok(ResidueRing { h11, h12, h22, wp, wq, primes, phi })
    }

    fn size(&self) -> usize {
        (self.h11 as u64).saturating_mul(self.h22 as u64) as usize
    }

    fn index(&self, x: i64, y: i64) -> usize {
        (x * self.h22 + y) as usize
    }

    fn coords(&self, idx: usize) -> (i64, i64) {
        let i = idx as i64;
        (i / self.h22, i % self.h22)
    }

    fn reduce(&self, a: i128, b: i128) -> (i64, i64) {
        let h22 = self.h22 as i128;
        let y = b.rem_euclid(h22);
        let k = (b - y) / h22;
        let a = a - k * self.h12 as i128;
        (a.rem_euclid(self.h11 as i128) as i64, y as i64)
    }

    fn mul(&self, s: (i64, i64), t: (i64, i64)) -> (i64, i64) {
        let (x1, y1, x2, y2) = (s.0 as i128, s.1 as i128, t.0 as i128, t.1 as i128);
        let yy = y1 * y2;
        self.reduce(x1 * x2 + yy * self.wp as i128, x1 * y2 + x2 * y1 + yy * self.wq as i128)
    }

    fn pow(&self, s: (i64, i64), mut e: u64) -> (i64, i64) {
        let mut acc = self.reduce(1, 0);
        let mut b = s;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    fn is_unit(&self, s: (i64, i64)) -> bool {
        self.primes.iter().all(|&(p, root)| match root {
            Some(r) => (s.0 as i128 + s.1 as i128 * r as i128).rem_euclid(p as i128) != 0,
            None => s.0.rem_euclid(p) != 0 || s.1.rem_euclid(p) != 0,
        })
    }

    fn inverse(&self, s: (i64, i64)) -> (i64, i64) {
        self.pow(s, self.phi - 1)
    }
}

/// `t_j = Tr(m w^j / c)`, `j = 0, 1`.
fn trace_pair(field: &TotallyRealField, m: &FieldElement, c: &FieldElement) -> Result<[BigRational; 2]> {
    let mc = field.div(m, c)?;
    let t0 = field.trace(&mc);
    let t1 = if field.degree() == 1 { BigRational::zero() } else { field.trace(&field.mul(&mc, &field.w())) };
    Ok([t0, t1])
}

fn angle_numerators(ts: &[BigRational], q: u64) -> Vec<i64> {
    ts.iter()
        .map(|t| {
            let v = t * BigRational::from_integer(BigInt::from(q));
            debug_assert!(v.is_integer());
            v.to_integer().mod_floor(&BigInt::from(q)).to_i64().unwrap()
        })
        .collect()
}

fn check_inputs(field: &TotallyRealField, m1: &FieldElement, m2: &FieldElement, n: &FieldElement) -> Result<()> {
    for (name, m) in [("m1", m1), ("m2", m2)] {
        if !field.in_inverse_different(m) {
            return invalid(format!("{name} = {m} is not in the inverse different"));
        }
    }
    if !n.is_integral() {
        return invalid(format!("n = {n} must be integral"));
    }
    Ok(())
}

/// Exact global Kloosterman sum.
pub fn global_kloosterman(
    field: &TotallyRealField,
    m1: &FieldElement,
    m2: &FieldElement,
    n: &FieldElement,
    c: &FieldElement,
    pair_budget: u64,
) -> Result<KloostermanValue> {
    check_inputs(field, m1, m2, n)?;
    let ring = ResidueRing::new(field, c)?;
    let t1 = trace_pair(field, m1, c)?;
    let t2 = trace_pair(field, m2, c)?;
    let q = t1
        .iter()
        .chain(t2.iter())
        .map(|t| t.denom().to_u64().unwrap_or(1))
        .fold(1u64, lcm_u64);
    let size = ring.size();
    let work = (size as u64).saturating_add(q);
    if work > pair_budget {
        return Err(Error::Resource(format!("{size} residues and {q} angles exceed budget {pair_budget}")));
    }
    let a1 = angle_numerators(&t1, q);
    let a2 = angle_numerators(&t2, q);
    let qi = q as i64;
    let angle = |a: &[i64], s: (i64, i64)| -> i64 {
        ((a[0] as i128 * s.0 as i128 + a[1] as i128 * s.1 as i128).rem_euclid(qi as i128)) as i64
    };
    let ang1: Vec<i64> = (0..size).map(|i| angle(&a1, ring.coords(i))).collect();
    let ang2: Vec<i64> = (0..size).map(|i| angle(&a2, ring.coords(i))).collect();
    let (na, nb) = n.to_i64_pair().ok_or_else(|| Error::Validation("n too large".into()))?;
    let nres = ring.reduce(na as i128, nb as i128);
    let merge = |mut a: Vec<i64>, b: Vec<i64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    let coeffs: Vec<i64> = if ring.is_unit(nres) {
        (0..size)
            .into_par_iter()
            .fold(
                || vec![0i64; q as usize],
                |mut acc, i| {
                    let s1 = ring.coords(i);
                    if ring.is_unit(s1) {
                        let s2 = ring.mul(nres, ring.inverse(s1));
                        let j = ring.index(s2.0, s2.1);
                        acc[((ang1[i] + ang2[j]) % qi) as usize] += 1;
                    }
                    acc
                },
            )
            .reduce(|| vec![0i64; q as usize], merge)
    } else {
        let pairs = (size as u64).saturating_mul(size as u64);
        if pairs > pair_budget {
            return Err(Error::Resource(format!("{pairs} residue pairs exceed budget {pair_budget}")));
        }
        (0..size)
            .into_par_iter()
            .fold(
                || vec![0i64; q as usize],
                |mut acc, i| {
                    let s1 = ring.coords(i);
                    for j in 0..size {
                        if ring.mul(s1, ring.coords(j)) == nres {
                            acc[((ang1[i] + ang2[j]) % qi) as usize] += 1;
                        }
                    }
                    acc
                },
            )
            .reduce(|| vec![0i64; q as usize], merge)
    };
    Ok(KloostermanValue::from_cyclo(CycloInt { q, coeffs }))
}

/// Local Kloosterman sum at the prime `P`: with `c = pi^e v`, `v` prime to `P`,
/// it is the global sum with modulus `pi^e` and `m_i` replaced by `v^-1 m_i`.
pub fn local_kloosterman(
    field: &TotallyRealField,
    m1: &FieldElement,
    m2: &FieldElement,
    n: &FieldElement,
    c: &FieldElement,
    prime: &PrimeIdeal,
    pair_budget: u64,
) -> Result<KloostermanValue> {
    let e = prime.valuation(field, c);
    if e < 0 {
        return invalid("modulus must be integral");
    }
    if e == 0 {
        return Ok(KloostermanValue::from_cyclo(CycloInt::one()));
    }
    let pe = field.pow(&prime.generator, e)?;
    let v = field.div(c, &pe)?;
    let ring = ResidueRing::new(field, &pe)?;
    let (va, vb) = v.to_i64_pair().ok_or_else(|| Error::Validation("cofactor too large".into()))?;
    let vinv = ring.inverse(ring.reduce(va as i128, vb as i128));
    let vinv = field.elem(vinv.0, vinv.1);
    global_kloosterman(field, &field.mul(&vinv, m1), &field.mul(&vinv, m2), n, &pe, pair_budget)
}

/// Global sum versus the product of local sums, compared exactly.
pub fn check_product_identity(
    field: &TotallyRealField,
    m1: &FieldElement,
    m2: &FieldElement,
    n: &FieldElement,
    c: &FieldElement,
    pair_budget: u64,
) -> Result<bool> {
    let global = global_kloosterman(field, m1, m2, n, c, pair_budget)?;
    let ideal = PrincipalIdeal::new(field, c)?;
    let mut prod = CycloInt::one();
    for (pi, _) in factor_ideal(field, &ideal) {
        let local = local_kloosterman(field, m1, m2, n, c, &pi, pair_budget)?;
        prod = prod.mul(&local.to_cyclo());
    }
    Ok(global.to_cyclo().eq_exact(&prod))
}

/// `|S| <= Nm(n) Nm(c)`, exactly when `S` is a rational integer.
pub fn check_weil_type_bound(
    field: &TotallyRealField,
    m1: &FieldElement,
    m2: &FieldElement,
    n: &FieldElement,
    c: &FieldElement,
    pair_budget: u64,
) -> Result<bool> {
    let s = global_kloosterman(field, m1, m2, n, c, pair_budget)?;
    let bound = field.abs_norm(n) * field.abs_norm(c);
    if let Some(v) = s.as_integer() {
        return Ok(BigRational::from_integer(BigInt::from(v).abs()) <= bound);
    }
    Ok(s.approx.norm() <= rat_to_f64(&bound) + s.err)
}

/// `S(m1, m2; 1; s) != 0` for a squarefree rational integer `s`.
pub fn nonvanishing_lemma_check(
    field: &TotallyRealField,
    m1: &FieldElement,
    m2: &FieldElement,
    s_tilde: i64,
) -> Result<bool> {
    if s_tilde <= 0 || !crate::arith::is_squarefree(s_tilde as u64) {
        return invalid(format!("level {s_tilde} must be a positive squarefree integer"));
    }
    let s = global_kloosterman(field, m1, m2, &FieldElement::one(), &FieldElement::int(s_tilde), DEFAULT_PAIR_BUDGET)?;
    Ok(!s.is_zero_exact())
}

/// Image of a prime-modulus local sum under `zeta_p -> 1` in `F_p`; the
/// nonvanishing argument predicts `-1`.
pub fn local_sum_mod_p(value: &KloostermanValue, p: u64) -> i64 {
    let total: i64 = value.coeffs.iter().sum();
    total.rem_euclid(p as i64)
}

/// Whether a prime splits, is inert or ramifies, for reporting.
pub fn splitting_label(kind: Splitting) -> &'static str {
    match kind {
        Splitting::Split => "split",
        Splitting::Ramified => "ramified",
        Splitting::Inert => "inert",
    }
}
