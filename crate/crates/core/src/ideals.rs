//! Principal ideals in class-number-one fields, prime splitting, `psi(N)`
//! and the main-term indicator.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::arith::{factorize, kronecker_prime, quadratic_roots_mod_p, rat_int, rational_sqrt};
use crate::error::{invalid, Error, Result};
use crate::field::{BasisTag, FieldElement, TotallyRealField};

/// A (fractional) principal ideal, stored by its canonical generator.
#[derive(Clone, Debug)]
pub struct PrincipalIdeal {
    generator: FieldElement,
    norm: BigRational,
}

impl PrincipalIdeal {
    /// The ideal `x O`, with `x` replaced by its canonical generator.
    pub fn new(field: &TotallyRealField, x: &FieldElement) -> Result<Self> {
        if x.is_zero() {
            return invalid("zero ideal");
        }
        let generator = canonical_generator(field, x);
        let norm = field.abs_norm(&generator);
        Ok(PrincipalIdeal { generator, norm })
    }

    pub fn unit(field: &TotallyRealField) -> Self {
        Self::new(field, &FieldElement::one()).expect("nonzero")
    }

    pub fn from_int(field: &TotallyRealField, n: i64) -> Result<Self> {
        Self::new(field, &FieldElement::int(n))
    }

    pub fn generator(&self) -> &FieldElement {
        &self.generator
    }

    pub fn norm(&self) -> &BigRational {
        &self.norm
    }

    /// Norm as an integer; `None` for non-integral ideals.
    pub fn norm_u64(&self) -> Option<u64> {
        if self.norm.is_integer() {
            self.norm.numer().to_u64()
        } else {
            None
        }
    }

    pub fn is_integral(&self) -> bool {
        self.generator.is_integral()
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.norm.is_one() && self.is_integral()
    }

    pub fn eq_ideal(&self, field: &TotallyRealField, other: &PrincipalIdeal) -> bool {
        field.associated(&self.generator, &other.generator)
    }

    pub fn mul(&self, field: &TotallyRealField, other: &PrincipalIdeal) -> PrincipalIdeal {
        Self::new(field, &field.mul(&self.generator, &other.generator)).expect("nonzero")
    }

    /// `self` divides `other` (i.e. `other` is contained in `self`).
    pub fn divides(&self, field: &TotallyRealField, other: &PrincipalIdeal) -> bool {
        field.divides(&self.generator, &other.generator)
    }

    pub fn contains(&self, field: &TotallyRealField, x: &FieldElement) -> bool {
        field.divides(&self.generator, x)
    }

    /// `self + other = O` for integral ideals.
    pub fn coprime(&self, field: &TotallyRealField, other: &PrincipalIdeal) -> bool {
        if !self.is_integral() || !other.is_integral() {
            return false;
        }
        factor_ideal(field, self).iter().all(|(p, _)| !p.contains(field, &other.generator))
    }
}

/// Totally positive when some unit multiple is, otherwise `sigma_1 > 0`;
/// then unit-reduced so the generator is reproducible.
pub fn canonical_generator(field: &TotallyRealField, x: &FieldElement) -> FieldElement {
    if field.degree() == 1 {
        return if x.a.is_negative() { -x } else { x.clone() };
    }
    let mut g = x.clone();
    let s1 = field.sign(&g, 1);
    let s2 = field.sign(&g, 2);
    if s1 != s2 && field.unit_norm() == -1 {
        g = field.mul(&g, field.fundamental_unit().expect("quadratic"));
    }
    if field.sign(&g, 1) == Ordering::Less {
        g = -&g;
    }
    field.reduce_by_units(&g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Splitting {
    Split,
    Ramified,
    Inert,
}

/// A prime ideal `P` above the rational prime `p`.
#[derive(Clone, Debug)]
pub struct PrimeIdeal {
    pub p: u64,
    pub kind: Splitting,
    /// `w = root mod P` for degree-one primes.
    pub root: Option<u64>,
    pub generator: FieldElement,
    pub norm: u64,
}

impl PrimeIdeal {
    /// Membership of an integral element.
    pub fn contains(&self, field: &TotallyRealField, x: &FieldElement) -> bool {
        if !x.is_integral() {
            return false;
        }
        let p = BigInt::from(self.p);
        let a = x.a.numer();
        let b = x.b.numer();
        if field.degree() == 1 {
            return (a % &p).is_zero();
        }
        match self.root {
            None => (a % &p).is_zero() && (b % &p).is_zero(),
            Some(r) => ((a + b * BigInt::from(r)) % &p).is_zero(),
        }
    }

    /// `P`-adic valuation of a nonzero element.
    pub fn valuation(&self, field: &TotallyRealField, x: &FieldElement) -> i64 {
        assert!(!x.is_zero());
        let mut v = 0i64;
        let mut y = x.clone();
        while !y.is_integral() {
            y = field.mul(&y, &self.generator);
            v -= 1;
        }
        if v < 0 {
            return v;
        }
        loop {
            if !self.contains(field, &y) {
                return v;
            }
            y = field.div(&y, &self.generator).expect("nonzero");
            v += 1;
        }
    }
}

/// Elements of norm `+-n` in a unit-reduced box, one per `b` sign class.
fn elements_of_norm(field: &TotallyRealField, n: u64) -> Vec<FieldElement> {
    let d = field.radicand().expect("quadratic");
    let ep = field.totally_positive_unit();
    let lam = field.embed_f64(&ep, 1) / field.embed_f64(&ep, 2);
    let nf = n as f64;
    // |sigma_1| <= sqrt(n lam), |sigma_2| <= sqrt(n) after unit reduction
    let bsqrt = ((nf * lam).sqrt() + nf.sqrt()) * 1.0001 + 1.0;
    let scale = if field.basis_tag() == BasisTag::Golden { 1.0 } else { 2.0 };
    let bmax = (bsqrt / (scale * (d as f64).sqrt())).ceil() as i128 + 1;
    let (t, nw) = field.w_trace_norm();
    let (t, nw) = (t as i128, nw as i128);
    let mut out = Vec::new();
    for b in 0..=bmax {
        for target in [n as i128, -(n as i128)] {
            // a^2 + a b t + b^2 nw - target = 0
            let disc = b * b * t * t - 4 * (b * b * nw - target);
            if disc < 0 {
                continue;
            }
            let s = (disc as u128).isqrt() as i128;
            if s * s != disc {
                continue;
            }
            for num in [-b * t + s, -b * t - s] {
                if num % 2 == 0 {
                    let a = num / 2;
                    if b == 0 && a < 0 {
                        continue;
                    }
                    out.push(FieldElement::from_ints(a as i64, b as i64));
                }
            }
        }
    }
    out
}

/// True iff every prime below the Minkowski bound is principal.
pub fn verify_class_number_one(field: &TotallyRealField) -> bool {
    if field.degree() == 1 {
        return true;
    }
    let df = field.discriminant();
    let bound = ((df as f64).sqrt() / 2.0).floor() as u64;
    for p in 2..=bound {
        if !crate::arith::is_prime(p) {
            continue;
        }
        if kronecker_prime(df, p) == -1 {
            continue;
        }
        if elements_of_norm(field, p).is_empty() {
            return false;
        }
    }
    true
}

/// Narrow class number one; requires class number one.
pub fn is_narrow_class_number_one(field: &TotallyRealField) -> Result<bool> {
    if field.degree() == 1 {
        return Ok(true);
    }
    if !verify_class_number_one(field) {
        return Err(Error::Unsupported(format!(
            "Q(sqrt {}) does not have class number one",
            field.radicand().unwrap()
        )));
    }
    Ok(field.unit_norm() == -1)
}

/// The prime ideals above the rational prime `p`.
pub fn primes_above(field: &TotallyRealField, p: u64) -> Vec<PrimeIdeal> {
    if field.degree() == 1 {
        return vec![PrimeIdeal {
            p,
            kind: Splitting::Split,
            root: None,
            generator: FieldElement::int(p as i64),
            norm: p,
        }];
    }
    let (t, nw) = field.w_trace_norm();
    let roots = quadratic_roots_mod_p(-t, nw, p);
    if roots.is_empty() {
        return vec![PrimeIdeal {
            p,
            kind: Splitting::Inert,
            root: None,
            generator: FieldElement::int(p as i64),
            norm: p * p,
        }];
    }
    let kind = if roots.len() == 1 { Splitting::Ramified } else { Splitting::Split };
    let cands = elements_of_norm(field, p);
    roots
        .into_iter()
        .map(|r| {
            let mut pi = PrimeIdeal { p, kind, root: Some(r), generator: FieldElement::one(), norm: p };
            let g = cands
                .iter()
                .find(|x| pi.contains(field, x))
                .cloned()
                .expect("class number one field has a generator of every prime");
            pi.generator = canonical_generator(field, &g);
            pi
        })
        .collect()
}

/// Prime factorisation of an integral principal ideal.
pub fn factor_ideal(field: &TotallyRealField, n: &PrincipalIdeal) -> Vec<(PrimeIdeal, u32)> {
    let nm = n.norm_u64().expect("integral ideal of machine-size norm");
    let mut out = Vec::new();
    for (p, _) in factorize(nm) {
        for pi in primes_above(field, p) {
            let v = pi.valuation(field, n.generator());
            if v > 0 {
                out.push((pi, v as u32));
            }
        }
    }
    out
}

/// `psi(N) = Nm(N) prod_{P | N} (1 + 1/Nm P)`.
pub fn psi_of_level(field: &TotallyRealField, n: &PrincipalIdeal) -> Result<u64> {
    if !n.is_integral() {
        return invalid("level must be integral");
    }
    let mut num = n.norm_u64().ok_or_else(|| Error::Unsupported("level norm too large".into()))?;
    for (pi, _) in factor_ideal(field, n) {
        num = num / pi.norm * (pi.norm + 1);
    }
    Ok(num)
}

/// Solution data of `[b]^2 [n] = 1` in class number one.
#[derive(Clone, Debug)]
pub struct ClassSolution {
    pub t: usize,
    pub b_list: Vec<PrincipalIdeal>,
    pub eta_list: Vec<FieldElement>,
}

pub fn solve_class_equation(field: &TotallyRealField, n: &PrincipalIdeal) -> Result<ClassSolution> {
    let eta = n.generator().clone();
    if !field.is_totally_positive(&eta) {
        return Err(Error::Unsupported(format!("ideal ({eta}) has no totally positive generator")));
    }
    Ok(ClassSolution { t: 1, b_list: vec![PrincipalIdeal::unit(field)], eta_list: vec![eta] })
}

/// Square root in `F`, if `x` is a square.
pub fn field_sqrt(field: &TotallyRealField, x: &FieldElement) -> Option<FieldElement> {
    if x.is_zero() {
        return Some(FieldElement::zero());
    }
    if field.degree() == 1 {
        return rational_sqrt(&x.a).map(FieldElement::rational);
    }
    let d = rat_int(field.radicand().unwrap());
    let (a, b) = field.sqrt_coords(x);
    let n = field.norm(x);
    let n0 = rational_sqrt(&n)?;
    let two = rat_int(2);
    for sgn in [n0.clone(), -n0] {
        let p2 = (&a + &sgn) / &two;
        let q2 = (&a - &sgn) / (&two * &d);
        let (Some(p), Some(q)) = (rational_sqrt(&p2), rational_sqrt(&q2)) else {
            continue;
        };
        for q in [q.clone(), -q] {
            let cand = field.from_sqrt_coords(&p, &q);
            let (ca, cb) = field.sqrt_coords(&field.mul(&cand, &cand));
            if ca == a && cb == b {
                return Some(cand);
            }
        }
    }
    None
}

/// Main-term indicator: 1 iff there is `s` in the inverse different with
/// `m1 m2 O = s^2 n` and `m1, m2` in `s O`.
pub fn main_term_indicator(
    field: &TotallyRealField,
    m1: &FieldElement,
    m2: &FieldElement,
    n: &PrincipalIdeal,
) -> u8 {
    main_term_witness(field, m1, m2, n).map_or(0, |_| 1)
}

/// The element `s` realising the main-term condition, if any.
pub fn main_term_witness(
    field: &TotallyRealField,
    m1: &FieldElement,
    m2: &FieldElement,
    n: &PrincipalIdeal,
) -> Option<FieldElement> {
    if m1.is_zero() || m2.is_zero() {
        return None;
    }
    let dg = field.different_generator();
    let prod = field.mul(m1, m2);
    let alpha = field.div(&field.mul(&prod, &field.mul(dg, dg)), n.generator()).ok()?;
    for u in field.unit_class_representatives().u {
        let Some(beta) = field_sqrt(field, &field.mul(&alpha, &u)) else {
            continue;
        };
        if !beta.is_integral() {
            continue;
        }
        let s = field.div(&beta, dg).ok()?;
        if field.divides(&s, m1) && field.divides(&s, m2) {
            return Some(s);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn class_number_one_table() {
        let h1 = [2, 3, 5, 6, 7, 11, 13, 14, 17, 19, 21, 22, 23, 29, 31, 33, 37, 38, 41, 43, 46, 47];
        let hbig = [10, 15, 26, 30, 34, 35, 39, 42];
        for d in h1 {
            let f = TotallyRealField::quadratic(d).unwrap();
            assert!(verify_class_number_one(&f), "d={d}");
        }
        for d in hbig {
            let f = TotallyRealField::quadratic(d).unwrap();
            assert!(!verify_class_number_one(&f), "d={d}");
        }
        assert!(verify_class_number_one(&TotallyRealField::rationals()));
    }

    #[test]
    fn narrow_class_number() {
        let f2 = TotallyRealField::quadratic(2).unwrap();
        assert!(is_narrow_class_number_one(&f2).unwrap());
        let f3 = TotallyRealField::quadratic(3).unwrap();
        assert!(!is_narrow_class_number_one(&f3).unwrap());
        assert!(is_narrow_class_number_one(&TotallyRealField::rationals()).unwrap());
        let f10 = TotallyRealField::quadratic(10).unwrap();
        assert!(matches!(is_narrow_class_number_one(&f10), Err(Error::Unsupported(_))));
    }

    #[test]
    fn class_equation() {
        let q = TotallyRealField::rationals();
        let sol = solve_class_equation(&q, &PrincipalIdeal::from_int(&q, 7).unwrap()).unwrap();
        assert_eq!(sol.eta_list, vec![FieldElement::int(7)]);
        let sol = solve_class_equation(&q, &PrincipalIdeal::unit(&q)).unwrap();
        assert_eq!(sol.eta_list, vec![FieldElement::one()]);
        let f = TotallyRealField::quadratic(2).unwrap();
        let n = PrincipalIdeal::new(&f, &f.elem(0, 1)).unwrap();
        let sol = solve_class_equation(&f, &n).unwrap();
        assert_eq!(sol.t, 1);
        let eta = &sol.eta_list[0];
        assert!(f.is_totally_positive(eta));
        assert_eq!(f.abs_norm(eta), rat_int(2));
        assert!(f.associated(eta, &f.elem(0, 1)));
        assert_eq!(eta, &f.elem(2, 1));
        // Q(sqrt 3): sqrt 3 has negative norm and every unit has norm +1
        let f3 = TotallyRealField::quadratic(3).unwrap();
        let n3 = PrincipalIdeal::new(&f3, &f3.elem(0, 1)).unwrap();
        assert!(solve_class_equation(&f3, &n3).is_err());
    }

    #[test]
    fn psi_examples() {
        let q = TotallyRealField::rationals();
        assert_eq!(psi_of_level(&q, &PrincipalIdeal::unit(&q)).unwrap(), 1);
        assert_eq!(psi_of_level(&q, &PrincipalIdeal::from_int(&q, 6).unwrap()).unwrap(), 12);
        let f = TotallyRealField::quadratic(2).unwrap();
        assert_eq!(psi_of_level(&f, &PrincipalIdeal::from_int(&f, 3).unwrap()).unwrap(), 10);
        // 7 splits in Q(sqrt 2): 49 (8/7)^2 = 64
        assert_eq!(psi_of_level(&f, &PrincipalIdeal::from_int(&f, 7).unwrap()).unwrap(), 64);
        // 2 ramifies: (2) = (sqrt 2)^2, psi = 4 * 3/2
        assert_eq!(psi_of_level(&f, &PrincipalIdeal::from_int(&f, 2).unwrap()).unwrap(), 6);
    }

    #[test]
    fn prime_splitting() {
        let f = TotallyRealField::quadratic(5).unwrap();
        let ps = primes_above(&f, 11);
        assert_eq!(ps.len(), 2);
        for p in &ps {
            assert_eq!(f.abs_norm(&p.generator), rat_int(11));
            assert!(p.contains(&f, &p.generator));
        }
        assert!(!ps[0].contains(&f, &ps[1].generator));
        assert_eq!(primes_above(&f, 2)[0].kind, Splitting::Inert);
        assert_eq!(primes_above(&f, 5)[0].kind, Splitting::Ramified);
        let n = PrincipalIdeal::from_int(&f, 20).unwrap();
        let fac = factor_ideal(&f, &n);
        let total: u64 = fac.iter().map(|(p, e)| p.norm.pow(*e)).product();
        assert_eq!(total, 400);
    }

    #[test]
    fn field_square_roots() {
        let f = TotallyRealField::quadratic(2).unwrap();
        for (a, b) in [(3, 1), (1, 1), (0, 1), (5, -2), (7, 0)] {
            let x = f.elem(a, b);
            let sq = f.mul(&x, &x);
            let r = field_sqrt(&f, &sq).unwrap();
            assert!(r == x || r == -&x);
        }
        assert!(field_sqrt(&f, &f.elem(2, 0)).is_some());
        assert!(field_sqrt(&f, &f.elem(3, 0)).is_none());
        assert!(field_sqrt(&f, &f.elem(1, 1)).is_none());
        let f5 = TotallyRealField::quadratic(5).unwrap();
        let x = f5.elem(2, 3);
        assert!(field_sqrt(&f5, &f5.mul(&x, &x)).is_some());
    }

    /// Classical oracle: indicator of `exists d | gcd(m1, n)` with `m1 n = d^2 m2`.
    fn classical_indicator(m1: i64, m2: i64, n: i64) -> u8 {
        (1..=m1.min(n)).any(|d| m1 % d == 0 && n % d == 0 && m1 * n == d * d * m2) as u8
    }

    #[test]
    fn indicator_over_q_matches_hecke_relation() {
        let q = TotallyRealField::rationals();
        for m1 in 1..=12 {
            for m2 in 1..=12 {
                for n in 1..=12 {
                    let ni = PrincipalIdeal::from_int(&q, n).unwrap();
                    let got = main_term_indicator(&q, &FieldElement::int(m1), &FieldElement::int(m2), &ni);
                    assert_eq!(got, classical_indicator(m1, m2, n), "({m1},{m2},{n})");
                }
            }
        }
        let one = PrincipalIdeal::unit(&q);
        assert_eq!(main_term_indicator(&q, &FieldElement::one(), &FieldElement::one(), &one), 1);
        // m1 = 4, m2 = 1: s = 2 solves s^2 = m1 m2, but 2 does not divide m2
        assert_eq!(main_term_indicator(&q, &FieldElement::int(4), &FieldElement::one(), &one), 0);
    }

    #[test]
    fn indicator_odd_power_vanishes() {
        let f = TotallyRealField::quadratic(2).unwrap();
        let dg = f.different_generator().clone();
        let m2 = f.inv(&dg).unwrap();
        let one = PrincipalIdeal::unit(&f);
        for l in [1, 3, 5, 7] {
            let m1 = m2.scale(&rat_int(3i64.pow(l)));
            assert_eq!(main_term_indicator(&f, &m1, &m2, &one), 0, "l={l}");
        }
        assert_eq!(main_term_indicator(&f, &m2, &m2, &one), 1);
        let m1 = m2.scale(&rat_int(9));
        // s = 3/d_gen satisfies s^2 = m1 m2 but does not divide m2
        assert_eq!(main_term_indicator(&f, &m1, &m2, &one), 0);
        let n9 = PrincipalIdeal::from_int(&f, 9).unwrap();
        assert_eq!(main_term_indicator(&f, &m1, &m2, &n9), 1);
    }

    #[test]
    fn indicator_symmetry_and_unit_invariance() {
        let f = TotallyRealField::quadratic(5).unwrap();
        let dinv = f.inv(f.different_generator()).unwrap();
        let eps = f.fundamental_unit().unwrap().clone();
        let e2 = f.mul(&eps, &eps);
        for (a, b, n) in [(1, 0, 1), (2, 1, 1), (4, 0, 1), (1, 1, 4), (3, 1, 11)] {
            let m1 = f.mul(&dinv, &f.elem(a, b));
            let m2 = f.mul(&dinv, &f.elem(b + 1, 0));
            let ni = PrincipalIdeal::from_int(&f, n).unwrap();
            let x = main_term_indicator(&f, &m1, &m2, &ni);
            assert_eq!(x, main_term_indicator(&f, &m2, &m1, &ni));
            assert_eq!(x, main_term_indicator(&f, &f.mul(&e2, &m1), &m2, &ni));
        }
    }

    #[test]
    fn ideal_canonical_and_equality() {
        let f = TotallyRealField::quadratic(2).unwrap();
        let a = PrincipalIdeal::new(&f, &f.elem(3, 1)).unwrap();
        let eps = f.elem(1, 1);
        let b = PrincipalIdeal::new(&f, &f.mul(&f.elem(3, 1), &f.pow(&eps, 5).unwrap())).unwrap();
        assert!(a.eq_ideal(&f, &b));
        assert_eq!(a.generator(), b.generator());
        assert!(f.is_totally_positive(a.generator()));
        assert_eq!(a.norm(), &rat_int(7));
        let ab = a.mul(&f, &b);
        assert_eq!(ab.norm(), &rat_int(49));
    }
}
