//! Exact arithmetic in `Q` and real quadratic fields `Q(sqrt d)`.
//!
//! Elements are stored as `a + b*w` over the integral basis `{1, w}`, where
//! `w = sqrt d` for `d = 2,3 mod 4` and `w = (1 + sqrt d)/2` for `d = 1 mod 4`.

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::arith::{is_integer, is_squarefree, rat_int, rat_to_f64};
use crate::error::{invalid, Error, Result};
use crate::interval::{sqrt_lower, sqrt_upper, Interval};

/// Which integral basis the field uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisTag {
    /// `F = Q`, `w` unused.
    Rational,
    /// `w = sqrt d`.
    Sqrt,
    /// `w = (1 + sqrt d)/2`.
    Golden,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    pub a: BigRational,
    pub b: BigRational,
}

impl FieldElement {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        FieldElement { a, b }
    }

    pub fn from_ints(a: i64, b: i64) -> Self {
        FieldElement { a: rat_int(a), b: rat_int(b) }
    }

    pub fn rational(q: BigRational) -> Self {
        FieldElement { a: q, b: BigRational::zero() }
    }

    pub fn int(n: i64) -> Self {
        Self::from_ints(n, 0)
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        FieldElement { a: &self.a * q, b: &self.b * q }
    }

    /// Both coordinates are integers, i.e. the element lies in the ring of integers.
    pub fn is_integral(&self) -> bool {
        is_integer(&self.a) && is_integer(&self.b)
    }

    /// Integer coordinates, if both fit in `i64`.
    pub fn to_i64_pair(&self) -> Option<(i64, i64)> {
        if !self.is_integral() {
            return None;
        }
        Some((self.a.numer().to_i64()?, self.b.numer().to_i64()?))
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        FieldElement { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        FieldElement { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { a: -self.a.clone(), b: -self.b.clone() }
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, o: FieldElement) -> FieldElement {
        &self + &o
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, o: FieldElement) -> FieldElement {
        &self - &o
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let coef = |q: &BigRational| -> String {
            if q.is_one() {
                String::new()
            } else if *q == -BigRational::one() {
                "-".into()
            } else {
                q.to_string()
            }
        };
        if self.a.is_zero() {
            write!(f, "{}w", coef(&self.b))
        } else if self.b.is_negative() {
            let c = coef(&-self.b.clone());
            write!(f, "{}-{}w", self.a, c)
        } else {
            write!(f, "{}+{}w", self.a, coef(&self.b))
        }
    }
}

/// Sign of `p + s*sqrt(d)` for `d > 0` non-square, decided exactly.
pub fn sign_p_s_sqrt(p: &BigRational, s: &BigRational, d: i64) -> Ordering {
    let sp = p.cmp(&BigRational::zero());
    let ss = s.cmp(&BigRational::zero());
    if ss == Ordering::Equal {
        return sp;
    }
    if sp == Ordering::Equal || sp == ss {
        return ss;
    }
    let lhs = p * p;
    let rhs = s * s * rat_int(d);
    match lhs.cmp(&rhs) {
        Ordering::Greater => sp,
        Ordering::Less => ss,
        Ordering::Equal => Ordering::Equal,
    }
}

/// Units modulo squares, with the totally positive subset.
#[derive(Clone, Debug)]
pub struct UnitData {
    pub u: Vec<FieldElement>,
    pub u_plus: Vec<FieldElement>,
}

#[derive(Clone, Debug)]
pub struct TotallyRealField {
    r: usize,
    d: i64,
    tag: BasisTag,
    disc: i64,
    unit: FieldElement,
    unit_norm: i32,
    d_gen: FieldElement,
    d_gen_totally_positive: bool,
    sqrt_d: Interval,
}

impl TotallyRealField {
    pub fn rationals() -> Self {
        TotallyRealField {
            r: 1,
            d: 1,
            tag: BasisTag::Rational,
            disc: 1,
            unit: FieldElement::int(-1),
            unit_norm: -1,
            d_gen: FieldElement::one(),
            d_gen_totally_positive: true,
            sqrt_d: Interval::from_int(1),
        }
    }

    /// `Q` for `r = 1`, `Q(sqrt d)` for `r = 2`.
    pub fn new(r: usize, d: i64) -> Result<Self> {
        match r {
            1 => Ok(Self::rationals()),
            2 => Self::quadratic(d),
            _ => Err(Error::Unsupported(format!("degree {r} (only 1 and 2 are supported)"))),
        }
    }

    pub fn quadratic(d: i64) -> Result<Self> {
        if d < 2 {
            return invalid(format!("radicand must be >= 2, got {d}"));
        }
        if !is_squarefree(d as u64) {
            return invalid(format!("radicand {d} is not squarefree"));
        }
        if d > 1_000_000_000_000 {
            return Err(Error::Unsupported(format!("radicand {d} too large")));
        }
        let tag = if d % 4 == 1 { BasisTag::Golden } else { BasisTag::Sqrt };
        let disc = if tag == BasisTag::Golden { d } else { 4 * d };
        let dq = rat_int(d);
        let sqrt_d = Interval::new(sqrt_lower(&dq, 110), sqrt_upper(&dq, 110));
        let mut f = TotallyRealField {
            r: 2,
            d,
            tag,
            disc,
            unit: FieldElement::one(),
            unit_norm: 1,
            d_gen: FieldElement::one(),
            d_gen_totally_positive: true,
            sqrt_d,
        };
        let (unit, norm) = f.fundamental_unit_cf()?;
        f.unit = unit;
        f.unit_norm = norm;
        let (g, tp) = f.canonical_different();
        f.d_gen = g;
        f.d_gen_totally_positive = tp;
        Ok(f)
    }

    pub fn degree(&self) -> usize {
        self.r
    }

    /// Radicand `d`, `None` for `Q`.
    pub fn radicand(&self) -> Option<i64> {
        (self.r == 2).then_some(self.d)
    }

    pub fn basis_tag(&self) -> BasisTag {
        self.tag
    }

    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    /// Fundamental unit `eps > 1`; `None` for `Q`.
    pub fn fundamental_unit(&self) -> Option<&FieldElement> {
        (self.r == 2).then_some(&self.unit)
    }

    /// Norm of the fundamental unit (`-1` for `Q`, where the only units are `+-1`).
    pub fn unit_norm(&self) -> i32 {
        self.unit_norm
    }

    /// Canonical generator of the different ideal.
    pub fn different_generator(&self) -> &FieldElement {
        &self.d_gen
    }

    /// Whether the different has a totally positive generator (false iff `Nm(eps) = +1`).
    pub fn different_is_totally_positive(&self) -> bool {
        self.d_gen_totally_positive
    }

    /// Enclosure of `sqrt d` with relative width at most `2^-100`.
    pub fn sqrt_d(&self) -> &Interval {
        &self.sqrt_d
    }

    pub fn w(&self) -> FieldElement {
        if self.r == 1 {
            FieldElement::one()
        } else {
            FieldElement::from_ints(0, 1)
        }
    }

    /// `(P, Q)` with `w^2 = P + Q w`.
    fn w_square(&self) -> (BigRational, BigRational) {
        match self.tag {
            BasisTag::Rational => (BigRational::one(), BigRational::zero()),
            BasisTag::Sqrt => (rat_int(self.d), BigRational::zero()),
            BasisTag::Golden => (rat_int((self.d - 1) / 4), BigRational::one()),
        }
    }

    /// Trace and norm of `w` (the coefficients of its minimal polynomial `x^2 - t x + n`).
    pub fn w_trace_norm(&self) -> (i64, i64) {
        match self.tag {
            BasisTag::Rational => (2, 1),
            BasisTag::Sqrt => (0, -self.d),
            BasisTag::Golden => (1, (1 - self.d) / 4),
        }
    }

    /// Element from integer coordinates over `{1, w}`.
    pub fn elem(&self, a: i64, b: i64) -> FieldElement {
        if self.r == 1 {
            assert!(b == 0, "Q has no w coordinate");
        }
        FieldElement::from_ints(a, b)
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        if self.r == 1 {
            return FieldElement::rational(&x.a * &y.a);
        }
        let (p, q) = self.w_square();
        let bb = &x.b * &y.b;
        FieldElement {
            a: &x.a * &y.a + &bb * &p,
            b: &x.a * &y.b + &x.b * &y.a + &bb * &q,
        }
    }

    pub fn conj(&self, x: &FieldElement) -> FieldElement {
        match self.tag {
            BasisTag::Rational => x.clone(),
            BasisTag::Sqrt => FieldElement { a: x.a.clone(), b: -x.b.clone() },
            BasisTag::Golden => FieldElement { a: &x.a + &x.b, b: -x.b.clone() },
        }
    }

    pub fn trace(&self, x: &FieldElement) -> BigRational {
        match self.tag {
            BasisTag::Rational => x.a.clone(),
            BasisTag::Sqrt => &x.a * rat_int(2),
            BasisTag::Golden => &x.a * rat_int(2) + &x.b,
        }
    }

    /// Signed norm `N'(x) = sigma_1(x) sigma_2(x)`.
    pub fn norm(&self, x: &FieldElement) -> BigRational {
        if self.r == 1 {
            return x.a.clone();
        }
        let (t, n) = self.w_trace_norm();
        &x.a * &x.a + &x.a * &x.b * rat_int(t) + &x.b * &x.b * rat_int(n)
    }

    pub fn abs_norm(&self, x: &FieldElement) -> BigRational {
        self.norm(x).abs()
    }

    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement> {
        if x.is_zero() {
            return invalid("inverse of zero");
        }
        if self.r == 1 {
            return Ok(FieldElement::rational(x.a.recip()));
        }
        let n = self.norm(x);
        Ok(self.conj(x).scale(&n.recip()))
    }

    pub fn div(&self, x: &FieldElement, y: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    pub fn pow(&self, x: &FieldElement, n: i64) -> Result<FieldElement> {
        let base = if n < 0 { self.inv(x)? } else { x.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = FieldElement::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        Ok(acc)
    }

    /// `(A, B)` with `x = A + B sqrt d` (for `Q`, `B = 0`).
    pub fn sqrt_coords(&self, x: &FieldElement) -> (BigRational, BigRational) {
        match self.tag {
            BasisTag::Rational => (x.a.clone(), BigRational::zero()),
            BasisTag::Sqrt => (x.a.clone(), x.b.clone()),
            BasisTag::Golden => {
                let half = x.b.clone() / rat_int(2);
                (&x.a + &half, half)
            }
        }
    }

    pub fn from_sqrt_coords(&self, a: &BigRational, b: &BigRational) -> FieldElement {
        match self.tag {
            BasisTag::Rational => {
                assert!(b.is_zero());
                FieldElement::rational(a.clone())
            }
            BasisTag::Sqrt => FieldElement::new(a.clone(), b.clone()),
            BasisTag::Golden => FieldElement::new(a - b, b * rat_int(2)),
        }
    }

    fn check_index(&self, j: usize) {
        assert!(j >= 1 && j <= self.r, "embedding index {j} out of range 1..={}", self.r);
    }

    /// Exact sign of `sigma_j(x)`, `j` in `1..=r`.
    pub fn sign(&self, x: &FieldElement, j: usize) -> Ordering {
        self.check_index(j);
        let (a, b) = self.sqrt_coords(x);
        if self.r == 1 {
            return a.cmp(&BigRational::zero());
        }
        let s = if j == 1 { b } else { -b };
        sign_p_s_sqrt(&a, &s, self.d)
    }

    pub fn is_totally_positive(&self, x: &FieldElement) -> bool {
        (1..=self.r).all(|j| self.sign(x, j) == Ordering::Greater)
    }

    /// Sign of `sigma_j(x)^2 - q`, decided exactly.
    pub fn cmp_embedding_square(&self, x: &FieldElement, j: usize, q: &BigRational) -> Ordering {
        self.check_index(j);
        let (a, b) = self.sqrt_coords(x);
        let p = &a * &a + &b * &b * rat_int(self.d) - q;
        if self.r == 1 {
            return (&a * &a - q).cmp(&BigRational::zero());
        }
        let s = &a * &b * rat_int(if j == 1 { 2 } else { -2 });
        sign_p_s_sqrt(&p, &s, self.d)
    }

    /// `sigma_j(x)^2 = P + S sqrt d` as the pair `(P, S)`.
    pub fn embedding_square_coords(&self, x: &FieldElement, j: usize) -> (BigRational, BigRational) {
        let (a, b) = self.sqrt_coords(x);
        if self.r == 1 {
            return (&a * &a, BigRational::zero());
        }
        let p = &a * &a + &b * &b * rat_int(self.d);
        let s = &a * &b * rat_int(if j == 1 { 2 } else { -2 });
        (p, s)
    }

    /// Rational enclosure of `sigma_j(x)` with relative width at most `2^-60`.
    pub fn embed(&self, x: &FieldElement, j: usize) -> Interval {
        self.embed_bits(x, j, 60)
    }

    /// Rational enclosure of `sigma_j(x)` with relative width at most `2^-bits`.
    pub fn embed_bits(&self, x: &FieldElement, j: usize, bits: u32) -> Interval {
        self.check_index(j);
        let (a, b) = self.sqrt_coords(x);
        if b.is_zero() {
            return Interval::point(a);
        }
        let s = if j == 1 { b } else { -b };
        let dq = rat_int(self.d);
        let mut prec = bits + 16;
        loop {
            let root = Interval::new(sqrt_lower(&dq, prec), sqrt_upper(&dq, prec));
            let iv = Interval::point(a.clone()).add(&root.scale(&s));
            if iv.rel_width_below(bits) {
                return iv;
            }
            prec *= 2;
        }
    }

    /// Floating value of `sigma_j(x)`, accurate to a few ulps (no cancellation loss).
    pub fn embed_f64(&self, x: &FieldElement, j: usize) -> f64 {
        self.check_index(j);
        let (a, b) = self.sqrt_coords(x);
        if b.is_zero() {
            return rat_to_f64(&a);
        }
        let (af, bf) = (rat_to_f64(&a), rat_to_f64(&b));
        let sd = (self.d as f64).sqrt();
        let s1 = af + bf * sd;
        let s2 = af - bf * sd;
        // The larger-magnitude embedding is accurate; recover the other from the exact norm.
        let n = rat_to_f64(&self.norm(x));
        let (big, big_is_1) = if s1.abs() >= s2.abs() { (s1, true) } else { (s2, false) };
        if (j == 1) == big_is_1 {
            big
        } else {
            n / big
        }
    }

    pub fn embeddings_f64(&self, x: &FieldElement) -> Vec<f64> {
        (1..=self.r).map(|j| self.embed_f64(x, j)).collect()
    }

    /// `x` lies in the inverse different: `Tr(x)` and `Tr(x w)` are integers.
    pub fn in_inverse_different(&self, x: &FieldElement) -> bool {
        if self.r == 1 {
            return is_integer(&x.a);
        }
        is_integer(&self.trace(x)) && is_integer(&self.trace(&self.mul(x, &self.w())))
    }

    /// `x` is integral over `Z`.
    pub fn is_integral(&self, x: &FieldElement) -> bool {
        x.is_integral()
    }

    /// `x / y` lies in the ring of integers (`y` divides `x`).
    pub fn divides(&self, y: &FieldElement, x: &FieldElement) -> bool {
        match self.div(x, y) {
            Ok(q) => q.is_integral(),
            Err(_) => x.is_zero(),
        }
    }

    /// `x` and `y` generate the same fractional ideal.
    pub fn associated(&self, x: &FieldElement, y: &FieldElement) -> bool {
        if x.is_zero() || y.is_zero() {
            return x.is_zero() && y.is_zero();
        }
        self.divides(x, y) && self.divides(y, x)
    }

    /// Unit-class representatives of `O^x / (O^x)^2` and their totally positive subset.
    pub fn unit_class_representatives(&self) -> UnitData {
        let mut u = vec![FieldElement::one(), FieldElement::int(-1)];
        if self.r == 2 {
            u.push(self.unit.clone());
            u.push(-&self.unit);
        }
        let u_plus = u.iter().filter(|x| self.is_totally_positive(x)).cloned().collect();
        UnitData { u, u_plus }
    }

    /// Totally positive fundamental unit: `eps^2` if `Nm(eps) = -1`, else `eps`.
    pub fn totally_positive_unit(&self) -> FieldElement {
        if self.r == 1 {
            return FieldElement::one();
        }
        if self.unit_norm == -1 {
            self.mul(&self.unit, &self.unit)
        } else {
            self.unit.clone()
        }
    }

    /// Continued fraction of `-conj(w)`; the first convergent `p/q` with
    /// `Nm(p + q w) = +-1` gives the fundamental unit.
    fn fundamental_unit_cf(&self) -> Result<(FieldElement, i32)> {
        let d = self.d as i128;
        let s = (self.d as u64).sqrt() as i128;
        let (mut p, mut q): (i128, i128) = match self.tag {
            BasisTag::Sqrt => (0, 1),
            _ => (-1, 2),
        };
        let (mut h1, mut h2) = (BigInt::one(), BigInt::zero());
        let (mut k1, mut k2) = (BigInt::zero(), BigInt::one());
        for _ in 0..1_000_000 {
            let a = if q > 0 {
                (p + s).div_euclid(q)
            } else {
                -((p + s).div_euclid(-q) + 1)
            };
            let h = BigInt::from(a) * &h1 + &h2;
            let k = BigInt::from(a) * &k1 + &k2;
            let cand = FieldElement::new(BigRational::from_integer(h.clone()), BigRational::from_integer(k.clone()));
            let n = self.norm(&cand);
            if n.abs().is_one() {
                let sign = if n.is_positive() { 1 } else { -1 };
                return Ok((cand, sign));
            }
            (h2, h1) = (h1, h);
            (k2, k1) = (k1, k);
            p = a * q - p;
            q = (d - p * p) / q;
        }
        Err(Error::Resource(format!("continued fraction of sqrt {} did not close", self.d)))
    }

    /// Canonical generator of the different: totally positive when possible,
    /// otherwise with `sigma_1 > 0`; `|sigma_1/sigma_2|` reduced into `[1, lambda)`.
    fn canonical_different(&self) -> (FieldElement, bool) {
        let mut g = match self.tag {
            BasisTag::Sqrt => self.elem(0, 2),
            _ => self.elem(-1, 2),
        };
        let tp = self.unit_norm == -1;
        if tp {
            // signs of g are (+,-), as are those of eps
            g = self.mul(&g, &self.unit);
        }
        if self.sign(&g, 1) == Ordering::Less {
            g = -&g;
        }
        let g = self.reduce_by_units(&g);
        (g, tp)
    }

    /// Multiply by a power of the totally positive unit so that
    /// `|sigma_1/sigma_2|` lands in `[1, sigma_1(eps+)/sigma_2(eps+))`.
    pub fn reduce_by_units(&self, g: &FieldElement) -> FieldElement {
        if self.r == 1 || g.is_zero() {
            return g.clone();
        }
        let ep = self.totally_positive_unit();
        let ep_inv = self.conj(&ep);
        let lam = (self.embed_f64(&ep, 1) / self.embed_f64(&ep, 2)).ln();
        let rho = (self.embed_f64(g, 1) / self.embed_f64(g, 2)).abs().ln();
        let n = -(rho / lam).floor() as i64;
        let mut g = self.mul(g, &self.pow(&ep, n).expect("unit"));
        loop {
            let (a, b) = self.sqrt_coords(&g);
            if &a * &b < BigRational::zero() {
                g = self.mul(&g, &ep);
                continue;
            }
            let next = self.mul(&g, &ep_inv);
            let (a2, b2) = self.sqrt_coords(&next);
            if &a2 * &b2 >= BigRational::zero() {
                g = next;
                continue;
            }
            return g;
        }
    }

    /// Parse expressions such as `3+w`, `-1/2w`, `2*w - 5/3`.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return invalid("empty element");
        }
        let mut out = FieldElement::zero();
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, ch) in src.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for t in terms {
            let (neg, body) = match t.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, t.strip_prefix('+').unwrap_or(&t)),
            };
            let (coef_str, has_w) = match body.strip_suffix('w') {
                Some(c) => (c.strip_suffix('*').unwrap_or(c), true),
                None => (body, false),
            };
            let coef = if coef_str.is_empty() {
                if !has_w {
                    return invalid(format!("cannot parse element '{s}'"));
                }
                BigRational::one()
            } else {
                coef_str
                    .parse::<BigRational>()
                    .map_err(|_| Error::Validation(format!("cannot parse element '{s}'")))?
            };
            let coef = if neg { -coef } else { coef };
            if has_w {
                if self.r == 1 {
                    return invalid("w is not defined over Q");
                }
                out.b += coef;
            } else {
                out.a += coef;
            }
        }
        Ok(out)
    }
}
