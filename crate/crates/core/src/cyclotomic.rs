//! Exact elements of `Z[zeta_q]` stored as coefficient vectors over `zeta_q^a`,
//! `0 <= a < q`, with an exact zero test modulo the cyclotomic polynomial.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::arith::{factorize, lcm_u64};

/// `sum_a coeffs[a] zeta_q^a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloInt {
    pub q: u64,
    pub coeffs: Vec<i64>,
}

impl CycloInt {
    pub fn zero(q: u64) -> Self {
        CycloInt { q, coeffs: vec![0; q as usize] }
    }

    pub fn one() -> Self {
        CycloInt { q: 1, coeffs: vec![1] }
    }

    pub fn from_int(n: i64) -> Self {
        CycloInt { q: 1, coeffs: vec![n] }
    }

    /// Rewrite over `zeta_l` for a multiple `l` of `q`.
    pub fn lift(&self, l: u64) -> CycloInt {
        assert!(l % self.q == 0, "{} does not divide {l}", self.q);
        let step = (l / self.q) as usize;
        let mut c = vec![0i64; l as usize];
        for (a, &v) in self.coeffs.iter().enumerate() {
            c[a * step] += v;
        }
        CycloInt { q: l, coeffs: c }
    }

    pub fn add(&self, o: &CycloInt) -> CycloInt {
        let l = lcm_u64(self.q, o.q);
        let mut x = self.lift(l);
        let y = o.lift(l);
        for (a, b) in x.coeffs.iter_mut().zip(y.coeffs) {
            *a += b;
        }
        x
    }

    pub fn neg(&self) -> CycloInt {
        CycloInt { q: self.q, coeffs: self.coeffs.iter().map(|v| -v).collect() }
    }

    pub fn sub(&self, o: &CycloInt) -> CycloInt {
        self.add(&o.neg())
    }

    /// Product in `Z[zeta_lcm]`.
    pub fn mul(&self, o: &CycloInt) -> CycloInt {
        let l = lcm_u64(self.q, o.q);
        let x = self.lift(l);
        let y = o.lift(l);
        let lu = l as usize;
        let mut c = vec![0i64; lu];
        let ynz: Vec<(usize, i64)> = y.coeffs.iter().enumerate().filter(|(_, v)| **v != 0).map(|(i, v)| (i, *v)).collect();
        for (i, &a) in x.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for &(j, b) in &ynz {
                c[(i + j) % lu] += a * b;
            }
        }
        CycloInt { q: l, coeffs: c }
    }

    /// Floating value and a rigorous-in-practice error bound.
    pub fn approx(&self) -> (Complex64, f64) {
        let mut z = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for (a, &v) in self.coeffs.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let t = std::f64::consts::TAU * a as f64 / self.q as f64;
            z += Complex64::new(t.cos(), t.sin()) * v as f64;
            mass += (v as f64).abs();
        }
        let n = self.coeffs.iter().filter(|v| **v != 0).count() as f64;
        (z, mass * (n + 8.0) * f64::EPSILON)
    }

    /// Remainder of `sum c_a x^a` modulo `Phi_q(x)`.
    pub fn reduce(&self) -> Vec<i128> {
        let phi = cyclotomic_poly(self.q);
        let deg = phi.len() - 1;
        let mut r: Vec<i128> = self.coeffs.iter().map(|&v| v as i128).collect();
        let nz: Vec<(usize, i128)> =
            phi[..deg].iter().enumerate().filter(|(_, v)| **v != 0).map(|(i, v)| (i, *v)).collect();
        for top in (deg..r.len()).rev() {
            let c = r[top];
            if c == 0 {
                continue;
            }
            r[top] = 0;
            let shift = top - deg;
            for &(i, p) in &nz {
                r[shift + i] -= c * p;
            }
        }
        r.truncate(deg.max(1).min(r.len()));
        r
    }

    /// Exact test `value == 0` in `Z[zeta_q]`.
    pub fn is_zero(&self) -> bool {
        self.reduce().iter().all(|&v| v == 0)
    }

    pub fn eq_exact(&self, o: &CycloInt) -> bool {
        self.sub(o).is_zero()
    }

    /// The rational integer this equals, if it is one.
    pub fn as_integer(&self) -> Option<i64> {
        let r = self.reduce();
        if r.iter().skip(1).all(|&v| v == 0) {
            r.first().map(|&v| v as i64).or(Some(0))
        } else {
            None
        }
    }
}

fn poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut c = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

/// Exact division by a monic polynomial.
fn poly_div_exact(a: &[i128], b: &[i128]) -> Vec<i128> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![0i128; a.len() - db];
    for top in (db..a.len()).rev() {
        let c = r[top];
        q[top - db] = c;
        if c != 0 {
            for (i, &v) in b.iter().enumerate() {
                r[top - db + i] -= c * v;
            }
        }
    }
    debug_assert!(r.iter().all(|&v| v == 0), "inexact division");
    q
}

fn x_pow_minus_one(d: u64) -> Vec<i128> {
    let mut p = vec![0i128; d as usize + 1];
    p[0] = -1;
    p[d as usize] = 1;
    p
}

/// `Phi_q(x)` as ascending coefficients, via `prod_{d | q} (x^d - 1)^{mu(q/d)}`.
pub fn cyclotomic_poly(q: u64) -> Vec<i128> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<i128>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&q) {
        return p.clone();
    }
    let mut divisors = vec![1u64];
    for (p, e) in factorize(q) {
        let cur = divisors.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            divisors.extend(cur.iter().map(|d| d * pk));
        }
    }
    let mut num = vec![1i128];
    let mut den = vec![1i128];
    for d in divisors {
        match crate::arith::mobius(q / d) {
            1 => num = poly_mul(&num, &x_pow_minus_one(d)),
            -1 => den = poly_mul(&den, &x_pow_minus_one(d)),
            _ => {}
        }
    }
    // den is monic up to sign
    let lead = *den.last().unwrap();
    if lead == -1 {
        den.iter_mut().for_each(|v| *v = -*v);
        num.iter_mut().for_each(|v| *v = -*v);
    }
    let mut p = poly_div_exact(&num, &den);
    if *p.last().unwrap() < 0 {
        p.iter_mut().for_each(|v| *v = -*v);
    }
    cache.lock().unwrap().insert(q, p.clone());
    p
}
