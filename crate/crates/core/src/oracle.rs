//! Level-one validation over `Q`: Ramanujan `tau` and the dimension-one
//! Petersson ratio test built on the geometric side.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::arith::ext_gcd;
use crate::bessel;
use crate::error::{invalid, Error, Result};
use crate::field::{FieldElement, TotallyRealField};
use crate::traceformula::{geometric_side, GeometricSideInput, TailOptions, WeightVector};

pub const MAX_COEFFICIENTS: usize = 100_000;

/// Weights with a one-dimensional level-one cusp space.
pub const DIM_ONE_WEIGHTS: [u32; 6] = [12, 16, 18, 20, 22, 26];

/// Coefficients `a(1..=N)` of a level-one normalised eigenform.
#[derive(Clone, Debug)]
pub struct QExpansion {
    pub weight: u32,
    /// `coeffs[n - 1] = a(n)`.
    pub coeffs: Vec<BigInt>,
}

impl QExpansion {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn a(&self, n: usize) -> &BigInt {
        &self.coeffs[n - 1]
    }

    pub fn a_f64(&self, n: usize) -> f64 {
        self.a(n).to_f64().unwrap_or(f64::NAN)
    }

    /// `a(mn) = a(m) a(n)` for coprime `m, n` with `mn <= N`.
    pub fn check_multiplicativity(&self, pairs: &[(usize, usize)]) -> bool {
        pairs.iter().all(|&(m, n)| m.gcd(&n) != 1 || m * n > self.len() || self.a(m * n) == &(self.a(m) * self.a(n)))
    }

    /// `|a(p)| <= 2 p^{(k-1)/2}` for primes `p <= p_max`, compared as `a(p)^2 <= 4 p^{k-1}`.
    pub fn check_deligne(&self, p_max: usize) -> bool {
        (2..=p_max.min(self.len()))
            .filter(|&p| crate::arith::is_prime(p as u64))
            .all(|p| self.a(p).pow(2) <= BigInt::from(4) * BigInt::from(p).pow(self.weight - 1))
    }
}

/// Generalised pentagonal expansion of `prod_{n>=1} (1 - q^n)` up to `q^len`, as `(exponent, sign)`.
fn euler_product_terms(len: usize) -> Vec<(usize, i64)> {
    let mut out = vec![(0usize, 1i64)];
    for j in 1.. {
        let e1 = j * (3 * j - 1) / 2;
        if e1 > len {
            break;
        }
        let s = if j % 2 == 1 { -1 } else { 1 };
        out.push((e1, s));
        let e2 = j * (3 * j + 1) / 2;
        if e2 <= len {
            out.push((e2, s));
        }
    }
    out.sort();
    out
}

/// `tau(1..=N)` from `q prod (1 - q^n)^24`.
///
/// The power is taken with the recurrence `n f_n = sum_j g_j (25 j - n) f_{n-j}`
/// for `f = g^24`, which needs only the sparse pentagonal coefficients of `g`.
pub fn delta_coefficients(n: usize) -> Result<QExpansion> {
    if n == 0 {
        return invalid("need at least one coefficient");
    }
    if n > MAX_COEFFICIENTS {
        return Err(Error::Resource(format!("{n} coefficients exceed the budget of {MAX_COEFFICIENTS}")));
    }
    let g: Vec<(usize, i64)> = euler_product_terms(n).into_iter().filter(|t| t.0 > 0).collect();
    let mut f: Vec<BigInt> = Vec::with_capacity(n);
    f.push(BigInt::one());
    for i in 1..n {
        let mut acc = BigInt::zero();
        for &(j, s) in &g {
            if j > i {
                break;
            }
            let w = s * (25 * j as i64 - i as i64);
            acc += &f[i - j] * w;
        }
        let (q, r) = acc.div_rem(&BigInt::from(i));
        debug_assert!(r.is_zero());
        f.push(q);
    }
    Ok(QExpansion { weight: 12, coeffs: f })
}

/// `sigma_r(n)` for `n = 1..=len`.
fn divisor_sums(len: usize, r: u32) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); len + 1];
    for d in 1..=len {
        let dp = BigInt::from(d).pow(r);
        for m in (d..=len).step_by(d) {
            s[m] += &dp;
        }
    }
    s
}

/// `1 + c sum sigma_r(n) q^n` up to `q^len`.
fn eisenstein(len: usize, c: i64, r: u32) -> Vec<BigInt> {
    let mut e: Vec<BigInt> = divisor_sums(len, r).into_iter().map(|v| v * c).collect();
    e[0] = BigInt::one();
    e
}

fn truncated_mul(a: &[BigInt], b: &[BigInt], len: usize) -> Vec<BigInt> {
    (0..=len)
        .into_par_iter()
        .map(|i| (0..=i).filter(|&j| j < a.len() && i - j < b.len()).map(|j| &a[j] * &b[i - j]).sum())
        .collect()
}

/// The normalised eigenform of weight `k` in a one-dimensional level-one cusp space,
/// as `Delta E_{k-12}`.
pub fn cusp_form_coefficients(k: u32, n: usize) -> Result<QExpansion> {
    if !DIM_ONE_WEIGHTS.contains(&k) {
        return Err(Error::Unsupported(format!("weight {k} does not have a one-dimensional level-one cusp space")));
    }
    let delta = delta_coefficients(n)?;
    if k == 12 {
        return Ok(delta);
    }
    let e4 = eisenstein(n, 240, 3);
    let e6 = eisenstein(n, -504, 5);
    let e = match k - 12 {
        4 => e4,
        6 => e6,
        8 => truncated_mul(&e4, &e4, n),
        10 => truncated_mul(&e4, &e6, n),
        14 => truncated_mul(&truncated_mul(&e4, &e4, n), &e6, n),
        _ => unreachable!(),
    };
    // Delta = sum tau(i) q^i, shifted by one
    let mut d = vec![BigInt::zero()];
    d.extend(delta.coeffs);
    let prod = truncated_mul(&d, &e, n);
    Ok(QExpansion { weight: k, coeffs: prod[1..=n].to_vec() })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalSide {
    pub value: f64,
    pub remainder_bound: f64,
    pub cutoff: u64,
}

/// `S(m, n; c)` over `Z`, summed in `f64`.
pub fn classical_kloosterman(m: i64, n: i64, c: i64) -> f64 {
    (1..=c)
        .filter(|x| x.gcd(&c) == 1)
        .map(|x| {
            let (_, u, _) = ext_gcd(x as i128, c as i128);
            let xi = u.rem_euclid(c as i128) as i64;
            let t = ((m * x + n * xi).rem_euclid(c)) as f64 / c as f64;
            (2.0 * PI * t).cos()
        })
        .sum()
}

/// `delta(m,n) + 2 pi i^{-k} sum_{c <= C} S(m,n;c)/c J_{k-1}(4 pi sqrt(mn)/c)` with
/// the remainder bound `2 pi (2 pi sqrt(mn))^{k-1} / ((k-1)! (k-2) C^{k-2})`.
pub fn classical_geometric_side(k: u32, m: i64, n: i64, cutoff: u64) -> Result<ClassicalSide> {
    if k < 12 || k % 2 == 1 {
        return invalid(format!("weight {k} must be even and at least 12"));
    }
    if m <= 0 || n <= 0 || cutoff == 0 {
        return invalid("m, n and the cutoff must be positive");
    }
    let sgn = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let root = ((m * n) as f64).sqrt();
    let terms: Vec<f64> = (1..=cutoff as i64)
        .into_par_iter()
        .map(|c| {
            let x = 4.0 * PI * root / c as f64;
            classical_kloosterman(m, n, c) / c as f64 * bessel::j(k - 1, x)
        })
        .collect();
    // summed from the smallest terms
    let sum: f64 = terms.iter().rev().sum();
    let delta = if m == n { 1.0 } else { 0.0 };
    let ln_rem = (2.0 * PI).ln() + (k - 1) as f64 * (2.0 * PI * root).ln()
        - crate::arith::ln_factorial((k - 1) as u64)
        - ((k - 2) as f64).ln()
        - (k - 2) as f64 * (cutoff as f64).ln();
    Ok(ClassicalSide { value: delta + sgn * 2.0 * PI * sum, remainder_bound: ln_rem.exp(), cutoff })
}

/// Geometric side `G(m, n)` at level one over `Q`, from the trace-formula assembly.
pub fn geometric_side_q(k: u32, m: i64, n: i64, rel_target: f64) -> Result<(f64, f64)> {
    let input = GeometricSideInput {
        field: TotallyRealField::rationals(),
        level: FieldElement::one(),
        hecke: FieldElement::one(),
        m1: FieldElement::int(m),
        m2: FieldElement::int(n),
        k: WeightVector::new(vec![k])?,
    };
    let rep = geometric_side(&input, &TailOptions { rel_target, ..Default::default() })?;
    Ok((rep.total, rep.box_err + rep.tail_remainder_bound))
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub m: i64,
    pub n: i64,
    pub a_m: String,
    pub a_n: String,
    pub geometric: f64,
    pub geometric_err: f64,
    pub classical: f64,
    pub classical_bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioTest {
    pub k: u32,
    pub rows: Vec<RatioRow>,
    /// `max |C / mean(C) - 1|`.
    pub spread: f64,
    /// `max |G - G_classical| / |G|`.
    pub cross_check: f64,
}

pub const DEFAULT_PAIRS: [(i64, i64); 8] = [(1, 1), (1, 2), (2, 2), (2, 3), (1, 5), (3, 4), (5, 7), (6, 10)];

/// `C(m,n) = G(m,n) (mn)^{(k-1)/2} / (a(m) a(n))`, which is independent of the pair
/// when the cusp space is one-dimensional.
pub fn petersson_ratio_test(k: u32, pairs: &[(i64, i64)]) -> Result<RatioTest> {
    if pairs.is_empty() {
        return invalid("need at least one pair");
    }
    if pairs.iter().any(|&(m, n)| m <= 0 || n <= 0) {
        return invalid("pairs must be positive");
    }
    let top = pairs.iter().map(|&(m, n)| m.max(n)).max().unwrap_or(1) as usize;
    let form = cusp_form_coefficients(k, top)?;
    let rows: Vec<RatioRow> = pairs
        .par_iter()
        .map(|&(m, n)| {
            let (am, an) = (form.a(m as usize), form.a(n as usize));
            if am.is_zero() || an.is_zero() {
                return invalid(format!("a({m}) a({n}) vanishes"));
            }
            let (g, gerr) = geometric_side_q(k, m, n, 1e-11)?;
            let cl = classical_geometric_side(k, m, n, 2000)?;
            let ln_mn = ((m * n) as f64).ln() * (k - 1) as f64 / 2.0;
            let prod = (am * an).to_f64().unwrap_or(f64::NAN);
            let ratio = g * ln_mn.exp() / prod;
            Ok(RatioRow {
                m,
                n,
                a_m: am.to_string(),
                a_n: an.to_string(),
                geometric: g,
                geometric_err: gerr,
                classical: cl.value,
                classical_bound: cl.remainder_bound,
                ratio,
            })
        })
        .collect::<Result<_>>()?;
    let mean = rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len() as f64;
    let spread = rows.iter().map(|r| (r.ratio / mean - 1.0).abs()).fold(0.0, f64::max);
    let cross_check = rows.iter().map(|r| (r.geometric - r.classical).abs() / r.geometric.abs()).fold(0.0, f64::max);
    Ok(RatioTest { k, rows, spread, cross_check })
}

/// Parses `"(1,1),(1,2)"`.
pub fn parse_pairs(s: &str) -> Result<Vec<(i64, i64)>> {
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut out = Vec::new();
    for part in cleaned.split("),") {
        let p = part.trim_start_matches(',').trim_start_matches('(').trim_end_matches(')');
        if p.is_empty() {
            continue;
        }
        let (a, b) = p.split_once(',').ok_or_else(|| Error::Validation(format!("bad pair '{part}'")))?;
        let a = a.parse().map_err(|_| Error::Validation(format!("bad integer '{a}'")))?;
        let b = b.parse().map_err(|_| Error::Validation(format!("bad integer '{b}'")))?;
        out.push((a, b));
    }
    if out.is_empty() {
        return invalid("no pairs given");
    }
    Ok(out)
}

/// `|x|` of a big integer as `f64`, for reports.
pub fn big_abs_f64(x: &BigInt) -> f64 {
    x.abs().to_f64().unwrap_or(f64::INFINITY)
}
