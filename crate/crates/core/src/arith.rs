//! Small integer and rational helpers shared by the modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Trial-division factorisation, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn mobius(n: u64) -> i32 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Kronecker symbol `(a/p)` for a prime `p`.
pub fn kronecker_prime(a: i64, p: u64) -> i32 {
    if p == 2 {
        return match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => 0,
            1 | 7 => 1,
            _ => -1,
        };
    }
    let r = (a as i128).rem_euclid(p as i128) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Square root of `a` modulo an odd prime (Tonelli-Shanks).
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Distinct roots of `x^2 + c1 x + c0` modulo a prime `p`.
pub fn quadratic_roots_mod_p(c1: i64, c0: i64, p: u64) -> Vec<u64> {
    let pm = p as i128;
    let c1 = (c1 as i128).rem_euclid(pm) as u64;
    let c0 = (c0 as i128).rem_euclid(pm) as u64;
    if p == 2 {
        return (0..2u64)
            .filter(|&x| (x * x + c1 * x + c0) % 2 == 0)
            .collect();
    }
    // x = (-c1 ± sqrt(c1^2 - 4c0)) / 2
    let disc = (mul_mod(c1, c1, p) + p - mul_mod(4 % p, c0, p)) % p;
    let Some(r) = sqrt_mod_prime(disc, p) else {
        return Vec::new();
    };
    let inv2 = (p + 1) / 2;
    let x1 = mul_mod((p - c1 + r) % p, inv2, p);
    let x2 = mul_mod((2 * p - c1 - r) % p, inv2, p);
    let mut v = vec![x1, x2];
    v.sort_unstable();
    v.dedup();
    v
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / a.gcd(&b) * b
    }
}

/// Returns `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut x0, mut x1) = (1i128, 0i128);
    let (mut y0, mut y1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (x0, x1) = (x1, x0 - q * x1);
        (y0, y1) = (y1, y0 - q * y1);
    }
    if r0 < 0 {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Exact square root of a nonnegative rational, if it is a rational square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// `floor(sqrt(q))` for a nonnegative rational.
pub fn floor_sqrt_rational(q: &BigRational) -> BigInt {
    if q.is_negative() {
        return BigInt::zero();
    }
    q.floor().to_integer().sqrt()
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn is_integer(q: &BigRational) -> bool {
    q.denom().is_one()
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// `ln(n!)`; exact summation below 64, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 64 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_small() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(97), vec![(97, 1)]);
        assert!(factorize(1).is_empty());
    }

    #[test]
    fn mobius_values() {
        let mu: Vec<i32> = (1..=10).map(mobius).collect();
        assert_eq!(mu, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn tonelli_shanks_matches_brute_force() {
        for p in [3u64, 5, 7, 13, 17, 41, 97, 193, 257] {
            for a in 0..p {
                let brute = (0..p).any(|x| x * x % p == a);
                match sqrt_mod_prime(a, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert!(!brute, "missed root of {a} mod {p}"),
                }
            }
        }
    }

    #[test]
    fn quadratic_roots() {
        // x^2 - 2 mod 7: roots 3, 4
        assert_eq!(quadratic_roots_mod_p(0, -2, 7), vec![3, 4]);
        // x^2 - x - 1 mod 5: double root 3
        assert_eq!(quadratic_roots_mod_p(-1, -1, 5), vec![3]);
        // x^2 - 2 mod 3: none
        assert!(quadratic_roots_mod_p(0, -2, 3).is_empty());
    }

    #[test]
    fn kronecker_two() {
        assert_eq!(kronecker_prime(5, 2), -1);
        assert_eq!(kronecker_prime(17, 2), 1);
        assert_eq!(kronecker_prime(8, 3), -1);
    }

    #[test]
    fn ln_factorial_switch_is_continuous() {
        let exact: f64 = (2..=64u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(64) - exact).abs() < 1e-11);
        let exact: f64 = (2..=200u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(200) - exact).abs() < 1e-10);
    }

    #[test]
    fn rational_square_roots() {
        assert_eq!(rational_sqrt(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rational_sqrt(&rat(2, 1)), None);
        assert_eq!(floor_sqrt_rational(&rat(17, 2)), BigInt::from(2));
    }
}
