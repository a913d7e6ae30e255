//! Weight schedules along powers of an inert prime, Chebyshev polynomials,
//! the Sato-Tate and `mu_p` measures, discrepancy of discrete measures and
//! the decay sweep over a schedule.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::field::{FieldElement, TotallyRealField};
use crate::ideals::{primes_above, PrincipalIdeal, Splitting};
use crate::kloosterman::nonvanishing_lemma_check;
use crate::lattice::box_set;
use crate::traceformula::{bessel_argument_interval, geometric_side, window_contains, GeometricSideInput, TailOptions, WeightVector};

/// One exponent `l` of a weight schedule.
#[derive(Clone, Debug, Serialize)]
pub struct ScheduleEntry {
    pub l: u32,
    pub accepted: bool,
    pub k: Vec<u32>,
    pub args: Vec<f64>,
    pub margin_lower: Vec<f64>,
    pub margin_upper: Vec<f64>,
    /// Why the exponent was rejected.
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightSchedule {
    pub p_tilde: i64,
    pub s_tilde: i64,
    pub entries: Vec<ScheduleEntry>,
    /// `min ln(k_j) / l` over accepted entries.
    pub log_k_over_l_min: Option<f64>,
}

impl WeightSchedule {
    pub fn accepted(&self) -> impl Iterator<Item = &ScheduleEntry> {
        self.entries.iter().filter(|e| e.accepted)
    }
}

/// Whether `pO` is a prime ideal.
pub fn is_inert_prime(field: &TotallyRealField, p: i64) -> bool {
    if p < 2 || !crate::arith::is_prime(p as u64) {
        return false;
    }
    if field.degree() == 1 {
        return true;
    }
    matches!(primes_above(field, p as u64).as_slice(), [q] if q.kind == Splitting::Inert)
}

/// `(m1, m2) = (p^l / d, 1 / d)` with `d` the totally positive different generator.
pub fn m_pair(field: &TotallyRealField, p_tilde: i64, l: u32) -> Result<(FieldElement, FieldElement)> {
    let d = field.different_generator();
    if !field.is_totally_positive(d) {
        return Err(crate::Error::Unsupported("different has no totally positive generator".into()));
    }
    let pl = field.pow(&FieldElement::int(p_tilde), l as i64)?;
    Ok((field.div(&pl, d)?, field.inv(d)?))
}

/// Smallest even `k` with `arg` in the open window of `k`, from exact enclosures.
fn pick_weight(field: &TotallyRealField, q: &FieldElement, j: usize) -> std::result::Result<(u32, f64), (f64, String)> {
    let arg = bessel_argument_interval(field, q, j);
    let x = arg.mid_f64();
    // k - 1 is the smallest odd integer above arg
    let mut a = x.floor() as i64 + 1;
    if a % 2 == 0 {
        a += 1;
    }
    if a < 3 {
        a = 3;
    }
    for cand in [a - 2, a, a + 2] {
        if cand < 3 {
            continue;
        }
        if window_contains(&arg, (cand + 1) as u32) == Some(true) {
            return Ok(((cand + 1) as u32, x));
        }
    }
    let af = a as f64;
    Err((x, format!("arg {x:.6} misses ({:.6}, {af}) by {:.6}", af - af.cbrt(), af - af.cbrt() - x)))
}

pub fn weight_schedule(field: &TotallyRealField, s_tilde: i64, p_tilde: i64, ls: &[u32]) -> Result<WeightSchedule> {
    if s_tilde <= 0 || p_tilde <= 1 {
        return invalid("level and prime must be positive integers");
    }
    if !is_inert_prime(field, p_tilde) {
        return invalid(format!("{p_tilde} does not generate a prime ideal"));
    }
    let level = PrincipalIdeal::from_int(field, s_tilde)?;
    let bs = box_set(field, &level);
    let s = bs.a.first().cloned().ok_or_else(|| crate::Error::Unsupported("empty box set".into()))?;
    let mut entries = Vec::new();
    for &l in ls {
        if l % 2 == 0 {
            return invalid(format!("schedule exponents must be odd, got {l}"));
        }
        let (m1, m2) = m_pair(field, p_tilde, l)?;
        let q = field.div(&field.mul(&m1, &m2), &field.mul(&s, &s))?;
        let mut e = ScheduleEntry { l, accepted: true, k: vec![], args: vec![], margin_lower: vec![], margin_upper: vec![], reason: None };
        for j in 1..=field.degree() {
            match pick_weight(field, &q, j) {
                Ok((k, x)) => {
                    let a = (k - 1) as f64;
                    e.k.push(k);
                    e.args.push(x);
                    e.margin_lower.push(x - (a - a.cbrt()));
                    e.margin_upper.push(a - x);
                }
                Err((x, why)) => {
                    e.accepted = false;
                    e.args.push(x);
                    e.reason = Some(format!("embedding {j}: {why}"));
                }
            }
        }
        if !e.accepted {
            e.k.clear();
            e.margin_lower.clear();
            e.margin_upper.clear();
        }
        entries.push(e);
    }
    let log_k_over_l_min = entries
        .iter()
        .filter(|e| e.accepted)
        .flat_map(|e| e.k.iter().map(move |&k| (k as f64).ln() / e.l as f64))
        .reduce(f64::min);
    Ok(WeightSchedule { p_tilde, s_tilde, entries, log_k_over_l_min })
}

/// `X_l(x)` with `X_l(2 cos t) = sin((l+1)t) / sin t`.
pub fn chebyshev_u(l: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0f64, x);
    if l == 0 {
        return a;
    }
    for _ in 1..l {
        (a, b) = (b, x * b - a);
    }
    b
}

/// `X_l'(x)` by differentiating the recurrence.
pub fn chebyshev_u_derivative(l: u32, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0f64, x);
    let (mut d0, mut d1) = (0.0f64, 1.0f64);
    if l == 0 {
        return 0.0;
    }
    for _ in 1..l {
        let p2 = x * p1 - p0;
        let d2 = p1 + x * d1 - d0;
        (p0, p1, d0, d1) = (p1, p2, d1, d2);
    }
    d1
}

/// `max_{[-2,2]} |X_l'| = X_l'(2) = l(l+1)(l+2)/6`.
pub fn chebyshev_derivative_max(l: u32) -> f64 {
    let l = l as f64;
    l * (l + 1.0) * (l + 2.0) / 6.0
}

/// `mu_inf(x) = sqrt(1 - x^2/4) / pi` on `[-2, 2]`.
pub fn sato_tate_density(x: f64) -> f64 {
    if x.abs() >= 2.0 {
        return 0.0;
    }
    (1.0 - x * x / 4.0).sqrt() / PI
}

pub fn sato_tate_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    let h = x / 2.0;
    0.5 + (h * (1.0 - h * h).sqrt() + h.asin()) / PI
}

pub fn mu_p_density(p: f64, x: f64) -> f64 {
    sato_tate_density(x) * mu_p_weight(p, x)
}

/// `mu_p / mu_inf`.
fn mu_p_weight(p: f64, x: f64) -> f64 {
    let s = p.sqrt() + 1.0 / p.sqrt();
    (p + 1.0) / (s * s - x * x)
}

/// `int g d mu_inf` by Gauss-Chebyshev quadrature of the second kind, with
/// node doubling until successive values agree to `1e-13`.
pub fn sato_tate_integral<G: Fn(f64) -> f64 + Sync>(g: G) -> f64 {
    let rule = |n: usize| -> f64 {
        (1..=n)
            .map(|i| {
                let t = i as f64 * PI / (n + 1) as f64;
                let s = t.sin();
                g(2.0 * t.cos()) * s * s
            })
            .sum::<f64>()
            * 2.0
            / (n + 1) as f64
    };
    let mut n = 32;
    let mut prev = rule(n);
    while n < 1 << 20 {
        n = 2 * n + 1;
        let cur = rule(n);
        if (cur - prev).abs() <= 1e-13 * cur.abs().max(1.0) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `int g d mu_p`.
pub fn mu_p_integral<G: Fn(f64) -> f64 + Sync>(p: f64, g: G) -> f64 {
    sato_tate_integral(|x| g(x) * mu_p_weight(p, x))
}

fn adaptive_simpson<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_simpson(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `mu_p([-2, x])`, integrating in `x = -2 cos t` where the integrand is smooth.
pub fn mu_p_cdf(p: f64, x: f64) -> f64 {
    if x <= -2.0 {
        return 0.0;
    }
    if x >= 2.0 {
        return 1.0;
    }
    let s = p.sqrt() + 1.0 / p.sqrt();
    let g = |t: f64| {
        let st = t.sin();
        let c = t.cos();
        (p + 1.0) / PI * 2.0 * st * st / (s * s - 4.0 * c * c)
    };
    let tx = (-x / 2.0).acos();
    let (fa, fm, fb) = (g(0.0), g(tx / 2.0), g(tx));
    let whole = tx / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(&g, 0.0, tx, fa, fm, fb, whole, 1e-14, 40)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    SatoTate,
    MuP(f64),
}

impl Reference {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Reference::SatoTate => sato_tate_cdf(x),
            Reference::MuP(p) => mu_p_cdf(p, x),
        }
    }
}

/// Atoms `(location, weight)` on `[-2, 2]`.
#[derive(Clone, Debug, Serialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(x, w) in &atoms {
            if !(-2.0..=2.0).contains(&x) {
                return invalid(format!("atom location {x} outside [-2, 2]"));
            }
            if !(w >= 0.0) {
                return invalid(format!("atom weight {w} must be nonnegative"));
            }
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Scaled to total mass one.
    pub fn normalized(&self) -> Result<Self> {
        let m = self.total_mass();
        if !(m > 0.0) {
            return invalid("cannot normalise a zero measure");
        }
        Ok(DiscreteMeasure { atoms: self.atoms.iter().map(|&(x, w)| (x, w / m)).collect() })
    }

    /// Atoms sorted by location with equal locations merged.
    fn merged(&self) -> Vec<(f64, f64)> {
        let mut a = self.atoms.clone();
        a.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (x, w) in a {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => out.push((x, w)),
            }
        }
        out
    }
}

/// `sup_{[a,b] in [-2,2]} |nu([a,b]) - mu([a,b])|`.
///
/// With `h = F_nu - G`, the supremum is `max_{p <= q} |v_q - v_p|` over the
/// sequence `0, h(x_1-), h(x_1), ..., h(x_n-), h(x_n), h(2)`.
pub fn discrepancy(nu: &DiscreteMeasure, reference: Reference) -> f64 {
    let atoms = nu.merged();
    let mut v = Vec::with_capacity(2 * atoms.len() + 2);
    v.push(0.0);
    let mut cum = 0.0;
    for &(x, w) in &atoms {
        let g = reference.cdf(x);
        v.push(cum - g);
        cum += w;
        v.push(cum - g);
    }
    v.push(cum - 1.0);
    let (mut lo, mut hi) = (v[0], v[0]);
    let mut best = 0.0f64;
    for &x in &v[1..] {
        best = best.max(x - lo).max(hi - x);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    best
}

/// One row of the decay sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub l: u32,
    pub k: Vec<u32>,
    pub args: Vec<f64>,
    pub main_abs: f64,
    pub box_abs: f64,
    pub tail_abs: f64,
    pub tail_bound: f64,
    pub scaled_box: f64,
    pub scaled_tail: f64,
    pub s_nonzero: bool,
    /// `1 / ((ln k_0)^2 prod (k_j - 1)^{1/3})`, the computable factor of the discrepancy lower bound.
    pub d_lower_bound: f64,
    pub tail_converged: bool,
}

/// Geometric side with `n = O` for every accepted schedule entry, ordered by `l`.
pub fn decay_sweep(field: &TotallyRealField, schedule: &WeightSchedule, opts: &TailOptions) -> Result<Vec<SweepRow>> {
    let entries: Vec<&ScheduleEntry> = schedule.accepted().collect();
    entries
        .par_iter()
        .map(|e| {
            let (m1, m2) = m_pair(field, schedule.p_tilde, e.l)?;
            let k = WeightVector::new(e.k.clone())?;
            let input = GeometricSideInput {
                field: field.clone(),
                level: FieldElement::int(schedule.s_tilde),
                hecke: FieldElement::one(),
                m1: m1.clone(),
                m2: m2.clone(),
                k: k.clone(),
            };
            let rep = geometric_side(&input, opts)?;
            let s_nonzero = nonvanishing_lemma_check(field, &m1, &m2, schedule.s_tilde)?;
            let k0 = k.k0() as f64;
            Ok(SweepRow {
                l: e.l,
                k: e.k.clone(),
                args: e.args.clone(),
                main_abs: rep.main_term.abs(),
                box_abs: rep.box_term.abs(),
                tail_abs: rep.tail_truncated.abs(),
                tail_bound: rep.tail_remainder_bound,
                scaled_box: rep.scaled_box,
                scaled_tail: rep.scaled_tail,
                s_nonzero,
                d_lower_bound: 1.0 / (k0.ln().powi(2) * k.scale()),
                tail_converged: rep.tail_converged,
            })
        })
        .collect()
}
