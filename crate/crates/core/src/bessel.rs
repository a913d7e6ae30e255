//! `J_a(x)` for integer orders `a <= 10^4` and real `0 <= x <= 10^5`, with an
//! error estimate and log-space output, plus numerical checks of the standard
//! uniform bounds for `J_a`.

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::ln_factorial;
use crate::error::{invalid, Result};

pub const MAX_ORDER: u32 = 10_000;
pub const MAX_ARG: f64 = 1e5;
pub const DEFAULT_TARGET_REL_ERR: f64 = 1e-9;

/// `sup_a sup_x a^{1/3} |J_a(x)|`.
pub const BOUND_B: f64 = 0.674885;
/// `sup_a sup_x x^{1/3} |J_a(x)|`.
pub const BOUND_C: f64 = 0.7857468704;

/// Calibrated lower constant for `a^{1/3} J_a(a + d a^{1/3})`, `|d| < 1`.
pub const CAL_C1: f64 = 0.12;
/// Calibrated upper constant for `a^{1/3} J_a(a + d a^{1/3})`, `|d| < 1`.
pub const CAL_C2: f64 = 0.70;
/// Calibrated constant in `J_a(ax) <= C / ((1 - x^2)^{1/4} a^{1/2})`, `1/2 <= x < 1`.
pub const CAL_C_UNIFORM: f64 = 0.35;

/// Orders used by the bound suite.
pub const GRID_ORDERS: [u32; 7] = [10, 32, 100, 316, 1000, 3162, 10000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BesselMethod {
    Exact,
    Series,
    Miller,
}

#[derive(Clone, Copy, Debug)]
pub struct BesselRequest {
    pub order: u32,
    pub x: f64,
    pub target_rel_err: f64,
}

impl BesselRequest {
    pub fn new(order: u32, x: f64) -> Self {
        BesselRequest { order, x, target_rel_err: DEFAULT_TARGET_REL_ERR }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order > MAX_ORDER {
            return invalid(format!("order {} exceeds {MAX_ORDER}", self.order));
        }
        if !(self.x >= 0.0 && self.x <= MAX_ARG) {
            return invalid(format!("argument {} outside [0, {MAX_ARG}]", self.x));
        }
        if !(self.target_rel_err > 0.0) {
            return invalid("target relative error must be positive");
        }
        Ok(())
    }
}

/// `J_a(x) = sign * exp(ln_abs)`; `value` underflows to 0 below `1e-308`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BesselValue {
    pub value: f64,
    pub ln_abs: f64,
    pub sign: i8,
    /// Estimated relative error (large near zeros of `J_a`).
    pub rel_err: f64,
    /// Estimated absolute error bound on the scale of the local amplitude.
    pub abs_err: f64,
    pub method: BesselMethod,
    /// `|J - J_asym|` from the Hankel expansion when `x` is large compared to `a^2`.
    pub asymptotic_gap: Option<f64>,
}

impl BesselValue {
    fn exact(v: f64) -> Self {
        BesselValue {
            value: v,
            ln_abs: if v == 0.0 { f64::NEG_INFINITY } else { v.abs().ln() },
            sign: v.signum() as i8 * (v != 0.0) as i8,
            rel_err: 0.0,
            abs_err: 0.0,
            method: BesselMethod::Exact,
            asymptotic_gap: None,
        }
    }

    fn from_log(ln_abs: f64, sign: i8, rel_err: f64, amp_err: f64, method: BesselMethod) -> Self {
        let value = sign as f64 * ln_abs.exp();
        let abs_err = (rel_err * value.abs()).max(amp_err);
        let rel_err = if value != 0.0 { rel_err.max(amp_err / value.abs()) } else { rel_err };
        BesselValue { value, ln_abs, sign, rel_err, abs_err, method, asymptotic_gap: None }
    }
}

/// Convenience: `J_a(x)` as `f64`, panicking on out-of-range input.
pub fn j(a: u32, x: f64) -> f64 {
    bessel_j(&BesselRequest::new(a, x)).expect("bessel argument in range").value
}

pub fn bessel_j(req: &BesselRequest) -> Result<BesselValue> {
    req.validate()?;
    let (a, x) = (req.order, req.x);
    if x == 0.0 {
        return Ok(BesselValue::exact(if a == 0 { 1.0 } else { 0.0 }));
    }
    let q = x * x / 4.0;
    let mut v = None;
    if q <= 4.0 * (a as f64 + 1.0) {
        let s = bessel_series(a, x);
        if s.rel_err <= req.target_rel_err * 1e-2 {
            v = Some(s);
        }
    }
    let mut v = match v {
        Some(v) => v,
        None => bessel_miller(a, x),
    };
    let af = a as f64;
    if x >= 50.0 && x >= af * af {
        let asym = hankel_asymptotic(a, x);
        v.asymptotic_gap = Some((v.value - asym).abs());
    }
    Ok(v)
}

/// Ascending power series, summed relative to its leading term.
pub fn bessel_series(a: u32, x: f64) -> BesselValue {
    let af = a as f64;
    let q = x * x / 4.0;
    let ln_pref = af * (x / 2.0).ln() - ln_factorial(a as u64);
    let (mut sum, mut t, mut abs_sum) = (1.0f64, 1.0f64, 1.0f64);
    let mut k = 1.0f64;
    loop {
        t *= -q / (k * (af + k));
        sum += t;
        abs_sum += t.abs();
        if t.abs() <= 1e-18 * sum.abs() && k * (af + k) > q {
            break;
        }
        if !t.is_finite() || k > 1e6 {
            return BesselValue::from_log(0.0, 1, f64::INFINITY, f64::INFINITY, BesselMethod::Series);
        }
        k += 1.0;
    }
    let rel = (abs_sum / sum.abs()) * (k + 4.0) * f64::EPSILON
        + (ln_pref.abs() + 1.0) * 2.0 * f64::EPSILON;
    let sign = if sum < 0.0 { -1 } else { 1 };
    BesselValue::from_log(ln_pref + sum.abs().ln(), sign, rel, 0.0, BesselMethod::Series)
}

/// Miller's backward recurrence normalised by `J_0 + 2 sum_k J_{2k} = 1`.
pub fn bessel_miller(a: u32, x: f64) -> BesselValue {
    const BIG: f64 = 1e250;
    let ln_big = BIG.ln();
    let m = (a as f64).max(x.ceil());
    let start = (m + 20.0 * m.cbrt() + 60.0).ceil() as u64;
    let (mut fp1, mut f) = (0.0f64, 1e-30f64);
    let mut scale = 0.0f64;
    let mut norm = 0.0f64;
    let mut norm_abs = 0.0f64;
    let mut at_a: Option<(f64, f64)> = None;
    let mut n = start;
    loop {
        if n == a as u64 {
            at_a = Some((f, scale));
        }
        if n % 2 == 0 {
            let w = if n == 0 { 1.0 } else { 2.0 };
            norm += w * f;
            norm_abs += w * f.abs();
        }
        if n == 0 {
            break;
        }
        let fm1 = (2.0 * n as f64 / x) * f - fp1;
        fp1 = f;
        f = fm1;
        n -= 1;
        if f.abs() > BIG {
            f /= BIG;
            fp1 /= BIG;
            norm /= BIG;
            norm_abs /= BIG;
            scale += ln_big;
        }
    }
    let (fa, sa) = at_a.expect("start index exceeds the order");
    let steps = start as f64;
    let mut rel = 4.0 * steps * f64::EPSILON + (norm_abs / norm.abs()) * steps.sqrt() * f64::EPSILON;
    if fa == 0.0 {
        rel = f64::INFINITY;
    }
    let ln_abs = fa.abs().ln() + sa - norm.abs().ln() - scale;
    let sign = if (fa < 0.0) != (norm < 0.0) { -1 } else { 1 };
    // Past the turning point, errors scale with the local amplitude rather than |J|.
    let amp_err = if x > a as f64 { 4.0 * steps * f64::EPSILON * amplitude_bound(a, x) } else { 0.0 };
    BesselValue::from_log(ln_abs, sign, rel, amp_err, BesselMethod::Miller)
}

/// `min(b a^{-1/3}, c x^{-1/3})`.
pub fn amplitude_bound(a: u32, x: f64) -> f64 {
    let ba = if a == 0 { f64::INFINITY } else { BOUND_B / (a as f64).cbrt() };
    let cx = if x == 0.0 { f64::INFINITY } else { BOUND_C / x.cbrt() };
    ba.min(cx).min(1.0)
}

/// Hankel's expansion for `x` large compared to `a^2`, truncated at its smallest term.
pub fn hankel_asymptotic(a: u32, x: f64) -> f64 {
    let mu = 4.0 * (a as f64).powi(2);
    let (mut p, mut qs) = (0.0f64, 0.0f64);
    let mut t = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 0..60u32 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            t *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if t.abs() > prev && k > 1 {
            break;
        }
        prev = t.abs();
        match k % 4 {
            0 => p += t,
            1 => qs += t,
            2 => p -= t,
            _ => qs -= t,
        }
        if t == 0.0 {
            break;
        }
    }
    let phase = (a as f64 / 2.0 + 0.25) * std::f64::consts::PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_chi - qs * sin_chi)
}

fn ln_j(a: u32, x: f64) -> Result<BesselValue> {
    bessel_j(&BesselRequest::new(a, x))
}

/// One evaluated instance of a bound check.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub check: &'static str,
    pub a: u32,
    pub x: f64,
    pub lhs: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

/// `1 <= J_a(ax) / (x^a J_a(a)) <= e^{a(1-x)}` for `0 < x <= 1`, evaluated in logs.
pub fn check_bound_i(a: u32, x: f64) -> Result<BoundCheck> {
    if !(x > 0.0 && x <= 1.0) || a == 0 {
        return invalid(format!("bound (i) needs a >= 1 and x in (0, 1], got a={a}, x={x}"));
    }
    let af = a as f64;
    let num = ln_j(a, af * x)?;
    let den = ln_j(a, af)?;
    let ln_ratio = num.ln_abs - af * x.ln() - den.ln_abs;
    let tol = num.rel_err + den.rel_err;
    let upper = af * (1.0 - x);
    let pass = num.sign > 0 && ln_ratio >= -tol && ln_ratio <= upper + tol;
    Ok(BoundCheck { check: "i", a, x, lhs: ln_ratio, lower: Some(0.0), upper: Some(upper), pass })
}

/// `c1 <= a^{1/3} J_a(a + d a^{1/3}) <= c2` with the calibrated constants; `x` holds `d`.
pub fn check_bound_iii(a: u32, d: f64) -> Result<BoundCheck> {
    let lhs = transition_value(a, d)?;
    let pass = lhs >= CAL_C1 && lhs <= CAL_C2;
    Ok(BoundCheck { check: "iii", a, x: d, lhs, lower: Some(CAL_C1), upper: Some(CAL_C2), pass })
}

/// `a^{1/3} J_a(a + d a^{1/3})`.
pub fn transition_value(a: u32, d: f64) -> Result<f64> {
    if !(d > -1.0 && d < 1.0) || a == 0 {
        return invalid(format!("bound (iii) needs a >= 1 and d in (-1, 1), got a={a}, d={d}"));
    }
    let af = a as f64;
    let v = ln_j(a, af + d * af.cbrt())?;
    Ok(v.value * af.cbrt())
}

/// `|J_a(x)| <= min(b a^{-1/3}, c x^{-1/3})`.
pub fn check_bound_iv(a: u32, x: f64) -> Result<BoundCheck> {
    if !(x > 0.0) {
        return invalid("bound (iv) needs x > 0");
    }
    let v = ln_j(a, x)?;
    let bound = if a == 0 { BOUND_C / x.cbrt() } else { amplitude_bound(a, x) };
    let pass = v.value.abs() + v.abs_err <= bound;
    Ok(BoundCheck { check: "iv", a, x, lhs: v.value.abs(), lower: None, upper: Some(bound), pass })
}

/// `J_a(ax) <= C / ((1 - x^2)^{1/4} a^{1/2})` for `1/2 <= x < 1`.
pub fn check_bound_v(a: u32, x: f64) -> Result<BoundCheck> {
    let lhs = uniform_ratio(a, x)?;
    Ok(BoundCheck { check: "v", a, x, lhs, lower: None, upper: Some(CAL_C_UNIFORM), pass: lhs <= CAL_C_UNIFORM })
}

/// `J_a(ax) (1 - x^2)^{1/4} a^{1/2}`.
pub fn uniform_ratio(a: u32, x: f64) -> Result<f64> {
    if !(x >= 0.5 && x < 1.0) || a == 0 {
        return invalid(format!("bound (v) needs a >= 1 and x in [1/2, 1), got a={a}, x={x}"));
    }
    let af = a as f64;
    let v = ln_j(a, af * x)?;
    Ok(v.value * (1.0 - x * x).powf(0.25) * af.sqrt())
}

/// `ln` of `e^{a(1 - u + ln u)} b a^{-1/3}`, `u = x_upper / a`.
pub fn ln_truncation_majorant(a: u32, x_upper: f64) -> Result<f64> {
    if a == 0 {
        return invalid("truncation majorant needs a >= 1");
    }
    let af = a as f64;
    let u = x_upper / af;
    if !(u >= 0.0 && u <= 1.0) {
        return invalid(format!("truncation majorant needs x_upper / a in [0, 1], got {u}"));
    }
    if u == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(af * (1.0 - u + u.ln()) + BOUND_B.ln() - af.ln() / 3.0)
}

/// Upper bound for `|J_a(x)|` valid for all `0 <= x <= x_upper <= a`.
pub fn truncation_majorant(a: u32, x_upper: f64) -> Result<f64> {
    ln_truncation_majorant(a, x_upper).map(f64::exp)
}

/// Arguments used by the bound suite for one check at order `a`.
pub fn suite_points(check: &str, a: u32) -> Result<Vec<f64>> {
    let af = a as f64;
    Ok(match check {
        "i" => vec![0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999, 1.0],
        "iii" => vec![-0.9, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 0.9],
        "iv" => {
            let mut xs: Vec<f64> = [0.01, 0.1, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 10.0].iter().map(|t| t * af).collect();
            xs.extend([0.5, 0.8, 1.2].iter().map(|d| af + d * af.cbrt()));
            xs.extend([1.0, 10.0, 100.0, 1e3, 1e4, 1e5]);
            xs.retain(|&x| x > 0.0 && x <= MAX_ARG);
            xs
        }
        "v" => vec![0.5, 0.6, 0.7, 0.75, 0.8, 0.9, 0.95, 0.99, 0.995, 0.999],
        _ => return invalid(format!("unknown check '{check}' (expected i, iii, iv or v)")),
    })
}

/// Every `(a, x)` of the suite grid for `check`, evaluated in parallel, in grid order.
pub fn run_bound_suite(check: &str, orders: &[u32]) -> Result<Vec<BoundCheck>> {
    let mut jobs = Vec::new();
    for &a in orders {
        for x in suite_points(check, a)? {
            jobs.push((a, x));
        }
    }
    jobs.par_iter()
        .map(|&(a, x)| match check {
            "i" => check_bound_i(a, x),
            "iii" => check_bound_iii(a, x),
            "iv" => check_bound_iv(a, x),
            _ => check_bound_v(a, x),
        })
        .collect()
}

/// Observed `[min, max]` of the quantity behind a calibrated check over the grid.
pub fn calibrate(check: &str, orders: &[u32]) -> Result<(f64, f64)> {
    let rows = run_bound_suite(check, orders)?;
    let lo = rows.iter().map(|r| r.lhs).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.lhs).fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}
