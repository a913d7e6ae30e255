//! The geometric side of the Petersson formula with trivial character:
//! the main term, the finite box sum and the certified tail over the rest of
//! the level lattice.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::arith::{f64_to_rat, rat_int, rat_to_f64};
use crate::bessel::{self, amplitude_bound, BesselRequest, MAX_ARG, MAX_ORDER};
use crate::error::{invalid, Error, Result};
use crate::field::{FieldElement, TotallyRealField};
use crate::ideals::{main_term_indicator, verify_class_number_one, PrincipalIdeal};
use crate::interval::Interval;
use crate::kloosterman::{global_kloosterman, DEFAULT_PAIR_BUDGET};
use crate::lattice::{box_radius, box_set, enumerate_complement, BoxSet, LatticePoint, DEFAULT_POINT_BUDGET};

/// Weights `(k_1, ..., k_r)`, each even and greater than 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightVector(pub Vec<u32>);

impl WeightVector {
    pub fn new(k: Vec<u32>) -> Result<Self> {
        if k.is_empty() {
            return invalid("empty weight vector");
        }
        for &kj in &k {
            if kj <= 2 || kj % 2 == 1 {
                return invalid(format!("weight {kj} must be even and greater than 2"));
            }
            if kj - 1 > MAX_ORDER {
                return invalid(format!("weight {kj} exceeds the supported Bessel order"));
            }
        }
        Ok(WeightVector(k))
    }

    pub fn k0(&self) -> u32 {
        *self.0.iter().min().unwrap()
    }

    /// `sum_j ln(k_j - 1) / 3`.
    pub fn ln_scale(&self) -> f64 {
        self.0.iter().map(|&k| ((k - 1) as f64).ln() / 3.0).sum()
    }

    /// `prod_j (k_j - 1)^{1/3}`.
    pub fn scale(&self) -> f64 {
        self.ln_scale().exp()
    }

    /// `prod_j 2 pi / i^{k_j}`, real for even weights.
    pub fn sign_factor(&self) -> f64 {
        self.0.iter().map(|&k| if (k / 2) % 2 == 0 { 2.0 * PI } else { -2.0 * PI }).product()
    }
}

#[derive(Clone, Debug)]
pub struct GeometricSideInput {
    pub field: TotallyRealField,
    /// Generator of the level `N`.
    pub level: FieldElement,
    /// Generator of the Hecke ideal `n`.
    pub hecke: FieldElement,
    pub m1: FieldElement,
    pub m2: FieldElement,
    pub k: WeightVector,
}

impl GeometricSideInput {
    pub fn validate(&self) -> Result<()> {
        let f = &self.field;
        if self.k.0.len() != f.degree() {
            return invalid(format!("need {} weights, got {}", f.degree(), self.k.0.len()));
        }
        if !verify_class_number_one(f) {
            return Err(Error::Unsupported("class number greater than one".into()));
        }
        for (name, m) in [("m1", &self.m1), ("m2", &self.m2)] {
            if !f.in_inverse_different(m) || !f.is_totally_positive(m) {
                return invalid(format!("{name} = {m} must be a totally positive element of the inverse different"));
            }
        }
        let n = PrincipalIdeal::new(f, &self.hecke)?;
        let lv = PrincipalIdeal::new(f, &self.level)?;
        if !n.is_integral() || !lv.is_integral() {
            return invalid("level and Hecke ideal must be integral");
        }
        if !n.coprime(f, &lv) {
            return invalid("Hecke ideal and level must be coprime");
        }
        Ok(())
    }

    fn level_ideal(&self) -> PrincipalIdeal {
        PrincipalIdeal::new(&self.field, &self.level).expect("validated")
    }

    fn hecke_ideal(&self) -> PrincipalIdeal {
        PrincipalIdeal::new(&self.field, &self.hecke).expect("validated")
    }

    /// `eta u` over the units `u` (mod squares) with `eta u` totally positive.
    pub fn twisted_etas(&self) -> Vec<FieldElement> {
        let f = &self.field;
        let eta = self.hecke_ideal().generator().clone();
        f.unit_class_representatives()
            .u
            .iter()
            .map(|u| f.mul(&eta, u))
            .filter(|x| f.is_totally_positive(x))
            .collect()
    }
}

/// Per-embedding window decision for one Bessel argument.
#[derive(Clone, Debug, Serialize)]
pub struct WindowVerdict {
    pub j: usize,
    pub k: u32,
    pub arg: f64,
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
    /// False when the enclosure of the argument straddles an endpoint.
    pub decided: bool,
    pub margin_lower: f64,
    pub margin_upper: f64,
}

/// Enclosure of `4 pi sqrt(sigma_j(q))` for totally positive `q`.
pub fn bessel_argument_interval(field: &TotallyRealField, q: &FieldElement, j: usize) -> Interval {
    let e = field.embed_bits(q, j, 120);
    let root = e.sqrt(130).expect("totally positive");
    Interval::pi().mul(&root).scale(&rat_int(4))
}

/// `arg` in `((k-1) - (k-1)^{1/3}, k-1)`, or `None` when undecided at this precision.
pub fn window_contains(arg: &Interval, k: u32) -> Option<bool> {
    let a = rat_int(k as i64 - 1);
    let upper_ok = match arg.cmp_rational(&a) {
        Some(std::cmp::Ordering::Less) => true,
        Some(_) => return Some(false),
        None => return None,
    };
    let d = Interval::point(a.clone()).sub(arg);
    let cube = |x: &BigRational| x * x * x;
    let lower_ok = if !d.hi.is_positive() || cube(&d.hi) < a {
        Some(true)
    } else if d.lo.is_positive() && cube(&d.lo) >= a {
        Some(false)
    } else {
        None
    };
    lower_ok.map(|l| l && upper_ok)
}

fn verdict(field: &TotallyRealField, q: &FieldElement, j: usize, k: u32) -> WindowVerdict {
    let arg = bessel_argument_interval(field, q, j);
    let dec = window_contains(&arg, k);
    let a = (k - 1) as f64;
    let x = arg.mid_f64();
    WindowVerdict {
        j,
        k,
        arg: x,
        lower: a - a.cbrt(),
        upper: a,
        inside: dec.unwrap_or(false),
        decided: dec.is_some(),
        margin_lower: x - (a - a.cbrt()),
        margin_upper: a - x,
    }
}

/// Window verdicts for the first point of the box set and `eta_1`.
pub fn hypothesis_window(input: &GeometricSideInput) -> Result<Vec<WindowVerdict>> {
    input.validate()?;
    let f = &input.field;
    let bs = box_set(f, &input.level_ideal());
    let Some(s) = bs.a.first() else {
        return Ok(Vec::new());
    };
    let eta = input.twisted_etas().into_iter().next().ok_or_else(|| Error::Unsupported("no totally positive eta u".into()))?;
    let q = f.div(&f.mul(&eta, &f.mul(&input.m1, &input.m2)), &f.mul(s, s))?;
    Ok((1..=f.degree()).map(|j| verdict(f, &q, j, input.k.0[j - 1])).collect())
}

/// `T_hat sqrt(d_F Nm n)`.
pub fn main_term(input: &GeometricSideInput) -> Result<f64> {
    input.validate()?;
    let n = input.hecke_ideal();
    let t = main_term_indicator(&input.field, &input.m1, &input.m2, &n);
    Ok(t as f64 * (input.field.discriminant() as f64 * rat_to_f64(n.norm())).sqrt())
}

/// One evaluated term of the lattice sum.
#[derive(Clone, Debug, Serialize)]
pub struct TermDetail {
    pub s: String,
    pub eta_u: String,
    pub kloosterman: f64,
    pub kloosterman_zero: bool,
    pub args: Vec<f64>,
    pub value: f64,
    pub err: f64,
}

struct Ctx<'a> {
    input: &'a GeometricSideInput,
    etas: Vec<FieldElement>,
    /// `4 pi sqrt(sigma_j(eta u m1 m2))` per `eta u`.
    consts: Vec<Vec<f64>>,
    /// `ln(sqrt(Nm(eta u)) Nm(n))`, the per-term Weil-type prefactor.
    ln_weil: f64,
    orders: Vec<u32>,
}

impl<'a> Ctx<'a> {
    fn new(input: &'a GeometricSideInput) -> Self {
        let f = &input.field;
        let etas = input.twisted_etas();
        let mm = f.mul(&input.m1, &input.m2);
        let consts = etas
            .iter()
            .map(|e| f.embeddings_f64(&f.mul(e, &mm)).iter().map(|v| 4.0 * PI * v.sqrt()).collect())
            .collect();
        let nm = rat_to_f64(input.hecke_ideal().norm());
        Ctx { input, etas, consts, ln_weil: 1.5 * nm.ln(), orders: input.k.0.iter().map(|k| k - 1).collect() }
    }

    fn args(&self, ui: usize, sigma: &[f64]) -> Vec<f64> {
        self.consts[ui].iter().zip(sigma).map(|(c, s)| c / s.abs()).collect()
    }

    /// `ln` of an upper bound for `|J_a(x)|` valid for every argument `>= x_lo`
    /// and, when `x_hi <= a`, every argument `<= x_hi`.
    fn ln_bessel_bound(a: u32, x_lo: f64, x_hi: f64) -> f64 {
        let amp = amplitude_bound(a, x_lo).ln();
        if x_hi <= a as f64 {
            amp.min(bessel::ln_truncation_majorant(a, x_hi).unwrap_or(f64::INFINITY))
        } else {
            amp
        }
    }

    fn ln_majorant(&self, args: &[f64]) -> f64 {
        self.ln_weil
            + args
                .iter()
                .zip(&self.orders)
                .map(|(&x, &a)| (2.0 * PI).ln() + Self::ln_bessel_bound(a, x, x))
                .sum::<f64>()
    }

    fn term(&self, s: &FieldElement, ui: usize, args: &[f64]) -> Result<TermDetail> {
        let f = &self.input.field;
        let eta = &self.etas[ui];
        let kl = global_kloosterman(f, &self.input.m1, &self.input.m2, eta, s, DEFAULT_PAIR_BUDGET)?;
        let nm_s = rat_to_f64(&f.abs_norm(s));
        let nm_eta = rat_to_f64(&f.abs_norm(eta));
        let mut ln_prod = 0.0;
        let mut sign = self.input.k.sign_factor().signum();
        let mut rel = 0.0;
        for (&x, &a) in args.iter().zip(&self.orders) {
            let v = bessel::bessel_j(&BesselRequest::new(a, x))?;
            ln_prod += (2.0 * PI).ln() + v.ln_abs;
            sign *= v.sign as f64;
            rel += v.rel_err;
        }
        let kz = kl.is_zero_exact();
        let kv = if kz { 0.0 } else { kl.approx.re };
        let mag = (nm_eta.sqrt() / nm_s) * ln_prod.exp();
        let value = sign * kv * mag;
        let err = value.abs() * rel + kl.err * mag;
        Ok(TermDetail {
            s: s.to_string(),
            eta_u: eta.to_string(),
            kloosterman: kv,
            kloosterman_zero: kz,
            args: args.to_vec(),
            value,
            err,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxTerm {
    pub value: f64,
    pub err: f64,
    pub terms: Vec<TermDetail>,
}

/// Sum over the box set `A` and the admissible `eta u`.
pub fn box_term(input: &GeometricSideInput) -> Result<BoxTerm> {
    input.validate()?;
    let f = &input.field;
    let bs = box_set(f, &input.level_ideal());
    let ctx = Ctx::new(input);
    let mut terms = Vec::new();
    for ui in 0..ctx.etas.len() {
        for s in &bs.a {
            let sigma = f.embeddings_f64(s);
            terms.push(ctx.term(s, ui, &ctx.args(ui, &sigma))?);
        }
    }
    Ok(BoxTerm { value: terms.iter().map(|t| t.value).sum(), err: terms.iter().map(|t| t.err).sum(), terms })
}

/// Controls for the tail summation.
#[derive(Clone, Debug)]
pub struct TailOptions {
    /// Fixed cutoffs `R_j`; `None` selects them automatically.
    pub cutoffs: Option<Vec<f64>>,
    /// Target `remainder <= rel_target |tail|` for the automatic cutoff.
    pub rel_target: f64,
    pub point_budget: usize,
    pub max_doublings: u32,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions { cutoffs: None, rel_target: 1e-3, point_budget: DEFAULT_POINT_BUDGET, max_doublings: 14 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailResult {
    pub value: f64,
    /// Rigorous bound on the omitted part plus evaluation errors.
    pub remainder_bound: f64,
    pub cutoffs: Vec<f64>,
    pub points_in_cutoff: usize,
    pub terms_evaluated: usize,
    /// Majorant mass of enumerated but unevaluated terms.
    pub skipped_bound: f64,
    /// Bound for all lattice points beyond the cutoffs.
    pub beyond_bound: f64,
    /// Accumulated evaluation error of the summed terms.
    pub eval_err: f64,
    pub converged: bool,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Bound for the lattice points with `|sigma_j(s)| > R_j` for some `j`, by
/// dyadic cells and the packing count of the level lattice.
fn beyond_bound(ctx: &Ctx, nu: f64, cutoffs: &[f64]) -> f64 {
    let r = cutoffs.len();
    let count = |i: &[u32]| -> f64 {
        let ys: Vec<f64> = (0..r).map(|j| cutoffs[j] * 2f64.powi(i[j] as i32)).collect();
        if r == 1 {
            (ys[0] / nu).floor()
        } else {
            let p = ys[0] * ys[1] / nu;
            2.0 * p + 2.0 * p.sqrt()
        }
    };
    let mut logs = Vec::new();
    for c in &ctx.consts {
        // per coordinate: last index, ln bounds per level, geometric factor at the last level
        let mut levels: Vec<(u32, Vec<f64>, f64)> = Vec::new();
        for j in 0..r {
            let a = ctx.orders[j];
            let af = a as f64;
            let mut ln_b = vec![Ctx::ln_bessel_bound(a, c[j] / cutoffs[j], f64::INFINITY)];
            let mut i = 1u32;
            loop {
                let x_hi = c[j] / (cutoffs[j] * 2f64.powi(i as i32 - 1));
                let x_lo = x_hi / 2.0;
                ln_b.push(Ctx::ln_bessel_bound(a, x_lo, x_hi));
                if x_hi <= af / 2.0 && i >= 1 {
                    let q = ((0.25f64).exp() / 2.0).powf(af) * 2.0;
                    let g = if r == 1 { 1.0 / (1.0 - q / 2.0) } else { 1.0 / (1.0 - q) };
                    levels.push((i, ln_b, g));
                    break;
                }
                i += 1;
            }
        }
        let mut idx = vec![0u32; r];
        loop {
            if idx.iter().any(|&v| v > 0) {
                let cnt = count(&idx);
                if cnt > 0.0 {
                    let mut l = ctx.ln_weil + cnt.ln();
                    for j in 0..r {
                        l += (2.0 * PI).ln() + levels[j].1[idx[j] as usize];
                        if idx[j] == levels[j].0 {
                            l += levels[j].2.ln();
                        }
                    }
                    logs.push(l);
                }
            }
            let mut j = 0;
            loop {
                if j == r {
                    return log_sum_exp(&logs).exp();
                }
                if idx[j] < levels[j].0 {
                    idx[j] += 1;
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }
    log_sum_exp(&logs).exp()
}

/// Tail over `A'` with fixed cutoffs.
pub fn tail_sum_at(input: &GeometricSideInput, cutoffs: &[f64], stop_rel: f64, budget: usize) -> Result<TailResult> {
    input.validate()?;
    let f = &input.field;
    if cutoffs.len() != f.degree() || cutoffs.iter().any(|c| !(*c > 0.0)) {
        return invalid("cutoffs must be positive, one per embedding");
    }
    let lv = input.level_ideal();
    let bs = box_set(f, &lv);
    tail_with_box(input, &bs, cutoffs, stop_rel, budget)
}

fn tail_with_box(input: &GeometricSideInput, bs: &BoxSet, cutoffs: &[f64], stop_rel: f64, budget: usize) -> Result<TailResult> {
    let f = &input.field;
    let ctx = Ctx::new(input);
    let rc: Vec<BigRational> = cutoffs.iter().map(|&c| f64_to_rat(c)).collect();
    let pts: Vec<LatticePoint> = enumerate_complement(f, bs, &rc, budget)?;
    // (majorant, point, eta index, args)
    let mut jobs: Vec<(f64, usize, usize, Vec<f64>)> = Vec::new();
    let mut unevaluable = Vec::new();
    for (pi, p) in pts.iter().enumerate() {
        for ui in 0..ctx.etas.len() {
            let args = ctx.args(ui, &p.sigma);
            let lm = ctx.ln_majorant(&args);
            if args.iter().any(|&x| x > MAX_ARG) {
                unevaluable.push(lm);
            } else {
                jobs.push((lm, pi, ui, args));
            }
        }
    }
    jobs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut suffix = vec![0.0f64; jobs.len() + 1];
    for i in (0..jobs.len()).rev() {
        suffix[i] = suffix[i + 1] + jobs[i].0.exp();
    }
    let (mut value, mut err) = (0.0f64, 0.0f64);
    let mut done = 0usize;
    const CHUNK: usize = 64;
    while done < jobs.len() {
        if done > 0 && suffix[done] <= stop_rel * value.abs() {
            break;
        }
        let end = (done + CHUNK).min(jobs.len());
        let terms: Vec<Result<TermDetail>> =
            jobs[done..end].par_iter().map(|(_, pi, ui, args)| ctx.term(&pts[*pi].s, *ui, args)).collect();
        for t in terms {
            let t = t?;
            value += t.value;
            err += t.err;
        }
        done = end;
    }
    let skipped = suffix[done] + unevaluable.iter().map(|l| l.exp()).sum::<f64>();
    let nu = rat_to_f64(bs.ideal.norm());
    let beyond = beyond_bound(&ctx, nu, cutoffs);
    Ok(TailResult {
        value,
        remainder_bound: skipped + beyond + err,
        cutoffs: cutoffs.to_vec(),
        points_in_cutoff: pts.len(),
        terms_evaluated: done,
        skipped_bound: skipped,
        beyond_bound: beyond,
        eval_err: err,
        converged: false,
    })
}

/// Tail with automatic cutoffs: start at twice the box radius and double
/// until `remainder <= rel_target |tail|`.
pub fn tail_sum(input: &GeometricSideInput, opts: &TailOptions) -> Result<TailResult> {
    input.validate()?;
    let f = &input.field;
    let bs = box_set(f, &input.level_ideal());
    let stop_rel = opts.rel_target / 10.0;
    if let Some(c) = &opts.cutoffs {
        if c.len() != f.degree() || c.iter().any(|v| !(*v > 0.0)) {
            return invalid("cutoffs must be positive, one per embedding");
        }
        let mut t = tail_with_box(input, &bs, c, stop_rel, opts.point_budget)?;
        t.converged = t.remainder_bound <= opts.rel_target * t.value.abs();
        return Ok(t);
    }
    let rad = box_radius(f, &bs).mid_f64();
    let mut cut = vec![2.0 * rad; f.degree()];
    let mut last: Option<TailResult> = None;
    for _ in 0..=opts.max_doublings {
        let t = match tail_with_box(input, &bs, &cut, stop_rel, opts.point_budget) {
            Ok(t) => t,
            Err(Error::Resource(msg)) => match last {
                Some(t) => return Ok(t),
                None => return Err(Error::Resource(msg)),
            },
            Err(e) => return Err(e),
        };
        let truncation = t.skipped_bound + t.beyond_bound;
        if truncation <= 0.5 * opts.rel_target * t.value.abs() || t.remainder_bound == 0.0 {
            let converged = t.remainder_bound <= opts.rel_target * t.value.abs();
            return Ok(TailResult { converged, ..t });
        }
        last = Some(t);
        cut.iter_mut().for_each(|c| *c *= 2.0);
    }
    Ok(last.expect("at least one pass"))
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometricSideReport {
    pub k: Vec<u32>,
    pub main_term: f64,
    pub box_term: f64,
    pub box_err: f64,
    pub box_imag_residue: f64,
    pub tail_truncated: f64,
    pub tail_remainder_bound: f64,
    pub tail_converged: bool,
    pub cutoffs: Vec<f64>,
    pub total: f64,
    pub scale: f64,
    pub scaled_main: f64,
    pub scaled_box: f64,
    pub scaled_tail: f64,
    pub scaled_tail_bound: f64,
    pub window: Vec<WindowVerdict>,
    pub window_satisfied: bool,
    pub box_terms: Vec<TermDetail>,
}

pub fn geometric_side(input: &GeometricSideInput, opts: &TailOptions) -> Result<GeometricSideReport> {
    input.validate()?;
    let main = main_term(input)?;
    let bx = box_term(input)?;
    let tail = tail_sum(input, opts)?;
    let window = hypothesis_window(input)?;
    let scale = input.k.scale();
    let imag = box_imaginary_residue(input)?;
    Ok(GeometricSideReport {
        k: input.k.0.clone(),
        main_term: main,
        box_term: bx.value,
        box_err: bx.err,
        box_imag_residue: imag,
        tail_truncated: tail.value,
        tail_remainder_bound: tail.remainder_bound,
        tail_converged: tail.converged,
        cutoffs: tail.cutoffs.clone(),
        total: main + bx.value + tail.value,
        scale,
        scaled_main: main.abs() * scale,
        scaled_box: bx.value.abs() * scale,
        scaled_tail: tail.value.abs() * scale,
        scaled_tail_bound: tail.remainder_bound * scale,
        window_satisfied: !window.is_empty() && window.iter().all(|w| w.inside),
        window,
        box_terms: bx.terms,
    })
}

/// Largest `|Im S|` over the box-set Kloosterman sums; even weights make every term real.
fn box_imaginary_residue(input: &GeometricSideInput) -> Result<f64> {
    let f = &input.field;
    let bs = box_set(f, &input.level_ideal());
    let mut worst = 0.0f64;
    for eta in input.twisted_etas() {
        for s in &bs.a {
            let kl = global_kloosterman(f, &input.m1, &input.m2, &eta, s, DEFAULT_PAIR_BUDGET)?;
            worst = worst.max(kl.approx.im.abs());
        }
    }
    Ok(worst)
}

/// `s` rendered with its norm, for reports.
pub fn describe_point(field: &TotallyRealField, s: &FieldElement) -> String {
    let n: BigInt = field.abs_norm(s).to_integer();
    format!("{s} (Nm {})", n.to_u64().map_or(n.to_string(), |v| v.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn q_input(m: i64, n: i64, k: u32) -> GeometricSideInput {
        GeometricSideInput {
            field: TotallyRealField::rationals(),
            level: FieldElement::one(),
            hecke: FieldElement::one(),
            m1: FieldElement::int(m),
            m2: FieldElement::int(n),
            k: WeightVector::new(vec![k]).unwrap(),
        }
    }

    fn classical_kloosterman(m: i64, n: i64, c: i64) -> f64 {
        (0..c)
            .filter(|x| num_integer::Integer::gcd(x, &c) == 1)
            .map(|x| {
                let (_, u, _) = crate::arith::ext_gcd(x as i128, c as i128);
                let xi = (u.rem_euclid(c as i128)) as i64;
                (2.0 * PI * ((m * x + n * xi) as f64) / c as f64).cos()
            })
            .sum()
    }

    /// `2 pi i^{-k} sum_{c in range} S(m,n;c)/c J_{k-1}(4 pi sqrt(mn)/c)`.
    fn classical_terms(m: i64, n: i64, k: u32, cs: std::ops::RangeInclusive<i64>) -> f64 {
        let sgn = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        cs.map(|c| {
            let x = 4.0 * PI * ((m * n) as f64).sqrt() / c as f64;
            sgn * 2.0 * PI * classical_kloosterman(m, n, c) / c as f64 * bessel::j(k - 1, x)
        })
        .sum()
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![12, 58]).is_ok());
        assert!(WeightVector::new(vec![13]).is_err());
        assert!(WeightVector::new(vec![2]).is_err());
        let w = WeightVector::new(vec![12]).unwrap();
        assert!((w.scale() - 11f64.cbrt()).abs() < 1e-12);
        assert_eq!(w.sign_factor(), 2.0 * PI);
        assert_eq!(WeightVector::new(vec![14]).unwrap().sign_factor(), -2.0 * PI);
    }

    #[test]
    fn window_endpoints() {
        assert_eq!(window_contains(&Interval::from_int(11), 12), Some(false));
        assert_eq!(window_contains(&Interval::point(rat(21, 2)), 12), Some(true));
        // 11 - 11^{1/3} = 8.776...
        assert_eq!(window_contains(&Interval::point(rat(877, 100)), 12), Some(false));
        assert_eq!(window_contains(&Interval::point(rat(878, 100)), 12), Some(true));
        // arg 100.5 with k = 102: (101 - 4.657, 101)
        assert_eq!(window_contains(&Interval::point(rat(201, 2)), 102), Some(true));
    }

    #[test]
    fn window_for_tuned_rational_instance() {
        // 4 pi sqrt(m1 m2) = 10.8 is not reachable with integer m; use m1 m2 = 1 (arg 4 pi = 12.566)
        let inp = q_input(1, 1, 12);
        let w = hypothesis_window(&inp).unwrap();
        assert_eq!(w.len(), 1);
        assert!(!w[0].inside && w[0].decided);
        assert!((w[0].arg - 4.0 * PI).abs() < 1e-12);
        let inp = q_input(1, 1, 14);
        assert!(hypothesis_window(&inp).unwrap()[0].inside);
    }

    #[test]
    fn main_term_examples() {
        assert_eq!(main_term(&q_input(1, 1, 12)).unwrap(), 1.0);
        assert_eq!(main_term(&q_input(1, 2, 12)).unwrap(), 0.0);
        let f = TotallyRealField::quadratic(2).unwrap();
        let dinv = f.inv(f.different_generator()).unwrap();
        let inp = GeometricSideInput {
            field: f.clone(),
            level: FieldElement::one(),
            hecke: FieldElement::one(),
            m1: dinv.clone(),
            m2: dinv.clone(),
            k: WeightVector::new(vec![12, 12]).unwrap(),
        };
        assert!((main_term(&inp).unwrap() - 8f64.sqrt()).abs() < 1e-14);
        // odd power of an inert prime: T_hat = 0
        let inp = GeometricSideInput { m1: f.mul(&dinv, &f.elem(27, 0)), ..inp };
        assert_eq!(main_term(&inp).unwrap(), 0.0);
    }

    #[test]
    fn classical_box_term_is_leading_c1_term() {
        for (m, n) in [(1, 1), (1, 2), (2, 3)] {
            let b = box_term(&q_input(m, n, 12)).unwrap();
            let want = classical_terms(m, n, 12, 1..=1);
            assert!((b.value - want).abs() <= 1e-12 * want.abs(), "{m},{n}: {} vs {want}", b.value);
            assert_eq!(b.terms.len(), 1);
        }
        assert!((box_term(&q_input(1, 1, 12)).unwrap().value - 2.0 * PI * bessel::j(11, 4.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn classical_tail_matches_direct_series() {
        for (m, n) in [(1, 1), (1, 2), (3, 5)] {
            let inp = q_input(m, n, 12);
            let opts = TailOptions { rel_target: 1e-10, ..Default::default() };
            let t = tail_sum(&inp, &opts).unwrap();
            assert!(t.converged, "{t:?}");
            let direct = classical_terms(m, n, 12, 2..=4000);
            assert!((t.value - direct).abs() <= 1e-10 * direct.abs(), "{m},{n}: {} vs {direct}", t.value);
            assert!(t.remainder_bound <= 1e-10 * t.value.abs());
            assert!((t.value - direct).abs() <= t.remainder_bound);
        }
    }

    #[test]
    fn tail_at_box_radius_is_empty() {
        let inp = q_input(1, 1, 12);
        let t = tail_sum_at(&inp, &[1.0], 0.0, 1000).unwrap();
        assert_eq!(t.value, 0.0);
        assert_eq!(t.points_in_cutoff, 0);
        assert!(t.remainder_bound > 0.0);
        // the bound dominates the actual tail
        let direct = classical_terms(1, 1, 12, 2..=4000);
        assert!(t.remainder_bound >= direct.abs());
    }

    #[test]
    fn tail_bound_tiny_for_high_weight() {
        let inp = q_input(1, 1, 30);
        let t = tail_sum_at(&inp, &[64.0], 0.0, 10_000).unwrap();
        assert!(t.beyond_bound < 1e-12, "{}", t.beyond_bound);
    }

    #[test]
    fn quadratic_box_term_matches_composition() {
        let f = TotallyRealField::quadratic(2).unwrap();
        let dg = f.different_generator().clone();
        let m1 = f.div(&f.elem(27, 0), &dg).unwrap();
        let m2 = f.inv(&dg).unwrap();
        let inp = GeometricSideInput {
            field: f.clone(),
            level: f.elem(3, 0),
            hecke: FieldElement::one(),
            m1: m1.clone(),
            m2: m2.clone(),
            k: WeightVector::new(vec![12, 58]).unwrap(),
        };
        let b = box_term(&inp).unwrap();
        assert_eq!(b.terms.len(), 1);
        let s = f.elem(3, 0);
        let kl = global_kloosterman(&f, &m1, &m2, &FieldElement::one(), &s, DEFAULT_PAIR_BUDGET).unwrap();
        let mm = f.mul(&m1, &m2);
        let mut want = kl.approx.re / 9.0;
        for (j, k) in [(1usize, 12u32), (2, 58)] {
            let x = 4.0 * PI * f.embed_f64(&mm, j).sqrt() / 3.0;
            want *= 2.0 * PI * if (k / 2) % 2 == 0 { 1.0 } else { -1.0 } * bessel::j(k - 1, x);
        }
        assert!((b.value - want).abs() <= 1e-12 * want.abs().max(1e-300));
    }

    #[test]
    fn suppressed_instance_is_main_term() {
        let f = TotallyRealField::quadratic(2).unwrap();
        let dinv = f.inv(f.different_generator()).unwrap();
        let inp = GeometricSideInput {
            field: f,
            level: FieldElement::one(),
            hecke: FieldElement::one(),
            m1: dinv.clone(),
            m2: dinv,
            k: WeightVector::new(vec![40, 40]).unwrap(),
        };
        let r = geometric_side(&inp, &TailOptions::default()).unwrap();
        assert!((r.total - 8f64.sqrt()).abs() < 1e-10);
        assert!(r.box_term.abs() + r.tail_truncated.abs() + r.tail_remainder_bound < 1e-10);
        assert!(r.box_imag_residue < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut inp = q_input(1, 1, 12);
        inp.m1 = FieldElement::int(-1);
        assert!(geometric_side(&inp, &TailOptions::default()).is_err());
        let mut inp = q_input(1, 1, 12);
        inp.level = FieldElement::int(2);
        inp.hecke = FieldElement::int(4);
        assert!(main_term(&inp).is_err());
        let f = TotallyRealField::quadratic(10).unwrap();
        let inp = GeometricSideInput {
            field: f.clone(),
            level: FieldElement::one(),
            hecke: FieldElement::one(),
            m1: f.inv(f.different_generator()).unwrap(),
            m2: f.inv(f.different_generator()).unwrap(),
            k: WeightVector::new(vec![12, 12]).unwrap(),
        };
        assert!(matches!(main_term(&inp), Err(Error::Unsupported(_))));
    }
}
