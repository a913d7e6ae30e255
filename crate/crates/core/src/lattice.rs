//! The lattice `sigma(I)` of a principal ideal: shortest vectors, the box
//! set `A` and the enumeration of its complement.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::cmp::Ordering;

use crate::arith::{rat_int, rat_to_f64};
use crate::error::{Error, Result};
use crate::field::{FieldElement, TotallyRealField};
use crate::ideals::PrincipalIdeal;
use crate::interval::{sqrt_lower, sqrt_upper, Interval};

/// Default cap on the number of enumerated lattice points.
pub const DEFAULT_POINT_BUDGET: usize = 5_000_000;

/// A lattice point with cached embeddings and absolute norm.
#[derive(Clone, Debug)]
pub struct LatticePoint {
    pub s: FieldElement,
    pub sigma: Vec<f64>,
    pub abs_norm: BigRational,
}

/// Box-set data of an ideal lattice.
#[derive(Clone, Debug)]
pub struct BoxSet {
    pub ideal: PrincipalIdeal,
    /// `delta^2`, exact.
    pub delta_sq: BigRational,
    /// Enclosure of `delta`.
    pub delta: Interval,
    /// `delta_tilde^2 = delta^2 / (4 r)`.
    pub delta_tilde_sq: BigRational,
    /// Points with `|sigma_j(s)| <= 2 delta_tilde` for all `j`, one per `+-` pair.
    pub a: Vec<FieldElement>,
    /// All `s` with `||sigma(s)|| = delta`, one per `+-` pair.
    pub minimizers: Vec<FieldElement>,
}

/// `<u, v> = sum_j sigma_j(u) sigma_j(v) = Tr(u v)`.
fn inner(field: &TotallyRealField, u: &FieldElement, v: &FieldElement) -> BigRational {
    field.trace(&field.mul(u, v))
}

fn round_rational(q: &BigRational) -> BigInt {
    (q + BigRational::new(1.into(), 2.into())).floor().to_integer()
}

/// Lagrange-reduced `Z`-basis of the ideal (a single element for `Q`).
pub fn reduced_basis(field: &TotallyRealField, ideal: &PrincipalIdeal) -> Vec<FieldElement> {
    let g = ideal.generator().clone();
    if field.degree() == 1 {
        return vec![if g.a.is_negative() { -&g } else { g }];
    }
    let mut b1 = g.clone();
    let mut b2 = field.mul(&g, &field.w());
    loop {
        if inner(field, &b1, &b1) > inner(field, &b2, &b2) {
            std::mem::swap(&mut b1, &mut b2);
        }
        let mu = round_rational(&(inner(field, &b1, &b2) / inner(field, &b1, &b1)));
        if mu.is_zero() {
            break;
        }
        b2 = &b2 - &b1.scale(&BigRational::from_integer(mu));
    }
    vec![b1, b2]
}

/// Representative of `{s, -s}` with `sigma_1(s) > 0`.
fn plus_rep(field: &TotallyRealField, s: FieldElement) -> FieldElement {
    if field.sign(&s, 1) == Ordering::Less {
        -&s
    } else {
        s
    }
}

fn combo(basis: &[FieldElement], x: i64, y: i64) -> FieldElement {
    let mut s = basis[0].scale(&rat_int(x));
    if basis.len() > 1 {
        s = &s + &basis[1].scale(&rat_int(y));
    }
    s
}

/// All nonzero `s` (mod `+-`) with `||sigma(s)||^2 <= bound`, exactly.
fn points_in_ball(field: &TotallyRealField, basis: &[FieldElement], bound: &BigRational) -> Vec<FieldElement> {
    let mut out = Vec::new();
    if basis.len() == 1 {
        let g11 = inner(field, &basis[0], &basis[0]);
        let xmax = rat_to_f64(&(bound / &g11)).sqrt().floor() as i64 + 1;
        for x in 1..=xmax {
            let s = combo(basis, x, 0);
            if &inner(field, &s, &s) <= bound {
                out.push(plus_rep(field, s));
            }
        }
        return out;
    }
    let g11 = inner(field, &basis[0], &basis[0]);
    let g12 = inner(field, &basis[0], &basis[1]);
    let g22 = inner(field, &basis[1], &basis[1]);
    let det = &g11 * &g22 - &g12 * &g12;
    let (g11f, g12f, detf, rf) = (rat_to_f64(&g11), rat_to_f64(&g12), rat_to_f64(&det), rat_to_f64(bound));
    let ymax = (rf * g11f / detf).sqrt().floor() as i64 + 1;
    for y in 0..=ymax {
        let c = -g12f * y as f64 / g11f;
        let rad2 = (rf - detf * (y * y) as f64 / g11f) / g11f;
        let rad = if rad2 > 0.0 { rad2.sqrt() } else { 0.0 };
        let lo = (c - rad).floor() as i64 - 1;
        let hi = (c + rad).ceil() as i64 + 1;
        for x in lo..=hi {
            if y == 0 && x <= 0 {
                continue;
            }
            let s = combo(basis, x, y);
            if &inner(field, &s, &s) <= bound {
                out.push(plus_rep(field, s));
            }
        }
    }
    out
}

/// Shortest nonzero vector length squared and all minimizers (mod `+-`).
pub fn shortest_vector(field: &TotallyRealField, ideal: &PrincipalIdeal) -> (BigRational, Vec<FieldElement>) {
    let basis = reduced_basis(field, ideal);
    let delta_sq = inner(field, &basis[0], &basis[0]);
    let mut mins = points_in_ball(field, &basis, &delta_sq);
    sort_points(field, &mut mins);
    (delta_sq, mins)
}

fn sort_points(field: &TotallyRealField, v: &mut [FieldElement]) {
    v.sort_by(|x, y| {
        field
            .abs_norm(x)
            .cmp(&field.abs_norm(y))
            .then_with(|| field.embed_f64(x, 1).total_cmp(&field.embed_f64(y, 1)))
            .then_with(|| x.a.cmp(&y.a))
            .then_with(|| x.b.cmp(&y.b))
    });
}

/// `|sigma_j(s)| <= 2 delta_tilde` for all `j`, i.e. `sigma_j(s)^2 <= delta^2 / r`.
pub fn in_box(field: &TotallyRealField, s: &FieldElement, delta_sq: &BigRational) -> bool {
    let lim = delta_sq / rat_int(field.degree() as i64);
    (1..=field.degree()).all(|j| field.cmp_embedding_square(s, j, &lim) != Ordering::Greater)
}

pub fn box_set(field: &TotallyRealField, ideal: &PrincipalIdeal) -> BoxSet {
    let (delta_sq, minimizers) = shortest_vector(field, ideal);
    // every point of the box has ||sigma(s)||^2 <= delta^2, hence is a minimizer
    let a: Vec<FieldElement> = minimizers.iter().filter(|s| in_box(field, s, &delta_sq)).cloned().collect();
    let delta = Interval::new(sqrt_lower(&delta_sq, 80), sqrt_upper(&delta_sq, 80));
    let delta_tilde_sq = &delta_sq / rat_int(4 * field.degree() as i64);
    BoxSet { ideal: ideal.clone(), delta_sq, delta, delta_tilde_sq, a, minimizers }
}

fn classify(sigma: f64, r: f64) -> Option<bool> {
    let a = sigma.abs();
    if a < r * (1.0 - 1e-9) {
        Some(true)
    } else if a > r * (1.0 + 1e-9) {
        Some(false)
    } else {
        None
    }
}

/// All nonzero `s` in the ideal (mod `+-`) with `|sigma_j(s)| <= R_j`, sorted by `(Nm, sigma_1)`.
pub fn enumerate_box(
    field: &TotallyRealField,
    ideal: &PrincipalIdeal,
    cutoffs: &[BigRational],
    budget: usize,
) -> Result<Vec<LatticePoint>> {
    let r = field.degree();
    if cutoffs.len() != r {
        return Err(Error::Validation(format!("expected {r} cutoffs, got {}", cutoffs.len())));
    }
    if cutoffs.iter().any(|c| c.is_negative()) {
        return Err(Error::Validation("cutoffs must be nonnegative".into()));
    }
    let basis = reduced_basis(field, ideal);
    let rf: Vec<f64> = cutoffs.iter().map(rat_to_f64).collect();
    let rsq: Vec<BigRational> = cutoffs.iter().map(|c| c * c).collect();
    let covol = rat_to_f64(ideal.norm()) * (field.discriminant() as f64).sqrt();
    let estimate = rf.iter().map(|x| 2.0 * x).product::<f64>() / covol / 2.0;
    if !estimate.is_finite() || estimate > 2.0 * budget as f64 + 1e4 {
        return Err(Error::Resource(format!(
            "about {estimate:.3e} lattice points requested, budget {budget}"
        )));
    }
    let inside = |s: &FieldElement, sig: &[f64]| -> bool {
        (0..r).all(|j| match classify(sig[j], rf[j]) {
            Some(v) => v,
            None => field.cmp_embedding_square(s, j + 1, &rsq[j]) != Ordering::Greater,
        })
    };
    let mut pts: Vec<LatticePoint> = if r == 1 {
        let g = rat_to_f64(&basis[0].a).abs();
        let xmax = (rf[0] / g).floor() as i64 + 1;
        (1..=xmax)
            .filter_map(|x| {
                let s = combo(&basis, x, 0);
                let sig = vec![rat_to_f64(&s.a)];
                inside(&s, &sig).then(|| LatticePoint { abs_norm: field.abs_norm(&s), s, sigma: sig })
            })
            .collect()
    } else {
        let m: Vec<[f64; 2]> = (1..=2).map(|j| [field.embed_f64(&basis[0], j), field.embed_f64(&basis[1], j)]).collect();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let ymax = ((m[1][0].abs() * rf[0] + m[0][0].abs() * rf[1]) / det.abs()).floor() as i64 + 1;
        let rows: Vec<Vec<LatticePoint>> = (0..=ymax)
            .into_par_iter()
            .map(|y| {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for j in 0..2 {
                    let rr = rf[j] * (1.0 + 1e-9);
                    let a = (-rr - m[j][1] * y as f64) / m[j][0];
                    let b = (rr - m[j][1] * y as f64) / m[j][0];
                    lo = lo.max(a.min(b));
                    hi = hi.min(a.max(b));
                }
                let mut row = Vec::new();
                if lo > hi + 2.0 {
                    return row;
                }
                for x in (lo.floor() as i64 - 1)..=(hi.ceil() as i64 + 1) {
                    if y == 0 && x <= 0 {
                        continue;
                    }
                    let s = combo(&basis, x, y);
                    let sig = field.embeddings_f64(&s);
                    if inside(&s, &sig) {
                        let (s, sig) = if field.sign(&s, 1) == Ordering::Less {
                            (-&s, sig.iter().map(|v| -v).collect())
                        } else {
                            (s, sig)
                        };
                        row.push(LatticePoint { abs_norm: field.abs_norm(&s), s, sigma: sig });
                    }
                }
                row
            })
            .collect();
        rows.into_iter().flatten().collect()
    };
    if pts.len() > budget {
        return Err(Error::Resource(format!("{} lattice points exceed budget {budget}", pts.len())));
    }
    pts.sort_by(|p, q| {
        p.abs_norm
            .cmp(&q.abs_norm)
            .then_with(|| p.sigma[0].total_cmp(&q.sigma[0]))
            .then_with(|| p.s.a.cmp(&q.s.a))
            .then_with(|| p.s.b.cmp(&q.s.b))
    });
    Ok(pts)
}

/// Points of the complement `A'` with `|sigma_j(s)| <= R_j`.
pub fn enumerate_complement(
    field: &TotallyRealField,
    bs: &BoxSet,
    cutoffs: &[BigRational],
    budget: usize,
) -> Result<Vec<LatticePoint>> {
    let pts = enumerate_box(field, &bs.ideal, cutoffs, budget)?;
    Ok(pts.into_iter().filter(|p| !bs.a.contains(&p.s)).collect())
}

/// `2 delta_tilde` as an exact-ish enclosure: `delta / sqrt(r)`.
pub fn box_radius(field: &TotallyRealField, bs: &BoxSet) -> Interval {
    let q = &bs.delta_sq / rat_int(field.degree() as i64);
    Interval::new(sqrt_lower(&q, 80), sqrt_upper(&q, 80))
}

/// Covolume of `sigma(I)`, i.e. `Nm(I) sqrt(d_F)`.
pub fn covolume(field: &TotallyRealField, ideal: &PrincipalIdeal) -> f64 {
    rat_to_f64(ideal.norm()) * (field.discriminant() as f64).sqrt()
}

/// `Nm(s)` of a lattice point as `f64`.
pub fn norm_f64(p: &LatticePoint) -> f64 {
    p.abs_norm.to_f64().unwrap_or(f64::INFINITY)
}
