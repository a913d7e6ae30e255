//! One function per subcommand, each turning a resolved config into an [`Output`].

use serde_json::{json, Value};

use petersson::bessel::{bessel_j, calibrate, run_bound_suite, BesselRequest};
use petersson::experiments::{decay_sweep, weight_schedule, DiscreteMeasure, Reference};
use petersson::field::{FieldElement, TotallyRealField};
use petersson::ideals::{is_narrow_class_number_one, verify_class_number_one, PrincipalIdeal};
use petersson::kloosterman::{check_weil_type_bound, global_kloosterman};
use petersson::lattice::box_set;
use petersson::oracle::{parse_pairs, petersson_ratio_test};
use petersson::traceformula::{geometric_side, GeometricSideInput, TailOptions, WeightVector};

use crate::config::RunConfig;
use crate::output::{cell, num, Output, Table};
use crate::CliError;

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

pub fn field_of(cfg: &RunConfig) -> Result<TotallyRealField, CliError> {
    let d = cfg.field.d.unwrap_or(1);
    Ok(if d == 1 { TotallyRealField::rationals() } else { TotallyRealField::quadratic(d)? })
}

fn elem(f: &TotallyRealField, s: &str) -> Result<FieldElement, CliError> {
    Ok(f.parse_element(s)?)
}

/// `m1`, `m2`, optionally scaled by the inverse different generator.
fn m_values(f: &TotallyRealField, cfg: &RunConfig) -> Result<(FieldElement, FieldElement), CliError> {
    let mut m1 = elem(f, cfg.forms.m1.as_deref().unwrap_or("1"))?;
    let mut m2 = elem(f, cfg.forms.m2.as_deref().unwrap_or("1"))?;
    if cfg.forms.times_dinv == Some(true) {
        let dinv = f.inv(f.different_generator())?;
        m1 = f.mul(&m1, &dinv);
        m2 = f.mul(&m2, &dinv);
    }
    Ok((m1, m2))
}

fn tail_options(cfg: &RunConfig) -> TailOptions {
    TailOptions {
        cutoffs: cfg.ranges.cutoffs.clone(),
        rel_target: cfg.run.rel_target.unwrap_or(1e-3),
        point_budget: cfg.run.point_budget.unwrap_or(petersson::lattice::DEFAULT_POINT_BUDGET),
        max_doublings: cfg.run.max_doublings.unwrap_or(14),
    }
}

fn level_int(f: &TotallyRealField, cfg: &RunConfig) -> Result<i64, CliError> {
    let s = elem(f, cfg.level.s.as_deref().unwrap_or("1"))?;
    s.to_i64_pair()
        .filter(|(a, b)| *b == 0 && *a > 0)
        .map(|(a, _)| a)
        .ok_or_else(|| CliError::validation(format!("level generator {s} must be a positive rational integer here")))
}

pub fn field_info(cfg: &RunConfig) -> Result<Output, CliError> {
    let f = field_of(cfg)?;
    let units = f.unit_class_representatives();
    let result = json!({
        "r": f.degree(),
        "d": f.radicand().unwrap_or(1),
        "discriminant": f.discriminant(),
        "basis": format!("{:?}", f.basis_tag()),
        "w_trace_norm": f.w_trace_norm(),
        "fundamental_unit": f.fundamental_unit().map(|u| u.to_string()),
        "fundamental_unit_norm": f.unit_norm(),
        "different_generator": f.different_generator().to_string(),
        "different_generator_embeddings": f.embeddings_f64(f.different_generator()),
        "different_totally_positive": f.is_totally_positive(f.different_generator()),
        "class_number_one": verify_class_number_one(&f),
        "narrow_class_number_one": is_narrow_class_number_one(&f)?,
        "unit_classes": units.u.iter().map(|u| u.to_string()).collect::<Vec<_>>(),
        "totally_positive_unit_classes": units.u_plus.iter().map(|u| u.to_string()).collect::<Vec<_>>(),
    });
    let summary = format!("F = {}, discriminant {}", if f.degree() == 1 { "Q".into() } else { format!("Q(sqrt {})", f.radicand().unwrap()) }, f.discriminant());
    Ok(Output { table: Table::key_value(&result), result, notes: vec![], summary })
}

pub fn shortest_vector(cfg: &RunConfig) -> Result<Output, CliError> {
    let f = field_of(cfg)?;
    let g = elem(&f, cfg.level.s.as_deref().unwrap_or("1"))?;
    let bs = box_set(&f, &PrincipalIdeal::new(&f, &g)?);
    let point = |s: &FieldElement| json!({ "s": s.to_string(), "sigma": f.embeddings_f64(s), "abs_norm": f.abs_norm(s).to_string() });
    let result = json!({
        "ideal_generator": g.to_string(),
        "delta_sq": bs.delta_sq.to_string(),
        "delta": bs.delta.mid_f64(),
        "delta_tilde_sq": bs.delta_tilde_sq.to_string(),
        "box_size": bs.a.len(),
        "box": bs.a.iter().map(point).collect::<Vec<_>>(),
        "minimizers": bs.minimizers.iter().map(point).collect::<Vec<_>>(),
    });
    let mut header = vec!["set", "s", "abs_norm"];
    let sig: Vec<String> = (1..=f.degree()).map(|j| format!("sigma{j}")).collect();
    header.extend(sig.iter().map(|s| s.as_str()));
    let mut table = Table::new(&header);
    for (set, pts) in [("box", &bs.a), ("minimizer", &bs.minimizers)] {
        for s in pts {
            let mut row = vec![set.to_string(), s.to_string(), f.abs_norm(s).to_string()];
            row.extend(f.embeddings_f64(s).into_iter().map(num));
            table.rows.push(row);
        }
    }
    let summary = format!("({g}): delta^2 = {}, |A| = {}", bs.delta_sq, bs.a.len());
    Ok(Output { result, table, notes: vec![("box_size".into(), bs.a.len().to_string())], summary })
}

pub fn kloosterman(cfg: &RunConfig, exact_zero_test: bool) -> Result<Output, CliError> {
    let f = field_of(cfg)?;
    let (m1, m2) = m_values(&f, cfg)?;
    let n = elem(&f, cfg.level.n.as_deref().unwrap_or("1"))?;
    let c = elem(&f, cfg.forms.c.as_deref().unwrap_or("1"))?;
    let budget = cfg.run.pair_budget.unwrap_or(petersson::kloosterman::DEFAULT_PAIR_BUDGET);
    let s = global_kloosterman(&f, &m1, &m2, &n, &c, budget)?;
    let weil = check_weil_type_bound(&f, &m1, &m2, &n, &c, budget)?;
    let zero = exact_zero_test.then(|| s.is_zero_exact());
    let result = json!({
        "m1": m1.to_string(),
        "m2": m2.to_string(),
        "n": n.to_string(),
        "c": c.to_string(),
        "re": s.approx.re,
        "im": s.approx.im,
        "err": s.err,
        "conductor": s.q,
        "exact_integer": s.as_integer(),
        "exact_zero": zero,
        "nonvanishing": zero.map(|z| !z),
        "weil_bound_ok": weil,
    });
    let mut table = Table::new(&["re", "im", "err", "exact_integer", "exact_zero", "nonvanishing", "weil_bound_ok"]);
    table.rows.push(vec![
        num(s.approx.re),
        num(s.approx.im),
        num(s.err),
        s.as_integer().map(|v| v.to_string()).unwrap_or_default(),
        cell(&result["exact_zero"]),
        cell(&result["nonvanishing"]),
        weil.to_string(),
    ]);
    let summary = match s.as_integer() {
        Some(v) => format!("S({m1}, {m2}; {n}; {c}) = {v}"),
        None => format!("S({m1}, {m2}; {n}; {c}) = {} + {}i", s.approx.re, s.approx.im),
    };
    Ok(Output { result, table, notes: vec![], summary })
}

pub fn bessel(cfg: &RunConfig) -> Result<Output, CliError> {
    let a = cfg.bessel.order.ok_or_else(|| CliError::validation("--order is required"))?;
    let x = cfg.bessel.x.ok_or_else(|| CliError::validation("--x is required"))?;
    let v = bessel_j(&BesselRequest::new(a, x))?;
    let result = json!({ "order": a, "x": x, "value": to_value(&v) });
    let mut table = Table::new(&["order", "x", "value", "ln_abs", "sign", "rel_err", "abs_err", "method"]);
    table.rows.push(vec![
        a.to_string(),
        num(x),
        num(v.value),
        num(v.ln_abs),
        v.sign.to_string(),
        num(v.rel_err),
        num(v.abs_err),
        cell(&to_value(&v.method)),
    ]);
    Ok(Output { result, table, notes: vec![], summary: format!("J_{a}({x}) = {:e} (ln|J| = {})", v.value, v.ln_abs) })
}

pub fn bessel_suite(cfg: &RunConfig) -> Result<Output, CliError> {
    let check = cfg.bessel.check.clone().unwrap_or_else(|| "iv".into());
    let grid = cfg.bessel.grid.clone().unwrap_or_default();
    let rows = run_bound_suite(&check, &grid)?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    let mut notes = vec![("points".into(), rows.len().to_string()), ("failures".into(), failures.to_string())];
    let mut result = json!({ "check": check, "grid": grid, "points": rows.len(), "failures": failures, "rows": to_value(&rows) });
    if check == "iii" || check == "v" {
        let (lo, hi) = calibrate(&check, &grid)?;
        result["calibrated_min"] = json!(lo);
        result["calibrated_max"] = json!(hi);
        notes.push(("calibrated".into(), format!("[{},{}]", num(lo), num(hi))));
    }
    let mut table = Table::new(&["check", "a", "x", "lhs", "lower", "upper", "pass"]);
    for r in &rows {
        table.rows.push(vec![
            r.check.to_string(),
            r.a.to_string(),
            num(r.x),
            num(r.lhs),
            r.lower.map(num).unwrap_or_default(),
            r.upper.map(num).unwrap_or_default(),
            r.pass.to_string(),
        ]);
    }
    let summary = format!("check ({check}): {} points, {failures} failures", rows.len());
    Ok(Output { result, table, notes, summary })
}

fn geometric_input(cfg: &RunConfig) -> Result<GeometricSideInput, CliError> {
    let f = field_of(cfg)?;
    let (m1, m2) = m_values(&f, cfg)?;
    let k = cfg.ranges.k.clone().ok_or_else(|| CliError::validation("weights are required (--k or ranges.k)"))?;
    Ok(GeometricSideInput {
        level: elem(&f, cfg.level.s.as_deref().unwrap_or("1"))?,
        hecke: elem(&f, cfg.level.n.as_deref().unwrap_or("1"))?,
        m1,
        m2,
        k: WeightVector::new(k)?,
        field: f,
    })
}

pub fn geom_side(cfg: &RunConfig) -> Result<Output, CliError> {
    let input = geometric_input(cfg)?;
    let rep = geometric_side(&input, &tail_options(cfg))?;
    let result = to_value(&rep);
    let summary = format!(
        "k = {:?}: main {:e}, box {:e}, tail {:e} (+- {:e}), total {:e}",
        rep.k, rep.main_term, rep.box_term, rep.tail_truncated, rep.tail_remainder_bound, rep.total
    );
    Ok(Output { table: Table::key_value(&result), result, notes: vec![], summary })
}

fn schedule(cfg: &RunConfig) -> Result<(TotallyRealField, petersson::experiments::WeightSchedule), CliError> {
    let f = field_of(cfg)?;
    let s = level_int(&f, cfg)?;
    let p = cfg.prime.p.unwrap_or(3);
    let ls = cfg.ranges.l.clone().unwrap_or_default();
    let sched = weight_schedule(&f, s, p, &ls)?;
    Ok((f, sched))
}

pub fn weight_schedule_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let (f, sched) = schedule(cfg)?;
    let r = f.degree();
    let mut header: Vec<String> = vec!["l".into(), "accepted".into()];
    for prefix in ["k", "arg", "margin_lower", "margin_upper"] {
        header.extend((1..=r).map(|j| format!("{prefix}{j}")));
    }
    header.push("reason".into());
    let mut table = Table { header, rows: vec![] };
    for e in &sched.entries {
        let mut row = vec![e.l.to_string(), e.accepted.to_string()];
        let pad = |v: Vec<String>| -> Vec<String> { (0..r).map(|j| v.get(j).cloned().unwrap_or_default()).collect() };
        row.extend(pad(e.k.iter().map(|k| k.to_string()).collect()));
        row.extend(pad(e.args.iter().map(|x| num(*x)).collect()));
        row.extend(pad(e.margin_lower.iter().map(|x| num(*x)).collect()));
        row.extend(pad(e.margin_upper.iter().map(|x| num(*x)).collect()));
        row.push(e.reason.clone().unwrap_or_default());
        table.rows.push(row);
    }
    let c = sched.log_k_over_l_min;
    let notes = vec![("log_k_over_l_min".into(), c.map(num).unwrap_or_default())];
    let summary = format!(
        "{} of {} exponents accepted, min ln k / l = {}",
        sched.accepted().count(),
        sched.entries.len(),
        c.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into())
    );
    Ok(Output { result: to_value(&sched), table, notes, summary })
}

pub fn decay_sweep_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let (f, sched) = schedule(cfg)?;
    let rows = decay_sweep(&f, &sched, &tail_options(cfg))?;
    let r = f.degree();
    let mut header: Vec<String> = vec!["l".into()];
    header.extend((1..=r).map(|j| format!("k{j}")));
    header.extend((1..=r).map(|j| format!("arg{j}")));
    for h in ["main_abs", "box_abs", "tail_abs", "tail_bound", "scaled_box", "scaled_tail", "S_nonzero", "D_lower_bound"] {
        header.push(h.into());
    }
    let mut table = Table { header, rows: vec![] };
    for row in &rows {
        let mut v = vec![row.l.to_string()];
        v.extend(row.k.iter().map(|k| k.to_string()));
        v.extend(row.args.iter().map(|x| num(*x)));
        v.extend([row.main_abs, row.box_abs, row.tail_abs, row.tail_bound, row.scaled_box, row.scaled_tail].map(num));
        v.push(row.s_nonzero.to_string());
        v.push(num(row.d_lower_bound));
        table.rows.push(v);
    }
    let rejected: Vec<String> = sched.entries.iter().filter(|e| !e.accepted).map(|e| e.l.to_string()).collect();
    let notes = vec![
        ("rejected_l".into(), rejected.join(";")),
        ("log_k_over_l_min".into(), sched.log_k_over_l_min.map(num).unwrap_or_default()),
    ];
    let result = json!({ "schedule": to_value(&sched), "rows": to_value(&rows) });
    let summary = format!("{} sweep rows, rejected l = [{}]", rows.len(), rejected.join(", "));
    Ok(Output { result, table, notes, summary })
}

pub fn oracle(cfg: &RunConfig) -> Result<Output, CliError> {
    let k = cfg.oracle.k.unwrap_or(12);
    let pairs = parse_pairs(cfg.oracle.pairs.as_deref().unwrap_or("(1,1)"))?;
    let r = petersson_ratio_test(k, &pairs)?;
    let mut table = Table::new(&["m", "n", "a_m", "a_n", "geometric", "geometric_err", "classical", "classical_bound", "ratio"]);
    for x in &r.rows {
        table.rows.push(vec![
            x.m.to_string(),
            x.n.to_string(),
            x.a_m.clone(),
            x.a_n.clone(),
            num(x.geometric),
            num(x.geometric_err),
            num(x.classical),
            num(x.classical_bound),
            num(x.ratio),
        ]);
    }
    let notes = vec![("spread".into(), num(r.spread)), ("cross_check".into(), num(r.cross_check))];
    let summary = format!("k = {k}, {} pairs, spread {:e}, classical cross-check {:e}", r.rows.len(), r.spread, r.cross_check);
    Ok(Output { result: to_value(&r), table, notes, summary })
}

/// Atoms from a CSV file with columns `x,w` (a header line is optional).
pub fn read_atoms(path: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::validation(format!("cannot read atoms {path}: {e}")))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::validation(format!("{path}: {e}")))?;
        let parse = |j: usize| rec.get(j).and_then(|s| s.parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(x), Some(w)) => out.push((x, w)),
            _ if i == 0 => continue,
            _ => return Err(CliError::validation(format!("{path}: line {} is not 'x,w'", i + 1))),
        }
    }
    Ok(out)
}

pub fn discrepancy(cfg: &RunConfig) -> Result<Output, CliError> {
    let path = cfg.discrepancy.atoms.clone().ok_or_else(|| CliError::validation("--atoms is required"))?;
    let mut nu = DiscreteMeasure::new(read_atoms(&path)?)?;
    if cfg.discrepancy.normalize == Some(true) {
        nu = nu.normalized()?;
    }
    let reference = match cfg.discrepancy.reference.as_deref().unwrap_or("sato-tate") {
        "sato-tate" => Reference::SatoTate,
        "mu-p" => {
            let p = cfg.discrepancy.p.ok_or_else(|| CliError::validation("--p is required for the mu-p reference"))?;
            if !(p > 1.0) {
                return Err(CliError::validation("p must exceed 1"));
            }
            Reference::MuP(p)
        }
        other => return Err(CliError::validation(format!("unknown reference '{other}' (sato-tate or mu-p)"))),
    };
    let d = petersson::experiments::discrepancy(&nu, reference);
    let result = json!({ "atoms": nu.atoms.len(), "total_mass": nu.total_mass(), "discrepancy": d });
    let mut table = Table::new(&["atoms", "total_mass", "discrepancy"]);
    table.rows.push(vec![nu.atoms.len().to_string(), num(nu.total_mass()), num(d)]);
    Ok(Output { result, table, notes: vec![], summary: format!("D = {d} over {} atoms", nu.atoms.len()) })
}
