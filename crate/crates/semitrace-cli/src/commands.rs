use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};

use semitrace::clifford::C64;
use semitrace::gutzwiller::{self as gz, AmplitudeOrder, Bump, CompareOptions, ModelGeometry, Profile, Window};
use semitrace::heatkernel::{self as hk, JetData};
use semitrace::landau::{self, ModelParams};
use semitrace::symplectic::{self as sp, Quadratic, SymplecticMatrix};
use semitrace::weylseries::{self as ws, FormRecord, KoszulElement, WeylModel};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{fmt_f64, Table};

pub struct Report {
    pub json: Value,
    pub table: Table,
}

pub const COMMANDS: [&str; 6] = ["classify", "spectrum", "heat", "bnf", "trace-check", "eta"];

pub fn run(command: &str, cfg: &Config) -> Result<Report, CliError> {
    let report = match command {
        "classify" => classify(cfg)?,
        "spectrum" => spectrum(cfg)?,
        "heat" => heat(cfg)?,
        "bnf" => bnf(cfg)?,
        "trace-check" => trace_check(cfg)?,
        "eta" => eta(cfg)?,
        other => return Err(CliError::Config { key: None, line: None, message: format!("unknown command `{other}`") }),
    };
    Ok(report)
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn classify(cfg: &Config) -> Result<Report, CliError> {
    let rows = cfg.matrix("matrix")?;
    let n = rows.len();
    if n == 0 || n % 2 != 0 || rows.iter().any(|r| r.len() != n) {
        return Err(cfg.error("matrix", "must be a square matrix of even size"));
    }
    let bound = cfg.int_or("bound", 50)?;
    if bound < 1 {
        return Err(cfg.error("bound", "must be at least 1"));
    }
    let tol = cfg.positive("tol", Some(1e-9))?;
    let iterates = cfg.int_or("iterates", 3)?;
    if iterates < 0 {
        return Err(cfg.error("iterates", "must be non-negative"));
    }
    cfg.finish()?;

    let p = SymplecticMatrix::new(DMatrix::from_fn(n, n, |i, k| rows[i][k]))?;
    let d = sp::classify_return_map(&p)?;
    let resonance = sp::check_nonresonant(&d, bound, tol)?;
    let mut iter_rows = Vec::new();
    for ell in 1..=iterates {
        let det = sp::det_one_minus(&d, ell).ok();
        let maslov = sp::maslov_index(&d, ell).ok();
        iter_rows.push(json!({ "ell": ell, "det_one_minus": det, "maslov": maslov }));
    }
    let mut table = Table::new(vec!["block", "index", "a", "b"]);
    for (kind, vals) in [("elliptic", &d.elliptic), ("pos_hyp", &d.pos_hyp), ("neg_hyp", &d.neg_hyp)] {
        for (i, v) in vals.iter().enumerate() {
            table.push(vec![kind.into(), i.to_string(), f(*v), String::new()]);
        }
    }
    for (i, (a, b)) in d.loxodromic.iter().enumerate() {
        table.push(vec!["loxodromic".into(), i.to_string(), f(*a), f(*b)]);
    }
    let json = json!({
        "command": "classify",
        "m": d.m(),
        "decomposition": d,
        "certified": resonance.is_certified(),
        "resonance": resonance,
        "iterates": iter_rows,
    });
    Ok(Report { json, table })
}

fn spectrum(cfg: &Config) -> Result<Report, CliError> {
    let mu = cfg.f64_list("mu")?;
    if mu.is_empty() || mu.iter().any(|&x| !(x > 0.0)) {
        return Err(cfg.error("mu", "must be a non-empty list of positive numbers"));
    }
    let h = cfg.positive("h", None)?;
    let cutoff = cfg.positive("cutoff", None)?;
    let basis_cut = if cfg.has("basis_cut") { Some(cfg.usize("basis_cut", None)?) } else { None };
    cfg.finish()?;

    let p = ModelParams::new(mu.clone(), h)?;
    let lines = landau::model_spectrum(&p, cutoff)?;
    let mut table = Table::new(vec!["value", "multiplicity", "tau", "sign"]);
    for (v, mult, tau, sign) in landau::spectrum_rows(&lines) {
        table.push(vec![f(v), mult.to_string(), tau, sign.into()]);
    }
    let mut json = json!({ "command": "spectrum", "mu": mu, "h": h, "cutoff": cutoff, "lines": lines });
    if let Some(cut) = basis_cut {
        let safe = landau::safe_cutoff(&p, cut).min(cutoff);
        let eigs = landau::truncated_eigen(&p, cut, landau::Pairing::ComplexPairs)?;
        let got = landau::clustered_truncated_spectrum(&eigs, safe, 1e-9);
        let exact: Vec<f64> = lines.iter().filter(|l| l.value.abs() < safe).map(|l| l.value).collect();
        let max_err = got
            .iter()
            .map(|(v, _)| exact.iter().map(|e| (e - v).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        json["truncated"] = json!({ "basis_cut": cut, "safe_cutoff": safe, "lines": got.len(), "max_abs_err": max_err });
    }
    Ok(Report { json, table })
}

fn heat(cfg: &Config) -> Result<Report, CliError> {
    let mu = cfg.f64_list("mu")?;
    if mu.is_empty() || mu.iter().any(|&x| !(x > 0.0)) {
        return Err(cfg.error("mu", "must be a non-empty list of positive numbers"));
    }
    let ts = cfg.f64_list("t_list")?;
    if ts.is_empty() || ts.iter().any(|&t| !(t > 0.0)) {
        return Err(cfg.error("t_list", "must be a non-empty list of positive times"));
    }
    let mut jet = JetData::zeros(mu.clone());
    let n = jet.n();
    let entries = cfg.matrix("jet")?;
    for e in &entries {
        let ok = e.len() == 4 && e[..3].iter().all(|&x| x >= 0.0 && x.fract() == 0.0 && (x as usize) < n);
        if !ok || e[0] == e[1] {
            return Err(cfg.error("jet", format!("entries are [j, k, l, value] with j != k and indices below {n}")));
        }
        jet.set_antisymmetric(e[0] as usize, e[1] as usize, e[2] as usize, e[3]);
    }
    cfg.finish()?;

    jet.validate()?;
    let rows = hk::u1_table(&jet, &ts)?;
    let integral = hk::u1_time_integral(&jet)?;
    let mut table = Table::new(vec!["t", "u1", "quadrature_check", "abs_err"]);
    for r in &rows {
        table.push(vec![f(r.t), f(r.u1), f(r.quadrature_check), f(r.abs_err)]);
    }
    let json = json!({ "command": "heat", "mu": mu, "rows": rows, "time_integral": integral });
    Ok(Report { json, table })
}

fn complex(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| C64::new(x, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(C64::new(a[0].as_f64()?, a[1].as_f64()?)),
        _ => None,
    }
}

fn bnf(cfg: &Config) -> Result<Report, CliError> {
    let sqrt_mu = cfg.f64_list("sqrt_mu")?;
    if sqrt_mu.is_empty() || sqrt_mu.iter().any(|&x| !(x > 0.0)) {
        return Err(cfg.error("sqrt_mu", "must be a non-empty list of positive numbers"));
    }
    let m = sqrt_mu.len();
    let l_gamma = cfg.positive("l_gamma", None)?;
    let order = cfg.usize("order", None)?;
    if order < 2 {
        return Err(cfg.error("order", "must be at least 2"));
    }
    let trunc = cfg.usize("trunc", Some(order))?;
    if trunc < order {
        return Err(cfg.error("trunc", "must be at least `order`"));
    }
    let mut blocks = Vec::new();
    if let Some(v) = cfg.raw("blocks") {
        let bad = || cfg.error("blocks", "entries are [kind, plane, coeff] or [kind, plane, plane, coeff]");
        for b in v.as_array().ok_or_else(bad)? {
            let b = b.as_array().ok_or_else(bad)?;
            let kind = b.first().and_then(Value::as_str).ok_or_else(bad)?;
            let plane = |i: usize| b.get(i).and_then(Value::as_u64).map(|p| p as usize).ok_or_else(bad);
            let coeff = b.last().and_then(complex).ok_or_else(bad)?;
            let q = match (kind, b.len()) {
                ("elliptic", 3) => Quadratic::Elliptic(plane(1)?),
                ("hyperbolic", 3) => Quadratic::Hyperbolic(plane(1)?),
                ("lox_re", 4) => Quadratic::LoxRe(plane(1)?, plane(2)?),
                ("lox_im", 4) => Quadratic::LoxIm(plane(1)?, plane(2)?),
                _ => return Err(bad()),
            };
            blocks.push((coeff, q));
        }
    }
    let perturbation: Vec<FormRecord> = match cfg.raw("perturbation") {
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| cfg.error("perturbation", format!("expected [{{subset, terms: [{{exponents, re, im}}]}}]: {e}")))?,
        None => Vec::new(),
    };
    cfg.finish()?;

    let model = WeylModel::new(
        sqrt_mu.iter().map(|&x| C64::new(x, 0.0)).collect(),
        C64::new(1.0 / l_gamma, 0.0),
        blocks,
    )?;
    let d1 = ws::model_symbol(&model, trunc).plus(&KoszulElement::from_records(m, trunc, &perturbation)?);
    let nf = ws::birkhoff_normal_form(&model, &d1, order)?;
    let residual = ws::normal_form_residual(&model, &nf);
    let mut table = Table::new(vec!["part", "subset", "exponents", "re", "im"]);
    let join = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    for (part, e) in [("omega", &nf.omega), ("a", &nf.a)] {
        for r in e.to_records() {
            let subset = r.subset.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            for t in &r.terms {
                table.push(vec![part.into(), subset.clone(), join(&t.exponents), f(t.re), f(t.im)]);
            }
        }
    }
    for t in nf.f.to_records() {
        table.push(vec!["f".into(), String::new(), join(&t.exponents), f(t.re), f(t.im)]);
    }
    let json = json!({
        "command": "bnf",
        "order": order,
        "trunc": trunc,
        "omega": nf.omega.to_records(),
        "f": nf.f.to_records(),
        "a": nf.a.to_records(),
        "residual_min_weight": residual.min_weight(),
        "residual_max_abs": residual.max_abs(),
    });
    Ok(Report { json, table })
}

fn bump(cfg: &Config, key: &str, default: Option<Bump>) -> Result<Bump, CliError> {
    let Some(v) = cfg.raw(key) else {
        return default.ok_or_else(|| cfg.error(key, "missing required key"));
    };
    let num = |k: &str, d: Option<f64>| match v.get(k) {
        Some(x) => x.as_f64().ok_or_else(|| cfg.error(key, format!("`{k}` must be a number"))),
        None => d.ok_or_else(|| cfg.error(key, format!("missing `{k}`"))),
    };
    match v.get("shape").and_then(Value::as_str).unwrap_or("bump") {
        "bump" => {}
        other => return Err(cfg.error(key, format!("unsupported shape `{other}`"))),
    }
    Bump::new(num("center", Some(0.0))?, num("plateau", Some(0.0))?, num("half_width", None)?)
        .map_err(|e| cfg.error(key, e.to_string()))
}

fn profile(cfg: &Config, key: &str) -> Result<Profile, CliError> {
    let shape = cfg.raw(key).and_then(|v| v.get("shape")).and_then(Value::as_str);
    if shape != Some("sampled") {
        return Ok(Profile::Bump(bump(cfg, key, None)?));
    }
    let v = cfg.raw(key).expect("present");
    let num = |k: &str| v.get(k).and_then(Value::as_f64).ok_or_else(|| cfg.error(key, format!("`{k}` must be a number")));
    let values: Vec<f64> = v
        .get("values")
        .and_then(Value::as_array)
        .and_then(|a| a.iter().map(Value::as_f64).collect())
        .ok_or_else(|| cfg.error(key, "`values` must be an array of numbers"))?;
    Profile::sampled(num("start")?, num("step")?, values).map_err(|e| cfg.error(key, e.to_string()))
}

fn geometry(cfg: &Config) -> Result<ModelGeometry, CliError> {
    let l = cfg.positive("l_gamma", Some(1.0))?;
    let t = cfg.f64_or("t_gamma", 1.0)?;
    let betas = cfg.f64_list_or("beta", Vec::new())?;
    let mu = cfg.f64_list_or("mu", vec![1.0; betas.len()])?;
    if mu.len() != betas.len() {
        return Err(cfg.error("mu", format!("needs one entry per beta ({})", betas.len())));
    }
    Ok(ModelGeometry::new(l, t, betas, mu)?)
}

fn h_list(cfg: &Config) -> Result<Vec<f64>, CliError> {
    let hs = cfg.f64_list("h_list")?;
    if hs.is_empty() || hs.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
        return Err(cfg.error("h_list", "must be a non-empty list of values in (0, 1)"));
    }
    Ok(hs)
}

fn trace_check(cfg: &Config) -> Result<Report, CliError> {
    let g = geometry(cfg)?;
    let hs = h_list(cfg)?;
    let f_profile = profile(cfg, "f")?;
    let theta = bump(cfg, "theta", None)?;
    let lambda = cfg.f64_or("lambda", 0.0)?;
    let order = match cfg.str_or("order", "resummed")? {
        "leading" => AmplitudeOrder::Leading,
        "resummed" => AmplitudeOrder::Resummed,
        other => return Err(cfg.error("order", format!("expected `leading` or `resummed`, got `{other}`"))),
    };
    let transverse = if g.dim() > 0 { Some(bump(cfg, "chi", Some(Bump::new(0.0, 0.5, 1.5)?))?) } else { None };
    cfg.finish()?;

    let w = Window::new(f_profile, theta, lambda)?;
    let report = gz::trace_compare(&g, &w, &hs, &CompareOptions { order, transverse })?;
    let mut table = Table::new(vec!["h", "spectral_re", "spectral_im", "geometric_re", "geometric_im", "abs_err", "rel_err"]);
    for r in &report.rows {
        table.push(vec![
            f(r.h),
            f(r.spectral.re),
            f(r.spectral.im),
            f(r.geometric.re),
            f(r.geometric.im),
            f(r.abs_err),
            f(r.rel_err),
        ]);
    }
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "h": r.h,
                "spectral": [r.spectral.re, r.spectral.im],
                "geometric": [r.geometric.re, r.geometric.im],
                "abs_err": r.abs_err,
                "rel_err": r.rel_err,
            })
        })
        .collect();
    let json = json!({
        "command": "trace-check",
        "model": g,
        "order": report.order,
        "rows": rows,
        "fit": report.fit,
    });
    Ok(Report { json, table })
}

fn eta(cfg: &Config) -> Result<Report, CliError> {
    let source = cfg.str_or("source", "landau")?.to_string();
    let mut table = Table::new(vec!["h", "eps", "smoothed", "sign_sum", "scaled", "reference"]);
    let json = match source.as_str() {
        "landau" => {
            let mu = cfg.f64_list("mu")?;
            if mu.is_empty() || mu.iter().any(|&x| !(x > 0.0)) {
                return Err(cfg.error("mu", "must be a non-empty list of positive numbers"));
            }
            let hs = h_list(cfg)?;
            let cutoff = cfg.positive("cutoff", None)?;
            let eps = cfg.positive("eps", None)?;
            let target = cfg.opt_f64("target")?;
            let tol = cfg.positive("tol", Some(1e-6))?;
            cfg.finish()?;
            let samples = hs
                .par_iter()
                .map(|&h| Ok((h, eps, landau::model_spectrum(&ModelParams::new(mu.clone(), h)?, cutoff)?)))
                .collect::<Result<Vec<_>, semitrace::Error>>()?;
            let rep = gz::eta_limit_check(mu.len(), &samples, target, tol)?;
            for r in &rep.rows {
                table.push(vec![f(r.h), f(r.eps), f(r.smoothed), f(r.sign_sum), f(r.scaled), String::new()]);
            }
            json!({ "command": "eta", "source": source, "report": rep })
        }
        "progression" => {
            let a = cfg.positive("a", None)?;
            let b = cfg.f64("b")?;
            let k = cfg.int_or("k_max", 4000)?;
            if k < 1 {
                return Err(cfg.error("k_max", "must be at least 1"));
            }
            let c = cfg.positive("c", Some(8.0))?;
            cfg.finish()?;
            let eps = c / (a * k as f64);
            let v = hk::eta_smoothed(&hk::arithmetic_progression(a, b, k), eps)?;
            let exact = hk::eta_arithmetic_progression(a, b)?;
            table.push(vec![String::new(), f(eps), f(v.smoothed), f(v.sign_sum), f(v.smoothed), f(exact)]);
            json!({
                "command": "eta",
                "source": source,
                "eps": eps,
                "smoothed": v.smoothed,
                "sign_sum": v.sign_sum,
                "hurwitz": exact,
                "deviation": (v.smoothed - exact).abs(),
            })
        }
        "circle" => {
            let l = cfg.positive("l_gamma", Some(1.0))?;
            let t = cfg.f64_or("t_gamma", 1.0)?;
            let hs = h_list(cfg)?;
            let k = cfg.int_or("k_max", 4000)?;
            if k < 1 {
                return Err(cfg.error("k_max", "must be at least 1"));
            }
            let c = cfg.positive("c", Some(8.0))?;
            cfg.finish()?;
            let g = ModelGeometry::circle(l, t)?;
            let rows = hs
                .par_iter()
                .map(|&h| {
                    let (a, b) = gz::circle_progression(&g, h)?;
                    let spec = gz::model_eigenvalues(&g, h, &gz::Cutoffs::new(a * k as f64, None))?;
                    let template = hk::arithmetic_progression(a, b, 0).remove(0);
                    let lines: Vec<_> = spec
                        .lines
                        .iter()
                        .map(|l| {
                            let mut e = template.clone();
                            e.value = l.value;
                            e
                        })
                        .collect();
                    let eps = c / (a * k as f64);
                    let rep = gz::eta_limit_check(0, &[(h, eps, lines)], None, 1.0)?;
                    Ok((rep.rows[0], hk::eta_arithmetic_progression(a, b)?))
                })
                .collect::<Result<Vec<_>, semitrace::Error>>()?;
            let mut out = Vec::new();
            for (r, exact) in &rows {
                table.push(vec![f(r.h), f(r.eps), f(r.smoothed), f(r.sign_sum), f(r.scaled), f(*exact)]);
                out.push(json!({ "row": r, "hurwitz": exact, "deviation": (r.scaled - exact).abs() }));
            }
            json!({ "command": "eta", "source": source, "rows": out })
        }
        other => return Err(cfg.error("source", format!("expected landau, progression or circle, got `{other}`"))),
    };
    Ok(Report { json, table })
}
