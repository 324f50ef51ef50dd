use crate::manifest::{OutputFile, RunDir};
use serde::Serialize;
use serde_json::{json, Map, Value};
use tori::estimates::{audit_lemma4, audit_lemma6, compute_constants, convergence_summary, EstimateParams, EstimateReport};
use tori::geometry::{build_maps, carve, convex_hull_check, measure_compare};
use tori::ledger::{audit_selection_rules, build_nu};
use tori::model::{check_hypotheses, ingest, HypothesisReport};
use tori::normalize::{normalize, NormalizationRun};
use tori::verify::{torus_invariance_error, InvarianceResult};
use tori::{Error, Result};

pub const NORMALIZE_JSON: &str = "normalize.json";
pub const CERTIFY_JSON: &str = "certify.json";
pub const AUDIT_JSON: &str = "audit.json";
pub const MEASURE_JSON: &str = "measure.json";
pub const VERIFY_JSON: &str = "verify.json";
pub const REPORT_JSON: &str = "report.json";

/// Files written by a verb, and a description of the failed checks if any.
pub struct VerbOutput {
    pub outputs: Vec<OutputFile>,
    pub violations: Option<String>,
}

pub fn outputs_of(verb: &str) -> &'static [&'static str] {
    match verb {
        "normalize" => &[NORMALIZE_JSON, "normalize_steps.csv"],
        "certify" => &[CERTIFY_JSON, "certify_levels.csv"],
        "audit-ledger" => &[AUDIT_JSON, "audit_selection.csv", "audit_bounds.csv"],
        "measure" => &[MEASURE_JSON, "measure_nodes.csv"],
        "verify" => &[VERIFY_JSON, "verify.csv"],
        "report" => &[REPORT_JSON, "report.csv"],
        _ => &[],
    }
}

pub fn run_verb(verb: &str, dir: &RunDir) -> Result<VerbOutput> {
    match verb {
        "normalize" => normalize_verb(dir),
        "certify" => certify_verb(dir),
        "audit-ledger" => audit_verb(dir),
        "measure" => measure_verb(dir),
        "verify" => verify_verb(dir),
        "report" => report_verb(dir),
        _ => Err(Error::Unknown { kind: "verb", name: verb.into() }),
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |j| format!("{prefix}_{j}"))
}

fn violations(count: usize, what: String) -> Option<String> {
    (count > 0).then_some(what)
}

fn load_run(dir: &RunDir) -> Result<NormalizationRun> {
    if !dir.has(NORMALIZE_JSON) {
        return Err(Error::Config(format!("{} has no {NORMALIZE_JSON}; run normalize first", dir.root.display())));
    }
    dir.read_json(NORMALIZE_JSON)
}

fn normalize_at(dir: &RunDir, epsilon: f64) -> Result<NormalizationRun> {
    let p = dir.params();
    let spec = dir.spec()?;
    let h0 = ingest(&spec, &spec.omega0, &p.ingest_options(epsilon))?;
    normalize(h0, &p.normalize_config())
}

fn normalize_verb(dir: &RunDir) -> Result<VerbOutput> {
    let run = normalize_at(dir, dir.params().epsilon)?;
    let (n1, n2) = (run.states[0].n1, run.states[0].n2);
    let mut head = vec!["r".to_string()];
    head.extend(indexed("omega", n1));
    head.extend(indexed("Omega", n2));
    head.extend(indexed("delta_omega", n1));
    head.extend(indexed("delta_Omega", n2));
    head.extend(header(&["chi0_norm", "chi1_norm", "chi2_norm", "divisor_min0", "divisor_min1", "divisor_min2"]));
    head.extend(header(&["residual0", "residual1", "residual2", "remainder_norm", "normal_form_ok"]));
    let rows: Vec<Vec<String>> = run
        .reports
        .iter()
        .map(|rep| {
            let h = &run.states[rep.r];
            let mut row = vec![rep.r.to_string()];
            row.extend(h.omega.iter().chain(&h.big_omega).chain(&rep.delta_omega).chain(&rep.delta_big_omega).map(|x| num(*x)));
            row.extend(rep.chi_norms.iter().chain(&rep.divisor_min).chain(&rep.residuals).map(|x| num(*x)));
            row.push(num(rep.remainder_norm));
            row.push(rep.normal_form_ok.to_string());
            row
        })
        .collect();
    let outputs = vec![dir.write_json(NORMALIZE_JSON, &run)?, dir.write_csv("normalize_steps.csv", &head, &rows)?];
    let bad = run.reports.iter().filter(|r| !r.normal_form_ok).count();
    Ok(VerbOutput { outputs, violations: violations(bad, format!("{bad} steps left terms that should be normalized")) })
}

fn certify_inputs(dir: &RunDir) -> Result<(HypothesisReport, EstimateReport)> {
    let p = dir.params();
    let spec = dir.spec()?;
    let domain = p.domain(&spec)?;
    let hp = p.hypotheses();
    let rep = check_hypotheses(&spec, &domain, &hp)?;
    let consts = compute_constants(&EstimateParams::from_hypotheses(&hp, &rep, &domain, spec.n2))?;
    Ok((rep, consts))
}

fn certify_verb(dir: &RunDir) -> Result<VerbOutput> {
    let (rep, consts) = certify_inputs(dir)?;
    let summary = json!({
        "hypotheses_ok": rep.ok(),
        "failures": rep.failures,
        "M": consts.m,
        "log2_calA": consts.log2_cal_a,
        "eps_an": consts.eps_an,
        "eps_star": consts.eps_star,
        "measure_bound": consts.measure_bound,
        "box_volume": consts.box_volume,
        "res_measure_condition": consts.res_measure_condition,
    });
    let rows: Vec<Vec<String>> = (0..consts.h.len()).map(|r| vec![r.to_string(), num(consts.h[r]), num(consts.d[r]), num(consts.delta[r])]).collect();
    let outputs = vec![
        dir.write_json(CERTIFY_JSON, &json!({ "summary": summary, "hypotheses": rep, "constants": consts }))?,
        dir.write_csv("certify_levels.csv", &header(&["r", "h", "d", "delta"]), &rows)?,
    ];
    let failed = rep.failures.len() + usize::from(!consts.res_measure_condition);
    Ok(VerbOutput { outputs, violations: violations(failed, format!("hypotheses failed: {:?}; measure condition {}", rep.failures, consts.res_measure_condition)) })
}

/// Constants from a prior certify, or computed afresh.
fn constants(dir: &RunDir) -> Result<EstimateReport> {
    if dir.has(CERTIFY_JSON) {
        let v: Value = dir.read_json(CERTIFY_JSON)?;
        return Ok(serde_json::from_value(v["constants"].clone())?);
    }
    Ok(certify_inputs(dir)?.1)
}

fn audit_verb(dir: &RunDir) -> Result<VerbOutput> {
    let run = load_run(dir)?;
    let consts = constants(dir)?;
    let r_max = run.config.r_max;
    let s_max = run.config.effective_s_max();
    let selection = audit_selection_rules(&run.book, r_max as u32, s_max, run.book.max_class);
    let nu = build_nu(r_max, s_max as usize);
    let nu_bad = nu.bound_violations();
    let lemma4 = audit_lemma4(&run, &consts);
    let lemma6 = audit_lemma6(&run, &consts);
    let conv = convergence_summary(&[&run], &consts);
    let conv_bad = conv.rows.iter().filter(|r| !r.ok).count();
    let summary = json!({
        "selection": { "checked": selection.checked, "violations": selection.violations },
        "nu": { "checked": (r_max + 1) * (s_max as usize + 1), "violations": nu_bad.len() },
        "terms_and_generators": { "checked": lemma4.checked, "violations": lemma4.violations },
        "frequencies": { "checked": lemma6.checked, "violations": lemma6.violations },
        "convergence": { "checked": conv.rows.len(), "violations": conv_bad },
    });
    let sel_rows: Vec<Vec<String>> = selection
        .rows
        .iter()
        .map(|r| vec![r.list_id.clone(), r.r.to_string(), r.s.to_string(), r.k.to_string(), r.count.to_string(), r.bound.to_string(), r.ok.to_string()])
        .collect();
    let mut bound_rows = Vec::new();
    for (family, audit) in [("terms_and_generators", &lemma4), ("frequencies", &lemma6)] {
        for r in &audit.rows {
            let kind = serde_json::to_value(r.kind)?.as_str().unwrap_or_default().to_string();
            bound_rows.push(vec![family.into(), kind, r.r.to_string(), r.index.to_string(), r.s.to_string(), num(r.measured), num(r.log2_bound), r.ok.to_string()]);
        }
    }
    for r in &conv.rows {
        bound_rows.push(vec!["convergence".into(), "difference".into(), r.r.to_string(), "0".into(), r.r.to_string(), num(r.measured), num(r.bound.log2()), r.ok.to_string()]);
    }
    let nu_rows: Vec<_> = nu_bad.iter().map(|(r, s)| json!({ "r": r, "s": s })).collect();
    let total = selection.violations + nu_bad.len() + lemma4.violations + lemma6.violations + conv_bad;
    let outputs = vec![
        dir.write_json(
            AUDIT_JSON,
            &json!({ "summary": summary, "selection": selection, "nu_violations": nu_rows, "terms_and_generators": lemma4, "frequencies": lemma6, "convergence": conv }),
        )?,
        dir.write_csv("audit_selection.csv", &header(&["list", "r", "s", "k", "count", "bound", "ok"]), &sel_rows)?,
        dir.write_csv("audit_bounds.csv", &header(&["family", "kind", "r", "index", "s", "measured", "log2_bound", "ok"]), &bound_rows)?,
    ];
    Ok(VerbOutput { outputs, violations: violations(total, format!("{total} audit violations")) })
}

fn measure_verb(dir: &RunDir) -> Result<VerbOutput> {
    let p = dir.params();
    let spec = dir.spec()?;
    let domain = p.domain(&spec)?;
    let mut template = p.normalize_config();
    template.mode = "exploratory".into();
    let maps = build_maps(&spec, &domain, &template, p.epsilon, p.k_budget)?;
    let mut carved = domain.clone();
    for r in 1..=p.r_max {
        carved = carve(&carved, r, &maps, p.gamma, p.tau, p.k_budget)?;
    }
    let hull = (1..=p.r_max).map(|r| convex_hull_check(&carved, &maps, r, p.theta0, p.hull_k_max())).collect::<Result<Vec<_>>>()?;
    let report = measure_compare(&carved, &maps, p.r_max, &p.measure_params())?;
    let alive: Vec<usize> = (0..=carved.last_step()).map(|r| carved.alive_count(r)).collect();
    let hull_bad = hull.iter().filter(|h| !h.ok || !h.drift_ok).count();
    let summary = json!({
        "nodes": carved.nodes.len(),
        "alive_per_step": alive,
        "failed_nodes": maps.failed.iter().filter(|f| **f).count(),
        "hull_ok": hull_bad == 0,
        "measured": report.measured,
        "std_error": report.std_error,
        "total_bound": report.total_bound,
        "box_volume": report.box_volume,
        "ok": report.ok,
    });
    let n1 = domain.dim();
    let mut head = vec!["node".to_string()];
    head.extend(indexed("omega0", n1));
    head.extend((0..=carved.last_step()).map(|r| format!("alive_{r}")));
    head.push("failed".into());
    let rows: Vec<Vec<String>> = carved
        .nodes
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut row = vec![i.to_string()];
            row.extend(w.iter().map(|x| num(*x)));
            row.extend(carved.alive.iter().map(|a| a[i].to_string()));
            row.push(maps.failed[i].to_string());
            row
        })
        .collect();
    let outputs = vec![
        dir.write_json(MEASURE_JSON, &json!({ "summary": summary, "hull": hull, "measure": report, "removed": carved.removed }))?,
        dir.write_csv("measure_nodes.csv", &head, &rows)?,
    ];
    let bad = hull_bad + usize::from(!report.ok);
    Ok(VerbOutput { outputs, violations: violations(bad, format!("{hull_bad} hull checks failed; measure ok {}", report.ok)) })
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

#[derive(Serialize)]
struct SlopeRow {
    r: usize,
    slope: Option<f64>,
    expected: f64,
}

fn verify_verb(dir: &RunDir) -> Result<VerbOutput> {
    let p = dir.params();
    let base = load_run(dir)?;
    let ip = p.invariance_params();
    let mut results: Vec<InvarianceResult> = Vec::new();
    for &eps in &p.verify.epsilons {
        let fresh;
        let run = if eps == base.states[0].epsilon {
            &base
        } else {
            fresh = normalize_at(dir, eps)?;
            &fresh
        };
        for r in 1..=p.r_max {
            results.push(torus_invariance_error(&run.states[0], &run.generators, eps, r, &ip)?);
        }
    }
    let slopes: Vec<SlopeRow> = (1..=p.r_max)
        .map(|r| {
            let pts: Vec<(f64, f64)> = results.iter().filter(|x| x.r == r && x.error > 0.0).map(|x| (x.epsilon.ln(), x.error.ln())).collect();
            let distinct = pts.iter().any(|q| q.0 != pts[0].0);
            SlopeRow { r, slope: distinct.then(|| fit_slope(&pts)), expected: r as f64 + 1.0 }
        })
        .collect();
    let rows: Vec<Vec<String>> = results.iter().map(|x| vec![num(x.epsilon), x.r.to_string(), num(x.error), num(x.energy_drift)]).collect();
    let summary = json!({ "integrator": ip.integrator, "T": ip.t_end, "seeds": ip.seeds, "slopes": slopes });
    let outputs = vec![
        dir.write_json(VERIFY_JSON, &json!({ "summary": summary, "results": results }))?,
        dir.write_csv("verify.csv", &header(&["epsilon", "r", "error", "energy_drift"]), &rows)?,
    ];
    Ok(VerbOutput { outputs, violations: None })
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&format!("{prefix}.{k}"), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push(vec![prefix.into(), s.clone()]),
        Value::Null => out.push(vec![prefix.into(), String::new()]),
        x => out.push(vec![prefix.into(), x.to_string()]),
    }
}

fn report_verb(dir: &RunDir) -> Result<VerbOutput> {
    let mut sections = Map::new();
    sections.insert("model_hash".into(), json!(dir.manifest.model_hash));
    if dir.has(NORMALIZE_JSON) {
        let run = load_run(dir)?;
        let last = run.last();
        let worst = run.reports.iter().flat_map(|r| r.residuals).fold(0.0, f64::max);
        sections.insert(
            "normalize".into(),
            json!({
                "epsilon": last.epsilon,
                "steps": run.reports.len(),
                "omega": last.omega,
                "Omega": last.big_omega,
                "max_residual": worst,
                "remainder_norm": run.reports.last().map(|r| r.remainder_norm),
                "normal_form_ok": run.reports.iter().all(|r| r.normal_form_ok),
            }),
        );
    }
    for (name, file) in [("certify", CERTIFY_JSON), ("audit", AUDIT_JSON), ("measure", MEASURE_JSON), ("verify", VERIFY_JSON)] {
        if dir.has(file) {
            let v: Value = dir.read_json(file)?;
            sections.insert(name.into(), v["summary"].clone());
        }
    }
    let report = Value::Object(sections);
    let mut rows = Vec::new();
    if let Value::Object(m) = &report {
        for (k, v) in m {
            flatten(k, v, &mut rows);
        }
    }
    let outputs = vec![dir.write_json(REPORT_JSON, &report)?, dir.write_csv("report.csv", &header(&["key", "value"]), &rows)?];
    Ok(VerbOutput { outputs, violations: None })
}
