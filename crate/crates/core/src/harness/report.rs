//! Markdown summary and CSV plot tables from a report document.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::scoring::{AxiomRate, Mean, Rate};

use super::analyze::{ConditionReport, FitStatus, Fitted, ReportDocument};
use super::files::write_atomic;
use super::HarnessError;

/// A CSV table; every cell is already formatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| HarnessError::Io(format!("{}: {e}", self.name));
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| HarnessError::Io(format!("{}: {e}", self.name)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub markdown: String,
    pub tables: Vec<Table>,
}

impl RenderedReport {
    /// Writes `summary.md` and one `<name>.csv` per table into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, HarnessError> {
        let mut written = vec![dir.join("summary.md")];
        write_atomic(&written[0], self.markdown.as_bytes())?;
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            write_atomic(&path, &t.to_csv()?)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn fixed(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"))
}

fn rate_cell(r: &Rate) -> String {
    match (r.rate, r.ci) {
        (Some(v), Some((lo, hi))) => format!("{v:.3} [{lo:.3}, {hi:.3}] (n={})", r.n),
        _ => format!("n/a (n={})", r.n),
    }
}

fn mean_cell(m: &Mean) -> String {
    format!("{} (n={})", fixed(m.mean), m.n)
}

fn axiom_cell(a: &AxiomRate) -> String {
    format!("{} ({}/{}, excluded {})", fixed(a.rate), a.compliant, a.n_groups, a.excluded)
}

fn status_str(s: FitStatus) -> &'static str {
    match s {
        FitStatus::Ok => "ok",
        FitStatus::NoData => "no_data",
        FitStatus::Separation => "separation",
        FitStatus::InsufficientData => "insufficient_data",
        FitStatus::Failed => "failed",
    }
}

/// Numeric top-level fields of a fit value, in declaration order.
fn fit_params<T: Serialize>(fit: &Fitted<T>) -> Vec<(String, f64)> {
    let Some(v) = fit.value.as_ref() else { return Vec::new() };
    let mut out = Vec::new();
    if let Ok(serde_json::Value::Object(m)) = serde_json::to_value(v) {
        for (k, v) in m {
            match v {
                serde_json::Value::Number(n) => out.extend(n.as_f64().map(|x| (k, x))),
                serde_json::Value::Object(inner) if k == "params" => {
                    for (ik, iv) in inner {
                        if let Some(x) = iv.as_f64() {
                            out.push((ik, x));
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

fn conditions(doc: &ReportDocument) -> impl Iterator<Item = &ConditionReport> {
    doc.baseline.iter().chain(&doc.conditions)
}

fn fit_rows(t: &mut Table, c: &ConditionReport) {
    let f = &c.fits;
    let mut add = |model: &str, status: FitStatus, params: Vec<(String, f64)>, error: &Option<String>| {
        let err = error.clone().unwrap_or_default();
        if params.is_empty() {
            t.push(vec![
                c.label.clone(),
                model.into(),
                status_str(status).into(),
                String::new(),
                String::new(),
                err.clone(),
            ]);
        }
        for (k, v) in params {
            t.push(vec![c.label.clone(), model.into(), status_str(status).into(), k, num(v), err.clone()]);
        }
    };
    add("risk_logit", f.risk.status, fit_params(&f.risk), &f.risk.error);
    add("utility", f.utility.status, fit_params(&f.utility), &f.utility.error);
    add("prelec", f.prelec.status, fit_params(&f.prelec), &f.prelec.error);
    add("loss", f.loss.status, fit_params(&f.loss), &f.loss.error);
    add("temporal", f.temporal.status, fit_params(&f.temporal), &f.temporal.error);
}

fn build_tables(doc: &ReportDocument) -> Vec<Table> {
    let mut fits = Table::new("fits", &["condition", "model", "status", "parameter", "value", "error"]);
    let mut risk = Table::new("risk_curve", &["condition", "kind", "delta_ev", "p_risky", "n"]);
    let mut prelec = Table::new("prelec_curve", &["condition", "kind", "p", "weight", "method"]);
    let mut utility = Table::new("utility_curve", &["condition", "x", "u"]);
    let mut loss = Table::new("loss_frontier", &["condition", "loss", "gain"]);
    let mut aai = Table::new("aai_stake", &["condition", "stake", "known_rate", "k", "n", "ci_low", "ci_high"]);
    let mut temporal = Table::new("temporal_contours", &["condition", "level", "delay", "premium"]);
    for c in conditions(doc) {
        let l = &c.label;
        fit_rows(&mut fits, c);
        for b in &c.plots.risk_bins {
            risk.push(vec![l.clone(), "bin".into(), num(b.dev_mean), num(b.risky_rate), b.n.to_string()]);
        }
        for [x, y] in &c.plots.risk_curve {
            risk.push(vec![l.clone(), "fit".into(), num(*x), num(*y), String::new()]);
        }
        for e in &c.fits.ce_points {
            let method =
                serde_json::to_value(e.method).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            prelec.push(vec![l.clone(), "ce_point".into(), num(e.point.p), num(e.point.ce / e.point.gain), method]);
        }
        for [p, w] in &c.plots.prelec_curve {
            prelec.push(vec![l.clone(), "fit".into(), num(*p), num(*w), String::new()]);
        }
        for [x, u] in &c.plots.utility_curve {
            utility.push(vec![l.clone(), num(*x), num(*u)]);
        }
        for [x, g] in &c.plots.loss_frontier {
            loss.push(vec![l.clone(), num(*x), num(*g)]);
        }
        for s in &c.scores.indices.aai_by_stake {
            let (lo, hi) = s.rate.ci.map_or((None, None), |(a, b)| (Some(a), Some(b)));
            aai.push(vec![
                l.clone(),
                s.gain.to_string(),
                opt(s.rate.rate),
                s.rate.k.to_string(),
                s.rate.n.to_string(),
                opt(lo),
                opt(hi),
            ]);
        }
        for p in &c.plots.temporal_contours {
            temporal.push(vec![l.clone(), num(p.level), num(p.delay), num(p.premium)]);
        }
    }
    let mut forest =
        Table::new("forest", &["domain", "emotion", "method", "g", "ci_low", "ci_high", "weight", "is_summary"]);
    for r in &doc.forest {
        forest.push(vec![
            r.domain.clone(),
            r.emotion.clone(),
            r.method.clone(),
            num(r.g),
            num(r.ci_low),
            num(r.ci_high),
            num(r.weight),
            r.is_summary.to_string(),
        ]);
    }
    vec![fits, risk, prelec, utility, loss, aai, temporal, forest]
}

fn md_condition(out: &mut String, c: &ConditionReport) {
    let a = &c.scores.axioms;
    let i = &c.scores.indices;
    let _ = writeln!(out, "## Condition `{}`\n", c.label);
    let _ = writeln!(out, "Source `{}`, agents: {}.", c.source, c.agents.join(", "));
    let _ = writeln!(
        out,
        "Trials {}: parsed {}, parse failures {}, transport failures {}.\n",
        c.counts.trials, c.counts.parsed, c.counts.parse_failed, c.counts.transport_failed
    );
    let _ = writeln!(out, "| Axiom | Compliance |\n|---|---|");
    for (name, r) in [
        ("completeness", &a.completeness),
        ("transitivity", &a.transitivity),
        ("continuity", &a.continuity),
        ("independence", &a.independence),
    ] {
        let _ = writeln!(out, "| {name} | {} |", axiom_cell(r));
    }
    let _ = writeln!(out, "| overall | {} |\n", fixed(a.overall));
    let _ = writeln!(out, "| Index | Value |\n|---|---|");
    let rows: [(&str, String); 14] = [
        ("risky choice rate", rate_cell(&i.risky_rate)),
        ("ambiguity aversion", rate_cell(&i.aai)),
        ("loss acceptance", rate_cell(&i.loss_accept_rate)),
        ("later choice rate", rate_cell(&i.temporal_later_rate)),
        ("ultimatum rejection", rate_cell(&i.ug_rejection_rate)),
        ("dictator mean share", mean_cell(&i.dg_mean_share)),
        ("welfare assistance", mean_cell(&i.assistance)),
        ("stereotype SAI", mean_cell(&i.sai)),
        ("persuasion match index", format!("{} (n={})", fixed(i.match_index.mean), i.match_index.n)),
        ("moral condemnation", mean_cell(&i.moral.condemnation)),
        ("moral restraint", mean_cell(&i.moral.restraint)),
        ("blame", mean_cell(&i.blame.blame)),
        ("WTA - WTP", fixed(i.endowment.delta_e)),
        ("punishment", mean_cell(&i.blame.punishment)),
    ];
    for (k, v) in rows {
        let _ = writeln!(out, "| {k} | {v} |");
    }
    let _ = writeln!(out, "\n| Model | Status | Parameters |\n|---|---|---|");
    let f = &c.fits;
    let statuses = [
        ("risk logit", f.risk.status, fit_params(&f.risk), &f.risk.error),
        ("utility", f.utility.status, fit_params(&f.utility), &f.utility.error),
        ("prelec", f.prelec.status, fit_params(&f.prelec), &f.prelec.error),
        ("loss", f.loss.status, fit_params(&f.loss), &f.loss.error),
        ("temporal", f.temporal.status, fit_params(&f.temporal), &f.temporal.error),
    ];
    for (name, status, params, err) in statuses {
        let shown = if params.is_empty() {
            err.clone().unwrap_or_default()
        } else {
            params.iter().map(|(k, v)| format!("{k}={v:.4}")).collect::<Vec<_>>().join(", ")
        };
        let _ = writeln!(out, "| {name} | {} | {shown} |", status_str(status));
    }
    let _ = writeln!(out);
}

/// Pure rendering: the same document always yields the same bytes.
pub fn render_report(doc: &ReportDocument) -> RenderedReport {
    let mut md = String::new();
    let _ = writeln!(md, "# Audit report\n");
    let _ = writeln!(md, "Schema version {}, tool version {}.\n", doc.schema_version, doc.provenance.tool_version);
    let _ = writeln!(md, "| Input | Role | Records | sha256 |\n|---|---|---|---|");
    for f in &doc.provenance.inputs {
        let _ = writeln!(md, "| {} | {} | {} | `{}` |", f.name, f.role, f.records, f.sha256);
    }
    let _ = writeln!(md);
    for c in conditions(doc) {
        md_condition(&mut md, c);
    }
    let _ = writeln!(md, "## Effects against the neutral baseline\n");
    if doc.effects.is_empty() {
        let _ = writeln!(md, "No effects computed.\n");
    } else {
        let _ = writeln!(md, "| Domain | Emotion | Method | g | 95% CI | n1 | n2 |\n|---|---|---|---|---|---|---|");
        for e in &doc.effects {
            let _ = writeln!(
                md,
                "| {} | {} | {} | {:.3} | [{:.3}, {:.3}] | {} | {} |",
                e.label.domain, e.label.emotion, e.label.method, e.g, e.ci_low, e.ci_high, e.n1, e.n2
            );
        }
        let _ = writeln!(md);
    }
    if let Some(m) = &doc.meta {
        let _ = writeln!(
            md,
            "Random-effects pooled g = {:.3} [{:.3}, {:.3}], tau^2 = {:.4}, Q = {:.3}, k = {}.\n",
            m.pooled_g, m.ci_low, m.ci_high, m.tau2, m.q, m.k
        );
    }
    if let Some(e) = &doc.meta_error {
        let _ = writeln!(md, "Pooling failed: {e}\n");
    }
    if !doc.skipped_effects.is_empty() {
        let _ = writeln!(md, "| Skipped domain | Condition | Reason |\n|---|---|---|");
        for s in &doc.skipped_effects {
            let _ = writeln!(md, "| {} | {} | {} |", s.domain, s.condition, s.reason);
        }
    }
    RenderedReport { markdown: md, tables: build_tables(doc) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent_gateway::{
        process_trial, Agent, Emotion, Scope, SteeringCondition, SyntheticAgent, SyntheticAgentSpec,
    };
    use crate::harness::{analyze, RecordSet};
    use crate::response_parsing::ResponseParser;
    use crate::task_battery::{generate_battery, AssetStore, BatteryConfig, Domain};

    fn records(spec: SyntheticAgentSpec, c: SteeringCondition) -> Vec<crate::record::TrialRecord> {
        let cfg = BatteryConfig::new(2).with_domains(&[Domain::RiskChoice, Domain::Ambiguity, Domain::Ultimatum]);
        let agent = SyntheticAgent::new("r", spec);
        generate_battery(&cfg, &AssetStore::embedded())
            .unwrap()
            .iter()
            .map(|t| process_trial(&agent as &dyn Agent, ResponseParser::standard(), t, &c))
            .collect()
    }

    fn table<'a>(r: &'a RenderedReport, name: &str) -> &'a Table {
        r.tables.iter().find(|t| t.name == name).unwrap()
    }

    #[test]
    fn forest_and_risk_tables_follow_the_schema() {
        let n = records(SyntheticAgentSpec::default(), SteeringCondition::None);
        let spec = SyntheticAgentSpec { ambiguity_p_known: 0.4, ..Default::default() };
        let rls = SteeringCondition::rls(Emotion::Fear, 35.0, Scope::AllNew, None).unwrap();
        let s = records(spec, rls);
        let doc =
            analyze(vec![RecordSet::from_records("n", n), RecordSet::from_records("s", s)], None, 10_000).unwrap();
        let r = render_report(&doc);
        assert_eq!(table(&r, "forest").rows.len(), doc.effects.len() + 1);
        let risk = table(&r, "risk_curve");
        assert!(risk.rows.iter().any(|row| row[1] == "bin"));
        assert!(risk.rows.iter().any(|row| row[1] == "fit"));
        assert!(!table(&r, "aai_stake").rows.is_empty());
        assert_eq!(render_report(&doc), r);
        assert!(r.markdown.contains("rls:fear:b35:all_new"));
    }

    #[test]
    fn failed_fits_keep_a_flagged_row_without_numbers() {
        let mut spec = SyntheticAgentSpec::default();
        spec.prospect.tau = 100.0;
        let doc =
            analyze(vec![RecordSet::from_records("n", records(spec, SteeringCondition::None))], None, 10_000).unwrap();
        let r = render_report(&doc);
        let fits = table(&r, "fits");
        let row = fits.rows.iter().find(|row| row[1] == "risk_logit").unwrap();
        assert_eq!(row[2], "separation");
        assert!(row[3].is_empty() && row[4].is_empty() && !row[5].is_empty());
        assert!(!table(&r, "risk_curve").rows.iter().any(|row| row[1] == "fit"));
        let no_data = fits.rows.iter().find(|row| row[1] == "temporal").unwrap();
        assert_eq!(no_data[2], "no_data");
        let csv = String::from_utf8(fits.to_csv().unwrap()).unwrap();
        assert!(csv.starts_with("condition,model,status,parameter,value,error\n"));
    }
}
