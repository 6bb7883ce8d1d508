//! Result documents (JSON) and their human-readable summaries.

use std::fmt::{self, Write};

use rewardrig_core::classify::{
    check_uninfluenceable, check_unriggable, EnvConditional, InfluenceVerdict, RiggingWitness, UnrigVerdict,
};
use rewardrig_core::constructions::ConstructionReport;
use rewardrig_core::linalg::affine_coefficients;
use rewardrig_core::rational::{self, format};
use rewardrig_core::{History, HorizonSpec, LearningProcess, Policy, Rational, Result, RewardFunction, Scenario};
use serde_json::{json, Map, Value};

use crate::scenario_file::{policy_table, pool_labels, reward_values, RewardEntry, ScenarioFile};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Uninfluenceable,
    UnriggableInfluenceable,
    Riggable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Uninfluenceable => "uninfluenceable",
            Verdict::UnriggableInfluenceable => "unriggable, influenceable",
            Verdict::Riggable => "riggable",
        })
    }
}

pub struct Classification {
    pub verdict: Verdict,
    pub unriggable: UnrigVerdict,
    /// Absent for riggable processes, which are influenceable.
    pub influence: Option<InfluenceVerdict>,
}

pub fn classify(scenario: &Scenario) -> Result<Classification> {
    let unriggable = check_unriggable(&scenario.process, &scenario.prior)?;
    if !unriggable.unriggable {
        return Ok(Classification {
            verdict: Verdict::Riggable,
            unriggable,
            influence: None,
        });
    }
    let influence = check_uninfluenceable(&scenario.process, &scenario.prior)?;
    let verdict = if influence.uninfluenceable {
        Verdict::Uninfluenceable
    } else {
        Verdict::UnriggableInfluenceable
    };
    Ok(Classification {
        verdict,
        unriggable,
        influence: Some(influence),
    })
}

/// Names reward functions by label, or as affine combinations of a labelled pool.
pub struct Labeller {
    named: Vec<(String, RewardFunction)>,
}

impl Labeller {
    pub fn new(pool: &[RewardFunction]) -> Self {
        Labeller {
            named: pool_labels(pool).into_iter().zip(pool.iter().cloned()).collect(),
        }
    }

    pub fn describe(&self, r: &RewardFunction) -> String {
        if let Some((label, _)) = self.named.iter().find(|(_, n)| n == r) {
            return label.clone();
        }
        let points: Vec<&[_]> = self.named.iter().map(|(_, n)| n.values()).collect();
        if let Some(coeffs) = affine_coefficients(&points, r.values()) {
            return combination(self.named.iter().map(|(l, _)| l.as_str()).zip(&coeffs));
        }
        format!("{:?}", r.clone().with_label(""))
    }

    /// The pool relabelled with descriptions, ready for emission.
    pub fn process(&self, rho: &LearningProcess) -> Result<LearningProcess> {
        rho.map_rewards(|r| Ok(r.clone().with_label(self.describe(r))))
    }
}

fn combination<'a>(terms: impl Iterator<Item = (&'a str, &'a Rational)>) -> String {
    let mut out = String::new();
    for (label, c) in terms.filter(|(_, c)| **c != rational::zero()) {
        let negative = *c < rational::zero();
        let magnitude = if negative { -c } else { c.clone() };
        match (out.is_empty(), negative) {
            (true, true) => out.push('-'),
            (true, false) => {}
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
        }
        if magnitude == rational::one() {
            out.push_str(label);
        } else {
            let _ = write!(out, "{} {label}", format(&magnitude));
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

fn mixture(parts: &[(String, Rational)]) -> String {
    match parts {
        [(label, _)] => label.clone(),
        _ => parts
            .iter()
            .map(|(l, p)| format!("{} {l}", format(p)))
            .collect::<Vec<_>>()
            .join(" + "),
    }
}

fn history_text(scenario_spec: &HorizonSpec, h: &History) -> String {
    let text = scenario_spec.format_history(h);
    if text.is_empty() {
        "h0 (empty history)".into()
    } else {
        format!("`{text}`")
    }
}

fn witness_json(w: &RiggingWitness, labeller: &Labeller) -> Value {
    let spec = w.expectation.spec();
    json!({
        "history": spec.format_history(&w.history),
        "action": spec.action_name(w.action),
        "alternative": spec.action_name(w.alternative),
        "expectation": labeller.describe(&w.expectation),
        "alternative_expectation": labeller.describe(&w.alternative_expectation),
        "differing_at": spec.format_history(&w.differing_at),
    })
}

pub fn witness_text(w: &RiggingWitness, labeller: &Labeller) -> String {
    let spec = w.expectation.spec();
    format!(
        "witness: at {}, action `{}` gives expected reward {} but `{}` gives {} (first difference at `{}`)",
        history_text(spec, &w.history),
        spec.action_name(w.action),
        labeller.describe(&w.expectation),
        spec.action_name(w.alternative),
        labeller.describe(&w.alternative_expectation),
        spec.format_history(&w.differing_at),
    )
}

fn reward_entry(label: &str, r: &RewardFunction) -> RewardEntry {
    let (default, values) = reward_values(r);
    RewardEntry {
        label: label.to_string(),
        default,
        values,
    }
}

struct EtaView {
    rewards: Vec<RewardEntry>,
    rows: Vec<(String, Vec<(String, Rational)>)>,
}

fn eta_view(eta: &EnvConditional, labeller: &Labeller) -> EtaView {
    let described: Vec<RewardFunction> = eta
        .pool()
        .iter()
        .map(|r| r.clone().with_label(labeller.describe(r)))
        .collect();
    let labels = pool_labels(&described);
    let rewards = labels.iter().zip(&described).map(|(l, r)| reward_entry(l, r)).collect();
    let rows = eta
        .env_names()
        .iter()
        .enumerate()
        .map(|(e, name)| {
            let parts = eta
                .distribution(e)
                .iter()
                .map(|(i, p)| (labels[*i].clone(), p.clone()))
                .collect();
            (name.clone(), parts)
        })
        .collect();
    EtaView { rewards, rows }
}

fn eta_json(view: &EtaView) -> Value {
    let conditional: Map<String, Value> = view
        .rows
        .iter()
        .map(|(env, parts)| {
            let dist: Map<String, Value> = parts
                .iter()
                .map(|(l, p)| (l.clone(), Value::String(format(p))))
                .collect();
            (env.clone(), Value::Object(dist))
        })
        .collect();
    json!({ "rewards": view.rewards, "conditional": conditional })
}

fn eta_text(view: &EtaView, out: &mut String) {
    for (env, parts) in &view.rows {
        let _ = writeln!(out, "  {env} -> {}", mixture(parts));
    }
}

pub fn classification_json(scenario: &Scenario, c: &Classification) -> Value {
    let labeller = Labeller::new(scenario.process.pool());
    let mut doc = Map::new();
    doc.insert("kind".into(), json!("classification"));
    doc.insert("scenario_name".into(), json!(scenario.name));
    doc.insert("verdict".into(), json!(c.verdict.to_string()));
    doc.insert("unriggable".into(), json!(c.unriggable.unriggable));
    doc.insert("uninfluenceable".into(), json!(c.verdict == Verdict::Uninfluenceable));
    if let Some(w) = &c.unriggable.witness {
        doc.insert("witness".into(), witness_json(w, &labeller));
    }
    if let Some(inf) = &c.influence {
        if let Some(eta) = &inf.eta {
            doc.insert("eta".into(), eta_json(&eta_view(eta, &labeller)));
        }
        if let Some(note) = &inf.infeasibility_note {
            doc.insert("infeasibility_note".into(), json!(note));
        }
        if !inf.certificate.is_empty() {
            let cert: Map<String, Value> = inf
                .certificate
                .iter()
                .map(|(n, m)| (n.clone(), Value::String(format(m))))
                .collect();
            doc.insert("certificate".into(), Value::Object(cert));
        }
    }
    Value::Object(doc)
}

pub fn classification_text(scenario: &Scenario, c: &Classification) -> String {
    let labeller = Labeller::new(scenario.process.pool());
    let mut out = format!("{}: {}\n", scenario.name, c.verdict);
    if let Some(w) = &c.unriggable.witness {
        let _ = writeln!(out, "{}", witness_text(w, &labeller));
    }
    if let Some(inf) = &c.influence {
        if let Some(eta) = &inf.eta {
            out.push_str("eta:\n");
            eta_text(&eta_view(eta, &labeller), &mut out);
        }
        if !inf.uninfluenceable {
            out.push_str("no eta reproduces the process; infeasibility certificate:\n");
            for (name, m) in &inf.certificate {
                let _ = writeln!(out, "  {} x {name}", format(m));
            }
        }
    }
    out
}

/// The constructed process and prior as a scenario, with descriptive reward labels.
pub fn constructed_scenario(input: &Scenario, report: &ConstructionReport) -> Result<Option<Scenario>> {
    let Some(process) = &report.process else {
        return Ok(None);
    };
    let labeller = Labeller::new(input.process.pool());
    let prior = report.prior.clone().unwrap_or_else(|| input.prior.clone());
    let mut sc = Scenario::new(
        format!("{}_{}", input.name, report.kind),
        prior,
        labeller.process(process)?,
    )?;
    if let Some(p) = &input.default_policy {
        sc = sc.with_default_policy(p.clone())?;
    }
    Ok(Some(sc))
}

fn policy_text(p: &Policy) -> String {
    policy_table(p)
        .iter()
        .map(|(h, a)| {
            let a = match a {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            if h == crate::scenario_file::DEFAULT_KEY {
                format!("always {a}")
            } else if h.is_empty() {
                format!("h0 -> {a}")
            } else {
                format!("{h} -> {a}")
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn relabeling_rows(input: &Scenario, report: &ConstructionReport) -> Result<Vec<(String, String)>> {
    let Some(sigma) = &report.relabeling else {
        return Ok(Vec::new());
    };
    let labeller = Labeller::new(input.process.pool());
    pool_labels(input.process.pool())
        .into_iter()
        .zip(input.process.pool())
        .map(|(l, r)| Ok((l, labeller.describe(&sigma.apply(r)?))))
        .collect()
}

pub fn construction_json(input: &Scenario, report: &ConstructionReport, output: Option<&Scenario>) -> Result<Value> {
    let labeller = Labeller::new(input.process.pool());
    let mut doc = Map::new();
    doc.insert("kind".into(), json!("construction"));
    doc.insert("construction".into(), json!(report.kind));
    doc.insert("source".into(), json!(input.name));
    doc.insert("passed".into(), json!(report.passed()));
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("name".into(), json!(c.name));
            m.insert("passed".into(), json!(c.passed));
            if let Some(r) = &c.residual {
                m.insert("residual".into(), json!(format(r)));
            }
            Value::Object(m)
        })
        .collect();
    doc.insert("checks".into(), Value::Array(checks));
    doc.insert("notes".into(), json!(report.notes));
    if let Some(eta) = &report.eta {
        doc.insert("eta".into(), eta_json(&eta_view(eta, &labeller)));
    }
    let rows = relabeling_rows(input, report)?;
    if !rows.is_empty() {
        let sigma: Map<String, Value> = rows.into_iter().map(|(l, v)| (l, Value::String(v))).collect();
        doc.insert("relabeling".into(), Value::Object(sigma));
    }
    if let Some(demo) = &report.sacrifice {
        let spec = input.spec();
        doc.insert(
            "sacrifice".into(),
            json!({
                "history": spec.format_history(&demo.history),
                "optimal": policy_table(&demo.optimal),
                "better": policy_table(&demo.better),
            }),
        );
    }
    if let Some(sc) = output {
        doc.insert(
            "scenario".into(),
            serde_json::to_value(ScenarioFile::from_scenario(sc)).unwrap_or_default(),
        );
    }
    Ok(Value::Object(doc))
}

pub fn construction_text(input: &Scenario, report: &ConstructionReport, output: Option<&Scenario>) -> Result<String> {
    let labeller = Labeller::new(input.process.pool());
    let mut out = format!("{} construction on {}\n", report.kind, input.name);
    out.push_str("checks:\n");
    for c in &report.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        match &c.residual {
            Some(r) => {
                let _ = writeln!(out, "  {mark} {} (residual {})", c.name, format(r));
            }
            None => {
                let _ = writeln!(out, "  {mark} {}", c.name);
            }
        }
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    if let Some(eta) = &report.eta {
        out.push_str("eta:\n");
        eta_text(&eta_view(eta, &labeller), &mut out);
    }
    if let Some(prior) = &report.prior {
        let same = prior.weights() == input.prior.weights()
            && prior
                .envs()
                .iter()
                .zip(input.prior.envs())
                .all(|(a, b)| a.name() == b.name());
        if !same {
            let _ = writeln!(out, "prior over {} environments:", prior.len());
            for (e, w) in prior.envs().iter().zip(prior.weights()) {
                let _ = writeln!(out, "  {} {}", e.name(), format(w));
            }
        }
    }
    let rows = relabeling_rows(input, report)?;
    if !rows.is_empty() {
        out.push_str("relabeling:\n");
        for (l, v) in rows {
            let _ = writeln!(out, "  {l} -> {v}");
        }
    }
    if let Some(demo) = &report.sacrifice {
        let _ = writeln!(
            out,
            "sacrifice at {}: optimal policy [{}] is beaten with certainty by [{}]",
            history_text(input.spec(), &demo.history),
            policy_text(&demo.optimal),
            policy_text(&demo.better),
        );
    }
    if let Some(sc) = output {
        if report.eta.is_none() {
            out.push_str("constructed process:\n");
            for h in sc.spec().complete_histories() {
                let parts: Vec<(String, Rational)> = sc
                    .process
                    .distribution(h)
                    .iter()
                    .map(|(i, p)| (labeller.describe(&sc.process.pool()[*i]), p.clone()))
                    .collect();
                let _ = writeln!(out, "  {} -> {}", sc.spec().format_history(h), mixture(&parts));
            }
        }
    }
    let verdict = if report.passed() {
        "all checks passed"
    } else {
        "verification FAILED"
    };
    let _ = writeln!(out, "{verdict}");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rewardrig_core::fixtures::{self, ParentalPrior};
    use rewardrig_core::rational::ratio;
    use rewardrig_core::reward::affine_combine;

    #[test]
    fn combinations_are_written_compactly() {
        let sc = fixtures::parental(ParentalPrior::Xi2);
        let l = Labeller::new(sc.process.pool());
        let (rb, rd) = fixtures::parental_rewards(sc.spec());
        assert_eq!(l.describe(&rb), "R_B");
        let r = affine_combine(&[(ratio(3, 2), &rb), (ratio(-1, 2), &rd)]).unwrap();
        assert_eq!(l.describe(&r), "3/2 R_B - 1/2 R_D");
        let r = affine_combine(&[(ratio(-1, 1), &rb), (ratio(2, 1), &rd)]).unwrap();
        assert_eq!(l.describe(&r), "-R_B + 2 R_D");
    }

    #[test]
    fn verdict_strings() {
        let expect = [
            (ParentalPrior::Xi1, Verdict::Uninfluenceable),
            (ParentalPrior::Xi2, Verdict::UnriggableInfluenceable),
            (ParentalPrior::Xi3, Verdict::Riggable),
            (ParentalPrior::Dd, Verdict::Uninfluenceable),
        ];
        for (p, v) in expect {
            let sc = fixtures::parental(p);
            let c = classify(&sc).unwrap();
            assert_eq!(c.verdict, v);
            let text = classification_text(&sc, &c);
            assert!(text.starts_with(&format!("{}: {v}\n", sc.name)), "{text}");
        }
    }

    #[test]
    fn riggable_witness_names_both_actions() {
        let sc = fixtures::parental(ParentalPrior::Xi3);
        let c = classify(&sc).unwrap();
        let doc = classification_json(&sc, &c);
        assert_eq!(doc["witness"]["history"], "");
        assert_eq!(doc["witness"]["action"], "M");
        assert_eq!(doc["witness"]["alternative"], "F");
    }
}
