//! JSON scenario documents: alphabets, horizon, environments, prior, reward
//! tables and the learning process, with exact `"p/q"` fractions.

use std::collections::HashMap;
use std::sync::Arc;

use rewardrig_core::rational::{self, format};
use rewardrig_core::spec::{Action, History, HorizonSpec, Obs};
use rewardrig_core::{Environment, LearningProcess, Policy, Prior, Rational, RewardFunction, Scenario};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::FieldError;

/// Key that supplies a value for every entry not listed explicitly.
pub const DEFAULT_KEY: &str = "*";

pub type Table = Map<String, Value>;

type Parsed<T> = std::result::Result<T, FieldError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    pub horizon: usize,
    pub environments: Vec<EnvironmentEntry>,
    /// Environment name to weight.
    pub prior: Table,
    pub rewards: Vec<RewardEntry>,
    /// Complete history to `{reward label: weight}`.
    pub process: Table,
    /// Decision history to an action name or `{action: weight}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_policy: Option<Table>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentEntry {
    pub name: String,
    /// Deterministic: action sequence to the observation it produces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<Table>,
    /// General: one entry per decision history and action.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<Vec<KernelEntry>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelEntry {
    pub history: String,
    pub action: String,
    /// Observation to probability; omitted observations have probability 0.
    pub dist: Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardEntry {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Value>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub values: Table,
}

pub fn parse_fraction(location: &str, value: &Value) -> Parsed<Rational> {
    match value {
        Value::String(s) => rational::parse(s).map_err(|e| FieldError::new(location, e)),
        Value::Number(n) if n.is_i64() => Ok(rational::int(n.as_i64().unwrap_or_default())),
        Value::Number(n) => Err(FieldError::new(
            location,
            format!("`{n}` is not exact; write it as a string such as \"1/3\" or \"0.25\""),
        )),
        other => Err(FieldError::new(
            location,
            format!("expected a fraction string, got {other}"),
        )),
    }
}

fn as_str<'a>(location: &str, value: &'a Value) -> Parsed<&'a str> {
    value
        .as_str()
        .ok_or_else(|| FieldError::new(location, format!("expected a string, got {value}")))
}

fn as_table<'a>(location: &str, value: &'a Value) -> Parsed<&'a Table> {
    value
        .as_object()
        .ok_or_else(|| FieldError::new(location, format!("expected an object, got {value}")))
}

fn at(parent: &str, key: &str) -> String {
    format!("{parent}[{key:?}]")
}

/// Entries keyed by parsed form, plus the `"*"` default when present.
struct Keyed<'a, K> {
    entries: HashMap<K, (String, &'a Value)>,
    default: Option<(String, &'a Value)>,
}

impl<'a, K: std::hash::Hash + Eq> Keyed<'a, K> {
    fn new(location: &str, table: &'a Table, parse: impl Fn(&str) -> Result<K, String>) -> Parsed<Self> {
        let mut entries = HashMap::new();
        let mut default = None;
        for (key, value) in table {
            let loc = at(location, key);
            if key == DEFAULT_KEY {
                default = Some((loc, value));
                continue;
            }
            let k = parse(key).map_err(|e| FieldError::new(&loc, e))?;
            if entries.insert(k, (loc.clone(), value)).is_some() {
                return Err(FieldError::new(loc, "duplicate entry"));
            }
        }
        Ok(Keyed { entries, default })
    }

    fn get(&self, key: &K, missing: impl FnOnce() -> FieldError) -> Parsed<(&str, &'a Value)> {
        self.entries
            .get(key)
            .or(self.default.as_ref())
            .map(|(loc, v)| (loc.as_str(), *v))
            .ok_or_else(missing)
    }
}

fn history_parser(spec: &HorizonSpec, complete: bool) -> impl Fn(&str) -> Result<History, String> + '_ {
    move |text| {
        let h = spec.parse_history(text).map_err(|e| e.to_string())?;
        match (complete, h.len() == spec.horizon()) {
            (true, false) => Err(format!("`{text}` is not a complete history")),
            (false, true) => Err(format!("`{text}` is complete; no action is taken there")),
            _ => Ok(h),
        }
    }
}

impl ScenarioFile {
    pub fn to_scenario(&self) -> Parsed<Scenario> {
        let spec = HorizonSpec::new(self.actions.clone(), self.observations.clone(), self.horizon)
            .map_err(|e| FieldError::new("actions/observations/horizon", e))?;
        let envs = self
            .environments
            .iter()
            .enumerate()
            .map(|(i, e)| e.to_environment(&spec, &format!("environments[{i}]")))
            .collect::<Parsed<Vec<_>>>()?;
        let prior = self.parse_prior(envs)?;
        let pool = self.parse_rewards(&spec)?;
        let process = self.parse_process(&spec, &pool)?;
        let mut scenario =
            Scenario::new(self.name.clone(), prior, process).map_err(|e| FieldError::new("scenario", e))?;
        if let Some(table) = &self.default_policy {
            let policy = parse_policy(&spec, "default_policy", table)?;
            scenario = scenario
                .with_default_policy(policy)
                .map_err(|e| FieldError::new("default_policy", e))?;
        }
        Ok(scenario)
    }

    fn parse_prior(&self, envs: Vec<Environment>) -> Parsed<Prior> {
        let mut weights = Vec::with_capacity(envs.len());
        for env in &envs {
            let loc = at("prior", env.name());
            let w = match self.prior.get(env.name()) {
                Some(v) => parse_fraction(&loc, v)?,
                None => return Err(FieldError::new(loc, "missing weight for this environment")),
            };
            weights.push(w);
        }
        if let Some(extra) = self.prior.keys().find(|k| !envs.iter().any(|e| e.name() == k.as_str())) {
            return Err(FieldError::new(at("prior", extra), "no environment of this name"));
        }
        Prior::new(envs, weights).map_err(|e| FieldError::new("prior", e))
    }

    fn parse_rewards(&self, spec: &Arc<HorizonSpec>) -> Parsed<Vec<RewardFunction>> {
        let mut pool: Vec<RewardFunction> = Vec::with_capacity(self.rewards.len());
        for (i, entry) in self.rewards.iter().enumerate() {
            let loc = format!("rewards[{i}]");
            if pool.iter().any(|r| r.label() == Some(entry.label.as_str())) {
                return Err(FieldError::new(
                    format!("{loc}.label"),
                    format!("duplicate label `{}`", entry.label),
                ));
            }
            let values_loc = format!("{loc}.values");
            let keyed = Keyed::new(&values_loc, &entry.values, history_parser(spec, true))?;
            let default = entry
                .default
                .as_ref()
                .map(|v| parse_fraction(&format!("{loc}.default"), v))
                .transpose()?;
            let mut table = Vec::with_capacity(spec.complete_count());
            for h in spec.complete_histories() {
                let value = match keyed.get(h, || FieldError::new("", "")) {
                    Ok((l, v)) => parse_fraction(l, v)?,
                    Err(_) => default.clone().ok_or_else(|| {
                        FieldError::new(
                            &values_loc,
                            format!("no value for `{}` and no default", spec.format_history(h)),
                        )
                    })?,
                };
                table.push(value);
            }
            let r = RewardFunction::new(spec.clone(), table)
                .map_err(|e| FieldError::new(&loc, e))?
                .with_label(entry.label.clone());
            pool.push(r);
        }
        Ok(pool)
    }

    fn parse_process(&self, spec: &Arc<HorizonSpec>, pool: &[RewardFunction]) -> Parsed<LearningProcess> {
        let keyed = Keyed::new("process", &self.process, history_parser(spec, true))?;
        let mut builder = LearningProcess::builder(spec.clone());
        for h in spec.complete_histories() {
            let (loc, value) = keyed.get(h, || {
                FieldError::new("process", format!("no distribution for `{}`", spec.format_history(h)))
            })?;
            let mut weights = Vec::new();
            for (label, w) in as_table(loc, value)? {
                let wloc = at(loc, label);
                let r = pool
                    .iter()
                    .find(|r| r.label() == Some(label.as_str()))
                    .ok_or_else(|| FieldError::new(&wloc, format!("unknown reward label `{label}`")))?;
                weights.push((r.clone(), parse_fraction(&wloc, w)?));
            }
            builder.set_rewards(h, weights).map_err(|e| FieldError::new(loc, e))?;
        }
        builder.build().map_err(|e| FieldError::new("process", e))
    }

    pub fn from_scenario(scenario: &Scenario) -> Self {
        let spec = scenario.spec();
        let (rewards, labels) = reward_entries(scenario.process.pool());
        ScenarioFile {
            name: scenario.name.clone(),
            actions: spec.action_names().to_vec(),
            observations: spec.observation_names().to_vec(),
            horizon: spec.horizon(),
            environments: scenario
                .prior
                .envs()
                .iter()
                .map(EnvironmentEntry::from_environment)
                .collect(),
            prior: scenario
                .prior
                .envs()
                .iter()
                .zip(scenario.prior.weights())
                .map(|(e, w)| (e.name().to_string(), Value::String(format(w))))
                .collect(),
            rewards,
            process: process_table(&scenario.process, &labels),
            default_policy: scenario.default_policy.as_ref().map(policy_table),
        }
    }
}

impl EnvironmentEntry {
    fn to_environment(&self, spec: &Arc<HorizonSpec>, location: &str) -> Parsed<Environment> {
        match (&self.observations, &self.kernel) {
            (Some(table), None) => {
                let loc = format!("{location}.observations");
                let keyed = Keyed::new(&loc, table, |k| spec.parse_actions(k).map_err(|e| e.to_string()))?;
                let mut obs = vec![Obs(0); spec.action_sequence_count()];
                for l in 1..=spec.horizon() {
                    for seq in spec.action_sequences_of_len(l) {
                        let (vloc, value) = keyed.get(&seq, || {
                            FieldError::new(&loc, format!("no observation after `{}`", spec.format_actions(&seq)))
                        })?;
                        let name = as_str(vloc, value)?;
                        obs[spec.action_sequence_index(&seq)] = spec
                            .obs_by_name(name)
                            .ok_or_else(|| FieldError::new(vloc, format!("unknown observation `{name}`")))?;
                    }
                }
                Environment::from_observation_table(self.name.clone(), spec.clone(), obs)
                    .map_err(|e| FieldError::new(location, e))
            }
            (None, Some(entries)) => {
                let mut dists: HashMap<(History, Action), Vec<Rational>> = HashMap::new();
                for (i, entry) in entries.iter().enumerate() {
                    let loc = format!("{location}.kernel[{i}]");
                    let h = history_parser(spec, false)(&entry.history)
                        .map_err(|e| FieldError::new(format!("{loc}.history"), e))?;
                    let a = spec.action_by_name(&entry.action).ok_or_else(|| {
                        FieldError::new(format!("{loc}.action"), format!("unknown action `{}`", entry.action))
                    })?;
                    let mut dist = vec![rational::zero(); spec.num_observations()];
                    for (o, p) in &entry.dist {
                        let ploc = at(&format!("{loc}.dist"), o);
                        let o = spec
                            .obs_by_name(o)
                            .ok_or_else(|| FieldError::new(&ploc, format!("unknown observation `{o}`")))?;
                        dist[o.0] = parse_fraction(&ploc, p)?;
                    }
                    if dists.insert((h, a), dist).is_some() {
                        return Err(FieldError::new(loc, "duplicate kernel entry"));
                    }
                }
                for i in 0..spec.decision_node_count() {
                    let h = spec.history_at(i);
                    for a in spec.actions() {
                        if !dists.contains_key(&(h.clone(), a)) {
                            return Err(FieldError::new(
                                format!("{location}.kernel"),
                                format!(
                                    "no entry for history `{}` and action `{}`",
                                    spec.format_history(&h),
                                    spec.action_name(a)
                                ),
                            ));
                        }
                    }
                }
                Environment::stochastic(self.name.clone(), spec.clone(), |h, a| dists[&(h.clone(), a)].clone())
                    .map_err(|e| FieldError::new(location, e))
            }
            _ => Err(FieldError::new(
                location,
                "give exactly one of `observations` and `kernel`",
            )),
        }
    }

    pub fn from_environment(env: &Environment) -> Self {
        let spec = env.spec();
        if let Some(table) = env.observation_table() {
            let mut obs = Table::new();
            for l in 1..=spec.horizon() {
                for seq in spec.action_sequences_of_len(l) {
                    let o = table[spec.action_sequence_index(&seq)];
                    obs.insert(spec.format_actions(&seq), Value::String(spec.obs_name(o).to_string()));
                }
            }
            return EnvironmentEntry {
                name: env.name().to_string(),
                observations: Some(obs),
                kernel: None,
            };
        }
        let mut kernel = Vec::new();
        for i in 0..spec.decision_node_count() {
            let h = spec.history_at(i);
            for a in spec.actions() {
                let dist = spec
                    .observations()
                    .map(|o| (o, env.obs_prob(&h, a, o)))
                    .filter(|(_, p)| *p != rational::zero())
                    .map(|(o, p)| (spec.obs_name(o).to_string(), Value::String(format(&p))))
                    .collect();
                kernel.push(KernelEntry {
                    history: spec.format_history(&h),
                    action: spec.action_name(a).to_string(),
                    dist,
                });
            }
        }
        EnvironmentEntry {
            name: env.name().to_string(),
            observations: None,
            kernel: Some(kernel),
        }
    }
}

/// Distinct labels for a pool: its own labels when they are unique, `R0`,
/// `R1`, ... otherwise.
pub fn pool_labels(pool: &[RewardFunction]) -> Vec<String> {
    let own: Vec<Option<&str>> = pool.iter().map(|r| r.label()).collect();
    let unique = own.iter().enumerate().all(|(i, l)| {
        l.is_some_and(|l| l != DEFAULT_KEY && own.iter().enumerate().all(|(j, m)| i == j || *m != Some(l)))
    });
    if unique {
        own.into_iter().map(|l| l.unwrap_or_default().to_string()).collect()
    } else {
        (0..pool.len()).map(|i| format!("R{i}")).collect()
    }
}

/// Complete history to value, or a constant.
pub fn reward_values(r: &RewardFunction) -> (Option<Value>, Table) {
    let first = &r.values()[0];
    if r.values().iter().all(|v| v == first) {
        return (Some(Value::String(format(first))), Table::new());
    }
    let spec = r.spec();
    let values = spec
        .complete_histories()
        .iter()
        .zip(r.values())
        .map(|(h, v)| (spec.format_history(h), Value::String(format(v))))
        .collect();
    (None, values)
}

fn reward_entries(pool: &[RewardFunction]) -> (Vec<RewardEntry>, Vec<String>) {
    let labels = pool_labels(pool);
    let entries = pool
        .iter()
        .zip(&labels)
        .map(|(r, label)| {
            let (default, values) = reward_values(r);
            RewardEntry {
                label: label.clone(),
                default,
                values,
            }
        })
        .collect();
    (entries, labels)
}

fn process_table(rho: &LearningProcess, labels: &[String]) -> Table {
    let spec = rho.spec();
    let dist_value = |h: &History| -> Value {
        Value::Object(
            rho.distribution(h)
                .iter()
                .map(|(i, w)| (labels[*i].clone(), Value::String(format(w))))
                .collect(),
        )
    };
    let complete = spec.complete_histories();
    let first = rho.distribution(&complete[0]);
    let mut table = Table::new();
    if complete.iter().all(|h| rho.distribution(h) == first) {
        table.insert(DEFAULT_KEY.into(), dist_value(&complete[0]));
    } else {
        for h in complete {
            table.insert(spec.format_history(h), dist_value(h));
        }
    }
    table
}

pub fn policy_table(pol: &Policy) -> Table {
    let spec = pol.spec();
    let entry = |h: &History| -> Value {
        match pol.choice(h) {
            Some(a) => Value::String(spec.action_name(a).to_string()),
            None => Value::Object(
                pol.support(h)
                    .into_iter()
                    .map(|(a, p)| (spec.action_name(a).to_string(), Value::String(format(&p))))
                    .collect(),
            ),
        }
    };
    let nodes: Vec<History> = (0..spec.decision_node_count()).map(|i| spec.history_at(i)).collect();
    let first = entry(&nodes[0]);
    let mut table = Table::new();
    if nodes.iter().all(|h| entry(h) == first) {
        table.insert(DEFAULT_KEY.into(), first);
    } else {
        for h in &nodes {
            table.insert(spec.format_history(h), entry(h));
        }
    }
    table
}

pub fn parse_policy(spec: &Arc<HorizonSpec>, location: &str, table: &Table) -> Parsed<Policy> {
    let keyed = Keyed::new(location, table, history_parser(spec, false))?;
    let mut dists = Vec::with_capacity(spec.decision_node_count());
    for i in 0..spec.decision_node_count() {
        let h = spec.history_at(i);
        let (loc, value) = keyed.get(&h, || {
            FieldError::new(location, format!("no action for `{}`", spec.format_history(&h)))
        })?;
        let mut dist = vec![rational::zero(); spec.num_actions()];
        match value {
            Value::String(name) => {
                let a = spec
                    .action_by_name(name)
                    .ok_or_else(|| FieldError::new(loc, format!("unknown action `{name}`")))?;
                dist[a.0] = rational::one();
            }
            Value::Object(weights) => {
                for (name, w) in weights {
                    let wloc = at(loc, name);
                    let a = spec
                        .action_by_name(name)
                        .ok_or_else(|| FieldError::new(&wloc, format!("unknown action `{name}`")))?;
                    dist[a.0] = parse_fraction(&wloc, w)?;
                }
                if !rational::is_probability_vector(&dist) {
                    return Err(FieldError::new(loc, "action weights must be non-negative and sum to 1"));
                }
            }
            other => {
                return Err(FieldError::new(
                    loc,
                    format!("expected an action or weights, got {other}"),
                ))
            }
        }
        dists.push(dist);
    }
    if dists.iter().all(|d| d.iter().any(|p| *p == rational::one())) {
        let choices = dists
            .iter()
            .map(|d| Action(d.iter().position(|p| *p == rational::one()).unwrap_or_default()))
            .collect();
        return Policy::deterministic(spec.clone(), choices).map_err(|e| FieldError::new(location, e));
    }
    Policy::stochastic_from_fn(spec.clone(), |h| dists[spec.index(h)].clone()).map_err(|e| FieldError::new(location, e))
}

/// `--policy` syntax: one action (taken everywhere) or an open-loop action
/// sequence of full length such as `"E E E"`.
pub fn parse_policy_flag(spec: &Arc<HorizonSpec>, text: &str) -> Result<Policy, String> {
    if let Some(a) = spec.action_by_name(text.trim()) {
        return Ok(Policy::constant(spec.clone(), a));
    }
    let cleaned = text.replace(',', " ");
    let seq = spec.parse_actions(&cleaned).map_err(|e| e.to_string())?;
    Policy::action_sequence(spec.clone(), &seq).map_err(|e| e.to_string())
}

/// Accepts a scenario document or any result document with a `scenario` key.
pub fn from_json(text: &str) -> Result<ScenarioFile, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let value = match value {
        Value::Object(mut m) if !m.contains_key("actions") && m.contains_key("scenario") => {
            m.remove("scenario").unwrap_or_default()
        }
        other => other,
    };
    serde_json::from_value(value).map_err(|e| e.to_string())
}

pub fn to_json(file: &ScenarioFile) -> String {
    serde_json::to_string_pretty(file).expect("scenario documents serialize")
}
