//! Alphabets, horizons and histories.
//!
//! Every history of a [`HorizonSpec`] has a dense index: histories are laid
//! out level by level (length 0, then 1, ...) and within a level in
//! mixed-radix order of their `(action, observation)` steps, the first step
//! being most significant. Tables over histories, decision nodes and
//! complete histories are plain vectors keyed by these indices.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Obs(pub usize);

/// An alternating action/observation sequence `a_1 o_1 ... a_m o_m`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct History {
    steps: Vec<(Action, Obs)>,
}

impl History {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_steps(steps: Vec<(Action, Obs)>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[(Action, Obs)] {
        &self.steps
    }

    /// `h a o`.
    pub fn child(&self, action: Action, obs: Obs) -> History {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.extend_from_slice(&self.steps);
        steps.push((action, obs));
        History { steps }
    }

    /// The first `k` steps, `h^k`.
    pub fn prefix(&self, k: usize) -> History {
        History {
            steps: self.steps[..k.min(self.steps.len())].to_vec(),
        }
    }

    /// `self ⊑ other`.
    pub fn is_prefix_of(&self, other: &History) -> bool {
        self.steps.len() <= other.steps.len() && other.steps[..self.steps.len()] == self.steps[..]
    }

    pub fn actions(&self) -> Vec<Action> {
        self.steps.iter().map(|&(a, _)| a).collect()
    }

    pub fn observations(&self) -> Vec<Obs> {
        self.steps.iter().map(|&(_, o)| o).collect()
    }

    pub fn last(&self) -> Option<(Action, Obs)> {
        self.steps.last().copied()
    }
}

pub struct HorizonSpec {
    actions: Vec<String>,
    observations: Vec<String>,
    horizon: usize,
    // level_offsets[m] = number of histories shorter than m
    level_offsets: Vec<usize>,
    // seq_offsets[l] = number of non-empty action sequences shorter than l
    seq_offsets: Vec<usize>,
    complete: OnceLock<Vec<History>>,
}

impl fmt::Debug for HorizonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HorizonSpec")
            .field("actions", &self.actions)
            .field("observations", &self.observations)
            .field("horizon", &self.horizon)
            .finish()
    }
}

impl PartialEq for HorizonSpec {
    fn eq(&self, other: &Self) -> bool {
        self.actions == other.actions && self.observations == other.observations && self.horizon == other.horizon
    }
}

impl Eq for HorizonSpec {}

fn check_alphabet(kind: &str, symbols: &[String]) -> Result<()> {
    if symbols.is_empty() {
        return Err(Error::Domain(format!("{kind} alphabet is empty")));
    }
    for (i, s) in symbols.iter().enumerate() {
        if s.is_empty() || s.chars().any(char::is_whitespace) {
            return Err(Error::Domain(format!(
                "{kind} symbol `{s}` must be non-empty and contain no whitespace"
            )));
        }
        if symbols[..i].contains(s) {
            return Err(Error::Domain(format!("duplicate {kind} symbol `{s}`")));
        }
    }
    Ok(())
}

impl HorizonSpec {
    pub fn new<A, O>(actions: A, observations: O, horizon: usize) -> Result<Arc<Self>>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        O: IntoIterator,
        O::Item: Into<String>,
    {
        let actions: Vec<String> = actions.into_iter().map(Into::into).collect();
        let observations: Vec<String> = observations.into_iter().map(Into::into).collect();
        check_alphabet("action", &actions)?;
        check_alphabet("observation", &observations)?;
        if horizon == 0 {
            return Err(Error::Domain("horizon must be at least 1".into()));
        }
        let too_big = || Error::Domain("horizon spec too large to index".into());
        let branching = actions.len().checked_mul(observations.len()).ok_or_else(too_big)?;
        let mut level_offsets = vec![0usize];
        let mut width = 1usize;
        for _ in 0..=horizon {
            let next = level_offsets.last().unwrap().checked_add(width).ok_or_else(too_big)?;
            level_offsets.push(next);
            width = width.checked_mul(branching).ok_or_else(too_big)?;
        }
        let mut seq_offsets = vec![0usize, 0usize];
        let mut width = actions.len();
        for _ in 1..=horizon {
            let next = seq_offsets.last().unwrap().checked_add(width).ok_or_else(too_big)?;
            seq_offsets.push(next);
            width = width.checked_mul(actions.len()).ok_or_else(too_big)?;
        }
        Ok(Arc::new(HorizonSpec {
            actions,
            observations,
            horizon,
            level_offsets,
            seq_offsets,
            complete: OnceLock::new(),
        }))
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn actions(&self) -> impl Iterator<Item = Action> + Clone {
        (0..self.actions.len()).map(Action)
    }

    pub fn observations(&self) -> impl Iterator<Item = Obs> + Clone {
        (0..self.observations.len()).map(Obs)
    }

    pub fn action_name(&self, a: Action) -> &str {
        &self.actions[a.0]
    }

    pub fn obs_name(&self, o: Obs) -> &str {
        &self.observations[o.0]
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn observation_names(&self) -> &[String] {
        &self.observations
    }

    pub fn action_by_name(&self, name: &str) -> Option<Action> {
        self.actions.iter().position(|s| s == name).map(Action)
    }

    pub fn obs_by_name(&self, name: &str) -> Option<Obs> {
        self.observations.iter().position(|s| s == name).map(Obs)
    }

    /// Number of histories of every length `0..=n`.
    pub fn history_count(&self) -> usize {
        self.level_offsets[self.horizon + 1]
    }

    /// Number of histories shorter than `n`, i.e. the nodes where a policy acts.
    pub fn decision_node_count(&self) -> usize {
        self.level_offsets[self.horizon]
    }

    pub fn complete_count(&self) -> usize {
        self.level_offsets[self.horizon + 1] - self.level_offsets[self.horizon]
    }

    /// Number of non-empty action sequences of length at most `n`.
    pub fn action_sequence_count(&self) -> usize {
        self.seq_offsets[self.horizon + 1]
    }

    fn branching(&self) -> usize {
        self.actions.len() * self.observations.len()
    }

    fn level_rank(&self, h: &History) -> usize {
        let no = self.observations.len();
        h.steps
            .iter()
            .fold(0, |acc, &(a, o)| acc * self.branching() + a.0 * no + o.0)
    }

    /// Global index of `h` among histories of all lengths.
    pub fn index(&self, h: &History) -> usize {
        self.level_offsets[h.len()] + self.level_rank(h)
    }

    /// Index of a complete history among complete histories.
    pub fn complete_index(&self, h: &History) -> usize {
        debug_assert_eq!(h.len(), self.horizon);
        self.level_rank(h)
    }

    /// Inverse of [`HorizonSpec::index`].
    pub fn history_at(&self, index: usize) -> History {
        let len = self
            .level_offsets
            .windows(2)
            .position(|w| index < w[1])
            .expect("history index out of range");
        self.decode(len, index - self.level_offsets[len])
    }

    fn decode(&self, len: usize, mut rank: usize) -> History {
        let no = self.observations.len();
        let mut steps = vec![(Action(0), Obs(0)); len];
        for slot in steps.iter_mut().rev() {
            let digit = rank % self.branching();
            rank /= self.branching();
            *slot = (Action(digit / no), Obs(digit % no));
        }
        History { steps }
    }

    /// All histories of length `m`, in index order.
    pub fn histories_of_len(&self, m: usize) -> impl Iterator<Item = History> + '_ {
        let count = self.level_offsets[m + 1] - self.level_offsets[m];
        (0..count).map(move |rank| self.decode(m, rank))
    }

    /// All histories of every length, in index order (shortest first).
    pub fn all_histories(&self) -> impl Iterator<Item = History> + '_ {
        (0..=self.horizon).flat_map(move |m| self.histories_of_len(m))
    }

    /// The complete histories `H_n`, materialized on first use.
    pub fn complete_histories(&self) -> &[History] {
        self.complete
            .get_or_init(|| self.histories_of_len(self.horizon).collect())
    }

    /// Index of a non-empty action sequence of length at most `n`.
    pub fn action_sequence_index(&self, seq: &[Action]) -> usize {
        debug_assert!(!seq.is_empty() && seq.len() <= self.horizon);
        let na = self.actions.len();
        self.seq_offsets[seq.len()] + seq.iter().fold(0, |acc, a| acc * na + a.0)
    }

    pub fn action_sequences_of_len(&self, l: usize) -> Vec<Vec<Action>> {
        let na = self.actions.len();
        let count = self.seq_offsets[l + 1] - self.seq_offsets[l];
        (0..count)
            .map(|mut rank| {
                let mut seq = vec![Action(0); l];
                for slot in seq.iter_mut().rev() {
                    *slot = Action(rank % na);
                    rank /= na;
                }
                seq
            })
            .collect()
    }

    /// Checks that `h` fits this spec.
    pub fn check(&self, h: &History) -> Result<()> {
        if h.len() > self.horizon {
            return Err(Error::Domain(format!(
                "history of length {} exceeds horizon {}",
                h.len(),
                self.horizon
            )));
        }
        for &(a, o) in &h.steps {
            if a.0 >= self.actions.len() || o.0 >= self.observations.len() {
                return Err(Error::Domain("history symbol outside the alphabet".into()));
            }
        }
        Ok(())
    }

    pub fn check_complete(&self, h: &History) -> Result<()> {
        self.check(h)?;
        if h.len() != self.horizon {
            return Err(Error::Domain(format!(
                "history `{}` is not complete (length {} < {})",
                self.format_history(h),
                h.len(),
                self.horizon
            )));
        }
        Ok(())
    }

    /// Space-separated symbols, `"M B"`; the empty history formats as `""`.
    pub fn format_history(&self, h: &History) -> String {
        let mut parts = Vec::with_capacity(2 * h.len());
        for &(a, o) in &h.steps {
            parts.push(self.actions[a.0].as_str());
            parts.push(self.observations[o.0].as_str());
        }
        parts.join(" ")
    }

    pub fn format_actions(&self, seq: &[Action]) -> String {
        seq.iter()
            .map(|a| self.actions[a.0].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn single_char_symbols(&self) -> bool {
        self.actions
            .iter()
            .chain(&self.observations)
            .all(|s| s.chars().count() == 1)
    }

    fn tokens<'a>(&self, text: &'a str) -> Vec<std::borrow::Cow<'a, str>> {
        let text = text.trim();
        if text.contains(char::is_whitespace) || !self.single_char_symbols() {
            text.split_whitespace().map(Into::into).collect()
        } else {
            text.chars().map(|c| c.to_string().into()).collect()
        }
    }

    /// Parses `"M B F D"`; when every symbol is one character the compact
    /// form `"MBFD"` is accepted too.
    pub fn parse_history(&self, text: &str) -> Result<History> {
        let tokens = self.tokens(text);
        if !tokens.len().is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "history `{text}` must alternate actions and observations"
            )));
        }
        let mut steps = Vec::with_capacity(tokens.len() / 2);
        for pair in tokens.chunks(2) {
            let a = self
                .action_by_name(&pair[0])
                .ok_or_else(|| Error::Domain(format!("unknown action `{}` in `{text}`", pair[0])))?;
            let o = self
                .obs_by_name(&pair[1])
                .ok_or_else(|| Error::Domain(format!("unknown observation `{}` in `{text}`", pair[1])))?;
            steps.push((a, o));
        }
        let h = History { steps };
        self.check(&h)?;
        Ok(h)
    }

    /// Parses an action sequence such as `"M F"` (or `"MF"`).
    pub fn parse_actions(&self, text: &str) -> Result<Vec<Action>> {
        self.tokens(text)
            .iter()
            .map(|t| {
                self.action_by_name(t)
                    .ok_or_else(|| Error::Domain(format!("unknown action `{t}` in `{text}`")))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parental() -> Arc<HorizonSpec> {
        HorizonSpec::new(["M", "F"], ["B", "D"], 1).unwrap()
    }

    #[test]
    fn rejects_bad_alphabets() {
        assert!(HorizonSpec::new(Vec::<String>::new(), ["B"], 1).is_err());
        assert!(HorizonSpec::new(["M", "M"], ["B"], 1).is_err());
        assert!(HorizonSpec::new(["M"], ["B D"], 1).is_err());
        assert!(HorizonSpec::new(["M"], ["B"], 0).is_err());
    }

    #[test]
    fn counts_and_indices() {
        let spec = HorizonSpec::new(["a", "b"], ["x", "y"], 2).unwrap();
        assert_eq!(spec.history_count(), 1 + 4 + 16);
        assert_eq!(spec.decision_node_count(), 5);
        assert_eq!(spec.complete_count(), 16);
        assert_eq!(spec.action_sequence_count(), 2 + 4);
        for (i, h) in spec.all_histories().enumerate() {
            assert_eq!(spec.index(&h), i);
            assert_eq!(spec.history_at(i), h);
        }
        for (i, h) in spec.complete_histories().iter().enumerate() {
            assert_eq!(spec.complete_index(h), i);
        }
        let seqs: Vec<_> = (1..=2).flat_map(|l| spec.action_sequences_of_len(l)).collect();
        for (i, s) in seqs.iter().enumerate() {
            assert_eq!(spec.action_sequence_index(s), i);
        }
    }

    #[test]
    fn parse_and_format() {
        let spec = parental();
        let h = spec.parse_history("MB").unwrap();
        assert_eq!(spec.parse_history("M B").unwrap(), h);
        assert_eq!(spec.format_history(&h), "M B");
        assert!(spec.parse_history("M").is_err());
        assert!(spec.parse_history("MX").is_err());
        assert!(spec.parse_history("MBFD").is_err(), "longer than the horizon");
        assert_eq!(spec.format_history(&History::empty()), "");
    }

    #[test]
    fn prefix_relation() {
        let spec = HorizonSpec::new(["a", "b"], ["x", "y"], 2).unwrap();
        let h2 = spec.parse_history("a x b y").unwrap();
        let h1 = h2.prefix(1);
        assert!(History::empty().is_prefix_of(&h1));
        assert!(h1.is_prefix_of(&h2));
        assert!(h2.is_prefix_of(&h2));
        assert!(!h2.is_prefix_of(&h1));
        assert!(!spec.parse_history("a y").unwrap().is_prefix_of(&h2));
    }
}
