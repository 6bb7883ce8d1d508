//! Priors over the parents' answers, the information an episode reveals, and
//! the belief rules that turn it into a reward-function belief.

use std::fmt;
use std::str::FromStr;

use rewardrig_core::fixtures::ParentalPrior;
use rewardrig_core::rational::{format, int, ratio, zero};
use rewardrig_core::Rational;

use crate::error::{Error, Result};
use crate::grid::{money_bonus, stethoscope_bonus, Answer, Parent};

/// One sampled environment: what each parent would answer.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct World {
    pub mother: Answer,
    pub father: Answer,
}

impl World {
    /// Mother's answer first: `BB, BD, DB, DD`.
    pub const ALL: [World; 4] = [
        World::new(Answer::Banker, Answer::Banker),
        World::new(Answer::Banker, Answer::Doctor),
        World::new(Answer::Doctor, Answer::Banker),
        World::new(Answer::Doctor, Answer::Doctor),
    ];

    pub const fn new(mother: Answer, father: Answer) -> Self {
        World { mother, father }
    }

    pub fn answer(&self, parent: Parent) -> Answer {
        match parent {
            Parent::Mother => self.mother,
            Parent::Father => self.father,
        }
    }

    pub fn name(&self) -> String {
        format!("mu_{}{}", self.mother.letter(), self.father.letter())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum PriorTag {
    /// Mother says banker, father says doctor.
    BD,
    /// Both say doctor.
    DD,
    /// Uniform over the four worlds.
    Half,
    /// The parents agree; each answer equally likely.
    Correlated,
}

impl PriorTag {
    pub const ALL: [PriorTag; 4] = [PriorTag::BD, PriorTag::DD, PriorTag::Half, PriorTag::Correlated];

    pub fn name(self) -> &'static str {
        match self {
            PriorTag::BD => "BD",
            PriorTag::DD => "DD",
            PriorTag::Half => "half",
            PriorTag::Correlated => "correlated",
        }
    }

    pub fn parental(self) -> ParentalPrior {
        match self {
            PriorTag::BD => ParentalPrior::Xi3,
            PriorTag::DD => ParentalPrior::Dd,
            PriorTag::Half => ParentalPrior::Xi2,
            PriorTag::Correlated => ParentalPrior::Xi1,
        }
    }

    /// Weights aligned with [`World::ALL`].
    pub fn weights(self) -> [Rational; 4] {
        self.parental().weights()
    }
}

impl fmt::Display for PriorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PriorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bd" | "xi3" | "xi_bd" => Ok(PriorTag::BD),
            "dd" | "xi_dd" => Ok(PriorTag::DD),
            "half" | "xi2" => Ok(PriorTag::Half),
            "correlated" | "xi1" => Ok(PriorTag::Correlated),
            _ => Err(Error::UnknownPrior(s.to_string())),
        }
    }
}

/// Answers heard so far in an episode, and whom the agent asked first.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Revealed {
    pub first: Option<Parent>,
    pub mother: Option<Answer>,
    pub father: Option<Answer>,
}

impl Revealed {
    pub const COUNT: usize = 27;

    pub fn visit(&mut self, parent: Parent, world: &World) {
        let answer = world.answer(parent);
        let slot = match parent {
            Parent::Mother => &mut self.mother,
            Parent::Father => &mut self.father,
        };
        if slot.is_none() {
            *slot = Some(answer);
            self.first.get_or_insert(parent);
        }
    }

    pub fn answer(&self, parent: Parent) -> Option<Answer> {
        match parent {
            Parent::Mother => self.mother,
            Parent::Father => self.father,
        }
    }

    pub fn consistent_with(&self, world: &World) -> bool {
        self.mother.is_none_or(|a| a == world.mother) && self.father.is_none_or(|a| a == world.father)
    }

    pub fn index(&self) -> usize {
        let parent = |p: Option<Parent>| match p {
            None => 0,
            Some(Parent::Mother) => 1,
            Some(Parent::Father) => 2,
        };
        let answer = |a: Option<Answer>| match a {
            None => 0,
            Some(Answer::Banker) => 1,
            Some(Answer::Doctor) => 2,
        };
        parent(self.first) * 9 + answer(self.mother) * 3 + answer(self.father)
    }

    /// Every encodable combination, in index order.
    pub fn all() -> Vec<Revealed> {
        let parents = [None, Some(Parent::Mother), Some(Parent::Father)];
        let answers = [None, Some(Answer::Banker), Some(Answer::Doctor)];
        let mut out = Vec::with_capacity(Self::COUNT);
        for first in parents {
            for mother in answers {
                for father in answers {
                    out.push(Revealed { first, mother, father });
                }
            }
        }
        out
    }
}

/// The reward-function belief: `R_B`, `R_D`, or the even mixture.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Belief {
    Banker,
    Doctor,
    Uncertain,
}

impl Belief {
    pub const ALL: [Belief; 3] = [Belief::Banker, Belief::Doctor, Belief::Uncertain];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn of(answer: Answer) -> Self {
        match answer {
            Answer::Banker => Belief::Banker,
            Answer::Doctor => Belief::Doctor,
        }
    }

    /// Weight on `R_B`.
    pub fn banker_weight(self) -> Rational {
        match self {
            Belief::Banker => int(1),
            Belief::Doctor => zero(),
            Belief::Uncertain => ratio(1, 2),
        }
    }

    pub fn from_banker_weight(p: &Rational) -> Result<Self> {
        Belief::ALL
            .into_iter()
            .find(|b| &b.banker_weight() == p)
            .ok_or_else(|| Error::Unrepresentable(format(p)))
    }

    pub fn money_bonus(self) -> Rational {
        self.banker_weight() * money_bonus()
    }

    pub fn stethoscope_bonus(self) -> Rational {
        (int(1) - self.banker_weight()) * stethoscope_bonus()
    }

    pub fn name(self) -> &'static str {
        match self {
            Belief::Banker => "R_B",
            Belief::Doctor => "R_D",
            Belief::Uncertain => "1/2 R_B + 1/2 R_D",
        }
    }
}

/// How an agent turns heard answers into a belief about its reward function.
pub trait BeliefRule: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn belief(&self, prior: PriorTag, revealed: &Revealed) -> Result<Belief>;
}

/// Adopts the first answer heard; uncertain until then.
pub struct Standard;

impl BeliefRule for Standard {
    fn name(&self) -> &'static str {
        "standard"
    }

    fn summary(&self) -> &'static str {
        "adopts whichever career the first parent asked names"
    }

    fn belief(&self, _prior: PriorTag, revealed: &Revealed) -> Result<Belief> {
        Ok(match revealed.first.and_then(|p| revealed.answer(p)) {
            Some(answer) => Belief::of(answer),
            None => Belief::Uncertain,
        })
    }
}

/// Posterior on the mother's answer given everything heard.
pub struct Counterfactual;

impl BeliefRule for Counterfactual {
    fn name(&self) -> &'static str {
        "counterfactual"
    }

    fn summary(&self) -> &'static str {
        "believes the posterior on what the mother would say"
    }

    fn belief(&self, prior: PriorTag, revealed: &Revealed) -> Result<Belief> {
        let weights = prior.weights();
        let banker_mass = |filter: &dyn Fn(&World) -> bool| {
            let mut total = zero();
            let mut banker = zero();
            for (w, p) in World::ALL.iter().zip(&weights) {
                if filter(w) {
                    total += p;
                    if w.mother == Answer::Banker {
                        banker += p;
                    }
                }
            }
            (banker, total)
        };
        let (mut banker, mut total) = banker_mass(&|w| revealed.consistent_with(w));
        if total == zero() {
            (banker, total) = banker_mass(&|_| true);
        }
        Belief::from_banker_weight(&(banker / total))
    }
}

static REGISTRY: [&dyn BeliefRule; 2] = [&Standard, &Counterfactual];

pub fn registry() -> &'static [&'static dyn BeliefRule] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Result<&'static dyn BeliefRule> {
    REGISTRY
        .iter()
        .copied()
        .find(|r| r.name().eq_ignore_ascii_case(name))
        .ok_or_else(|| {
            let known: Vec<_> = REGISTRY.iter().map(|r| r.name()).collect();
            Error::UnknownAgent(name.to_string(), known.join(", "))
        })
}

/// A rule's beliefs for one prior, precomputed for every [`Revealed`] index.
#[derive(Clone, Debug)]
pub struct BeliefTable {
    beliefs: [Belief; Revealed::COUNT],
}

impl BeliefTable {
    pub fn new(rule: &dyn BeliefRule, prior: PriorTag) -> Result<Self> {
        let mut beliefs = [Belief::Uncertain; Revealed::COUNT];
        for r in Revealed::all() {
            beliefs[r.index()] = rule.belief(prior, &r)?;
        }
        Ok(BeliefTable { beliefs })
    }

    pub fn get(&self, revealed: &Revealed) -> Belief {
        self.beliefs[revealed.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn after(parent: Parent, world: World) -> Revealed {
        let mut r = Revealed::default();
        r.visit(parent, &world);
        r
    }

    const BD: World = World::new(Answer::Banker, Answer::Doctor);
    const BB: World = World::new(Answer::Banker, Answer::Banker);
    const DD: World = World::new(Answer::Doctor, Answer::Doctor);

    #[test]
    fn standard_adopts_the_first_answer() {
        let b = Standard.belief(PriorTag::BD, &after(Parent::Father, BD)).unwrap();
        assert_eq!(b, Belief::Doctor);
        let b = Standard.belief(PriorTag::DD, &after(Parent::Father, DD)).unwrap();
        assert_eq!(b, Belief::Doctor);
        let mut r = after(Parent::Father, BD);
        r.visit(Parent::Mother, &BD);
        assert_eq!(Standard.belief(PriorTag::BD, &r).unwrap(), Belief::Doctor);
        assert_eq!(
            Standard.belief(PriorTag::BD, &Revealed::default()).unwrap(),
            Belief::Uncertain
        );
    }

    #[test]
    fn counterfactual_tracks_the_mother() {
        let b = Counterfactual
            .belief(PriorTag::Half, &after(Parent::Father, BB))
            .unwrap();
        assert_eq!(b, Belief::Uncertain);
        let b = Counterfactual
            .belief(PriorTag::Correlated, &after(Parent::Father, BB))
            .unwrap();
        assert_eq!(b, Belief::Banker);
        let b = Counterfactual
            .belief(PriorTag::Half, &after(Parent::Mother, DD))
            .unwrap();
        assert_eq!(b, Belief::Doctor);
        let start = Revealed::default();
        assert_eq!(Counterfactual.belief(PriorTag::BD, &start).unwrap(), Belief::Banker);
        assert_eq!(Counterfactual.belief(PriorTag::DD, &start).unwrap(), Belief::Doctor);
        assert_eq!(
            Counterfactual.belief(PriorTag::Half, &start).unwrap(),
            Belief::Uncertain
        );
        assert_eq!(
            Counterfactual.belief(PriorTag::BD, &after(Parent::Father, BD)).unwrap(),
            Belief::Banker
        );
    }

    #[test]
    fn impossible_answers_fall_back_to_the_prior() {
        let b = Counterfactual.belief(PriorTag::BD, &after(Parent::Mother, DD)).unwrap();
        assert_eq!(b, Belief::Banker);
    }

    #[test]
    fn revealed_keeps_first_answers() {
        let mut r = after(Parent::Mother, BD);
        r.visit(Parent::Mother, &DD);
        assert_eq!(r.mother, Some(Answer::Banker));
        r.visit(Parent::Father, &BD);
        assert_eq!(r.first, Some(Parent::Mother));
        assert_eq!(r.father, Some(Answer::Doctor));
    }

    #[test]
    fn revealed_indices_are_a_bijection() {
        let all = Revealed::all();
        assert_eq!(all.len(), Revealed::COUNT);
        for (i, r) in all.iter().enumerate() {
            assert_eq!(r.index(), i);
        }
    }

    #[test]
    fn tables_build_for_every_rule_and_prior() {
        for rule in registry() {
            for prior in PriorTag::ALL {
                BeliefTable::new(*rule, prior).unwrap();
            }
        }
    }

    #[test]
    fn belief_bonuses() {
        assert_eq!(Belief::Uncertain.money_bonus(), int(5));
        assert_eq!(Belief::Uncertain.stethoscope_bonus(), ratio(1, 2));
        assert_eq!(Belief::Banker.money_bonus(), int(10));
        assert_eq!(Belief::Doctor.stethoscope_bonus(), int(1));
        assert_eq!(Belief::Doctor.money_bonus(), zero());
    }

    #[test]
    fn lookup_and_parse() {
        assert_eq!(lookup("Counterfactual").unwrap().name(), "counterfactual");
        assert!(lookup("oracle").is_err());
        assert_eq!("half".parse::<PriorTag>().unwrap(), PriorTag::Half);
        assert_eq!("bd".parse::<PriorTag>().unwrap(), PriorTag::BD);
        assert!("uniform".parse::<PriorTag>().is_err());
    }
}
