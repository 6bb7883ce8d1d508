//! Scenario files shipped inside the binary.

use rewardrig_core::Scenario;

use crate::error::FieldError;
use crate::scenario_file;

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../scenarios/", $name, ".json")))),*]
    };
}

pub static BUNDLE: &[(&str, &str)] = bundled![
    "parental_xi1",
    "parental_xi2",
    "parental_xi3",
    "parental_xiBD",
    "parental_xiDD",
    "chess",
    "penalty",
    "appendixB1",
    "total_information",
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLE.iter().map(|(name, _)| *name)
}

/// The JSON text of a bundled scenario; a trailing `.json` is ignored.
pub fn get(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    BUNDLE.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn load(name: &str) -> Option<Result<Scenario, FieldError>> {
    get(name).map(|text| {
        scenario_file::from_json(text)
            .map_err(|e| FieldError::new(name, e))?
            .to_scenario()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rewardrig_core::fixtures::{self, ParentalPrior};

    #[test]
    fn every_bundled_file_validates() {
        for name in names() {
            let sc = load(name).unwrap().unwrap();
            assert_eq!(sc.name, name);
        }
    }

    #[test]
    fn bundled_files_match_the_library_fixtures() {
        let mut expected = fixtures::all();
        let mut bd = fixtures::parental(ParentalPrior::Xi3);
        bd.name = "parental_xiBD".into();
        expected.push(bd);
        assert_eq!(expected.len(), BUNDLE.len());
        for sc in expected {
            let emitted = scenario_file::to_json(&scenario_file::ScenarioFile::from_scenario(&sc)) + "\n";
            assert_eq!(get(&sc.name), Some(emitted.as_str()), "{}", sc.name);
        }
    }

    #[test]
    fn lookup_accepts_the_file_name() {
        assert!(get("chess.json").is_some());
        assert!(get("missing").is_none());
    }
}
