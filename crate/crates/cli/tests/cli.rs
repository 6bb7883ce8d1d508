use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reward-rig"))
        .args(args)
        .env_remove("REWARD_RIG_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn classify_json(target: &str) -> Value {
    let o = rig(&["classify", target, "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn classification_golden_set() {
    let xi1 = classify_json("parental_xi1");
    assert_eq!(xi1["verdict"], "uninfluenceable");
    assert_eq!(xi1["eta"]["conditional"]["mu_BB"], serde_json::json!({"R_B": "1"}));
    assert_eq!(xi1["eta"]["conditional"]["mu_DD"], serde_json::json!({"R_D": "1"}));

    let xi2 = classify_json("parental_xi2");
    assert_eq!(xi2["verdict"], "unriggable, influenceable");
    assert!(xi2["certificate"].as_object().is_some_and(|c| !c.is_empty()));

    for name in ["parental_xi3", "parental_xiBD"] {
        let doc = classify_json(name);
        assert_eq!(doc["verdict"], "riggable");
        assert_eq!(doc["witness"]["history"], "");
        assert_eq!(doc["witness"]["action"], "M");
        assert_eq!(doc["witness"]["alternative"], "F");
    }

    assert_eq!(classify_json("chess")["unriggable"], true);
}

#[test]
fn summaries_lead_with_the_verdict() {
    let o = rig(&["classify", "parental_xi3"]);
    let text = stdout(&o);
    assert!(text.starts_with("parental_xi3: riggable\n"), "{text}");
    assert!(
        text.contains("action `M` gives expected reward R_B but `F` gives R_D"),
        "{text}"
    );
    let text = stdout(&rig(&["classify", "parental_xi2"]));
    assert!(text.starts_with("parental_xi2: unriggable, influenceable\n"), "{text}");
}

#[test]
fn construct_then_classify_closes() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, source, policy) in [
        ("uninfluenceable", "parental_xi2", None),
        ("uninfluenceable", "total_information", None),
        ("counterfactual", "parental_xi3", Some("M")),
        ("counterfactual", "chess", None),
    ] {
        let out = dir.path().join(format!("{kind}_{source}.json"));
        let mut args = vec!["construct", kind, source, "--out", path_str(&out)];
        if let Some(p) = policy {
            args.extend(["--policy", p]);
        }
        let o = rig(&args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{kind} {source}: {}{}",
            stdout(&o),
            stderr(&o)
        );
        let again = classify_json(path_str(&out));
        assert_eq!(again["verdict"], "uninfluenceable", "{kind} {source}");
    }
}

#[test]
fn uninfluenceable_construction_reports_the_relabelled_eta() {
    let o = rig(&["construct", "uninfluenceable", "parental_xi2", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["passed"], true);
    let eta = &doc["eta"]["conditional"];
    assert_eq!(eta["mu_BB"], serde_json::json!({"3/2 R_B - 1/2 R_D": "1"}));
    assert_eq!(eta["mu_BD"], serde_json::json!({"1/2 R_B + 1/2 R_D": "1"}));
    assert_eq!(eta["mu_DB"], serde_json::json!({"1/2 R_B + 1/2 R_D": "1"}));
    assert_eq!(eta["mu_DD"], serde_json::json!({"-1/2 R_B + 3/2 R_D": "1"}));
}

#[test]
fn unriggable_construction_with_an_explicit_policy() {
    let o = rig(&["construct", "unriggable", "appendixB1", "--policy", "a", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let process = &doc["scenario"]["process"];
    assert_eq!(process["a' o"], serde_json::json!({"3/2 R - 1/2 R'": "1"}));
    assert_eq!(process["a' o'"], serde_json::json!({"1/2 R + 1/2 R'": "1"}));
    let notes = doc["notes"].to_string();
    assert!(notes.contains("outside the convex hull"), "{notes}");
}

#[test]
fn sacrifice_on_an_unriggable_input_is_a_precondition_failure() {
    let o = rig(&["construct", "sacrifice", "parental_xi2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unriggable"), "{}", stderr(&o));
}

#[test]
fn uninfluenceable_on_a_riggable_input_carries_the_witness() {
    let o = rig(&["construct", "uninfluenceable", "parental_xi3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("riggable") && err.contains("`M`") && err.contains("`F`"),
        "{err}"
    );
}

#[test]
fn sacrifice_on_riggable_inputs_succeeds() {
    for source in ["parental_xi3", "penalty"] {
        let o = rig(&["construct", "sacrifice", source]);
        assert_eq!(o.status.code(), Some(0), "{source}: {}", stdout(&o));
        assert!(stdout(&o).contains("is beaten with certainty by"));
    }
}

#[test]
fn parse_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&rig(&["scenarios", "export", "parental_xi2"]));
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["process"]["M D"] = serde_json::json!({"R_D": "1/0"});
    let bad = dir.path().join("bad.json");
    fs::write(&bad, doc.to_string()).unwrap();
    let o = rig(&["classify", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(r#"process["M D"]["R_D"]"#), "{}", stderr(&o));

    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["process"]["F B"] = serde_json::json!({"R_X": "1"});
    fs::write(&bad, doc.to_string()).unwrap();
    let o = rig(&["classify", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown reward label `R_X`"), "{}", stderr(&o));

    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(rig(&["classify", path_str(&bad)]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(rig(&["construct", "nonsense", "parental_xi2"]).status.code(), Some(2));
    assert_eq!(
        rig(&["construct", "sacrifice", "parental_xi3", "--policy", "M"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        rig(&["experiment", "--prior", "BD", "--runs", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(rig(&["bogus"]).status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let unwritable = dir.path().join("missing").join("out.json");
    let o = rig(&["classify", "parental_xi1", "--out", path_str(&unwritable)]);
    assert_eq!(o.status.code(), Some(3));
    let o = rig(&[
        "experiment",
        "--prior",
        "DD",
        "--runs",
        "1",
        "--episodes",
        "10",
        "--csv",
        path_str(&unwritable),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let missing = dir.path().join("absent.json");
    assert_eq!(rig(&["classify", path_str(&missing)]).status.code(), Some(3));
}

#[test]
fn experiment_csv_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = rig(&[
            "experiment",
            "--prior",
            "DD",
            "--agent",
            "both",
            "--runs",
            "1",
            "--seed",
            "7",
            "--csv",
            path_str(p),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (a, b) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("agent,episode,nominal_mean,nominal_std,true_mean,true_std")
    );
    assert_eq!(text.lines().count(), 1 + 2 * 20_000);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "counterfactual");
    assert_eq!(row[1], "1");
    assert!(row[2..]
        .iter()
        .all(|v| v.split('.').nth(1).is_some_and(|d| d.len() == 6)));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let csv = dir.path().join(format!("t{threads}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_reward-rig"))
            .args([
                "experiment",
                "--prior",
                "half",
                "--runs",
                "70",
                "--episodes",
                "300",
                "--csv",
                path_str(&csv),
            ])
            .env("REWARD_RIG_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        outputs.push(fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn experiment_chart_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("chart.svg");
    let o = rig(&[
        "experiment",
        "--prior",
        "BD",
        "--runs",
        "4",
        "--episodes",
        "500",
        "--svg",
        path_str(&svg),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<polyline").count(), 4);
    assert!(text.contains("#d62728") && text.contains("#1f77b4"));
    let summary = stdout(&o);
    assert!(summary.contains("counterfactual: converged nominal"), "{summary}");
    assert!(summary.contains("exact 99/10"), "{summary}");
}

#[test]
fn bundled_scenarios_export_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let list = stdout(&rig(&["scenarios", "list"]));
    let names: Vec<&str> = list.lines().collect();
    assert_eq!(names.len(), 9);
    for name in names {
        let out = dir.path().join(format!("{name}.json"));
        assert_eq!(
            rig(&["scenarios", "export", name, "--out", path_str(&out)])
                .status
                .code(),
            Some(0)
        );
        let doc = classify_json(path_str(&out));
        assert_eq!(doc["scenario_name"], name);
    }
}

#[test]
fn oracle_and_solve_print_exact_values() {
    let text = stdout(&rig(&["oracle", "--prior", "DD"]));
    assert!(
        text.contains("49/10") && text.contains("-1/10") && text.contains("9/10"),
        "{text}"
    );
    let text = stdout(&rig(&["solve", "parental_xi3"]));
    assert!(text.starts_with("parental_xi3: optimal value 10\n"), "{text}");
}
