//! End-to-end tests of the `resurface` binary: each subcommand runs as a real
//! process against a temporary workspace, artifacts land where the workspace
//! conventions say, seeded runs are byte-for-byte reproducible across
//! processes, and failures exit nonzero with a path-bearing message on
//! stderr.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use resurface::featurize::{refollow_feature_names, AccountSnapshot};
use resurface::io::{self, FeatureTable, ModelEnvelope};
use resurface::learn::LinearModel;
use resurface::profile::ProfileRecord;
use resurface::search::model::Policy;
use resurface::search::policy::GroundTruth;
use tempfile::TempDir;

fn run(workspace: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resurface"))
        .arg("--workspace")
        .arg(workspace)
        .args(args)
        .output()
        .expect("binary should launch")
}

/// Asserts success and hands back stdout.
fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn profile(user_id: &str, screen_name: &str, name: &str) -> ProfileRecord {
    ProfileRecord {
        user_id: user_id.into(),
        screen_name: screen_name.into(),
        name: name.into(),
        profile_image: None,
        banner_image: None,
    }
}

/// Two near-identical profiles and one unrelated account.
fn write_profile_corpus(root: &Path) {
    io::write_profiles(
        root.join("profiles.jsonl"),
        &[
            profile("100", "ada_lovelace", "Ada Lovelace"),
            profile("200", "ada_lovelace2", "Ada Lovelace"),
            profile("300", "zq", "Completely Different"),
        ],
    )
    .unwrap();
}

/// Edges, account snapshots, and a flat refollow model (every phi 0.5):
/// user 1 has two searchable friends (2 with three follower pages, 3 with
/// one), plus a friendless friend, a deactivated one, and one with no
/// snapshot at all.
fn write_search_workspace(root: &Path) {
    io::write_edges(root.join("edges.csv"), &[(1, 2), (1, 3), (1, 4), (1, 5), (1, 6)]).unwrap();
    let mut user = AccountSnapshot::new(1);
    user.friends_count = 5;
    let mut big = AccountSnapshot::new(2);
    big.followers_count = 12_000;
    let mut small = AccountSnapshot::new(3);
    small.followers_count = 4_000;
    let friendless = AccountSnapshot::new(4);
    let mut gone = AccountSnapshot::new(5);
    gone.followers_count = 50;
    gone.active = false;
    io::write_accounts(
        root.join("edges.accounts.jsonl"),
        &[user, big, small, friendless, gone],
    )
    .unwrap();

    let model = LinearModel {
        coefficients: vec![0.0; refollow_feature_names().len()],
        intercept: 0.0,
    };
    let envelope = ModelEnvelope::linear(&model, 0.0, refollow_feature_names(), None, Some(0.5));
    fs::create_dir_all(root.join("models")).unwrap();
    io::write_model(root.join("models/refollow.model.json"), &envelope).unwrap();
}

#[test]
fn match_and_sweep_pipeline() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    write_profile_corpus(root);

    let output = run(root, &["--format", "delimited", "match"]);
    let stdout = stdout_of(&output);
    // The near-identical pair ranks first, and the labels file is written.
    let first_pair = stdout.lines().nth(1).unwrap();
    assert!(first_pair.starts_with("100\t200\t"), "{stdout}");
    assert!(stdout.contains("labels -> "), "{stdout}");
    assert!(root.join("labels.csv").exists());

    let output = run(
        root,
        &[
            "--format", "delimited", "sweep",
            "--start", "0.5", "--end", "0.9", "--step", "0.1",
        ],
    );
    stdout_of(&output);
    let points = io::read_sweep(root.join("reports").join("sweep.csv")).unwrap();
    let thresholds: Vec<f64> = points.iter().map(|p| p.threshold).collect();
    assert_eq!(thresholds, vec![0.5, 0.6, 0.7, 0.8, 0.9]);
}

#[test]
fn train_is_deterministic_across_processes() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    // One informative feature, comfortably separable.
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|i| vec![if i % 2 == 0 { -2.0 } else { 2.0 } + 0.05 * f64::from(i)])
        .collect();
    let labels: Vec<f64> = (0..20).map(|i| f64::from(i % 2 == 1)).collect();
    let table = FeatureTable {
        feature_names: vec!["screen_ratio".into()],
        rows,
        labels: Some(labels),
        clusters: None,
    };
    let features = root.join("pairs.csv");
    io::write_feature_table(&features, &table).unwrap();

    let args = [
        "--seed", "3", "--format", "delimited", "train",
        "--kind", "match",
        "--features", features.to_str().unwrap(),
        "--lambdas", "0.01,1000000",
    ];
    let stdout = stdout_of(&run(root, &args));
    assert!(stdout.contains("model -> "), "{stdout}");

    let model_path = root.join("models").join("match.model.json");
    let envelope = io::read_model(&model_path).unwrap();
    assert_eq!(envelope.lambda, 0.01, "the crushing penalty should lose");

    // The same seed reproduces the saved model byte for byte.
    let first = fs::read(&model_path).unwrap();
    stdout_of(&run(root, &args));
    assert_eq!(first, fs::read(&model_path).unwrap());
}

#[test]
fn instance_search_simulate_pipeline() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();
    write_search_workspace(root);

    // Build the search instance for user 1.
    let stdout = stdout_of(&run(root, &["instance", "--user", "1", "--rho0", "0.8"]));
    assert!(stdout.contains("2 searchable friends"), "{stdout}");
    assert!(stdout.contains("2 unsearchable"), "{stdout}");
    assert!(stdout.contains("1 without snapshots"), "{stdout}");
    let instance_path = root.join("instances").join("user_1.json");
    let instance = io::read_instance(&instance_path).unwrap();
    assert_eq!(instance.len(), 2);
    assert_eq!(instance.total_queries(), 4); // three 5000-pages plus one

    // Rank policies on it; the optimal row leads and the ensemble closes.
    let instance_arg = instance_path.to_str().unwrap();
    let output = run(
        root,
        &[
            "--format", "delimited", "search",
            "--instance", instance_arg,
            "--runs", "2000", "--random-draws", "40",
        ],
    );
    let stdout = stdout_of(&output);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "policy\torder\texpected\tspread\tsim mean\tsim se\tfound");
    assert!(lines[1].starts_with("optimal\t"), "{stdout}");
    assert!(lines[5].starts_with("random x40\t"), "{stdout}");

    // Table mode rules the header off with dashes.
    let output = run(
        root,
        &["search", "--instance", instance_arg, "--runs", "500", "--random-draws", "10"],
    );
    let stdout = stdout_of(&output);
    let rule = stdout.lines().nth(1).unwrap();
    assert!(
        !rule.is_empty() && rule.trim_end().chars().all(|c| c == '-' || c == ' '),
        "{stdout}"
    );

    // A pinned ground truth adds the realized-cost column.
    let truth_path = root.join("truth.json");
    io::write_ground_truth(&truth_path, &GroundTruth::absent()).unwrap();
    let output = run(
        root,
        &[
            "--format", "delimited", "search",
            "--instance", instance_arg,
            "--truth", truth_path.to_str().unwrap(),
            "--runs", "200", "--random-draws", "5",
        ],
    );
    let stdout = stdout_of(&output);
    assert!(stdout.lines().next().unwrap().contains("\trealized"), "{stdout}");

    // Simulation writes its report deterministically for a fixed seed.
    let simulate = [
        "--seed", "9", "simulate",
        "--instance", instance_arg,
        "--runs", "3000",
    ];
    stdout_of(&run(root, &simulate));
    let report_path = root.join("reports").join("simulation.json");
    let first = fs::read(&report_path).unwrap();
    stdout_of(&run(root, &simulate));
    assert_eq!(first, fs::read(&report_path).unwrap());

    // An explicit policy file and report destination are honored.
    let policy_path = root.join("policy.json");
    io::write_policy(&policy_path, &Policy(vec![3, 2, 2, 2])).unwrap();
    let custom_report = root.join("reports").join("pinned.json");
    let output = run(
        root,
        &[
            "simulate",
            "--instance", instance_arg,
            "--policy", policy_path.to_str().unwrap(),
            "--truth", truth_path.to_str().unwrap(),
            "--runs", "100",
            "--report", custom_report.to_str().unwrap(),
        ],
    );
    stdout_of(&output);
    let report = io::read_sim_report(&custom_report).unwrap();
    // An absent account is never found: every run pays all four queries.
    assert_eq!(report.mean_unsuccessful_queries, 4.0);
}

#[test]
fn failures_exit_nonzero_with_context() {
    let dir = TempDir::new().unwrap();
    let root = dir.path();

    // A missing input file names the path.
    let missing = root.join("missing.json");
    let output = run(root, &["search", "--instance", missing.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.starts_with("error: "), "{stderr}");
    assert!(stderr.contains("missing.json"), "{stderr}");

    // A corrupt corpus reports the offending line number.
    write_profile_corpus(root);
    let profiles = root.join("profiles.jsonl");
    let mut corpus = fs::read_to_string(&profiles).unwrap();
    let keep = corpus.find('\n').unwrap() + 1;
    corpus.truncate(keep);
    corpus.push_str("not json\n");
    fs::write(&profiles, corpus).unwrap();
    let output = run(root, &["match"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("profiles.jsonl:2"), "{stderr}");

    // Argument errors from the parser are nonzero too.
    let output = Command::new(env!("CARGO_BIN_EXE_resurface"))
        .arg("--definitely-not-a-flag")
        .output()
        .unwrap();
    assert!(!output.status.success());
}
