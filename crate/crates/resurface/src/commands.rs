//! File-driven entry points behind the `resurface` binary.
//!
//! Each command reads from a [`Workspace`] — a directory of conventional file
//! locations — does one unit of work, writes its artifact back into the
//! workspace, and prints a human-readable table (or a tab-delimited one for
//! scripting) to the supplied writer. The binary is a thin argument parser
//! over these functions, so everything here is equally usable from tests and
//! library callers.
//!
//! | command | reads | writes |
//! |---|---|---|
//! | [`cmd_match`] | `profiles.jsonl` | `labels.csv` |
//! | [`cmd_sweep`] | `profiles.jsonl` | `reports/sweep.csv` |
//! | [`cmd_train`] | a feature CSV | `models/<kind>.model.json` |
//! | [`cmd_instance`] | `edges.csv` + accounts + refollow model | `instances/user_<id>.json` |
//! | [`cmd_search`] | an instance JSON | — |
//! | [`cmd_simulate`] | an instance JSON (+ policy, truth) | `reports/simulation.json` |

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::featurize::{refollow_features, AccountSnapshot, RefollowRow, ZScore};
use crate::io::{self, FeatureTable, ModelEnvelope, ModelKind};
use crate::learn::{
    confusion_at_threshold, roc_auc, train_kernel_logistic, train_l1_logistic, ConfusionMatrix,
    Dataset,
};
use crate::profile::cluster::{candidate_pairs, threshold_sweep, ClusterOptions};
use crate::profile::matching::{
    auto_label_pair, compare_profiles, match_probability, LabelClass, LabelSource, MatchModel,
    PairLabel,
};
use crate::search::model::{FriendSpec, Policy, SearchInstance};
use crate::search::policy::{
    actual_cost, expected_cost, greedy_policy, max_p_policy, min_n_policy, optimal_policy,
    random_policy, PolicyReport,
};
use crate::search::sim;

// ---------------------------------------------------------------------------
// Workspace layout

/// Conventional file locations inside one working directory.
///
/// Commands create the directories they write into; the input files are
/// expected to exist (errors mention the missing path).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    /// Profile corpus, one JSON object per line.
    pub profiles_file: PathBuf,
    /// Follow edges, `follower_id,friend_id` CSV.
    pub edges_file: PathBuf,
    /// Bootstrap pair labels written by [`cmd_match`].
    pub labels_file: PathBuf,
    /// Trained model envelopes.
    pub models_dir: PathBuf,
    /// Search instances built by [`cmd_instance`].
    pub instances_dir: PathBuf,
    /// Sweep and simulation reports.
    pub reports_dir: PathBuf,
}

impl Workspace {
    /// The default layout under `root`.
    pub fn rooted_at(root: impl AsRef<Path>) -> Self {
        let root = root.as_ref();
        Workspace {
            profiles_file: root.join("profiles.jsonl"),
            edges_file: root.join("edges.csv"),
            labels_file: root.join("labels.csv"),
            models_dir: root.join("models"),
            instances_dir: root.join("instances"),
            reports_dir: root.join("reports"),
        }
    }

    /// Account snapshots that ride alongside the edge file.
    pub fn accounts_file(&self) -> PathBuf {
        io::default_accounts_path(&self.edges_file)
    }

    /// Where a trained model of the given kind lives.
    pub fn model_file(&self, kind: TrainKind) -> PathBuf {
        self.models_dir.join(format!("{}.model.json", kind.name()))
    }

    /// The reconnection-probability model consumed by [`cmd_instance`].
    pub fn refollow_model_file(&self) -> PathBuf {
        self.model_file(TrainKind::Refollow)
    }

    /// Where the search instance for one user lives.
    pub fn instance_file(&self, user: u64) -> PathBuf {
        self.instances_dir.join(format!("user_{user}.json"))
    }
}

// ---------------------------------------------------------------------------
// Output rendering

/// How command output is printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    /// Aligned columns for people.
    Table,
    /// Tab-separated rows for scripts (fields may contain commas).
    Delimited,
}

fn out_err(source: std::io::Error) -> Error {
    Error::io("<output>", source)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::io(path, source))
}

/// Print one table. In `Table` mode columns are padded and numeric columns
/// right-aligned; in `Delimited` mode rows are tab-joined verbatim.
fn render(
    out: &mut dyn Write,
    format: OutputFormat,
    headers: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    match format {
        OutputFormat::Delimited => {
            writeln!(out, "{}", headers.join("\t")).map_err(out_err)?;
            for row in rows {
                writeln!(out, "{}", row.join("\t")).map_err(out_err)?;
            }
        }
        OutputFormat::Table => {
            let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
            for row in rows {
                for (i, cell) in row.iter().enumerate() {
                    widths[i] = widths[i].max(cell.chars().count());
                }
            }
            // A column holding nothing but numbers (and "-" placeholders)
            // reads best right-aligned.
            let numeric: Vec<bool> = (0..headers.len())
                .map(|i| {
                    let mut saw_number = false;
                    for row in rows {
                        match row[i].as_str() {
                            "-" => {}
                            cell => match cell.trim_end_matches('%').parse::<f64>() {
                                Ok(_) => saw_number = true,
                                Err(_) => return false,
                            },
                        }
                    }
                    saw_number
                })
                .collect();
            let mut line = String::new();
            for (i, header) in headers.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                pad(&mut line, header, widths[i], numeric[i]);
            }
            writeln!(out, "{}", line.trim_end()).map_err(out_err)?;
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            writeln!(out, "{}", rule.join("  ")).map_err(out_err)?;
            for row in rows {
                let mut line = String::new();
                for (i, cell) in row.iter().enumerate() {
                    if i > 0 {
                        line.push_str("  ");
                    }
                    pad(&mut line, cell, widths[i], numeric[i]);
                }
                writeln!(out, "{}", line.trim_end()).map_err(out_err)?;
            }
        }
    }
    Ok(())
}

fn pad(line: &mut String, cell: &str, width: usize, right_align: bool) {
    let fill = " ".repeat(width.saturating_sub(cell.chars().count()));
    if right_align {
        line.push_str(&fill);
        line.push_str(cell);
    } else {
        line.push_str(cell);
        line.push_str(&fill);
    }
}

// ---------------------------------------------------------------------------
// match

/// Options for [`cmd_match`].
#[derive(Debug, Clone)]
pub struct MatchOptions {
    /// Match cutoff; `None` uses the bundled model's calibrated threshold.
    pub threshold: Option<f64>,
    /// Compare only pairs sharing a character 3-gram instead of all pairs.
    pub blocking: bool,
    /// All-pairs safety cap (ignored when `blocking` is set).
    pub max_profiles: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        let defaults = ClusterOptions::default();
        MatchOptions {
            threshold: None,
            blocking: defaults.blocking,
            max_profiles: defaults.max_profiles,
        }
    }
}

/// Score every candidate profile pair with the bundled match model, print the
/// pairs ranked by match probability, and write rule-based bootstrap labels
/// to the workspace label file.
pub fn cmd_match(
    workspace: &Workspace,
    options: &MatchOptions,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    let profiles = io::read_profiles(&workspace.profiles_file)?;
    if profiles.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "matching needs at least two profiles, found {} in {}",
            profiles.len(),
            workspace.profiles_file.display()
        )));
    }
    let model = MatchModel::bundled();
    let threshold = options.threshold.unwrap_or(model.threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::ProbabilityOutOfRange {
            name: "threshold",
            value: threshold,
        });
    }
    let cluster_options = ClusterOptions {
        max_profiles: options.max_profiles,
        blocking: options.blocking,
        ..ClusterOptions::default()
    };
    let pairs = candidate_pairs(&profiles, &cluster_options)?;

    struct Scored {
        a: usize,
        b: usize,
        probability: f64,
        label: PairLabel,
        screen_name_similarity: f64,
        name_similarity: f64,
    }
    let mut scored = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let features = compare_profiles(&profiles[a], &profiles[b])?;
        scored.push(Scored {
            a,
            b,
            probability: match_probability(&model, &features),
            label: auto_label_pair(&profiles[a], &profiles[b], &features),
            screen_name_similarity: features.screen_name_similarity,
            name_similarity: features.name_similarity,
        });
    }
    // Stable sort: equal probabilities keep their (a, b) enumeration order.
    scored.sort_by(|x, y| y.probability.partial_cmp(&x.probability).unwrap_or(Ordering::Equal));

    let headers = [
        "profile a",
        "profile b",
        "screen name",
        "name",
        "probability",
        "match",
        "label",
    ];
    let rows: Vec<Vec<String>> = scored
        .iter()
        .map(|pair| {
            vec![
                profiles[pair.a].user_id.clone(),
                profiles[pair.b].user_id.clone(),
                format!("{:.4}", pair.screen_name_similarity),
                format!("{:.4}", pair.name_similarity),
                format!("{:.4}", pair.probability),
                if pair.probability >= threshold { "yes" } else { "no" }.to_string(),
                label_text(&pair.label).to_string(),
            ]
        })
        .collect();
    render(out, format, &headers, &rows)?;

    let matched = scored.iter().filter(|p| p.probability >= threshold).count();
    let labeled = scored
        .iter()
        .filter(|p| p.label.class != LabelClass::Unlabeled)
        .count();
    let review = scored
        .iter()
        .filter(|p| p.label.manual_review_candidate)
        .count();

    write_labels(&workspace.labels_file, &profiles, &scored)?;

    writeln!(out).map_err(out_err)?;
    writeln!(
        out,
        "{} pairs scored at threshold {:.3}: {} matched, {} auto-labeled, {} queued for review",
        scored.len(),
        threshold,
        matched,
        labeled,
        review
    )
    .map_err(out_err)?;
    writeln!(out, "labels -> {}", workspace.labels_file.display()).map_err(out_err)?;
    return Ok(());

    // Bootstrap labels, one row per scored pair, ranked like the table.
    fn write_labels(
        path: &Path,
        profiles: &[crate::profile::matching::ProfileRecord],
        scored: &[Scored],
    ) -> Result<()> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let csv_err = |source: csv::Error| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        writer
            .write_record([
                "user_id_a",
                "user_id_b",
                "probability",
                "matched_by_model",
                "class",
                "source",
                "review_candidate",
            ])
            .map_err(csv_err)?;
        for pair in scored {
            writer
                .write_record([
                    profiles[pair.a].user_id.as_str(),
                    profiles[pair.b].user_id.as_str(),
                    &format!("{:.6}", pair.probability),
                    &(pair.probability >= MatchModel::bundled().threshold).to_string(),
                    class_name(pair.label.class),
                    pair.label.source.map_or("", source_name),
                    &pair.label.manual_review_candidate.to_string(),
                ])
                .map_err(csv_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::io(path, e.into_error()))?;
        io::write_atomic(path, &bytes)
    }
}

fn class_name(class: LabelClass) -> &'static str {
    match class {
        LabelClass::SameUser => "same_user",
        LabelClass::DifferentUsers => "different_users",
        LabelClass::Unlabeled => "unlabeled",
    }
}

fn source_name(source: LabelSource) -> &'static str {
    match source {
        LabelSource::UserIdMatch => "user_id_match",
        LabelSource::LowSimilarityRule => "low_similarity_rule",
        LabelSource::Manual => "manual",
        LabelSource::Model => "model",
    }
}

fn label_text(label: &PairLabel) -> &'static str {
    match label.class {
        LabelClass::SameUser => "same-user",
        LabelClass::DifferentUsers => "different-users",
        LabelClass::Unlabeled if label.manual_review_candidate => "review",
        LabelClass::Unlabeled => "-",
    }
}

// ---------------------------------------------------------------------------
// sweep

/// Options for [`cmd_sweep`].
#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// First threshold of the grid.
    pub start: f64,
    /// Last threshold of the grid (inclusive).
    pub end: f64,
    /// Grid spacing.
    pub step: f64,
    /// Compare only pairs sharing a character 3-gram instead of all pairs.
    pub blocking: bool,
    /// All-pairs safety cap (ignored when `blocking` is set).
    pub max_profiles: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        let defaults = ClusterOptions::default();
        SweepOptions {
            start: 0.50,
            end: 0.99,
            step: 0.01,
            blocking: defaults.blocking,
            max_profiles: defaults.max_profiles,
        }
    }
}

/// Rebuild the match graph at each threshold on a grid and report how it
/// degrades: connected accounts, giant-component size, average clustering.
/// Writes the rows to `reports/sweep.csv`.
pub fn cmd_sweep(
    workspace: &Workspace,
    options: &SweepOptions,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    if !(options.start.is_finite() && options.end.is_finite() && options.step.is_finite()) {
        return Err(Error::InvalidArgument(
            "sweep bounds and step must be finite".into(),
        ));
    }
    if !(0.0..=1.0).contains(&options.start) || !(0.0..=1.0).contains(&options.end) {
        return Err(Error::InvalidArgument(format!(
            "sweep thresholds must lie in [0, 1], got {}..={}",
            options.start, options.end
        )));
    }
    if options.start > options.end || options.step <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs start <= end and a positive step, got {}..={} by {}",
            options.start, options.end, options.step
        )));
    }
    let mut thresholds = Vec::new();
    for i in 0.. {
        // Snap accumulated grid values so 0.50 + 32*0.01 prints as 0.82.
        let value = (f64::from(i).mul_add(options.step, options.start) * 1e10).round() / 1e10;
        if value > options.end + 1e-9 {
            break;
        }
        thresholds.push(value);
    }

    let profiles = io::read_profiles(&workspace.profiles_file)?;
    let cluster_options = ClusterOptions {
        max_profiles: options.max_profiles,
        blocking: options.blocking,
        ..ClusterOptions::default()
    };
    let points = threshold_sweep(&profiles, &MatchModel::bundled(), &thresholds, &cluster_options)?;

    create_dir(&workspace.reports_dir)?;
    let path = workspace.reports_dir.join("sweep.csv");
    io::write_sweep(&path, &points)?;

    let headers = ["threshold", "connected", "giant component", "avg clustering"];
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|point| {
            vec![
                point.threshold.to_string(),
                point.connected_accounts.to_string(),
                point.giant_component.to_string(),
                format!("{:.4}", point.average_clustering),
            ]
        })
        .collect();
    render(out, format, &headers, &rows)?;
    writeln!(out).map_err(out_err)?;
    writeln!(
        out,
        "swept {} thresholds over {} profiles; rows -> {}",
        points.len(),
        profiles.len(),
        path.display()
    )
    .map_err(out_err)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// train

/// Which classifier a feature table trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainKind {
    /// Did this account get suspended? (sparse linear model)
    Suspension,
    /// Are these two profiles the same person? (sparse linear model)
    Match,
    /// Will the returned user refollow this friend? (kernel model)
    Refollow,
}

impl TrainKind {
    /// Stable name used in file paths and output.
    pub fn name(self) -> &'static str {
        match self {
            TrainKind::Suspension => "suspension",
            TrainKind::Match => "match",
            TrainKind::Refollow => "refollow",
        }
    }

    /// Penalty grid searched when the caller does not supply one.
    pub fn default_lambdas(self) -> Vec<f64> {
        match self {
            TrainKind::Refollow => vec![0.001, 0.01, 0.1, 1.0],
            _ => vec![0.01, 0.1, 1.0, 10.0],
        }
    }

    fn uses_kernel(self) -> bool {
        self == TrainKind::Refollow
    }
}

/// Options for [`cmd_train`].
#[derive(Debug, Clone)]
pub struct TrainOptions {
    /// Which model to train (decides trainer, defaults, and output path).
    pub kind: TrainKind,
    /// Feature CSV with a `label` column (see the feature-table format).
    pub features: PathBuf,
    /// Penalty grid; empty means the kind's default grid.
    pub lambdas: Vec<f64>,
    /// Fraction of rows held out for evaluation, in (0, 1).
    pub test_fraction: f64,
    /// Seed for the split shuffle.
    pub seed: u64,
    /// Hold out whole clusters (requires a `cluster` column) so sibling rows
    /// never straddle the split.
    pub group_split: bool,
}

impl TrainOptions {
    /// The defaults: kind's penalty grid, 30% test split, seed 0, row split.
    pub fn new(kind: TrainKind, features: impl Into<PathBuf>) -> Self {
        TrainOptions {
            kind,
            features: features.into(),
            lambdas: Vec::new(),
            test_fraction: 0.3,
            seed: 0,
            group_split: false,
        }
    }
}

/// Split row indices into (train, test), both sorted. Plain mode shuffles
/// rows; group mode shuffles cluster ids and assigns whole clusters to the
/// test side until it reaches the target size.
fn split_rows(table: &FeatureTable, options: &TrainOptions) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = table.len();
    if n < 4 {
        return Err(Error::InvalidDataset(format!(
            "need at least 4 labeled rows to split, found {n}"
        )));
    }
    if !(options.test_fraction > 0.0 && options.test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie strictly between 0 and 1, got {}",
            options.test_fraction
        )));
    }
    let target = ((n as f64) * options.test_fraction).round() as usize;
    let target = target.clamp(1, n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let test: BTreeSet<usize> = if options.group_split {
        let clusters = table.clusters.as_ref().ok_or_else(|| {
            Error::InvalidArgument(
                "group split requires a cluster column in the feature table".into(),
            )
        })?;
        let mut members: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (row, &cluster) in clusters.iter().enumerate() {
            members.entry(cluster).or_default().push(row);
        }
        if members.len() < 2 {
            return Err(Error::InvalidDataset(
                "group split needs at least two distinct clusters".into(),
            ));
        }
        let mut ids: Vec<u64> = members.keys().copied().collect();
        ids.shuffle(&mut rng);
        let mut test = BTreeSet::new();
        for id in ids {
            if test.len() >= target {
                break;
            }
            // Never let the test side swallow every row.
            if test.len() + members[&id].len() < n {
                test.extend(members[&id].iter().copied());
            }
        }
        test
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order[..target].iter().copied().collect()
    };

    let train: Vec<usize> = (0..n).filter(|i| !test.contains(i)).collect();
    Ok((train, test.into_iter().collect()))
}

struct Candidate {
    lambda: f64,
    envelope: ModelEnvelope,
    train_accuracy: f64,
    test_accuracy: f64,
    test_auc: Option<f64>,
    nonzero: Option<usize>,
}

/// Train one model per penalty value, pick the best by held-out AUC, and save
/// it to `models/<kind>.model.json` with a 0.5 decision threshold.
///
/// Sparse-linear kinds train on raw features (the penalty expects comparable
/// scales from the feature builders); the kernel kind standardizes features
/// on the training split and stores the statistics in the envelope.
pub fn cmd_train(
    workspace: &Workspace,
    options: &TrainOptions,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    let table = io::read_feature_table(&options.features)?;
    if table.labels.is_none() {
        return Err(Error::InvalidDataset(format!(
            "training requires a label column in {}",
            options.features.display()
        )));
    }
    let labels = table.labels.as_ref().expect("label column checked above");
    let (train_idx, test_idx) = split_rows(&table, options)?;
    let select_rows = |idx: &[usize]| -> Vec<Vec<f64>> {
        idx.iter().map(|&i| table.rows[i].clone()).collect()
    };
    let select_labels =
        |idx: &[usize]| -> Vec<f64> { idx.iter().map(|&i| labels[i]).collect() };
    let train_rows = select_rows(&train_idx);
    let train_labels = select_labels(&train_idx);
    let test_rows = select_rows(&test_idx);
    let test_labels = select_labels(&test_idx);

    let lambdas = if options.lambdas.is_empty() {
        options.kind.default_lambdas()
    } else {
        options.lambdas.clone()
    };

    let mut candidates = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let envelope = if options.kind.uses_kernel() {
            let stats = ZScore::fit(&train_rows)?;
            let data = Dataset::new(stats.apply_all(&train_rows), train_labels.clone())?;
            let model = train_kernel_logistic(&data, lambda)?;
            ModelEnvelope::kernel(&model, table.feature_names.clone(), Some(stats), Some(0.5))
        } else {
            let data = Dataset::new(train_rows.clone(), train_labels.clone())?;
            let model = train_l1_logistic(&data, lambda)?;
            ModelEnvelope::linear(&model, lambda, table.feature_names.clone(), None, Some(0.5))
        };
        // Evaluate exactly as deployment will: raw features through the
        // envelope (which applies any stored normalization itself).
        let train_scores: Vec<f64> = train_rows
            .iter()
            .map(|row| envelope.predict(row))
            .collect::<Result<_>>()?;
        let test_scores: Vec<f64> = test_rows
            .iter()
            .map(|row| envelope.predict(row))
            .collect::<Result<_>>()?;
        let nonzero = match &envelope.model {
            ModelKind::Linear { .. } => Some(envelope.to_linear()?.nonzero_count()),
            ModelKind::Kernel { .. } => None,
        };
        candidates.push(Candidate {
            lambda,
            envelope,
            train_accuracy: confusion_at_threshold(&train_scores, &train_labels, 0.5)?.accuracy(),
            test_accuracy: confusion_at_threshold(&test_scores, &test_labels, 0.5)?.accuracy(),
            // A single-class test split has no ranking to score; show "-".
            test_auc: roc_auc(&test_scores, &test_labels).ok(),
            nonzero,
        });
    }

    let best = candidates
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            let key = |c: &Candidate| c.test_auc.unwrap_or(f64::NEG_INFINITY);
            key(a)
                .partial_cmp(&key(b))
                .unwrap_or(Ordering::Equal)
                // Ties prefer the earlier (conventionally stronger-penalty-
                // first) grid entry.
                .then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .expect("at least one candidate: lambda grids are never empty");

    let headers = ["lambda", "nonzero", "train acc", "test acc", "test auc", "best"];
    let rows: Vec<Vec<String>> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                c.lambda.to_string(),
                c.nonzero.map_or("-".into(), |n| n.to_string()),
                format!("{:.4}", c.train_accuracy),
                format!("{:.4}", c.test_accuracy),
                c.test_auc.map_or("-".into(), |auc| format!("{auc:.4}")),
                if i == best { "*" } else { "" }.to_string(),
            ]
        })
        .collect();
    render(out, format, &headers, &rows)?;

    create_dir(&workspace.models_dir)?;
    let path = workspace.model_file(options.kind);
    io::write_model(&path, &candidates[best].envelope)?;

    let chosen = &candidates[best];
    let test_scores: Vec<f64> = test_rows
        .iter()
        .map(|row| chosen.envelope.predict(row))
        .collect::<Result<_>>()?;
    let matrix: ConfusionMatrix = confusion_at_threshold(&test_scores, &test_labels, 0.5)?;
    writeln!(out).map_err(out_err)?;
    writeln!(
        out,
        "{} rows: {} train / {} test ({} split, seed {})",
        table.len(),
        train_idx.len(),
        test_idx.len(),
        if options.group_split { "cluster" } else { "row" },
        options.seed
    )
    .map_err(out_err)?;
    writeln!(
        out,
        "best lambda {}: test confusion at 0.5 — tp {} fp {} tn {} fn {}",
        chosen.lambda,
        matrix.true_positives,
        matrix.false_positives,
        matrix.true_negatives,
        matrix.false_negatives
    )
    .map_err(out_err)?;
    writeln!(out, "model -> {}", path.display()).map_err(out_err)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// instance

/// Options for [`cmd_instance`].
#[derive(Debug, Clone)]
pub struct InstanceOptions {
    /// The (suspended) user whose friends will be searched.
    pub user: u64,
    /// Prior probability that the user returns at all.
    pub rho0: f64,
    /// Stop searching once the return posterior falls below this.
    pub rho_bar: f64,
    /// Follower-list page size per query.
    pub page_size: u64,
}

impl InstanceOptions {
    /// Even-odds return prior, no early stopping, 5000-follower pages.
    pub fn new(user: u64) -> Self {
        InstanceOptions {
            user,
            rho0: 0.5,
            rho_bar: 0.0,
            page_size: 5000,
        }
    }
}

/// Build the search instance for one user: collect their friends from the
/// edge file, keep the searchable ones (active, public, at least one
/// follower), score each friend's reconnection probability with the trained
/// refollow model, and write `instances/user_<id>.json`.
pub fn cmd_instance(
    workspace: &Workspace,
    options: &InstanceOptions,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    let edges = io::read_edges(&workspace.edges_file)?;
    let accounts = io::read_accounts(workspace.accounts_file())?;
    let by_id: BTreeMap<u64, &AccountSnapshot> = accounts.iter().map(|a| (a.id, a)).collect();

    let user = *by_id.get(&options.user).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "no account snapshot for user {} in {}",
            options.user,
            workspace.accounts_file().display()
        ))
    })?;
    let friend_ids: BTreeSet<u64> = edges
        .iter()
        .filter(|(follower, _)| *follower == options.user)
        .map(|(_, friend)| *friend)
        .collect();
    if friend_ids.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "user {} follows no one in {}",
            options.user,
            workspace.edges_file.display()
        )));
    }
    // The friends we hold snapshots for; they double as the user's circle
    // for the refollow features.
    let circle: Vec<AccountSnapshot> = friend_ids
        .iter()
        .filter_map(|id| by_id.get(id))
        .map(|&a| a.clone())
        .collect();
    let uncaptured = friend_ids.len() - circle.len();

    let envelope = io::read_model(workspace.refollow_model_file())?;
    let mut friends = Vec::new();
    let mut skipped = 0usize;
    for snapshot in &circle {
        let searchable = snapshot.active && !snapshot.protected && snapshot.followers_count > 0;
        if !searchable {
            skipped += 1;
            continue;
        }
        let row = RefollowRow {
            user: user.clone(),
            user_friends: circle.clone(),
            friend: snapshot.clone(),
            // Interaction counts describe the vanished account's history
            // with the friend; the crawl has none, so they stay zero.
            mentions: 0,
            retweets: 0,
            replies: 0,
            response: None,
        };
        let phi = envelope.predict(&refollow_features(&row))?;
        friends.push(FriendSpec {
            id: snapshot.id,
            followers: snapshot.followers_count,
            phi,
        });
    }
    if friends.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "none of user {}'s {} captured friends are searchable \
             (need active, public, and at least one follower)",
            options.user,
            circle.len()
        )));
    }

    let instance = SearchInstance::new(friends, options.page_size, options.rho0, options.rho_bar)?;
    create_dir(&workspace.instances_dir)?;
    let path = workspace.instance_file(options.user);
    io::write_instance(&path, &instance)?;

    let headers = ["friend", "followers", "pages", "refollow p"];
    let rows: Vec<Vec<String>> = instance
        .friends()
        .iter()
        .map(|friend| {
            let pages = instance
                .pages(friend.id)
                .expect("friend ids come from the instance itself");
            vec![
                friend.id.to_string(),
                friend.followers.to_string(),
                pages.to_string(),
                format!("{:.4}", friend.phi),
            ]
        })
        .collect();
    render(out, format, &headers, &rows)?;
    writeln!(out).map_err(out_err)?;
    writeln!(
        out,
        "user {}: {} searchable friends ({} unsearchable, {} without snapshots); \
         {} queries to exhaustion",
        options.user,
        instance.len(),
        skipped,
        uncaptured,
        instance.total_queries()
    )
    .map_err(out_err)?;
    writeln!(out, "instance -> {}", path.display()).map_err(out_err)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// search

/// Options for [`cmd_search`].
#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Instance JSON to rank policies for.
    pub instance: PathBuf,
    /// Optional pinned ground truth; adds a realized-cost column.
    pub truth: Option<PathBuf>,
    /// Monte Carlo runs per table row.
    pub runs: u64,
    /// Size of the random-policy ensemble in the comparison row.
    pub random_draws: u64,
    /// Seed for simulations and the random ensemble.
    pub seed: u64,
}

impl SearchOptions {
    /// 10k runs, a 500-policy random ensemble, seed 0, no pinned truth.
    pub fn new(instance: impl Into<PathBuf>) -> Self {
        SearchOptions {
            instance: instance.into(),
            truth: None,
            runs: 10_000,
            random_draws: 500,
            seed: 0,
        }
    }
}

fn order_text(policy: &Policy) -> String {
    const SHOWN: usize = 12;
    let stages = policy.stages();
    let mut text = stages
        .iter()
        .take(SHOWN)
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    if stages.len() > SHOWN {
        text.push_str(&format!(",…(+{})", stages.len() - SHOWN));
    }
    text
}

/// Rank the named query policies (and a random-policy ensemble) on one
/// instance: analytic expected cost next to a seeded Monte Carlo estimate,
/// plus realized cost when a ground truth is pinned.
pub fn cmd_search(
    options: &SearchOptions,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    let instance = io::read_instance(&options.instance)?;
    let truth = options
        .truth
        .as_ref()
        .map(io::read_ground_truth)
        .transpose()?;

    let named: Vec<(String, PolicyReport)> = vec![
        ("optimal".into(), optimal_policy(&instance)),
        ("greedy".into(), greedy_policy(&instance)),
        ("min-n".into(), min_n_policy(&instance)),
        ("max-p".into(), max_p_policy(&instance)),
    ];

    let mut headers = vec!["policy", "order", "expected", "spread"];
    if truth.is_some() {
        headers.push("realized");
    }
    headers.extend(["sim mean", "sim se", "found"]);

    let mut rows = Vec::new();
    for (name, report) in &named {
        let sim_report = sim::simulate(&instance, &report.policy, options.runs, options.seed)?;
        let mut row = vec![
            name.clone(),
            order_text(&report.policy),
            format!("{:.4}", report.expected_cost),
            "-".to_string(),
        ];
        if let Some(truth) = &truth {
            row.push(format!(
                "{:.4}",
                actual_cost(&instance, &report.policy, truth)?
            ));
        }
        row.extend(simulation_cells(&sim_report));
        rows.push(row);
    }

    if options.random_draws > 0 {
        let reports: Vec<PolicyReport> = (0..options.random_draws)
            .map(|draw| random_policy(&instance, options.seed.wrapping_add(draw)))
            .collect();
        let costs: Vec<f64> = reports.iter().map(|r| r.expected_cost).collect();
        let mean = costs.iter().sum::<f64>() / costs.len() as f64;
        let spread = if costs.len() > 1 {
            (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (costs.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        let policies: Vec<Policy> = reports.into_iter().map(|r| r.policy).collect();
        // Run r of the pooled simulation executes policy r mod K, so the
        // estimate matches "draw a random policy, then search".
        let sim_report = sim::simulate_mixture(&instance, &policies, options.runs, options.seed)?;
        let mut row = vec![
            format!("random x{}", options.random_draws),
            "-".to_string(),
            format!("{mean:.4}"),
            format!("{spread:.4}"),
        ];
        if let Some(truth) = &truth {
            let mut total = 0.0;
            for policy in &policies {
                total += actual_cost(&instance, policy, truth)?;
            }
            row.push(format!("{:.4}", total / policies.len() as f64));
        }
        row.extend(simulation_cells(&sim_report));
        rows.push(row);
    }

    render(out, format, &headers, &rows)?;
    writeln!(out).map_err(out_err)?;
    writeln!(
        out,
        "{} friends, {} queries to exhaustion; {} runs per row at seed {}; \
         spread is the sd of expected cost across the random draws",
        instance.len(),
        instance.total_queries(),
        options.runs,
        options.seed
    )
    .map_err(out_err)?;
    Ok(())
}

fn simulation_cells(report: &sim::SimReport) -> Vec<String> {
    vec![
        format!("{:.4}", report.mean_unsuccessful_queries),
        format!("{:.4}", report.std_error),
        format!(
            "{:.1}%",
            100.0 * report.terminations.found as f64 / report.runs as f64
        ),
    ]
}

// ---------------------------------------------------------------------------
// simulate

/// Options for [`cmd_simulate`].
#[derive(Debug, Clone)]
pub struct SimulateOptions {
    /// Instance JSON to simulate on.
    pub instance: PathBuf,
    /// Policy JSON (a bare id array); `None` uses the optimal policy.
    pub policy: Option<PathBuf>,
    /// Optional pinned ground truth: existence and refollows fixed, only the
    /// account's position within follower lists stays random.
    pub truth: Option<PathBuf>,
    /// Monte Carlo runs.
    pub runs: u64,
    /// Simulation seed.
    pub seed: u64,
    /// Report destination; `None` means `reports/simulation.json`.
    pub report: Option<PathBuf>,
}

impl SimulateOptions {
    /// 10k runs of the optimal policy at seed 0, all worlds random.
    pub fn new(instance: impl Into<PathBuf>) -> Self {
        SimulateOptions {
            instance: instance.into(),
            policy: None,
            truth: None,
            runs: 10_000,
            seed: 0,
            report: None,
        }
    }
}

/// Simulate one policy on one instance and write the summary JSON report.
pub fn cmd_simulate(
    workspace: &Workspace,
    options: &SimulateOptions,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    let instance = io::read_instance(&options.instance)?;
    let (policy, origin) = match &options.policy {
        Some(path) => (io::read_policy(path)?, path.display().to_string()),
        None => (optimal_policy(&instance).policy, "optimal".to_string()),
    };
    let expected = expected_cost(&instance, &policy)?;
    let truth = options
        .truth
        .as_ref()
        .map(io::read_ground_truth)
        .transpose()?;

    let report = match &truth {
        Some(truth) => {
            sim::simulate_given_truth(&instance, &policy, truth, options.runs, options.seed)?
        }
        None => sim::simulate(&instance, &policy, options.runs, options.seed)?,
    };

    let path = options
        .report
        .clone()
        .unwrap_or_else(|| workspace.reports_dir.join("simulation.json"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            create_dir(parent)?;
        }
    }
    io::write_sim_report(&path, &report)?;

    let mut rows = vec![
        vec!["policy".to_string(), origin],
        vec!["order".to_string(), order_text(&policy)],
        vec!["runs".to_string(), report.runs.to_string()],
        vec!["seed".to_string(), report.seed.to_string()],
        vec!["rng".to_string(), report.rng.clone()],
        vec!["expected cost".to_string(), format!("{expected:.4}")],
    ];
    if let Some(truth) = &truth {
        rows.push(vec![
            "realized cost".to_string(),
            format!("{:.4}", actual_cost(&instance, &policy, truth)?),
        ]);
    }
    rows.extend([
        vec![
            "simulated mean".to_string(),
            format!("{:.4}", report.mean_unsuccessful_queries),
        ],
        vec!["std error".to_string(), format!("{:.4}", report.std_error)],
        vec!["found".to_string(), report.terminations.found.to_string()],
        vec![
            "stopped early".to_string(),
            report.terminations.below_threshold.to_string(),
        ],
        vec![
            "exhausted".to_string(),
            report.terminations.exhausted.to_string(),
        ],
    ]);
    render(out, format, &["metric", "value"], &rows)?;
    writeln!(out).map_err(out_err)?;
    writeln!(out, "report -> {}", path.display()).map_err(out_err)?;
    Ok(())
}
