//! File formats: images, line-oriented corpora, CSV tables, and JSON
//! envelopes.
//!
//! Every writer goes through an atomic temp-file-then-rename, so a crash or
//! two racing processes never leave a half-written file behind. Every
//! line-oriented reader reports failures as `path:line: message`.
//!
//! The formats:
//!
//! * **PGM images** ([`pgm`]) — 8-bit grayscale, `P2` or `P5`.
//! * **Profiles** — JSON lines, one profile per line, with image fields
//!   holding `null` or a path relative to the JSONL file (forward slashes).
//! * **Follow edges** — CSV `follower_id,friend_id`, header optional.
//! * **Account snapshots** — JSON lines of [`AccountSnapshot`]; by
//!   convention they ride next to an edges file as `<stem>.accounts.jsonl`.
//! * **Search instances, ground truths, reports** — single JSON documents.
//! * **Feature tables** — CSV whose header names the feature columns, with
//!   the reserved names `label` and `cluster` split out on read.
//! * **Model envelopes** — versioned JSON carrying either a linear or a
//!   kernel model plus its feature names, normalization, and threshold. The
//!   envelope records the score sign convention and refuses to load a file
//!   whose convention this build does not share.

pub mod pgm;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::{AccountSnapshot, ZScore};
use crate::learn::{dot, quadratic_kernel, sigmoid, Dataset, KernelModel, LinearModel};
use crate::profile::cluster::SweepPoint;
use crate::profile::matching::ProfileRecord;
use crate::profile::raster::Raster;
use crate::search::model::{Policy, SearchInstance};
use crate::search::policy::{GroundTruth, PolicyReport};
use crate::search::sim::SimReport;

pub use pgm::{read_pgm, write_pgm};

/// Write `bytes` to `path` atomically: a temp file in the same directory is
/// written in full, then renamed over the target.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut file = tempfile::NamedTempFile::new_in(parent).map_err(|e| Error::io(path, e))?;
    file.write_all(bytes).map_err(|e| Error::io(path, e))?;
    file.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut items = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, index + 1, e.to_string()))?;
        items.push(item);
    }
    Ok(items)
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut text = String::new();
    for item in items {
        text += &serde_json::to_string(item).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

// ---------------------------------------------------------------------------
// Profiles

/// One line of a profiles JSONL file: the raster fields hold relative paths.
#[derive(Serialize, Deserialize)]
struct ProfileLine {
    user_id: String,
    screen_name: String,
    name: String,
    profile_image: Option<String>,
    banner_image: Option<String>,
}

/// Read a profiles JSONL file, loading referenced images relative to the
/// file's directory.
///
/// # Errors
///
/// [`Error::Parse`] with the line number for malformed JSON; image loading
/// failures propagate with the image path.
pub fn read_profiles(path: impl AsRef<Path>) -> Result<Vec<ProfileRecord>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let lines: Vec<ProfileLine> = read_jsonl(path)?;
    let load = |relative: &Option<String>| -> Result<Option<Raster>> {
        match relative {
            None => Ok(None),
            Some(relative) => Ok(Some(pgm::read_pgm(base.join(relative))?)),
        }
    };
    lines
        .iter()
        .map(|line| {
            Ok(ProfileRecord {
                user_id: line.user_id.clone(),
                screen_name: line.screen_name.clone(),
                name: line.name.clone(),
                profile_image: load(&line.profile_image)?,
                banner_image: load(&line.banner_image)?,
            })
        })
        .collect()
}

fn sanitize_for_filename(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

/// Write profiles as JSONL next to an `images/` directory holding their
/// rasters as PGM (named `<user_id>_profile.pgm` / `<user_id>_banner.pgm`).
///
/// # Errors
///
/// I/O failures writing the JSONL or any image.
pub fn write_profiles(path: impl AsRef<Path>, profiles: &[ProfileRecord]) -> Result<()> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or(Path::new("."));
    let images = Path::new("images");
    if profiles
        .iter()
        .any(|p| p.profile_image.is_some() || p.banner_image.is_some())
    {
        fs::create_dir_all(base.join(images)).map_err(|e| Error::io(base.join(images), e))?;
    }
    let mut lines = Vec::with_capacity(profiles.len());
    for profile in profiles {
        let save = |raster: &Option<Raster>, suffix: &str| -> Result<Option<String>> {
            match raster {
                None => Ok(None),
                Some(raster) => {
                    let name = format!("{}_{suffix}.pgm", sanitize_for_filename(&profile.user_id));
                    pgm::write_pgm(base.join(images).join(&name), raster)?;
                    Ok(Some(format!("images/{name}")))
                }
            }
        };
        let profile_image = save(&profile.profile_image, "profile")?;
        let banner_image = save(&profile.banner_image, "banner")?;
        lines.push(ProfileLine {
            user_id: profile.user_id.clone(),
            screen_name: profile.screen_name.clone(),
            name: profile.name.clone(),
            profile_image,
            banner_image,
        });
    }
    write_jsonl(path, &lines)
}

// ---------------------------------------------------------------------------
// Follow edges and account snapshots

/// Read `follower_id,friend_id` CSV edges. A first row exactly matching the
/// header is skipped; otherwise all rows are data.
///
/// # Errors
///
/// [`Error::Parse`] with the line number for rows that are not two integer
/// columns.
pub fn read_edges(path: impl AsRef<Path>) -> Result<Vec<(u64, u64)>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?;
    let mut edges = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?;
        let line = record
            .position()
            .map_or(index + 1, |p| p.line() as usize);
        if index == 0 && record.len() == 2 && &record[0] == "follower_id" && &record[1] == "friend_id"
        {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 2 columns, got {}", record.len()),
            ));
        }
        let parse = |column: usize, name: &str| -> Result<u64> {
            record[column].parse().map_err(|_| {
                Error::parse(
                    path,
                    line,
                    format!("{name} must be an integer, got {:?}", &record[column]),
                )
            })
        };
        edges.push((parse(0, "follower_id")?, parse(1, "friend_id")?));
    }
    Ok(edges)
}

/// Write edges as CSV with the standard header.
pub fn write_edges(path: impl AsRef<Path>, edges: &[(u64, u64)]) -> Result<()> {
    let mut text = String::from("follower_id,friend_id\n");
    for (follower, friend) in edges {
        text += &format!("{follower},{friend}\n");
    }
    write_atomic(path.as_ref(), text.as_bytes())
}

/// Read an account-snapshot JSONL file.
pub fn read_accounts(path: impl AsRef<Path>) -> Result<Vec<AccountSnapshot>> {
    read_jsonl(path.as_ref())
}

/// Write account snapshots as JSONL.
pub fn write_accounts(path: impl AsRef<Path>, accounts: &[AccountSnapshot]) -> Result<()> {
    write_jsonl(path.as_ref(), accounts)
}

/// Conventional location of the snapshot sidecar for an edges file:
/// `edges.csv` → `edges.accounts.jsonl`.
pub fn default_accounts_path(edges_path: &Path) -> PathBuf {
    edges_path.with_extension("accounts.jsonl")
}

// ---------------------------------------------------------------------------
// Search instances, ground truth, and reports

/// Read a search instance JSON file (validated on load).
pub fn read_instance(path: impl AsRef<Path>) -> Result<SearchInstance> {
    read_json(path.as_ref())
}

/// Write a search instance as JSON.
pub fn write_instance(path: impl AsRef<Path>, instance: &SearchInstance) -> Result<()> {
    write_json(path.as_ref(), instance)
}

/// Read a policy JSON file: a bare array of friend ids in query order, e.g.
/// `[2, 0, 0, 1]`. Validity against a particular instance is checked by the
/// consumer, not here.
pub fn read_policy(path: impl AsRef<Path>) -> Result<Policy> {
    read_json(path.as_ref())
}

/// Write a policy as JSON (a bare array of friend ids).
pub fn write_policy(path: impl AsRef<Path>, policy: &Policy) -> Result<()> {
    write_json(path.as_ref(), policy)
}

/// Read a ground-truth JSON file.
pub fn read_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    read_json(path.as_ref())
}

/// Write a ground truth as JSON.
pub fn write_ground_truth(path: impl AsRef<Path>, truth: &GroundTruth) -> Result<()> {
    write_json(path.as_ref(), truth)
}

/// Write a policy report as JSON.
///
/// # Errors
///
/// [`Error::Unserializable`] when the expected cost or any trace entry is
/// non-finite — JSON has no representation for those, and silently writing
/// `null` would corrupt the round trip.
pub fn write_policy_report(path: impl AsRef<Path>, report: &PolicyReport) -> Result<()> {
    if !report.expected_cost.is_finite() {
        return Err(Error::Unserializable(format!(
            "expected cost {}",
            report.expected_cost
        )));
    }
    if let Some(trace) = &report.gamma_trace {
        if trace.iter().any(|g| !g.is_finite()) {
            return Err(Error::Unserializable(
                "priority trace contains a non-finite value".into(),
            ));
        }
    }
    write_json(path.as_ref(), report)
}

/// Read a policy report JSON file.
pub fn read_policy_report(path: impl AsRef<Path>) -> Result<PolicyReport> {
    read_json(path.as_ref())
}

/// Write a simulation report as JSON.
pub fn write_sim_report(path: impl AsRef<Path>, report: &SimReport) -> Result<()> {
    write_json(path.as_ref(), report)
}

/// Read a simulation report JSON file.
pub fn read_sim_report(path: impl AsRef<Path>) -> Result<SimReport> {
    read_json(path.as_ref())
}

// ---------------------------------------------------------------------------
// Feature tables

/// A feature matrix with optional `label` and `cluster` columns, as stored
/// in CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    /// Feature column names, in file order (reserved columns excluded).
    pub feature_names: Vec<String>,
    /// One row of feature values per record.
    pub rows: Vec<Vec<f64>>,
    /// The `label` column, if the file had one.
    pub labels: Option<Vec<f64>>,
    /// The `cluster` column (grouping key for leakage-free splits), if any.
    pub clusters: Option<Vec<u64>>,
}

impl FeatureTable {
    /// Number of rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Whether the table has no rows.
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Convert to a training [`Dataset`].
    ///
    /// # Errors
    ///
    /// [`Error::InvalidDataset`] when there is no label column, plus
    /// whatever [`Dataset::new`] rejects.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let Some(labels) = &self.labels else {
            return Err(Error::InvalidDataset(
                "feature table has no label column".into(),
            ));
        };
        Dataset::new(self.rows.clone(), labels.clone())
    }
}

/// Read a feature-table CSV. The header row names the columns; `label` and
/// `cluster` are reserved and split out, everything else is a feature.
///
/// # Errors
///
/// [`Error::Parse`] with the line number for non-numeric cells, wrong column
/// counts, or duplicate reserved columns; a missing header line is an error.
pub fn read_feature_table(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?;
    let mut records = reader.records();
    let Some(header) = records.next() else {
        return Err(Error::parse(path, 1, "missing header row"));
    };
    let header = header.map_err(|e| Error::Csv {
        path: path.into(),
        source: e,
    })?;

    let mut label_column = None;
    let mut cluster_column = None;
    let mut feature_names = Vec::new();
    let mut feature_columns = Vec::new();
    for (column, name) in header.iter().enumerate() {
        match name {
            "label" => {
                if label_column.replace(column).is_some() {
                    return Err(Error::parse(path, 1, "duplicate label column"));
                }
            }
            "cluster" => {
                if cluster_column.replace(column).is_some() {
                    return Err(Error::parse(path, 1, "duplicate cluster column"));
                }
            }
            _ => {
                feature_names.push(name.to_string());
                feature_columns.push(column);
            }
        }
    }

    let mut rows = Vec::new();
    let mut labels = label_column.map(|_| Vec::new());
    let mut clusters = cluster_column.map(|_| Vec::new());
    for (index, record) in records.enumerate() {
        let record = record.map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?;
        let line = record
            .position()
            .map_or(index + 2, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} columns, got {}", header.len(), record.len()),
            ));
        }
        let numeric = |column: usize| -> Result<f64> {
            record[column].parse().map_err(|_| {
                Error::parse(
                    path,
                    line,
                    format!(
                        "column {:?} must be numeric, got {:?}",
                        &header[column], &record[column]
                    ),
                )
            })
        };
        rows.push(
            feature_columns
                .iter()
                .map(|&column| numeric(column))
                .collect::<Result<Vec<f64>>>()?,
        );
        if let (Some(labels), Some(column)) = (labels.as_mut(), label_column) {
            labels.push(numeric(column)?);
        }
        if let (Some(clusters), Some(column)) = (clusters.as_mut(), cluster_column) {
            clusters.push(record[column].parse().map_err(|_| {
                Error::parse(
                    path,
                    line,
                    format!("column \"cluster\" must be an integer, got {:?}", &record[column]),
                )
            })?);
        }
    }

    Ok(FeatureTable {
        feature_names,
        rows,
        labels,
        clusters,
    })
}

/// Write a feature table as CSV (feature columns first, then `label` and
/// `cluster` when present).
///
/// # Errors
///
/// [`Error::InvalidDataset`] when row widths or column lengths disagree;
/// [`Error::Unserializable`] for non-finite values.
pub fn write_feature_table(path: impl AsRef<Path>, table: &FeatureTable) -> Result<()> {
    let path = path.as_ref();
    let width = table.feature_names.len();
    if table.rows.iter().any(|row| row.len() != width) {
        return Err(Error::InvalidDataset(
            "feature rows must match the feature-name count".into(),
        ));
    }
    if let Some(labels) = &table.labels {
        if labels.len() != table.rows.len() {
            return Err(Error::InvalidDataset(
                "label column length must match the row count".into(),
            ));
        }
    }
    if let Some(clusters) = &table.clusters {
        if clusters.len() != table.rows.len() {
            return Err(Error::InvalidDataset(
                "cluster column length must match the row count".into(),
            ));
        }
    }
    let all_finite = table
        .rows
        .iter()
        .flatten()
        .chain(table.labels.iter().flatten())
        .all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::Unserializable(
            "feature table contains a non-finite value".into(),
        ));
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = table.feature_names.clone();
    if table.labels.is_some() {
        header.push("label".into());
    }
    if table.clusters.is_some() {
        header.push("cluster".into());
    }
    writer.write_record(&header).map_err(|e| Error::Csv {
        path: path.into(),
        source: e,
    })?;
    for (index, row) in table.rows.iter().enumerate() {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(labels) = &table.labels {
            record.push(labels[index].to_string());
        }
        if let Some(clusters) = &table.clusters {
            record.push(clusters[index].to_string());
        }
        writer.write_record(&record).map_err(|e| Error::Csv {
            path: path.into(),
            source: e,
        })?;
    }
    let bytes = writer
        .into_inner()
        .expect("flushing an in-memory CSV buffer cannot fail");
    write_atomic(path, &bytes)
}

// ---------------------------------------------------------------------------
// Threshold sweeps

const SWEEP_HEADER: &str = "threshold,connected_accounts,giant_component,average_clustering";

/// Write threshold-sweep points as CSV.
pub fn write_sweep(path: impl AsRef<Path>, points: &[SweepPoint]) -> Result<()> {
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for point in points {
        text += &format!(
            "{},{},{},{}\n",
            point.threshold, point.connected_accounts, point.giant_component, point.average_clustering
        );
    }
    write_atomic(path.as_ref(), text.as_bytes())
}

/// Read a threshold-sweep CSV written by [`write_sweep`].
///
/// # Errors
///
/// [`Error::Parse`] with the line number for a wrong header or malformed
/// rows.
pub fn read_sweep(path: impl AsRef<Path>) -> Result<Vec<SweepPoint>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == SWEEP_HEADER => {}
        Some((_, header)) => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header {SWEEP_HEADER:?}, got {header:?}"),
            ))
        }
        None => return Err(Error::parse(path, 1, "empty sweep file")),
    }
    let mut points = Vec::new();
    for (index, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let line_number = index + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 4 {
            return Err(Error::parse(
                path,
                line_number,
                format!("expected 4 columns, got {}", cells.len()),
            ));
        }
        let bad = |what: &str, cell: &str| {
            Error::parse(path, line_number, format!("{what} must be numeric, got {cell:?}"))
        };
        points.push(SweepPoint {
            threshold: cells[0].trim().parse().map_err(|_| bad("threshold", cells[0]))?,
            connected_accounts: cells[1]
                .trim()
                .parse()
                .map_err(|_| bad("connected_accounts", cells[1]))?,
            giant_component: cells[2]
                .trim()
                .parse()
                .map_err(|_| bad("giant_component", cells[2]))?,
            average_clustering: cells[3]
                .trim()
                .parse()
                .map_err(|_| bad("average_clustering", cells[3]))?,
        });
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// Model envelopes

/// Envelope format version this build reads and writes.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Score sign convention recorded in every envelope: larger scores mean the
/// positive class, `P(+1) = sigmoid(score)`.
pub const SIGN_CONVENTION: &str = "positive-score-is-positive-class";

/// The model payload inside an envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// A sparse linear classifier.
    Linear {
        intercept: f64,
        coefficients: Vec<f64>,
    },
    /// A kernel classifier over stored support points.
    Kernel {
        alphas: Vec<f64>,
        support_points: Vec<Vec<f64>>,
    },
}

/// A trained classifier with everything needed to apply it: feature names
/// (order matters), optional normalization, optional decision threshold, and
/// the training penalty for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEnvelope {
    /// Always [`MODEL_FORMAT_VERSION`] for files this build writes.
    pub format_version: u32,
    /// Always [`SIGN_CONVENTION`]; checked on load.
    pub sign_convention: String,
    /// Penalty weight the model was trained with.
    pub lambda: f64,
    /// Expected feature columns, in scoring order.
    pub feature_names: Vec<String>,
    /// Per-column standardization to apply before scoring, if the model was
    /// trained on standardized features.
    pub normalization: Option<ZScore>,
    /// Classification cutoff on the probability, if one was chosen.
    pub threshold: Option<f64>,
    /// The trained parameters.
    pub model: ModelKind,
}

impl ModelEnvelope {
    /// Wrap a linear model.
    pub fn linear(
        model: &LinearModel,
        lambda: f64,
        feature_names: Vec<String>,
        normalization: Option<ZScore>,
        threshold: Option<f64>,
    ) -> Self {
        ModelEnvelope {
            format_version: MODEL_FORMAT_VERSION,
            sign_convention: SIGN_CONVENTION.into(),
            lambda,
            feature_names,
            normalization,
            threshold,
            model: ModelKind::Linear {
                intercept: model.intercept,
                coefficients: model.coefficients.clone(),
            },
        }
    }

    /// Wrap a kernel model (the penalty rides along inside the model).
    pub fn kernel(
        model: &KernelModel,
        feature_names: Vec<String>,
        normalization: Option<ZScore>,
        threshold: Option<f64>,
    ) -> Self {
        ModelEnvelope {
            format_version: MODEL_FORMAT_VERSION,
            sign_convention: SIGN_CONVENTION.into(),
            lambda: model.lambda,
            feature_names,
            normalization,
            threshold,
            model: ModelKind::Kernel {
                alphas: model.alphas.clone(),
                support_points: model.support_points.clone(),
            },
        }
    }

    /// Feature width the envelope expects.
    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::UnsupportedModel(format!(
                "format_version {} (this build reads {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.sign_convention != SIGN_CONVENTION {
            return Err(Error::UnsupportedModel(format!(
                "sign_convention {:?} (this build uses {SIGN_CONVENTION:?})",
                self.sign_convention
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::UnsupportedModel(format!(
                "penalty weight {} is not a finite non-negative number",
                self.lambda
            )));
        }
        if let Some(threshold) = self.threshold {
            if !threshold.is_finite() {
                return Err(Error::UnsupportedModel(
                    "threshold is not finite".into(),
                ));
            }
        }
        let width = self.feature_names.len();
        match &self.model {
            ModelKind::Linear { coefficients, .. } => {
                if coefficients.len() != width {
                    return Err(Error::UnsupportedModel(format!(
                        "{} coefficients but {width} feature names",
                        coefficients.len()
                    )));
                }
            }
            ModelKind::Kernel {
                alphas,
                support_points,
            } => {
                if alphas.len() != support_points.len() {
                    return Err(Error::UnsupportedModel(format!(
                        "{} alphas but {} support points",
                        alphas.len(),
                        support_points.len()
                    )));
                }
                if support_points.iter().any(|p| p.len() != width) {
                    return Err(Error::UnsupportedModel(format!(
                        "support points must match the {width} feature names"
                    )));
                }
            }
        }
        if let Some(normalization) = &self.normalization {
            if normalization.means.len() != width || normalization.stds.len() != width {
                return Err(Error::UnsupportedModel(format!(
                    "normalization width {} does not match the {width} feature names",
                    normalization.means.len()
                )));
            }
        }
        Ok(())
    }

    /// Extract the linear model.
    ///
    /// # Errors
    ///
    /// [`Error::UnsupportedModel`] when the envelope holds a kernel model.
    pub fn to_linear(&self) -> Result<LinearModel> {
        match &self.model {
            ModelKind::Linear {
                intercept,
                coefficients,
            } => Ok(LinearModel {
                coefficients: coefficients.clone(),
                intercept: *intercept,
            }),
            ModelKind::Kernel { .. } => Err(Error::UnsupportedModel(
                "expected a linear model, found a kernel model".into(),
            )),
        }
    }

    /// Extract the kernel model.
    ///
    /// # Errors
    ///
    /// [`Error::UnsupportedModel`] when the envelope holds a linear model.
    pub fn to_kernel(&self) -> Result<KernelModel> {
        match &self.model {
            ModelKind::Kernel {
                alphas,
                support_points,
            } => Ok(KernelModel {
                alphas: alphas.clone(),
                support_points: support_points.clone(),
                lambda: self.lambda,
            }),
            ModelKind::Linear { .. } => Err(Error::UnsupportedModel(
                "expected a kernel model, found a linear model".into(),
            )),
        }
    }

    /// Score raw (unnormalized) features: applies the envelope's
    /// normalization, then the model, returning `P(+1)`.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] when the feature count is wrong.
    pub fn predict(&self, raw_features: &[f64]) -> Result<f64> {
        if raw_features.len() != self.width() {
            return Err(Error::InvalidArgument(format!(
                "model expects {} features, got {}",
                self.width(),
                raw_features.len()
            )));
        }
        let row = match &self.normalization {
            Some(stats) => stats.apply(raw_features),
            None => raw_features.to_vec(),
        };
        let score = match &self.model {
            ModelKind::Linear {
                intercept,
                coefficients,
            } => dot(coefficients, &row) + intercept,
            ModelKind::Kernel {
                alphas,
                support_points,
            } => alphas
                .iter()
                .zip(support_points)
                .map(|(&alpha, point)| alpha * quadratic_kernel(point, &row))
                .sum(),
        };
        Ok(sigmoid(score))
    }
}

/// Read and validate a model envelope.
///
/// # Errors
///
/// [`Error::UnsupportedModel`] for version/convention mismatches or
/// internally inconsistent envelopes, besides the usual I/O and JSON errors.
pub fn read_model(path: impl AsRef<Path>) -> Result<ModelEnvelope> {
    let envelope: ModelEnvelope = read_json(path.as_ref())?;
    envelope.validate()?;
    Ok(envelope)
}

/// Validate and write a model envelope as JSON.
pub fn write_model(path: impl AsRef<Path>, envelope: &ModelEnvelope) -> Result<()> {
    envelope.validate()?;
    write_json(path.as_ref(), envelope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::model::{FriendSpec, Policy};
    use approx::assert_relative_eq;

    fn tempdir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn checker_raster() -> Raster {
        let pixels: Vec<u8> = (0..64u32)
            .map(|i| if (i / 8 + i % 8) % 2 == 0 { 200 } else { 30 })
            .collect();
        Raster::new(8, 8, pixels).unwrap()
    }

    #[test]
    fn profiles_round_trip_including_images() {
        let dir = tempdir();
        let path = dir.path().join("profiles.jsonl");
        let profiles = vec![
            ProfileRecord {
                user_id: "1001".into(),
                screen_name: "colonel_shaami".into(),
                name: "Colonel Shaami".into(),
                profile_image: Some(checker_raster()),
                banner_image: Some(checker_raster()),
            },
            ProfileRecord {
                user_id: "1002".into(),
                screen_name: "other".into(),
                name: "Someone Else".into(),
                profile_image: None,
                banner_image: None,
            },
        ];
        write_profiles(&path, &profiles).unwrap();
        assert!(dir.path().join("images/1001_profile.pgm").exists());
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"images/1001_profile.pgm\""), "{text}");
        assert_eq!(read_profiles(&path).unwrap(), profiles);
    }

    #[test]
    fn profiles_parse_error_carries_line_number() {
        let dir = tempdir();
        let path = dir.path().join("profiles.jsonl");
        let good = r#"{"user_id":"1","screen_name":"a","name":"A","profile_image":null,"banner_image":null}"#;
        fs::write(&path, format!("{good}\n\nnot json\n")).unwrap();
        let err = read_profiles(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn profiles_missing_image_file_is_an_io_error() {
        let dir = tempdir();
        let path = dir.path().join("profiles.jsonl");
        let line = r#"{"user_id":"1","screen_name":"a","name":"A","profile_image":"images/gone.pgm","banner_image":null}"#;
        fs::write(&path, format!("{line}\n")).unwrap();
        let err = read_profiles(&path).unwrap_err();
        assert!(matches!(err, Error::Io { .. }), "{err}");
        assert!(err.to_string().contains("gone.pgm"));
    }

    #[test]
    fn edges_round_trip_and_optional_header() {
        let dir = tempdir();
        let path = dir.path().join("edges.csv");
        let edges = vec![(1, 2), (1, 3), (4, 1)];
        write_edges(&path, &edges).unwrap();
        assert_eq!(read_edges(&path).unwrap(), edges);
        // Headerless files read identically.
        fs::write(&path, "1,2\n1,3\n4,1\n").unwrap();
        assert_eq!(read_edges(&path).unwrap(), edges);
    }

    #[test]
    fn edges_bad_row_reports_its_line() {
        let dir = tempdir();
        let path = dir.path().join("edges.csv");
        fs::write(&path, "follower_id,friend_id\n1,2\nx,3\n").unwrap();
        let err = read_edges(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        fs::write(&path, "1,2,3\n").unwrap();
        assert!(read_edges(&path).is_err());
    }

    #[test]
    fn accounts_round_trip_and_sidecar_convention() {
        let dir = tempdir();
        let path = dir.path().join("edges.accounts.jsonl");
        let mut account = AccountSnapshot::new(9);
        account.language = "tr".into();
        account.follows.insert(4);
        write_accounts(&path, &[account.clone()]).unwrap();
        assert_eq!(read_accounts(&path).unwrap(), vec![account]);
        assert_eq!(
            default_accounts_path(Path::new("data/edges.csv")),
            Path::new("data/edges.accounts.jsonl")
        );
    }

    #[test]
    fn instance_round_trip_and_validation_on_read() {
        let dir = tempdir();
        let path = dir.path().join("instance.json");
        let instance = SearchInstance::new(
            vec![
                FriendSpec {
                    id: 1,
                    followers: 6000,
                    phi: 0.5,
                },
                FriendSpec {
                    id: 2,
                    followers: 400,
                    phi: 0.9,
                },
            ],
            5000,
            0.7,
            0.0,
        )
        .unwrap();
        write_instance(&path, &instance).unwrap();
        assert_eq!(read_instance(&path).unwrap(), instance);

        fs::write(
            &path,
            r#"{"friends":[{"id":1,"followers":10,"phi":2.0}],"page_size":5000,"rho0":0.5,"rho_bar":0.0}"#,
        )
        .unwrap();
        let err = read_instance(&path).unwrap_err();
        assert!(matches!(err, Error::Json { .. }), "{err}");
        assert!(err.to_string().contains("[0, 1]"), "{err}");
    }

    #[test]
    fn ground_truth_and_reports_round_trip() {
        let dir = tempdir();
        let truth_path = dir.path().join("truth.json");
        let truth = GroundTruth::present([2]);
        write_ground_truth(&truth_path, &truth).unwrap();
        assert_eq!(read_ground_truth(&truth_path).unwrap(), truth);

        let report_path = dir.path().join("report.json");
        let report = PolicyReport {
            policy: Policy(vec![2, 1, 1]),
            expected_cost: 0.375,
            gamma_trace: Some(vec![0.1, 0.5, 0.9]),
        };
        write_policy_report(&report_path, &report).unwrap();
        assert_eq!(read_policy_report(&report_path).unwrap(), report);

        let policy_path = dir.path().join("policy.json");
        write_policy(&policy_path, &report.policy).unwrap();
        assert_eq!(read_policy(&policy_path).unwrap(), report.policy);
        // A policy file is a bare id array, usable straight from a text editor.
        let raw = std::fs::read_to_string(&policy_path).unwrap();
        assert_eq!(raw.trim(), "[\n  2,\n  1,\n  1\n]");
    }

    #[test]
    fn non_finite_trace_refuses_to_serialize() {
        let dir = tempdir();
        let report = PolicyReport {
            policy: Policy(vec![1]),
            expected_cost: 0.5,
            gamma_trace: Some(vec![f64::INFINITY]),
        };
        let err = write_policy_report(dir.path().join("report.json"), &report).unwrap_err();
        assert!(matches!(err, Error::Unserializable(_)), "{err}");
    }

    #[test]
    fn feature_table_round_trip_with_reserved_columns() {
        let dir = tempdir();
        let path = dir.path().join("features.csv");
        let table = FeatureTable {
            feature_names: vec!["alpha".into(), "beta".into()],
            rows: vec![vec![0.5, -1.25], vec![3.0, 0.0]],
            labels: Some(vec![1.0, 0.0]),
            clusters: Some(vec![7, 7]),
        };
        write_feature_table(&path, &table).unwrap();
        let back = read_feature_table(&path).unwrap();
        assert_eq!(back, table);
        let dataset = back.to_dataset().unwrap();
        assert_eq!(dataset.labels(), &[1.0, -1.0]);
    }

    #[test]
    fn feature_table_without_label_cannot_become_a_dataset() {
        let table = FeatureTable {
            feature_names: vec!["alpha".into()],
            rows: vec![vec![1.0]],
            labels: None,
            clusters: None,
        };
        assert!(matches!(
            table.to_dataset(),
            Err(Error::InvalidDataset(_))
        ));
    }

    #[test]
    fn feature_table_parse_errors_carry_lines() {
        let dir = tempdir();
        let path = dir.path().join("features.csv");
        fs::write(&path, "alpha,label\n1.0,1\nnope,0\n").unwrap();
        let err = read_feature_table(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        fs::write(&path, "alpha,label\n1.0\n").unwrap();
        assert!(read_feature_table(&path).is_err());
        fs::write(&path, "label,label\n").unwrap();
        assert!(read_feature_table(&path).is_err());
    }

    #[test]
    fn sweep_round_trip() {
        let dir = tempdir();
        let path = dir.path().join("sweep.csv");
        let points = vec![
            SweepPoint {
                threshold: 0.5,
                connected_accounts: 10,
                giant_component: 4,
                average_clustering: 0.75,
            },
            SweepPoint {
                threshold: 0.9,
                connected_accounts: 2,
                giant_component: 2,
                average_clustering: 0.0,
            },
        ];
        write_sweep(&path, &points).unwrap();
        assert_eq!(read_sweep(&path).unwrap(), points);
        fs::write(&path, "wrong,header\n").unwrap();
        assert!(matches!(
            read_sweep(&path),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn linear_envelope_round_trip_and_prediction() {
        let dir = tempdir();
        let path = dir.path().join("model.json");
        let model = LinearModel {
            coefficients: vec![1.5],
            intercept: -1.0,
        };
        let normalization = ZScore {
            means: vec![1.0],
            stds: vec![1.0],
        };
        let envelope = ModelEnvelope::linear(
            &model,
            0.25,
            vec!["alpha".into()],
            Some(normalization),
            Some(0.5),
        );
        write_model(&path, &envelope).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back, envelope);
        assert_eq!(back.to_linear().unwrap(), model);
        assert!(back.to_kernel().is_err());
        // Raw 3.0 standardizes to 2.0; score 1.5*2 - 1 = 2.
        assert_relative_eq!(back.predict(&[3.0]).unwrap(), sigmoid(2.0));
        assert!(back.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn kernel_envelope_round_trip() {
        let dir = tempdir();
        let path = dir.path().join("model.json");
        let model = KernelModel {
            alphas: vec![0.5, -0.25],
            support_points: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            lambda: 0.1,
        };
        let envelope =
            ModelEnvelope::kernel(&model, vec!["a".into(), "b".into()], None, None);
        write_model(&path, &envelope).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(back.to_kernel().unwrap(), model);
        // Score at (1, 0): 0.5*K([1,0],[1,0]) - 0.25*K([0,1],[1,0]) = 0.5*4 - 0.25*1.
        assert_relative_eq!(back.predict(&[1.0, 0.0]).unwrap(), sigmoid(1.75));
    }

    #[test]
    fn envelope_rejects_wrong_version_convention_or_widths() {
        let dir = tempdir();
        let path = dir.path().join("model.json");
        let model = LinearModel {
            coefficients: vec![1.0],
            intercept: 0.0,
        };
        let good = ModelEnvelope::linear(&model, 0.0, vec!["alpha".into()], None, None);

        let mut future = good.clone();
        future.format_version = 2;
        assert!(matches!(
            write_model(&path, &future),
            Err(Error::UnsupportedModel(_))
        ));

        let mut flipped = good.clone();
        flipped.sign_convention = "negative-score-is-positive-class".into();
        assert!(matches!(
            write_model(&path, &flipped),
            Err(Error::UnsupportedModel(_))
        ));

        let mut mismatched = good.clone();
        mismatched.feature_names.push("extra".into());
        assert!(matches!(
            write_model(&path, &mismatched),
            Err(Error::UnsupportedModel(_))
        ));

        // The same checks run on read, so a doctored file is refused too.
        write_model(&path, &good).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        text = text.replace("\"format_version\": 1", "\"format_version\": 99");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            read_model(&path),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn atomic_write_replaces_existing_content() {
        let dir = tempdir();
        let path = dir.path().join("out.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
    }
}
