//! End-to-end runs and report rendering.
//!
//! [`Explainer::fit`] runs the whole pipeline once on a dataset: parent
//! discovery, parent effects, pattern mining, combined cause and interaction
//! tests, extended effects and redundancy removal. Global and local reports
//! are views over the fitted extended parent set.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{load_csv, AttributeSchema, BinaryDataset};
use crate::ece::{
    assemble_epa, classify_explanatory_causes, classify_patterns, compute_avg_eece,
    dedupe_members, eece_local, feature_effects, EceParams, ExtendedParentSet, Member, MemberKind,
};
use crate::error::{Error, Result};
use crate::patterns::{mine_closed_patterns, MiningParams};
use crate::structure::{discover_parents, ParentSet, DEFAULT_MAX_ORDER, DEFAULT_P_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Md,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "md" => Ok(OutputFormat::Md),
            other => Err(Error::Argument(format!("unknown format `{other}`"))),
        }
    }
}

/// Every threshold the pipeline uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub p_threshold: f64,
    pub max_order: usize,
    pub mining: MiningParams,
    pub ece: EceParams,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            p_threshold: DEFAULT_P_THRESHOLD,
            max_order: DEFAULT_MAX_ORDER,
            mining: MiningParams::default(),
            ece: EceParams::default(),
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_threshold > 0.0 && self.p_threshold < 1.0) {
            return Err(Error::Argument(format!(
                "p threshold must lie in (0, 1), got {}",
                self.p_threshold
            )));
        }
        self.mining.validate()?;
        self.ece.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: PathBuf,
    pub schema: Option<PathBuf>,
    pub target: String,
    pub params: EngineParams,
    pub seed: u64,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(data: impl Into<PathBuf>, target: impl Into<String>) -> Self {
        RunConfig {
            data: data.into(),
            schema: None,
            target: target.into(),
            params: EngineParams::default(),
            seed: 0,
            format: OutputFormat::Json,
        }
    }

    pub fn load(&self) -> Result<BinaryDataset> {
        let schema = match &self.schema {
            Some(p) => AttributeSchema::from_file(p)?,
            None => AttributeSchema::default(),
        };
        load_csv(&self.data, &schema, &self.target)
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho::new(&self.params, self.seed)
    }
}

/// Flat echo of the thresholds actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub p_value: f64,
    pub max_order: usize,
    pub min_support: f64,
    pub max_len: usize,
    pub epsilon: f64,
    pub cond_size: usize,
    pub assoc_p: f64,
    pub seed: u64,
}

impl ConfigEcho {
    pub fn new(p: &EngineParams, seed: u64) -> Self {
        ConfigEcho {
            p_value: p.p_threshold,
            max_order: p.max_order,
            min_support: p.mining.min_support,
            max_len: p.mining.max_len,
            epsilon: p.ece.epsilon,
            cond_size: p.ece.cond_subset_size,
            assoc_p: p.ece.assoc_p_threshold,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Global,
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryLiteral {
    pub column: String,
    pub value: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub rank: usize,
    pub kind: MemberKind,
    pub members: Vec<EntryLiteral>,
    /// `None` when the estimate had no support.
    pub effect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ReportEntry {
    pub fn label(&self) -> String {
        if self.kind == MemberKind::Parent && self.members.len() == 1 {
            return self.members[0].column.clone();
        }
        let names: Vec<&str> = self.members.iter().map(|m| m.column.as_str()).collect();
        let values: Vec<String> = self.members.iter().map(|m| m.value.to_string()).collect();
        format!("{{{}}} = {{{}}}", names.join(", "), values.join(", "))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub n_rows: usize,
    pub n_features: usize,
    pub n_parents: usize,
    pub n_explanatory_causes: usize,
    pub n_patterns: usize,
    pub n_combined_causes: usize,
    pub n_interactions: usize,
    pub n_epa: usize,
    pub strata_skipped: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_row: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_class: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationReport {
    pub mode: Mode,
    pub target: String,
    pub config: ConfigEcho,
    pub entries: Vec<ReportEntry>,
    pub warnings: Vec<String>,
    pub metadata: RunMetadata,
}

impl ExplanationReport {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Copy with every effect rounded to the four decimals the renderers print.
    pub fn rounded(&self) -> Self {
        let mut r = self.clone();
        for e in &mut r.entries {
            e.effect = e.effect.map(round4);
        }
        r
    }

    pub fn render(&self, format: OutputFormat) -> Vec<u8> {
        render(self, format)
    }
}

/// A fitted pipeline: everything needed for global and local reports.
#[derive(Debug, Clone)]
pub struct Explainer {
    pub dataset: BinaryDataset,
    pub params: EngineParams,
    pub parents: ParentSet,
    /// Average effect per column; exactly zero off the parent set.
    pub parent_effects: Vec<Option<f64>>,
    pub explanatory_causes: Vec<usize>,
    pub n_patterns: usize,
    pub epa: ExtendedParentSet,
}

impl Explainer {
    pub fn fit(dataset: BinaryDataset, params: &EngineParams) -> Result<Self> {
        params.validate()?;
        let parents = discover_parents(&dataset, params.p_threshold, params.max_order);
        let parent_effects = feature_effects(&dataset, &parents, params.ece.cond_subset_size);
        let estimates: Vec<(usize, f64)> = parents
            .iter()
            .filter_map(|p| parent_effects[p].map(|v| (p, v)))
            .collect();
        let explanatory_causes = classify_explanatory_causes(&estimates, params.ece.epsilon);

        let patterns = mine_closed_patterns(&dataset, &params.mining);
        let verdicts = classify_patterns(&dataset, &patterns, &parents, &parent_effects, &params.ece);
        let mut epa = assemble_epa(&dataset, &parents, &verdicts);
        compute_avg_eece(&dataset, &mut epa, &params.ece);
        let epa = dedupe_members(&dataset, epa);

        Ok(Explainer {
            dataset,
            params: *params,
            parents,
            parent_effects,
            explanatory_causes,
            n_patterns: patterns.len(),
            epa,
        })
    }

    /// Effect of a single feature column: its avg EECE when it is in the
    /// extended parent set, zero otherwise.
    pub fn feature_effect(&self, column: usize) -> Option<f64> {
        if !self.parents.contains(column) {
            return Some(0.0);
        }
        self.epa
            .members
            .iter()
            .find(|m| m.kind == MemberKind::Parent && m.literals[0].column == column)
            .and_then(Member::effect)
    }

    fn metadata(&self) -> RunMetadata {
        let count = |k: MemberKind| self.epa.members.iter().filter(|m| m.kind == k).count();
        RunMetadata {
            n_rows: self.dataset.n_rows(),
            n_features: self.dataset.n_features(),
            n_parents: self.parents.len(),
            n_explanatory_causes: self.explanatory_causes.len(),
            n_patterns: self.n_patterns,
            n_combined_causes: count(MemberKind::CombinedCause),
            n_interactions: count(MemberKind::Interaction),
            n_epa: self.epa.len(),
            strata_skipped: self
                .epa
                .members
                .iter()
                .filter_map(|m| m.avg_eece.as_ref())
                .map(|e| e.strata.iter().filter(|s| !s.contributing).count())
                .sum(),
            instance_row: None,
            predicted_class: None,
        }
    }

    fn entry_literals(&self, m: &Member) -> Vec<EntryLiteral> {
        m.literals
            .iter()
            .map(|l| EntryLiteral {
                column: self.dataset.column(l.column).name.clone(),
                value: l.value as u8,
            })
            .collect()
    }

    fn base_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.parents.is_empty() {
            w.push("no parents of the target were found; every single feature has zero effect".into());
        }
        w
    }

    pub fn global_report(&self, echo: ConfigEcho) -> ExplanationReport {
        let mut warnings = self.base_warnings();
        let order = self.epa.ranked_by(|i| self.epa.members[i].effect());
        let entries = order
            .iter()
            .enumerate()
            .map(|(rank, &i)| {
                let m = &self.epa.members[i];
                let effect = m.effect();
                if effect.is_none() {
                    warnings.push(format!(
                        "{} has no stratum with both arms supported",
                        m.describe(&self.dataset)
                    ));
                }
                ReportEntry {
                    rank: rank + 1,
                    kind: m.kind,
                    members: self.entry_literals(m),
                    effect,
                    direction: None,
                    note: effect.is_none().then(|| "no support".to_string()),
                }
            })
            .collect();
        ExplanationReport {
            mode: Mode::Global,
            target: self.dataset.outcome_name().to_string(),
            config: echo,
            entries,
            warnings,
            metadata: self.metadata(),
        }
    }

    /// Local report for a full row of column values; the outcome slot is the
    /// predicted class being explained.
    pub fn local_report(&self, instance: &[bool], echo: ConfigEcho) -> Result<ExplanationReport> {
        if instance.len() != self.dataset.n_columns() {
            return Err(Error::Validation(format!(
                "instance has {} values, dataset has {} columns",
                instance.len(),
                self.dataset.n_columns()
            )));
        }
        let ds = &self.dataset;
        let predicted = instance[ds.outcome()];
        let target = ds.outcome_name();
        let locals: Vec<_> = (0..self.epa.len())
            .map(|i| eece_local(ds, i, &self.epa, instance, &self.params.ece))
            .collect();
        // contribution toward the predicted class
        let toward: Vec<Option<f64>> = locals
            .iter()
            .map(|l| {
                l.value
                    .map(|v| if l.member_value == predicted { v } else { -v })
            })
            .collect();
        let order = self.epa.ranked_by(|i| toward[i]);
        let mut warnings = self.base_warnings();
        let entries = order
            .iter()
            .enumerate()
            .map(|(rank, &i)| {
                let m = &self.epa.members[i];
                let local = &locals[i];
                let lhs = match m.kind {
                    MemberKind::Parent => format!(
                        "{} = {}",
                        ds.column(m.literals[0].column).name,
                        local.member_value as u8
                    ),
                    _ if local.member_value => m.describe(ds),
                    _ => format!("not {}", m.describe(ds)),
                };
                if toward[i].is_none() {
                    warnings.push(format!("{lhs} has no support in the instance's stratum"));
                }
                ReportEntry {
                    rank: rank + 1,
                    kind: m.kind,
                    members: self.entry_literals(m),
                    effect: toward[i],
                    direction: Some(format!("{lhs} → {target} = {}", predicted as u8)),
                    note: toward[i].is_none().then(|| "no support".to_string()),
                }
            })
            .collect();
        let mut metadata = self.metadata();
        metadata.predicted_class = Some(predicted as u8);
        Ok(ExplanationReport {
            mode: Mode::Local,
            target: target.to_string(),
            config: echo,
            entries,
            warnings,
            metadata,
        })
    }

    /// Parses a `column=value` instance file over the dataset's binary columns.
    /// Every column, the target included, must be assigned.
    pub fn parse_instance(&self, text: &str) -> Result<Vec<bool>> {
        let ds = &self.dataset;
        let mut values: BTreeMap<usize, bool> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Validation(format!("instance line {}: expected column=value", lineno + 1))
            })?;
            let col = ds.column_index(k.trim()).ok_or_else(|| {
                Error::Validation(format!("instance names unknown column `{}`", k.trim()))
            })?;
            let bit = match v.trim() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Validation(format!(
                        "instance value for `{}` must be 0 or 1, got `{other}`",
                        k.trim()
                    )))
                }
            };
            values.insert(col, bit);
        }
        let missing: Vec<&str> = (0..ds.n_columns())
            .filter(|c| !values.contains_key(c))
            .map(|c| ds.column(c).name.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Validation(format!(
                "instance is missing columns: {}",
                missing.join(", ")
            )));
        }
        Ok(values.into_values().collect())
    }
}

/// Where the local instance comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSelector {
    Row(usize),
    File(PathBuf),
}

pub fn run_global(config: &RunConfig) -> Result<ExplanationReport> {
    let ds = config.load()?;
    let explainer = Explainer::fit(ds, &config.params)?;
    Ok(explainer.global_report(config.echo()))
}

pub fn run_local(config: &RunConfig, selector: &InstanceSelector) -> Result<ExplanationReport> {
    let ds = config.load()?;
    let explainer = Explainer::fit(ds, &config.params)?;
    let (instance, row) = match selector {
        InstanceSelector::Row(r) => {
            if *r >= explainer.dataset.n_rows() {
                return Err(Error::Validation(format!(
                    "row {r} out of range for {} rows",
                    explainer.dataset.n_rows()
                )));
            }
            (explainer.dataset.row(*r), Some(*r))
        }
        InstanceSelector::File(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            (explainer.parse_instance(&text)?, None)
        }
    };
    let mut report = explainer.local_report(&instance, config.echo())?;
    report.metadata.instance_row = row;
    Ok(report)
}

pub fn round4(x: f64) -> f64 {
    fmt4(x).parse().expect("formatted float parses")
}

/// Four decimals, ties to even on the exact binary value, no negative zero.
pub fn fmt4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

pub fn render(report: &ExplanationReport, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report.rounded()).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Md => render_md(report).into_bytes(),
    }
}

fn render_csv(report: &ExplanationReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["rank", "kind", "member", "effect", "direction"])
        .expect("in-memory write");
    for e in &report.entries {
        w.write_record([
            e.rank.to_string(),
            e.kind.as_str().to_string(),
            e.label(),
            e.effect.map(fmt4).unwrap_or_default(),
            e.direction.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn render_md(report: &ExplanationReport) -> String {
    let mut s = String::new();
    let effect = |e: &ReportEntry| e.effect.map(fmt4).unwrap_or_else(|| "no support".into());
    match report.mode {
        Mode::Global => {
            let _ = writeln!(s, "Global explanation for `{}`\n", report.target);
            let _ = writeln!(s, "| Rank | Feature | avg EECE |");
            let _ = writeln!(s, "|---:|---|---:|");
            for e in &report.entries {
                let _ = writeln!(s, "| {} | {} | {} |", e.rank, e.label(), effect(e));
            }
        }
        Mode::Local => {
            let _ = writeln!(s, "Local explanation for `{}`\n", report.target);
            let _ = writeln!(s, "| Rank | Feature value contributes to (→) the predicted class | EECE |");
            let _ = writeln!(s, "|---:|---|---:|");
            for e in &report.entries {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} |",
                    e.rank,
                    e.direction.as_deref().unwrap_or(""),
                    effect(e)
                );
            }
        }
    }
    if !report.warnings.is_empty() {
        let _ = writeln!(s);
        for w in &report.warnings {
            let _ = writeln!(s, "- warning: {w}");
        }
    }
    s
}

pub fn write_output(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    use std::io::Write;
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}
