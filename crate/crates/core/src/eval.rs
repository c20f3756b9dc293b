//! Top-t accuracy, per-class accuracy and the first-choice confusion matrix.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify, LabeledVector, Model};
use crate::error::{Error, Result};

pub const DEFAULT_DEPTHS: [usize; 3] = [1, 2, 3];

/// Counts of (true label × first-choice label). Rows and columns share the
/// model's label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn row_sum(&self, i: usize) -> u64 {
        self.counts[i].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub category: String,
    pub n_test: usize,
    /// Percentage of samples whose true label is among the top `t` choices.
    pub acc_at: BTreeMap<usize, f64>,
    pub per_class_acc: BTreeMap<String, f64>,
    pub confusion: ConfusionMatrix,
}

impl AccuracyReport {
    pub fn accuracy(&self, depth: usize) -> Option<f64> {
        self.acc_at.get(&depth).copied()
    }
}

fn percent(hits: usize, total: usize) -> f64 {
    100.0 * hits as f64 / total as f64
}

pub fn evaluate(model: &Model, test: &[LabeledVector], depths: &[usize]) -> Result<AccuracyReport> {
    if test.is_empty() {
        return Err(Error::InvalidDataset("test set is empty".into()));
    }
    let depths: BTreeSet<usize> = depths.iter().copied().collect();
    let Some(&deepest) = depths.last() else {
        return Err(Error::InvalidArgument("no accuracy depths requested".into()));
    };
    if depths.contains(&0) {
        return Err(Error::InvalidArgument("accuracy depth must be at least 1".into()));
    }
    if let Some(unknown) = test.iter().find(|s| !model.contains(&s.label)) {
        return Err(Error::InvalidDataset(format!(
            "test label {:?} is not a class of the model",
            unknown.label
        )));
    }

    // Zero-based rank of the true label, None when it is below `deepest`.
    let ranks = test
        .par_iter()
        .map(|s| {
            let ranked = classify(model, &s.features, deepest.max(1))?;
            Ok((ranked.rank_of(&s.label), ranked.first().label.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let labels: Vec<String> = model.labels().map(str::to_string).collect();
    let index: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    let mut class_hits = vec![(0usize, 0usize); labels.len()];
    for (sample, (rank, first)) in test.iter().zip(&ranks) {
        let truth = index[sample.label.as_str()];
        counts[truth][index[first.as_str()]] += 1;
        class_hits[truth].1 += 1;
        if *rank == Some(0) {
            class_hits[truth].0 += 1;
        }
    }

    let acc_at = depths
        .iter()
        .map(|&t| {
            let hits = ranks.iter().filter(|(r, _)| r.is_some_and(|r| r < t)).count();
            (t, percent(hits, test.len()))
        })
        .collect();
    let per_class_acc = labels
        .iter()
        .zip(&class_hits)
        .filter(|(_, (_, n))| *n > 0)
        .map(|(l, &(hits, n))| (l.clone(), percent(hits, n)))
        .collect();

    Ok(AccuracyReport {
        category: model.category().to_string(),
        n_test: test.len(),
        acc_at,
        per_class_acc,
        confusion: ConfusionMatrix { labels, counts },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "text-table" | "txt" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

fn ordinal(n: usize) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

fn union_depths(reports: &[AccuracyReport]) -> Vec<usize> {
    let all: BTreeSet<usize> = reports.iter().flat_map(|r| r.acc_at.keys().copied()).collect();
    all.into_iter().collect()
}

/// One row per report: category, then each choice depth as a percentage
/// with two decimals.
pub fn render_text_table(reports: &[AccuracyReport]) -> String {
    let depths = union_depths(reports);
    let width = reports.iter().map(|r| r.category.len()).max().unwrap_or(0).max(8);
    let mut out = format!("{:<width$}", "Category");
    for &d in &depths {
        write!(out, "  {:>10}", format!("{} Choice", ordinal(d))).unwrap();
    }
    out.push('\n');
    for r in reports {
        write!(out, "{:<width$}", r.category).unwrap();
        for d in &depths {
            let cell = r.acc_at.get(d).map_or("-".to_string(), |a| format!("{a:.2}%"));
            write!(out, "  {cell:>10}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn render_csv(reports: &[AccuracyReport]) -> String {
    let depths = union_depths(reports);
    let mut out = String::from("category,n_test");
    for d in &depths {
        write!(out, ",acc_at_{d}").unwrap();
    }
    out.push('\n');
    for r in reports {
        write!(out, "{},{}", r.category, r.n_test).unwrap();
        for d in &depths {
            match r.acc_at.get(d) {
                Some(a) => write!(out, ",{a:.2}").unwrap(),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

/// A single report is written as an object, several as an array.
pub fn render_json(reports: &[AccuracyReport]) -> Result<String> {
    let mut text = match reports {
        [single] => serde_json::to_string_pretty(single)?,
        many => serde_json::to_string_pretty(many)?,
    };
    text.push('\n');
    Ok(text)
}

pub fn render(reports: &[AccuracyReport], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Text => Ok(render_text_table(reports)),
        ReportFormat::Csv => Ok(render_csv(reports)),
        ReportFormat::Json => render_json(reports),
    }
}

pub fn emit_report(report: &AccuracyReport, format: ReportFormat, path: &Path) -> Result<()> {
    emit_reports(std::slice::from_ref(report), format, path)
}

pub fn emit_reports(reports: &[AccuracyReport], format: ReportFormat, path: &Path) -> Result<()> {
    let text = render(reports, format)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_json_report(text: &str) -> Result<AccuracyReport> {
    Ok(serde_json::from_str(text)?)
}
