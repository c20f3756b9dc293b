//! Labeled image corpora on disk and writer-disjoint train/test splits.
//!
//! A dataset is a directory tree whose leaf directories are named after the
//! class label: `root/<label>/<file>` (intermediate directories such as
//! `root/digits/3/...` are fine; the label is always the file's parent
//! directory). Files named `F####...` carry a writer (form) id, and a
//! `hsf_N` token anywhere in the name records the NIST partition.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::classifier::Category;
use crate::error::{Error, Result};

const SAMPLE_EXTENSIONS: [&str; 3] = ["png", "bmp", "txt"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub image_path: PathBuf,
    pub label: String,
    /// Form identifier such as `F0042`.
    pub writer_id: Option<String>,
    /// NIST partition such as `HSF_0`.
    pub partition: Option<String>,
}

impl LabeledSample {
    /// Numeric part of the writer id.
    pub fn writer_number(&self) -> Option<u32> {
        self.writer_id.as_deref().and_then(|w| w[1..].parse().ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    /// Sorted by path.
    pub samples: Vec<LabeledSample>,
    /// Files that were not usable samples (unreadable or not an image).
    pub skipped: usize,
}

/// `F` or `f` followed by four digits at the start of the file name.
pub fn parse_writer_id(file_name: &str) -> Option<String> {
    let head = file_name.get(..5)?;
    let (f, digits) = head.split_at(1);
    (f.eq_ignore_ascii_case("f") && digits.bytes().all(|b| b.is_ascii_digit()))
        .then(|| format!("F{digits}"))
}

/// A `hsf_N` token anywhere in the file name, normalized to `HSF_N`.
pub fn parse_partition(file_name: &str) -> Option<String> {
    let lower = file_name.to_ascii_lowercase();
    let at = lower.find("hsf_")?;
    let digit = lower[at + 4..].chars().next().filter(char::is_ascii_digit)?;
    Some(format!("HSF_{digit}"))
}

pub fn scan_dataset(root: &Path) -> Result<ScanReport> {
    let mut files = Vec::new();
    collect_files(root, &mut files)?;
    files.sort();

    let mut samples = Vec::new();
    let mut skipped = 0;
    for path in files {
        let usable = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| SAMPLE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)));
        let label = path
            .parent()
            .filter(|p| *p != root)
            .and_then(|p| p.file_name())
            .and_then(|n| n.to_str())
            .map(str::to_string);
        let (Some(label), true) = (label, usable) else {
            warn!("skipping {}: not a labeled image", path.display());
            skipped += 1;
            continue;
        };
        if let Err(e) = fs::File::open(&path) {
            warn!("skipping {}: {e}", path.display());
            skipped += 1;
            continue;
        }
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        samples.push(LabeledSample {
            writer_id: parse_writer_id(name),
            partition: parse_partition(name),
            label,
            image_path: path,
        });
    }
    if samples.is_empty() {
        return Err(Error::InvalidDataset(format!(
            "no samples found under {}",
            root.display()
        )));
    }
    Ok(ScanReport { samples, skipped })
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Inclusive range of writer numbers, `F0000-F0099` in text form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriterRange {
    pub first: u32,
    pub last: u32,
}

impl WriterRange {
    pub const fn new(first: u32, last: u32) -> Self {
        Self { first, last }
    }

    pub fn contains(&self, writer: u32) -> bool {
        (self.first..=self.last).contains(&writer)
    }

    fn overlaps(&self, other: &WriterRange) -> bool {
        self.first <= other.last && other.first <= self.last
    }
}

impl fmt::Display for WriterRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{:04}-F{:04}", self.first, self.last)
    }
}

/// Inclusive range of per-class sample positions; `last = None` is open-ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalRange {
    pub first: usize,
    pub last: Option<usize>,
}

impl OrdinalRange {
    fn contains(&self, i: usize) -> bool {
        i >= self.first && self.last.is_none_or(|l| i <= l)
    }

    fn overlaps(&self, other: &OrdinalRange) -> bool {
        self.last.is_none_or(|l| other.first <= l) && other.last.is_none_or(|l| self.first <= l)
    }
}

impl fmt::Display for OrdinalRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.last {
            Some(l) => write!(f, "{}-{l}", self.first),
            None => write!(f, "{}-", self.first),
        }
    }
}

/// Which samples one side of a split takes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selector {
    /// Every sample, with or without a writer id.
    All,
    Nothing,
    /// Samples whose writer id falls in a range. When `partitions` is
    /// non-empty, samples that carry a partition must also match one.
    Writers {
        ranges: Vec<WriterRange>,
        partitions: Vec<String>,
    },
    /// Samples by position within their class (scan order, zero-based).
    /// For corpora without writer ids.
    Ordinals { ranges: Vec<OrdinalRange> },
}

impl Selector {
    fn matches(&self, sample: &LabeledSample, ordinal: usize) -> bool {
        match self {
            Selector::All => true,
            Selector::Nothing => false,
            Selector::Writers { ranges, partitions } => {
                let Some(writer) = sample.writer_number() else {
                    return false;
                };
                let partition_ok = partitions.is_empty()
                    || sample
                        .partition
                        .as_ref()
                        .is_none_or(|p| partitions.iter().any(|q| q.eq_ignore_ascii_case(p)));
                partition_ok && ranges.iter().any(|r| r.contains(writer))
            }
            Selector::Ordinals { ranges } => ranges.iter().any(|r| r.contains(ordinal)),
        }
    }

    /// Whether some sample could be selected by both.
    fn may_overlap(&self, other: &Selector) -> bool {
        use Selector::*;
        match (self, other) {
            (Nothing, _) | (_, Nothing) => false,
            (All, _) | (_, All) => true,
            (Writers { ranges: a, .. }, Writers { ranges: b, .. }) => {
                a.iter().any(|x| b.iter().any(|y| x.overlaps(y)))
            }
            (Ordinals { ranges: a }, Ordinals { ranges: b }) => {
                a.iter().any(|x| b.iter().any(|y| x.overlaps(y)))
            }
            // A writer's samples can sit at any ordinal.
            (Writers { ranges, .. }, Ordinals { ranges: o })
            | (Ordinals { ranges: o }, Writers { ranges, .. }) => !ranges.is_empty() && !o.is_empty(),
        }
    }

    /// Writer numbers covered; `None` unless this is a writer selector.
    pub fn writer_ranges(&self) -> Option<&[WriterRange]> {
        match self {
            Selector::Writers { ranges, .. } => Some(ranges),
            _ => None,
        }
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |items: Vec<String>| items.join(",");
        match self {
            Selector::All => f.write_str("all"),
            Selector::Nothing => f.write_str("none"),
            Selector::Writers { ranges, partitions } => {
                write!(f, "writers {}", join(ranges.iter().map(|r| r.to_string()).collect()))?;
                if !partitions.is_empty() {
                    write!(f, " partitions {}", partitions.join(","))?;
                }
                Ok(())
            }
            Selector::Ordinals { ranges } => {
                write!(f, "ordinals {}", join(ranges.iter().map(|r| r.to_string()).collect()))
            }
        }
    }
}

/// A named train/test split. Construction rejects selectors that could
/// share a sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub name: String,
    pub category: Category,
    pub train: Selector,
    pub test: Selector,
}

pub const BUILTIN_MANIFESTS: [&str; 4] = ["nist-digits", "nist-uppercase", "nist-lowercase", "all"];

impl SplitManifest {
    pub fn new(name: impl Into<String>, category: Category, train: Selector, test: Selector) -> Result<Self> {
        let name = name.into();
        if train.may_overlap(&test) {
            return Err(Error::InvalidManifest(format!(
                "{name}: train ({train}) and test ({test}) selectors overlap"
            )));
        }
        Ok(Self {
            name,
            category,
            train,
            test,
        })
    }

    /// The writer-disjoint NIST SD19 splits, plus `all` (everything is
    /// training data, nothing is test data).
    pub fn builtin(name: &str) -> Option<Self> {
        let writers = |first, last, partitions: &[&str]| Selector::Writers {
            ranges: vec![WriterRange::new(first, last)],
            partitions: partitions.iter().map(|p| p.to_string()).collect(),
        };
        let (category, train, test) = match name {
            "nist-digits" => (
                Category::Digits,
                writers(0, 99, &["HSF_0"]),
                writers(100, 149, &["HSF_0"]),
            ),
            "nist-uppercase" => (
                Category::Uppercase,
                writers(0, 999, &["HSF_0", "HSF_1"]),
                writers(1000, 1499, &["HSF_3"]),
            ),
            "nist-lowercase" => (
                Category::Lowercase,
                writers(0, 999, &["HSF_0", "HSF_1"]),
                writers(1000, 1499, &["HSF_3"]),
            ),
            "all" => (Category::Custom, Selector::All, Selector::Nothing),
            _ => return None,
        };
        Some(Self::new(name, category, train, test).expect("built-in manifests are disjoint"))
    }

    /// A built-in name, or else a path to a manifest file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if let Some(m) = Self::builtin(name_or_path) {
            return Ok(m);
        }
        let path = Path::new(name_or_path);
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: SplitManifest = text.parse()?;
        if manifest.name.is_empty() {
            manifest.name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("manifest")
                .to_string();
        }
        Ok(manifest)
    }

    pub fn to_text(&self) -> String {
        format!(
            "name {}\ncategory {}\ntrain {}\ntest {}\n",
            self.name, self.category, self.train, self.test
        )
    }
}

impl FromStr for SplitManifest {
    type Err = Error;

    /// Line-oriented; `#` starts a comment. `name` is optional, the other
    /// three keys are required exactly once.
    ///
    /// ```text
    /// name      my-split
    /// category  digits
    /// train     writers F0000-F0099 partitions HSF_0
    /// test      writers F0100-F0149,F0300 partitions HSF_0
    /// ```
    ///
    /// Selectors: `all`, `none`, `writers R[,R...] [partitions P[,P...]]`
    /// with `R` = `F####` or `F####-F####`, and `ordinals O[,O...]` with
    /// `O` = `N`, `N-M` or `N-` (open-ended).
    fn from_str(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::InvalidManifest(format!("line {line}: {msg}"));
        let (mut name, mut category, mut train, mut test) = (None, None, None, None);
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let slot = match key {
                "name" => {
                    set_once(&mut name, rest.to_string(), key).map_err(|m| bad(line_no, m))?;
                    continue;
                }
                "category" => {
                    let c = rest.parse().map_err(|_| bad(line_no, format!("unknown category {rest:?}")))?;
                    set_once(&mut category, c, key).map_err(|m| bad(line_no, m))?;
                    continue;
                }
                "train" => &mut train,
                "test" => &mut test,
                other => return Err(bad(line_no, format!("unknown key {other:?}"))),
            };
            let selector = parse_selector(rest).map_err(|m| bad(line_no, m))?;
            set_once(slot, selector, key).map_err(|m| bad(line_no, m))?;
        }
        let missing = |k: &str| Error::InvalidManifest(format!("missing `{k}` line"));
        SplitManifest::new(
            name.unwrap_or_default(),
            category.ok_or_else(|| missing("category"))?,
            train.ok_or_else(|| missing("train"))?,
            test.ok_or_else(|| missing("test"))?,
        )
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, key: &str) -> std::result::Result<(), String> {
    if slot.is_some() {
        return Err(format!("duplicate `{key}`"));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_selector(text: &str) -> std::result::Result<Selector, String> {
    let mut words = text.split_whitespace();
    let kind = words.next().ok_or("empty selector")?;
    let selector = match kind {
        "all" => Selector::All,
        "none" => Selector::Nothing,
        "writers" => {
            let ranges = words
                .next()
                .ok_or("`writers` needs a range list")?
                .split(',')
                .map(parse_writer_range)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let partitions = match words.next() {
                None => Vec::new(),
                Some("partitions") => words
                    .next()
                    .ok_or("`partitions` needs a list")?
                    .split(',')
                    .map(|p| p.to_ascii_uppercase())
                    .collect(),
                Some(other) => return Err(format!("unexpected {other:?}")),
            };
            Selector::Writers { ranges, partitions }
        }
        "ordinals" => {
            let ranges = words
                .next()
                .ok_or("`ordinals` needs a range list")?
                .split(',')
                .map(parse_ordinal_range)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Selector::Ordinals { ranges }
        }
        other => return Err(format!("unknown selector {other:?}")),
    };
    if let Some(extra) = words.next() {
        return Err(format!("unexpected {extra:?}"));
    }
    Ok(selector)
}

fn parse_writer(text: &str) -> std::result::Result<u32, String> {
    parse_writer_id(text)
        .filter(|_| text.len() == 5)
        .and_then(|w| w[1..].parse().ok())
        .ok_or_else(|| format!("bad writer id {text:?}, expected F####"))
}

fn parse_writer_range(text: &str) -> std::result::Result<WriterRange, String> {
    let (first, last) = match text.split_once('-') {
        Some((a, b)) => (parse_writer(a)?, parse_writer(b)?),
        None => {
            let w = parse_writer(text)?;
            (w, w)
        }
    };
    if first > last {
        return Err(format!("empty writer range {text:?}"));
    }
    Ok(WriterRange::new(first, last))
}

fn parse_ordinal_range(text: &str) -> std::result::Result<OrdinalRange, String> {
    let num = |s: &str| s.parse::<usize>().map_err(|_| format!("bad ordinal {s:?}"));
    let range = match text.split_once('-') {
        Some((a, "")) => OrdinalRange { first: num(a)?, last: None },
        Some((a, b)) => OrdinalRange { first: num(a)?, last: Some(num(b)?) },
        None => {
            let n = num(text)?;
            OrdinalRange { first: n, last: Some(n) }
        }
    };
    if range.last.is_some_and(|l| l < range.first) {
        return Err(format!("empty ordinal range {text:?}"));
    }
    Ok(range)
}

/// Splits `samples` into `(train, test)`, preserving input order. Samples
/// matched by neither side are dropped.
pub fn apply_split(
    samples: &[LabeledSample],
    manifest: &SplitManifest,
) -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    let mut seen: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for sample in samples {
        let ordinal = seen.entry(sample.label.as_str()).or_insert(0);
        let i = *ordinal;
        *ordinal += 1;
        if manifest.train.matches(sample, i) {
            train.push(sample.clone());
        } else if manifest.test.matches(sample, i) {
            test.push(sample.clone());
        }
    }
    (train, test)
}
