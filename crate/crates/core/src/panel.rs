//! Challenge-format panel data: loading, validation, imputation and slicing.
//!
//! A [`Panel`] is an ordered list of half-year periods. Each period holds a
//! cross-section of [`StockObservation`]s with `n_variables x n_months`
//! optional monthly values, a train flag and an optional forward return.
//! Panels are immutable once built; views borrow from them.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const PERIOD_COLUMN: &str = "period_label";
pub const ID_COLUMN: &str = "obs_id";
pub const TRAIN_COLUMN: &str = "Train";
pub const TARGET_COLUMN: &str = "Norm_Ret_F6M";

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("file is empty")]
    EmptyFile,
    #[error("header lacks required column `{0}`")]
    MissingColumn(String),
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: u64, reason: String },
    #[error("period label `{0}` is not of the form YYYY_H with H in {{1,2}}")]
    DuplicatePeriodLabelOrder(String),
    #[error("panel is already imputed ({0})")]
    AlreadyImputed(Imputation),
    #[error("ordinal {ordinal} outside 1..={periods}")]
    OrdinalOutOfRange { ordinal: usize, periods: usize },
    #[error("window length must be >= 1")]
    ZeroWindow,
    #[error("invalid panel: {0}")]
    Invalid(String),
}

/// Shape of the monthly block. Defaults to the challenge's 70 variables over
/// 6 months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSchema {
    pub n_variables: usize,
    pub n_months: usize,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self { n_variables: 70, n_months: 6 }
    }
}

impl ColumnSchema {
    pub fn cells(&self) -> usize {
        self.n_variables * self.n_months
    }

    /// `X{var}_{month}`, both 1-based.
    pub fn cell_name(var: usize, month: usize) -> String {
        format!("X{}_{}", var + 1, month + 1)
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec![PERIOD_COLUMN.to_string(), ID_COLUMN.to_string(), TRAIN_COLUMN.to_string()];
        for v in 0..self.n_variables {
            for m in 0..self.n_months {
                h.push(Self::cell_name(v, m));
            }
        }
        h.push(TARGET_COLUMN.to_string());
        h
    }
}

/// Chronological period identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodId {
    pub ordinal: usize,
    pub label: String,
}

/// Parses a `YYYY_H` label into `(year, half)`.
pub fn parse_label(label: &str) -> Option<(u32, u8)> {
    let (y, h) = label.split_once('_')?;
    if y.len() != 4 || !y.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let half = match h {
        "1" => 1,
        "2" => 2,
        _ => return None,
    };
    Some((y.parse().ok()?, half))
}

/// Label of the half-year `offset` steps after `(year, half)`.
pub fn label_after(year: u32, half: u8, offset: usize) -> String {
    let idx = year as usize * 2 + (half as usize - 1) + offset;
    format!("{:04}_{}", idx / 2, idx % 2 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockObservation {
    pub obs_id: String,
    /// Variable-major cells: index `var * n_months + month`.
    pub monthly: Vec<Option<f64>>,
    pub is_train: bool,
    pub target: Option<f64>,
}

impl StockObservation {
    pub fn value(&self, schema: &ColumnSchema, var: usize, month: usize) -> Option<f64> {
        self.monthly[var * schema.n_months + month]
    }

    /// Monthly values of one variable; panics if any cell is missing.
    pub fn series(&self, schema: &ColumnSchema, var: usize) -> Vec<f64> {
        let start = var * schema.n_months;
        self.monthly[start..start + schema.n_months]
            .iter()
            .map(|v| v.expect("series requested on unimputed observation"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Period {
    pub id: PeriodId,
    pub observations: Vec<StockObservation>,
}

impl Period {
    pub fn train_rows(&self) -> impl Iterator<Item = &StockObservation> {
        self.observations.iter().filter(|o| o.is_train)
    }

    pub fn test_rows(&self) -> impl Iterator<Item = &StockObservation> {
        self.observations.iter().filter(|o| !o.is_train)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Imputation {
    Zero,
    MedianPerVariable,
}

impl fmt::Display for Imputation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Imputation::Zero => write!(f, "zero"),
            Imputation::MedianPerVariable => write!(f, "median_per_variable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// `None` means raw.
    pub imputation: Option<Imputation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    schema: ColumnSchema,
    periods: Vec<Period>,
    provenance: Provenance,
}

impl Panel {
    /// Builds a raw panel from labelled groups. Groups are sorted by label and
    /// given ordinals `1..=P`; groups sharing a label are merged in input order.
    pub fn from_periods(
        schema: ColumnSchema,
        groups: Vec<(String, Vec<StockObservation>)>,
        source: impl Into<String>,
    ) -> Result<Self, PanelError> {
        let mut by_label: BTreeMap<String, Vec<StockObservation>> = BTreeMap::new();
        for (label, obs) in groups {
            if parse_label(&label).is_none() {
                return Err(PanelError::DuplicatePeriodLabelOrder(label));
            }
            by_label.entry(label).or_default().extend(obs);
        }
        let n_periods = by_label.len();
        let mut periods = Vec::with_capacity(n_periods);
        for (i, (label, observations)) in by_label.into_iter().enumerate() {
            if observations.is_empty() {
                return Err(PanelError::Invalid(format!("period {label} has no observations")));
            }
            let mut seen = HashSet::new();
            for o in &observations {
                if o.monthly.len() != schema.cells() {
                    return Err(PanelError::Invalid(format!(
                        "observation {} in {label} has {} cells, expected {}",
                        o.obs_id,
                        o.monthly.len(),
                        schema.cells()
                    )));
                }
                if !seen.insert(o.obs_id.as_str()) {
                    return Err(PanelError::Invalid(format!("duplicate obs_id {} in {label}", o.obs_id)));
                }
                if o.is_train && o.target.is_none() && i + 1 < n_periods {
                    return Err(PanelError::Invalid(format!(
                        "training observation {} in non-final period {label} has no target",
                        o.obs_id
                    )));
                }
            }
            periods.push(Period { id: PeriodId { ordinal: i + 1, label }, observations });
        }
        Ok(Self {
            schema,
            periods,
            provenance: Provenance { source: source.into(), imputation: None },
        })
    }

    pub fn schema(&self) -> &ColumnSchema {
        &self.schema
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn period(&self, ordinal: usize) -> Option<&Period> {
        ordinal.checked_sub(1).and_then(|i| self.periods.get(i))
    }

    pub fn is_complete(&self) -> bool {
        self.periods
            .iter()
            .flat_map(|p| &p.observations)
            .all(|o| o.monthly.iter().all(Option::is_some))
    }

    pub fn n_rows(&self) -> usize {
        self.periods.iter().map(|p| p.observations.len()).sum()
    }

    /// Returns a copy with every missing cell filled.
    ///
    /// `MedianPerVariable` uses the median of the same (variable, month)
    /// column over the period's training rows, or 0 when none are present.
    pub fn impute(&self, strategy: Imputation) -> Result<Panel, PanelError> {
        if let Some(done) = self.provenance.imputation {
            return Err(PanelError::AlreadyImputed(done));
        }
        let cells = self.schema.cells();
        let periods = self
            .periods
            .iter()
            .map(|p| {
                let fill: Vec<f64> = match strategy {
                    Imputation::Zero => vec![0.0; cells],
                    Imputation::MedianPerVariable => (0..cells)
                        .map(|c| {
                            let vals: Vec<f64> = p.train_rows().filter_map(|o| o.monthly[c]).collect();
                            median(vals).unwrap_or(0.0)
                        })
                        .collect(),
                };
                let observations = p
                    .observations
                    .iter()
                    .map(|o| StockObservation {
                        monthly: o
                            .monthly
                            .iter()
                            .zip(&fill)
                            .map(|(v, f)| Some(v.unwrap_or(*f)))
                            .collect(),
                        ..o.clone()
                    })
                    .collect();
                Period { id: p.id.clone(), observations }
            })
            .collect();
        Ok(Panel {
            schema: self.schema,
            periods,
            provenance: Provenance {
                source: self.provenance.source.clone(),
                imputation: Some(strategy),
            },
        })
    }

    pub fn view(&self) -> PanelView<'_> {
        PanelView { schema: &self.schema, periods: &self.periods }
    }

    /// Periods with ordinal `<= end_ordinal`, optionally only the most recent
    /// `k` of them.
    pub fn slice_window(&self, end_ordinal: usize, window: Window) -> Result<PanelView<'_>, PanelError> {
        if end_ordinal == 0 || end_ordinal > self.periods.len() {
            return Err(PanelError::OrdinalOutOfRange { ordinal: end_ordinal, periods: self.periods.len() });
        }
        let start = match window {
            Window::All => 0,
            Window::Last(0) => return Err(PanelError::ZeroWindow),
            Window::Last(k) => end_ordinal.saturating_sub(k),
        };
        Ok(PanelView { schema: &self.schema, periods: &self.periods[start..end_ordinal] })
    }

    /// SHA-256 over a canonical encoding of every label, id, flag and value.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.schema.n_variables as u64).to_le_bytes());
        h.update((self.schema.n_months as u64).to_le_bytes());
        for p in &self.periods {
            h.update(p.id.label.as_bytes());
            h.update([0u8]);
            for o in &p.observations {
                h.update(o.obs_id.as_bytes());
                h.update([0u8, o.is_train as u8]);
                for v in o.monthly.iter().chain(std::iter::once(&o.target)) {
                    match v {
                        Some(x) => {
                            h.update([1u8]);
                            h.update(x.to_bits().to_le_bytes());
                        }
                        None => h.update([0u8]),
                    }
                }
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn load_csv(path: impl AsRef<Path>, schema: ColumnSchema) -> Result<Panel, PanelError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, schema, path.display().to_string())
    }

    /// Parses challenge-format CSV. Empty cells are missing values.
    pub fn read_csv<R: Read>(reader: R, schema: ColumnSchema, source: String) -> Result<Panel, PanelError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
        let mut records = rdr.records();
        let header = match records.next() {
            None => return Err(PanelError::EmptyFile),
            Some(r) => r.map_err(|e| csv_error(e, 1))?,
        };
        let index: std::collections::HashMap<&str, usize> =
            header.iter().enumerate().map(|(i, h)| (h.trim(), i)).collect();
        let find = |name: &str| index.get(name).copied().ok_or_else(|| PanelError::MissingColumn(name.into()));
        let period_col = find(PERIOD_COLUMN)?;
        let id_col = find(ID_COLUMN)?;
        let train_col = find(TRAIN_COLUMN)?;
        let target_col = index.get(TARGET_COLUMN).copied();
        let mut cell_cols = Vec::with_capacity(schema.cells());
        for v in 0..schema.n_variables {
            for m in 0..schema.n_months {
                cell_cols.push(find(&ColumnSchema::cell_name(v, m))?);
            }
        }

        let mut groups: Vec<(String, Vec<StockObservation>)> = Vec::new();
        let mut slot: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
        let mut n_rows = 0usize;
        for (i, rec) in records.enumerate() {
            let line = i as u64 + 2;
            let rec = rec.map_err(|e| csv_error(e, line))?;
            if rec.len() != header.len() {
                return Err(PanelError::MalformedRow {
                    row: line,
                    reason: format!("{} fields, header has {}", rec.len(), header.len()),
                });
            }
            let label = rec[period_col].trim().to_string();
            if parse_label(&label).is_none() {
                return Err(PanelError::DuplicatePeriodLabelOrder(label));
            }
            let is_train = parse_flag(&rec[train_col])
                .ok_or_else(|| PanelError::MalformedRow { row: line, reason: format!("bad Train flag `{}`", &rec[train_col]) })?;
            let monthly = cell_cols
                .iter()
                .map(|&c| parse_cell(&rec[c], line, &header[c]))
                .collect::<Result<Vec<_>, _>>()?;
            let target = match target_col {
                Some(c) => parse_cell(&rec[c], line, TARGET_COLUMN)?,
                None => None,
            };
            let obs = StockObservation { obs_id: rec[id_col].trim().to_string(), monthly, is_train, target };
            let k = *slot.entry(label.clone()).or_insert_with(|| {
                groups.push((label, Vec::new()));
                groups.len() - 1
            });
            groups[k].1.push(obs);
            n_rows += 1;
        }
        if n_rows == 0 {
            return Err(PanelError::EmptyFile);
        }
        Self::from_periods(schema, groups, source)
    }

    /// Writes the challenge-format CSV. Missing cells are empty; numbers use
    /// shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PanelError> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        let header = self.schema.header();
        w.write_record(&header).map_err(csv_write_error)?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for p in &self.periods {
            for o in &p.observations {
                let mut row = Vec::with_capacity(header.len());
                row.push(p.id.label.clone());
                row.push(o.obs_id.clone());
                row.push(if o.is_train { "1".into() } else { "0".into() });
                row.extend(o.monthly.iter().map(|v| fmt(*v)));
                row.push(fmt(o.target));
                w.write_record(&row).map_err(csv_write_error)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error, line: u64) -> PanelError {
    match e.kind() {
        csv::ErrorKind::Io(_) => PanelError::Io(std::io::Error::other(e.to_string())),
        _ => PanelError::MalformedRow { row: line, reason: e.to_string() },
    }
}

fn csv_write_error(e: csv::Error) -> PanelError {
    PanelError::Io(std::io::Error::other(e.to_string()))
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim() {
        "1" | "1.0" | "true" | "True" | "TRUE" => Some(true),
        "0" | "0.0" | "false" | "False" | "FALSE" | "" => Some(false),
        _ => None,
    }
}

fn parse_cell(s: &str, line: u64, column: &str) -> Result<Option<f64>, PanelError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(PanelError::MalformedRow { row: line, reason: format!("column {column}: cannot parse `{s}`") }),
    }
}

pub(crate) fn median(mut vals: Vec<f64>) -> Option<f64> {
    if vals.is_empty() {
        return None;
    }
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    Some(if n % 2 == 1 { vals[n / 2] } else { (vals[n / 2 - 1] + vals[n / 2]) / 2.0 })
}

/// Training-history window ending at a given period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    All,
    Last(usize),
}

/// Borrowed contiguous run of periods.
#[derive(Debug, Clone, Copy)]
pub struct PanelView<'a> {
    pub schema: &'a ColumnSchema,
    pub periods: &'a [Period],
}

impl<'a> PanelView<'a> {
    pub fn ordinals(&self) -> Vec<usize> {
        self.periods.iter().map(|p| p.id.ordinal).collect()
    }

    /// Partitions each period's rows by train flag.
    pub fn split(&self) -> (RowSelection<'a>, RowSelection<'a>) {
        let pick = |want: bool| RowSelection {
            periods: self
                .periods
                .iter()
                .map(|p| PeriodRows {
                    period: p,
                    rows: p
                        .observations
                        .iter()
                        .enumerate()
                        .filter(|(_, o)| o.is_train == want)
                        .map(|(i, _)| i)
                        .collect(),
                })
                .collect(),
        };
        (pick(true), pick(false))
    }
}

/// Row indices chosen within each period of a view.
#[derive(Debug, Clone)]
pub struct RowSelection<'a> {
    pub periods: Vec<PeriodRows<'a>>,
}

#[derive(Debug, Clone)]
pub struct PeriodRows<'a> {
    pub period: &'a Period,
    pub rows: Vec<usize>,
}

impl<'a> PeriodRows<'a> {
    pub fn observations(&self) -> impl Iterator<Item = &'a StockObservation> + '_ {
        self.rows.iter().map(move |&i| &self.period.observations[i])
    }
}

impl<'a> RowSelection<'a> {
    pub fn n_rows(&self) -> usize {
        self.periods.iter().map(|p| p.rows.len()).sum()
    }

    /// Re-interleaves two disjoint selections over the same periods into
    /// original row order.
    pub fn merge(&self, other: &RowSelection<'a>) -> Vec<Vec<&'a StockObservation>> {
        self.periods
            .iter()
            .zip(&other.periods)
            .map(|(a, b)| {
                let mut rows: Vec<usize> = a.rows.iter().chain(&b.rows).copied().collect();
                rows.sort_unstable();
                rows.into_iter().map(|i| &a.period.observations[i]).collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_schema() -> ColumnSchema {
        ColumnSchema { n_variables: 2, n_months: 2 }
    }

    fn csv_text() -> String {
        let mut s = String::from("period_label,obs_id,Train,X1_1,X1_2,X2_1,X2_2,Norm_Ret_F6M\n");
        s += "1996_2,a,1,1,2,,4,0.5\n";
        s += "1996_2,b,0,5,6,7,8,\n";
        s += "1996_1,c,1,1,,3,4,0.1\n";
        s += "1996_1,d,1,3,2,1,0,-0.2\n";
        s += "1996_1,e,0,,,,,\n";
        s += "1996_2,f,1,3,2,1,0,0.3\n";
        s
    }

    fn load(text: &str) -> Result<Panel, PanelError> {
        Panel::read_csv(text.as_bytes(), tiny_schema(), "mem".into())
    }

    #[test]
    fn loads_and_sorts_periods() {
        let p = load(&csv_text()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.periods()[0].id, PeriodId { ordinal: 1, label: "1996_1".into() });
        assert_eq!(p.periods()[1].id.label, "1996_2");
        assert_eq!(p.periods()[0].observations.len(), 3);
        assert_eq!(p.periods()[1].observations[0].monthly[2], None);
        assert_eq!(p.periods()[1].observations[1].target, None);
        assert!(!p.is_complete());
        assert_eq!(p.provenance().imputation, None);
    }

    #[test]
    fn short_row_is_malformed() {
        let mut s = csv_text();
        s += "1996_2,g,1,3,2,1,0\n";
        match load(&s) {
            Err(PanelError::MalformedRow { row, .. }) => assert_eq!(row, 8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn contract_errors() {
        assert!(matches!(load(""), Err(PanelError::EmptyFile)));
        assert!(matches!(load("period_label,obs_id,Train,X1_1,X1_2,X2_1,X2_2\n"), Err(PanelError::EmptyFile)));
        assert!(matches!(
            load("period_label,obs_id,X1_1,X1_2,X2_1,X2_2\n"),
            Err(PanelError::MissingColumn(c)) if c == "Train"
        ));
        assert!(matches!(
            load("period_label,obs_id,Train,X1_1,X1_2,X2_1,X2_2\n96_1,a,1,1,1,1,1\n"),
            Err(PanelError::DuplicatePeriodLabelOrder(_))
        ));
        assert!(matches!(
            load("period_label,obs_id,Train,X1_1,X1_2,X2_1,X2_2\n1996_1,a,1,x,1,1,1\n"),
            Err(PanelError::MalformedRow { row: 2, .. })
        ));
    }

    #[test]
    fn final_period_may_lack_targets() {
        let s = "period_label,obs_id,Train,X1_1,X1_2,X2_1,X2_2,Norm_Ret_F6M\n\
                 1996_1,a,1,1,1,1,1,0.2\n1996_2,b,1,1,1,1,1,\n";
        assert!(load(s).is_ok());
        let bad = "period_label,obs_id,Train,X1_1,X1_2,X2_1,X2_2,Norm_Ret_F6M\n\
                   1996_1,a,1,1,1,1,1,\n1996_2,b,1,1,1,1,1,\n";
        assert!(matches!(load(bad), Err(PanelError::Invalid(_))));
    }

    #[test]
    fn zero_imputation() {
        let p = load(&csv_text()).unwrap().impute(Imputation::Zero).unwrap();
        assert!(p.is_complete());
        assert_eq!(p.periods()[1].observations[0].monthly[2], Some(0.0));
        assert!(matches!(p.impute(Imputation::Zero), Err(PanelError::AlreadyImputed(Imputation::Zero))));
    }

    #[test]
    fn median_imputation_uses_training_rows() {
        let p = load(&csv_text()).unwrap().impute(Imputation::MedianPerVariable).unwrap();
        let p1 = &p.periods()[0];
        // X1_1 over train rows c,d is {1,3}: the untrained row e gets 2
        assert_eq!(p1.observations[2].monthly[0], Some(2.0));
        // X1_2 train values {missing, 2}: row c gets 2
        assert_eq!(p1.observations[0].monthly[1], Some(2.0));
        // 1996_2 X2_1 train values {missing, 1} -> 1
        assert_eq!(p.periods()[1].observations[0].monthly[2], Some(1.0));
    }

    #[test]
    fn fully_missing_column_falls_back_to_zero() {
        let s = "period_label,obs_id,Train,X1_1,X1_2,X2_1,X2_2,Norm_Ret_F6M\n\
                 1996_1,a,1,,1,1,1,0.2\n1996_1,b,1,,1,1,1,0.3\n";
        let p = load(s).unwrap().impute(Imputation::MedianPerVariable).unwrap();
        assert!(p.periods()[0].observations.iter().all(|o| o.monthly[0] == Some(0.0)));
    }

    #[test]
    fn imputing_complete_panel_changes_nothing() {
        let once = load(&csv_text()).unwrap().impute(Imputation::MedianPerVariable).unwrap();
        let groups = once
            .periods()
            .iter()
            .map(|p| (p.id.label.clone(), p.observations.clone()))
            .collect();
        let raw_again = Panel::from_periods(tiny_schema(), groups, "again").unwrap();
        for strategy in [Imputation::Zero, Imputation::MedianPerVariable] {
            let twice = raw_again.impute(strategy).unwrap();
            assert_eq!(twice.periods(), once.periods());
        }
    }

    fn five_periods() -> Panel {
        let groups = (0..5)
            .map(|i| {
                let obs = StockObservation {
                    obs_id: "s".into(),
                    monthly: vec![Some(i as f64); 4],
                    is_train: true,
                    target: Some(0.0),
                };
                (label_after(1996, 2, i), vec![obs])
            })
            .collect();
        Panel::from_periods(tiny_schema(), groups, "five").unwrap()
    }

    #[test]
    fn window_slicing() {
        let p = five_periods();
        assert_eq!(p.slice_window(3, Window::All).unwrap().ordinals(), vec![1, 2, 3]);
        assert_eq!(p.slice_window(5, Window::Last(2)).unwrap().ordinals(), vec![4, 5]);
        assert_eq!(p.slice_window(1, Window::Last(10)).unwrap().ordinals(), vec![1]);
        assert_eq!(p.slice_window(5, Window::All).unwrap().periods, p.periods());
        assert!(matches!(p.slice_window(0, Window::All), Err(PanelError::OrdinalOutOfRange { .. })));
        assert!(matches!(p.slice_window(6, Window::All), Err(PanelError::OrdinalOutOfRange { .. })));
        assert!(matches!(p.slice_window(2, Window::Last(0)), Err(PanelError::ZeroWindow)));
    }

    #[test]
    fn split_partitions_rows() {
        let p = load(&csv_text()).unwrap();
        let view = p.view();
        let (train, test) = view.split();
        assert_eq!(train.periods[0].rows, vec![0, 1]);
        assert_eq!(test.periods[0].rows, vec![2]);
        assert_eq!(train.n_rows() + test.n_rows(), p.n_rows());
        let merged = train.merge(&test);
        for (m, period) in merged.iter().zip(p.periods()) {
            let orig: Vec<&StockObservation> = period.observations.iter().collect();
            assert_eq!(m, &orig);
        }
    }

    #[test]
    fn label_helpers() {
        assert_eq!(parse_label("2002_1"), Some((2002, 1)));
        assert_eq!(parse_label("2002_3"), None);
        assert_eq!(label_after(1996, 2, 0), "1996_2");
        assert_eq!(label_after(1996, 2, 1), "1997_1");
        assert_eq!(label_after(1996, 2, 41), "2017_1");
    }

    #[test]
    fn csv_round_trip() {
        let p = load(&csv_text()).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = Panel::read_csv(buf.as_slice(), tiny_schema(), "mem".into()).unwrap();
        assert_eq!(back.periods(), p.periods());
        assert_eq!(back.checksum(), p.checksum());
    }
}
