//! Binary datasets: loading, recoding and support counting.
//!
//! A [`BinaryDataset`] is an immutable column store of 0/1 vectors with one
//! designated outcome column. Categorical attributes are one-hot encoded,
//! numeric attributes are split at the median, binary attributes are read as
//! they are. Every column remembers the attribute it came from (its group),
//! which the pattern miner uses to avoid combining values of one attribute.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Categorical,
    Numeric,
    Binary,
}

impl std::str::FromStr for AttributeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "categorical" => Ok(AttributeKind::Categorical),
            "numeric" => Ok(AttributeKind::Numeric),
            "binary" => Ok(AttributeKind::Binary),
            other => Err(Error::Schema(format!("unknown attribute kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    pub symmetric: bool,
    /// Group override; only used when reloading an already binarized dataset.
    pub group: Option<String>,
}

impl AttributeSpec {
    pub fn new(name: impl Into<String>, kind: AttributeKind, symmetric: bool) -> Self {
        AttributeSpec {
            name: name.into(),
            kind,
            symmetric,
            group: None,
        }
    }
}

/// Declared kinds and symmetry flags. Attributes without an entry are binary and symmetric.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributeSchema {
    attributes: Vec<AttributeSpec>,
}

impl AttributeSchema {
    pub fn new(attributes: Vec<AttributeSpec>) -> Result<Self> {
        let mut seen = HashSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute `{}`", a.name)));
            }
        }
        Ok(AttributeSchema { attributes })
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn get(&self, name: &str) -> Option<&AttributeSpec> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Parses `attr.kind=...`, `attr.symmetric=...` and `attr.group=...` lines.
    ///
    /// Attribute names may contain dots; the key is whatever follows the last one.
    pub fn parse(text: &str) -> Result<Self> {
        let mut attrs: Vec<AttributeSpec> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| {
                Error::Schema(format!("line {}: expected key=value", lineno + 1))
            })?;
            let (attr, key) = lhs.trim().rsplit_once('.').ok_or_else(|| {
                Error::Schema(format!("line {}: expected attr.key", lineno + 1))
            })?;
            let idx = match attrs.iter().position(|a| a.name == attr) {
                Some(i) => i,
                None => {
                    attrs.push(AttributeSpec::new(attr, AttributeKind::Binary, true));
                    attrs.len() - 1
                }
            };
            let value = rhs.trim();
            match key {
                "kind" => attrs[idx].kind = value.parse()?,
                "symmetric" => {
                    attrs[idx].symmetric = match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        _ => {
                            return Err(Error::Schema(format!(
                                "line {}: symmetric must be true or false",
                                lineno + 1
                            )))
                        }
                    }
                }
                "group" => attrs[idx].group = Some(value.to_string()),
                other => {
                    return Err(Error::Schema(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        AttributeSchema::new(attrs)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub group: String,
    pub symmetric: bool,
    pub bits: Bits,
}

impl Column {
    pub fn new(name: impl Into<String>, bits: Bits) -> Self {
        let name = name.into();
        Column {
            group: name.clone(),
            name,
            symmetric: true,
            bits,
        }
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = group.into();
        self
    }

    pub fn with_symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }
}

impl fmt::Debug for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Column")
            .field("name", &self.name)
            .field("group", &self.group)
            .field("symmetric", &self.symmetric)
            .field("ones", &self.bits.count_ones())
            .finish()
    }
}

/// A `(column, value)` atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub column: usize,
    pub value: bool,
}

impl Literal {
    pub fn new(column: usize, value: bool) -> Self {
        Literal { column, value }
    }

    pub fn one(column: usize) -> Self {
        Literal::new(column, true)
    }

    pub fn zero(column: usize) -> Self {
        Literal::new(column, false)
    }

    pub fn negated(self) -> Self {
        Literal::new(self.column, !self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    columns: Vec<Column>,
    outcome: usize,
    n_rows: usize,
}

impl BinaryDataset {
    pub fn new(columns: Vec<Column>, outcome: usize) -> Result<Self> {
        if outcome >= columns.len() {
            return Err(Error::Schema(format!(
                "outcome index {outcome} out of range for {} columns",
                columns.len()
            )));
        }
        let n_rows = columns[outcome].bits.len();
        if n_rows == 0 {
            return Err(Error::Schema("dataset has no rows".into()));
        }
        let mut names = HashSet::new();
        for c in &columns {
            if c.bits.len() != n_rows {
                return Err(Error::Schema(format!(
                    "column `{}` has {} rows, expected {n_rows}",
                    c.name,
                    c.bits.len()
                )));
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(BinaryDataset {
            columns,
            outcome,
            n_rows,
        })
    }

    /// Builds a dataset of binary columns from row-major 0/1 values.
    pub fn from_rows(names: &[&str], rows: &[Vec<u8>], outcome_name: &str) -> Result<Self> {
        let outcome = names
            .iter()
            .position(|n| *n == outcome_name)
            .ok_or_else(|| Error::Schema(format!("outcome `{outcome_name}` not among columns")))?;
        let mut columns = Vec::with_capacity(names.len());
        for (j, name) in names.iter().enumerate() {
            let mut values = Vec::with_capacity(rows.len());
            for (i, row) in rows.iter().enumerate() {
                match row.get(j) {
                    Some(0) => values.push(false),
                    Some(1) => values.push(true),
                    Some(v) => {
                        return Err(Error::Parse {
                            row: i,
                            column: name.to_string(),
                            message: format!("expected 0 or 1, found {v}"),
                        })
                    }
                    None => {
                        return Err(Error::MissingValue {
                            row: i,
                            column: name.to_string(),
                        })
                    }
                }
            }
            columns.push(Column::new(*name, Bits::from_bools(values)));
        }
        BinaryDataset::new(columns, outcome)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn outcome(&self) -> usize {
        self.outcome
    }

    pub fn outcome_name(&self) -> &str {
        &self.columns[self.outcome].name
    }

    pub fn outcome_bits(&self) -> &Bits {
        &self.columns[self.outcome].bits
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn bits(&self, i: usize) -> &Bits {
        &self.columns[i].bits
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Feature column indices in column order (outcome excluded).
    pub fn features(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.columns.len()).filter(move |&i| i != self.outcome)
    }

    pub fn literal_bits(&self, lit: Literal) -> Bits {
        let b = &self.columns[lit.column].bits;
        if lit.value {
            b.clone()
        } else {
            b.not()
        }
    }

    /// Value of column `col` at `row`.
    pub fn value(&self, row: usize, col: usize) -> bool {
        self.columns[col].bits.get(row)
    }

    /// All column values of one row, in column order.
    pub fn row(&self, row: usize) -> Vec<bool> {
        self.columns.iter().map(|c| c.bits.get(row)).collect()
    }

    pub fn with_column(&self, column: Column) -> Result<Self> {
        let mut columns = self.columns.clone();
        columns.push(column);
        BinaryDataset::new(columns, self.outcome)
    }

    /// Same data with rows reordered: row `i` becomes old row `order[i]`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        BinaryDataset {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    bits: c.bits.permuted(order),
                    ..c.clone()
                })
                .collect(),
            outcome: self.outcome,
            n_rows: self.n_rows,
        }
    }

    /// Writes the binarized matrix as a 0/1 CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        let mut record = Vec::with_capacity(self.columns.len());
        for i in 0..self.n_rows {
            record.clear();
            record.extend(
                self.columns
                    .iter()
                    .map(|c| if c.bits.get(i) { "1" } else { "0" }),
            );
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// The schema that reloads [`BinaryDataset::write_csv`] output into an identical dataset.
    pub fn binary_schema(&self) -> AttributeSchema {
        AttributeSchema {
            attributes: self
                .columns
                .iter()
                .map(|c| AttributeSpec {
                    name: c.name.clone(),
                    kind: AttributeKind::Binary,
                    symmetric: c.symmetric,
                    group: Some(c.group.clone()),
                })
                .collect(),
        }
    }

    pub fn schema_text(&self) -> String {
        let mut out = String::new();
        for a in self.binary_schema().attributes {
            out.push_str(&format!("{}.kind=binary\n", a.name));
            out.push_str(&format!("{}.symmetric={}\n", a.name, a.symmetric));
            if let Some(g) = a.group {
                out.push_str(&format!("{}.group={}\n", a.name, g));
            }
        }
        out
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

/// Reads a headered CSV and binarizes every attribute according to `schema`.
pub fn load_csv(
    path: impl AsRef<Path>,
    schema: &AttributeSchema,
    outcome_name: &str,
) -> Result<BinaryDataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, outcome_name)
}

/// [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(
    reader: R,
    schema: &AttributeSchema,
    outcome_name: &str,
) -> Result<BinaryDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    for spec in schema.attributes() {
        if !header.contains(&spec.name) {
            return Err(Error::Schema(format!(
                "schema attribute `{}` is missing from the data header",
                spec.name
            )));
        }
    }
    if !header.iter().any(|h| h == outcome_name) {
        return Err(Error::Schema(format!(
            "target column `{outcome_name}` is missing from the data header"
        )));
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if is_missing(cell) {
                return Err(Error::MissingValue {
                    row,
                    column: header[j].clone(),
                });
            }
            cells[j].push(cell.to_string());
        }
    }
    if cells.first().is_none_or(|c| c.is_empty()) {
        return Err(Error::Schema("data file has no rows".into()));
    }

    let default_spec = |name: &str| AttributeSpec::new(name, AttributeKind::Binary, true);
    let mut columns = Vec::new();
    let mut outcome = None;
    for (j, name) in header.iter().enumerate() {
        let spec = schema.get(name).cloned().unwrap_or_else(|| default_spec(name));
        let group = spec.group.clone().unwrap_or_else(|| name.clone());
        if name == outcome_name {
            if spec.kind != AttributeKind::Binary {
                return Err(Error::Schema(format!(
                    "target `{name}` must be a binary attribute"
                )));
            }
            outcome = Some(columns.len());
        }
        match spec.kind {
            AttributeKind::Binary => {
                let bits = parse_binary(name, &cells[j])?;
                columns.push(Column::new(name.clone(), bits).with_group(group).with_symmetric(spec.symmetric));
            }
            AttributeKind::Numeric => {
                let values = parse_numeric(name, &cells[j])?;
                let bits = Bits::from_u8s(&binarize_numeric_median(&values));
                columns.push(Column::new(name.clone(), bits).with_group(group).with_symmetric(spec.symmetric));
            }
            AttributeKind::Categorical => {
                let levels: BTreeSet<&str> = cells[j].iter().map(String::as_str).collect();
                for level in levels {
                    let bits = Bits::from_bools(cells[j].iter().map(|c| c == level));
                    columns.push(
                        Column::new(format!("{name}.{level}"), bits)
                            .with_group(group.clone())
                            .with_symmetric(spec.symmetric),
                    );
                }
            }
        }
    }
    let outcome = outcome.expect("outcome presence checked against header");
    BinaryDataset::new(columns, outcome)
}

fn parse_binary(name: &str, cells: &[String]) -> Result<Bits> {
    let mut values = Vec::with_capacity(cells.len());
    for (row, cell) in cells.iter().enumerate() {
        values.push(match cell.as_str() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse {
                    row,
                    column: name.to_string(),
                    message: format!("expected 0 or 1, found `{other}`"),
                })
            }
        });
    }
    Ok(Bits::from_bools(values))
}

fn parse_numeric(name: &str, cells: &[String]) -> Result<Vec<f64>> {
    cells
        .iter()
        .enumerate()
        .map(|(row, cell)| match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Parse {
                row,
                column: name.to_string(),
                message: format!("`{cell}` is not a finite number"),
            }),
        })
        .collect()
}

/// Splits at the median: 1 iff the value is strictly greater than the lower
/// middle order statistic.
pub fn binarize_numeric_median(values: &[f64]) -> Vec<u8> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[(sorted.len() - 1) / 2];
    values.iter().map(|&v| u8::from(v > median)).collect()
}

fn conjunction(ds: &BinaryDataset, lits: &[Literal]) -> Option<Bits> {
    let mut iter = lits.iter();
    let first = iter.next()?;
    let mut acc = ds.literal_bits(*first);
    for &lit in iter {
        let b = ds.bits(lit.column);
        if lit.value {
            acc.and_assign(b);
        } else {
            acc.and_assign(&b.not());
        }
    }
    Some(acc)
}

/// Number of rows satisfying every literal. The empty conjunction holds everywhere.
pub fn marginal_count(ds: &BinaryDataset, lits: &[Literal]) -> usize {
    match conjunction(ds, lits) {
        Some(b) => b.count_ones(),
        None => ds.n_rows(),
    }
}

/// Plug-in estimate of `P(Y=1 | lits)`; `None` when no row satisfies `lits`.
pub fn cond_prob_y(ds: &BinaryDataset, lits: &[Literal]) -> Option<f64> {
    let (support, hits) = match conjunction(ds, lits) {
        Some(b) => (b.count_ones(), b.and_count(ds.outcome_bits())),
        None => (ds.n_rows(), ds.outcome_bits().count_ones()),
    };
    (support > 0).then(|| hits as f64 / support as f64)
}

/// Per-column value counts, keyed by column name. Handy for summaries.
pub fn ones_by_column(ds: &BinaryDataset) -> BTreeMap<String, usize> {
    ds.columns()
        .iter()
        .map(|c| (c.name.clone(), c.bits.count_ones()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(text: &str, schema: &str, outcome: &str) -> Result<BinaryDataset> {
        let schema = AttributeSchema::parse(schema)?;
        read_csv(text.as_bytes(), &schema, outcome)
    }

    #[test]
    fn median_split_odd_even_and_constant() {
        assert_eq!(binarize_numeric_median(&[1.0, 2.0, 3.0, 4.0, 5.0]), vec![0, 0, 0, 1, 1]);
        assert_eq!(binarize_numeric_median(&[1.0, 2.0, 3.0, 4.0]), vec![0, 0, 1, 1]);
        assert_eq!(binarize_numeric_median(&[7.0; 6]), vec![0; 6]);
        assert_eq!(binarize_numeric_median(&[4.0, 1.0, 3.0, 2.0]), vec![1, 0, 1, 0]);
    }

    #[test]
    fn median_split_matches_lower_median_brute_force() {
        // Brute force: the lower median is the smallest value with at least half the
        // sample at or below it.
        let values = [5.0, 3.0, 9.0, 1.0, 3.0, 7.0, 2.0, 8.0];
        let n = values.len();
        let lower_median = values
            .iter()
            .copied()
            .filter(|&m| values.iter().filter(|&&v| v <= m).count() * 2 >= n)
            .fold(f64::INFINITY, f64::min);
        let expect: Vec<u8> = values.iter().map(|&v| u8::from(v > lower_median)).collect();
        assert_eq!(binarize_numeric_median(&values), expect);
    }

    #[test]
    fn outcome_only_file_has_no_features() {
        let ds = load_str("y\n1\n", "", "y").unwrap();
        assert_eq!(ds.n_rows(), 1);
        assert_eq!(ds.n_features(), 0);
    }

    #[test]
    fn categorical_one_hot_partitions_rows() {
        let mut text = String::from("colour,y\n");
        let levels = ["red", "green", "blue", "red", "red", "blue", "green", "green", "red", "blue"];
        for (i, l) in levels.iter().enumerate() {
            text.push_str(&format!("{l},{}\n", i % 2));
        }
        let ds = load_str(&text, "colour.kind=categorical\n", "y").unwrap();
        let group: Vec<usize> = ds.features().filter(|&c| ds.column(c).group == "colour").collect();
        assert_eq!(group.len(), 3);
        for row in 0..ds.n_rows() {
            let sum: usize = group.iter().map(|&c| ds.value(row, c) as usize).sum();
            assert_eq!(sum, 1, "row {row}");
        }
        let names: Vec<&str> = group.iter().map(|&c| ds.column(c).name.as_str()).collect();
        assert_eq!(names, ["colour.blue", "colour.green", "colour.red"]);
    }

    #[test]
    fn schema_defaults_and_dotted_names() {
        let s = AttributeSchema::parse("# c\nEducation.num.kind=numeric\nsex.symmetric=false\n").unwrap();
        let edu = s.get("Education.num").unwrap();
        assert_eq!(edu.kind, AttributeKind::Numeric);
        assert!(edu.symmetric);
        let sex = s.get("sex").unwrap();
        assert_eq!(sex.kind, AttributeKind::Binary);
        assert!(!sex.symmetric);
        assert!(AttributeSchema::parse("a.colour=red").is_err());
        assert!(AttributeSchema::parse("a.kind=text").is_err());
    }

    #[test]
    fn load_errors() {
        let err = load_str("a,y\n1,0\n", "b.kind=numeric\n", "y").unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
        let err = load_str("a,y\n1,0\n", "", "z").unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
        let err = load_str("a,y\n1.5,0\nabc,1\n", "a.kind=numeric\n", "y").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 1, .. }), "{err}");
        let err = load_str("a,y\n1,0\n,1\n", "", "y").unwrap_err();
        assert!(matches!(err, Error::MissingValue { row: 1, .. }), "{err}");
        let err = load_str("a,y\n2,0\n", "", "y").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 0, .. }), "{err}");
    }

    #[test]
    fn counts_and_conditionals() {
        let ds = BinaryDataset::from_rows(
            &["a", "b", "y"],
            &[vec![1, 0, 1], vec![1, 1, 1], vec![0, 1, 0], vec![0, 0, 0], vec![1, 1, 0]],
            "y",
        )
        .unwrap();
        assert_eq!(marginal_count(&ds, &[]), 5);
        assert_eq!(marginal_count(&ds, &[Literal::one(0)]), 3);
        assert_eq!(marginal_count(&ds, &[Literal::one(0), Literal::one(1)]), 2);
        assert_eq!(marginal_count(&ds, &[Literal::zero(0), Literal::zero(1)]), 1);
        assert_eq!(cond_prob_y(&ds, &[]), Some(0.4));
        assert_eq!(cond_prob_y(&ds, &[Literal::one(0), Literal::one(1)]), Some(0.5));
        assert_eq!(cond_prob_y(&ds, &[Literal::one(0), Literal::zero(0)]), None);
    }

    #[test]
    fn copy_of_outcome_has_probability_one() {
        let ds = BinaryDataset::from_rows(
            &["x", "y"],
            &[vec![1, 1], vec![0, 0], vec![1, 1], vec![0, 0]],
            "y",
        )
        .unwrap();
        assert_eq!(cond_prob_y(&ds, &[Literal::one(0)]), Some(1.0));
        assert_eq!(cond_prob_y(&ds, &[Literal::zero(0)]), Some(0.0));
    }
}
