//! CSV ingestion, min-max normalization, ε-neighborhood coverings and seeded
//! random refine/coarsen generators.
//!
//! Random mutations use ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! which is stable across platforms and `rand_chacha` 0.3 releases.

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits::ObjectSet;
use crate::system::{Covering, CoveringDecisionSystem, DecisionPartition, SystemError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    ParseError { line: u64, reason: String },
    #[error("line {line}: column {column:?} is not numeric")]
    NonNumericConditional { column: String, line: u64 },
    #[error("file has no data rows")]
    EmptyFile,
    #[error("decision column {0:?} not found in header")]
    UnknownDecisionColumn(String),
    #[error("table has no conditional attributes")]
    NoConditionalAttributes,
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("intensity must lie in (0, 1], got {0}")]
    InvalidIntensity(f64),
    #[error("attribute index {index} out of range for {count} attributes")]
    AttributeOutOfRange { index: usize, count: usize },
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Conditional attribute values (`n × a`) plus categorical decision labels.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericTable {
    pub attribute_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub decision_labels: Vec<String>,
}

impl NumericTable {
    pub fn new(attribute_names: Vec<String>, rows: Vec<Vec<f64>>, decision_labels: Vec<String>) -> Self {
        assert_eq!(rows.len(), decision_labels.len(), "one label per row");
        assert!(
            rows.iter().all(|r| r.len() == attribute_names.len()),
            "table must be rectangular"
        );
        NumericTable { attribute_names, rows, decision_labels }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn attribute_count(&self) -> usize {
        self.attribute_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Distinct decision labels in order of first appearance.
    pub fn classes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for l in &self.decision_labels {
            if !out.contains(&l.as_str()) {
                out.push(l);
            }
        }
        out
    }

    /// The first `k` rows.
    pub fn head(&self, k: usize) -> NumericTable {
        let k = k.min(self.n());
        NumericTable {
            attribute_names: self.attribute_names.clone(),
            rows: self.rows[..k].to_vec(),
            decision_labels: self.decision_labels[..k].to_vec(),
        }
    }

    /// Rows reordered by `order` (a permutation of row indices).
    pub fn permuted(&self, order: &[usize]) -> NumericTable {
        NumericTable {
            attribute_names: self.attribute_names.clone(),
            rows: order.iter().map(|&i| self.rows[i].clone()).collect(),
            decision_labels: order.iter().map(|&i| self.decision_labels[i].clone()).collect(),
        }
    }
}

/// Loads a headed CSV file. The decision column is `decision` if given,
/// otherwise the last column.
pub fn load_csv(path: impl AsRef<Path>, decision: Option<&str>) -> Result<NumericTable, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, decision)
}

pub fn read_csv<R: Read>(reader: R, decision: Option<&str>) -> Result<NumericTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_error(&e, 1))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(IngestError::EmptyFile);
    }
    let d = match decision {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::UnknownDecisionColumn(name.to_string()))?,
        None => header.len() - 1,
    };
    if header.len() < 2 {
        return Err(IngestError::NoConditionalAttributes);
    }
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != d)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| parse_error(&e, rows.len() as u64 + 2))?;
        let line = record.position().map_or(rows.len() as u64 + 2, |p| p.line());
        let mut row = Vec::with_capacity(names.len());
        for (j, cell) in record.iter().enumerate() {
            if cell.is_empty() || cell == "?" {
                return Err(IngestError::ParseError {
                    line,
                    reason: format!("missing value in column {:?}", header[j]),
                });
            }
            if j == d {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| IngestError::NonNumericConditional {
                column: header[j].clone(),
                line,
            })?;
            if !v.is_finite() {
                return Err(IngestError::NonNumericConditional { column: header[j].clone(), line });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(IngestError::EmptyFile);
    }
    Ok(NumericTable::new(names, rows, labels))
}

fn parse_error(e: &csv::Error, fallback: u64) -> IngestError {
    let line = e.position().map_or(fallback, |p| p.line());
    IngestError::ParseError { line, reason: e.to_string() }
}

/// Per-attribute min-max scaling into `[0, 1]`; constant columns become 0.
pub fn normalize(table: &NumericTable) -> NumericTable {
    let a = table.attribute_count();
    let mut lo = vec![f64::INFINITY; a];
    let mut hi = vec![f64::NEG_INFINITY; a];
    for r in &table.rows {
        for j in 0..a {
            lo[j] = lo[j].min(r[j]);
            hi[j] = hi[j].max(r[j]);
        }
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            (0..a)
                .map(|j| {
                    let range = hi[j] - lo[j];
                    if range > 0.0 {
                        (r[j] - lo[j]) / range
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    NumericTable {
        attribute_names: table.attribute_names.clone(),
        rows,
        decision_labels: table.decision_labels.clone(),
    }
}

fn check_epsilon(eps: f64) -> Result<(), IngestError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(IngestError::InvalidEpsilon(eps))
    }
}

/// `{N(x) : x ∈ U}` with `N(x) = {y : |v(x) − v(y)| ≤ ε}` on one attribute.
///
/// Neighborhoods are contiguous windows of the sorted values, so each block
/// costs one pass over its window; duplicates are dropped by window bounds.
pub fn neighborhood_covering(table: &NumericTable, attribute: usize, eps: f64) -> Result<Covering, IngestError> {
    check_epsilon(eps)?;
    if attribute >= table.attribute_count() {
        return Err(IngestError::AttributeOutOfRange { index: attribute, count: table.attribute_count() });
    }
    let n = table.n();
    let values = table.column(attribute);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut rank = vec![0; n];
    for (k, &x) in order.iter().enumerate() {
        rank[x] = k;
    }

    let mut seen = std::collections::HashSet::new();
    let mut blocks = Vec::new();
    for x in 0..n {
        let v = values[x];
        let mut lo = rank[x];
        while lo > 0 && (v - values[order[lo - 1]]).abs() <= eps {
            lo -= 1;
        }
        let mut hi = rank[x];
        while hi + 1 < n && (values[order[hi + 1]] - v).abs() <= eps {
            hi += 1;
        }
        if seen.insert((lo, hi)) {
            blocks.push(ObjectSet::from_iter_checked(n, order[lo..=hi].iter().copied()));
        }
    }
    Ok(Covering::new(n, blocks)?)
}

/// One covering from the Euclidean distance over all attributes.
pub fn joint_covering(table: &NumericTable, eps: f64) -> Result<Covering, IngestError> {
    check_epsilon(eps)?;
    let n = table.n();
    let eps2 = eps * eps;
    let blocks = (0..n)
        .map(|x| {
            let rx = &table.rows[x];
            let near = (0..n).filter(|&y| {
                let d2: f64 = rx.iter().zip(&table.rows[y]).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= eps2
            });
            ObjectSet::from_iter_checked(n, near)
        })
        .collect();
    Ok(Covering::new(n, blocks)?)
}

fn decision_of(table: &NumericTable) -> Result<DecisionPartition, IngestError> {
    if table.n() == 0 {
        return Err(IngestError::EmptyFile);
    }
    let decision = DecisionPartition::from_labels(&table.decision_labels)?;
    if decision.len() == 1 {
        log::warn!("all objects share one decision label; every block is admissible");
    }
    Ok(decision)
}

fn row_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("row{i}")).collect()
}

/// One ε-neighborhood covering per conditional attribute; decision classes
/// group equal labels.
pub fn build_cdis(table: &NumericTable, eps: f64) -> Result<CoveringDecisionSystem, IngestError> {
    check_epsilon(eps)?;
    if table.attribute_count() == 0 {
        return Err(IngestError::NoConditionalAttributes);
    }
    let decision = decision_of(table)?;
    let coverings = (0..table.attribute_count())
        .map(|j| neighborhood_covering(table, j, eps))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoveringDecisionSystem::new(coverings, decision)?.with_labels(row_labels(table.n()))?)
}

/// A single joint covering over all attributes.
pub fn build_joint_cdis(table: &NumericTable, eps: f64) -> Result<CoveringDecisionSystem, IngestError> {
    let decision = decision_of(table)?;
    let covering = joint_covering(table, eps)?;
    Ok(CoveringDecisionSystem::new(vec![covering], decision)?.with_labels(row_labels(table.n()))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationWarning {
    /// Every block is a singleton; nothing was split.
    NothingToSplit,
    /// The covering has one block; nothing was merged.
    SingleBlock,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MutationOutcome {
    pub covering: Covering,
    pub warning: Option<MutationWarning>,
}

fn check_intensity(intensity: f64) -> Result<(), IngestError> {
    if intensity > 0.0 && intensity <= 1.0 {
        Ok(())
    } else {
        Err(IngestError::InvalidIntensity(intensity))
    }
}

/// Splits `⌈intensity·|blocks|⌉` randomly chosen non-singleton blocks (fewer
/// if not enough exist) into two disjoint nonempty parts each.
pub fn random_refine(covering: &Covering, seed: u64, intensity: f64) -> Result<MutationOutcome, IngestError> {
    check_intensity(intensity)?;
    let eligible: Vec<usize> = (0..covering.len()).filter(|&b| covering.blocks()[b].len() >= 2).collect();
    if eligible.is_empty() {
        log::warn!("refine: every block is a singleton, covering left unchanged");
        return Ok(MutationOutcome {
            covering: covering.clone(),
            warning: Some(MutationWarning::NothingToSplit),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let want = (intensity * covering.len() as f64).ceil() as usize;
    let k = want.clamp(1, eligible.len());
    let mut split = vec![false; covering.len()];
    for i in rand::seq::index::sample(&mut rng, eligible.len(), k) {
        split[eligible[i]] = true;
    }

    let n = covering.universe_size();
    let mut blocks = Vec::with_capacity(covering.len() + k);
    for (b, block) in covering.blocks().iter().enumerate() {
        if !split[b] {
            blocks.push(block.clone());
            continue;
        }
        let mut members = block.to_vec();
        members.shuffle(&mut rng);
        let cut = rng.gen_range(1..members.len());
        blocks.push(ObjectSet::from_iter_checked(n, members[..cut].iter().copied()));
        blocks.push(ObjectSet::from_iter_checked(n, members[cut..].iter().copied()));
    }
    Ok(MutationOutcome { covering: Covering::new(n, blocks)?, warning: None })
}

/// Merges `⌈intensity·|blocks|/2⌉` disjoint random pairs of blocks (at most
/// `⌊|blocks|/2⌋`). Each merged block takes the place of the earlier of its pair.
pub fn random_coarsen(covering: &Covering, seed: u64, intensity: f64) -> Result<MutationOutcome, IngestError> {
    check_intensity(intensity)?;
    let len = covering.len();
    if len < 2 {
        log::warn!("coarsen: covering has a single block, left unchanged");
        return Ok(MutationOutcome {
            covering: covering.clone(),
            warning: Some(MutationWarning::SingleBlock),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let want = (intensity * len as f64 / 2.0).ceil() as usize;
    let pairs = want.clamp(1, len / 2);
    let mut picked: Vec<usize> = (0..len).collect();
    picked.shuffle(&mut rng);

    let mut merged: Vec<Option<ObjectSet>> = covering.blocks().iter().cloned().map(Some).collect();
    for pair in picked[..2 * pairs].chunks(2) {
        let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        let other = merged[b].take().expect("pairs are disjoint");
        merged[a].as_mut().expect("pairs are disjoint").union_with(&other);
    }
    let blocks = merged.into_iter().flatten().collect();
    Ok(MutationOutcome {
        covering: Covering::new(covering.universe_size(), blocks)?,
        warning: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::{verify_coarsening, verify_refinement};

    fn toy() -> NumericTable {
        read_csv("a,b,class\n0,1,p\n1,0,q\n1,1,p\n".as_bytes(), None).unwrap()
    }

    fn one_column(values: &[f64]) -> NumericTable {
        NumericTable::new(
            vec!["v".into()],
            values.iter().map(|&v| vec![v]).collect(),
            vec!["d".into(); values.len()],
        )
    }

    #[test]
    fn parses_toy_file() {
        let t = toy();
        assert_eq!((t.n(), t.attribute_count()), (3, 2));
        assert_eq!(t.decision_labels, vec!["p", "q", "p"]);
        assert_eq!(t.rows[1], vec![1.0, 0.0]);
    }

    #[test]
    fn named_decision_column() {
        let t = read_csv("class,a\np,0.5\nq,1\n".as_bytes(), Some("class")).unwrap();
        assert_eq!(t.attribute_names, vec!["a"]);
        assert_eq!(t.decision_labels, vec!["p", "q"]);
        assert!(matches!(
            read_csv("class,a\np,0.5\n".as_bytes(), Some("label")),
            Err(IngestError::UnknownDecisionColumn(_))
        ));
    }

    #[test]
    fn missing_cell_reports_line() {
        let err = read_csv("a,b,class\n0,1,p\n1,,q\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, IngestError::ParseError { line: 3, .. }), "{err:?}");
        let err = read_csv("a,b,class\n0,?,p\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, IngestError::ParseError { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn ragged_row_is_a_parse_error() {
        let err = read_csv("a,b,class\n0,1,p\n1,q\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, IngestError::ParseError { .. }), "{err:?}");
    }

    #[test]
    fn text_in_conditional_column() {
        let err = read_csv("a,b,class\n0,x,p\n".as_bytes(), None).unwrap_err();
        assert!(matches!(
            err,
            IngestError::NonNumericConditional { ref column, line: 2 } if column == "b"
        ));
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(read_csv("a,class\n".as_bytes(), None), Err(IngestError::EmptyFile)));
        assert!(matches!(read_csv("".as_bytes(), None), Err(IngestError::EmptyFile)));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&one_column(&[2.0, 4.0, 6.0])).column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(normalize(&one_column(&[5.0, 5.0])).column(0), vec![0.0, 0.0]);
        let unit = one_column(&[0.0, 0.3, 1.0]);
        assert_eq!(normalize(&unit), unit);
    }

    #[test]
    fn neighborhoods_of_three_values() {
        let c = neighborhood_covering(&one_column(&[0.0, 0.04, 1.0]), 0, 0.05).unwrap();
        assert_eq!(c.to_lists(), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn wide_epsilon_gives_universe() {
        let c = neighborhood_covering(&one_column(&[0.0, 0.5, 1.0]), 0, 1.0).unwrap();
        assert_eq!(c.to_lists(), vec![vec![0, 1, 2]]);
        let c = neighborhood_covering(&one_column(&[0.3]), 0, 0.05).unwrap();
        assert_eq!(c.to_lists(), vec![vec![0]]);
    }

    #[test]
    fn overlapping_windows() {
        // 0.0-0.05 and 0.05-0.1 overlap at the middle value.
        let c = neighborhood_covering(&one_column(&[0.0, 0.05, 0.1]), 0, 0.05).unwrap();
        assert_eq!(c.to_lists(), vec![vec![0, 1], vec![0, 1, 2], vec![1, 2]]);
    }

    #[test]
    fn non_positive_epsilon_rejected() {
        assert!(matches!(
            neighborhood_covering(&toy(), 0, 0.0),
            Err(IngestError::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn toy_system_shape() {
        let s = build_cdis(&normalize(&toy()), 0.05).unwrap();
        assert_eq!((s.len(), s.decision().len()), (2, 2));
        assert_eq!(s.covering(0).to_lists(), vec![vec![0], vec![1, 2]]);
        assert_eq!(s.label(0), "row1");
    }

    #[test]
    fn joint_covering_on_toy() {
        let c = joint_covering(&normalize(&toy()), 0.05).unwrap();
        assert_eq!(c.to_lists(), vec![vec![0], vec![1], vec![2]]);
        let c = joint_covering(&normalize(&toy()), 1.0).unwrap();
        assert_eq!(c.to_lists(), vec![vec![0, 2], vec![1, 2], vec![0, 1, 2]]);
    }

    #[test]
    fn refine_all_pairs_into_singletons() {
        let c = Covering::from_lists(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let out = random_refine(&c, 7, 1.0).unwrap();
        let mut lists = out.covering.to_lists();
        lists.sort();
        assert_eq!(lists, vec![vec![0], vec![1], vec![2], vec![3]]);
        assert!(verify_refinement(&c, &out.covering));
    }

    #[test]
    fn refine_singletons_warns() {
        let c = Covering::from_lists(2, &[vec![0], vec![1]]).unwrap();
        let out = random_refine(&c, 1, 0.5).unwrap();
        assert_eq!(out.warning, Some(MutationWarning::NothingToSplit));
        assert_eq!(out.covering, c);
    }

    #[test]
    fn refine_can_peel_one_member() {
        let c = Covering::from_lists(3, &[vec![0, 1, 2]]).unwrap();
        let wanted = Covering::from_lists(3, &[vec![0, 1], vec![2]]).unwrap();
        assert!((0..64).any(|seed| random_refine(&c, seed, 1.0).unwrap().covering == wanted));
    }

    #[test]
    fn coarsen_four_blocks_fully() {
        let c = Covering::from_lists(4, &[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        let out = random_coarsen(&c, 3, 1.0).unwrap();
        assert_eq!(out.covering.len(), 2);
        assert!(verify_coarsening(&c, &out.covering));
    }

    #[test]
    fn coarsen_single_block_warns() {
        let c = Covering::from_lists(2, &[vec![0, 1]]).unwrap();
        let out = random_coarsen(&c, 0, 1.0).unwrap();
        assert_eq!(out.warning, Some(MutationWarning::SingleBlock));
        assert_eq!(out.covering, c);
    }

    #[test]
    fn mutations_are_reproducible() {
        let c = Covering::from_lists(6, &[vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![5, 0]]).unwrap();
        assert_eq!(random_refine(&c, 42, 0.5).unwrap(), random_refine(&c, 42, 0.5).unwrap());
        assert_eq!(random_coarsen(&c, 42, 0.5).unwrap(), random_coarsen(&c, 42, 0.5).unwrap());
    }

    #[test]
    fn intensity_bounds() {
        let c = Covering::from_lists(2, &[vec![0, 1]]).unwrap();
        assert!(matches!(random_refine(&c, 0, 0.0), Err(IngestError::InvalidIntensity(_))));
        assert!(matches!(random_coarsen(&c, 0, 1.5), Err(IngestError::InvalidIntensity(_))));
    }
}
