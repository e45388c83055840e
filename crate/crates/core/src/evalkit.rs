//! Per-class accuracy tables and confusion matrices.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::classifier::TemplateRegistry;
use crate::error::{invalid, Error, Result};
use crate::raster::GrayImage;
use crate::scalar::Scalar;

/// Column that collects samples whose preprocessing found no hand.
pub const EMPTY_COLUMN: &str = "∅";

/// Percentage held as whole hundredths, truncated toward zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent {
    hundredths: u64,
}

impl Percent {
    pub fn hundredths(self) -> u64 {
        self.hundredths
    }

    pub fn as_f64(self) -> f64 {
        self.hundredths as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.hundredths / 100, self.hundredths % 100)
    }
}

/// `100 · recognized / input`, truncated (not rounded) to two decimals.
pub fn accuracy_pct(recognized: u64, input: u64) -> Result<Percent> {
    if input == 0 {
        return Err(invalid("accuracy of an empty class is undefined"));
    }
    if recognized > input {
        return Err(invalid(format!("{recognized} recognized out of only {input} inputs")));
    }
    Ok(Percent { hundredths: recognized * 10_000 / input })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRow {
    pub label: String,
    pub input: u64,
    pub recognized: u64,
    pub accuracy: Percent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationReport {
    /// Classes that received at least one input, in registry order.
    pub per_class: Vec<ClassRow>,
    pub total: Option<ClassRow>,
    /// Predicted-class columns: every enrolled label, then [`EMPTY_COLUMN`].
    pub columns: Vec<String>,
    /// `confusion[row][column]`, one row per entry of `per_class`.
    pub confusion: Vec<Vec<u64>>,
}

impl EvaluationReport {
    /// Builds a report from a square-plus-one confusion matrix whose rows and
    /// leading columns follow `labels`. Rows without inputs are dropped.
    pub fn from_confusion(labels: &[String], confusion: Vec<Vec<u64>>) -> Result<Self> {
        let n = labels.len();
        if confusion.len() != n || confusion.iter().any(|r| r.len() != n + 1) {
            return Err(invalid(format!("confusion matrix must be {n} x {}", n + 1)));
        }
        let mut per_class = Vec::new();
        let mut rows = Vec::new();
        for (i, row) in confusion.into_iter().enumerate() {
            let input: u64 = row.iter().sum();
            if input == 0 {
                continue;
            }
            let recognized = row[i];
            per_class.push(ClassRow {
                label: labels[i].clone(),
                input,
                recognized,
                accuracy: accuracy_pct(recognized, input)?,
            });
            rows.push(row);
        }
        let total = if per_class.is_empty() {
            None
        } else {
            let input = per_class.iter().map(|r| r.input).sum();
            let recognized = per_class.iter().map(|r| r.recognized).sum();
            Some(ClassRow { label: "Total".into(), input, recognized, accuracy: accuracy_pct(recognized, input)? })
        };
        let columns = labels.iter().cloned().chain([EMPTY_COLUMN.to_owned()]).collect();
        Ok(Self { per_class, total, columns, confusion: rows })
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.per_class.iter().map(|r| r.label.as_str())
    }
}

/// Classifies every `(label, image)` pair and tallies the outcome.
///
/// Rows appear in registry order. A sample whose preprocessing yields no
/// foreground is counted in the [`EMPTY_COLUMN`]; any other failure aborts.
pub fn evaluate<'a, T: Scalar>(
    registry: &TemplateRegistry<T>,
    samples: impl IntoIterator<Item = (&'a str, &'a GrayImage)>,
) -> Result<EvaluationReport> {
    let labels: Vec<String> = registry.labels().map(str::to_owned).collect();
    let index_of = |l: &str| labels.iter().position(|x| x == l);
    let samples: Vec<(usize, &GrayImage)> = samples
        .into_iter()
        .map(|(l, img)| {
            index_of(l)
                .map(|i| (i, img))
                .ok_or_else(|| Error::Config(format!("dataset label {l:?} is not enrolled in the registry")))
        })
        .collect::<Result<_>>()?;

    let predictions = samples
        .par_iter()
        .map(|&(truth, img)| match registry.recognize(img) {
            Ok(r) => Ok((truth, index_of(&r.label).expect("registry labels are known"))),
            Err(Error::EmptyForeground) => Ok((truth, labels.len())),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut confusion = vec![vec![0u64; labels.len() + 1]; labels.len()];
    for (truth, predicted) in predictions {
        confusion[truth][predicted] += 1;
    }
    EvaluationReport::from_confusion(&labels, confusion)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

/// Serializes a report. Text mirrors a four-column accuracy table; CSV adds
/// the confusion matrix as a second block.
pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> Vec<u8> {
    let mut out = Vec::new();
    match format {
        ReportFormat::Text => write_text(report, &mut out),
        ReportFormat::Csv => write_csv(report, &mut out),
    }
    .expect("writing to a Vec cannot fail");
    out
}

fn write_text(report: &EvaluationReport, out: &mut Vec<u8>) -> std::io::Result<()> {
    writeln!(out, "{:<14}{:>7}{:>12}{:>10}", "Hand Gesture", "Input", "Recognized", "Accuracy")?;
    for row in report.per_class.iter().chain(&report.total) {
        let pct = format!("{}%", row.accuracy);
        writeln!(out, "{:<14}{:>7}{:>12}{:>10}", row.label, row.input, row.recognized, pct)?;
    }
    Ok(())
}

fn write_csv(report: &EvaluationReport, out: &mut Vec<u8>) -> std::io::Result<()> {
    writeln!(out, "label,input,recognized,accuracy")?;
    if report.per_class.is_empty() {
        return Ok(());
    }
    for row in report.per_class.iter().chain(&report.total) {
        writeln!(out, "{},{},{},{}", row.label, row.input, row.recognized, row.accuracy)?;
    }
    writeln!(out)?;
    let header: Vec<&str> = std::iter::once("confusion").chain(report.columns.iter().map(String::as_str)).collect();
    writeln!(out, "{}", header.join(","))?;
    for (row, counts) in report.per_class.iter().zip(&report.confusion) {
        let cells: Vec<String> = counts.iter().map(u64::to_string).collect();
        writeln!(out, "{},{}", row.label, cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncates_not_rounds() {
        assert_eq!(accuracy_pct(20, 21).unwrap().to_string(), "95.23");
        assert_eq!(accuracy_pct(19, 21).unwrap().to_string(), "90.47");
        assert_eq!(accuracy_pct(498, 504).unwrap().to_string(), "98.80");
        assert_eq!(accuracy_pct(21, 21).unwrap().to_string(), "100.00");
        assert_eq!(accuracy_pct(0, 3).unwrap().to_string(), "0.00");
        assert!(accuracy_pct(1, 0).is_err());
        assert!(accuracy_pct(4, 3).is_err());
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = EvaluationReport::from_confusion(&[], vec![]).unwrap();
        assert_eq!(render_report(&r, ReportFormat::Text), b"Hand Gesture    Input  Recognized  Accuracy\n");
        assert_eq!(render_report(&r, ReportFormat::Csv), b"label,input,recognized,accuracy\n");
    }

    #[test]
    fn report_invariants() {
        let labels = vec!["A".to_string(), "S".to_string()];
        let r = EvaluationReport::from_confusion(&labels, vec![vec![20, 1, 0], vec![2, 18, 1]]).unwrap();
        let t = r.total.as_ref().unwrap();
        assert_eq!((t.input, t.recognized), (42, 38));
        for (i, row) in r.per_class.iter().enumerate() {
            assert_eq!(r.confusion[i].iter().sum::<u64>(), row.input);
            assert_eq!(r.confusion[i][i], row.recognized);
        }
        assert_eq!(r.columns, vec!["A", "S", EMPTY_COLUMN]);

        // a class with no inputs keeps its column but loses its row
        let r = EvaluationReport::from_confusion(&labels, vec![vec![3, 1, 0], vec![0, 0, 0]]).unwrap();
        assert_eq!(r.per_class.len(), 1);
        assert_eq!(r.confusion, vec![vec![3, 1, 0]]);
        assert!(EvaluationReport::from_confusion(&labels, vec![vec![1, 0]]).is_err());
    }
}
