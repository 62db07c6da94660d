//! Text formats for matrices, orders and fit results, and the heatmap
//! image writer.

use serde::Serialize;

use crate::dissimilarity::{Dissimilarity, TotalOrder};
use crate::error::{Error, Result};
use crate::solver::{FitReport, ProbeOutcome};

/// Relative tolerance for symmetric entries when reading a matrix.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A parsed matrix file: the dissimilarity and one label per element.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFile {
    pub labels: Vec<String>,
    pub d: Dissimilarity,
}

impl MatrixFile {
    /// Labels `0..n` as strings.
    pub fn unlabelled(d: Dissimilarity) -> Self {
        let labels = default_labels(d.n());
        Self { labels, d }
    }

    pub fn has_default_labels(&self) -> bool {
        self.labels == default_labels(self.d.n())
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn order_labels(&self, order: &TotalOrder) -> Vec<String> {
        order.as_slice().iter().map(|&x| self.labels[x].clone()).collect()
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

// Non-empty lines with comments stripped, tagged with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty())
}

/// Parses a matrix file: an optional `labels` line, then either `n` rows of
/// `n` entries or the lower triangle with its diagonal (row `i` holds `i+1`
/// entries). Fields are separated by whitespace and/or commas; `#` starts a
/// comment.
pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    let mut labels = None;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (ln, line) in content_lines(text) {
        let mut it = fields(line).peekable();
        if rows.is_empty() && labels.is_none() && it.peek() == Some(&"labels") {
            it.next();
            let l: Vec<String> = it.map(str::to_string).collect();
            if l.is_empty() {
                return Err(parse_err(ln, "empty labels line"));
            }
            labels = Some((ln, l));
            continue;
        }
        let row = it
            .map(|f| f.parse::<f64>().map_err(|_| parse_err(ln, format!("not a number: {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((ln, row));
    }
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(0, "no matrix rows"));
    }
    let lower = rows.iter().enumerate().all(|(i, (_, r))| r.len() == i + 1);
    let square: Vec<Vec<f64>> = if lower && n > 1 {
        (0..n)
            .map(|i| (0..n).map(|j| if j <= i { rows[i].1[j] } else { rows[j].1[i] }).collect())
            .collect()
    } else {
        if let Some((ln, r)) = rows.iter().find(|(_, r)| r.len() != n) {
            return Err(parse_err(*ln, format!("expected {n} entries, found {}", r.len())));
        }
        rows.into_iter().map(|(_, r)| r).collect()
    };
    let d = Dissimilarity::from_square(&square, SYMMETRY_TOLERANCE)?;
    let labels = match labels {
        Some((ln, l)) => {
            if l.len() != n {
                return Err(parse_err(ln, format!("{} labels for {n} elements", l.len())));
            }
            let mut sorted = l.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(parse_err(ln, "duplicate label"));
            }
            l
        }
        None => default_labels(n),
    };
    Ok(MatrixFile { labels, d })
}

/// Canonical square formatting; `parse_matrix` reads it back exactly.
pub fn write_matrix(m: &MatrixFile) -> String {
    let mut out = String::new();
    if !m.has_default_labels() {
        out.push_str("labels ");
        out.push_str(&m.labels.join(" "));
        out.push('\n');
    }
    for row in m.d.to_rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Reads an order file: one label per line, blank lines and `#` comments
/// ignored.
pub fn parse_order(text: &str, m: &MatrixFile) -> Result<TotalOrder> {
    let mut perm = Vec::new();
    for (ln, line) in content_lines(text) {
        let idx = m.index_of(line).ok_or_else(|| parse_err(ln, format!("unknown label {line:?}")))?;
        perm.push(idx);
    }
    if perm.len() != m.d.n() {
        return Err(Error::InvalidOrder {
            n: m.d.n(),
            reason: format!("{} labels listed", perm.len()),
        });
    }
    TotalOrder::new(perm)
}

pub fn write_order(order: &TotalOrder, m: &MatrixFile) -> String {
    m.order_labels(order).into_iter().map(|l| l + "\n").collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub epsilon: f64,
    pub outcome: String,
}

/// What `robfit fit` reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub permutation: Vec<String>,
    pub accepted_epsilon: f64,
    pub achieved_error: f64,
    pub search_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
    /// Fitted matrix in input element order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fitted: Option<Vec<Vec<f64>>>,
}

/// Outcome of rerunning the fit with the other search mode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub search_mode: String,
    pub accepted_epsilon: f64,
    pub agree: bool,
}

fn outcome_text(o: &ProbeOutcome) -> String {
    match o {
        ProbeOutcome::Feasible => "feasible".to_string(),
        ProbeOutcome::Infeasible(e) => format!("infeasible ({e})"),
        ProbeOutcome::Internal(e) => format!("internal ({e})"),
    }
}

impl ResultRecord {
    pub fn from_report(m: &MatrixFile, report: &FitReport, trace: bool, fitted: bool) -> Self {
        let r = &report.result;
        Self {
            permutation: m.order_labels(&r.order),
            accepted_epsilon: r.accepted_epsilon,
            achieved_error: r.achieved_error,
            search_mode: report.mode.name().to_string(),
            cross_check: None,
            trace: trace.then(|| {
                report
                    .trace
                    .iter()
                    .map(|p| TraceEntry {
                        epsilon: p.eps,
                        outcome: outcome_text(&p.outcome),
                    })
                    .collect()
            }),
            fitted: fitted.then(|| r.fitted.to_rows()),
        }
    }

    /// Line-oriented `key: value` form. Trace entries are `trace: <eps>
    /// <outcome>`; the fitted matrix follows a `fitted:` line, one row per
    /// line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "permutation: {}\naccepted_epsilon: {}\nachieved_error: {}\nsearch_mode: {}\n",
            self.permutation.join(" "),
            self.accepted_epsilon,
            self.achieved_error,
            self.search_mode
        );
        if let Some(c) = &self.cross_check {
            out.push_str(&format!(
                "cross_check: {} {} {}\n",
                c.search_mode,
                c.accepted_epsilon,
                if c.agree { "agree" } else { "disagree" }
            ));
        }
        for t in self.trace.iter().flatten() {
            out.push_str(&format!("trace: {} {}\n", t.epsilon, t.outcome));
        }
        if let Some(rows) = &self.fitted {
            out.push_str("fitted:\n");
            for row in rows {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&cells.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes") + "\n"
    }
}

/// Binary PPM (P6) of `d` with rows and columns in `order`, gray levels
/// min–max normalized (smallest entry black). A constant matrix is black.
pub fn heatmap_ppm(d: &Dissimilarity, order: &TotalOrder) -> Vec<u8> {
    let n = d.n();
    let p = order.as_slice();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in 0..n {
        for y in 0..n {
            lo = lo.min(d.get(x, y));
            hi = hi.max(d.get(x, y));
        }
    }
    let mut out = format!("P6\n{n} {n}\n255\n").into_bytes();
    for &x in p {
        for &y in p {
            let g = if hi > lo {
                (255.0 * (d.get(x, y) - lo) / (hi - lo)).round() as u8
            } else {
                0
            };
            out.extend_from_slice(&[g, g, g]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_lower_and_labels() {
        let sq = parse_matrix("# e\n0 1 2\n1 0 3\n2 3 0\n").unwrap();
        let lo = parse_matrix("0\n1, 0\n2,3,0\n").unwrap();
        assert_eq!(sq, lo);
        assert_eq!(sq.labels, vec!["0", "1", "2"]);
        let l = parse_matrix("labels a b\n0 4 # x\n\n4 0\n").unwrap();
        assert_eq!(l.labels, vec!["a", "b"]);
        assert_eq!(l.d.get(0, 1), 4.0);
        assert_eq!(parse_matrix("0\n").unwrap().d.n(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_matrix("0 1 2\n1 0\n2 3 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_matrix("0 1\n1.5 0\n"), Err(Error::NotSymmetric { .. })));
        assert!(matches!(parse_matrix("1 1\n1 0\n"), Err(Error::NonZeroDiagonal { .. })));
        assert!(matches!(parse_matrix("0 x\nx 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("labels a\n0 1\n1 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_matrix("labels a a\n0 1\n1 0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_matrix("# only\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_matrix("0 -1\n-1 0\n"), Err(Error::Negative { .. })));
        // within the read tolerance: averaged
        let m = parse_matrix("0 1\n1.0000000000001 0\n").unwrap();
        assert!((m.d.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn write_round_trip() {
        let m = parse_matrix("labels p q r\n0 0.1 2.5e3\n0.1 0 7\n2.5e3 7 0\n").unwrap();
        let text = write_matrix(&m);
        assert_eq!(text, "labels p q r\n0 0.1 2500\n0.1 0 7\n2500 7 0\n");
        assert_eq!(parse_matrix(&text).unwrap(), m);
        assert_eq!(write_matrix(&parse_matrix(&text).unwrap()), text);
    }

    #[test]
    fn order_files() {
        let m = parse_matrix("labels a b c\n0 1 2\n1 0 1\n2 1 0\n").unwrap();
        let o = parse_order("c\n# skip\na\nb\n", &m).unwrap();
        assert_eq!(o.as_slice(), &[2, 0, 1]);
        assert_eq!(write_order(&o, &m), "c\na\nb\n");
        assert!(matches!(parse_order("a\nz\n", &m), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_order("a\nb\n", &m), Err(Error::InvalidOrder { .. })));
    }

    #[test]
    fn heatmap_bytes() {
        let one = Dissimilarity::zeros(1).unwrap();
        assert_eq!(heatmap_ppm(&one, &TotalOrder::identity(1)), b"P6\n1 1\n255\n\0\0\0".to_vec());
        let line = Dissimilarity::from_fn(3, |x, y| (y - x) as f64).unwrap();
        let img = heatmap_ppm(&line, &TotalOrder::identity(3));
        let header = b"P6\n3 3\n255\n".len();
        let gray: Vec<u8> = img[header..].chunks(3).map(|p| p[0]).collect();
        assert_eq!(gray, vec![0, 128, 255, 128, 0, 128, 255, 128, 0]);
    }
}
