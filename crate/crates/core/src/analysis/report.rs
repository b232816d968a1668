//! Pre/post positivity report, one row per group.

use std::fmt::Write as _;

use super::{pair_positivity, paired_t, t_critical, AnalysisError, Group, PairedSample, SriRow};

pub const REPORT_HEADER: &str = "group\tn\tpre-mean\tpost-mean\tt\tdf\tt0(0.001)\tsignificant";

/// One-tailed significance level used in the report.
pub const SIGNIFICANCE_P: f64 = 0.001;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub group: Group,
    pub n: usize,
    pub pre_mean: Option<f64>,
    pub post_mean: Option<f64>,
    /// Absent when fewer than two pairs or when every difference is equal.
    pub t: Option<f64>,
    pub df: Option<u64>,
    pub t0: Option<f64>,
    pub significant: bool,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn analyze(pre: &[SriRow], post: &[SriRow]) -> Result<Vec<ReportRow>, AnalysisError> {
    Group::ALL
        .iter()
        .map(|&group| {
            let (a, b) = pair_positivity(pre, post, group)?;
            let n = a.len();
            let (pre_mean, post_mean) = (mean(&a), mean(&b));
            let test = match PairedSample::new(a, b) {
                Ok(sample) => match paired_t(&sample) {
                    Ok(t) => Some(t),
                    Err(AnalysisError::ZeroVariance) => None,
                    Err(e) => return Err(e),
                },
                Err(AnalysisError::TooFewPairs(_)) => None,
                Err(e) => return Err(e),
            };
            let df = (n >= 2).then(|| n as u64 - 1);
            let t0 = df.map(|df| t_critical(df, SIGNIFICANCE_P)).transpose()?;
            let t = test.map(|r| r.t);
            let significant = matches!((t, t0), (Some(t), Some(t0)) if t > t0);
            Ok(ReportRow {
                group,
                n,
                pre_mean,
                post_mean,
                t,
                df,
                t0,
                significant,
            })
        })
        .collect()
}

fn cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn write_report(rows: &[ReportRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.group.label(),
            r.n,
            cell(r.pre_mean),
            cell(r.post_mean),
            cell(r.t),
            cell(r.df),
            cell(r.t0),
            r.significant as u8
        );
    }
    out
}

pub fn parse_report(text: &str) -> Result<Vec<ReportRow>, AnalysisError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 && line == REPORT_HEADER || line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| AnalysisError::Parse { line: i + 1, reason };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 8 {
            return Err(bad(format!("expected 8 columns, found {}", cols.len())));
        }
        let group = Group::ALL
            .into_iter()
            .find(|g| g.label() == cols[0])
            .ok_or_else(|| bad(format!("unknown group {:?}", cols[0])))?;
        let float = |s: &str| -> Result<Option<f64>, AnalysisError> {
            if s == "NA" {
                return Ok(None);
            }
            s.parse().map(Some).map_err(|_| bad(format!("bad number {s:?}")))
        };
        rows.push(ReportRow {
            group,
            n: cols[1].parse().map_err(|_| bad(format!("bad n {:?}", cols[1])))?,
            pre_mean: float(cols[2])?,
            post_mean: float(cols[3])?,
            t: float(cols[4])?,
            df: match cols[5] {
                "NA" => None,
                s => Some(s.parse().map_err(|_| bad(format!("bad df {s:?}")))?),
            },
            t0: float(cols[6])?,
            significant: match cols[7] {
                "1" => true,
                "0" => false,
                s => return Err(bad(format!("bad flag {s:?}"))),
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::PlayerId;

    fn row(p: u64, f: u64, close: bool, q: u8) -> SriRow {
        SriRow {
            player_id: PlayerId(p),
            friend_id: PlayerId(f),
            close,
            answers: [q, q, q, 1, 1, 1],
        }
    }

    #[test]
    fn report_round_trip_and_flags() {
        let pre: Vec<_> = (0..40).map(|i| row(i, i + 100, i % 3 == 0, 2 + (i % 3) as u8)).collect();
        let post: Vec<_> = (0..40)
            .map(|i| row(i, i + 100, i % 3 == 0, 3 + (i % 3) as u8 + (i % 2) as u8))
            .collect();
        let rows = analyze(&pre, &post).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].n, 40);
        assert_eq!(rows[1].n + rows[2].n, 40);
        assert_eq!(rows[0].df, Some(39));
        assert!(rows[0].significant);
        let text = write_report(&rows);
        assert!(text.starts_with(REPORT_HEADER));
        assert_eq!(parse_report(&text).unwrap(), rows);
    }

    #[test]
    fn degenerate_groups_report_na() {
        let pre = vec![row(1, 2, true, 3), row(1, 3, false, 3), row(1, 4, false, 4)];
        let post = vec![row(1, 2, true, 4), row(1, 3, false, 4), row(1, 4, false, 5)];
        let rows = analyze(&pre, &post).unwrap();
        // Every difference is +1.
        assert_eq!(rows[0].t, None);
        assert_eq!(rows[0].df, Some(2));
        assert!(!rows[0].significant);
        assert_eq!((rows[1].n, rows[1].df, rows[1].t0), (1, None, None));
        let text = write_report(&rows);
        assert!(text.contains("close\t1\t3\t4\tNA\tNA\tNA\t0"), "{text}");
        assert_eq!(parse_report(&text).unwrap(), rows);
    }
}
