//! Statistics over event logs and questionnaire data.

mod gameplay;
mod report;
mod special;
mod sri;
mod stats;
mod tdist;

use thiserror::Error;

pub use gameplay::{gameplay_stats, gameplay_stats_from_records, GameplayAccumulator, GameplayStats};
pub use report::{analyze, parse_report, write_report, ReportRow, REPORT_HEADER, SIGNIFICANCE_P};
pub use special::{incomplete_beta, ln_gamma};
pub use sri::{pair_positivity, paired_sample, parse_sri, write_sri, Group, SriRow, SRI_HEADER};
pub use stats::{experience_stats, mean_sd, paired_t, positivity, PairedSample, QuestionStats, TTest};
pub use tdist::{t_critical, upper_tail};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{item} = {value} is out of range")]
    OutOfRange { item: String, value: i64 },
    #[error("pre has {pre} values but post has {post}")]
    LengthMismatch { pre: usize, post: usize },
    #[error("a paired sample needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("zero variance: every difference is identical")]
    ZeroVariance,
    #[error("degrees of freedom must be at least 1, got {0}")]
    InvalidDegreesOfFreedom(u64),
    #[error("one-tailed p must lie in (0, 0.5), got {0}")]
    InvalidProbability(f64),
    #[error("no values")]
    Empty,
    #[error("pair p{0} -> p{1} appears more than once")]
    DuplicatePair(u64, u64),
    #[error("pair p{0} -> p{1} has no counterpart in the other dataset")]
    UnmatchedPair(u64, u64),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
