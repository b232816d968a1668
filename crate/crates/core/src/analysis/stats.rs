use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Arithmetic mean and sample standard deviation (n − 1 denominator).
/// The sd is `None` for fewer than two values.
pub fn mean_sd(values: &[f64]) -> Option<(f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Some((mean, None));
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Some((mean, Some((ss / (n - 1.0)).sqrt())))
}

/// Friendship positivity: the mean of the first three questionnaire items.
pub fn positivity(q: &[u8; 6]) -> Result<f64, AnalysisError> {
    for (i, &v) in q.iter().take(3).enumerate() {
        if !(1..=6).contains(&v) {
            return Err(AnalysisError::OutOfRange {
                item: format!("q{}", i + 1),
                value: v as i64,
            });
        }
    }
    Ok((q[0] as f64 + q[1] as f64 + q[2] as f64) / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pre: Vec<f64>,
    post: Vec<f64>,
}

impl PairedSample {
    pub fn new(pre: Vec<f64>, post: Vec<f64>) -> Result<Self, AnalysisError> {
        if pre.len() != post.len() {
            return Err(AnalysisError::LengthMismatch {
                pre: pre.len(),
                post: post.len(),
            });
        }
        if pre.len() < 2 {
            return Err(AnalysisError::TooFewPairs(pre.len()));
        }
        Ok(Self { pre, post })
    }

    pub fn len(&self) -> usize {
        self.pre.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pre.is_empty()
    }

    pub fn pre(&self) -> &[f64] {
        &self.pre
    }

    pub fn post(&self) -> &[f64] {
        &self.post
    }

    pub fn swapped(&self) -> Self {
        Self {
            pre: self.post.clone(),
            post: self.pre.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: u64,
}

/// Paired t statistic on `d_i = post_i − pre_i`.
pub fn paired_t(sample: &PairedSample) -> Result<TTest, AnalysisError> {
    let d: Vec<f64> = sample.post.iter().zip(&sample.pre).map(|(b, a)| b - a).collect();
    if d.iter().all(|x| *x == d[0]) {
        return Err(AnalysisError::ZeroVariance);
    }
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let ss: f64 = d.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - 1.0)).sqrt();
    Ok(TTest {
        t: mean / (sd / n.sqrt()),
        df: d.len() as u64 - 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct QuestionStats {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
}

/// Per-question mean and sd of 1–5 experience ratings.
pub fn experience_stats(ratings: &[Vec<u8>]) -> Result<Vec<QuestionStats>, AnalysisError> {
    if ratings.is_empty() {
        return Err(AnalysisError::Empty);
    }
    ratings
        .iter()
        .enumerate()
        .map(|(i, qs)| {
            if let Some(&bad) = qs.iter().find(|v| !(1..=5).contains(*v)) {
                return Err(AnalysisError::OutOfRange {
                    item: format!("question {}", i + 1),
                    value: bad as i64,
                });
            }
            let values: Vec<f64> = qs.iter().map(|&v| v as f64).collect();
            let (mean, sd) = mean_sd(&values).ok_or(AnalysisError::Empty)?;
            Ok(QuestionStats { n: qs.len(), mean, sd })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lia_oracle as oracle;
    use proptest::prelude::*;

    #[test]
    fn positivity_examples() {
        assert_eq!(positivity(&[6, 6, 6, 1, 1, 1]).unwrap(), 6.0);
        assert_eq!(positivity(&[1, 1, 1, 6, 6, 6]).unwrap(), 1.0);
        assert_eq!(positivity(&[4, 5, 3, 2, 2, 2]).unwrap(), 4.0);
        assert!(matches!(positivity(&[0, 5, 3, 1, 1, 1]), Err(AnalysisError::OutOfRange { .. })));
        assert!(matches!(positivity(&[4, 7, 3, 1, 1, 1]), Err(AnalysisError::OutOfRange { .. })));
    }

    #[test]
    fn paired_t_example() {
        let s = PairedSample::new(vec![0.0; 4], vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let r = paired_t(&s).unwrap();
        assert_eq!(r.df, 3);
        assert!((r.t - 1.732_050_807_568_877_2).abs() < 1e-12);
        assert!((r.t - oracle::paired_t(s.pre(), s.post()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn paired_t_degenerate() {
        let s = PairedSample::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(paired_t(&s), Err(AnalysisError::ZeroVariance)));
        let s = PairedSample::new(vec![1.0, 2.0], vec![3.0, 4.0]).unwrap();
        assert!(matches!(paired_t(&s), Err(AnalysisError::ZeroVariance)));
        assert!(matches!(PairedSample::new(vec![1.0], vec![2.0]), Err(AnalysisError::TooFewPairs(1))));
        assert!(matches!(
            PairedSample::new(vec![1.0, 2.0], vec![2.0]),
            Err(AnalysisError::LengthMismatch { pre: 2, post: 1 })
        ));
    }

    #[test]
    fn group_sizes_give_table_df() {
        for (n, df) in [(150, 149), (58, 57), (92, 91)] {
            let pre: Vec<f64> = (0..n).map(|i| (i % 6) as f64).collect();
            let post: Vec<f64> = (0..n).map(|i| ((i * 5) % 6) as f64).collect();
            assert_eq!(paired_t(&PairedSample::new(pre, post).unwrap()).unwrap().df, df);
        }
    }

    #[test]
    fn experience_examples() {
        let r = experience_stats(&[vec![3, 4], vec![2, 2, 2]]).unwrap();
        assert_eq!(r[0].mean, 3.5);
        assert!((r[0].sd.unwrap() - 0.707_106_781_186_547_5).abs() < 1e-15);
        assert_eq!(r[1].sd, Some(0.0));
        assert!(matches!(experience_stats(&[]), Err(AnalysisError::Empty)));
        assert!(matches!(experience_stats(&[vec![]]), Err(AnalysisError::Empty)));
        assert!(matches!(experience_stats(&[vec![3, 6]]), Err(AnalysisError::OutOfRange { .. })));
    }

    #[test]
    fn review_score_example() {
        let (mean, sd) = mean_sd(&[5.0, 5.0, 3.0]).unwrap();
        let (om, osd) = oracle::mean_sd(&[5.0, 5.0, 3.0]);
        assert!((mean - 4.333_333_333_333_333).abs() < 1e-15);
        assert!((sd.unwrap() - 1.154_700_538_379_251_5).abs() < 1e-15);
        assert!((mean - om).abs() < 1e-15 && (sd.unwrap() - osd).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn matches_oracle_and_symmetries(
            pairs in prop::collection::vec((1u8..=6, 1u8..=6), 2..80),
            shift in -50.0f64..50.0,
        ) {
            let pre: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let post: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            let s = PairedSample::new(pre.clone(), post.clone()).unwrap();
            match paired_t(&s) {
                Err(AnalysisError::ZeroVariance) => prop_assert!(oracle::paired_t(&pre, &post).is_none()),
                Err(e) => prop_assert!(false, "{e}"),
                Ok(r) => {
                    let o = oracle::paired_t(&pre, &post).unwrap();
                    prop_assert!((r.t - o).abs() <= 1e-9 * o.abs().max(1.0));
                    let neg = paired_t(&s.swapped()).unwrap();
                    prop_assert!((r.t + neg.t).abs() <= 1e-12);
                    let shifted = PairedSample::new(
                        pre.iter().map(|x| x + shift).collect(),
                        post.iter().map(|x| x + shift).collect(),
                    ).unwrap();
                    prop_assert!((paired_t(&shifted).unwrap().t - r.t).abs() <= 1e-12 * r.t.abs().max(1.0));
                }
            }
        }
    }
}
