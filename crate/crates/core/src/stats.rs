//! Corpus-level statistics: one-sample t-tests, Pearson correlation, group
//! summaries and the per-gender frequency table.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AuthorGender, DocMetadata, Gender, Narrator};

/// Significance level of the decision rule.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample has zero variance")]
    ZeroVariance,
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("series is constant")]
    ConstantSeries,
}

/// Regularized incomplete beta function `I_x(a, b)`, by the continued
/// fraction (modified Lentz), using the symmetry relation for fast
/// convergence.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "beta parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 10_000;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `df`
/// degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, 0.5 * df, 0.5).clamp(0.0, 1.0)
}

/// Student's t cumulative distribution function.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let half_tail = 0.5 * student_t_two_sided_p(t, df);
    if t >= 0.0 {
        1.0 - half_tail
    } else {
        half_tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub t: f64,
    pub p: f64,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// One-sample t-test against a population mean of zero, two-sided.
pub fn one_sample_t(values: &[f64]) -> Result<TTest, StatsError> {
    let n = values.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    let sd = libm::sqrt(ss / (n - 1) as f64);
    if sd == 0.0 || sd <= 1e-15 * m.abs() {
        return Err(StatsError::ZeroVariance);
    }
    let t = m * libm::sqrt(n as f64) / sd;
    let p = student_t_two_sided_p(t, (n - 1) as f64);
    Ok(TTest { n, mean: m, sd, t, p })
}

/// Pearson product-moment correlation.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewSamples(x.len()));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantSeries);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Per-document outcome feeding corpus aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub doc_id: String,
    pub agency_bias: Option<f64>,
    pub appearance_bias: f64,
    pub female_mentions: usize,
    pub male_mentions: usize,
    pub female_agentivity: Option<f64>,
    pub male_agentivity: Option<f64>,
    pub metadata: DocMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "overall")]
    Overall,
    #[serde(rename = "author-F")]
    AuthorFemale,
    #[serde(rename = "author-M")]
    AuthorMale,
    #[serde(rename = "1p-F")]
    FirstPersonFemale,
    #[serde(rename = "1p-M")]
    FirstPersonMale,
}

impl Group {
    pub const ALL: [Group; 5] = [
        Group::Overall,
        Group::AuthorFemale,
        Group::AuthorMale,
        Group::FirstPersonFemale,
        Group::FirstPersonMale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::Overall => "overall",
            Group::AuthorFemale => "author-F",
            Group::AuthorMale => "author-M",
            Group::FirstPersonFemale => "1p-F",
            Group::FirstPersonMale => "1p-M",
        }
    }

    pub fn contains(self, meta: &DocMetadata) -> bool {
        match self {
            Group::Overall => true,
            Group::AuthorFemale => meta.author_gender == AuthorGender::Female,
            Group::AuthorMale => meta.author_gender == AuthorGender::Male,
            Group::FirstPersonFemale => meta.narrator == Narrator::FirstPersonFemale,
            Group::FirstPersonMale => meta.narrator == Narrator::FirstPersonMale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub n: usize,
    pub mean: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<f64>,
    /// Positive mean with `p < ALPHA`.
    pub flagged: bool,
}

impl MetricSummary {
    fn of(values: &[f64]) -> Self {
        let n = values.len();
        let m = (n > 0).then(|| mean(values));
        match one_sample_t(values) {
            Ok(tt) => MetricSummary {
                n,
                mean: Some(tt.mean),
                t: Some(tt.t),
                p: Some(tt.p),
                flagged: tt.mean > 0.0 && tt.p < ALPHA,
            },
            Err(_) => MetricSummary {
                n,
                mean: m,
                t: None,
                p: None,
                flagged: false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: Group,
    pub documents: usize,
    pub agency: MetricSummary,
    pub appearance: MetricSummary,
    /// Documents left out of the agency aggregate for an undefined bias.
    pub agency_excluded: usize,
    /// Both metrics flagged.
    pub objectification: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub groups: Vec<GroupSummary>,
    /// Pearson r between agency and appearance bias over documents where
    /// both are defined.
    pub correlation: Option<f64>,
    pub correlation_n: usize,
}

impl CorpusSummary {
    pub fn group(&self, g: Group) -> Option<&GroupSummary> {
        self.groups.iter().find(|s| s.group == g)
    }
}

pub fn summarize(reports: &[BiasReport]) -> CorpusSummary {
    let mut groups = Vec::new();
    for g in Group::ALL {
        let members: Vec<&BiasReport> = reports.iter().filter(|r| g.contains(&r.metadata)).collect();
        if members.is_empty() {
            continue;
        }
        let agency: Vec<f64> = members.iter().filter_map(|r| r.agency_bias).collect();
        let appearance: Vec<f64> = members.iter().map(|r| r.appearance_bias).collect();
        let agency = MetricSummary::of(&agency);
        let appearance = MetricSummary::of(&appearance);
        groups.push(GroupSummary {
            group: g,
            documents: members.len(),
            agency_excluded: members.len() - agency.n,
            objectification: agency.flagged && appearance.flagged,
            agency,
            appearance,
        });
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = reports
        .iter()
        .filter_map(|r| r.agency_bias.map(|a| (a, r.appearance_bias)))
        .unzip();
    CorpusSummary {
        groups,
        correlation: pearson_r(&xs, &ys).ok(),
        correlation_n: xs.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub doc_id: String,
    pub gender: Gender,
    pub mentions: usize,
    pub agentivity: Option<f64>,
    pub appearance_bias: f64,
}

/// Two rows per document, female first.
pub fn frequency_table(reports: &[BiasReport]) -> Vec<FrequencyRow> {
    reports
        .iter()
        .flat_map(|r| {
            [
                (Gender::Female, r.female_mentions, r.female_agentivity),
                (Gender::Male, r.male_mentions, r.male_agentivity),
            ]
            .map(|(gender, mentions, agentivity)| FrequencyRow {
                doc_id: r.doc_id.clone(),
                gender,
                mentions,
                agentivity,
                appearance_bias: r.appearance_bias,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_sample() {
        let r = one_sample_t(&[-1.0, 1.0]).unwrap();
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.t, 0.0);
        assert_abs_diff_eq!(r.p, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_samples() {
        assert_eq!(one_sample_t(&[2.0, 2.0, 2.0]), Err(StatsError::ZeroVariance));
        assert_eq!(one_sample_t(&[0.1; 7]), Err(StatsError::ZeroVariance));
        assert_eq!(one_sample_t(&[1.0]), Err(StatsError::TooFewSamples(1)));
        assert_eq!(one_sample_t(&[]), Err(StatsError::TooFewSamples(0)));
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b
        for &x in &[0.01, 0.3, 0.5, 0.77, 0.999] {
            assert_abs_diff_eq!(regularized_incomplete_beta(x, 1.0, 1.0), x, epsilon = 1e-14);
            assert_abs_diff_eq!(regularized_incomplete_beta(x, 3.5, 1.0), libm::pow(x, 3.5), epsilon = 1e-13);
            assert_abs_diff_eq!(
                regularized_incomplete_beta(x, 1.0, 2.5),
                1.0 - libm::pow(1.0 - x, 2.5),
                epsilon = 1e-13
            );
        }
        assert_eq!(regularized_incomplete_beta(0.0, 2.0, 3.0), 0.0);
        assert_eq!(regularized_incomplete_beta(1.0, 2.0, 3.0), 1.0);
    }

    #[test]
    fn t_cdf_df2_closed_form() {
        // F(t) = 1/2 + t / (2 sqrt(2 + t^2)) for df = 2
        for i in -40..=40 {
            let t = i as f64 * 0.25;
            let exact = 0.5 + t / (2.0 * libm::sqrt(2.0 + t * t));
            assert_abs_diff_eq!(student_t_cdf(t, 2.0), exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn pearson_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert_abs_diff_eq!(pearson_r(&x, &y).unwrap(), 1.0, epsilon = 1e-15);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson_r(&x, &y).unwrap(), -1.0, epsilon = 1e-15);
        assert_eq!(pearson_r(&[0.0, 1.0, 0.0, 1.0], &[0.0, 0.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(pearson_r(&[1.0, 1.0], &[1.0, 2.0]), Err(StatsError::ConstantSeries));
        assert_eq!(pearson_r(&[1.0], &[1.0]), Err(StatsError::TooFewSamples(1)));
        assert_eq!(pearson_r(&[1.0, 2.0], &[1.0]), Err(StatsError::LengthMismatch(2, 1)));
    }

    fn report(id: usize, agency: Option<f64>, appearance: f64, meta: DocMetadata) -> BiasReport {
        BiasReport {
            doc_id: format!("doc{id}"),
            agency_bias: agency,
            appearance_bias: appearance,
            female_mentions: 2,
            male_mentions: 3,
            female_agentivity: Some(0.5),
            male_agentivity: Some(0.5),
            metadata: meta,
        }
    }

    #[test]
    fn null_corpus_is_not_flagged() {
        let noise = [1e-6, -1e-6, 2e-6, -2e-6, 5e-7, -5e-7];
        let reports: Vec<_> = noise
            .iter()
            .enumerate()
            .map(|(i, &e)| report(i, Some(e), -e, DocMetadata::default()))
            .collect();
        let s = summarize(&reports);
        assert!(s.groups.iter().all(|g| !g.objectification && !g.agency.flagged));
        assert_eq!(s.groups.len(), 1);
    }

    #[test]
    fn singleton_group_has_mean_but_no_test() {
        let f = DocMetadata {
            author_gender: AuthorGender::Female,
            ..Default::default()
        };
        let m = DocMetadata {
            author_gender: AuthorGender::Male,
            ..Default::default()
        };
        let reports = vec![
            report(0, Some(0.3), 0.2, f),
            report(1, Some(0.1), 0.4, m.clone()),
            report(2, None, 0.6, m),
        ];
        let s = summarize(&reports);
        let af = s.group(Group::AuthorFemale).unwrap();
        assert_eq!(af.agency.mean, Some(0.3));
        assert_eq!(af.agency.t, None);
        assert_eq!(af.agency.p, None);
        let am = s.group(Group::AuthorMale).unwrap();
        assert_eq!(am.agency_excluded, 1);
        assert_eq!(am.agency.n, 1);
        assert_eq!(am.appearance.n, 2);
        assert!(s.group(Group::FirstPersonFemale).is_none());
        assert_eq!(s.group(Group::Overall).unwrap().agency_excluded, 1);
        assert_eq!(s.correlation_n, 2);
    }

    #[test]
    fn frequency_rows() {
        assert!(frequency_table(&[]).is_empty());
        let reports: Vec<_> = (0..3).map(|i| report(i, None, 0.0, DocMetadata::default())).collect();
        let rows = frequency_table(&reports);
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].gender, Gender::Female);
        assert_eq!(rows[1].gender, Gender::Male);
        assert_eq!(rows[1].mentions, 3);
    }
}
