//! Order statistics and nonparametric rank tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF, Normal};
use thiserror::Error;

/// How `percentile` picks a value between order statistics.
///
/// All rules place the p-th percentile at rank `(n - 1) * p / 100` of the
/// sorted sample; they differ only in how a fractional rank is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PercentileRule {
    #[default]
    Linear,
    Lower,
    Higher,
    Nearest,
    Midpoint,
}

impl std::str::FromStr for PercentileRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Self::Linear),
            "lower" => Ok(Self::Lower),
            "higher" => Ok(Self::Higher),
            "nearest" => Ok(Self::Nearest),
            "midpoint" => Ok(Self::Midpoint),
            other => Err(format!("unknown percentile rule `{other}`")),
        }
    }
}

/// Percentile of an ascending-sorted, nonempty slice. `p` is in `[0, 100]`.
pub fn percentile_sorted(sorted: &[f64], p: f64, rule: PercentileRule) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    debug_assert!((0.0..=100.0).contains(&p));
    let rank = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    let (a, b) = (sorted[lo], sorted[hi]);
    match rule {
        PercentileRule::Linear => a + (b - a) * frac,
        PercentileRule::Lower => a,
        PercentileRule::Higher => b,
        PercentileRule::Nearest => {
            // Half-way ties go to the even index.
            if frac < 0.5 || (frac == 0.5 && lo.is_multiple_of(2)) {
                a
            } else {
                b
            }
        }
        PercentileRule::Midpoint => (a + b) / 2.0,
    }
}

pub fn median_sorted(sorted: &[f64]) -> f64 {
    percentile_sorted(sorted, 50.0, PercentileRule::Linear)
}

/// 1-based ranks with ties given the mean of the ranks they span.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = r;
        }
        i = j;
    }
    ranks
}

/// Sizes of tie groups in a sample.
fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("at least {needed} groups required, got {got}")]
    TooFewGroups { needed: usize, got: usize },
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("group {0} contains a non-finite value")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    KruskalWallis,
    MannWhitneyU,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::KruskalWallis => "kruskal-wallis",
            TestKind::MannWhitneyU => "mann-whitney-u",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueMethod {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub test: TestKind,
    pub groups: Vec<String>,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub method: PValueMethod,
    /// Every pooled observation is identical; the statistic carries no information.
    pub degenerate: bool,
}

impl StatTestResult {
    /// Re-evaluates the rejection decision at a different significance level.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        let mut r = self.clone();
        r.alpha = alpha;
        r.reject = r.p_value < alpha;
        r
    }
}

fn check_groups(groups: &[&[f64]], needed: usize) -> Result<(), StatsError> {
    if groups.len() < needed {
        return Err(StatsError::TooFewGroups {
            needed,
            got: groups.len(),
        });
    }
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(StatsError::EmptyGroup(i));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(StatsError::NonFinite(i));
        }
    }
    Ok(())
}

/// Kruskal–Wallis H test with tie correction; p from the chi-squared
/// approximation with `groups - 1` degrees of freedom.
pub fn kruskal_wallis(groups: &[&[f64]], alpha: f64) -> Result<StatTestResult, StatsError> {
    check_groups(groups, 2)?;
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let n = pooled.len() as f64;
    let ranks = midranks(&pooled);

    let mut h = 0.0;
    let mut start = 0;
    for g in groups {
        let r: f64 = ranks[start..start + g.len()].iter().sum();
        h += r * r / g.len() as f64;
        start += g.len();
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);

    let ties: f64 = tie_sizes(&pooled)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let correction = 1.0 - ties / (n * n * n - n);
    let degenerate = correction <= 0.0;
    let (statistic, p_value) = if degenerate {
        (0.0, 1.0)
    } else {
        let h = (h / correction).max(0.0);
        let chi = ChiSquared::new((groups.len() - 1) as f64).expect("df >= 1");
        (h, chi.sf(h).clamp(0.0, 1.0))
    };
    Ok(StatTestResult {
        test: TestKind::KruskalWallis,
        groups: (0..groups.len()).map(|i| i.to_string()).collect(),
        statistic,
        p_value,
        alpha,
        reject: p_value < alpha,
        method: PValueMethod::Asymptotic,
        degenerate,
    })
}

/// Largest pooled size for which the exact null distribution is enumerated.
pub const MANN_WHITNEY_EXACT_LIMIT: usize = 20;

/// Two-sided Mann–Whitney U test. The reported statistic is `min(U_a, U_b)`.
///
/// Tie-free samples with a pooled size of at most
/// [`MANN_WHITNEY_EXACT_LIMIT`] get the exact p-value; everything else uses the
/// normal approximation with tie and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64], alpha: f64) -> Result<StatTestResult, StatsError> {
    check_groups(&[a, b], 2)?;
    let has_ties = {
        let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        tie_sizes(&pooled).iter().any(|&t| t > 1)
    };
    if !has_ties && a.len() + b.len() <= MANN_WHITNEY_EXACT_LIMIT {
        mann_whitney_exact(a, b, alpha)
    } else {
        mann_whitney_asymptotic(a, b, alpha)
    }
}

fn u_statistics(a: &[f64], b: &[f64]) -> (f64, f64, Vec<f64>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let u2 = n1 * n2 - u1;
    (u1, u2, pooled)
}

/// Exact two-sided p-value by enumerating the null distribution of U.
pub fn mann_whitney_exact(a: &[f64], b: &[f64], alpha: f64) -> Result<StatTestResult, StatsError> {
    check_groups(&[a, b], 2)?;
    let (u1, u2, _) = u_statistics(a, b);
    let u = u1.min(u2);
    let dist = u_null_counts(a.len(), b.len());
    let total: f64 = dist.iter().sum();
    let below: f64 = dist[..=(u.floor() as usize)].iter().sum();
    let p_value = (2.0 * below / total).min(1.0);
    Ok(StatTestResult {
        test: TestKind::MannWhitneyU,
        groups: vec!["a".into(), "b".into()],
        statistic: u,
        p_value,
        alpha,
        reject: p_value < alpha,
        method: PValueMethod::Exact,
        degenerate: false,
    })
}

/// `counts[u]` = number of rank arrangements of sizes (m, n) giving U = u.
fn u_null_counts(m: usize, n: usize) -> Vec<f64> {
    // table[i][j] holds the distribution for sizes (i, j).
    let mut table: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); n + 1]; m + 1];
    for i in 0..=m {
        for j in 0..=n {
            table[i][j] = if i == 0 || j == 0 {
                vec![1.0]
            } else {
                let mut d = vec![0.0; i * j + 1];
                // Largest pooled value from the first sample adds j to U.
                for (u, &c) in table[i - 1][j].iter().enumerate() {
                    d[u + j] += c;
                }
                for (u, &c) in table[i][j - 1].iter().enumerate() {
                    d[u] += c;
                }
                d
            };
        }
    }
    std::mem::take(&mut table[m][n])
}

/// Normal approximation with tie-corrected variance and continuity correction.
pub fn mann_whitney_asymptotic(a: &[f64], b: &[f64], alpha: f64) -> Result<StatTestResult, StatsError> {
    check_groups(&[a, b], 2)?;
    let (u1, u2, pooled) = u_statistics(a, b);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let ties: f64 = tie_sizes(&pooled)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    let mean = n1 * n2 / 2.0;
    let degenerate = var <= 0.0;
    let p_value = if degenerate {
        1.0
    } else {
        let z = ((u1 - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * normal.sf(z)).min(1.0)
    };
    Ok(StatTestResult {
        test: TestKind::MannWhitneyU,
        groups: vec!["a".into(), "b".into()],
        statistic: u1.min(u2),
        p_value,
        alpha,
        reject: p_value < alpha,
        method: PValueMethod::Asymptotic,
        degenerate,
    })
}

/// `P(X >= successes)` for `X ~ Binomial(trials, p)`.
pub fn binomial_upper_tail(successes: u64, trials: u64, p: f64) -> f64 {
    if successes == 0 {
        return 1.0;
    }
    let dist = Binomial::new(p, trials).expect("valid binomial parameters");
    dist.sf(successes - 1).clamp(0.0, 1.0)
}

/// min, q1, median, q3, max and mean of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl FiveNumber {
    pub fn of(values: &[f64], rule: PercentileRule) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        Some(FiveNumber {
            min: s[0],
            q1: percentile_sorted(&s, 25.0, rule),
            median: percentile_sorted(&s, 50.0, rule),
            q3: percentile_sorted(&s, 75.0, rule),
            max: s[s.len() - 1],
            mean: s.iter().sum::<f64>() / s.len() as f64,
        })
    }
}
