//! The two significance tests the studies lean on — a one-sided Welch t-test
//! for comparing seed ensembles and a chi-square goodness-of-fit test for
//! checking sampled histograms against exact distributions — plus the small
//! descriptive helpers they share.

use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

/// Arithmetic mean; NaN for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n−1 denominator); NaN below two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Result of a one-sided Welch t-test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WelchOutcome {
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    /// Welch–Satterthwaite effective degrees of freedom.
    pub dof: f64,
    /// P(observing a difference this negative or more) under the null of
    /// equal means; small p favors mean(a) < mean(b).
    pub p: f64,
}

impl WelchOutcome {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p < alpha
    }
}

/// Welch's unequal-variance t-test of H₁: mean(a) < mean(b).
///
/// Degenerate ensembles (both variances zero) get the limiting p of 0 or 1
/// by mean comparison instead of a division by zero.
pub fn welch_one_sided_less(a: &[f64], b: &[f64]) -> Result<WelchOutcome> {
    for (name, xs) in [("a", a), ("b", b)] {
        if xs.len() < 2 {
            return Err(Error::SampleTooSmall {
                name,
                got: xs.len(),
                need: 2,
            });
        }
    }
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (std_dev(a).powi(2), std_dev(b).powi(2));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        let p = if ma < mb { 0.0 } else { 1.0 };
        return Ok(WelchOutcome {
            mean_a: ma,
            mean_b: mb,
            t: if ma < mb { f64::NEG_INFINITY } else { f64::INFINITY },
            dof: f64::INFINITY,
            p,
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, dof).expect("dof is positive and finite");
    Ok(WelchOutcome {
        mean_a: ma,
        mean_b: mb,
        t,
        dof,
        p: dist.cdf(t),
    })
}

/// Result of a chi-square goodness-of-fit test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: f64,
    pub p: f64,
}

impl ChiSquareOutcome {
    /// Whether the observed counts are consistent with the expected ones at
    /// the given level (i.e. the null is NOT rejected).
    pub fn consistent(&self, alpha: f64) -> bool {
        self.p >= alpha
    }
}

/// Expected count below which bins are pooled, per standard chi-square
/// practice.
const MIN_EXPECTED: f64 = 5.0;

/// Pearson's chi-square test of observed counts against expected counts.
///
/// Bins with expected count under 5 are pooled into one combined bin before
/// the statistic is formed; the test needs at least two effective bins.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<ChiSquareOutcome> {
    if observed.len() != expected.len() {
        return Err(Error::MismatchedSamples {
            got: observed.len(),
            expected: expected.len(),
        });
    }
    let mut statistic = 0.0;
    let mut bins = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (0.0f64, 0.0f64);
    for (&o, &e) in observed.iter().zip(expected) {
        if e < 0.0 || !e.is_finite() {
            return Err(Error::DegenerateChiSquare("negative or non-finite expected count"));
        }
        if e < MIN_EXPECTED {
            pooled_obs += o as f64;
            pooled_exp += e;
        } else {
            statistic += (o as f64 - e).powi(2) / e;
            bins += 1;
        }
    }
    if pooled_exp > 0.0 {
        statistic += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    if bins < 2 {
        return Err(Error::DegenerateChiSquare("fewer than two effective bins"));
    }
    let dof = (bins - 1) as f64;
    let dist = ChiSquared::new(dof).expect("dof is positive");
    Ok(ChiSquareOutcome {
        statistic,
        dof,
        p: 1.0 - dist.cdf(statistic),
    })
}
