//! Polynomial-time subset search: score prefix lag sets of the
//! absolute-magnitude-sorted partial autocorrelations with an
//! information-criterion approximation, keep the best few, and optionally
//! re-rank them by exact maximum likelihood.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::likelihood::fit_mle;
use crate::pacf::{burg_pacf, yule_walker_pacf, PacfMethod, PacfTable};
use crate::types::{SubsetSpec, TimeSeries};

/// Model-selection criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Penalty `m log n`.
    Bic,
    /// Penalty `2 m`.
    Aic,
    /// Small-sample corrected AIC: penalty `2m + 2m(m+1)/(n-m-1)`.
    Aicc,
    /// Hannan-Quinn: penalty `2 m log(log n)`.
    HannanQuinn,
}

impl Criterion {
    /// The complexity penalty added to `-2 loglik` (or its approximation).
    pub fn penalty(&self, m: usize, n: usize) -> f64 {
        let m = m as f64;
        let nf = n as f64;
        match self {
            Criterion::Bic => m * nf.ln(),
            Criterion::Aic => 2.0 * m,
            Criterion::Aicc => {
                let denom = nf - m - 1.0;
                if denom <= 0.0 {
                    f64::INFINITY
                } else {
                    2.0 * m + 2.0 * m * (m + 1.0) / denom
                }
            }
            Criterion::HannanQuinn => 2.0 * m * nf.ln().ln(),
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Criterion::Bic => write!(f, "bic"),
            Criterion::Aic => write!(f, "aic"),
            Criterion::Aicc => write!(f, "aicc"),
            Criterion::HannanQuinn => write!(f, "hq"),
        }
    }
}

/// A scored lag set. `lags` may be empty for the null-model baseline, which
/// is why this carries a plain lag list rather than a [`SubsetSpec`].
#[derive(Debug, Clone)]
pub struct CandidateModel {
    pub lags: Vec<usize>,
    pub score: f64,
    pub criterion: Criterion,
    /// True when the score comes from the partial-autocorrelation
    /// approximation; false once rescored from the exact loglikelihood.
    pub approximate: bool,
    /// Exact concentrated loglikelihood, once fitted.
    pub loglik: Option<f64>,
    /// Exact innovation-variance estimate, once fitted.
    pub sigma2: Option<f64>,
}

impl CandidateModel {
    /// The lag set as a [`SubsetSpec`]; fails for the null model.
    pub fn spec(&self) -> Result<SubsetSpec> {
        SubsetSpec::from_lags(&self.lags)
    }
}

/// Search configuration.
#[derive(Debug, Clone)]
pub struct SelectionConfig {
    /// Maximum autoregression order `L` scanned.
    pub max_order: usize,
    /// Maximum number of parameters `M <= L` allowed in a candidate.
    pub max_params: usize,
    /// Number of retained models `k`.
    pub keep: usize,
    pub criterion: Criterion,
    pub method: PacfMethod,
    /// Score every subset of `1..=L` (sizes `1..=M`) instead of only the
    /// sorted prefixes. Validation aid; limited to `L <= 15`.
    pub exhaustive: bool,
}

impl SelectionConfig {
    pub fn new(max_order: usize, max_params: usize, keep: usize) -> Self {
        SelectionConfig {
            max_order,
            max_params,
            keep,
            criterion: Criterion::Bic,
            method: PacfMethod::Burg,
            exhaustive: false,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.max_params == 0 || self.max_params > self.max_order {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= max_params <= max_order, got M={} L={}",
                self.max_params, self.max_order
            )));
        }
        if self.max_order >= n {
            return Err(Error::InvalidConfig(format!(
                "max_order {} must be below the series length {n}",
                self.max_order
            )));
        }
        if self.keep == 0 {
            return Err(Error::InvalidConfig("keep must be at least 1".into()));
        }
        if self.exhaustive && self.max_order > 15 {
            return Err(Error::InvalidConfig(
                "exhaustive scan is limited to max_order <= 15".into(),
            ));
        }
        Ok(())
    }
}

/// Criterion value of one lag set from estimated partial autocorrelations:
///
/// ```text
/// n log( prod_{k in lags} (1 - pacf_k^2) ) + penalty(m, n)
/// ```
///
/// The empty set scores exactly the null baseline 0. The first term drops
/// `n log c0`, which is common to every candidate and cancels in rankings.
pub fn score_subset(
    pacf: &PacfTable,
    lags: &[usize],
    n: usize,
    criterion: Criterion,
) -> Result<f64> {
    let mut log_prod = 0.0;
    for &lag in lags {
        if lag == 0 || lag > pacf.lag_max() {
            return Err(Error::LagBeyondTable {
                lag,
                max: pacf.lag_max(),
            });
        }
        let e = pacf.estimates()[lag - 1];
        log_prod += (1.0 - e * e).ln();
    }
    Ok(n as f64 * log_prod + criterion.penalty(lags.len(), n))
}

/// Runs the subset search and returns the `keep` best candidates, each with
/// its lag set in canonical ascending order.
///
/// The scan sorts the absolute partial autocorrelations in descending order
/// (ties broken toward the smaller lag) and scores the nested prefix sets
/// of sizes `1..=M`, so the `m`-parameter candidate always contains the
/// `(m-1)`-parameter one. Ranking ties are broken toward fewer parameters,
/// then lexicographically.
pub fn select_models(series: &TimeSeries, config: &SelectionConfig) -> Result<Vec<CandidateModel>> {
    let centered = series.centered();
    let n = centered.len();
    config.validate(n)?;
    let table = match config.method {
        PacfMethod::Burg => burg_pacf(&centered, config.max_order)?,
        PacfMethod::YuleWalker => yule_walker_pacf(&centered, config.max_order)?,
    };

    let mut candidates: Vec<CandidateModel> = if config.exhaustive {
        let mut all = Vec::new();
        let l = config.max_order;
        for mask in 1u32..(1u32 << l) {
            let m = mask.count_ones() as usize;
            if m > config.max_params {
                continue;
            }
            let lags: Vec<usize> = (0..l)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| i + 1)
                .collect();
            let score = score_subset(&table, &lags, n, config.criterion)?;
            all.push(CandidateModel {
                lags,
                score,
                criterion: config.criterion,
                approximate: true,
                loglik: None,
                sigma2: None,
            });
        }
        all
    } else {
        let mut order: Vec<usize> = (1..=config.max_order).collect();
        order.sort_by(|&a, &b| {
            let ea = table.estimates()[a - 1].abs();
            let eb = table.estimates()[b - 1].abs();
            eb.partial_cmp(&ea).unwrap().then(a.cmp(&b))
        });
        (1..=config.max_params)
            .map(|m| {
                let mut lags: Vec<usize> = order[..m].to_vec();
                lags.sort_unstable();
                let score = score_subset(&table, &lags, n, config.criterion)?;
                Ok(CandidateModel {
                    lags,
                    score,
                    criterion: config.criterion,
                    approximate: true,
                    loglik: None,
                    sigma2: None,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };

    rank(&mut candidates);
    candidates.truncate(config.keep);
    Ok(candidates)
}

/// Outcome of exact re-ranking.
#[derive(Debug)]
pub struct RescoreOutcome {
    /// Successfully refitted candidates, re-ranked on the exact criterion.
    pub models: Vec<CandidateModel>,
    /// Candidates whose exact fit failed, with the failure.
    pub failures: Vec<(Vec<usize>, Error)>,
}

/// Refits each candidate by exact maximum likelihood and re-ranks on the
/// exact criterion `-2 loglik + penalty`. Candidate fits are independent
/// and run in parallel; individual failures do not abort the batch.
pub fn rescore_exact(
    series: &TimeSeries,
    candidates: &[CandidateModel],
    criterion: Criterion,
) -> RescoreOutcome {
    let centered = series.centered();
    let n = centered.len();
    let outcomes: Vec<std::result::Result<CandidateModel, (Vec<usize>, Error)>> = candidates
        .par_iter()
        .map(|cand| {
            if cand.lags.is_empty() {
                // null model: sigma2 is the sample variance
                let sigma2 = centered.sample_variance();
                let loglik = -(n as f64 / 2.0) * sigma2.ln();
                return Ok(CandidateModel {
                    lags: vec![],
                    score: -2.0 * loglik + criterion.penalty(0, n),
                    criterion,
                    approximate: false,
                    loglik: Some(loglik),
                    sigma2: Some(sigma2),
                });
            }
            let spec = SubsetSpec::from_lags(&cand.lags).map_err(|e| (cand.lags.clone(), e))?;
            let fit = fit_mle(&centered, &spec, None).map_err(|e| (cand.lags.clone(), e))?;
            Ok(CandidateModel {
                lags: cand.lags.clone(),
                score: -2.0 * fit.loglik + criterion.penalty(spec.len(), n),
                criterion,
                approximate: false,
                loglik: Some(fit.loglik),
                sigma2: Some(fit.sigma2),
            })
        })
        .collect();

    let mut models = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(c) => models.push(c),
            Err(f) => failures.push(f),
        }
    }
    rank(&mut models);
    RescoreOutcome { models, failures }
}

fn rank(candidates: &mut [CandidateModel]) {
    candidates.sort_by(|a, b| {
        a.score
            .partial_cmp(&b.score)
            .unwrap()
            .then(a.lags.len().cmp(&b.lags.len()))
            .then(a.lags.cmp(&b.lags))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::simulate;
    use crate::testutil::{standard_normals, SmallRng};
    use crate::types::ZetaVector;

    fn white_noise_series(seed: u64, n: usize) -> TimeSeries {
        let mut rng = SmallRng::seed(seed);
        TimeSeries::center(&standard_normals(&mut rng, n)).unwrap()
    }

    #[test]
    fn score_null_model_is_zero() {
        let series = white_noise_series(1, 100);
        let table = burg_pacf(&series, 10).unwrap();
        let s = score_subset(&table, &[], 100, Criterion::Bic).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn score_single_lag_at_zero_is_penalty_only() {
        let table = PacfTable::from_estimates(PacfMethod::Burg, 400, 1.0, vec![0.0, 0.3]);
        let s = score_subset(&table, &[1], 400, Criterion::Bic).unwrap();
        assert_eq!(s, 400f64.ln());
    }

    #[test]
    fn score_matches_hand_formula_on_real_table() {
        let series = white_noise_series(2, 400);
        let table = burg_pacf(&series, 5).unwrap();
        let n = 400;
        let e = table.estimates()[2];
        let s = score_subset(&table, &[3], n, Criterion::Bic).unwrap();
        let expect = n as f64 * (1.0 - e * e).ln() + (n as f64).ln();
        assert!((s - expect).abs() < 1e-12);
    }

    /// Approximation-quality report for the criterion built from partial
    /// autocorrelations, against the exact-likelihood criterion: how often
    /// the top-3 candidate rankings agree. Diagnostic output, loose floor.
    #[test]
    fn approximate_criterion_rank_agreement_report() {
        let spec = SubsetSpec::new(&[1, 3]).unwrap();
        let mut agree = 0;
        let reps = 40;
        for rep in 0..reps {
            let z = ZetaVector::new(spec.clone(), vec![0.5, 0.3]).unwrap();
            let sim = simulate(&z, 0.0, 1.0, 600, 9000 + rep).unwrap();
            let approx = select_models(&sim, &SelectionConfig::new(10, 5, 3)).unwrap();
            let exact = rescore_exact(&sim, &approx, Criterion::Bic);
            if exact.failures.is_empty() {
                let order_a: Vec<_> = approx.iter().map(|c| c.lags.clone()).collect();
                let order_e: Vec<_> = exact.models.iter().map(|c| c.lags.clone()).collect();
                if order_a == order_e {
                    agree += 1;
                }
            }
        }
        let rate = agree as f64 / reps as f64;
        println!("top-3 rank agreement between approximate and exact criterion: {rate:.2}");
        assert!(rate >= 0.5, "agreement rate {rate}");
    }

    #[test]
    fn score_rejects_lag_beyond_table() {
        let series = white_noise_series(3, 100);
        let table = burg_pacf(&series, 5).unwrap();
        assert!(matches!(
            score_subset(&table, &[6], 100, Criterion::Bic),
            Err(Error::LagBeyondTable { lag: 6, max: 5 })
        ));
    }

    #[test]
    fn score_strictly_decreases_with_larger_magnitude() {
        // replacing an included estimate by a larger |value| lowers the
        // first term; emulate by comparing two lags of one table
        let mut rng = SmallRng::seed(9);
        let innov = standard_normals(&mut rng, 3100);
        let mut x = vec![0.0; 3100];
        for t in 1..3100 {
            x[t] = 0.6 * x[t - 1] + innov[t];
        }
        let series = TimeSeries::center(&x[100..]).unwrap();
        let table = burg_pacf(&series, 10).unwrap();
        let big = table.estimates()[0].abs();
        let small = table.estimates()[6].abs();
        assert!(big > small);
        let n = series.len();
        let s_big = score_subset(&table, &[1], n, Criterion::Bic).unwrap();
        let s_small = score_subset(&table, &[7], n, Criterion::Bic).unwrap();
        assert!(s_big < s_small);
    }

    #[test]
    fn penalties_ordering() {
        let n = 500;
        assert!(Criterion::Aic.penalty(3, n) < Criterion::HannanQuinn.penalty(3, n));
        assert!(Criterion::HannanQuinn.penalty(3, n) < Criterion::Bic.penalty(3, n));
        assert!(Criterion::Aicc.penalty(3, n) > Criterion::Aic.penalty(3, n));
        assert_eq!(Criterion::Bic.penalty(0, n), 0.0);
    }

    #[test]
    fn select_on_simulated_subset_model() {
        let spec = SubsetSpec::new(&[1, 4]).unwrap();
        let z = ZetaVector::new(spec.clone(), vec![0.6, 0.4]).unwrap();
        let sim = simulate(&z, 0.0, 1.0, 3000, 5).unwrap();
        let cands = select_models(&sim, &SelectionConfig::new(12, 6, 3)).unwrap();
        assert_eq!(cands[0].lags, vec![1, 4], "scores: {:?}", cands);
        assert!(cands.iter().all(|c| c.score.is_finite()));
    }

    #[test]
    fn select_greedy_nesting_property() {
        let series = white_noise_series(13, 800);
        let cands = select_models(&series, &SelectionConfig::new(15, 8, 8)).unwrap();
        // sort candidates by size; each must contain the next smaller one
        let mut by_size = cands.clone();
        by_size.sort_by_key(|c| c.lags.len());
        for window in by_size.windows(2) {
            let (small, large) = (&window[0], &window[1]);
            if small.lags.len() < large.lags.len() {
                assert!(
                    small.lags.iter().all(|l| large.lags.contains(l)),
                    "{small:?} not nested in {large:?}"
                );
            }
        }
    }

    #[test]
    fn select_white_noise_smoke() {
        let series = white_noise_series(21, 600);
        let cands = select_models(&series, &SelectionConfig::new(20, 10, 10)).unwrap();
        assert_eq!(cands.len(), 10);
        for c in &cands {
            assert!(c.score.is_finite());
            assert!(c.approximate);
        }
        // for white noise the best candidate should stay small
        assert!(cands[0].lags.len() <= 3, "best: {:?}", cands[0].lags);
    }

    #[test]
    fn select_validates_config() {
        let series = white_noise_series(22, 100);
        assert!(select_models(&series, &SelectionConfig::new(10, 11, 3)).is_err());
        assert!(select_models(&series, &SelectionConfig::new(100, 5, 3)).is_err());
        assert!(select_models(&series, &SelectionConfig::new(10, 0, 3)).is_err());
        let mut cfg = SelectionConfig::new(10, 5, 0);
        assert!(select_models(&series, &cfg).is_err());
        cfg.keep = 1;
        cfg.exhaustive = true;
        cfg.max_order = 16;
        cfg.max_params = 5;
        assert!(select_models(&series, &cfg).is_err());
    }

    #[test]
    fn exhaustive_never_worse_than_prefix_scan() {
        let spec = SubsetSpec::new(&[2, 5]).unwrap();
        let z = ZetaVector::new(spec, vec![0.5, -0.35]).unwrap();
        let sim = simulate(&z, 0.0, 1.0, 1500, 31).unwrap();
        let prefix = select_models(&sim, &SelectionConfig::new(8, 4, 1)).unwrap();
        let mut cfg = SelectionConfig::new(8, 4, 1);
        cfg.exhaustive = true;
        let exhaustive = select_models(&sim, &cfg).unwrap();
        assert!(exhaustive[0].score <= prefix[0].score + 1e-12);
    }

    #[test]
    fn rescore_exact_refits_and_reranks() {
        let spec = SubsetSpec::new(&[1, 3]).unwrap();
        let z = ZetaVector::new(spec, vec![0.55, 0.3]).unwrap();
        let sim = simulate(&z, 10.0, 2.0, 2000, 41).unwrap();
        let cands = select_models(&sim, &SelectionConfig::new(10, 5, 4)).unwrap();
        let out = rescore_exact(&sim, &cands, Criterion::Bic);
        assert!(out.failures.is_empty());
        assert_eq!(out.models.len(), 4);
        for c in &out.models {
            assert!(!c.approximate);
            assert!(c.loglik.is_some() && c.sigma2.is_some());
        }
        for w in out.models.windows(2) {
            assert!(w[0].score <= w[1].score);
        }
        // exact BIC must equal -2 loglik + m log n
        let n = sim.len() as f64;
        for c in &out.models {
            let expect = -2.0 * c.loglik.unwrap() + c.lags.len() as f64 * n.ln();
            assert!((c.score - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn rescore_collects_per_candidate_failures() {
        let series = white_noise_series(52, 300);
        let impossible = CandidateModel {
            lags: vec![500],
            score: 0.0,
            criterion: Criterion::Bic,
            approximate: true,
            loglik: None,
            sigma2: None,
        };
        let fine = CandidateModel {
            lags: vec![1],
            score: 0.0,
            criterion: Criterion::Bic,
            approximate: true,
            loglik: None,
            sigma2: None,
        };
        let out = rescore_exact(&series, &[impossible, fine], Criterion::Bic);
        assert_eq!(out.models.len(), 1);
        assert_eq!(out.failures.len(), 1);
        assert_eq!(out.failures[0].0, vec![500]);
    }

    #[test]
    fn rescore_handles_null_candidate() {
        let series = white_noise_series(51, 400);
        let null = CandidateModel {
            lags: vec![],
            score: 0.0,
            criterion: Criterion::Bic,
            approximate: true,
            loglik: None,
            sigma2: None,
        };
        let out = rescore_exact(&series, &[null], Criterion::Bic);
        assert_eq!(out.models.len(), 1);
        let m = &out.models[0];
        let expect = -2.0 * m.loglik.unwrap();
        assert!((m.score - expect).abs() < 1e-12);
    }

    #[test]
    fn ranking_is_shift_invariant() {
        // ranks depend on score differences only
        let mk = |lags: Vec<usize>, score: f64| CandidateModel {
            lags,
            score,
            criterion: Criterion::Bic,
            approximate: false,
            loglik: None,
            sigma2: None,
        };
        let mut a = vec![mk(vec![1], 3.0), mk(vec![2], 1.0), mk(vec![3], 2.0)];
        let mut b = vec![mk(vec![1], 103.0), mk(vec![2], 101.0), mk(vec![3], 102.0)];
        rank(&mut a);
        rank(&mut b);
        let order_a: Vec<_> = a.iter().map(|c| c.lags.clone()).collect();
        let order_b: Vec<_> = b.iter().map(|c| c.lags.clone()).collect();
        assert_eq!(order_a, order_b);
    }
}
