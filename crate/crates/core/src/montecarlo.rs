//! Seeded Monte Carlo sampling of the measurement record.
//!
//! Trials draw a preparation from the prior and an outcome from the exact
//! conditional distributions of the full numerical pipeline, so the
//! sampler exercises the same operators the reports are computed from.
//! Streams are chunked: each chunk of trials runs on its own counter-mode
//! stream of one seeded generator, which makes results a pure function of
//! `(seed, n_trials)` and independent of how the work is batched.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{AtomLevel, SystemParams};
use crate::error::{Error, Result};
use crate::povm::{extract_kraus, outcome_distributions, povm_from_kraus, Ensemble};

/// Trials per generator stream.
pub const CHUNK_TRIALS: u64 = 65536;

/// Which of the two preparations a trial drew.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preparation {
    State1,
    State2,
}

impl Preparation {
    pub const ALL: [Preparation; 2] = [Preparation::State1, Preparation::State2];

    pub fn index(self) -> usize {
        match self {
            Preparation::State1 => 0,
            Preparation::State2 => 1,
        }
    }
}

/// Size and seed of a trial run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialConfig {
    n_trials: u64,
    seed: u64,
}

impl TrialConfig {
    pub fn new(n_trials: u64, seed: u64) -> Result<TrialConfig> {
        if n_trials == 0 {
            return Err(Error::InvalidTrialCount);
        }
        Ok(TrialConfig { n_trials, seed })
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Outcome counts of a trial run, split by preparation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialStats {
    n_trials: u64,
    counts: [[u64; 3]; 2],
}

impl TrialStats {
    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    /// Trials that drew `prep` and read out `outcome`.
    pub fn count(&self, prep: Preparation, outcome: AtomLevel) -> u64 {
        self.counts[prep.index()][outcome.index()]
    }

    /// Trials that drew `prep` regardless of outcome.
    pub fn prep_count(&self, prep: Preparation) -> u64 {
        self.counts[prep.index()].iter().sum()
    }

    /// Conclusive trials over all trials.
    pub fn success_rate(&self) -> f64 {
        let successes: u64 = Preparation::ALL
            .iter()
            .map(|&p| self.count(p, AtomLevel::B) + self.count(p, AtomLevel::C))
            .sum();
        successes as f64 / self.n_trials as f64
    }

    /// Empirical rates with binomial standard errors.
    pub fn empirical(&self) -> EmpiricalReport {
        let mut rates = [[0.0f64; 3]; 2];
        let mut standard_errors = [[0.0f64; 3]; 2];
        let mut prep_counts = [0u64; 2];
        for prep in Preparation::ALL {
            let row = prep.index();
            let n = self.prep_count(prep);
            prep_counts[row] = n;
            if n == 0 {
                continue;
            }
            for outcome in AtomLevel::ALL {
                let rate = self.count(prep, outcome) as f64 / n as f64;
                rates[row][outcome.index()] = rate;
                standard_errors[row][outcome.index()] = (rate * (1.0 - rate) / n as f64).sqrt();
            }
        }
        let success_rate = self.success_rate();
        EmpiricalReport {
            n_trials: self.n_trials,
            prep_counts,
            rates,
            standard_errors,
            success_rate,
            success_se: (success_rate * (1.0 - success_rate) / self.n_trials as f64).sqrt(),
            inconclusive_rate: 1.0 - success_rate,
        }
    }
}

/// Rates estimated from a trial run. `rates` and `standard_errors` are
/// indexed `[preparation][outcome]` and conditioned on the preparation;
/// rows of a preparation that was never drawn stay zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalReport {
    pub n_trials: u64,
    pub prep_counts: [u64; 2],
    pub rates: [[f64; 3]; 2],
    pub standard_errors: [[f64; 3]; 2],
    pub success_rate: f64,
    pub success_se: f64,
    pub inconclusive_rate: f64,
}

/// Samples the measurement record at the given operating point.
///
/// The conditional outcome distributions come from the full pipeline, not
/// from closed forms, so discrepancies between the two would surface here
/// as well as in the report comparisons. Each trial consumes exactly two
/// uniform draws: one for the preparation, one for the outcome.
pub fn run_trials(
    params: &SystemParams,
    ensemble: &Ensemble,
    config: &TrialConfig,
) -> Result<TrialStats> {
    let u = crate::dynamics::protocol_unitary(params)?;
    let kraus = extract_kraus(&u)?;
    let povm = povm_from_kraus(&kraus);
    let dists = outcome_distributions(&povm, ensemble)?;

    // Cumulative thresholds in (a, b, c) order; the final edge is pinned
    // to 1 so a draw of 0.999999... cannot fall off the end.
    let mut edges = [[0.0f64; 3]; 2];
    for (row, dist) in dists.iter().enumerate() {
        edges[row][0] = dist[0];
        edges[row][1] = dist[0] + dist[1];
        edges[row][2] = 1.0;
    }

    let q1 = ensemble.q1();
    let mut counts = [[0u64; 3]; 2];
    let chunks = config.n_trials.div_ceil(CHUNK_TRIALS);
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(chunk);
        let in_chunk = CHUNK_TRIALS.min(config.n_trials - chunk * CHUNK_TRIALS);
        for _ in 0..in_chunk {
            let prep = if rng.random::<f64>() < q1 { 0 } else { 1 };
            let draw = rng.random::<f64>();
            let outcome = edges[prep].iter().position(|&edge| draw < edge).unwrap_or(2);
            counts[prep][outcome] += 1;
        }
    }

    Ok(TrialStats {
        n_trials: config.n_trials,
        counts,
    })
}

/// Outcome of checking that no conclusive readout ever contradicts the
/// preparation it reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditVerdict {
    /// True when both forbidden counts are zero.
    pub pass: bool,
    /// Trials where the second state triggered the outcome reserved for
    /// the first.
    pub b_given_state2: u64,
    /// Trials where the first state triggered the outcome reserved for
    /// the second.
    pub c_given_state1: u64,
    pub stats: TrialStats,
}

/// Runs trials and checks the defining promise of the conclusive
/// outcomes: `b` only ever fires for the first preparation and `c` only
/// for the second. At the discrimination point both forbidden counts are
/// zero for any seed; away from it the audit fails with high probability
/// once enough trials run.
pub fn never_wrong_audit(
    params: &SystemParams,
    ensemble: &Ensemble,
    config: &TrialConfig,
) -> Result<AuditVerdict> {
    let stats = run_trials(params, ensemble, config)?;
    let b_given_state2 = stats.count(Preparation::State2, AtomLevel::B);
    let c_given_state1 = stats.count(Preparation::State1, AtomLevel::C);
    Ok(AuditVerdict {
        pass: b_given_state2 == 0 && c_given_state1 == 0,
        b_given_state2,
        c_given_state1,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::povm::closed_form_report;

    fn standard_setup(m: u32, kappa: f64, q1: f64) -> (SystemParams, Ensemble) {
        (
            SystemParams::unambiguous(m, kappa).unwrap(),
            Ensemble::standard(q1).unwrap(),
        )
    }

    #[test]
    fn runs_are_reproducible_and_seed_sensitive() {
        let (params, ensemble) = standard_setup(1, 4.5, 0.5);
        let config = TrialConfig::new(20_000, 7).unwrap();
        let first = run_trials(&params, &ensemble, &config).unwrap();
        let second = run_trials(&params, &ensemble, &config).unwrap();
        assert_eq!(first, second);

        let other_seed = TrialConfig::new(20_000, 8).unwrap();
        let third = run_trials(&params, &ensemble, &other_seed).unwrap();
        assert_ne!(first, third);
    }

    #[test]
    fn counts_are_exhaustive_across_chunk_boundaries() {
        let (params, ensemble) = standard_setup(0, 1.5, 0.4);
        for n in [1, CHUNK_TRIALS, CHUNK_TRIALS + 7, 3 * CHUNK_TRIALS - 1] {
            let config = TrialConfig::new(n, 11).unwrap();
            let stats = run_trials(&params, &ensemble, &config).unwrap();
            let total: u64 = Preparation::ALL
                .iter()
                .map(|&p| stats.prep_count(p))
                .sum();
            assert_eq!(total, n);
        }
    }

    #[test]
    fn certain_prior_and_idle_protocol_pin_every_trial() {
        let params = SystemParams::new(0.0, 1.0, C64::ONE, C64::ZERO).unwrap();
        let ensemble = Ensemble::standard(1.0).unwrap();
        let config = TrialConfig::new(5_000, 3).unwrap();
        let stats = run_trials(&params, &ensemble, &config).unwrap();
        assert_eq!(stats.count(Preparation::State1, AtomLevel::A), 5_000);
    }

    #[test]
    fn empirical_rates_match_their_counts() {
        let (params, ensemble) = standard_setup(1, 4.5, 0.5);
        let config = TrialConfig::new(50_000, 21).unwrap();
        let stats = run_trials(&params, &ensemble, &config).unwrap();
        let report = stats.empirical();
        for prep in Preparation::ALL {
            let row = prep.index();
            assert_eq!(report.prep_counts[row], stats.prep_count(prep));
            let row_sum: f64 = report.rates[row].iter().sum();
            assert!((row_sum - 1.0).abs() <= 1e-12);
        }
        assert!((report.success_rate + report.inconclusive_rate - 1.0).abs() <= 1e-15);
        let n1 = report.prep_counts[0] as f64;
        let rate = report.rates[0][AtomLevel::B.index()];
        let expected_se = (rate * (1.0 - rate) / n1).sqrt();
        assert_eq!(report.standard_errors[0][AtomLevel::B.index()], expected_se);
    }

    #[test]
    fn sampled_success_rate_tracks_the_closed_form() {
        let (params, ensemble) = standard_setup(1, 4.5, 0.5);
        let config = TrialConfig::new(1_000_000, 42).unwrap();
        let stats = run_trials(&params, &ensemble, &config).unwrap();
        let expected = closed_form_report(1, 4.5, &ensemble).unwrap().p_s;
        let se = (expected * (1.0 - expected) / 1e6).sqrt();
        assert!(
            (stats.success_rate() - expected).abs() <= 4.0 * se,
            "empirical {} vs expected {expected}",
            stats.success_rate()
        );
    }

    #[test]
    fn audit_passes_at_the_discrimination_point() {
        let (params, ensemble) = standard_setup(1, 4.5, 0.5);
        let config = TrialConfig::new(100_000, 7).unwrap();
        let verdict = never_wrong_audit(&params, &ensemble, &config).unwrap();
        assert!(verdict.pass);
        assert_eq!(verdict.b_given_state2, 0);
        assert_eq!(verdict.c_given_state1, 0);
    }

    #[test]
    fn audit_fails_when_the_phase_is_detuned() {
        // Detuning the interaction phase while keeping the Ramsey
        // amplitudes consistent with it breaks only the quantization
        // condition, so the first-state outcome starts firing for the
        // second state at a few-percent rate.
        let kappa = 4.5;
        let theta = SystemParams::quantized_theta(1, kappa).unwrap() + 0.1;
        let params = SystemParams::new(
            theta,
            kappa,
            C64::new(theta.cos(), 0.0),
            C64::new(0.0, theta.sin()),
        )
        .unwrap();
        let ensemble = Ensemble::standard(0.5).unwrap();
        let config = TrialConfig::new(100_000, 7).unwrap();
        let verdict = never_wrong_audit(&params, &ensemble, &config).unwrap();
        assert!(!verdict.pass);
        assert!(
            verdict.b_given_state2 > 1_000,
            "expected thousands of forbidden counts, saw {}",
            verdict.b_given_state2
        );
        assert_eq!(verdict.c_given_state1, 0);
    }

    #[test]
    fn zero_trials_are_rejected() {
        assert!(matches!(
            TrialConfig::new(0, 1),
            Err(Error::InvalidTrialCount)
        ));
    }
}
