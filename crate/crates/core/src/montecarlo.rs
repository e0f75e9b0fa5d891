//! Seeded trial engine for the spin model.
//!
//! A trial samples one of the two equiprobable hidden variables on the
//! description's source axis. The anchored observer's outcome is then
//! certain, and the other observer's outcome is drawn from the conditional
//! probability for that hidden variable.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{fold_trials, Execution, RngStream};
use crate::error::{Error, Result};
use crate::model::{self, Description, Direction, HiddenVariable, Particle, SpinValue};
use crate::sign::Sign;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub axis1: Direction,
    pub axis2: Direction,
    pub trials: u64,
    pub description: Description,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl ExperimentConfig {
    pub fn new(axis1: Direction, axis2: Direction, trials: u64, description: Description, seed: u64) -> Self {
        ExperimentConfig {
            axis1,
            axis2,
            trials,
            description,
            seed,
            stream: 0,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::NoTrials);
        }
        Ok(())
    }

    pub fn rng_stream(&self) -> RngStream {
        RngStream::new(self.seed, self.stream)
    }

    /// Closed-form target for the covariance.
    pub fn analytic_correlation(&self) -> f64 {
        model::quantum_correlation(self.axis1, self.axis2, self.description)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub lambda_sign: SpinValue,
    pub outcome1: SpinValue,
    pub outcome2: SpinValue,
}

pub fn sample_hidden_variable<R: Rng + ?Sized>(axis: Direction, rng: &mut R) -> HiddenVariable {
    HiddenVariable::new(axis, Sign::from_bool(rng.random::<bool>()))
}

/// Draws an outcome by comparing one uniform variate against `Pr(+1)`.
fn draw_outcome<R: Rng + ?Sized>(
    lambda: HiddenVariable,
    particle: Particle,
    axis: Direction,
    rng: &mut R,
) -> SpinValue {
    let p_plus = model::conditional_outcome_prob(lambda, particle, axis, Sign::Plus);
    Sign::from_bool(rng.random::<f64>() < p_plus)
}

pub fn simulate_trial<R: Rng + ?Sized>(config: &ExperimentConfig, rng: &mut R) -> TrialRecord {
    let source = config.description.source_axis(config.axis1, config.axis2);
    let lambda = sample_hidden_variable(source, rng);
    let (outcome1, outcome2) = match config.description {
        Description::Alice => (
            lambda.first_particle,
            draw_outcome(lambda, Particle::Second, config.axis2, rng),
        ),
        Description::Bob => (
            draw_outcome(lambda, Particle::First, config.axis1, rng),
            lambda.second_particle(),
        ),
    };
    TrialRecord {
        lambda_sign: lambda.first_particle,
        outcome1,
        outcome2,
    }
}

/// The record of trial `index`, reproducible in isolation.
pub fn trial_record(config: &ExperimentConfig, index: u64) -> TrialRecord {
    simulate_trial(config, &mut config.rng_stream().trial_rng(index))
}

/// Outcome histogram indexed `[lambda_sign][outcome1][outcome2]`.
pub type LambdaHistogram = [[[u64; 2]; 2]; 2];

fn merge_histograms(mut a: LambdaHistogram, b: LambdaHistogram) -> LambdaHistogram {
    for l in 0..2 {
        for x in 0..2 {
            for y in 0..2 {
                a[l][x][y] += b[l][x][y];
            }
        }
    }
    a
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub trials: u64,
    /// `[outcome1][outcome2]`, index 0 = +1.
    pub counts: [[u64; 2]; 2],
    pub counts_by_lambda: LambdaHistogram,
    pub mean1: f64,
    pub mean2: f64,
    pub pair_mean: f64,
    pub covariance: f64,
    /// Standard error of `covariance`, from the sample variance of the
    /// per-trial centered products.
    pub standard_error: f64,
}

impl EmpiricalStats {
    pub fn from_histogram(by_lambda: LambdaHistogram) -> Result<Self> {
        let mut counts = [[0u64; 2]; 2];
        for per_lambda in &by_lambda {
            for x in 0..2 {
                for y in 0..2 {
                    counts[x][y] += per_lambda[x][y];
                }
            }
        }
        let trials: u64 = counts.iter().flatten().sum();
        if trials == 0 {
            return Err(Error::NoTrials);
        }
        let n = trials as f64;
        let value = |i: usize| Sign::from_index(i).as_f64();
        let (mut mean1, mut mean2, mut pair_mean) = (0.0, 0.0, 0.0);
        for x in 0..2 {
            for y in 0..2 {
                let w = counts[x][y] as f64 / n;
                mean1 += w * value(x);
                mean2 += w * value(y);
                pair_mean += w * value(x) * value(y);
            }
        }
        let covariance = pair_mean - mean1 * mean2;
        let mut variance = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let w = counts[x][y] as f64 / n;
                let d = (value(x) - mean1) * (value(y) - mean2) - covariance;
                variance += w * d * d;
            }
        }
        Ok(EmpiricalStats {
            trials,
            counts,
            counts_by_lambda: by_lambda,
            mean1,
            mean2,
            pair_mean,
            covariance,
            standard_error: (variance / n).sqrt(),
        })
    }

    /// Standard error of `pair_mean`.
    pub fn pair_mean_standard_error(&self) -> f64 {
        ((1.0 - self.pair_mean * self.pair_mean).max(0.0) / self.trials as f64).sqrt()
    }

    /// Frequency of `outcome2 = +1` among trials with the given hidden-variable
    /// sign, or `None` if there were none.
    pub fn outcome2_plus_given_lambda(&self, lambda_sign: Sign) -> Option<f64> {
        let h = &self.counts_by_lambda[lambda_sign.index()];
        let total: u64 = h.iter().flatten().sum();
        (total > 0).then(|| (h[0][0] + h[1][0]) as f64 / total as f64)
    }

    /// Frequency of `outcome1 = +1` among trials with the given hidden-variable
    /// sign.
    pub fn outcome1_plus_given_lambda(&self, lambda_sign: Sign) -> Option<f64> {
        let h = &self.counts_by_lambda[lambda_sign.index()];
        let total: u64 = h.iter().flatten().sum();
        (total > 0).then(|| (h[0][0] + h[0][1]) as f64 / total as f64)
    }

    pub fn lambda_count(&self, lambda_sign: Sign) -> u64 {
        self.counts_by_lambda[lambda_sign.index()].iter().flatten().sum()
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<EmpiricalStats> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, execution: Execution) -> Result<EmpiricalStats> {
    config.validate()?;
    let stream = config.rng_stream();
    let histogram = fold_trials(
        config.trials,
        execution,
        || [[[0u64; 2]; 2]; 2],
        |h, i| {
            let rec = simulate_trial(config, &mut stream.trial_rng(i));
            h[rec.lambda_sign.index()][rec.outcome1.index()][rec.outcome2.index()] += 1;
        },
        merge_histograms,
    );
    EmpiricalStats::from_histogram(histogram)
}

/// Sigmas used by [`description_equivalence`].
pub const EQUIVALENCE_SIGMAS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptionRun {
    pub description: Description,
    pub stats: EmpiricalStats,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub analytic: f64,
    pub alice: DescriptionRun,
    pub bob: DescriptionRun,
    pub discrepancy: f64,
    pub combined_tolerance: f64,
    pub passed: bool,
}

/// Runs the same setup in both descriptions on independent streams (0 for
/// Alice, 1 for Bob) and compares the covariances with each other and with
/// `-cos(phi)`.
pub fn description_equivalence(
    axis1: Direction,
    axis2: Direction,
    trials: u64,
    seed: u64,
) -> Result<EquivalenceReport> {
    description_equivalence_with(axis1, axis2, trials, seed, Execution::default())
}

pub fn description_equivalence_with(
    axis1: Direction,
    axis2: Direction,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> Result<EquivalenceReport> {
    let analytic = -model::angle_between(axis1, axis2).cos();
    let run = |description: Description, stream: u64| -> Result<DescriptionRun> {
        let config = ExperimentConfig::new(axis1, axis2, trials, description, seed).with_stream(stream);
        let stats = run_experiment_with(&config, execution)?;
        let error = (stats.covariance - analytic).abs();
        let tolerance = EQUIVALENCE_SIGMAS * stats.standard_error;
        Ok(DescriptionRun {
            description,
            passed: error <= tolerance,
            stats,
            error,
            tolerance,
        })
    };
    let alice = run(Description::Alice, 0)?;
    let bob = run(Description::Bob, 1)?;
    let discrepancy = (alice.stats.covariance - bob.stats.covariance).abs();
    let combined_tolerance = EQUIVALENCE_SIGMAS
        * (alice.stats.standard_error.powi(2) + bob.stats.standard_error.powi(2)).sqrt();
    let passed = alice.passed && bob.passed && discrepancy <= combined_tolerance;
    Ok(EquivalenceReport {
        analytic,
        alice,
        bob,
        discrepancy,
        combined_tolerance,
        passed,
    })
}

/// The four measurement settings of a CHSH combination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshAngles {
    pub a: Direction,
    pub a_prime: Direction,
    pub b: Direction,
    pub b_prime: Direction,
}

impl ChshAngles {
    /// `(0, pi/2, pi/4, 3pi/4)`, where the singlet correlation reaches
    /// `|S| = 2 sqrt(2)`.
    pub fn optimal() -> Self {
        use std::f64::consts::PI;
        let d = |t: f64| Direction::new(t).expect("finite angle");
        ChshAngles {
            a: d(0.0),
            a_prime: d(PI / 2.0),
            b: d(PI / 4.0),
            b_prime: d(3.0 * PI / 4.0),
        }
    }

    /// Contexts in order `(a,b), (a,b'), (a',b), (a',b')` with their signs
    /// in the combination.
    pub fn contexts(&self) -> [(&'static str, Direction, Direction, f64); 4] {
        [
            ("E(a,b)", self.a, self.b, 1.0),
            ("E(a,b')", self.a, self.b_prime, -1.0),
            ("E(a',b)", self.a_prime, self.b, 1.0),
            ("E(a',b')", self.a_prime, self.b_prime, 1.0),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChshMode {
    Analytic,
    Empirical,
}

pub const LOCAL_BOUND: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshTerm {
    pub label: String,
    pub axis1: Direction,
    pub axis2: Direction,
    pub coefficient: f64,
    pub value: f64,
    /// Standard error of an empirical term; zero for analytic terms.
    pub standard_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub mode: ChshMode,
    pub terms: Vec<ChshTerm>,
    pub value: f64,
    pub standard_error: f64,
    pub exceeds_local_bound: bool,
}

/// `E(a,b) - E(a,b') + E(a',b) + E(a',b')`. Every term is evaluated in its
/// own context with its own hidden-variable set: in empirical mode each term
/// is an independent experiment on stream `0..4` of `seed`.
pub fn chsh_value(
    angles: &ChshAngles,
    mode: ChshMode,
    trials: u64,
    seed: u64,
    execution: Execution,
) -> Result<ChshResult> {
    let mut terms = Vec::with_capacity(4);
    for (stream, (label, axis1, axis2, coefficient)) in angles.contexts().into_iter().enumerate() {
        let (value, standard_error) = match mode {
            ChshMode::Analytic => (
                model::averaged_pair_expectation(axis1, axis2, Description::Alice),
                0.0,
            ),
            ChshMode::Empirical => {
                let config = ExperimentConfig::new(axis1, axis2, trials, Description::Alice, seed)
                    .with_stream(stream as u64);
                let stats = run_experiment_with(&config, execution)?;
                (stats.pair_mean, stats.pair_mean_standard_error())
            }
        };
        terms.push(ChshTerm {
            label: label.to_string(),
            axis1,
            axis2,
            coefficient,
            value,
            standard_error,
        });
    }
    let value = terms.iter().map(|t| t.coefficient * t.value).sum::<f64>();
    let standard_error = terms.iter().map(|t| t.standard_error.powi(2)).sum::<f64>().sqrt();
    Ok(ChshResult {
        mode,
        exceeds_local_bound: value.abs() > LOCAL_BOUND,
        terms,
        value,
        standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dir(t: f64) -> Direction {
        Direction::new(t).unwrap()
    }

    #[test]
    fn hidden_variable_sign_is_fair() {
        let stream = RngStream::new(2024, 0);
        let mut rng = stream.generator();
        let n = 1_000_000;
        let plus = (0..n)
            .filter(|_| sample_hidden_variable(Direction::z(), &mut rng).first_particle == Sign::Plus)
            .count();
        let frac = plus as f64 / n as f64;
        // 3 sigma of a fair binomial at 10^6 draws.
        assert!((frac - 0.5).abs() < 0.0015, "fraction {frac}");
    }

    #[test]
    fn sign_sequences_are_reproducible_and_stream_specific() {
        let draw = |s: RngStream| -> Vec<Sign> {
            let mut rng = s.generator();
            (0..100).map(|_| sample_hidden_variable(Direction::z(), &mut rng).first_particle).collect()
        };
        assert_eq!(draw(RngStream::new(9, 0)), draw(RngStream::new(9, 0)));
        assert_ne!(draw(RngStream::new(9, 0)), draw(RngStream::new(9, 1)));
    }

    #[test]
    fn equal_axes_always_anticorrelated() {
        for description in Description::BOTH {
            for seed in 0..5 {
                let c = ExperimentConfig::new(dir(0.4), dir(0.4), 20_000, description, seed);
                let s = run_experiment(&c).unwrap();
                assert_eq!(s.counts[0][0], 0);
                assert_eq!(s.counts[1][1], 0);
                assert_eq!(s.pair_mean, -1.0);
            }
        }
    }

    #[test]
    fn orthogonal_conditional_frequency() {
        let c = ExperimentConfig::new(dir(0.0), dir(PI / 2.0), 1_000_000, Description::Alice, 11);
        let s = run_experiment(&c).unwrap();
        // Given outcome1 = +1 (lambda_{+-}), outcome2 = +1 with probability 1/2.
        let f = s.outcome2_plus_given_lambda(Sign::Plus).unwrap();
        assert!((f - 0.5).abs() < 0.003, "{f}");
    }

    #[test]
    fn pi_over_three_plus_plus_frequency() {
        // 1/2 * [1 * (1 - cos(pi/3))/2] + 1/2 * [0] = 0.125.
        let c = ExperimentConfig::new(dir(0.0), dir(PI / 3.0), 1_000_000, Description::Alice, 12);
        let s = run_experiment(&c).unwrap();
        let f = s.counts[0][0] as f64 / s.trials as f64;
        assert!((f - 0.125).abs() < 0.002, "{f}");
    }

    #[test]
    fn run_experiment_examples() {
        let n = 1_000_000u64;
        let c = ExperimentConfig::new(dir(0.0), dir(PI / 3.0), n, Description::Alice, 5);
        let s = run_experiment(&c).unwrap();
        assert!((s.covariance + 0.5).abs() < 4.0 / (n as f64).sqrt() * 2.0);

        let c = ExperimentConfig::new(dir(0.0), dir(PI / 2.0), n, Description::Bob, 5);
        assert!(run_experiment(&c).unwrap().covariance.abs() < 0.004);

        let c = ExperimentConfig::new(dir(1.0), dir(1.0), 1000, Description::Alice, 5);
        let s = run_experiment(&c).unwrap();
        assert_eq!(s.pair_mean, -1.0);
        // The plug-in means product is the only departure from -1.
        assert_eq!(s.covariance, -1.0 + s.mean1 * s.mean1);
        assert!((s.covariance + 1.0).abs() <= 3.0 * s.standard_error + f64::EPSILON);
    }

    #[test]
    fn zero_trials_rejected() {
        let c = ExperimentConfig::new(dir(0.0), dir(0.0), 0, Description::Alice, 0);
        assert_eq!(run_experiment(&c), Err(Error::NoTrials));
    }

    #[test]
    fn trial_record_matches_engine() {
        let c = ExperimentConfig::new(dir(0.0), dir(1.2), 2_000, Description::Bob, 77);
        let mut h = [[[0u64; 2]; 2]; 2];
        for i in 0..c.trials {
            let r = trial_record(&c, i);
            assert_eq!(r.outcome2, -r.lambda_sign);
            h[r.lambda_sign.index()][r.outcome1.index()][r.outcome2.index()] += 1;
        }
        assert_eq!(run_experiment_with(&c, Execution::Sequential).unwrap().counts_by_lambda, h);
    }

    #[test]
    fn equivalence_edge_angles() {
        let r = description_equivalence(dir(0.0), dir(0.0), 10_000, 3).unwrap();
        assert_eq!(r.alice.stats.pair_mean, -1.0);
        assert_eq!(r.bob.stats.pair_mean, -1.0);
        assert!(r.passed);
        let r = description_equivalence(dir(0.0), dir(PI), 10_000, 3).unwrap();
        assert_eq!(r.alice.stats.pair_mean, 1.0);
        assert_eq!(r.bob.stats.pair_mean, 1.0);
        assert!(r.passed);
    }

    #[test]
    fn chsh_analytic() {
        let r = chsh_value(&ChshAngles::optimal(), ChshMode::Analytic, 0, 0, Execution::Sequential).unwrap();
        assert!((r.value + 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(r.exceeds_local_bound);
        let a = dir(0.3);
        let same = ChshAngles { a, a_prime: a, b: a, b_prime: a };
        let r = chsh_value(&same, ChshMode::Analytic, 0, 0, Execution::Sequential).unwrap();
        assert_eq!(r.terms.iter().map(|t| t.value).collect::<Vec<_>>(), vec![-1.0; 4]);
        assert_eq!(r.value, -2.0);
        assert!(!r.exceeds_local_bound);
    }
}
