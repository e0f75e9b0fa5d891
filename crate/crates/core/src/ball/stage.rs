use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    AlgorithmId, AlgorithmTable, BallParams, Color, Detection, Detector, Observer, RemoteComputer,
    Sam, Stage, Tally, Weight,
};
use crate::common_cause::{BinaryEventModel, JointTable};
use crate::engine::{fold_trials, Execution, RngStream};
use crate::error::{Error, Result};
use crate::sign::Sign;

fn default_p_stage1() -> f64 {
    BallParams::default().p_stage1
}

fn default_p_stage23() -> f64 {
    BallParams::default().p_stage23
}

/// One stage run. Trials draw from stream `stage.number()` of `seed`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub stage: Stage,
    pub alice_filter: Color,
    pub bob_filter: Color,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_p_stage1")]
    pub p_stage1: f64,
    #[serde(default = "default_p_stage23")]
    pub p_stage23: f64,
    /// Per-trial probability that an observer tunes to its other color.
    #[serde(default)]
    pub mismatch_prob: f64,
}

impl StageConfig {
    /// Default filters: Alice on the fixed color, Bob on the variable color.
    pub fn new(stage: Stage, trials: u64, seed: u64) -> Self {
        let (alice_filter, bob_filter) = stage.colors();
        let params = BallParams::default();
        StageConfig {
            stage,
            alice_filter,
            bob_filter,
            trials,
            seed,
            p_stage1: params.p_stage1,
            p_stage23: params.p_stage23,
            mismatch_prob: 0.0,
        }
    }

    pub fn with_filters(mut self, alice: Color, bob: Color) -> Self {
        self.alice_filter = alice;
        self.bob_filter = bob;
        self
    }

    pub fn with_params(mut self, params: BallParams) -> Self {
        self.p_stage1 = params.p_stage1;
        self.p_stage23 = params.p_stage23;
        self
    }

    pub fn params(&self) -> BallParams {
        BallParams {
            p_stage1: self.p_stage1,
            p_stage23: self.p_stage23,
        }
    }

    pub fn rng_stream(&self) -> RngStream {
        RngStream::new(self.seed, u64::from(self.stage.number()))
    }

    fn validate_model(&self) -> Result<()> {
        Observer::Alice.validate_filter(self.alice_filter)?;
        Observer::Bob.validate_filter(self.bob_filter)?;
        self.params().validate()?;
        if !(0.0..=1.0).contains(&self.mismatch_prob) {
            return Err(Error::ProbabilityOutOfRange {
                what: "mismatch_prob".to_string(),
                value: self.mismatch_prob,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_model()?;
        if self.trials == 0 {
            return Err(Error::NoTrials);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub algorithm: AlgorithmId,
    pub alice: Detection,
    pub bob: Detection,
    pub registered: bool,
}

struct StageActors {
    sam: Sam,
    alice: [Detector; 2],
    bob: [Detector; 2],
    computer: RemoteComputer,
    mismatch_prob: f64,
}

impl StageActors {
    fn new(config: &StageConfig) -> Result<Self> {
        let detectors = |who: Observer, filter: Color| -> Result<[Detector; 2]> {
            Ok([
                Detector::new(who, filter)?,
                Detector::new(who, who.alternate_filter(filter))?,
            ])
        };
        Ok(StageActors {
            sam: Sam::new(config.stage, &config.params())?,
            alice: detectors(Observer::Alice, config.alice_filter)?,
            bob: detectors(Observer::Bob, config.bob_filter)?,
            computer: RemoteComputer::new(config.alice_filter, config.bob_filter),
            mismatch_prob: config.mismatch_prob,
        })
    }

    fn trial<R: Rng + ?Sized>(&self, index: u64, rng: &mut R) -> TrialOutcome {
        let emission = self.sam.emit(rng);
        let mut tuned = |detectors: &[Detector; 2]| -> Detector {
            if self.mismatch_prob > 0.0 && rng.random::<f64>() < self.mismatch_prob {
                detectors[1]
            } else {
                detectors[0]
            }
        };
        let alice = tuned(&self.alice);
        let bob = tuned(&self.bob);
        let (to_alice, to_bob) = emission.quadruple.dispatch();
        let alice = alice.detect(to_alice);
        let bob = bob.detect(to_bob);
        TrialOutcome {
            trial: index,
            algorithm: emission.algorithm,
            registered: self.computer.registers(&alice, &bob).is_some(),
            alice,
            bob,
        }
    }
}

/// Replays trial `index` of `config`.
pub fn stage_trial(config: &StageConfig, index: u64) -> Result<TrialOutcome> {
    config.validate_model()?;
    let actors = StageActors::new(config)?;
    Ok(actors.trial(index, &mut config.rng_stream().trial_rng(index)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportMode {
    Analytic,
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmStats {
    pub algorithm: AlgorithmId,
    /// Share of jointly registered trials produced under this algorithm.
    pub registered_fraction: f64,
    pub alice_mean: Option<f64>,
    pub bob_mean: Option<f64>,
    pub pair_mean: Option<f64>,
    pub correlation: Option<f64>,
}

pub type StageCounts = Tally<u64>;

/// What the remote computer reports for one stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub mode: ReportMode,
    pub stage: Stage,
    pub alice_filter: Color,
    pub bob_filter: Color,
    pub params: BallParams,
    pub mismatch_prob: f64,
    /// Raw counts; absent in analytic mode.
    pub counts: Option<StageCounts>,
    /// Jointly registered trials over all trials.
    pub registration_rate: f64,
    /// Mean balls passing each detector per trial (Alice, Bob).
    pub passages_per_trial: [f64; 2],
    /// Share of trials in which each observer recorded a sign.
    pub recorded_rate: [f64; 2],
    /// `[alice_sign][bob_sign]` over jointly registered trials, index 0 = `+`.
    pub joint_frequency: JointTable,
    pub alice_plus_frequency: f64,
    pub bob_plus_frequency: f64,
    pub alice_mean: f64,
    pub bob_mean: f64,
    pub pair_mean: f64,
    /// `<ab> - <a><b>`.
    pub correlation: f64,
    pub per_algorithm: Vec<AlgorithmStats>,
}

struct Moments {
    total: f64,
    alice: f64,
    bob: f64,
    pair: f64,
}

impl Moments {
    fn of<W: Weight>(table: &[[W; 2]; 2]) -> Self {
        let mut m = Moments {
            total: 0.0,
            alice: 0.0,
            bob: 0.0,
            pair: 0.0,
        };
        for a in Sign::BOTH {
            for b in Sign::BOTH {
                let w = table[a.index()][b.index()].to_f64();
                m.total += w;
                m.alice += w * a.as_f64();
                m.bob += w * b.as_f64();
                m.pair += w * a.as_f64() * b.as_f64();
            }
        }
        m
    }

    /// Covariance from the raw sums, so that a constant `a` gives exactly 0.
    fn covariance(&self) -> f64 {
        (self.pair * self.total - self.alice * self.bob) / (self.total * self.total)
    }
}

impl AggregateReport {
    fn from_tally<W: Weight>(
        config: &StageConfig,
        mode: ReportMode,
        tally: &Tally<W>,
        counts: Option<StageCounts>,
    ) -> Result<Self> {
        let registered = tally.registered.to_f64();
        if registered <= 0.0 {
            return Err(Error::EmptyReport);
        }
        let trials = tally.trials.to_f64();
        let m = Moments::of(&tally.joint);
        let mut joint_frequency = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                joint_frequency[a][b] = tally.joint[a][b].to_f64() / registered;
            }
        }
        let per_algorithm = config
            .stage
            .algorithms()
            .into_iter()
            .map(|algorithm| {
                let am = Moments::of(&tally.by_algorithm[algorithm.slot()]);
                let some = am.total > 0.0;
                AlgorithmStats {
                    algorithm,
                    registered_fraction: am.total / registered,
                    alice_mean: some.then(|| am.alice / am.total),
                    bob_mean: some.then(|| am.bob / am.total),
                    pair_mean: some.then(|| am.pair / am.total),
                    correlation: some.then(|| am.covariance()),
                }
            })
            .collect();
        Ok(AggregateReport {
            mode,
            stage: config.stage,
            alice_filter: config.alice_filter,
            bob_filter: config.bob_filter,
            params: config.params(),
            mismatch_prob: config.mismatch_prob,
            counts,
            registration_rate: registered / trials,
            passages_per_trial: tally.passages.map(|p| p.to_f64() / trials),
            recorded_rate: tally.recorded.map(|r| r.to_f64() / trials),
            joint_frequency,
            alice_plus_frequency: joint_frequency[0][0] + joint_frequency[0][1],
            bob_plus_frequency: joint_frequency[0][0] + joint_frequency[1][0],
            alice_mean: m.alice / m.total,
            bob_mean: m.bob / m.total,
            pair_mean: m.pair / m.total,
            correlation: m.covariance(),
            per_algorithm,
        })
    }

    /// Joint frequency of `(alice_sign; bob_sign)` among registered trials.
    pub fn joint(&self, alice: Sign, bob: Sign) -> f64 {
        self.joint_frequency[alice.index()][bob.index()]
    }

    pub fn algorithm(&self, algorithm: AlgorithmId) -> Option<&AlgorithmStats> {
        self.per_algorithm.iter().find(|s| s.algorithm == algorithm)
    }

    /// Common-cause model estimated from the per-algorithm counts, with the
    /// stage's first algorithm as `z`, `x = (alice +)` and `y = (bob +)`.
    pub fn empirical_common_cause_model(&self) -> Result<BinaryEventModel> {
        let counts = self.counts.as_ref().ok_or(Error::NoTrials)?;
        BinaryEventModel::from_counts(counts.by_algorithm)
    }
}

pub fn run_stage(config: &StageConfig) -> Result<AggregateReport> {
    run_stage_with(config, Execution::default())
}

pub fn run_stage_with(config: &StageConfig, execution: Execution) -> Result<AggregateReport> {
    config.validate()?;
    let actors = StageActors::new(config)?;
    let stream = config.rng_stream();
    let tally = fold_trials(
        config.trials,
        execution,
        Tally::<u64>::default,
        |tally, i| {
            let t = actors.trial(i, &mut stream.trial_rng(i));
            actors.computer.ingest(tally, t.algorithm, &t.alice, &t.bob, 1);
        },
        Tally::merge,
    );
    AggregateReport::from_tally(config, ReportMode::Empirical, &tally, Some(tally))
}

/// Exact report: every (algorithm, table row, filter choice) combination is
/// fed to the remote computer with its probability as weight.
pub fn analytic_stage(config: &StageConfig) -> Result<AggregateReport> {
    config.validate_model()?;
    let actors = StageActors::new(config)?;
    let m = config.mismatch_prob;
    let choices = [(0usize, 1.0 - m), (1usize, m)];
    let mut tally = Tally::<f64>::default();
    for table in actors.sam.tables() {
        for (quad, p_row) in &table.rows {
            for &(ai, wa) in &choices {
                for &(bi, wb) in &choices {
                    let (to_alice, to_bob) = quad.dispatch();
                    let alice = actors.alice[ai].detect(to_alice);
                    let bob = actors.bob[bi].detect(to_bob);
                    actors
                        .computer
                        .ingest(&mut tally, table.id, &alice, &bob, 0.5 * p_row * wa * wb);
                }
            }
        }
    }
    AggregateReport::from_tally(config, ReportMode::Analytic, &tally, None)
}

/// Correlation within the context of a single algorithm.
pub fn conditional_correlation(report: &AggregateReport, algorithm: AlgorithmId) -> Result<f64> {
    if algorithm.stage() != report.stage {
        return Err(Error::AlgorithmStageMismatch {
            algorithm: algorithm.to_string(),
            stage: report.stage.number(),
        });
    }
    report
        .algorithm(algorithm)
        .and_then(|s| s.correlation)
        .ok_or(Error::EmptyReport)
}

/// A joint result `(x_A s; y_B t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointEvent {
    pub alice_color: Color,
    pub alice_sign: Sign,
    pub bob_color: Color,
    pub bob_sign: Sign,
}

impl JointEvent {
    pub fn new(alice_color: Color, alice_sign: Sign, bob_color: Color, bob_sign: Sign) -> Self {
        JointEvent {
            alice_color,
            alice_sign,
            bob_color,
            bob_sign,
        }
    }

    fn matches(&self, quad: &super::Quadruple) -> bool {
        quad.sign_of(Observer::Alice, self.alice_color) == Some(self.alice_sign)
            && quad.sign_of(Observer::Bob, self.bob_color) == Some(self.bob_sign)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTerm {
    pub algorithm: AlgorithmId,
    pub weight: f64,
    pub conditional: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub stage: Stage,
    pub event: JointEvent,
    pub terms: Vec<DecompositionTerm>,
    /// `sum(weight * conditional)` over the stage's two algorithms.
    pub composed: f64,
    /// The frequency the remote computer obtains from the observers' data.
    pub direct: f64,
    pub difference: f64,
}

/// Rebuilds a joint frequency from Sam's per-algorithm probabilities,
/// weighted by the algorithm probabilities, and sets it beside the frequency
/// tabulated from the observers' uploads.
pub fn contextual_decomposition(
    stage: Stage,
    params: &BallParams,
    event: JointEvent,
) -> Result<Decomposition> {
    let in_stage = stage.sends(event.alice_color)
        && stage.sends(event.bob_color)
        && Observer::Alice.validate_filter(event.alice_color).is_ok()
        && Observer::Bob.validate_filter(event.bob_color).is_ok();
    if !in_stage {
        return Err(Error::EventNotInStage {
            stage: stage.number(),
            alice: event.alice_color.letter(),
            bob: event.bob_color.letter(),
        });
    }
    let tables = AlgorithmTable::stage_pair(stage, params)?;
    let terms: Vec<DecompositionTerm> = tables
        .iter()
        .map(|t| DecompositionTerm {
            algorithm: t.id,
            weight: 0.5,
            conditional: t.probability(|q| event.matches(q)),
        })
        .collect();
    let composed = terms.iter().map(|t| t.weight * t.conditional).sum();
    let config = StageConfig::new(stage, 1, 0)
        .with_filters(event.alice_color, event.bob_color)
        .with_params(*params);
    let direct = analytic_stage(&config)?.joint(event.alice_sign, event.bob_sign);
    Ok(Decomposition {
        stage,
        event,
        terms,
        composed,
        direct,
        difference: (composed - direct).abs(),
    })
}

/// Analytic common-cause model of a stage: `z` is the first algorithm,
/// `x` is Alice's fixed-color ball carrying `+`, `y` is Bob's variable-color
/// ball carrying `+`.
pub fn common_cause_model(stage: Stage, params: &BallParams) -> Result<BinaryEventModel> {
    let (fixed, variable) = stage.colors();
    let [first, second] = AlgorithmTable::stage_pair(stage, params)?;
    let table = |t: &AlgorithmTable| -> JointTable {
        let mut out = [[0.0; 2]; 2];
        for x in Sign::BOTH {
            for y in Sign::BOTH {
                out[x.index()][y.index()] = t.probability(|q| {
                    q.sign_of(Observer::Alice, fixed) == Some(x)
                        && q.sign_of(Observer::Bob, variable) == Some(y)
                });
            }
        }
        out
    };
    BinaryEventModel::new(0.5, table(&first), table(&second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn analytic_table_two() {
        let r = analytic_stage(&StageConfig::new(Stage::First, 1, 0)).unwrap();
        assert_abs_diff_eq!(r.joint(Sign::Plus, Sign::Plus), 0.5 * 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(r.joint(Sign::Plus, Sign::Minus), 0.5 * 0.85, epsilon = 1e-15);
        assert_abs_diff_eq!(r.joint(Sign::Minus, Sign::Plus), 0.5 * 0.85, epsilon = 1e-15);
        assert_abs_diff_eq!(r.joint(Sign::Minus, Sign::Minus), 0.5 * 0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(r.correlation, -0.7, epsilon = 1e-12);
        assert_eq!(r.registration_rate, 1.0);
        assert_eq!(r.passages_per_trial, [2.0, 2.0]);
        let a1 = r.algorithm(AlgorithmId::A1).unwrap();
        assert_eq!(a1.alice_mean, Some(1.0));
        assert_abs_diff_eq!(a1.pair_mean.unwrap(), -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(a1.bob_mean.unwrap(), -0.7, epsilon = 1e-12);
        assert_eq!(conditional_correlation(&r, AlgorithmId::A1).unwrap(), 0.0);
        assert_eq!(conditional_correlation(&r, AlgorithmId::A2).unwrap(), 0.0);
    }

    #[test]
    fn stage_mismatch_rejected() {
        let r = analytic_stage(&StageConfig::new(Stage::First, 1, 0)).unwrap();
        assert!(matches!(
            conditional_correlation(&r, AlgorithmId::A1Prime),
            Err(Error::AlgorithmStageMismatch { .. })
        ));
    }

    #[test]
    fn stage_two_and_three_unconditional_correlation() {
        // -(0.96 - 0.04), from the table rows.
        for stage in [Stage::Second, Stage::Third] {
            let r = analytic_stage(&StageConfig::new(stage, 1, 0)).unwrap();
            assert_abs_diff_eq!(r.correlation, -0.92, epsilon = 1e-12);
            assert_abs_diff_eq!(r.joint(Sign::Plus, Sign::Plus), 0.02, epsilon = 1e-15);
        }
    }

    #[test]
    fn no_cherry_in_stage_one() {
        let c = StageConfig::new(Stage::First, 100, 0).with_filters(Color::Cherry, Color::Cherry);
        assert_eq!(run_stage(&c).unwrap_err(), Error::EmptyReport);
        assert_eq!(analytic_stage(&c).unwrap_err(), Error::EmptyReport);
        let t = stage_trial(&c, 3).unwrap();
        assert!(!t.registered);
        assert_eq!((t.alice.passed, t.bob.passed), (2, 2));
        assert_eq!(t.bob.recorded, None);
    }

    #[test]
    fn mismatched_choices_reduce_registration() {
        let mut c = StageConfig::new(Stage::First, 200_000, 8);
        c.mismatch_prob = 0.2;
        let a = analytic_stage(&c).unwrap();
        assert_abs_diff_eq!(a.registration_rate, 0.64, epsilon = 1e-12);
        assert_abs_diff_eq!(a.correlation, -0.7, epsilon = 1e-12);
        let e = run_stage(&c).unwrap();
        assert!((e.registration_rate - 0.64).abs() < 4.0 * (0.64 * 0.36 / 2e5f64).sqrt());
        let counts = e.counts.unwrap();
        assert_eq!(counts.passages, [400_000, 400_000]);
    }

    #[test]
    fn decomposition_examples() {
        let params = BallParams::default();
        let d = contextual_decomposition(
            Stage::First,
            &params,
            JointEvent::new(Color::Amber, Sign::Plus, Color::Blue, Sign::Plus),
        )
        .unwrap();
        assert_eq!(d.terms[0].conditional, 0.15);
        assert_eq!(d.terms[1].conditional, 0.0);
        assert_abs_diff_eq!(d.composed, 0.075, epsilon = 1e-15);
        assert!(d.difference < 1e-12);
        let d = contextual_decomposition(
            Stage::Second,
            &params,
            JointEvent::new(Color::Amber, Sign::Plus, Color::Cherry, Sign::Plus),
        )
        .unwrap();
        assert_abs_diff_eq!(d.composed, 0.02, epsilon = 1e-15);
        assert!(contextual_decomposition(
            Stage::First,
            &params,
            JointEvent::new(Color::Cherry, Sign::Plus, Color::Blue, Sign::Plus),
        )
        .is_err());
    }

    #[test]
    fn ball_common_cause_model() {
        let m = common_cause_model(Stage::First, &BallParams::default()).unwrap();
        assert_eq!(m.joint_given_z, [[0.15, 0.85], [0.0, 0.0]]);
        assert_eq!(m.joint_given_not_z, [[0.0, 0.0], [0.85, 0.15]]);
    }

    #[test]
    fn config_json_defaults() {
        let c: StageConfig =
            serde_json::from_str(r#"{"stage":2,"alice_filter":"a","bob_filter":"c","trials":10,"seed":1}"#)
                .unwrap();
        assert_eq!(c.p_stage1, 0.15);
        assert_eq!(c.p_stage23, 0.04);
        assert_eq!(c.mismatch_prob, 0.0);
        assert!(serde_json::from_str::<StageConfig>(r#"{"stage":4,"alice_filter":"a","bob_filter":"c","trials":10,"seed":1}"#).is_err());
        let bad = StageConfig::new(Stage::First, 10, 0).with_filters(Color::Blue, Color::Blue);
        assert!(matches!(run_stage(&bad), Err(Error::InvalidFilter { observer: "alice", .. })));
    }
}
