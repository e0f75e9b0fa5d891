use ccbell::ball::{analytic_stage, common_cause_model, run_stage_with, stage_trial, BallParams, Stage, StageConfig};
use ccbell::common_cause::{full_report, Tolerance};
use ccbell::model::{Description, Direction};
use ccbell::montecarlo::{run_experiment_with, trial_record, ExperimentConfig};
use ccbell::{Execution, Sign};

#[test]
fn replayed_trials_rebuild_the_histogram() {
    let config = ExperimentConfig::new(Direction::z(), Direction::new(1.2).unwrap(), 5000, Description::Bob, 11);
    let stats = run_experiment_with(&config, Execution::Sequential).unwrap();
    let mut counts = [[0u64; 2]; 2];
    for i in 0..config.trials {
        let r = trial_record(&config, i);
        counts[r.outcome1.index()][r.outcome2.index()] += 1;
    }
    assert_eq!(counts, stats.counts);
}

#[test]
fn replayed_stage_trials_rebuild_the_tally() {
    let config = StageConfig::new(Stage::Third, 4000, 5);
    let report = run_stage_with(&config, Execution::Sequential).unwrap();
    let mut joint = [[0u64; 2]; 2];
    for i in 0..config.trials {
        let t = stage_trial(&config, i).unwrap();
        if let (Some(a), Some(b)) = (t.alice.recorded, t.bob.recorded) {
            joint[a.index()][b.index()] += 1;
        }
    }
    assert_eq!(joint, report.counts.unwrap().joint);
}

#[test]
fn reports_round_trip_through_json() {
    let config = StageConfig::new(Stage::First, 2000, 3);
    let report = run_stage_with(&config, Execution::Parallel).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    assert_eq!(serde_json::from_str::<ccbell::ball::AggregateReport>(&text).unwrap(), report);

    let spin = ExperimentConfig::new(Direction::z(), Direction::y(), 2000, Description::Alice, 3);
    let stats = run_experiment_with(&spin, Execution::Parallel).unwrap();
    let text = serde_json::to_string(&stats).unwrap();
    assert_eq!(serde_json::from_str::<ccbell::montecarlo::EmpiricalStats>(&text).unwrap(), stats);
}

#[test]
fn estimated_ball_model_screens_off() {
    let params = BallParams::default();
    for stage in Stage::ALL {
        let trials = 200_000;
        let report = run_stage_with(&StageConfig::new(stage, trials, 17), Execution::Parallel).unwrap();
        let estimated = report.empirical_common_cause_model().unwrap();
        let exact = common_cause_model(stage, &params).unwrap();
        assert!((estimated.p_z - exact.p_z).abs() <= Tolerance::statistical(trials).epsilon);
        let checked = full_report(&estimated, Tolerance::statistical(trials)).unwrap();
        assert!(checked.screening_off_given_z.holds && checked.screening_off_given_not_z.holds);
        assert!(checked.factorization_given_z.holds && checked.factorization_given_not_z.holds);
    }
}

#[test]
fn mismatched_filters_thin_the_registrations() {
    let mut config = StageConfig::new(Stage::Second, 100_000, 8);
    config.mismatch_prob = 0.3;
    let report = run_stage_with(&config, Execution::Parallel).unwrap();
    assert!((report.registration_rate - 0.49).abs() < 0.01);
    let analytic = analytic_stage(&config).unwrap();
    for a in Sign::BOTH {
        for b in Sign::BOTH {
            assert!((report.joint(a, b) - analytic.joint(a, b)).abs() < 0.02);
        }
    }
}
