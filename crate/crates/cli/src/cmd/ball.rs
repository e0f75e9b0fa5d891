use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ccbell::ball::{
    analytic_stage, bell_inequality_check, run_stage, stage_trial, AggregateReport, Color,
    InequalityReport, Stage, StageConfig,
};
use ccbell::Sign;
use serde::{Deserialize, Serialize};

use super::{statistical_tolerance, suffixed, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::args::{BallArgs, Global};
use crate::output::{emit, load_config, Check, Finished, Manifest, TextSummary};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BallConfig {
    pub stage: Option<u8>,
    #[serde(default)]
    pub all_stages: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alice_filter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bob_filter: Option<String>,
    pub p_stage1: Option<f64>,
    pub p_stage23: Option<f64>,
    pub mismatch_prob: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct StageResult {
    pub config: StageConfig,
    pub empirical: AggregateReport,
    pub analytic: AggregateReport,
}

#[derive(Debug, Serialize)]
pub struct InequalityBlock {
    pub inequality: &'static str,
    pub analytic: InequalityReport,
    pub empirical: InequalityReport,
    pub verdict: &'static str,
}

#[derive(Debug, Serialize)]
pub struct BallBody {
    pub stages: Vec<StageResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<InequalityBlock>,
}

const SIGN_PAIRS: [(Sign, Sign); 4] = [
    (Sign::Plus, Sign::Plus),
    (Sign::Plus, Sign::Minus),
    (Sign::Minus, Sign::Plus),
    (Sign::Minus, Sign::Minus),
];

impl TextSummary for BallBody {
    fn text(&self) -> String {
        let mut s = String::new();
        for st in &self.stages {
            let (e, a) = (&st.empirical, &st.analytic);
            let (x, y) = (e.alice_filter, e.bob_filter);
            let _ = writeln!(
                s,
                "stage {} (filters {x}, {y}): registered {:.4} of trials",
                e.stage, e.registration_rate
            );
            for (sa, sb) in SIGN_PAIRS {
                let _ = writeln!(
                    s,
                    "  ({x}_A{}; {y}_B{})  frequency {:.6}   analytic {:.6}",
                    sa.symbol(),
                    sb.symbol(),
                    e.joint(sa, sb),
                    a.joint(sa, sb)
                );
            }
            let _ = writeln!(s, "  correlation {:.6}   analytic {:.6}", e.correlation, a.correlation);
            for alg in &e.per_algorithm {
                if let Some(c) = alg.correlation {
                    let _ = writeln!(s, "  C_{} = {:.6}", alg.algorithm, c);
                }
            }
        }
        if let Some(i) = &self.inequality {
            let _ = writeln!(
                s,
                "{}\n  empirical: LHS {:.6}  RHS {:.6}   analytic: LHS {:.6}  RHS {:.6}  -> {}",
                i.inequality, i.empirical.lhs, i.empirical.rhs, i.analytic.lhs, i.analytic.rhs, i.verdict
            );
        }
        s
    }
}

fn color(s: &str) -> Result<Color> {
    Color::from_letter(s).with_context(|| format!("unknown color `{s}` (expected a, b or c)"))
}

fn write_records(path: &Path, config: &StageConfig) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        trial: u64,
        algorithm: String,
        alice_color: char,
        alice_sign: Option<i8>,
        bob_color: char,
        bob_sign: Option<i8>,
        registered: bool,
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for trial in 0..config.trials {
        let t = stage_trial(config, trial)?;
        w.serialize(Row {
            trial,
            algorithm: t.algorithm.to_string(),
            alice_color: t.alice.filter.letter(),
            alice_sign: t.alice.recorded.map(Sign::value),
            bob_color: t.bob.filter.letter(),
            bob_sign: t.bob.recorded.map(Sign::value),
            registered: t.registered,
        })?;
    }
    w.flush()?;
    Ok(())
}

fn stage_checks(r: &StageResult, checks: &mut Vec<Check>) {
    let (e, a) = (&r.empirical, &r.analytic);
    let counts = e.counts.as_ref().expect("empirical report has counts");
    let tol = statistical_tolerance(counts.registered as f64);
    let n = e.stage.number();
    for (sa, sb) in SIGN_PAIRS {
        checks.push(Check::within(
            format!("stage{n}_frequency_{}{}", sa.symbol(), sb.symbol()),
            e.joint(sa, sb),
            a.joint(sa, sb),
            tol,
        ));
    }
    checks.push(Check::within(format!("stage{n}_correlation"), e.correlation, a.correlation, tol));
    for (alg_e, alg_a) in e.per_algorithm.iter().zip(&a.per_algorithm) {
        if let (Some(ce), Some(ca)) = (alg_e.correlation, alg_a.correlation) {
            let n_alg = counts.by_algorithm[alg_e.algorithm.slot()].iter().flatten().sum::<u64>();
            checks.push(Check::within(
                format!("stage{n}_conditional_correlation_{}", alg_e.algorithm),
                ce,
                ca,
                statistical_tolerance(n_alg as f64),
            ));
        }
    }
}

pub fn run(args: BallArgs, global: &Global) -> Result<Finished> {
    let file: BallConfig = load_config(global.config.as_ref(), "ball-protocol")?;
    let config = BallConfig {
        stage: Some(args.stage.or(file.stage).unwrap_or(1)),
        all_stages: args.all_stages || file.all_stages,
        alice_filter: args.alice_filter.or(file.alice_filter),
        bob_filter: args.bob_filter.or(file.bob_filter),
        p_stage1: Some(args.p_stage1.or(file.p_stage1).unwrap_or(0.15)),
        p_stage23: Some(args.p_stage23.or(file.p_stage23).unwrap_or(0.04)),
        mismatch_prob: Some(args.mismatch_prob.or(file.mismatch_prob).unwrap_or(0.0)),
        trials: Some(global.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS)),
        seed: Some(global.seed.or(file.seed).unwrap_or(DEFAULT_SEED)),
    };
    let (trials, seed) = (config.trials.unwrap(), config.seed.unwrap());
    anyhow::ensure!(trials >= 1, "--trials must be at least 1");
    if config.all_stages && (config.alice_filter.is_some() || config.bob_filter.is_some()) {
        bail!("--all-stages uses each stage's default filters; drop --alice-filter/--bob-filter");
    }
    let stages: Vec<Stage> = if config.all_stages {
        Stage::ALL.to_vec()
    } else {
        vec![Stage::try_from(config.stage.unwrap())?]
    };
    let mut manifest = Manifest::new("ball-protocol", seed, &config, global)?;

    let mut results = Vec::new();
    for &stage in &stages {
        let mut c = StageConfig::new(stage, trials, seed);
        c.p_stage1 = config.p_stage1.unwrap();
        c.p_stage23 = config.p_stage23.unwrap();
        c.mismatch_prob = config.mismatch_prob.unwrap();
        if let Some(f) = &config.alice_filter {
            c.alice_filter = color(f)?;
        }
        if let Some(f) = &config.bob_filter {
            c.bob_filter = color(f)?;
        }
        let empirical = run_stage(&c)?;
        let analytic = analytic_stage(&c)?;
        if let Some(path) = &args.records {
            let path = if config.all_stages {
                suffixed(path, &format!("stage{}", stage.number()))
            } else {
                path.clone()
            };
            write_records(&path, &c)?;
            manifest.add_output(&format!("records-stage{}", stage.number()), &path);
        }
        results.push(StageResult {
            config: c,
            empirical,
            analytic,
        });
    }

    let mut checks = Vec::new();
    for r in &results {
        stage_checks(r, &mut checks);
    }
    let inequality = if config.all_stages {
        let analytic = bell_inequality_check([&results[0].analytic, &results[1].analytic, &results[2].analytic])?;
        let empirical =
            bell_inequality_check([&results[0].empirical, &results[1].empirical, &results[2].empirical])?;
        let tol = statistical_tolerance(trials as f64);
        checks.push(Check::within("inequality_lhs", empirical.lhs, analytic.lhs, tol));
        checks.push(Check::within("inequality_rhs", empirical.rhs, analytic.rhs, tol));
        checks.push(Check::flag(
            "inequality_verdict_matches_analytic",
            empirical.violated == analytic.violated,
        ));
        Some(InequalityBlock {
            inequality: "Pr(a_A+; b_B+) <= Pr(a_A+; c_B+) + Pr(c_A+; b_B+)",
            verdict: if empirical.violated { "VIOLATED" } else { "SATISFIED" },
            analytic,
            empirical,
        })
    } else {
        None
    };
    emit(global, &manifest, &BallBody { stages: results, inequality }, &checks)
}
