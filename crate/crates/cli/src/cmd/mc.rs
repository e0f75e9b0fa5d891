use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use ccbell::model::{self, Description, Direction};
use ccbell::montecarlo::{
    description_equivalence, run_experiment, trial_record, EmpiricalStats, EquivalenceReport,
    ExperimentConfig,
};
use serde::{Deserialize, Serialize};

use super::{statistical_tolerance, suffixed, DEFAULT_SEED, DEFAULT_TRIALS};
use crate::angle::parse_angle;
use crate::args::{DescriptionChoice, Global, McArgs};
use crate::output::{emit, load_config, Check, Finished, Manifest, TextSummary};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct McConfig {
    pub axis_a: Option<String>,
    pub phi: Option<String>,
    pub description: Option<DescriptionChoice>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct McRun {
    pub description: Description,
    pub stream: u64,
    pub stats: EmpiricalStats,
    pub abs_error: f64,
}

#[derive(Debug, Serialize)]
pub struct McBody {
    pub axis1_rad: f64,
    pub axis2_rad: f64,
    pub phi_rad: f64,
    pub analytic_correlation: f64,
    /// `4 / sqrt(trials)`.
    pub tolerance: f64,
    pub runs: Vec<McRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceReport>,
}

impl TextSummary for McBody {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "axes: a = {:.6} rad, b = {:.6} rad, phi = {:.6} rad",
            self.axis1_rad, self.axis2_rad, self.phi_rad
        );
        let _ = writeln!(s, "analytic correlation: {:.6}", self.analytic_correlation);
        for r in &self.runs {
            let _ = writeln!(
                s,
                "{:<6} trials {:>10}  covariance {:>10.6} ± {:.2e}  <S1S2> {:>10.6}  <S1> {:>9.6}  <S2> {:>9.6}",
                format!("{:?}", r.description).to_lowercase(),
                r.stats.trials,
                r.stats.covariance,
                r.stats.standard_error,
                r.stats.pair_mean,
                r.stats.mean1,
                r.stats.mean2,
            );
        }
        if let Some(e) = &self.equivalence {
            let _ = writeln!(
                s,
                "description equivalence: discrepancy {:.3e} (3-sigma tolerance {:.3e}) -> {}",
                e.discrepancy,
                e.combined_tolerance,
                if e.passed { "consistent" } else { "INCONSISTENT" }
            );
        }
        s
    }
}

fn write_records(path: &Path, config: &ExperimentConfig) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        trial: u64,
        lambda_sign: i8,
        outcome1: i8,
        outcome2: i8,
    }
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for trial in 0..config.trials {
        let r = trial_record(config, trial);
        w.serialize(Row {
            trial,
            lambda_sign: r.lambda_sign.value(),
            outcome1: r.outcome1.value(),
            outcome2: r.outcome2.value(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: McArgs, global: &Global) -> Result<Finished> {
    let file: McConfig = load_config(global.config.as_ref(), "mc-run")?;
    let config = McConfig {
        axis_a: Some(args.axis_a.or(file.axis_a).unwrap_or_else(|| "0deg".into())),
        phi: Some(args.phi.or(file.phi).unwrap_or_else(|| "60deg".into())),
        description: Some(args.description.or(file.description).unwrap_or(DescriptionChoice::Alice)),
        trials: Some(global.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS)),
        seed: Some(global.seed.or(file.seed).unwrap_or(DEFAULT_SEED)),
    };
    let (trials, seed) = (config.trials.unwrap(), config.seed.unwrap());
    anyhow::ensure!(trials >= 1, "--trials must be at least 1");
    let axis1 = Direction::new(parse_angle(config.axis_a.as_deref().unwrap())?)?;
    let phi = parse_angle(config.phi.as_deref().unwrap())?;
    let axis2 = axis1.rotated(phi)?;
    let mut manifest = Manifest::new("mc-run", seed, &config, global)?;

    let descriptions: Vec<Description> = match config.description.unwrap() {
        DescriptionChoice::Alice => vec![Description::Alice],
        DescriptionChoice::Bob => vec![Description::Bob],
        DescriptionChoice::Both => Description::BOTH.to_vec(),
    };
    let analytic = model::quantum_correlation(axis1, axis2, Description::Alice);
    let tolerance = statistical_tolerance(trials as f64);

    let mut runs = Vec::new();
    let mut checks = Vec::new();
    let equivalence = if descriptions.len() == 2 {
        let e = description_equivalence(axis1, axis2, trials, seed)?;
        for (run, stream) in [(&e.alice, 0), (&e.bob, 1)] {
            runs.push(McRun {
                description: run.description,
                stream,
                stats: run.stats.clone(),
                abs_error: run.error,
            });
        }
        Some(e)
    } else {
        let description = descriptions[0];
        let stream = u64::from(description == Description::Bob);
        let c = ExperimentConfig::new(axis1, axis2, trials, description, seed).with_stream(stream);
        let stats = run_experiment(&c)?;
        runs.push(McRun {
            description,
            stream,
            abs_error: (stats.covariance - analytic).abs(),
            stats,
        });
        None
    };
    for r in &runs {
        let name = format!("{:?}", r.description).to_lowercase();
        checks.push(Check::within(
            format!("{name}_covariance_vs_analytic"),
            r.stats.covariance,
            analytic,
            tolerance,
        ));
        if let Some(path) = &args.records {
            let path = if runs.len() > 1 { suffixed(path, &name) } else { path.clone() };
            let c = ExperimentConfig::new(axis1, axis2, trials, r.description, seed).with_stream(r.stream);
            write_records(&path, &c)?;
            manifest.add_output(&format!("records-{name}"), &path);
        }
    }
    if let Some(e) = &equivalence {
        checks.push(Check::within(
            "description_discrepancy",
            e.discrepancy,
            0.0,
            e.combined_tolerance,
        ));
    }
    let body = McBody {
        axis1_rad: axis1.theta(),
        axis2_rad: axis2.theta(),
        phi_rad: model::angle_between(axis1, axis2),
        analytic_correlation: analytic,
        tolerance,
        runs,
        equivalence,
    };
    emit(global, &manifest, &body, &checks)
}
