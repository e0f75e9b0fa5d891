use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use anyhow::Result;
use ccbell::model::Direction;
use ccbell::montecarlo::{chsh_value, ChshAngles, ChshMode, ChshResult, LOCAL_BOUND};
use ccbell::Execution;
use serde::{Deserialize, Serialize};

use super::{DEFAULT_SEED, DEFAULT_TRIALS};
use crate::angle::parse_angle;
use crate::args::{ChshArgs, ChshModeChoice, Global};
use crate::output::{emit, load_config, Check, Finished, Manifest, TextSummary};

pub const EMPIRICAL_FLOOR: f64 = 0.02;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ChshConfig {
    pub a: Option<String>,
    pub a_prime: Option<String>,
    pub b: Option<String>,
    pub b_prime: Option<String>,
    pub mode: Option<ChshModeChoice>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct ChshBody {
    pub label: &'static str,
    pub angles: ChshAngles,
    pub local_bound: f64,
    pub quantum_bound: f64,
    /// `sum coefficient * (-cos(axis1 - axis2))`.
    pub closed_form: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<ChshResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<ChshResult>,
}

impl TextSummary for ChshBody {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "angles: a {:.6}  a' {:.6}  b {:.6}  b' {:.6} rad",
            self.angles.a.theta(),
            self.angles.a_prime.theta(),
            self.angles.b.theta(),
            self.angles.b_prime.theta()
        );
        for r in [&self.analytic, &self.empirical].into_iter().flatten() {
            let _ = writeln!(s, "{:?}:", r.mode);
            for t in &r.terms {
                let _ = writeln!(s, "  {:+} {:<9} {:>10.6}", t.coefficient, t.label, t.value);
            }
            let _ = writeln!(
                s,
                "  S = {:.6} ± {:.2e}   |S| > {}: {}",
                r.value, r.standard_error, self.local_bound, r.exceeds_local_bound
            );
        }
        let _ = writeln!(s, "quantum bound 2*sqrt(2) = {:.6}", self.quantum_bound);
        s
    }
}

fn closed_form(angles: &ChshAngles) -> f64 {
    angles
        .contexts()
        .iter()
        .map(|(_, x, y, coef)| -coef * (x.theta() - y.theta()).cos())
        .sum()
}

pub fn run(args: ChshArgs, global: &Global) -> Result<Finished> {
    let file: ChshConfig = load_config(global.config.as_ref(), "chsh")?;
    let pick = |flag: Option<String>, file: Option<String>, default: &str| {
        flag.or(file).unwrap_or_else(|| default.to_string())
    };
    let config = ChshConfig {
        a: Some(pick(args.a, file.a, "0deg")),
        a_prime: Some(pick(args.a_prime, file.a_prime, "90deg")),
        b: Some(pick(args.b, file.b, "45deg")),
        b_prime: Some(pick(args.b_prime, file.b_prime, "135deg")),
        mode: Some(args.mode.or(file.mode).unwrap_or(ChshModeChoice::Both)),
        trials: Some(global.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS)),
        seed: Some(global.seed.or(file.seed).unwrap_or(DEFAULT_SEED)),
    };
    let dir = |s: &Option<String>| -> Result<Direction> { Ok(Direction::new(parse_angle(s.as_deref().unwrap())?)?) };
    let angles = ChshAngles {
        a: dir(&config.a)?,
        a_prime: dir(&config.a_prime)?,
        b: dir(&config.b)?,
        b_prime: dir(&config.b_prime)?,
    };
    let (trials, seed, mode) = (config.trials.unwrap(), config.seed.unwrap(), config.mode.unwrap());
    anyhow::ensure!(trials >= 1, "--trials must be at least 1");
    let manifest = Manifest::new("chsh", seed, &config, global)?;

    let closed = closed_form(&angles);
    let analytic = chsh_value(&angles, ChshMode::Analytic, trials, seed, Execution::default())?;
    let empirical = match mode {
        ChshModeChoice::Analytic => None,
        _ => Some(chsh_value(&angles, ChshMode::Empirical, trials, seed, Execution::default())?),
    };
    let mut checks = vec![Check::within("analytic_vs_closed_form", analytic.value, closed, 1e-12)];
    if let Some(e) = &empirical {
        checks.push(Check::within(
            "empirical_vs_analytic",
            e.value,
            analytic.value,
            EMPIRICAL_FLOOR.max(4.0 * e.standard_error),
        ));
    }
    let body = ChshBody {
        label: "derived-demonstration",
        angles,
        local_bound: LOCAL_BOUND,
        quantum_bound: 2.0 * SQRT_2,
        closed_form: closed,
        analytic: (mode != ChshModeChoice::Empirical).then_some(analytic),
        empirical,
    };
    emit(global, &manifest, &body, &checks)
}
