use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use ccbell::ball::{self, BallParams, Stage};
use ccbell::common_cause::{full_report, BinaryEventModel, CommonCauseReport, ConditionResult, Tolerance};
use ccbell::model::{Description, Direction};
use serde::{Deserialize, Serialize};

use super::DEFAULT_SEED;
use crate::angle::parse_angle;
use crate::args::{Builtin, CommonCauseArgs, Global};
use crate::output::{emit, load_config, Check, Finished, Manifest, TextSummary};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CommonCauseConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_stage1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_stage23: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct CommonCauseBody {
    pub source: String,
    pub events: String,
    pub model: BinaryEventModel,
    pub report: CommonCauseReport,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into())
}

fn line(s: &mut String, name: &str, c: &ConditionResult) {
    let status = match (c.vacuous, c.holds) {
        (true, _) => "vacuous",
        (false, true) => "holds",
        (false, false) => "fails",
    };
    let _ = writeln!(
        s,
        "  {name:<27} {status:<8} lhs {:>10}  rhs {:>10}  margin {:>10}",
        fmt_opt(c.lhs),
        fmt_opt(c.rhs),
        fmt_opt(c.margin)
    );
}

impl TextSummary for CommonCauseBody {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "source: {}\nevents: {}", self.source, self.events);
        for (name, c) in self.report.conditions() {
            line(&mut s, name, c);
        }
        let _ = writeln!(s, "  relevance by orientation:");
        for o in &self.report.relevance_by_orientation {
            let _ = writeln!(
                s,
                "    x{} y{}: raises x {}  raises y {}",
                if o.negate_x { "'" } else { " " },
                if o.negate_y { "'" } else { " " },
                o.cause_raises_x.holds,
                o.cause_raises_y.holds
            );
        }
        let u = &self.report.unconditional;
        let _ = writeln!(
            s,
            "  unconditional: Pr(x) {:.6}  Pr(y) {:.6}  Pr(x&y) {:.6}  correlation {:.6}",
            u.pr_x, u.pr_y, u.pr_x_and_y, u.correlation
        );
        let _ = writeln!(s, "  certified common cause: {}", self.report.certified);
        s
    }
}

pub fn run(args: CommonCauseArgs, global: &Global) -> Result<Finished> {
    let file: CommonCauseConfig = load_config(global.config.as_ref(), "common-cause")?;
    let model_path = args.model.or(file.model);
    let builtin = match (args.builtin, &model_path) {
        (Some(b), _) => Some(b),
        (None, Some(_)) => None,
        (None, None) => Some(file.builtin.unwrap_or(Builtin::Spin)),
    };
    let mut config = CommonCauseConfig {
        builtin,
        model: if builtin.is_some() { None } else { model_path },
        seed: Some(global.seed.or(file.seed).unwrap_or(DEFAULT_SEED)),
        ..Default::default()
    };
    let (source, events, model) = match builtin {
        Some(Builtin::Spin) => {
            let phi = args.phi.or(file.phi).unwrap_or_else(|| "45deg".into());
            let b = Direction::new(parse_angle(&phi)?)?;
            config.phi = Some(phi);
            (
                "builtin spin model (Alice description)".to_string(),
                "z = lambda^a_{+-}, x = (S_a^(1) = +1), y = (S_b^(2) = +1)".to_string(),
                BinaryEventModel::from_spin(Direction::z(), b, Description::Alice),
            )
        }
        Some(Builtin::Ball) => {
            let stage = Stage::try_from(args.stage.or(file.stage).unwrap_or(1))?;
            let params = BallParams {
                p_stage1: args.p_stage1.or(file.p_stage1).unwrap_or(0.15),
                p_stage23: args.p_stage23.or(file.p_stage23).unwrap_or(0.04),
            };
            params.validate()?;
            config.stage = Some(stage.number());
            config.p_stage1 = Some(params.p_stage1);
            config.p_stage23 = Some(params.p_stage23);
            let (fixed, variable) = stage.colors();
            let [first, _] = stage.algorithms();
            (
                format!("builtin ball protocol, stage {stage}"),
                format!("z = {first}, x = {fixed}_A+, y = {variable}_B+"),
                ball::common_cause_model(stage, &params)?,
            )
        }
        None => {
            let path = config.model.clone().expect("model path");
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let model: BinaryEventModel =
                serde_json::from_str(&text).with_context(|| format!("invalid model {}", path.display()))?;
            (format!("model file {}", path.display()), "as given".to_string(), model)
        }
    };
    let manifest = Manifest::new("common-cause", config.seed.unwrap(), &config, global)?;
    let report = full_report(&model, Tolerance::analytic())?;
    let mut checks: Vec<Check> = report.conditions()[2..]
        .iter()
        .map(|(name, c)| Check::flag(*name, c.holds))
        .collect();
    checks.push(Check::flag("unconditional_correlation_present", report.correlation_present));
    emit(
        global,
        &manifest,
        &CommonCauseBody {
            source,
            events,
            model,
            report,
        },
        &checks,
    )
}
