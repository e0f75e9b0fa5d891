use std::fmt::Write as _;
use std::io::Write as _;

use anyhow::{bail, Context, Result};
use ccbell::model::{self, Description, Direction, HiddenVariable};
use serde::{Deserialize, Serialize};

use super::DEFAULT_SEED;
use crate::angle::{degrees, parse_angle, parse_sweep};
use crate::args::{Global, SpinArgs};
use crate::output::{emit, load_config, Check, Finished, Manifest, TextSummary};

pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SpinConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phi: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct SpinRow {
    pub phi_rad: f64,
    pub phi_deg: f64,
    pub quantum_correlation: f64,
    pub quantum_correlation_bob: f64,
    /// Alice description, `[lambda_{+-}, lambda_{-+}]`.
    pub subquantum_correlation: [f64; 2],
    /// Bob description, `[lambda_{+-}, lambda_{-+}]` on Bob's axis.
    pub subquantum_correlation_bob: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct SpinBody {
    pub rows: Vec<SpinRow>,
}

impl TextSummary for SpinBody {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>10} {:>12} {:>14} {:>14}", "phi_deg", "phi_rad", "C_QM", "C_lambda");
        for r in &self.rows {
            let worst = r
                .subquantum_correlation
                .iter()
                .chain(&r.subquantum_correlation_bob)
                .fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
            let _ = writeln!(
                s,
                "{:>10.4} {:>12.6} {:>14.10} {:>14.3e}",
                r.phi_deg, r.phi_rad, r.quantum_correlation, worst
            );
        }
        s
    }
}

fn row(phi: f64) -> Result<SpinRow> {
    let a = Direction::z();
    let b = Direction::new(phi)?;
    let sub = |source: Direction| -> Result<[f64; 2]> {
        let [plus, minus] = HiddenVariable::pair_on(source);
        Ok([
            model::subquantum_correlation(plus, a, b)?,
            model::subquantum_correlation(minus, a, b)?,
        ])
    };
    Ok(SpinRow {
        phi_rad: phi,
        phi_deg: degrees(phi),
        quantum_correlation: model::quantum_correlation(a, b, Description::Alice),
        quantum_correlation_bob: model::quantum_correlation(a, b, Description::Bob),
        subquantum_correlation: sub(a)?,
        subquantum_correlation_bob: sub(b)?,
    })
}

pub fn run(args: SpinArgs, global: &Global) -> Result<Finished> {
    let file: SpinConfig = load_config(global.config.as_ref(), "spin-correlation")?;
    let config = SpinConfig {
        phi: if args.phi.is_empty() { file.phi } else { args.phi },
        sweep: args.sweep.or(file.sweep),
        seed: Some(global.seed.or(file.seed).unwrap_or(DEFAULT_SEED)),
    };
    if config.phi.is_empty() && config.sweep.is_none() {
        bail!("spin-correlation needs --phi <angle> or --sweep start:stop:step<unit>");
    }
    if args.plot_data.is_some() && config.sweep.is_none() {
        bail!("--plot-data requires --sweep");
    }
    let mut angles = Vec::new();
    for p in &config.phi {
        angles.push(parse_angle(p)?);
    }
    let sweep = config.sweep.as_deref().map(parse_sweep).transpose()?;

    let mut manifest = Manifest::new("spin-correlation", config.seed.unwrap_or(DEFAULT_SEED), &config, global)?;
    let mut rows = Vec::new();
    for &phi in &angles {
        rows.push(row(phi)?);
    }
    if let Some(sweep) = &sweep {
        let sweep_rows: Vec<SpinRow> = sweep.iter().map(|&p| row(p)).collect::<Result<_>>()?;
        if let Some(path) = &args.plot_data {
            let mut f = std::io::BufWriter::new(
                std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
            );
            writeln!(f, "# phi_rad quantum_correlation")?;
            for r in &sweep_rows {
                writeln!(f, "{} {}", r.phi_rad, r.quantum_correlation)?;
            }
            f.flush()?;
            manifest.add_output("plot-data", path);
        }
        rows.extend(sweep_rows);
    }

    let max_by = |f: &dyn Fn(&SpinRow) -> f64| rows.iter().map(f).fold(0.0f64, f64::max);
    let checks = vec![
        Check::within(
            "quantum_correlation_vs_minus_cos_phi",
            max_by(&|r| (r.quantum_correlation + r.phi_rad.cos()).abs()),
            0.0,
            IDENTITY_TOLERANCE,
        ),
        Check::within(
            "subquantum_correlation_vanishes",
            max_by(&|r| {
                r.subquantum_correlation
                    .iter()
                    .chain(&r.subquantum_correlation_bob)
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            }),
            0.0,
            IDENTITY_TOLERANCE,
        ),
        Check::within(
            "alice_bob_descriptions_agree",
            max_by(&|r| (r.quantum_correlation - r.quantum_correlation_bob).abs()),
            0.0,
            IDENTITY_TOLERANCE,
        ),
    ];
    emit(global, &manifest, &SpinBody { rows }, &checks)
}
