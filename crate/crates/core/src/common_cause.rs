//! Checker for the common-cause pattern over two binary effects `x`, `y`
//! and a binary cause `z`:
//!
//! 1. `Pr(x|z) > Pr(x|~z)`
//! 2. `Pr(y|z) > Pr(y|~z)`
//! 3. `Pr(y|z&x) = Pr(y|z&~x)`
//! 4. `Pr(y|~z&x) = Pr(y|~z&~x)`
//! 5. `Pr(x&y|z) = Pr(x|z) Pr(y|z)`
//! 6. `Pr(x&y|~z) = Pr(x|~z) Pr(y|~z)`
//!
//! Conditions 3 and 4 may condition on an event of probability zero (in the
//! spin model Alice's outcome is certain once the hidden variable is fixed).
//! Such sub-checks are reported as vacuous and count as passing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, Description, Direction, HiddenVariable};
use crate::sign::Sign;

/// Normalization tolerance applied when validating tables.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A 2x2 table of `Pr(x, y | .)`, indexed `[x][y]` with index 0 meaning the
/// event occurs and index 1 meaning it is absent.
pub type JointTable = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct BinaryEventModel {
    pub p_z: f64,
    pub joint_given_z: JointTable,
    pub joint_given_not_z: JointTable,
}

#[derive(Deserialize)]
struct RawModel {
    p_z: f64,
    joint_given_z: JointTable,
    joint_given_not_z: JointTable,
}

impl TryFrom<RawModel> for BinaryEventModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        BinaryEventModel::new(raw.p_z, raw.joint_given_z, raw.joint_given_not_z)
    }
}

fn check_probability(what: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && (-NORMALIZATION_TOLERANCE..=1.0 + NORMALIZATION_TOLERANCE).contains(&value)) {
        return Err(Error::ProbabilityOutOfRange {
            what: what.to_string(),
            value,
        });
    }
    Ok(())
}

fn check_table(name: &str, table: &JointTable) -> Result<()> {
    for row in table {
        for &p in row {
            check_probability(name, p)?;
        }
    }
    let sum: f64 = table.iter().flatten().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized {
            table: name.to_string(),
            sum,
        });
    }
    Ok(())
}

fn marginal_x(t: &JointTable) -> f64 {
    t[0][0] + t[0][1]
}

fn marginal_y(t: &JointTable) -> f64 {
    t[0][0] + t[1][0]
}

impl BinaryEventModel {
    pub fn new(p_z: f64, joint_given_z: JointTable, joint_given_not_z: JointTable) -> Result<Self> {
        check_probability("p_z", p_z)?;
        check_table("joint_given_z", &joint_given_z)?;
        check_table("joint_given_not_z", &joint_given_not_z)?;
        Ok(BinaryEventModel {
            p_z,
            joint_given_z,
            joint_given_not_z,
        })
    }

    /// Spin model with `z = lambda_{+-}` and `~z = lambda_{-+}` on the
    /// description's source axis, `x = (S1 along axis1 = +1)` and
    /// `y = (S2 along axis2 = +1)`.
    pub fn from_spin(axis1: Direction, axis2: Direction, description: Description) -> Self {
        let source = description.source_axis(axis1, axis2);
        let table = |lambda: HiddenVariable| -> JointTable {
            let mut t = [[0.0; 2]; 2];
            for r in Sign::BOTH {
                for q in Sign::BOTH {
                    t[r.index()][q.index()] = model::joint_outcome_prob(lambda, axis1, axis2, r, q);
                }
            }
            t
        };
        let [plus, minus] = HiddenVariable::pair_on(source);
        BinaryEventModel {
            p_z: 0.5,
            joint_given_z: table(plus),
            joint_given_not_z: table(minus),
        }
    }

    /// Frequency estimate from counts indexed `[z][x][y]` (0 = occurs).
    pub fn from_counts(counts: [[[u64; 2]; 2]; 2]) -> Result<Self> {
        let totals = [
            counts[0].iter().flatten().sum::<u64>(),
            counts[1].iter().flatten().sum::<u64>(),
        ];
        let all = totals[0] + totals[1];
        if all == 0 {
            return Err(Error::NoTrials);
        }
        let table = |c: usize| -> JointTable {
            let mut t = [[0.0; 2]; 2];
            if totals[c] > 0 {
                for x in 0..2 {
                    for y in 0..2 {
                        t[x][y] = counts[c][x][y] as f64 / totals[c] as f64;
                    }
                }
            } else {
                // Never observed: any normalized table works, the weight is 0.
                t[0][0] = 1.0;
            }
            t
        };
        BinaryEventModel::new(totals[0] as f64 / all as f64, table(0), table(1))
    }

    /// The same model with the meaning of `x` (and/or `y`) negated.
    pub fn oriented(&self, negate_x: bool, negate_y: bool) -> Self {
        let flip = |t: &JointTable| -> JointTable {
            let mut out = [[0.0; 2]; 2];
            for x in 0..2 {
                for y in 0..2 {
                    let sx = if negate_x { 1 - x } else { x };
                    let sy = if negate_y { 1 - y } else { y };
                    out[sx][sy] = t[x][y];
                }
            }
            out
        };
        BinaryEventModel {
            p_z: self.p_z,
            joint_given_z: flip(&self.joint_given_z),
            joint_given_not_z: flip(&self.joint_given_not_z),
        }
    }

    /// Unconditional table by the law of total probability.
    pub fn unconditional(&self) -> JointTable {
        let mut t = [[0.0; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                t[x][y] = self.p_z * self.joint_given_z[x][y]
                    + (1.0 - self.p_z) * self.joint_given_not_z[x][y];
            }
        }
        t
    }

    fn require_nondegenerate(&self) -> Result<()> {
        if self.p_z <= 0.0 || self.p_z >= 1.0 {
            return Err(Error::DegenerateCause(self.p_z));
        }
        Ok(())
    }
}

/// Equality and vacuity thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub epsilon: f64,
}

impl Tolerance {
    pub fn analytic() -> Self {
        Tolerance { epsilon: 1e-9 }
    }

    /// `4 / sqrt(n)` for models estimated from `n` trials.
    pub fn statistical(trials: u64) -> Self {
        Tolerance {
            epsilon: 4.0 / (trials.max(1) as f64).sqrt(),
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::analytic()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    StrictInequality,
    Equality,
}

/// Outcome of one condition. `lhs`/`rhs`/`margin` are `None` only when the
/// condition is vacuous.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub kind: ConditionKind,
    pub holds: bool,
    pub vacuous: bool,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
}

impl ConditionResult {
    fn greater(lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        let margin = lhs - rhs;
        ConditionResult {
            kind: ConditionKind::StrictInequality,
            holds: margin > tol.epsilon,
            vacuous: false,
            lhs: Some(lhs),
            rhs: Some(rhs),
            margin: Some(margin),
        }
    }

    fn equal(lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        let margin = (lhs - rhs).abs();
        ConditionResult {
            kind: ConditionKind::Equality,
            holds: margin <= tol.epsilon,
            vacuous: false,
            lhs: Some(lhs),
            rhs: Some(rhs),
            margin: Some(margin),
        }
    }

    fn vacuous(lhs: Option<f64>, rhs: Option<f64>) -> Self {
        ConditionResult {
            kind: ConditionKind::Equality,
            holds: true,
            vacuous: true,
            lhs,
            rhs,
            margin: None,
        }
    }
}

fn relevance(model: &BinaryEventModel, tol: Tolerance) -> [ConditionResult; 2] {
    let (z, nz) = (&model.joint_given_z, &model.joint_given_not_z);
    [
        ConditionResult::greater(marginal_x(z), marginal_x(nz), tol),
        ConditionResult::greater(marginal_y(z), marginal_y(nz), tol),
    ]
}

fn screening_off_given(table: &JointTable, tol: Tolerance) -> ConditionResult {
    let px = marginal_x(table);
    let pnx = table[1][0] + table[1][1];
    let y_given_x = (px >= tol.epsilon).then(|| table[0][0] / px);
    let y_given_not_x = (pnx >= tol.epsilon).then(|| table[1][0] / pnx);
    match (y_given_x, y_given_not_x) {
        (Some(l), Some(r)) => ConditionResult::equal(l, r, tol),
        (l, r) => ConditionResult::vacuous(l, r),
    }
}

fn factorization_given(table: &JointTable, tol: Tolerance) -> ConditionResult {
    ConditionResult::equal(table[0][0], marginal_x(table) * marginal_y(table), tol)
}

/// Conditions 1 and 2 for the model's own orientation of `x` and `y`.
pub fn check_cause_relevance(model: &BinaryEventModel, tol: Tolerance) -> Result<(bool, bool)> {
    model.require_nondegenerate()?;
    let [x, y] = relevance(model, tol);
    Ok((x.holds, y.holds))
}

/// Conditions 3 and 4. Vacuous sub-checks pass.
pub fn check_screening_off(model: &BinaryEventModel, tol: Tolerance) -> (bool, bool) {
    (
        screening_off_given(&model.joint_given_z, tol).holds,
        screening_off_given(&model.joint_given_not_z, tol).holds,
    )
}

/// Conditions 5 and 6.
pub fn check_factorization(model: &BinaryEventModel, tol: Tolerance) -> (bool, bool) {
    (
        factorization_given(&model.joint_given_z, tol).holds,
        factorization_given(&model.joint_given_not_z, tol).holds,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedRelevance {
    pub negate_x: bool,
    pub negate_y: bool,
    pub cause_raises_x: ConditionResult,
    pub cause_raises_y: ConditionResult,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnconditionalSummary {
    pub pr_x: f64,
    pub pr_y: f64,
    pub pr_x_and_y: f64,
    /// `Pr(x&y) - Pr(x) Pr(y)`.
    pub correlation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommonCauseReport {
    pub tolerance: Tolerance,
    pub cause_raises_x: ConditionResult,
    pub cause_raises_y: ConditionResult,
    pub screening_off_given_z: ConditionResult,
    pub screening_off_given_not_z: ConditionResult,
    pub factorization_given_z: ConditionResult,
    pub factorization_given_not_z: ConditionResult,
    /// Conditions 1-2 under all four orientations of `x` and `y`, since for
    /// anticorrelated effects only some orientations satisfy them.
    pub relevance_by_orientation: Vec<OrientedRelevance>,
    pub unconditional: UnconditionalSummary,
    pub correlation_present: bool,
    /// Conditions 3-6 hold and there is an unconditional correlation to
    /// explain.
    pub certified: bool,
}

impl CommonCauseReport {
    pub fn conditions(&self) -> [(&'static str, &ConditionResult); 6] {
        [
            ("cause_raises_x", &self.cause_raises_x),
            ("cause_raises_y", &self.cause_raises_y),
            ("screening_off_given_z", &self.screening_off_given_z),
            ("screening_off_given_not_z", &self.screening_off_given_not_z),
            ("factorization_given_z", &self.factorization_given_z),
            ("factorization_given_not_z", &self.factorization_given_not_z),
        ]
    }
}

pub fn full_report(model: &BinaryEventModel, tol: Tolerance) -> Result<CommonCauseReport> {
    model.require_nondegenerate()?;
    let [cause_raises_x, cause_raises_y] = relevance(model, tol);
    let relevance_by_orientation = [(false, false), (false, true), (true, false), (true, true)]
        .into_iter()
        .map(|(nx, ny)| {
            let [x, y] = relevance(&model.oriented(nx, ny), tol);
            OrientedRelevance {
                negate_x: nx,
                negate_y: ny,
                cause_raises_x: x,
                cause_raises_y: y,
            }
        })
        .collect();

    let u = model.unconditional();
    let unconditional = UnconditionalSummary {
        pr_x: marginal_x(&u),
        pr_y: marginal_y(&u),
        pr_x_and_y: u[0][0],
        correlation: u[0][0] - marginal_x(&u) * marginal_y(&u),
    };
    let correlation_present = unconditional.correlation.abs() > tol.epsilon;

    let screening_off_given_z = screening_off_given(&model.joint_given_z, tol);
    let screening_off_given_not_z = screening_off_given(&model.joint_given_not_z, tol);
    let factorization_given_z = factorization_given(&model.joint_given_z, tol);
    let factorization_given_not_z = factorization_given(&model.joint_given_not_z, tol);
    let certified = correlation_present
        && screening_off_given_z.holds
        && screening_off_given_not_z.holds
        && factorization_given_z.holds
        && factorization_given_not_z.holds;

    Ok(CommonCauseReport {
        tolerance: tol,
        cause_raises_x,
        cause_raises_y,
        screening_off_given_z,
        screening_off_given_not_z,
        factorization_given_z,
        factorization_given_not_z,
        relevance_by_orientation,
        unconditional,
        correlation_present,
        certified,
    })
}
