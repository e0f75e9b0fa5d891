use serde::{Deserialize, Serialize};

use super::{AggregateReport, Stage};
use crate::error::{Error, Result};
use crate::sign::Sign;

/// `Pr(a_A+; b_B+) <= Pr(a_A+; c_B+) + Pr(c_A+; b_B+)`, evaluated with each
/// term taken from its own stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs_stage2: f64,
    pub rhs_stage3: f64,
    pub rhs: f64,
    /// `lhs - rhs`; positive when violated.
    pub margin: f64,
    pub violated: bool,
}

pub fn bell_inequality_check(reports: [&AggregateReport; 3]) -> Result<InequalityReport> {
    for (position, (report, stage)) in reports.iter().zip(Stage::ALL).enumerate() {
        let (alice, bob) = stage.colors();
        if report.stage != stage || report.alice_filter != alice || report.bob_filter != bob {
            return Err(Error::InequalityInputMismatch {
                position: position + 1,
                expected_stage: stage.number(),
                expected_alice: alice.letter(),
                expected_bob: bob.letter(),
                stage: report.stage.number(),
                alice: report.alice_filter.letter(),
                bob: report.bob_filter.letter(),
            });
        }
    }
    let pp = |r: &AggregateReport| r.joint(Sign::Plus, Sign::Plus);
    let lhs = pp(reports[0]);
    let rhs_stage2 = pp(reports[1]);
    let rhs_stage3 = pp(reports[2]);
    let rhs = rhs_stage2 + rhs_stage3;
    Ok(InequalityReport {
        lhs,
        rhs_stage2,
        rhs_stage3,
        rhs,
        margin: lhs - rhs,
        violated: lhs > rhs,
    })
}
