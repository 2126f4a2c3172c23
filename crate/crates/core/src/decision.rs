//! Bayes-optimal restriction decisions driven by parity probabilities.
//!
//! A decision maker picks one of three restriction levels every step and
//! pays a loss that depends on whether the tracked quantity went up or down.
//! Given a probability of increase `q`, the Bayes action minimizes
//! `q·l(increase, a) + (1 - q)·l(decrease, a)`.

use serde::{Deserialize, Serialize};

use crate::distributions::{ParityRecord, ProbabilitySource};
use crate::error::{check_probability, Error, Result};

/// Restriction level, from most to least restrictive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Tight,
    Mild,
    None,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Tight, Action::Mild, Action::None];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// What actually happened to the tracked quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    Increase,
    Decrease,
}

impl Truth {
    /// A parity outcome of 1 means the value did not go up.
    pub fn from_parity(outcome: bool) -> Self {
        if outcome {
            Truth::Decrease
        } else {
            Truth::Increase
        }
    }
}

/// Loss table indexed by truth (rows: increase, decrease) and action
/// (columns: tight, mild, none).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 2]", into = "[[f64; 3]; 2]")]
pub struct LossMatrix {
    rows: [[f64; 3]; 2],
}

impl TryFrom<[[f64; 3]; 2]> for LossMatrix {
    type Error = Error;

    fn try_from(rows: [[f64; 3]; 2]) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<LossMatrix> for [[f64; 3]; 2] {
    fn from(m: LossMatrix) -> Self {
        m.rows
    }
}

/// Relative tolerance under which two expected losses count as tied.
const TIE_TOL: f64 = 1e-12;

impl LossMatrix {
    /// Requires `l(dec, none) <= l(dec, mild) <= l(inc, tight) <= l(dec, tight)
    /// <= l(inc, mild) <= l(inc, none)`.
    pub fn new(rows: [[f64; 3]; 2]) -> Result<Self> {
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::validation("loss entries must be finite"));
        }
        let [inc, dec] = rows;
        let chain = [dec[2], dec[1], inc[0], dec[0], inc[1], inc[2]];
        if chain.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::validation(format!(
                "loss matrix violates the required ordering: {chain:?} is not non-decreasing"
            )));
        }
        Ok(Self { rows })
    }

    /// Built-in three-level restriction losses: 0.3/0.6/1.0 on increase,
    /// 0.5/0.2/0.0 on decrease.
    pub fn restrictions() -> Self {
        Self {
            rows: [[0.3, 0.6, 1.0], [0.5, 0.2, 0.0]],
        }
    }

    pub fn rows(&self) -> [[f64; 3]; 2] {
        self.rows
    }

    pub fn loss(&self, truth: Truth, action: Action) -> f64 {
        let row = match truth {
            Truth::Increase => 0,
            Truth::Decrease => 1,
        };
        self.rows[row][action.index()]
    }

    pub fn expected_loss(&self, q_increase: f64, action: Action) -> f64 {
        q_increase * self.loss(Truth::Increase, action)
            + (1.0 - q_increase) * self.loss(Truth::Decrease, action)
    }

    /// Bayes action for probability of increase `q_increase`; near-ties go
    /// to the more restrictive action.
    pub fn bayes_choice(&self, q_increase: f64) -> Result<BayesChoice> {
        check_probability(q_increase)?;
        let losses = Action::ALL.map(|a| self.expected_loss(q_increase, a));
        let best = losses.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = TIE_TOL * best.abs().max(1.0);
        let within: Vec<usize> = (0..3).filter(|&i| losses[i] - best <= tol).collect();
        let action = Action::ALL[within[0]];
        Ok(BayesChoice {
            action,
            expected_loss: losses[within[0]],
            tied: within.len() > 1,
        })
    }

    pub fn bayes_action(&self, q_increase: f64) -> Result<Action> {
        self.bayes_choice(q_increase).map(|c| c.action)
    }

    /// Multiplies every entry by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::validation("scale factor must be positive"));
        }
        Self::new(self.rows.map(|r| r.map(|v| v * factor)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesChoice {
    pub action: Action,
    pub expected_loss: f64,
    /// More than one action attained the minimum.
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyResult {
    pub cumulative_loss: f64,
    /// Counts of tight, mild and none, in that order.
    pub action_counts: [usize; 3],
    pub actions: Vec<Action>,
}

impl PolicyResult {
    fn from_actions(records: &[ParityRecord], loss: &LossMatrix, actions: Vec<Action>) -> Self {
        let mut action_counts = [0usize; 3];
        let mut cumulative_loss = 0.0;
        for (r, &a) in records.iter().zip(&actions) {
            action_counts[a.index()] += 1;
            cumulative_loss += loss.loss(Truth::from_parity(r.outcome), a);
        }
        Self {
            cumulative_loss,
            action_counts,
            actions,
        }
    }
}

/// Acts on every record with the Bayes action for `q = 1 - p` and tallies the loss.
pub fn simulate_policy(
    records: &[ParityRecord],
    loss: &LossMatrix,
    source: ProbabilitySource,
) -> Result<PolicyResult> {
    if records.is_empty() {
        return Err(Error::validation("cannot simulate a policy on no records"));
    }
    let actions = records
        .iter()
        .map(|r| loss.bayes_action(1.0 - r.probability(source)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PolicyResult::from_actions(records, loss, actions))
}

/// Takes the same action on every record.
pub fn simulate_fixed(records: &[ParityRecord], loss: &LossMatrix, action: Action) -> Result<PolicyResult> {
    if records.is_empty() {
        return Err(Error::validation("cannot simulate a policy on no records"));
    }
    Ok(PolicyResult::from_actions(records, loss, vec![action; records.len()]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(p: f64, decrease: bool) -> ParityRecord {
        ParityRecord {
            t: 2,
            p_raw: p,
            p_cal: p,
            outcome: decrease,
        }
    }

    #[test]
    fn extremes() {
        let m = LossMatrix::restrictions();
        assert_eq!(m.bayes_action(0.0).unwrap(), Action::None);
        assert_eq!(m.bayes_action(1.0).unwrap(), Action::Tight);
        assert_eq!(m.bayes_action(0.4).unwrap(), Action::Mild);
        assert!(m.bayes_action(1.1).is_err());
    }

    #[test]
    fn thresholds_and_tie_breaks() {
        let m = LossMatrix::restrictions();
        let c = m.bayes_choice(1.0 / 3.0).unwrap();
        assert!(c.tied);
        assert_eq!(c.action, Action::Mild);
        let c = m.bayes_choice(0.5).unwrap();
        assert!(c.tied);
        assert_eq!(c.action, Action::Tight);
        assert_eq!(m.bayes_action(0.333).unwrap(), Action::None);
        assert_eq!(m.bayes_action(0.499).unwrap(), Action::Mild);
    }

    #[test]
    fn constant_half_is_a_tie_resolved_to_tight() {
        let recs = vec![rec(0.5, true), rec(0.5, false)];
        let res = simulate_policy(&recs, &LossMatrix::restrictions(), ProbabilitySource::Raw).unwrap();
        assert!(LossMatrix::restrictions().bayes_choice(0.5).unwrap().tied);
        assert_eq!(res.action_counts, [2, 0, 0]);
    }

    #[test]
    fn oracle_probabilities() {
        let recs = [rec(0.0, false), rec(1.0, true), rec(0.0, false)];
        let res = simulate_policy(&recs, &LossMatrix::restrictions(), ProbabilitySource::Raw).unwrap();
        assert_eq!(res.actions, vec![Action::Tight, Action::None, Action::Tight]);
        assert!((res.cumulative_loss - 0.6).abs() < 1e-12);
    }

    #[test]
    fn forced_none() {
        let recs = [rec(0.2, false), rec(0.9, true)];
        let res = simulate_fixed(&recs, &LossMatrix::restrictions(), Action::None).unwrap();
        assert_eq!(res.cumulative_loss, 1.0);
        assert_eq!(res.action_counts, [0, 0, 2]);
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(LossMatrix::new([[0.3, 0.6, 1.0], [0.5, 0.2, 0.0]]).is_ok());
        assert!(LossMatrix::new([[0.3, 0.6, 1.0], [0.5, 0.2, 0.25]]).is_err());
        assert!(LossMatrix::new([[0.3, 0.6, f64::NAN], [0.5, 0.2, 0.0]]).is_err());
    }

    #[test]
    fn empty_records() {
        assert!(simulate_policy(&[], &LossMatrix::restrictions(), ProbabilitySource::Raw).is_err());
    }

    #[test]
    fn serde_roundtrip_validates() {
        let json = serde_json::to_string(&LossMatrix::restrictions()).unwrap();
        assert_eq!(json, "[[0.3,0.6,1.0],[0.5,0.2,0.0]]");
        assert!(serde_json::from_str::<LossMatrix>("[[1,0,0],[0,0,0]]").is_err());
    }
}
