//! Lossless rounding of an optimal fractional solution to an integral schedule.
//!
//! Two rules, both placing the `m`-th facility (facilities ordered by initial
//! position) on a single node per stage:
//!
//! - **prefix**: walk the node-capacity profile `c(j,t)` left to right and
//!   place facility `m` on the first node where the running mass exceeds
//!   `m - 1`. Chosen indices are nondecreasing in `m` by construction.
//! - **leftmost-positive**: place facility `m` on the leftmost node carrying
//!   any of its own placement mass `f(m,j,t) > 0`. The relaxation may permute
//!   facility identities (two facilities starting at the same point can swap
//!   roles for free), so these choices need not be nondecreasing in `m`; the
//!   cost is unaffected.
//!
//! Applied to an optimal basic solution of the relaxation, either rule yields
//! a schedule whose exact cost equals the relaxation optimum; the test suites
//! verify that equality instance by instance.

use crate::instance::{Instance, Schedule};
use crate::lp::{FractionalSolution, LpModel};
use crate::path::PathModel;
use crate::rational::{format_rational, rational_to_f64, Rational};
use num_traits::Zero;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundingRule {
    Prefix,
    LeftmostPositive,
}

impl RoundingRule {
    pub fn name(self) -> &'static str {
        match self {
            RoundingRule::Prefix => "prefix",
            RoundingRule::LeftmostPositive => "leftmost-positive",
        }
    }
}

/// Where one facility landed in one stage, with the capacity prefix sums at
/// the decision point: `prefix_below = Σ_{ℓ<j} c(ℓ,t)` and
/// `prefix_at = Σ_{ℓ≤j} c(ℓ,t)` for the chosen node `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacilityChoice {
    pub node: usize,
    pub prefix_below: Rational,
    pub prefix_at: Rational,
}

#[derive(Debug, Clone)]
pub struct RoundingTrace {
    pub rule: RoundingRule,
    /// `"index:coordinate"` node labels, 1-based.
    pub node_labels: Vec<String>,
    /// `stages[t][m]`: choice for facility `m` at stage `t`.
    pub stages: Vec<Vec<FacilityChoice>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RoundingError {
    #[error("stage {stage}: node capacities sum below the facility count")]
    CapacityDeficit { stage: usize },
    #[error("stage {stage}: facility {facility} carries no placement mass")]
    ZeroMassFacility { stage: usize, facility: usize },
}

impl RoundingTrace {
    pub fn to_json(&self, path: &PathModel) -> Value {
        json!({
            "rule": self.rule.name(),
            "nodes": self.node_labels,
            "stages": self
                .stages
                .iter()
                .enumerate()
                .map(|(t, stage)| {
                    stage
                        .iter()
                        .enumerate()
                        .map(|(m, choice)| {
                            json!({
                                "stage": t + 1,
                                "facility": m + 1,
                                "node": choice.node + 1,
                                "coordinate": format_rational(path.node(choice.node)),
                                "prefix_below": format_rational(&choice.prefix_below),
                                "prefix_at": format_rational(&choice.prefix_at),
                                "prefix_below_float": rational_to_f64(&choice.prefix_below),
                                "prefix_at_float": rational_to_f64(&choice.prefix_at),
                            })
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>(),
        })
    }
}

/// Prefix choices for one stage's capacity profile: facility `m` goes to the
/// first node where the running mass exceeds `m - 1`.
fn prefix_choices(
    capacity: &[Rational],
    facilities: usize,
    stage: usize,
) -> Result<Vec<FacilityChoice>, RoundingError> {
    let mut choices = Vec::with_capacity(facilities);
    let mut below = Rational::zero();
    let mut at = Rational::zero();
    let mut j = 0usize;
    let mut started = false;
    for m in 0..facilities {
        let threshold = Rational::from_integer(m.into());
        // Advance until Σ_{ℓ≤j} exceeds m; thresholds grow with m, so `j`
        // never moves backwards.
        while !started || at <= threshold {
            let next = if started { j + 1 } else { 0 };
            if next >= capacity.len() {
                return Err(RoundingError::CapacityDeficit { stage });
            }
            j = next;
            started = true;
            below = at.clone();
            at += &capacity[j];
        }
        choices.push(FacilityChoice {
            node: j,
            prefix_below: below.clone(),
            prefix_at: at.clone(),
        });
    }
    Ok(choices)
}

fn schedule_from_choices(
    instance: &Instance,
    path: &PathModel,
    rule: RoundingRule,
    stages: Vec<Vec<FacilityChoice>>,
) -> (Schedule, RoundingTrace) {
    let positions = stages
        .iter()
        .map(|stage| {
            stage
                .iter()
                .map(|choice| path.node(choice.node).clone())
                .collect()
        })
        .collect();
    let schedule =
        Schedule::from_positions(instance, positions).expect("rounded positions match shape");
    let trace = RoundingTrace {
        rule,
        node_labels: path.node_labels(),
        stages,
    };
    (schedule, trace)
}

/// Round by capacity prefix sums.
pub fn round_prefix(
    instance: &Instance,
    path: &PathModel,
    solution: &FractionalSolution,
) -> Result<(Schedule, RoundingTrace), RoundingError> {
    let facilities = instance.facility_count();
    let mut stages = Vec::with_capacity(instance.stage_count());
    for (t, capacity) in solution.capacity().iter().enumerate() {
        stages.push(prefix_choices(capacity, facilities, t)?);
    }
    Ok(schedule_from_choices(
        instance,
        path,
        RoundingRule::Prefix,
        stages,
    ))
}

/// Round by each facility's leftmost positive placement mass.
pub fn round_leftmost(
    instance: &Instance,
    path: &PathModel,
    model: &LpModel,
    solution: &FractionalSolution,
) -> Result<(Schedule, RoundingTrace), RoundingError> {
    let facilities = instance.facility_count();
    let nodes = path.node_count();
    let mut stages = Vec::with_capacity(instance.stage_count());
    for t in 0..instance.stage_count() {
        let capacity = &solution.capacity()[t];
        let mut stage = Vec::with_capacity(facilities);
        for m in 0..facilities {
            let node = (0..nodes)
                .find(|&j| solution.placement(model, t, m, j) > &Rational::zero())
                .ok_or(RoundingError::ZeroMassFacility {
                    stage: t,
                    facility: m,
                })?;
            // Record the capacity prefix sums at the chosen node.
            let below: Rational = capacity[..node].iter().sum();
            let at = &below + &capacity[node];
            stage.push(FacilityChoice {
                node,
                prefix_below: below,
                prefix_at: at,
            });
        }
        stages.push(stage);
    }
    Ok(schedule_from_choices(
        instance,
        path,
        RoundingRule::LeftmostPositive,
        stages,
    ))
}
