//! Mechanical verification of the two-facility competitive guarantee.
//!
//! Every inequality in the argument that the online algorithm is
//! 63-competitive is evaluated here with exact arithmetic on a concrete run,
//! so a single instance can certify (or refute) each step of the chain:
//!
//! 1. A *reference solution* `y` follows the optimal schedule at a distance:
//!    cluster each stage's agents by their nearest optimal facility, and put
//!    `y_k` on a median of facility `k`'s cluster. Its total service-plus-
//!    movement weight is at most `3×` the optimal cost.
//! 2. A potential `Φ(x) = 2·(|x₁−y₁| + |x₂−y₂|) + |x₁−x₂|` measures how far
//!    the online pair has drifted from `y`. Two per-stage inequalities bound
//!    the safe move and the placement against the potential drop, and one
//!    combined per-stage bound charges the whole paid stage cost to `21×`
//!    the reference weight plus the potential drop.
//! 3. Summing the combined bound telescopes the potential, giving
//!    `online ≤ 63·optimal + |x₁⁰−x₂⁰|`.
//!
//! Every check reports its exact left side, right side, and slack.

use crate::instance::{abs_diff, Instance, Schedule};
use crate::online::{one_median, one_median_cost, OnlineRun};
use crate::rational::{format_rational, rational_to_f64, Rational};
use num_traits::Zero;
use serde_json::{json, Value};

/// Which endpoint of a cluster's median interval the reference solution uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MedianRep {
    #[default]
    Lower,
    Upper,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("the competitive analysis covers exactly two facilities, got {facilities}")]
    RequiresTwoFacilities { facilities: usize },
    #[error("run has {got} stages but the instance has {want}")]
    StageCountMismatch { got: usize, want: usize },
}

/// The reference solution derived from an optimal schedule.
#[derive(Debug, Clone)]
pub struct YSolution {
    /// `y⁰`, equal to the initial facility positions.
    pub initial: (Rational, Rational),
    /// `y` at each stage, as an ordered `(left, right)` pair.
    pub positions: Vec<(Rational, Rational)>,
    /// Per stage, the agents clustered to each optimal facility
    /// (nearest wins, first facility on ties).
    pub clusters: Vec<(Vec<Rational>, Vec<Rational>)>,
    /// Per stage, the one-median service cost of each cluster.
    pub service: Vec<(Rational, Rational)>,
}

/// Split sorted agents between two facility positions: nearest facility
/// wins, the first one on ties.
fn nearest_clusters(
    agents: &[Rational],
    first: &Rational,
    second: &Rational,
) -> (Vec<Rational>, Vec<Rational>) {
    let mut to_first = Vec::new();
    let mut to_second = Vec::new();
    for a in agents {
        if abs_diff(a, first) <= abs_diff(a, second) {
            to_first.push(a.clone());
        } else {
            to_second.push(a.clone());
        }
    }
    (to_first, to_second)
}

fn representative(cluster: &[Rational], fallback: &Rational, rep: MedianRep) -> Rational {
    if cluster.is_empty() {
        return fallback.clone();
    }
    let (interval, _) = one_median(cluster);
    match rep {
        MedianRep::Lower => interval.low,
        MedianRep::Upper => interval.high,
    }
}

/// Build the reference solution that shadows an optimal schedule.
pub fn build_y(
    instance: &Instance,
    optimal: &Schedule,
    rep: MedianRep,
) -> Result<YSolution, AnalysisError> {
    if instance.facility_count() != 2 {
        return Err(AnalysisError::RequiresTwoFacilities {
            facilities: instance.facility_count(),
        });
    }
    if optimal.positions().len() != instance.stage_count() {
        return Err(AnalysisError::StageCountMismatch {
            got: optimal.positions().len(),
            want: instance.stage_count(),
        });
    }
    let initial = (
        instance.initial_positions()[0].clone(),
        instance.initial_positions()[1].clone(),
    );
    let mut positions = Vec::with_capacity(instance.stage_count());
    let mut clusters = Vec::with_capacity(instance.stage_count());
    let mut service = Vec::with_capacity(instance.stage_count());
    for t in 0..instance.stage_count() {
        let row = optimal.stage_positions(t);
        let (c1, c2) = nearest_clusters(instance.stage(t), &row[0], &row[1]);
        // The pair can come out crossed when a cluster is empty and its
        // facility fallback sits past the other median. The reference
        // solution is a left/right pair like every schedule, and the sorted
        // pairing also never increases its stage-to-stage movement, so order
        // it before pairing it with the (ordered) online positions.
        let mut pair = (
            representative(&c1, &row[0], rep),
            representative(&c2, &row[1], rep),
        );
        if pair.0 > pair.1 {
            std::mem::swap(&mut pair.0, &mut pair.1);
        }
        positions.push(pair);
        service.push((one_median_cost(&c1), one_median_cost(&c2)));
        clusters.push((c1, c2));
    }
    Ok(YSolution {
        initial,
        positions,
        clusters,
        service,
    })
}

/// `Φ(x) = 2·(|x₁−y₁| + |x₂−y₂|) + |x₁−x₂|`.
pub fn potential(x: &(Rational, Rational), y: &(Rational, Rational)) -> Rational {
    let drift = abs_diff(&x.0, &y.0) + abs_diff(&x.1, &y.1);
    Rational::from_integer(2.into()) * drift + abs_diff(&x.0, &x.1)
}

/// One verified inequality (or identity): `lhs ≤ rhs`, exactly.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub holds: bool,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl Check {
    fn le(name: &'static str, lhs: Rational, rhs: Rational) -> Self {
        let holds = lhs <= rhs;
        Self {
            name,
            holds,
            lhs,
            rhs,
        }
    }

    fn eq(name: &'static str, lhs: Rational, rhs: Rational) -> Self {
        let holds = lhs == rhs;
        Self {
            name,
            holds,
            lhs,
            rhs,
        }
    }

    /// `rhs − lhs`; nonnegative exactly when the check holds (for `≤` checks).
    pub fn slack(&self) -> Rational {
        &self.rhs - &self.lhs
    }

    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds,
            "lhs": format_rational(&self.lhs),
            "rhs": format_rational(&self.rhs),
            "slack": format_rational(&self.slack()),
            "slack_float": rational_to_f64(&self.slack()),
        })
    }
}

/// The three per-stage inequalities.
#[derive(Debug, Clone)]
pub struct StageChecks {
    /// Zero-based stage index.
    pub stage: usize,
    /// Safe-move cost against the reference movement and the potential drop.
    pub safe_move: Check,
    /// Placement service-plus-movement against `21×` the reference service.
    pub placement: Check,
    /// Whole paid stage cost against `21×` the reference weight plus the
    /// potential drop.
    pub stage_bound: Check,
}

/// All checks for one run against one optimal schedule.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    /// Reference weight is at most `3×` the optimal cost.
    pub cluster_service_bound: Check,
    pub stages: Vec<StageChecks>,
    /// The per-stage right sides really sum to the telescoped right side.
    pub telescoping_identity: Check,
    /// Online total against the telescoped bound `21·B + Φ⁰ − Φ^T`.
    pub telescoped_bound: Check,
    /// The telescoped bound itself stays below `63·optimal + |x₁⁰−x₂⁰|`.
    pub derived_competitive: Check,
    /// Online total against `63·optimal + |x₁⁰−x₂⁰|` directly.
    pub competitive: Check,
    pub online_total: Rational,
    pub optimal_total: Rational,
    /// `online / optimal`, absent when the optimal cost is zero.
    pub ratio: Option<Rational>,
}

impl InequalityReport {
    pub fn all_hold(&self) -> bool {
        self.cluster_service_bound.holds
            && self.telescoping_identity.holds
            && self.telescoped_bound.holds
            && self.derived_competitive.holds
            && self.competitive.holds
            && self
                .stages
                .iter()
                .all(|s| s.safe_move.holds && s.placement.holds && s.stage_bound.holds)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "cluster_service_bound": self.cluster_service_bound.to_json(),
            "stages": self
                .stages
                .iter()
                .map(|s| json!({
                    "stage": s.stage + 1,
                    "safe_move": s.safe_move.to_json(),
                    "placement": s.placement.to_json(),
                    "stage_bound": s.stage_bound.to_json(),
                }))
                .collect::<Vec<_>>(),
            "telescoping_identity": self.telescoping_identity.to_json(),
            "telescoped_bound": self.telescoped_bound.to_json(),
            "derived_competitive": self.derived_competitive.to_json(),
            "competitive": self.competitive.to_json(),
            "online_total": format_rational(&self.online_total),
            "optimal_total": format_rational(&self.optimal_total),
            "ratio": self.ratio.as_ref().map(format_rational),
            "ratio_float": self.ratio.as_ref().map(rational_to_f64),
            "all_hold": self.all_hold(),
        })
    }
}

/// Verify the full inequality chain with the default (lower) median choice.
pub fn check_inequalities(
    instance: &Instance,
    run: &OnlineRun,
    optimal: &Schedule,
) -> Result<InequalityReport, AnalysisError> {
    check_inequalities_with(instance, run, optimal, MedianRep::Lower)
}

/// Verify the full inequality chain for a chosen median endpoint.
pub fn check_inequalities_with(
    instance: &Instance,
    run: &OnlineRun,
    optimal: &Schedule,
    rep: MedianRep,
) -> Result<InequalityReport, AnalysisError> {
    let y = build_y(instance, optimal, rep)?;
    let stage_count = instance.stage_count();
    if run.traces.len() != stage_count {
        return Err(AnalysisError::StageCountMismatch {
            got: run.traces.len(),
            want: stage_count,
        });
    }

    let two = Rational::from_integer(2.into());
    let three = Rational::from_integer(3.into());
    let factor = Rational::from_integer(21.into());

    let online_total = run.schedule.total().clone();
    let optimal_total = optimal.total().clone();

    // Per-stage reference weight B_t and its sum.
    let reference_weight: Vec<Rational> = (0..stage_count)
        .map(|t| {
            let prev = if t == 0 { &y.initial } else { &y.positions[t - 1] };
            let cur = &y.positions[t];
            &y.service[t].0
                + &y.service[t].1
                + abs_diff(&cur.0, &prev.0)
                + abs_diff(&cur.1, &prev.1)
        })
        .collect();
    let total_weight: Rational = reference_weight.iter().sum();

    let cluster_service_bound = Check::le(
        "cluster-service-bound",
        total_weight.clone(),
        &three * &optimal_total,
    );

    let pair = |row: &[Rational]| (row[0].clone(), row[1].clone());
    let initial_pair = pair(instance.initial_positions());

    let mut stages = Vec::with_capacity(stage_count);
    let mut stage_rhs_sum = Rational::zero();
    for (t, trace) in run.traces.iter().enumerate() {
        let x_prev = if t == 0 {
            initial_pair.clone()
        } else {
            pair(run.schedule.stage_positions(t - 1))
        };
        let x_cur = &trace.positions;
        let z = &trace.z;
        let y_prev = if t == 0 { &y.initial } else { &y.positions[t - 1] };
        let y_cur = &y.positions[t];
        let y_move = abs_diff(&y_cur.0, &y_prev.0) + abs_diff(&y_cur.1, &y_prev.1);

        let safe_move = Check::le(
            "safe-move",
            abs_diff(&z.0, &x_prev.0) + abs_diff(&z.1, &x_prev.1),
            &two * &y_move - potential(z, y_cur) + potential(&x_prev, y_prev),
        );

        let (c1, c2) = nearest_clusters(&trace.agents, &x_cur.0, &x_cur.1);
        let placement = Check::le(
            "placement",
            one_median_cost(&c1)
                + one_median_cost(&c2)
                + abs_diff(&x_cur.0, &z.0)
                + abs_diff(&x_cur.1, &z.1),
            &factor * (&y.service[t].0 + &y.service[t].1) - potential(x_cur, y_cur)
                + potential(z, y_cur),
        );

        let stage_bound = Check::le(
            "stage-bound",
            &trace.moving + &trace.connection,
            &factor * &reference_weight[t] + potential(&x_prev, y_prev)
                - potential(x_cur, y_cur),
        );
        stage_rhs_sum += &stage_bound.rhs;

        stages.push(StageChecks {
            stage: t,
            safe_move,
            placement,
            stage_bound,
        });
    }

    let initial_gap = abs_diff(&initial_pair.0, &initial_pair.1);
    let final_pair = pair(run.schedule.stage_positions(stage_count - 1));
    let telescoped_rhs = &factor * &total_weight + potential(&initial_pair, &y.initial)
        - potential(&final_pair, &y.positions[stage_count - 1]);

    let telescoping_identity =
        Check::eq("telescoping-identity", stage_rhs_sum, telescoped_rhs.clone());
    let telescoped_bound = Check::le(
        "telescoped-bound",
        online_total.clone(),
        telescoped_rhs.clone(),
    );
    let competitive_rhs =
        Rational::from_integer(63.into()) * &optimal_total + &initial_gap;
    let derived_competitive =
        Check::le("derived-competitive", telescoped_rhs, competitive_rhs.clone());
    let competitive = Check::le("competitive", online_total.clone(), competitive_rhs);

    let ratio = if optimal_total.is_zero() {
        None
    } else {
        Some(&online_total / &optimal_total)
    };

    Ok(InequalityReport {
        cluster_service_bound,
        stages,
        telescoping_identity,
        telescoped_bound,
        derived_competitive,
        competitive,
        online_total,
        optimal_total,
        ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::online::run_online;
    use crate::oracle::dp_optimal;
    use crate::rational::rat;

    #[test]
    fn potential_of_matching_pair_is_the_gap() {
        let x = (rat(0), rat(10));
        assert_eq!(potential(&x, &x), rat(10));
    }

    #[test]
    fn potential_counts_drift_twice() {
        let x = (rat(1), rat(4));
        let y = (rat(0), rat(10));
        // 2·(1 + 6) + 3
        assert_eq!(potential(&x, &y), rat(17));
    }

    #[test]
    fn reference_solution_clusters_by_nearest_facility() {
        let instance =
            parse_instance(r#"{"x0": [0, 0], "stages": [[0, 4, 8]]}"#).unwrap();
        let optimal = Schedule::from_positions(&instance, vec![vec![rat(2), rat(8)]]).unwrap();
        let y = build_y(&instance, &optimal, MedianRep::Lower).unwrap();
        assert_eq!(y.clusters[0], (vec![rat(0), rat(4)], vec![rat(8)]));
        assert_eq!(y.positions[0], (rat(0), rat(8)));
        assert_eq!(y.service[0], (rat(4), rat(0)));
        let upper = build_y(&instance, &optimal, MedianRep::Upper).unwrap();
        assert_eq!(upper.positions[0], (rat(4), rat(8)));
    }

    #[test]
    fn empty_cluster_follows_its_facility() {
        let instance = parse_instance(r#"{"x0": [0, 9], "stages": [[5]]}"#).unwrap();
        let optimal = Schedule::from_positions(&instance, vec![vec![rat(5), rat(5)]]).unwrap();
        let y = build_y(&instance, &optimal, MedianRep::Lower).unwrap();
        // The lone agent ties between the coincident facilities; the first
        // wins and the second follows its own (empty-cluster) position.
        assert_eq!(y.clusters[0], (vec![rat(5)], vec![]));
        assert_eq!(y.positions[0], (rat(5), rat(5)));
    }

    #[test]
    fn crossed_reference_pair_is_reordered() {
        // Coincident facilities stay put; the lone agent ties to the first,
        // whose median (7) lands right of the second's empty-cluster
        // fallback (0). The pair must come out ordered or the potential
        // would pair the online positions against crossed references.
        let instance = parse_instance(r#"{"x0": [0, 0], "stages": [[7]]}"#).unwrap();
        let optimal = Schedule::from_positions(&instance, vec![vec![rat(0), rat(0)]]).unwrap();
        let y = build_y(&instance, &optimal, MedianRep::Lower).unwrap();
        assert_eq!(y.clusters[0], (vec![rat(7)], vec![]));
        assert_eq!(y.positions[0], (rat(0), rat(7)));
        let run = run_online(&instance).unwrap();
        let report = check_inequalities(&instance, &run, &dp_optimal(&instance).unwrap()).unwrap();
        assert!(report.all_hold(), "{}", report.to_json());
    }

    #[test]
    fn analysis_requires_two_facilities() {
        let instance = parse_instance(r#"{"x0": [0], "stages": [[1]]}"#).unwrap();
        let optimal = Schedule::from_positions(&instance, vec![vec![rat(1)]]).unwrap();
        assert_eq!(
            build_y(&instance, &optimal, MedianRep::Lower).unwrap_err(),
            AnalysisError::RequiresTwoFacilities { facilities: 1 }
        );
    }

    #[test]
    fn full_chain_holds_on_a_small_run() {
        let instance =
            parse_instance(r#"{"x0": [0, 1], "stages": [[5, 6], [0, 10]]}"#).unwrap();
        let run = run_online(&instance).unwrap();
        let optimal = dp_optimal(&instance).unwrap();
        let report = check_inequalities(&instance, &run, &optimal).unwrap();
        assert!(report.all_hold(), "{}", report.to_json());
        assert!(report.ratio.is_some());
        let json = report.to_json();
        assert_eq!(json["all_hold"], true);
        assert_eq!(json["stages"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn zero_cost_run_has_no_ratio() {
        let instance = parse_instance(r#"{"x0": [0, 10], "stages": [[0, 10]]}"#).unwrap();
        let run = run_online(&instance).unwrap();
        let optimal = dp_optimal(&instance).unwrap();
        let report = check_inequalities(&instance, &run, &optimal).unwrap();
        assert!(report.all_hold());
        assert_eq!(report.ratio, None);
        assert_eq!(report.to_json()["ratio"], Value::Null);
    }

    #[test]
    fn slack_is_rhs_minus_lhs() {
        let check = Check::le("sample", rat(3), rat(10));
        assert_eq!(check.slack(), rat(7));
        assert!(check.holds);
    }
}
