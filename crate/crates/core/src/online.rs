//! Online algorithm for two facilities.
//!
//! Each stage reacts to the new agent multiset in two steps. Step 1 makes the
//! *safe move*: if both facilities sit strictly to one side of all agents,
//! the near one snaps to the closest agent; if they straddle the whole agent
//! range, both advance toward it by the smaller gap. Afterwards at least one
//! facility lies inside `[first agent, last agent]`. Step 2 places for
//! service: if one facility is inside the range while the other is at least
//! `3·H(C)` outside of it (`H(C)` is the optimal one-facility connection
//! cost), the inside facility takes the cluster median and the outside one
//! walks `3·H(C)` closer — it pays little and stays available for agents who
//! may return to its side. Otherwise both facilities commit: the cluster is
//! split by the cheapest contiguous two-median partition and each facility
//! takes its part's median. Exact arithmetic throughout; every stage emits a
//! trace of what fired and why.

use crate::instance::{abs_diff, Instance, Schedule};
use crate::rational::{format_rational, rational_to_f64, Rational};
use num_traits::Zero;
use serde_json::{json, Value};

/// Inclusive interval of one-facility optima (degenerate when `low == high`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MedianInterval {
    pub low: Rational,
    pub high: Rational,
}

/// Optimal single-facility placements for a sorted, nonempty cluster: the
/// median interval and the connection cost `H` attained on it (`H(∅) = 0` is
/// the caller's convention; this function requires a nonempty cluster).
pub fn one_median(cluster: &[Rational]) -> (MedianInterval, Rational) {
    assert!(!cluster.is_empty(), "one_median requires a nonempty cluster");
    let n = cluster.len();
    let interval = MedianInterval {
        low: cluster[(n - 1) / 2].clone(),
        high: cluster[n / 2].clone(),
    };
    let cost = cluster.iter().map(|a| abs_diff(a, &interval.low)).sum();
    (interval, cost)
}

/// The canonical single placement point: the lower median.
pub fn median_representative(cluster: &[Rational]) -> Rational {
    one_median(cluster).0.low
}

/// Connection cost of serving the whole sorted cluster from one point.
pub fn one_median_cost(cluster: &[Rational]) -> Rational {
    if cluster.is_empty() {
        Rational::zero()
    } else {
        one_median(cluster).1
    }
}

/// Best contiguous split of a sorted cluster into a prefix and a suffix,
/// minimizing the two parts' single-facility costs. Returns the split index
/// `s` (prefix is `&cluster[..s]`, suffix `&cluster[s..]`) and the cost.
/// Ties prefer both parts nonempty, then the shortest prefix. A contiguous
/// split is always globally optimal among all two-part assignments; the test
/// suite checks that against full enumeration.
pub fn best_partition(cluster: &[Rational]) -> (usize, Rational) {
    let n = cluster.len();
    let mut best_split = 0usize;
    let mut best_cost: Option<Rational> = None;
    for s in 0..=n {
        let cost = one_median_cost(&cluster[..s]) + one_median_cost(&cluster[s..]);
        let better = match &best_cost {
            None => true,
            Some(current) => {
                cost < *current
                    || (cost == *current
                        && both_nonempty(s, n)
                        && !both_nonempty(best_split, n))
            }
        };
        if better {
            best_split = s;
            best_cost = Some(cost);
        }
    }
    (best_split, best_cost.expect("at least the empty split"))
}

fn both_nonempty(split: usize, n: usize) -> bool {
    split > 0 && split < n
}

/// Which safe-move case fired in Step 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafeMoveCase {
    None,
    LeftOfAgents,
    RightOfAgents,
    Straddle,
}

impl SafeMoveCase {
    pub fn name(self) -> &'static str {
        match self {
            SafeMoveCase::None => "none",
            SafeMoveCase::LeftOfAgents => "left-of-agents",
            SafeMoveCase::RightOfAgents => "right-of-agents",
            SafeMoveCase::Straddle => "straddle",
        }
    }
}

/// Which placement branch fired in Step 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementBranch {
    /// Facility 1 takes the cluster median; facility 2 approaches from the right.
    MedianLeft,
    /// Facility 2 takes the cluster median; facility 1 approaches from the left.
    MedianRight,
    /// Both facilities serve the best contiguous partition.
    Partition,
}

impl PlacementBranch {
    pub fn name(self) -> &'static str {
        match self {
            PlacementBranch::MedianLeft => "median-left",
            PlacementBranch::MedianRight => "median-right",
            PlacementBranch::Partition => "partition",
        }
    }
}

/// Everything one stage did, in exact numbers.
#[derive(Debug, Clone)]
pub struct StageTrace {
    /// Zero-based stage index (rendered 1-based externally).
    pub stage: usize,
    pub agents: Vec<Rational>,
    /// Positions after the Step 1 safe move.
    pub z: (Rational, Rational),
    pub step1: SafeMoveCase,
    pub step2: PlacementBranch,
    /// `H(C)` of the stage's whole cluster.
    pub h: Rational,
    pub median_interval: MedianInterval,
    /// The chosen partition when the partition branch fired.
    pub partition: Option<(Vec<Rational>, Vec<Rational>)>,
    /// Positions at the end of the stage.
    pub positions: (Rational, Rational),
    /// Step 1 plus Step 2 displacement. The two steps never reverse
    /// direction, so this equals the schedule's stage moving cost.
    pub moving: Rational,
    pub connection: Rational,
}

impl StageTrace {
    pub fn to_json(&self) -> Value {
        let rationals = |v: &[Rational]| -> Vec<String> {
            v.iter().map(format_rational).collect()
        };
        json!({
            "stage": self.stage + 1,
            "agents": rationals(&self.agents),
            "z": [format_rational(&self.z.0), format_rational(&self.z.1)],
            "step1": self.step1.name(),
            "step2": self.step2.name(),
            "h": format_rational(&self.h),
            "median_interval": [
                format_rational(&self.median_interval.low),
                format_rational(&self.median_interval.high),
            ],
            "partition": self
                .partition
                .as_ref()
                .map(|(o1, o2)| json!([rationals(o1), rationals(o2)])),
            "positions": [
                format_rational(&self.positions.0),
                format_rational(&self.positions.1),
            ],
            "moving": format_rational(&self.moving),
            "connection": format_rational(&self.connection),
            "moving_float": rational_to_f64(&self.moving),
            "connection_float": rational_to_f64(&self.connection),
        })
    }
}

/// CSV summary of a trace sequence: one row per stage.
pub fn traces_to_csv(traces: &[StageTrace]) -> String {
    let mut out = String::from("stage,branch,h,moving,connection\n");
    for trace in traces {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            trace.stage + 1,
            trace.step2.name(),
            format_rational(&trace.h),
            format_rational(&trace.moving),
            format_rational(&trace.connection),
        ));
    }
    out
}

/// Current facility pair, kept ordered (`first ≤ second`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnlineState {
    positions: (Rational, Rational),
}

impl OnlineState {
    pub fn new(first: Rational, second: Rational) -> Self {
        if first <= second {
            Self {
                positions: (first, second),
            }
        } else {
            Self {
                positions: (second, first),
            }
        }
    }

    pub fn positions(&self) -> &(Rational, Rational) {
        &self.positions
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OnlineError {
    #[error("the online algorithm serves exactly two facilities, got {facilities}")]
    RequiresTwoFacilities { facilities: usize },
}

/// Serve one stage: safe move, then placement. `agents` must be sorted and
/// nonempty; `stage` is the zero-based stage index recorded in the trace.
pub fn online_step(
    state: &OnlineState,
    agents: &[Rational],
    stage: usize,
) -> (OnlineState, StageTrace) {
    assert!(!agents.is_empty(), "online_step requires a nonempty stage");
    let first_agent = &agents[0];
    let last_agent = &agents[agents.len() - 1];
    let (prev1, prev2) = state.positions.clone();

    // Step 1: the safe move.
    let mut z1 = prev1.clone();
    let mut z2 = prev2.clone();
    let step1 = if z1 > *last_agent {
        z1 = last_agent.clone();
        SafeMoveCase::RightOfAgents
    } else if z2 < *first_agent {
        z2 = first_agent.clone();
        SafeMoveCase::LeftOfAgents
    } else if z1 < *first_agent && z2 > *last_agent {
        let delta = std::cmp::min(first_agent - &z1, &z2 - last_agent);
        z1 += &delta;
        z2 -= &delta;
        SafeMoveCase::Straddle
    } else {
        SafeMoveCase::None
    };
    debug_assert!(
        (&z1 >= first_agent && &z1 <= last_agent) || (&z2 >= first_agent && &z2 <= last_agent),
        "safe move leaves a facility inside the agent range"
    );

    // Step 2: placement.
    let (median_interval, h) = one_median(agents);
    let triple_h = Rational::from_integer(3.into()) * &h;
    let representative = median_interval.low.clone();
    let (x1, x2, step2, partition) =
        if &z1 >= first_agent && &z1 <= last_agent && &z2 - last_agent >= triple_h {
            (
                representative,
                z2.clone() - &triple_h,
                PlacementBranch::MedianLeft,
                None,
            )
        } else if &z2 >= first_agent && &z2 <= last_agent && first_agent - &z1 >= triple_h {
            (
                z1.clone() + &triple_h,
                representative,
                PlacementBranch::MedianRight,
                None,
            )
        } else {
            let (split, _) = best_partition(agents);
            let (left, right) = agents.split_at(split);
            let x1 = if left.is_empty() {
                z1.clone()
            } else {
                median_representative(left)
            };
            let x2 = if right.is_empty() {
                z2.clone()
            } else {
                median_representative(right)
            };
            (
                x1,
                x2,
                PlacementBranch::Partition,
                Some((left.to_vec(), right.to_vec())),
            )
        };
    debug_assert!(x1 <= x2, "placement preserves facility order");

    let moving = abs_diff(&z1, &prev1)
        + abs_diff(&z2, &prev2)
        + abs_diff(&x1, &z1)
        + abs_diff(&x2, &z2);
    let connection = agents
        .iter()
        .map(|a| std::cmp::min(abs_diff(&x1, a), abs_diff(&x2, a)))
        .sum();

    let trace = StageTrace {
        stage,
        agents: agents.to_vec(),
        z: (z1, z2),
        step1,
        step2,
        h,
        median_interval,
        partition,
        positions: (x1.clone(), x2.clone()),
        moving,
        connection,
    };
    (OnlineState::new(x1, x2), trace)
}

/// A full online run: the schedule it produced and the per-stage traces.
#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub schedule: Schedule,
    pub traces: Vec<StageTrace>,
}

/// Run the online algorithm over all stages of a two-facility instance.
pub fn run_online(instance: &Instance) -> Result<OnlineRun, OnlineError> {
    if instance.facility_count() != 2 {
        return Err(OnlineError::RequiresTwoFacilities {
            facilities: instance.facility_count(),
        });
    }
    let mut state = OnlineState::new(
        instance.initial_positions()[0].clone(),
        instance.initial_positions()[1].clone(),
    );
    let mut traces = Vec::with_capacity(instance.stage_count());
    let mut positions = Vec::with_capacity(instance.stage_count());
    for t in 0..instance.stage_count() {
        let (next, trace) = online_step(&state, instance.stage(t), t);
        positions.push(vec![trace.positions.0.clone(), trace.positions.1.clone()]);
        traces.push(trace);
        state = next;
    }
    let schedule =
        Schedule::from_positions(instance, positions).expect("online positions match shape");
    Ok(OnlineRun { schedule, traces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::rational::{rat, ratio};

    fn rats(values: &[i64]) -> Vec<Rational> {
        values.iter().copied().map(rat).collect()
    }

    #[test]
    fn median_of_odd_cluster_is_a_point() {
        let (interval, cost) = one_median(&rats(&[1, 2, 3]));
        assert_eq!(interval.low, rat(2));
        assert_eq!(interval.high, rat(2));
        assert_eq!(cost, rat(2));
    }

    #[test]
    fn median_of_even_cluster_is_an_interval() {
        let (interval, cost) = one_median(&rats(&[0, 4]));
        assert_eq!(interval.low, rat(0));
        assert_eq!(interval.high, rat(4));
        assert_eq!(cost, rat(4));
        // The cost is attained anywhere inside the interval.
        let probe: Rational = rats(&[0, 4]).iter().map(|a| abs_diff(a, &rat(2))).sum();
        assert_eq!(probe, cost);
    }

    #[test]
    fn median_cost_is_the_scan_minimum() {
        let cluster = rats(&[0, 1, 5, 9, 14]);
        let (_, h) = one_median(&cluster);
        let scan = cluster
            .iter()
            .map(|p| cluster.iter().map(|a| abs_diff(a, p)).sum::<Rational>())
            .min()
            .unwrap();
        assert_eq!(h, scan);
    }

    #[test]
    fn partition_splits_two_tight_groups() {
        let (split, cost) = best_partition(&rats(&[0, 1, 10, 11]));
        assert_eq!(split, 2);
        assert_eq!(cost, rat(2));
    }

    #[test]
    fn partition_tie_breaks_prefer_nonempty_then_short_prefix() {
        // A single agent: no both-nonempty split exists; the shortest prefix
        // (the empty one) wins among the zero-cost splits.
        let (split, cost) = best_partition(&rats(&[7]));
        assert_eq!((split, cost), (0, rat(0)));
        // Two agents at one point: all splits cost zero; the both-nonempty
        // split at 1 beats the empty-prefix split.
        let (split, cost) = best_partition(&rats(&[4, 4]));
        assert_eq!((split, cost), (1, rat(0)));
    }

    #[test]
    fn safe_move_from_the_left_then_median_right() {
        // Facilities (0,1), agents [5,6]: the right facility snaps to 5, the
        // far-left facility advances 3·H = 3 while facility 2 takes the median.
        let state = OnlineState::new(rat(0), rat(1));
        let (next, trace) = online_step(&state, &rats(&[5, 6]), 0);
        assert_eq!(trace.step1, SafeMoveCase::LeftOfAgents);
        assert_eq!(trace.z, (rat(0), rat(5)));
        assert_eq!(trace.step2, PlacementBranch::MedianRight);
        assert_eq!(trace.h, rat(1));
        assert_eq!(*next.positions(), (rat(3), rat(5)));
        assert_eq!(trace.moving, rat(7));
        assert_eq!(trace.connection, rat(1));
    }

    #[test]
    fn straddle_then_partition() {
        // Facilities (2,9), agents [4,5]: both advance by min(2,4) = 2, then
        // the partition ({4},{5}) places them exactly.
        let state = OnlineState::new(rat(2), rat(9));
        let (next, trace) = online_step(&state, &rats(&[4, 5]), 0);
        assert_eq!(trace.step1, SafeMoveCase::Straddle);
        assert_eq!(trace.z, (rat(4), rat(7)));
        assert_eq!(trace.step2, PlacementBranch::Partition);
        assert_eq!(*next.positions(), (rat(4), rat(5)));
        assert_eq!(
            trace.partition,
            Some((rats(&[4]), rats(&[5])))
        );
    }

    #[test]
    fn covering_positions_cost_nothing() {
        // Facilities (0,10), agents [0,10]: H = 10, neither one-sided branch
        // fires (0 ≥ 30 fails), the partition is free.
        let state = OnlineState::new(rat(0), rat(10));
        let (next, trace) = online_step(&state, &rats(&[0, 10]), 0);
        assert_eq!(trace.step1, SafeMoveCase::None);
        assert_eq!(trace.step2, PlacementBranch::Partition);
        assert_eq!(*next.positions(), (rat(0), rat(10)));
        assert_eq!(trace.moving, rat(0));
        assert_eq!(trace.connection, rat(0));
    }

    #[test]
    fn right_of_agents_snaps_the_left_facility() {
        let state = OnlineState::new(rat(8), rat(9));
        let (_, trace) = online_step(&state, &rats(&[1, 2]), 0);
        assert_eq!(trace.step1, SafeMoveCase::RightOfAgents);
        assert_eq!(trace.z, (rat(2), rat(9)));
    }

    #[test]
    fn median_left_walks_the_far_facility_in() {
        // Facility 1 inside, facility 2 far right: z2 - last = 30 ≥ 3H = 6.
        let state = OnlineState::new(rat(4), rat(40));
        let (next, trace) = online_step(&state, &rats(&[3, 5, 10]), 0);
        assert_eq!(trace.step1, SafeMoveCase::None);
        assert_eq!(trace.step2, PlacementBranch::MedianLeft);
        assert_eq!(trace.h, rat(7));
        assert_eq!(*next.positions(), (rat(5), rat(19)));
    }

    #[test]
    fn fractional_positions_stay_exact() {
        let state = OnlineState::new(ratio(1, 2), ratio(7, 2));
        let (_, trace) = online_step(&state, &[ratio(3, 4), ratio(5, 4)], 0);
        assert_eq!(trace.h, ratio(1, 2));
        // Step 1 walks both facilities in by 1/4, to z = (3/4, 13/4). Then
        // z2 - 5/4 = 2 ≥ 3H = 3/2, so the left-median branch fires: the left
        // facility sits on the median and the right one walks in by 3H.
        assert_eq!(trace.step2, PlacementBranch::MedianLeft);
        assert_eq!(trace.positions, (ratio(3, 4), ratio(7, 4)));
    }

    #[test]
    fn run_requires_two_facilities() {
        let instance = parse_instance(r#"{"x0": [0], "stages": [[1]]}"#).unwrap();
        assert_eq!(
            run_online(&instance).unwrap_err(),
            OnlineError::RequiresTwoFacilities { facilities: 1 }
        );
    }

    #[test]
    fn run_collects_traces_and_matches_schedule_costs() {
        let instance =
            parse_instance(r#"{"x0": [0, 1], "stages": [[5, 6], [0, 10]]}"#).unwrap();
        let run = run_online(&instance).unwrap();
        assert_eq!(run.traces.len(), 2);
        for (t, trace) in run.traces.iter().enumerate() {
            assert_eq!(trace.moving, run.schedule.moving_costs()[t]);
            assert_eq!(trace.connection, run.schedule.connection_costs()[t]);
            let (x1, x2) = &trace.positions;
            assert!(x1 <= x2);
        }
    }

    #[test]
    fn csv_summary_lists_each_stage() {
        let instance = parse_instance(r#"{"x0": [0, 1], "stages": [[5, 6]]}"#).unwrap();
        let run = run_online(&instance).unwrap();
        let csv = traces_to_csv(&run.traces);
        assert_eq!(
            csv,
            "stage,branch,h,moving,connection\n1,median-right,1,7,1\n"
        );
    }

    #[test]
    fn trace_json_is_complete() {
        let instance = parse_instance(r#"{"x0": [0, 1], "stages": [[5, 6]]}"#).unwrap();
        let run = run_online(&instance).unwrap();
        let doc = run.traces[0].to_json();
        assert_eq!(doc["stage"], 1);
        assert_eq!(doc["step1"], "left-of-agents");
        assert_eq!(doc["step2"], "median-right");
        assert_eq!(doc["z"], serde_json::json!(["0", "5"]));
        assert_eq!(doc["positions"], serde_json::json!(["3", "5"]));
        assert_eq!(doc["partition"], serde_json::Value::Null);
    }
}
