//! Independent exact optima, used to cross-check the relaxation pipeline.
//!
//! [`dp_optimal`] runs a stage-by-stage dynamic program over nondecreasing
//! facility tuples drawn from the path nodes; [`enumerate_optimal`] exhausts
//! all (arbitrary, not necessarily sorted) tuples at every stage. Both return
//! exact optimal schedules and break ties toward the lexicographically
//! smallest node-index trajectory. The restriction to sorted tuples never
//! loses optimality — facilities are interchangeable and un-crossing moves on
//! a line never cost extra — and the test suites verify that claim by
//! comparing both oracles on small instances.
//!
//! Internally coordinates are rescaled to integers (falling back to big
//! integers if they don't fit a machine word), so all comparisons are exact.

use crate::instance::{Instance, Schedule};
use crate::path::{build_path, PathModel};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

/// Default workload bound: the sorted-tuple state space `|nodes|^k` for the
/// dynamic program, the trajectory space `|nodes|^(k·t)` for enumeration.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle workload {required} exceeds budget {budget}; shrink the instance or raise the budget")]
    BudgetExceeded { required: u128, budget: u64 },
}

/// Exact optimum by dynamic programming over sorted node tuples.
pub fn dp_optimal(instance: &Instance) -> Result<Schedule, OracleError> {
    dp_optimal_with_budget(instance, DEFAULT_BUDGET)
}

pub fn dp_optimal_with_budget(
    instance: &Instance,
    budget: u64,
) -> Result<Schedule, OracleError> {
    let path = build_path(instance);
    let required = pow_saturating(path.node_count() as u128, instance.facility_count() as u32);
    if required > budget as u128 {
        return Err(OracleError::BudgetExceeded {
            required,
            budget,
        });
    }
    let trajectory = match scaled_coordinates(&path) {
        Ok(coords) => dp_run(&coords, &path, instance),
        Err(coords) => dp_run(&coords, &path, instance),
    };
    Ok(schedule_from_trajectory(instance, &path, &trajectory))
}

/// Exact optimum by exhausting every node tuple at every stage.
pub fn enumerate_optimal(instance: &Instance) -> Result<Schedule, OracleError> {
    enumerate_optimal_with_budget(instance, DEFAULT_BUDGET)
}

pub fn enumerate_optimal_with_budget(
    instance: &Instance,
    budget: u64,
) -> Result<Schedule, OracleError> {
    let path = build_path(instance);
    let exponent = (instance.facility_count() * instance.stage_count()) as u32;
    let required = pow_saturating(path.node_count() as u128, exponent);
    if required > budget as u128 {
        return Err(OracleError::BudgetExceeded {
            required,
            budget,
        });
    }
    let trajectory = match scaled_coordinates(&path) {
        Ok(coords) => enumerate_run(&coords, &path, instance),
        Err(coords) => enumerate_run(&coords, &path, instance),
    };
    Ok(schedule_from_trajectory(instance, &path, &trajectory))
}

fn pow_saturating(base: u128, exp: u32) -> u128 {
    let mut out: u128 = 1;
    for _ in 0..exp {
        out = out.saturating_mul(base);
    }
    out
}

/// Exact cost arithmetic the oracles run on: machine integers when the scaled
/// coordinates fit, big integers otherwise.
trait Cost: Clone + Ord {
    fn zero() -> Self;
    fn add_to(&mut self, other: &Self);
    fn abs_diff(a: &Self, b: &Self) -> Self;
}

impl Cost for i128 {
    fn zero() -> Self {
        0
    }
    fn add_to(&mut self, other: &Self) {
        *self += other;
    }
    fn abs_diff(a: &Self, b: &Self) -> Self {
        (a - b).abs()
    }
}

impl Cost for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn add_to(&mut self, other: &Self) {
        *self += other;
    }
    fn abs_diff(a: &Self, b: &Self) -> Self {
        (a - b).abs()
    }
}

/// Rescale node coordinates to exact integers (multiply by the least common
/// denominator). Returns machine integers when safely within range.
fn scaled_coordinates(path: &PathModel) -> Result<Vec<i128>, Vec<BigInt>> {
    let mut scale = BigInt::from(1);
    for node in path.nodes() {
        scale = scale.lcm(node.denom());
    }
    let scaled: Vec<BigInt> = path
        .nodes()
        .iter()
        .map(|node| node.numer() * (&scale / node.denom()))
        .collect();
    let limit = BigInt::from(1i128 << 62);
    if scaled.iter().all(|v| v.abs() < limit) {
        Ok(scaled
            .iter()
            .map(|v| v.to_i128().expect("bounded above"))
            .collect())
    } else {
        Err(scaled)
    }
}

/// All nondecreasing `k`-tuples over `0..v`, in lexicographic order.
fn sorted_tuples(v: usize, k: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut current = vec![0u16; k];
    'outer: loop {
        out.push(current.clone());
        let mut pos = k;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            if (current[pos] as usize) < v - 1 {
                let value = current[pos] + 1;
                for slot in &mut current[pos..] {
                    *slot = value;
                }
                continue 'outer;
            }
        }
    }
    out
}

fn connection_cost<T: Cost>(coords: &[T], tuple: &[u16], agents: &[usize]) -> T {
    let mut total = T::zero();
    for &agent in agents {
        let best = tuple
            .iter()
            .map(|&node| T::abs_diff(&coords[node as usize], &coords[agent]))
            .min()
            .expect("at least one facility");
        total.add_to(&best);
    }
    total
}

fn movement_cost<T: Cost>(coords: &[T], from: &[u16], to: &[u16]) -> T {
    let mut total = T::zero();
    for (a, b) in from.iter().zip(to) {
        total.add_to(&T::abs_diff(&coords[*a as usize], &coords[*b as usize]));
    }
    total
}

/// Backward dynamic program over sorted tuples; forward pass reconstructs the
/// lexicographically smallest optimal trajectory.
fn dp_run<T: Cost>(coords: &[T], path: &PathModel, instance: &Instance) -> Vec<Vec<u16>> {
    let stages = instance.stage_count();
    let k = instance.facility_count();
    let configs = sorted_tuples(path.node_count(), k);
    let init: Vec<u16> = path.init_nodes().iter().map(|&j| j as u16).collect();
    let init_idx = configs
        .binary_search(&init)
        .expect("initial positions are sorted nodes");

    // future[s][c]: minimal cost of stages s.. given the facilities at
    // configuration c beforehand.
    let mut future: Vec<Vec<T>> = Vec::with_capacity(stages + 1);
    future.push(vec![T::zero(); configs.len()]);
    for s in (0..stages).rev() {
        let next = &future[stages - 1 - s];
        let connection: Vec<T> = configs
            .iter()
            .map(|cfg| connection_cost(coords, cfg, path.agent_nodes(s)))
            .collect();
        // stay[c'] = conn[s][c'] + future[s+1][c'].
        let stay: Vec<T> = connection
            .iter()
            .zip(next)
            .map(|(conn, rest)| {
                let mut v = conn.clone();
                v.add_to(rest);
                v
            })
            .collect();
        let row: Vec<T> = configs
            .iter()
            .map(|cfg| {
                configs
                    .iter()
                    .zip(&stay)
                    .map(|(target, tail)| {
                        let mut cost = movement_cost(coords, cfg, target);
                        cost.add_to(tail);
                        cost
                    })
                    .min()
                    .expect("nonempty configuration space")
            })
            .collect();
        future.push(row);
    }
    future.reverse(); // future[s] now matches stage s, future[stages] is all-zero.

    let mut trajectory = Vec::with_capacity(stages);
    let mut current = init_idx;
    for s in 0..stages {
        let connection: Vec<T> = configs
            .iter()
            .map(|cfg| connection_cost(coords, cfg, path.agent_nodes(s)))
            .collect();
        let target_value = &future[s][current];
        let chosen = configs
            .iter()
            .enumerate()
            .position(|(idx, cfg)| {
                let mut cost = movement_cost(coords, &configs[current], cfg);
                cost.add_to(&connection[idx]);
                cost.add_to(&future[s + 1][idx]);
                cost == *target_value
            })
            .expect("an optimal successor exists");
        trajectory.push(configs[chosen].clone());
        current = chosen;
    }
    trajectory
}

/// Depth-first search over arbitrary tuples at every stage. Strict-improvement
/// updates with lexicographic iteration make the first optimum found the
/// lexicographically smallest one.
fn enumerate_run<T: Cost>(coords: &[T], path: &PathModel, instance: &Instance) -> Vec<Vec<u16>> {
    let stages = instance.stage_count();
    let k = instance.facility_count();
    let v = path.node_count();
    let init: Vec<u16> = path.init_nodes().iter().map(|&j| j as u16).collect();

    struct Search<'a, T: Cost> {
        coords: &'a [T],
        path: &'a PathModel,
        stages: usize,
        k: usize,
        v: usize,
        best: Option<(T, Vec<Vec<u16>>)>,
        current: Vec<Vec<u16>>,
    }

    impl<T: Cost> Search<'_, T> {
        fn descend(&mut self, s: usize, previous: &[u16], cost_so_far: T) {
            if s == self.stages {
                let better = match &self.best {
                    None => true,
                    Some((best_cost, _)) => cost_so_far < *best_cost,
                };
                if better {
                    self.best = Some((cost_so_far, self.current.clone()));
                }
                return;
            }
            let mut tuple = vec![0u16; self.k];
            loop {
                let mut cost = cost_so_far.clone();
                cost.add_to(&movement_cost(self.coords, previous, &tuple));
                cost.add_to(&connection_cost(
                    self.coords,
                    &tuple,
                    self.path.agent_nodes(s),
                ));
                let prune = matches!(&self.best, Some((best_cost, _)) if cost > *best_cost);
                if !prune {
                    self.current.push(tuple.clone());
                    self.descend(s + 1, &self.current[s].clone(), cost);
                    self.current.pop();
                }
                // Advance the odometer.
                let mut pos = self.k;
                loop {
                    if pos == 0 {
                        return;
                    }
                    pos -= 1;
                    if (tuple[pos] as usize) < self.v - 1 {
                        tuple[pos] += 1;
                        for slot in &mut tuple[pos + 1..] {
                            *slot = 0;
                        }
                        break;
                    }
                }
            }
        }
    }

    let mut search = Search {
        coords,
        path,
        stages,
        k,
        v,
        best: None,
        current: Vec::with_capacity(stages),
    };
    search.descend(0, &init, T::zero());
    search.best.expect("search space is nonempty").1
}

fn schedule_from_trajectory(
    instance: &Instance,
    path: &PathModel,
    trajectory: &[Vec<u16>],
) -> Schedule {
    let positions = trajectory
        .iter()
        .map(|tuple| {
            tuple
                .iter()
                .map(|&node| path.node(node as usize).clone())
                .collect()
        })
        .collect();
    Schedule::from_positions(instance, positions).expect("trajectory matches instance shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::parse_instance;
    use crate::rational::rat;

    #[test]
    fn single_facility_moves_when_cheaper() {
        // Staying costs 10 per stage; moving once costs 10 total.
        let instance = parse_instance(r#"{"x0": [0], "stages": [[10], [10]]}"#).unwrap();
        let schedule = dp_optimal(&instance).unwrap();
        assert_eq!(schedule.total(), rat(10));
        assert_eq!(schedule.positions()[0], vec![rat(10)]);
        assert_eq!(schedule.positions()[1], vec![rat(10)]);
    }

    #[test]
    fn single_facility_balances_move_and_connection() {
        let instance = parse_instance(r#"{"x0": [0], "stages": [[1, 3]]}"#).unwrap();
        let schedule = dp_optimal(&instance).unwrap();
        assert_eq!(schedule.total(), rat(3));
        assert_eq!(schedule.positions()[0], vec![rat(1)]);
    }

    #[test]
    fn ties_break_to_the_lexicographically_smallest_trajectory() {
        // Either facility can serve the agent at 5 for cost 5; moving the
        // left facility gives trajectory (5,10), moving the right gives
        // (0,5). Node indices (0,1) beat (1,2).
        let instance = parse_instance(r#"{"x0": [0, 10], "stages": [[5]]}"#).unwrap();
        let schedule = dp_optimal(&instance).unwrap();
        assert_eq!(schedule.total(), rat(5));
        assert_eq!(schedule.positions()[0], vec![rat(0), rat(5)]);
        let enumerated = enumerate_optimal(&instance).unwrap();
        assert_eq!(enumerated.total(), rat(5));
        assert_eq!(enumerated.positions()[0], vec![rat(0), rat(5)]);
    }

    #[test]
    fn enumeration_matches_dp_on_small_instances() {
        for text in [
            r#"{"x0": [0, 10], "stages": [[2, 8], [5]]}"#,
            r#"{"x0": [3], "stages": [[1], [9], [1]]}"#,
            r#"{"x0": [0, 4, 9], "stages": [[2, 7]]}"#,
            r#"{"x0": ["1/2", "5/2"], "stages": [["3/4", 2], [1]]}"#,
        ] {
            let instance = parse_instance(text).unwrap();
            let dp = dp_optimal(&instance).unwrap();
            let full = enumerate_optimal(&instance).unwrap();
            assert_eq!(dp.total(), full.total(), "{text}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let instance = parse_instance(r#"{"x0": [0], "stages": [[1, 3]]}"#).unwrap();
        let err = dp_optimal_with_budget(&instance, 2).unwrap_err();
        assert_eq!(
            err,
            OracleError::BudgetExceeded {
                required: 3,
                budget: 2
            }
        );
        let err = enumerate_optimal_with_budget(&instance, 2).unwrap_err();
        assert_eq!(
            err,
            OracleError::BudgetExceeded {
                required: 3,
                budget: 2
            }
        );
    }

    #[test]
    fn huge_coordinates_fall_back_to_big_integers() {
        let instance = parse_instance(
            r#"{"x0": ["10000000000000000000000000"], "stages": [["10000000000000000000000001/3"]]}"#,
        )
        .unwrap();
        let schedule = dp_optimal(&instance).unwrap();
        // Moving to the agent and staying put tie; the agent's node has the
        // smaller index, so the tie breaks toward moving.
        assert!(schedule.total() > rat(0));
        assert_eq!(schedule.positions()[0], vec![instance.stage(0)[0].clone()]);
        let full = enumerate_optimal(&instance).unwrap();
        assert_eq!(schedule.total(), full.total());
    }
}
