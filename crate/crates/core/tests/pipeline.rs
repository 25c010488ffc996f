//! End-to-end agreement between the relaxation pipeline, the oracles, and
//! the online algorithm, over small seeded suites.

use kfr_core::analysis::check_inequalities;
use kfr_core::generate::{generate, GenModel, GenSpec};
use kfr_core::instance::Schedule;
use kfr_core::lp::{build_model, solve_lp};
use kfr_core::online::run_online;
use kfr_core::oracle::{dp_optimal, enumerate_optimal};
use kfr_core::path::build_path;
use kfr_core::rounding::{round_leftmost, round_prefix};

const MODELS: [GenModel; 4] = [
    GenModel::Uniform,
    GenModel::RandomWalk,
    GenModel::Clustered,
    GenModel::AlternatingAdversary,
];

fn small_spec(seed: u64) -> GenSpec {
    GenSpec {
        model: MODELS[(seed % 4) as usize],
        agents: 1 + (seed as usize % 4),
        stages: 1 + (seed as usize % 3),
        facilities: 1 + (seed as usize / 4 % 2),
        low: 0,
        high: 12,
        spread: 2,
        // A third of the suite runs on a fractional grid.
        denominator: if seed % 3 == 0 { 3 } else { 1 },
        seed,
    }
}

#[test]
fn relaxation_rounding_and_dp_agree() {
    for seed in 0..24 {
        let instance = generate(&small_spec(seed)).unwrap();
        let path = build_path(&instance);
        let model = build_model(&path, &instance);
        let solution = solve_lp(&model).unwrap();
        let (prefix, _) = round_prefix(&instance, &path, &solution).unwrap();
        let (leftmost, _) = round_leftmost(&instance, &path, &model, &solution).unwrap();
        let dp = dp_optimal(&instance).unwrap();
        assert_eq!(*solution.objective(), prefix.total(), "seed {seed}");
        assert_eq!(prefix.total(), leftmost.total(), "seed {seed}");
        assert_eq!(prefix.total(), dp.total(), "seed {seed}");
    }
}

#[test]
fn enumeration_confirms_dp_on_tiny_instances() {
    for seed in 0..12 {
        let spec = GenSpec {
            model: MODELS[(seed % 4) as usize],
            agents: 2,
            stages: 2,
            facilities: 2,
            low: 0,
            high: 6,
            spread: 2,
            denominator: 1,
            seed: 100 + seed,
        };
        let instance = generate(&spec).unwrap();
        let dp = dp_optimal(&instance).unwrap();
        let enumerated = enumerate_optimal(&instance).unwrap();
        assert_eq!(dp.total(), enumerated.total(), "seed {}", spec.seed);
        // Both tie-break to the lexicographically smallest node trajectory.
        assert_eq!(dp.positions(), enumerated.positions(), "seed {}", spec.seed);
    }
}

#[test]
fn relaxation_value_lower_bounds_feasible_schedules() {
    for seed in 0..10 {
        let instance = generate(&small_spec(seed)).unwrap();
        let path = build_path(&instance);
        let model = build_model(&path, &instance);
        let solution = solve_lp(&model).unwrap();

        // The do-nothing schedule: every facility stays home.
        let stay: Vec<Vec<_>> = (0..instance.stage_count())
            .map(|_| instance.initial_positions().to_vec())
            .collect();
        let stay = Schedule::from_positions(&instance, stay).unwrap();
        assert!(*solution.objective() <= stay.total(), "seed {seed}");

        // The chase schedule: every facility sits on the stage's first agent.
        let chase: Vec<Vec<_>> = (0..instance.stage_count())
            .map(|t| vec![instance.stage(t)[0].clone(); instance.facility_count()])
            .collect();
        let chase = Schedule::from_positions(&instance, chase).unwrap();
        assert!(*solution.objective() <= chase.total(), "seed {seed}");
    }
}

#[test]
fn online_runs_are_feasible_ordered_and_competitive() {
    for seed in 0..20 {
        let spec = GenSpec {
            facilities: 2,
            ..small_spec(seed)
        };
        let instance = generate(&spec).unwrap();
        let run = run_online(&instance).unwrap();

        for (t, trace) in run.traces.iter().enumerate() {
            let agents = instance.stage(t);
            let (first, last) = (&agents[0], &agents[agents.len() - 1]);
            let inside = |v: &kfr_core::rational::Rational| v >= first && v <= last;
            assert!(
                inside(&trace.z.0) || inside(&trace.z.1),
                "seed {seed}: safe move left no facility in the agent range"
            );
            assert!(trace.positions.0 <= trace.positions.1, "seed {seed}");
            assert_eq!(trace.moving, run.schedule.moving_costs()[t], "seed {seed}");
            assert_eq!(
                trace.connection,
                run.schedule.connection_costs()[t],
                "seed {seed}"
            );
        }

        let optimal = dp_optimal(&instance).unwrap();
        // A feasible schedule never beats the optimum.
        assert!(run.schedule.total() >= optimal.total(), "seed {seed}");
        let report = check_inequalities(&instance, &run, &optimal).unwrap();
        assert!(
            report.all_hold(),
            "seed {seed}: {}",
            report.to_json()
        );
    }
}
