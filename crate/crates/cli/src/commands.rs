//! The gen, solve, online, and compare subcommands.

use crate::io::{
    build_instance, emit, oracle_budget, read_instance, render_json, write_json_file,
};
use crate::report::{instance_digest, run_report};
use crate::{CompareArgs, GenArgs, MethodArg, OnlineArgs, Outcome, RoundingArg, ShapeArgs, SolveArgs};
use anyhow::{bail, Context, Result};
use kfr_core::generate::{parse_genspec, GenSpec};
use kfr_core::lp::{build_model, solve_lp};
use kfr_core::online::{run_online, traces_to_csv};
use kfr_core::oracle::{dp_optimal_with_budget, enumerate_optimal_with_budget, OracleError};
use kfr_core::path::build_path;
use kfr_core::rational::{format_rational, rational_to_f64};
use kfr_core::rounding::{round_leftmost, round_prefix};
use num_traits::Zero;
use serde_json::json;
use std::time::Instant;

/// Build a generator spec from the shared shape flags and a seed.
pub fn spec_from_shape(shape: &ShapeArgs, seed: u64) -> GenSpec {
    GenSpec {
        model: shape.model.into(),
        agents: shape.agents,
        stages: shape.stages,
        facilities: shape.facilities,
        low: shape.range.0,
        high: shape.range.1,
        spread: shape.spread,
        denominator: shape.denominator,
        seed,
    }
}

pub fn gen(args: GenArgs) -> Result<Outcome> {
    let instance = match &args.genspec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading generator spec {}", path.display()))?;
            let spec = parse_genspec(&text)
                .with_context(|| format!("parsing generator spec {}", path.display()))?;
            build_instance(&spec)?
        }
        None => {
            let seed = args.seed.expect("clap requires --seed without --genspec");
            build_instance(&spec_from_shape(&args.shape, seed))?
        }
    };
    emit(args.output.as_deref(), &instance.canonical_json())?;
    Ok(Outcome::Clean)
}

pub fn solve(args: SolveArgs) -> Result<Outcome> {
    let started = args.timings.then(Instant::now);
    let instance = read_instance(&args.input)?;
    if args.method != MethodArg::Lp {
        for (flag, given) in [
            ("--rounding", args.rounding.is_some()),
            ("--trace", args.trace.is_some()),
            ("--lp-dump", args.lp_dump.is_some()),
        ] {
            if given {
                bail!("{flag} applies only to --method lp");
            }
        }
    }

    let mut outcome = Outcome::Clean;
    let (schedule, method, verification) = match args.method {
        MethodArg::Lp => {
            let path = build_path(&instance);
            let model = build_model(&path, &instance);
            if let Some(dump) = &args.lp_dump {
                std::fs::write(dump, model.to_lp_text())
                    .with_context(|| format!("writing {}", dump.display()))?;
            }
            let solution = solve_lp(&model).context("solving the relaxation")?;
            let rounding = args.rounding.unwrap_or(RoundingArg::Prefix);
            let (schedule, trace) = match rounding {
                RoundingArg::Prefix => round_prefix(&instance, &path, &solution)?,
                RoundingArg::Leftmost => round_leftmost(&instance, &path, &model, &solution)?,
            };
            if let Some(out) = &args.trace {
                write_json_file(out, &trace.to_json(&path))?;
            }
            let lossless = &schedule.total() == solution.objective();
            if !lossless {
                eprintln!(
                    "claim failed: rounded schedule costs {} but the relaxation value is {}",
                    format_rational(&schedule.total()),
                    format_rational(solution.objective()),
                );
                outcome = Outcome::ClaimFailed;
            }
            let method = match rounding {
                RoundingArg::Prefix => "lp+round",
                RoundingArg::Leftmost => "lp+round-leftmost",
            };
            let verification = json!({
                "relaxation_objective": format_rational(solution.objective()),
                "rounding_lossless": lossless,
            });
            (schedule, method, Some(verification))
        }
        MethodArg::Dp => {
            let budget = oracle_budget()?;
            (dp_optimal_with_budget(&instance, budget)?, "dp", None)
        }
        MethodArg::Enum => {
            let budget = oracle_budget()?;
            (
                enumerate_optimal_with_budget(&instance, budget)?,
                "enum",
                None,
            )
        }
    };

    emit(args.output.as_deref(), &render_json(&schedule.to_json()))?;
    if let Some(path) = &args.report {
        let report = run_report(&instance, method, &schedule, verification, started);
        write_json_file(path, &report)?;
    }
    Ok(outcome)
}

pub fn online(args: OnlineArgs) -> Result<Outcome> {
    let started = args.timings.then(Instant::now);
    let instance = read_instance(&args.input)?;
    let run = run_online(&instance)?;
    if let Some(path) = &args.trace {
        let mut lines = String::new();
        for trace in &run.traces {
            lines.push_str(&serde_json::to_string(&trace.to_json()).expect("serializable trace"));
            lines.push('\n');
        }
        std::fs::write(path, lines).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, traces_to_csv(&run.traces))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    emit(args.output.as_deref(), &render_json(&run.schedule.to_json()))?;
    if let Some(path) = &args.report {
        let report = run_report(&instance, "online", &run.schedule, None, started);
        write_json_file(path, &report)?;
    }
    Ok(Outcome::Clean)
}

pub fn compare(args: CompareArgs) -> Result<Outcome> {
    let started = args.timings.then(Instant::now);
    let instance = read_instance(&args.input)?;
    let budget = oracle_budget()?;

    let path = build_path(&instance);
    let model = build_model(&path, &instance);
    let solution = solve_lp(&model).context("solving the relaxation")?;
    let (prefix, _) = round_prefix(&instance, &path, &solution)?;
    let (leftmost, _) = round_leftmost(&instance, &path, &model, &solution)?;
    let dp = dp_optimal_with_budget(&instance, budget)?;
    let (enumerated, enum_skipped) = match enumerate_optimal_with_budget(&instance, budget) {
        Ok(schedule) => (Some(schedule), None),
        Err(OracleError::BudgetExceeded { required, budget }) => (
            None,
            Some(format!("workload {required} exceeds budget {budget}")),
        ),
    };
    let online_run = if instance.facility_count() == 2 {
        Some(run_online(&instance).expect("two facilities"))
    } else {
        None
    };

    let reference = solution.objective().clone();
    let agree = prefix.total() == reference
        && leftmost.total() == reference
        && dp.total() == reference
        && enumerated
            .as_ref()
            .map_or(true, |schedule| schedule.total() == reference);

    println!("relaxation {}", format_rational(&reference));
    println!("lp+round {}", format_rational(&prefix.total()));
    println!("lp+round-leftmost {}", format_rational(&leftmost.total()));
    println!("dp {}", format_rational(&dp.total()));
    match (&enumerated, &enum_skipped) {
        (Some(schedule), _) => println!("enum {}", format_rational(&schedule.total())),
        (None, Some(reason)) => println!("enum skipped ({reason})"),
        (None, None) => unreachable!(),
    }
    let ratio = match &online_run {
        Some(run) => {
            println!("online {}", format_rational(&run.schedule.total()));
            if dp.total().is_zero() {
                None
            } else {
                Some(run.schedule.total() / dp.total())
            }
        }
        None => {
            println!("online skipped (requires two facilities)");
            None
        }
    };
    if let Some(r) = &ratio {
        println!(
            "online/optimal {} ({:.4})",
            format_rational(r),
            rational_to_f64(r)
        );
    }
    println!("agreement {}", if agree { "exact" } else { "MISMATCH" });

    if let Some(out) = &args.report {
        let mut report = json!({
            "instance_digest": instance_digest(&instance),
            "relaxation": format_rational(&reference),
            "methods": {
                "lp+round": format_rational(&prefix.total()),
                "lp+round-leftmost": format_rational(&leftmost.total()),
                "dp": format_rational(&dp.total()),
                "enum": enumerated.as_ref().map(|s| format_rational(&s.total())),
                "online": online_run.as_ref().map(|r| format_rational(&r.schedule.total())),
            },
            "enum_skipped": enum_skipped,
            "ratio": ratio.as_ref().map(format_rational),
            "ratio_float": ratio.as_ref().map(rational_to_f64),
            "agree": agree,
        });
        if let Some(started) = started {
            report["wall_time_ms"] = json!(started.elapsed().as_millis() as u64);
        }
        write_json_file(out, &report)?;
    }

    Ok(if agree {
        Outcome::Clean
    } else {
        Outcome::ClaimFailed
    })
}
