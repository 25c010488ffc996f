//! Run reports: what was solved, what it cost, and how it was checked.

use kfr_core::instance::{Instance, Schedule};
use kfr_core::rational::{format_rational, rational_to_f64};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::time::Instant;

/// Content digest of an instance's canonical JSON form.
pub fn instance_digest(instance: &Instance) -> String {
    let hash = Sha256::digest(instance.canonical_json().as_bytes());
    format!("sha256:{hash:x}")
}

/// Assemble the standard run report for a computed schedule.
///
/// `verification` carries method-specific evidence (for example the
/// relaxation objective and the losslessness of the rounding step); wall
/// time is recorded only when `started` is given, so that reports stay
/// byte-reproducible by default.
pub fn run_report(
    instance: &Instance,
    method: &str,
    schedule: &Schedule,
    verification: Option<Value>,
    started: Option<Instant>,
) -> Value {
    let stages: Vec<Value> = (0..instance.stage_count())
        .map(|t| {
            let moving = &schedule.moving_costs()[t];
            let connection = &schedule.connection_costs()[t];
            json!({
                "stage": t + 1,
                "moving": format_rational(moving),
                "moving_float": rational_to_f64(moving),
                "connection": format_rational(connection),
                "connection_float": rational_to_f64(connection),
            })
        })
        .collect();
    let total = schedule.total();
    let mut report = json!({
        "instance_digest": instance_digest(instance),
        "method": method,
        "total": format_rational(&total),
        "total_float": rational_to_f64(&total),
        "stages": stages,
    });
    if let Some(evidence) = verification {
        report["verification"] = evidence;
    }
    if let Some(started) = started {
        report["wall_time_ms"] = json!(started.elapsed().as_millis() as u64);
    }
    report
}
