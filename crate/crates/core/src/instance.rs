//! Problem instances and position schedules.
//!
//! An [`Instance`] holds the initial facility positions and, per stage, the
//! multiset of agent coordinates; both are kept sorted. A [`Schedule`] assigns
//! each facility a position at every stage; its cost is the total distance
//! facilities travel plus, per stage, each agent's distance to the nearest
//! facility.

use crate::rational::{format_rational, parse_rational, rational_to_f64, Rational};
use num_traits::Zero;
use serde_json::{json, Value};

/// A reallocation instance: `k` initial facility positions and `t ≥ 1` stages
/// of agent coordinates (every stage nonempty; stages may differ in size).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    initial_positions: Vec<Rational>,
    stages: Vec<Vec<Rational>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("{path}: expected {expected}")]
    WrongType { path: String, expected: &'static str },
    #[error("{path}: unknown key (expected \"x0\" and \"stages\")")]
    UnknownKey { path: String },
    #[error("missing key {key:?}")]
    MissingKey { key: &'static str },
    #[error("x0: at least one facility is required")]
    NoFacilities,
    #[error("stages: at least one stage is required")]
    NoStages,
    #[error("{path}: empty stage")]
    EmptyStage { path: String },
    #[error("{path}: non-numeric coordinate: {detail}")]
    BadCoordinate { path: String, detail: String },
}

impl Instance {
    /// Validate and normalize: both the initial positions and every stage are
    /// sorted ascending (duplicates allowed).
    pub fn new(
        initial_positions: Vec<Rational>,
        stages: Vec<Vec<Rational>>,
    ) -> Result<Self, InstanceError> {
        if initial_positions.is_empty() {
            return Err(InstanceError::NoFacilities);
        }
        if stages.is_empty() {
            return Err(InstanceError::NoStages);
        }
        for (idx, stage) in stages.iter().enumerate() {
            if stage.is_empty() {
                return Err(InstanceError::EmptyStage {
                    path: format!("stages[{idx}]"),
                });
            }
        }
        let mut initial_positions = initial_positions;
        initial_positions.sort();
        let mut stages = stages;
        for stage in &mut stages {
            stage.sort();
        }
        Ok(Self {
            initial_positions,
            stages,
        })
    }

    /// Number of facilities `k`.
    pub fn facility_count(&self) -> usize {
        self.initial_positions.len()
    }

    /// Number of stages `t`.
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn initial_positions(&self) -> &[Rational] {
        &self.initial_positions
    }

    pub fn stages(&self) -> &[Vec<Rational>] {
        &self.stages
    }

    /// Agent coordinates at stage `t` (zero-based), sorted ascending.
    pub fn stage(&self, t: usize) -> &[Rational] {
        &self.stages[t]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "x0": self.initial_positions.iter().map(|r| format_rational(r)).collect::<Vec<_>>(),
            "stages": self
                .stages
                .iter()
                .map(|stage| stage.iter().map(|r| format_rational(r)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    /// Canonical textual form: pretty-printed JSON with a trailing newline.
    /// Identical instances always render to identical bytes.
    pub fn canonical_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_json()).expect("static shape");
        text.push('\n');
        text
    }
}

/// Parse an instance document: `{"x0": [...], "stages": [[...], ...]}` where
/// every coordinate is a JSON number or a string holding an integer, decimal,
/// or fraction. Decimals are converted exactly.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| InstanceError::Malformed(e.to_string()))?;
    let obj = match &doc {
        Value::Object(map) => map,
        _ => {
            return Err(InstanceError::WrongType {
                path: "$".to_string(),
                expected: "an object",
            })
        }
    };
    for key in obj.keys() {
        if key != "x0" && key != "stages" {
            return Err(InstanceError::UnknownKey { path: key.clone() });
        }
    }
    let x0 = obj
        .get("x0")
        .ok_or(InstanceError::MissingKey { key: "x0" })?;
    let stages = obj
        .get("stages")
        .ok_or(InstanceError::MissingKey { key: "stages" })?;
    let x0 = coordinate_array(x0, "x0")?;
    let stage_rows = match stages {
        Value::Array(rows) => rows,
        _ => {
            return Err(InstanceError::WrongType {
                path: "stages".to_string(),
                expected: "an array of stages",
            })
        }
    };
    let mut parsed_stages = Vec::with_capacity(stage_rows.len());
    for (idx, row) in stage_rows.iter().enumerate() {
        parsed_stages.push(coordinate_array(row, &format!("stages[{idx}]"))?);
    }
    Instance::new(x0, parsed_stages)
}

fn coordinate_array(value: &Value, path: &str) -> Result<Vec<Rational>, InstanceError> {
    let items = match value {
        Value::Array(items) => items,
        _ => {
            return Err(InstanceError::WrongType {
                path: path.to_string(),
                expected: "an array of coordinates",
            })
        }
    };
    let mut out = Vec::with_capacity(items.len());
    for (idx, item) in items.iter().enumerate() {
        let text = match item {
            // With arbitrary-precision parsing enabled, the number's original
            // literal text is preserved, so decimals convert exactly.
            Value::Number(n) => n.to_string(),
            Value::String(s) => s.clone(),
            other => {
                return Err(InstanceError::BadCoordinate {
                    path: format!("{path}[{idx}]"),
                    detail: format!("got {other}"),
                })
            }
        };
        let r = parse_rational(&text).map_err(|detail| InstanceError::BadCoordinate {
            path: format!("{path}[{idx}]"),
            detail,
        })?;
        out.push(r);
    }
    Ok(out)
}

/// Facility positions for every stage, with per-stage cost breakdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    positions: Vec<Vec<Rational>>,
    moving: Vec<Rational>,
    connection: Vec<Rational>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("schedule has {got} stages, instance has {want}")]
    StageMismatch { got: usize, want: usize },
    #[error("stage {stage}: schedule places {got} facilities, instance has {want}")]
    FacilityMismatch {
        stage: usize,
        got: usize,
        want: usize,
    },
}

impl Schedule {
    /// Build a schedule from raw positions (`positions[t][k]` is facility `k`
    /// at stage `t`), computing the per-stage moving and connection costs.
    pub fn from_positions(
        instance: &Instance,
        positions: Vec<Vec<Rational>>,
    ) -> Result<Self, ScheduleError> {
        if positions.len() != instance.stage_count() {
            return Err(ScheduleError::StageMismatch {
                got: positions.len(),
                want: instance.stage_count(),
            });
        }
        let k = instance.facility_count();
        let mut moving = Vec::with_capacity(positions.len());
        let mut connection = Vec::with_capacity(positions.len());
        let mut previous: &[Rational] = instance.initial_positions();
        for (t, row) in positions.iter().enumerate() {
            if row.len() != k {
                return Err(ScheduleError::FacilityMismatch {
                    stage: t,
                    got: row.len(),
                    want: k,
                });
            }
            let mut move_cost = Rational::zero();
            for (now, before) in row.iter().zip(previous) {
                move_cost += abs_diff(now, before);
            }
            let mut connect_cost = Rational::zero();
            for agent in instance.stage(t) {
                connect_cost += row
                    .iter()
                    .map(|p| abs_diff(p, agent))
                    .min()
                    .expect("k >= 1");
            }
            moving.push(move_cost);
            connection.push(connect_cost);
            previous = row;
        }
        Ok(Self {
            positions,
            moving,
            connection,
        })
    }

    pub fn positions(&self) -> &[Vec<Rational>] {
        &self.positions
    }

    /// Facility positions after stage `t` (zero-based).
    pub fn stage_positions(&self, t: usize) -> &[Rational] {
        &self.positions[t]
    }

    pub fn moving_costs(&self) -> &[Rational] {
        &self.moving
    }

    pub fn connection_costs(&self) -> &[Rational] {
        &self.connection
    }

    pub fn total(&self) -> Rational {
        self.moving.iter().sum::<Rational>() + self.connection.iter().sum::<Rational>()
    }

    pub fn to_json(&self) -> Value {
        let total = self.total();
        json!({
            "positions": self
                .positions
                .iter()
                .map(|row| row.iter().map(|r| format_rational(r)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "moving": self.moving.iter().map(|r| format_rational(r)).collect::<Vec<_>>(),
            "connection": self.connection.iter().map(|r| format_rational(r)).collect::<Vec<_>>(),
            "total": format_rational(&total),
            "total_float": rational_to_f64(&total),
        })
    }
}

/// Recompute a schedule's total cost from its positions alone, validating its
/// shape against the instance. This is the cost definition; the cached
/// per-stage fields in [`Schedule`] must always agree with it.
pub fn total_cost(instance: &Instance, schedule: &Schedule) -> Result<Rational, ScheduleError> {
    let rebuilt = Schedule::from_positions(instance, schedule.positions.clone())?;
    Ok(rebuilt.total())
}

pub(crate) fn abs_diff(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a - b
    } else {
        b - a
    }
}
