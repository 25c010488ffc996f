//! Linear-programming relaxation of the reallocation problem over a path model.
//!
//! Variables, all nonnegative:
//! - `x(i,j,t)` — fraction of agent `i`'s demand served at node `j` in stage `t`;
//! - `f(k,j,t)` — fraction of facility `k` placed at node `j` in stage `t`;
//! - `s(k,j,l,t)` — fraction of facility `k` moved from node `j` to node `l`
//!   entering stage `t`.
//!
//! Constraint rows, in model order:
//! - `assign`: every agent's demand is fully served, `Σ_j x(i,j,t) = 1`;
//! - `cap`: service at a node is covered by facility mass there,
//!   `x(i,j,t) ≤ Σ_k f(k,j,t)`;
//! - `place`: every facility is fully placed, `Σ_j f(k,j,t) = 1`;
//! - `arrive`: movement into a node matches placement, `Σ_j s(k,j,l,t) = f(k,l,t)`;
//! - `depart`: movement out of a node matches the previous placement,
//!   `Σ_l s(k,j,l,t) = f(k,j,t-1)`, where stage 1 departs from the fixed
//!   initial position (a constant right-hand side).
//!
//! The node capacity `c(j,t) = Σ_k f(k,j,t)` and the per-facility movement
//! cost `Σ_{j,l} d(j,l)·s(k,j,l,t)` are definitional aggregates; they are
//! substituted away at build time and reported back on the solution. The
//! objective minimizes total connection distance plus total movement distance.
//!
//! For any instance, an optimal basic solution of this relaxation has the
//! same objective value as the best integral schedule over the path nodes;
//! the rounding module turns one into the other losslessly.

pub mod simplex;

use crate::instance::Instance;
use crate::path::PathModel;
use crate::rational::{format_decimal, format_rational, Rational};
use num_traits::{One, Signed, Zero};
use simplex::{BasicVar, Constraint, Relation, SimplexError};
use std::fmt::Write as _;

/// One constraint row: sparse coefficients over the model's variable space.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub name: String,
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// The assembled relaxation for one instance.
#[derive(Debug, Clone)]
pub struct LpModel {
    facilities: usize,
    stage_count: usize,
    node_count: usize,
    agents_per_stage: Vec<usize>,
    nodes: Vec<Rational>,
    init_node: Vec<usize>,
    /// Start of each stage's `x` block (assignment variables come first).
    assign_offsets: Vec<usize>,
    place_offset: usize,
    move_offset: usize,
    var_count: usize,
    objective: Vec<Rational>,
    rows: Vec<LpRow>,
}

/// An exact optimal solution of the relaxation.
#[derive(Debug, Clone)]
pub struct FractionalSolution {
    values: Vec<Rational>,
    objective: Rational,
    /// `capacity[t][j]`: total facility mass at node `j` in stage `t`.
    capacity: Vec<Vec<Rational>>,
    /// `movement_cost[t][k]`: exact movement cost paid by facility `k`
    /// entering stage `t`.
    movement_cost: Vec<Vec<Rational>>,
    /// Names of the basic variables of the optimal basis that was reached
    /// (`slack:<row>` entries for basic slacks).
    basis: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("relaxation unexpectedly {0}")]
    Solver(SimplexError),
    #[error("solver produced an invalid solution: {0}")]
    Verification(String),
}

/// Build the relaxation for `instance` over `path`.
pub fn build_model(path: &PathModel, instance: &Instance) -> LpModel {
    let k = instance.facility_count();
    let t_count = instance.stage_count();
    let v = path.node_count();
    let agents_per_stage: Vec<usize> =
        instance.stages().iter().map(|stage| stage.len()).collect();

    let mut assign_offsets = Vec::with_capacity(t_count);
    let mut cursor = 0;
    for &n in &agents_per_stage {
        assign_offsets.push(cursor);
        cursor += n * v;
    }
    let place_offset = cursor;
    let move_offset = place_offset + k * v * t_count;
    let var_count = move_offset + k * v * v * t_count;

    let mut model = LpModel {
        facilities: k,
        stage_count: t_count,
        node_count: v,
        agents_per_stage,
        nodes: path.nodes().to_vec(),
        init_node: path.init_nodes().to_vec(),
        assign_offsets,
        place_offset,
        move_offset,
        var_count,
        objective: vec![Rational::zero(); var_count],
        rows: Vec::new(),
    };

    // Objective: connection distances on x, movement distances on s.
    for t in 0..t_count {
        for i in 0..model.agents_per_stage[t] {
            let agent = path.agent_node(t, i);
            for j in 0..v {
                let var = model.assign_var(t, i, j);
                model.objective[var] = path.distance(agent, j);
            }
        }
        for f in 0..k {
            for j in 0..v {
                for l in 0..v {
                    let var = model.move_var(t, f, j, l);
                    model.objective[var] = path.distance(j, l);
                }
            }
        }
    }

    // assign: each agent's demand is fully served.
    for t in 0..t_count {
        for i in 0..model.agents_per_stage[t] {
            let coeffs = (0..v)
                .map(|j| (model.assign_var(t, i, j), Rational::one()))
                .collect();
            model.rows.push(LpRow {
                name: format!("assign_i{}_t{}", i + 1, t + 1),
                coeffs,
                relation: Relation::Eq,
                rhs: Rational::one(),
            });
        }
    }
    // cap: service is covered by facility mass.
    for t in 0..t_count {
        for i in 0..model.agents_per_stage[t] {
            for j in 0..v {
                let mut coeffs = vec![(model.assign_var(t, i, j), Rational::one())];
                for f in 0..k {
                    coeffs.push((model.place_var(t, f, j), -Rational::one()));
                }
                model.rows.push(LpRow {
                    name: format!("cap_i{}_j{}_t{}", i + 1, j + 1, t + 1),
                    coeffs,
                    relation: Relation::Le,
                    rhs: Rational::zero(),
                });
            }
        }
    }
    // place: each facility is fully placed.
    for t in 0..t_count {
        for f in 0..k {
            let coeffs = (0..v)
                .map(|j| (model.place_var(t, f, j), Rational::one()))
                .collect();
            model.rows.push(LpRow {
                name: format!("place_k{}_t{}", f + 1, t + 1),
                coeffs,
                relation: Relation::Eq,
                rhs: Rational::one(),
            });
        }
    }
    // arrive: movement into a node matches the placement there.
    for t in 0..t_count {
        for f in 0..k {
            for l in 0..v {
                let mut coeffs: Vec<(usize, Rational)> = (0..v)
                    .map(|j| (model.move_var(t, f, j, l), Rational::one()))
                    .collect();
                coeffs.push((model.place_var(t, f, l), -Rational::one()));
                model.rows.push(LpRow {
                    name: format!("arrive_k{}_l{}_t{}", f + 1, l + 1, t + 1),
                    coeffs,
                    relation: Relation::Eq,
                    rhs: Rational::zero(),
                });
            }
        }
    }
    // depart: movement out of a node matches the previous placement.
    for t in 0..t_count {
        for f in 0..k {
            for j in 0..v {
                let mut coeffs: Vec<(usize, Rational)> = (0..v)
                    .map(|l| (model.move_var(t, f, j, l), Rational::one()))
                    .collect();
                let rhs = if t == 0 {
                    if model.init_node[f] == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                } else {
                    coeffs.push((model.place_var(t - 1, f, j), -Rational::one()));
                    Rational::zero()
                };
                model.rows.push(LpRow {
                    name: format!("depart_k{}_j{}_t{}", f + 1, j + 1, t + 1),
                    coeffs,
                    relation: Relation::Eq,
                    rhs,
                });
            }
        }
    }
    model
}

impl LpModel {
    /// Variable id of `x(i,j,t)` (zero-based stage and indices).
    pub fn assign_var(&self, t: usize, i: usize, j: usize) -> usize {
        self.assign_offsets[t] + i * self.node_count + j
    }

    /// Variable id of `f(k,j,t)`.
    pub fn place_var(&self, t: usize, k: usize, j: usize) -> usize {
        self.place_offset + (t * self.facilities + k) * self.node_count + j
    }

    /// Variable id of `s(k,j,l,t)`.
    pub fn move_var(&self, t: usize, k: usize, j: usize, l: usize) -> usize {
        self.move_offset
            + ((t * self.facilities + k) * self.node_count + j) * self.node_count
            + l
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn assign_var_count(&self) -> usize {
        self.place_offset
    }

    pub fn place_var_count(&self) -> usize {
        self.move_offset - self.place_offset
    }

    pub fn move_var_count(&self) -> usize {
        self.var_count - self.move_offset
    }

    /// Count of node-capacity aggregates `c(j,t)` reported on solutions.
    pub fn capacity_count(&self) -> usize {
        self.node_count * self.stage_count
    }

    /// Count of per-facility movement-cost aggregates reported on solutions.
    pub fn movement_cost_count(&self) -> usize {
        self.facilities * self.stage_count
    }

    pub fn rows(&self) -> &[LpRow] {
        &self.rows
    }

    pub fn objective_coefficients(&self) -> &[Rational] {
        &self.objective
    }

    pub fn facilities(&self) -> usize {
        self.facilities
    }

    pub fn stage_count(&self) -> usize {
        self.stage_count
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn agents_per_stage(&self) -> &[usize] {
        &self.agents_per_stage
    }

    /// External name of a variable, with 1-based indices: `x_<i>_<j>_<t>`,
    /// `f_<k>_<j>_<t>`, `s_<k>_<j>_<l>_<t>`.
    pub fn var_name(&self, var: usize) -> String {
        let v = self.node_count;
        if var < self.place_offset {
            let t = match self
                .assign_offsets
                .iter()
                .rposition(|&start| start <= var)
            {
                Some(t) => t,
                None => unreachable!("assignment block starts at zero"),
            };
            let rel = var - self.assign_offsets[t];
            return format!("x_{}_{}_{}", rel / v + 1, rel % v + 1, t + 1);
        }
        if var < self.move_offset {
            let rel = var - self.place_offset;
            let j = rel % v;
            let kt = rel / v;
            return format!(
                "f_{}_{}_{}",
                kt % self.facilities + 1,
                j + 1,
                kt / self.facilities + 1
            );
        }
        let rel = var - self.move_offset;
        let l = rel % v;
        let j = (rel / v) % v;
        let kt = rel / (v * v);
        format!(
            "s_{}_{}_{}_{}",
            kt % self.facilities + 1,
            j + 1,
            l + 1,
            kt / self.facilities + 1
        )
    }

    fn distance(&self, j: usize, l: usize) -> Rational {
        crate::instance::abs_diff(&self.nodes[j], &self.nodes[l])
    }

    /// Render the model in LP interchange text format. Coefficients appear as
    /// exact decimals where possible and as `p/q` fractions otherwise.
    pub fn to_lp_text(&self) -> String {
        let coeff = |r: &Rational| format_decimal(r).unwrap_or_else(|| format_rational(r));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\\ Facility reallocation relaxation: {} facilities, {} stages, {} nodes",
            self.facilities, self.stage_count, self.node_count
        );
        let _ = writeln!(
            out,
            "\\ Variables: x_<agent>_<node>_<stage>, f_<facility>_<node>_<stage>, s_<facility>_<from>_<to>_<stage>"
        );
        out.push_str("Minimize\n obj:");
        let mut first = true;
        for (var, c) in self.objective.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    let _ = write!(out, " -{} {}", coeff(&mag), self.var_name(var));
                } else {
                    let _ = write!(out, " {} {}", coeff(&mag), self.var_name(var));
                }
                first = false;
            } else {
                let _ = write!(out, " {} {} {}", sign, coeff(&mag), self.var_name(var));
            }
        }
        if first {
            out.push_str(" 0 x_1_1_1");
        }
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            let _ = write!(out, " {}:", row.name);
            let mut lead = true;
            for (var, c) in &row.coeffs {
                let (sign, mag) = if c.is_negative() {
                    ("-", -c.clone())
                } else {
                    ("+", c.clone())
                };
                let rendered = if mag.is_one() {
                    self.var_name(*var)
                } else {
                    format!("{} {}", coeff(&mag), self.var_name(*var))
                };
                if lead {
                    let _ = write!(
                        out,
                        " {}{}",
                        if sign == "-" { "- " } else { "" },
                        rendered
                    );
                    lead = false;
                } else {
                    let _ = write!(out, " {} {}", sign, rendered);
                }
            }
            let rel = match row.relation {
                Relation::Eq => "=",
                Relation::Le => "<=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {} {}", rel, coeff(&row.rhs));
        }
        out.push_str("Bounds\nEnd\n");
        out
    }
}

impl FractionalSolution {
    pub fn value(&self, var: usize) -> &Rational {
        &self.values[var]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn objective(&self) -> &Rational {
        &self.objective
    }

    pub fn assignment<'a>(&'a self, m: &LpModel, t: usize, i: usize, j: usize) -> &'a Rational {
        &self.values[m.assign_var(t, i, j)]
    }

    pub fn placement<'a>(&'a self, m: &LpModel, t: usize, k: usize, j: usize) -> &'a Rational {
        &self.values[m.place_var(t, k, j)]
    }

    pub fn movement<'a>(
        &'a self,
        m: &LpModel,
        t: usize,
        k: usize,
        j: usize,
        l: usize,
    ) -> &'a Rational {
        &self.values[m.move_var(t, k, j, l)]
    }

    /// `capacity()[t][j]`: total facility mass at node `j` in stage `t`.
    pub fn capacity(&self) -> &[Vec<Rational>] {
        &self.capacity
    }

    /// `movement_cost()[t][k]`: movement cost paid by facility `k` entering stage `t`.
    pub fn movement_cost(&self) -> &[Vec<Rational>] {
        &self.movement_cost
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }
}

/// Solve the relaxation exactly. The returned solution has a value for every
/// model variable, satisfies every row exactly (this is re-verified before
/// returning), and carries the reached optimal basis.
pub fn solve_lp(model: &LpModel) -> Result<FractionalSolution, LpError> {
    // Presolve: an equality row with zero right-hand side whose live
    // coefficients all share one sign forces all its variables to zero
    // (variables are nonnegative). Iterate to a fixpoint.
    let mut fixed = vec![false; model.var_count];
    loop {
        let mut changed = false;
        for row in &model.rows {
            if !matches!(row.relation, Relation::Eq) || !row.rhs.is_zero() {
                continue;
            }
            let live: Vec<&(usize, Rational)> = row
                .coeffs
                .iter()
                .filter(|(var, _)| !fixed[*var])
                .collect();
            if live.is_empty() {
                continue;
            }
            let all_pos = live.iter().all(|(_, c)| c.is_positive());
            let all_neg = live.iter().all(|(_, c)| c.is_negative());
            if all_pos || all_neg {
                for (var, _) in live {
                    fixed[*var] = true;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Compact live variables for the solver.
    let mut live_index = vec![usize::MAX; model.var_count];
    let mut live_vars = Vec::new();
    for var in 0..model.var_count {
        if !fixed[var] {
            live_index[var] = live_vars.len();
            live_vars.push(var);
        }
    }
    let objective: Vec<Rational> = live_vars
        .iter()
        .map(|&var| model.objective[var].clone())
        .collect();
    let mut constraints = Vec::with_capacity(model.rows.len());
    let mut submitted_rows = Vec::with_capacity(model.rows.len());
    for (idx, row) in model.rows.iter().enumerate() {
        let coeffs: Vec<(usize, Rational)> = row
            .coeffs
            .iter()
            .filter(|(var, _)| !fixed[*var])
            .map(|(var, c)| (live_index[*var], c.clone()))
            .collect();
        if coeffs.is_empty() {
            debug_assert!(row.rhs.is_zero(), "presolve kept a contradictory row");
            continue;
        }
        constraints.push(Constraint {
            coeffs,
            relation: row.relation,
            rhs: row.rhs.clone(),
        });
        submitted_rows.push(idx);
    }

    let optimum = simplex::minimize(&objective, &constraints).map_err(LpError::Solver)?;

    let mut values = vec![Rational::zero(); model.var_count];
    for (live, value) in optimum.values.into_iter().enumerate() {
        values[live_vars[live]] = value;
    }
    let basis = optimum
        .basis
        .iter()
        .map(|entry| match entry {
            BasicVar::Structural(live) => model.var_name(live_vars[*live]),
            BasicVar::Slack(row) => format!("slack:{}", model.rows[submitted_rows[*row]].name),
        })
        .collect();

    let mut capacity = Vec::with_capacity(model.stage_count);
    let mut movement_cost = Vec::with_capacity(model.stage_count);
    for t in 0..model.stage_count {
        let mut stage_capacity = Vec::with_capacity(model.node_count);
        for j in 0..model.node_count {
            let mut mass = Rational::zero();
            for k in 0..model.facilities {
                mass += &values[model.place_var(t, k, j)];
            }
            stage_capacity.push(mass);
        }
        capacity.push(stage_capacity);
        let mut stage_movement = Vec::with_capacity(model.facilities);
        for k in 0..model.facilities {
            let mut cost = Rational::zero();
            for j in 0..model.node_count {
                for l in 0..model.node_count {
                    let flow = &values[model.move_var(t, k, j, l)];
                    if !flow.is_zero() {
                        cost += model.distance(j, l) * flow;
                    }
                }
            }
            stage_movement.push(cost);
        }
        movement_cost.push(stage_movement);
    }

    let solution = FractionalSolution {
        values,
        objective: optimum.objective,
        capacity,
        movement_cost,
        basis,
    };
    check_solution(model, &solution).map_err(LpError::Verification)?;
    Ok(solution)
}

/// Re-substitute a solution into every model row and the objective; all must
/// hold exactly. Returns a description of the first violation.
pub fn check_solution(model: &LpModel, solution: &FractionalSolution) -> Result<(), String> {
    if solution.values.len() != model.var_count {
        return Err(format!(
            "solution has {} values, model has {} variables",
            solution.values.len(),
            model.var_count
        ));
    }
    for (var, value) in solution.values.iter().enumerate() {
        if value.is_negative() {
            return Err(format!(
                "variable {} is negative: {}",
                model.var_name(var),
                format_rational(value)
            ));
        }
    }
    for row in &model.rows {
        let lhs: Rational = row
            .coeffs
            .iter()
            .map(|(var, c)| c * &solution.values[*var])
            .sum();
        let ok = match row.relation {
            Relation::Eq => lhs == row.rhs,
            Relation::Le => lhs <= row.rhs,
            Relation::Ge => lhs >= row.rhs,
        };
        if !ok {
            return Err(format!(
                "row {} violated: lhs {} vs rhs {}",
                row.name,
                format_rational(&lhs),
                format_rational(&row.rhs)
            ));
        }
    }
    let objective: Rational = model
        .objective
        .iter()
        .zip(&solution.values)
        .filter(|(c, v)| !c.is_zero() && !v.is_zero())
        .map(|(c, v)| c * v)
        .sum();
    if objective != solution.objective {
        return Err(format!(
            "objective mismatch: recomputed {} vs reported {}",
            format_rational(&objective),
            format_rational(&solution.objective)
        ));
    }
    // The reported aggregates are definitional; recheck them too.
    for t in 0..model.stage_count {
        let stage_total: Rational = solution.capacity[t].iter().sum();
        if stage_total != Rational::from_integer(model.facilities.into()) {
            return Err(format!(
                "stage {} capacity sums to {}, expected the facility count",
                t + 1,
                format_rational(&stage_total)
            ));
        }
        for j in 0..model.node_count {
            let mass: Rational = (0..model.facilities)
                .map(|k| solution.values[model.place_var(t, k, j)].clone())
                .sum();
            if mass != solution.capacity[t][j] {
                return Err(format!("capacity aggregate wrong at stage {} node {}", t + 1, j + 1));
            }
        }
    }
    Ok(())
}
