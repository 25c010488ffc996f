//! Self-contained simplex solver over exact rationals.
//!
//! Two-phase tableau simplex. Rows are stored sparsely (column-sorted), the
//! reduced-cost row densely. Entering columns are picked by steepest reduced
//! cost; after a run of consecutive degenerate pivots the solver switches to
//! Bland's smallest-index rule, which cannot cycle, and switches back once
//! the objective strictly improves. The leaving-row ratio test always breaks
//! ties by smallest basic column index. Every arithmetic step is exact, so a
//! returned optimum is exactly optimal for the given data.

use crate::rational::Rational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

/// One linear constraint: `Σ coeffs · v  (=|≤|≥)  rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Which variable a basis slot holds in the returned optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasicVar {
    /// Index into the caller's variable space.
    Structural(usize),
    /// Slack/surplus of the constraint with this index.
    Slack(usize),
}

#[derive(Debug, Clone)]
pub struct Optimum {
    /// One exact value per structural variable.
    pub values: Vec<Rational>,
    pub objective: Rational,
    /// The optimal basis that was reached (one entry per surviving row).
    pub basis: Vec<BasicVar>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SimplexError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("constraint references variable {var} but only {num_vars} exist")]
    BadVariable { var: usize, num_vars: usize },
}

/// Minimize `objective · v` subject to `constraints` and `v ≥ 0`.
pub fn minimize(
    objective: &[Rational],
    constraints: &[Constraint],
) -> Result<Optimum, SimplexError> {
    Tableau::build(objective, constraints)?.solve(objective)
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const BLAND_TRIGGER: u32 = 24;

type Row = Vec<(u32, Rational)>;

fn row_get(row: &Row, col: u32) -> Option<&Rational> {
    row.binary_search_by_key(&col, |entry| entry.0)
        .ok()
        .map(|idx| &row[idx].1)
}

/// `target - factor · source`, both column-sorted; exact zeros are dropped.
fn row_subtract_scaled(target: &Row, factor: &Rational, source: &Row) -> Row {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let mut a = target.iter().peekable();
    let mut b = source.iter().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (Some((ca, _)), Some((cb, _))) if ca < cb => {
                out.push(a.next().unwrap().clone());
            }
            (Some((ca, _)), Some((cb, vb))) if ca == cb => {
                let (_, va) = a.next().unwrap();
                b.next();
                let v = va - factor * vb;
                if !v.is_zero() {
                    out.push((*ca, v));
                }
            }
            (_, Some((cb, vb))) => {
                let v = -(factor * vb);
                if !v.is_zero() {
                    out.push((*cb, v));
                }
                b.next();
            }
            (Some(_), None) => {
                out.push(a.next().unwrap().clone());
            }
            (None, None) => break,
        }
    }
    out
}

struct Tableau {
    structural: usize,
    /// Columns `>= artificial_start` are phase-1 artificials.
    artificial_start: usize,
    num_cols: usize,
    /// `slack_col[i]`: the slack/surplus column of input constraint `i`.
    slack_col: Vec<Option<usize>>,
    rows: Vec<Row>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    reduced: Vec<Rational>,
    objective_value: Rational,
    /// Columns at or beyond this bound may not enter (bans artificials in phase 2).
    enter_limit: usize,
    degenerate_streak: u32,
    bland: bool,
}

impl Tableau {
    fn build(objective: &[Rational], constraints: &[Constraint]) -> Result<Self, SimplexError> {
        let structural = objective.len();
        // Normalize: nonnegative rhs, combined duplicate coefficients.
        let mut normalized: Vec<(Row, Relation, Rational)> = Vec::with_capacity(constraints.len());
        for con in constraints {
            let mut coeffs: Vec<(u32, Rational)> = Vec::with_capacity(con.coeffs.len());
            for (var, value) in &con.coeffs {
                if *var >= structural {
                    return Err(SimplexError::BadVariable {
                        var: *var,
                        num_vars: structural,
                    });
                }
                coeffs.push((*var as u32, value.clone()));
            }
            coeffs.sort_by_key(|entry| entry.0);
            let mut combined: Row = Vec::with_capacity(coeffs.len());
            for (col, value) in coeffs {
                match combined.last_mut() {
                    Some((last, acc)) if *last == col => *acc += value,
                    _ => combined.push((col, value)),
                }
            }
            combined.retain(|(_, v)| !v.is_zero());
            let mut relation = con.relation;
            let mut rhs = con.rhs.clone();
            if rhs.is_negative() {
                for (_, v) in &mut combined {
                    *v = -v.clone();
                }
                rhs = -rhs;
                relation = match relation {
                    Relation::Eq => Relation::Eq,
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                };
            }
            normalized.push((combined, relation, rhs));
        }

        let num_le = normalized
            .iter()
            .filter(|(_, rel, _)| !matches!(rel, Relation::Eq))
            .count();
        let num_artificial = normalized
            .iter()
            .filter(|(_, rel, _)| !matches!(rel, Relation::Le))
            .count();
        let artificial_start = structural + num_le;
        let num_cols = artificial_start + num_artificial;

        let mut rows = Vec::with_capacity(normalized.len());
        let mut rhs_col = Vec::with_capacity(normalized.len());
        let mut basis = Vec::with_capacity(normalized.len());
        let mut in_basis = vec![false; num_cols];
        let mut slack_col = vec![None; normalized.len()];
        let mut next_slack = structural;
        let mut next_artificial = artificial_start;
        for (idx, (mut row, relation, rhs)) in normalized.into_iter().enumerate() {
            match relation {
                Relation::Le => {
                    let slack = next_slack;
                    next_slack += 1;
                    slack_col[idx] = Some(slack);
                    row.push((slack as u32, Rational::one()));
                    basis.push(slack);
                    in_basis[slack] = true;
                }
                Relation::Ge => {
                    let surplus = next_slack;
                    next_slack += 1;
                    slack_col[idx] = Some(surplus);
                    row.push((surplus as u32, -Rational::one()));
                    let art = next_artificial;
                    next_artificial += 1;
                    row.push((art as u32, Rational::one()));
                    basis.push(art);
                    in_basis[art] = true;
                }
                Relation::Eq => {
                    let art = next_artificial;
                    next_artificial += 1;
                    row.push((art as u32, Rational::one()));
                    basis.push(art);
                    in_basis[art] = true;
                }
            }
            rows.push(row);
            rhs_col.push(rhs);
        }

        Ok(Self {
            structural,
            artificial_start,
            num_cols,
            slack_col,
            rows,
            rhs: rhs_col,
            basis,
            in_basis,
            reduced: Vec::new(),
            objective_value: Rational::zero(),
            enter_limit: num_cols,
            degenerate_streak: 0,
            bland: false,
        })
    }

    /// Recompute the reduced-cost row and objective value for `costs`
    /// (indexed by column; missing columns cost zero) under the current basis.
    fn price(&mut self, costs: &[Rational]) {
        let mut reduced = vec![Rational::zero(); self.num_cols];
        reduced[..costs.len()].clone_from_slice(costs);
        let mut value = Rational::zero();
        for (row, (basic, rhs)) in self.rows.iter().zip(self.basis.iter().zip(&self.rhs)) {
            let weight = match costs.get(*basic) {
                Some(c) if !c.is_zero() => c.clone(),
                _ => continue,
            };
            value += &weight * rhs;
            for (col, coeff) in row {
                let delta = &weight * coeff;
                reduced[*col as usize] -= delta;
            }
        }
        self.reduced = reduced;
        self.objective_value = value;
        self.degenerate_streak = 0;
        self.bland = false;
    }

    fn choose_entering(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for col in 0..self.enter_limit {
            if self.in_basis[col] || !self.reduced[col].is_negative() {
                continue;
            }
            if self.bland {
                return Some(col);
            }
            match best {
                Some(b) if self.reduced[b] <= self.reduced[col] => {}
                _ => best = Some(col),
            }
        }
        best
    }

    /// One simplex iteration. Returns `Ok(true)` if a pivot happened,
    /// `Ok(false)` at optimality.
    fn step(&mut self) -> Result<bool, SimplexError> {
        let entering = match self.choose_entering() {
            Some(col) => col,
            None => return Ok(false),
        };
        // Gather the entering column and run the ratio test.
        let mut column: Vec<(usize, Rational)> = Vec::new();
        let mut leaving: Option<(usize, Rational)> = None; // (row, ratio)
        for (r, row) in self.rows.iter().enumerate() {
            let coeff = match row_get(row, entering as u32) {
                Some(c) => c.clone(),
                None => continue,
            };
            if coeff.is_positive() {
                let ratio = &self.rhs[r] / &coeff;
                let better = match &leaving {
                    None => true,
                    Some((prev, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*prev])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            column.push((r, coeff));
        }
        let (pivot_row, _) = leaving.ok_or(SimplexError::Unbounded)?;
        self.pivot(pivot_row, entering, column);
        Ok(true)
    }

    fn pivot(&mut self, p: usize, entering: usize, column: Vec<(usize, Rational)>) {
        // Normalize the pivot row.
        let pivot_val = row_get(&self.rows[p], entering as u32)
            .expect("pivot entry present")
            .clone();
        if !pivot_val.is_one() {
            for (_, v) in &mut self.rows[p] {
                *v /= &pivot_val;
            }
            self.rhs[p] /= &pivot_val;
        }
        let pivot_row = std::mem::take(&mut self.rows[p]);
        let pivot_rhs = self.rhs[p].clone();

        // Eliminate the entering column from every other row. The pivot row
        // is already normalized, so each row's own entering coefficient is
        // exactly the elimination factor.
        for (r, coeff) in column {
            if r == p {
                continue;
            }
            self.rows[r] = row_subtract_scaled(&self.rows[r], &coeff, &pivot_row);
            let delta = &coeff * &pivot_rhs;
            self.rhs[r] -= delta;
        }

        // Update reduced costs and the objective value.
        let factor = self.reduced[entering].clone();
        if !factor.is_zero() {
            self.objective_value += &factor * &pivot_rhs;
            for (col, v) in &pivot_row {
                let delta = &factor * v;
                self.reduced[*col as usize] -= delta;
            }
        }

        self.rows[p] = pivot_row;
        self.in_basis[self.basis[p]] = false;
        self.in_basis[entering] = true;
        self.basis[p] = entering;

        // Anti-cycling policy: fall back to Bland's rule after a degenerate
        // run, return to steepest descent once the objective moves again.
        if pivot_rhs.is_zero() {
            self.degenerate_streak += 1;
            if self.degenerate_streak >= BLAND_TRIGGER {
                self.bland = true;
            }
        } else {
            self.degenerate_streak = 0;
            self.bland = false;
        }
    }

    fn optimize(&mut self) -> Result<(), SimplexError> {
        while self.step()? {}
        Ok(())
    }

    fn solve(mut self, objective: &[Rational]) -> Result<Optimum, SimplexError> {
        // Phase 1: minimize the sum of artificials.
        if self.artificial_start < self.num_cols {
            let mut phase1 = vec![Rational::zero(); self.num_cols];
            for cost in phase1.iter_mut().skip(self.artificial_start) {
                *cost = Rational::one();
            }
            self.price(&phase1);
            self.optimize()?;
            if !self.objective_value.is_zero() {
                return Err(SimplexError::Infeasible);
            }
            self.evict_artificials();
            self.enter_limit = self.artificial_start;
        }

        // Phase 2: the real objective.
        self.price(objective);
        self.optimize()?;

        let mut values = vec![Rational::zero(); self.structural];
        for (slot, rhs) in self.basis.iter().zip(&self.rhs) {
            if *slot < self.structural {
                values[*slot] = rhs.clone();
            }
        }
        let slack_owner: std::collections::HashMap<usize, usize> = self
            .slack_col
            .iter()
            .enumerate()
            .filter_map(|(row, col)| col.map(|c| (c, row)))
            .collect();
        let basis = self
            .basis
            .iter()
            .map(|&col| {
                if col < self.structural {
                    BasicVar::Structural(col)
                } else {
                    BasicVar::Slack(slack_owner[&col])
                }
            })
            .collect();
        Ok(Optimum {
            values,
            objective: self.objective_value.clone(),
            basis,
        })
    }

    /// After a zero-value phase 1, pivot remaining artificials out of the
    /// basis, dropping rows that turn out to be redundant.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] < self.artificial_start {
                r += 1;
                continue;
            }
            // Any nonzero real entry works: the row's rhs is zero, so the
            // pivot is degenerate and preserves feasibility.
            let target = self.rows[r]
                .iter()
                .find(|(col, _)| (*col as usize) < self.artificial_start)
                .map(|(col, _)| *col as usize);
            match target {
                Some(col) => {
                    let column: Vec<(usize, Rational)> = self
                        .rows
                        .iter()
                        .enumerate()
                        .filter_map(|(i, row)| {
                            row_get(row, col as u32).map(|v| (i, v.clone()))
                        })
                        .collect();
                    // Reduced costs are irrelevant mid-cleanup; repriced next.
                    self.reduced = vec![Rational::zero(); self.num_cols];
                    self.pivot(r, col, column);
                    r += 1;
                }
                None => {
                    // 0 = 0 over real variables: the constraint was redundant.
                    self.in_basis[self.basis[r]] = false;
                    self.rows.swap_remove(r);
                    self.rhs.swap_remove(r);
                    self.basis.swap_remove(r);
                }
            }
        }
    }
}
