//! Zero-sum game allocator.
//!
//! Blue (the planner) picks an element to protect, Red (nature) picks an
//! element to knock out. Knocking out element `j` drops the system index from
//! `R0` to `R'_j`; its damage utility is `y_j = 1 - (R0 - R'_j)`. If Blue
//! protected the same element the payoff is 1, otherwise `y_j`. Blue's optimal
//! mixed strategy `ψ` is read as the share of the next budget tranche spent on
//! each element.
//!
//! [`run_game_allocation`] repeats: evaluate, build the payoff matrix over the
//! elements that are not yet perfect, solve the game LP, then pump budget
//! along `ψ` until the first element reaches reliability 1 (or the budget runs
//! out).

use thiserror::Error;

use crate::lp::{simplex_solve, LinearProgram, LpError, Sense};
use crate::network::{ElementId, Network};
use crate::paths::PathSet;
use crate::reliability::{EvalError, IndexModel, ReliabilityState};

/// Strategy weights at or below this are treated as zero when pumping.
pub const PSI_FLOOR: f64 = 1e-9;
/// Slack on the target-index check.
pub const TARGET_TOL: f64 = 1e-9;

const BUDGET_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("payoff matrix needs at least one active element")]
    EmptyActiveSet,
    #[error("no damage utility for element `{0}`")]
    MissingUtility(ElementId),
    #[error("game LP failed: {0}")]
    Lp(#[from] LpError),
    #[error("game stalled: no element with positive weight can still improve")]
    Stalled,
    #[error("budget {0} must be a nonnegative finite number")]
    InvalidBudget(f64),
    #[error("target index {0} must lie in [0, 1]")]
    InvalidTarget(f64),
}

/// Index after zeroing the victim's reliability.
pub fn damaged_index(
    network: &Network,
    paths: &PathSet,
    state: &ReliabilityState,
    victim: &ElementId,
) -> Result<f64, GameError> {
    let i = state
        .index_of(victim)
        .ok_or_else(|| GameError::UnknownElement(victim.clone()))?;
    let damaged = state.with_value(i, 0.0);
    Ok(crate::reliability::system_reliability(network, paths, &damaged)?.system_index)
}

/// Damage outcome for every element at one state.
#[derive(Debug, Clone, PartialEq)]
pub struct DamageUtilities {
    pub ids: Vec<ElementId>,
    /// Index before any damage.
    pub base_index: f64,
    /// `R'_i` per element.
    pub damaged: Vec<f64>,
    /// `y_i` per element.
    pub utilities: Vec<f64>,
}

impl DamageUtilities {
    pub fn get(&self, id: &ElementId) -> Option<f64> {
        self.ids
            .iter()
            .position(|e| e == id)
            .map(|i| self.utilities[i])
    }
}

pub fn damage_utilities(
    network: &Network,
    paths: &PathSet,
    state: &ReliabilityState,
) -> Result<DamageUtilities, GameError> {
    // Validates the state against the network.
    crate::reliability::system_reliability(network, paths, state)?;
    Ok(utilities_with(&IndexModel::new(network, paths), state))
}

fn utilities_with(model: &IndexModel, state: &ReliabilityState) -> DamageUtilities {
    let r = state.values();
    let base_index = model.index(r);
    let damaged: Vec<f64> = (0..r.len()).map(|i| model.index_without(r, i)).collect();
    let utilities = damaged
        .iter()
        .map(|&d| clamp_unit(1.0 - (base_index - d)))
        .collect();
    DamageUtilities {
        ids: state.ids().to_vec(),
        base_index,
        damaged,
        utilities,
    }
}

fn clamp_unit(y: f64) -> f64 {
    debug_assert!(
        (-1e-12..=1.0 + 1e-12).contains(&y),
        "utility {y} out of range"
    );
    y.clamp(0.0, 1.0)
}

/// Blue rows × Red columns. Entry `(i, j)` is 1 when row and column name the
/// same element, otherwise the column's utility `y_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    pub rows: Vec<ElementId>,
    pub columns: Vec<ElementId>,
    pub entries: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    /// Square matrix with the same active elements on both sides.
    pub fn build(utilities: &DamageUtilities, active: &[ElementId]) -> Result<Self, GameError> {
        Self::build_with_columns(utilities, active, active)
    }

    pub fn build_with_columns(
        utilities: &DamageUtilities,
        rows: &[ElementId],
        columns: &[ElementId],
    ) -> Result<Self, GameError> {
        if rows.is_empty() || columns.is_empty() {
            return Err(GameError::EmptyActiveSet);
        }
        let col_y = columns
            .iter()
            .map(|c| {
                utilities
                    .get(c)
                    .ok_or_else(|| GameError::MissingUtility(c.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(r) = rows.iter().find(|r| utilities.get(r).is_none()) {
            return Err(GameError::MissingUtility(r.clone()));
        }
        let entries = rows
            .iter()
            .map(|r| {
                columns
                    .iter()
                    .zip(&col_y)
                    .map(|(c, &y)| if r == c { 1.0 } else { y })
                    .collect()
            })
            .collect();
        Ok(Self {
            rows: rows.to_vec(),
            columns: columns.to_vec(),
            entries,
        })
    }

    /// Expected payoff of each column against the row mix `weights`.
    pub fn column_values(&self, weights: &[f64]) -> Vec<f64> {
        (0..self.columns.len())
            .map(|j| {
                self.entries
                    .iter()
                    .zip(weights)
                    .map(|(row, w)| row[j] * w)
                    .sum()
            })
            .collect()
    }

    /// Guaranteed payoff of `weights`: the worst column.
    pub fn guaranteed_value(&self, weights: &[f64]) -> f64 {
        self.column_values(weights)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    pub elements: Vec<ElementId>,
    pub strategy: Vec<f64>,
    pub value: f64,
}

impl GameSolution {
    /// Weight of `id`; zero for elements outside the row set.
    pub fn weight(&self, id: &ElementId) -> f64 {
        self.elements
            .iter()
            .position(|e| e == id)
            .map_or(0.0, |i| self.strategy[i])
    }
}

pub fn solve_game(payoff: &PayoffMatrix) -> Result<GameSolution, GameError> {
    let (strategy, value) = solve_matrix_game(&payoff.entries)?;
    Ok(GameSolution {
        elements: payoff.rows.clone(),
        strategy,
        value,
    })
}

/// Optimal mixed strategy of the row (maximizing) player and the game value.
///
/// LP: maximize `v` s.t. `v ≤ Σ_i ψ_i a_ij` for every column `j`, `Σ ψ_i = 1`,
/// `ψ ≥ 0`, `v` free.
pub fn solve_matrix_game(entries: &[Vec<f64>]) -> Result<(Vec<f64>, f64), GameError> {
    let n = entries.len();
    if n == 0 {
        return Err(GameError::EmptyActiveSet);
    }
    let m = entries[0].len();
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::maximize(objective).bound(n, f64::NEG_INFINITY, f64::INFINITY);
    for j in 0..m {
        let mut row: Vec<f64> = entries.iter().map(|r| -r[j]).collect();
        row.push(1.0);
        lp = lp.constrain(row, Sense::Le, 0.0);
    }
    let mut sum = vec![1.0; n];
    sum.push(0.0);
    lp = lp.constrain(sum, Sense::Eq, 1.0);

    let solution = simplex_solve(&lp)?;
    let mut strategy: Vec<f64> = solution.values[..n].iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = strategy.iter().sum();
    strategy.iter_mut().for_each(|p| *p /= total);
    let value = solution.values[n];
    debug_assert!(lp.infeasibility(&solution.values) < 1e-9);
    Ok((strategy, value))
}

/// Outcome of one budget pump.
#[derive(Debug, Clone, PartialEq)]
pub struct Pump {
    pub budget: f64,
    pub state: ReliabilityState,
    /// Elements that reached reliability 1 in this pump.
    pub saturated: Vec<ElementId>,
    /// True when the remaining budget, not a saturating element, limited the pump.
    pub budget_limited: bool,
}

/// Spend budget along `ψ` until the first element with positive weight
/// reaches reliability 1, or until `remaining` is used up.
pub fn pump_budget(
    state: &ReliabilityState,
    solution: &GameSolution,
    costs: &[f64],
    remaining: f64,
) -> Result<Pump, GameError> {
    if !(remaining.is_finite() && remaining >= 0.0) {
        return Err(GameError::InvalidBudget(remaining));
    }
    let weights: Vec<f64> = state
        .ids()
        .iter()
        .map(|id| {
            let w = solution.weight(id);
            if w > PSI_FLOOR {
                w
            } else {
                0.0
            }
        })
        .collect();
    let r = state.values();
    let to_perfect: Vec<Option<f64>> = (0..r.len())
        .map(|i| (weights[i] > 0.0 && r[i] < 1.0).then(|| (1.0 - r[i]) * costs[i] / weights[i]))
        .collect();
    let target = to_perfect
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !target.is_finite() {
        return Err(GameError::Stalled);
    }
    let budget_limited = remaining < target;
    let budget = if budget_limited { remaining } else { target };

    let mut values = r.to_vec();
    let mut saturated = Vec::new();
    for i in 0..r.len() {
        if weights[i] == 0.0 {
            continue;
        }
        let hits = !budget_limited && to_perfect[i].is_some_and(|t| t <= target * (1.0 + 1e-12));
        values[i] = if hits {
            1.0
        } else {
            (r[i] + weights[i] * budget / costs[i]).min(1.0)
        };
        if hits || (values[i] == 1.0 && r[i] < 1.0) {
            saturated.push(state.ids()[i].clone());
        }
    }
    let mut new_state = state.clone();
    for (i, v) in values.into_iter().enumerate() {
        new_state = new_state.with_value(i, v);
    }
    Ok(Pump {
        budget,
        state: new_state,
        saturated,
        budget_limited,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameIteration {
    /// 1-based iteration counter.
    pub index: usize,
    pub state_before: ReliabilityState,
    pub state_after: ReliabilityState,
    pub damage: DamageUtilities,
    pub payoff: PayoffMatrix,
    pub solution: GameSolution,
    pub pumped_budget: f64,
    pub saturated: Vec<ElementId>,
    pub system_index_before: f64,
    pub system_index_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    TargetReached,
    BudgetExhausted,
    /// Every element is already perfect.
    AllPerfect,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameRunResult {
    pub iterations: Vec<GameIteration>,
    pub budget: f64,
    pub total_spent: f64,
    pub initial_state: ReliabilityState,
    pub initial_index: f64,
    pub final_state: ReliabilityState,
    pub final_index: f64,
    pub termination: Termination,
}

/// Iterate the game until the budget is spent, the target index is reached,
/// or no further progress is possible.
///
/// Elements that reach reliability 1 leave the game on both sides: Blue no
/// longer funds them and, being perfect, they can no longer fail.
pub fn run_game_allocation(
    network: &Network,
    paths: &PathSet,
    total_budget: f64,
    target_index: f64,
) -> Result<GameRunResult, GameError> {
    if !(total_budget.is_finite() && total_budget >= 0.0) {
        return Err(GameError::InvalidBudget(total_budget));
    }
    if !(0.0..=1.0).contains(&target_index) {
        return Err(GameError::InvalidTarget(target_index));
    }
    let model = IndexModel::new(network, paths);
    let costs = network.costs();
    let initial_state = ReliabilityState::initial(network);
    let initial_index = model.index(initial_state.values());

    let mut state = initial_state.clone();
    let mut index = initial_index;
    let mut spent = 0.0;
    let mut iterations = Vec::new();
    let termination = loop {
        if index >= target_index - TARGET_TOL {
            break Termination::TargetReached;
        }
        let remaining = (total_budget - spent).max(0.0);
        if remaining <= BUDGET_EPS {
            break Termination::BudgetExhausted;
        }
        let active: Vec<ElementId> = state
            .iter()
            .filter(|&(_, r)| r < 1.0)
            .map(|(id, _)| id.clone())
            .collect();
        if active.is_empty() {
            break Termination::AllPerfect;
        }

        let damage = utilities_with(&model, &state);
        let payoff = PayoffMatrix::build(&damage, &active)?;
        let solution = solve_game(&payoff)?;
        let pump = match pump_budget(&state, &solution, &costs, remaining) {
            Ok(p) => p,
            Err(GameError::Stalled) => break Termination::Stalled,
            Err(e) => return Err(e),
        };
        spent = if pump.budget_limited {
            total_budget
        } else {
            spent + pump.budget
        };
        let after = model.index(pump.state.values());
        iterations.push(GameIteration {
            index: iterations.len() + 1,
            state_before: state,
            state_after: pump.state.clone(),
            damage,
            payoff,
            solution,
            pumped_budget: pump.budget,
            saturated: pump.saturated,
            system_index_before: index,
            system_index_after: after,
        });
        state = pump.state;
        index = after;
    };

    Ok(GameRunResult {
        iterations,
        budget: total_budget,
        total_spent: spent,
        initial_state,
        initial_index,
        final_state: state,
        final_index: index,
        termination,
    })
}
