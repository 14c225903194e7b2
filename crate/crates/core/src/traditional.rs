//! Nonlinear budget allocation: choose increments `x ≥ 0` with
//! `r0 + x ≤ 1` and `Σ c·x ≤ B` maximizing the system index.
//!
//! The index is smooth but not concave, so the solver is a multi-start
//! projected gradient ascent with a backtracking (Armijo) line search.
//! Projection onto the feasible polytope is exact (see [`project`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::network::{ElementId, Network};
use crate::paths::PathSet;
use crate::reliability::{EvalError, IndexModel, ReliabilityState};

#[derive(Debug, Error, PartialEq)]
pub enum AllocError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("budget {0} must be a nonnegative finite number")]
    InvalidBudget(f64),
    #[error("invalid sweep range: from {from}, to {to}, step {step}")]
    InvalidRange { from: f64, to: f64, step: f64 },
    #[error("solver config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub num_starts: usize,
    pub seed: u64,
    pub optimality_tol: f64,
    /// Target norm of the projected gradient step at the returned point.
    pub kkt_tol: f64,
    /// Stop a start once an accepted step gains less than this.
    pub gain_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            num_starts: 64,
            seed: 42,
            optimality_tol: 1e-6,
            kkt_tol: 1e-6,
            gain_tol: 1e-10,
            max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub ids: Vec<ElementId>,
    pub increments: Vec<f64>,
    pub budget: f64,
    pub spent: f64,
    pub resulting_state: ReliabilityState,
    pub achieved_index: f64,
    /// `‖P(x + ∇f) − x‖` at the returned point.
    pub stationarity: f64,
}

impl Allocation {
    pub fn increment(&self, id: &ElementId) -> Option<f64> {
        self.ids
            .iter()
            .position(|e| e == id)
            .map(|i| self.increments[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub budget: f64,
    pub allocation: Allocation,
}

/// Euclidean projection of `z` onto `{x : 0 ≤ x ≤ upper, costs·x ≤ budget}`.
///
/// The solution is `x_i = clamp(z_i − λ c_i, 0, u_i)` for the smallest
/// `λ ≥ 0` meeting the budget. `costs·x(λ)` is piecewise linear in `λ`, so the
/// multiplier is found exactly between two sorted breakpoints.
pub fn project(z: &[f64], upper: &[f64], costs: &[f64], budget: f64) -> Vec<f64> {
    let at = |lambda: f64| -> Vec<f64> {
        z.iter()
            .zip(upper)
            .zip(costs)
            .map(|((&zi, &ui), &ci)| (zi - lambda * ci).clamp(0.0, ui))
            .collect()
    };
    let spend = |x: &[f64]| -> f64 { x.iter().zip(costs).map(|(a, c)| a * c).sum() };

    let x0 = at(0.0);
    if spend(&x0) <= budget {
        return x0;
    }
    let mut breaks: Vec<f64> = z
        .iter()
        .zip(upper)
        .zip(costs)
        .flat_map(|((&zi, &ui), &ci)| [(zi - ui) / ci, zi / ci])
        .filter(|&l| l > 0.0)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut lo = 0.0;
    let mut lo_spend = spend(&x0);
    for &hi in &breaks {
        let hi_spend = spend(&at(hi));
        if hi_spend <= budget {
            // Linear on [lo, hi].
            let t = (lo_spend - budget) / (lo_spend - hi_spend);
            let lambda = lo + t * (hi - lo);
            let mut x = at(lambda);
            // Guard against round-off pushing spend a hair above budget.
            let over = spend(&x) - budget;
            if over > 0.0 {
                let scale = budget / (budget + over);
                x.iter_mut().for_each(|v| *v *= scale);
            }
            return x;
        }
        lo = hi;
        lo_spend = hi_spend;
    }
    vec![0.0; z.len()]
}

struct Problem<'a> {
    model: &'a IndexModel,
    r0: &'a [f64],
    upper: Vec<f64>,
    costs: &'a [f64],
    budget: f64,
}

impl Problem<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.model.index(&self.reliabilities(x))
    }

    fn reliabilities(&self, x: &[f64]) -> Vec<f64> {
        self.r0
            .iter()
            .zip(x)
            .map(|(r, dx)| (r + dx).min(1.0))
            .collect()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.model.gradient(&self.reliabilities(x))
    }

    fn project(&self, z: &[f64]) -> Vec<f64> {
        project(z, &self.upper, self.costs, self.budget)
    }

    fn stationarity(&self, x: &[f64], g: &[f64]) -> f64 {
        let step: Vec<f64> = x.iter().zip(g).map(|(a, b)| a + b).collect();
        distance(&self.project(&step), x)
    }

    /// Projected gradient ascent from `start`. Returns (x, value, stationarity).
    fn ascend(&self, start: Vec<f64>, config: &SolverConfig) -> (Vec<f64>, f64, f64) {
        const ARMIJO: f64 = 1e-4;
        let mut x = self.project(&start);
        let mut f = self.value(&x);
        let mut step = 1.0;
        let mut g = self.gradient(&x);
        let mut stat = self.stationarity(&x, &g);
        for _ in 0..config.max_iterations {
            if stat <= config.kkt_tol {
                break;
            }
            let mut accepted = None;
            while step > 1e-14 {
                let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
                let xn = self.project(&trial);
                let fn_ = self.value(&xn);
                let predicted: f64 = g
                    .iter()
                    .zip(xn.iter().zip(&x))
                    .map(|(gi, (a, b))| gi * (a - b))
                    .sum();
                if fn_ >= f + ARMIJO * predicted {
                    accepted = Some((xn, fn_));
                    break;
                }
                step *= 0.5;
            }
            let Some((xn, fn_)) = accepted else {
                break;
            };
            let gain = fn_ - f;
            x = xn;
            f = fn_;
            g = self.gradient(&x);
            stat = self.stationarity(&x, &g);
            if gain < config.gain_tol && stat <= config.kkt_tol.max(1e-3 * step) {
                break;
            }
            step = (step * 2.0).min(1e6);
        }
        (x, f, stat)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn validate(budget: f64, config: &SolverConfig) -> Result<(), AllocError> {
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(AllocError::InvalidBudget(budget));
    }
    if config.num_starts == 0 {
        return Err(AllocError::InvalidConfig(
            "num_starts must be positive".into(),
        ));
    }
    Ok(())
}

pub fn allocate_traditional(
    network: &Network,
    paths: &PathSet,
    budget: f64,
    config: &SolverConfig,
) -> Result<Allocation, AllocError> {
    allocate_with_warm_starts(network, paths, budget, config, &[])
}

/// Like [`allocate_traditional`], with extra caller-supplied starting points
/// tried before the seeded random ones.
pub fn allocate_with_warm_starts(
    network: &Network,
    paths: &PathSet,
    budget: f64,
    config: &SolverConfig,
    warm: &[Vec<f64>],
) -> Result<Allocation, AllocError> {
    validate(budget, config)?;
    let model = IndexModel::new(network, paths);
    let r0 = network.initial_reliabilities();
    let costs = network.costs();
    let problem = Problem {
        model: &model,
        r0: &r0,
        upper: r0.iter().map(|r| 1.0 - r).collect(),
        costs: &costs,
        budget,
    };
    let n = r0.len();

    let mut starts: Vec<Vec<f64>> = warm.to_vec();
    starts.push(vec![0.0; n]);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while starts.len() < warm.len() + config.num_starts {
        let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let spend: f64 = w.iter().zip(&costs).map(|(a, c)| a * c).sum();
        starts.push(w.iter().map(|v| v * budget / spend).collect());
    }

    let results: Vec<(Vec<f64>, f64, f64)> = starts
        .into_par_iter()
        .map(|s| problem.ascend(s, config))
        .collect();
    // First start wins exact ties.
    let (x, value, stat) = results
        .into_iter()
        .reduce(|best, cand| if cand.1 > best.1 { cand } else { best })
        .expect("at least one start");

    let resulting = ReliabilityState::from_values(network, problem.reliabilities(&x))?;
    let spent = x.iter().zip(&costs).map(|(a, c)| a * c).sum();
    Ok(Allocation {
        ids: network.element_ids().to_vec(),
        increments: x,
        budget,
        spent,
        resulting_state: resulting,
        achieved_index: value,
        stationarity: stat,
    })
}

/// Budget points `from, from + step, …` up to `to` (inclusive, with a small
/// tolerance for accumulated round-off).
pub fn sweep_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>, AllocError> {
    let bad = || AllocError::InvalidRange { from, to, step };
    if !(from.is_finite() && to.is_finite() && step.is_finite())
        || from < 0.0
        || to < from
        || step <= 0.0
    {
        return Err(bad());
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            let b = from + k as f64 * step;
            (b * 1e12).round() / 1e12
        })
        .collect())
}

/// Allocate at each budget point in turn. Each point is also started from the
/// previous point's optimum (still feasible at a larger budget), which keeps
/// the achieved index nondecreasing along the sweep.
pub fn sweep_budget(
    network: &Network,
    paths: &PathSet,
    from: f64,
    to: f64,
    step: f64,
    config: &SolverConfig,
) -> Result<Vec<SweepPoint>, AllocError> {
    let mut out: Vec<SweepPoint> = Vec::new();
    for budget in sweep_points(from, to, step)? {
        let warm: Vec<Vec<f64>> = out
            .last()
            .map(|p| vec![p.allocation.increments.clone()])
            .unwrap_or_default();
        let allocation = allocate_with_warm_starts(network, paths, budget, config, &warm)?;
        out.push(SweepPoint { budget, allocation });
    }
    Ok(out)
}
