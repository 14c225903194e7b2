//! Reliability-improvement budget allocation for power networks.
//!
//! A network is treated as a reliability graph: generators and lines fail
//! independently, and a load is served by a generator while at least one
//! simple path between them is fully up. The system index is the mean
//! origin/destination reliability over all generator/load pairs.
//!
//! Two allocators spend a budget on reliability increments:
//!
//! * [`traditional`]: multi-start projected gradient ascent on the index.
//! * [`game`]: an iterated zero-sum game between the planner and nature,
//!   each round solved as a linear program by the [`lp`] simplex engine.
//!
//! ```
//! use reliaforge_core::{enumerate_paths, rtbs_fixture, system_reliability, ReliabilityState};
//!
//! let network = rtbs_fixture();
//! let paths = enumerate_paths(&network).unwrap();
//! let eval = system_reliability(&network, &paths, &ReliabilityState::initial(&network)).unwrap();
//! assert!((eval.system_index - 0.917).abs() < 1e-3);
//! ```

pub mod game;
pub mod lp;
pub mod network;
pub mod paths;
pub mod reliability;
pub mod traditional;

pub use game::{
    damage_utilities, damaged_index, pump_budget, run_game_allocation, solve_game,
    solve_matrix_game, DamageUtilities, GameError, GameIteration, GameRunResult, GameSolution,
    PayoffMatrix, Pump, Termination,
};
pub use lp::{simplex_solve, LinearProgram, LpError, LpSolution, Sense};
pub use network::{
    rtbs_fixture, rtbs_fixture_json, Element, ElementId, ElementKind, Generator, Line, Load,
    Network, NetworkError, OdPair,
};
pub use paths::{enumerate_paths, enumerate_paths_capped, path_count, Path, PathError, PathSet};
pub use reliability::{
    exact_od_reliability, od_reliability, path_reliability, system_gradient, system_reliability,
    EvalError, Evaluation, IndexModel, OdEvaluation, ReliabilityState,
};
pub use traditional::{
    allocate_traditional, sweep_budget, AllocError, Allocation, SolverConfig, SweepPoint,
};
