//! Prints the RTBS game run and the traditional optimum at budget 1.0.

use reliaforge_core::{
    allocate_traditional, enumerate_paths, rtbs_fixture, run_game_allocation, SolverConfig,
};

fn main() {
    let network = rtbs_fixture();
    let paths = enumerate_paths(&network).unwrap();
    let run = run_game_allocation(&network, &paths, 1.0, 1.0).unwrap();
    for it in &run.iterations {
        let psi: Vec<String> = it
            .solution
            .elements
            .iter()
            .zip(&it.solution.strategy)
            .filter(|(_, &w)| w > 1e-9)
            .map(|(e, w)| format!("{e}={w:.4}"))
            .collect();
        println!(
            "t={} v={:.4} B={:.4} index {:.5} -> {:.5} psi [{}]",
            it.index,
            it.solution.value,
            it.pumped_budget,
            it.system_index_before,
            it.system_index_after,
            psi.join(" ")
        );
    }
    println!(
        "spent {:.6} final {:.6} {:?}",
        run.total_spent, run.final_index, run.termination
    );
    let a = allocate_traditional(&network, &paths, 1.0, &SolverConfig::default()).unwrap();
    println!(
        "traditional {:.6} stationarity {:e} x {:?}",
        a.achieved_index, a.stationarity, a.increments
    );
}
