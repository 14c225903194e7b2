//! Subcommand bodies. Each one computes, writes its data files into the output
//! directory and returns the text destined for standard output.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use reliaforge_core::{
    allocate_traditional, enumerate_paths, run_game_allocation, sweep_budget, system_reliability,
    Allocation, GameRunResult, Network, PathSet, ReliabilityState, SolverConfig,
};
use serde_json::{json, Map, Value};

use crate::report::{emit_json, emit_table_csv, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Workspace {
    pub network: Network,
    pub paths: PathSet,
    pub out_dir: PathBuf,
}

impl Workspace {
    pub fn load(network_file: &Path, out_dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(network_file)
            .with_context(|| format!("cannot read {}", network_file.display()))?;
        let network = Network::from_json(&text)
            .with_context(|| format!("invalid network file {}", network_file.display()))?;
        let paths = enumerate_paths(&network)?;
        fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create {}", out_dir.display()))?;
        Ok(Self {
            network,
            paths,
            out_dir: out_dir.to_owned(),
        })
    }

    fn file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write(&self, table: &Table, name: &str) -> Result<()> {
        emit_table_csv(table, &self.file(name))?;
        Ok(())
    }

    fn write_json(&self, value: &Value, name: &str) -> Result<()> {
        emit_json(value, &self.file(name))?;
        Ok(())
    }

    fn ids(&self) -> Vec<String> {
        self.network
            .element_ids()
            .iter()
            .map(|e| e.to_string())
            .collect()
    }

    /// Resolve the budget flag against the network's default.
    pub fn budget(&self, flag: Option<f64>) -> Result<f64> {
        flag.or(self.network.budget())
            .context("no budget given: pass --budget or set `budget` in the network file")
    }
}

fn csv_text(table: &Table) -> Result<String> {
    Ok(String::from_utf8(table.to_csv()?)?)
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize") + "\n"
}

pub fn paths(ctx: &Workspace) -> Result<String> {
    let mut table = Table::new([
        "odOrigin",
        "odDestination",
        "pathIndex",
        "busSequence",
        "elements",
    ]);
    for (od, list) in ctx.paths.iter() {
        for (k, p) in list.iter().enumerate() {
            let elements: Vec<&str> = p.elements.iter().map(|e| e.as_str()).collect();
            table.push(vec![
                od.origin.to_string().into(),
                od.destination.clone().into(),
                (k + 1).into(),
                p.buses.join("-").into(),
                elements.join(",").into(),
            ]);
        }
    }
    ctx.write(&table, "paths.csv")?;
    csv_text(&table)
}

pub fn evaluate(ctx: &Workspace, format: Format) -> Result<String> {
    let state = ReliabilityState::initial(&ctx.network);
    let eval = system_reliability(&ctx.network, &ctx.paths, &state)?;

    let widest = eval
        .ods
        .iter()
        .map(|o| o.path_reliabilities.len())
        .max()
        .unwrap_or(0);
    let mut header = vec!["generator".to_owned(), "load".to_owned()];
    header.extend((1..=widest).map(|k| format!("p{k}")));
    let mut per_path = Table::new(header);
    for o in &eval.ods {
        let mut row: Vec<Cell> = vec![
            o.od.origin.to_string().into(),
            o.od.destination.clone().into(),
        ];
        row.extend(o.path_reliabilities.iter().map(|&p| Cell::Num(p)));
        row.resize(widest + 2, Cell::Empty);
        per_path.push(row);
    }
    ctx.write(&per_path, "path_reliability.csv")?;

    let loads: Vec<&str> = ctx.network.loads().iter().map(|l| l.id.as_str()).collect();
    let mut header = vec!["generator"];
    header.extend(&loads);
    let mut per_od = Table::new(header);
    for g in ctx.network.generators() {
        let mut row: Vec<Cell> = vec![g.element.id.to_string().into()];
        for o in eval.ods.iter().filter(|o| o.od.origin == g.element.id) {
            row.push(o.reliability.into());
        }
        per_od.push(row);
    }
    ctx.write(&per_od, "od_reliability.csv")?;

    Ok(match format {
        Format::Csv => format!("{:.6}\n", eval.system_index),
        Format::Json => {
            let ods: Map<String, Value> = eval
                .ods
                .iter()
                .map(|o| (o.od.to_string(), json!(o.reliability)))
                .collect();
            pretty(&json!({ "systemIndex": eval.system_index, "odReliabilities": ods }))
        }
    })
}

fn allocation_json(ctx: &Workspace, a: &Allocation) -> Value {
    let increments: Map<String, Value> = ctx
        .ids()
        .into_iter()
        .zip(&a.increments)
        .map(|(id, &x)| (id, json!(x)))
        .collect();
    let reliabilities: Map<String, Value> = a
        .resulting_state
        .iter()
        .map(|(id, r)| (id.to_string(), json!(r)))
        .collect();
    json!({
        "budget": a.budget,
        "spent": a.spent,
        "achievedIndex": a.achieved_index,
        "stationarity": a.stationarity,
        "increments": increments,
        "reliabilities": reliabilities,
    })
}

pub fn allocate_traditional_cmd(
    ctx: &Workspace,
    budget: f64,
    config: &SolverConfig,
    format: Format,
) -> Result<String> {
    let a = allocate_traditional(&ctx.network, &ctx.paths, budget, config)?;
    let mut table = Table::new(["element", "initial", "increment", "resulting"]);
    for (i, (id, r)) in a.resulting_state.iter().enumerate() {
        table.push(vec![
            id.to_string().into(),
            ctx.network.element(i).reliability.into(),
            a.increments[i].into(),
            r.into(),
        ]);
    }
    ctx.write(&table, "traditional_elements.csv")?;
    let summary = allocation_json(ctx, &a);
    ctx.write_json(&summary, "traditional_allocation.json")?;
    Ok(match format {
        Format::Json => pretty(&summary),
        Format::Csv => csv_text(&table)?,
    })
}

pub fn sweep(
    ctx: &Workspace,
    from: f64,
    to: f64,
    step: f64,
    config: &SolverConfig,
) -> Result<String> {
    let points = sweep_budget(&ctx.network, &ctx.paths, from, to, step, config)?;
    let ids = ctx.ids();
    let ods: Vec<String> = ctx.paths.od_pairs().map(|o| o.to_string()).collect();

    let mut index = Table::new(["budget", "spent", "systemIndex"]);
    let mut header = vec!["budget".to_owned()];
    header.extend(ods.iter().cloned());
    let mut per_od = Table::new(header);
    let mut header = vec!["budget".to_owned()];
    header.extend(ids.iter().cloned());
    let mut per_element = Table::new(header);

    for p in &points {
        let a = &p.allocation;
        index.push(vec![
            p.budget.into(),
            a.spent.into(),
            a.achieved_index.into(),
        ]);
        let eval = system_reliability(&ctx.network, &ctx.paths, &a.resulting_state)?;
        let mut row = vec![Cell::Num(p.budget)];
        row.extend(eval.ods.iter().map(|o| Cell::Num(o.reliability)));
        per_od.push(row);
        let mut row = vec![Cell::Num(p.budget)];
        row.extend(a.resulting_state.values().iter().map(|&r| Cell::Num(r)));
        per_element.push(row);
    }
    ctx.write(&index, "sweep_index.csv")?;
    ctx.write(&per_od, "sweep_od.csv")?;
    ctx.write(&per_element, "sweep_elements.csv")?;
    csv_text(&index)
}

fn game_summary(run: &GameRunResult) -> Value {
    let finals: Map<String, Value> = run
        .final_state
        .iter()
        .map(|(id, r)| (id.to_string(), json!(r)))
        .collect();
    let budgets: Vec<f64> = run.iterations.iter().map(|i| i.pumped_budget).collect();
    json!({
        "budget": run.budget,
        "totalSpent": run.total_spent,
        "initialIndex": run.initial_index,
        "finalIndex": run.final_index,
        "iterations": run.iterations.len(),
        "iterationBudgets": budgets,
        "termination": format!("{:?}", run.termination),
        "finalReliabilities": finals,
    })
}

pub fn iteration_table(ids: &[String], run: &GameRunResult) -> Table {
    let mut header: Vec<String> = [
        "t",
        "budget",
        "cumulativeBudget",
        "indexBefore",
        "indexAfter",
        "gameValue",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for prefix in ["r0_", "damaged_", "y_", "psi_", "r_"] {
        header.extend(ids.iter().map(|id| format!("{prefix}{id}")));
    }
    let mut table = Table::new(header);
    let mut cumulative = 0.0;
    for it in &run.iterations {
        cumulative += it.pumped_budget;
        let mut row: Vec<Cell> = vec![
            it.index.into(),
            it.pumped_budget.into(),
            cumulative.into(),
            it.system_index_before.into(),
            it.system_index_after.into(),
            it.solution.value.into(),
        ];
        row.extend(it.state_before.values().iter().map(|&v| Cell::Num(v)));
        row.extend(it.damage.damaged.iter().map(|&v| Cell::Num(v)));
        row.extend(it.damage.utilities.iter().map(|&v| Cell::Num(v)));
        row.extend(
            it.state_before
                .ids()
                .iter()
                .map(|id| Cell::Num(it.solution.weight(id))),
        );
        row.extend(it.state_after.values().iter().map(|&v| Cell::Num(v)));
        table.push(row);
    }
    table
}

fn cumulative_table(ids: &[String], run: &GameRunResult) -> Table {
    let mut header = vec!["t".to_owned(), "cumulativeBudget".to_owned()];
    header.extend(ids.iter().map(|id| format!("improvement_{id}")));
    let mut table = Table::new(header);
    let start = run.initial_state.values();
    let mut cumulative = 0.0;
    for it in &run.iterations {
        cumulative += it.pumped_budget;
        let mut row: Vec<Cell> = vec![it.index.into(), cumulative.into()];
        row.extend(
            it.state_after
                .values()
                .iter()
                .zip(start)
                .map(|(a, b)| Cell::Num(a - b)),
        );
        table.push(row);
    }
    table
}

pub fn allocate_game(ctx: &Workspace, budget: f64, target: f64, format: Format) -> Result<String> {
    let run = run_game_allocation(&ctx.network, &ctx.paths, budget, target)?;
    let ids = ctx.ids();
    let iterations = iteration_table(&ids, &run);
    ctx.write(&iterations, "game_iterations.csv")?;
    ctx.write(&cumulative_table(&ids, &run), "game_cumulative.csv")?;
    let summary = game_summary(&run);
    ctx.write_json(&summary, "game_summary.json")?;
    Ok(match format {
        Format::Json => pretty(&summary),
        Format::Csv => csv_text(&iterations)?,
    })
}

pub fn compare(
    ctx: &Workspace,
    budget: f64,
    target: f64,
    config: &SolverConfig,
    format: Format,
) -> Result<String> {
    let traditional = allocate_traditional(&ctx.network, &ctx.paths, budget, config)?;
    let game = run_game_allocation(&ctx.network, &ctx.paths, budget, target)?;
    let mut table = Table::new([
        "element",
        "initial",
        "traditional",
        "game",
        "traditionalIncrement",
        "gameIncrement",
    ]);
    for (i, id) in ctx.ids().into_iter().enumerate() {
        let initial = ctx.network.element(i).reliability;
        let t = traditional.resulting_state.values()[i];
        let g = game.final_state.values()[i];
        table.push(vec![
            id.into(),
            initial.into(),
            t.into(),
            g.into(),
            (t - initial).into(),
            (g - initial).into(),
        ]);
    }
    ctx.write(&table, "compare.csv")?;
    let summary = json!({
        "budget": budget,
        "traditional": allocation_json(ctx, &traditional),
        "game": game_summary(&game),
    });
    ctx.write_json(&summary, "compare_summary.json")?;
    Ok(match format {
        Format::Json => pretty(&summary),
        Format::Csv => csv_text(&table)?,
    })
}
