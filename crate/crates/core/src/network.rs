//! Network data model, validation and the JSON interchange format.
//!
//! A [`Network`] is a reliability graph: buses are vertices, lines are
//! undirected edges, generators and loads are attached to buses. Only
//! generators and lines carry a reliability and an improvement cost; loads
//! are pure attachment points.
//!
//! Elements are indexed densely in a fixed order: all lines in file order,
//! followed by all generators in file order. Every per-element vector in this
//! crate ([`crate::ReliabilityState`], gradients, increments) uses that order.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default unit cost of improving a line's reliability.
pub const DEFAULT_LINE_COST: f64 = 1.0;
/// Default unit cost of improving a generator's reliability.
pub const DEFAULT_GENERATOR_COST: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{context} references unknown bus `{bus}`")]
    DanglingBus { context: String, bus: String },
    #[error("duplicate bus id `{0}`")]
    DuplicateBus(String),
    #[error("duplicate element id `{0}`")]
    DuplicateElement(String),
    #[error("duplicate load id `{0}`")]
    DuplicateLoad(String),
    #[error("element `{id}` has reliability {value} outside [0, 1]")]
    ReliabilityOutOfRange { id: String, value: f64 },
    #[error("element `{id}` has nonpositive cost {value}")]
    NonPositiveCost { id: String, value: f64 },
    #[error("budget {0} must be a nonnegative finite number")]
    InvalidBudget(f64),
    #[error("network needs at least one generator")]
    NoGenerators,
    #[error("network needs at least one load")]
    NoLoads,
}

/// Identifier of a generator or a line.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Generator,
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: ElementId,
    pub kind: ElementKind,
    pub reliability: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub element: Element,
    pub bus: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub element: Element,
    pub from: String,
    pub to: String,
}

impl Line {
    /// The bus at the other end of the line, if `bus` is one of its endpoints.
    pub fn opposite(&self, bus: &str) -> Option<&str> {
        if self.from == bus {
            Some(&self.to)
        } else if self.to == bus {
            Some(&self.from)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub id: String,
    pub bus: String,
}

/// An origin (generator) / destination (load) pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OdPair {
    pub origin: ElementId,
    pub destination: String,
}

impl fmt::Display for OdPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.origin, self.destination)
    }
}

/// A validated, immutable network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    buses: Vec<String>,
    generators: Vec<Generator>,
    lines: Vec<Line>,
    loads: Vec<Load>,
    budget: Option<f64>,
    element_ids: Vec<ElementId>,
}

impl Network {
    pub fn new(
        buses: Vec<String>,
        generators: Vec<Generator>,
        lines: Vec<Line>,
        loads: Vec<Load>,
        budget: Option<f64>,
    ) -> Result<Self, NetworkError> {
        let mut bus_set = HashSet::new();
        for bus in &buses {
            if !bus_set.insert(bus.as_str()) {
                return Err(NetworkError::DuplicateBus(bus.clone()));
            }
        }
        if generators.is_empty() {
            return Err(NetworkError::NoGenerators);
        }
        if loads.is_empty() {
            return Err(NetworkError::NoLoads);
        }

        let check_bus = |context: &str, bus: &str| {
            if bus_set.contains(bus) {
                Ok(())
            } else {
                Err(NetworkError::DanglingBus {
                    context: context.to_owned(),
                    bus: bus.to_owned(),
                })
            }
        };

        let mut ids = HashSet::new();
        let elements = lines
            .iter()
            .map(|l| &l.element)
            .chain(generators.iter().map(|g| &g.element));
        for element in elements {
            validate_element(element)?;
            if !ids.insert(element.id.as_str()) {
                return Err(NetworkError::DuplicateElement(element.id.to_string()));
            }
        }
        for g in &generators {
            check_bus(&format!("generator `{}`", g.element.id), &g.bus)?;
        }
        for l in &lines {
            let context = format!("line `{}`", l.element.id);
            check_bus(&context, &l.from)?;
            check_bus(&context, &l.to)?;
        }
        let mut load_ids = HashSet::new();
        for load in &loads {
            check_bus(&format!("load `{}`", load.id), &load.bus)?;
            if !load_ids.insert(load.id.as_str()) {
                return Err(NetworkError::DuplicateLoad(load.id.clone()));
            }
        }
        if let Some(b) = budget {
            if !(b.is_finite() && b >= 0.0) {
                return Err(NetworkError::InvalidBudget(b));
            }
        }

        let element_ids = lines
            .iter()
            .map(|l| l.element.id.clone())
            .chain(generators.iter().map(|g| g.element.id.clone()))
            .collect();
        Ok(Self {
            buses,
            generators,
            lines,
            loads,
            budget,
            element_ids,
        })
    }

    pub fn buses(&self) -> &[String] {
        &self.buses
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    /// Default budget carried by the network file, if any.
    pub fn budget(&self) -> Option<f64> {
        self.budget
    }

    pub fn element_count(&self) -> usize {
        self.element_ids.len()
    }

    /// Element ids in dense index order (lines, then generators).
    pub fn element_ids(&self) -> &[ElementId] {
        &self.element_ids
    }

    pub fn element(&self, index: usize) -> &Element {
        if index < self.lines.len() {
            &self.lines[index].element
        } else {
            &self.generators[index - self.lines.len()].element
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> + '_ {
        (0..self.element_count()).map(move |i| self.element(i))
    }

    pub fn element_index(&self, id: &ElementId) -> Option<usize> {
        self.element_ids.iter().position(|e| e == id)
    }

    /// Dense index of the `k`-th generator.
    pub fn generator_index(&self, k: usize) -> usize {
        self.lines.len() + k
    }

    pub fn bus_index(&self, bus: &str) -> Option<usize> {
        self.buses.iter().position(|b| b == bus)
    }

    pub fn costs(&self) -> Vec<f64> {
        self.elements().map(|e| e.cost).collect()
    }

    pub fn initial_reliabilities(&self) -> Vec<f64> {
        self.elements().map(|e| e.reliability).collect()
    }

    /// All origin/destination pairs, generator-major.
    pub fn od_pairs(&self) -> Vec<OdPair> {
        self.generators
            .iter()
            .flat_map(|g| {
                self.loads.iter().map(move |l| OdPair {
                    origin: g.element.id.clone(),
                    destination: l.id.clone(),
                })
            })
            .collect()
    }

    /// Copy of the network with element reliabilities replaced.
    pub fn with_reliabilities(&self, reliabilities: &[f64]) -> Result<Self, NetworkError> {
        assert_eq!(reliabilities.len(), self.element_count());
        let mut out = self.clone();
        let n_lines = out.lines.len();
        for (i, &r) in reliabilities.iter().enumerate() {
            let element = if i < n_lines {
                &mut out.lines[i].element
            } else {
                &mut out.generators[i - n_lines].element
            };
            element.reliability = r;
            validate_element(element)?;
        }
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let doc: NetworkDocument =
            serde_json::from_str(text).map_err(|e| NetworkError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        doc.into_network()
    }

    pub fn to_json(&self) -> String {
        let doc = NetworkDocument::from(self);
        serde_json::to_string_pretty(&doc).expect("network document is always serializable")
    }
}

fn validate_element(element: &Element) -> Result<(), NetworkError> {
    let r = element.reliability;
    if !(0.0..=1.0).contains(&r) {
        return Err(NetworkError::ReliabilityOutOfRange {
            id: element.id.to_string(),
            value: r,
        });
    }
    if !(element.cost.is_finite() && element.cost > 0.0) {
        return Err(NetworkError::NonPositiveCost {
            id: element.id.to_string(),
            value: element.cost,
        });
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDocument {
    buses: Vec<String>,
    generators: Vec<GeneratorRecord>,
    lines: Vec<LineRecord>,
    loads: Vec<LoadRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    budget: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRecord {
    id: ElementId,
    bus: String,
    reliability: f64,
    #[serde(default = "default_generator_cost")]
    cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineRecord {
    id: ElementId,
    from: String,
    to: String,
    reliability: f64,
    #[serde(default = "default_line_cost")]
    cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadRecord {
    id: String,
    bus: String,
}

fn default_generator_cost() -> f64 {
    DEFAULT_GENERATOR_COST
}

fn default_line_cost() -> f64 {
    DEFAULT_LINE_COST
}

impl NetworkDocument {
    fn into_network(self) -> Result<Network, NetworkError> {
        let generators = self
            .generators
            .into_iter()
            .map(|g| Generator {
                element: Element {
                    id: g.id,
                    kind: ElementKind::Generator,
                    reliability: g.reliability,
                    cost: g.cost,
                },
                bus: g.bus,
            })
            .collect();
        let lines = self
            .lines
            .into_iter()
            .map(|l| Line {
                element: Element {
                    id: l.id,
                    kind: ElementKind::Line,
                    reliability: l.reliability,
                    cost: l.cost,
                },
                from: l.from,
                to: l.to,
            })
            .collect();
        let loads = self
            .loads
            .into_iter()
            .map(|l| Load {
                id: l.id,
                bus: l.bus,
            })
            .collect();
        Network::new(self.buses, generators, lines, loads, self.budget)
    }
}

impl From<&Network> for NetworkDocument {
    fn from(n: &Network) -> Self {
        Self {
            buses: n.buses.clone(),
            generators: n
                .generators
                .iter()
                .map(|g| GeneratorRecord {
                    id: g.element.id.clone(),
                    bus: g.bus.clone(),
                    reliability: g.element.reliability,
                    cost: g.element.cost,
                })
                .collect(),
            lines: n
                .lines
                .iter()
                .map(|l| LineRecord {
                    id: l.element.id.clone(),
                    from: l.from.clone(),
                    to: l.to.clone(),
                    reliability: l.element.reliability,
                    cost: l.element.cost,
                })
                .collect(),
            loads: n
                .loads
                .iter()
                .map(|l| LoadRecord {
                    id: l.id.clone(),
                    bus: l.bus.clone(),
                })
                .collect(),
            budget: n.budget,
        }
    }
}

/// The modified six-bus Roy Billinton test system: two generators, seven
/// lines and four loads, with the initial element reliabilities of the case
/// study.
///
/// The topology is not given explicitly anywhere; it is the unique wiring
/// under which every path product of the case study reproduces (see the
/// `rtbs_path_products` test).
pub fn rtbs_fixture() -> Network {
    let gen = |id: &str, bus: &str, r: f64| Generator {
        element: Element {
            id: id.into(),
            kind: ElementKind::Generator,
            reliability: r,
            cost: DEFAULT_GENERATOR_COST,
        },
        bus: bus.into(),
    };
    let line = |id: &str, from: &str, to: &str, r: f64| Line {
        element: Element {
            id: id.into(),
            kind: ElementKind::Line,
            reliability: r,
            cost: DEFAULT_LINE_COST,
        },
        from: from.into(),
        to: to.into(),
    };
    let load = |id: &str, bus: &str| Load {
        id: id.into(),
        bus: bus.into(),
    };
    Network::new(
        (1..=6).map(|b| b.to_string()).collect(),
        vec![gen("g1", "1", 0.91), gen("g2", "2", 0.85)],
        vec![
            line("r1", "1", "3", 0.897),
            line("r2", "2", "4", 0.797),
            line("r3", "1", "2", 0.805),
            line("r4", "3", "4", 0.909),
            line("r5", "3", "5", 0.966),
            line("r6", "4", "5", 0.617),
            line("r7", "5", "6", 0.9),
        ],
        vec![
            load("L1", "2"),
            load("L2", "3"),
            load("L3", "4"),
            load("L4", "6"),
        ],
        Some(1.0),
    )
    .expect("bundled fixture is valid")
}

/// The fixture as a network document, identical to the shipped `rtbs.json`.
pub fn rtbs_fixture_json() -> String {
    rtbs_fixture().to_json()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "buses": ["a", "b"],
        "generators": [{"id": "g", "bus": "a", "reliability": 0.9, "cost": 2}],
        "lines": [{"id": "l", "from": "a", "to": "b", "reliability": 0.8, "cost": 1}],
        "loads": [{"id": "L", "bus": "b"}]
    }"#;

    #[test]
    fn parses_small_document() {
        let n = Network::from_json(SMALL).unwrap();
        assert_eq!(n.buses().len(), 2);
        assert_eq!(
            n.element_ids(),
            &[ElementId::from("l"), ElementId::from("g")]
        );
        assert_eq!(n.budget(), None);
    }

    #[test]
    fn fixture_shape() {
        let n = rtbs_fixture();
        assert_eq!(n.buses().len(), 6);
        assert_eq!(n.generators().len(), 2);
        assert_eq!(n.lines().len(), 7);
        assert_eq!(n.loads().len(), 4);
        assert_eq!(n.od_pairs().len(), 8);
        let r = n.initial_reliabilities();
        assert_eq!(
            r,
            vec![0.897, 0.797, 0.805, 0.909, 0.966, 0.617, 0.9, 0.91, 0.85]
        );
        assert_eq!(n.costs(), vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn fixture_parses_from_its_own_document() {
        let n = rtbs_fixture();
        assert_eq!(Network::from_json(&rtbs_fixture_json()).unwrap(), n);
    }

    #[test]
    fn shipped_rtbs_json_matches_fixture() {
        let shipped = include_str!("../../../rtbs.json");
        assert_eq!(Network::from_json(shipped).unwrap(), rtbs_fixture());
    }

    #[test]
    fn dangling_bus() {
        let doc = SMALL.replace(r#""to": "b""#, r#""to": "bus9""#);
        let err = Network::from_json(&doc).unwrap_err();
        assert!(matches!(err, NetworkError::DanglingBus { ref bus, .. } if bus == "bus9"));
    }

    #[test]
    fn reliability_out_of_range() {
        let doc = SMALL.replace("0.8", "1.2");
        let err = Network::from_json(&doc).unwrap_err();
        assert!(matches!(err, NetworkError::ReliabilityOutOfRange { value, .. } if value == 1.2));
    }

    #[test]
    fn nonpositive_cost() {
        let doc = SMALL.replace(r#""cost": 1"#, r#""cost": 0"#);
        assert!(matches!(
            Network::from_json(&doc),
            Err(NetworkError::NonPositiveCost { .. })
        ));
    }

    #[test]
    fn duplicate_element() {
        let doc = SMALL.replace(r#""id": "l""#, r#""id": "g""#);
        assert_eq!(
            Network::from_json(&doc),
            Err(NetworkError::DuplicateElement("g".into()))
        );
    }

    #[test]
    fn unknown_key_rejected() {
        let doc = SMALL.replace(r#""loads""#, r#""extra": 1, "loads""#);
        assert!(matches!(
            Network::from_json(&doc),
            Err(NetworkError::Syntax { .. })
        ));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = Network::from_json("{\n  \"buses\": [\n  oops").unwrap_err();
        match err {
            NetworkError::Syntax { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_generators_and_loads() {
        let no_gen = r#"{"buses": ["a"], "generators": [], "lines": [], "loads": [{"id": "L", "bus": "a"}]}"#;
        assert_eq!(Network::from_json(no_gen), Err(NetworkError::NoGenerators));
        let no_load = r#"{"buses": ["a"], "generators": [{"id": "g", "bus": "a", "reliability": 1}], "lines": [], "loads": []}"#;
        assert_eq!(Network::from_json(no_load), Err(NetworkError::NoLoads));
    }

    #[test]
    fn costs_default_by_kind() {
        let doc = r#"{"buses": ["a", "b"],
            "generators": [{"id": "g", "bus": "a", "reliability": 0.5}],
            "lines": [{"id": "l", "from": "a", "to": "b", "reliability": 0.5}],
            "loads": [{"id": "L", "bus": "b"}], "budget": 0.25}"#;
        let n = Network::from_json(doc).unwrap();
        assert_eq!(n.costs(), vec![DEFAULT_LINE_COST, DEFAULT_GENERATOR_COST]);
        assert_eq!(n.budget(), Some(0.25));
    }

    #[test]
    fn negative_budget_rejected() {
        let doc = SMALL.trim_end().trim_end_matches('}').to_owned() + r#", "budget": -1}"#;
        assert_eq!(
            Network::from_json(&doc),
            Err(NetworkError::InvalidBudget(-1.0))
        );
    }
}
