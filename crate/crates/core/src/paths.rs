//! Simple-path enumeration between generator buses and load buses.

use indexmap::IndexMap;
use thiserror::Error;

use crate::network::{ElementId, Network, OdPair};

/// Default per-pair cap on enumerated paths.
pub const DEFAULT_PATH_CAP: usize = 100_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("more than {cap} simple paths for {od}; raise the cap or simplify the network")]
    TooManyPaths { od: String, cap: usize },
}

/// One simple path: the origin generator followed by the traversed lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub od: OdPair,
    pub buses: Vec<String>,
    pub elements: Vec<ElementId>,
    /// Dense element indices parallel to `elements`.
    pub element_indices: Vec<usize>,
}

impl Path {
    pub fn line_count(&self) -> usize {
        self.elements.len() - 1
    }

    pub fn contains(&self, element: usize) -> bool {
        self.element_indices.contains(&element)
    }
}

/// Paths for every origin/destination pair, in generator-major order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathSet {
    pairs: IndexMap<OdPair, Vec<Path>>,
}

impl PathSet {
    pub fn get(&self, od: &OdPair) -> Option<&[Path]> {
        self.pairs.get(od).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OdPair, &[Path])> + '_ {
        self.pairs.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn od_pairs(&self) -> impl Iterator<Item = &OdPair> + '_ {
        self.pairs.keys()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn counts(&self) -> IndexMap<OdPair, usize> {
        self.pairs
            .iter()
            .map(|(k, v)| (k.clone(), v.len()))
            .collect()
    }

    /// Per-pair lists of dense element-index sets.
    pub fn index_lists(&self) -> Vec<Vec<Vec<usize>>> {
        self.pairs
            .values()
            .map(|paths| paths.iter().map(|p| p.element_indices.clone()).collect())
            .collect()
    }
}

pub fn enumerate_paths(network: &Network) -> Result<PathSet, PathError> {
    enumerate_paths_capped(network, DEFAULT_PATH_CAP)
}

/// Depth-first enumeration of every bus-simple path for each pair.
///
/// Parallel lines between the same two buses yield distinct paths. Paths are
/// ordered lexicographically by bus sequence, where buses compare by their
/// position in the network's bus list, then by line order.
pub fn enumerate_paths_capped(network: &Network, cap: usize) -> Result<PathSet, PathError> {
    let graph = Adjacency::new(network);
    let mut pairs = IndexMap::new();
    for (k, gen) in network.generators().iter().enumerate() {
        let origin = network.bus_index(&gen.bus).expect("validated bus");
        let gen_index = network.generator_index(k);
        for load in network.loads() {
            let od = OdPair {
                origin: gen.element.id.clone(),
                destination: load.id.clone(),
            };
            let target = network.bus_index(&load.bus).expect("validated bus");
            let mut raw =
                graph
                    .simple_paths(origin, target, cap)
                    .ok_or_else(|| PathError::TooManyPaths {
                        od: od.to_string(),
                        cap,
                    })?;
            raw.sort();
            let paths = raw
                .into_iter()
                .map(|(buses, lines)| {
                    let element_indices: Vec<usize> =
                        std::iter::once(gen_index).chain(lines).collect();
                    Path {
                        od: od.clone(),
                        buses: buses.iter().map(|&b| network.buses()[b].clone()).collect(),
                        elements: element_indices
                            .iter()
                            .map(|&i| network.element_ids()[i].clone())
                            .collect(),
                        element_indices,
                    }
                })
                .collect();
            pairs.insert(od, paths);
        }
    }
    Ok(PathSet { pairs })
}

pub fn path_count(paths: &PathSet) -> IndexMap<OdPair, usize> {
    paths.counts()
}

struct Adjacency {
    /// For each bus: (line element index, neighbour bus), sorted by neighbour then line.
    edges: Vec<Vec<(usize, usize)>>,
}

type RawPath = (Vec<usize>, Vec<usize>);

impl Adjacency {
    fn new(network: &Network) -> Self {
        let mut edges = vec![Vec::new(); network.buses().len()];
        for (i, line) in network.lines().iter().enumerate() {
            let a = network.bus_index(&line.from).expect("validated bus");
            let b = network.bus_index(&line.to).expect("validated bus");
            if a == b {
                continue;
            }
            edges[a].push((i, b));
            edges[b].push((i, a));
        }
        for list in &mut edges {
            list.sort_by_key(|&(line, bus)| (bus, line));
        }
        Self { edges }
    }

    /// `None` if more than `cap` paths exist.
    fn simple_paths(&self, origin: usize, target: usize, cap: usize) -> Option<Vec<RawPath>> {
        let mut out = Vec::new();
        let mut visited = vec![false; self.edges.len()];
        let mut buses = vec![origin];
        let mut lines = Vec::new();
        visited[origin] = true;
        if self.dfs(
            origin,
            target,
            cap,
            &mut visited,
            &mut buses,
            &mut lines,
            &mut out,
        ) {
            Some(out)
        } else {
            None
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        at: usize,
        target: usize,
        cap: usize,
        visited: &mut [bool],
        buses: &mut Vec<usize>,
        lines: &mut Vec<usize>,
        out: &mut Vec<RawPath>,
    ) -> bool {
        if at == target {
            if out.len() == cap {
                return false;
            }
            out.push((buses.clone(), lines.clone()));
            return true;
        }
        for &(line, next) in &self.edges[at] {
            if visited[next] {
                continue;
            }
            visited[next] = true;
            buses.push(next);
            lines.push(line);
            let ok = self.dfs(next, target, cap, visited, buses, lines, out);
            buses.pop();
            lines.pop();
            visited[next] = false;
            if !ok {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::rtbs_fixture;

    fn od(g: &str, l: &str) -> OdPair {
        OdPair {
            origin: g.into(),
            destination: l.into(),
        }
    }

    fn two_bus(connected: bool) -> Network {
        let lines = if connected {
            r#"[{"id": "l", "from": "a", "to": "b", "reliability": 0.8}]"#
        } else {
            "[]"
        };
        Network::from_json(&format!(
            r#"{{"buses": ["a", "b"],
                "generators": [{{"id": "g", "bus": "a", "reliability": 0.9}}],
                "lines": {lines},
                "loads": [{{"id": "L", "bus": "b"}}]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn rtbs_g1_l1() {
        let set = enumerate_paths(&rtbs_fixture()).unwrap();
        let seqs: Vec<Vec<String>> = set
            .get(&od("g1", "L1"))
            .unwrap()
            .iter()
            .map(|p| p.buses.clone())
            .collect();
        let expect = [
            vec!["1", "2"],
            vec!["1", "3", "4", "2"],
            vec!["1", "3", "5", "4", "2"],
        ];
        assert_eq!(seqs.len(), 3);
        for (got, want) in seqs.iter().zip(expect.iter()) {
            assert_eq!(got, want);
        }
    }

    #[test]
    fn rtbs_g1_l4_contains_path_four() {
        let set = enumerate_paths(&rtbs_fixture()).unwrap();
        let paths = set.get(&od("g1", "L4")).unwrap();
        assert_eq!(paths.len(), 4);
        let p = paths
            .iter()
            .find(|p| p.buses == ["1", "3", "5", "6"])
            .unwrap();
        let ids: Vec<&str> = p.elements.iter().map(|e| e.as_str()).collect();
        assert_eq!(ids, ["g1", "r1", "r5", "r7"]);
    }

    #[test]
    fn rtbs_colocated_load_is_generator_only() {
        let set = enumerate_paths(&rtbs_fixture()).unwrap();
        let paths = set.get(&od("g2", "L1")).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].line_count(), 0);
        assert_eq!(paths[0].elements, vec![ElementId::from("g2")]);
    }

    #[test]
    fn rtbs_counts() {
        let counts: Vec<usize> = path_count(&enumerate_paths(&rtbs_fixture()).unwrap())
            .values()
            .copied()
            .collect();
        assert_eq!(counts, vec![3, 3, 3, 4, 1, 3, 3, 4]);
    }

    #[test]
    fn two_bus_counts() {
        let c = path_count(&enumerate_paths(&two_bus(true)).unwrap());
        assert_eq!(c.values().copied().collect::<Vec<_>>(), vec![1]);
        let c = path_count(&enumerate_paths(&two_bus(false)).unwrap());
        assert_eq!(c.values().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn parallel_lines_are_distinct_paths() {
        let n = Network::from_json(
            r#"{"buses": ["a", "b"],
                "generators": [{"id": "g", "bus": "a", "reliability": 0.9}],
                "lines": [{"id": "l1", "from": "a", "to": "b", "reliability": 0.8},
                          {"id": "l2", "from": "b", "to": "a", "reliability": 0.7}],
                "loads": [{"id": "L", "bus": "b"}]}"#,
        )
        .unwrap();
        let set = enumerate_paths(&n).unwrap();
        let paths = set.get(&od("g", "L")).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].elements[1].as_str(), "l1");
        assert_eq!(paths[1].elements[1].as_str(), "l2");
    }

    #[test]
    fn cap_aborts() {
        let err = enumerate_paths_capped(&rtbs_fixture(), 3).unwrap_err();
        assert_eq!(
            err,
            PathError::TooManyPaths {
                od: "g1-L4".into(),
                cap: 3
            }
        );
    }
}
