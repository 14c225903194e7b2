//! Path, origin/destination and system reliability.
//!
//! A path is up when all of its elements are up, so its reliability is the
//! product of the element reliabilities. The paths of one pair are combined as
//! if they were independent parallel branches:
//!
//! ```text
//! R_od = 1 - (1 - p_1)(1 - p_2)...(1 - p_n)
//! ```
//!
//! and the system index is the plain mean of all `R_od`. Paths of the same pair
//! usually share elements (at least the generator), so `R_od` is an
//! approximation of the true two-terminal reliability; the exact value is
//! available from [`exact_od_reliability`] for small networks.

use thiserror::Error;

use crate::network::{ElementId, Network, OdPair};
use crate::paths::{Path, PathSet};

/// Upper bound on element count for [`exact_od_reliability`].
pub const MAX_EXACT_ELEMENTS: usize = 25;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("unknown origin/destination pair `{0}`")]
    UnknownOdPair(OdPair),
    #[error("paths belong to different origin/destination pairs ({0} and {1})")]
    MixedOdPairs(OdPair, OdPair),
    #[error("state enumeration over {elements} elements exceeds the limit of {max}")]
    TooLargeForEnumeration { elements: usize, max: usize },
    #[error("state has {got} reliabilities, network has {expected} elements")]
    StateMismatch { expected: usize, got: usize },
    #[error("reliability {value} of `{id}` is outside [0, 1]")]
    OutOfRange { id: ElementId, value: f64 },
}

/// Current reliability of every element, in the network's dense element order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityState {
    ids: Vec<ElementId>,
    values: Vec<f64>,
}

impl ReliabilityState {
    pub fn initial(network: &Network) -> Self {
        Self {
            ids: network.element_ids().to_vec(),
            values: network.initial_reliabilities(),
        }
    }

    pub fn from_values(network: &Network, values: Vec<f64>) -> Result<Self, EvalError> {
        if values.len() != network.element_count() {
            return Err(EvalError::StateMismatch {
                expected: network.element_count(),
                got: values.len(),
            });
        }
        let ids = network.element_ids().to_vec();
        if let Some((id, &value)) = ids
            .iter()
            .zip(&values)
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(EvalError::OutOfRange {
                id: id.clone(),
                value,
            });
        }
        Ok(Self { ids, values })
    }

    pub fn get(&self, id: &ElementId) -> Option<f64> {
        self.index_of(id).map(|i| self.values[i])
    }

    pub fn index_of(&self, id: &ElementId) -> Option<usize> {
        self.ids.iter().position(|e| e == id)
    }

    pub fn ids(&self) -> &[ElementId] {
        &self.ids
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy with the element at dense index `index` set to `value`.
    pub fn with_value(&self, index: usize, value: f64) -> Self {
        let mut out = self.clone();
        out.values[index] = value;
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ElementId, f64)> + '_ {
        self.ids.iter().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdEvaluation {
    pub od: OdPair,
    pub path_reliabilities: Vec<f64>,
    pub reliability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub ods: Vec<OdEvaluation>,
    pub system_index: f64,
}

impl Evaluation {
    pub fn od_reliability(&self, od: &OdPair) -> Option<f64> {
        self.ods.iter().find(|o| &o.od == od).map(|o| o.reliability)
    }

    pub fn path_reliability(&self, od: &OdPair, path_index: usize) -> Option<f64> {
        self.ods
            .iter()
            .find(|o| &o.od == od)
            .and_then(|o| o.path_reliabilities.get(path_index).copied())
    }
}

pub fn path_reliability(path: &Path, state: &ReliabilityState) -> Result<f64, EvalError> {
    path.elements.iter().try_fold(1.0, |acc, id| {
        state
            .get(id)
            .map(|r| acc * r)
            .ok_or_else(|| EvalError::UnknownElement(id.clone()))
    })
}

pub fn od_reliability(paths: &[Path], state: &ReliabilityState) -> Result<f64, EvalError> {
    if let Some(first) = paths.first() {
        if let Some(other) = paths.iter().find(|p| p.od != first.od) {
            return Err(EvalError::MixedOdPairs(first.od.clone(), other.od.clone()));
        }
    }
    let reliabilities = paths
        .iter()
        .map(|p| path_reliability(p, state))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(combine_parallel(&reliabilities))
}

pub fn system_reliability(
    network: &Network,
    paths: &PathSet,
    state: &ReliabilityState,
) -> Result<Evaluation, EvalError> {
    check_state(network, state)?;
    let mut ods = Vec::with_capacity(paths.len());
    for (od, list) in paths.iter() {
        let path_reliabilities = list
            .iter()
            .map(|p| path_reliability(p, state))
            .collect::<Result<Vec<_>, _>>()?;
        let reliability = combine_parallel(&path_reliabilities);
        ods.push(OdEvaluation {
            od: od.clone(),
            path_reliabilities,
            reliability,
        });
    }
    let system_index = mean(ods.iter().map(|o| o.reliability), ods.len());
    Ok(Evaluation { ods, system_index })
}

/// Partial derivatives of the system index with respect to every element
/// reliability, in dense element order.
pub fn system_gradient(
    network: &Network,
    paths: &PathSet,
    state: &ReliabilityState,
) -> Result<Vec<f64>, EvalError> {
    check_state(network, state)?;
    Ok(IndexModel::new(network, paths).gradient(state.values()))
}

/// Exact probability that the destination load is connected to the origin
/// generator, by enumerating every up/down state of the generator and the
/// lines. Other generators cannot affect the pair and are summed out.
pub fn exact_od_reliability(
    network: &Network,
    od: &OdPair,
    state: &ReliabilityState,
) -> Result<f64, EvalError> {
    check_state(network, state)?;
    let total = network.element_count();
    if total > MAX_EXACT_ELEMENTS {
        return Err(EvalError::TooLargeForEnumeration {
            elements: total,
            max: MAX_EXACT_ELEMENTS,
        });
    }
    let unknown = || EvalError::UnknownOdPair(od.clone());
    let gen_pos = network
        .generators()
        .iter()
        .position(|g| g.element.id == od.origin)
        .ok_or_else(unknown)?;
    let load = network
        .loads()
        .iter()
        .find(|l| l.id == od.destination)
        .ok_or_else(unknown)?;
    let origin = network
        .bus_index(&network.generators()[gen_pos].bus)
        .expect("validated bus");
    let target = network.bus_index(&load.bus).expect("validated bus");
    let gen_r = state.values()[network.generator_index(gen_pos)];

    let ends: Vec<(usize, usize)> = network
        .lines()
        .iter()
        .map(|l| {
            (
                network.bus_index(&l.from).expect("validated bus"),
                network.bus_index(&l.to).expect("validated bus"),
            )
        })
        .collect();
    let line_r = &state.values()[..ends.len()];
    let n_buses = network.buses().len();

    let mut connected = 0.0;
    let mut reach = vec![false; n_buses];
    for mask in 0u64..(1u64 << ends.len()) {
        let mut prob = 1.0;
        for (i, &r) in line_r.iter().enumerate() {
            prob *= if mask >> i & 1 == 1 { r } else { 1.0 - r };
        }
        if prob == 0.0 {
            continue;
        }
        reach.iter_mut().for_each(|b| *b = false);
        reach[origin] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for (i, &(a, b)) in ends.iter().enumerate() {
                if mask >> i & 1 == 1 && reach[a] != reach[b] {
                    reach[a] = true;
                    reach[b] = true;
                    changed = true;
                }
            }
        }
        if reach[target] {
            connected += prob;
        }
    }
    Ok(gen_r * connected)
}

fn check_state(network: &Network, state: &ReliabilityState) -> Result<(), EvalError> {
    if state.len() != network.element_count() {
        return Err(EvalError::StateMismatch {
            expected: network.element_count(),
            got: state.len(),
        });
    }
    if let Some(id) = network
        .element_ids()
        .iter()
        .zip(state.ids())
        .find_map(|(a, b)| (a != b).then_some(b))
    {
        return Err(EvalError::UnknownElement(id.clone()));
    }
    Ok(())
}

fn combine_parallel(path_reliabilities: &[f64]) -> f64 {
    match path_reliabilities {
        [single] => *single,
        many => 1.0 - many.iter().map(|p| 1.0 - p).product::<f64>(),
    }
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    values.sum::<f64>() / n as f64
}

/// The system index compiled down to element-index lists, for the allocators'
/// inner loops. Works on raw reliability slices in dense element order.
#[derive(Debug, Clone)]
pub struct IndexModel {
    ods: Vec<Vec<Vec<usize>>>,
    elements: usize,
}

impl IndexModel {
    pub fn new(network: &Network, paths: &PathSet) -> Self {
        Self {
            ods: paths.index_lists(),
            elements: network.element_count(),
        }
    }

    pub fn element_count(&self) -> usize {
        self.elements
    }

    pub fn od_count(&self) -> usize {
        self.ods.len()
    }

    pub fn od_reliabilities(&self, r: &[f64]) -> Vec<f64> {
        self.ods
            .iter()
            .map(|paths| {
                let path_r: Vec<f64> = paths
                    .iter()
                    .map(|p| p.iter().map(|&i| r[i]).product::<f64>())
                    .collect();
                combine_parallel(&path_r)
            })
            .collect()
    }

    pub fn index(&self, r: &[f64]) -> f64 {
        let ods = self.od_reliabilities(r);
        mean(ods.iter().copied(), ods.len())
    }

    /// Index with element `victim` forced to zero reliability.
    pub fn index_without(&self, r: &[f64], victim: usize) -> f64 {
        let mut tmp = r.to_vec();
        tmp[victim] = 0.0;
        self.index(&tmp)
    }

    pub fn gradient(&self, r: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.elements];
        if self.ods.is_empty() {
            return grad;
        }
        let scale = 1.0 / self.ods.len() as f64;
        let mut path_r = Vec::new();
        for paths in &self.ods {
            path_r.clear();
            path_r.extend(
                paths
                    .iter()
                    .map(|p| p.iter().map(|&i| r[i]).product::<f64>()),
            );
            for (k, p) in paths.iter().enumerate() {
                // Probability that every other path of the pair is down.
                let others: f64 = path_r
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(_, q)| 1.0 - q)
                    .product();
                for (pos, &i) in p.iter().enumerate() {
                    let rest: f64 = p
                        .iter()
                        .enumerate()
                        .filter(|&(q, _)| q != pos)
                        .map(|(_, &j)| r[j])
                        .product();
                    grad[i] += scale * rest * others;
                }
            }
        }
        grad
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::rtbs_fixture;
    use crate::paths::enumerate_paths;
    use approx::assert_abs_diff_eq;

    fn od(g: &str, l: &str) -> OdPair {
        OdPair {
            origin: g.into(),
            destination: l.into(),
        }
    }

    fn single_line() -> Network {
        Network::from_json(
            r#"{"buses": ["a", "b"],
                "generators": [{"id": "g", "bus": "a", "reliability": 0.5}],
                "lines": [{"id": "l", "from": "a", "to": "b", "reliability": 1.0},
                          {"id": "spare", "from": "b", "to": "b", "reliability": 0.3}],
                "loads": [{"id": "L", "bus": "b"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn path_four_product() {
        let n = rtbs_fixture();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::initial(&n);
        let p = set
            .get(&od("g1", "L4"))
            .unwrap()
            .iter()
            .find(|p| p.buses == ["1", "3", "5", "6"])
            .unwrap();
        assert_abs_diff_eq!(path_reliability(p, &s).unwrap(), 0.710, epsilon = 1e-3);
    }

    #[test]
    fn generator_only_path() {
        let n = rtbs_fixture();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::initial(&n);
        let paths = set.get(&od("g2", "L1")).unwrap();
        assert_eq!(path_reliability(&paths[0], &s).unwrap(), 0.85);
        assert_eq!(od_reliability(paths, &s).unwrap(), 0.85);
    }

    #[test]
    fn zero_element_annihilates_path() {
        let n = rtbs_fixture();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::initial(&n).with_value(0, 0.0);
        for (_, paths) in set.iter() {
            for p in paths.iter().filter(|p| p.contains(0)) {
                assert_eq!(path_reliability(p, &s).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn g1_l4_reliability() {
        let n = rtbs_fixture();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::initial(&n);
        let r = od_reliability(set.get(&od("g1", "L4")).unwrap(), &s).unwrap();
        assert_abs_diff_eq!(r, 0.938, epsilon = 1e-3);
    }

    #[test]
    fn empty_path_list_is_zero() {
        let s = ReliabilityState::initial(&rtbs_fixture());
        assert_eq!(od_reliability(&[], &s).unwrap(), 0.0);
    }

    #[test]
    fn mixed_pairs_rejected() {
        let n = rtbs_fixture();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::initial(&n);
        let mixed = vec![
            set.get(&od("g1", "L1")).unwrap()[0].clone(),
            set.get(&od("g1", "L2")).unwrap()[0].clone(),
        ];
        assert!(matches!(
            od_reliability(&mixed, &s),
            Err(EvalError::MixedOdPairs(..))
        ));
    }

    #[test]
    fn unknown_element_in_path() {
        let n = rtbs_fixture();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::initial(&n);
        let mut p = set.get(&od("g1", "L1")).unwrap()[0].clone();
        p.elements.push("r99".into());
        assert_eq!(
            path_reliability(&p, &s),
            Err(EvalError::UnknownElement("r99".into()))
        );
    }

    #[test]
    fn initial_system_index() {
        let n = rtbs_fixture();
        let set = enumerate_paths(&n).unwrap();
        let e = system_reliability(&n, &set, &ReliabilityState::initial(&n)).unwrap();
        assert_abs_diff_eq!(e.system_index, 0.917, epsilon = 1e-3);
        let sum: f64 = e.ods.iter().map(|o| o.reliability).sum();
        assert_eq!(e.system_index, sum / 8.0);
    }

    #[test]
    fn perfect_elements_give_unit_index() {
        let n = rtbs_fixture();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::from_values(&n, vec![1.0; 9]).unwrap();
        assert_eq!(system_reliability(&n, &set, &s).unwrap().system_index, 1.0);
    }

    #[test]
    fn gradient_edge_cases() {
        let n = single_line();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::initial(&n);
        let g = system_gradient(&n, &set, &s).unwrap();
        // d/dr_g of r_g * r_l with r_l = 1
        assert_eq!(g[2], 1.0);
        assert_eq!(g[1], 0.0);
        assert_eq!(g[0], 0.5);
    }

    #[test]
    fn exact_matches_formula_on_single_path() {
        let n = single_line();
        let set = enumerate_paths(&n).unwrap();
        let s = ReliabilityState::from_values(&n, vec![0.7, 0.3, 0.6]).unwrap();
        let pair = od("g", "L");
        let exact = exact_od_reliability(&n, &pair, &s).unwrap();
        let formula = od_reliability(set.get(&pair).unwrap(), &s).unwrap();
        assert_abs_diff_eq!(exact, formula, epsilon = 1e-15);
    }

    #[test]
    fn exact_all_perfect() {
        let n = rtbs_fixture();
        let s = ReliabilityState::from_values(&n, vec![1.0; 9]).unwrap();
        for pair in n.od_pairs() {
            assert_eq!(exact_od_reliability(&n, &pair, &s).unwrap(), 1.0);
        }
    }

    #[test]
    fn state_mismatch() {
        let n = rtbs_fixture();
        assert_eq!(
            ReliabilityState::from_values(&n, vec![0.5; 3]),
            Err(EvalError::StateMismatch {
                expected: 9,
                got: 3
            })
        );
        assert!(matches!(
            ReliabilityState::from_values(&n, vec![1.5; 9]),
            Err(EvalError::OutOfRange { .. })
        ));
    }
}
