#![allow(dead_code)]

use proptest::prelude::*;
use reliaforge_core::{Element, ElementKind, Generator, Line, Load, Network};

/// Random valid network with at most `max_buses` buses.
pub fn arb_network(max_buses: usize) -> impl Strategy<Value = Network> {
    (2..=max_buses)
        .prop_flat_map(|buses| {
            let line = (0..buses, 0..buses, 0.0..=1.0f64, 0.5..3.0f64);
            let gen = (0..buses, 0.0..=1.0f64);
            (
                Just(buses),
                prop::collection::vec(line, 0..=buses + 3),
                prop::collection::vec(gen, 1..=2),
                prop::collection::vec(0..buses, 1..=3),
            )
        })
        .prop_map(|(buses, lines, gens, loads)| {
            let name = |b: usize| format!("b{b}");
            Network::new(
                (0..buses).map(name).collect(),
                gens.into_iter()
                    .enumerate()
                    .map(|(k, (bus, r))| Generator {
                        element: Element {
                            id: format!("g{k}").as_str().into(),
                            kind: ElementKind::Generator,
                            reliability: r,
                            cost: 2.0,
                        },
                        bus: name(bus),
                    })
                    .collect(),
                lines
                    .into_iter()
                    .enumerate()
                    .map(|(k, (a, b, r, c))| Line {
                        element: Element {
                            id: format!("l{k}").as_str().into(),
                            kind: ElementKind::Line,
                            reliability: r,
                            cost: c,
                        },
                        from: name(a),
                        to: name(b),
                    })
                    .collect(),
                loads
                    .into_iter()
                    .enumerate()
                    .map(|(k, bus)| Load {
                        id: format!("L{k}"),
                        bus: name(bus),
                    })
                    .collect(),
                None,
            )
            .expect("generated network is valid")
        })
}

/// Random reliability vector for `n` elements.
pub fn arb_state(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, n)
}
