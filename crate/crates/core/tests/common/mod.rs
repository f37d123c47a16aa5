#![allow(dead_code)]

use qnas_core::{Circuit, Gate, GateType::*};

/// Three 4-qubit circuits: `a`; `b` = `a` with an extra RX on wire 1 and
/// the CRZ on (2,3) doubled; `c` = `a` with that CRZ swapped for CRY.
pub fn similar_triple() -> (Circuit, Circuit, Circuit) {
    let head = vec![
        Gate::single(H, 0),
        Gate::single(RX, 0),
        Gate::single(RY, 1),
        Gate::single(RZ, 2),
        Gate::single(RX, 3),
        Gate::pair(CRX, 0, 1),
    ];
    let tail = vec![Gate::pair(CRX, 1, 2)];
    let build = |mid: Vec<Gate>| {
        let gates = head.iter().chain(&mid).chain(&tail).copied().collect();
        Circuit::new(4, gates).unwrap()
    };
    let a = build(vec![Gate::pair(CRZ, 2, 3)]);
    let b = build(vec![Gate::single(RX, 1), Gate::pair(CRZ, 2, 3), Gate::pair(CRZ, 2, 3)]);
    let c = build(vec![Gate::pair(CRY, 2, 3)]);
    (a, b, c)
}
