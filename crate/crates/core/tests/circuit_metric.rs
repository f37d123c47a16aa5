mod common;

use proptest::prelude::*;
use qnas_core::circuit::{circuit_to_dag, random_circuit};
use qnas_core::circuit_metric::{assign_masses, ot_distance, ot_plan, structural_cost, CircuitFeatures, BIG_M};
use qnas_core::gate_metric::GateDistanceTable;
use qnas_core::{Circuit, Gate, GateType::*};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn table(n: usize) -> &'static GateDistanceTable {
    static T4: OnceLock<GateDistanceTable> = OnceLock::new();
    static T3: OnceLock<GateDistanceTable> = OnceLock::new();
    let cell = if n == 3 { &T3 } else { &T4 };
    cell.get_or_init(|| GateDistanceTable::for_qubits(n).unwrap())
}

#[test]
fn similar_triple_masses() {
    let (a, b, c) = common::similar_triple();
    // parametrized mass 57 in a, H gets a tenth of it
    assert!((assign_masses(&a).total - 62.7).abs() < 1e-12);
    assert!((assign_masses(&b).total - 66.0).abs() < 1e-12);
    assert!((assign_masses(&c).total - 62.7).abs() < 1e-12);
    let mb = assign_masses(&b);
    assert_eq!(&mb.masses[7..9], &[7.5, 7.5]);
}

#[test]
fn similar_triple_distances() {
    let (a, b, c) = common::similar_triple();
    let t = table(4);
    let d = |x: &Circuit, y: &Circuit, norm| ot_distance(x, y, 0.0, norm, t).unwrap();
    let crz_cry = t.get(&Gate::pair(CRZ, 2, 3), &Gate::pair(CRY, 2, 3)).unwrap().d_gate;
    let (ab, ac, bc) = (d(&a, &b, false), d(&a, &c, false), d(&b, &c, false));
    assert!((ab - 3.3).abs() < 1e-9, "{ab}");
    assert!((ac - 15.0 * crz_cry).abs() < 1e-9, "{ac}");
    assert!((ac - 5.303).abs() < 1e-3, "{ac}");
    assert!((bc - 8.603).abs() < 1e-3, "{bc}");
    assert!((bc - ab - ac).abs() < 1e-6);
    assert!((d(&a, &b, true) - 3.3 / 128.7).abs() < 1e-12);
    for (v, want) in [(d(&a, &b, true), 0.026), (d(&a, &c, true), 0.042), (d(&b, &c, true), 0.066)] {
        assert!((v - want).abs() < 0.003, "{v} vs {want}");
    }
}

#[test]
fn matched_gates_have_small_structural_cost() {
    let (a, b, _) = common::similar_triple();
    let s = structural_cost(&circuit_to_dag(&a), &circuit_to_dag(&b)).unwrap();
    // counterpart(s) in b of each gate of a
    let partners: [&[usize]; 8] = [&[0], &[1], &[2], &[3], &[4], &[5], &[7, 8], &[9]];
    for (i, js) in partners.iter().enumerate() {
        let row_min = s.row(i).min();
        assert!(js.iter().any(|&j| s[(i, j)] <= row_min + 1e-12), "gate {i}");
    }
}

#[test]
fn massless_circuits() {
    let fixed = Circuit::new(2, vec![Gate::single(H, 0), Gate::pair(CX, 0, 1)]).unwrap();
    let other = Circuit::new(2, vec![Gate::single(X, 1)]).unwrap();
    let t = table(3);
    let fixed3 = Circuit::new(3, fixed.gates().to_vec()).unwrap();
    let other3 = Circuit::new(3, other.gates().to_vec()).unwrap();
    assert_eq!(ot_distance(&fixed3, &other3, 0.2, false, t).unwrap(), 0.0);
    assert_eq!(ot_distance(&fixed3, &other3, 0.2, true, t).unwrap(), 0.0);
    let rx = Circuit::new(3, vec![Gate::single(RX, 0)]).unwrap();
    assert!((ot_distance(&fixed3, &rx, 0.2, false, t).unwrap() - 3.0).abs() < 1e-9);
}

fn plan_is_consistent(c1: &Circuit, c2: &Circuit, nu: f64) {
    let r = ot_plan(&CircuitFeatures::new(c1), &CircuitFeatures::new(c2), nu, table(3)).unwrap();
    let total = r.problem.supply.iter().sum::<f64>();
    let (mass, dual) = r.plan.certificate(&r.problem);
    assert!(mass <= 1e-8 * total.max(1.0));
    assert!(dual <= 1e-8);
    let obj: f64 = r.plan.z.iter().zip(r.problem.cost.iter()).map(|(z, c)| z * c).sum();
    assert!((obj - r.plan.objective).abs() < 1e-8 * total.max(1.0));
    for (z, c) in r.plan.z.iter().zip(r.problem.cost.iter()) {
        assert!(*c < BIG_M || *z <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn metric_axioms(seed in any::<u64>(), nu_ix in 0usize..4) {
        let nu = [0.1, 0.2, 0.4, 0.8][nu_ix];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs: Vec<Circuit> = (0..3).map(|k| random_circuit(3, 3 + 3 * k, &mut rng).unwrap()).collect();
        let t = table(3);
        let d = |i: usize, j: usize| ot_distance(&cs[i], &cs[j], nu, false, t).unwrap();
        for i in 0..3 {
            prop_assert!(d(i, i).abs() < 1e-9);
            for j in 0..3 {
                prop_assert!(d(i, j) >= -1e-12);
                prop_assert!((d(i, j) - d(j, i)).abs() < 1e-8);
            }
        }
        for (i, j, k) in [(0, 1, 2), (1, 0, 2), (0, 2, 1)] {
            prop_assert!(d(i, k) <= d(i, j) + d(j, k) + 1e-8);
        }
        plan_is_consistent(&cs[0], &cs[2], nu);
    }

    #[test]
    fn perturbed_circuit_is_distinguished(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(3, 5, &mut rng).unwrap();
        let mut g = c.gates().to_vec();
        g.push(Gate::single(RY, 2));
        let c2 = Circuit::new(3, g).unwrap();
        prop_assert!(ot_distance(&c, &c2, 0.1, false, table(3)).unwrap() > 1e-3);
    }

    #[test]
    fn removing_a_gate_is_bounded(seed in any::<u64>(), nu_ix in 0usize..4) {
        let nu = [0.1, 0.2, 0.4, 0.8][nu_ix];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(3, 6, &mut rng).unwrap();
        let other = random_circuit(3, 6, &mut rng).unwrap();
        let mut g = c.gates().to_vec();
        g.remove(2);
        let shorter = Circuit::new(3, g).unwrap();
        let t = table(3);
        let full = ot_distance(&c, &other, nu, false, t).unwrap();
        let cut = ot_distance(&shorter, &other, nu, false, t).unwrap();
        let gap = ot_distance(&c, &shorter, nu, false, t).unwrap();
        // triangle through the shorter circuit
        prop_assert!((full - cut).abs() <= gap + 1e-8);
        let drop = (assign_masses(&c).total - assign_masses(&shorter).total).abs();
        prop_assert!(gap + 1e-8 >= drop);
    }
}

#[test]
fn triangle_on_nine_qubits() {
    let t = GateDistanceTable::for_qubits(9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let cs: Vec<Circuit> = (0..3).map(|_| random_circuit(9, 5, &mut rng).unwrap()).collect();
        let d = |i: usize, j: usize| ot_distance(&cs[i], &cs[j], 0.1, false, &t).unwrap();
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-8);
    }
}
