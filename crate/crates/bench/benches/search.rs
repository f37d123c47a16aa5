use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use qnas_bench::circuits;
use qnas_core::circuit_metric::CircuitFeatures;
use qnas_core::evo::{evolve, EvoConfig};
use qnas_core::gate_metric::GateDistanceTable;
use qnas_core::gp::{ei_closed_form, fit_hyperparams, GpModel, ObservationSet};
use qnas_core::objectives::{ObjectiveKind, ObjectiveSpec, QganSettings};

fn observations(n: usize) -> ObservationSet {
    let table = Arc::new(GateDistanceTable::for_qubits(2).unwrap());
    let cs = circuits(2, 6, n, 7);
    let y = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    ObservationSet::from_data(table, cs, y).unwrap()
}

fn surrogate(c: &mut Criterion) {
    let obs = observations(20);
    let hp = obs.default_hyperparams();
    let query = CircuitFeatures::new(&circuits(2, 6, 1, 8)[0]);
    c.bench_function("gp fit, 20 observations", |b| b.iter(|| GpModel::fit(&obs, &hp).unwrap()));
    let model = GpModel::fit(&obs, &hp).unwrap();
    c.bench_function("gp predict, 20 observations", |b| b.iter(|| model.predict(&obs, &query).unwrap()));
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("hyperparameter fit, 20 observations", |b| b.iter(|| fit_hyperparams(&obs).unwrap()));
    g.finish();
}

fn acquisition(c: &mut Criterion) {
    let obs = observations(10);
    let hp = obs.default_hyperparams();
    let model = GpModel::fit(&obs, &hp).unwrap();
    let best = obs.y().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let acq = |circ: &qnas_core::Circuit| {
        let (m, v) = model.predict(&obs, &CircuitFeatures::new(circ))?;
        Ok(ei_closed_form(m, v, best))
    };
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("evolve t=1", |b| b.iter(|| evolve(obs.circuits(), acq, 1, &EvoConfig::default()).unwrap()));
    g.finish();
}

fn objectives(c: &mut Criterion) {
    let mut g = c.benchmark_group("objective");
    g.sample_size(10);
    let qft = ObjectiveSpec::preset(ObjectiveKind::Qft).build().unwrap();
    let qft_c = circuits(2, 6, 1, 9).remove(0);
    g.bench_function("qft, 2 qubits 6 gates", |b| b.iter(|| qft.evaluate(&qft_c).unwrap()));
    let maxcut = ObjectiveSpec::preset(ObjectiveKind::MaxCut).build().unwrap();
    let mc_c = circuits(9, 5, 1, 10).remove(0);
    g.bench_function("maxcut, 9 qubits 5 gates", |b| b.iter(|| maxcut.evaluate(&mc_c).unwrap()));
    let qgan = ObjectiveSpec {
        qgan: QganSettings { epochs: 20, ..QganSettings::default() },
        ..ObjectiveSpec::preset(ObjectiveKind::Qgan)
    }
    .build()
    .unwrap();
    let qg_c = circuits(3, 12, 1, 11).remove(0);
    g.bench_function("qgan, 3 qubits 12 gates, 20 epochs", |b| b.iter(|| qgan.evaluate(&qg_c).unwrap()));
    g.finish();
}

criterion_group!(benches, surrogate, acquisition, objectives);
criterion_main!(benches);
