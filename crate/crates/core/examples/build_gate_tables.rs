//! Regenerates the shipped gate-distance tables under `data/`.
//!
//!     cargo run --release -p qnas-core --example build_gate_tables [n ...]

use std::time::Instant;

use qnas_core::gate_metric::{pairwise_gate_table, ShapeConfig};

fn main() {
    let sizes: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let sizes = if sizes.is_empty() { vec![2, 3, 4] } else { sizes };
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir).expect("create data dir");
    for n in sizes {
        let start = Instant::now();
        let table = pairwise_gate_table(n, &ShapeConfig::default()).expect("table");
        let path = dir.join(format!("gate_table_n{n}.csv"));
        std::fs::write(&path, table.to_csv().expect("csv")).expect("write table");
        eprintln!("n={n}: {} entries in {:.1?} -> {}", table.len(), start.elapsed(), path.display());
    }
}
