use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use qnas_core::circuit_metric::{ot_plan, CircuitFeatures};
use qnas_core::gate_metric::{core_distance, symmetric_shape_distance, GateDistanceTable, ShapeConfig};
use qnas_core::harness::{
    distance_vs_performance, jitter_audit, mds_embed, mutual_top_k, neighbor_order, run_trial, template_distances,
    ExperimentConfig, ScatterConfig, SearchMode,
};
use qnas_core::mub::build_mub;
use qnas_core::objectives::{ObjectiveKind, ObjectiveSpec};
use qnas_core::{Circuit, Gate};

#[derive(Parser)]
#[command(name = "qnas", version, about = "Quantum neural architecture search toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the architecture search described by a JSON config.
    Search {
        #[arg(long)]
        config: PathBuf,
        /// Replace the acquisition step with uniform random circuits.
        #[arg(long, value_parser = ["random"])]
        baseline: Option<String>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distances between two gates, e.g. `CRZ(0,1) CRY(0,1)`.
    GateDist {
        gate1: Option<String>,
        gate2: Option<String>,
        #[arg(long, default_value_t = 2)]
        qubits: usize,
        /// Print the whole table for `--qubits` as CSV.
        #[arg(long)]
        table: bool,
        /// Recompute instead of reading the shipped table.
        #[arg(long)]
        fresh: bool,
        #[arg(long, default_value_t = 12)]
        t_samples: usize,
    },
    /// Transport distance between two circuit JSON files.
    CircuitDist {
        circuit1: PathBuf,
        circuit2: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
        #[arg(long)]
        normalized: bool,
        /// Also print the transport plan as CSV.
        #[arg(long)]
        plan: bool,
    },
    /// Build the mutually unbiased bases for `n` qubits.
    Mub {
        #[arg(long, default_value_t = 2)]
        qubits: usize,
        /// Print every anchor state as CSV (anchor, index, re, im).
        #[arg(long)]
        anchors: bool,
    },
    /// Train a circuit on an objective and print its value.
    Objective {
        #[arg(long)]
        circuit: PathBuf,
        /// qft, maxcut or qgan with experiment defaults.
        #[arg(long, conflicts_with = "spec")]
        kind: Option<String>,
        /// Objective spec as JSON.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Two-dimensional embedding of a distance matrix.
    Mds {
        /// Square CSV matrix without header; the 19 templates when omitted.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long)]
        normalized: bool,
        #[arg(long, default_value_t = 2)]
        dims: usize,
    },
    /// Circuit distance against trained-fidelity gap for random circuits.
    Scatter {
        #[arg(long, default_value_t = 300)]
        circuits: usize,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long, default_value_t = 20)]
        max_gates: usize,
        #[arg(long, default_value_t = 0.5)]
        nu: f64,
        #[arg(long)]
        normalized: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(v) = std::env::var("QNAS_THREADS") {
        let n: usize = v.parse().with_context(|| format!("QNAS_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    match Cli::parse().command {
        Command::Search { config, baseline, out } => search(&config, baseline.is_some(), out),
        Command::GateDist { gate1, gate2, qubits, table, fresh, t_samples } => {
            gate_dist(gate1, gate2, qubits, table, fresh, t_samples)
        }
        Command::CircuitDist { circuit1, circuit2, nu, normalized, plan } => {
            circuit_dist(&circuit1, &circuit2, nu, normalized, plan)
        }
        Command::Mub { qubits, anchors } => mub(qubits, anchors),
        Command::Objective { circuit, kind, spec, seed } => objective(&circuit, kind, spec, seed),
        Command::Mds { matrix, nu, normalized, dims } => mds(matrix, nu, normalized, dims),
        Command::Scatter { circuits, pairs, max_gates, nu, normalized, seed, out } => {
            let cfg = ScatterConfig {
                n_circuits: circuits,
                n_pairs: pairs,
                max_gates,
                nu,
                normalized,
                seed,
                ..Default::default()
            };
            scatter(&cfg, out)
        }
    }
}

fn read_circuit(path: &Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Circuit::from_json(&text)?)
}

fn search(config: &Path, random: bool, out: Option<PathBuf>) -> Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if random {
        cfg.mode = SearchMode::Random;
    }
    if out.is_some() {
        cfg.output_dir = out;
    }
    let mode = match cfg.mode {
        SearchMode::Ei => "ei",
        SearchMode::Random => "random",
    };
    let logs = (0..cfg.trials as u64)
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            let log = run_trial(&cfg, seed)?;
            if let Some(dir) = &cfg.output_dir {
                log.save(dir, &format!("run_{mode}_seed{seed}"))?;
            }
            println!(
                "seed {seed}: best {:.6} after {} evaluations: {}",
                log.best_value,
                log.records.len(),
                log.best.to_json()
            );
            Ok(log)
        })
        .collect::<Result<Vec<_>>>()?;
    let audit = jitter_audit(&logs);
    println!(
        "jitter audit: {} fits, {} flagged, worst negative eigenvalue {:.2}x threshold, max added {:.3e}: {}",
        audit.fits,
        audit.flagged,
        audit.worst_ratio,
        audit.max_added,
        if audit.passed { "pass" } else { "FAIL" }
    );
    Ok(())
}

fn gate_dist(
    gate1: Option<String>,
    gate2: Option<String>,
    qubits: usize,
    table: bool,
    fresh: bool,
    t_samples: usize,
) -> Result<()> {
    if table {
        print!("{}", GateDistanceTable::for_qubits(qubits)?.to_csv()?);
        return Ok(());
    }
    let (Some(a), Some(b)) = (gate1, gate2) else {
        bail!("give two gates such as 'CRZ(0,1)' 'CRY(0,1)', or --table");
    };
    let g1: Gate = a.parse()?;
    let g2: Gate = b.parse()?;
    let (core, shape) = if fresh {
        let cfg = ShapeConfig { t_samples, ..ShapeConfig::default() };
        (core_distance(&g1, &g2, qubits)?, symmetric_shape_distance(&g1, &g2, qubits, &cfg)?)
    } else {
        let d = GateDistanceTable::for_qubits(qubits)?.get(&g1, &g2)?;
        (d.d_core, d.d_shape)
    };
    let gate = if shape.is_infinite() { f64::INFINITY } else { 0.5 * (core + shape) };
    println!("d_core  {core:.6}\nd_shape {shape:.6}\nd_gate  {gate:.6}");
    Ok(())
}

fn circuit_dist(p1: &Path, p2: &Path, nu: f64, normalized: bool, plan: bool) -> Result<()> {
    let (c1, c2) = (read_circuit(p1)?, read_circuit(p2)?);
    let table = GateDistanceTable::for_qubits(c1.n_qubits())?;
    let r = ot_plan(&CircuitFeatures::new(&c1), &CircuitFeatures::new(&c2), nu, &table)?;
    println!("{:.6}", if normalized { r.normalized } else { r.distance });
    if plan {
        let z = &r.plan.z;
        let label = |c: &Circuit, i: usize| c.gates().get(i).map_or("null".to_string(), |g| g.to_string());
        println!("from,to,mass,cost");
        for i in 0..z.nrows() {
            for j in 0..z.ncols() {
                if z[(i, j)] > 1e-12 {
                    println!("{},{},{},{}", label(&c1, i), label(&c2, j), z[(i, j)], r.problem.cost[(i, j)]);
                }
            }
        }
    }
    Ok(())
}

fn mub(qubits: usize, anchors: bool) -> Result<()> {
    let m = build_mub(qubits)?;
    let (ortho, unbiased) = m.verify();
    println!(
        "d = {}: {} bases, {} anchors; orthonormality error {ortho:.2e}, unbiasedness error {unbiased:.2e}",
        m.dim(),
        m.n_bases(),
        m.n_anchors()
    );
    if anchors {
        println!("anchor,index,re,im");
        for k in 0..m.n_anchors() {
            for (i, a) in m.anchor(k).iter().enumerate() {
                println!("{k},{i},{},{}", a.re, a.im);
            }
        }
    }
    Ok(())
}

fn objective(circuit: &Path, kind: Option<String>, spec: Option<PathBuf>, seed: Option<u64>) -> Result<()> {
    let c = read_circuit(circuit)?;
    let mut spec = match (kind, spec) {
        (Some(k), _) => {
            let mut s = ObjectiveSpec::preset(k.parse::<ObjectiveKind>()?);
            s.n_qubits = c.n_qubits();
            s.n_gates = c.len();
            s
        }
        (None, Some(p)) => serde_json::from_str(&std::fs::read_to_string(&p)?)?,
        (None, None) => bail!("give --kind or --spec"),
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    println!("{:.6}", spec.build()?.evaluate(&c)?);
    Ok(())
}

fn mds(matrix: Option<PathBuf>, nu: f64, normalized: bool, dims: usize) -> Result<()> {
    let (d, labels): (_, Vec<String>) = match matrix {
        Some(p) => {
            let rows: Vec<Vec<f64>> = std::fs::read_to_string(&p)?
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| l.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<_, _>>())
                .collect::<std::result::Result<_, _>>()?;
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                bail!("matrix must be square");
            }
            let m = qnas_core::nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            (m, (0..n).map(|i| i.to_string()).collect())
        }
        None => {
            let table = GateDistanceTable::for_qubits(4)?;
            (template_distances(nu, normalized, &table)?, (1..=19).map(|i| i.to_string()).collect())
        }
    };
    let x = mds_embed(&d, dims)?;
    let order = neighbor_order(&x);
    let header: Vec<String> = (1..=dims).map(|k| format!("x{k}")).collect();
    println!("id,{},nearest", header.join(","));
    for i in 0..x.nrows() {
        let coords: Vec<String> = x.row(i).iter().map(|v| format!("{v:.6}")).collect();
        let near = order[i].first().map_or(String::new(), |&j| labels[j].clone());
        println!("{},{},{near}", labels[i], coords.join(","));
    }
    let mutual: Vec<String> = (0..x.nrows())
        .flat_map(|i| (i + 1..x.nrows()).map(move |j| (i, j)))
        .filter(|&(i, j)| mutual_top_k(&order, i, j, 1))
        .map(|(i, j)| format!("({},{})", labels[i], labels[j]))
        .collect();
    eprintln!("mutual nearest pairs: {}", mutual.join(" "));
    Ok(())
}

fn scatter(cfg: &ScatterConfig, out: Option<PathBuf>) -> Result<()> {
    let t = distance_vs_performance(cfg)?;
    match out {
        Some(p) => t.write_csv(std::fs::File::create(&p)?)?,
        None => t.write_csv(std::io::stdout().lock())?,
    }
    let s = t.decile_summary();
    eprintln!(
        "{} pairs; lowest-decile mean gap {:.4}, overall mean gap {:.4}: {}",
        t.rows.len(),
        s.low_decile_gap,
        s.overall_gap,
        if s.holds { "holds" } else { "does not hold" }
    );
    Ok(())
}
