//! Command-line front end for building and checking decomposition posets.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use factx_cli::claims::{run_claims, ClaimStatus};
use factx_cli::{ledger_csv, ledger_text};
use factx_core::autom::{aut_order, gamma_image_order, phase_group, PointPermutation};
use factx_core::counting::formula_table;
use factx_core::error::Error;
use factx_core::omp::{
    enumerate_atoms, enumerate_blocks, horizontal_sum_decomposition, mo_index, verify_omp_axioms,
    OmpStructure,
};
use factx_core::partition::{
    enumerate_companions, enumerate_regular, parse_partition, GroundSet,
};
use factx_core::req27::{
    collapse_of, large_upper_bound_count, shape_template_pair, upper_bound_table,
};
use factx_core::slab27::{
    build_slab, build_y_slab, build_z, chain_same_first, chain_same_second, ground27,
    slab_orthogonality, LargeRel, SmallRel,
};
use factx_core::states::{count_gfp_measures, solve_states};
use factx_core::vecfact::{enumerate_subspaces, fact_v_structure, FiniteField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "factx", about = "Decomposition posets of finite sets at desk scale")]
struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
    /// Worker threads for the claim runner (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Cap on materialized atoms for full structure builds.
    #[arg(long, global = true, default_value_t = 100_000)]
    size_cap: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form counting table.
    Formulas,
    /// Stream partitions, companions, atoms, blocks, or subspaces.
    Enumerate {
        #[arg(long)]
        kind: EnumKind,
        #[arg(long)]
        size: Option<usize>,
        /// Block count for regular partitions.
        #[arg(long)]
        blocks: Option<u32>,
        /// Base partition text for companion streams.
        #[arg(long)]
        of: Option<String>,
        /// Field order for subspaces.
        #[arg(long)]
        q: Option<u64>,
        /// Ambient dimension for subspaces.
        #[arg(long)]
        k: Option<u32>,
        /// Subspace dimension.
        #[arg(long)]
        d: Option<u32>,
        /// Print at most this many items (0 = only the count).
        #[arg(long, default_value_t = 50)]
        limit: usize,
    },
    /// Verify the poset axioms of a fully enumerated structure.
    VerifyOmp {
        #[arg(long)]
        size: Option<usize>,
        /// Vector structure as "q,k".
        #[arg(long)]
        vector: Option<String>,
    },
    /// Decompose into horizontal summands.
    HorizontalSum {
        #[arg(long)]
        size: usize,
    },
    /// Kernel of the permutation action on the structure.
    PhaseGroup {
        #[arg(long)]
        size: usize,
    },
    /// Exact automorphism-group order.
    AutOrder {
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        vector: Option<String>,
    },
    /// Exact rational state-space solve.
    States {
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        vector: Option<String>,
        /// Also dump the incidence matrix as CSV rows.
        #[arg(long, default_value_t = false)]
        dump_incidence: bool,
    },
    /// Count GF(p)-valued measures.
    Measures {
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        vector: Option<String>,
        #[arg(long)]
        p: u64,
    },
    /// Build the 36-atom slab of a permuting small pair.
    Slab {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Build the completion set of a permuting small pair.
    ZSet {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Near-chain between two atoms sharing a first spot.
    ChainFirst {
        /// The shared small first spot.
        #[arg(long)]
        first: String,
        /// Second spot of the start atom.
        #[arg(long)]
        x: String,
        /// Second spot of the end atom.
        #[arg(long)]
        y: String,
    },
    /// Near-chain between two atoms sharing a second spot.
    ChainSecond {
        /// The shared large second spot.
        #[arg(long)]
        second: String,
        /// First spot of the start atom.
        #[arg(long)]
        x: String,
        /// First spot of the end atom.
        #[arg(long)]
        y: String,
    },
    /// The ten relations re-splitting two blocks of a small relation.
    Collapse {
        #[arg(long)]
        a: String,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
    /// Sample the upper-bound table, all twelve join shapes.
    Countubs {
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Recover seeded random permutations through the full pipeline.
    Roundtrip27 {
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
    /// Run ledger claims matching an id glob.
    Claims {
        #[arg(long, default_value = "*")]
        filter: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EnumKind {
    Regular,
    Companions,
    Atoms,
    Blocks,
    Subspaces,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SizeGuard { .. } => 3,
        _ => 1,
    }
}

fn structure_for(
    size: Option<usize>,
    vector: Option<&str>,
    cap: usize,
) -> Result<OmpStructure, Error> {
    match (size, vector) {
        (Some(n), None) => OmpStructure::build_fact_set(GroundSet::new(n)?, cap),
        (None, Some(spec)) => {
            let (q, k) = spec.split_once(',').ok_or(Error::Parse {
                position: 0,
                detail: "expected q,k".into(),
            })?;
            let q: u64 = q.trim().parse().map_err(|_| Error::Parse {
                position: 0,
                detail: "bad field order".into(),
            })?;
            let k: u32 = k.trim().parse().map_err(|_| Error::Parse {
                position: 0,
                detail: "bad dimension".into(),
            })?;
            fact_v_structure(q, k)
        }
        _ => Err(Error::Unsupported {
            detail: "give exactly one of --size or --vector".into(),
        }),
    }
}

fn small(text: &str) -> Result<SmallRel, Error> {
    SmallRel::new(parse_partition(ground27(), text)?)
}

fn run(cli: Cli) -> Result<u8, Error> {
    let threads = if cli.threads == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4)
    } else {
        cli.threads
    };
    match cli.command {
        Command::Formulas => {
            let table = formula_table();
            match cli.emit {
                Emit::Json => println!("{}", serde_json::to_string_pretty(&table).unwrap()),
                Emit::Csv => {
                    println!("label,parameters,value");
                    for r in &table {
                        let params: Vec<String> =
                            r.parameters.iter().map(|p| p.to_string()).collect();
                        println!("{},\"{}\",{}", r.label, params.join(","), r.value);
                    }
                }
                Emit::Text => {
                    for r in &table {
                        let params: Vec<String> =
                            r.parameters.iter().map(|p| p.to_string()).collect();
                        println!("{:<22} ({:<7}) = {}", r.label, params.join(","), r.value);
                    }
                }
            }
            Ok(0)
        }
        Command::Enumerate {
            kind,
            size,
            blocks,
            of,
            q,
            k,
            d,
            limit,
        } => {
            // streams can be astronomically long; counting stops at a cap
            const COUNT_CAP: usize = 1_000_000;
            let mut lines: Vec<String> = Vec::new();
            let mut total = 0usize;
            let mut push = |s: String, total: &mut usize| -> bool {
                if *total < limit {
                    lines.push(s);
                }
                *total += 1;
                *total < COUNT_CAP
            };
            match kind {
                EnumKind::Regular => {
                    let n = size.ok_or(Error::Unsupported {
                        detail: "--size required".into(),
                    })?;
                    let m = blocks.ok_or(Error::Unsupported {
                        detail: "--blocks required".into(),
                    })?;
                    let ground = GroundSet::new(n)?;
                    for p in enumerate_regular(ground, m, n as u32 / m)? {
                        if !push(p.to_string(), &mut total) {
                            break;
                        }
                    }
                }
                EnumKind::Companions => {
                    let text = of.ok_or(Error::Unsupported {
                        detail: "--of required".into(),
                    })?;
                    let base: factx_core::partition::Partition = text.parse()?;
                    for p in enumerate_companions(&base)? {
                        if !push(p.to_string(), &mut total) {
                            break;
                        }
                    }
                }
                EnumKind::Atoms => {
                    let n = size.ok_or(Error::Unsupported {
                        detail: "--size required".into(),
                    })?;
                    for a in enumerate_atoms(GroundSet::new(n)?) {
                        if !push(a.to_string(), &mut total) {
                            break;
                        }
                    }
                }
                EnumKind::Blocks => {
                    let n = size.ok_or(Error::Unsupported {
                        detail: "--size required".into(),
                    })?;
                    for b in enumerate_blocks(GroundSet::new(n)?)? {
                        let parts: Vec<String> =
                            b.parts().iter().map(|p| p.to_string()).collect();
                        if !push(parts.join("  //  "), &mut total) {
                            break;
                        }
                    }
                }
                EnumKind::Subspaces => {
                    let q = q.ok_or(Error::Unsupported {
                        detail: "--q required".into(),
                    })?;
                    let k = k.ok_or(Error::Unsupported {
                        detail: "--k required".into(),
                    })?;
                    let d = d.ok_or(Error::Unsupported {
                        detail: "--d required".into(),
                    })?;
                    let field = FiniteField::new(q)?;
                    for s in enumerate_subspaces(&field, k, d)? {
                        if !push(s.to_string(), &mut total) {
                            break;
                        }
                    }
                }
            }
            let capped = total >= COUNT_CAP;
            match cli.emit {
                Emit::Json => println!(
                    "{}",
                    json!({"count": total, "count_capped": capped, "items": lines})
                ),
                _ => {
                    for l in &lines {
                        println!("{l}");
                    }
                    if capped {
                        println!("count: >={total} (capped)");
                    } else {
                        println!("count: {total}");
                    }
                }
            }
            Ok(0)
        }
        Command::VerifyOmp { size, vector } => {
            let s = structure_for(size, vector.as_deref(), cli.size_cap)?;
            let report = verify_omp_axioms(&s.poset_table())?;
            if cli.emit == Emit::Json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!(
                    "atoms {} blocks {} axioms {}",
                    s.n_atoms(),
                    s.n_blocks(),
                    if report.all_ok() { "pass" } else { "FAIL" }
                );
                for v in &report.violations {
                    println!("  violation: {v}");
                }
                println!(
                    "printed third-condition reading holds: {}",
                    report.alt_condition_holds
                );
            }
            Ok(if report.all_ok() { 0 } else { 1 })
        }
        Command::HorizontalSum { size } => {
            let s = OmpStructure::build_fact_set(GroundSet::new(size)?, cli.size_cap)?;
            let (components, isomorphic) = horizontal_sum_decomposition(&s);
            if cli.emit == Emit::Json {
                let comps: Vec<_> = components
                    .iter()
                    .map(|c| json!({"atoms": c.atoms, "blocks": c.blocks}))
                    .collect();
                println!(
                    "{}",
                    json!({"components": comps, "pairwise_isomorphic": isomorphic})
                );
            } else {
                println!(
                    "{} components, pairwise isomorphic: {isomorphic}",
                    components.len()
                );
                for (i, c) in components.iter().enumerate() {
                    println!("  component {i}: {} atoms, {} blocks", c.atoms.len(), c.blocks.len());
                }
                if let Some(n) = mo_index(&s) {
                    println!("structure is MO_{n}");
                }
            }
            Ok(0)
        }
        Command::PhaseGroup { size } => {
            let kernel = phase_group(GroundSet::new(size)?)?;
            // generators: the whole kernel when small, the standard pair for
            // a full symmetric group
            let generators: Vec<String> = if kernel.len() > 24 {
                let n = size;
                let mut swap: Vec<u32> = (0..n as u32).collect();
                swap.swap(0, 1);
                let cycle: Vec<u32> = (0..n as u32).map(|i| (i + 1) % n as u32).collect();
                vec![
                    PointPermutation::new(swap).unwrap().cycles(),
                    PointPermutation::new(cycle).unwrap().cycles(),
                ]
            } else {
                kernel.iter().filter(|p| !p.is_identity()).map(|p| p.cycles()).collect()
            };
            if cli.emit == Emit::Json {
                println!(
                    "{}",
                    json!({"order": kernel.len(), "generators": generators})
                );
            } else {
                println!("phase group order: {}", kernel.len());
                println!("generators: {}", generators.join(", "));
            }
            Ok(0)
        }
        Command::AutOrder { size, vector } => {
            let s = structure_for(size, vector.as_deref(), cli.size_cap)?;
            let order = aut_order(&s)?;
            if cli.emit == Emit::Json {
                let image = size
                    .map(|n| gamma_image_order(GroundSet::new(n).unwrap()).map(|v| v.to_string()))
                    .transpose()?;
                println!("{}", json!({"aut_order": order.to_string(), "action_image": image}));
            } else {
                println!("automorphism group order: {order}");
            }
            Ok(0)
        }
        Command::States {
            size,
            vector,
            dump_incidence,
        } => {
            let s = structure_for(size, vector.as_deref(), cli.size_cap)?;
            if s.n_atoms() > 2000 {
                return Err(Error::SizeGuard {
                    size: s.n_atoms(),
                    cap: 2000,
                });
            }
            let sol = solve_states(&s);
            if dump_incidence {
                for row in factx_core::states::incidence_matrix(&s) {
                    let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    println!("{}", cells.join(","));
                }
            }
            let summary = json!({
                "consistent": sol.consistent,
                "nullity": sol.nullity,
                "unique": sol.unique(),
                "constant_value": sol.constant_value.as_ref().map(|v| v.to_string()),
            });
            if cli.emit == Emit::Json {
                println!("{summary}");
            } else {
                println!(
                    "consistent: {}, nullity: {}, unique: {}, constant value: {}",
                    sol.consistent,
                    sol.nullity,
                    sol.unique(),
                    sol.constant_value
                        .as_ref()
                        .map(|v| v.to_string())
                        .unwrap_or_else(|| "-".into())
                );
            }
            Ok(0)
        }
        Command::Measures { size, vector, p } => {
            let s = structure_for(size, vector.as_deref(), cli.size_cap)?;
            let (count, nullity) = count_gfp_measures(&s, p)?;
            if cli.emit == Emit::Json {
                println!(
                    "{}",
                    json!({"p": p, "count": count.to_string(), "nullity": nullity})
                );
            } else {
                println!("GF({p})-valued measures: {count} (nullity {nullity})");
            }
            Ok(0)
        }
        Command::Slab { a, b } => {
            let slab = build_slab(&small(&a)?, &small(&b)?)?;
            let companion = build_y_slab(&small(&a)?, &small(&b)?)?;
            let atoms: Vec<String> = slab.atoms.iter().map(|x| x.to_string()).collect();
            if cli.emit == Emit::Json {
                println!(
                    "{}",
                    json!({
                        "atoms": atoms,
                        "orthogonal_to_companion": slab_orthogonality(&slab, &companion),
                    })
                );
            } else {
                for line in &atoms {
                    println!("{line}");
                }
                println!("count: {}", atoms.len());
            }
            Ok(0)
        }
        Command::ZSet { a, b } => {
            let z = build_z(&small(&a)?, &small(&b)?)?;
            if cli.emit == Emit::Json {
                let atoms: Vec<String> = z.iter().map(|x| x.to_string()).collect();
                println!("{}", json!({"count": z.len(), "atoms": atoms}));
            } else {
                println!("count: {}", z.len());
            }
            Ok(0)
        }
        Command::ChainFirst { first, x, y } => {
            let a = small(&first)?;
            let gx = parse_partition(ground27(), &x)?;
            let gy = parse_partition(ground27(), &y)?;
            let fx = factx_core::omp::FactorPair::new(a.partition().clone(), gx)?;
            let fy = factx_core::omp::FactorPair::new(a.partition().clone(), gy)?;
            let chain = chain_same_first(&fx, &fy)?;
            for step in &chain {
                println!("{step}");
            }
            println!("steps: {}", chain.len().saturating_sub(1));
            Ok(0)
        }
        Command::ChainSecond { second, x, y } => {
            let big = LargeRel::new(parse_partition(ground27(), &second)?)?;
            let sx = parse_partition(ground27(), &x)?;
            let sy = parse_partition(ground27(), &y)?;
            let fx = factx_core::omp::FactorPair::new(sx, big.partition().clone())?;
            let fy = factx_core::omp::FactorPair::new(sy, big.partition().clone())?;
            let chain = chain_same_second(&fx, &fy)?;
            for step in &chain {
                println!("{step}");
            }
            println!("steps: {}", chain.len().saturating_sub(1));
            Ok(0)
        }
        Command::Collapse { a, i, j } => {
            let c = collapse_of(&small(&a)?, i, j)?;
            for m in &c.members {
                println!("{}", m.partition());
            }
            Ok(0)
        }
        Command::Countubs { samples } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
            let mut rows = Vec::new();
            for (shape, want) in upper_bound_table() {
                let (a, b) = shape_template_pair(&shape)?;
                let mut ok = true;
                for _ in 0..samples {
                    let alpha = PointPermutation::random(27, &mut rng);
                    let fa = SmallRel::new(a.partition().apply_permutation(alpha.image()))?;
                    let fb = SmallRel::new(b.partition().apply_permutation(alpha.image()))?;
                    let (s, count) = large_upper_bound_count(&fa, &fb)?;
                    ok &= s == shape && count == want;
                }
                rows.push((shape.to_string(), want, ok));
            }
            let all_ok = rows.iter().all(|r| r.2);
            if cli.emit == Emit::Json {
                let entries: Vec<_> = rows
                    .iter()
                    .map(|(s, c, ok)| json!({"shape": s, "count": c, "verified": ok}))
                    .collect();
                println!("{}", json!({"samples": samples, "entries": entries}));
            } else {
                for (s, c, ok) in &rows {
                    println!("{s:<16} = {c:<4} {}", if *ok { "ok" } else { "FAIL" });
                }
            }
            Ok(if all_ok { 0 } else { 1 })
        }
        Command::Roundtrip27 { trials } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
            let mut reports = Vec::new();
            let mut all_ok = true;
            for t in 0..trials {
                let alpha = PointPermutation::random(27, &mut rng);
                let start = Instant::now();
                let recovered = factx_core::req27::end_to_end_roundtrip(&alpha)?;
                let ms = start.elapsed().as_millis();
                let ok = recovered == alpha;
                all_ok &= ok;
                reports.push(json!({"trial": t, "recovered": ok, "runtime_ms": ms}));
            }
            if cli.emit == Emit::Json {
                println!("{}", json!({"seed": cli.seed, "trials": reports}));
            } else {
                for r in &reports {
                    println!("{r}");
                }
            }
            Ok(if all_ok { 0 } else { 1 })
        }
        Command::Claims { filter } => {
            let records = run_claims(&filter, cli.seed, threads)?;
            match cli.emit {
                Emit::Json => println!("{}", serde_json::to_string_pretty(&records).unwrap()),
                Emit::Csv => print!("{}", ledger_csv(&records)),
                Emit::Text => print!("{}", ledger_text(&records)),
            }
            let failures = records.iter().filter(|r| r.status == ClaimStatus::Fail).count();
            Ok(if failures > 0 { 1 } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    // dying quietly on a closed pipe beats a panic from println
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
