//! Batch front end: every operation behind one binary, JSON on stdout.
//!
//! Exit codes: 0 on success (including negative verdicts such as a graph
//! outside the recognised class), 1 on domain rejections (an operation's
//! precondition fails on well-formed input), 2 on input errors (bad files,
//! schema violations, unknown flags).

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use draag::massey::{
    classify_vanishing_pair_delta, classify_vanishing_pair_raag, ku_witness_c4, ku_witness_sap,
    strong_massey_solve, Character, CupTable, KuError, MasseyError, Target,
};
use draag::quad::{
    build_twisted, build_untwisted, h2_basis, hilbert_series, pbw_check, quadratic_dual,
    GeneratorOrder, PbwOutcome, QuadError,
};
use draag::recognition::{enumerate_gr_p, is_in_gr_p};
use draag::report::{build_analysis, calibrate_sum_mode, SumModeRequest, REPORT_SCHEMA};
use draag::series::{
    gocha_series, lie_dims_from_gocha, poincare_series, realizability_check, SumMode,
};
use draag::unipotent::{solve_lemmquad, UnipotentError, UnipotentMatrix};
use draag::words::{GroupWord, ZVector};
use draag::Graph;

#[derive(Parser)]
#[command(
    name = "draag",
    version,
    about = "Exact toolkit for twisted right-angled Artin groups over F2"
)]
struct Cli {
    /// Seed recorded in report headers; all operations are deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArg {
    /// Graph document: {"vertices": n, "edges": [[i,j],...]}
    #[arg(long)]
    graph: String,
}

#[derive(Args)]
struct TwistArg {
    /// Twist document: {"z": ["1","x2",...]}; defaults to the trivial twist.
    #[arg(long)]
    z: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: series, recognition, realizability, confluence, dual.
    Analyze {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        z: TwistArg,
        /// Generator order, largest first, e.g. x0,x1,x3,x2,x4
        #[arg(long)]
        order: Option<String>,
        #[arg(long, default_value_t = 8)]
        trunc: usize,
        /// Witness sum constraint: d, d+1, or auto (calibrated).
        #[arg(long, default_value = "auto")]
        sum_mode: String,
        /// Attach a lifting transcript for these characters (4-cycle with
        /// the trivial twist only), semicolon-separated bit lists.
        #[arg(long)]
        massey_alpha: Option<String>,
        /// Attach a detection transcript for this word (4-cycle with the
        /// trivial twist only).
        #[arg(long)]
        ku_word: Option<String>,
    },
    /// Decide class membership and print the decomposition witness.
    Recognize {
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Enumerate the closure up to an isomorphism-class bound.
    Enumerate {
        #[arg(long, default_value_t = 6)]
        max: usize,
    },
    /// Clique polynomial and the derived power series.
    Series {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value_t = 8)]
        trunc: usize,
    },
    /// Search for a clique-polynomial witness decomposition.
    Realizable {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, default_value = "auto")]
        sum_mode: String,
    },
    /// Confluence of the twisted quadratic algebra under an order.
    Pbw {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        z: TwistArg,
        #[arg(long)]
        order: Option<String>,
    },
    /// Quadratic dual (cohomology ring presentation) and degree-2 basis.
    Dual {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        z: TwistArg,
        /// Use the untwisted group algebra instead of the twisted one.
        #[arg(long)]
        raag: bool,
        #[arg(long)]
        order: Option<String>,
    },
    /// Classify a vanishing cup-product pair.
    Cupzero {
        /// c4-delta or c4-raag
        #[arg(long)]
        target: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Solve the prescribed-superdiagonal lifting problem.
    Massey {
        /// c4-delta, c4-raag, or sap
        #[arg(long)]
        target: String,
        /// Characters, semicolon-separated bit lists: "0,1,0,0,0;1,1,0,0,0"
        #[arg(long)]
        alpha: String,
        /// Number of involution factors for the sap target.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Representation detecting a nontrivial element.
    KuWitness {
        /// sap or c4-delta
        #[arg(long)]
        target: String,
        /// Word over the target's generators, e.g. y1*y2*y1*y2 or x1*x2^-1.
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        trunc: usize,
    },
    /// The commutator matrices [A_i, B_i] = A_i^-2 in one unitriangular size.
    Lemmquad {
        #[arg(long)]
        n: usize,
    },
}

enum CliError {
    /// Well-formed input outside an operation's domain.
    Domain(String),
    /// Malformed input: files, schema, syntax, ranges.
    Input(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Domain(_) => ExitCode::from(1),
            CliError::Input(_) => ExitCode::from(2),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Domain(m) | CliError::Input(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn domain_err(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn quad_err(e: QuadError) -> CliError {
    match e {
        QuadError::InvalidTwist(_)
        | QuadError::TruncationTooLarge { .. }
        | QuadError::TooManyColumns { .. } => domain_err(e),
        other => input_err(other),
    }
}

fn massey_err(e: MasseyError) -> CliError {
    match e {
        MasseyError::CharacterLength { .. } | MasseyError::Syntax(_) => input_err(e),
        other => domain_err(other),
    }
}

fn ku_err(e: KuError) -> CliError {
    match e {
        KuError::GeneratorRange(..) => input_err(e),
        other => domain_err(other),
    }
}

const TRUNC_LIMIT: usize = 512;

fn check_trunc(trunc: usize) -> Result<(), CliError> {
    if trunc > TRUNC_LIMIT {
        return Err(CliError::Input(format!(
            "truncation {trunc} exceeds the supported maximum {TRUNC_LIMIT}"
        )));
    }
    Ok(())
}

fn load_graph(path: &str) -> Result<Graph, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    Graph::parse(&text).map_err(input_err)
}

fn load_twist(path: &Option<String>, d: usize) -> Result<ZVector, CliError> {
    match path {
        None => Ok(ZVector::trivial(d)),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("cannot read {p}: {e}")))?;
            ZVector::parse(&text, d).map_err(input_err)
        }
    }
}

fn parse_sum_mode(text: &str) -> Result<SumModeRequest, CliError> {
    match text {
        "d" => Ok(SumModeRequest::Fixed(SumMode::VertexCount)),
        "d+1" => Ok(SumModeRequest::Fixed(SumMode::VertexCountPlusOne)),
        "auto" => Ok(SumModeRequest::Auto),
        other => Err(CliError::Input(format!(
            "unknown sum mode {other:?}; expected d, d+1, or auto"
        ))),
    }
}

fn parse_target(text: &str, k: usize) -> Result<Target, CliError> {
    match text {
        "c4-delta" => Ok(Target::C4Delta),
        "c4-raag" => Ok(Target::C4Raag),
        "sap" => {
            if !(1..=32).contains(&k) {
                return Err(CliError::Input(format!(
                    "sap factor count must be in 1..=32, got {k}"
                )));
            }
            Ok(Target::Sap(k))
        }
        other => Err(CliError::Input(format!(
            "unknown target {other:?}; expected c4-delta, c4-raag, or sap"
        ))),
    }
}

fn matrix_json(m: &UnipotentMatrix) -> Value {
    Value::from(m.row_strings())
}

fn images_json(names: &[String], images: &[UnipotentMatrix], used: &[usize]) -> Value {
    let mut map = serde_json::Map::new();
    for &g in used {
        map.insert(names[g].clone(), matrix_json(&images[g]));
    }
    Value::Object(map)
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).unwrap());
}

fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed;
    match cli.command {
        Command::Analyze {
            graph,
            z,
            order,
            trunc,
            sum_mode,
            massey_alpha,
            ku_word,
        } => {
            check_trunc(trunc)?;
            let g = load_graph(&graph.graph)?;
            let z = load_twist(&z.z, g.vertex_count())?;
            let mode = parse_sum_mode(&sum_mode)?;
            let mut report =
                build_analysis(&g, &z, order.as_deref(), trunc, mode, seed).map_err(quad_err)?;
            if massey_alpha.is_some() || ku_word.is_some() {
                ensure_c4_target(&g, &z)?;
            }
            if let Some(alpha) = massey_alpha {
                let alphas = alpha
                    .split(';')
                    .map(|part| Character::parse(part.trim(), 5))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(massey_err)?;
                let solution = strong_massey_solve(Target::C4Delta, &alphas).map_err(massey_err)?;
                let names = generator_names(Target::C4Delta);
                let used: Vec<usize> = (0..=4).collect();
                report.massey = Some(json!({
                    "alphas": alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "matrix_size": solution.target_size,
                    "runs": solution.runs,
                    "images": images_json(&names, &solution.images, &used),
                    "relators_checked": relator_names(Target::C4Delta),
                    "superdiagonals_checked": true,
                    "verified": true,
                }));
            }
            if let Some(word) = ku_word {
                let w = GroupWord::parse(&word).map_err(input_err)?;
                let witness = ku_witness_c4(&w, trunc).map_err(ku_err)?;
                let names = generator_names(Target::C4Delta);
                let used: Vec<usize> = (0..=4).collect();
                report.ku = Some(json!({
                    "word": word,
                    "projection": witness.projection,
                    "matrix_size": witness.n,
                    "witness_word": witness.word.iter().map(|l| format!("Y{l}")).collect::<Vec<_>>(),
                    "images": images_json(&names, &witness.images, &used),
                    "value": matrix_json(&witness.value),
                    "verified": true,
                }));
            }
            print_json(&serde_json::to_value(&report).unwrap());
        }
        Command::Recognize { graph } => {
            let g = load_graph(&graph.graph)?;
            let value = match is_in_gr_p(&g) {
                Ok(tree) => json!({
                    "schema": REPORT_SCHEMA,
                    "in_GrP": true,
                    "witness": tree,
                    "reason": null,
                }),
                Err(rej) => json!({
                    "schema": REPORT_SCHEMA,
                    "in_GrP": false,
                    "witness": null,
                    "reason": rej.reason.to_string(),
                    "rejection_witness": rej.witness,
                }),
            };
            print_json(&value);
        }
        Command::Enumerate { max } => {
            let closure = enumerate_gr_p(max).map_err(domain_err)?;
            let docs: Vec<Value> = closure
                .iter()
                .map(|c| serde_json::to_value(c.to_graph().to_document()).unwrap())
                .collect();
            print_json(&Value::from(docs));
        }
        Command::Series { graph, trunc } => {
            check_trunc(trunc)?;
            let g = load_graph(&graph.graph)?;
            let p = g.clique_polynomial();
            let gocha = gocha_series(&p, trunc);
            let poincare = poincare_series(&p, trunc);
            let lie = lie_dims_from_gocha(&gocha, trunc).map_err(domain_err)?;
            print_json(&json!({
                "schema": REPORT_SCHEMA,
                "seed": seed,
                "clique_polynomial": p.coefficients(),
                "trunc": trunc,
                "gocha": gocha.to_json_values(),
                "poincare": poincare.to_json_values(),
                "lie_dims": lie.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            }));
        }
        Command::Realizable { graph, sum_mode } => {
            let g = load_graph(&graph.graph)?;
            let p = g.clique_polynomial();
            let mode = parse_sum_mode(&sum_mode)?;
            let (used, calibration) = match mode {
                SumModeRequest::Fixed(m) => (m, None),
                SumModeRequest::Auto => {
                    let report = calibrate_sum_mode(draag::report::CALIBRATION_MAX_VERTICES)
                        .map_err(domain_err)?;
                    let selected = match report.selected_mode.as_deref() {
                        Some("d") => SumMode::VertexCount,
                        _ => SumMode::VertexCountPlusOne,
                    };
                    (selected, Some(report))
                }
            };
            let witness = realizability_check(&p, used);
            print_json(&json!({
                "schema": REPORT_SCHEMA,
                "seed": seed,
                "clique_polynomial": p.coefficients(),
                "mode_requested": mode.label(),
                "mode_used": used.label(),
                "witness": witness,
                "calibration": calibration,
            }));
        }
        Command::Pbw { graph, z, order } => {
            let g = load_graph(&graph.graph)?;
            let z = load_twist(&z.z, g.vertex_count())?;
            let pres = build_twisted(&g, &z).map_err(quad_err)?;
            let order = match order.as_deref() {
                Some(text) => GeneratorOrder::parse(text, &pres).map_err(input_err)?,
                None => GeneratorOrder::natural(pres.generator_count()),
            };
            let (system, outcome) = pbw_check(&pres, &order).map_err(quad_err)?;
            let name3 = |m: &(usize, usize, usize)| {
                format!(
                    "{}*{}*{}",
                    pres.generator_name(m.0),
                    pres.generator_name(m.1),
                    pres.generator_name(m.2)
                )
            };
            let counterexample = match &outcome {
                PbwOutcome::Confluent => Value::Null,
                PbwOutcome::Counterexample {
                    critical,
                    left,
                    right,
                } => json!({
                    "critical": name3(critical),
                    "left_normal_form": left.iter().map(name3).collect::<Vec<_>>(),
                    "right_normal_form": right.iter().map(name3).collect::<Vec<_>>(),
                }),
            };
            print_json(&json!({
                "schema": REPORT_SCHEMA,
                "seed": seed,
                "confluent": outcome.is_confluent(),
                "order": order.descending().iter().map(|&i| pres.generator_name(i).to_string()).collect::<Vec<_>>(),
                "heads": system.heads().iter().map(|&m| pres.monomial_name(m)).collect::<Vec<_>>(),
                "counterexample": counterexample,
            }));
        }
        Command::Dual {
            graph,
            z,
            raag,
            order,
        } => {
            let g = load_graph(&graph.graph)?;
            let pres = if raag {
                build_untwisted(&g)
            } else {
                let z = load_twist(&z.z, g.vertex_count())?;
                build_twisted(&g, &z).map_err(quad_err)?
            };
            let order = match order.as_deref() {
                Some(text) => GeneratorOrder::parse(text, &pres).map_err(input_err)?,
                None => GeneratorOrder::natural(pres.generator_count()),
            };
            let dual = quadratic_dual(&pres);
            let h2 = h2_basis(&dual, &order).map_err(quad_err)?;
            let hilbert = hilbert_series(&pres, 4).ok();
            print_json(&json!({
                "schema": REPORT_SCHEMA,
                "seed": seed,
                "generators": dual.generators(),
                "relations": dual.relations().iter().map(|r| dual.relation_name(r)).collect::<Vec<_>>(),
                "h2_basis": h2.classes.iter().map(|&m| dual.monomial_name(m)).collect::<Vec<_>>(),
                "h2_dimension": h2.dimension(),
                "hilbert_low_degrees": hilbert.map(|s| s.to_json_values()),
            }));
        }
        Command::Cupzero { target, a, b } => {
            let target = parse_target(&target, 3)?;
            let (table, len) = match target {
                Target::C4Delta => (CupTable::c4_delta(), 5),
                Target::C4Raag => (CupTable::c4_raag(), 4),
                Target::Sap(_) => {
                    return Err(CliError::Input(
                        "cupzero supports c4-delta and c4-raag".into(),
                    ))
                }
            };
            let a = Character::parse(&a, len).map_err(massey_err)?;
            let b = Character::parse(&b, len).map_err(massey_err)?;
            let cup = table.cup(&a, &b).map_err(massey_err)?;
            let vanishes = cup.iter().all(|&w| w == 0);
            let cup_classes: Vec<String> = table
                .class_names()
                .iter()
                .enumerate()
                .filter(|(i, _)| cup[i / 64] & (1 << (i % 64)) != 0)
                .map(|(_, n)| n.clone())
                .collect();
            let class = if vanishes {
                match target {
                    Target::C4Delta => classify_vanishing_pair_delta(&table, &a, &b)
                        .map(|c| serde_json::to_value(c).unwrap())
                        .map_err(massey_err)?,
                    Target::C4Raag => classify_vanishing_pair_raag(&table, &a, &b)
                        .map(|c| serde_json::to_value(c).unwrap())
                        .map_err(massey_err)?,
                    Target::Sap(_) => unreachable!(),
                }
            } else {
                Value::Null
            };
            print_json(&json!({
                "schema": REPORT_SCHEMA,
                "seed": seed,
                "a": a.to_string(),
                "b": b.to_string(),
                "vanishes": vanishes,
                "cup": cup_classes,
                "class": class,
            }));
        }
        Command::Massey { target, alpha, k } => {
            let target = parse_target(&target, k)?;
            let len = target.character_len();
            let alphas = alpha
                .split(';')
                .map(|part| Character::parse(part.trim(), len))
                .collect::<Result<Vec<_>, _>>()
                .map_err(massey_err)?;
            let solution = strong_massey_solve(target, &alphas).map_err(massey_err)?;
            let names = generator_names(target);
            let used: Vec<usize> = target
                .generator_indices()
                .iter()
                .map(|&g| g as usize)
                .collect();
            print_json(&json!({
                "schema": REPORT_SCHEMA,
                "seed": seed,
                "alphas": alphas.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "matrix_size": solution.target_size,
                "runs": solution.runs,
                "images": images_json(&names, &solution.images, &used),
                "relators_checked": relator_names(target),
                "superdiagonals_checked": true,
                "verified": true,
            }));
        }
        Command::KuWitness {
            target,
            word,
            k,
            trunc,
        } => {
            check_trunc(trunc)?;
            let target = parse_target(&target, k)?;
            match target {
                Target::Sap(k) => {
                    let w = GroupWord::parse_with_prefix(&word, 'y').map_err(input_err)?;
                    let witness = ku_witness_sap(k, &w, trunc).map_err(ku_err)?;
                    let names = generator_names(target);
                    let used: Vec<usize> = (1..=k).collect();
                    print_json(&json!({
                        "schema": REPORT_SCHEMA,
                        "seed": seed,
                        "word": word,
                        "matrix_size": witness.n,
                        "witness_word": witness.word.iter().map(|l| format!("Y{l}")).collect::<Vec<_>>(),
                        "images": images_json(&names, &witness.images, &used),
                        "value": matrix_json(&witness.value),
                        "relators_checked": relator_names(target),
                        "verified": true,
                    }));
                }
                Target::C4Delta => {
                    let w = GroupWord::parse(&word).map_err(input_err)?;
                    let witness = ku_witness_c4(&w, trunc).map_err(ku_err)?;
                    let names = generator_names(target);
                    let used: Vec<usize> = (0..=4).collect();
                    print_json(&json!({
                        "schema": REPORT_SCHEMA,
                        "seed": seed,
                        "word": word,
                        "projection": witness.projection,
                        "matrix_size": witness.n,
                        "witness_word": witness.word.iter().map(|l| format!("Y{l}")).collect::<Vec<_>>(),
                        "images": images_json(&names, &witness.images, &used),
                        "value": matrix_json(&witness.value),
                        "relators_checked": relator_names(Target::C4Delta),
                        "verified": true,
                    }));
                }
                Target::C4Raag => {
                    return Err(CliError::Input(
                        "ku-witness supports sap and c4-delta".into(),
                    ))
                }
            }
        }
        Command::Lemmquad { n } => {
            let solution = solve_lemmquad(n).map_err(|e| match e {
                UnipotentError::SizeTooSmall(_) => domain_err(e),
                other => domain_err(other),
            })?;
            print_json(&json!({
                "schema": REPORT_SCHEMA,
                "seed": seed,
                "n": n,
                "matrix_size": n + 1,
                "a1": matrix_json(&solution.a1),
                "b1": matrix_json(&solution.b1),
                "a2": matrix_json(&solution.a2),
                "b2": matrix_json(&solution.b2),
                "verified": solution.verify(),
            }));
        }
    }
    Ok(())
}

/// The lifting and detection transcripts are defined for the 4-cycle with
/// the trivial twist; anything else is a domain error.
fn ensure_c4_target(g: &Graph, z: &ZVector) -> Result<(), CliError> {
    let c4 = Graph::cycle(4).unwrap();
    let same = draag::recognition::canonical_form(g).ok().map(|(c, _)| c)
        == draag::recognition::canonical_form(&c4).ok().map(|(c, _)| c);
    if !same || !z.is_trivial() {
        return Err(CliError::Domain(
            "massey/ku transcripts are only defined for the 4-cycle with the trivial twist".into(),
        ));
    }
    Ok(())
}

fn relator_names(target: Target) -> Vec<String> {
    let prefix = if matches!(target, Target::Sap(_)) {
        'y'
    } else {
        'x'
    };
    target
        .relators()
        .iter()
        .map(|r| r.display_with_prefix(prefix))
        .collect()
}

fn generator_names(target: Target) -> Vec<String> {
    match target {
        Target::C4Delta | Target::C4Raag => (0..=4).map(|i| format!("x{i}")).collect(),
        Target::Sap(k) => (0..=k).map(|i| format!("y{i}")).collect(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
