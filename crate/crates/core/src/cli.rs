//! `admgame` command-line interface: state values, LA tables, admissibility
//! verdicts, assume-admissible synthesis, simulation, and dot export, with
//! deterministic JSON (default) or text output.
//!
//! Exit codes: 0 — success; 1 — domain-level negative answer (no winner, not
//! admissible); 2 — invalid invocation or input.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::aa_synthesis::{
    build_aa_game, extract_admissible_winner, labelled_arena_dot, synthesize_aa_bounded,
    synthesize_aa_safety, validate_vs_admissible, SynthOptions, SynthOutcome,
};
use crate::admissibility::{classify_strategy, la_actions};
use crate::arena::{simulate_run, Arena, MooreStrategy, Player};
use crate::error::{GameError, Result};
use crate::format;
use crate::objectives::{Normalized, ObjectiveKind, Semantics};
use crate::random::admissible_suite;
use crate::values::state_values;

#[derive(Parser, Debug)]
#[command(
    name = "admgame",
    version,
    about = "Admissibility analysis and assume-admissible synthesis for concurrent games"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// State values (-1/0/+1) for one player.
    Values(PlayerArgs),
    /// Locally-admissible actions and equivalence classes per state.
    La(PlayerArgs),
    /// Admissibility verdict for a Moore strategy.
    Check {
        #[arg(long)]
        arena: PathBuf,
        /// Strategy JSON document (its `player` field selects the objective).
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long, value_enum, default_value_t = SemanticsArg::AlmostSure)]
        semantics: SemanticsArg,
    },
    /// Assume-admissible synthesis for one player.
    SynthAa {
        #[command(flatten)]
        target: PlayerArgs,
        /// Maximum Moore-machine memory size for the bounded search.
        #[arg(long, default_value_t = 2)]
        memory_bound: usize,
        /// Maximum number of candidate machines examined.
        #[arg(long, default_value_t = 2_000_000)]
        machine_budget: u64,
        /// Use the exact LA-pruning pipeline (all-safety games only).
        #[arg(long)]
        safety_fast: bool,
        /// Number of admissible adversary profiles in the validation suite.
        #[arg(long, default_value_t = 5)]
        suite_size: usize,
        /// Seed for the validation-suite generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample a run under a full strategy profile.
    Simulate {
        #[arg(long)]
        arena: PathBuf,
        /// One strategy file per player, in player order.
        #[arg(long = "strategy", required = true)]
        strategies: Vec<PathBuf>,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Graphviz rendering of the derived labelled game G̅.
    ExportDot(PlayerArgs),
}

#[derive(Args, Debug)]
struct PlayerArgs {
    #[arg(long)]
    arena: PathBuf,
    /// Player number (1-based).
    #[arg(long)]
    player: usize,
    #[arg(long, value_enum, default_value_t = SemanticsArg::AlmostSure)]
    semantics: SemanticsArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SemanticsArg {
    Sure,
    #[value(name = "almost-sure")]
    AlmostSure,
}

impl From<SemanticsArg> for Semantics {
    fn from(arg: SemanticsArg) -> Semantics {
        match arg {
            SemanticsArg::Sure => Semantics::Sure,
            SemanticsArg::AlmostSure => Semantics::AlmostSure,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = std::io::stdout();
    match run_command(cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Runs one parsed invocation, writing the result to `out`; the returned
/// code distinguishes success (0) from domain-level negatives (1).
pub fn run_command(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    let format = cli.format;
    match cli.command {
        Command::Values(args) => cmd_values(&args, format, out),
        Command::La(args) => cmd_la(&args, format, out),
        Command::Check {
            arena,
            strategy,
            semantics,
        } => cmd_check(&arena, &strategy, semantics.into(), format, out),
        Command::SynthAa {
            target,
            memory_bound,
            machine_budget,
            safety_fast,
            suite_size,
            seed,
        } => cmd_synth(
            &target,
            memory_bound,
            machine_budget,
            safety_fast,
            suite_size,
            seed,
            format,
            out,
        ),
        Command::Simulate {
            arena,
            strategies,
            steps,
            seed,
        } => cmd_simulate(&arena, &strategies, steps, seed, format, out),
        Command::ExportDot(args) => cmd_export_dot(&args, out),
    }
}

fn load_game(path: &PathBuf) -> Result<(format::GameSpec, Normalized)> {
    let text = std::fs::read_to_string(path)?;
    let spec = format::parse_game(&text)?;
    let norm = Normalized::normalize(&spec.arena, &spec.objectives)?;
    Ok((spec, norm))
}

fn resolve_player(norm: &Normalized, player: usize) -> Result<Player> {
    if player < 1 || player > norm.arena().num_players() {
        return Err(GameError::Invalid(format!(
            "player {player} out of range 1..={}",
            norm.arena().num_players()
        )));
    }
    Ok(Player(player - 1))
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[derive(Serialize)]
struct ValuesDoc {
    player: usize,
    semantics: &'static str,
    values: BTreeMap<String, i8>,
}

fn cmd_values(args: &PlayerArgs, format: Format, out: &mut dyn Write) -> Result<u8> {
    let (_, norm) = load_game(&args.arena)?;
    let p = resolve_player(&norm, args.player)?;
    let semantics: Semantics = args.semantics.into();
    let table = state_values(norm.arena(), norm.objective(p), semantics)?;
    let values: BTreeMap<String, i8> = norm
        .arena()
        .states()
        .filter(|&s| norm.is_reachable(s))
        .map(|s| (norm.display_name(s).to_string(), table.get(s)))
        .collect();
    match format {
        Format::Json => emit_json(
            out,
            &ValuesDoc {
                player: args.player,
                semantics: semantics.label(),
                values,
            },
        )?,
        Format::Text => {
            writeln!(out, "state values, player {} ({})", args.player, semantics.label())?;
            for (name, v) in &values {
                writeln!(out, "  {name:<12} {v:+}")?;
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct LaDoc {
    player: usize,
    semantics: &'static str,
    states: BTreeMap<String, LaEntry>,
}

#[derive(Serialize)]
struct LaEntry {
    la: Vec<String>,
    classes: Vec<Vec<String>>,
}

fn cmd_la(args: &PlayerArgs, format: Format, out: &mut dyn Write) -> Result<u8> {
    let (_, norm) = load_game(&args.arena)?;
    let p = resolve_player(&norm, args.player)?;
    let semantics: Semantics = args.semantics.into();
    let table = la_actions(norm.arena(), norm.objective(p), semantics)?;
    let states: BTreeMap<String, LaEntry> = norm
        .arena()
        .states()
        .filter(|&s| norm.is_reachable(s))
        .map(|s| {
            let entry = LaEntry {
                la: table
                    .la_actions(s)
                    .iter()
                    .map(|&a| norm.display_action(a).to_string())
                    .collect(),
                classes: table
                    .classes(s)
                    .iter()
                    .map(|c| c.iter().map(|&a| norm.display_action(a).to_string()).collect())
                    .collect(),
            };
            (norm.display_name(s).to_string(), entry)
        })
        .collect();
    match format {
        Format::Json => emit_json(
            out,
            &LaDoc {
                player: args.player,
                semantics: semantics.label(),
                states,
            },
        )?,
        Format::Text => {
            writeln!(out, "LA actions, player {} ({})", args.player, semantics.label())?;
            for (name, entry) in &states {
                let classes: Vec<String> =
                    entry.classes.iter().map(|c| format!("{{{}}}", c.join(" "))).collect();
                writeln!(out, "  {name:<12} {}", classes.join(" "))?;
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct CheckDoc {
    player: usize,
    semantics: &'static str,
    la: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    la_witness: Option<WitnessDoc>,
    sco: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sco_witness: Option<NodeDoc>,
    admissible: bool,
}

#[derive(Serialize)]
struct NodeDoc {
    state: String,
    memory: String,
}

#[derive(Serialize)]
struct WitnessDoc {
    state: String,
    memory: String,
    action: String,
}

fn cmd_check(
    arena_path: &PathBuf,
    strategy_path: &PathBuf,
    semantics: Semantics,
    format: Format,
    out: &mut dyn Write,
) -> Result<u8> {
    let (spec, norm) = load_game(arena_path)?;
    let text = std::fs::read_to_string(strategy_path)?;
    let strategy = format::parse_strategy(&text, &spec.arena)?;
    let lifted = norm.lift_strategy(&strategy)?;
    let p = strategy.player();
    let verdict = classify_strategy(norm.arena(), norm.objective(p), semantics, &lifted)?;
    let doc = CheckDoc {
        player: p.0 + 1,
        semantics: semantics.label(),
        la: verdict.la,
        la_witness: verdict.la_witness.map(|((s, m), a)| WitnessDoc {
            state: norm.display_name(s).to_string(),
            memory: lifted.memory_name(m).to_string(),
            action: norm.display_action(a).to_string(),
        }),
        sco: verdict.sco,
        sco_witness: verdict.sco_witness.map(|(s, m)| NodeDoc {
            state: norm.display_name(s).to_string(),
            memory: lifted.memory_name(m).to_string(),
        }),
        admissible: verdict.admissible,
    };
    match format {
        Format::Json => emit_json(out, &doc)?,
        Format::Text => {
            writeln!(
                out,
                "player {} ({}): {}",
                doc.player,
                doc.semantics,
                if doc.admissible { "admissible" } else { "not admissible" }
            )?;
            if let Some(w) = &doc.la_witness {
                writeln!(out, "  not LA: action {} at {} (memory {})", w.action, w.state, w.memory)?;
            }
            if let Some(w) = &doc.sco_witness {
                writeln!(out, "  not SCO at {} (memory {})", w.state, w.memory)?;
            }
        }
    }
    Ok(if doc.admissible { 0 } else { 1 })
}

#[derive(Serialize)]
struct SynthDoc {
    player: usize,
    semantics: &'static str,
    mode: &'static str,
    outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    strategy: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gbar: Option<GbarDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationDoc>,
}

#[derive(Serialize)]
struct GbarDoc {
    nodes: usize,
    labelled_nodes: usize,
    atoms: BTreeMap<String, usize>,
}

#[derive(Serialize)]
struct ValidationDoc {
    profiles: usize,
    losing: Vec<usize>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    args: &PlayerArgs,
    memory_bound: usize,
    machine_budget: u64,
    safety_fast: bool,
    suite_size: usize,
    seed: u64,
    format: Format,
    out: &mut dyn Write,
) -> Result<u8> {
    let (_, norm) = load_game(&args.arena)?;
    let p = resolve_player(&norm, args.player)?;
    let semantics: Semantics = args.semantics.into();
    let arena = norm.arena();
    let objectives = norm.objectives();

    let (mode, winner): (&'static str, Option<MooreStrategy>) = if safety_fast {
        if !objectives
            .iter()
            .all(|o| matches!(o.kind, ObjectiveKind::Safety(_)))
        {
            return Err(GameError::Invalid(
                "--safety-fast requires every objective to be a safety objective".into(),
            ));
        }
        ("safety-fast", synthesize_aa_safety(arena, objectives, p)?)
    } else {
        let options = SynthOptions {
            memory_bound,
            machine_budget,
            parallel: cfg!(feature = "parallel"),
        };
        match synthesize_aa_bounded(arena, objectives, p, semantics, &options)? {
            SynthOutcome::Winner(w) => (
                "bounded",
                Some(extract_admissible_winner(arena, objectives, p, semantics, &w)?),
            ),
            SynthOutcome::NoneAtBound => ("bounded", None),
        }
    };

    let (labelled, atoms, _) = build_aa_game(arena, objectives, p, semantics)?;
    let mut atom_sizes = BTreeMap::new();
    for q in arena.players() {
        atom_sizes.insert(format!("val0_{}", q.0 + 1), atoms.val0[q.0].len());
        atom_sizes.insert(format!("val1_{}", q.0 + 1), atoms.val1[q.0].len());
        atom_sizes.insert(
            format!("afterhelp_{}", q.0 + 1),
            atoms.after_help[q.0].len(),
        );
    }
    let gbar = GbarDoc {
        nodes: labelled.num_nodes(),
        labelled_nodes: (0..labelled.num_nodes())
            .filter(|&x| labelled.label(x).is_some())
            .count(),
        atoms: atom_sizes,
    };

    let mut doc = SynthDoc {
        player: args.player,
        semantics: semantics.label(),
        mode,
        outcome: if winner.is_some() { "winner" } else { "none" },
        strategy: None,
        gbar: Some(gbar),
        validation: None,
    };
    if let Some(strategy) = &winner {
        // Per-opponent admissible suites combined position-wise into full
        // adversary profiles.
        let mut suites: Vec<Vec<MooreStrategy>> = Vec::new();
        for q in arena.players() {
            if q == p {
                continue;
            }
            suites.push(admissible_suite(
                arena,
                &objectives[q.0],
                semantics,
                suite_size,
                seed ^ (q.0 as u64),
            )?);
        }
        let rounds = suites.iter().map(|s| s.len()).min().unwrap_or(0);
        let profiles: Vec<Vec<MooreStrategy>> = (0..rounds)
            .map(|i| suites.iter().map(|s| s[i].clone()).collect())
            .collect();
        let report = validate_vs_admissible(arena, objectives, p, semantics, strategy, &profiles)?;
        doc.validation = Some(ValidationDoc {
            profiles: report.total,
            losing: report.losing,
        });
        let json = format::write_strategy_with(
            strategy,
            &|s| norm.display_name(s).to_string(),
            &|a| norm.display_action(a).to_string(),
        );
        doc.strategy = Some(serde_json::from_str(&json)?);
    }

    match format {
        Format::Json => emit_json(out, &doc)?,
        Format::Text => {
            writeln!(
                out,
                "synth-aa player {} ({}, {}): {}",
                doc.player, doc.semantics, doc.mode, doc.outcome
            )?;
            if let Some(v) = &doc.validation {
                writeln!(
                    out,
                    "  validated against {} admissible profiles, losing: {:?}",
                    v.profiles, v.losing
                )?;
            }
            if let Some(s) = &doc.strategy {
                writeln!(out, "{}", serde_json::to_string_pretty(s)?)?;
            }
        }
    }
    Ok(if winner.is_some() { 0 } else { 1 })
}

#[derive(Serialize)]
struct SimulateDoc {
    steps: usize,
    seed: u64,
    run: Vec<String>,
}

fn cmd_simulate(
    arena_path: &PathBuf,
    strategy_paths: &[PathBuf],
    steps: usize,
    seed: u64,
    format: Format,
    out: &mut dyn Write,
) -> Result<u8> {
    let text = std::fs::read_to_string(arena_path)?;
    let spec = format::parse_game(&text)?;
    let arena: &Arena = &spec.arena;
    if strategy_paths.len() != arena.num_players() {
        return Err(GameError::Invalid(format!(
            "expected {} strategy files (one per player), got {}",
            arena.num_players(),
            strategy_paths.len()
        )));
    }
    let mut profile = Vec::new();
    for (i, path) in strategy_paths.iter().enumerate() {
        let text = std::fs::read_to_string(path)?;
        let strat = format::parse_strategy(&text, arena)?;
        if strat.player() != Player(i) {
            return Err(GameError::Invalid(format!(
                "strategy file {} must belong to player {}",
                path.display(),
                i + 1
            )));
        }
        profile.push(strat);
    }
    let run = simulate_run(arena, &profile, steps, seed)?;
    let names: Vec<String> = run.iter().map(|&s| arena.state_name(s).to_string()).collect();
    match format {
        Format::Json => emit_json(
            out,
            &SimulateDoc {
                steps,
                seed,
                run: names,
            },
        )?,
        Format::Text => writeln!(out, "{}", names.join(" -> "))?,
    }
    Ok(0)
}

fn cmd_export_dot(args: &PlayerArgs, out: &mut dyn Write) -> Result<u8> {
    let (_, norm) = load_game(&args.arena)?;
    let p = resolve_player(&norm, args.player)?;
    let semantics: Semantics = args.semantics.into();
    let (labelled, atoms, _) = build_aa_game(norm.arena(), norm.objectives(), p, semantics)?;
    let dot = labelled_arena_dot(
        &labelled,
        &atoms,
        &|s| norm.display_name(s).to_string(),
        &|a| norm.display_action(a).to_string(),
    );
    write!(out, "{dot}")?;
    Ok(0)
}
