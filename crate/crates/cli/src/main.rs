use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use farmtwin::explain::{
    answer, grounding_check, load_knowledge_base, ChatBackend, LexicalIndex, RemoteBackend, RemoteConfig, StubBackend,
    DEFAULT_CHUNK_OVERLAP, DEFAULT_CHUNK_SIZE, DEFAULT_TOP_K,
};
use farmtwin::{DecisionRecord, Error, Ledger, Outcome, ScenarioConfig, StatusSnapshot};

#[derive(Parser)]
#[command(name = "farmtwin", version, about = "Drone-fleet farm digital twin: simulate, replay and explain dispatch decisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a scenario with randomly placed blight patches.
    GenFarm {
        #[arg(long, default_value_t = 20)]
        rows: u32,
        #[arg(long, default_value_t = 20)]
        cols: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario and write its ledger.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print decision traces from a ledger.
    Replay {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        decision: Option<u64>,
    },
    /// Explain one decision.
    Ask {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        decision: u64,
        #[arg(long)]
        question: String,
        #[arg(long, value_enum, default_value_t = Backend::Stub)]
        backend: Backend,
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        k: usize,
        /// Print the full explanation as JSON.
        #[arg(long)]
        json: bool,
        /// Echo the prompt and log backend traffic (API key redacted).
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Stub,
    Remote,
}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_BACKEND: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let verbose = matches!(cli.command, Command::Ask { verbose: true, .. });
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if verbose { "debug" } else { "warn" }))
        .init();

    match execute(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Backend { .. } => EXIT_BACKEND,
                _ => EXIT_DATA,
            })
        }
    }
}

fn execute(command: Command) -> farmtwin::Result<String> {
    match command {
        Command::GenFarm { rows, cols, seed, out } => {
            let cfg = ScenarioConfig::generated(rows, cols, seed);
            cfg.validate()?;
            cfg.save(&out)?;
            Ok(format!(
                "wrote {rows}x{cols} scenario ({} blight patches, seed {seed}) to {}\n",
                cfg.field.blight_patches.len(),
                out.display()
            ))
        }
        Command::Run { config, out } => {
            let ledger = farmtwin::run(ScenarioConfig::load(&config)?)?;
            ledger.save(&out)?;
            Ok(run_summary(&ledger, &out))
        }
        Command::Replay { ledger, decision } => {
            let ledger = Ledger::load(&ledger)?;
            match decision {
                Some(id) => {
                    let (record, snapshot) = ledger.get_decision(id)?;
                    Ok(trace(record, snapshot))
                }
                None => Ok(ledger
                    .decisions
                    .iter()
                    .zip(&ledger.snapshots)
                    .map(|(r, s)| trace(r, s))
                    .collect::<Vec<_>>()
                    .join("\n")),
            }
        }
        Command::Ask { ledger, kb, decision, question, backend, k, json, verbose } => {
            let ledger = Ledger::load(&ledger)?;
            let index = LexicalIndex::new(load_knowledge_base(&kb, DEFAULT_CHUNK_SIZE, DEFAULT_CHUNK_OVERLAP)?)?;
            let backend: Box<dyn ChatBackend> = match backend {
                Backend::Stub => Box::new(StubBackend),
                Backend::Remote => Box::new(RemoteBackend::new(RemoteConfig::from_env()?)),
            };
            let explanation = answer(&question, decision, &ledger, &index, backend.as_ref(), k)?;
            let report = grounding_check(&explanation);
            if json {
                let value = serde_json::json!({ "explanation": explanation, "grounding": report });
                return Ok(serde_json::to_string_pretty(&value)? + "\n");
            }
            let mut out = String::new();
            if verbose {
                let _ = writeln!(out, "--- prompt ---\n{}--- end prompt ---\n", explanation.prompt_echo.render());
            }
            let _ = writeln!(out, "{}\n", explanation.answer_text);
            let ids: Vec<_> = explanation.used_chunk_ids.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "backend: {}", explanation.backend_id.as_str());
            let _ = writeln!(out, "chunks: {}", if ids.is_empty() { "(none)".to_string() } else { ids.join(", ") });
            let _ = write!(out, "grounding: {} numbers checked, ", report.numbers_checked);
            if report.passed() {
                let _ = writeln!(out, "all grounded");
            } else {
                let _ = writeln!(out, "ungrounded: {}", report.ungrounded.join(", "));
            }
            Ok(out)
        }
    }
}

fn run_summary(ledger: &Ledger, out: &std::path::Path) -> String {
    let count = |o: Outcome| ledger.decisions.iter().filter(|d| d.outcome == o).count();
    format!(
        "{} events, {} decisions ({} dispatched, {} no_feasible_drone, {} no_trigger), {} tiles pending; ledger written to {}\n",
        ledger.events.len(),
        ledger.decisions.len(),
        count(Outcome::Dispatched),
        count(Outcome::NoFeasibleDrone),
        count(Outcome::NoTrigger),
        ledger.pending_tiles().len(),
        out.display()
    )
}

fn trace(record: &DecisionRecord, snapshot: &StatusSnapshot) -> String {
    let t = &record.trigger;
    let th = &record.thresholds_snapshot;
    let mut s = String::new();
    let _ = writeln!(s, "decision {} at t={}", record.decision_id, record.sim_time);
    let cmp = if t.confidence < t.t_alpha { "<" } else { ">=" };
    let _ = writeln!(
        s,
        "  trigger: tile {} observed_mean {} confidence {} {cmp} t_alpha {}",
        t.tile_id, t.observed_mean, t.confidence, t.t_alpha
    );
    let _ = writeln!(s, "  thresholds: t_alpha {} t_b {}", th.t_alpha, th.t_b);
    let _ = writeln!(
        s,
        "  fleet: {} drones, tiles inspected {} pending {} unscanned {}",
        snapshot.drones.len(),
        snapshot.tiles.inspected,
        snapshot.tiles.pending_inspection,
        snapshot.tiles.unscanned
    );
    if !record.candidates.is_empty() {
        let _ = writeln!(
            s,
            "  {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}  verdict",
            "drone", "t_rem", "t_disp", "t_insp", "delta_t", "battery"
        );
        for c in &record.candidates {
            let verdict = match (c.feasible, c.rejection_reason) {
                (true, _) if record.selected_drone_id == Some(c.drone_id) => "selected".to_string(),
                (true, _) => "feasible".to_string(),
                (false, Some(r)) => format!("rejected: {}", r.as_str()),
                (false, None) => "rejected".to_string(),
            };
            let _ = writeln!(
                s,
                "  {:>5} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}  {verdict}",
                c.drone_id, c.t_rem, c.t_disp, c.t_insp, c.delta_t, c.predicted_battery
            );
        }
    }
    let outcome = match (record.outcome, record.selected_drone_id) {
        (Outcome::Dispatched, Some(d)) => format!("dispatched drone {d}"),
        (Outcome::NoFeasibleDrone, _) if record.candidates.is_empty() => {
            "no_feasible_drone (no eligible drone), tile queued".to_string()
        }
        (Outcome::NoFeasibleDrone, _) => format!("no_feasible_drone (no predicted battery above t_b {}), tile queued", th.t_b),
        (o, _) => o.as_str().to_string(),
    };
    let _ = writeln!(s, "  outcome: {outcome}");
    s
}
