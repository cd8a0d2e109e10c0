use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use avse_core::edit::EditOp;
use avse_core::project::{Project, ProjectError};
use avse_core::script::{format_timestamp, BlockId};
use avse_core::server::{serve, AppState};

/// Audio-visual script editor backend.
#[derive(Parser)]
#[command(name = "avse", version)]
struct Cli {
    /// Project directory.
    #[arg(long, global = true, default_value = ".")]
    project: PathBuf,
    /// Config file to use instead of the project's config.json.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure frames and detect visual errors.
    Analyze,
    /// Build the script at revision 0 and print its outline.
    Script,
    /// Apply one edit.
    Edit {
        /// Revision the edit was made against; defaults to the current one.
        #[arg(long, global = true)]
        revision: Option<u64>,
        #[command(subcommand)]
        op: EditCommand,
    },
    /// Search speech, objects, errors and pauses.
    Search {
        #[arg(required = true)]
        query: Vec<String>,
    },
    /// List objects visible at a time in seconds.
    Inspect { time: f64 },
    /// Write edl.json and cutlist.txt.
    ExportEdl,
    /// Serve the HTTP API on localhost.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

#[derive(Subcommand)]
enum EditCommand {
    /// Delete blocks; a scene heading deletes its whole scene.
    DeleteBlock {
        #[arg(required = true)]
        ids: Vec<u64>,
    },
    /// Delete words FROM..TO (exclusive) of a narration block.
    DeleteWords { id: u64, from: usize, to: usize },
    /// Shrink a line to [START, END).
    Trim { id: u64, start: f64, end: f64 },
    /// Set playback speed of blocks.
    Speed {
        factor: f64,
        #[arg(required = true)]
        ids: Vec<u64>,
    },
    /// Undo the latest edit.
    Undo,
}

impl EditCommand {
    fn into_op(self) -> EditOp {
        let ids = |v: Vec<u64>| v.into_iter().map(BlockId).collect();
        match self {
            EditCommand::DeleteBlock { ids: v } => EditOp::DeleteBlocks { targets: ids(v) },
            EditCommand::DeleteWords { id, from, to } => EditOp::DeleteWords {
                target: BlockId(id),
                from,
                to,
            },
            EditCommand::Trim { id, start, end } => EditOp::Trim {
                target: BlockId(id),
                start,
                end,
            },
            EditCommand::Speed { factor, ids: v } => EditOp::Speed {
                targets: ids(v),
                factor,
            },
            EditCommand::Undo => EditOp::Undo,
        }
    }
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

fn run(cli: Cli) -> Result<()> {
    let project = Project::open(&cli.project, cli.config.as_deref())?;
    if let Command::Serve { port } = cli.command {
        let state = AppState::load(project, true)?;
        let rt = tokio::runtime::Runtime::new().context("starting async runtime")?;
        return rt.block_on(serve(state, port)).context("serving");
    }
    let _lock = project.lock()?;
    match cli.command {
        Command::Analyze => {
            let a = project.analyze()?;
            println!("{} frames, {} error segments", a.frames.len(), a.segments.len());
            for s in &a.segments {
                println!("{} {:.3} {:.3}", s.kind.name(), s.start, s.end);
            }
        }
        Command::Script => {
            let out = project.script()?;
            if let Some(moved) = &out.invalidated_log {
                eprintln!(
                    "warning: script regenerated, previous edits no longer apply; moved edit log to {}",
                    moved.display()
                );
            }
            for d in &out.diagnostics {
                eprintln!("warning: scene at {:.3}: {}", d.scene_start, d.message);
            }
            for item in &out.outline {
                println!(
                    "{}\t{}\t{}\t{}",
                    format_timestamp(item.time),
                    json(&item.kind).trim_matches('"'),
                    item.target_block_id,
                    item.label
                );
            }
        }
        Command::Edit { revision, op } => {
            let editor = project.edit(revision, op.into_op())?;
            println!(
                "revision {} output {:.3} s",
                editor.revision(),
                editor.edl().output_duration()
            );
        }
        Command::Search { query } => println!("{}", json(&project.search(&query.join(" "))?)),
        Command::Inspect { time } => println!("{}", json(&project.inspect(time)?)),
        Command::ExportEdl => {
            let plan = project.export()?;
            for w in &plan.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", plan.cut_list);
        }
        Command::Serve { .. } => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<ProjectError>().map_or(3, ProjectError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
