use std::io::{BufRead, Write};
use std::num::NonZeroU16;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use consortium_core::analytics::{annual_report, export_document, filtered_report};
use consortium_core::clock::{Clock, SystemClock};
use consortium_core::fixtures::{fixture_clock, seed_fixture, SeedProfile};
use consortium_core::persistence::DB_PATH_ENV;
use consortium_core::{AuthConfig, Consortium, ExportFormat, FilterSpec, Scope};
use consortium_server::config::{ServiceConfig, DEFAULT_PORT, PORT_ENV};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "consortium",
    version,
    about = "R&D consortium reporting service"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = PORT_ENV, default_value_t = NonZeroU16::new(DEFAULT_PORT).unwrap())]
        port: NonZeroU16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, env = DB_PATH_ENV)]
        db: PathBuf,
    },
    /// Load a fixture into an empty store (or any store in dev mode).
    Seed {
        /// `canonical`, `canonical-registry` or `random`.
        #[arg(long, default_value = "canonical")]
        profile: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        size: usize,
        #[arg(long, env = DB_PATH_ENV)]
        db: PathBuf,
    },
    /// Write a report document to a file or stdout.
    Export {
        /// Annual report year. Without it every period is included.
        #[arg(long)]
        year: Option<i32>,
        #[arg(long, default_value = "consortium")]
        scope: String,
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = DB_PATH_ENV)]
        db: PathBuf,
    },
    /// Create an administrator. The password is read from stdin.
    CreateAdmin {
        #[arg(long)]
        username: String,
        #[arg(long, env = DB_PATH_ENV)]
        db: PathBuf,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn auth_config() -> Result<AuthConfig, String> {
    AuthConfig::from_env()
}

fn open(db: &Path, auth: AuthConfig) -> Result<Consortium, String> {
    Consortium::open(db, auth).map_err(|e| format!("{}: {e}", db.display()))
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Serve { port, host, db } => {
            let mut config = ServiceConfig::new(db, port, auth_config()?);
            config.host = host;
            let consortium = Arc::new(open(&config.db_path, config.auth.clone())?);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            runtime
                .block_on(consortium_server::serve(consortium, &config))
                .map_err(|e| e.to_string())
        }
        Command::Seed {
            profile,
            seed,
            size,
            db,
        } => {
            let profile = match profile.as_str() {
                "random" => SeedProfile::Random { seed, size },
                other => other.parse::<SeedProfile>().map_err(|e| e.to_string())?,
            };
            let consortium = Consortium::open_with_clock(&db, auth_config()?, fixture_clock())
                .map_err(|e| format!("{}: {e}", db.display()))?;
            let summary = seed_fixture(&consortium, profile).map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?
            );
            Ok(())
        }
        Command::Export {
            year,
            scope,
            format,
            out,
            db,
        } => {
            let format: ExportFormat = format
                .parse()
                .map_err(|e: consortium_core::Error| e.to_string())?;
            let consortium = open(&db, auth_config()?)?;
            let tables = consortium.store().snapshot();
            let scope = Scope::parse(&scope, &tables).map_err(|e| e.to_string())?;
            let now = SystemClock.now();
            let doc = match year {
                Some(year) => annual_report(&tables, year, &scope, now),
                None => filtered_report(&tables, &FilterSpec::for_scope(scope), now)
                    .map_err(|e| e.to_string())?,
            };
            let bytes = export_document(&doc, format);
            match out {
                Some(path) => {
                    std::fs::write(&path, bytes).map_err(|e| format!("{}: {e}", path.display()))
                }
                None => std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| e.to_string()),
            }
        }
        Command::CreateAdmin { username, db } => {
            let consortium = open(&db, auth_config()?)?;
            eprint!("password for {username}: ");
            let _ = std::io::stderr().flush();
            let mut password = String::new();
            std::io::stdin()
                .lock()
                .read_line(&mut password)
                .map_err(|e| e.to_string())?;
            let password = password.trim_end_matches(['\r', '\n']);
            let user = consortium
                .bootstrap_admin(&username, password)
                .map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string(&user).map_err(|e| e.to_string())?
            );
            Ok(())
        }
    }
}
