use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;
use tutor_core::{HomeworkId, Role, Store};
use tutor_server::settings::{self, FileConfig, Overrides, ENV_DB};
use tutor_server::{handlers, seed, AppState};

#[derive(Parser)]
#[command(
    name = "tutor-server",
    version,
    about = "Guided homework tutor service"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = ENV_DB)]
        db: Option<PathBuf>,
        /// Address to bind, e.g. 127.0.0.1:8080.
        #[arg(long)]
        listen: Option<String>,
        /// TOML settings file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Answer with canned replies instead of calling a provider.
        #[arg(long)]
        mock_provider: bool,
    },
    /// Create demo users and the two sample assignments.
    SeedDemo {
        #[arg(long, env = ENV_DB, default_value = settings::DEFAULT_DB)]
        db: PathBuf,
        /// Credential given to every demo account.
        #[arg(long, default_value = "demo")]
        credential: String,
    },
    /// Write every transcript of one assignment to a directory.
    ExportTranscripts {
        #[arg(long, env = ENV_DB, default_value = settings::DEFAULT_DB)]
        db: PathBuf,
        #[arg(long)]
        homework: String,
        #[arg(long, default_value = "transcripts")]
        out: PathBuf,
    },
    /// Provision an account.
    AddUser {
        #[arg(long, env = ENV_DB, default_value = settings::DEFAULT_DB)]
        db: PathBuf,
        #[arg(long)]
        username: String,
        #[arg(long)]
        display_name: String,
        #[arg(long, value_parser = ["instructor", "student"])]
        role: String,
        #[arg(long)]
        credential: String,
    },
}

type BoxError = Box<dyn std::error::Error>;

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

async fn run(cli: Cli) -> Result<(), BoxError> {
    match cli.command {
        Command::Serve {
            db,
            listen,
            config,
            mock_provider,
        } => {
            let file = match &config {
                Some(path) => FileConfig::load(path)?,
                None => FileConfig::default(),
            };
            let overrides = Overrides {
                db,
                listen,
                mock_provider,
            };
            let resolved = settings::resolve(overrides, file, |k| std::env::var(k).ok())?;
            let gateway = settings::build_gateway(&resolved.provider)?;
            let store = Store::open(&resolved.db)?;
            if let Some(model) = resolved.initial_model {
                if store.stored_config()?.is_none() {
                    let config = tutor_core::TutorConfig {
                        model_id: model,
                        ..Default::default()
                    };
                    store.put_config(&config)?;
                }
            }
            let state = AppState::new(Arc::new(store), gateway).with_token_ttl(resolved.token_ttl);
            let listener = tokio::net::TcpListener::bind(&resolved.listen).await?;
            tracing::info!(addr = %listener.local_addr()?, db = %resolved.db.display(), "listening");
            axum::serve(listener, tutor_server::router(state))
                .with_graceful_shutdown(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
        }
        Command::SeedDemo { db, credential } => {
            let store = Store::open(&db)?;
            let report = seed::seed_demo(&store, &credential)?;
            for name in &report.created_users {
                println!("user {name} created (credential: {credential})");
            }
            for hw in &report.created_homework {
                println!("homework {} {:?} ({})", hw.id, hw.title, hw.mode.as_str());
            }
            for item in &report.skipped {
                println!("{item} already present, skipped");
            }
        }
        Command::ExportTranscripts { db, homework, out } => {
            let store = Store::open(&db)?;
            let written = tutor_server::export::export_transcripts(
                &store,
                &HomeworkId::from(homework),
                &out,
            )?;
            for path in &written {
                println!("{}", path.display());
            }
            eprintln!("{} transcript(s) written", written.len());
        }
        Command::AddUser {
            db,
            username,
            display_name,
            role,
            credential,
        } => {
            let role = Role::parse(&role).expect("clap restricts the value");
            let store = Store::open(&db)?;
            let user = handlers::new_user(&username, &display_name, role, &credential)?;
            store.put_user(&user)?;
            println!("user {} created with id {}", user.username, user.id);
        }
    }
    Ok(())
}
