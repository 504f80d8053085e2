mod config;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Core(aniso_core::Error),
    Config(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Config(_) => "E_CONFIG",
            CliError::Io(_) => "E_IO",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<aniso_core::Error> for CliError {
    fn from(e: aniso_core::Error) -> Self {
        CliError::Core(e)
    }
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("ANISO_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("ANISO_THREADS must be a positive integer, got {v}")))?;
        if n == 0 {
            return Err(CliError::Config("ANISO_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // usage errors must not collide with the violation exit status
    let flags = match RunConfig::try_parse() {
        Ok(f) => f,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("bad arguments").trim_start_matches("error: ");
            eprintln!("error[E_CONFIG]: {first}");
            return ExitCode::from(1);
        }
    };
    let status = init_threads().and_then(|_| RunConfig::load(flags)).and_then(|cfg| run::run(&cfg));
    match status {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.code());
            ExitCode::from(1)
        }
    }
}
