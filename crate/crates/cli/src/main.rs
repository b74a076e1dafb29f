use std::io::{self, Write};
use std::net::SocketAddr;
use std::process::ExitCode;
use std::time::Duration;

use clap::Parser;
use tracing_subscriber::EnvFilter;

use t2n_cli::{
    build_context, run_batch, run_repl, Cli, Command, CommonArgs, ServeArgs, EXIT_BACKEND,
};
use t2n_service::{AppState, ServiceConfig};
use t2n_session::SessionStore;

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let filter = EnvFilter::try_from_env("T2N_LOG").unwrap_or_else(|_| EnvFilter::new(level));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(io::stderr)
        .init();
}

fn serve(common: &CommonArgs, args: &ServeArgs) -> i32 {
    let ctx = match build_context(common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_BACKEND;
        }
    };
    let addr: SocketAddr = match args.bind.parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: --bind {}: {e}", args.bind);
            return EXIT_BACKEND;
        }
    };
    let config = ServiceConfig {
        cors_origins: args.cors_origin.clone(),
        static_dir: args.static_dir.clone(),
        message_timeout: Duration::from_secs(args.message_timeout),
    };
    let app = AppState::new(SessionStore::new(ctx), config);
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    let result = rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        t2n_service::serve(listener, app).await
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_BACKEND
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.common.verbose);
    let code = match &cli.command {
        None | Some(Command::Repl) => run_repl(&cli.common, io::stdin().lock(), io::stdout()),
        Some(Command::Batch) => {
            let out = run_batch(&cli.common);
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            let _ = io::stdout().flush();
            out.code
        }
        Some(Command::Serve(args)) => serve(&cli.common, args),
    };
    ExitCode::from(code as u8)
}
