use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = rrn_cli::cli::run(rrn_cli::cli::Cli::parse()) {
        let msg = format!("{e:#}").split_whitespace().collect::<Vec<_>>().join(" ");
        eprintln!("rrn: error: {msg}");
        std::process::exit(1);
    }
}
