use clap::Parser;
use otut_cli::{exit_code, run, Cli};

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    if let Err(e) = run(cli) {
        let mut msg = e.to_string();
        for cause in e.chain().skip(1) {
            let s = cause.to_string();
            if !msg.contains(&s) {
                msg = format!("{msg}: {s}");
            }
        }
        eprintln!("error: {msg}");
        std::process::exit(exit_code(&e));
    }
}
