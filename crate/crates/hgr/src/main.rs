use clap::Parser;
use hgr::cli::Cli;
use hgr::commands::{run, Output};

fn main() {
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(&cli.command) {
        Ok(Output::Report(report)) => println!("{}", report.to_json_string()),
        Ok(Output::Text(text)) => print!("{text}"),
        Err(e) => {
            eprintln!("{}", e.to_json(name));
            std::process::exit(e.exit_code());
        }
    }
}
