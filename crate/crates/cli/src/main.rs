use std::process::ExitCode;

use clap::{Parser, Subcommand};

use giml_cli::commands::{
    inspect_cmd, keywords_cmd, run_cmd, serve_cmd, translate_cmd, validate_cmd, InspectArgs, RunArgs, ServeArgs,
    TranslateArgs, ValidateArgs,
};

/// Tools for GIML gaze-interaction documents.
#[derive(Parser)]
#[command(name = "giml", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check documents and report diagnostics.
    Validate(ValidateArgs),
    /// Rewrite a document's keywords into another language.
    Translate(TranslateArgs),
    /// Print the canonical form of a document.
    Inspect(InspectArgs),
    /// Replay a gaze trace through a document and write the logs.
    Run(RunArgs),
    /// Run a document live for one player connection.
    Serve(ServeArgs),
    /// Print the keyword table.
    Keywords,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(a) => validate_cmd(a),
        Command::Translate(a) => translate_cmd(a),
        Command::Inspect(a) => inspect_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Serve(a) => serve_cmd(a),
        Command::Keywords => keywords_cmd(),
    };
    match result {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
