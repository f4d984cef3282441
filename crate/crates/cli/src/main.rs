use clap::Parser;
use ttspin::commands::{self, BuildArgs, FixtureArgs, SpectrumArgs, ValidateArgs};

#[derive(Parser)]
#[command(name = "ttspin", version, about = "Tensor-train NMR spectra for many-spin systems")]
enum Cli {
    /// Assemble and compress a spin system's Liouvillian.
    Build(BuildArgs),
    /// Sweep a frequency window and write the 1D spectrum.
    Spectrum(SpectrumArgs),
    /// Cross-check the tensor pipeline against the dense oracle.
    Validate(ValidateArgs),
    /// Write a synthetic backbone-chain spin system.
    Fixture(FixtureArgs),
}

fn main() {
    ttspin::init_threads();
    let result = match Cli::parse() {
        Cli::Build(args) => commands::build(&args),
        Cli::Spectrum(args) => commands::spectrum_cmd(&args),
        Cli::Validate(args) => commands::validate(&args),
        Cli::Fixture(args) => commands::fixture(&args),
    };
    let code = match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    };
    std::process::exit(code);
}
