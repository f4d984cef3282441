//! `ttspin`: spin-system JSON in, tensor-train Liouvillians and spectra out.
//!
//! The binary front end is a thin dispatcher over [`commands`]; everything
//! is exposed as a library so integration tests can drive the same code
//! paths without spawning processes. Exit codes are part of the contract:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | filesystem or internal failure |
//! | 2 | input rejected (unreadable, malformed JSON, invalid system, bad grid) |
//! | 3 | `build` summation did not converge (outputs written, flagged) |
//! | 4 | `spectrum` converged on fewer than 90% of grid points |
//! | 5 | `validate` found a deviation above tolerance |
//! | 6 | `validate` input exceeds the dense-oracle size cap |

pub mod commands;
pub mod fixture;
pub mod manifest;

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const SCHEMA: i32 = 2;
    pub const BUILD_NOT_CONVERGED: i32 = 3;
    pub const SPECTRUM_UNDERCONVERGED: i32 = 4;
    pub const ORACLE_MISMATCH: i32 = 5;
    pub const ORACLE_CAP: i32 = 6;
}

/// A run that stops early: what to print on stderr and what to exit with.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn schema(message: impl std::fmt::Display) -> Self {
        Self {
            code: exit_code::SCHEMA,
            message: message.to_string(),
        }
    }

    pub fn io(message: impl std::fmt::Display) -> Self {
        Self {
            code: exit_code::IO,
            message: message.to_string(),
        }
    }

    pub fn cap(message: impl std::fmt::Display) -> Self {
        Self {
            code: exit_code::ORACLE_CAP,
            message: message.to_string(),
        }
    }
}

/// Apply the `TTSPIN_THREADS` cap to the global worker pool (0 or unset
/// means automatic). Call once at startup; later calls are ignored because
/// the pool can only be built once per process.
pub fn init_threads() {
    if let Ok(raw) = std::env::var("TTSPIN_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => eprintln!("warning: ignoring TTSPIN_THREADS={raw:?} (not an integer)"),
        }
    }
}
