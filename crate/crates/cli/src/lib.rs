//! Batch front end for paradiff: reads a TOML session, runs its commands in
//! order and produces JSON-lines certificates.

pub mod cert;
pub mod error;
pub mod exec;
pub mod session;

pub use cert::{to_jsonl, Certificate, Verdict, TOOL_VERSION};
pub use error::{CliError, EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_VERDICT};
pub use exec::{execute, run_file, run_text, Options, RunOutput};
pub use session::{reingest, ModuleDef, ModuleEntry, Session, SessionFile};
