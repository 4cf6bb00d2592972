//! Configuration, seeded experiment runs, CSV output and the verification
//! suite behind the `dbal` binary.

pub mod config;
pub mod experiment;
pub mod verify;

pub use config::{parse_algorithms, Algorithm, ClassSpec, ExperimentConfig};
pub use experiment::{
    labels_to_threshold, read_csv, run_experiment, run_trial, write_csv, write_csv_file,
    ExperimentRecord, CSV_HEADER,
};
