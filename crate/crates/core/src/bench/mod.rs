//! Benchmark harness: dataset ingestion and preprocessing, experiment
//! specs, the experiment drivers, and result tables.

pub mod drivers;
pub mod io;
pub mod spec;
pub mod table;

pub use drivers::{run_deadline_experiment, run_lloyd_experiment, run_trajectory_experiment};
pub use io::{load_csv, minmax_scale, subsample};
pub use spec::{AlgorithmSpec, DatasetSource, ExperimentSpec};
pub use table::{
    export_results, import_results, ExportFormat, ResultRow, ResultTable, SummaryRow, TableMeta,
};
