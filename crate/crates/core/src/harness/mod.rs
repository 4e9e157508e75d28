//! Experiment driver: configuration, training runs, evaluation, early
//! stopping, sweeps and result files.

mod config;
mod evaluate;
mod prepare;
mod results;
mod summary;
mod sweep;
mod train;

pub use config::{DatasetConfig, EarlyStopRule, EncoderConfig, ExperimentConfig, Precision, Preset, Protocol};
pub use evaluate::{evaluate, present, EvalMetrics, EvalOptions, Outcome};
pub use prepare::{load_data, mean_input_spikes, FittedEncoder, LoadedData};
pub use results::{metrics_csv, summary_json, sweep_csv, write_results, write_sweep};
pub use summary::{early_stop_tracker, CurvePoint, MeanSem, Summary};
pub use sweep::{sweep, SweepGrid, SweepParameter, SweepPoint};
pub use train::{
    accumulate_batch, eval_options, init_network, prepare_run, run_experiment, run_seed, train_fold, window_as,
    Evaluation, ExperimentResult, FoldData, RunMetrics, SplitKind, VERSION,
};
