//! Run configuration, command orchestration and report rendering.

mod commands;
mod compare;
mod config;
mod plot;
mod render;

pub use commands::{
    cmd_compare, cmd_dataset, cmd_detect, cmd_estimate, cmd_plot, cmd_synth, exit_code,
    load_choice_data, load_tracks, run_pipeline, CommandOutput,
};
pub use compare::{compare_models, Comparison, ModelSummary, AIC_TOLERANCE, SIGNIFICANCE_LEVEL};
pub use config::{
    parse_thresholds, ComparePair, ModelRun, Overrides, PlotConfig, RunConfig, StoredResult,
    SynthConfig,
};
pub use plot::{
    trajectory_polylines, ttc_histogram, write_histogram, write_polylines, HistogramBin, Polyline,
};
pub use render::{render_comparison, render_estimation, render_summary, variable_label};
