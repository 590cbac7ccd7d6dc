//! Experiment harness for [`feasilab_core`]: instance files, random-restart
//! campaigns, warm-start chains, gap clustering and tabular outputs.
//!
//! * [`io`]: the two-file instance format (JSON manifest plus binary arrays),
//! * [`campaign`]: parallel campaigns with shared, seeded starts,
//! * [`cluster`]: one-dimensional k-means over final gaps,
//! * [`stats`]: summary statistics and Spearman rank correlation,
//! * [`tables`]: `traces.csv`, `finals.csv`, `chain.csv` and `summary.json`.

pub mod campaign;
pub mod cluster;
pub mod error;
pub mod io;
pub mod stats;
pub mod tables;

pub use campaign::{
    default_rule, field_hash, run_campaign, run_chain_campaign, Algo, AlgorithmRun, CampaignConfig,
    CampaignOutcome, CampaignSummary, ChainConfig, ChainRow, RunRecord,
};
pub use error::{HarnessError, Result};
pub use io::{load_instance, save_instance, FormatError};
pub use tables::{emit_tables, resummarize};
