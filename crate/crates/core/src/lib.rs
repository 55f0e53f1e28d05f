//! Layer-wise pruning decisions for adapter-tuned vision transformers.
//!
//! Each layer's class-token features are embedded in 2-D with exact t-SNE and
//! scored by the silhouette of the true labels. Walking down from the top layer,
//! the first layer scoring below `alpha` times the top score fixes how many layers
//! to keep. Because whole layers are removed, each dataset only adds a retained
//! depth to what an adapter-tuned model already stores.
//!
//! ```
//! use sls_core::{plan_prune, ScProfile};
//!
//! let profile = ScProfile::from_values("demo", vec![0.05, 0.10, 0.12, 0.20, 0.35, 0.50]);
//! let plan = plan_prune(&profile, 0.3).unwrap();
//! assert_eq!(plan.keep_layers, 4);
//! assert_eq!(plan.pruned_range, Some([5, 6]));
//! ```

pub mod error;
pub mod metrics;
pub mod planner;
pub mod toybench;
pub mod trace;
pub mod tsne;

pub use error::{Error, Result};
pub use metrics::{silhouette, silhouette_score, Metric, SilhouetteDetail};
pub use planner::{
    evaluate_all_layers, evaluate_layer, plan_prune, storage_report, ModelStorageSpec, PruningPlan, ScProfile,
    StorageReport, Strategy,
};
pub use toybench::{
    gen_synthetic_trace, lr_at, run_benchmark, train_probe, BenchmarkReport, LrSchedule, ProbeResult, RetrainPreset,
    SyntheticSpec,
};
pub use trace::{load_trace, load_trace_file, subsample_trace, write_trace, write_trace_file, FeatureTrace};
pub use tsne::{joint_probs, run_tsne, AffinityModel, Embedding, TsneConfig};
