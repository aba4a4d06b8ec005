//! Dataset records with their train/test splits and JSONL persistence.

mod io;
mod split;
mod stats;
mod triple;

pub use io::{
    config_hash, count_by_type, export_jsonl, import_jsonl, read_jsonl, write_json_pretty,
    write_jsonl, DatasetManifest, FineTuningMetadata, JsonlError, ManifestCounts, TOOL_NAME,
    TOOL_VERSION,
};
pub use split::{split, SplitError, SplitSpec, REFERENCE_TRAIN_FRACTION};
pub use stats::{stats, CorpusStats, KindCounts};
pub use triple::{assemble, assemble_case, AssembleError, Assembly, DatasetTriple, Exclusion, NormalCqs};
