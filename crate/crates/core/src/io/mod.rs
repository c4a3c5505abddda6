//! File formats: PLY scenes, plain-text label and mask files, JSON class
//! groups, scene specs and metric reports, and the binary weight container.

mod labels;
mod ply;
mod report;
mod weights;

pub use labels::{parse_labels, read_mask, read_pred_labels, write_labels, write_mask};
pub use ply::{encode_scene, parse_scene, read_scene, write_scene, PlyFormat};
pub use report::{
    format_metric, read_groups, read_json, read_report, report_from_json, report_to_json,
    write_json, write_report,
};
pub use weights::{decode_weights, encode_weights, read_weights, write_weights, WEIGHTS_MAGIC};
