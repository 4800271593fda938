//! Bipartite graph convolution predicting which products each segment buys.

mod graph;
mod labels;
mod mat;
mod model;
mod params;
mod train;

pub use graph::{build_graph, GraphData, FEATURE_DIM};
pub use labels::{
    make_labels, parse_targets, serialize_targets, LabeledExample, ProbMatrix, LABELS_HEADER,
    PROBS_HEADER,
};
pub use mat::Mat;
pub use model::{
    bce_with_logit, edge_accuracy, eval_loss, forward, forward_with, layer_outputs, loss_and_grad,
    loss_and_grad_parts, predict_probs, BatchPart, Mode, DEFAULT_DROPOUT, EPSILON,
};
pub use params::{EdgeMlp, GcnParams, LayerParams, Mlp, DEFAULT_HIDDEN, MODEL_HEADER};
pub use train::{train, train_with_report, TrainConfig, TrainReport};
