//! Fairness-constrained training of a small regression or classification
//! network. The loss is the task loss plus `lambda * max(0, HGR(z, yhat) - tau)`
//! where `z` is the protected attribute, and `lambda` follows a projected
//! gradient-ascent update.

pub mod dataset;
pub mod model;
pub mod train;

pub use dataset::{preprocess, synthetic_fairness, ColumnKind, Dataset, RawTable, Schema, Task};
pub use model::{Adam, Mlp};
pub use train::{
    auc, cross_validate, cross_validate_fold, evaluate, fold_indices, penalized_loss, predict,
    r_squared, shuffled_indices, summarize, task_loss, train, CrossValSummary, CrossValidation,
    EpochRecord, Evaluation, FoldResult, MeanStd, PenalizedLoss, Penalizer, TrainConfig, TrainRun,
};
