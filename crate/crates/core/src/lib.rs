//! Early software effort estimation with fuzzy model trees.
//!
//! Projects are described by their use case points, team productivity and
//! a complexity rating. [`fuzzy_tree`] clusters those features with fuzzy
//! c-means, routes each project through an M5-style model tree on its
//! cluster memberships, and predicts effort with linear leaf models.
//! [`baselines`] holds the comparison models and [`eval`] the accuracy
//! measures used to rank them.

// Guards like `!(x > 0.0)` reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod compare;
pub mod data;
pub mod eval;
pub mod fcm;
pub mod fuzzy_tree;
mod linalg;
pub mod mtree;
pub mod stats;
pub mod svg;
pub mod ucp;

pub use linalg::Matrix;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    struct Intro;
    #[doc = include_str!("../../../book/src/data.md")]
    struct Data;
    #[doc = include_str!("../../../book/src/ucp.md")]
    struct Ucp;
    #[doc = include_str!("../../../book/src/fuzzy-clustering.md")]
    struct FuzzyClustering;
    #[doc = include_str!("../../../book/src/model-trees.md")]
    struct ModelTrees;
    #[doc = include_str!("../../../book/src/fuzzy-model-tree.md")]
    struct FuzzyModelTree;
    #[doc = include_str!("../../../book/src/baselines.md")]
    struct Baselines;
    #[doc = include_str!("../../../book/src/evaluation.md")]
    struct Evaluation;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] data::DataError),
    #[error(transparent)]
    Ucp(#[from] ucp::UcpError),
    #[error(transparent)]
    Fcm(#[from] fcm::FcmError),
    #[error(transparent)]
    Tree(#[from] mtree::TreeError),
    #[error(transparent)]
    Fmt(#[from] fuzzy_tree::FmtError),
    #[error(transparent)]
    Baseline(#[from] baselines::BaselineError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
}
