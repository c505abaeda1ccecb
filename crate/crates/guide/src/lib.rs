//! The deeptagrec guide. Each module holds one chapter of `book/` so that
//! its examples run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}

#[doc = include_str!("../../../book/src/content-encoder.md")]
pub mod content_encoder {}

#[doc = include_str!("../../../book/src/user-graph.md")]
pub mod user_graph {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/checkpoints.md")]
pub mod checkpoints {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
