//! Search over tabular classification pipelines that scores every
//! intermediate data step with a fixed surrogate tree, memoizes executed step
//! prefixes, and abandons a pipeline as soon as its latest score fails to
//! beat the median of everything recorded so far.
//!
//! * [`tabular`]: datasets, CSV loading, stratified sampling and splitting.
//! * [`steps`]: the step catalog, transforms, learners and the surrogate.
//! * [`engine`]: search spaces, the history of experiments and the search
//!   loop itself.

pub mod engine;
pub mod steps;
pub mod tabular;
