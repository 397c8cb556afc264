//! One-vs-Rest logistic regression with three interchangeable solvers
//! (batch gradient descent, damped Newton, L1 coordinate descent) and a
//! deterministic train/evaluate/report pipeline.

pub mod dataset;
pub mod importance;
pub mod metrics;
pub mod ovr;
pub mod pipeline;
pub mod preprocess;
pub mod solvers;
