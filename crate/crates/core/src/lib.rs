//! Seriation by l∞ fitting of Robinsonian dissimilarities.

pub mod canonical;
pub mod cells;
pub mod chain;
pub mod dissimilarity;
pub mod error;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod order_fit;
pub mod solver;
pub mod thresholds;
pub mod twosat;

pub use dissimilarity::{linf_distance, Dissimilarity, TotalOrder};
pub use error::{Error, Result};
pub use order_fit::{
    candidate_errors, check_robinson, compatibility_violation, fit_for_order, subinterval_max, FitResult,
};
