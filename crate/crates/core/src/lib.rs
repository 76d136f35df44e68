pub mod alasso;
pub mod data;
pub mod density_eval;
pub mod error;
pub mod lp;
pub mod ncqr;
pub mod risk_metrics;
pub mod spillover;
pub mod synth;

pub use error::{Error, Result};
