//! Information content of partially rank-ordered set (PROS) samples.
//!
//! The crate computes Fisher information matrices, Shannon and Rényi
//! entropies and Kullback–Leibler information of PROS samples, compares
//! them with simple random and ranked set samples, and draws such samples.
//!
//! ```
//! use prosinfo::{fi_pros_complete, fi_srs, relative_efficiency, Model, QuadratureSpec};
//!
//! let spec = QuadratureSpec::default();
//! let model = Model::exponential(1.0)?;
//! let pros = fi_pros_complete(&model, 2, 6, 1, &spec)?;
//! let srs = fi_srs(&model, 2, &spec)?;
//! let re = relative_efficiency(&pros.matrix, &srs)?;
//! assert!((re - 3.0205).abs() < 1e-3);
//! # Ok::<(), prosinfo::Error>(())
//! ```

pub mod cli;
pub mod densities;
pub mod designs;
pub mod entropy;
pub mod error;
pub mod information;
pub mod models;
pub mod numerics;
pub mod sampling;

pub use densities::{g_factor, imperfect_subset_pdf, order_stat_pdf, subset_pdf, unbalanced_subset_pdf, Tilt};
pub use designs::{
    make_balanced_design, make_symmetric_alpha, Design, MisplacementMatrix, UnbalancedDesign, UnbalancedSet,
};
pub use entropy::{kl_chain, kl_pros_srs, renyi, shannon, shifted_reference, DesignKind, EntropyReport, KlChain};
pub use error::{Error, Result};
pub use information::{
    efficiency_polynomial, fi_complete_mc, fi_pros_complete, fi_pros_marginal, fi_rss_complete, fi_rss_marginal,
    fi_srs, fi_unbalanced, h_matrix, k_matrix, regression_fi, relative_efficiency, relative_efficiency_with_error,
    verify_lemma_identity, FIResult, McConfig, Method,
};
pub use models::{Family, Model, Param};
pub use numerics::{InfoMatrix, MCEstimate, QuadratureSpec};
pub use sampling::{
    draw_pros, draw_srs, draw_unbalanced_pros, estimate_dell_clutter_alpha, DellClutterConfig, ProsSample, ProsUnit,
};
