//! Desk-scale empirical side: factor sieving, least-P₂ search,
//! Mertens products, the Selberg Λ² block, and the Richert-weighted
//! sifting sum.

pub mod almost_prime;
pub mod factor;
pub mod mertens;
pub mod selberg;
pub mod weighted;

pub use almost_prime::{least_p2, survey, AlmostPrimeError, AlmostPrimeRecord, SurveyRow, SurveySummary};
pub use factor::{build_factor_table, FactorError, FactorTable};
pub use mertens::{mertens_products, MertensProducts};
pub use selberg::{selberg_weights, sieve_inequality_check, SelbergError, SelbergSystem, SieveCheck};
pub use weighted::{weighted_sum, CutoffMode, WeightedError, WeightedSumReport};
