use thiserror::Error;

use crate::bigraded::Bidegree;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NatcohError {
    #[error("bidegree mismatch: {0} vs {1}")]
    BidegreeMismatch(Bidegree, Bidegree),

    #[error("negative bidegree {0} has no monomials")]
    NegativeBidegree(Bidegree),

    #[error("denominator divisible by {0}")]
    DenominatorDivisibleByP(u64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("entry ({row},{col}) has bidegree {found}, expected {expected}")]
    EntryBidegree {
        row: usize,
        col: usize,
        found: Bidegree,
        expected: Bidegree,
    },

    #[error("g∘f is not zero (first nonzero entry at ({0},{1}))")]
    CompositionNonzero(usize, usize),

    #[error("monad cohomology in several degrees at twist {0}")]
    MixedMonadCohomology(Bidegree),

    #[error("not a monad at twist {0}: {1}")]
    NotAMonad(Bidegree, String),

    #[error("non-integral exponent: {0}")]
    NonIntegral(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("retries exhausted after {attempts} attempts")]
    RetriesExhausted {
        attempts: u32,
        last_report: Option<Box<crate::search::ConditionReport>>,
    },

    #[error("no valid monad shape within shift bound {0}")]
    NoValidShapeWithinShiftBound(i64),

    #[error("split type mismatch at {0:?}")]
    SplitTypeMismatch(Vec<i64>),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, NatcohError>;
