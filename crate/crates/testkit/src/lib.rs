//! Seeded synthetic inputs and slow reference implementations.
//!
//! [`gen`] builds reproducible graphs, user-level follow records and degree
//! samples. [`oracle`] recomputes each statistic of the main crate straight
//! from its definition, with dense matrices and exhaustive enumeration; the
//! oracles read graphs only through their arc lists and share no algorithmic
//! code with the optimized paths they check. Each oracle refuses inputs above
//! its documented size bound.

pub mod gen;
pub mod oracle;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KitError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("oracle `{oracle}` refuses input of size {size} (limit {limit})")]
    TooLarge {
        oracle: &'static str,
        size: usize,
        limit: usize,
    },
}

pub type KitResult<T> = Result<T, KitError>;

pub(crate) fn guard(oracle: &'static str, size: usize, limit: usize) -> KitResult<()> {
    if size > limit {
        Err(KitError::TooLarge {
            oracle,
            size,
            limit,
        })
    } else {
        Ok(())
    }
}
