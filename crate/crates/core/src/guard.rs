use thiserror::Error;

/// Raised when an exhaustive computation would exceed its configured size.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{what}: size {} exceeds limit {limit}", if *.size == u128::MAX { "beyond 2^128".to_string() } else { size.to_string() })]
pub struct GuardExceeded {
    pub what: &'static str,
    /// `u128::MAX` when the size overflowed.
    pub size: u128,
    pub limit: u128,
}

/// Checks `size <= limit`, treating an overflowing size as too large.
pub fn check(what: &'static str, size: Option<u128>, limit: u128) -> Result<u128, GuardExceeded> {
    match size {
        Some(s) if s <= limit => Ok(s),
        Some(s) => Err(GuardExceeded { what, size: s, limit }),
        None => Err(GuardExceeded { what, size: u128::MAX, limit }),
    }
}

/// `base^exp` or `None` on overflow.
pub fn checked_pow(base: u64, exp: usize) -> Option<u128> {
    (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base as u128))
}

/// Binomial coefficient, `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}
