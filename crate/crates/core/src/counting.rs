//! Exact binomial coefficients and Stirling numbers of the second kind.

use crate::error::{Error, Result};

/// `C(n, k)`; zero when `k > n`. Errors instead of wrapping on overflow.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        let wide = u128::from(acc) * u128::from(n - i) / u128::from(i + 1);
        acc = u64::try_from(wide).map_err(|_| Error::Overflow(format!("C({n},{k})")))?;
    }
    Ok(acc)
}

/// `S(n, m)`, the number of partitions of an `n`-set into `m` nonempty blocks.
pub fn stirling2(n: u64, m: u64) -> Result<u64> {
    if m > n {
        return Ok(0);
    }
    let overflow = || Error::Overflow(format!("S({n},{m})"));
    let m_us = usize::try_from(m).map_err(|_| overflow())?;
    // row[j] = S(i, j), built up via S(i, j) = j·S(i-1, j) + S(i-1, j-1).
    let mut row = vec![0u64; m_us + 1];
    row[0] = 1;
    for i in 1..=n {
        let top = m_us.min(usize::try_from(i).map_err(|_| overflow())?);
        for j in (1..=top).rev() {
            row[j] = (j as u64)
                .checked_mul(row[j])
                .and_then(|v| v.checked_add(row[j - 1]))
                .ok_or_else(overflow)?;
        }
        row[0] = 0;
    }
    Ok(row[m_us])
}
