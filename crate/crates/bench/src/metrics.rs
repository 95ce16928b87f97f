//! Aggregate metrics over runs.

use rust_decimal::Decimal;

/// `100 × successes / total`; zero for an empty cell.
pub fn success_rate(successes: u32, total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    100.0 * f64::from(successes) / f64::from(total)
}

pub fn mean(values: impl IntoIterator<Item = u64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0u128, 0u64), |(s, n), v| (s + u128::from(v), n + 1));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

pub fn mean_decimal(values: impl IntoIterator<Item = Decimal>) -> Decimal {
    let (sum, n) = values
        .into_iter()
        .fold((Decimal::ZERO, 0u64), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        Decimal::ZERO
    } else {
        (sum / Decimal::from(n)).round_dp(10).normalize()
    }
}
