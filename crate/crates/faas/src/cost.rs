use agentx_core::Decimal;

/// USD per GB-second (ap-south-1 list price).
pub fn default_gb_s_rate() -> Decimal {
    Decimal::new(166_667, 10)
}

/// `(duration_ms / 1000) * (memory_mb / 1024) * rate`, in decimal.
pub fn faas_cost(duration_ms: u64, memory_mb: u32, usd_per_gb_s: Decimal) -> Decimal {
    (Decimal::from(duration_ms) * Decimal::from(memory_mb) * usd_per_gb_s
        / Decimal::from(1_024_000u64))
    .normalize()
}

/// Billed duration: elapsed time rounded up to the next whole millisecond,
/// never less than one.
pub fn billed_ms(elapsed: std::time::Duration) -> u64 {
    let nanos = elapsed.as_nanos();
    (nanos.div_ceil(1_000_000) as u64).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::str::FromStr;
    use std::time::Duration;

    #[test]
    fn examples() {
        let r = default_gb_s_rate();
        assert_eq!(
            faas_cost(1000, 1024, r),
            Decimal::from_str("0.0000166667").unwrap()
        );
        assert_eq!(faas_cost(0, 1024, r), Decimal::ZERO);
        assert_eq!(faas_cost(500, 512, r), r / Decimal::from(4));
    }

    #[test]
    fn billing_rounds_up() {
        assert_eq!(billed_ms(Duration::from_micros(1)), 1);
        assert_eq!(billed_ms(Duration::from_micros(1500)), 2);
        assert_eq!(billed_ms(Duration::from_millis(3)), 3);
    }

    proptest! {
        #[test]
        fn monotone(d in 0u64..1_000_000, m in 128u32..10_240, dd in 0u64..1000, dm in 0u32..1000) {
            let r = default_gb_s_rate();
            prop_assert!(faas_cost(d + dd, m, r) >= faas_cost(d, m, r));
            prop_assert!(faas_cost(d, m + dm, r) >= faas_cost(d, m, r));
        }
    }
}
