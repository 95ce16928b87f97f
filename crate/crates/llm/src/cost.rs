use agentx_core::Decimal;
use serde::{Deserialize, Serialize};

/// Per-model prices and context limit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceTable {
    pub usd_per_1m_in: Decimal,
    pub usd_per_1m_out: Decimal,
    pub context_window: u64,
}

impl Default for PriceTable {
    /// gpt-4o-mini list prices.
    fn default() -> Self {
        PriceTable {
            usd_per_1m_in: Decimal::new(15, 2),
            usd_per_1m_out: Decimal::new(60, 2),
            context_window: 128_000,
        }
    }
}

impl PriceTable {
    pub fn is_valid(&self) -> bool {
        self.usd_per_1m_in > Decimal::ZERO
            && self.usd_per_1m_out > Decimal::ZERO
            && self.context_window > 0
    }
}

pub fn llm_cost(tokens_in: u64, tokens_out: u64, prices: &PriceTable) -> Decimal {
    let cost = Decimal::from(tokens_in) * prices.usd_per_1m_in
        + Decimal::from(tokens_out) * prices.usd_per_1m_out;
    (cost / Decimal::from(1_000_000u64)).normalize()
}

/// `ceil(chars / 4)`.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.chars().count() as u64).div_ceil(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::str::FromStr;

    #[test]
    fn list_price_examples() {
        let p = PriceTable::default();
        assert_eq!(
            llm_cost(1_000_000, 0, &p),
            Decimal::from_str("0.15").unwrap()
        );
        assert_eq!(
            llm_cost(0, 1_000_000, &p),
            Decimal::from_str("0.60").unwrap()
        );
        assert_eq!(llm_cost(0, 0, &p), Decimal::ZERO);
    }

    #[test]
    fn estimator() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("abcdefgh"), 2);
        assert_eq!(estimate_tokens("abcdefghi"), 3);
        assert_eq!(estimate_tokens("a"), 1);
    }

    proptest! {
        #[test]
        fn cost_is_linear(a in 0u64..10_000_000, b in 0u64..10_000_000, c in 0u64..10_000_000, d in 0u64..10_000_000) {
            let p = PriceTable::default();
            prop_assert_eq!(llm_cost(a + c, b + d, &p), llm_cost(a, b, &p) + llm_cost(c, d, &p));
        }
    }
}
