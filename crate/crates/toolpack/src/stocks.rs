//! `yfinance` server: daily closing prices.

use agentx_core::{net, Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_mcp::ToolResult;
use serde::{Deserialize, Serialize};

use crate::fixtures::FixtureSet;
use crate::{handler, str_arg, LiveConfig, Mode, Tool, ToolError, ToolpackConfig};

pub const UNIVERSE: [&str; 9] = [
    "AAPL", "GOOGL", "MSFT", "NFLX", "DIS", "AMZN", "KO", "PEP", "MDLZ",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockPoint {
    pub date: String,
    pub close: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockSeries {
    pub ticker: String,
    pub points: Vec<StockPoint>,
}

impl StockSeries {
    pub fn parse_csv(ticker: &str, csv: &str) -> Result<Self, ToolError> {
        let mut points = Vec::new();
        for (n, line) in csv.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let (date, close) = line.split_once(',').ok_or_else(|| {
                ToolError::Io(format!("{ticker} line {}: expected date,close", n + 1))
            })?;
            let close = close
                .trim()
                .parse()
                .map_err(|_| ToolError::Io(format!("{ticker} line {}: bad price", n + 1)))?;
            points.push(StockPoint {
                date: date.trim().to_string(),
                close,
            });
        }
        let s = StockSeries {
            ticker: ticker.to_string(),
            points,
        };
        if !s.dates_increasing() {
            return Err(ToolError::Io(format!(
                "{ticker}: dates not strictly increasing"
            )));
        }
        Ok(s)
    }

    pub fn dates_increasing(&self) -> bool {
        self.points.windows(2).all(|w| w[0].date < w[1].date)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("Date,Close\n");
        for p in &self.points {
            out.push_str(&format!("{},{:.2}\n", p.date, p.close));
        }
        out
    }

    /// The most recent `n` points.
    pub fn tail(mut self, n: usize) -> Self {
        let skip = self.points.len().saturating_sub(n);
        self.points.drain(..skip);
        self
    }
}

/// Trading days covered by a period string; `None` means the full series.
pub fn period_days(period: &str) -> Result<Option<usize>, ToolError> {
    Ok(match period.trim().to_ascii_lowercase().as_str() {
        "5d" => Some(5),
        "1mo" => Some(21),
        "3mo" => Some(63),
        "6mo" => Some(126),
        "1y" | "ytd" | "2y" | "5y" | "10y" | "max" => None,
        other => {
            return Err(ToolError::InvalidArgument(format!(
                "unsupported period {other:?}"
            )))
        }
    })
}

pub fn canonical_ticker(t: &str) -> String {
    let t = t.trim().to_ascii_uppercase();
    match t.as_str() {
        "GOOG" => "GOOGL".into(),
        _ => t,
    }
}

pub fn fixture_series(fx: &FixtureSet, ticker: &str) -> Result<StockSeries, ToolError> {
    let t = canonical_ticker(ticker);
    if !UNIVERSE.contains(&t.as_str()) {
        return Err(ToolError::UnknownTicker(ticker.to_string()));
    }
    StockSeries::parse_csv(&t, &fx.read_text("yfinance", &format!("{t}.csv"))?)
}

/// Proleptic Gregorian date of a day count since 1970-01-01.
pub fn civil_from_days(days: i64) -> (i64, u32, u32) {
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let y = yoe + era * 400 + i64::from(m <= 2);
    (y, m, d)
}

fn live_series(live: &LiveConfig, ticker: &str, period: &str) -> Result<StockSeries, ToolError> {
    let t = canonical_ticker(ticker);
    let url = format!("{}/{t}", live.yahoo_url);
    net::guard(&url).map_err(|e| ToolError::Upstream(e.to_string()))?;
    let mut resp = crate::http_agent(live.timeout_s)
        .get(&url)
        .query_pairs([("range", period), ("interval", "1d")])
        .header("User-Agent", "Mozilla/5.0")
        .call()
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    if resp.status().as_u16() == 404 {
        return Err(ToolError::UnknownTicker(ticker.to_string()));
    }
    let body: serde_json::Value = resp
        .body_mut()
        .read_json()
        .map_err(|e| ToolError::Upstream(e.to_string()))?;
    let result = &body["chart"]["result"][0];
    let stamps = result["timestamp"]
        .as_array()
        .ok_or_else(|| ToolError::UnknownTicker(ticker.to_string()))?;
    let closes = result["indicators"]["quote"][0]["close"]
        .as_array()
        .cloned()
        .unwrap_or_default();
    let points = stamps
        .iter()
        .zip(closes)
        .filter_map(|(ts, c)| {
            let (y, m, d) = civil_from_days(ts.as_i64()?.div_euclid(86_400));
            Some(StockPoint {
                date: format!("{y:04}-{m:02}-{d:02}"),
                close: (c.as_f64()? * 100.0).round() / 100.0,
            })
        })
        .collect();
    Ok(StockSeries { ticker: t, points })
}

pub(crate) fn tools(cfg: &ToolpackConfig) -> Vec<Tool> {
    let fx = FixtureSet::new(&cfg.fixtures);
    let mode = cfg.mode;
    let live = cfg.live.clone();
    vec![Tool {
        descriptor: ToolDescriptor::new(
            "yfinance",
            "get_stock_history",
            "Get the daily closing price history of a stock ticker from Yahoo Finance as CSV (Date,Close).",
            Origin::Community,
        )
        .param(ParamSpec::required("ticker", ParamType::String, "Ticker symbol, e.g. AAPL."))
        .param(ParamSpec::optional(
            "period",
            ParamType::String,
            "History length: 5d, 1mo, 3mo, 6mo, 1y, ytd or max (default 1y).",
        )),
        handler: handler(move |_ctx, args| {
            let ticker = str_arg(args, "ticker")?;
            let period = args.get("period").and_then(|v| v.as_str()).unwrap_or("1y");
            let days = period_days(period)?;
            let series = match mode {
                Mode::Fixture => fixture_series(&fx, ticker)?,
                Mode::Live => live_series(&live, ticker, period)?,
            };
            let series = match days {
                Some(n) => series.tail(n),
                None => series,
            };
            Ok(ToolResult::ok(series.to_csv()))
        }),
        exclusive: false,
    }]
}
