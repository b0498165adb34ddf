//! Price and return series: CSV ingestion, conversion, synthetic generation.
//!
//! Input files are RFC-4180 CSV with a leading date column and one column
//! per symbol. Dates are treated as opaque labels that must be strictly
//! increasing; no calendar arithmetic is applied to them. Gross returns are
//! elementwise price ratios x_n = p_n / p_{n-1} and must stay positive.

use std::path::Path;

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

// ===== series types =====

/// A dated multi-symbol price table.
#[derive(Debug, Clone)]
pub struct PriceSeries {
    dates: Vec<String>,
    symbols: Vec<String>,
    prices: Vec<f64>,
}

impl PriceSeries {
    /// Number of dated rows.
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Number of symbols.
    pub fn assets(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    /// Prices at row t, one entry per symbol.
    pub fn row(&self, t: usize) -> &[f64] {
        let m = self.assets();
        &self.prices[t * m..(t + 1) * m]
    }
}

/// A table of per-period gross returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    assets: usize,
    returns: Vec<f64>,
}

impl ReturnSeries {
    /// Builds a return series from a flat row-major buffer.
    pub fn new(assets: usize, returns: Vec<f64>) -> Result<Self> {
        if assets == 0 {
            return Err(Error::Config("return series needs at least one asset".into()));
        }
        if returns.len() % assets != 0 {
            return Err(Error::Data(format!(
                "return buffer length {} is not a multiple of {} assets",
                returns.len(),
                assets
            )));
        }
        for (i, &r) in returns.iter().enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Data(format!(
                    "non-positive or non-finite return {} at flat index {}",
                    r, i
                )));
            }
        }
        Ok(ReturnSeries { assets, returns })
    }

    /// Number of return periods.
    pub fn len(&self) -> usize {
        self.returns.len() / self.assets
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn assets(&self) -> usize {
        self.assets
    }

    /// Gross returns of period t (0-based).
    pub fn row(&self, t: usize) -> &[f64] {
        &self.returns[t * self.assets..(t + 1) * self.assets]
    }

    /// Rows first..last (exclusive) as a flat view.
    pub fn rows(&self, first: usize, last: usize) -> &[f64] {
        &self.returns[first * self.assets..last * self.assets]
    }
}

// ===== csv ingestion =====

/// Loads a price table from CSV. Rows are named 1-based in error messages,
/// not counting the header.
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let (dates, symbols, values) = read_table(path.as_ref())?;
    for (i, row) in values.chunks_exact(symbols.len()).enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::Ingest {
                    row: i + 1,
                    reason: format!("non-positive price {} for symbol {}", p, symbols[j]),
                });
            }
        }
    }
    Ok(PriceSeries {
        dates,
        symbols,
        prices: values,
    })
}

/// Loads a gross-return table from CSV with the same layout as prices.
pub fn load_returns(path: impl AsRef<Path>) -> Result<ReturnSeries> {
    let (_, symbols, values) = read_table(path.as_ref())?;
    for (i, row) in values.chunks_exact(symbols.len()).enumerate() {
        for (j, &r) in row.iter().enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Ingest {
                    row: i + 1,
                    reason: format!("non-positive return {} for symbol {}", r, symbols[j]),
                });
            }
        }
    }
    ReturnSeries::new(symbols.len(), values)
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Ingest {
            row: 0,
            reason: "need a date column and at least one symbol column".into(),
        });
    }
    let symbols: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let m = symbols.len();
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.len() != m + 1 {
            return Err(Error::Ingest {
                row,
                reason: format!("expected {} fields, found {}", m + 1, rec.len()),
            });
        }
        let date = rec[0].to_string();
        if let Some(prev) = dates.last() {
            if &date <= prev {
                return Err(Error::Ingest {
                    row,
                    reason: format!("date {} does not increase over {}", date, prev),
                });
            }
        }
        dates.push(date);
        for f in rec.iter().skip(1) {
            let v: f64 = f.trim().parse().map_err(|_| Error::Ingest {
                row,
                reason: format!("cannot parse {:?} as a number", f),
            })?;
            values.push(v);
        }
    }
    if dates.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    Ok((dates, symbols, values))
}

/// Converts prices to per-period gross returns x_n = p_n / p_{n-1}.
pub fn prices_to_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    let t = prices.len();
    if t < 2 {
        return Err(Error::InsufficientData(
            "need at least two price rows to form returns".into(),
        ));
    }
    let m = prices.assets();
    let mut returns = Vec::with_capacity((t - 1) * m);
    for n in 1..t {
        let prev = prices.row(n - 1);
        let cur = prices.row(n);
        for j in 0..m {
            returns.push(cur[j] / prev[j]);
        }
    }
    ReturnSeries::new(m, returns)
}

/// Writes a return series as CSV with synthetic sequential date labels.
pub fn write_returns_csv(path: impl AsRef<Path>, returns: &ReturnSeries) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path.as_ref())?;
    let m = returns.assets();
    let mut header = vec!["date".to_string()];
    header.extend((0..m).map(|j| format!("a{}", j)));
    wtr.write_record(&header)?;
    let origin = NaiveDate::from_ymd_opt(1993, 1, 29).unwrap();
    for t in 0..returns.len() {
        let date = origin + chrono::Days::new(t as u64);
        let mut rec = vec![date.format("%Y-%m-%d").to_string()];
        rec.extend(returns.row(t).iter().map(|v| format!("{}", v)));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

// ===== synthetic generation =====

/// Log-normal parameters for one regime: per-period log drift and volatility.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct LognormalParams {
    pub drift: f64,
    pub vol: f64,
}

/// Synthetic return regimes.
///
/// `asset_spread` in [0, 1] tilts drift and volatility linearly across
/// assets so that low-index assets are calm and low-return while high-index
/// assets are volatile and high-return; 0 makes all assets exchangeable.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum RegimeSpec {
    IidLognormal {
        drift: f64,
        vol: f64,
        asset_spread: f64,
    },
    RegimeSwitching {
        calm: LognormalParams,
        turbulent: LognormalParams,
        stay_prob: f64,
        asset_spread: f64,
    },
}

impl RegimeSpec {
    fn validate(&self) -> Result<()> {
        let check_spread = |s: f64| {
            if !(0.0..=1.0).contains(&s) {
                Err(Error::Config(format!("asset_spread {} outside [0, 1]", s)))
            } else {
                Ok(())
            }
        };
        match self {
            RegimeSpec::IidLognormal { vol, asset_spread, .. } => {
                if *vol < 0.0 {
                    return Err(Error::Config(format!("negative volatility {}", vol)));
                }
                check_spread(*asset_spread)
            }
            RegimeSpec::RegimeSwitching {
                calm,
                turbulent,
                stay_prob,
                asset_spread,
            } => {
                if calm.vol < 0.0 || turbulent.vol < 0.0 {
                    return Err(Error::Config("negative volatility".into()));
                }
                if !(0.0..=1.0).contains(stay_prob) {
                    return Err(Error::Config(format!("stay_prob {} outside [0, 1]", stay_prob)));
                }
                check_spread(*asset_spread)
            }
        }
    }
}

/// Multiplier for asset j of m under a linear cross-asset spread.
fn spread_factor(j: usize, m: usize, spread: f64) -> f64 {
    if m <= 1 {
        return 1.0;
    }
    let u = j as f64 / (m - 1) as f64;
    1.0 + spread * (2.0 * u - 1.0)
}

/// Generates a reproducible synthetic return series.
///
/// All returns are clamped into `band` (inclusive); the band must be
/// strictly positive. A degenerate band like [1, 1] produces constant
/// returns, which is handy for tests.
pub fn synth_returns(
    assets: usize,
    periods: usize,
    regime: &RegimeSpec,
    seed: u64,
    band: (f64, f64),
) -> Result<ReturnSeries> {
    if assets == 0 || periods == 0 {
        return Err(Error::Config(
            "synthetic series needs at least one asset and one period".into(),
        ));
    }
    if !(band.0.is_finite() && band.1.is_finite()) || band.0 <= 0.0 || band.1 < band.0 {
        return Err(Error::Config(format!(
            "return band [{}, {}] must be positive and ordered",
            band.0, band.1
        )));
    }
    regime.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unif = Uniform::new(0.0f64, 1.0).expect("valid uniform bounds");
    let mut out = Vec::with_capacity(assets * periods);
    let mut turbulent_now = false;
    for _ in 0..periods {
        let (drift, vol, spread) = match regime {
            RegimeSpec::IidLognormal {
                drift,
                vol,
                asset_spread,
            } => (*drift, *vol, *asset_spread),
            RegimeSpec::RegimeSwitching {
                calm,
                turbulent,
                stay_prob,
                asset_spread,
            } => {
                if unif.sample(&mut rng) > *stay_prob {
                    turbulent_now = !turbulent_now;
                }
                let p = if turbulent_now { turbulent } else { calm };
                (p.drift, p.vol, *asset_spread)
            }
        };
        for j in 0..assets {
            let f = spread_factor(j, assets, spread);
            let z: f64 = StandardNormal.sample(&mut rng);
            let x = (drift * f + vol * f * z).exp();
            out.push(x.clamp(band.0, band.1));
        }
    }
    ReturnSeries::new(assets, out)
}

/// Default regime used by the experiment runner when none is configured.
pub fn default_regime() -> RegimeSpec {
    RegimeSpec::IidLognormal {
        drift: 2.0e-4,
        vol: 0.012,
        asset_spread: 0.5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_small_price_table() {
        let f = write_tmp("date,AAA,BBB\n2020-01-01,10,20\n2020-01-02,11,19\n2020-01-03,12,18\n");
        let p = load_prices(f.path()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.assets(), 2);
        assert_eq!(p.symbols(), &["AAA".to_string(), "BBB".to_string()]);
        assert_eq!(p.row(1), &[11.0, 19.0]);
    }

    #[test]
    fn zero_price_names_row() {
        let f = write_tmp("date,AAA\n2020-01-01,10\n2020-01-02,0\n");
        match load_prices(f.path()) {
            Err(Error::Ingest { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn non_increasing_dates_rejected() {
        let f = write_tmp("date,AAA\n2020-01-02,10\n2020-01-01,11\n");
        assert!(matches!(load_prices(f.path()), Err(Error::Ingest { row: 2, .. })));
        let f = write_tmp("date,AAA\n2020-01-01,10\n2020-01-01,11\n");
        assert!(matches!(load_prices(f.path()), Err(Error::Ingest { row: 2, .. })));
    }

    #[test]
    fn ragged_row_rejected() {
        let f = write_tmp("date,AAA,BBB\n2020-01-01,10,20\n2020-01-02,11\n");
        assert!(matches!(load_prices(f.path()), Err(Error::Ingest { row: 2, .. })));
    }

    #[test]
    fn loads_full_size_table() {
        let returns = synth_returns(6, 6798, &default_regime(), 9, (0.8, 1.25)).unwrap();
        let mut content = String::from("date,A,B,C,D,E,F\n");
        let mut price = vec![100.0f64; 6];
        for t in 0..6798 {
            content.push_str(&format!("{:07}", t));
            for j in 0..6 {
                price[j] *= returns.row(t)[j];
                content.push_str(&format!(",{}", price[j]));
            }
            content.push('\n');
        }
        let f = write_tmp(&content);
        let p = load_prices(f.path()).unwrap();
        assert_eq!(p.len(), 6798);
        assert_eq!(p.assets(), 6);
    }

    #[test]
    fn returns_from_prices_hand_cases() {
        let f = write_tmp("date,AAA,BBB\n2020-01-01,10,20\n2020-01-02,11,19\n");
        let r = prices_to_returns(&load_prices(f.path()).unwrap()).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r.row(0)[0] - 1.1).abs() < 1e-15);
        assert!((r.row(0)[1] - 0.95).abs() < 1e-15);

        let f = write_tmp("date,A,B\n2020-01-01,1,1\n2020-01-02,2,1\n2020-01-03,4,1\n");
        let r = prices_to_returns(&load_prices(f.path()).unwrap()).unwrap();
        assert_eq!(r.row(0), &[2.0, 1.0]);
        assert_eq!(r.row(1), &[2.0, 1.0]);

        let f = write_tmp("date,A\n2020-01-01,5\n2020-01-02,5\n2020-01-03,5\n");
        let r = prices_to_returns(&load_prices(f.path()).unwrap()).unwrap();
        assert!(r.rows(0, 2).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn single_row_is_insufficient() {
        let f = write_tmp("date,AAA\n2020-01-01,10\n");
        assert!(matches!(
            prices_to_returns(&load_prices(f.path()).unwrap()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn synth_is_deterministic_and_banded() {
        let a = synth_returns(4, 300, &default_regime(), 42, (0.8, 1.25)).unwrap();
        let b = synth_returns(4, 300, &default_regime(), 42, (0.8, 1.25)).unwrap();
        assert_eq!(a, b);
        let c = synth_returns(4, 300, &default_regime(), 43, (0.8, 1.25)).unwrap();
        assert_ne!(a, c);
        for t in 0..a.len() {
            for &x in a.row(t) {
                assert!((0.8..=1.25).contains(&x));
            }
        }
    }

    #[test]
    fn degenerate_band_gives_ones() {
        let r = synth_returns(3, 50, &default_regime(), 1, (1.0, 1.0)).unwrap();
        assert!(r.rows(0, 50).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn bad_band_rejected() {
        assert!(matches!(
            synth_returns(2, 10, &default_regime(), 1, (0.0, 1.2)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            synth_returns(2, 10, &default_regime(), 1, (-0.5, 1.2)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn regime_switching_stays_in_band() {
        let regime = RegimeSpec::RegimeSwitching {
            calm: LognormalParams { drift: 3.0e-4, vol: 0.005 },
            turbulent: LognormalParams { drift: -2.0e-4, vol: 0.03 },
            stay_prob: 0.98,
            asset_spread: 0.3,
        };
        let r = synth_returns(6, 5000, &regime, 7, (0.8, 1.25)).unwrap();
        assert_eq!(r.len(), 5000);
        for t in 0..r.len() {
            for &x in r.row(t) {
                assert!((0.8..=1.25).contains(&x));
            }
        }
        let again = synth_returns(6, 5000, &regime, 7, (0.8, 1.25)).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn returns_csv_roundtrip_is_exact() {
        let r = synth_returns(3, 40, &default_regime(), 5, (0.8, 1.25)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("returns.csv");
        write_returns_csv(&path, &r).unwrap();
        let back = load_returns(&path).unwrap();
        assert_eq!(r, back);
    }

    proptest! {
        #[test]
        fn prices_reconstruct_from_returns(
            rows in proptest::collection::vec(
                proptest::collection::vec(0.1f64..100.0, 3), 2..40)
        ) {
            let mut content = String::from("date,A,B,C\n");
            for (t, row) in rows.iter().enumerate() {
                content.push_str(&format!("{:06},{},{},{}\n", t, row[0], row[1], row[2]));
            }
            let f = write_tmp(&content);
            let p = load_prices(f.path()).unwrap();
            let r = prices_to_returns(&p).unwrap();
            for j in 0..3 {
                let mut acc = p.row(0)[j];
                for t in 0..r.len() {
                    acc *= r.row(t)[j];
                }
                let last = p.row(p.len() - 1)[j];
                prop_assert!((acc - last).abs() <= 1e-12 * last.abs());
            }
        }
    }
}
