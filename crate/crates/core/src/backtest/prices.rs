//! Daily closing-price panels.
//!
//! CSV layout: header `date,<ticker1>,<ticker2>,...`, ISO-8601 dates,
//! decimal prices. Rows with an empty, unparsable-as-number or NaN cell are
//! dropped and counted.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{GeoError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    /// `prices[t][i]`: close of ticker `i` on `dates[t]`.
    prices: Vec<Vec<f64>>,
}

impl PricePanel {
    pub fn new(dates: Vec<NaiveDate>, tickers: Vec<String>, prices: Vec<Vec<f64>>) -> Result<Self> {
        if dates.is_empty() || tickers.is_empty() {
            return Err(GeoError::EmptyPanel);
        }
        if prices.len() != dates.len() {
            return Err(GeoError::DimensionMismatch {
                expected: dates.len(),
                got: prices.len(),
            });
        }
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(GeoError::Parse(format!(
                    "dates not strictly increasing at {}",
                    w[1]
                )));
            }
        }
        for (d, row) in dates.iter().zip(&prices) {
            if row.len() != tickers.len() {
                return Err(GeoError::DimensionMismatch {
                    expected: tickers.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
                return Err(GeoError::Parse(format!("non-positive price on {d}")));
            }
        }
        Ok(PricePanel {
            dates,
            tickers,
            prices,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn prices(&self) -> &[Vec<f64>] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.tickers.len()
    }

    /// Writes the panel in the input CSV layout.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["date".to_string()];
        header.extend(self.tickers.iter().cloned());
        wtr.write_record(&header)?;
        for (d, row) in self.dates.iter().zip(&self.prices) {
            let mut rec = vec![d.format("%Y-%m-%d").to_string()];
            rec.extend(row.iter().map(|p| format!("{p}")));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Parses a price CSV. Returns the panel and the number of dropped rows.
pub fn read_prices<R: Read>(r: R) -> Result<(PricePanel, usize)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(GeoError::EmptyPanel);
    }
    if !headers[0].eq_ignore_ascii_case("date") {
        return Err(GeoError::Parse(format!(
            "first column must be `date`, got `{}`",
            &headers[0]
        )));
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if tickers.is_empty() {
        return Err(GeoError::Parse("no ticker columns".into()));
    }
    let mut dates = Vec::new();
    let mut prices = Vec::new();
    let mut dropped = 0;
    for rec in rdr.records() {
        let rec = rec?;
        let date = NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
            .map_err(|e| GeoError::Parse(format!("bad date `{}`: {e}", &rec[0])))?;
        let row: Option<Vec<f64>> = (1..=tickers.len())
            .map(|i| {
                rec.get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|p| !p.is_nan())
            })
            .collect();
        match row {
            Some(row) => {
                dates.push(date);
                prices.push(row);
            }
            None => dropped += 1,
        }
    }
    if dates.is_empty() {
        return Err(GeoError::EmptyPanel);
    }
    Ok((PricePanel::new(dates, tickers, prices)?, dropped))
}

/// Loads a price file, logging a warning when rows were dropped.
pub fn load_prices<P: AsRef<Path>>(path: P) -> Result<PricePanel> {
    let file = std::fs::File::open(path.as_ref())?;
    let (panel, dropped) = read_prices(file)?;
    if dropped > 0 {
        log::warn!(
            "dropped {dropped} rows with missing prices from {}",
            path.as_ref().display()
        );
    }
    Ok(panel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(rows: &[&str]) -> String {
        let mut s = String::from("date,AAA,BBB\n");
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn well_formed() {
        let rows: Vec<String> = (1..=10)
            .map(|d| format!("2018-08-{d:02},{}.5,{}", 100 + d, 50 + d))
            .collect();
        let refs: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
        let (p, dropped) = read_prices(file(&refs).as_bytes()).unwrap();
        assert_eq!((p.len(), p.n_assets(), dropped), (10, 2, 0));
        assert_eq!(p.prices()[0], vec![101.5, 51.0]);
    }

    #[test]
    fn nan_row_dropped() {
        let rows: Vec<String> = (1..=10)
            .map(|d| {
                if d == 4 {
                    format!("2018-08-{d:02},NaN,3")
                } else {
                    format!("2018-08-{d:02},1,2")
                }
            })
            .collect();
        let refs: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
        let (p, dropped) = read_prices(file(&refs).as_bytes()).unwrap();
        assert_eq!((p.len(), dropped), (9, 1));
        let (p, dropped) =
            read_prices(file(&["2018-01-01,1,", "2018-01-02,1,2"]).as_bytes()).unwrap();
        assert_eq!((p.len(), dropped), (1, 1));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            read_prices("".as_bytes()),
            Err(GeoError::EmptyPanel)
        ));
        assert!(matches!(
            read_prices(file(&[]).as_bytes()),
            Err(GeoError::EmptyPanel)
        ));
        assert!(read_prices(file(&["2018-01-02,1,2", "2018-01-01,1,2"]).as_bytes()).is_err());
        assert!(read_prices(file(&["2018-01-01,-1,2"]).as_bytes()).is_err());
        assert!(read_prices(file(&["01/02/2018,1,2"]).as_bytes()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let (p, _) =
            read_prices(file(&["2018-01-01,1.25,2", "2018-01-02,1.5,2.125"]).as_bytes()).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let (q, _) = read_prices(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }
}
