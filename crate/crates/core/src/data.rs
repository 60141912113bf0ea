//! Futures and option quote files, the volume filter, and moving windows.
//!
//! Futures: `date,close`. Options: `date,strike,expiry,price,volume,underlying_close`.
//! Dates are ISO-8601, lines starting with `#` are ignored.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

pub const FUTURES_HEADER: [&str; 2] = ["date", "close"];
pub const OPTIONS_HEADER: [&str; 6] = [
    "date",
    "strike",
    "expiry",
    "price",
    "volume",
    "underlying_close",
];

/// Quotes traded on fewer contracts than this are dropped.
pub const DEFAULT_MIN_VOLUME: u64 = 1200;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FuturesSeries {
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
}

impl FuturesSeries {
    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn view(&self) -> Window<'_> {
        Window {
            start: 0,
            dates: &self.dates,
            closes: &self.closes,
        }
    }
}

/// A contiguous slice of a [`FuturesSeries`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<'a> {
    /// Offset of the first row in the parent series.
    pub start: usize,
    pub dates: &'a [NaiveDate],
    pub closes: &'a [f64],
}

impl Window<'_> {
    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    pub fn to_series(&self) -> FuturesSeries {
        FuturesSeries {
            dates: self.dates.to_vec(),
            closes: self.closes.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionQuote {
    pub date: NaiveDate,
    pub strike: f64,
    pub expiry: NaiveDate,
    pub price: f64,
    pub volume: u64,
    pub underlying_close: f64,
}

impl OptionQuote {
    /// Year fraction to expiry, actual/365.
    pub fn maturity(&self) -> f64 {
        (self.expiry - self.date).num_days() as f64 / 365.0
    }
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<(), DataError> {
    let found = rdr.headers().map_err(|e| malformed(1, e))?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(DataError::BadHeader {
            found: found.iter().collect::<Vec<_>>().join(","),
            expected: expected.join(","),
        });
    }
    Ok(())
}

fn malformed(line: usize, message: impl ToString) -> DataError {
    DataError::MalformedRow {
        line,
        message: message.to_string(),
    }
}

fn parse_date(field: &str, line: usize) -> Result<NaiveDate, DataError> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .map_err(|e| malformed(line, format!("date `{field}`: {e}")))
}

fn parse_num(field: &str, name: &str, line: usize) -> Result<f64, DataError> {
    let v: f64 = field
        .parse()
        .map_err(|_| malformed(line, format!("{name} `{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(malformed(line, format!("{name} `{field}` is not finite")));
    }
    Ok(v)
}

fn records<R: Read>(
    rdr: &mut csv::Reader<R>,
    width: usize,
) -> impl Iterator<Item = Result<(usize, csv::StringRecord), DataError>> + '_ {
    rdr.records().map(move |rec| {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            malformed(line, e)
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(malformed(
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        Ok((line, rec))
    })
}

/// Parses a futures file, sorts it by date and rejects repeated dates.
pub fn read_futures<R: Read>(r: R) -> Result<FuturesSeries, DataError> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &FUTURES_HEADER)?;
    let mut rows = Vec::new();
    for item in records(&mut rdr, 2) {
        let (line, rec) = item?;
        let date = parse_date(&rec[0], line)?;
        let close = parse_num(&rec[1], "close", line)?;
        if close <= 0.0 {
            return Err(DataError::NonPositivePrice { line, value: close });
        }
        rows.push((date, close, line));
    }
    rows.sort_by_key(|r| r.0);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(DataError::DuplicateDate {
                line: w[0].2.max(w[1].2),
                date: w[1].0.to_string(),
            });
        }
    }
    Ok(FuturesSeries {
        dates: rows.iter().map(|r| r.0).collect(),
        closes: rows.iter().map(|r| r.1).collect(),
    })
}

pub fn load_futures_csv(path: impl AsRef<Path>) -> Result<FuturesSeries, DataError> {
    read_futures(File::open(path)?)
}

/// Canonical form: header line, then `YYYY-MM-DD,<shortest round-trip decimal>`.
pub fn write_futures_csv<W: Write>(series: &FuturesSeries, mut w: W) -> Result<(), DataError> {
    writeln!(w, "{}", FUTURES_HEADER.join(","))?;
    for (d, c) in series.dates.iter().zip(&series.closes) {
        writeln!(w, "{},{}", d.format("%Y-%m-%d"), c)?;
    }
    Ok(())
}

/// Parses an options file and keeps quotes with `volume >= min_volume`, in date order.
pub fn read_options<R: Read>(r: R, min_volume: u64) -> Result<Vec<OptionQuote>, DataError> {
    let mut rdr = reader(r);
    check_header(&mut rdr, &OPTIONS_HEADER)?;
    let mut out = Vec::new();
    for item in records(&mut rdr, 6) {
        let (line, rec) = item?;
        let date = parse_date(&rec[0], line)?;
        let strike = parse_num(&rec[1], "strike", line)?;
        let expiry = parse_date(&rec[2], line)?;
        let price = parse_num(&rec[3], "price", line)?;
        let volume = parse_num(&rec[4], "volume", line)?;
        let underlying_close = parse_num(&rec[5], "underlying_close", line)?;
        if strike <= 0.0 {
            return Err(malformed(line, format!("strike {strike} is not positive")));
        }
        if price < 0.0 {
            return Err(malformed(line, format!("price {price} is negative")));
        }
        if volume < 0.0 || volume.fract() != 0.0 {
            return Err(malformed(
                line,
                format!("volume {volume} is not a contract count"),
            ));
        }
        if underlying_close <= 0.0 {
            return Err(DataError::NonPositivePrice {
                line,
                value: underlying_close,
            });
        }
        if expiry <= date {
            return Err(malformed(
                line,
                format!("expiry {expiry} is not after {date}"),
            ));
        }
        let volume = volume as u64;
        if volume >= min_volume {
            out.push(OptionQuote {
                date,
                strike,
                expiry,
                price,
                volume,
                underlying_close,
            });
        }
    }
    out.sort_by(|a, b| {
        a.date
            .cmp(&b.date)
            .then(a.expiry.cmp(&b.expiry))
            .then(a.strike.total_cmp(&b.strike))
    });
    Ok(out)
}

pub fn load_options_csv(
    path: impl AsRef<Path>,
    min_volume: u64,
) -> Result<Vec<OptionQuote>, DataError> {
    read_options(File::open(path)?, min_volume)
}

pub fn write_options_csv<W: Write>(quotes: &[OptionQuote], mut w: W) -> Result<(), DataError> {
    writeln!(w, "{}", OPTIONS_HEADER.join(","))?;
    for q in quotes {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            q.date.format("%Y-%m-%d"),
            q.strike,
            q.expiry.format("%Y-%m-%d"),
            q.price,
            q.volume,
            q.underlying_close
        )?;
    }
    Ok(())
}

/// `n_windows` windows of `window_len` rows; window `w` (zero based) starts at row `w * shift`.
pub fn build_windows(
    series: &FuturesSeries,
    window_len: usize,
    shift: usize,
    n_windows: usize,
) -> Result<Vec<Window<'_>>, DataError> {
    let needed = window_len + shift * n_windows.saturating_sub(1);
    if series.len() < needed || window_len == 0 {
        return Err(DataError::SeriesTooShort {
            len: series.len(),
            needed: needed.max(1),
        });
    }
    Ok((0..n_windows)
        .map(|w| {
            let start = w * shift;
            Window {
                start,
                dates: &series.dates[start..start + window_len],
                closes: &series.closes[start..start + window_len],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(n: usize) -> FuturesSeries {
        let d0 = NaiveDate::from_ymd_opt(2022, 1, 3).unwrap();
        FuturesSeries {
            dates: (0..n).map(|k| d0 + chrono::Days::new(k as u64)).collect(),
            closes: (0..n).map(|k| 3000.0 + k as f64 * 0.25).collect(),
        }
    }

    #[test]
    fn three_rows() {
        let text = "date,close\n2023-01-03,3001.5\n2023-01-04,2999\n2023-01-05,3010.25\n";
        let s = read_futures(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.closes, vec![3001.5, 2999.0, 3010.25]);
    }

    #[test]
    fn comments_are_skipped() {
        let text = "# source: synthetic\ndate,close\n# mid-file note\n2023-01-03,1\n";
        assert_eq!(read_futures(text.as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn negative_close_rejected() {
        let text = "date,close\n2023-01-03,10\n2023-01-04,-1\n";
        match read_futures(text.as_bytes()) {
            Err(DataError::NonPositivePrice { line, value }) => {
                assert_eq!(line, 3);
                assert_eq!(value, -1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_rows_report_line() {
        let text = "date,close\n2023-01-03,10\n2023-13-04,11\n";
        assert!(matches!(
            read_futures(text.as_bytes()),
            Err(DataError::MalformedRow { line: 3, .. })
        ));
        let text = "date,close\n2023-01-03,abc\n";
        assert!(matches!(
            read_futures(text.as_bytes()),
            Err(DataError::MalformedRow { line: 2, .. })
        ));
        let text = "date,price\n2023-01-03,1\n";
        assert!(matches!(
            read_futures(text.as_bytes()),
            Err(DataError::BadHeader { .. })
        ));
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let text = "date,close\n2023-01-05,3\n2023-01-03,1\n2023-01-04,2\n";
        let s = read_futures(text.as_bytes()).unwrap();
        assert_eq!(s.closes, vec![1.0, 2.0, 3.0]);
        assert!(s.dates.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn duplicate_dates_rejected() {
        let text = "date,close\n2023-01-03,1\n2023-01-04,2\n2023-01-03,3\n";
        assert!(matches!(
            read_futures(text.as_bytes()),
            Err(DataError::DuplicateDate { line: 4, .. })
        ));
    }

    #[test]
    fn canonical_round_trip() {
        let text = "date,close\n2023-01-03,3001.5\n2023-01-04,2999\n2023-01-05,0.1\n2023-01-06,3010.123456789012\n";
        let s = read_futures(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_futures_csv(&s, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn volume_threshold_is_inclusive() {
        let text = "date,strike,expiry,price,volume,underlying_close\n\
                    2023-03-01,3000,2023-06-07,95.5,1199,3010\n\
                    2023-03-01,3100,2023-06-07,150,1200,3010\n\
                    2023-02-28,2900,2023-06-07,40,5000,3005\n";
        let q = read_options(text.as_bytes(), DEFAULT_MIN_VOLUME).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q[0].strike, 2900.0);
        assert_eq!(q[1].volume, 1200);
    }

    #[test]
    fn empty_after_filter_is_ok() {
        let text = "date,strike,expiry,price,volume,underlying_close\n2023-03-01,3000,2023-06-07,95.5,10,3010\n";
        assert!(read_options(text.as_bytes(), 1200).unwrap().is_empty());
    }

    #[test]
    fn expiry_must_follow_date() {
        let text = "date,strike,expiry,price,volume,underlying_close\n2023-03-01,3000,2023-03-01,95.5,1500,3010\n";
        assert!(matches!(
            read_options(text.as_bytes(), 1200),
            Err(DataError::MalformedRow { line: 2, .. })
        ));
    }

    #[test]
    fn options_round_trip() {
        let text = "date,strike,expiry,price,volume,underlying_close\n2023-03-01,3000,2023-06-07,95.5,1500,3010.25\n";
        let q = read_options(text.as_bytes(), 0).unwrap();
        let mut out = Vec::new();
        write_options_csv(&q, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
        assert!((q[0].maturity() - 98.0 / 365.0).abs() < 1e-15);
    }

    #[test]
    fn five_windows_of_762() {
        let s = series(782);
        let w = build_windows(&s, 762, 5, 5).unwrap();
        assert_eq!(w.len(), 5);
        assert!(w.iter().all(|x| x.len() == 762));
        let starts: Vec<usize> = w.iter().map(|x| x.start).collect();
        assert_eq!(starts, vec![0, 5, 10, 15, 20]);
        assert_eq!(w[4].closes.last(), s.closes.last());
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(
            build_windows(&series(100), 762, 5, 5),
            Err(DataError::SeriesTooShort {
                len: 100,
                needed: 782
            })
        ));
        assert!(matches!(
            build_windows(&series(781), 762, 5, 5),
            Err(DataError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn zero_shift_repeats() {
        let s = series(30);
        let w = build_windows(&s, 10, 0, 3).unwrap();
        assert!(w.iter().all(|x| x.closes == &s.closes[..10]));
    }
}
