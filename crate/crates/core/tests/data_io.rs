mod common;

use std::fs;

use chrono::NaiveDate;
use liqopt_core::data::{
    read_futures, read_options, write_futures_csv, write_options_csv, DEFAULT_MIN_VOLUME,
};
use liqopt_core::{build_windows, load_futures_csv, load_options_csv, DataError};

#[test]
fn bundled_fixtures_load() {
    let dir = common::fixture_dir();
    let futures = load_futures_csv(dir.join("futures.csv")).unwrap();
    assert_eq!(futures.len(), 782);
    assert!(futures.dates.windows(2).all(|w| w[0] < w[1]));
    assert!(futures.closes.iter().all(|&c| c > 0.0));

    let all = load_options_csv(dir.join("options.csv"), 0).unwrap();
    let liquid = load_options_csv(dir.join("options.csv"), DEFAULT_MIN_VOLUME).unwrap();
    assert_eq!(all.len(), 360);
    assert!(liquid.len() < all.len());
    assert!(liquid.iter().all(|q| q.volume >= DEFAULT_MIN_VOLUME));
    assert_eq!(
        all.iter()
            .filter(|q| q.volume >= DEFAULT_MIN_VOLUME)
            .count(),
        liquid.len()
    );
    let last = *futures.dates.last().unwrap();
    assert!(all.iter().all(|q| q.date <= last && q.expiry > q.date));
}

#[test]
fn bundled_fixtures_round_trip_byte_for_byte() {
    let dir = common::fixture_dir();
    let text = fs::read(dir.join("futures.csv")).unwrap();
    let series = read_futures(text.as_slice()).unwrap();
    let mut out = Vec::new();
    write_futures_csv(&series, &mut out).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        String::from_utf8(text).unwrap()
    );

    let text = fs::read(dir.join("options.csv")).unwrap();
    let quotes = read_options(text.as_slice(), 0).unwrap();
    let mut out = Vec::new();
    write_options_csv(&quotes, &mut out).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        String::from_utf8(text).unwrap()
    );
}

#[test]
fn unsorted_input_is_sorted_and_comments_skipped() {
    let text = "# exported\ndate,close\n2023-01-05,3\n2023-01-03,1\n2023-01-04,2\n";
    let s = read_futures(text.as_bytes()).unwrap();
    assert_eq!(s.closes, vec![1.0, 2.0, 3.0]);
    assert_eq!(s.dates[0], NaiveDate::from_ymd_opt(2023, 1, 3).unwrap());
}

#[test]
fn malformed_files_are_rejected() {
    let dup = "date,close\n2023-01-03,1\n2023-01-03,2\n";
    assert!(matches!(
        read_futures(dup.as_bytes()),
        Err(DataError::DuplicateDate { .. })
    ));
    let neg = "date,close\n2023-01-03,-1\n";
    assert!(matches!(
        read_futures(neg.as_bytes()),
        Err(DataError::NonPositivePrice { .. })
    ));
    let header = "day,close\n2023-01-03,1\n";
    assert!(matches!(
        read_futures(header.as_bytes()),
        Err(DataError::BadHeader { .. })
    ));
    let junk =
        "date,strike,expiry,price,volume,underlying_close\n2023-01-03,abc,2023-02-01,1,10,5\n";
    assert!(matches!(
        read_options(junk.as_bytes(), 0),
        Err(DataError::MalformedRow { .. })
    ));
}

#[test]
fn windows_over_bundled_series() {
    let series = load_futures_csv(common::fixture_dir().join("futures.csv")).unwrap();
    let w = build_windows(&series, 762, 5, 5).unwrap();
    assert_eq!(w.len(), 5);
    assert_eq!(w[4].start, 20);
    assert_eq!(*w[4].closes.last().unwrap(), *series.closes.last().unwrap());
    assert!(matches!(
        build_windows(&series, 762, 5, 6),
        Err(DataError::SeriesTooShort {
            len: 782,
            needed: 787
        })
    ));
}
