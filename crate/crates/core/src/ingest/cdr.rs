use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};

use super::StationTable;
use crate::{Error, Result};

/// One CDR observation. Timestamps are UTC epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CdrEvent {
    pub user_id: u64,
    pub timestamp: i64,
    pub station_id: u32,
    /// Call duration in seconds when the source carries it.
    pub duration_s: Option<u32>,
}

impl CdrEvent {
    pub fn new(user_id: u64, timestamp: i64, station_id: u32) -> Self {
        CdrEvent {
            user_id,
            timestamp,
            station_id,
            duration_s: None,
        }
    }
}

const MAX_RECORDED_ERRORS: usize = 20;

/// Lines dropped while streaming a CDR file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SkipReport {
    pub unknown_station: usize,
    pub corrupt: usize,
    /// First few problems as (line number, message).
    pub samples: Vec<(usize, String)>,
}

impl SkipReport {
    pub fn total(&self) -> usize {
        self.unknown_station + self.corrupt
    }

    fn record(&mut self, line: usize, msg: String) {
        if self.samples.len() < MAX_RECORDED_ERRORS {
            self.samples.push((line, msg));
        }
    }
}

/// Accepts epoch seconds, RFC 3339, or `YYYY-MM-DD HH:MM:SS` /
/// `YYYY-MM-DDTHH:MM:SS` (read as UTC).
pub fn parse_timestamp(field: &str) -> Option<i64> {
    let field = field.trim();
    if let Ok(v) = field.parse::<i64>() {
        return Some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(field) {
        return Some(dt.timestamp());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(field, fmt) {
            return Some(Utc.from_utc_datetime(&naive).timestamp());
        }
    }
    None
}

/// Formats epoch seconds in the `YYYY-MM-DD HH:MM:SS` form used by D4D dumps.
pub fn format_timestamp(ts: i64) -> String {
    match DateTime::<Utc>::from_timestamp(ts, 0) {
        Some(dt) => dt.format("%Y-%m-%d %H:%M:%S").to_string(),
        None => ts.to_string(),
    }
}

/// Streaming CDR reader. Events come out in file order; bad lines are
/// skipped and tallied in [`CdrStream::report`].
pub struct CdrStream<'a, R> {
    reader: R,
    stations: &'a StationTable,
    source_name: String,
    line_no: usize,
    buf: String,
    report: SkipReport,
    io_error: Option<std::io::Error>,
}

impl<'a, R: BufRead> CdrStream<'a, R> {
    pub fn new(reader: R, stations: &'a StationTable, source_name: &str) -> Self {
        CdrStream {
            reader,
            stations,
            source_name: source_name.to_string(),
            line_no: 0,
            buf: String::new(),
            report: SkipReport::default(),
            io_error: None,
        }
    }

    pub fn report(&self) -> &SkipReport {
        &self.report
    }

    /// Ends the stream, returning the skip report or the I/O error that cut
    /// it short.
    pub fn finish(self) -> Result<SkipReport> {
        match self.io_error {
            Some(e) => Err(Error::io(self.source_name, e)),
            None => Ok(self.report),
        }
    }

    fn parse_line(&self, line: &str) -> std::result::Result<CdrEvent, (bool, String)> {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err((false, format!("expected 3 or 4 fields, found {}", fields.len())));
        }
        let user_id = fields[0]
            .trim()
            .parse::<u64>()
            .map_err(|_| (false, format!("bad user id {:?}", fields[0])))?;
        let timestamp = parse_timestamp(fields[1])
            .filter(|&t| t >= 0)
            .ok_or_else(|| (false, format!("bad timestamp {:?}", fields[1])))?;
        let station_id = fields[2]
            .trim()
            .parse::<u32>()
            .map_err(|_| (false, format!("bad station id {:?}", fields[2])))?;
        let duration_s = match fields.get(3) {
            Some(f) => Some(
                f.trim()
                    .parse::<u32>()
                    .map_err(|_| (false, format!("bad duration {f:?}")))?,
            ),
            None => None,
        };
        if !self.stations.contains(station_id) {
            return Err((true, format!("unknown station {station_id}")));
        }
        Ok(CdrEvent {
            user_id,
            timestamp,
            station_id,
            duration_s,
        })
    }
}

impl<R: BufRead> Iterator for CdrStream<'_, R> {
    type Item = CdrEvent;

    fn next(&mut self) -> Option<CdrEvent> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.io_error = Some(e);
                    return None;
                }
            }
            self.line_no += 1;
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                continue;
            }
            match self.parse_line(line) {
                Ok(ev) => return Some(ev),
                Err((unknown, msg)) => {
                    if unknown {
                        self.report.unknown_station += 1;
                    } else {
                        self.report.corrupt += 1;
                    }
                    let line_no = self.line_no;
                    self.report.record(line_no, msg);
                }
            }
        }
    }
}

/// Opens a CDR file as a stream resolved against `stations`.
pub fn parse_cdr<'a>(
    path: impl AsRef<Path>,
    stations: &'a StationTable,
) -> Result<CdrStream<'a, BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(CdrStream::new(
        BufReader::with_capacity(1 << 16, file),
        stations,
        &path.display().to_string(),
    ))
}

/// Reads a whole CDR file into memory.
pub fn read_cdr(
    path: impl AsRef<Path>,
    stations: &StationTable,
) -> Result<(Vec<CdrEvent>, SkipReport)> {
    let mut stream = parse_cdr(path, stations)?;
    let events: Vec<CdrEvent> = stream.by_ref().collect();
    let report = stream.finish()?;
    Ok((events, report))
}

/// Writes events with D4D-style timestamps; the duration column is emitted
/// only for events that carry one.
pub fn write_cdr<W: Write>(mut w: W, events: &[CdrEvent]) -> std::io::Result<()> {
    for e in events {
        match e.duration_s {
            Some(d) => writeln!(
                w,
                "{}\t{}\t{}\t{}",
                e.user_id,
                format_timestamp(e.timestamp),
                e.station_id,
                d
            )?,
            None => writeln!(
                w,
                "{}\t{}\t{}",
                e.user_id,
                format_timestamp(e.timestamp),
                e.station_id
            )?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::BaseStation;
    use proptest::prelude::*;

    fn table() -> StationTable {
        StationTable::new(vec![
            BaseStation::new(1, -4.0, 5.3),
            BaseStation::new(2, -4.1, 5.4),
            BaseStation::new(3, -5.0, 7.0),
        ])
        .unwrap()
    }

    fn stream_of(text: &str, t: &StationTable) -> (Vec<CdrEvent>, SkipReport) {
        let mut s = CdrStream::new(text.as_bytes(), t, "mem");
        let ev: Vec<_> = s.by_ref().collect();
        (ev, s.finish().unwrap())
    }

    #[test]
    fn three_lines_three_events_in_order() {
        let t = table();
        let (ev, rep) = stream_of(
            "10\t2011-12-05 08:00:00\t1\n10\t1323072000\t2\n11\t2011-12-05T09:30:00Z\t3\n",
            &t,
        );
        assert_eq!(rep.total(), 0);
        assert_eq!(ev.len(), 3);
        assert_eq!(ev[0], CdrEvent::new(10, 1323072000, 1));
        assert_eq!(ev[1], CdrEvent::new(10, 1323072000, 2));
        assert_eq!(ev[2].timestamp, 1323077400);
    }

    #[test]
    fn unknown_station_is_skipped_and_counted() {
        let t = table();
        let (ev, rep) = stream_of("1\t0\t1\n1\t10\t9999\n1\t20\t2\n", &t);
        assert_eq!(ev.len(), 2);
        assert_eq!(rep.unknown_station, 1);
        assert_eq!(rep.corrupt, 0);
        assert_eq!(rep.samples[0].0, 2);
    }

    #[test]
    fn corrupt_lines_are_skipped_and_counted() {
        let t = table();
        let (ev, rep) = stream_of("x\t0\t1\n1\tnot-a-time\t1\n1\t-5\t1\n1\t5\n1\t7\t1\n", &t);
        assert_eq!(ev.len(), 1);
        assert_eq!(rep.corrupt, 4);
    }

    #[test]
    fn optional_duration_column() {
        let t = table();
        let (ev, _) = stream_of("1\t0\t1\t45\n", &t);
        assert_eq!(ev[0].duration_s, Some(45));
    }

    #[test]
    fn timestamp_formats_agree() {
        assert_eq!(parse_timestamp("2011-12-05 00:00:00"), Some(1_323_043_200));
        assert_eq!(parse_timestamp("2011-12-05T01:00:00+01:00"), Some(1_323_043_200));
        assert_eq!(parse_timestamp("1323043200"), Some(1_323_043_200));
        assert_eq!(format_timestamp(1_323_043_200), "2011-12-05 00:00:00");
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(
            raw in prop::collection::vec((0u64..1000, 0i64..2_000_000_000, 1u32..4, prop::option::of(0u32..5000)), 0..60)
        ) {
            let t = table();
            let events: Vec<CdrEvent> = raw
                .into_iter()
                .map(|(u, ts, s, d)| CdrEvent { user_id: u, timestamp: ts, station_id: s, duration_s: d })
                .collect();
            let mut buf = Vec::new();
            write_cdr(&mut buf, &events).unwrap();
            let (back, rep) = stream_of(std::str::from_utf8(&buf).unwrap(), &t);
            prop_assert_eq!(rep.total(), 0);
            prop_assert_eq!(back, events);
        }
    }
}
