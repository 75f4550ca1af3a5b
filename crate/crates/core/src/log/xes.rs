//! XES (IEEE 1849) import.
//!
//! Only what discovery needs is read: `concept:name` and `time:timestamp` of
//! each event. Other attributes, globals, classifiers and extensions are
//! skipped.

use std::collections::HashMap;
use std::io::Read;

use chrono::{DateTime, NaiveDateTime};
use flate2::read::MultiGzDecoder;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::EventLog;
use crate::activity::{Activity, Trace};
use crate::error::{Error, Result};

/// Parses an XES document, transparently gunzipping it when it starts with the
/// gzip magic bytes.
pub fn parse_xes(bytes: &[u8]) -> Result<EventLog> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut xml = Vec::new();
        MultiGzDecoder::new(bytes).read_to_end(&mut xml)?;
        parse_xml(&xml)
    } else {
        parse_xml(bytes)
    }
}

#[derive(Default)]
struct PendingEvent {
    name: Option<String>,
    timestamp: Option<String>,
}

fn line_of(bytes: &[u8], pos: usize) -> usize {
    let pos = pos.min(bytes.len());
    bytes[..pos].iter().filter(|&&b| b == b'\n').count() + 1
}

fn parse_timestamp(value: &str) -> Option<i64> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(value) {
        return dt.timestamp_nanos_opt();
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(value, fmt) {
            return dt.and_utc().timestamp_nanos_opt();
        }
    }
    None
}

struct Builder {
    log: EventLog,
    interned: HashMap<String, Activity>,
    trace_index: usize,
    events: Vec<(Option<i64>, Activity)>,
}

impl Builder {
    fn finish_event(&mut self, ev: PendingEvent) -> Result<()> {
        let event = self.events.len();
        let name = ev.name.ok_or(Error::MissingActivityName {
            trace: self.trace_index,
            event,
        })?;
        let ts = match ev.timestamp {
            Some(raw) => Some(parse_timestamp(&raw).ok_or(Error::XesTimestamp {
                trace: self.trace_index,
                event,
                value: raw,
            })?),
            None => None,
        };
        let act = self
            .interned
            .entry(name)
            .or_insert_with_key(|k| Activity::observed(k))
            .clone();
        self.events.push((ts, act));
        Ok(())
    }

    fn finish_trace(&mut self) {
        let mut events = std::mem::take(&mut self.events);
        // Timestamps order events only when every event carries one; the sort
        // is stable, so ties keep document order.
        if events.iter().all(|(ts, _)| ts.is_some()) {
            events.sort_by_key(|(ts, _)| *ts);
        }
        self.log
            .add(events.into_iter().map(|(_, a)| a).collect::<Trace>(), 1);
        self.trace_index += 1;
    }
}

fn attribute_value(e: &BytesStart<'_>, key: &[u8]) -> Result<Option<String>> {
    for attr in e.attributes() {
        let attr = attr.map_err(|err| Error::Xes {
            line: 0,
            message: err.to_string(),
        })?;
        if attr.key.as_ref() == key {
            let v = attr.unescape_value().map_err(|err| Error::Xes {
                line: 0,
                message: err.to_string(),
            })?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn parse_xml(bytes: &[u8]) -> Result<EventLog> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();

    let mut b = Builder {
        log: EventLog::new(),
        interned: HashMap::new(),
        trace_index: 0,
        events: Vec::new(),
    };
    let mut depth = 0usize;
    let mut in_trace = false;
    let mut saw_log = false;
    let mut event: Option<(usize, PendingEvent)> = None;

    loop {
        let pos = reader.buffer_position() as usize;
        let ev = reader.read_event_into(&mut buf).map_err(|err| Error::Xes {
            line: line_of(bytes, reader.error_position() as usize),
            message: err.to_string(),
        })?;
        let with_line = |e: Error| match e {
            Error::Xes { message, .. } => Error::Xes {
                line: line_of(bytes, pos),
                message,
            },
            other => other,
        };
        match ev {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(ev, Event::Empty(_));
                let name = e.local_name();
                let element_depth = depth + 1;
                match name.as_ref() {
                    b"log" => saw_log = true,
                    b"trace" if event.is_none() => {
                        in_trace = true;
                        if is_empty {
                            b.finish_trace();
                            in_trace = false;
                        }
                    }
                    b"event" if in_trace && event.is_none() => {
                        let pending = PendingEvent::default();
                        if is_empty {
                            b.finish_event(pending)?;
                        } else {
                            event = Some((element_depth, pending));
                        }
                    }
                    tag => {
                        if let Some((ev_depth, pending)) = event.as_mut() {
                            if element_depth == *ev_depth + 1 {
                                let key = attribute_value(e, b"key").map_err(with_line)?;
                                match (tag, key.as_deref()) {
                                    (b"string", Some("concept:name")) => {
                                        pending.name =
                                            attribute_value(e, b"value").map_err(with_line)?;
                                    }
                                    (b"date", Some("time:timestamp")) => {
                                        pending.timestamp =
                                            attribute_value(e, b"value").map_err(with_line)?;
                                    }
                                    _ => {}
                                }
                            }
                        }
                    }
                }
                if !is_empty {
                    depth += 1;
                }
            }
            Event::End(ref e) => {
                match e.local_name().as_ref() {
                    b"event" => {
                        if let Some((ev_depth, _)) = &event {
                            if *ev_depth == depth {
                                let (_, pending) = event.take().unwrap();
                                b.finish_event(pending)?;
                            }
                        }
                    }
                    b"trace" if in_trace && event.is_none() => {
                        b.finish_trace();
                        in_trace = false;
                    }
                    _ => {}
                }
                depth = depth.saturating_sub(1);
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if !saw_log {
        return Err(Error::Xes {
            line: 1,
            message: "no <log> element".into(),
        });
    }
    if depth != 0 || in_trace {
        return Err(Error::Xes {
            line: line_of(bytes, bytes.len()),
            message: "unexpected end of document".into(),
        });
    }
    Ok(b.log)
}
