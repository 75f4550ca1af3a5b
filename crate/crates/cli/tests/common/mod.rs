#![allow(dead_code)]

use std::fmt::Write;

/// Minimal XES document, one trace per entry, events timestamped in order.
pub fn xes(variants: &[(&str, usize)]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<log xes.version=\"1.0\">\n");
    let mut case = 0;
    for (word, count) in variants {
        for _ in 0..*count {
            case += 1;
            writeln!(out, "  <trace><string key=\"concept:name\" value=\"c{case}\"/>").unwrap();
            for (i, ch) in word.chars().enumerate() {
                writeln!(
                    out,
                    "    <event><string key=\"concept:name\" value=\"{ch}\"/><date key=\"time:timestamp\" value=\"2024-01-01T00:{:02}:00+00:00\"/></event>",
                    i
                )
                .unwrap();
            }
            out.push_str("  </trace>\n");
        }
    }
    out.push_str("</log>\n");
    out
}

/// abcd-shaped log with a reversed tail and a loop on c.
pub fn sample_log() -> String {
    xes(&[("abcd", 40), ("abd", 25), ("acbd", 12), ("abcbcd", 6), ("dabc", 2), ("abed", 1)])
}

/// Noisy log whose net keeps some transitions without any place.
pub fn noisy_log() -> String {
    xes(&[
        ("abcd", 30),
        ("acbd", 20),
        ("abxcd", 2),
        ("aybcd", 1),
        ("abcdz", 1),
        ("azbcd", 1),
        ("abczd", 1),
    ])
}

pub fn multipart(fields: &[(&str, Option<&str>, &[u8])]) -> (String, Vec<u8>) {
    let boundary = "----alphappp-test-boundary";
    let mut body = Vec::new();
    for (name, file, data) in fields {
        body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        match file {
            Some(f) => body.extend_from_slice(
                format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{f}\"\r\nContent-Type: application/octet-stream\r\n\r\n")
                    .as_bytes(),
            ),
            None => body.extend_from_slice(format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n").as_bytes()),
        }
        body.extend_from_slice(data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    (format!("multipart/form-data; boundary={boundary}"), body)
}
