//! Line-oriented text format for preference profiles.
//!
//! ```text
//! n=3
//! A 0: 2 0 1
//! A 1: 0 1 2
//! A 2: 1 2 0
//! B 0: 0 2 1
//! B 1: 1 0 2
//! B 2: 2 1 0
//! ```
//!
//! Each list names agent indices of the other side from most to least
//! preferred, so the k-th entry has rank k.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Permutation, PreferenceProfile};

pub fn write_profile(profile: &PreferenceProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n={}", profile.n());
    for (side, lists) in [("A", profile.a_lists()), ("B", profile.b_lists())] {
        for (i, list) in lists.iter().enumerate() {
            let _ = write!(out, "{side} {i}:");
            for agent in list.order() {
                let _ = write!(out, " {agent}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn parse_profile(text: &str) -> Result<PreferenceProfile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| parse_err(hline, format!("expected `n=<size>`, got `{header}`")))?;
    if n == 0 {
        return Err(Error::EmptyInstance);
    }

    let mut a_lists: Vec<Option<Permutation>> = vec![None; n];
    let mut b_lists: Vec<Option<Permutation>> = vec![None; n];
    for (ln, line) in lines {
        let (head, body) = line
            .split_once(':')
            .ok_or_else(|| parse_err(ln, "expected `<side> <index>: ...`".into()))?;
        let mut head_parts = head.split_whitespace();
        let slots = match head_parts.next() {
            Some("A") => &mut a_lists,
            Some("B") => &mut b_lists,
            other => return Err(parse_err(ln, format!("unknown side {other:?}"))),
        };
        let index: usize = head_parts
            .next()
            .and_then(|s| s.parse().ok())
            .filter(|&i| i < n)
            .ok_or_else(|| parse_err(ln, format!("bad list index in `{head}`")))?;
        let order = body
            .split_whitespace()
            .map(|tok| tok.parse::<usize>().map_err(|e| parse_err(ln, format!("`{tok}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if order.len() != n {
            return Err(parse_err(ln, format!("expected {n} entries, got {}", order.len())));
        }
        let perm = Permutation::from_order(order).map_err(|e| parse_err(ln, e.to_string()))?;
        if slots[index].replace(perm).is_some() {
            return Err(parse_err(ln, format!("list {head} given twice")));
        }
    }

    let collect = |slots: Vec<Option<Permutation>>, side: &str| -> Result<Vec<Permutation>> {
        slots
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| parse_err(0, format!("missing list {side} {i}"))))
            .collect()
    };
    PreferenceProfile::new(collect(a_lists, "A")?, collect(b_lists, "B")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::adversarial_profile;

    #[test]
    fn writes_expected_layout() {
        let (_, approx) = adversarial_profile(3, 2).unwrap();
        let text = write_profile(&approx);
        assert_eq!(text, "n=3\nA 0: 0 1 2\nA 1: 1 2 0\nA 2: 2 0 1\nB 0: 0 2 1\nB 1: 1 0 2\nB 2: 2 1 0\n");
        assert_eq!(parse_profile(&text).unwrap(), approx);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_profile("").is_err());
        assert!(parse_profile("n=0\n").is_err());
        assert!(parse_profile("n=2\nA 0: 0 1\nA 1: 1 0\nB 0: 0 1\n").is_err());
        assert!(parse_profile("n=2\nA 0: 0 0\nA 1: 1 0\nB 0: 0 1\nB 1: 0 1\n").is_err());
        assert!(parse_profile("n=2\nA 0: 0 1\nA 0: 1 0\nB 0: 0 1\nB 1: 0 1\n").is_err());
        assert!(parse_profile("n=2\nC 0: 0 1\n").is_err());
    }
}
