//! File formats: MDP definitions, experience batches and price series.
//!
//! # MDP text format
//!
//! Line-oriented; `#` starts a comment and blank lines are skipped.
//!
//! ```text
//! states 3
//! actions 2
//! gamma 0.9
//! terminal 2          # any number of terminal lines, each listing states
//! reward_noise 0.0    # optional Gaussian sigma
//! # s a next prob reward
//! 0 0 1 1.0 0.0
//! ...
//! ```
//!
//! Every non-terminal `(s, a)` row must sum to 1; terminal states need no
//! rows.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use tdrl_core::linear::{Experience, ExperienceBatch};
use tdrl_core::mdp::TabularMdp;

use crate::config::read_text;
use crate::error::{HarnessError, Result};

pub fn load_mdp(path: &Path) -> Result<TabularMdp> {
    parse_mdp(&read_text(path)?, path)
}

/// Parses the MDP text format; `origin` only labels errors.
pub fn parse_mdp(text: &str, origin: &Path) -> Result<TabularMdp> {
    let err = |line: usize, message: String| HarnessError::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut n_states = None;
    let mut n_actions = None;
    let mut gamma = None;
    let mut noise = 0.0;
    let mut terminals = Vec::new();
    let mut rows: Vec<(usize, [usize; 3], f64, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();
        let one = |what: &str| -> Result<&str> {
            match rest.as_slice() {
                [x] => Ok(x),
                _ => Err(err(line_no, format!("`{what}` takes one value"))),
            }
        };
        match head {
            "states" => n_states = Some(parse_num::<usize>(one(head)?, line_no, &err)?),
            "actions" => n_actions = Some(parse_num::<usize>(one(head)?, line_no, &err)?),
            "gamma" => gamma = Some(parse_num::<f64>(one(head)?, line_no, &err)?),
            "reward_noise" => noise = parse_num::<f64>(one(head)?, line_no, &err)?,
            "terminal" => {
                for t in &rest {
                    terminals.push(parse_num::<usize>(t, line_no, &err)?);
                }
            }
            _ => {
                let mut fields = Vec::with_capacity(5);
                fields.push(head);
                fields.extend(&rest);
                if fields.len() != 5 {
                    return Err(err(line_no, "expected `s a next prob reward`".to_string()));
                }
                rows.push((
                    line_no,
                    [
                        parse_num(fields[0], line_no, &err)?,
                        parse_num(fields[1], line_no, &err)?,
                        parse_num(fields[2], line_no, &err)?,
                    ],
                    parse_num(fields[3], line_no, &err)?,
                    parse_num(fields[4], line_no, &err)?,
                ));
            }
        }
    }
    let n_states = n_states.ok_or_else(|| err(0, "missing `states`".into()))?;
    let n_actions = n_actions.ok_or_else(|| err(0, "missing `actions`".into()))?;
    let gamma = gamma.ok_or_else(|| err(0, "missing `gamma`".into()))?;
    let mut b = TabularMdp::builder(n_states, n_actions, gamma);
    for t in terminals {
        b.set_terminal(t);
    }
    for (_, [s, a, next], p, r) in rows {
        b.add(s, a, next, p, r);
    }
    let mdp = b.build()?;
    Ok(if noise > 0.0 { mdp.with_reward_noise(noise)? } else { mdp })
}

fn parse_num<T: std::str::FromStr>(
    token: &str,
    line: usize,
    err: &impl Fn(usize, String) -> HarnessError,
) -> Result<T> {
    token
        .parse()
        .map_err(|_| err(line, format!("cannot parse `{token}`")))
}

/// Writes an MDP in the text format; [`parse_mdp`] reads it back exactly.
pub fn mdp_to_text(mdp: &TabularMdp) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states {}", mdp.n_states());
    let _ = writeln!(out, "actions {}", mdp.n_actions());
    let _ = writeln!(out, "gamma {}", mdp.gamma());
    let terminals: Vec<String> = mdp.terminal_states().map(|s| s.to_string()).collect();
    if !terminals.is_empty() {
        let _ = writeln!(out, "terminal {}", terminals.join(" "));
    }
    if mdp.reward_noise() > 0.0 {
        let _ = writeln!(out, "reward_noise {}", mdp.reward_noise());
    }
    for s in 0..mdp.n_states() {
        if mdp.is_terminal(s) {
            continue;
        }
        for a in 0..mdp.n_actions() {
            for o in mdp.outcomes(s, a) {
                let _ = writeln!(out, "{s} {a} {} {} {}", o.next, o.prob, o.reward);
            }
        }
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct ExperienceRow {
    s: usize,
    a: usize,
    r: f64,
    s_next: usize,
    a_next: Option<usize>,
    #[serde(deserialize_with = "flexible_bool")]
    done: bool,
}

fn flexible_bool<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim() {
        "1" | "true" | "True" | "TRUE" => Ok(true),
        "0" | "false" | "False" | "FALSE" => Ok(false),
        other => Err(serde::de::Error::custom(format!("not a boolean: `{other}`"))),
    }
}

/// Reads a batch from CSV with header `s,a,r,s_next,a_next,done`. `a_next`
/// may be empty; `done` accepts `true`/`false` or `1`/`0`.
pub fn load_experience(path: &Path) -> Result<ExperienceBatch> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let expected = ["s", "a", "r", "s_next", "a_next", "done"];
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(HarnessError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    let mut batch = ExperienceBatch::default();
    for row in reader.deserialize() {
        let row: ExperienceRow = row?;
        batch.push(Experience {
            s: row.s,
            a: row.a,
            r: row.r,
            s_next: row.s_next,
            a_next: row.a_next,
            done: row.done,
        });
    }
    Ok(batch)
}

pub fn write_experience(path: &Path, batch: &ExperienceBatch) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for e in batch.records() {
        w.serialize(ExperienceRow {
            s: e.s,
            a: e.a,
            r: e.r,
            s_next: e.s_next,
            a_next: e.a_next,
            done: e.done,
        })?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Reads the `price` column of a CSV file.
pub fn load_prices(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    let col = reader
        .headers()?
        .iter()
        .position(|h| h.trim() == "price")
        .ok_or_else(|| HarnessError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no `price` column".to_string(),
        })?;
    let mut prices = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = rec.get(col).unwrap_or("").trim();
        let p: f64 = field.parse().map_err(|_| HarnessError::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: format!("cannot parse price `{field}`"),
        })?;
        prices.push(p);
    }
    Ok(prices)
}
