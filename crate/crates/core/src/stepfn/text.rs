//! Line-oriented text form: one piece per line,
//! `start_num/2^start_exp end_num/2^end_exp value`, `#` comments.

use super::{DyadicRational, Piece, StepFunction};
use crate::error::{Error, Result};

impl StepFunction {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.pieces {
            out.push_str(&format!("{} {} {:.16e}\n", p.start, p.end, p.value));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<StepFunction> {
        let mut pieces = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: k + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let start: DyadicRational = fields[0].parse().map_err(|_| err(format!("bad start {:?}", fields[0])))?;
            let end: DyadicRational = fields[1].parse().map_err(|_| err(format!("bad end {:?}", fields[1])))?;
            let value: f64 = fields[2].parse().map_err(|_| err(format!("bad value {:?}", fields[2])))?;
            pieces.push(Piece::new(start, end, value));
        }
        StepFunction::from_pieces(pieces)
    }
}
