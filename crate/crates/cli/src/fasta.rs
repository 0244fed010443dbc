use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use seqkern::seq::{Alphabet, Sequence};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub id: String,
    pub sequence: Sequence,
}

/// Parses FASTA text. The record ID is the first word of the header; sequence
/// lines are concatenated with all whitespace removed.
pub fn parse_fasta(text: &str, alphabet: &Arc<Alphabet>) -> Result<Vec<Record>, Failure> {
    let mut raw: Vec<(String, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("");
            if id.is_empty() {
                return Err(Failure::data(format!("line {}: empty FASTA header", n + 1)));
            }
            raw.push((id.to_string(), String::new()));
        } else if !line.trim().is_empty() {
            match raw.last_mut() {
                Some((_, seq)) => seq.extend(line.chars().filter(|c| !c.is_whitespace())),
                None => return Err(Failure::data(format!("line {}: sequence data before the first header", n + 1))),
            }
        }
    }
    let mut seen = HashSet::new();
    raw.into_iter()
        .map(|(id, text)| {
            if !seen.insert(id.clone()) {
                return Err(Failure::data(format!("duplicate record ID `{id}`")));
            }
            let sequence = Sequence::parse(alphabet, &text)
                .map_err(|e| Failure::data(format!("record `{id}`: {e}")))?;
            Ok(Record { id, sequence })
        })
        .collect()
}

pub fn read_fasta(path: &Path, alphabet: &Arc<Alphabet>) -> Result<Vec<Record>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    parse_fasta(&text, alphabet).map_err(|e| match e {
        Failure::Data(m) => Failure::data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_fasta<W: Write>(out: &mut W, records: &[Record]) -> std::io::Result<()> {
    for r in records {
        writeln!(out, ">{}\n{}", r.id, r.sequence)?;
    }
    Ok(())
}
