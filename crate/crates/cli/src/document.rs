//! The network document format.
//!
//! One node per line, in the form
//!
//! ```text
//! node <name> <- <input> <input> ... | <p0> <p1> ...
//! ```
//!
//! `#` starts a comment. Names may be referenced before they are declared.
//! Nodes get ids in declaration order, starting at 1. The table lists the
//! probability that the node is 1 at the next instant for each input
//! configuration; the first-listed input is the least significant bit of the
//! configuration index, so a node with `k` inputs needs `2^k` entries.

use std::collections::HashMap;

use pbn_phi::{validate_network_with_limit, Network, NodeLaw, ValidatedNetwork};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DocumentError {
    #[error("line {line}, {field}: {message}")]
    Syntax {
        line: usize,
        field: &'static str,
        message: String,
    },
    #[error("{}{source}", location(.line, .name))]
    Invalid {
        line: Option<usize>,
        name: Option<String>,
        source: pbn_phi::Error,
    },
}

fn location(line: &Option<usize>, name: &Option<String>) -> String {
    match (line, name) {
        (Some(l), Some(n)) => format!("line {l}, node '{n}': "),
        (Some(l), None) => format!("line {l}: "),
        _ => String::new(),
    }
}

impl DocumentError {
    pub fn is_size_cap(&self) -> bool {
        matches!(self, DocumentError::Invalid { source, .. } if source.is_size_cap())
    }
}

fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphanumeric() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

struct Declaration<'a> {
    line: usize,
    name: &'a str,
    inputs: Vec<&'a str>,
    table: Vec<f64>,
}

fn parse_line(line: usize, text: &str) -> Result<Declaration<'_>, DocumentError> {
    let syntax = |field, message: String| DocumentError::Syntax {
        line,
        field,
        message,
    };
    let mut tokens = text.split_whitespace();
    match tokens.next() {
        Some("node") => {}
        Some(other) => {
            return Err(syntax(
                "keyword",
                format!("expected 'node', found '{other}'"),
            ))
        }
        None => unreachable!("blank lines are skipped"),
    }
    let name = tokens
        .next()
        .ok_or_else(|| syntax("name", "missing node name".into()))?;
    if !is_valid_name(name) {
        return Err(syntax("name", format!("invalid node name '{name}'")));
    }
    match tokens.next() {
        Some("<-") => {}
        Some(other) => return Err(syntax("arrow", format!("expected '<-', found '{other}'"))),
        None => return Err(syntax("arrow", "expected '<-'".into())),
    }
    let mut inputs = Vec::new();
    loop {
        match tokens.next() {
            Some("|") => break,
            Some(input) if is_valid_name(input) => inputs.push(input),
            Some(other) => return Err(syntax("inputs", format!("invalid input name '{other}'"))),
            None => return Err(syntax("inputs", "expected '|' before the table".into())),
        }
    }
    let table = tokens
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| syntax("table", format!("'{tok}' is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if table.is_empty() {
        return Err(syntax("table", "empty probability table".into()));
    }
    Ok(Declaration {
        line,
        name,
        inputs,
        table,
    })
}

fn parse_declarations(text: &str) -> Result<(Network, Vec<usize>), DocumentError> {
    let mut decls = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        if !content.trim().is_empty() {
            decls.push(parse_line(i + 1, content)?);
        }
    }
    let mut ids = HashMap::new();
    for (k, d) in decls.iter().enumerate() {
        if ids.insert(d.name, k + 1).is_some() {
            return Err(DocumentError::Syntax {
                line: d.line,
                field: "name",
                message: format!("node '{}' declared twice", d.name),
            });
        }
    }
    let laws = decls
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let inputs = d
                .inputs
                .iter()
                .map(|input| {
                    ids.get(input)
                        .copied()
                        .ok_or_else(|| DocumentError::Syntax {
                            line: d.line,
                            field: "inputs",
                            message: format!("unknown node '{input}'"),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(NodeLaw::new(k + 1, inputs, d.table.clone()).named(d.name))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let lines = decls.iter().map(|d| d.line).collect();
    Ok((Network::new(laws), lines))
}

/// Parses and validates a document, refusing networks with more than
/// `max_nodes` nodes.
pub fn parse_validated(text: &str, max_nodes: usize) -> Result<ValidatedNetwork, DocumentError> {
    let (net, lines) = parse_declarations(text)?;
    validate_network_with_limit(&net, max_nodes).map_err(|source| {
        let node = match &source {
            pbn_phi::Error::DuplicateNode { node }
            | pbn_phi::Error::MissingNode { node }
            | pbn_phi::Error::DanglingInput { node, .. }
            | pbn_phi::Error::TableLength { node, .. }
            | pbn_phi::Error::ProbabilityOutOfRange { node, .. } => Some(*node),
            _ => None,
        };
        let law = node.and_then(|id| net.laws.iter().position(|l| l.id == id));
        DocumentError::Invalid {
            line: law.map(|k| lines[k]),
            name: law.and_then(|k| net.laws[k].name.clone()),
            source,
        }
    })
}

/// Parses a document into a network that passes validation under the
/// default node cap.
pub fn parse_network(text: &str) -> Result<Network, DocumentError> {
    parse_validated(text, pbn_phi::network::DEFAULT_MAX_NODES).map(|net| net.to_network())
}

/// Writes a network in document form. Nodes are emitted in law order; a law
/// without a name is written under its id.
pub fn serialize_network(net: &Network) -> String {
    let name_of = |id: usize| {
        net.laws
            .iter()
            .find(|l| l.id == id)
            .and_then(|l| l.name.clone())
            .unwrap_or_else(|| id.to_string())
    };
    let mut out = String::new();
    for law in &net.laws {
        out.push_str("node ");
        out.push_str(&name_of(law.id));
        out.push_str(" <-");
        for &input in &law.inputs {
            out.push(' ');
            out.push_str(&name_of(input));
        }
        out.push_str(" |");
        for p in &law.table {
            out.push_str(&format!(" {p}"));
        }
        out.push('\n');
    }
    out
}
