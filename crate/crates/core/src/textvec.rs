//! The whitespace-separated vector text format.
//!
//! ```text
//! <count> <dim>
//! <token> <v1> ... <vdim>
//! ```
//!
//! Used both for pretrained word vectors and for exported node embeddings.
//! Values are written with Rust's shortest round-trip float formatting, so a
//! write/read cycle is lossless.

use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("missing `<count> <dim>` header")]
    MissingHeader,
    #[error("line 1: malformed header {0:?}")]
    Header(String),
    #[error("line {line}: expected {expected} values, found {found}")]
    Dimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse value {value:?}")]
    Value { line: usize, value: String },
    #[error("line {line}: row has no token")]
    EmptyRow { line: usize },
    #[error("header declares {declared} rows but {found} were read")]
    Count { declared: usize, found: usize },
    #[error("token {0:?} contains whitespace and cannot be written")]
    Token(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parsed contents of a vector text file, rows in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct TextVectors {
    pub dim: usize,
    pub rows: Vec<(String, Vec<f64>)>,
}

pub fn read_text_vectors<R: BufRead>(reader: R) -> Result<TextVectors, FormatError> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(FormatError::MissingHeader)??;
    let mut parts = header.split_whitespace();
    let (count, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(c), Some(d), None) => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) => (c, d),
            _ => return Err(FormatError::Header(header)),
        },
        _ => return Err(FormatError::Header(header)),
    };
    let mut rows = Vec::with_capacity(count.min(1 << 20));
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().ok_or(FormatError::EmptyRow { line: line_no })?;
        let values = fields
            .map(|v| {
                v.parse::<f64>().map_err(|_| FormatError::Value {
                    line: line_no,
                    value: v.to_owned(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != dim {
            return Err(FormatError::Dimension {
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
        rows.push((token.to_owned(), values));
    }
    if rows.len() != count {
        return Err(FormatError::Count {
            declared: count,
            found: rows.len(),
        });
    }
    Ok(TextVectors { dim, rows })
}

pub fn write_text_vectors<'a, W, I>(mut writer: W, dim: usize, rows: I) -> Result<(), FormatError>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a [f64])>,
    I::IntoIter: ExactSizeIterator,
{
    let rows = rows.into_iter();
    writeln!(writer, "{} {}", rows.len(), dim)?;
    for (token, values) in rows {
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(FormatError::Token(token.to_owned()));
        }
        debug_assert_eq!(values.len(), dim);
        write!(writer, "{token}")?;
        for v in values {
            write!(writer, " {v}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
