//! Plain-text matrix dumps used to persist fitted models.
//!
//! A block is a `label rows cols` line followed by `rows` lines of `cols`
//! space-separated values with the same precision as saved embeddings.

use std::io::{self, Write};

use nalgebra::DMatrix;

use crate::embeddings::SAVE_PRECISION;
use crate::error::{Error, Result};

pub fn write_matrix_block<W: Write>(w: &mut W, label: &str, m: &DMatrix<f64>) -> io::Result<()> {
    writeln!(w, "{label} {} {}", m.nrows(), m.ncols())?;
    for row in m.row_iter() {
        let mut first = true;
        for v in row.iter() {
            if !first {
                w.write_all(b" ")?;
            }
            first = false;
            write!(w, "{:.*}", SAVE_PRECISION, v)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads one block labelled `label` from `lines`, advancing the iterator.
/// `lines` yields `(line_number, text)`.
pub fn read_matrix_block<'a, I>(lines: &mut I, label: &str) -> Result<DMatrix<f64>>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let (lineno, head) = lines
        .next()
        .ok_or_else(|| Error::EmptyInput(format!("missing `{label}` block")))?;
    let fields: Vec<&str> = head.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != label {
        return Err(Error::parse(
            lineno,
            format!("expected `{label} <rows> <cols>`, found `{head}`"),
        ));
    }
    let dims: Vec<usize> = fields[1..]
        .iter()
        .map(|t| t.parse().map_err(|_| Error::parse(lineno, "bad block size")))
        .collect::<Result<_>>()?;
    let (rows, cols) = (dims[0], dims[1]);
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (lineno, text) = lines
            .next()
            .ok_or_else(|| Error::EmptyInput(format!("`{label}` block is truncated")))?;
        let before = values.len();
        for tok in text.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("non-numeric value `{tok}`")))?,
            );
        }
        if values.len() - before != cols {
            return Err(Error::parse(lineno, format!("expected {cols} values")));
        }
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}
