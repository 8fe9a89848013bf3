//! Word-embedding tables: loading, saving and vocabulary alignment.
//!
//! The on-disk format is the word2vec text layout: an optional `n dim`
//! header followed by one `word v1 v2 ... vdim` line per word, UTF-8,
//! whitespace separated. Saved tables always carry the header and write
//! every value with [`SAVE_PRECISION`] decimal digits.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, Dyn, MatrixView1xX, U1};

use crate::error::{Error, Result};

/// Number of decimal digits written by [`save_embeddings`].
pub const SAVE_PRECISION: usize = 6;

/// An ordered list of unique words with a reverse index.
#[derive(Debug, PartialEq, Eq)]
pub struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    key: w.clone(),
                    line: i + 1,
                });
            }
        }
        Ok(Vocab { words, index })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// A vocabulary mapped to dense rows of a fixed dimension.
///
/// Tables are immutable once built. The vocabulary is reference counted so
/// tables derived from the same aligned inputs share it.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    name: String,
    vocab: Arc<Vocab>,
    matrix: DMatrix<f64>,
}

impl PartialEq for EmbeddingTable {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.vocab == other.vocab && self.matrix == other.matrix
    }
}

impl EmbeddingTable {
    pub fn new(name: impl Into<String>, words: Vec<String>, matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_vocab(name, Arc::new(Vocab::new(words)?), matrix)
    }

    /// Builds a table over an existing (shared) vocabulary.
    pub fn with_vocab(
        name: impl Into<String>,
        vocab: Arc<Vocab>,
        matrix: DMatrix<f64>,
    ) -> Result<Self> {
        if vocab.len() != matrix.nrows() {
            return Err(Error::InvalidTable(format!(
                "{} words but {} matrix rows",
                vocab.len(),
                matrix.nrows()
            )));
        }
        if matrix.ncols() == 0 {
            return Err(Error::InvalidTable("dimension must be at least 1".into()));
        }
        if let Some(pos) = matrix.iter().position(|v| !v.is_finite()) {
            let row = pos % matrix.nrows();
            return Err(Error::InvalidTable(format!(
                "non-finite value in row of `{}`",
                vocab.words[row]
            )));
        }
        Ok(EmbeddingTable {
            name: name.into(),
            vocab,
            matrix,
        })
    }

    /// Convenience constructor from `(word, vector)` rows.
    pub fn from_rows<S: Into<String>>(
        name: impl Into<String>,
        rows: impl IntoIterator<Item = (S, Vec<f64>)>,
    ) -> Result<Self> {
        let mut words = Vec::new();
        let mut values = Vec::new();
        let mut dim = None;
        for (w, v) in rows {
            let w = w.into();
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::Dimension(format!(
                        "row `{w}` has {} values, expected {d}",
                        v.len()
                    )))
                }
                _ => {}
            }
            words.push(w);
            values.extend(v);
        }
        let dim = dim.ok_or_else(|| Error::EmptyInput("no rows".into()))?;
        let matrix = DMatrix::from_row_slice(words.len(), dim, &values);
        Self::new(name, words, matrix)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vocab(&self) -> &Arc<Vocab> {
        &self.vocab
    }

    pub fn words(&self) -> &[String] {
        self.vocab.words()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.nrows() == 0
    }

    /// Row for `word`, as a strided view into the matrix.
    pub fn vector(&self, word: &str) -> Option<MatrixView1xX<'_, f64, U1, Dyn>> {
        self.vocab.index_of(word).map(|i| self.matrix.row(i))
    }

    pub fn row_vec(&self, word: &str) -> Option<Vec<f64>> {
        self.vocab
            .index_of(word)
            .map(|i| self.matrix.row(i).iter().copied().collect())
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// Reads a table from a word2vec-style text file.
pub fn load_embeddings(path: impl AsRef<Path>, name: &str) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(BufReader::new(file), name).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_embeddings<R: BufRead>(reader: R, name: &str) -> Result<EmbeddingTable> {
    let mut header: Option<(usize, usize)> = None;
    let mut dim: Option<usize> = None;
    let mut words = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut values = Vec::new();
    let mut seen_content = false;

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        let mut tokens = line.split_whitespace();
        let Some(word) = tokens.next() else { continue };
        let rest: Vec<&str> = tokens.collect();

        if !seen_content {
            seen_content = true;
            if rest.len() == 1 {
                if let (Ok(n), Ok(d)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                    if d == 0 {
                        return Err(Error::parse(lineno, "header declares dimension 0"));
                    }
                    header = Some((n, d));
                    dim = Some(d);
                    continue;
                }
            }
        }

        match dim {
            None if rest.is_empty() => {
                return Err(Error::parse(lineno, format!("word `{word}` has no values")))
            }
            None => dim = Some(rest.len()),
            Some(d) if d != rest.len() => {
                return Err(Error::parse(
                    lineno,
                    format!("expected {d} values after `{word}`, found {}", rest.len()),
                ))
            }
            _ => {}
        }
        for tok in &rest {
            let v: f64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("non-numeric value `{tok}`")))?;
            if !v.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite value `{tok}`")));
            }
            values.push(v);
        }
        if index.insert(word.to_owned(), words.len()).is_some() {
            return Err(Error::Duplicate {
                key: word.to_owned(),
                line: lineno,
            });
        }
        words.push(word.to_owned());
    }

    let Some(dim) = dim else {
        return Err(Error::EmptyInput(format!("`{name}` contains no embeddings")));
    };
    if words.is_empty() {
        return Err(Error::EmptyInput(format!("`{name}` contains no embeddings")));
    }
    if let Some((n, _)) = header {
        if n != words.len() {
            return Err(Error::parse(
                1,
                format!("header declares {n} words, file has {}", words.len()),
            ));
        }
    }
    let matrix = DMatrix::from_row_slice(words.len(), dim, &values);
    EmbeddingTable::new(name, words, matrix)
}

/// Writes the table with an `n dim` header and [`SAVE_PRECISION`] digits.
pub fn save_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_embeddings(table, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_embeddings<W: Write>(table: &EmbeddingTable, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{} {}", table.len(), table.dim())?;
    for (i, word) in table.words().iter().enumerate() {
        w.write_all(word.as_bytes())?;
        for v in table.matrix.row(i).iter() {
            write!(w, " {:.*}", SAVE_PRECISION, v)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Restricts both tables to their shared vocabulary, rows in lexicographic
/// word order. Vector values are copied unchanged. Both outputs share one
/// vocabulary instance.
pub fn align_vocabularies(
    a: &EmbeddingTable,
    b: &EmbeddingTable,
) -> Result<(EmbeddingTable, EmbeddingTable)> {
    let common: BTreeSet<&String> = a
        .words()
        .iter()
        .filter(|w| b.vocab.contains(w.as_str()))
        .collect();
    if common.is_empty() {
        return Err(Error::Alignment(format!(
            "`{}` and `{}` share no words",
            a.name, b.name
        )));
    }
    let words: Vec<String> = common.into_iter().cloned().collect();
    let vocab = Arc::new(Vocab::new(words)?);
    let pick = |t: &EmbeddingTable| {
        let rows: Vec<usize> = vocab
            .words()
            .iter()
            .map(|w| t.vocab.index_of(w).expect("word in intersection"))
            .collect();
        let m = t.matrix.select_rows(rows.iter());
        EmbeddingTable::with_vocab(t.name.clone(), vocab.clone(), m)
    };
    Ok((pick(a)?, pick(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<EmbeddingTable> {
        read_embeddings(s.as_bytes(), "t")
    }

    fn table(rows: &[(&str, &[f64])]) -> EmbeddingTable {
        EmbeddingTable::from_rows("t", rows.iter().map(|(w, v)| (*w, v.to_vec()))).unwrap()
    }

    #[test]
    fn parses_headerless_file() {
        let t = parse("cat 1.0 0.0\ndog 0.0 1.0\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dim(), 2);
        assert_eq!(t.row_vec("dog").unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn header_mismatch_reports_line() {
        match parse("2 3\ncat 1 2 3\ndog 1 2 3 4\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match parse("3 2\ncat 1 2\ndog 1 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse(""), Err(Error::EmptyInput(_))));
        assert!(matches!(parse("\n  \n"), Err(Error::EmptyInput(_))));
        assert!(matches!(parse("2 2\n"), Err(Error::EmptyInput(_))));
        assert!(matches!(
            parse("cat 1 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse("cat 1 2\ncat 3 4\n"),
            Err(Error::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            parse("cat 1 2\ndog NaN 4\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn words_are_case_sensitive() {
        let t = parse("Cat 1 2\ncat 3 4\n").unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn save_writes_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        save_embeddings(&table(&[("a", &[1.0, 0.5]), ("b", &[-2.0, 0.25])]), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "2 2\na 1.000000 0.500000\nb -2.000000 0.250000\n"
        );
    }

    #[test]
    fn save_to_unwritable_path_fails() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("t.txt");
        let t = table(&[("a", &[1.0])]);
        assert!(matches!(save_embeddings(&t, path), Err(Error::Io { .. })));
    }

    #[test]
    fn alignment_intersects_and_sorts() {
        let a = table(&[("fish", &[3.0]), ("dog", &[2.0]), ("cat", &[1.0])]);
        let b = table(&[("dog", &[20.0]), ("cat", &[10.0])]);
        let (a2, b2) = align_vocabularies(&a, &b).unwrap();
        assert_eq!(a2.words(), ["cat", "dog"]);
        assert_eq!(b2.words(), ["cat", "dog"]);
        assert_eq!(a2.row_vec("dog").unwrap(), vec![2.0]);
        assert_eq!(b2.row_vec("cat").unwrap(), vec![10.0]);
    }

    #[test]
    fn alignment_of_identical_tables_only_reorders() {
        let a = table(&[("b", &[1.0, 2.0]), ("a", &[3.0, 4.0])]);
        let (x, y) = align_vocabularies(&a, &a).unwrap();
        assert_eq!(x, y);
        for w in a.words() {
            assert_eq!(x.row_vec(w), a.row_vec(w));
        }
    }

    #[test]
    fn disjoint_alignment_fails() {
        let a = table(&[("a", &[1.0])]);
        let b = table(&[("b", &[1.0])]);
        assert!(matches!(
            align_vocabularies(&a, &b),
            Err(Error::Alignment(_))
        ));
    }
}
