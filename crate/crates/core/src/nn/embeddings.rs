use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::Matrix;
use super::param::uniform;
use crate::corpus::text::is_special;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

/// Dimension of the pretrained Twitter GloVe vectors.
pub const EMBEDDING_DIM: usize = 200;

/// Bound of the uniform initialization for rows without a pretrained vector.
pub const INIT_BOUND: f64 = 0.05;

/// `|V| × dim` table with every row drawn from uniform(−0.05, 0.05).
pub fn random_embeddings(vocab_size: usize, dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    uniform(vocab_size, dim, INIT_BOUND, &mut rng)
}

/// Reads whitespace-separated `token v1 … v_dim` lines. Vocabulary tokens
/// found in the file take its vector; all other rows, specials included,
/// keep the seeded uniform initialization.
pub fn load_embeddings(path: &Path, vocab: &Vocabulary, dim: usize, seed: u64) -> Result<Matrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut table = random_embeddings(vocab.len(), dim, seed);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    message: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::EmbeddingDim {
                line: lineno,
                expected: dim,
                found: values.len(),
            });
        }
        if is_special(token) {
            continue;
        }
        if let Some(id) = vocab.id(token) {
            table.row_mut(id).copy_from_slice(&values);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn vocab() -> Vocabulary {
        let doc: Vec<String> = ["apple", "pear"].iter().map(|s| s.to_string()).collect();
        Vocabulary::build([doc], 1).unwrap()
    }

    fn file_with(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn present_rows_copied_absent_rows_bounded() {
        let v = vocab();
        let f = file_with("apple 0.5 -1 2\nbanana 1 1 1\n");
        let t = load_embeddings(f.path(), &v, 3, 9).unwrap();
        assert_eq!(t.row(v.id("apple").unwrap()), &[0.5, -1.0, 2.0]);
        let pear = t.row(v.id("pear").unwrap());
        assert!(pear.iter().all(|x| x.abs() < INIT_BOUND));
        assert_eq!(t.rows(), v.len());
    }

    #[test]
    fn wrong_dimension_errors() {
        let v = vocab();
        let f = file_with("apple 1 2 3\n");
        match load_embeddings(f.path(), &v, EMBEDDING_DIM, 0) {
            Err(Error::EmbeddingDim {
                line: 1,
                expected: 200,
                found: 3,
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let v = vocab();
        let f = file_with("apple 1 2 3\npear 1 x 3\n");
        match load_embeddings(f.path(), &v, 3, 0) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
