//! Matrix ingestion and emission: Matrix Market (array and coordinate) and
//! CSV.
//!
//! Matrix Market input accepts `real`, `double` and `integer` fields (plus
//! `pattern` for coordinate files, read as ones) with `general`, `symmetric`
//! or `skew-symmetric` storage. Emitted numbers use the shortest decimal that
//! parses back to the same `f64`, so `parse(emit(A)) == A` bit for bit.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    MatrixMarketArray,
    MatrixMarketCoordinate,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "array" | "mm-array" | "matrix-market-array" => Ok(Format::MatrixMarketArray),
            "coordinate" | "mm-coordinate" | "matrix-market-coordinate" => Ok(Format::MatrixMarketCoordinate),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown matrix format `{other}`")),
        }
    }
}

/// Picks a format from the Matrix Market banner if present, then from the
/// file extension, defaulting to CSV.
pub fn detect_format(input: &[u8], path: Option<&Path>) -> Format {
    let text = String::from_utf8_lossy(&input[..input.len().min(256)]);
    if let Some(first) = text.lines().next() {
        if first.trim_start().to_ascii_lowercase().starts_with("%%matrixmarket") {
            return if first.to_ascii_lowercase().contains("coordinate") {
                Format::MatrixMarketCoordinate
            } else {
                Format::MatrixMarketArray
            };
        }
    }
    match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("mtx") | Some("mm") => Format::MatrixMarketArray,
        _ => Format::Csv,
    }
}

pub fn parse_matrix(input: &[u8], format: Format) -> Result<Matrix> {
    match format {
        Format::Csv => parse_csv(input),
        Format::MatrixMarketArray | Format::MatrixMarketCoordinate => {
            let text = std::str::from_utf8(input).map_err(|e| {
                let (line, column) = position_of(input, e.valid_up_to());
                Error::parse(line, column, "input is not valid UTF-8")
            })?;
            parse_matrix_market(text, format)
        }
    }
}

/// Reads `path` (`-` for stdin), detecting the format unless given.
pub fn read_matrix(path: &Path, format: Option<Format>) -> Result<Matrix> {
    let bytes = if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::Read::read_to_end(&mut std::io::stdin(), &mut buf)?;
        buf
    } else {
        std::fs::read(path)?
    };
    let format = format.unwrap_or_else(|| detect_format(&bytes, Some(path)));
    parse_matrix(&bytes, format)
}

fn position_of(input: &[u8], offset: usize) -> (usize, usize) {
    let before = &input[..offset];
    let line = before.iter().filter(|&&b| b == b'\n').count() + 1;
    let column = offset - before.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

fn parse_csv(input: &[u8]) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line() as usize);
                return Err(Error::parse(line, 1, e.to_string()));
            }
        }
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if record.len() != first.len() {
                return Err(Error::parse(
                    line,
                    record.len().min(first.len()) + 1,
                    format!("ragged row: expected {} fields, found {}", first.len(), record.len()),
                ));
            }
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(k, field)| parse_f64(field, line, k + 1, rows.len(), k))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, 1, "empty input"));
    }
    let cols = rows[0].len();
    if rows.len() != cols {
        return Err(Error::NonSquare { rows: rows.len(), cols });
    }
    Matrix::from_rows(&rows)
}

fn parse_f64(token: &str, line: usize, column: usize, row: usize, col: usize) -> Result<f64> {
    let value: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, column, format!("invalid number `{token}`")))?;
    if !value.is_finite() {
        return Err(Error::NonFinite { row, col });
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

/// Non-comment lines with their 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Iterator for Lines<'a> {
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        self.inner
            .by_ref()
            .map(|(k, l)| (k + 1, l))
            .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'))
    }
}

/// Whitespace-separated tokens with 1-based columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_ascii_whitespace().map(move |t| {
        let offset = t.as_ptr() as usize - line.as_ptr() as usize;
        (offset + 1, t)
    })
}

fn parse_usize(token: &str, line: usize, column: usize) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::parse(line, column, format!("expected a nonnegative integer, found `{token}`")))
}

fn parse_matrix_market(text: &str, declared: Format) -> Result<Matrix> {
    let header = text.lines().next().unwrap_or("");
    let fields: Vec<String> = header.split_ascii_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::parse(
            1,
            1,
            "expected `%%MatrixMarket matrix <layout> <field> <symmetry>`",
        ));
    }
    let layout = match fields[2].as_str() {
        "array" => Format::MatrixMarketArray,
        "coordinate" => Format::MatrixMarketCoordinate,
        other => return Err(Error::parse(1, 1, format!("unsupported layout `{other}`"))),
    };
    if layout != declared {
        return Err(Error::parse(
            1,
            1,
            format!("file is `{}`, but a different layout was requested", fields[2]),
        ));
    }
    let pattern = match fields[3].as_str() {
        "real" | "double" | "integer" => false,
        "pattern" if layout == Format::MatrixMarketCoordinate => true,
        other => return Err(Error::parse(1, 1, format!("unsupported field `{other}`"))),
    };
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(Error::parse(1, 1, format!("unsupported symmetry `{other}`"))),
    };

    // The banner starts with `%`, so it is skipped along with comments.
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let Some((size_line, size_text)) = lines.next() else {
        return Err(Error::parse(1, 1, "missing size line"));
    };
    let size: Vec<(usize, &str)> = tokens(size_text).collect();
    let expected = if layout == Format::MatrixMarketArray { 2 } else { 3 };
    if size.len() != expected {
        return Err(Error::parse(
            size_line,
            1,
            format!("size line needs {expected} integers"),
        ));
    }
    let rows = parse_usize(size[0].1, size_line, size[0].0)?;
    let cols = parse_usize(size[1].1, size_line, size[1].0)?;
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    let n = rows;
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut data = vec![0.0; n * n];

    if layout == Format::MatrixMarketArray {
        // Column-major; symmetric storage lists the lower triangle only,
        // skew-symmetric the strict lower triangle.
        let mut positions = Vec::with_capacity(n * n);
        for j in 0..n {
            let start = match symmetry {
                Symmetry::General => 0,
                Symmetry::Symmetric => j,
                Symmetry::Skew => j + 1,
            };
            positions.extend((start..n).map(|i| (i, j)));
        }
        let mut k = 0;
        for (line, text) in lines.by_ref() {
            for (column, token) in tokens(text) {
                let Some(&(i, j)) = positions.get(k) else {
                    return Err(Error::parse(line, column, "more values than the size line declares"));
                };
                let v = parse_f64(token, line, column, i, j)?;
                place(&mut data, n, i, j, v, symmetry);
                k += 1;
            }
        }
        if k != positions.len() {
            return Err(Error::parse(
                text.lines().count(),
                1,
                format!("expected {} values, found {k}", positions.len()),
            ));
        }
    } else {
        let nnz = parse_usize(size[2].1, size_line, size[2].0)?;
        let mut seen = vec![false; n * n];
        let mut count = 0;
        for (line, text) in lines.by_ref() {
            let toks: Vec<(usize, &str)> = tokens(text).collect();
            let want = if pattern { 2 } else { 3 };
            if toks.len() != want {
                return Err(Error::parse(line, 1, format!("entry line needs {want} fields")));
            }
            let i = parse_usize(toks[0].1, line, toks[0].0)?;
            let j = parse_usize(toks[1].1, line, toks[1].0)?;
            if i == 0 || i > n || j == 0 || j > n {
                return Err(Error::parse(
                    line,
                    toks[0].0,
                    format!("index ({i}, {j}) outside 1..={n}"),
                ));
            }
            let (i, j) = (i - 1, j - 1);
            let v = if pattern {
                1.0
            } else {
                parse_f64(toks[2].1, line, toks[2].0, i, j)?
            };
            if seen[i * n + j] || (symmetry != Symmetry::General && seen[j * n + i]) {
                return Err(Error::parse(
                    line,
                    toks[0].0,
                    format!("duplicate entry ({}, {})", i + 1, j + 1),
                ));
            }
            if symmetry == Symmetry::Skew && i == j {
                return Err(Error::parse(line, toks[0].0, "diagonal entry in skew-symmetric file"));
            }
            seen[i * n + j] = true;
            place(&mut data, n, i, j, v, symmetry);
            count += 1;
            if count > nnz {
                return Err(Error::parse(line, 1, "more entries than the size line declares"));
            }
        }
        if count != nnz {
            return Err(Error::parse(
                text.lines().count(),
                1,
                format!("expected {nnz} entries, found {count}"),
            ));
        }
    }
    Matrix::new(n, data)
}

fn place(data: &mut [f64], n: usize, i: usize, j: usize, v: f64, symmetry: Symmetry) {
    data[i * n + j] = v;
    if i != j {
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric => data[j * n + i] = v,
            Symmetry::Skew => data[j * n + i] = -v,
        }
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-5, 1e16)`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Matrix Market `array real general` (column-major values).
pub fn write_matrix_market_array(a: &Matrix) -> String {
    let n = a.dim();
    let mut out = format!("%%MatrixMarket matrix array real general\n{n} {n}\n");
    for j in 0..n {
        for i in 0..n {
            out.push_str(&format_f64(a.get(i, j)));
            out.push('\n');
        }
    }
    out
}

/// Matrix Market `coordinate real general`, row-major entry order. Only
/// `+0.0` entries are omitted, so `-0.0` survives a round trip.
pub fn write_matrix_market_coordinate(a: &Matrix) -> String {
    let n = a.dim();
    let entries: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, a.get(i, j)))
        .filter(|(_, _, v)| v.to_bits() != 0)
        .collect();
    let mut out = format!(
        "%%MatrixMarket matrix coordinate real general\n{n} {n} {}\n",
        entries.len()
    );
    for (i, j, v) in entries {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, format_f64(v)));
    }
    out
}

pub fn write_csv(a: &Matrix) -> String {
    let mut out = String::new();
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(a: &Matrix, format: Format) -> String {
    match format {
        Format::MatrixMarketArray => write_matrix_market_array(a),
        Format::MatrixMarketCoordinate => write_matrix_market_coordinate(a),
        Format::Csv => write_csv(a),
    }
}
