//! Text formats for paths, Gram matrices and fitted models.
//!
//! Floats are written with `Display`, the shortest decimal form that parses
//! back to the same `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::featuremap::GramMatrix;
use crate::hedger::HedgeModel;
use crate::paths::{SampledPath, TimeGrid};

const MODEL_MAGIC: &str = "sighedge-model 1";

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_f64(cell: &str, row: usize, col: usize) -> Result<f64> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Err(Error::Format(format!("missing value at row {row}, column {col}")));
    }
    cell.parse()
        .map_err(|_| Error::Format(format!("bad number {cell:?} at row {row}, column {col}")))
}

fn parse_row(line: &str, row: usize) -> Result<Vec<f64>> {
    line.split(',')
        .enumerate()
        .map(|(col, c)| parse_f64(c, row, col))
        .collect()
}

/// Writes `t,x1,...,xd` followed by one row per sample.
pub fn write_path_csv<W: Write>(p: &SampledPath, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=p.dim()).map(|c| format!("x{c}")));
    w.write_record(&header)?;
    for (i, t) in p.times().iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(p.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the path CSV format. Rows with missing or extra cells are rejected.
pub fn read_path_csv<R: Read>(input: R) -> Result<SampledPath> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[0] != "t" {
        return Err(Error::Format(format!(
            "expected header t,x1,...,xd, found {:?}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let dim = header.len() - 1;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        times.push(parse_f64(&rec[0], row, 0)?);
        for col in 1..=dim {
            values.push(parse_f64(&rec[col], row, col)?);
        }
    }
    SampledPath::from_flat(TimeGrid::new(times)?, values, dim)
}

pub fn save_path(p: &SampledPath, file: impl AsRef<Path>) -> Result<()> {
    write_path_csv(p, BufWriter::new(File::create(file)?))
}

pub fn load_path(file: impl AsRef<Path>) -> Result<SampledPath> {
    read_path_csv(BufReader::new(File::open(file)?))
}

/// Header of path ids, then one row per path.
pub fn write_gram_csv<W: Write>(g: &GramMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(g.path_ids())?;
    for a in 0..g.n() {
        w.write_record((0..g.n()).map(|b| g.get(a, b).to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_gram_csv<R: Read>(input: R) -> Result<GramMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(input);
    let ids: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let n = ids.len();
    let mut entries = Vec::with_capacity(n * n);
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        for (col, cell) in rec.iter().enumerate() {
            entries.push(parse_f64(cell, row, col)?);
        }
    }
    if entries.len() != n * n {
        return Err(Error::Format(format!(
            "{} Gram rows for {n} ids",
            entries.len() / n.max(1)
        )));
    }
    GramMatrix::from_entries(DMatrix::from_row_slice(n, n, &entries), ids)
}

pub fn save_gram(g: &GramMatrix, file: impl AsRef<Path>) -> Result<()> {
    write_gram_csv(g, BufWriter::new(File::create(file)?))
}

pub fn load_gram(file: impl AsRef<Path>) -> Result<GramMatrix> {
    read_gram_csv(BufReader::new(File::open(file)?))
}

/// Writes a fitted model:
///
/// ```text
/// sighedge-model 1
/// n,d,M,lambda,pi0,refinement
/// <values>
/// beta
/// <β as one row>
/// payoffs
/// <π as one row>
/// gram
/// <Gram CSV>
/// path <id>
/// <path CSV>
/// end
/// ...
/// ```
pub fn write_model<W: Write>(m: &HedgeModel, mut out: W) -> Result<()> {
    writeln!(out, "{MODEL_MAGIC}")?;
    writeln!(out, "n,d,M,lambda,pi0,refinement")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        m.n(),
        m.dim(),
        m.train()[0].steps(),
        m.lambda(),
        m.pi0(),
        m.refinement()
    )?;
    writeln!(out, "beta")?;
    writeln!(out, "{}", join(m.dual()))?;
    writeln!(out, "payoffs")?;
    writeln!(out, "{}", join(m.payoffs()))?;
    writeln!(out, "gram")?;
    write_gram_csv(m.gram(), &mut out)?;
    for (id, p) in m.gram().path_ids().iter().zip(m.train()) {
        writeln!(out, "path {id}")?;
        write_path_csv(p, &mut out)?;
        writeln!(out, "end")?;
    }
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(Error::Format(format!("unexpected end of model file at line {}", self.line))),
        }
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let got = self.next()?;
        if got.trim() != want {
            return Err(Error::Format(format!(
                "line {}: expected {want:?}, found {got:?}",
                self.line
            )));
        }
        Ok(())
    }
}

pub fn read_model<R: Read>(input: R) -> Result<HedgeModel> {
    let mut lines = Lines {
        inner: BufReader::new(input).lines(),
        line: 0,
    };
    lines.expect(MODEL_MAGIC)?;
    lines.expect("n,d,M,lambda,pi0,refinement")?;
    let header = lines.next()?;
    let cells: Vec<&str> = header.split(',').map(str::trim).collect();
    if cells.len() != 6 {
        return Err(Error::Format(format!("model header has {} fields", cells.len())));
    }
    let int = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Format(format!("bad integer {s:?} in model header")))
    };
    let n = int(cells[0])?;
    let d = int(cells[1])?;
    let steps = int(cells[2])?;
    let lambda = parse_f64(cells[3], 0, 3)?;
    let pi0 = parse_f64(cells[4], 0, 4)?;
    let refinement = int(cells[5])?;

    lines.expect("beta")?;
    let dual = parse_row(&lines.next()?, lines.line)?;
    lines.expect("payoffs")?;
    let payoffs = parse_row(&lines.next()?, lines.line)?;
    lines.expect("gram")?;
    let mut gram_text = String::new();
    for _ in 0..=n {
        gram_text.push_str(&lines.next()?);
        gram_text.push('\n');
    }
    let gram = read_gram_csv(gram_text.as_bytes())?;

    let mut train = Vec::with_capacity(n);
    for id in gram.path_ids() {
        lines.expect(&format!("path {id}"))?;
        let mut text = String::new();
        loop {
            let l = lines.next()?;
            if l.trim() == "end" {
                break;
            }
            text.push_str(&l);
            text.push('\n');
        }
        let p = read_path_csv(text.as_bytes())?;
        if p.dim() != d || p.steps() != steps {
            return Err(Error::Format(format!(
                "path {id} has dimension {} and {} steps, header says {d} and {steps}",
                p.dim(),
                p.steps()
            )));
        }
        train.push(p);
    }
    if train.len() != n {
        return Err(Error::Format(format!("{} paths, header says {n}", train.len())));
    }
    HedgeModel::from_parts(train, payoffs, dual, lambda, pi0, refinement, gram)
}

pub fn save_model(m: &HedgeModel, file: impl AsRef<Path>) -> Result<()> {
    write_model(m, BufWriter::new(File::create(file)?))
}

pub fn load_model(file: impl AsRef<Path>) -> Result<HedgeModel> {
    read_model(File::open(file)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hedger::fit;

    fn path(vals: &[f64]) -> SampledPath {
        let g = TimeGrid::uniform(0.0, 0.1, vals.len() - 1).unwrap();
        SampledPath::from_flat(g, vals.to_vec(), 1).unwrap()
    }

    #[test]
    fn path_round_trip_is_exact() {
        let g = TimeGrid::uniform(0.0, 30.0 / 365.0, 3).unwrap();
        let p = SampledPath::from_flat(g, vec![1.0, 0.1, 1.0 / 3.0, 2.0, 0.7, 1e-17, 1.5, 3.0], 2).unwrap();
        let mut buf = Vec::new();
        write_path_csv(&p, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x1,x2\n"));
        assert_eq!(read_path_csv(buf.as_slice()).unwrap(), p);
    }

    #[test]
    fn missing_cells_rejected() {
        let text = "t,x1\n0,1\n0.5,\n1,2\n";
        assert!(matches!(read_path_csv(text.as_bytes()), Err(Error::Format(_))));
        let short = "t,x1,x2\n0,1,1\n0.5,2\n";
        assert!(read_path_csv(short.as_bytes()).is_err());
        let bad_header = "time,x1\n0,1\n1,2\n";
        assert!(matches!(read_path_csv(bad_header.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn gram_round_trip() {
        let g = GramMatrix::from_entries(
            DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.2, 1.0 / 7.0]),
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_gram_csv(&g, &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("a,b\n"));
        assert_eq!(read_gram_csv(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn model_round_trip() {
        let train = vec![
            path(&[1.0, 1.01, 0.98, 1.02]),
            path(&[1.0, 0.99, 1.0, 0.97]),
            path(&[1.0, 1.03, 1.04, 1.05]),
        ];
        let payoffs = [0.02, 0.0, 0.05];
        let m = fit(train, &payoffs, 0.01, 1e-3, 2).unwrap();
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn truncated_model_rejected() {
        let train = vec![path(&[1.0, 1.01, 0.98])];
        let m = fit(train, &[0.01], 0.0, 1e-3, 1).unwrap();
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut = &text[..text.len() - 4];
        assert!(matches!(read_model(cut.as_bytes()), Err(Error::Format(_))));
    }
}
