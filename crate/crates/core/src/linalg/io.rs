//! Plain-text matrix formats: headerless CSV and JSON arrays of rows.

use std::io::{Read, Write};

use super::Mat;
use crate::error::{Error, Result};

/// Reads a headerless comma-separated matrix, one row per line.
pub fn read_csv<R: Read>(reader: R) -> Result<Mat> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {field:?}: {e}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidMatrix("empty CSV matrix".into()));
    }
    Mat::from_rows(&rows)
}

pub fn write_csv<W: Write>(m: &Mat, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for i in 0..m.rows() {
        wtr.write_record(m.row(i).iter().map(|v| format_real(*v)))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn to_csv_string(m: &Mat) -> String {
    let mut buf = Vec::new();
    write_csv(m, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is ascii")
}

pub fn read_json<R: Read>(reader: R) -> Result<Mat> {
    Ok(serde_json::from_reader(reader)?)
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let m = Mat::from_rows(&[[1.0, -0.1], [1e-300, 3.25]]).unwrap();
        let text = to_csv_string(&m);
        assert_eq!(text, "1.0,-0.1\n1e-300,3.25\n");
        assert_eq!(read_csv(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn csv_rejects_ragged_and_garbage() {
        assert!(read_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(read_csv("1,x\n".as_bytes()).is_err());
        assert!(read_csv("".as_bytes()).is_err());
        assert!(read_csv("1,nan\n".as_bytes()).is_err());
    }

    #[test]
    fn csv_tolerates_spaces_and_blank_lines() {
        let m = read_csv(" 1, 2\n\n3 ,4\n".as_bytes()).unwrap();
        assert_eq!(m, Mat::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
    }
}
