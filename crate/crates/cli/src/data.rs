//! Delimited subject-level data: a header row, one arm column holding 0
//! (control) or 1 (treated), and numeric endpoint columns.

use std::io::Read;
use std::path::Path;

use winplan_core::TrialData;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub endpoint_names: Vec<String>,
    pub data: TrialData,
}

pub fn read_dataset(path: &Path, arm_column: &str, delimiter: u8) -> Result<Dataset, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    parse_dataset(file, arm_column, delimiter)
}

pub fn parse_dataset<R: Read>(
    reader: R,
    arm_column: &str,
    delimiter: u8,
) -> Result<Dataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| CliError::Parse(format!("cannot read header: {e}")))?
        .clone();
    let arm_idx = header.iter().position(|h| h == arm_column).ok_or_else(|| {
        CliError::Validation(format!("arm column `{arm_column}` not found in header"))
    })?;
    let endpoint_idx: Vec<usize> = (0..header.len()).filter(|&i| i != arm_idx).collect();
    if endpoint_idx.is_empty() {
        return Err(CliError::Validation(
            "no endpoint columns besides the arm column".into(),
        ));
    }
    let endpoint_names: Vec<String> = endpoint_idx
        .iter()
        .map(|&i| header[i].to_string())
        .collect();

    let k = endpoint_idx.len();
    let mut treated = vec![Vec::new(); k];
    let mut control = vec![Vec::new(); k];
    for (n, record) in rdr.records().enumerate() {
        // Header is line 1.
        let line = n + 2;
        let record = record.map_err(|e| CliError::Parse(format!("line {line}: {e}")))?;
        let arm = match record.get(arm_idx) {
            Some("1") => &mut treated,
            Some("0") => &mut control,
            other => {
                return Err(CliError::Parse(format!(
                    "line {line}: arm column `{arm_column}` must be 0 or 1, found `{}`",
                    other.unwrap_or("")
                )))
            }
        };
        for (col, &i) in arm.iter_mut().zip(&endpoint_idx) {
            let cell = record.get(i).unwrap_or("");
            if cell.is_empty() {
                return Err(CliError::Parse(format!(
                    "line {line}: missing value for `{}`",
                    &header[i]
                )));
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Parse(format!(
                    "line {line}: `{}` value `{cell}` is not numeric",
                    &header[i]
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Parse(format!(
                    "line {line}: `{}` value `{cell}` is not finite",
                    &header[i]
                )));
            }
            col.push(v);
        }
    }
    let data = TrialData::from_columns(treated, control)?;
    Ok(Dataset {
        endpoint_names,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Dataset, CliError> {
        parse_dataset(text.as_bytes(), "arm", b',')
    }

    #[test]
    fn parses_columns_by_arm() {
        let ds = parse("arm,a,b\n1,2,5\n0,1,4\n1,3,6\n0,2,7\n").unwrap();
        assert_eq!(ds.endpoint_names, vec!["a", "b"]);
        assert_eq!(ds.data.treated(0), &[2.0, 3.0]);
        assert_eq!(ds.data.control(1), &[4.0, 7.0]);
    }

    #[test]
    fn arm_column_may_sit_anywhere() {
        let ds = parse("x,arm\n2,1\n3,1\n1,0\n2,0\n").unwrap();
        assert_eq!(ds.endpoint_names, vec!["x"]);
        assert_eq!(ds.data.treated(0), &[2.0, 3.0]);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse("arm,a\n1,2\n0,abc\n").unwrap_err();
        assert!(
            matches!(err, CliError::Parse(ref m) if m.contains("line 3")),
            "{err}"
        );
        let err = parse("arm,a\n1,2\n0,\n").unwrap_err();
        assert!(matches!(err, CliError::Parse(ref m) if m.contains("missing")));
        let err = parse("arm,a\n2,2\n").unwrap_err();
        assert!(matches!(err, CliError::Parse(ref m) if m.contains("line 2")));
    }

    #[test]
    fn structural_errors_are_validation() {
        assert!(matches!(
            parse("grp,a\n1,2\n"),
            Err(CliError::Validation(_))
        ));
        assert!(matches!(parse("arm\n1\n0\n"), Err(CliError::Validation(_))));
        assert!(matches!(
            parse("arm,a\n1,2\n0,1\n0,3\n"),
            Err(CliError::Validation(_))
        ));
    }
}
