//! CSV datasets. The first column is `context`; `obs` marks observational
//! rows and every other id names its intervened column, unless a context
//! list supplies the mapping.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::data::{DataContext, Dataset, OBSERVATIONAL_ID};
use crate::error::{Error, Result};
use crate::sem::ContextSpec;

pub const CONTEXT_COLUMN: &str = "context";

/// Reads a dataset. With `mapping`, context ids are looked up there; without
/// it, `obs` is observational and any other id must equal a column label.
pub fn read_csv<R: Read>(reader: R, mapping: Option<&[ContextSpec]>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0).map(str::trim) != Some(CONTEXT_COLUMN) {
        return Err(Error::Format(format!("first column must be `{CONTEXT_COLUMN}`")));
    }
    let labels: Vec<String> = header.iter().skip(1).map(|h| h.trim().to_string()).collect();
    if labels.is_empty() {
        return Err(Error::Format("no variable columns".into()));
    }
    if let Some(l) = labels.iter().find(|l| l.is_empty()) {
        return Err(Error::Format(format!("empty column name `{l}`")));
    }

    let p = labels.len();
    let mut data = Vec::new();
    let mut ids = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != p + 1 {
            return Err(Error::Format(format!("line {line}: {} fields, expected {}", rec.len(), p + 1)));
        }
        ids.push(rec[0].trim().to_string());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                return Err(Error::Format(format!("line {line}: missing value in column `{}`", labels[j])));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Format(format!("line {line}: `{cell}` in column `{}` is not a number", labels[j])))?;
            data.push(v);
        }
    }
    if ids.is_empty() {
        return Err(Error::Format("no data rows".into()));
    }

    let mut contexts: Vec<DataContext> = Vec::new();
    for id in &ids {
        if contexts.iter().any(|c| &c.id == id) {
            continue;
        }
        let ctx = match mapping {
            Some(specs) => specs
                .iter()
                .find(|c| &c.id == id)
                .map(ContextSpec::data_context)
                .ok_or_else(|| Error::UnknownContext(id.clone()))?,
            None if id == OBSERVATIONAL_ID => DataContext::observational(id.clone()),
            None => {
                let t = labels.iter().position(|l| l == id).ok_or_else(|| Error::InvalidContext {
                    id: id.clone(),
                    reason: "not `obs` and not a column name".into(),
                })?;
                DataContext::intervention(id.clone(), t)
            }
        };
        contexts.push(ctx);
    }
    let values = DMatrix::from_row_slice(ids.len(), p, &data);
    Dataset::new(labels, values, &ids, contexts)
}

/// Variable labels from the header row, without reading the data.
pub fn read_csv_labels<R: Read>(reader: R) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?;
    if header.get(0).map(str::trim) != Some(CONTEXT_COLUMN) {
        return Err(Error::Format(format!("first column must be `{CONTEXT_COLUMN}`")));
    }
    Ok(header.iter().skip(1).map(|h| h.trim().to_string()).collect())
}

pub fn read_csv_str(text: &str, mapping: Option<&[ContextSpec]>) -> Result<Dataset> {
    read_csv(text.as_bytes(), mapping)
}

/// Writes `context,<labels>` then one line per row. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let mut header = vec![CONTEXT_COLUMN.to_string()];
    header.extend(ds.labels().iter().cloned());
    w.write_record(&header)?;
    let mut rec = Vec::with_capacity(ds.p() + 1);
    for i in 0..ds.n() {
        rec.clear();
        rec.push(ds.context_id_of_row(i).to_string());
        rec.extend((0..ds.p()).map(|j| ds.value(i, j).to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(ds: &Dataset) -> String {
    let mut buf = Vec::new();
    write_csv(ds, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sem::{simulate, Intervention, LinearSem};

    #[test]
    fn round_trip_is_exact() {
        let sem = LinearSem::from_edges(&["s", "u", "t"], &[("s", "u", 1.8), ("u", "t", 0.9)]).unwrap();
        let ctxs = [ContextSpec::observational("obs"), ContextSpec::intervention("s", Intervention::hard(0, 1.0, 1.0))];
        let ds = simulate(&sem, &ctxs, 100, 1).unwrap();
        let text = to_csv_string(&ds);
        assert!(text.starts_with("context,s,u,t\n"));
        assert_eq!(text.lines().count(), 201);
        let back = read_csv_str(&text, None).unwrap();
        assert_eq!(back, ds);
        assert_eq!(read_csv_str(&text, Some(&ctxs)).unwrap(), ds);
    }

    #[test]
    fn mapping_overrides_naming_convention() {
        let text = "context,a,b\nobs,1,2\nobs,2,3\npush,3,4\n";
        assert!(matches!(read_csv_str(text, None), Err(Error::InvalidContext { .. })));
        let map = [ContextSpec::observational("obs"), ContextSpec::intervention("push", Intervention::soft(1, 1.0, 1.0))];
        let ds = read_csv_str(text, Some(&map)).unwrap();
        assert_eq!(ds.contexts()[1].target, Some(1));
        assert!(matches!(read_csv_str(text, Some(&map[..1])), Err(Error::UnknownContext(_))));
    }

    #[test]
    fn malformed_input_is_rejected() {
        let bad = [
            "ctx,a\nobs,1\n",
            "context,a,b\nobs,1,\n",
            "context,a,b\nobs,1,x\n",
            "context,a,b\nobs,1\n",
            "context,a\n",
            "context\nobs\n",
        ];
        for text in bad {
            assert!(read_csv_str(text, None).is_err(), "{text:?}");
        }
        let e = read_csv_str("context,a,b\nobs,1,2\nobs,1,\n", None).unwrap_err();
        assert!(e.to_string().contains("line 3") && e.to_string().contains("`b`"), "{e}");
    }
}
