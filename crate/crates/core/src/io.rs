//! Delimited text formats.
//!
//! All inputs are UTF-8, one record per line, tab- or comma-separated (the
//! delimiter is detected from the first data line). Blank lines and lines
//! starting with `#` are ignored.

use std::io::{BufRead, Write};
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::graph::{EdgeRecord, InstanceGraph, MetaRecord, NodeMeta};
use crate::netmodel::UserEdgeRecord;

/// A parsed data line: 1-based line number and trimmed fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub line: usize,
    pub fields: Vec<String>,
}

/// Splits a delimited stream into rows, checking the column count.
pub fn read_rows<R: BufRead>(reader: R, arity: RangeInclusive<usize>) -> Result<Vec<Row>> {
    let mut delim: Option<char> = None;
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let d = *delim.get_or_insert_with(|| if trimmed.contains('\t') { '\t' } else { ',' });
        let fields: Vec<String> = trimmed.split(d).map(|f| f.trim().to_owned()).collect();
        if !arity.contains(&fields.len()) {
            return Err(Error::parse(
                line_no,
                format!(
                    "expected {}..={} columns, found {}",
                    arity.start(),
                    arity.end(),
                    fields.len()
                ),
            ));
        }
        if let Some(pos) = fields.iter().position(|f| f.is_empty()) {
            return Err(Error::parse(
                line_no,
                format!("column {} is empty", pos + 1),
            ));
        }
        rows.push(Row {
            line: line_no,
            fields,
        });
    }
    Ok(rows)
}

fn parse_f64(row: &Row, col: usize, what: &str) -> Result<f64> {
    row.fields[col].parse::<f64>().map_err(|_| {
        Error::parse(
            row.line,
            format!("{what} `{}` is not numeric", row.fields[col]),
        )
    })
}

/// `source, target[, weight]`.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Vec<EdgeRecord>> {
    read_rows(reader, 2..=3)?
        .into_iter()
        .map(|row| {
            let weight = if row.fields.len() == 3 {
                let w = parse_f64(&row, 2, "weight")?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(Error::Validation(format!(
                        "line {}: weight must be positive, got {w}",
                        row.line
                    )));
                }
                Some(w)
            } else {
                None
            };
            let mut f = row.fields.into_iter();
            Ok(EdgeRecord {
                source: f.next().unwrap(),
                target: f.next().unwrap(),
                weight,
            })
        })
        .collect()
}

/// `label, status, platform`.
pub fn read_meta<R: BufRead>(reader: R) -> Result<Vec<MetaRecord>> {
    read_rows(reader, 3..=3)?
        .into_iter()
        .map(|row| {
            let status = row.fields[1]
                .parse()
                .map_err(|e| Error::parse(row.line, e))?;
            let platform = row.fields[2]
                .parse()
                .map_err(|e| Error::parse(row.line, e))?;
            Ok(MetaRecord {
                label: row.fields[0].clone(),
                meta: NodeMeta { status, platform },
            })
        })
        .collect()
}

/// `src_user_hash, src_instance, dst_user_hash, dst_instance`.
pub fn read_user_edges<R: BufRead>(reader: R) -> Result<Vec<UserEdgeRecord>> {
    read_rows(reader, 4..=4)?
        .into_iter()
        .map(|row| {
            let mut f = row.fields.into_iter();
            Ok(UserEdgeRecord {
                source_user: f.next().unwrap(),
                source_instance: f.next().unwrap(),
                target_user: f.next().unwrap(),
                target_instance: f.next().unwrap(),
            })
        })
        .collect()
}

/// `label, value` pairs with a numeric value (rankings, scores).
pub fn read_scores<R: BufRead>(reader: R) -> Result<Vec<(String, f64)>> {
    read_rows(reader, 2..=2)?
        .into_iter()
        .map(|row| {
            let v = parse_f64(&row, 1, "score")?;
            Ok((row.fields[0].clone(), v))
        })
        .collect()
}

/// Writes `source\ttarget\tweight` lines, preceded by `header` comment lines.
pub fn write_edge_list<W: Write>(g: &InstanceGraph, header: &[String], mut w: W) -> Result<()> {
    write_header(&mut w, header)?;
    writeln!(w, "# source\ttarget\tweight")?;
    for (s, t, wt) in g.edges() {
        writeln!(w, "{}\t{}\t{}", g.label(s), g.label(t), wt)?;
    }
    Ok(())
}

pub fn write_meta<W: Write>(g: &InstanceGraph, mut w: W) -> Result<()> {
    writeln!(w, "# label\tstatus\tplatform")?;
    for v in 0..g.node_count() {
        let m = g.meta(v);
        writeln!(w, "{}\t{}\t{}", g.label(v), m.status, m.platform)?;
    }
    Ok(())
}

pub fn write_user_edges<W: Write>(records: &[UserEdgeRecord], mut w: W) -> Result<()> {
    writeln!(w, "# src_user\tsrc_instance\tdst_user\tdst_instance")?;
    for r in records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            r.source_user, r.source_instance, r.target_user, r.target_instance
        )?;
    }
    Ok(())
}

pub fn write_header<W: Write>(w: &mut W, header: &[String]) -> Result<()> {
    for h in header {
        writeln!(w, "# {h}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_tab_and_comma() {
        let tab = read_edge_list("# c\na\tb\t2\n\nb\tc\n".as_bytes()).unwrap();
        assert_eq!(tab.len(), 2);
        assert_eq!(tab[0].weight, Some(2.0));
        assert_eq!(tab[1].weight, None);

        let comma = read_edge_list("a, b, 3\n".as_bytes()).unwrap();
        assert_eq!(comma[0], EdgeRecord::new("a", "b", 3.0));
    }

    #[test]
    fn reports_line_numbers() {
        let err = read_edge_list("a,b\n# x\na,b,c,d\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_edge_list("a,b,heavy\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = read_edge_list("a,b,-2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn meta_rows() {
        let m = read_meta("x\tonline\tmastodon\ny\toffline\tother\n".as_bytes()).unwrap();
        assert_eq!(m[1].label, "y");
        assert_eq!(m[1].meta.platform, crate::graph::Platform::Other);
        assert!(read_meta("x,sleeping,other".as_bytes()).is_err());
    }

    #[test]
    fn edge_list_roundtrip() {
        let recs = vec![
            EdgeRecord::new("a", "b", 2.0),
            EdgeRecord::new("b", "a", 1.5),
        ];
        let (g, _) = crate::graph::build_graph(recs, None).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &["generated".into()], &mut buf).unwrap();
        let back = read_edge_list(buf.as_slice()).unwrap();
        let (h, _) = crate::graph::build_graph(back, None).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), h.edges().collect::<Vec<_>>());
    }
}
