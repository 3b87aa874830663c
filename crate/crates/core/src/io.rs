//! JSON Lines sequence files: a `{"dim":n}` header, then one
//! `{"index":[i1,...,in],"re":x,"im":y}` object per support point.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeSequence, MultiIndex};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    index: Vec<i64>,
    re: f64,
    im: f64,
}

pub fn write_sequence<W: Write>(f: &LatticeSequence, mut w: W) -> Result<()> {
    serde_json::to_writer(&mut w, &Header { dim: f.dim() }).map_err(json_err)?;
    writeln!(w)?;
    for (idx, v) in f.iter() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(invalid(format!("non-finite value at {idx}")));
        }
        let entry = Entry {
            index: idx.coords().to_vec(),
            re: v.re,
            im: v.im,
        };
        serde_json::to_writer(&mut w, &entry).map_err(json_err)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sequence<R: BufRead>(r: R) -> Result<LatticeSequence> {
    let mut lines = r
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty sequence file".into()))?;
    let header: Header = serde_json::from_str(&first?)
        .map_err(|e| Error::Parse(format!("line 1: bad header: {e}")))?;
    if header.dim == 0 {
        return Err(Error::Parse("dimension must be at least 1".into()));
    }
    let mut seq = LatticeSequence::zero(header.dim);
    for (lineno, line) in lines {
        let entry: Entry = serde_json::from_str(&line?)
            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if entry.index.len() != header.dim {
            return Err(Error::Parse(format!(
                "line {}: index has {} coordinates, header says {}",
                lineno + 1,
                entry.index.len(),
                header.dim
            )));
        }
        seq.insert(MultiIndex::from(entry.index), Complex64::new(entry.re, entry.im))?;
    }
    Ok(seq)
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_comes_first() {
        let f = LatticeSequence::from_slice_1d(-1, &[Complex64::new(0.5, -2.0)]);
        let mut buf = Vec::new();
        write_sequence(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "{\"dim\":1}\n{\"index\":[-1],\"re\":0.5,\"im\":-2.0}\n");
    }

    #[test]
    fn rejects_bad_index_length() {
        let text = "{\"dim\":2}\n{\"index\":[1],\"re\":1.0,\"im\":0.0}\n";
        assert!(matches!(read_sequence(text.as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_sequence("not json\n".as_bytes()).is_err());
        assert!(read_sequence("".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            entries in proptest::collection::vec(
                ((-50i64..50, -50i64..50), any::<f64>(), any::<f64>()), 0..20)
        ) {
            let entries: Vec<_> = entries
                .into_iter()
                .filter(|(_, re, im)| re.is_finite() && im.is_finite())
                .map(|((a, b), re, im)| (MultiIndex::new(&[a, b]), Complex64::new(re, im)))
                .collect();
            let f = LatticeSequence::from_entries(2, entries).unwrap();
            let mut buf = Vec::new();
            write_sequence(&f, &mut buf).unwrap();
            let back = read_sequence(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), f.len());
            for ((i1, v1), (i2, v2)) in f.iter().zip(back.iter()) {
                prop_assert_eq!(i1, i2);
                prop_assert_eq!(v1.re.to_bits(), v2.re.to_bits());
                prop_assert_eq!(v1.im.to_bits(), v2.im.to_bits());
            }
        }
    }
}
