//! Serde helpers that print 0-based mode indices as the 1-based labels used
//! in spec files and reports.

use serde::ser::SerializeSeq;
use serde::Serializer;

pub fn one<S: Serializer>(mode: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*mode as u64 + 1)
}

pub fn many<S: Serializer>(modes: &[usize], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(modes.len()))?;
    for m in modes {
        seq.serialize_element(&(*m as u64 + 1))?;
    }
    seq.end()
}

pub fn opt_triple<S: Serializer>(modes: &Option<[usize; 3]>, s: S) -> Result<S::Ok, S::Error> {
    match modes {
        Some(m) => many(m, s),
        None => s.serialize_none(),
    }
}
