//! Text dump of the count tables.
//!
//! ```text
//! P3LM 1
//! discounts <d1> <d2> <d3> <d4>
//! <level>\t<key>\t<count>
//! ...
//! ```
//!
//! Every trie node is written, root (empty key) included, so loading rebuilds
//! the tables exactly.

use std::io::{BufRead, Write};

use super::{CountTable, Discounts, LayeredLm, Level};
use crate::error::{Error, Result};

pub const MAGIC: &str = "P3LM";
pub const VERSION: u32 = 1;

impl LayeredLm {
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{MAGIC} {VERSION}")?;
        let [d1, d2, d3, d4] = self.discounts.as_array();
        writeln!(out, "discounts {d1} {d2} {d3} {d4}")?;
        for level in Level::ALL {
            for (key, count) in self.table(level).entries() {
                writeln!(out, "{}\t{key}\t{count}", level.name())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_dump<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::LmFormat("missing header".into()))?;
        let mut parts = header.split(' ');
        if parts.next() != Some(MAGIC) {
            return Err(Error::LmFormat("bad magic".into()));
        }
        match parts.next().and_then(|v| v.parse::<u32>().ok()) {
            Some(VERSION) => {}
            other => return Err(Error::LmFormat(format!("unsupported version {other:?}"))),
        }

        let disc_line = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::LmFormat("missing discounts".into()))?;
        let mut fields = disc_line.split(' ');
        if fields.next() != Some("discounts") {
            return Err(Error::LmFormat("expected discounts line".into()));
        }
        let values: Vec<f64> = fields
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::LmFormat(format!("discount: {e}")))?;
        let arr: [f64; 4] = values
            .try_into()
            .map_err(|_| Error::LmFormat("expected four discounts".into()))?;
        let mut lm = LayeredLm::empty(Discounts::new(arr)?);

        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::LmFormat(format!("record {}: {msg}", i + 1));
            let mut rec = line.splitn(3, '\t');
            let level = rec
                .next()
                .and_then(Level::from_name)
                .ok_or_else(|| bad("unknown level"))?;
            let key = rec.next().ok_or_else(|| bad("missing key"))?;
            let count = rec
                .next()
                .and_then(|c| c.parse::<u64>().ok())
                .ok_or_else(|| bad("bad count"))?;
            let table: &mut CountTable = lm.table_mut(level);
            if !table.set(key.as_bytes(), count) {
                return Err(bad("key outside alphabet"));
            }
        }
        for level in Level::ALL {
            if !lm.table(level).is_prefix_consistent() {
                return Err(Error::LmFormat(format!(
                    "{} table violates prefix counts",
                    level.name()
                )));
            }
        }
        if lm.table(Level::Unigram).total() == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(lm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::Symbol;

    #[test]
    fn dump_roundtrip() {
        let lm = LayeredLm::build("the cat sat on the mat", Discounts::new([0.5, 0.4, 0.3, 0.7]).unwrap())
            .unwrap();
        let mut buf = Vec::new();
        lm.write_dump(&mut buf).unwrap();
        assert!(buf.starts_with(b"P3LM 1\n"));
        let back = LayeredLm::read_dump(&buf[..]).unwrap();
        assert_eq!(back.discounts(), lm.discounts());
        for level in Level::ALL {
            assert_eq!(back.table(level).entries(), lm.table(level).entries());
        }
        for c in Symbol::all() {
            assert_eq!(back.p_char("the ma", c), lm.p_char("the ma", c));
        }
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(LayeredLm::read_dump(&b"P3LX 1\n"[..]).is_err());
        assert!(LayeredLm::read_dump(&b"P3LM 9\n"[..]).is_err());
        assert!(LayeredLm::read_dump(&b"P3LM 1\ndiscounts 0.5 0.5\n"[..]).is_err());
        assert!(LayeredLm::read_dump(&b"P3LM 1\ndiscounts 0.5 0.5 0.5 0.5\nnope\tx\t1\n"[..]).is_err());
    }
}
