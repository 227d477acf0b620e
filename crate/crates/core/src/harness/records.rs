use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

/// Fixed header of every per-round CSV transcript.
pub const CSV_HEADER: &str = "round,action,observed,score,loss,explored,cum_metric,w_norm";

/// One row of a run transcript.
///
/// For halfspace runs `action` is the predicted label (±1), `observed` the
/// revealed label and `cum_metric` the running mistake count. For bandit runs
/// `action` is the 1-based arm actually played, `observed` its reward and
/// `cum_metric` the running reward. `score` is the learner's score of the
/// greedy choice before the update; `w_norm` is measured after it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub action: i64,
    pub observed: f64,
    pub score: f64,
    pub loss: f64,
    pub explored: bool,
    pub cum_metric: f64,
    pub w_norm: f64,
}

/// Sink that hashes every byte and optionally keeps a copy.
struct HashingSink {
    hasher: Sha256,
    buffer: Option<Vec<u8>>,
}

impl Write for HashingSink {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.hasher.update(buf);
        if let Some(b) = self.buffer.as_mut() {
            b.extend_from_slice(buf);
        }
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// Streams [`RoundRecord`]s to CSV, hashing the bytes on the way.
pub struct TranscriptWriter {
    inner: csv::Writer<HashingSink>,
    next_round: u64,
}

impl TranscriptWriter {
    pub fn new(keep_bytes: bool) -> Self {
        let sink = HashingSink {
            hasher: Sha256::new(),
            buffer: keep_bytes.then(Vec::new),
        };
        Self {
            inner: csv::Writer::from_writer(sink),
            next_round: 1,
        }
    }

    pub fn push(&mut self, record: &RoundRecord) -> Result<()> {
        debug_assert_eq!(record.round, self.next_round, "rounds must be contiguous");
        self.next_round += 1;
        self.inner.serialize(record)?;
        Ok(())
    }

    /// Returns the hex SHA-256 of the transcript and, if requested, its bytes.
    pub fn finish(self) -> Result<(String, Option<Vec<u8>>)> {
        let sink = self
            .inner
            .into_inner()
            .map_err(|e| crate::Error::Io(e.to_string()))?;
        Ok((hex::encode(sink.hasher.finalize()), sink.buffer))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_schema() {
        let mut w = TranscriptWriter::new(true);
        w.push(&RoundRecord {
            round: 1,
            action: -1,
            observed: 1.0,
            score: -0.25,
            loss: 0.5,
            explored: false,
            cum_metric: 1.0,
            w_norm: 1.0,
        })
        .unwrap();
        let (hash, bytes) = w.finish().unwrap();
        let text = String::from_utf8(bytes.unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "1,-1,1.0,-0.25,0.5,false,1.0,1.0");
        assert_eq!(hash, hex::encode(Sha256::digest(text.as_bytes())));
    }
}
