//! Replays recorded transcripts.

use std::collections::{HashMap, VecDeque};
use std::io::BufRead;
use std::path::Path;
use std::sync::Mutex;

use super::{Provider, ProviderError, TranscriptEntry};

/// Answers each prompt with the replies recorded for it, in recording order.
/// Once a prompt's queue is down to one reply, that reply is repeated.
pub struct ReplayProvider {
    replies: Mutex<HashMap<String, VecDeque<String>>>,
}

pub fn read_transcript(reader: impl BufRead) -> Result<Vec<TranscriptEntry>, String> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: TranscriptEntry =
            serde_json::from_str(&line).map_err(|e| format!("transcript line {}: {e}", i + 1))?;
        out.push(entry);
    }
    Ok(out)
}

impl ReplayProvider {
    pub fn from_entries(entries: impl IntoIterator<Item = TranscriptEntry>) -> Self {
        let mut replies: HashMap<String, VecDeque<String>> = HashMap::new();
        for e in entries {
            if let Some(r) = e.reply {
                replies.entry(e.prompt).or_default().push_back(r);
            }
        }
        ReplayProvider {
            replies: Mutex::new(replies),
        }
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self, String> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| format!("{}: {e}", path.as_ref().display()))?;
        Ok(Self::from_entries(read_transcript(std::io::BufReader::new(file))?))
    }
}

impl Provider for ReplayProvider {
    fn id(&self) -> &str {
        "replay"
    }

    fn complete(&self, prompt: &str, _model: &str) -> Result<String, ProviderError> {
        let mut map = self.replies.lock().unwrap_or_else(|p| p.into_inner());
        let queue = map
            .get_mut(prompt)
            .ok_or_else(|| ProviderError::Rejected("prompt not in transcript".into()))?;
        if queue.len() > 1 {
            Ok(queue.pop_front().unwrap())
        } else {
            queue
                .front()
                .cloned()
                .ok_or_else(|| ProviderError::Rejected("prompt not in transcript".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(prompt: &str, reply: Option<&str>) -> TranscriptEntry {
        TranscriptEntry {
            prompt: prompt.into(),
            reply: reply.map(String::from),
            error: reply.is_none().then(|| "boom".into()),
            provider: "stub".into(),
            model: "m".into(),
            latency_ms: 0,
            attempts: 1,
        }
    }

    #[test]
    fn replies_in_order() {
        let p = ReplayProvider::from_entries([
            entry("a", Some("1")),
            entry("a", Some("2")),
            entry("b", None),
        ]);
        assert_eq!(p.complete("a", "m").unwrap(), "1");
        assert_eq!(p.complete("a", "m").unwrap(), "2");
        assert_eq!(p.complete("a", "m").unwrap(), "2");
        assert!(p.complete("b", "m").is_err());
        assert!(p.complete("zzz", "m").is_err());
    }
}
