use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use super::{ChatMessage, ChatSession, GatewayError, Transcript};

/// File name for a session's transcript: path separators become `__`, other
/// unusual characters become `_`.
pub fn transcript_file_name(session_id: &str) -> String {
    let mut out = String::new();
    for c in session_id.chars() {
        match c {
            '/' | '\\' => out.push_str("__"),
            c if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') => out.push(c),
            _ => out.push('_'),
        }
    }
    out.push_str(".json");
    out
}

fn io_err(path: &Path, e: impl ToString) -> GatewayError {
    GatewayError::IoError {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn parse(path: &Path, text: &str) -> Result<Transcript, GatewayError> {
    let t: Transcript = serde_json::from_str(text).map_err(|e| GatewayError::FormatError {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    t.check().map_err(|message| GatewayError::FormatError {
        path: path.display().to_string(),
        message,
    })?;
    Ok(t)
}

pub fn save_transcript(t: &Transcript, dir: &Path) -> Result<(), GatewayError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(transcript_file_name(&t.session_id));
    let text = serde_json::to_string_pretty(t).expect("transcripts serialize");
    std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
}

/// Recorded transcripts keyed by session id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplaySource {
    pub transcripts: BTreeMap<String, Transcript>,
}

impl ReplaySource {
    pub fn session(&self, session_id: &str) -> ReplaySession {
        ReplaySession::from_transcript(session_id, self.transcripts.get(session_id))
    }
}

pub fn load_transcripts(dir: &Path) -> Result<ReplaySource, GatewayError> {
    if !dir.is_dir() {
        return Err(GatewayError::TranscriptNotFound(dir.display().to_string()));
    }
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut transcripts = BTreeMap::new();
    for p in paths {
        let text = std::fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        let t = parse(&p, &text)?;
        transcripts.insert(t.session_id.clone(), t);
    }
    Ok(ReplaySource { transcripts })
}

/// Replays the assistant messages of a recorded session in order,
/// whatever the user sends.
#[derive(Debug, Clone)]
pub struct ReplaySession {
    canned: VecDeque<ChatMessage>,
    transcript: Transcript,
}

impl ReplaySession {
    fn from_transcript(session_id: &str, recorded: Option<&Transcript>) -> Self {
        let mut transcript = Transcript::new(session_id, "replay", recorded.map_or("", |t| t.model.as_str()));
        if let Some(r) = recorded {
            transcript.meta = r.meta.clone();
            transcript.meta.insert("recorded_provider".into(), r.provider.clone().into());
        }
        ReplaySession {
            canned: recorded.map(|t| t.assistant_messages().cloned().collect()).unwrap_or_default(),
            transcript,
        }
    }

    /// Binds to `<dir>/<transcript_file_name(session_id)>`. A missing file
    /// gives an empty session; a missing directory is an error.
    pub fn open(dir: &Path, session_id: &str) -> Result<Self, GatewayError> {
        if !dir.is_dir() {
            return Err(GatewayError::TranscriptNotFound(dir.display().to_string()));
        }
        let path = dir.join(transcript_file_name(session_id));
        let recorded = match std::fs::read_to_string(&path) {
            Ok(text) => Some(parse(&path, &text)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(io_err(&path, e)),
        };
        if let Some(r) = &recorded {
            if r.session_id != session_id {
                return Err(GatewayError::FormatError {
                    path: path.display().to_string(),
                    message: format!("file holds session '{}', expected '{session_id}'", r.session_id),
                });
            }
        }
        Ok(Self::from_transcript(session_id, recorded.as_ref()))
    }

    pub fn remaining(&self) -> usize {
        self.canned.len()
    }
}

impl ChatSession for ReplaySession {
    fn send(&mut self, user_text: &str) -> Result<ChatMessage, GatewayError> {
        self.transcript.messages.push(ChatMessage::user(user_text));
        let reply = self
            .canned
            .pop_front()
            .ok_or_else(|| GatewayError::ReplayExhausted(self.transcript.session_id.clone()))?;
        self.transcript.messages.push(reply.clone());
        Ok(reply)
    }

    fn transcript(&self) -> &Transcript {
        &self.transcript
    }
}
