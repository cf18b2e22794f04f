//! Client side of the line-delimited JSON suggestion protocol.
//!
//! ```text
//! -> {"id": 7, "context": "the united ", "prefix": "sta", "n": 6}
//! <- {"id": 7, "suggestions": [{"word": "states", "score": 0.8}]}
//! <- {"id": 7, "error": "..."}
//! ```
//!
//! One request is in flight at a time. Responses carrying an older id (left
//! over from a timed-out request) are skipped.

use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::Suggestion;
use crate::error::{Error, Result};

/// Anything that can propose whole-word completions.
pub trait SuggestionProvider {
    fn suggest(&mut self, context: &str, prefix: &str, n: usize) -> Result<Vec<Suggestion>>;
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    context: &'a str,
    prefix: &'a str,
    n: usize,
}

#[derive(Deserialize)]
struct WireSuggestion {
    word: String,
    score: f64,
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    #[serde(default)]
    suggestions: Option<Vec<WireSuggestion>>,
    #[serde(default)]
    error: Option<String>,
}

/// Where the provider lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transport {
    /// Program and arguments; requests go to its stdin.
    Process(Vec<String>),
    /// `host:port`.
    Tcp(String),
}

enum Link {
    Process {
        child: Child,
        stdin: ChildStdin,
        lines: Receiver<std::io::Result<String>>,
    },
    Tcp {
        writer: TcpStream,
        reader: BufReader<TcpStream>,
    },
}

/// A connection to an external suggestion provider.
///
/// After a transport failure the handle stays broken and every later call
/// fails fast, so callers fall back without paying the timeout again.
pub struct SuggesterHandle {
    link: Option<Link>,
    timeout: Duration,
    next_id: u64,
}

impl SuggesterHandle {
    pub fn connect(transport: &Transport, timeout: Duration) -> Result<Self> {
        if timeout.is_zero() {
            return Err(Error::Config("suggester timeout must be positive".into()));
        }
        let link = match transport {
            Transport::Process(argv) => {
                let (program, args) = argv
                    .split_first()
                    .ok_or_else(|| Error::Config("empty suggester command".into()))?;
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()
                    .map_err(|e| Error::Transport(format!("spawn {program}: {e}")))?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                let (tx, rx) = mpsc::channel();
                thread::spawn(move || {
                    for line in BufReader::new(stdout).lines() {
                        if tx.send(line).is_err() {
                            break;
                        }
                    }
                });
                Link::Process {
                    child,
                    stdin,
                    lines: rx,
                }
            }
            Transport::Tcp(addr) => {
                let stream = TcpStream::connect(addr)
                    .map_err(|e| Error::Transport(format!("connect {addr}: {e}")))?;
                stream.set_nodelay(true).ok();
                let reader = BufReader::new(stream.try_clone()?);
                Link::Tcp {
                    writer: stream,
                    reader,
                }
            }
        };
        Ok(SuggesterHandle {
            link: Some(link),
            timeout,
            next_id: 1,
        })
    }

    pub fn is_alive(&self) -> bool {
        self.link.is_some()
    }

    fn exchange(&mut self, line: &str, id: u64) -> Result<Response> {
        let deadline = Instant::now() + self.timeout;
        let link = self
            .link
            .as_mut()
            .ok_or_else(|| Error::Transport("suggester unavailable".into()))?;
        let write = |w: &mut dyn Write| -> std::io::Result<()> {
            w.write_all(line.as_bytes())?;
            w.write_all(b"\n")?;
            w.flush()
        };
        match link {
            Link::Process { stdin, .. } => write(stdin),
            Link::Tcp { writer, .. } => write(writer),
        }
        .map_err(|e| Error::Transport(format!("write: {e}")))?;

        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            if remaining.is_zero() {
                return Err(Error::Transport("timed out".into()));
            }
            let raw = match link {
                Link::Process { lines, .. } => match lines.recv_timeout(remaining) {
                    Ok(Ok(l)) => l,
                    Ok(Err(e)) => return Err(Error::Transport(format!("read: {e}"))),
                    Err(RecvTimeoutError::Timeout) => return Err(Error::Transport("timed out".into())),
                    Err(RecvTimeoutError::Disconnected) => {
                        return Err(Error::Transport("provider closed its output".into()))
                    }
                },
                Link::Tcp { reader, .. } => {
                    reader.get_ref().set_read_timeout(Some(remaining))?;
                    let mut l = String::new();
                    match reader.read_line(&mut l) {
                        Ok(0) => return Err(Error::Transport("connection closed".into())),
                        Ok(_) => l,
                        Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                            return Err(Error::Transport("timed out".into()))
                        }
                        Err(e) => return Err(Error::Transport(format!("read: {e}"))),
                    }
                }
            };
            let resp: Response = serde_json::from_str(raw.trim())
                .map_err(|e| Error::Transport(format!("malformed response: {e}")))?;
            match resp.id.cmp(&id) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => return Ok(resp),
                std::cmp::Ordering::Greater => {
                    return Err(Error::Transport(format!("unexpected response id {}", resp.id)))
                }
            }
        }
    }
}

impl SuggestionProvider for SuggesterHandle {
    fn suggest(&mut self, context: &str, prefix: &str, n: usize) -> Result<Vec<Suggestion>> {
        let id = self.next_id;
        self.next_id += 1;
        let line = serde_json::to_string(&Request {
            id,
            context,
            prefix,
            n,
        })
        .expect("request serializes");
        let resp = match self.exchange(&line, id) {
            Ok(r) => r,
            Err(e) => {
                // Timeouts leave the stream out of step; drop the link.
                self.link = None;
                return Err(e);
            }
        };
        if let Some(msg) = resp.error {
            return Err(Error::Transport(format!("provider error: {msg}")));
        }
        let items = resp
            .suggestions
            .ok_or_else(|| Error::Transport("response without suggestions".into()))?;
        Ok(items
            .into_iter()
            .map(|s| Suggestion::new(s.word, s.score))
            .collect())
    }
}

impl Drop for SuggesterHandle {
    fn drop(&mut self) {
        if let Some(Link::Process { mut child, stdin, .. }) = self.link.take() {
            drop(stdin);
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}
