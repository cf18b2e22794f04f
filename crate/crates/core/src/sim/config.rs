//! Simulation settings and the flat `key = value` config format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::decoder::DecoderConfig;
use crate::error::{Error, Result};
use crate::flashboard::{LayoutKind, ScanPolicy, MAX_SUGGESTIONS};
use crate::lm::Discounts;
use crate::wordpred::{Transport, DEFAULT_MAX_LEN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Random,
    Deterministic,
    FreqSorted,
    Diagonal,
    CharBound,
    Dijkstra,
    ExternalLlm,
    WordBound,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::Random,
        Scheme::Deterministic,
        Scheme::FreqSorted,
        Scheme::Diagonal,
        Scheme::CharBound,
        Scheme::Dijkstra,
        Scheme::ExternalLlm,
        Scheme::WordBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Random => "random",
            Scheme::Deterministic => "deterministic",
            Scheme::FreqSorted => "freqsorted",
            Scheme::Diagonal => "diagonal",
            Scheme::CharBound => "char_bound",
            Scheme::Dijkstra => "dijkstra",
            Scheme::ExternalLlm => "external_llm",
            Scheme::WordBound => "word_bound",
        }
    }

    /// How the virtual board that forms highlight groups is laid out.
    pub fn layout(self) -> LayoutKind {
        match self {
            Scheme::Random | Scheme::Deterministic => LayoutKind::Alphabetical,
            Scheme::FreqSorted => LayoutKind::Sequential,
            _ => LayoutKind::Diagonal,
        }
    }

    pub fn policy(self) -> ScanPolicy {
        match self {
            Scheme::Random => ScanPolicy::Random,
            Scheme::Deterministic | Scheme::FreqSorted => ScanPolicy::Deterministic,
            _ => ScanPolicy::Weighted,
        }
    }

    /// Whether the scheme fills suggestion slots.
    pub fn suggests(self) -> bool {
        matches!(self, Scheme::Dijkstra | Scheme::ExternalLlm | Scheme::WordBound)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CvMode {
    Wscv,
    Ascv,
}

impl CvMode {
    pub fn name(self) -> &'static str {
        match self {
            CvMode::Wscv => "wscv",
            CvMode::Ascv => "ascv",
        }
    }
}

impl fmt::Display for CvMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CvMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wscv" => Ok(CvMode::Wscv),
            "ascv" => Ok(CvMode::Ascv),
            _ => Err(Error::Config(format!("unknown cv mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Schemes to run; every subject runs each one.
    pub schemes: Vec<Scheme>,
    pub cv_mode: CvMode,
    pub passage_path: Option<PathBuf>,
    pub corpus_path: Option<PathBuf>,
    pub subjects_path: Option<PathBuf>,
    pub seed: u64,
    pub suggestions_n: usize,
    pub soa_seconds: f64,
    pub pause_seconds: f64,
    /// Letters the completion search may add to a partial word.
    pub max_len: usize,
    /// Cumulative scans after which an intended unit is abandoned.
    pub abandon_scans: u32,
    pub decoder: DecoderConfig,
    pub discounts: Discounts,
    pub suggester: Option<Transport>,
    pub suggester_timeout_ms: u64,
    pub out_path: Option<PathBuf>,
    pub trace_dir: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            schemes: vec![Scheme::Random],
            cv_mode: CvMode::Wscv,
            passage_path: None,
            corpus_path: None,
            subjects_path: None,
            seed: 0,
            suggestions_n: MAX_SUGGESTIONS,
            soa_seconds: 0.125,
            pause_seconds: 0.0,
            max_len: DEFAULT_MAX_LEN,
            abandon_scans: 75,
            decoder: DecoderConfig::default(),
            discounts: Discounts::default(),
            suggester: None,
            suggester_timeout_ms: 2000,
            out_path: None,
            trace_dir: None,
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl SimConfig {
    /// Parse `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = SimConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(key.trim(), value.trim(), base_dir)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        SimConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Apply one setting.
    pub fn set(&mut self, key: &str, value: &str, base_dir: &Path) -> Result<()> {
        let path = || Some(base_dir.join(value));
        match key {
            "scheme" | "schemes" => {
                self.schemes = value
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<_>>()?;
            }
            "cv" | "cv_mode" => self.cv_mode = value.parse()?,
            "passage" | "passage_path" => self.passage_path = path(),
            "corpus" | "corpus_path" => self.corpus_path = path(),
            "subjects" | "subjects_path" => self.subjects_path = path(),
            "out" | "out_path" => self.out_path = path(),
            "trace" | "trace_dir" => self.trace_dir = path(),
            "seed" => self.seed = num(key, value)?,
            "suggestions_n" => self.suggestions_n = num(key, value)?,
            "soa_seconds" => self.soa_seconds = num(key, value)?,
            "pause_seconds" => self.pause_seconds = num(key, value)?,
            "max_len" => self.max_len = num(key, value)?,
            "abandon_scans" => self.abandon_scans = num(key, value)?,
            "p_thresh" => self.decoder.p_thresh = num(key, value)?,
            "max_scans" => self.decoder.max_scans = num(key, value)?,
            "backspace_prior" => self.decoder.backspace_prior = num(key, value)?,
            "discounts" => {
                let d: Vec<f64> = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?;
                let d: [f64; 4] = d
                    .try_into()
                    .map_err(|_| Error::Config("discounts: expected four values".into()))?;
                self.discounts = Discounts::new(d)?;
            }
            "suggester_cmd" => {
                let argv: Vec<String> = value.split_whitespace().map(String::from).collect();
                self.suggester = (!argv.is_empty()).then_some(Transport::Process(argv));
            }
            "suggester_tcp" => self.suggester = Some(Transport::Tcp(value.to_string())),
            "suggester_timeout_ms" => self.suggester_timeout_ms = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.decoder.validate()?;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.schemes.is_empty() {
            return bad("no scheme selected");
        }
        if self.suggestions_n > MAX_SUGGESTIONS {
            return bad("suggestions_n must be at most 6");
        }
        if self.schemes.iter().any(|s| s.suggests()) && self.suggestions_n == 0 {
            return bad("word schemes need suggestions_n >= 1");
        }
        if !(self.soa_seconds.is_finite() && self.soa_seconds > 0.0) {
            return bad("soa_seconds must be positive");
        }
        if !(self.pause_seconds.is_finite() && self.pause_seconds >= 0.0) {
            return bad("pause_seconds must be non-negative");
        }
        if self.max_len == 0 {
            return bad("max_len must be at least 1");
        }
        if self.abandon_scans == 0 {
            return bad("abandon_scans must be at least 1");
        }
        if self.suggester_timeout_ms == 0 {
            return bad("suggester_timeout_ms must be positive");
        }
        Ok(())
    }
}
