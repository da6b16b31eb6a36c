use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;

use rust_stemmers::{Algorithm, Stemmer};

use crate::error::{Error, Result};

const BUILTIN_STOPLIST: &str = include_str!("../../data/stoplist.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoplistSource {
    Builtin,
    None,
    File(PathBuf),
}

impl fmt::Display for StoplistSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StoplistSource::Builtin => f.write_str("builtin"),
            StoplistSource::None => f.write_str("none"),
            StoplistSource::File(path) => write!(f, "{}", path.display()),
        }
    }
}

impl StoplistSource {
    pub fn parse(value: &str) -> Self {
        match value {
            "builtin" => StoplistSource::Builtin,
            "none" => StoplistSource::None,
            path => StoplistSource::File(PathBuf::from(path)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub stoplist: StoplistSource,
    pub stem: bool,
    pub min_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            stoplist: StoplistSource::Builtin,
            stem: true,
            min_len: 2,
        }
    }
}

pub(crate) fn parse_switch(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl TokenizerConfig {
    /// Apply one `key=value` setting. Returns `Ok(false)` for keys that do
    /// not concern tokenization.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "stoplist" => self.stoplist = StoplistSource::parse(value),
            "stem" => {
                self.stem = parse_switch(value)
                    .ok_or_else(|| Error::InvalidArgument(format!("stem: expected on/off, got {value:?}")))?
            }
            "min_len" => {
                self.min_len = value
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("min_len: expected an integer, got {value:?}")))?
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Single-line form stored in index headers. The stoplist comes last so
    /// that paths containing spaces survive.
    pub fn describe(&self) -> String {
        format!(
            "stem={} min_len={} stoplist={}",
            if self.stem { "on" } else { "off" },
            self.min_len,
            self.stoplist
        )
    }

    pub fn from_description(text: &str) -> Result<Self> {
        let mut config = TokenizerConfig::default();
        let (head, stoplist) = text
            .split_once("stoplist=")
            .ok_or_else(|| Error::format(format!("tokenizer settings without stoplist: {text:?}")))?;
        for pair in head.split_whitespace() {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| Error::format(format!("bad tokenizer setting {pair:?}")))?;
            if !config.set(key, value)? {
                return Err(Error::format(format!("unknown tokenizer setting {key:?}")));
            }
        }
        config.stoplist = StoplistSource::parse(stoplist.trim());
        Ok(config)
    }
}

pub struct Tokenizer {
    config: TokenizerConfig,
    stopwords: HashSet<String>,
    stemmer: Option<Stemmer>,
}

impl fmt::Debug for Tokenizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tokenizer")
            .field("config", &self.config)
            .field("stopwords", &self.stopwords.len())
            .finish()
    }
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::new(TokenizerConfig::default()).expect("builtin stoplist is always available")
    }
}

fn read_stoplist(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .flat_map(str::split_whitespace)
        .map(str::to_lowercase)
        .collect()
}

impl Tokenizer {
    pub fn new(config: TokenizerConfig) -> Result<Self> {
        let stopwords = match &config.stoplist {
            StoplistSource::Builtin => read_stoplist(BUILTIN_STOPLIST),
            StoplistSource::None => HashSet::new(),
            StoplistSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
                read_stoplist(&text)
            }
        };
        let stemmer = config.stem.then(|| Stemmer::create(Algorithm::English));
        Ok(Tokenizer {
            config,
            stopwords,
            stemmer,
        })
    }

    pub fn config(&self) -> &TokenizerConfig {
        &self.config
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    /// Lowercase, split on non-alphanumerics, drop digit-only, short and
    /// stoplisted tokens, then stem.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|raw| !raw.is_empty())
            .map(str::to_lowercase)
            .filter(|tok| !tok.chars().all(|c| c.is_numeric()))
            .filter(|tok| tok.chars().count() >= self.config.min_len)
            .filter(|tok| !self.stopwords.contains(tok))
            .map(|tok| match &self.stemmer {
                Some(stemmer) => stemmer.stem(&tok).into_owned(),
                None => tok,
            })
            .filter(|tok| !tok.is_empty())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_stem() -> Tokenizer {
        Tokenizer::new(TokenizerConfig {
            stem: false,
            ..TokenizerConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn punctuation_digits_and_case() {
        assert_eq!(no_stem().tokenize("Information Retrieval, 1977!"), vec!["information", "retrieval"]);
    }

    #[test]
    fn stopwords_only() {
        assert!(Tokenizer::default().tokenize("the of and").is_empty());
        assert!(no_stem().tokenize("").is_empty());
        assert!(no_stem().tokenize("  ,;: 42 7 x ").is_empty());
    }

    #[test]
    fn stemming_collapses_inflections() {
        let stemmer = Stemmer::create(Algorithm::English);
        let tokens = Tokenizer::default().tokenize("indexing indexed indexes");
        assert_eq!(tokens.len(), 3);
        assert!(tokens.iter().all(|t| t == &tokens[0]));
        assert_eq!(tokens[0], stemmer.stem("index"));
    }

    #[test]
    fn min_len_and_mixed_alphanumerics() {
        let tok = Tokenizer::new(TokenizerConfig {
            stem: false,
            min_len: 4,
            stoplist: StoplistSource::None,
        })
        .unwrap();
        assert_eq!(tok.tokenize("the b52 bomber flew 1000km"), vec!["bomber", "flew", "1000km"]);
    }

    #[test]
    fn description_round_trip() {
        let config = TokenizerConfig {
            stem: false,
            min_len: 3,
            stoplist: StoplistSource::File(PathBuf::from("/tmp/my stop list.txt")),
        };
        assert_eq!(TokenizerConfig::from_description(&config.describe()).unwrap(), config);
        let config = TokenizerConfig::default();
        assert_eq!(TokenizerConfig::from_description(&config.describe()).unwrap(), config);
    }

    #[test]
    fn missing_stoplist_file() {
        let config = TokenizerConfig {
            stoplist: StoplistSource::File(PathBuf::from("/nonexistent/stop.txt")),
            ..TokenizerConfig::default()
        };
        assert!(Tokenizer::new(config).is_err());
    }
}
