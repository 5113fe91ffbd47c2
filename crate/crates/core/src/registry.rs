//! Keyword registry: canonical identifiers for every element name, attribute
//! name and enumerated value, with their four surface spellings.
//!
//! The registry is loaded once from `data/keywords.tsv`, embedded at build
//! time, so the parser, the analyzer and the translator all read the same
//! table. Matching is case-insensitive using [`fold`], which lower-cases with
//! full Unicode rules and keeps diacritics.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The embedded registry source.
pub const KEYWORDS_TSV: &str = include_str!("../data/keywords.tsv");

/// Owner used for element entries.
pub const ROOT: &str = "ROOT";
/// Owner of the attributes shared by `region`, `activation` and `reaction`.
pub const REGION_STATE: &str = "REGION_STATE";
/// Owner of the yes/no values.
pub const BOOLEAN: &str = "BOOLEAN";

/// Attributes whose values are yes/no keywords.
pub const BOOLEAN_ATTRIBUTES: &[&str] = &[
    "KEEP_IN_MEMORY",
    "IN_BACKGROUND",
    "BLOCKING_REGIONS_DURING_BLACKOUT",
    "RESET_AFTER_ENTER",
    "SPOTLIGHT",
    "ENABLED",
    "REGION_ANIMATION_ENABLED",
    "IMAGE_ANIMATION_ENABLED",
    "HOLD_SCENE_TRANSITION",
    "ABLE_TO_ACTIVATE_BLACKOUT",
    "RESET_AFTER_ENABLED",
    "IGNORE_GAZE",
    "TURN_OFF_WHEN_FINISHED",
];

/// One of the four supported surface languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Fr,
    De,
    Pl,
}

impl Language {
    pub const ALL: [Language; 4] = [Language::En, Language::Fr, Language::De, Language::Pl];

    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::Fr => "fr",
            Language::De => "de",
            Language::Pl => "pl",
        }
    }

    fn column(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown language code `{0}` (expected one of en, fr, de, pl)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match fold(s.trim()).as_str() {
            "en" => Ok(Language::En),
            "fr" => Ok(Language::Fr),
            "de" => Ok(Language::De),
            "pl" => Ok(Language::Pl),
            _ => Err(UnknownLanguage(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeywordKind {
    Element,
    Attribute,
    EnumValue,
}

impl KeywordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KeywordKind::Element => "element",
            KeywordKind::Attribute => "attribute",
            KeywordKind::EnumValue => "enum_value",
        }
    }
}

impl FromStr for KeywordKind {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "element" => Ok(KeywordKind::Element),
            "attribute" => Ok(KeywordKind::Attribute),
            "enum_value" => Ok(KeywordKind::EnumValue),
            other => Err(RegistryError::BadKind(other.to_string())),
        }
    }
}

/// The single case-folding rule used for every keyword and user identifier.
/// `ß` folds to `ss` so that upper-cased German tokens still match.
pub fn fold(s: &str) -> String {
    s.to_lowercase().replace('ß', "ss")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordEntry {
    pub canonical_id: &'static str,
    pub kind: KeywordKind,
    pub owner: &'static str,
    spellings: [&'static str; 4],
    pub aliases: Vec<(Language, &'static str)>,
}

impl KeywordEntry {
    pub fn spelling(&self, language: Language) -> &'static str {
        self.spellings[language.column()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("line {line}: expected at least 7 tab-separated columns, found {found}")]
    Columns { line: usize, found: usize },
    #[error("unknown keyword kind `{0}`")]
    BadKind(String),
    #[error("line {line}: empty spelling")]
    EmptySpelling { line: usize },
    #[error("line {line}: malformed alias `{alias}`")]
    BadAlias { line: usize, alias: String },
    #[error("`{token}` is ambiguous for {kind} owned by {owner} in {language}: {first} and {second}")]
    Collision {
        token: String,
        kind: &'static str,
        owner: &'static str,
        language: Language,
        first: &'static str,
        second: &'static str,
    },
    #[error("`{0}` is spelled differently under different owners")]
    InconsistentId(&'static str),
    #[error("unknown canonical id `{0}`")]
    UnknownId(String),
}

type IndexKey = (KeywordKind, Language, String);

/// Immutable keyword table with case-insensitive lookup indices.
#[derive(Debug)]
pub struct Registry {
    entries: Vec<KeywordEntry>,
    index: HashMap<&'static str, HashMap<IndexKey, usize>>,
    by_id: HashMap<&'static str, usize>,
}

static GLOBAL: OnceLock<Registry> = OnceLock::new();

/// The registry built from the embedded table.
pub fn registry() -> &'static Registry {
    GLOBAL.get_or_init(|| Registry::from_tsv(KEYWORDS_TSV).expect("embedded keyword table is valid"))
}

impl Registry {
    pub fn from_tsv(source: &'static str) -> Result<Registry, RegistryError> {
        let mut entries = Vec::new();
        for (n, line) in source.lines().enumerate() {
            let line_no = n + 1;
            let trimmed = line.trim_end();
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&'static str> = trimmed.split('\t').collect();
            if cols.len() < 7 {
                return Err(RegistryError::Columns { line: line_no, found: cols.len() });
            }
            let spellings = [cols[3].trim(), cols[4].trim(), cols[5].trim(), cols[6].trim()];
            if spellings.iter().any(|s| s.is_empty()) {
                return Err(RegistryError::EmptySpelling { line: line_no });
            }
            let mut aliases = Vec::new();
            if let Some(raw) = cols.get(7) {
                for alias in raw.split_whitespace() {
                    let (lang, token) = alias
                        .split_once(':')
                        .ok_or_else(|| RegistryError::BadAlias { line: line_no, alias: alias.into() })?;
                    let lang: Language = lang
                        .parse()
                        .map_err(|_| RegistryError::BadAlias { line: line_no, alias: alias.into() })?;
                    aliases.push((lang, token));
                }
            }
            entries.push(KeywordEntry {
                canonical_id: cols[0].trim(),
                kind: cols[1].trim().parse()?,
                owner: cols[2].trim(),
                spellings,
                aliases,
            });
        }

        let mut index: HashMap<&'static str, HashMap<IndexKey, usize>> = HashMap::new();
        let mut by_id: HashMap<&'static str, usize> = HashMap::new();
        for (i, entry) in entries.iter().enumerate() {
            match by_id.get(entry.canonical_id) {
                Some(&first) if entries[first].spellings != entry.spellings => {
                    return Err(RegistryError::InconsistentId(entry.canonical_id));
                }
                Some(_) => {}
                None => {
                    by_id.insert(entry.canonical_id, i);
                }
            }
            let tokens = Language::ALL
                .iter()
                .map(|&l| (l, entry.spelling(l)))
                .chain(entry.aliases.iter().copied());
            for (language, token) in tokens {
                let key = (entry.kind, language, fold(token));
                let owned = index.entry(entry.owner).or_default();
                if let Some(&other) = owned.get(&key) {
                    if entries[other].canonical_id != entry.canonical_id {
                        return Err(RegistryError::Collision {
                            token: token.to_string(),
                            kind: entry.kind.as_str(),
                            owner: entry.owner,
                            language,
                            first: entries[other].canonical_id,
                            second: entry.canonical_id,
                        });
                    }
                    continue;
                }
                owned.insert(key, i);
            }
        }
        Ok(Registry { entries, index, by_id })
    }

    pub fn entries(&self) -> &[KeywordEntry] {
        &self.entries
    }

    /// Case-insensitive lookup of a surface token; `None` when the token is
    /// not a keyword of that kind and owner in `language`.
    pub fn lookup(&self, token: &str, language: Language, kind: KeywordKind, owner: &str) -> Option<&'static str> {
        self.lookup_entry(token, language, kind, owner).map(|e| e.canonical_id)
    }

    pub fn lookup_entry(
        &self,
        token: &str,
        language: Language,
        kind: KeywordKind,
        owner: &str,
    ) -> Option<&KeywordEntry> {
        self.index
            .get(owner)?
            .get(&(kind, language, fold(token)))
            .map(|&i| &self.entries[i])
    }

    /// Table spelling of `canonical_id` in `language`.
    pub fn render(&self, canonical_id: &str, language: Language) -> Result<&'static str, RegistryError> {
        self.by_id
            .get(canonical_id)
            .map(|&i| self.entries[i].spelling(language))
            .ok_or_else(|| RegistryError::UnknownId(canonical_id.to_string()))
    }

    /// Nearest keyword (case-insensitive edit distance at most 2) among the
    /// given owners, if exactly one candidate is closest.
    pub fn suggest(&self, token: &str, language: Language, kind: KeywordKind, owners: &[&str]) -> Option<&'static str> {
        let folded = fold(token);
        let mut best: Option<(usize, &'static str)> = None;
        let mut tie = false;
        for entry in self.entries.iter().filter(|e| e.kind == kind && owners.contains(&e.owner)) {
            let spelling = entry.spelling(language);
            let d = strsim::levenshtein(&folded, &fold(spelling));
            if d > 2 {
                continue;
            }
            match best {
                Some((bd, bs)) if d == bd && bs != spelling => tie = true,
                Some((bd, _)) if d >= bd => {}
                _ => {
                    best = Some((d, spelling));
                    tie = false;
                }
            }
        }
        if tie {
            None
        } else {
            best.map(|(_, s)| s)
        }
    }

    /// Re-emits the table as tab-separated text, one entry per line.
    pub fn dump(&self) -> String {
        let mut out = String::from("canonical_id\tkind\towner\ten\tfr\tde\tpl\taliases\n");
        for e in &self.entries {
            let aliases: Vec<String> = e.aliases.iter().map(|(l, t)| format!("{l}:{t}")).collect();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                e.canonical_id,
                e.kind.as_str(),
                e.owner,
                e.spellings[0],
                e.spellings[1],
                e.spellings[2],
                e.spellings[3],
                aliases.join(" ")
            ));
        }
        out
    }
}
