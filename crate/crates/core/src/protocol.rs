//! UoA to main-panel mapping and construction of the system/user prompt pair.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Article;

/// Number of Units of Assessment.
pub const UOA_COUNT: u8 = 34;

pub const DEFAULT_USER_PREFIX: &str = "Score this:";

/// Tokens every system instruction must mention.
pub const REQUIRED_TOKENS: [&str; 7] = [
    "1*",
    "2*",
    "3*",
    "4*",
    "rigour",
    "originality",
    "significance",
];

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("uoa {0} outside 1..=34")]
    UoaOutOfRange(i64),
    #[error("no system instructions for main panel {0}")]
    MissingPanel(MainPanel),
    #[error("template for panel {panel} is missing {}", missing.join(", "))]
    Validation {
        panel: MainPanel,
        missing: Vec<String>,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad template manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },
    #[error("article {0:?} has an empty title or abstract")]
    EmptyArticle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MainPanel {
    A,
    B,
    C,
    D,
}

impl MainPanel {
    pub const ALL: [MainPanel; 4] = [MainPanel::A, MainPanel::B, MainPanel::C, MainPanel::D];

    pub fn letter(self) -> char {
        match self {
            MainPanel::A => 'A',
            MainPanel::B => 'B',
            MainPanel::C => 'C',
            MainPanel::D => 'D',
        }
    }

    pub fn from_letter(s: &str) -> Option<Self> {
        match s.trim() {
            "A" | "a" => Some(MainPanel::A),
            "B" | "b" => Some(MainPanel::B),
            "C" | "c" => Some(MainPanel::C),
            "D" | "d" => Some(MainPanel::D),
            _ => None,
        }
    }

    /// UoAs belonging to this panel.
    pub fn uoas(self) -> std::ops::RangeInclusive<u8> {
        match self {
            MainPanel::A => 1..=6,
            MainPanel::B => 7..=12,
            MainPanel::C => 13..=24,
            MainPanel::D => 25..=34,
        }
    }
}

impl fmt::Display for MainPanel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

pub fn main_panel(uoa: i64) -> Result<MainPanel, ProtocolError> {
    match uoa {
        1..=6 => Ok(MainPanel::A),
        7..=12 => Ok(MainPanel::B),
        13..=24 => Ok(MainPanel::C),
        25..=34 => Ok(MainPanel::D),
        _ => Err(ProtocolError::UoaOutOfRange(uoa)),
    }
}

/// System instructions per main panel plus the user-prompt prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    system_instructions: BTreeMap<MainPanel, String>,
    pub user_prefix: String,
}

impl TemplateSet {
    /// Validate and build. Every panel must be present and mention each of
    /// [`REQUIRED_TOKENS`] (the quality dimensions case-insensitively).
    pub fn new(
        system_instructions: BTreeMap<MainPanel, String>,
        user_prefix: impl Into<String>,
    ) -> Result<Self, ProtocolError> {
        for panel in MainPanel::ALL {
            let text = system_instructions
                .get(&panel)
                .ok_or(ProtocolError::MissingPanel(panel))?;
            let missing = missing_tokens(text);
            if !missing.is_empty() {
                return Err(ProtocolError::Validation { panel, missing });
            }
        }
        Ok(Self {
            system_instructions,
            user_prefix: user_prefix.into(),
        })
    }

    /// The bundled templates, written for this crate.
    pub fn bundled() -> Self {
        let map = BTreeMap::from([
            (MainPanel::A, include_str!("../templates/panel_a.txt").to_string()),
            (MainPanel::B, include_str!("../templates/panel_b.txt").to_string()),
            (MainPanel::C, include_str!("../templates/panel_c.txt").to_string()),
            (MainPanel::D, include_str!("../templates/panel_d.txt").to_string()),
        ]);
        Self::new(map, DEFAULT_USER_PREFIX).expect("bundled templates are valid")
    }

    pub fn system_text(&self, panel: MainPanel) -> Option<&str> {
        self.system_instructions.get(&panel).map(String::as_str)
    }
}

fn missing_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    REQUIRED_TOKENS
        .iter()
        .filter(|t| !lower.contains(&t.to_lowercase()))
        .map(|t| t.to_string())
        .collect()
}

/// Panel letter → template path, as found in a manifest file or the
/// `[templates]` section of a run config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TemplateManifest {
    #[serde(rename = "A")]
    pub a: Option<PathBuf>,
    #[serde(rename = "B")]
    pub b: Option<PathBuf>,
    #[serde(rename = "C")]
    pub c: Option<PathBuf>,
    #[serde(rename = "D")]
    pub d: Option<PathBuf>,
    pub user_prefix: Option<String>,
}

impl TemplateManifest {
    fn path(&self, panel: MainPanel) -> Option<&PathBuf> {
        match panel {
            MainPanel::A => self.a.as_ref(),
            MainPanel::B => self.b.as_ref(),
            MainPanel::C => self.c.as_ref(),
            MainPanel::D => self.d.as_ref(),
        }
    }

    /// Resolve template files relative to `base` and validate them.
    pub fn load(&self, base: &Path) -> Result<TemplateSet, ProtocolError> {
        let mut map = BTreeMap::new();
        for panel in MainPanel::ALL {
            let rel = self.path(panel).ok_or(ProtocolError::MissingPanel(panel))?;
            let path = base.join(rel);
            let text = std::fs::read_to_string(&path)
                .map_err(|source| ProtocolError::Io { path, source })?;
            map.insert(panel, text);
        }
        let prefix = self
            .user_prefix
            .clone()
            .unwrap_or_else(|| DEFAULT_USER_PREFIX.to_string());
        TemplateSet::new(map, prefix)
    }
}

/// Load a TOML template manifest (`A = "a.txt"` ... `D = "d.txt"`, optional
/// `user_prefix`). Template paths are relative to the manifest's directory.
pub fn load_templates(path: &Path) -> Result<TemplateSet, ProtocolError> {
    let raw = std::fs::read_to_string(path).map_err(|source| ProtocolError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let manifest: TemplateManifest =
        toml::from_str(&raw).map_err(|e| ProtocolError::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    manifest.load(path.parent().unwrap_or(Path::new(".")))
}

/// A ready-to-send prompt for one article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPair {
    pub system_text: String,
    pub user_text: String,
    pub article_id: String,
}

/// Join all lines into one, collapsing each line break (and whitespace
/// around it) into a single space.
pub fn flatten_lines(text: &str) -> String {
    text.split(['\n', '\r'])
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn build_prompt(article: &Article, templates: &TemplateSet) -> Result<PromptPair, ProtocolError> {
    let title = flatten_lines(&article.title);
    let abstract_line = flatten_lines(&article.abstract_text);
    if title.is_empty() || abstract_line.is_empty() {
        return Err(ProtocolError::EmptyArticle(article.id.clone()));
    }
    let panel = main_panel(i64::from(article.uoa))?;
    let system_text = templates
        .system_text(panel)
        .ok_or(ProtocolError::MissingPanel(panel))?
        .to_string();
    let user_text = format!(
        "{} {title}\nAbstract\n{abstract_line}",
        templates.user_prefix
    );
    Ok(PromptPair {
        system_text,
        user_text,
        article_id: article.id.clone(),
    })
}
