use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

/// Stable diagnostic codes. The string form never changes between releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Code {
    UnknownElement,
    UnknownAttribute,
    MisplacedElement,
    AttributeNotAllowed,
    MissingAttribute,
    MissingElement,
    InvalidValue,
    InvalidExpression,
    DuplicateName,
    DuplicateAttribute,
    LanguageMismatch,
    DanglingDefaultScene,
    DanglingSceneRef,
    DanglingImageRef,
    DanglingSoundRef,
    DanglingRegionRef,
    DanglingListRef,
    DanglingCallback,
    GroupLengthMismatch,
    GroupDrawingConflict,
    MissingReactionDuration,
    MovePathUnused,
    MoveWithoutPath,
    TemplateMissing,
    TemplateCycle,
    ResourceNotFound,
    ResourcesUnchecked,
    XmlMalformed,
    WrongRoot,
    UnknownLanguage,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::UnknownElement => "UNKNOWN_ELEMENT",
            Code::UnknownAttribute => "UNKNOWN_ATTRIBUTE",
            Code::MisplacedElement => "MISPLACED_ELEMENT",
            Code::AttributeNotAllowed => "ATTRIBUTE_NOT_ALLOWED",
            Code::MissingAttribute => "MISSING_ATTRIBUTE",
            Code::MissingElement => "MISSING_ELEMENT",
            Code::InvalidValue => "INVALID_VALUE",
            Code::InvalidExpression => "INVALID_EXPRESSION",
            Code::DuplicateName => "DUPLICATE_NAME",
            Code::DuplicateAttribute => "DUPLICATE_ATTRIBUTE",
            Code::LanguageMismatch => "LANGUAGE_MISMATCH",
            Code::DanglingDefaultScene => "DANGLING_DEFAULT_SCENE",
            Code::DanglingSceneRef => "DANGLING_SCENE_REF",
            Code::DanglingImageRef => "DANGLING_IMAGE_REF",
            Code::DanglingSoundRef => "DANGLING_SOUND_REF",
            Code::DanglingRegionRef => "DANGLING_REGION_REF",
            Code::DanglingListRef => "DANGLING_LIST_REF",
            Code::DanglingCallback => "DANGLING_CALLBACK",
            Code::GroupLengthMismatch => "GROUP_LENGTH_MISMATCH",
            Code::GroupDrawingConflict => "GROUP_DRAWING_CONFLICT",
            Code::MissingReactionDuration => "MISSING_REACTION_DURATION",
            Code::MovePathUnused => "MOVE_PATH_UNUSED",
            Code::MoveWithoutPath => "MOVE_WITHOUT_PATH",
            Code::TemplateMissing => "TEMPLATE_MISSING",
            Code::TemplateCycle => "TEMPLATE_CYCLE",
            Code::ResourceNotFound => "RESOURCE_NOT_FOUND",
            Code::ResourcesUnchecked => "RESOURCES_UNCHECKED",
            Code::XmlMalformed => "XML_MALFORMED",
            Code::WrongRoot => "WRONG_ROOT",
            Code::UnknownLanguage => "UNKNOWN_LANGUAGE",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourcePos {
    pub line: u32,
    pub column: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    /// Element path such as `settings/scenes/scene[scene1]/region[region1]`.
    pub path: String,
    pub pos: SourcePos,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<String>,
}

impl Diagnostic {
    pub fn new(severity: Severity, code: Code, path: impl Into<String>, pos: SourcePos, message: impl Into<String>) -> Self {
        Diagnostic { severity, code, path: path.into(), pos, message: message.into(), suggestion: None }
    }

    pub fn error(code: Code, path: impl Into<String>, pos: SourcePos, message: impl Into<String>) -> Self {
        Self::new(Severity::Error, code, path, pos, message)
    }

    pub fn warning(code: Code, path: impl Into<String>, pos: SourcePos, message: impl Into<String>) -> Self {
        Self::new(Severity::Warning, code, path, pos, message)
    }

    pub fn with_suggestion(mut self, suggestion: Option<impl Into<String>>) -> Self {
        self.suggestion = suggestion.map(Into::into);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// One line of the human-readable report.
    pub fn to_report_line(&self, file: &str) -> String {
        let mut line = format!(
            "{file}:{}:{}: {} [{}] {}: {}",
            self.pos.line, self.pos.column, self.severity, self.code, self.path, self.message
        );
        if let Some(s) = &self.suggestion {
            line.push_str(&format!(" (did you mean `{s}`?)"));
        }
        line
    }
}

pub fn count_errors(diagnostics: &[Diagnostic]) -> usize {
    diagnostics.iter().filter(|d| d.is_error()).count()
}
