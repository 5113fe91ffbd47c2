//! Core library for the GIML gaze-interaction markup language: keyword
//! registry, parser, analyzer, translator and the runtime engine.

pub mod analyzer;
pub mod color;
pub mod corpus;
pub mod diagnostics;
pub mod engine;
pub mod expr;
pub mod gaze;
pub mod inspect;
pub mod lists;
pub mod model;
pub mod parse;
pub mod paths;
pub mod registry;
pub mod replay;
pub mod template;
pub mod translate;

pub use analyzer::{check_text, validate};
pub use color::ColorValue;
pub use diagnostics::{Code, Diagnostic, Severity, SourcePos};
pub use inspect::inspect;
pub use model::GimlDocument;
pub use parse::{parse, parse_bytes, ParseError};
pub use paths::{resolve_resource_path, ResourceKind};
pub use registry::{registry, Language, Registry};
pub use template::merge_template;
pub use translate::{translate, TranslateError};
pub use engine::{
    CallbackRegistry, Engine, EngineConfig, EngineError, EngineEvent, EventKind, GazePoint, InputTick, RegionState,
    RenderFrame,
};
pub use gaze::{accumulate_aoi, detect_fixations, read_trace, AoiRow, Fixation, GazeSample, IdtParams, Saccade};
pub use replay::{replay, ReplayOutput, SampleRecord};
