use std::fmt;

use serde::{Deserialize, Serialize};

use crate::blocklang::AstPath;
use crate::levels::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Severity {
    Warning,
    Error,
}

/// Machine-readable diagnostic codes. The serialized names are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagCode {
    // block language
    TypeMismatch,
    UnknownAttribute,
    UnknownBerry,
    ContextViolation,
    PaletteViolation,
    EngineAttribute,
    ZeroRepeat,
    RecipeShape,
    ProgramKind,
    // board
    BoardSize,
    NonstandardBoardSize,
    TileRows,
    PathEmpty,
    PathOutOfBounds,
    PathRevisit,
    UnwalkablePath,
    PathNotAdjacent,
    PathNotCycle,
    MissingLandmark,
    LandmarkOffPath,
    BushPlacement,
    BushAfterSignpost,
    // schema / roster / unlock
    MissingRoundsCount,
    EmptyPalette,
    BadAppearance,
    RosterUnknownMutant,
    EmptyRoster,
    UnlockMissing,
    UnlockUnknownLevel,
    UnlockCycle,
    // mutants
    DuplicateMutantId,
    BadMutantEdit,
    MutantUnchanged,
    DuplicateMutant,
    EquivalentMutant,
    UnkillableMutant,
    SolverBudget,
    // placements
    UnwalkablePortal,
    PortalOffPath,
    PortalOnEndpoint,
    DuplicatePortal,
    UnknownSignpost,
    DuplicateSignpost,
    WrongLevelKind,
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Where a diagnostic points: an AST node inside a named program, or a board tile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Location {
    Ast { root: String, path: AstPath },
    Board { pos: Pos },
    Level,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
    pub location: Location,
}

impl Diagnostic {
    pub fn error(code: DiagCode, location: Location, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, code, message: message.into(), location }
    }

    pub fn warning(code: DiagCode, location: Location, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, code, message: message.into(), location }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Rebases an AST diagnostic onto a different root name.
    pub fn with_root(mut self, name: &str) -> Self {
        if let Location::Ast { root, .. } = &mut self.location {
            *root = name.to_string();
        }
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] ", self.code)?;
        match &self.location {
            Location::Ast { root, path } => write!(f, "{root}@{path}: ")?,
            Location::Board { pos } => write!(f, "tile [{}, {}]: ", pos.x, pos.y)?,
            Location::Level => {}
        }
        f.write_str(&self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
