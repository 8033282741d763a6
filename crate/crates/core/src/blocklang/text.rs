//! Canonical JSON text for AST nodes.
//!
//! Every node is an object with a `"kind"` discriminator. Emission sorts keys
//! and drops whitespace, so `emit(parse(t)) == t` for canonical `t`.

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::canonical;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error at {line}:{column}: {message}")]
    Schema { line: usize, column: usize, message: String },
}

impl From<serde_json::Error> for AstError {
    fn from(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        let (line, column, message) = (err.line(), err.column(), err.to_string());
        match err.classify() {
            Category::Data => AstError::Schema { line, column, message },
            Category::Syntax | Category::Eof | Category::Io => AstError::Syntax { line, column, message },
        }
    }
}

/// Parses any AST node type (expression, statement, program, test) from JSON.
pub fn parse_ast<T: DeserializeOwned>(text: &str) -> Result<T, AstError> {
    Ok(serde_json::from_str(text)?)
}

/// Emits a node as canonical JSON.
pub fn emit_ast<T: Serialize + ?Sized>(node: &T) -> String {
    canonical::to_string(node)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocklang::{BehaviorStmt, Color, Expr, Program, TestStmt, ROUNDS_COUNT};

    #[test]
    fn assert_eq_shape() {
        let t = TestStmt::assert_eq(Expr::attr("redBerries"), Expr::attr(ROUNDS_COUNT));
        assert_eq!(
            emit_ast(&t),
            r#"{"kind":"assertEq","lhs":{"kind":"attr","name":"redBerries"},"rhs":{"kind":"attr","name":"roundsCount"}}"#
        );
    }

    #[test]
    fn literals_are_bare_json_values() {
        assert_eq!(emit_ast(&Expr::color(Color::Pink)), r#"{"kind":"lit","value":"pink"}"#);
        assert_eq!(emit_ast(&Expr::count(4)), r#"{"kind":"lit","value":4}"#);
        let back: Expr = parse_ast(r#"{"value":4,"kind":"lit"}"#).unwrap();
        assert_eq!(back, Expr::count(4));
    }

    #[test]
    fn empty_text_is_syntax_error() {
        assert!(matches!(parse_ast::<Vec<TestStmt>>(""), Err(AstError::Syntax { .. })));
        assert!(matches!(parse_ast::<Expr>("{\"kind\":"), Err(AstError::Syntax { .. })));
    }

    #[test]
    fn unknown_variant_is_schema_error() {
        let err = parse_ast::<Expr>(r#"{"kind":"lessThan","lhs":1}"#).unwrap_err();
        assert!(matches!(err, AstError::Schema { .. }), "{err}");
        let err = parse_ast::<Expr>(r#"{"kind":"lit","value":"teal"}"#).unwrap_err();
        assert!(matches!(err, AstError::Schema { .. }), "{err}");
        let err = parse_ast::<Expr>(r#"{"kind":"attr","name":"x","extra":1}"#).unwrap_err();
        assert!(matches!(err, AstError::Schema { .. }), "{err}");
    }

    #[test]
    fn program_round_trip() {
        let p = Program::Critter {
            init: vec![BehaviorStmt::set_attr("shirt", Expr::color(Color::Red))],
            on_tile: vec![BehaviorStmt::if_else(
                Expr::tile_is(crate::blocklang::Terrain::Dirt),
                vec![BehaviorStmt::set_attr("shirt", Expr::color(Color::Orange))],
                vec![],
            )],
        };
        let text = emit_ast(&p);
        assert!(text.starts_with(r#"{"init":[{"kind":"setAttr""#), "{text}");
        assert_eq!(parse_ast::<Program>(&text).unwrap(), p);
        assert_eq!(emit_ast(&parse_ast::<Program>(&text).unwrap()), text);
    }
}
