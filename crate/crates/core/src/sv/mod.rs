//! SystemVerilog frontend: lexer, parser, diagnostics and pretty printer.

pub mod ast;
pub mod diag;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use diag::{format_diagnostics, has_errors, DiagCode, Diagnostic, Severity};
pub use lexer::{lex, Token, TokenKind};
pub use parser::{parse_expression, parse_module, parse_source, Parsed};
pub use printer::{print_expr, print_module};
