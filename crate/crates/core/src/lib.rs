//! Benchmark harness for LLM-generated SystemVerilog finite-state machines.

pub mod corpus;
pub mod elab;
pub mod eval;
pub mod gateway;
pub mod golden;
pub mod logic;
pub mod prompt;
pub mod sim;
pub mod sv;
