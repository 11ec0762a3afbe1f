//! Topological indices of discretized Dirichlet boundary value operators.

pub mod expr;
pub mod numerics;
pub mod degree;
pub mod reduction;
pub mod fem1d;
pub mod verdicts;
pub mod catalog;
pub mod oracle;
pub mod config;
pub mod report;
pub mod selftest;
