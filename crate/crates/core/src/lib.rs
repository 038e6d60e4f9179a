//! Many-valued modal logic over the eight-element Boolean algebra with a
//! consistency ("ball") operator: evaluation, frame correspondence, and
//! derivation checking.

pub mod algebra;
pub mod cli;
pub mod frames;
pub mod kripke;
pub mod proofs;
pub mod prop4;
pub mod syntax;
