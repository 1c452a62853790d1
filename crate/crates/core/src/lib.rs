//! Jet-space port-Hamiltonian systems: exact symbolic calculus on jet
//! polynomials, matrix differential operators, the jet lift, boundary port
//! structure, method-of-lines numerics and a small model language.

pub mod field;
pub mod grid;
pub mod jetexpr;
pub mod lift;
pub mod matrix;
pub mod modelio;
pub mod numerics;
pub mod opalg;
pub mod ports;
pub mod system;
