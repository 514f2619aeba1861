//! Executable reduction chain: Wang tiles, domino problems, p-adic Sudoku
//! puzzles, functional equations and translational tiling systems.

pub mod decorated;
pub mod domino;
pub mod feq;
pub mod json;
pub mod padic;
pub mod padic_sudoku;
pub mod render;
pub mod sudoku;
pub mod tiling;
