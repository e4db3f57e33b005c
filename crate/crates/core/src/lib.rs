pub mod automata;
pub mod datagen;
pub mod episodes;
pub mod error;
pub mod miner;
pub mod probmodel;
pub mod sigtest;
pub mod winscan;
pub mod io;
pub mod pipeline;
