pub mod cli_io;
pub mod distributive;
pub mod error;
pub mod heights;
pub mod ideal;
pub mod poly;
pub mod report;
pub mod search;
