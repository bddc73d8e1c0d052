#![allow(clippy::needless_range_loop)]

pub mod order;
pub mod finalg;
pub mod sheafrep;
pub mod compord;
pub mod gelfand;
pub mod corpus;
pub mod report;
