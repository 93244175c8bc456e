pub mod cli;
pub mod demo;
pub mod fea;
pub mod fixtures;
pub mod flows;
pub mod fsio;
pub mod geometry;
pub mod mor;
pub mod mtx;
pub mod schematic;
pub mod sim;
pub mod units;
