pub mod bench;
pub mod report;
pub mod sim;
pub mod sweep;
