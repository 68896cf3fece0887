pub mod bench;
pub mod breakdown;
pub mod factorial;
pub mod plotdata;
pub mod train;
pub mod variants;
