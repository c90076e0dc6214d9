mod analyze;
mod gap;
mod phy;
mod simulate;

pub use analyze::{analyze, bounds};
pub use gap::gap_scan;
pub use phy::phy_slope;
pub use simulate::simulate;
