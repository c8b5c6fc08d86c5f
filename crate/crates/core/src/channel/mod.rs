//! Line-of-sight array-of-subarrays THz channel and the Rayleigh baseline.

mod array;
mod los;
mod rayleigh;

pub use array::{element_positions, steering_vector, ArrayGeometry, CVector, Direction};
pub use los::{los_channel, path_loss, ChannelSet, LinkGeometry, LosBlock, UserPlacement};
pub use rayleigh::{rayleigh_channel, rayleigh_channel_from};
