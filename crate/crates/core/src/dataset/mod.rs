//! Kernel files, masking schedules, train/test splits and synthetic data.

pub mod io;
mod masking;
mod split;
mod synth;

pub use io::{load_kernel_set, read_kernel, write_kernel, KernelFormat};
pub use masking::{default_ratios, make_mask_schedule, removal_count, MaskSchedule};
pub use split::{make_split, make_split_among, SplitIndices};
pub use synth::{synth_kernel_set, SyntheticSpec};
