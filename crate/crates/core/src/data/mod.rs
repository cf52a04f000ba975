//! Dataset preparation: study metadata, intensity windowing, augmentation and
//! patient-level stratified splitting.

pub mod augment;
pub mod records;
pub mod split;
pub mod window;

pub use augment::{augment, random_augment, AugmentOp, AugmentPolicy};
pub use records::{ImageRecord, StudyIndex, View};
pub use split::{stratified_split, PatientStratum, Split, SplitAssignment, SplitSpec};
pub use window::{window_to_8bit, WindowingSpec};
