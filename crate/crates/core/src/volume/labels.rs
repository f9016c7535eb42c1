use super::{LabelKind, LabelVolume};
use crate::error::{Error, Result};
use rayon::prelude::*;

pub const NUM_RAW_LABELS: usize = 120;

/// Raw segmentation class (0..=117 whole-body classes, 118 coronary
/// arteries, 119 pulmonary artery) to consolidated anatomy group.
#[rustfmt::skip]
pub const LABEL_TABLE: [u8; NUM_RAW_LABELS] = [
    0, 1, 11, 11, 3, 2, 3, 3, 4, 4, // 0..9
    5, 5, 5, 5, 5, 3, 6, 4, 3, 3, // 10..19
    3, 11, 11, 11, 11, 7, 7, 7, 7, 7, // 20..29
    7, 7, 7, 7, 7, 7, 7, 7, 7, 7, // 30..39
    7, 7, 7, 7, 7, 7, 7, 7, 7, 7, // 40..49
    7, 8, 8, 8, 8, 8, 8, 8, 8, 8, // 50..59
    8, 8, 8, 8, 8, 8, 8, 8, 8, 7, // 60..69
    7, 7, 7, 7, 7, 7, 7, 7, 7, 9, // 70..79
    10, 10, 10, 10, 10, 10, 10, 10, 10, 10, // 80..89
    9, 7, 7, 7, 7, 7, 7, 7, 7, 7, // 90..99
    7, 7, 7, 7, 7, 7, 7, 7, 7, 7, // 100..109
    7, 7, 7, 7, 7, 7, 7, 7, 8, 8, // 110..119
];

pub const GROUP_NAMES: [&str; 12] = [
    "Background/Other",
    "Spleen",
    "Liver",
    "Digestive Group (Stomach, Bowels, Colon, GB, Panc, Eso)",
    "Gland Group (Adrenals, Thyroid)",
    "Lung Group",
    "Trachea",
    "Skeleton Group (Bones, Cartilage)",
    "CardioVascular Group (Heart & Vessels)",
    "Nervous System Group (Brain, Spinal Cord)",
    "Muscle Group",
    "Kidney/Urogenital Group (Kidneys, Cysts, Bladder, Prostate)",
];

pub fn group_name(group: usize) -> Option<&'static str> {
    GROUP_NAMES.get(group).copied()
}

pub fn consolidate_label(raw: u16) -> Result<u8> {
    LABEL_TABLE
        .get(raw as usize)
        .copied()
        .ok_or(Error::UnknownLabel(raw as u32))
}

pub fn consolidate_labels(labels: &LabelVolume) -> Result<LabelVolume> {
    if labels.kind == LabelKind::Consolidated {
        return Err(Error::InvalidParameter(
            "labels are already consolidated".into(),
        ));
    }
    let mapped = labels
        .labels
        .par_iter()
        .map(|&l| consolidate_label(l).map(u16::from))
        .collect::<Result<Vec<_>>>()?;
    LabelVolume::new(labels.geometry, mapped, LabelKind::Consolidated)
}
