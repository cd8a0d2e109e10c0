//! Label-set helpers shared by motion detection and scene segmentation.

use std::collections::BTreeSet;

use crate::analysis::FrameRecord;

/// Deduplicated object labels of one frame.
pub fn label_set(record: &FrameRecord) -> BTreeSet<&str> {
    record.objects.iter().map(|o| o.label.as_str()).collect()
}

/// Jaccard index `|A ∩ B| / |A ∪ B|`. Two empty sets are identical (1.0).
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}
