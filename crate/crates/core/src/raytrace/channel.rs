//! Plug-in mutual information of the sender bit and the detector reading.

use super::beam::DetectorReport;
use crate::error::{Error, Result};

fn xlog2(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        p * (p / q).log2()
    } else {
        0.0
    }
}

/// Mutual information, in bits, between a uniformly distributed sender bit
/// and the receiver's binary observable "particle arrived on axis".
///
/// The conditional probabilities are the empirical on-axis frequencies of
/// the two reports; particles that never reached the detector are left out.
pub fn slc_mutual_information(when_sender_0: &DetectorReport, when_sender_1: &DetectorReport) -> Result<f64> {
    let rate = |r: &DetectorReport, name| r.on_axis_rate().ok_or(Error::EmptyReport(name));
    let p0 = rate(when_sender_0, "sender 0")?;
    let p1 = rate(when_sender_1, "sender 1")?;
    let on = 0.5 * (p0 + p1);
    let off = 1.0 - on;
    let mi = 0.5 * (xlog2(p0, on) + xlog2(1.0 - p0, off) + xlog2(p1, on) + xlog2(1.0 - p1, off));
    Ok(mi.clamp(0.0, 1.0))
}
