//! Perspective Field Discrepancy.
//!
//! Per pixel: `lambda * angle(u1, u2) + (1 - lambda) * |l1 - l2|`, both
//! terms in radians. The average over pixels valid in both fields is the
//! APFD.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::transform::FieldTransform;
use crate::{Error, PerspectiveField, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    pub lambda: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { lambda: 0.5 }
    }
}

impl MetricConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidConfig("lambda must lie in [0, 1]".into()));
        }
        Ok(Self { lambda })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub width: usize,
    pub height: usize,
    /// Per-pixel discrepancy, `None` where either field is masked.
    pub pfd_map: Vec<Option<f64>>,
    pub apfd: f64,
    /// Mean Up-vector angle.
    pub up_term: f64,
    /// Mean absolute latitude difference.
    pub lat_term: f64,
    pub pixel_count: usize,
}

/// Angle between two 2-vectors, stable near 0 and pi.
#[inline]
pub fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot)
}

#[inline]
fn widen(u: [f32; 2]) -> [f64; 2] {
    [f64::from(u[0]), f64::from(u[1])]
}

/// Discrepancy between two fields of equal size.
pub fn pfd(a: &PerspectiveField, b: &PerspectiveField, cfg: &MetricConfig) -> Result<MetricReport> {
    pfd_masked(a, b, None, cfg)
}

/// As [`pfd`], restricted to pixels where `extra` is true.
pub fn pfd_masked(
    a: &PerspectiveField,
    b: &PerspectiveField,
    extra: Option<&[bool]>,
    cfg: &MetricConfig,
) -> Result<MetricReport> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch {
            expected: a.size(),
            found: b.size(),
        });
    }
    if extra.is_some_and(|m| m.len() != a.len()) {
        return Err(Error::DimensionMismatch {
            expected: a.size(),
            found: (extra.map_or(0, |m| m.len()), 1),
        });
    }
    let lambda = cfg.lambda;
    let mut pfd_map = Vec::with_capacity(a.len());
    let (mut sum, mut sum_up, mut sum_lat, mut count) = (0.0, 0.0, 0.0, 0usize);
    for i in 0..a.len() {
        let valid = a.is_valid_index(i) && b.is_valid_index(i) && extra.is_none_or(|m| m[i]);
        if !valid {
            pfd_map.push(None);
            continue;
        }
        let du = angle_between(widen(a.up_plane()[i]), widen(b.up_plane()[i]));
        let dl = (f64::from(a.latitude_plane()[i]) - f64::from(b.latitude_plane()[i])).abs();
        let e = lambda * du + (1.0 - lambda) * dl;
        pfd_map.push(Some(e));
        sum += e;
        sum_up += du;
        sum_lat += dl;
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoOverlap);
    }
    let n = count as f64;
    Ok(MetricReport {
        width: a.width(),
        height: a.height(),
        pfd_map,
        apfd: sum / n,
        up_term: sum_up / n,
        lat_term: sum_lat / n,
        pixel_count: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedCandidate {
    pub index: usize,
    pub score: f64,
}

fn fit_to(field: &PerspectiveField, size: (usize, usize)) -> Result<PerspectiveField> {
    if field.size() == size {
        Ok(field.clone())
    } else {
        FieldTransform::resize(field.size(), size.0, size.1)?.apply(field)
    }
}

/// Orders candidates by APFD against the background patch, ascending.
/// Candidates of a different size are resized to the patch first; equal
/// scores keep input order.
pub fn rank_candidates(
    background: &PerspectiveField,
    candidates: &[PerspectiveField],
    cfg: &MetricConfig,
) -> Result<Vec<RankedCandidate>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut ranked = candidates
        .iter()
        .enumerate()
        .map(|(index, c)| {
            let c = fit_to(c, background.size())?;
            let score = pfd(background, &c, cfg)?.apfd;
            Ok(RankedCandidate { index, score })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| a.score.total_cmp(&b.score).then(a.index.cmp(&b.index)));
    Ok(ranked)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSearch {
    /// Largest rotation tried in either direction.
    pub range: f64,
    pub step: f64,
}

impl Default for RotationSearch {
    fn default() -> Self {
        Self {
            range: 30f64.to_radians(),
            step: 1f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationAdjustment {
    pub angle: f64,
    pub field: PerspectiveField,
    pub score: f64,
    pub unadjusted_score: f64,
}

/// Grid search over in-plane rotations of the candidate for the lowest
/// APFD against the background. Angles are tried in order of increasing
/// magnitude, so ties resolve to the smallest rotation.
pub fn rotation_adjust(
    background: &PerspectiveField,
    candidate: &PerspectiveField,
    search: &RotationSearch,
    cfg: &MetricConfig,
) -> Result<RotationAdjustment> {
    if !(search.step > 0.0 && search.range >= 0.0) {
        return Err(Error::InvalidConfig("rotation step must be positive".into()));
    }
    let candidate = fit_to(candidate, background.size())?;
    let unadjusted = pfd(background, &candidate, cfg)?.apfd;
    let mut best = RotationAdjustment {
        angle: 0.0,
        field: candidate.clone(),
        score: unadjusted,
        unadjusted_score: unadjusted,
    };
    let steps = (search.range / search.step + 1e-9).floor() as i64;
    for k in 1..=steps {
        for angle in [k as f64 * search.step, -(k as f64) * search.step] {
            let rotated = FieldTransform::rotate(candidate.size(), angle)?.apply(&candidate)?;
            let score = match pfd(background, &rotated, cfg) {
                Ok(r) => r.apfd,
                Err(Error::NoOverlap) => continue,
                Err(e) => return Err(e),
            };
            if score < best.score {
                best = RotationAdjustment {
                    angle,
                    field: rotated,
                    score,
                    unadjusted_score: unadjusted,
                };
            }
        }
    }
    Ok(best)
}
