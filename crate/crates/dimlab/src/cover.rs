//! Covering-number engines.
//!
//! Two regimes: exact left-to-right greedy covering over enumerated,
//! exactly-positioned geometry (provably minimal on the line), and
//! combinatorial exponent bounds at scales far beyond enumeration.  Scale
//! index lookups invert the cumulative length exponent by binary search.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use thiserror::Error;

use crate::construct::{ConstructError, CParams, Geometry, SetApprox};
use crate::exact::{log2_6_upper, rat_to_string, ExactReal, Rat, ScaleExponent};
use crate::params::{ParamsError, SequenceSpec};

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("scale out of range: {0}")]
    ScaleOutOfRange(String),
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("sequence horizon exceeded: {0}")]
    SequenceHorizonExceeded(String),
    #[error(transparent)]
    Construct(#[from] ConstructError),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// A covering count: exact, or two-sided base-2 logarithmic bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CountResult {
    Exact(BigUint),
    Bounds { log2_lower: Rat, log2_upper: Rat },
}

impl CountResult {
    pub fn log2_lower(&self) -> Rat {
        match self {
            CountResult::Exact(n) => crate::exact::log2_enclosure(n, 64).0,
            CountResult::Bounds { log2_lower, .. } => log2_lower.clone(),
        }
    }

    pub fn log2_upper(&self) -> Rat {
        match self {
            CountResult::Exact(n) => crate::exact::log2_enclosure(n, 64).1,
            CountResult::Bounds { log2_upper, .. } => log2_upper.clone(),
        }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            CountResult::Exact(n) => Some(n),
            CountResult::Bounds { .. } => None,
        }
    }
}

/// One element of counting geometry: a closed segment (points have
/// `lo == hi`), with its length exponent when it comes from an interval.
#[derive(Clone, Debug)]
pub struct Segment {
    pub lo: ExactReal,
    pub hi: ExactReal,
    /// Length exponent `e` (length = 2^-e); `None` marks a point.
    pub len_exponent: Option<Rat>,
}

/// Sorted counting geometry extracted from a set approximation.
#[derive(Clone, Debug)]
pub struct CoverGeometry {
    pub segments: Vec<Segment>,
    /// Smallest length exponent among interval elements (largest component).
    pub min_len_exponent: Option<Rat>,
}

impl CoverGeometry {
    pub fn from_approx(approx: &SetApprox) -> Result<Self, CoverError> {
        let mut segments = Vec::new();
        collect_segments(approx, &mut segments)?;
        segments.sort_by(|a, b| cmp_segments(a, b));
        let min_len = segments
            .iter()
            .filter_map(|s| s.len_exponent.clone())
            .min();
        Ok(CoverGeometry {
            segments,
            min_len_exponent: min_len,
        })
    }

    /// Largest component length as a scale exponent (None when points only).
    pub fn max_component_exponent(&self) -> Option<&Rat> {
        self.min_len_exponent.as_ref()
    }

    /// Geometry clipped to the closed window `[lo, hi]`.
    pub fn clip(&self, lo: &ExactReal, hi: &ExactReal) -> CoverGeometry {
        let mut out = Vec::new();
        for s in &self.segments {
            if s.hi.cmp_exact(lo) == Ordering::Less || s.lo.cmp_exact(hi) == Ordering::Greater {
                continue;
            }
            let new_lo = if s.lo.cmp_exact(lo) == Ordering::Less {
                lo.clone()
            } else {
                s.lo.clone()
            };
            let new_hi = if s.hi.cmp_exact(hi) == Ordering::Greater {
                hi.clone()
            } else {
                s.hi.clone()
            };
            out.push(Segment {
                lo: new_lo,
                hi: new_hi,
                len_exponent: s.len_exponent.clone(),
            });
        }
        let min_len = out.iter().filter_map(|s| s.len_exponent.clone()).min();
        CoverGeometry {
            segments: out,
            min_len_exponent: min_len,
        }
    }

    /// Merges overlapping or touching segments into disjoint closed blocks.
    pub fn merged_blocks(&self) -> Vec<(ExactReal, ExactReal)> {
        let mut blocks: Vec<(ExactReal, ExactReal)> = Vec::new();
        for s in &self.segments {
            match blocks.last_mut() {
                Some((_, hi)) if s.lo.cmp_exact(hi) != Ordering::Greater => {
                    if s.hi.cmp_exact(hi) == Ordering::Greater {
                        *hi = s.hi.clone();
                    }
                }
                _ => blocks.push((s.lo.clone(), s.hi.clone())),
            }
        }
        blocks
    }
}

fn cmp_segments(a: &Segment, b: &Segment) -> Ordering {
    match a.lo.cmp_exact(&b.lo) {
        Ordering::Equal => a.hi.cmp_exact(&b.hi),
        o => o,
    }
}

fn collect_segments(approx: &SetApprox, out: &mut Vec<Segment>) -> Result<(), CoverError> {
    match &approx.geometry {
        Geometry::Intervals(ivs) => {
            for iv in ivs {
                out.push(Segment {
                    lo: iv.left.clone(),
                    hi: iv.right(),
                    len_exponent: Some(iv.log_len.0.clone()),
                });
            }
        }
        Geometry::Points(pts) => {
            for p in pts {
                out.push(Segment {
                    lo: p.coordinate.clone(),
                    hi: p.coordinate.clone(),
                    len_exponent: None,
                });
            }
        }
        Geometry::Parts(parts) => {
            for part in parts.iter() {
                collect_segments(part, out)?;
            }
        }
        Geometry::Implicit => {
            return Err(CoverError::InsufficientDepth(
                "geometry is implicit; use the combinatorial counters".into(),
            ))
        }
    }
    Ok(())
}

/// Exact minimal number of closed length-`delta` intervals covering the
/// geometry: left-to-right greedy placement, each cover interval anchored at
/// the leftmost uncovered point.  All comparisons are exact.
pub fn greedy_cover_count(
    geometry: &CoverGeometry,
    delta: &ScaleExponent,
) -> Result<CountResult, CoverError> {
    let delta_value = ExactReal::pow2(&-delta.0.clone());
    let blocks = geometry.merged_blocks();
    let mut count = BigUint::zero();
    // right end of the last placed cover interval
    let mut covered_to: Option<ExactReal> = None;
    for (lo, hi) in &blocks {
        let mut anchor = match &covered_to {
            Some(c) if c.cmp_exact(lo) != Ordering::Less => {
                if c.cmp_exact(hi) != Ordering::Less {
                    continue; // block already covered
                }
                c.clone()
            }
            _ => lo.clone(),
        };
        loop {
            count += BigUint::one();
            let end = anchor.add(&delta_value);
            if end.cmp_exact(hi) != Ordering::Less {
                covered_to = Some(end);
                break;
            }
            anchor = end;
        }
    }
    Ok(CountResult::Exact(count))
}

/// Scale index selector: which of the proof-side sandwiches to invert.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ScaleIndexKind {
    /// Smallest level with component length at most the scale:
    /// `l_n <= r < l_(n-1)`.
    LevelOfRadius,
    /// `l_(m+1)/2 <= R < l_m/2`, clamped at zero near the unit scale.
    BallLevel,
    /// `l_(k+1) <= delta < l_k`.
    GapLevel,
}

/// Exact integer satisfying the defining sandwich for the requested kind.
pub fn scale_indices(
    scale: &ScaleExponent,
    p: &CParams,
    which: ScaleIndexKind,
) -> Result<BigUint, CoverError> {
    if !scale.0.is_positive() {
        return Err(CoverError::ScaleOutOfRange(format!(
            "scale exponent {} is not inside (0, 1)",
            rat_to_string(&scale.0)
        )));
    }
    let e = &scale.0;
    match which {
        ScaleIndexKind::LevelOfRadius => Ok(level_of_scale(p, e)?),
        ScaleIndexKind::GapLevel => {
            // largest k with cum(k) < e, i.e. level_of_scale - 1 (clamped)
            let n = level_of_scale(p, e)?;
            // boundary case: cum(n) == e means l_n == delta: then l_(k+1) <=
            // delta < l_k needs k = n - 1... l_n = delta: k+1 = n works since
            // l_n <= delta; and delta < l_(n-1): k = n - 1.
            if n.is_zero() {
                Ok(BigUint::zero())
            } else {
                Ok(n - BigUint::one())
            }
        }
        ScaleIndexKind::BallLevel => {
            // smallest m with cum(m+1) + 1 >= e, i.e. level_of_scale(e - 1) - 1
            let shifted = e - Rat::one();
            if !shifted.is_positive() {
                return Ok(BigUint::zero());
            }
            let n = level_of_scale(p, &shifted)?;
            if n.is_zero() {
                Ok(BigUint::zero())
            } else {
                Ok(n - BigUint::one())
            }
        }
    }
}

fn level_of_scale(p: &CParams, e: &Rat) -> Result<BigUint, CoverError> {
    p.level_of_scale(e).map_err(|err| match err {
        ConstructError::HorizonExceeded(d) => CoverError::SequenceHorizonExceeded(d),
        other => CoverError::Construct(other),
    })
}

/// Two-sided cylinder-count bounds for the Cantor family at any scale.
/// Upper: one cover interval per component at the first level whose
/// components fit inside the scale.  Lower: each cover interval carries
/// bounded mass, costing at most a fixed logarithmic slack.
pub fn cylinder_count_c(p: &CParams, delta: &ScaleExponent) -> Result<CountResult, CoverError> {
    if !delta.0.is_positive() {
        return Ok(CountResult::Bounds {
            log2_lower: Rat::zero(),
            log2_upper: Rat::zero(),
        });
    }
    let m = scale_indices(delta, p, ScaleIndexKind::LevelOfRadius)?;
    let m_rat = BigRational::from_integer(BigInt::from(m));
    let lower = {
        let l = &m_rat - log2_6_upper();
        if l.is_negative() {
            Rat::zero()
        } else {
            l
        }
    };
    Ok(CountResult::Bounds {
        log2_lower: lower,
        log2_upper: m_rat,
    })
}

/// Exact covering count of the geometry clipped to the closed ball
/// `[x - R, x + R]`, at scale `r`.
pub fn ball_restricted_count(
    geometry: &CoverGeometry,
    x: &ExactReal,
    big_r: &ScaleExponent,
    small_r: &ScaleExponent,
) -> Result<CountResult, CoverError> {
    // the ball radius must be at least the covering scale: R = 2^(-eR),
    // r = 2^(-er) with eR <= er
    if big_r.0 > small_r.0 {
        return Err(CoverError::ScaleOutOfRange(
            "the ball radius must be at least the covering scale".into(),
        ));
    }
    let clip_lo = x.sub(&ExactReal::pow2(&-big_r.0.clone()));
    let clip_hi = x.add(&ExactReal::pow2(&-big_r.0.clone()));
    let clipped = geometry.clip(&clip_lo, &clip_hi);
    if let Some(max_e) = clipped.max_component_exponent() {
        if max_e < &small_r.0 {
            return Err(CoverError::InsufficientDepth(format!(
                "components of length exponent {} exceed the covering scale {}",
                rat_to_string(max_e),
                rat_to_string(&small_r.0),
            )));
        }
    }
    greedy_cover_count(&clipped, small_r)
}

/// Index data for the point-family lower bound at a scale: the gap level
/// `k(delta)` and the largest index with constraint value below it.
pub struct PointLowerIndices {
    pub gap_level: BigUint,
    pub constraint_index: BigUint,
}

/// Largest `n` with `k_n < bound` (0 when none), scanning the strictly
/// increasing constraint sequence.
fn last_index_below(
    kseq: &SequenceSpec,
    bound: &BigUint,
    strict: bool,
) -> Result<BigUint, CoverError> {
    let start = kseq.role.start().max(1);
    let mut n = 0u64;
    let mut idx = start;
    loop {
        let term = kseq.term(idx)?;
        let ok = if strict { &term < bound } else { &term <= bound };
        if !ok {
            break;
        }
        n = idx;
        idx += 1;
        if idx > start + 10_000_000 {
            return Err(CoverError::SequenceHorizonExceeded(
                "constraint sequence scan exceeded 10^7 terms".into(),
            ));
        }
    }
    Ok(BigUint::from(n))
}

/// Lower/upper covering bounds for the point family at any scale.  The lower
/// exponent is `k(delta) - n(delta)` from the separated points at the gap
/// level; the upper is the cylinder envelope at the same parameters.
pub fn count_d_lower(
    p: &CParams,
    kseq: &SequenceSpec,
    delta: &ScaleExponent,
) -> Result<CountResult, CoverError> {
    if !delta.0.is_positive() {
        return Ok(CountResult::Bounds {
            log2_lower: Rat::zero(),
            log2_upper: Rat::zero(),
        });
    }
    let k_delta = scale_indices(delta, p, ScaleIndexKind::GapLevel)?;
    let n_delta = last_index_below(kseq, &k_delta, true)?;
    let lower = if k_delta > n_delta {
        BigRational::from_integer(BigInt::from(&k_delta - &n_delta))
    } else {
        Rat::zero()
    };
    let upper = cylinder_count_c(p, delta)?.log2_upper();
    Ok(CountResult::Bounds {
        log2_lower: lower,
        log2_upper: upper,
    })
}

/// Designed-scale lower exponent for the point family's limsup direction:
/// at the scale of the level just before an even block boundary `n_{2k}`,
/// at least `n_{2k} - m(k)` separated points exist, where `m(k)` is the
/// largest index with constraint value at most `n_{2k}`.
pub fn count_d_upper_designed(
    p: &CParams,
    kseq: &SequenceSpec,
    block: u64,
) -> Result<(ScaleExponent, Rat), CoverError> {
    let n2k = p
        .boundary(2 * block as usize)
        .ok_or_else(|| CoverError::SequenceHorizonExceeded(format!("block {block}")))?
        .clone();
    let level = &n2k - BigUint::one();
    let delta_exp = p.cum(&level).map_err(CoverError::Construct)?;
    let m_k = last_index_below(kseq, &n2k, false)?;
    let lower = BigRational::from_integer(BigInt::from(&n2k - &m_k));
    Ok((ScaleExponent(delta_exp), lower))
}

/// Upper covering bound for the uniform point family: a logarithmic number
/// of blocks each contributing at most `2^(j_n - n)` points, plus one
/// interval for the tail clustered at the origin.
pub fn count_e_upper(
    gamma: &Rat,
    jseq: &SequenceSpec,
    delta: &ScaleExponent,
) -> Result<CountResult, CoverError> {
    if !delta.0.is_positive() {
        return Ok(CountResult::Bounds {
            log2_lower: Rat::zero(),
            log2_upper: Rat::zero(),
        });
    }
    // uniform cumulative exponent: cum(m) = m / gamma; n(delta) = ceil(gamma e)
    let scaled = &delta.0 * gamma;
    let n_delta = scaled.ceil().to_integer();
    let n_delta_u = n_delta
        .to_u64()
        .ok_or_else(|| CoverError::ScaleOutOfRange("scale too deep for the index".into()))?
        .max(1);
    let j_n = jseq.term(n_delta_u)?;
    let log_n = crate::exact::log2_enclosure(&BigUint::from(n_delta_u), 64).1;
    let upper = log_n
        + BigRational::from_integer(BigInt::from(j_n))
        - BigRational::from_integer(BigInt::from(n_delta_u));
    let upper = if upper.is_negative() { Rat::zero() } else { upper };
    Ok(CountResult::Bounds {
        log2_lower: Rat::zero(),
        log2_upper: upper,
    })
}
