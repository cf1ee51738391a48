//! Finite-depth approximations of the four set families and their union.
//!
//! Family C is a central Cantor construction driven by two contraction
//! exponents that alternate along blocks of a level sequence; D and E are
//! point families built from admissible ternary words over the same affine
//! maps; F is a binary interval tree whose lengths are dictated by two
//! integer sequences through the heap indexing of words.  All lengths are
//! exact base-2 exponents and all positions are exact symbolic reals.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::exact::{ExactReal, Rat, ScaleExponent};
use crate::params::{DimTuple, ParamsError, SeqRole, SequenceSpec};
use crate::words::{heap_index, omega_enumerate, Letter3, TreeIndex, Word2, Word3, WordsError};

/// Hard cap on materialized intervals: depth 20 = 2^20 leaves.
pub const INTERVAL_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("enumeration cap exceeded: depth {0} > {INTERVAL_ENUMERATION_CAP}")]
    EnumerationCapExceeded(usize),
    #[error("two distinct prefixes set the length rule at depth {depth} (indices {k1} and {k2})")]
    AmbiguousLengthRule { depth: usize, k1: u64, k2: u64 },
    #[error("invalid construction parameters: {0}")]
    InvalidParams(String),
    #[error("sequence horizon exceeded while computing level {0}")]
    HorizonExceeded(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Words(#[from] WordsError),
}

/// Parameters of the Cantor family: contraction exponents `1/beta`, `1/gamma`
/// alternating along blocks of the level sequence, which must start at 1.
#[derive(Clone, Debug)]
pub struct CParams {
    pub beta: Rat,
    pub gamma: Rat,
    pub nseq: SequenceSpec,
    /// Cached block boundaries (a strictly increasing prefix of the level
    /// sequence, first term 1).
    boundaries: Vec<BigUint>,
}

/// Number of level-sequence terms cached for block lookups.
const BOUNDARY_TERMS: usize = 40;

impl CParams {
    pub fn new(beta: Rat, gamma: Rat, nseq: SequenceSpec) -> Result<Self, ConstructError> {
        if !beta.is_positive() || beta > Rat::one() || !gamma.is_positive() || gamma > Rat::one() {
            return Err(ConstructError::InvalidParams(
                "contraction parameters must lie in (0, 1]".into(),
            ));
        }
        if beta > gamma {
            return Err(ConstructError::InvalidParams(
                "the first contraction parameter must not exceed the second".into(),
            ));
        }
        let boundaries = nseq.prefix(BOUNDARY_TERMS)?;
        if boundaries[0] != BigUint::one() {
            return Err(ConstructError::InvalidParams(
                "the level sequence must start at 1".into(),
            ));
        }
        for w in boundaries.windows(2) {
            if w[0] >= w[1] {
                return Err(ConstructError::InvalidParams(
                    "the level sequence must be strictly increasing".into(),
                ));
            }
        }
        Ok(CParams {
            beta,
            gamma,
            nseq,
            boundaries,
        })
    }

    /// Uniform-ratio parameters (both exponents equal; the level sequence is
    /// irrelevant and defaults to the doubling sequence).
    pub fn uniform(gamma: Rat) -> Result<Self, ConstructError> {
        CParams::new(
            gamma.clone(),
            gamma,
            SequenceSpec::new(SeqRole::N, crate::params::SeqKind::TwoPow),
        )
    }

    pub fn inv_beta(&self) -> Rat {
        self.beta.recip()
    }

    pub fn inv_gamma(&self) -> Rat {
        self.gamma.recip()
    }

    pub fn boundary(&self, idx: usize) -> Option<&BigUint> {
        self.boundaries.get(idx)
    }

    /// Largest level covered by the cached block boundaries.
    pub fn max_level(&self) -> BigUint {
        self.boundaries.last().unwrap() - BigUint::one()
    }

    /// Whether level `i >= 1` contracts with the first (strong) exponent:
    /// true on even-index blocks `[n_{2m}, n_{2m+1})`.
    pub fn level_is_strong(&self, i: &BigUint) -> Result<bool, ConstructError> {
        if i.is_zero() {
            return Err(ConstructError::InvalidParams("levels start at 1".into()));
        }
        if i >= self.boundaries.last().unwrap() {
            return Err(ConstructError::HorizonExceeded(i.to_string()));
        }
        // block index: largest m with n_m <= i
        let m = match self.boundaries.binary_search(i) {
            Ok(m) => m,
            Err(ins) => ins - 1,
        };
        Ok(m % 2 == 0)
    }

    /// Contraction exponent at level `i`: `1/beta` on strong blocks,
    /// `1/gamma` otherwise (the ratio itself is `2^(-e)`).
    pub fn contraction_exponent(&self, i: &BigUint) -> Result<Rat, ConstructError> {
        Ok(if self.level_is_strong(i)? {
            self.inv_beta()
        } else {
            self.inv_gamma()
        })
    }

    /// Number of strong levels among `1..=m`, by block counting.
    fn strong_levels_up_to(&self, m: &BigUint) -> Result<BigUint, ConstructError> {
        if m >= self.boundaries.last().unwrap() {
            return Err(ConstructError::HorizonExceeded(m.to_string()));
        }
        let mut count = BigUint::zero();
        let mut idx = 0;
        while idx + 1 < self.boundaries.len() {
            let lo = &self.boundaries[idx];
            if lo > m {
                break;
            }
            if idx % 2 == 0 {
                let hi = &self.boundaries[idx + 1];
                let top = if m + BigUint::one() < *hi {
                    m + BigUint::one()
                } else {
                    hi.clone()
                };
                count += top - lo;
            }
            idx += 1;
        }
        Ok(count)
    }

    /// Cumulative length exponent of a depth-`m` component:
    /// `cum(m) = (#strong levels)/beta + (#other levels)/gamma`.
    pub fn cum(&self, m: &BigUint) -> Result<Rat, ConstructError> {
        if m.is_zero() {
            return Ok(Rat::zero());
        }
        let strong = self.strong_levels_up_to(m)?;
        let weak = m - &strong;
        let strong_r = BigRational::from_integer(BigInt::from(strong));
        let weak_r = BigRational::from_integer(BigInt::from(weak));
        Ok(strong_r * self.inv_beta() + weak_r * self.inv_gamma())
    }

    fn cum_usize(&self, m: usize) -> Result<Rat, ConstructError> {
        self.cum(&BigUint::from(m))
    }

    /// Smallest level `m` with component length `2^(-cum(m)) <= 2^(-e)`, i.e.
    /// `cum(m) >= e`.  Errors when the cached horizon is too shallow.
    pub fn level_of_scale(&self, e: &Rat) -> Result<BigUint, ConstructError> {
        if !e.is_positive() {
            return Ok(BigUint::zero());
        }
        let mut hi = BigUint::one();
        let max = self.max_level();
        while self.cum(&hi)? < *e {
            hi = &hi << 1usize;
            if hi > max {
                if self.cum(&max)? < *e {
                    return Err(ConstructError::HorizonExceeded(format!(
                        "scale exponent {e} beyond cached levels"
                    )));
                }
                hi = max.clone();
                break;
            }
        }
        let mut lo = BigUint::zero();
        // invariant: cum(lo) < e <= cum(hi)
        while &lo + BigUint::one() < hi {
            let mid = (&lo + &hi) >> 1usize;
            if self.cum(&mid)? < *e {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

/// Parameters of the interval-tree family: a contraction exponent `1/gamma`
/// (the base ratio is `2^(-1/gamma)`) and two strictly increasing integer
/// sequences anchored at 1 that satisfy the increment-domination condition.
#[derive(Clone, Debug)]
pub struct FParams {
    pub gamma: Rat,
    pub aseq: SequenceSpec,
    pub bseq: SequenceSpec,
}

impl FParams {
    pub fn new(gamma: Rat, aseq: SequenceSpec, bseq: SequenceSpec) -> Result<Self, ConstructError> {
        if !gamma.is_positive() || gamma > Rat::one() {
            return Err(ConstructError::InvalidParams(
                "gamma must lie in (0, 1]".into(),
            ));
        }
        let at = aseq.prefix(8)?;
        let bt = bseq.prefix(8)?;
        if at[0] != BigUint::one() || bt[0] != BigUint::one() {
            return Err(ConstructError::InvalidParams(
                "both sequences must start at 1".into(),
            ));
        }
        for (t, name) in [(&at, "first"), (&bt, "second")] {
            for w in t.windows(2) {
                if w[0] >= w[1] {
                    return Err(ConstructError::InvalidParams(format!(
                        "the {name} sequence must be strictly increasing"
                    )));
                }
            }
        }
        for i in 0..at.len() {
            for j in i..at.len() {
                if &at[j] - &at[i] > &bt[j] - &bt[i] {
                    return Err(ConstructError::InvalidParams(
                        "increment domination fails on the checked prefix".into(),
                    ));
                }
            }
        }
        Ok(FParams { gamma, aseq, bseq })
    }

    /// `1/gamma`: the base-2 exponent of the base contraction ratio (the
    /// base ratio of the tree is `2^(-1/gamma)`).
    pub fn inv_gamma(&self) -> Rat {
        self.gamma.recip()
    }

    pub fn a_term(&self, k: u64) -> Result<BigUint, ParamsError> {
        self.aseq.term(k)
    }

    pub fn b_term(&self, k: u64) -> Result<BigUint, ParamsError> {
        self.bseq.term(k)
    }
}

/// A component interval: symbolic address, exact length exponent, exact left
/// endpoint.  Certified dyadic enclosures of the endpoint are derived on
/// demand at any precision.
#[derive(Clone, Debug)]
pub struct Interval {
    pub word: Word2,
    pub log_len: ScaleExponent,
    pub left: ExactReal,
}

impl Interval {
    pub fn unit() -> Self {
        Interval {
            word: Word2::empty(),
            log_len: ScaleExponent::zero(),
            left: ExactReal::zero(),
        }
    }

    pub fn right(&self) -> ExactReal {
        self.left.add(&ExactReal::pow2(&-self.log_len.0.clone()))
    }
}

/// A point of one of the point families, tagged with the minimal level that
/// produced it.
#[derive(Clone, Debug)]
pub struct PointAtom {
    pub word: Word3,
    pub level: usize,
    pub coordinate: ExactReal,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Family {
    C,
    D,
    E,
    F,
    X,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::C => "C",
            Family::D => "D",
            Family::E => "E",
            Family::F => "F",
            Family::X => "X",
        }
    }

    pub fn from_tag(s: &str) -> Option<Family> {
        match s {
            "C" => Some(Family::C),
            "D" => Some(Family::D),
            "E" => Some(Family::E),
            "F" => Some(Family::F),
            "X" => Some(Family::X),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Geometry {
    /// Sorted, same-depth component intervals.
    Intervals(Vec<Interval>),
    /// Sorted, deduplicated points.
    Points(Vec<PointAtom>),
    /// The four parts of the union, in family order C, D, E, F.
    Parts(Box<[SetApprox; 4]>),
    /// No materialized geometry; combinatorial counting only.
    Implicit,
}

/// Generating parameters attached to an approximation.
#[derive(Clone, Debug)]
pub enum ParamsRecord {
    C(CParams),
    D(CParams, SequenceSpec),
    E(Rat, SequenceSpec),
    F(FParams),
    X(Box<XAssembly>),
}

/// The four-part assembly: which parameters feed which family.
#[derive(Clone, Debug)]
pub struct XAssembly {
    pub dims: DimTuple,
    pub c: CParams,
    pub d: (CParams, SequenceSpec),
    pub e: (Rat, SequenceSpec),
    pub f: FParams,
}

/// Finite-depth approximation of one family (or the union).
#[derive(Clone, Debug)]
pub struct SetApprox {
    pub family: Family,
    pub depth: usize,
    pub params: ParamsRecord,
    pub geometry: Geometry,
}

impl SetApprox {
    pub fn intervals(&self) -> Option<&[Interval]> {
        match &self.geometry {
            Geometry::Intervals(v) => Some(v),
            _ => None,
        }
    }

    pub fn points(&self) -> Option<&[PointAtom]> {
        match &self.geometry {
            Geometry::Points(v) => Some(v),
            _ => None,
        }
    }

    pub fn parts(&self) -> Option<&[SetApprox; 4]> {
        match &self.geometry {
            Geometry::Parts(p) => Some(p),
            _ => None,
        }
    }

    /// Total number of geometry atoms, counting exact duplicates (across the
    /// parts of a union) once.
    pub fn distinct_atom_count(&self) -> usize {
        match &self.geometry {
            Geometry::Intervals(v) => v.len(),
            Geometry::Points(v) => v.len(),
            Geometry::Implicit => 0,
            Geometry::Parts(parts) => {
                let mut interval_keys: BTreeMap<ExactReal, Vec<Rat>> = BTreeMap::new();
                let mut point_keys: std::collections::BTreeSet<ExactReal> =
                    std::collections::BTreeSet::new();
                for part in parts.iter() {
                    match &part.geometry {
                        Geometry::Intervals(v) => {
                            for iv in v {
                                let lens = interval_keys.entry(iv.left.clone()).or_default();
                                if !lens.contains(&iv.log_len.0) {
                                    lens.push(iv.log_len.0.clone());
                                }
                            }
                        }
                        Geometry::Points(v) => {
                            for p in v {
                                point_keys.insert(p.coordinate.clone());
                            }
                        }
                        _ => {}
                    }
                }
                interval_keys.values().map(|v| v.len()).sum::<usize>() + point_keys.len()
            }
        }
    }
}

/// Length exponent of the depth-`n` cylinder under the given parameters.
pub fn contraction_ratio(n: &BigUint, p: &CParams) -> Result<ScaleExponent, ConstructError> {
    Ok(ScaleExponent(p.contraction_exponent(n)?))
}

/// The component interval addressed by a binary word: length exponent is the
/// sum of the per-level contraction exponents, and the left endpoint is the
/// image of 0 under the composed affine maps.
pub fn cylinder_interval(w: &Word2, p: &CParams) -> Result<Interval, ConstructError> {
    let mut left = ExactReal::zero();
    let mut cum = Rat::zero();
    for (idx, &bit) in w.bits().iter().enumerate() {
        let level = BigUint::from(idx as u64 + 1);
        let prev = cum.clone();
        cum += p.contraction_exponent(&level)?;
        if bit == 1 {
            // shift by (previous scale) - (current scale)
            left = left
                .add(&ExactReal::pow2(&-prev))
                .sub(&ExactReal::pow2(&-cum.clone()));
        }
    }
    Ok(Interval {
        word: w.clone(),
        log_len: ScaleExponent(cum),
        left,
    })
}

/// Builds the depth-`depth` approximation of the Cantor family.  With
/// `enumerate` set, all `2^depth` components are materialized in
/// left-to-right order; otherwise only the implicit descriptor is kept.
pub fn build_c(p: &CParams, depth: usize, enumerate: bool) -> Result<SetApprox, ConstructError> {
    if !enumerate {
        return Ok(SetApprox {
            family: Family::C,
            depth,
            params: ParamsRecord::C(p.clone()),
            geometry: Geometry::Implicit,
        });
    }
    if depth > INTERVAL_ENUMERATION_CAP {
        return Err(ConstructError::EnumerationCapExceeded(depth));
    }
    let mut level = vec![Interval::unit()];
    for d in 1..=depth {
        let e = p.contraction_exponent(&BigUint::from(d as u64))?;
        let mut next = Vec::with_capacity(level.len() * 2);
        for iv in &level {
            let child_len = &iv.log_len.0 + &e;
            // left child keeps the left endpoint
            next.push(Interval {
                word: iv.word.child(0),
                log_len: ScaleExponent(child_len.clone()),
                left: iv.left.clone(),
            });
            // right child is flush right
            let left = iv
                .left
                .add(&ExactReal::pow2(&-iv.log_len.0.clone()))
                .sub(&ExactReal::pow2(&-child_len.clone()));
            next.push(Interval {
                word: iv.word.child(1),
                log_len: ScaleExponent(child_len),
                left,
            });
        }
        level = next;
    }
    Ok(SetApprox {
        family: Family::C,
        depth,
        params: ParamsRecord::C(p.clone()),
        geometry: Geometry::Intervals(level),
    })
}

/// Composes the affine maps selected by a ternary word (stars act as the
/// identity) and returns the images of 0 and 1.
fn word3_endpoint_images(
    w: &Word3,
    p: &CParams,
) -> Result<(ExactReal, ExactReal), ConstructError> {
    let mut shift = ExactReal::zero();
    let mut scale_exp = Rat::zero();
    for (idx, &l) in w.letters().iter().enumerate() {
        if l == Letter3::Star {
            continue;
        }
        let level = BigUint::from(idx as u64 + 1);
        let prev = scale_exp.clone();
        scale_exp += p.contraction_exponent(&level)?;
        if l == Letter3::One {
            shift = shift
                .add(&ExactReal::pow2(&-prev))
                .sub(&ExactReal::pow2(&-scale_exp.clone()));
        }
    }
    let img0 = shift.clone();
    let img1 = shift.add(&ExactReal::pow2(&-scale_exp));
    Ok((img0, img1))
}

/// Builds the truncated point family `union of levels 0..=max_level`, with
/// points deduplicated by exact coordinate equality and tagged with the
/// minimal producing level.
pub fn build_d(
    p: &CParams,
    kseq: &SequenceSpec,
    max_level: usize,
) -> Result<SetApprox, ConstructError> {
    // dedup structurally (the representation is canonical, so structural
    // equality is value equality); order once at the end
    let mut seen: std::collections::HashMap<ExactReal, PointAtom> =
        std::collections::HashMap::new();
    for n in 0..=max_level {
        for w in omega_enumerate(n, kseq)? {
            let (img0, img1) = word3_endpoint_images(&w, p)?;
            for coord in [img0, img1] {
                seen.entry(coord.clone()).or_insert_with(|| PointAtom {
                    word: w.clone(),
                    level: n,
                    coordinate: coord,
                });
            }
        }
    }
    let points = sort_points(seen.into_values().collect());
    Ok(SetApprox {
        family: Family::D,
        depth: max_level,
        params: ParamsRecord::D(p.clone(), kseq.clone()),
        geometry: Geometry::Points(points),
    })
}

/// Sorts points by coordinate: enclosure keys decide separated pairs, exact
/// comparison settles overlaps.
fn sort_points(points: Vec<PointAtom>) -> Vec<PointAtom> {
    let mut keyed: Vec<(crate::exact::Enclosure, PointAtom)> = points
        .into_iter()
        .map(|p| (p.coordinate.enclosure(96), p))
        .collect();
    keyed.sort_by(|(ea, a), (eb, b)| {
        if ea.hi < eb.lo {
            std::cmp::Ordering::Less
        } else if eb.hi < ea.lo {
            std::cmp::Ordering::Greater
        } else {
            a.coordinate.cmp_exact(&b.coordinate)
        }
    });
    keyed.into_iter().map(|(_, p)| p).collect()
}

/// Builds the uniform-ratio point family (no dependence on a level
/// sequence): identical semantics to [`build_d`] with both contraction
/// exponents equal and the given sequence driving the admissible words.
pub fn build_e(
    gamma: &Rat,
    jseq: &SequenceSpec,
    max_level: usize,
) -> Result<SetApprox, ConstructError> {
    let p = CParams::uniform(gamma.clone())?;
    let inner = build_d(&p, jseq, max_level)?;
    Ok(SetApprox {
        family: Family::E,
        depth: max_level,
        params: ParamsRecord::E(gamma.clone(), jseq.clone()),
        geometry: inner.geometry,
    })
}

/// Index of the largest `a`-term not exceeding `cap`, scanning from 0.
fn max_a_index_within(p: &FParams, cap: usize) -> Result<u64, ConstructError> {
    let cap_big = BigUint::from(cap);
    let mut k = 0u64;
    loop {
        let a = p.a_term(k + 1)?;
        if a > cap_big {
            return Ok(k);
        }
        k += 1;
    }
}

struct FNode {
    word: Word2,
    /// Length exponent in base-ratio units (the actual exponent is this
    /// integer times `1/gamma`).
    alpha_exp: BigUint,
    left: ExactReal,
    /// Upcoming length-rule firings on this subtree: depth -> ratio-units
    /// exponent, inherited from ancestors.
    pending: BTreeMap<usize, (u64, BigUint)>,
}

/// Builds the depth-`depth` approximation of the interval-tree family.  At
/// depth `n`, a component whose path has a prefix of heap index `k` with
/// `a_k = n` gets length exponent `b_k` (in base-ratio units); otherwise it
/// inherits its parent's exponent plus one.  Children sit flush left/right.
pub fn build_f(p: &FParams, depth: usize) -> Result<SetApprox, ConstructError> {
    if depth > INTERVAL_ENUMERATION_CAP {
        return Err(ConstructError::EnumerationCapExceeded(depth));
    }
    let max_idx = max_a_index_within(p, depth)?;
    let inv_gamma = p.inv_gamma();
    let mut root_pending = BTreeMap::new();
    // the empty prefix has heap index 1
    if max_idx >= 1 {
        let a1 = p.a_term(1)?;
        if let Some(d) = a1.to_usize() {
            if d <= depth {
                root_pending.insert(d, (1u64, p.b_term(1)?));
            }
        }
    }
    let mut level = vec![FNode {
        word: Word2::empty(),
        alpha_exp: BigUint::zero(),
        left: ExactReal::zero(),
        pending: root_pending,
    }];
    for d in 1..=depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for node in &level {
            let child_alpha = match node.pending.get(&d) {
                Some((_, b)) => b.clone(),
                None => &node.alpha_exp + BigUint::one(),
            };
            let parent_scale = scaled_exponent(&node.alpha_exp, &inv_gamma);
            let child_scale = scaled_exponent(&child_alpha, &inv_gamma);
            for bit in [0u8, 1u8] {
                let word = node.word.child(bit);
                let left = if bit == 0 {
                    node.left.clone()
                } else {
                    node.left
                        .add(&ExactReal::pow2(&-parent_scale.clone()))
                        .sub(&ExactReal::pow2(&-child_scale.clone()))
                };
                let mut pending = node.pending.clone();
                // register this prefix's own firing depth, if within reach
                let k = heap_index(&word);
                if k.0 <= max_idx {
                    let ak = p.a_term(k.0)?;
                    if let Some(fire_depth) = ak.to_usize() {
                        if fire_depth <= depth {
                            if let Some((other, _)) =
                                pending.insert(fire_depth, (k.0, p.b_term(k.0)?))
                            {
                                return Err(ConstructError::AmbiguousLengthRule {
                                    depth: fire_depth,
                                    k1: other,
                                    k2: k.0,
                                });
                            }
                        }
                    }
                }
                next.push(FNode {
                    word,
                    alpha_exp: child_alpha.clone(),
                    left,
                    pending,
                });
            }
        }
        level = next;
    }
    let intervals = level
        .into_iter()
        .map(|n| Interval {
            log_len: ScaleExponent(scaled_exponent(&n.alpha_exp, &inv_gamma)),
            word: n.word,
            left: n.left,
        })
        .collect();
    Ok(SetApprox {
        family: Family::F,
        depth,
        params: ParamsRecord::F(p.clone()),
        geometry: Geometry::Intervals(intervals),
    })
}

fn scaled_exponent(units: &BigUint, inv_gamma: &Rat) -> Rat {
    BigRational::from_integer(BigInt::from(units.clone())) * inv_gamma
}

/// Ratio-units length exponent of the components living `a_k - 1` levels
/// deep inside the subtree of the word with heap index `k`, by the closed
/// formula `a_k - 1 - a_{p(k)} + b_{p(k)}`.
pub fn component_length_exponent_f(
    k: TreeIndex,
    p: &FParams,
) -> Result<ScaleExponent, ConstructError> {
    let parent = crate::words::parent_index(k)?;
    let ak = p.a_term(k.0)?;
    let ap = p.a_term(parent.0)?;
    let bp = p.b_term(parent.0)?;
    let units = BigInt::from(ak) - BigInt::one() - BigInt::from(ap) + BigInt::from(bp);
    Ok(ScaleExponent(
        BigRational::from_integer(units) * p.inv_gamma(),
    ))
}

/// Replays the length rule along the leftmost path below the word with heap
/// index `k` down to depth `a_k - 1`, using only the ancestor chain (the
/// firing depths of deeper prefixes all exceed the target depth).  Returns
/// the ratio-units exponent at that depth.
pub fn path_length_exponent_f(k: TreeIndex, p: &FParams) -> Result<BigUint, ConstructError> {
    assert!(k.0 >= 2);
    let target = p.a_term(k.0)? - BigUint::one();
    // ancestor chain indices of k: 1 = root, ..., p(k); their firing depths
    // a_idx are all < a_k, so all fire before the target depth.
    let mut chain = Vec::new();
    let mut idx = k.0;
    while idx >= 1 {
        chain.push(idx);
        if idx == 1 {
            break;
        }
        idx >>= 1;
    }
    chain.reverse();
    // walk firings in depth order; between firings the exponent grows by one
    // per level
    let mut depth = BigUint::zero();
    let mut units = BigUint::zero();
    for anc in chain {
        let fire = p.a_term(anc)?;
        if fire > target {
            break;
        }
        units = p.b_term(anc)?;
        depth = fire;
    }
    Ok(units + (target - depth))
}

/// Per-family depths for the union assembly.
#[derive(Clone, Copy, Debug)]
pub struct DepthSpec {
    pub c: usize,
    pub d: usize,
    pub e: usize,
    pub f: usize,
}

/// The five sequences of the assembly.
#[derive(Clone, Debug)]
pub struct SequenceSet {
    pub n: SequenceSpec,
    pub k: SequenceSpec,
    pub j: SequenceSpec,
    pub a: SequenceSpec,
    pub b: SequenceSpec,
}

/// Assembles the union: the Cantor part runs on `(r, t)`, the point part on
/// `(u, v)`, the uniform point part on `w`, and the interval tree on `s`.
pub fn build_x(
    dims: &DimTuple,
    seqs: &SequenceSet,
    depths: &DepthSpec,
) -> Result<SetApprox, ConstructError> {
    let cp = CParams::new(dims.r.clone(), dims.t.clone(), seqs.n.clone())?;
    let dp = CParams::new(dims.u.clone(), dims.v.clone(), seqs.n.clone())?;
    let fp = FParams::new(dims.s.clone(), seqs.a.clone(), seqs.b.clone())?;
    let c = build_c(&cp, depths.c, true)?;
    let d = build_d(&dp, &seqs.k, depths.d)?;
    let e = build_e(&dims.w, &seqs.j, depths.e)?;
    let f = build_f(&fp, depths.f)?;
    let assembly = XAssembly {
        dims: dims.clone(),
        c: cp,
        d: (dp, seqs.k.clone()),
        e: (dims.w.clone(), seqs.j.clone()),
        f: fp,
    };
    Ok(SetApprox {
        family: Family::X,
        depth: depths.c.max(depths.d).max(depths.e).max(depths.f),
        params: ParamsRecord::X(Box::new(assembly)),
        geometry: Geometry::Parts(Box::new([c, d, e, f])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::params::SeqKind;

    fn default_nseq() -> SequenceSpec {
        SequenceSpec::new(SeqRole::N, SeqKind::TwoPowSquare)
    }

    fn half_params() -> CParams {
        CParams::new(rat(1, 2), rat(1, 2), default_nseq()).unwrap()
    }

    fn mixed_params() -> CParams {
        CParams::new(rat(3, 10), rat(1, 2), default_nseq()).unwrap()
    }

    fn default_fparams(gamma: Rat) -> FParams {
        FParams::new(
            gamma,
            SequenceSpec::new(SeqRole::A, SeqKind::TwoPowSquare),
            SequenceSpec::new(SeqRole::B, SeqKind::ScaledTwoPowSquare),
        )
        .unwrap()
    }

    #[test]
    fn contraction_ratio_examples() {
        let p = half_params();
        for n in 1u64..10 {
            assert_eq!(
                contraction_ratio(&BigUint::from(n), &p).unwrap().0,
                rat(2, 1)
            );
        }
        let p = mixed_params();
        // level 1 sits in the first strong block [1, 2)
        assert_eq!(
            contraction_ratio(&BigUint::one(), &p).unwrap().0,
            rat(10, 3)
        );
        // level 5 sits in the weak block [2, 16)
        assert_eq!(
            contraction_ratio(&BigUint::from(5u32), &p).unwrap().0,
            rat(2, 1)
        );
    }

    #[test]
    fn cum_matches_level_sum() {
        let p = mixed_params();
        let mut acc = Rat::zero();
        for m in 1u64..=40 {
            acc += p.contraction_exponent(&BigUint::from(m)).unwrap();
            assert_eq!(p.cum(&BigUint::from(m)).unwrap(), acc, "level {m}");
        }
    }

    #[test]
    fn cylinder_interval_examples() {
        let p = half_params();
        let e = cylinder_interval(&Word2::empty(), &p).unwrap();
        assert!(e.left.is_zero());
        assert!(e.log_len.is_unit());

        let w1 = cylinder_interval(&"1".parse().unwrap(), &p).unwrap();
        assert_eq!(w1.left.to_rat(), Some(rat(3, 4)));
        assert_eq!(w1.log_len.0, rat(2, 1));

        let w01 = cylinder_interval(&"01".parse().unwrap(), &p).unwrap();
        assert_eq!(w01.left.to_rat(), Some(rat(3, 16)));
        assert_eq!(w01.log_len.0, rat(4, 1));
    }

    #[test]
    fn build_c_depth_one_half() {
        let p = half_params();
        let c = build_c(&p, 1, true).unwrap();
        let ivs = c.intervals().unwrap();
        assert_eq!(ivs.len(), 2);
        assert_eq!(ivs[0].left.to_rat(), Some(rat(0, 1)));
        assert_eq!(ivs[0].right().to_rat(), Some(rat(1, 4)));
        assert_eq!(ivs[1].left.to_rat(), Some(rat(3, 4)));
        assert_eq!(ivs[1].right().to_rat(), Some(rat(1, 1)));
    }

    #[test]
    fn build_c_depth_zero_and_mixed_exponent() {
        let p = mixed_params();
        let c0 = build_c(&p, 0, true).unwrap();
        assert_eq!(c0.intervals().unwrap().len(), 1);
        let c3 = build_c(&p, 3, true).unwrap();
        let ivs = c3.intervals().unwrap();
        assert_eq!(ivs.len(), 8);
        for iv in ivs {
            assert_eq!(iv.log_len.0, rat(22, 3)); // 10/3 + 2 + 2
        }
    }

    #[test]
    fn build_c_matches_cylinder_interval() {
        let p = mixed_params();
        let c = build_c(&p, 4, true).unwrap();
        for iv in c.intervals().unwrap() {
            let direct = cylinder_interval(&iv.word, &p).unwrap();
            assert_eq!(direct.left, iv.left);
            assert_eq!(direct.log_len, iv.log_len);
        }
    }

    #[test]
    fn c_nesting_and_disjointness() {
        let p = mixed_params();
        let mut prev: Option<Vec<Interval>> = None;
        for depth in 0..=8usize {
            let c = build_c(&p, depth, true).unwrap();
            let ivs = c.intervals().unwrap().to_vec();
            // sorted and pairwise disjoint
            for w in ivs.windows(2) {
                assert!(w[0].right().cmp_exact(&w[1].left).is_lt());
            }
            if let Some(parents) = prev {
                for (i, iv) in ivs.iter().enumerate() {
                    let parent = &parents[i / 2];
                    assert!(parent.left.cmp_exact(&iv.left).is_le());
                    assert!(iv.right().cmp_exact(&parent.right()).is_le());
                }
            }
            prev = Some(ivs);
        }
    }

    #[test]
    fn build_d_level_one_coordinates() {
        let p = half_params();
        let k = SequenceSpec::new(SeqRole::K, SeqKind::Squares);
        let d = build_d(&p, &k, 1).unwrap();
        let coords: Vec<Rat> = d
            .points()
            .unwrap()
            .iter()
            .map(|pt| pt.coordinate.to_rat().unwrap())
            .collect();
        assert_eq!(coords, vec![rat(0, 1), rat(1, 4), rat(3, 4), rat(1, 1)]);
    }

    #[test]
    fn build_d_level_zero() {
        let p = half_params();
        let k = SequenceSpec::new(SeqRole::K, SeqKind::Squares);
        let d = build_d(&p, &k, 0).unwrap();
        let coords: Vec<Rat> = d
            .points()
            .unwrap()
            .iter()
            .map(|pt| pt.coordinate.to_rat().unwrap())
            .collect();
        assert_eq!(coords, vec![rat(0, 1), rat(1, 1)]);
    }

    #[test]
    fn build_e_equals_uniform_build_d() {
        let j = SequenceSpec::new(SeqRole::J, SeqKind::FloorPower);
        let e = build_e(&rat(1, 2), &j, 2).unwrap();
        let p = CParams::uniform(rat(1, 2)).unwrap();
        let d = build_d(&p, &j, 2).unwrap();
        let ec: Vec<&ExactReal> = e.points().unwrap().iter().map(|p| &p.coordinate).collect();
        let dc: Vec<&ExactReal> = d.points().unwrap().iter().map(|p| &p.coordinate).collect();
        assert_eq!(ec, dc);
    }

    #[test]
    fn d_points_lie_on_cylinder_boundaries_when_uniform() {
        // with equal contraction exponents every point is a component
        // endpoint of the same level
        let p = half_params();
        let k = SequenceSpec::new(SeqRole::K, SeqKind::Squares);
        for level in 0..=5usize {
            let d = build_d(&p, &k, level).unwrap();
            let c = build_c(&p, level, true).unwrap();
            let mut endpoints = std::collections::BTreeSet::new();
            for iv in c.intervals().unwrap() {
                endpoints.insert(iv.left.clone());
                endpoints.insert(iv.right());
            }
            for pt in d.points().unwrap() {
                assert!(
                    endpoints.contains(&pt.coordinate),
                    "level {level}: point {} off the skeleton",
                    pt.coordinate
                );
            }
        }
    }

    #[test]
    fn f_lengths_follow_the_rule() {
        let p = default_fparams(rat(1, 2));
        // depth 1: no prefix fires, fall back to one ratio unit
        let f1 = build_f(&p, 1).unwrap();
        for iv in f1.intervals().unwrap() {
            assert_eq!(iv.log_len.0, rat(2, 1)); // alpha^-1 = 2^-2
        }
        // depth 2 = a_1 with prefix ε (heap index 1): all lengths alpha^-b_1
        let f2 = build_f(&p, 2).unwrap();
        let ivs = f2.intervals().unwrap();
        assert_eq!(ivs.len(), 4);
        for iv in ivs {
            assert_eq!(iv.log_len.0, rat(8, 1)); // alpha^-4 = 2^-8
        }
        let f0 = build_f(&p, 0).unwrap();
        assert_eq!(f0.intervals().unwrap().len(), 1);
        assert!(f0.intervals().unwrap()[0].log_len.is_unit());
    }

    #[test]
    fn f_nesting_and_touching() {
        let p = default_fparams(rat(2, 5));
        let mut prev: Option<Vec<Interval>> = None;
        for depth in 0..=8usize {
            let f = build_f(&p, depth).unwrap();
            let ivs = f.intervals().unwrap().to_vec();
            assert_eq!(ivs.len(), 1 << depth);
            for w in ivs.windows(2) {
                // same-depth components intersect in at most one point
                assert!(w[0].right().cmp_exact(&w[1].left).is_le());
            }
            if let Some(parents) = prev {
                for (i, iv) in ivs.iter().enumerate() {
                    let parent = &parents[i / 2];
                    assert!(parent.left.cmp_exact(&iv.left).is_le());
                    assert!(iv.right().cmp_exact(&parent.right()).is_le());
                }
            }
            prev = Some(ivs);
        }
    }

    #[test]
    fn component_length_formula_examples() {
        let p = default_fparams(rat(1, 2));
        // k = 2: 16 - 1 - 2 + 4 = 17 ratio units
        assert_eq!(
            component_length_exponent_f(TreeIndex(2), &p).unwrap().0,
            rat(34, 1)
        );
        // k = 3: 512 - 1 - 2 + 4 = 513 ratio units
        assert_eq!(
            component_length_exponent_f(TreeIndex(3), &p).unwrap().0,
            rat(1026, 1)
        );
    }

    #[test]
    fn component_length_formula_matches_path_replay() {
        let p = default_fparams(rat(2, 5));
        for k in 2u64..=31 {
            let formula = component_length_exponent_f(TreeIndex(k), &p).unwrap();
            let replay = path_length_exponent_f(TreeIndex(k), &p).unwrap();
            assert_eq!(
                formula.0,
                scaled_exponent(&replay, &p.inv_gamma()),
                "index {k}"
            );
        }
    }

    #[test]
    fn component_length_formula_matches_materialized_tree() {
        let p = default_fparams(rat(1, 2));
        // k = 2: components of depth a_2 - 1 = 15 inside the subtree of "0"
        let f = build_f(&p, 15).unwrap();
        let expected = component_length_exponent_f(TreeIndex(2), &p).unwrap();
        let mut seen = 0;
        for iv in f.intervals().unwrap() {
            if iv.word.bits()[0] == 0 {
                assert_eq!(iv.log_len, expected);
                seen += 1;
            }
        }
        assert_eq!(seen, 1 << 14);
    }

    #[test]
    fn x_assembly_wiring() {
        let dims = crate::params::validate_dim_tuple((
            rat(3, 10),
            rat(4, 10),
            rat(5, 10),
            rat(6, 10),
            rat(7, 10),
            rat(8, 10),
        ))
        .unwrap();
        let seqs = SequenceSet {
            n: default_nseq(),
            k: SequenceSpec::new(SeqRole::K, SeqKind::Squares),
            j: SequenceSpec::new(SeqRole::J, SeqKind::FloorPower),
            a: SequenceSpec::new(SeqRole::A, SeqKind::TwoPowSquare),
            b: SequenceSpec::new(SeqRole::B, SeqKind::ScaledTwoPowSquare),
        };
        let x = build_x(
            &dims,
            &seqs,
            &DepthSpec {
                c: 2,
                d: 2,
                e: 2,
                f: 2,
            },
        )
        .unwrap();
        let parts = x.parts().unwrap();
        match &parts[0].params {
            ParamsRecord::C(cp) => {
                assert_eq!(cp.beta, rat(3, 10));
                assert_eq!(cp.gamma, rat(5, 10));
            }
            _ => panic!("wrong params record"),
        }
        match &parts[1].params {
            ParamsRecord::D(dp, _) => {
                assert_eq!(dp.beta, rat(6, 10));
                assert_eq!(dp.gamma, rat(7, 10));
            }
            _ => panic!("wrong params record"),
        }
        match &parts[2].params {
            ParamsRecord::E(g, _) => assert_eq!(g, &rat(8, 10)),
            _ => panic!("wrong params record"),
        }
        match &parts[3].params {
            ParamsRecord::F(fp) => assert_eq!(fp.gamma, rat(4, 10)),
            _ => panic!("wrong params record"),
        }
        // union cardinality: sum of parts minus exact duplicates
        let total: usize = parts
            .iter()
            .map(|p| match &p.geometry {
                Geometry::Intervals(v) => v.len(),
                Geometry::Points(v) => v.len(),
                _ => 0,
            })
            .sum();
        let distinct = x.distinct_atom_count();
        assert!(distinct <= total);
        assert!(distinct > 0);
    }

    #[test]
    fn enumeration_caps() {
        let p = half_params();
        assert!(matches!(
            build_c(&p, 40, true),
            Err(ConstructError::EnumerationCapExceeded(40))
        ));
    }

    #[test]
    fn level_of_scale_basics() {
        let p = half_params();
        // lengths 4^-m: scale e = 5 -> level 3
        assert_eq!(p.level_of_scale(&rat(5, 1)).unwrap(), BigUint::from(3u32));
        assert_eq!(p.level_of_scale(&rat(6, 1)).unwrap(), BigUint::from(3u32));
        assert_eq!(p.level_of_scale(&rat(0, 1)).unwrap(), BigUint::zero());
    }
}
