//! Dimension-tuple validation and the five integer sequences that
//! parameterize the constructions.
//!
//! All sequence terms are exact big integers; the floor-power generator is
//! evaluated by exact integer power comparison, never through floats.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::exact::{rat_to_string, Rat};

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum ParamsError {
    #[error("chain violation: {0}")]
    ChainViolation(&'static str),
    #[error("component {0} out of range (must satisfy 0 < {0} <= 1)")]
    OutOfRange(&'static str),
    #[error("unsupported generator `{0}` for this role")]
    UnsupportedGenerator(String),
    #[error("sequence horizon exceeded: index {index} not available ({detail})")]
    SequenceHorizonExceeded { index: u64, detail: String },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
}

/// The six dimension targets, exact rationals in (0,1] satisfying the chain
/// `r <= s <= min(t,u) <= max(t,u) <= v <= w`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DimTuple {
    pub r: Rat,
    pub s: Rat,
    pub t: Rat,
    pub u: Rat,
    pub v: Rat,
    pub w: Rat,
}

/// Validates range and chain conditions, naming the first violation.
pub fn validate_dim_tuple(
    candidate: (Rat, Rat, Rat, Rat, Rat, Rat),
) -> Result<DimTuple, ParamsError> {
    let (r, s, t, u, v, w) = candidate;
    let one = Rat::one();
    for (value, name) in [
        (&r, "r"),
        (&s, "s"),
        (&t, "t"),
        (&u, "u"),
        (&v, "v"),
        (&w, "w"),
    ] {
        if !value.is_positive() || value > &one {
            return Err(ParamsError::OutOfRange(name));
        }
    }
    if r > s {
        return Err(ParamsError::ChainViolation("r ≤ s"));
    }
    if s > t {
        return Err(ParamsError::ChainViolation("s ≤ t"));
    }
    if s > u {
        return Err(ParamsError::ChainViolation("s ≤ u"));
    }
    if t > v {
        return Err(ParamsError::ChainViolation("t ≤ v"));
    }
    if u > v {
        return Err(ParamsError::ChainViolation("u ≤ v"));
    }
    if v > w {
        return Err(ParamsError::ChainViolation("v ≤ w"));
    }
    Ok(DimTuple { r, s, t, u, v, w })
}

use num_traits::Signed;

/// Which of the five sequences a spec stands for; fixes the start index.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqRole {
    N,
    K,
    J,
    A,
    B,
}

impl SeqRole {
    /// First index of the sequence in its natural convention.
    pub fn start(self) -> u64 {
        match self {
            SeqRole::N | SeqRole::A | SeqRole::B => 0,
            SeqRole::K | SeqRole::J => 1,
        }
    }
}

impl fmt::Display for SeqRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            SeqRole::N => 'n',
            SeqRole::K => 'k',
            SeqRole::J => 'j',
            SeqRole::A => 'a',
            SeqRole::B => 'b',
        };
        write!(f, "{c}")
    }
}

/// Named term generators plus explicit finite lists.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SeqKind {
    /// `2^(i^2)` from the role's start index.
    TwoPowSquare,
    /// `i^2` from the role's start index.
    Squares,
    /// `floor(i^(1 + 1/i))`, evaluated by exact integer power comparison.
    FloorPower,
    /// `(i + 1) * 2^(i^2)`.
    ScaledTwoPowSquare,
    /// `2^i` (the degenerate growth case).
    TwoPow,
    /// Explicit finite list, indexed from the role's start.
    Explicit(Vec<BigUint>),
}

impl SeqKind {
    pub fn name(&self) -> &'static str {
        match self {
            SeqKind::TwoPowSquare => "two-pow-square",
            SeqKind::Squares => "squares",
            SeqKind::FloorPower => "floor-power",
            SeqKind::ScaledTwoPowSquare => "scaled-two-pow-square",
            SeqKind::TwoPow => "two-pow",
            SeqKind::Explicit(_) => "explicit",
        }
    }

    pub fn from_name(name: &str, terms: Option<Vec<BigUint>>) -> Result<SeqKind, ParamsError> {
        match name {
            "two-pow-square" => Ok(SeqKind::TwoPowSquare),
            "squares" => Ok(SeqKind::Squares),
            "floor-power" => Ok(SeqKind::FloorPower),
            "scaled-two-pow-square" => Ok(SeqKind::ScaledTwoPowSquare),
            "two-pow" => Ok(SeqKind::TwoPow),
            "explicit" => match terms {
                Some(t) if !t.is_empty() => Ok(SeqKind::Explicit(t)),
                _ => Err(ParamsError::InvalidSequence(
                    "explicit sequence needs a nonempty `terms` list".into(),
                )),
            },
            other => Err(ParamsError::UnsupportedGenerator(other.to_string())),
        }
    }
}

/// A sequence role paired with its generator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SequenceSpec {
    pub role: SeqRole,
    pub kind: SeqKind,
}

impl SequenceSpec {
    pub fn new(role: SeqRole, kind: SeqKind) -> Self {
        SequenceSpec { role, kind }
    }

    /// The term at absolute index `i` (the role fixes where indexing starts).
    pub fn term(&self, i: u64) -> Result<BigUint, ParamsError> {
        let start = self.role.start();
        if i < start {
            return Err(ParamsError::SequenceHorizonExceeded {
                index: i,
                detail: format!("role {} starts at index {start}", self.role),
            });
        }
        match &self.kind {
            SeqKind::TwoPowSquare => {
                let sq = (i as u128 * i as u128) as usize;
                Ok(BigUint::one() << sq)
            }
            SeqKind::Squares => Ok(BigUint::from(i) * BigUint::from(i)),
            SeqKind::FloorPower => Ok(floor_power_term(i)),
            SeqKind::ScaledTwoPowSquare => {
                let sq = (i as u128 * i as u128) as usize;
                Ok(BigUint::from(i + 1) << sq)
            }
            SeqKind::TwoPow => Ok(BigUint::one() << i as usize),
            SeqKind::Explicit(terms) => {
                let idx = (i - start) as usize;
                terms
                    .get(idx)
                    .cloned()
                    .ok_or(ParamsError::SequenceHorizonExceeded {
                        index: i,
                        detail: format!("explicit list has {} terms", terms.len()),
                    })
            }
        }
    }

    /// First `count` terms, from the role's start index.
    pub fn prefix(&self, count: usize) -> Result<Vec<BigUint>, ParamsError> {
        let start = self.role.start();
        (0..count as u64).map(|d| self.term(start + d)).collect()
    }
}

/// `floor(i^(1 + 1/i))` = the largest `m` with `m^i <= i^(i+1)`, by exact
/// integer comparison (binary search over the excess `m - i`).
fn floor_power_term(i: u64) -> BigUint {
    assert!(i >= 1);
    if i == 1 {
        return BigUint::one();
    }
    let base = BigUint::from(i);
    let rhs = base.pow(
        u32::try_from(i + 1).expect("floor-power index too large for exact evaluation"),
    );
    let exp = u32::try_from(i).unwrap();
    // m = i + d with d in [0, 64]: i^(1/i) < 2 for i >= 2, and the excess
    // i*(i^(1/i) - 1) ~ ln i stays far below 64 for any representable i.
    let (mut lo, mut hi) = (0u64, 64u64);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if BigUint::from(i + mid).pow(exp) <= rhs {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    BigUint::from(i + lo)
}

/// One named condition in a sequence validation report.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub name: String,
    pub pass: bool,
    /// Worst (largest) ratio seen, as `p/q`, for trend conditions.
    pub worst_ratio: Option<String>,
    pub detail: String,
}

/// Prefix validation report for the five sequences.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub horizon: usize,
    pub conditions: Vec<ConditionReport>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }
}

fn check_monotone(name: &str, terms: &[BigUint], strict: bool) -> ConditionReport {
    for w in terms.windows(2) {
        let ok = if strict { w[0] < w[1] } else { w[0] <= w[1] };
        if !ok {
            return ConditionReport {
                name: name.to_string(),
                pass: false,
                worst_ratio: None,
                detail: format!("violated at consecutive terms {} , {}", w[0], w[1]),
            };
        }
    }
    ConditionReport {
        name: name.to_string(),
        pass: true,
        worst_ratio: None,
        detail: String::new(),
    }
}

/// Trend check: the given ratio sequence must be strictly decreasing over the
/// prefix (a finite surrogate for convergence to zero).
fn check_ratio_trend(name: &str, ratios: &[Rat]) -> ConditionReport {
    let worst = ratios.iter().max().map(rat_to_string);
    for w in ratios.windows(2) {
        if w[0] <= w[1] {
            return ConditionReport {
                name: name.to_string(),
                pass: false,
                worst_ratio: worst,
                detail: format!(
                    "not strictly decreasing: {} then {}",
                    rat_to_string(&w[0]),
                    rat_to_string(&w[1])
                ),
            };
        }
    }
    ConditionReport {
        name: name.to_string(),
        pass: true,
        worst_ratio: worst,
        detail: String::new(),
    }
}

fn ratio(a: &BigUint, b: &BigUint) -> Rat {
    BigRational::new(BigInt::from(a.clone()), BigInt::from(b.clone()))
}

/// Checks the finite prefix of all five sequences: per-role monotonicity,
/// the two anchor terms of the interval-length sequences, the pairwise
/// increment domination, and the decreasing trend of the four ratio
/// conditions.
pub fn validate_sequences(
    n: &SequenceSpec,
    k: &SequenceSpec,
    j: &SequenceSpec,
    a: &SequenceSpec,
    b: &SequenceSpec,
    horizon: usize,
) -> Result<ValidationReport, ParamsError> {
    assert!(horizon >= 2, "horizon must be at least 2");
    let nt = n.prefix(horizon + 1)?;
    let kt = k.prefix(horizon)?;
    let jt = j.prefix(horizon)?;
    let at = a.prefix(horizon + 1)?;
    let bt = b.prefix(horizon + 1)?;

    let mut conditions = vec![
        check_monotone("n strictly increasing", &nt, true),
        check_monotone("k strictly increasing", &kt, true),
        check_monotone("j nondecreasing", &jt, false),
        check_monotone("a strictly increasing", &at, true),
        check_monotone("b strictly increasing", &bt, true),
    ];

    let one = BigUint::one();
    conditions.push(ConditionReport {
        name: "a_0 = 1".into(),
        pass: at[0] == one,
        worst_ratio: None,
        detail: format!("a_0 = {}", at[0]),
    });
    conditions.push(ConditionReport {
        name: "b_0 = 1".into(),
        pass: bt[0] == one,
        worst_ratio: None,
        detail: format!("b_0 = {}", bt[0]),
    });

    // pairwise increment domination: a_j - a_i <= b_j - b_i for i <= j
    let mut pair_ok = true;
    let mut pair_detail = String::new();
    'outer: for i in 0..=horizon {
        for jj in i..=horizon {
            let da = &at[jj] - &at[i];
            let db = &bt[jj] - &bt[i];
            if da > db {
                pair_ok = false;
                pair_detail = format!("violated at (i, j) = ({i}, {jj}): {da} > {db}");
                break 'outer;
            }
        }
    }
    conditions.push(ConditionReport {
        name: "a_j - a_i ≤ b_j - b_i (pairwise)".into(),
        pass: pair_ok,
        worst_ratio: None,
        detail: pair_detail,
    });

    let r1: Vec<Rat> = nt.windows(2).map(|w| ratio(&w[0], &w[1])).collect();
    conditions.push(check_ratio_trend("n_k / n_{k+1} → 0 (trend)", &r1));

    let r2: Vec<Rat> = kt
        .iter()
        .enumerate()
        .map(|(idx, kv)| ratio(&BigUint::from(idx as u64 + 1), kv))
        .collect();
    conditions.push(check_ratio_trend("n / k_n → 0 (trend)", &r2));

    let r3: Vec<Rat> = at
        .iter()
        .zip(bt.iter())
        .map(|(av, bv)| ratio(av, bv))
        .collect();
    conditions.push(check_ratio_trend("a_k / b_k → 0 (trend)", &r3));

    let r4: Vec<Rat> = (0..horizon).map(|i| ratio(&bt[i], &at[i + 1])).collect();
    conditions.push(check_ratio_trend("b_k / a_{k+1} → 0 (trend)", &r4));

    Ok(ValidationReport {
        horizon,
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn spec(role: SeqRole, kind: SeqKind) -> SequenceSpec {
        SequenceSpec::new(role, kind)
    }

    #[test]
    fn dim_tuple_accepts_valid_chains() {
        let t = validate_dim_tuple((
            rat(3, 10),
            rat(4, 10),
            rat(5, 10),
            rat(6, 10),
            rat(7, 10),
            rat(8, 10),
        ))
        .unwrap();
        assert_eq!(t.r, rat(3, 10));
        // boundary: all equal to one
        validate_dim_tuple((
            rat(1, 1),
            rat(1, 1),
            rat(1, 1),
            rat(1, 1),
            rat(1, 1),
            rat(1, 1),
        ))
        .unwrap();
    }

    #[test]
    fn dim_tuple_names_first_violation() {
        let err = validate_dim_tuple((
            rat(5, 10),
            rat(4, 10),
            rat(5, 10),
            rat(6, 10),
            rat(7, 10),
            rat(8, 10),
        ))
        .unwrap_err();
        assert_eq!(err, ParamsError::ChainViolation("r ≤ s"));
        let err = validate_dim_tuple((
            rat(0, 1),
            rat(4, 10),
            rat(5, 10),
            rat(6, 10),
            rat(7, 10),
            rat(8, 10),
        ))
        .unwrap_err();
        assert_eq!(err, ParamsError::OutOfRange("r"));
    }

    #[test]
    fn dim_tuple_middle_pair_is_order_free() {
        // swapping t and u preserves acceptance
        let a = validate_dim_tuple((
            rat(1, 10),
            rat(2, 10),
            rat(6, 10),
            rat(3, 10),
            rat(7, 10),
            rat(8, 10),
        ));
        let b = validate_dim_tuple((
            rat(1, 10),
            rat(2, 10),
            rat(3, 10),
            rat(6, 10),
            rat(7, 10),
            rat(8, 10),
        ));
        assert!(a.is_ok() && b.is_ok());
    }

    #[test]
    fn floor_power_prefix() {
        let j = spec(SeqRole::J, SeqKind::FloorPower);
        let terms = j.prefix(5).unwrap();
        let expect: Vec<BigUint> = [1u32, 2, 4, 5, 6].iter().map(|&x| BigUint::from(x)).collect();
        assert_eq!(terms, expect);
    }

    /// Independent oracle for the floor-power generator: scan m upward and
    /// compare m^i against i^(i+1) directly.
    #[test]
    fn floor_power_matches_scan_oracle() {
        for i in 1u64..=40 {
            let rhs = BigUint::from(i).pow((i + 1) as u32);
            let mut m = 1u64;
            while BigUint::from(m + 1).pow(i as u32) <= rhs {
                m += 1;
            }
            assert_eq!(
                spec(SeqRole::J, SeqKind::FloorPower).term(i).unwrap(),
                BigUint::from(m),
                "index {i}"
            );
        }
    }

    #[test]
    fn power_generators_match_examples() {
        let a = spec(SeqRole::A, SeqKind::TwoPowSquare);
        let expect: Vec<BigUint> = [1u64, 2, 16, 512].iter().map(|&x| BigUint::from(x)).collect();
        assert_eq!(a.prefix(4).unwrap(), expect);
        let b = spec(SeqRole::B, SeqKind::ScaledTwoPowSquare);
        let expect: Vec<BigUint> = [1u64, 4, 48, 2048].iter().map(|&x| BigUint::from(x)).collect();
        assert_eq!(b.prefix(4).unwrap(), expect);
    }

    #[test]
    fn prefix_stability() {
        for kind in [
            SeqKind::TwoPowSquare,
            SeqKind::Squares,
            SeqKind::FloorPower,
            SeqKind::ScaledTwoPowSquare,
            SeqKind::TwoPow,
        ] {
            let role = match kind {
                SeqKind::Squares => SeqRole::K,
                SeqKind::FloorPower => SeqRole::J,
                _ => SeqRole::N,
            };
            let s = spec(role, kind);
            let long = s.prefix(12).unwrap();
            for m in 0..12 {
                assert_eq!(s.prefix(m).unwrap(), long[..m]);
            }
        }
    }

    #[test]
    fn j_terms_dominate_index() {
        let j = spec(SeqRole::J, SeqKind::FloorPower);
        for i in 2u64..=50 {
            assert!(j.term(i).unwrap() >= BigUint::from(i));
        }
    }

    fn default_five() -> (
        SequenceSpec,
        SequenceSpec,
        SequenceSpec,
        SequenceSpec,
        SequenceSpec,
    ) {
        (
            spec(SeqRole::N, SeqKind::TwoPowSquare),
            spec(SeqRole::K, SeqKind::Squares),
            spec(SeqRole::J, SeqKind::FloorPower),
            spec(SeqRole::A, SeqKind::TwoPowSquare),
            spec(SeqRole::B, SeqKind::ScaledTwoPowSquare),
        )
    }

    #[test]
    fn default_sequences_pass_at_horizon_six() {
        let (n, k, j, a, b) = default_five();
        let report = validate_sequences(&n, &k, &j, &a, &b, 6).unwrap();
        for c in &report.conditions {
            assert!(c.pass, "{} failed: {}", c.name, c.detail);
        }
    }

    #[test]
    fn equal_a_b_fails_ratio_trend() {
        let (n, k, j, _, _) = default_five();
        let counting: Vec<BigUint> = (1u64..=8).map(BigUint::from).collect();
        let a = spec(SeqRole::A, SeqKind::Explicit(counting.clone()));
        let b = spec(SeqRole::B, SeqKind::Explicit(counting));
        let report = validate_sequences(&n, &k, &j, &a, &b, 6).unwrap();
        let trend = report
            .conditions
            .iter()
            .find(|c| c.name.starts_with("a_k / b_k"))
            .unwrap();
        assert!(!trend.pass);
        assert_eq!(trend.worst_ratio.as_deref(), Some("1"));
        // the pairwise increment condition itself still holds with equality
        let pairwise = report
            .conditions
            .iter()
            .find(|c| c.name.contains("pairwise"))
            .unwrap();
        assert!(pairwise.pass);
    }

    #[test]
    fn doubling_n_flagged_as_non_vanishing() {
        let (_, k, j, a, b) = default_five();
        let n = spec(SeqRole::N, SeqKind::TwoPow);
        let report = validate_sequences(&n, &k, &j, &a, &b, 6).unwrap();
        let trend = report
            .conditions
            .iter()
            .find(|c| c.name.starts_with("n_k / n_{k+1}"))
            .unwrap();
        assert!(!trend.pass, "constant ratio 1/2 must fail the trend");
        assert_eq!(trend.worst_ratio.as_deref(), Some("1/2"));
    }
}
