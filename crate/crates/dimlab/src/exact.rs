//! Exact numeric tower used throughout the crate.
//!
//! Every length appearing in the constructions equals `2^(-e)` for an exact
//! rational exponent `e`, and every endpoint is a finite signed sum of such
//! powers.  This module provides:
//!
//! * [`ScaleExponent`] — a rational `e` standing for the scale `2^(-e)`;
//! * [`Dyadic`] — exact numbers `m * 2^k` (masses, certified enclosures);
//! * [`ExactReal`] — finite sums `sum_i q_i * 2^(-g_i)` with rational
//!   coefficients `q_i` and exponent classes `g_i in [0,1)`.  The
//!   representation is canonical, so equality of values is equality of
//!   representations, and the sign of a nonzero value is decided by
//!   evaluating dyadic enclosures at escalating precision (which always
//!   terminates).  No floating point is used anywhere.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

pub type Rat = BigRational;

/// Convenience constructor for small rationals.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

/// Parses `"p/q"` or a plain integer string into a rational.
pub fn rat_from_str(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| format!("invalid rational numerator in `{s}`"))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| format!("invalid rational denominator in `{s}`"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in `{s}`"));
    }
    Ok(Rat::new(n, d))
}

/// Renders a rational as `p/q` (plain `p` when the denominator is 1).
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Renders a rational as a decimal with the given number of significant
/// digits (round-to-nearest on the last digit).
pub fn rat_to_decimal(r: &Rat, sig_digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    // decimal exponent: largest d with 10^d <= a
    let mut d: i64 = 0;
    let ten = Rat::from_integer(BigInt::from(10));
    let mut scaled = a.clone();
    if scaled >= Rat::one() {
        while scaled >= ten {
            scaled /= &ten;
            d += 1;
        }
    } else {
        while scaled < Rat::one() {
            scaled *= &ten;
            d -= 1;
        }
    }
    // digits = round(a * 10^(sig-1-d))
    let shift = sig_digits as i64 - 1 - d;
    let pow = ten_pow(shift.unsigned_abs());
    let scaled = if shift >= 0 {
        a * Rat::from_integer(pow)
    } else {
        a / Rat::from_integer(pow)
    };
    let rounded = round_rat(&scaled);
    let mut digits = rounded.to_string();
    // rounding may add a digit (e.g. 999.6 -> 1000)
    let mut d = d;
    if digits.len() > sig_digits {
        digits.truncate(sig_digits);
        d += 1;
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if d >= 0 && (d as usize) < sig_digits {
        let int_len = d as usize + 1;
        out.push_str(&digits[..int_len]);
        let frac = digits[int_len..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
    } else if d < 0 && d >= -6 {
        out.push_str("0.");
        for _ in 0..(-d - 1) {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
    } else {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push_str(&d.to_string());
    }
    out
}

fn ten_pow(e: u64) -> BigInt {
    let mut x = BigInt::one();
    for _ in 0..e {
        x *= 10;
    }
    x
}

fn round_rat(r: &Rat) -> BigInt {
    let two = BigInt::from(2);
    let (n, d) = (r.numer(), r.denom());
    (n * &two + d).div_floor(&(d * &two))
}

/// Exact rational exponent `e` standing for the scale `delta = 2^(-e)`.
/// Larger exponents mean smaller scales; `e = 0` is the unit scale.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ScaleExponent(pub Rat);

impl ScaleExponent {
    pub fn new(e: Rat) -> Self {
        ScaleExponent(e)
    }

    pub fn zero() -> Self {
        ScaleExponent(Rat::zero())
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_zero()
    }

    /// The scale value `2^(-e)` as an [`ExactReal`].
    pub fn value(&self) -> ExactReal {
        ExactReal::pow2(&(-self.0.clone()))
    }
}

impl fmt::Display for ScaleExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rat_to_string(&self.0))
    }
}

/// Exact dyadic rational `mant * 2^exp`, normalized so `mant` is odd or zero.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: 0,
        }
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: e,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -self.mant.clone(),
            exp: self.exp,
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_pow2(&self, e: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + e,
        }
    }

    pub fn to_rat(&self) -> Rat {
        if self.exp >= 0 {
            Rat::from_integer(&self.mant << self.exp as usize)
        } else {
            Rat::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Smallest `k` with `|self| <= 2^k`; `None` for zero.
    pub fn log2_abs_ceil(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let bits = self.mant.magnitude().bits() as i64;
        // |mant| <= 2^bits, and |mant| >= 2^(bits-1); mant odd.
        if self.mant.magnitude().is_one() {
            Some(self.exp)
        } else {
            Some(bits + self.exp)
        }
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).mant.sign().cmp(&Sign::NoSign)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mant, self.exp)
    }
}

/// A certified enclosure `[lo, hi]` with exact dyadic ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Enclosure {
    pub fn exact(d: Dyadic) -> Self {
        Enclosure {
            lo: d.clone(),
            hi: d,
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo.add(&other.lo),
            hi: self.hi.add(&other.hi),
        }
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.mant.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.mant.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

/// Certified enclosure of `2^(-f)` for `f in [0,1)`, width `2^(-prec)`.
/// Exact integer arithmetic: the mantissa is the q-th root of a power of two.
/// Results are memoized per `(f, prec)`.
pub fn pow2_frac_enclosure(f: &Rat, prec: u64) -> Enclosure {
    use std::collections::HashMap;
    use std::sync::Mutex;
    use std::sync::OnceLock;
    static CACHE: OnceLock<Mutex<HashMap<(Rat, u64), Enclosure>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(f.clone(), prec)) {
        return hit.clone();
    }
    let computed = pow2_frac_enclosure_uncached(f, prec);
    cache
        .lock()
        .unwrap()
        .insert((f.clone(), prec), computed.clone());
    computed
}

fn pow2_frac_enclosure_uncached(f: &Rat, prec: u64) -> Enclosure {
    debug_assert!(!f.is_negative() && f < &Rat::one());
    if f.is_zero() {
        return Enclosure::exact(Dyadic::one());
    }
    let p = f.numer().to_u64().expect("fractional exponent numerator too large");
    let q = f.denom().to_u64().expect("fractional exponent denominator too large");
    debug_assert!(p < q);
    // floor(2^(prec - p/q)) = floor((2^(prec*q - p))^(1/q))
    let t = prec
        .checked_mul(q)
        .and_then(|x| x.checked_sub(p))
        .expect("precision overflow");
    let big = BigUint::one() << t as usize;
    let root = big.nth_root(u32::try_from(q).expect("exponent denominator too large"));
    let lo = Dyadic::new(BigInt::from(root.clone()), -(prec as i64));
    let hi = Dyadic::new(BigInt::from(root + BigUint::one()), -(prec as i64));
    Enclosure { lo, hi }
}

/// Certified enclosure of `2^(-e)` for any rational `e`, width `<= 2^(-prec+|floor(e)|...)`
/// relative to magnitude.
pub fn pow2_enclosure(e: &Rat, prec: u64) -> Enclosure {
    let fl = e.floor();
    let frac = e - &fl;
    let fl_i = fl
        .to_integer()
        .to_i64()
        .expect("scale exponent out of range");
    let base = pow2_frac_enclosure(&frac, prec);
    Enclosure {
        lo: base.lo.mul_pow2(-fl_i),
        hi: base.hi.mul_pow2(-fl_i),
    }
}

/// Certified dyadic enclosure of a rational, width `<= 2^(-prec)`.
pub fn rat_enclosure(x: &Rat, prec: u64) -> Enclosure {
    let scaled_num = x.numer() << prec as usize;
    let (q, r) = scaled_num.div_rem(x.denom());
    // div_rem truncates toward zero; adjust to floor
    let lo_mant = if r.is_negative() { q.clone() - 1 } else { q.clone() };
    let hi_mant = if r.is_zero() {
        lo_mant.clone()
    } else {
        &lo_mant + 1
    };
    Enclosure {
        lo: Dyadic::new(lo_mant, -(prec as i64)),
        hi: Dyadic::new(hi_mant, -(prec as i64)),
    }
}

fn interval_mul(a: &Enclosure, b: &Enclosure) -> Enclosure {
    let c1 = a.lo.mul(&b.lo);
    let c2 = a.lo.mul(&b.hi);
    let c3 = a.hi.mul(&b.lo);
    let c4 = a.hi.mul(&b.hi);
    let mut lo = c1.clone();
    let mut hi = c1;
    for c in [c2, c3, c4] {
        if c < lo {
            lo = c.clone();
        }
        if c > hi {
            hi = c;
        }
    }
    Enclosure { lo, hi }
}

/// Rational enclosure of `log2(n)` for `n >= 1`, width `<= 2^(-frac_bits+2)`.
pub fn log2_enclosure(n: &BigUint, frac_bits: u32) -> (Rat, Rat) {
    assert!(!n.is_zero(), "log2 of zero");
    if n.is_one() {
        return (Rat::zero(), Rat::zero());
    }
    let b = (n.bits() - 1) as i64;
    let guard = frac_bits as u64 + 16;
    // x in [1,2) as fixed point with `guard` fractional bits, enclosed
    let mut xlo: BigUint = (n << guard as usize) >> b as usize;
    let mut xhi: BigUint = &xlo + BigUint::one();
    let one_fp: BigUint = BigUint::one() << guard as usize;
    let two_fp: BigUint = &one_fp << 1usize;
    let mut frac_lo = Rat::zero();
    let mut frac_hi = Rat::zero();
    let mut resolved = true;
    for i in 1..=frac_bits {
        // square with outward rounding
        xlo = (&xlo * &xlo) >> guard as usize;
        xhi = ((&xhi * &xhi) >> guard as usize) + BigUint::one();
        let bit_weight = Rat::new(BigInt::one(), BigInt::one() << i as usize);
        if xlo >= two_fp {
            frac_lo += &bit_weight;
            frac_hi += &bit_weight;
            xlo >>= 1usize;
            xhi = (&xhi + BigUint::one()) >> 1usize;
        } else if xhi < two_fp {
            // bit is 0 for both
        } else {
            // ambiguous: stop with a sound interval
            frac_hi += Rat::new(BigInt::one(), BigInt::one() << (i - 1) as usize);
            resolved = false;
            break;
        }
        if xhi >= &two_fp << 1usize {
            // enclosure blew past [1,4); widen soundly and stop
            frac_hi += Rat::new(BigInt::one(), BigInt::one() << (i - 1) as usize);
            resolved = false;
            break;
        }
    }
    if resolved {
        // remaining truncation error: value in [frac_lo, frac_lo + 2^-frac_bits + slack)
        frac_hi += Rat::new(BigInt::one(), BigInt::one() << (frac_bits - 1) as usize);
    }
    let base = Rat::from_integer(BigInt::from(b));
    (&base + frac_lo, base + frac_hi)
}

/// Rational upper bound on `log2(6)`, 64 fractional bits.
pub fn log2_6_upper() -> Rat {
    let (_, hi) = log2_enclosure(&BigUint::from(3u32), 64);
    hi + Rat::one()
}

/// Rational lower bound on `log2(3)`, 64 fractional bits.
pub fn log2_3_lower() -> Rat {
    let (lo, _) = log2_enclosure(&BigUint::from(3u32), 64);
    lo
}

/// Rational upper bound on `log2(3)`.
pub fn log2_3_upper() -> Rat {
    let (_, hi) = log2_enclosure(&BigUint::from(3u32), 64);
    hi
}

/// Exact real number of the form `sum_g coeff_g * 2^(-g)` over finitely many
/// exponent classes `g in [0,1)` with nonzero rational coefficients.
///
/// The map is canonical: two `ExactReal`s are equal as numbers if and only if
/// their term maps are equal (powers `2^(-g)` with distinct `g in [0,1)` are
/// linearly independent over the rationals).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct ExactReal {
    terms: BTreeMap<Rat, Rat>,
}

impl ExactReal {
    pub fn zero() -> Self {
        ExactReal {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        ExactReal::from_rat(Rat::one())
    }

    pub fn from_rat(q: Rat) -> Self {
        let mut t = BTreeMap::new();
        if !q.is_zero() {
            t.insert(Rat::zero(), q);
        }
        ExactReal { terms: t }
    }

    pub fn from_dyadic(d: &Dyadic) -> Self {
        ExactReal::from_rat(d.to_rat())
    }

    /// `2^e` (note: the *signed* exponent, so `pow2(-e)` is the scale `2^(-e)`).
    pub fn pow2(e: &Rat) -> Self {
        // 2^e = coeff * 2^(-g) with g = ceil-style split: e = -(g + k), coeff = 2^(-k)
        let neg = -e.clone();
        let fl = neg.floor();
        let g = &neg - &fl; // in [0,1)
        let k = fl
            .to_integer()
            .to_i64()
            .expect("power exponent out of range");
        let coeff = if k >= 0 {
            Rat::new(BigInt::one(), BigInt::one() << k as usize)
        } else {
            Rat::from_integer(BigInt::one() << (-k) as usize)
        };
        let mut t = BTreeMap::new();
        t.insert(g, coeff);
        ExactReal { terms: t }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.terms.len()
    }

    fn insert_term(&mut self, g: Rat, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&g) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&g);
                }
            }
            None => {
                self.terms.insert(g, coeff);
            }
        }
    }

    pub fn add(&self, other: &ExactReal) -> ExactReal {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.insert_term(g.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ExactReal) -> ExactReal {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.insert_term(g.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> ExactReal {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn mul_rat(&self, q: &Rat) -> ExactReal {
        if q.is_zero() {
            return ExactReal::zero();
        }
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= q;
        }
        out
    }

    pub fn mul(&self, other: &ExactReal) -> ExactReal {
        let mut out = ExactReal::zero();
        for (g1, c1) in &self.terms {
            for (g2, c2) in &other.terms {
                let mut g = g1 + g2;
                let mut coeff = c1 * c2;
                if g >= Rat::one() {
                    g -= Rat::one();
                    coeff /= Rat::from_integer(BigInt::from(2));
                }
                out.insert_term(g, coeff);
            }
        }
        out
    }

    /// Multiplies by the power `2^e`.
    pub fn mul_pow2(&self, e: &Rat) -> ExactReal {
        self.mul(&ExactReal::pow2(e))
    }

    /// Exact sign of the value.  Zero is decided symbolically; a nonzero sign
    /// is resolved by enclosure evaluation at escalating precision.
    pub fn sign(&self) -> Ordering {
        if self.terms.is_empty() {
            return Ordering::Equal;
        }
        if self.terms.len() == 1 {
            if let Some((g, c)) = self.terms.iter().next() {
                if g.is_zero() {
                    return c.cmp(&Rat::zero());
                }
                // single term coeff * 2^(-g) with 2^(-g) > 0
                return c.cmp(&Rat::zero());
            }
        }
        let mut prec: u64 = 64;
        loop {
            let enc = self.enclosure(prec);
            if let Some(s) = enc.sign() {
                return s;
            }
            prec *= 2;
        }
    }

    pub fn cmp_exact(&self, other: &ExactReal) -> Ordering {
        self.sub(other).sign()
    }

    /// Certified dyadic enclosure of the value.
    pub fn enclosure(&self, prec: u64) -> Enclosure {
        let mut acc = Enclosure::exact(Dyadic::zero());
        for (g, c) in &self.terms {
            let ce = rat_enclosure(c, prec);
            let term = if g.is_zero() {
                ce
            } else {
                interval_mul(&ce, &pow2_frac_enclosure(g, prec))
            };
            acc = acc.add(&term);
        }
        acc
    }

    /// Exact rational value, when every class exponent is zero.
    pub fn to_rat(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            if let Some((g, c)) = self.terms.iter().next() {
                if g.is_zero() {
                    return Some(c.clone());
                }
            }
        }
        None
    }
}

impl PartialOrd for ExactReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

impl fmt::Display for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.to_rat() {
            return write!(f, "{}", rat_to_string(&q));
        }
        let enc = self.enclosure(64);
        write!(f, "~{}", rat_to_decimal(&enc.lo.to_rat(), 12))
    }
}
