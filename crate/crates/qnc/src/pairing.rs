//! The pairing function of primes and its analytic bounds.
//!
//! The central object is the double-exponentially convergent series
//!
//! ```text
//! F(x, y) = sum_{k>=1} x^(k-1) * y^(-x^k) / (1 - y^(-x^k))^2 ,   x, y > 1
//! ```
//!
//! from which the antisymmetric pairing
//!
//! ```text
//! qnc(x, y) = ( x(y-1) F(x,y) - y(x-1) F(y,x) ) / (12 x y)
//! ```
//!
//! is built. Every series evaluation returns a rigorous upper bound on the
//! omitted tail, so matrix entries and norm sums carry error budgets rather
//! than bare values.

use std::collections::BTreeMap;

use crate::error::QncError;
use crate::real::{HighPrecisionReal, HpComplex};

/// A truncated series value together with a rigorous bound on the omitted
/// tail. All terms of the series are positive, so the true value lies in
/// `[value, value + truncation_error]`.
#[derive(Debug, Clone)]
pub struct SeriesValue {
    pub value: HighPrecisionReal,
    pub truncation_error: HighPrecisionReal,
    pub terms_used: usize,
}

/// Extra guard bits used for intermediate arithmetic.
const GUARD_BITS: usize = 64;

/// Iteration cap for pathological arguments very close to 1.
const MAX_TERMS: usize = 200_000;

/// Exponent budget: once `x^k * log2(y)` exceeds this, the term is below
/// `2^-(2^30)` and is treated as an exact zero with that bound.
const TERM_EXP_LIMIT: f64 = (1u64 << 30) as f64;

enum Term {
    Value(HighPrecisionReal),
    /// Term magnitude is below `2^-(2^30)`; the position records k.
    Underflow,
}

struct SeriesEvaluator {
    x: HighPrecisionReal,
    y: HighPrecisionReal,
    /// Integer fast path when both arguments are integers.
    int_args: Option<(u64, u64)>,
    log2_y: f64,
    wp: usize,
}

impl SeriesEvaluator {
    fn new(x: &HighPrecisionReal, y: &HighPrecisionReal) -> Result<Self, QncError> {
        let bits = x.precision_bits().max(y.precision_bits());
        let wp = bits + GUARD_BITS;
        let one = HighPrecisionReal::one(wp);
        if !(x > &one) || !(y > &one) {
            return Err(QncError::Domain(format!(
                "series arguments must exceed 1, got x = {x}, y = {y}"
            )));
        }
        let int_args = match (x.to_u64_exact(), y.to_u64_exact()) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        };
        Ok(Self {
            x: x.with_precision(wp),
            y: y.with_precision(wp),
            int_args,
            log2_y: y.to_f64().log2(),
            wp,
        })
    }

    /// k-th series term, `x^(k-1) * u / (1-u)^2` with `u = y^(-x^k)`.
    fn term(&self, k: usize) -> Term {
        let u = match self.inner_power(k) {
            Some(u) => u,
            None => return Term::Underflow,
        };
        let one = HighPrecisionReal::one(self.wp);
        let denom = one.sub(&u);
        let denom_sq = denom.mul(&denom);
        debug_assert!(
            self.int_args.is_none()
                || denom_sq >= HighPrecisionReal::from_u64(9, self.wp)
                    .div(&HighPrecisionReal::from_u64(16, self.wp)),
            "denominator bound (1 - y^(-x^k))^2 >= 9/16 violated for integer arguments >= 2"
        );
        let xpow = self.x.powi(k - 1);
        Term::Value(xpow.mul(&u).div(&denom_sq))
    }

    /// `y^(-x^k)`, or `None` when its exponent falls below the budget.
    fn inner_power(&self, k: usize) -> Option<HighPrecisionReal> {
        if let Some((xi, _yi)) = self.int_args {
            let mut e: u64 = 1;
            for _ in 0..k {
                e = match e.checked_mul(xi) {
                    Some(v) => v,
                    None => return None, // x^k > u64::MAX, term far below budget
                };
            }
            if e as f64 * self.log2_y > TERM_EXP_LIMIT {
                return None;
            }
            Some(self.y.powi(e as usize).recip())
        } else {
            let e = self.x.powi(k);
            if e.to_f64() * self.log2_y > TERM_EXP_LIMIT {
                return None;
            }
            self.y.pow_real(&e.neg())
        }
    }
}

/// Evaluate `F(x, y)` with a relative-error target.
///
/// Terms are added until the tail bound `2 * t_(K+1)` drops below
/// `target_rel_err` times the partial sum, with the geometric-decay check
/// `t_(K+1) <= t_K / 2` verified at the cutoff. The returned
/// `truncation_error` is that tail bound.
pub fn eval_f(
    x: &HighPrecisionReal,
    y: &HighPrecisionReal,
    target_rel_err: f64,
) -> Result<SeriesValue, QncError> {
    if !(target_rel_err > 0.0 && target_rel_err < 1.0) {
        return Err(QncError::InvalidArgument(format!(
            "target relative error must lie in (0, 1), got {target_rel_err}"
        )));
    }
    let bits = x.precision_bits().max(y.precision_bits());
    let target = HighPrecisionReal::from_f64(target_rel_err, bits);
    eval_f_with_target(x, y, &target)
}

/// Series evaluation against a high-precision relative-error target; this
/// is the form the pairing uses so targets below the f64 range stay exact.
pub(crate) fn eval_f_with_target(
    x: &HighPrecisionReal,
    y: &HighPrecisionReal,
    target_rel_err: &HighPrecisionReal,
) -> Result<SeriesValue, QncError> {
    let ev = SeriesEvaluator::new(x, y)?;
    let bits = x.precision_bits().max(y.precision_bits());
    let two = HighPrecisionReal::from_u64(2, ev.wp);

    let mut prev = match ev.term(1) {
        Term::Value(t) => t,
        Term::Underflow => {
            // Entire series is below the exponent budget; cannot happen for
            // arguments that pass the domain check at desk scale, but keep
            // the bound honest.
            let tiny = HighPrecisionReal::pow2(1 - (1 << 30), bits);
            return Ok(SeriesValue {
                value: HighPrecisionReal::zero(bits),
                truncation_error: tiny,
                terms_used: 0,
            });
        }
    };
    let mut sum = prev.clone();
    let mut k = 1usize;
    loop {
        match ev.term(k + 1) {
            Term::Underflow => {
                // t_(K+1) < 2^-(2^30): the tail is bounded by twice that.
                return Ok(SeriesValue {
                    value: sum.with_precision(bits),
                    truncation_error: HighPrecisionReal::pow2(1 - (1 << 30), bits),
                    terms_used: k,
                });
            }
            Term::Value(t_next) => {
                let tail = two.mul(&t_next);
                let ratio_ok = t_next <= prev.div(&two);
                let tail_ok = tail <= target_rel_err.mul(&sum);
                if ratio_ok && tail_ok {
                    return Ok(SeriesValue {
                        value: sum.with_precision(bits),
                        truncation_error: tail.with_precision(bits),
                        terms_used: k,
                    });
                }
                sum = sum.add(&t_next);
                prev = t_next;
                k += 1;
                if k >= MAX_TERMS {
                    return Err(QncError::SolverFailure(format!(
                        "series for F({x}, {y}) did not meet the tail target within {MAX_TERMS} terms"
                    )));
                }
            }
        }
    }
}

/// The pairing `qnc(x, y) = (x(y-1)F(x,y) - y(x-1)F(y,x)) / (12xy)`.
///
/// Exact zero is returned for `x = y`; the two series are evaluated with a
/// tightened target so the combined absolute error stays below
/// `2^-(precision/2)` of the result scale.
pub fn qnc(
    x: &HighPrecisionReal,
    y: &HighPrecisionReal,
    target_rel_err: f64,
) -> Result<HighPrecisionReal, QncError> {
    if !(target_rel_err > 0.0 && target_rel_err < 1.0) {
        return Err(QncError::InvalidArgument(format!(
            "target relative error must lie in (0, 1), got {target_rel_err}"
        )));
    }
    let bits = x.precision_bits().max(y.precision_bits());
    let one = HighPrecisionReal::one(bits);
    if !(x > &one) || !(y > &one) {
        return Err(QncError::Domain(format!(
            "qnc arguments must exceed 1, got x = {x}, y = {y}"
        )));
    }
    if x == y {
        return Ok(HighPrecisionReal::zero(bits));
    }
    let tight = HighPrecisionReal::from_f64(target_rel_err, bits)
        .min(HighPrecisionReal::pow2(-((bits + 32) as i32), bits));
    let f_xy = eval_f_with_target(x, y, &tight)?;
    let f_yx = eval_f_with_target(y, x, &tight)?;

    let wp = bits + GUARD_BITS;
    let x = x.with_precision(wp);
    let y = y.with_precision(wp);
    let one = HighPrecisionReal::one(wp);
    // Keep the two products in mirrored form: swapping the arguments must
    // produce the bit-exact negation.
    let a = x.mul(&y.sub(&one)).mul(&f_xy.value);
    let b = y.mul(&x.sub(&one)).mul(&f_yx.value);
    let twelve = HighPrecisionReal::from_u64(12, wp);
    let denom = x.mul(&y).mul(&twelve);
    Ok(a.sub(&b).div(&denom).with_precision(bits))
}

/// Pairing of two primes at a given precision, with the relative-error
/// target derived from the precision.
pub fn qnc_primes(p: u64, q: u64, precision_bits: usize) -> Result<HighPrecisionReal, QncError> {
    let x = HighPrecisionReal::from_u64(p, precision_bits);
    let y = HighPrecisionReal::from_u64(q, precision_bits);
    qnc(&x, &y, 0.5f64.powi(40))
}

/// Exponent threshold (in bits) beyond which the closed-form bound is
/// assembled in log space.
const LOG_SPACE_THRESHOLD: f64 = 1.0e4;

/// Closed-form entry bound `(p^-q + q^-p) / 2`.
///
/// For exponents beyond [`LOG_SPACE_THRESHOLD`] bits the two powers are
/// combined in (sign, log2-magnitude) form before exponentiating back, so
/// the result never underflows.
pub fn qnc_bound(p: u64, q: u64, precision_bits: usize) -> HighPrecisionReal {
    let ep = q as f64 * (p as f64).log2();
    let eq = p as f64 * (q as f64).log2();
    if ep > LOG_SPACE_THRESHOLD || eq > LOG_SPACE_THRESHOLD {
        qnc_bound_log_space(p, q, precision_bits)
    } else {
        qnc_bound_direct(p, q, precision_bits)
    }
}

pub(crate) fn qnc_bound_direct(p: u64, q: u64, precision_bits: usize) -> HighPrecisionReal {
    let wp = precision_bits.max(crate::real::MIN_PRECISION_BITS) + GUARD_BITS;
    let a = HighPrecisionReal::from_u64(p, wp).powi(q as usize).recip();
    let b = HighPrecisionReal::from_u64(q, wp).powi(p as usize).recip();
    let two = HighPrecisionReal::from_u64(2, wp);
    a.add(&b).div(&two).with_precision(precision_bits)
}

pub(crate) fn qnc_bound_log_space(p: u64, q: u64, precision_bits: usize) -> HighPrecisionReal {
    let wp = precision_bits.max(crate::real::MIN_PRECISION_BITS) + GUARD_BITS;
    let lp = HighPrecisionReal::from_u64(p, wp)
        .log2()
        .expect("prime is positive");
    let lq = HighPrecisionReal::from_u64(q, wp)
        .log2()
        .expect("prime is positive");
    // log2 magnitudes of the two powers
    let l1 = lp.mul(&HighPrecisionReal::from_u64(q, wp)).neg();
    let l2 = lq.mul(&HighPrecisionReal::from_u64(p, wp)).neg();
    let m = l1.clone().max(l2.clone());
    let s = l1.sub(&m).exp2().add(&l2.sub(&m).exp2());
    let one = HighPrecisionReal::one(wp);
    let log_result = m.add(&s.log2().expect("sum of powers is positive")).sub(&one);
    log_result.exp2().with_precision(precision_bits)
}

/// Correction term added to each entry when the series is extended by its
/// k = 0 term: `(1/(q-1) - 1/(p-1)) / (12 p q)`. Antisymmetric in (p, q);
/// zero for p = q.
pub fn tilde_correction(p: u64, q: u64, precision_bits: usize) -> HighPrecisionReal {
    let bits = precision_bits.max(crate::real::MIN_PRECISION_BITS);
    if p == q {
        return HighPrecisionReal::zero(bits);
    }
    let wp = bits + GUARD_BITS;
    let one = HighPrecisionReal::one(wp);
    let rq = HighPrecisionReal::from_u64(q, wp).sub(&one).recip();
    let rp = HighPrecisionReal::from_u64(p, wp).sub(&one).recip();
    let twelve_pq = HighPrecisionReal::from_u64(12, wp)
        .mul(&HighPrecisionReal::from_u64(p, wp).mul(&HighPrecisionReal::from_u64(q, wp)));
    rq.sub(&rp).div(&twelve_pq).with_precision(bits)
}

/// Dirichlet character supplied as an explicit table of values on the
/// residues coprime to the modulus. Residues not listed are zero.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    modulus: u64,
    values: BTreeMap<u64, HpComplex>,
    precision_bits: usize,
}

/// Tolerance for the unit-modulus and multiplicativity checks on supplied
/// character values (tables typically originate from decimal text).
const CHARACTER_TOL: f64 = 1.0e-9;

impl CharacterTable {
    /// The principal character mod q: 1 on residues coprime to q.
    pub fn principal(modulus: u64, precision_bits: usize) -> Self {
        let one = HpComplex::from_real(HighPrecisionReal::one(precision_bits));
        let values = (0..modulus.max(1))
            .filter(|r| gcd(*r, modulus) == 1)
            .map(|r| (r, one.clone()))
            .collect();
        Self {
            modulus: modulus.max(1),
            values,
            precision_bits,
        }
    }

    /// Build from explicit residue/value pairs, validating the character
    /// axioms: values on the unit circle, completely multiplicative on the
    /// listed residues, zero off the coprime residues.
    pub fn from_values(
        modulus: u64,
        entries: Vec<(u64, HpComplex)>,
        precision_bits: usize,
    ) -> Result<Self, QncError> {
        if modulus == 0 {
            return Err(QncError::InvalidArgument("modulus must be positive".into()));
        }
        let mut values = BTreeMap::new();
        for (r, v) in entries {
            let r = r % modulus;
            if gcd(r, modulus) != 1 {
                if !v.is_zero() {
                    return Err(QncError::Validation(format!(
                        "residue {r} shares a factor with modulus {modulus} but has a nonzero value"
                    )));
                }
                continue;
            }
            if values.insert(r, v).is_some() {
                return Err(QncError::Validation(format!(
                    "residue {r} listed more than once"
                )));
            }
        }
        let table = Self {
            modulus,
            values,
            precision_bits,
        };
        table.validate()?;
        Ok(table)
    }

    /// Parse the external table format: a header line `modulus <q>` followed
    /// by lines `<residue> <re> <im>`.
    pub fn parse(text: &str, precision_bits: usize) -> Result<Self, QncError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| QncError::Parse {
                line: 1,
                message: "empty character file".into(),
            })?;
        let mut head = header.split_whitespace();
        let modulus = match (head.next(), head.next()) {
            (Some("modulus"), Some(q)) => q.parse::<u64>().map_err(|e| QncError::Parse {
                line: 1,
                message: format!("bad modulus: {e}"),
            })?,
            _ => {
                return Err(QncError::Parse {
                    line: 1,
                    message: "expected header line: modulus <q>".into(),
                })
            }
        };
        let mut entries = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse_field = |s: Option<&str>, what: &str| -> Result<String, QncError> {
                s.map(str::to_owned).ok_or_else(|| QncError::Parse {
                    line: line_no,
                    message: format!("missing {what}"),
                })
            };
            let residue: u64 = parse_field(parts.next(), "residue")?
                .parse()
                .map_err(|e| QncError::Parse {
                    line: line_no,
                    message: format!("bad residue: {e}"),
                })?;
            let re = HighPrecisionReal::parse_decimal(
                &parse_field(parts.next(), "real part")?,
                precision_bits,
            )
            .map_err(|e| QncError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            let im = HighPrecisionReal::parse_decimal(
                &parse_field(parts.next(), "imaginary part")?,
                precision_bits,
            )
            .map_err(|e| QncError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            entries.push((residue, HpComplex::new(re, im)));
        }
        Self::from_values(modulus, entries, precision_bits)
    }

    fn validate(&self) -> Result<(), QncError> {
        let tol = CHARACTER_TOL;
        if self.modulus > 1 || !self.values.is_empty() {
            let one = self.value(1);
            if (one.re.to_f64() - 1.0).abs() > tol || one.im.to_f64().abs() > tol {
                return Err(QncError::Validation(
                    "character value at 1 must be 1".into(),
                ));
            }
        }
        for (&r, v) in &self.values {
            let m = v.norm_sq().to_f64();
            if (m - 1.0).abs() > tol {
                return Err(QncError::Validation(format!(
                    "character value at residue {r} is not on the unit circle (|v|^2 = {m})"
                )));
            }
        }
        let residues: Vec<u64> = self.values.keys().copied().collect();
        for &a in &residues {
            for &b in &residues {
                let ab = (a as u128 * b as u128 % self.modulus as u128) as u64;
                let lhs = self.value(ab);
                let rhs = self.value(a).mul(&self.value(b));
                let diff = lhs.sub(&rhs).norm_sq().to_f64();
                if diff > tol {
                    return Err(QncError::Validation(format!(
                        "character is not multiplicative at residues {a} and {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Character value at `n` (reduced mod the modulus); zero when `n`
    /// shares a factor with the modulus.
    pub fn value(&self, n: u64) -> HpComplex {
        let r = n % self.modulus;
        self.values
            .get(&r)
            .cloned()
            .unwrap_or_else(|| HpComplex::zero(self.precision_bits))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// Character-weighted entry `((chi(p_i) + conj(chi(p_j))) / 2) * base`.
///
/// Errors when either prime divides the modulus (character value zero)
/// unless the caller permits zero weights.
pub fn weighted_entry(
    chi: &CharacterTable,
    p_i: u64,
    p_j: u64,
    base: &HighPrecisionReal,
    permit_zero_weights: bool,
) -> Result<HpComplex, QncError> {
    let wi = chi.value(p_i);
    let wj = chi.value(p_j);
    if !permit_zero_weights {
        if wi.is_zero() {
            return Err(QncError::ZeroCharacterWeight {
                prime: p_i,
                modulus: chi.modulus(),
            });
        }
        if wj.is_zero() {
            return Err(QncError::ZeroCharacterWeight {
                prime: p_j,
                modulus: chi.modulus(),
            });
        }
    }
    let bits = base.precision_bits();
    let half = HighPrecisionReal::from_u64(2, bits).recip();
    let weight = wi.add(&wj.conj()).scale(&half);
    Ok(weight.scale(base))
}
