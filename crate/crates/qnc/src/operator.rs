//! Finite truncations of the infinite skew-symmetric pairing operator:
//! assembly, entrywise norms, rigorous omitted-tail bounds, and the
//! orthonormal-basis summability check.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::QncError;
use crate::pairing::{self, CharacterTable};
use crate::primes::PrimeTable;
use crate::real::{HighPrecisionReal, HpComplex};

/// Default cap on the truncation dimension; `QNC_MAX_N` overrides it.
pub const DEFAULT_MAX_DIMENSION: usize = 500;

/// Current dimension cap, honoring the `QNC_MAX_N` environment override.
pub fn max_dimension() -> usize {
    std::env::var("QNC_MAX_N")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(DEFAULT_MAX_DIMENSION)
}

/// Which operator a truncation represents.
#[derive(Debug, Clone)]
pub enum Variant {
    /// Entries `qnc(p_i, p_j)`.
    Standard,
    /// Entries `qnc(p_i, p_j) + correction(p_i, p_j)` (series extended by
    /// its k = 0 term).
    Modified,
    /// Entries `((chi(p_i) + conj(chi(p_j)))/2) * qnc(p_i, p_j)`.
    Weighted(CharacterTable),
}

impl Variant {
    pub fn kind(&self) -> VariantKind {
        match self {
            Variant::Standard => VariantKind::Standard,
            Variant::Modified => VariantKind::Modified,
            Variant::Weighted(_) => VariantKind::Weighted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantKind {
    Standard,
    Modified,
    Weighted,
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VariantKind::Standard => "standard",
            VariantKind::Modified => "modified",
            VariantKind::Weighted => "weighted",
        };
        write!(f, "{s}")
    }
}

/// Rigorous bound on the entry-bound sum over all pairs outside a
/// truncation. The modified operator's correction terms are not absolutely
/// summable, so its tail is reported as divergent.
#[derive(Debug, Clone)]
pub enum TailBound {
    Finite(HighPrecisionReal),
    Divergent,
}

impl TailBound {
    pub fn is_divergent(&self) -> bool {
        matches!(self, TailBound::Divergent)
    }

    pub fn as_finite(&self) -> Option<&HighPrecisionReal> {
        match self {
            TailBound::Finite(v) => Some(v),
            TailBound::Divergent => None,
        }
    }
}

impl fmt::Display for TailBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailBound::Finite(v) => write!(f, "{v}"),
            TailBound::Divergent => write!(f, "divergent"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum MatrixEntries {
    Real(Vec<HighPrecisionReal>),
    Complex(Vec<HpComplex>),
}

/// Dense truncation of the pairing operator over the first `n` primes.
///
/// Entries are computed once for `i < j` and mirrored, so antisymmetry
/// (skew-Hermitian symmetry for weighted tables) holds exactly by
/// construction and the diagonal is exactly zero. Immutable after assembly.
#[derive(Debug, Clone)]
pub struct QncMatrix {
    n: usize,
    variant: Variant,
    primes: PrimeTable,
    precision_bits: usize,
    entries: MatrixEntries,
    tail: TailBound,
}

/// Assemble the `n x n` truncation at the given precision.
pub fn build_matrix(
    n: usize,
    variant: &Variant,
    precision_bits: usize,
) -> Result<QncMatrix, QncError> {
    let cap = max_dimension();
    if n == 0 {
        return Err(QncError::InvalidArgument(
            "matrix dimension must be at least 1".into(),
        ));
    }
    if n > cap {
        return Err(QncError::DimensionCap { n, cap });
    }
    let primes = PrimeTable::first_n(n)?;
    let bits = precision_bits.max(crate::real::MIN_PRECISION_BITS);

    let entries = match variant {
        Variant::Weighted(chi) => {
            let mut m = vec![HpComplex::zero(bits); n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let base = pairing::qnc_primes(primes.get(i), primes.get(j), bits)?;
                    let e = pairing::weighted_entry(chi, primes.get(i), primes.get(j), &base, true)?;
                    m[j * n + i] = e.neg_conj();
                    m[i * n + j] = e;
                }
            }
            MatrixEntries::Complex(m)
        }
        Variant::Standard | Variant::Modified => {
            let modified = matches!(variant, Variant::Modified);
            let mut m = vec![HighPrecisionReal::zero(bits); n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let (p, q) = (primes.get(i), primes.get(j));
                    let mut e = pairing::qnc_primes(p, q, bits)?;
                    if modified {
                        e = e.add(&pairing::tilde_correction(p, q, bits));
                    }
                    m[j * n + i] = e.neg();
                    m[i * n + j] = e;
                }
            }
            MatrixEntries::Real(m)
        }
    };

    let tail = tail_bound(n, variant.kind(), bits);
    Ok(QncMatrix {
        n,
        variant: variant.clone(),
        primes,
        precision_bits: bits,
        entries,
        tail,
    })
}

impl QncMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn variant_kind(&self) -> VariantKind {
        self.variant.kind()
    }

    pub fn primes(&self) -> &PrimeTable {
        &self.primes
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    pub fn tail_bound(&self) -> &TailBound {
        &self.tail
    }

    pub fn entries(&self) -> &MatrixEntries {
        &self.entries
    }

    pub fn is_complex(&self) -> bool {
        matches!(self.entries, MatrixEntries::Complex(_))
    }

    /// Entry (i, j), 0-based, as a real value. Panics for weighted matrices.
    pub fn real_entry(&self, i: usize, j: usize) -> &HighPrecisionReal {
        match &self.entries {
            MatrixEntries::Real(m) => &m[i * self.n + j],
            MatrixEntries::Complex(_) => panic!("weighted matrices have complex entries"),
        }
    }

    /// Entry (i, j), 0-based, as a complex value (real entries promoted).
    pub fn complex_entry(&self, i: usize, j: usize) -> HpComplex {
        match &self.entries {
            MatrixEntries::Real(m) => HpComplex::from_real(m[i * self.n + j].clone()),
            MatrixEntries::Complex(m) => m[i * self.n + j].clone(),
        }
    }

    /// |entry (i, j)|.
    pub fn abs_entry(&self, i: usize, j: usize) -> HighPrecisionReal {
        match &self.entries {
            MatrixEntries::Real(m) => m[i * self.n + j].abs(),
            MatrixEntries::Complex(m) => m[i * self.n + j].modulus(),
        }
    }

    /// Sum of |entries| over the whole truncation.
    pub fn entry_abs_sum(&self) -> HighPrecisionReal {
        self.entry_abs_sum_prefixes()
            .pop()
            .expect("n >= 1")
    }

    /// Sum of |entries|^2 over the whole truncation.
    pub fn hs_norm_sq(&self) -> HighPrecisionReal {
        self.hs_norm_sq_prefixes().pop().expect("n >= 1")
    }

    /// `k`-th element is the entry-abs sum of the leading k x k block
    /// (k = 1..n), so nested truncations come from one assembly.
    pub fn entry_abs_sum_prefixes(&self) -> Vec<HighPrecisionReal> {
        self.prefix_sums(|i, j| self.abs_entry(i, j))
    }

    /// Prefix sums of |entries|^2, as in [`Self::entry_abs_sum_prefixes`].
    pub fn hs_norm_sq_prefixes(&self) -> Vec<HighPrecisionReal> {
        self.prefix_sums(|i, j| {
            let e = self.abs_entry(i, j);
            e.mul(&e)
        })
    }

    fn prefix_sums(
        &self,
        f: impl Fn(usize, usize) -> HighPrecisionReal,
    ) -> Vec<HighPrecisionReal> {
        let wp = self.precision_bits + 32;
        let mut acc = HighPrecisionReal::zero(wp);
        let mut out = Vec::with_capacity(self.n);
        let two = HighPrecisionReal::from_u64(2, wp);
        for k in 0..self.n {
            // ring k: entries (i, k) and (k, i) for i < k; mirrored moduli
            // are equal, so add each upper entry twice
            for i in 0..k {
                acc = acc.add(&two.mul(&f(i, k)));
            }
            out.push(acc.with_precision(self.precision_bits));
        }
        out
    }

    /// Write the entry table as CSV. Real variants use the schema
    /// `i,j,p_i,p_j,entry`; the weighted variant has complex entries and
    /// uses `i,j,p_i,p_j,re,im`. Indices are 1-based; values are decimal
    /// strings at full precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), QncError> {
        match &self.entries {
            MatrixEntries::Real(_) => {
                writeln!(w, "i,j,p_i,p_j,entry")?;
                for i in 0..self.n {
                    for j in 0..self.n {
                        writeln!(
                            w,
                            "{},{},{},{},{}",
                            i + 1,
                            j + 1,
                            self.primes.get(i),
                            self.primes.get(j),
                            self.real_entry(i, j)
                        )?;
                    }
                }
            }
            MatrixEntries::Complex(m) => {
                writeln!(w, "i,j,p_i,p_j,re,im")?;
                for i in 0..self.n {
                    for j in 0..self.n {
                        let e = &m[i * self.n + j];
                        writeln!(
                            w,
                            "{},{},{},{},{},{}",
                            i + 1,
                            j + 1,
                            self.primes.get(i),
                            self.primes.get(j),
                            e.re,
                            e.im
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Metadata sidecar accompanying the CSV export.
    pub fn sidecar(&self) -> MatrixSidecar {
        MatrixSidecar {
            n: self.n,
            variant: self.variant_kind().to_string(),
            precision_bits: self.precision_bits,
            tail_bound: self.tail.to_string(),
        }
    }
}

/// JSON sidecar schema for matrix exports.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixSidecar {
    pub n: usize,
    pub variant: String,
    pub precision_bits: usize,
    /// Decimal string, or `"divergent"` for the modified variant.
    pub tail_bound: String,
}

/// Terms with exponents beyond this many bits are not evaluated; they are
/// covered by a counted lump bound of `2^-TAIL_EXP_BITS` each.
const TAIL_EXP_BITS: f64 = 4096.0;

/// Rigorous upper bound on the sum of entry bounds `(p^-q + q^-p)/2` over
/// all ordered pairs with max index beyond `n`.
///
/// Pairs with both primes below the horizon `H = max(20, 10 p_n)` are
/// summed explicitly; the remainder is majorized over integers by
/// `2^(1-H) + 1/(H-1)`. The weighted variant shares the standard bound
/// (its weights have modulus at most 1). The modified variant's
/// correction terms are not absolutely summable: the result is
/// [`TailBound::Divergent`].
pub fn tail_bound(n: usize, kind: VariantKind, precision_bits: usize) -> TailBound {
    if kind == VariantKind::Modified {
        return TailBound::Divergent;
    }
    let bits = precision_bits.max(crate::real::MIN_PRECISION_BITS);
    let wp = bits + 32;

    let horizon = if n == 0 {
        20
    } else {
        let table = PrimeTable::first_n(n).expect("n within cap implies primes exist");
        20u64.max(10 * table.get(n - 1))
    };
    let primes = PrimeTable::up_to(horizon);
    let m = primes.len();
    let logs: Vec<f64> = primes.as_slice().iter().map(|&p| (p as f64).log2()).collect();

    // sum over ordered pairs (a, b), a != b, max index >= n (0-based),
    // of p_a ^ (-p_b); this equals the sum of (p^-q + q^-p)/2 over the
    // same ordered pairs by symmetry
    let mut sum = HighPrecisionReal::zero(wp);
    let mut skipped: u64 = 0;
    for a in 0..m {
        let pa = primes.get(a);
        for b in 0..m {
            if a == b || a.max(b) < n {
                continue;
            }
            let pb = primes.get(b);
            if pb as f64 * logs[a] > TAIL_EXP_BITS {
                skipped += 1;
                continue;
            }
            let term = HighPrecisionReal::from_u64(pa, wp)
                .powi(pb as usize)
                .recip();
            sum = sum.add(&term);
        }
    }
    if skipped > 0 {
        let lump = HighPrecisionReal::from_u64(skipped, wp)
            .mul(&HighPrecisionReal::pow2(-(TAIL_EXP_BITS as i32), wp));
        sum = sum.add(&lump);
    }

    // integer majorant for pairs with a prime beyond the horizon:
    // sum_{q > H} [ sum_{a >= 2} a^-q + sum_{a >= 2} q^-a ] <= 2^(1-H) + 1/(H-1)
    let h = horizon as i64;
    let remainder = HighPrecisionReal::pow2((1 - h) as i32, wp).add(
        &HighPrecisionReal::from_i64(h - 1, wp).recip(),
    );
    sum = sum.add(&remainder);

    TailBound::Finite(sum.with_precision(bits))
}

/// A finite orthonormal system of column vectors at high precision.
#[derive(Debug, Clone)]
pub struct UnitaryBasis {
    n: usize,
    bits: usize,
    cols: Vec<Vec<HpComplex>>,
}

impl UnitaryBasis {
    /// Standard basis vectors e_1..e_n.
    pub fn standard(n: usize, bits: usize) -> Self {
        let cols = (0..n)
            .map(|c| {
                (0..n)
                    .map(|r| {
                        if r == c {
                            HpComplex::from_real(HighPrecisionReal::one(bits))
                        } else {
                            HpComplex::zero(bits)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { n, bits, cols }
    }

    /// Caller-supplied columns; orthonormality is verified by
    /// [`basis_criterion_check`], not here.
    pub fn from_columns(cols: Vec<Vec<HpComplex>>, bits: usize) -> Result<Self, QncError> {
        let n = cols.len();
        if n == 0 || cols.iter().any(|c| c.len() != n) {
            return Err(QncError::InvalidArgument(
                "basis must be a nonempty square column set".into(),
            ));
        }
        Ok(Self { n, bits, cols })
    }

    /// Seeded pseudo-random unitary basis: a raw complex matrix from a
    /// splitmix64 stream, orthonormalized by two passes of modified
    /// Gram-Schmidt in high precision.
    pub fn random(n: usize, seed: u64, bits: usize) -> Self {
        let wp = bits + 64;
        let mut state = seed;
        let mut uniform = move || {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut cols: Vec<Vec<HpComplex>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| HpComplex::from_f64(uniform(), uniform(), wp))
                    .collect()
            })
            .collect();
        for _pass in 0..2 {
            for c in 0..n {
                let (done, rest) = cols.split_at_mut(c);
                let v = &mut rest[0];
                for prev in done.iter() {
                    let proj = inner(prev, v);
                    for (vi, pi) in v.iter_mut().zip(prev.iter()) {
                        *vi = vi.sub(&pi.mul(&proj));
                    }
                }
                let norm = column_norm(v);
                let inv = norm.recip();
                for vi in v.iter_mut() {
                    *vi = vi.scale(&inv);
                }
            }
        }
        Self { n, bits, cols }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn column(&self, c: usize) -> &[HpComplex] {
        &self.cols[c]
    }

    /// Max deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> HighPrecisionReal {
        let mut worst = HighPrecisionReal::zero(self.bits);
        let one = HighPrecisionReal::one(self.bits + 64);
        for i in 0..self.n {
            for j in i..self.n {
                let g = inner(&self.cols[i], &self.cols[j]);
                let dev = if i == j {
                    g.re.sub(&one).abs().add(&g.im.abs())
                } else {
                    g.modulus()
                };
                worst = worst.max(dev);
            }
        }
        worst
    }
}

/// `<a, b> = sum_k conj(a_k) b_k`.
fn inner(a: &[HpComplex], b: &[HpComplex]) -> HpComplex {
    let bits = a
        .first()
        .map(|z| z.re.precision_bits())
        .unwrap_or(crate::real::MIN_PRECISION_BITS);
    let mut acc = HpComplex::zero(bits);
    for (x, y) in a.iter().zip(b.iter()) {
        acc = acc.add(&x.conj().mul(y));
    }
    acc
}

fn column_norm(v: &[HpComplex]) -> HighPrecisionReal {
    let bits = v
        .first()
        .map(|z| z.re.precision_bits())
        .unwrap_or(crate::real::MIN_PRECISION_BITS);
    let mut acc = HighPrecisionReal::zero(bits);
    for z in v {
        acc = acc.add(&z.norm_sq());
    }
    acc.sqrt().expect("norms are nonnegative")
}

/// Summability functional `sum_c |<R phi_c, phi_c>|` over the supplied
/// orthonormal system. The chain of inequalities behind the trace-class
/// criterion bounds this by the entry-abs sum, which callers can assert.
///
/// Errors when the basis misses orthonormality by more than
/// `2^-(precision_bits/2)`.
pub fn basis_criterion_check(
    m: &QncMatrix,
    basis: &UnitaryBasis,
) -> Result<HighPrecisionReal, QncError> {
    if basis.n() != m.n() {
        return Err(QncError::InvalidArgument(format!(
            "basis dimension {} does not match matrix dimension {}",
            basis.n(),
            m.n()
        )));
    }
    let bits = m.precision_bits();
    let tol = HighPrecisionReal::pow2(-((bits / 2) as i32), bits);
    let defect = basis.orthonormality_defect();
    if defect > tol {
        return Err(QncError::BasisNotOrthonormal {
            defect: defect.to_f64(),
            tolerance: tol.to_f64(),
        });
    }
    let n = m.n();
    let mut total = HighPrecisionReal::zero(bits + 32);
    for c in 0..n {
        let phi = basis.column(c);
        // (R phi)_i = sum_j R[i][j] phi_j
        let mut quad = HpComplex::zero(bits + 32);
        for i in 0..n {
            let mut row = HpComplex::zero(bits + 32);
            for j in 0..n {
                if i == j {
                    continue;
                }
                row = row.add(&m.complex_entry(i, j).mul(&phi[j]));
            }
            // <R phi, phi> accumulates conj(phi_i) (R phi)_i
            quad = quad.add(&phi[i].conj().mul(&row));
        }
        total = total.add(&quad.modulus());
    }
    Ok(total.with_precision(bits))
}
