//! Spectra of operator truncations and determinants built from them.
//!
//! Singular values come from a Jacobi eigensolve of `R^T R` (or of the real
//! embedding of `i R` for weighted, complex truncations) carried out in
//! high-precision arithmetic at twice the matrix precision. The skew
//! structure makes the exact eigenvalues doubly degenerate, so the computed
//! splitting of each pair is a direct certificate of solver quality; it is
//! reported as `pairing_defect` and never assumed.
//!
//! Determinants are available through two independent routes: the spectral
//! product over signed eigenvalues, and the polynomial with coefficients
//! from exterior-power traces (Newton's identities over power sums).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::QncError;
use crate::operator::{MatrixEntries, QncMatrix};
use crate::real::{HighPrecisionReal, HpComplex};

/// Singular values of a truncation with the pairing certificate.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Nonnegative singular values, descending.
    pub lambdas: Vec<f64>,
    /// Signed imaginary parts of the eigenvalues (the spectrum is
    /// `{ i * mu : mu in signed_imag }`), sorted by modulus descending,
    /// positive member of each pair first.
    pub signed_imag: Vec<f64>,
    /// Largest relative mismatch observed between paired singular values
    /// above the tolerance floor.
    pub pairing_defect: f64,
    pub source_dim: usize,
    /// Absolute accuracy floor for the reported singular values.
    pub solver_tolerance: f64,
}

impl SpectrumResult {
    /// Sum of singular values (finite-truncation trace norm).
    pub fn trace_norm(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// Pairs with smaller member above `10 * solver_tolerance` — the ones
    /// the pairing certificate covers.
    pub fn resolved_pairs(&self) -> usize {
        let floor = 10.0 * self.solver_tolerance;
        let mut count = 0;
        let n = self.lambdas.len();
        let upper = if n % 2 == 1 { n - 1 } else { n };
        for k in (0..upper).step_by(2) {
            if self.lambdas[k + 1] > floor {
                count += 1;
            }
        }
        count
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolve for a symmetric matrix in high precision.
/// Returns the diagonal after convergence and the final off-diagonal
/// Frobenius residual.
fn jacobi_symmetric(
    mut a: Vec<Vec<HighPrecisionReal>>,
    wp: usize,
) -> Result<(Vec<HighPrecisionReal>, HighPrecisionReal), QncError> {
    let n = a.len();
    let one = HighPrecisionReal::one(wp);
    let two = HighPrecisionReal::from_u64(2, wp);

    let fro = {
        let mut s = HighPrecisionReal::zero(wp);
        for row in &a {
            for e in row {
                s = s.add(&e.mul(e));
            }
        }
        s.sqrt().expect("sum of squares")
    };
    let off = |a: &Vec<Vec<HighPrecisionReal>>| {
        let mut s = HighPrecisionReal::zero(wp);
        for (i, row) in a.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if i != j {
                    s = s.add(&e.mul(e));
                }
            }
        }
        s.sqrt().expect("sum of squares")
    };

    if fro.is_zero() || n == 1 {
        let diag = (0..n).map(|i| a[i][i].clone()).collect();
        return Ok((diag, HighPrecisionReal::zero(wp)));
    }

    let target = fro.mul(&HighPrecisionReal::pow2(-((wp as i32) - 24), wp));
    // rotations below this threshold cannot move the off norm above target
    let skip = target.div(&HighPrecisionReal::from_u64((n * n) as u64, wp));

    for _sweep in 0..MAX_SWEEPS {
        let residual = off(&a);
        if residual <= target {
            let diag = (0..n).map(|i| a[i][i].clone()).collect();
            return Ok((diag, residual));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q].clone();
                if apq.abs() <= skip {
                    continue;
                }
                let app = a[p][p].clone();
                let aqq = a[q][q].clone();
                // tangent of the annihilating rotation
                let tau = aqq.sub(&app).div(&two.mul(&apq));
                let t = {
                    let root = one.add(&tau.mul(&tau)).sqrt().expect("1 + tau^2 > 0");
                    let denom = tau.abs().add(&root);
                    let t_abs = denom.recip();
                    if tau.is_negative() {
                        t_abs.neg()
                    } else {
                        t_abs
                    }
                };
                let c = one.add(&t.mul(&t)).sqrt().expect("positive").recip();
                let s = t.mul(&c);

                // diagonal updates are exact for the Jacobi choice
                let tapq = t.mul(&apq);
                a[p][p] = app.sub(&tapq);
                a[q][q] = aqq.add(&tapq);
                a[p][q] = HighPrecisionReal::zero(wp);
                a[q][p] = HighPrecisionReal::zero(wp);
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k][p].clone();
                    let akq = a[k][q].clone();
                    let new_kp = c.mul(&akp).sub(&s.mul(&akq));
                    let new_kq = s.mul(&akp).add(&c.mul(&akq));
                    a[k][p] = new_kp.clone();
                    a[p][k] = new_kp;
                    a[k][q] = new_kq.clone();
                    a[q][k] = new_kq;
                }
            }
        }
    }
    Err(QncError::SolverFailure(format!(
        "Jacobi eigensolve did not converge within {MAX_SWEEPS} sweeps (n = {n})"
    )))
}

/// Singular values of a truncation.
///
/// For real (standard/modified) truncations these are the square roots of
/// the eigenvalues of `R^T R = -R^2`; for weighted truncations the real
/// embedding of the Hermitian `i R` is solved and the signed eigenvalues
/// kept. The solve runs at twice the matrix precision so that pair
/// splittings certify the skew structure rather than solver noise.
pub fn singular_values(m: &QncMatrix) -> Result<SpectrumResult, QncError> {
    let bits = m.precision_bits();
    let wp = (2 * bits).max(256);
    let n = m.n();

    match m.entries() {
        MatrixEntries::Real(_) => {
            // lift entries to the working precision so the products below
            // are exact and S is exactly R^T R of the stored matrix
            let r: Vec<Vec<HighPrecisionReal>> = (0..n)
                .map(|i| (0..n).map(|j| m.real_entry(i, j).with_precision(wp)).collect())
                .collect();
            // S = R^T R, upper triangle computed once
            let mut s = vec![vec![HighPrecisionReal::zero(wp); n]; n];
            for i in 0..n {
                for j in i..n {
                    let mut acc = HighPrecisionReal::zero(wp);
                    for k in 0..n {
                        acc = acc.add(&r[k][i].mul(&r[k][j]));
                    }
                    s[i][j] = acc.clone();
                    s[j][i] = acc;
                }
            }
            let fro = frobenius(&s, wp);
            let (diag, residual) = jacobi_symmetric(s, wp)?;
            let tol_sq = residual.add(&fro.mul(&HighPrecisionReal::pow2(-((wp as i32) - 24), wp)));
            let solver_tolerance = tol_sq.to_f64().max(0.0).sqrt();

            let mut lambdas_hp: Vec<HighPrecisionReal> = diag
                .into_iter()
                .map(|e| {
                    if e.is_negative() {
                        HighPrecisionReal::zero(wp)
                    } else {
                        e.sqrt().expect("nonnegative")
                    }
                })
                .collect();
            lambdas_hp.sort_by(|a, b| b.partial_cmp(a).expect("no NaNs in spectrum"));

            let (pairing_defect, signed) = pair_real_spectrum(&lambdas_hp, solver_tolerance, n);
            Ok(SpectrumResult {
                lambdas: lambdas_hp.iter().map(|l| l.to_f64()).collect(),
                signed_imag: signed,
                pairing_defect,
                source_dim: n,
                solver_tolerance,
            })
        }
        MatrixEntries::Complex(entries) => {
            // H = i R is Hermitian: Re H = -Im R (symmetric), Im H = Re R
            // (skew). Embed as the real symmetric 2n x 2n
            // [[Re H, -Im H], [Im H, Re H]]; eigenvalues double.
            let mut e2 = vec![vec![HighPrecisionReal::zero(wp); 2 * n]; 2 * n];
            for i in 0..n {
                for j in 0..n {
                    let z = &entries[i * n + j];
                    let re_h = z.im.neg();
                    let im_h = z.re.clone();
                    e2[i][j] = re_h.clone();
                    e2[n + i][n + j] = re_h;
                    e2[i][n + j] = im_h.neg();
                    e2[n + i][j] = im_h;
                }
            }
            let fro = frobenius(&e2, wp);
            let (diag, residual) = jacobi_symmetric(e2, wp)?;
            let tol = residual
                .add(&fro.mul(&HighPrecisionReal::pow2(-((wp as i32) - 24), wp)))
                .to_f64();
            let solver_tolerance = tol.max(0.0);

            // eigenvalues of H, each appearing twice
            let mut mu: Vec<HighPrecisionReal> = diag;
            mu.sort_by(|a, b| b.partial_cmp(a).expect("no NaNs in spectrum"));
            let mut defect = 0.0f64;
            let floor = 10.0 * solver_tolerance;
            let mut eigen_h = Vec::with_capacity(n);
            for pair in mu.chunks(2) {
                let a = pair[0].to_f64();
                let b = pair.get(1).map(|v| v.to_f64()).unwrap_or(a);
                let scale = a.abs().max(b.abs());
                if scale > floor {
                    defect = defect.max((a - b).abs() / scale);
                }
                eigen_h.push(0.5 * (a + b));
            }
            // spectrum of R = -i * spectrum(H): signed imaginary part -mu
            let mut signed: Vec<f64> = eigen_h.iter().map(|v| -v).collect();
            signed.sort_by(|x, y| {
                y.abs()
                    .partial_cmp(&x.abs())
                    .expect("finite")
                    .then(y.partial_cmp(x).expect("finite"))
            });
            let lambdas: Vec<f64> = {
                let mut l: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
                l.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
                l
            };
            Ok(SpectrumResult {
                lambdas,
                signed_imag: signed,
                pairing_defect: defect,
                source_dim: n,
                solver_tolerance,
            })
        }
    }
}

fn frobenius(a: &[Vec<HighPrecisionReal>], wp: usize) -> HighPrecisionReal {
    let mut s = HighPrecisionReal::zero(wp);
    for row in a {
        for e in row {
            s = s.add(&e.mul(e));
        }
    }
    s.sqrt().expect("sum of squares")
}

/// Pair a descending real-skew spectrum, measuring the worst relative
/// split above the floor, and emit the signed eigenvalue list. Odd
/// dimensions carry one structural zero (the smallest value).
fn pair_real_spectrum(
    lambdas: &[HighPrecisionReal],
    solver_tolerance: f64,
    n: usize,
) -> (f64, Vec<f64>) {
    let floor = 10.0 * solver_tolerance;
    let mut defect = 0.0f64;
    let mut signed = Vec::with_capacity(n);
    let paired = if n % 2 == 1 { n - 1 } else { n };
    for k in (0..paired).step_by(2) {
        let a = lambdas[k].to_f64();
        let b = lambdas[k + 1].to_f64();
        if b > floor {
            defect = defect.max(a / b - 1.0);
        }
        signed.push(b);
        signed.push(-a);
    }
    if n % 2 == 1 {
        signed.push(lambdas[n - 1].to_f64());
    }
    // order by modulus descending, positive first within a pair
    signed.sort_by(|x, y| {
        y.abs()
            .partial_cmp(&x.abs())
            .expect("finite")
            .then(y.partial_cmp(x).expect("finite"))
    });
    (defect, signed)
}

/// Fredholm determinant `det(I - wR)` as the product over the spectrum,
/// `prod_j (1 - w * i * mu_j)`; for real skew truncations the paired
/// factors collapse to `prod (1 + w^2 lambda_j^2)`.
pub fn det_from_spectrum(s: &SpectrumResult, w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for &mu in &s.signed_imag {
        acc *= Complex64::new(1.0, 0.0) - w * Complex64::new(0.0, mu);
    }
    acc
}

/// Regularized determinant `det2(I - wR) = prod_j (1 - w mu_j) e^(w mu_j)`
/// over the signed eigenvalues `mu_j = i * signed_imag[j]`, evaluated
/// factor by factor. For skew sources the exponential factors cancel in
/// conjugate pairs, making this equal to [`det_from_spectrum`] whenever the
/// trace-class product exists.
pub fn det2_from_spectrum(s: &SpectrumResult, w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for &mu in &s.signed_imag {
        let eig = Complex64::new(0.0, mu);
        acc *= (Complex64::new(1.0, 0.0) - w * eig) * (w * eig).exp();
    }
    acc
}

/// Coefficients of `det(I - wR)` as a polynomial in `w`.
#[derive(Debug, Clone)]
pub struct DeterminantSeries {
    /// `c_0 .. c_K`; real sources produce exactly real coefficients.
    pub coeffs: Vec<Complex64>,
    pub order: usize,
}

impl DeterminantSeries {
    /// Evaluate the polynomial at `w` (Horner).
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc
    }
}

/// Determinant coefficients through exterior-power traces: power sums
/// `p_m = tr(R^m)` feed Newton's identities for the elementary symmetric
/// functions of the eigenvalues, and `c_k = (-1)^k e_k`. With `order = n`
/// this is the exact characteristic polynomial of the truncation.
///
/// The recursion cancels catastrophically in binary64 (high-order
/// coefficients are products of widely-separated eigenvalue scales), so
/// power sums and the recursion run in high precision at twice the matrix
/// precision; only the final coefficients are downcast. Cost is
/// `O(order * n^3)` high-precision operations.
pub fn det_series_coeffs(m: &QncMatrix, order: usize) -> Result<DeterminantSeries, QncError> {
    let n = m.n();
    if order > n {
        return Err(QncError::Range(format!(
            "series order {order} exceeds the truncation dimension {n}"
        )));
    }
    let wp = (2 * m.precision_bits()).max(256);
    let a: Vec<HpComplex> = (0..n * n)
        .map(|idx| {
            let z = m.complex_entry(idx / n, idx % n);
            HpComplex::new(z.re.with_precision(wp), z.im.with_precision(wp))
        })
        .collect();

    // power sums tr(A^m), m = 1..order
    let mut power_sums = Vec::with_capacity(order);
    let mut a_pow = a.clone();
    for step in 0..order {
        let mut tr = HpComplex::zero(wp);
        for i in 0..n {
            tr = tr.add(&a_pow[i * n + i]);
        }
        power_sums.push(tr);
        if step + 1 < order {
            a_pow = hp_matmul(&a_pow, &a, n, wp);
        }
    }
    // Newton's identities: k e_k = sum_{i=1..k} (-1)^(i-1) e_(k-i) p_i
    let mut e = vec![HpComplex::zero(wp); order + 1];
    e[0] = HpComplex::from_real(HighPrecisionReal::one(wp));
    for k in 1..=order {
        let mut acc = HpComplex::zero(wp);
        let mut negate = false;
        for i in 1..=k {
            let term = e[k - i].mul(&power_sums[i - 1]);
            acc = if negate { acc.sub(&term) } else { acc.add(&term) };
            negate = !negate;
        }
        let k_inv = HighPrecisionReal::from_u64(k as u64, wp).recip();
        e[k] = acc.scale(&k_inv);
    }
    let coeffs = e
        .iter()
        .enumerate()
        .map(|(k, ek)| {
            let z = Complex64::new(ek.re.to_f64(), ek.im.to_f64());
            if k % 2 == 0 {
                z
            } else {
                -z
            }
        })
        .collect();
    Ok(DeterminantSeries { coeffs, order })
}

fn hp_matmul(a: &[HpComplex], b: &[HpComplex], n: usize, wp: usize) -> Vec<HpComplex> {
    let mut out = vec![HpComplex::zero(wp); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = HpComplex::zero(wp);
            for k in 0..n {
                acc = acc.add(&a[i * n + k].mul(&b[k * n + j]));
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Truncation downcast to a complex binary64 matrix (for the polynomial
/// route and for dense-determinant cross-checks).
pub fn downcast_complex(m: &QncMatrix) -> DMatrix<Complex64> {
    let n = m.n();
    DMatrix::from_fn(n, n, |i, j| {
        let z = m.complex_entry(i, j);
        Complex64::new(z.re.to_f64(), z.im.to_f64())
    })
}

/// Spectrum export: CSV `j,lambda_j`, 1-based.
pub fn spectrum_csv(s: &SpectrumResult) -> String {
    let mut out = String::from("j,lambda_j\n");
    for (j, l) in s.lambdas.iter().enumerate() {
        out.push_str(&format!("{},{:e}\n", j + 1, l));
    }
    out
}

/// Determinant sampling export: CSV `re_w,im_w,re_det,im_det`.
pub fn det_grid_csv(samples: &[(Complex64, Complex64)]) -> String {
    let mut out = String::from("re_w,im_w,re_det,im_det\n");
    for (w, d) in samples {
        out.push_str(&format!("{:e},{:e},{:e},{:e}\n", w.re, w.im, d.re, d.im));
    }
    out
}
