//! Polynomial and rational interpolation over a prime field.
//!
//! - [`interpolate_poly`]: Newton-form interpolation through `m` points.
//! - [`interpolate_rational`]: Cauchy interpolation of `Num/Den` under a
//!   degree budget. The production route interpolates the data polynomial `U`
//!   and runs the extended Euclidean algorithm on `(M, U)` where `M` vanishes on
//!   every abscissa; [`interpolate_rational_dense`] solves the same problem by
//!   Gaussian elimination and serves as an independent cross-check.
//! - [`DividedDiffTable`] and [`leibniz_degree_probe`]: the degree test that
//!   decides whether `u(x_k) / G(x_k)` fits a low-degree polynomial without
//!   interpolating it, using the product rule for divided differences.

use std::collections::HashSet;

use thiserror::Error;

use crate::field::{batch_inverse, Polynomial, PrimeField};

/// Errors raised by interpolation routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    /// Two points share an abscissa.
    #[error("duplicate abscissa")]
    DuplicateAbscissa,
    /// No points were supplied.
    #[error("no interpolation points")]
    Empty,
    /// Fewer points than the degree budget requires.
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    /// No rational function within the budget passes through every point.
    #[error("no rational function within the degree budget fits the points")]
    Inconsistent,
    /// A divided-difference table was built over different abscissas.
    #[error("abscissas of the operands differ")]
    AbscissaMismatch,
    /// A candidate denominator vanishes at an abscissa.
    #[error("candidate polynomial vanishes at an abscissa")]
    SingularAbscissa,
    /// The extrapolation split is out of range.
    #[error("invalid number of free points")]
    InvalidSplit,
}

fn check_distinct<F: PrimeField>(xs: &[F]) -> Result<(), InterpError> {
    let mut seen = HashSet::with_capacity(xs.len());
    if xs.iter().all(|x| seen.insert(*x)) {
        Ok(())
    } else {
        Err(InterpError::DuplicateAbscissa)
    }
}

/// A sequence of points `(x_k, y_k)` with pairwise distinct abscissas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPointSet<F> {
    xs: Vec<F>,
    ys: Vec<F>,
}

impl<F: PrimeField> EvalPointSet<F> {
    /// Builds a point set, rejecting repeated abscissas.
    pub fn new(points: Vec<(F, F)>) -> Result<Self, InterpError> {
        let (xs, ys) = points.into_iter().unzip();
        Self::from_parts(xs, ys)
    }

    /// Builds a point set from parallel abscissa and ordinate vectors.
    ///
    /// # Panics
    /// Panics if the two vectors differ in length.
    pub fn from_parts(xs: Vec<F>, ys: Vec<F>) -> Result<Self, InterpError> {
        assert_eq!(xs.len(), ys.len(), "abscissa and ordinate counts differ");
        check_distinct(&xs)?;
        Ok(Self { xs, ys })
    }

    /// Samples `f` at each abscissa.
    pub fn sample(xs: Vec<F>, f: impl Fn(F) -> F) -> Result<Self, InterpError> {
        let ys = xs.iter().map(|&x| f(x)).collect();
        Self::from_parts(xs, ys)
    }

    /// Abscissas in order.
    pub fn xs(&self) -> &[F] {
        &self.xs
    }

    /// Ordinates in order.
    pub fn ys(&self) -> &[F] {
        &self.ys
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// True when there are no points.
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

/// A reduced rational function `num / den` with monic `den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction<F: PrimeField> {
    /// Numerator.
    pub num: Polynomial<F>,
    /// Monic denominator.
    pub den: Polynomial<F>,
}

impl<F: PrimeField> RationalFunction<F> {
    /// Evaluates at `x`, or `None` at a pole.
    pub fn eval(&self, x: F) -> Option<F> {
        self.den.eval(x).inverse().map(|inv| self.num.eval(x) * inv)
    }
}

/// Newton coefficients `f[x_0], f[x_0,x_1], ..., f[x_0..x_{m-1}]`.
///
/// Abscissas must be distinct.
pub fn newton_coefficients<F: PrimeField>(xs: &[F], ys: &[F]) -> Vec<F> {
    let m = xs.len();
    let mut c = ys.to_vec();
    for r in 1..m {
        let gaps: Vec<F> = (r..m).map(|k| xs[k] - xs[k - r]).collect();
        let inv = batch_inverse(&gaps).expect("abscissas are distinct");
        for k in (r..m).rev() {
            c[k] = (c[k] - c[k - 1]) * inv[k - r];
        }
    }
    c
}

/// The unique polynomial of degree at most `m - 1` through the `m` points.
pub fn interpolate_poly<F: PrimeField>(pts: &EvalPointSet<F>) -> Result<Polynomial<F>, InterpError> {
    if pts.is_empty() {
        return Err(InterpError::Empty);
    }
    let c = newton_coefficients(&pts.xs, &pts.ys);
    // Horner on the Newton basis: p = c0 + (x - x0)(c1 + (x - x1)(c2 + ...)).
    let m = c.len();
    let mut acc = vec![c[m - 1]];
    for k in (0..m - 1).rev() {
        let xk = pts.xs[k];
        let mut next = vec![F::zero(); acc.len() + 1];
        for (i, &a) in acc.iter().enumerate() {
            next[i + 1] += a;
            next[i] -= a * xk;
        }
        next[0] += c[k];
        acc = next;
    }
    Ok(Polynomial::new(acc))
}

/// The top divided difference `f[x_1, ..., x_m]`.
///
/// It equals the coefficient of `x^(m-1)` in the interpolant, so it vanishes
/// exactly when the points fit a polynomial of degree at most `m - 2`.
pub fn top_divided_difference<F: PrimeField>(pts: &EvalPointSet<F>) -> Result<F, InterpError> {
    if pts.is_empty() {
        return Err(InterpError::Empty);
    }
    Ok(*newton_coefficients(&pts.xs, &pts.ys).last().unwrap())
}

/// Full triangle of divided differences over a fixed abscissa sequence.
///
/// `diffs[r][k] = f[x_k, ..., x_{k+r}]`, so `diffs[0]` holds the sampled values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DividedDiffTable<F> {
    xs: Vec<F>,
    diffs: Vec<Vec<F>>,
}

impl<F: PrimeField> DividedDiffTable<F> {
    /// Builds the table for the given points.
    pub fn build(pts: &EvalPointSet<F>) -> Self {
        let xs = pts.xs.clone();
        let m = xs.len();
        let mut diffs = Vec::with_capacity(m);
        diffs.push(pts.ys.clone());
        for r in 1..m {
            let prev: &Vec<F> = &diffs[r - 1];
            let gaps: Vec<F> = (0..m - r).map(|k| xs[k + r] - xs[k]).collect();
            let inv = batch_inverse(&gaps).expect("abscissas are distinct");
            let row = (0..m - r).map(|k| (prev[k + 1] - prev[k]) * inv[k]).collect();
            diffs.push(row);
        }
        Self { xs, diffs }
    }

    /// Abscissas the table was built over.
    pub fn xs(&self) -> &[F] {
        &self.xs
    }

    /// Number of abscissas.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// True for a table over zero points.
    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// `f[x_from, ..., x_to]` (inclusive, zero-based).
    pub fn span(&self, from: usize, to: usize) -> F {
        self.diffs[to - from][from]
    }

    /// Suffix difference `f[x_k, ..., x_{m-1}]`.
    pub fn suffix(&self, k: usize) -> F {
        self.span(k, self.xs.len() - 1)
    }

    /// Raw row `r` of the triangle.
    pub fn row(&self, r: usize) -> &[F] {
        &self.diffs[r]
    }
}

/// Divided difference of the pointwise product `u * g` over the first `j`
/// abscissas, from the Newton coefficients of `u` and the table of `g`:
/// `(ug)[x_0..x_{j-1}] = sum_k u[x_0..x_k] g[x_k..x_{j-1}]`.
pub fn leibniz_prefix_probe<F: PrimeField>(u_newton: &[F], g: &DividedDiffTable<F>, j: usize) -> F {
    (0..j).map(|k| u_newton[k] * g.span(k, j - 1)).sum()
}

/// Top divided difference of `u(x_k) * g(x_k)` computed from the Newton
/// coefficients of `u` and a precomputed table for `g`.
pub fn leibniz_degree_probe<F: PrimeField>(
    u_pts: &EvalPointSet<F>,
    g_table: &DividedDiffTable<F>,
) -> Result<F, InterpError> {
    if u_pts.xs != g_table.xs {
        return Err(InterpError::AbscissaMismatch);
    }
    if u_pts.is_empty() {
        return Err(InterpError::Empty);
    }
    let u = newton_coefficients(&u_pts.xs, &u_pts.ys);
    Ok(leibniz_prefix_probe(&u, g_table, u.len()))
}

/// For each candidate `P_i`, the divided-difference table of `k -> 1 / P_i(x_k)`.
pub fn precompute_inverse_diff_tables<F: PrimeField>(
    candidates: &[Polynomial<F>],
    xs: &[F],
) -> Result<Vec<DividedDiffTable<F>>, InterpError> {
    check_distinct(xs)?;
    candidates
        .iter()
        .map(|p| {
            let vals: Vec<F> = xs.iter().map(|&x| p.eval(x)).collect();
            let inv = batch_inverse(&vals).ok_or(InterpError::SingularAbscissa)?;
            Ok(DividedDiffTable::build(&EvalPointSet { xs: xs.to_vec(), ys: inv }))
        })
        .collect()
}

/// Abscissas with the precomputation shared by every interpolation over them:
/// the vanishing polynomial `M(x) = prod (x - x_k)` and the barycentric
/// weights `1 / M'(x_k)`.
#[derive(Debug, Clone)]
pub struct EvalDomain<F: PrimeField> {
    xs: Vec<F>,
    master: Polynomial<F>,
    weights: Vec<F>,
}

impl<F: PrimeField> EvalDomain<F> {
    /// Precomputes the domain; abscissas must be distinct and non-empty.
    pub fn new(xs: Vec<F>) -> Result<Self, InterpError> {
        if xs.is_empty() {
            return Err(InterpError::Empty);
        }
        let master = Polynomial::from_roots(&xs).map_err(|_| InterpError::DuplicateAbscissa)?;
        let deriv = Polynomial::new(
            master.coeffs().iter().enumerate().skip(1).map(|(i, &c)| c * F::from_u64(i as u64)).collect(),
        );
        let at_nodes: Vec<F> = xs.iter().map(|&x| deriv.eval(x)).collect();
        let weights = batch_inverse(&at_nodes).ok_or(InterpError::DuplicateAbscissa)?;
        Ok(Self { xs, master, weights })
    }

    /// Abscissas in order.
    pub fn xs(&self) -> &[F] {
        &self.xs
    }

    /// Number of abscissas.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    /// Always false; a domain has at least one abscissa.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The vanishing polynomial of the domain.
    pub fn master(&self) -> &Polynomial<F> {
        &self.master
    }

    /// Lagrange interpolation of the given ordinates over this domain.
    ///
    /// # Panics
    /// Panics if `ys.len()` differs from the domain size.
    pub fn interpolate(&self, ys: &[F]) -> Polynomial<F> {
        assert_eq!(ys.len(), self.xs.len(), "ordinate count differs from domain size");
        let m = self.xs.len();
        let mc = self.master.coeffs();
        let mut acc = vec![F::zero(); m];
        for ((&y, &w), &xk) in ys.iter().zip(&self.weights).zip(&self.xs) {
            let scale = y * w;
            if scale.is_zero() {
                continue;
            }
            // Synthetic division of M by (x - x_k), accumulated on the fly.
            let mut carry = F::zero();
            for i in (1..=m).rev() {
                carry = mc[i] + carry * xk;
                acc[i - 1] += scale * carry;
            }
        }
        Polynomial::new(acc)
    }
}

/// Reduces `num/den` by their gcd, normalizes `den` to be monic and checks
/// the degree budget and every point.
fn finish_rational<F: PrimeField>(
    xs: &[F],
    ys: &[F],
    num: Polynomial<F>,
    den: Polynomial<F>,
    deg_num: usize,
    deg_den: usize,
) -> Result<RationalFunction<F>, InterpError> {
    if den.is_zero() {
        return Err(InterpError::Inconsistent);
    }
    let g = num.gcd(&den).map_err(|_| InterpError::Inconsistent)?;
    let (num, _) = num.divrem(&g).map_err(|_| InterpError::Inconsistent)?;
    let (den, _) = den.divrem(&g).map_err(|_| InterpError::Inconsistent)?;
    let lead_inv = den.leading().inverse().ok_or(InterpError::Inconsistent)?;
    let (num, den) = (num.scale(lead_inv), den.scale(lead_inv));
    if num.degree().is_some_and(|d| d > deg_num) || den.degree().is_some_and(|d| d > deg_den) {
        return Err(InterpError::Inconsistent);
    }
    for (&x, &y) in xs.iter().zip(ys) {
        let dv = den.eval(x);
        if dv.is_zero() || num.eval(x) != y * dv {
            return Err(InterpError::Inconsistent);
        }
    }
    Ok(RationalFunction { num, den })
}

fn check_budget(m: usize, deg_num: usize, deg_den: usize) -> Result<(), InterpError> {
    let needed = deg_num + deg_den + 1;
    if m < needed {
        return Err(InterpError::InsufficientPoints { needed, got: m });
    }
    Ok(())
}

/// Cauchy interpolation: finds reduced `Num/Den` with `deg Num <= deg_num`,
/// `deg Den <= deg_den`, `Den` monic and `Num(x_k) = y_k Den(x_k)`,
/// `Den(x_k) != 0` at every supplied point (surplus points act as checks).
pub fn interpolate_rational<F: PrimeField>(
    pts: &EvalPointSet<F>,
    deg_num: usize,
    deg_den: usize,
) -> Result<RationalFunction<F>, InterpError> {
    check_budget(pts.len(), deg_num, deg_den)?;
    let domain = EvalDomain::new(pts.xs.clone())?;
    interpolate_rational_on(&domain, &pts.ys, deg_num, deg_den)
}

/// [`interpolate_rational`] over a precomputed domain.
///
/// Interpolates `U` through the points, then runs the extended Euclidean
/// algorithm on `(M, U)` and stops at the first remainder of degree at most
/// `deg_num`; its cofactor is the only candidate denominator.
pub fn interpolate_rational_on<F: PrimeField>(
    domain: &EvalDomain<F>,
    ys: &[F],
    deg_num: usize,
    deg_den: usize,
) -> Result<RationalFunction<F>, InterpError> {
    check_budget(domain.len(), deg_num, deg_den)?;
    let u = domain.interpolate(ys);
    let (mut r0, mut r1) = (domain.master.clone(), u);
    let (mut t0, mut t1) = (Polynomial::zero(), Polynomial::one());
    while r1.degree().is_some_and(|d| d > deg_num) {
        let (q, r) = r0.divrem(&r1).expect("r1 is non-zero inside the loop");
        let t2 = &t0 - &(&q * &t1);
        (r0, r1) = (r1, r);
        (t0, t1) = (t1, t2);
    }
    if t1.degree().is_some_and(|d| d > deg_den) {
        return Err(InterpError::Inconsistent);
    }
    finish_rational(&domain.xs, ys, r1, t1, deg_num, deg_den)
}

/// Cauchy interpolation by Gaussian elimination on the homogeneous system
/// `Num(x_k) - y_k Den(x_k) = 0`; any non-zero kernel vector is reduced by
/// its gcd. Cubic in the number of points.
pub fn interpolate_rational_dense<F: PrimeField>(
    pts: &EvalPointSet<F>,
    deg_num: usize,
    deg_den: usize,
) -> Result<RationalFunction<F>, InterpError> {
    check_budget(pts.len(), deg_num, deg_den)?;
    let (a, b) = (deg_num + 1, deg_den + 1);
    let cols = a + b;
    let mut rows: Vec<Vec<F>> = pts
        .xs
        .iter()
        .zip(&pts.ys)
        .map(|(&x, &y)| {
            let mut row = Vec::with_capacity(cols);
            let mut pw = F::one();
            for _ in 0..a {
                row.push(pw);
                pw *= x;
            }
            let mut pw = F::one();
            for _ in 0..b {
                row.push(-(y * pw));
                pw *= x;
            }
            row
        })
        .collect();
    let kernel = kernel_vector(&mut rows, cols).ok_or(InterpError::Inconsistent)?;
    let num = Polynomial::new(kernel[..a].to_vec());
    let den = Polynomial::new(kernel[a..].to_vec());
    finish_rational(&pts.xs, &pts.ys, num, den, deg_num, deg_den)
}

/// Reduces `rows` to row echelon form and returns one non-zero kernel
/// vector, or `None` if the kernel is trivial.
fn kernel_vector<F: PrimeField>(rows: &mut [Vec<F>], cols: usize) -> Option<Vec<F>> {
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inverse().expect("pivot is non-zero");
        for v in rows[rank].iter_mut() {
            *v *= inv;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col];
                for (v, &p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    let free = (0..cols).find(|c| !pivot_cols.contains(c))?;
    let mut v = vec![F::zero(); cols];
    v[free] = F::one();
    for (r, &pc) in pivot_cols.iter().enumerate() {
        v[pc] = -rows[r][free];
    }
    Some(v)
}

/// Extends values of a degree-`(n_free - 1)` polynomial, given at the first
/// `n_free` abscissas, to the remaining abscissas of the sequence.
///
/// Sampling uniform values at the first `n_free` points and extending them is
/// distributed exactly like evaluating a uniformly random polynomial of
/// degree below `n_free`, at a fraction of the cost.
#[derive(Debug, Clone)]
pub struct Extrapolator<F> {
    n_free: usize,
    total: usize,
    /// `lambda[e][k]`: weight of free value `k` in extra point `e`.
    lambda: Vec<Vec<F>>,
}

impl<F: PrimeField> Extrapolator<F> {
    /// Precomputes Lagrange weights from the first `n_free` abscissas to the rest.
    pub fn new(xs: &[F], n_free: usize) -> Result<Self, InterpError> {
        if n_free == 0 || n_free > xs.len() {
            return Err(InterpError::InvalidSplit);
        }
        check_distinct(xs)?;
        let free = &xs[..n_free];
        let denoms: Vec<F> =
            (0..n_free).map(|k| (0..n_free).filter(|&j| j != k).map(|j| free[k] - free[j]).product()).collect();
        let w = batch_inverse(&denoms).expect("abscissas are distinct");
        let lambda = xs[n_free..]
            .iter()
            .map(|&e| {
                let gaps: Vec<F> = free.iter().map(|&xk| e - xk).collect();
                let inv = batch_inverse(&gaps).expect("abscissas are distinct");
                let full: F = gaps.iter().copied().product();
                (0..n_free).map(|k| full * w[k] * inv[k]).collect()
            })
            .collect();
        Ok(Self { n_free, total: xs.len(), lambda })
    }

    /// Number of free values expected by [`Extrapolator::extend`].
    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Returns the values at all abscissas, starting with `free` itself.
    ///
    /// # Panics
    /// Panics if `free.len()` differs from `n_free`.
    pub fn extend(&self, free: &[F]) -> Vec<F> {
        assert_eq!(free.len(), self.n_free, "wrong number of free values");
        let mut out = Vec::with_capacity(self.total);
        out.extend_from_slice(free);
        for row in &self.lambda {
            out.push(row.iter().zip(free).map(|(&l, &v)| l * v).sum());
        }
        out
    }
}
