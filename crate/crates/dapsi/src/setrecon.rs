//! One-sided set reconciliation.
//!
//! Alice holds `S_a` with vanishing polynomial `P`, Bob holds `S_b` with
//! vanishing polynomial `Q`, both of size `l`. Bob samples random `R1, R2` of
//! degree `l`; one OLE per abscissa `x_k` hands Alice
//! `W(x_k) = R1(x_k) P(x_k) + R2(x_k) Q(x_k)` and nothing else. Writing
//! `G = gcd(P, Q)`, the values `W / P` come from the rational function
//! `(R1 P~ + R2 Q~) / P~` with `P~ = P / G`, whose denominator is exactly the
//! vanishing polynomial of `S_a \ S_b`. Alice recovers it by rational
//! interpolation whenever `|S_a \ S_b| <= d`.
//!
//! Variants:
//! - plain and blinded ([`one_sided_set_recon`], [`one_sided_set_recon_blinded`])
//!   at `l + 2d + 1` points;
//! - exponential search ([`one_sided_set_recon_exp`]) at `l + d + 2` points,
//!   which interpolates up to `d / 2` and searches candidate differences
//!   beyond that with divided-difference probes;
//! - the sub-sampled matcher ([`CandidateScan::sample`]) that decides whether
//!   at least `t` of `T` elements agree;
//! - [`enumeration_attack`], the enumeration attack showing why the point count
//!   must stay at `l + 2d + 1` once the difference exceeds `d`.

use std::collections::HashSet;

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::bits::BitVector;
use crate::crypto::{prf_field, CryptoError, PrfKey};
use crate::field::{Polynomial, PrimeField, Zero};
use crate::interp::{
    leibniz_prefix_probe, newton_coefficients, precompute_inverse_diff_tables, DividedDiffTable, EvalDomain,
    Extrapolator, InterpError,
};

/// Default bound on the vector length accepted by [`enumeration_attack`].
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// Errors raised by set reconciliation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconError {
    /// Interpolation precondition failure (not the in-band threshold signal).
    #[error(transparent)]
    Interp(#[from] InterpError),
    /// Cryptographic layer failure.
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    /// A difference element is not in Alice's mapped set.
    #[error("element is not in the mapped set")]
    ForeignElement,
    /// The candidate search is larger than the configured cap.
    #[error("candidate search needs {candidates} probes, cap is {cap}")]
    ComputeCapExceeded { candidates: u128, cap: u128 },
    /// The attack enumeration is larger than the configured cap.
    #[error("vector length {ell} exceeds the enumeration cap {cap}")]
    EnumerationTooLarge { ell: usize, cap: usize },
    /// Parameters violate a documented constraint.
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
}

/// Evaluation abscissas `2l + 2, 2l + 3, ...`, disjoint from every element
/// produced by [`map_bitvector`] on vectors of length `l`.
pub fn eval_points<F: PrimeField>(ell: usize, count: usize) -> Vec<F> {
    (0..count as u64).map(|i| F::from_u64(2 * ell as u64 + 2 + i)).collect()
}

/// Set size, difference threshold and abscissas of one reconciliation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconParams<F> {
    /// Set size `l`.
    pub set_size: usize,
    /// Difference threshold `d`.
    pub diff_threshold: usize,
    /// Abscissas `X`.
    pub points: Vec<F>,
}

impl<F: PrimeField> ReconParams<F> {
    fn check(ell: usize, d: usize) -> Result<(), ReconError> {
        if ell == 0 || d >= ell {
            return Err(ReconError::InvalidParams("need 0 <= d < l"));
        }
        Ok(())
    }

    /// Parameters for the plain and blinded variants: `l + 2d + 1` points.
    pub fn plain(ell: usize, d: usize) -> Result<Self, ReconError> {
        Self::check(ell, d)?;
        Ok(Self { set_size: ell, diff_threshold: d, points: eval_points(ell, ell + 2 * d + 1) })
    }

    /// Parameters for the exponential-search variant: `l + d + 2` points.
    pub fn exp(ell: usize, d: usize) -> Result<Self, ReconError> {
        Self::check(ell, d)?;
        Ok(Self { set_size: ell, diff_threshold: d, points: eval_points(ell, ell + d + 2) })
    }
}

/// A set of distinct field elements, in insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedSet<F> {
    elems: Vec<F>,
}

impl<F: PrimeField> MappedSet<F> {
    /// Builds a set, rejecting duplicates.
    pub fn new(elems: Vec<F>) -> Result<Self, ReconError> {
        let mut seen = HashSet::with_capacity(elems.len());
        if !elems.iter().all(|e| seen.insert(*e)) {
            return Err(ReconError::InvalidParams("duplicate set element"));
        }
        Ok(Self { elems })
    }

    /// Elements in order.
    pub fn elems(&self) -> &[F] {
        &self.elems
    }

    /// Set size.
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    /// True for the empty set.
    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// Membership test.
    pub fn contains(&self, x: &F) -> bool {
        self.elems.contains(x)
    }

    /// `prod (x - s)` over the set.
    pub fn vanishing_poly(&self) -> Polynomial<F> {
        Polynomial::from_roots(&self.elems).expect("set elements are distinct")
    }

    /// `prod (x_k - s)` over the set, for each abscissa.
    pub fn vanishing_evals(&self, xs: &[F]) -> Vec<F> {
        // Four independent product chains per pass keep the multiplier busy.
        let mut out = Vec::with_capacity(xs.len());
        for quad in xs.chunks(4) {
            let mut acc = [F::one(); 4];
            let mut x = [F::zero(); 4];
            x[..quad.len()].copy_from_slice(quad);
            for &s in &self.elems {
                for l in 0..4 {
                    acc[l] *= x[l] - s;
                }
            }
            out.extend_from_slice(&acc[..quad.len()]);
        }
        out
    }
}

/// Maps bit `m` (1-based) of `a` to the field element `2m + a[m]`.
pub fn map_bitvector<F: PrimeField>(a: &BitVector) -> MappedSet<F> {
    let elems = a.iter().enumerate().map(|(i, bit)| F::from_u64(2 * (i as u64 + 1) + u64::from(bit))).collect();
    MappedSet { elems }
}

/// Reconstructs Bob's vector from Alice's vector and `S_a \ S_b`.
pub fn recover_bitvector<F: PrimeField>(a: &BitVector, diff: &[F]) -> Result<BitVector, ReconError> {
    let mapped = map_bitvector::<F>(a);
    let mut b = a.clone();
    for e in diff {
        let idx = mapped.elems.iter().position(|x| x == e).ok_or(ReconError::ForeignElement)?;
        b.flip(idx);
    }
    Ok(b)
}

/// Result of a reconciliation attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReconOutcome<F> {
    /// `S_a \ S_b`, sorted.
    Diff(Vec<F>),
    /// The difference exceeds the threshold (or recovery failed).
    Bottom,
}

impl<F> ReconOutcome<F> {
    /// The recovered difference, if any.
    pub fn diff(&self) -> Option<&[F]> {
        match self {
            Self::Diff(d) => Some(d),
            Self::Bottom => None,
        }
    }

    /// True for [`ReconOutcome::Bottom`].
    pub fn is_bottom(&self) -> bool {
        matches!(self, Self::Bottom)
    }
}

/// What Alice observes in an unblinded run: `W(x_k)` at every abscissa.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconTranscript<F> {
    /// `W(x_k)`, possibly blinded.
    pub alice_evals: Vec<F>,
    /// Abscissas.
    pub points: Vec<F>,
    /// Whether a PRF blind was added to each value.
    pub blinded: bool,
}

/// Samples evaluations of uniformly random polynomials of a fixed degree
/// bound on a fixed abscissa sequence.
#[derive(Debug, Clone)]
pub struct RandomEvalSampler<F: PrimeField> {
    extrap: Extrapolator<F>,
}

impl<F: PrimeField> RandomEvalSampler<F> {
    /// Sampler for polynomials of degree at most `deg` over `xs`.
    pub fn new(xs: &[F], deg: usize) -> Result<Self, ReconError> {
        Ok(Self { extrap: Extrapolator::new(xs, (deg + 1).min(xs.len()))? })
    }

    /// Values of a fresh random polynomial at every abscissa.
    pub fn sample<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Vec<F> {
        let free: Vec<F> = (0..self.extrap.n_free()).map(|_| F::random(rng)).collect();
        self.extrap.extend(&free)
    }
}

/// Bob's OLE inputs: `u_k = R1(x_k)`, `v_k = R2(x_k) Q(x_k) + blind_k`.
pub fn bob_ole_inputs<F: PrimeField>(q_vals: &[F], r1: &[F], r2: &[F], blinds: Option<&[F]>) -> (Vec<F>, Vec<F>) {
    let u = r1.to_vec();
    let v = (0..q_vals.len()).map(|k| r2[k] * q_vals[k] + blinds.map_or(F::zero(), |b| b[k])).collect();
    (u, v)
}

/// The PRF blinds `phi(key, k)` for `k = 0..count`.
pub fn prf_blinds<F: PrimeField>(key: &PrfKey, count: usize) -> Vec<F> {
    (0..count as u64).map(|k| prf_field(key, k)).collect()
}

/// Alice's reusable state for recovering differences against one set.
#[derive(Debug, Clone)]
pub struct AliceRecon<F: PrimeField> {
    set: MappedSet<F>,
    p: Polynomial<F>,
    p_inv: Vec<F>,
    domain: EvalDomain<F>,
}

impl<F: PrimeField> AliceRecon<F> {
    /// Precomputes `P`, `1 / P(x_k)` and the interpolation domain.
    pub fn new(set: MappedSet<F>, xs: &[F]) -> Result<Self, ReconError> {
        let p = set.vanishing_poly();
        let p_vals = set.vanishing_evals(xs);
        let p_inv = crate::field::batch_inverse(&p_vals).ok_or(InterpError::SingularAbscissa)?;
        Ok(Self { set, p, p_inv, domain: EvalDomain::new(xs.to_vec())? })
    }

    /// `P(x_k)` at each abscissa, Alice's OLE input.
    pub fn ole_inputs(&self) -> Vec<F> {
        self.set.vanishing_evals(self.domain.xs())
    }

    /// The set this state was built for.
    pub fn set(&self) -> &MappedSet<F> {
        &self.set
    }

    /// Interpolates `z_k / P(x_k)` with budget `(deg_num, deg_den)`, checks
    /// that the denominator divides `P` and returns its roots.
    pub fn recover(&self, z: &[F], deg_num: usize, deg_den: usize) -> ReconOutcome<F> {
        let ys: Vec<F> = z.iter().zip(&self.p_inv).map(|(&a, &b)| a * b).collect();
        let Ok(rf) = crate::interp::interpolate_rational_on(&self.domain, &ys, deg_num, deg_den) else {
            return ReconOutcome::Bottom;
        };
        match self.p.divrem(&rf.den) {
            Ok((_, rem)) if rem.is_zero() => {}
            _ => return ReconOutcome::Bottom,
        }
        let mut roots: Vec<F> = self.set.elems.iter().copied().filter(|&s| rf.den.eval(s).is_zero()).collect();
        if Some(roots.len()) != rf.den.degree() {
            return ReconOutcome::Bottom;
        }
        roots.sort();
        ReconOutcome::Diff(roots)
    }
}

fn check_sizes<F: PrimeField>(
    alice: &MappedSet<F>,
    bob: &MappedSet<F>,
    params: &ReconParams<F>,
) -> Result<(), ReconError> {
    if alice.len() != params.set_size || bob.len() != params.set_size {
        return Err(ReconError::InvalidParams("set sizes must equal l"));
    }
    Ok(())
}

/// Runs Bob's half and the OLE calls; returns Alice's values `W(x_k) + blind_k`.
fn run_oles<F: PrimeField, R: RngCore + CryptoRng>(
    alice_p: &[F],
    bob: &MappedSet<F>,
    xs: &[F],
    deg: usize,
    blinds: Option<&[F]>,
    rng: &mut R,
) -> Result<Vec<F>, ReconError> {
    let sampler = RandomEvalSampler::new(xs, deg)?;
    let (r1, r2) = (sampler.sample(rng), sampler.sample(rng));
    let (u, v) = bob_ole_inputs(&bob.vanishing_evals(xs), &r1, &r2, blinds);
    Ok(alice_p.iter().zip(u.iter().zip(&v)).map(|(&x, (&u, &v))| crate::crypto::ole_ideal(x, u, v).0).collect())
}

/// Plain one-sided reconciliation; also returns what Alice observed.
pub fn one_sided_set_recon_transcript<F: PrimeField, R: RngCore + CryptoRng>(
    alice: &MappedSet<F>,
    bob: &MappedSet<F>,
    params: &ReconParams<F>,
    rng: &mut R,
) -> Result<(ReconOutcome<F>, ReconTranscript<F>), ReconError> {
    check_sizes(alice, bob, params)?;
    let (ell, d) = (params.set_size, params.diff_threshold);
    if params.points.len() < ell + 2 * d + 1 {
        return Err(ReconError::InvalidParams("plain reconciliation needs l + 2d + 1 points"));
    }
    let state = AliceRecon::new(alice.clone(), &params.points)?;
    let z = run_oles(&state.ole_inputs(), bob, &params.points, ell, None, rng)?;
    let outcome = state.recover(&z, ell + d, d);
    Ok((outcome, ReconTranscript { alice_evals: z, points: params.points.clone(), blinded: false }))
}

/// Plain one-sided reconciliation: `S_a \ S_b` if it has at most `d`
/// elements, otherwise [`ReconOutcome::Bottom`].
pub fn one_sided_set_recon<F: PrimeField, R: RngCore + CryptoRng>(
    alice: &MappedSet<F>,
    bob: &MappedSet<F>,
    params: &ReconParams<F>,
    rng: &mut R,
) -> Result<ReconOutcome<F>, ReconError> {
    Ok(one_sided_set_recon_transcript(alice, bob, params, rng)?.0)
}

/// Blinded reconciliation: Bob adds `phi(bob_key, k)` to every value; Alice
/// tries each candidate key and returns the index of the first key that
/// unblinds to a valid difference.
pub fn one_sided_set_recon_blinded<F: PrimeField, R: RngCore + CryptoRng>(
    alice: &MappedSet<F>,
    bob: &MappedSet<F>,
    params: &ReconParams<F>,
    bob_key: &PrfKey,
    alice_keys: &[PrfKey],
    rng: &mut R,
) -> Result<Option<(usize, Vec<F>)>, ReconError> {
    check_sizes(alice, bob, params)?;
    let (ell, d, m) = (params.set_size, params.diff_threshold, params.points.len());
    let state = AliceRecon::new(alice.clone(), &params.points)?;
    let blinds = prf_blinds::<F>(bob_key, m);
    let z = run_oles(&state.ole_inputs(), bob, &params.points, ell, Some(&blinds), rng)?;
    for (i, key) in alice_keys.iter().enumerate() {
        let unblinded: Vec<F> = z.iter().zip(prf_blinds::<F>(key, m)).map(|(&a, b)| a - b).collect();
        if let ReconOutcome::Diff(diff) = state.recover(&unblinded, ell + d, d) {
            return Ok(Some((i, diff)));
        }
    }
    Ok(None)
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    idx: Vec<usize>,
    n: usize,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Self { idx: (0..k).collect(), n, done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        match (0..k).rev().find(|&i| self.idx[i] != i + self.n - k) {
            Some(i) => {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
            }
            None => self.done = true,
        }
        Some(out)
    }
}

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Candidate search by divided-difference probes.
///
/// Each candidate carries a label (the claimed difference or intersection
/// subset) and a divisor set `D`. A candidate is accepted when `W / prod(x - D)`
/// sampled at the abscissas fits a polynomial of degree at most `deg_bound`,
/// which is the vanishing of every Newton coefficient above `deg_bound`.
/// The inverse tables depend only on Alice's set, so a scan is built once and
/// probed against many transcripts.
#[derive(Debug, Clone)]
pub struct CandidateScan<F: PrimeField> {
    labels: Vec<Vec<F>>,
    tables: Vec<DividedDiffTable<F>>,
    xs: Vec<F>,
    deg_bound: usize,
}

impl<F: PrimeField> CandidateScan<F> {
    fn build(xs: &[F], labels: Vec<Vec<F>>, divisors: Vec<Vec<F>>, deg_bound: usize) -> Result<Self, ReconError> {
        let polys: Vec<Polynomial<F>> =
            divisors.iter().map(|d| Polynomial::from_roots(d).expect("set elements are distinct")).collect();
        let tables = precompute_inverse_diff_tables(&polys, xs)?;
        Ok(Self { labels, tables, xs: xs.to_vec(), deg_bound })
    }

    fn subsets(set: &MappedSet<F>, t: usize) -> impl Iterator<Item = (Vec<F>, Vec<F>)> + '_ {
        Combinations::new(set.len(), t).map(move |idx| {
            let chosen: Vec<F> = idx.iter().map(|&i| set.elems[i]).collect();
            let rest: Vec<F> = set.elems.iter().copied().filter(|e| !chosen.contains(e)).collect();
            (chosen, rest)
        })
    }

    /// Candidate differences `C` of size `t`, dividing by `G_C = prod over S_a \ C`
    /// and accepting at degree `l + t`.
    pub fn exp(alice: &MappedSet<F>, xs: &[F], t: usize) -> Result<Self, ReconError> {
        let (labels, divisors) = Self::subsets(alice, t).unzip();
        Self::build(xs, labels, divisors, alice.len() + t)
    }

    /// Candidate intersection subsets `I` of size `t`, dividing by `prod over I`
    /// and accepting at degree `2T - t` where `T = |S_a|`.
    pub fn sample(alice: &MappedSet<F>, xs: &[F], t: usize) -> Result<Self, ReconError> {
        let (labels, divisors) = Self::subsets(alice, t).map(|(chosen, _)| (chosen.clone(), chosen)).unzip();
        Self::build(xs, labels, divisors, 2 * alice.len() - t)
    }

    /// Number of candidates.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True when there are no candidates.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Candidate labels in enumeration order.
    pub fn labels(&self) -> &[Vec<F>] {
        &self.labels
    }

    /// Number of vanishing constraints each candidate must satisfy.
    pub fn constraints(&self) -> usize {
        self.xs.len().saturating_sub(self.deg_bound + 1)
    }

    fn accepts(&self, idx: usize, w_newton: &[F]) -> bool {
        (self.deg_bound + 2..=self.xs.len()).all(|j| leibniz_prefix_probe(w_newton, &self.tables[idx], j).is_zero())
    }

    /// Newton coefficients of the transcript values, the input of the probes.
    pub fn newton(&self, z: &[F]) -> Vec<F> {
        newton_coefficients(&self.xs, z)
    }

    /// Labels of every accepted candidate, in enumeration order.
    pub fn accepted(&self, z: &[F]) -> Vec<&[F]> {
        let w = self.newton(z);
        (0..self.len()).filter(|&i| self.accepts(i, &w)).map(|i| self.labels[i].as_slice()).collect()
    }

    /// Label of the first accepted candidate.
    pub fn first_accepted(&self, z: &[F]) -> Option<&[F]> {
        let w = self.newton(z);
        (0..self.len()).find(|&i| self.accepts(i, &w)).map(|i| self.labels[i].as_slice())
    }
}

/// Alice's side of the exponential-search variant, given her OLE outputs.
pub fn alice_recover_exp<F: PrimeField>(
    alice: &MappedSet<F>,
    xs: &[F],
    z: &[F],
    d: usize,
    compute_cap: u128,
) -> Result<ReconOutcome<F>, ReconError> {
    let ell = alice.len();
    if xs.len() != ell + d + 2 || z.len() != xs.len() {
        return Err(ReconError::InvalidParams("exp reconciliation needs l + d + 2 points"));
    }
    let half = d / 2;
    let state = AliceRecon::new(alice.clone(), xs)?;
    if let found @ ReconOutcome::Diff(_) = state.recover(z, ell + half, half) {
        return Ok(found);
    }
    let candidates: u128 = (half + 1..=d).map(|t| binomial(ell, t)).fold(0, u128::saturating_add);
    if candidates > compute_cap {
        return Err(ReconError::ComputeCapExceeded { candidates, cap: compute_cap });
    }
    for t in half + 1..=d {
        let scan = CandidateScan::exp(alice, xs, t)?;
        if let Some(c) = scan.first_accepted(z) {
            let mut diff = c.to_vec();
            diff.sort();
            return Ok(ReconOutcome::Diff(diff));
        }
    }
    Ok(ReconOutcome::Bottom)
}

/// Exponential-search reconciliation at `l + d + 2` points.
pub fn one_sided_set_recon_exp<F: PrimeField, R: RngCore + CryptoRng>(
    alice: &MappedSet<F>,
    bob: &MappedSet<F>,
    params: &ReconParams<F>,
    compute_cap: u128,
    rng: &mut R,
) -> Result<ReconOutcome<F>, ReconError> {
    check_sizes(alice, bob, params)?;
    let p_vals = alice.vanishing_evals(&params.points);
    let z = run_oles(&p_vals, bob, &params.points, params.set_size, None, rng)?;
    alice_recover_exp(alice, &params.points, &z, params.diff_threshold, compute_cap)
}

/// Sub-sampled matching over sets of size `T`: true when some `t`-subset of
/// Alice's set lies in Bob's set, decided at `2T - t + 2` points.
pub fn one_sided_set_recon_sample<F: PrimeField, R: RngCore + CryptoRng>(
    scan: &CandidateScan<F>,
    alice: &MappedSet<F>,
    bob: &MappedSet<F>,
    rng: &mut R,
) -> Result<Option<Vec<F>>, ReconError> {
    if alice.len() != bob.len() {
        return Err(ReconError::InvalidParams("set sizes differ"));
    }
    let p_vals = alice.vanishing_evals(&scan.xs);
    let z = run_oles(&p_vals, bob, &scan.xs, bob.len(), None, rng)?;
    Ok(scan.first_accepted(&z).map(<[F]>::to_vec))
}

/// Outcome of [`enumeration_attack`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttackOutcome {
    /// Exactly one candidate is consistent at the lowest consistent level,
    /// with at least one surplus constraint.
    Recovered {
        /// Bob's vector.
        b: BitVector,
        /// Its distance from Alice's vector.
        level: usize,
    },
    /// No unique candidate could be singled out.
    Ambiguous {
        /// Lowest distance with a consistent candidate, if any.
        level: Option<usize>,
        /// Number of consistent candidates at that level.
        consistent: usize,
    },
}

/// Enumerates all `2^l` possible vectors of Bob and keeps those whose common
/// part `C'` with Alice's mapped set makes `W / C'` a polynomial of degree at
/// most `l + t'` on the observed points, where `t'` is the candidate's distance.
pub fn enumeration_attack<F: PrimeField>(
    transcript: &ReconTranscript<F>,
    a: &BitVector,
    enumeration_cap: usize,
) -> Result<AttackOutcome, ReconError> {
    let ell = a.len();
    if ell > enumeration_cap {
        return Err(ReconError::EnumerationTooLarge { ell, cap: enumeration_cap });
    }
    if transcript.blinded {
        return Err(ReconError::InvalidParams("attack needs an unblinded transcript"));
    }
    let xs = &transcript.points;
    let m = xs.len();
    let mapped = map_bitvector::<F>(a);
    // a_factor[i][k] = x_k - M_i(a[i]).
    let factors: Vec<Vec<F>> = mapped.elems.iter().map(|&s| xs.iter().map(|&x| x - s).collect()).collect();
    let mut by_level: Vec<Vec<u64>> = vec![Vec::new(); ell + 1];
    for code in 0..1u64 << ell {
        // Bit i of `code` set means position i differs from Alice's vector.
        let level = code.count_ones() as usize;
        if ell + level + 1 >= m {
            by_level[level].push(code);
            continue;
        }
        let mut c_vals = vec![F::one(); m];
        for (i, f) in factors.iter().enumerate() {
            if code >> i & 1 == 0 {
                for (c, &v) in c_vals.iter_mut().zip(f) {
                    *c *= v;
                }
            }
        }
        let Some(inv) = crate::field::batch_inverse(&c_vals) else {
            continue;
        };
        let ys: Vec<F> = transcript.alice_evals.iter().zip(&inv).map(|(&w, &i)| w * i).collect();
        let newton = newton_coefficients(xs, &ys);
        if newton[ell + level + 1..].iter().all(Zero::is_zero) {
            by_level[level].push(code);
        }
    }
    let Some(level) = by_level.iter().position(|v| !v.is_empty()) else {
        return Ok(AttackOutcome::Ambiguous { level: None, consistent: 0 });
    };
    let hits = &by_level[level];
    if hits.len() == 1 && m > ell + level + 1 {
        let mut b = a.clone();
        for i in 0..ell {
            if hits[0] >> i & 1 == 1 {
                b.flip(i);
            }
        }
        return Ok(AttackOutcome::Recovered { b, level });
    }
    Ok(AttackOutcome::Ambiguous { level: Some(level), consistent: hits.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F101, F5};
    use crate::Fe;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn flip_random(a: &BitVector, k: usize, rng: &mut ChaCha20Rng) -> BitVector {
        let mut b = a.clone();
        let mut idx: Vec<usize> = (0..a.len()).collect();
        for i in 0..k {
            let j = rng.gen_range(i..idx.len());
            idx.swap(i, j);
            b.flip(idx[i]);
        }
        b
    }

    fn fe(v: u64) -> Fe {
        Fe::from_u64(v)
    }

    /// Plaintext oracle for `S_a \ S_b`.
    fn diff_oracle(a: &MappedSet<Fe>, b: &MappedSet<Fe>) -> Vec<Fe> {
        let mut d: Vec<Fe> = a.elems().iter().copied().filter(|e| !b.contains(e)).collect();
        d.sort();
        d
    }

    #[test]
    fn map_examples() {
        assert_eq!(map_bitvector::<Fe>(&bv("1001")).elems(), &[fe(3), fe(4), fe(6), fe(9)]);
        assert_eq!(map_bitvector::<Fe>(&bv("000")).elems(), &[fe(2), fe(4), fe(6)]);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = BitVector::random(20, &mut rng);
            let b = BitVector::random(20, &mut rng);
            let (sa, sb) = (map_bitvector::<Fe>(&a), map_bitvector::<Fe>(&b));
            assert_eq!(diff_oracle(&sa, &sb).len(), a.hamming_distance(&b));
        }
    }

    #[test]
    fn eval_points_avoid_mapping_range() {
        let xs: Vec<Fe> = eval_points(4, 9);
        assert_eq!(xs[0], fe(10));
        // Largest mapped value for length 4 is 2 * 4 + 1 = 9.
        assert!(xs.iter().all(|x| x.value() > 9));
    }

    #[test]
    fn recon_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let a = bv("1001");
        let params = ReconParams::<Fe>::plain(4, 1).unwrap();
        let sa = map_bitvector(&a);
        assert_eq!(one_sided_set_recon(&sa, &sa, &params, &mut rng).unwrap(), ReconOutcome::Diff(vec![]));
        let sb = map_bitvector(&bv("1011"));
        let out = one_sided_set_recon(&sa, &sb, &params, &mut rng).unwrap();
        assert_eq!(out, ReconOutcome::Diff(vec![fe(6)]));
        assert_eq!(recover_bitvector(&a, out.diff().unwrap()).unwrap(), bv("1011"));
        assert_eq!(recover_bitvector::<Fe>(&a, &[]).unwrap(), a);
        assert_eq!(recover_bitvector(&a, &[fe(5)]), Err(ReconError::ForeignElement));
    }

    #[test]
    fn recon_rejects_double_threshold_difference() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (ell, d) = (16, 3);
        let params = ReconParams::<Fe>::plain(ell, d).unwrap();
        for _ in 0..200 {
            let a = BitVector::random(ell, &mut rng);
            let b = flip_random(&a, 2 * d, &mut rng);
            let out = one_sided_set_recon(&map_bitvector(&a), &map_bitvector(&b), &params, &mut rng).unwrap();
            assert!(out.is_bottom());
        }
    }

    #[test]
    fn recon_completeness_and_recovery() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (ell, d) = (24, 4);
        let params = ReconParams::<Fe>::plain(ell, d).unwrap();
        for trial in 0..500 {
            let a = BitVector::random(ell, &mut rng);
            let b = flip_random(&a, trial % (d + 1), &mut rng);
            let (sa, sb) = (map_bitvector(&a), map_bitvector(&b));
            let out = one_sided_set_recon(&sa, &sb, &params, &mut rng).unwrap();
            assert_eq!(out, ReconOutcome::Diff(diff_oracle(&sa, &sb)));
            // Soundness of the factor check: every root lies in S_a.
            assert!(out.diff().unwrap().iter().all(|e| sa.contains(e)));
            assert_eq!(recover_bitvector(&a, out.diff().unwrap()).unwrap(), b);
        }
    }

    #[test]
    fn blinded_recon_selects_the_right_key() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (ell, d) = (12, 2);
        let params = ReconParams::<Fe>::plain(ell, d).unwrap();
        let a = BitVector::random(ell, &mut rng);
        let b = flip_random(&a, 2, &mut rng);
        let keys: Vec<PrfKey> = (0..4).map(|_| PrfKey::random(&mut rng)).collect();
        let (sa, sb) = (map_bitvector(&a), map_bitvector(&b));
        let got = one_sided_set_recon_blinded(&sa, &sb, &params, &keys[2], &keys, &mut rng).unwrap();
        assert_eq!(got, Some((2, diff_oracle(&sa, &sb))));
        let none = one_sided_set_recon_blinded(&sa, &sb, &params, &keys[2], &[keys[0], keys[1]], &mut rng).unwrap();
        assert_eq!(none, None);
    }

    #[test]
    fn exp_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (ell, d) = (8, 4);
        let params = ReconParams::<Fe>::exp(ell, d).unwrap();
        assert_eq!(params.points.len(), ell + d + 2);
        let a = BitVector::random(ell, &mut rng);
        let sa = map_bitvector(&a);
        assert_eq!(one_sided_set_recon_exp(&sa, &sa, &params, 1000, &mut rng).unwrap(), ReconOutcome::Diff(vec![]));
        for hd in 0..=d {
            for _ in 0..20 {
                let b = flip_random(&a, hd, &mut rng);
                let sb = map_bitvector(&b);
                let out = one_sided_set_recon_exp(&sa, &sb, &params, 1000, &mut rng).unwrap();
                assert_eq!(out, ReconOutcome::Diff(diff_oracle(&sa, &sb)), "hd = {hd}");
            }
        }
        let b = flip_random(&a, d + 2, &mut rng);
        assert!(one_sided_set_recon_exp(&sa, &map_bitvector(&b), &params, 1000, &mut rng).unwrap().is_bottom());
        assert_eq!(
            one_sided_set_recon_exp(&sa, &sa, &ReconParams::exp(ell, d).unwrap(), 10, &mut rng).map(|o| o.is_bottom()),
            Ok(false)
        );
    }

    #[test]
    fn exp_respects_compute_cap() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (ell, d) = (8, 4);
        let params = ReconParams::<Fe>::exp(ell, d).unwrap();
        let a = BitVector::random(ell, &mut rng);
        let b = flip_random(&a, 4, &mut rng);
        let err = one_sided_set_recon_exp(&map_bitvector(&a), &map_bitvector(&b), &params, 10, &mut rng);
        assert_eq!(err, Err(ReconError::ComputeCapExceeded { candidates: 56 + 70, cap: 10 }));
    }

    #[test]
    fn exp_false_accepts_are_rare_at_p101() {
        // Every wrong candidate at every size, over many transcripts.
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (ell, d) = (6usize, 4usize);
        let xs: Vec<F101> = eval_points(ell, ell + d + 2);
        let (mut tested, mut wrong) = (0u64, 0u64);
        for _ in 0..600 {
            let a = BitVector::random(ell, &mut rng);
            let b = flip_random(&a, rng.gen_range(3..=d), &mut rng);
            let (sa, sb) = (map_bitvector::<F101>(&a), map_bitvector::<F101>(&b));
            let z = run_oles(&sa.vanishing_evals(&xs), &sb, &xs, ell, None, &mut rng).unwrap();
            let truth: Vec<F101> = sa.elems().iter().copied().filter(|e| !sb.contains(e)).collect();
            for t in d / 2 + 1..=d {
                let scan = CandidateScan::exp(&sa, &xs, t).unwrap();
                let accepted = scan.accepted(&z);
                let is_wrong = |c: &[F101]| !truth.iter().all(|e| c.contains(e));
                tested += scan.labels().iter().filter(|c| is_wrong(c)).count() as u64;
                wrong += accepted.iter().filter(|c| is_wrong(c)).count() as u64;
            }
        }
        assert!(tested > 10_000);
        assert!((wrong as f64) / (tested as f64) <= 2.0 / 101.0, "{wrong}/{tested}");
    }

    #[test]
    fn sample_matches_intersection_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (big_t, t) = (8usize, 2usize);
        let xs: Vec<Fe> = (0..(2 * big_t - t + 2) as u64).map(|i| fe(1 << 40 | i)).collect();
        for _ in 0..100 {
            let sa: Vec<Fe> = (0..big_t).map(|_| Fe::random(&mut rng)).collect();
            let common = rng.gen_range(0..=4usize);
            let mut sb: Vec<Fe> = sa[..common].to_vec();
            sb.extend((common..big_t).map(|_| Fe::random(&mut rng)));
            let (sa, sb) = (MappedSet::new(sa).unwrap(), MappedSet::new(sb).unwrap());
            let scan = CandidateScan::sample(&sa, &xs, t).unwrap();
            assert_eq!(scan.constraints(), 1);
            let got = one_sided_set_recon_sample(&scan, &sa, &sb, &mut rng).unwrap();
            assert_eq!(got.is_some(), common >= t);
            if let Some(i) = got {
                assert!(i.iter().all(|e| sb.contains(e)));
            }
        }
    }

    #[test]
    fn attack_recovers_and_reports_ambiguity() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let (ell, d) = (8, 3);
        let params = ReconParams::<Fe>::plain(ell, d).unwrap();
        for (hd, expect_recovered) in [(1, true), (4, true), (6, false)] {
            for _ in 0..10 {
                let a = BitVector::random(ell, &mut rng);
                let b = flip_random(&a, hd, &mut rng);
                let (_, tr) =
                    one_sided_set_recon_transcript(&map_bitvector(&a), &map_bitvector(&b), &params, &mut rng).unwrap();
                let out = enumeration_attack(&tr, &a, DEFAULT_ENUMERATION_CAP).unwrap();
                if expect_recovered {
                    assert_eq!(out, AttackOutcome::Recovered { b, level: hd });
                } else {
                    assert_eq!(out, AttackOutcome::Ambiguous { level: Some(6), consistent: 28 });
                }
            }
        }
        let long = BitVector::zeros(17);
        let tr = ReconTranscript { alice_evals: vec![], points: vec![], blinded: false };
        assert_eq!(
            enumeration_attack::<Fe>(&tr, &long, DEFAULT_ENUMERATION_CAP),
            Err(ReconError::EnumerationTooLarge { ell: 17, cap: 16 })
        );
    }

    #[test]
    fn uniform_numerator_at_p5() {
        // P~ = (x-1)(x-2), Q~ = (x-3)(x-4), R1, R2 of degree <= 2: each of the
        // 5^5 polynomials of degree <= 4 appears exactly 5 times.
        let f = F5::from_u64;
        let pt = Polynomial::from_roots(&[f(1), f(2)]).unwrap();
        let qt = Polynomial::from_roots(&[f(3), f(4)]).unwrap();
        let mut counts = std::collections::HashMap::new();
        let poly_of = |code: u64| Polynomial::new((0..3).map(|i| f(code / 5u64.pow(i) % 5)).collect());
        for c1 in 0..125 {
            for c2 in 0..125 {
                let w = &(&poly_of(c1) * &pt) + &(&poly_of(c2) * &qt);
                *counts.entry(w.coeffs().to_vec()).or_insert(0u32) += 1;
            }
        }
        assert_eq!(counts.len(), 3125);
        assert!(counts.values().all(|&c| c == 5));
    }

    #[test]
    fn combinations_enumerate_binomial_counts() {
        for n in 0..8 {
            for k in 0..=n + 1 {
                let all: Vec<Vec<usize>> = Combinations::new(n, k).collect();
                assert_eq!(all.len() as u128, binomial(n, k));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
