//! Finite-dimensional synchronous strategies.
//!
//! A [`Realization`] is a weighted direct sum of blocks. Each block holds one
//! projective measurement `P[x][a]` per input on `C^d`; the tracial state is
//! `tau = sum_i weight_i * trace_i / d_i`, so
//! `p(a, b | x, y) = tau(P[x][a] P[y][b])`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correlation::{Correlation, DeterministicStrategy};
use crate::error::{Error, Result};
use crate::exact;
use crate::game::{pair_index, Density, Game};
use crate::linalg::{self, CMatrix};
use crate::rational::{self, Rational};

/// Eigenvalues within this distance of zero go to the first outcome in see-saw updates.
const EIGEN_TIE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    weight: f64,
    dim: usize,
    projections: Vec<Vec<CMatrix>>,
}

impl Block {
    /// `projections[x][a]` must all be `dim x dim`.
    pub fn new(weight: f64, projections: Vec<Vec<CMatrix>>) -> Result<Self> {
        let n = projections.len();
        if n == 0 {
            return Err(Error::EmptyDimension("block inputs"));
        }
        let k = projections[0].len();
        if k == 0 {
            return Err(Error::EmptyDimension("block outputs"));
        }
        let dim = projections[0][0].nrows();
        if dim == 0 {
            return Err(Error::EmptyDimension("block dimension"));
        }
        for (x, family) in projections.iter().enumerate() {
            if family.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "input {x} has {} outcomes, expected {k}",
                    family.len()
                )));
            }
            for (a, m) in family.iter().enumerate() {
                if m.shape() != (dim, dim) {
                    return Err(Error::DimensionMismatch(format!(
                        "P[{x}][{a}] has shape {:?}, expected ({dim}, {dim})",
                        m.shape()
                    )));
                }
            }
        }
        if weight.is_nan() || weight < 0.0 {
            return Err(Error::DimensionMismatch(format!("negative block weight {weight}")));
        }
        Ok(Self {
            weight,
            dim,
            projections,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_inputs(&self) -> usize {
        self.projections.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.projections[0].len()
    }

    pub fn projection(&self, x: usize, a: usize) -> &CMatrix {
        &self.projections[x][a]
    }

    pub fn projections(&self) -> &[Vec<CMatrix>] {
        &self.projections
    }

    fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    n_inputs: usize,
    n_outputs: usize,
    blocks: Vec<Block>,
}

impl Realization {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let first = blocks.first().ok_or(Error::EmptyDimension("realization blocks"))?;
        let (n, k) = (first.n_inputs(), first.n_outputs());
        if blocks.iter().any(|b| (b.n_inputs(), b.n_outputs()) != (n, k)) {
            return Err(Error::DimensionMismatch(
                "blocks act on different numbers of inputs or outputs".into(),
            ));
        }
        let total: f64 = blocks.iter().map(Block::weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::DimensionMismatch(format!("block weights sum to {total}")));
        }
        Ok(Self {
            n_inputs: n,
            n_outputs: k,
            blocks,
        })
    }

    pub fn single(block: Block) -> Result<Self> {
        Self::new(vec![block.with_weight(1.0)])
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    fn active_blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(|b| b.weight > 0.0)
    }
}

/// Operator-norm defects of a realization; `rule_defect` only when a game is supplied.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationReport {
    pub projection_defect: f64,
    pub completeness_defect: f64,
    pub rule_defect: Option<f64>,
    pub tol: f64,
}

impl RealizationReport {
    pub fn is_valid(&self) -> bool {
        self.projection_defect <= self.tol && self.completeness_defect <= self.tol
    }

    /// Valid and (when a game was supplied) a perfect strategy for it.
    pub fn passed(&self) -> bool {
        self.is_valid() && self.rule_defect.is_none_or(|d| d <= self.tol)
    }
}

pub fn verify_realization(r: &Realization, game: Option<&Game>, tol: f64) -> Result<RealizationReport> {
    if let Some(g) = game {
        if (g.n_inputs(), g.n_outputs()) != (r.n_inputs, r.n_outputs) {
            return Err(Error::DimensionMismatch(format!(
                "realization is {}x{} but game is {}x{}",
                r.n_inputs,
                r.n_outputs,
                g.n_inputs(),
                g.n_outputs()
            )));
        }
    }
    let mut projection_defect = 0.0_f64;
    let mut completeness_defect = 0.0_f64;
    let mut rule_defect = game.map(|_| 0.0_f64);
    for block in r.active_blocks() {
        let d = block.dim;
        for family in &block.projections {
            let mut total = CMatrix::zeros(d, d);
            for p in family {
                projection_defect = projection_defect
                    .max(linalg::op_norm(&(p - p.adjoint())))
                    .max(linalg::op_norm(&(p * p - p)));
                total += p;
            }
            completeness_defect = completeness_defect.max(linalg::op_norm(&(total - linalg::identity(d))));
        }
        if let (Some(g), Some(defect)) = (game, rule_defect.as_mut()) {
            for (x, y, a, b) in forbidden_tuples(g) {
                let m = block.projection(x, a) * block.projection(y, b);
                *defect = defect.max(linalg::op_norm(&m));
            }
        }
    }
    Ok(RealizationReport {
        projection_defect,
        completeness_defect,
        rule_defect,
        tol,
    })
}

fn forbidden_tuples(g: &Game) -> Vec<(usize, usize, usize, usize)> {
    let (n, k) = (g.n_inputs(), g.n_outputs());
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for a in 0..k {
                for b in 0..k {
                    if !g.allowed(x, y, a, b) {
                        out.push((x, y, a, b));
                    }
                }
            }
        }
    }
    out
}

/// `p(a, b | x, y) = sum_i weight_i * trace(P_i[x][a] P_i[y][b]) / d_i`.
pub fn correlation_of(r: &Realization) -> Correlation {
    let (n, k) = (r.n_inputs, r.n_outputs);
    let mut values = vec![0.0; n * n * k * k];
    for block in r.active_blocks() {
        let scale = block.weight / block.dim as f64;
        for x in 0..n {
            for y in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        let t = linalg::trace_product_re(block.projection(x, a), block.projection(y, b));
                        values[((x * n + y) * k + a) * k + b] += scale * t;
                    }
                }
            }
        }
    }
    Correlation::from_raw(n, k, values)
}

/// Blockwise Kronecker products `P1[x1][a1] ⊗ P2[x2][a2]` over all block pairs.
pub fn tensor_realizations(r1: &Realization, r2: &Realization) -> Realization {
    let (n1, k1) = (r1.n_inputs, r1.n_outputs);
    let (n2, k2) = (r2.n_inputs, r2.n_outputs);
    let mut blocks = Vec::with_capacity(r1.blocks.len() * r2.blocks.len());
    for b1 in &r1.blocks {
        for b2 in &r2.blocks {
            let mut projections = vec![Vec::with_capacity(k1 * k2); n1 * n2];
            for x1 in 0..n1 {
                for x2 in 0..n2 {
                    let family = &mut projections[pair_index(x1, x2, n2)];
                    for a1 in 0..k1 {
                        for a2 in 0..k2 {
                            family.push(linalg::kron(b1.projection(x1, a1), b2.projection(x2, a2)));
                        }
                    }
                }
            }
            blocks.push(Block {
                weight: b1.weight * b2.weight,
                dim: b1.dim * b2.dim,
                projections,
            });
        }
    }
    Realization {
        n_inputs: n1 * n2,
        n_outputs: k1 * k2,
        blocks,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarginalReport {
    /// Largest `||f(x1, x2, a1) - f(x1, x2', a1)||` over all inputs of the other factor.
    pub independence_defect: f64,
    pub projection_defect: f64,
    pub completeness_defect: f64,
}

/// Marginal family of a product-game realization:
/// `f_{x1,a1} = sum_b P[(x1, x2)][(a1, b)]` at the reference `x2 = 0` (symmetrically for
/// [`Factor::Second`]). The report measures how much the marginal depends on the
/// reference input.
pub fn extract_marginal(
    r: &Realization,
    which: Factor,
    first: (usize, usize),
    second: (usize, usize),
) -> Result<(Realization, MarginalReport)> {
    let (n1, k1) = first;
    let (n2, k2) = second;
    if n1 * n2 != r.n_inputs || k1 * k2 != r.n_outputs {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} realization is not a product of {n1}x{k1} and {n2}x{k2}",
            r.n_inputs, r.n_outputs
        )));
    }
    let (n_keep, k_keep, n_other, k_other) = match which {
        Factor::First => (n1, k1, n2, k2),
        Factor::Second => (n2, k2, n1, k1),
    };
    let input = |keep: usize, other: usize| match which {
        Factor::First => pair_index(keep, other, n2),
        Factor::Second => pair_index(other, keep, n2),
    };
    let output = |keep: usize, other: usize| match which {
        Factor::First => pair_index(keep, other, k2),
        Factor::Second => pair_index(other, keep, k2),
    };

    let mut independence_defect = 0.0_f64;
    let mut blocks = Vec::with_capacity(r.blocks.len());
    for block in &r.blocks {
        let d = block.dim;
        // marginals[other][x][a]
        let marginals: Vec<Vec<Vec<CMatrix>>> = (0..n_other)
            .map(|xo| {
                (0..n_keep)
                    .map(|x| {
                        (0..k_keep)
                            .map(|a| {
                                (0..k_other).fold(CMatrix::zeros(d, d), |acc, b| {
                                    acc + block.projection(input(x, xo), output(a, b))
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        if block.weight > 0.0 {
            for xo in 0..n_other {
                for xo2 in (xo + 1)..n_other {
                    for x in 0..n_keep {
                        for a in 0..k_keep {
                            let diff = &marginals[xo][x][a] - &marginals[xo2][x][a];
                            independence_defect = independence_defect.max(linalg::op_norm(&diff));
                        }
                    }
                }
            }
        }
        let projections = marginals.into_iter().next().expect("n_other > 0");
        blocks.push(Block {
            weight: block.weight,
            dim: d,
            projections,
        });
    }
    let marginal = Realization {
        n_inputs: n_keep,
        n_outputs: k_keep,
        blocks,
    };
    let defects = verify_realization(&marginal, None, 0.0)?;
    Ok((
        marginal,
        MarginalReport {
            independence_defect,
            projection_defect: defects.projection_defect,
            completeness_defect: defects.completeness_defect,
        },
    ))
}

/// Random projective measurements on `C^dim`: for each input, a uniformly random
/// weak composition of `dim` into `n_outputs` ranks, rotated by a Haar unitary.
pub fn random_pvm_block<R: Rng + ?Sized>(n_inputs: usize, n_outputs: usize, dim: usize, rng: &mut R) -> Block {
    let projections = (0..n_inputs)
        .map(|_| {
            let ranks = random_composition(dim, n_outputs, rng);
            let u = linalg::random_unitary(dim, rng);
            let mut start = 0;
            ranks
                .iter()
                .map(|&rank| {
                    let cols: Vec<usize> = (start..start + rank).collect();
                    start += rank;
                    linalg::span_projection(&u, &cols)
                })
                .collect()
        })
        .collect();
    Block {
        weight: 1.0,
        dim,
        projections,
    }
}

/// Uniform weak composition of `total` into `parts` parts (stars and bars).
fn random_composition<R: Rng + ?Sized>(total: usize, parts: usize, rng: &mut R) -> Vec<usize> {
    let slots = total + parts - 1;
    let mut bars = rand::seq::index::sample(rng, slots, parts - 1).into_vec();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for (i, &b) in bars.iter().enumerate() {
        out.push(b - prev - (i > 0) as usize);
        prev = b;
    }
    out.push(if bars.is_empty() {
        total
    } else {
        slots - prev - 1
    });
    out
}

/// Embeds a deterministic strategy as identity/zero projections on `C^dim`.
pub fn deterministic_block(f: &DeterministicStrategy, n_outputs: usize, dim: usize) -> Block {
    let projections = f
        .assignment()
        .iter()
        .map(|&fx| {
            (0..n_outputs)
                .map(|a| if a == fx { linalg::identity(dim) } else { CMatrix::zeros(dim, dim) })
                .collect()
        })
        .collect();
    Block {
        weight: 1.0,
        dim,
        projections,
    }
}

#[derive(Clone, Debug)]
pub struct SeesawOptions {
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop a restart once a sweep improves the value by less than this.
    pub improvement_tol: f64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            dim: 2,
            restarts: 20,
            seed: 0,
            max_iters: 500,
            improvement_tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeesawResult {
    pub value: f64,
    pub witness: Realization,
    /// Index of the restart that produced the witness.
    pub best_restart: usize,
    /// Value after each sweep, per restart; entry 0 is the initial value.
    pub histories: Vec<Vec<f64>>,
}

/// Strategy counts up to this size get a deterministic warm start at restart 0.
const WARM_START_CAP: u128 = 1 << 16;

/// Heuristic lower bound on the synchronous quantum value using single-block
/// realizations of dimension `dim`.
///
/// Each sweep maximizes the objective over one input's measurement at a time, holding the
/// others fixed. The objective is linear in that measurement, `sum_a Re tr(P[x][a] H[x][a])`;
/// for two outcomes the exact maximizer is the spectral projection onto the nonnegative
/// eigenspace of `H[x][0] - H[x][1]`, and with more outcomes pairs of outcomes are
/// re-split inside their joint range until no pair improves. Restart 0 starts from the
/// best deterministic strategy when enumeration is cheap; the others from random
/// measurements. Restarts run in parallel and the best value wins, ties going to the
/// lowest restart index.
pub fn seesaw_lower_bound(game: &Game, density: &Density, opts: &SeesawOptions) -> Result<SeesawResult> {
    density.check_game(game)?;
    if opts.dim == 0 {
        return Err(Error::EmptyDimension("see-saw dimension"));
    }
    let (n, k) = (game.n_inputs(), game.n_outputs());
    let warm = if strategy_count(n, k) <= WARM_START_CAP {
        exact::local_synchronous_value(game, density)?.strategy().cloned()
    } else {
        None
    };
    let weights = SeesawWeights::new(game, density);
    let runs: Vec<(f64, Block, Vec<f64>)> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(restart as u64);
            let start = match (&warm, restart) {
                (Some(f), 0) => deterministic_block(f, k, opts.dim),
                _ => random_pvm_block(n, k, opts.dim, &mut rng),
            };
            run_seesaw(&weights, start, opts)
        })
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 {
            best = i;
        }
    }
    let histories = runs.iter().map(|r| r.2.clone()).collect();
    let (_, block, _) = runs.into_iter().nth(best).unwrap();
    let witness = Realization::single(block)?;
    let value = correlation_of(&witness).expected_value(game, density)?.value;
    Ok(SeesawResult {
        value,
        witness,
        best_restart: best,
        histories,
    })
}

fn strategy_count(n: usize, k: usize) -> u128 {
    (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
}

/// `coupling[x][y][a][b] = pi(x,y) lambda(x,y,a,b)` as floats, plus the diagonal terms.
struct SeesawWeights {
    n: usize,
    k: usize,
    coupling: Vec<f64>,
}

impl SeesawWeights {
    fn new(game: &Game, density: &Density) -> Self {
        let (n, k) = (game.n_inputs(), game.n_outputs());
        let mut coupling = vec![0.0; n * n * k * k];
        for (x, y, w) in density.support() {
            let w = rational::to_f64(w);
            for (a, b) in game.allowed_set(x, y) {
                coupling[((x * n + y) * k + a) * k + b] = w;
            }
        }
        Self { n, k, coupling }
    }

    #[inline]
    fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.coupling[((x * self.n + y) * self.k + a) * self.k + b]
    }

    fn value(&self, block: &Block) -> f64 {
        let d = block.dim as f64;
        let mut v = 0.0;
        for x in 0..self.n {
            for y in 0..self.n {
                for a in 0..self.k {
                    for b in 0..self.k {
                        let w = self.get(x, y, a, b);
                        if w != 0.0 {
                            v += w * linalg::trace_product_re(block.projection(x, a), block.projection(y, b)) / d;
                        }
                    }
                }
            }
        }
        v
    }

    /// `H[x][a]` such that the part of the objective involving input `x` is
    /// `sum_a Re tr(P[x][a] H[x][a])`.
    fn local_fields(&self, block: &Block, x: usize) -> Vec<CMatrix> {
        let d = block.dim;
        let scale = 1.0 / d as f64;
        (0..self.k)
            .map(|a| {
                let mut h = linalg::identity(d) * Complex64::new(self.get(x, x, a, a) * scale, 0.0);
                for y in (0..self.n).filter(|&y| y != x) {
                    for b in 0..self.k {
                        let w = self.get(x, y, a, b) + self.get(y, x, b, a);
                        if w != 0.0 {
                            h += block.projection(y, b) * Complex64::new(w * scale, 0.0);
                        }
                    }
                }
                h
            })
            .collect()
    }
}

fn run_seesaw(weights: &SeesawWeights, mut block: Block, opts: &SeesawOptions) -> (f64, Block, Vec<f64>) {
    let mut value = weights.value(&block);
    let mut history = vec![value];
    for _ in 0..opts.max_iters {
        for x in 0..weights.n {
            let fields = weights.local_fields(&block, x);
            block.projections[x] = best_response(&block.projections[x], &fields);
        }
        let next = weights.value(&block);
        history.push(next);
        let improved = next - value;
        value = next;
        if improved < opts.improvement_tol {
            break;
        }
    }
    (value, block, history)
}

/// Maximizes `sum_a Re tr(P[a] H[a])` over projective measurements, starting from `current`.
fn best_response(current: &[CMatrix], fields: &[CMatrix]) -> Vec<CMatrix> {
    let k = fields.len();
    let d = current[0].nrows();
    if k == 1 {
        return vec![linalg::identity(d)];
    }
    if k == 2 {
        let (p0, p1) = split_by_sign(&(&fields[0] - &fields[1]), None);
        return vec![p0, p1];
    }
    let score = |ps: &[CMatrix]| -> f64 {
        ps.iter().zip(fields).map(|(p, h)| linalg::trace_product_re(p, h)).sum()
    };
    let mut ps = current.to_vec();
    let mut best = score(&ps);
    for _ in 0..100 {
        let before = best;
        for a in 0..k {
            for b in (a + 1)..k {
                let joint = &ps[a] + &ps[b];
                let (pa, pb) = split_by_sign(&(&fields[a] - &fields[b]), Some(&joint));
                let old = (std::mem::replace(&mut ps[a], pa), std::mem::replace(&mut ps[b], pb));
                let s = score(&ps);
                if s + 1e-15 < best {
                    ps[a] = old.0;
                    ps[b] = old.1;
                } else {
                    best = best.max(s);
                }
            }
        }
        if best - before <= 1e-14 {
            break;
        }
    }
    ps
}

/// Splits the range of `within` (the whole space if `None`) into the nonnegative and
/// negative spectral subspaces of the compression of `m`.
fn split_by_sign(m: &CMatrix, within: Option<&CMatrix>) -> (CMatrix, CMatrix) {
    let d = m.nrows();
    let basis = match within {
        None => linalg::identity(d),
        Some(q) => {
            let (vals, vecs) = linalg::hermitian_eigen(q);
            let cols: Vec<_> = (0..d).filter(|&i| vals[i] > 0.5).map(|i| vecs.column(i).into_owned()).collect();
            if cols.is_empty() {
                return (CMatrix::zeros(d, d), CMatrix::zeros(d, d));
            }
            CMatrix::from_columns(&cols)
        }
    };
    let compressed = basis.adjoint() * m * &basis;
    let (vals, vecs) = linalg::hermitian_eigen(&compressed);
    let lifted = &basis * vecs;
    let positive: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= -EIGEN_TIE).collect();
    let negative: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] < -EIGEN_TIE).collect();
    (
        linalg::span_projection(&lifted, &positive),
        linalg::span_projection(&lifted, &negative),
    )
}

/// One member of the `p + q + r = t·1` family for the three-input, two-output game
/// ([`crate::catalog::example2`]) with uniform questions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TFamilyPoint {
    pub t: Rational,
    /// `k/n = (2t - t^2) / (6t - 2t^2 - 3)`, the normalized rank of `p`.
    pub ratio: Rational,
    /// `tau(h)` at this `t`.
    pub tau_value: Rational,
    /// False where the block form cannot come from projections (`t = 0, 1`).
    pub feasible: bool,
}

/// Evaluates the `t`-family. Only `t ∈ {0, 1, 2, 3, 3/2}` admit solutions.
///
/// With `p + q + r = t·1` central, writing `ρ = τ(p)`:
/// `τ(q) = τ(r) = (t - ρ)/2`, `τ(pq) = (t - 1)ρ/2`, `τ(qr) = (t - 1)τ(q) - τ(pq)`, and
/// `9 τ(h) = 3 + 2(2 - t)ρ + 2τ(q) + 2τ(r) - 2τ(qr)`.
pub fn t_family(t: &Rational) -> Result<TFamilyPoint> {
    let allowed = [rational::int(0), rational::int(1), rational::int(2), rational::int(3), rational::ratio(3, 2)];
    if !allowed.contains(t) {
        return Err(Error::InfeasibleT(rational::render(t)));
    }
    let two = rational::int(2);
    let t2 = t * t;
    let denominator = rational::int(6) * t - &two * &t2 - rational::int(3);
    // Nonzero on every allowed t.
    let ratio = (&two * t - &t2) / denominator;
    let tau_q = (t - &ratio) / &two;
    let tau_r = tau_q.clone();
    let tau_pq = (t - Rational::one()) * &ratio / &two;
    let tau_qr = (t - Rational::one()) * &tau_q - &tau_pq;
    let nine_tau = rational::int(3) + &two * (&two - t) * &ratio + &two * &tau_q + &two * &tau_r - &two * tau_qr;
    let tau_value = nine_tau / rational::int(9);
    let feasible = !(t.is_zero() || t.is_one());
    Ok(TFamilyPoint {
        t: t.clone(),
        ratio,
        tau_value,
        feasible,
    })
}

/// The `t = 3/2` point realized in `M_2`:
/// `p = [[1,0],[0,0]]`, `q = [[1/4, √3/4], [√3/4, 3/4]]`, `r = [[1/4, -√3/4], [-√3/4, 3/4]]`
/// as the first-outcome projections of inputs 1, 2, 3; second outcomes are `1 - p` etc.
pub fn example2_witness() -> Realization {
    let s = 3.0_f64.sqrt() / 4.0;
    let firsts = [
        linalg::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        linalg::from_real(2, 2, &[0.25, s, s, 0.75]),
        linalg::from_real(2, 2, &[0.25, -s, -s, 0.75]),
    ];
    let projections = firsts
        .into_iter()
        .map(|p| {
            let complement = linalg::identity(2) - &p;
            vec![p, complement]
        })
        .collect();
    Realization::single(Block {
        weight: 1.0,
        dim: 2,
        projections,
    })
    .expect("single block")
}

/// Commutator `ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Identity-only realization of dimension `dim` choosing outcome `f(x)` for every input.
pub fn deterministic_realization(f: &DeterministicStrategy, n_outputs: usize, dim: usize) -> Realization {
    Realization::single(deterministic_block(f, n_outputs, dim)).expect("single block")
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<Realization>();
    check::<DMatrix<Complex64>>();
}
