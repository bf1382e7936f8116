//! Tracial moment-matrix relaxation of the synchronous quantum-commuting value and a
//! first-order solver for it.
//!
//! The relaxation is real: entries are `Re tau(u* v)`, so a word and its reversal
//! share one moment variable. Real parts of a feasible complex moment matrix form a
//! feasible real one, so the restriction loses nothing.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Cholesky, DMatrix, DVector};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{Density, Game};
use crate::linalg;
use crate::nc::{Letter, Word};
use crate::quantum::Realization;
use crate::rational::{self, Rational};

/// A linear constraint `sum coeff * y[var] = rhs` on the moment variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentEquality {
    pub terms: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// `maximize c·y` subject to `M(y) ⪰ 0`, linear equalities and `y[i] ≥ 0` on a subset.
///
/// `M(y)[i][j] = y[entries[i*size + j]]`, or 0 where the entry is `None`.
#[derive(Clone, Debug)]
pub struct MomentMatrixProblem {
    size: usize,
    n_vars: usize,
    entries: Vec<Option<usize>>,
    equalities: Vec<MomentEquality>,
    nonneg: Vec<usize>,
    objective: Vec<(usize, Rational)>,
    /// Every feasible point satisfies `|y[i]| ≤ box_bound`; used by the a-posteriori bound.
    box_bound: f64,
    index_words: Vec<Word>,
    moment_words: Vec<Word>,
}

impl MomentMatrixProblem {
    /// A problem given directly by its entry pattern. `entries` must be symmetric.
    pub fn from_parts(
        size: usize,
        n_vars: usize,
        entries: Vec<Option<usize>>,
        equalities: Vec<MomentEquality>,
        nonneg: Vec<usize>,
        objective: Vec<(usize, Rational)>,
        box_bound: f64,
    ) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {size}x{size} matrix",
                entries.len()
            )));
        }
        for i in 0..size {
            for j in 0..size {
                if entries[i * size + j] != entries[j * size + i] {
                    return Err(Error::DimensionMismatch(format!("entry pattern is not symmetric at ({i}, {j})")));
                }
            }
        }
        let vars = entries
            .iter()
            .flatten()
            .chain(&nonneg)
            .chain(objective.iter().map(|(v, _)| v))
            .chain(equalities.iter().flat_map(|e| e.terms.iter().map(|(v, _)| v)));
        for &v in vars {
            Error::check_index("moment variable", v, n_vars)?;
        }
        let mut seen = vec![false; n_vars];
        for v in entries.iter().flatten() {
            seen[*v] = true;
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::DimensionMismatch(format!("variable {v} never appears in the matrix")));
        }
        Ok(Self {
            size,
            n_vars,
            entries,
            equalities,
            nonneg,
            objective,
            box_bound,
            index_words: Vec::new(),
            moment_words: Vec::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<usize> {
        self.entries[i * self.size + j]
    }

    pub fn equalities(&self) -> &[MomentEquality] {
        &self.equalities
    }

    pub fn nonneg(&self) -> &[usize] {
        &self.nonneg
    }

    pub fn objective(&self) -> &[(usize, Rational)] {
        &self.objective
    }

    /// Rows and columns of the moment matrix (empty for [`Self::from_parts`]).
    pub fn index_words(&self) -> &[Word] {
        &self.index_words
    }

    /// Canonical trace word of each variable (empty for [`Self::from_parts`]).
    pub fn moment_words(&self) -> &[Word] {
        &self.moment_words
    }

    pub fn matrix(&self, y: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.entry(i, j).map_or(0.0, |v| y[v]))
    }

    /// Adjoint of `y -> M(y)`: sums the entries belonging to each variable.
    fn adjoint(&self, m: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_vars);
        for i in 0..self.size {
            for j in 0..self.size {
                if let Some(v) = self.entry(i, j) {
                    out[v] += m[(i, j)];
                }
            }
        }
        out
    }

    fn objective_vector(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.n_vars);
        for (v, w) in &self.objective {
            c[*v] += rational::to_f64(w);
        }
        c
    }

    pub fn objective_value(&self, y: &[f64]) -> f64 {
        self.objective.iter().map(|(v, w)| rational::to_f64(w) * y[*v]).sum()
    }

    /// Largest violation of each constraint family at `y`.
    pub fn feasibility(&self, y: &[f64]) -> Feasibility {
        let equality = self
            .equalities
            .iter()
            .map(|e| {
                let lhs: f64 = e.terms.iter().map(|(v, c)| rational::to_f64(c) * y[*v]).sum();
                (lhs - rational::to_f64(&e.rhs)).abs()
            })
            .fold(0.0, f64::max);
        let nonneg = self.nonneg.iter().map(|&v| (-y[v]).max(0.0)).fold(0.0, f64::max);
        let eig = self.matrix(y).symmetric_eigen();
        let psd = (-eig.eigenvalues.min()).max(0.0);
        Feasibility { equality, nonneg, psd }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feasibility {
    pub equality: f64,
    pub nonneg: f64,
    /// Negative of the smallest eigenvalue, clipped at 0.
    pub psd: f64,
}

impl Feasibility {
    pub fn max(&self) -> f64 {
        self.equality.max(self.nonneg).max(self.psd)
    }
}

/// Canonical representative of `Re tau(w)`: reduce, reduce cyclically, then take the
/// least rotation of the word or its reversal. `None` when the trace vanishes.
pub fn trace_class(w: &Word) -> Option<Word> {
    let r = w.reduced()?.cyclically_reduced()?;
    let forward = r.least_rotation();
    let backward = r.reversed().least_rotation();
    Some(forward.min(backward))
}

fn is_palindrome(letters: &[Letter]) -> bool {
    letters.iter().eq(letters.iter().rev())
}

/// `tau(w) ≥ 0` for every trace when some rotation of `w` splits into two palindromes:
/// each palindrome of projections is `s s*` or `s e s*`, hence positive, and the trace of
/// a product of two positive operators is nonnegative.
pub fn is_trace_positive(w: &Word) -> bool {
    let letters = w.letters();
    let n = letters.len();
    if n == 0 {
        return true;
    }
    (0..n).any(|rot| {
        let r: Vec<Letter> = letters[rot..].iter().chain(&letters[..rot]).copied().collect();
        (0..=n).any(|i| is_palindrome(&r[..i]) && is_palindrome(&r[i..]))
    })
}

fn index_words(n: usize, k: usize, level: usize) -> Vec<Word> {
    let mut words = vec![Word::unit()];
    let letters: Vec<Letter> = (0..n).flat_map(|x| (0..k).map(move |a| Letter::new(x, a))).collect();
    words.extend(letters.iter().map(|&l| Word::from_letters(vec![l])));
    if level >= 2 {
        for &l1 in &letters {
            for &l2 in &letters {
                if l1.input != l2.input {
                    words.push(Word::from_letters(vec![l1, l2]));
                }
            }
        }
    }
    words
}

/// Tracial moment relaxation at `level` 1 (index words `1, e_{x,a}`) or 2 (adding
/// `e_{x,a} e_{y,b}` with `x ≠ y`).
///
/// Constraints: `y[1] = 1`; `sum_a M[u, e_{x,a} v] = M[u, v]` whenever every
/// `e_{x,a} v` is an index word; `y[w] ≥ 0` for trace-positive words.
/// Objective: `sum pi(x,y) lambda(x,y,a,b) M[e_{x,a}, e_{y,b}]`.
pub fn build_npa(game: &Game, density: &Density, level: usize) -> Result<MomentMatrixProblem> {
    if !(1..=2).contains(&level) {
        return Err(Error::InvalidLevel(level));
    }
    density.check_game(game)?;
    let (n, k) = (game.n_inputs(), game.n_outputs());
    let words = index_words(n, k, level);
    let size = words.len();
    let position: BTreeMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();

    let classes: Vec<Option<Word>> = (0..size * size)
        .map(|idx| {
            let (i, j) = (idx / size, idx % size);
            trace_class(&words[i].reversed().concat(&words[j]))
        })
        .collect();
    let moment_words: Vec<Word> = classes.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let var_of: BTreeMap<&Word, usize> = moment_words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let entries: Vec<Option<usize>> = classes.iter().map(|c| c.as_ref().map(|w| var_of[w])).collect();
    let entry = |i: usize, j: usize| entries[i * size + j];

    let mut equalities = vec![MomentEquality {
        terms: vec![(var_of[&Word::unit()], rational::one())],
        rhs: rational::one(),
    }];
    let mut seen = BTreeSet::new();
    for u in 0..size {
        for (v, vw) in words.iter().enumerate() {
            for x in 0..n {
                let shifted: Option<Vec<usize>> = (0..k)
                    .map(|a| {
                        let mut letters = vec![Letter::new(x, a)];
                        letters.extend_from_slice(vw.letters());
                        position.get(&Word::from_letters(letters)).copied()
                    })
                    .collect();
                let Some(shifted) = shifted else { continue };
                let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                for s in shifted {
                    if let Some(var) = entry(u, s) {
                        *row.entry(var).or_insert_with(Rational::zero) += rational::one();
                    }
                }
                if let Some(var) = entry(u, v) {
                    *row.entry(var).or_insert_with(Rational::zero) -= rational::one();
                }
                let terms: Vec<(usize, Rational)> = row.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                if !terms.is_empty() && seen.insert(terms.clone()) {
                    equalities.push(MomentEquality {
                        terms,
                        rhs: rational::zero(),
                    });
                }
            }
        }
    }

    let nonneg: Vec<usize> = (0..moment_words.len()).filter(|&v| is_trace_positive(&moment_words[v])).collect();

    let mut objective: BTreeMap<usize, Rational> = BTreeMap::new();
    for (x, y, w) in density.support() {
        for (a, b) in game.allowed_set(x, y) {
            let i = position[&Word::from_letters(vec![Letter::new(x, a)])];
            let j = position[&Word::from_letters(vec![Letter::new(y, b)])];
            if let Some(var) = entry(i, j) {
                *objective.entry(var).or_insert_with(Rational::zero) += w;
            }
        }
    }

    Ok(MomentMatrixProblem {
        size,
        n_vars: moment_words.len(),
        entries,
        equalities,
        nonneg,
        objective: objective.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        box_bound: 1.0,
        index_words: words,
        moment_words,
    })
}

/// Moment vector `y[w] = Re tau(w)` of a realization on the problem's canonical words.
pub fn realization_moments(prob: &MomentMatrixProblem, r: &Realization) -> Result<Vec<f64>> {
    if prob.moment_words.is_empty() {
        return Err(Error::DimensionMismatch("problem has no word structure".into()));
    }
    prob.moment_words.iter().map(|w| trace_of_word(r, w)).collect()
}

fn trace_of_word(r: &Realization, w: &Word) -> Result<f64> {
    let mut total = 0.0;
    for block in r.blocks() {
        let d = block.dim();
        let mut m = linalg::identity(d);
        for l in w.letters() {
            if l.input >= block.n_inputs() || l.output >= block.n_outputs() {
                return Err(Error::DimensionMismatch(format!("word letter {l} outside the realization")));
            }
            m = &m * block.projection(l.input, l.output);
        }
        total += block.weight() * linalg::normalized_trace(&m).re;
    }
    Ok(total)
}

/// How far a realization's moment matrix is from the relaxation's feasible set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessCheck {
    /// Largest `|Re tau(u* v) - y[class(u* v)]|` over matrix entries (zero entries included).
    pub identification: f64,
    pub feasibility: Feasibility,
    pub objective_value: f64,
}

impl WitnessCheck {
    pub fn max_defect(&self) -> f64 {
        self.identification.max(self.feasibility.max())
    }
}

pub fn check_witness(prob: &MomentMatrixProblem, r: &Realization) -> Result<WitnessCheck> {
    let y = realization_moments(prob, r)?;
    let mut identification = 0.0_f64;
    for (i, u) in prob.index_words.iter().enumerate() {
        for (j, v) in prob.index_words.iter().enumerate() {
            let direct = trace_of_word(r, &u.reversed().concat(v))?;
            let via = prob.entry(i, j).map_or(0.0, |var| y[var]);
            identification = identification.max((direct - via).abs());
        }
    }
    Ok(WitnessCheck {
        identification,
        feasibility: prob.feasibility(&y),
        objective_value: prob.objective_value(&y),
    })
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Initial penalty parameter.
    pub rho: f64,
    /// Iterations between penalty rebalancing.
    pub balance_every: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 200_000,
            rho: 1.0,
            balance_every: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Converged,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    /// `M(y)` at the final iterate.
    pub matrix: DMatrix<f64>,
    pub moments: Vec<f64>,
    pub objective_value: f64,
    /// `sqrt(||M(y) - Z||_F^2 + ||y_N - s||^2)` at the final iterate.
    pub primal_residual: f64,
    /// `rho * sqrt(||M*(Z - Z_prev)||^2 + ||s - s_prev||^2)` at the final iterate.
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    /// Multiplier estimate for `M(y) ⪰ 0`.
    pub dual_matrix: DMatrix<f64>,
    /// Multiplier estimate for `y_N ≥ 0`, indexed like the problem's nonnegative set.
    pub dual_nonneg: Vec<f64>,
}

/// Independent rows of the equality system, found by exact elimination.
fn independent_equalities(prob: &MomentMatrixProblem) -> Result<Vec<usize>> {
    let m = prob.n_vars;
    // Echelon rows (dense) with their pivot columns, plus reduced right-hand sides.
    let mut basis: Vec<(usize, Vec<Rational>, Rational)> = Vec::new();
    let mut keep = Vec::new();
    for (idx, e) in prob.equalities.iter().enumerate() {
        let mut row = vec![Rational::zero(); m];
        for (v, c) in &e.terms {
            row[*v] += c;
        }
        let mut rhs = e.rhs.clone();
        for (pivot, b, brhs) in &basis {
            if row[*pivot].is_zero() {
                continue;
            }
            let f = row[*pivot].clone();
            for (r, bv) in row.iter_mut().zip(b) {
                if !bv.is_zero() {
                    *r -= &f * bv;
                }
            }
            rhs -= &f * brhs;
        }
        match row.iter().position(|c| !c.is_zero()) {
            Some(pivot) => {
                let inv = row[pivot].recip();
                for r in row.iter_mut() {
                    *r *= &inv;
                }
                rhs *= &inv;
                basis.push((pivot, row, rhs));
                keep.push(idx);
            }
            None if !rhs.is_zero() => return Err(Error::Infeasible),
            None => {}
        }
    }
    Ok(keep)
}

struct Constraints {
    g: DMatrix<f64>,
    h: DVector<f64>,
}

impl Constraints {
    fn new(prob: &MomentMatrixProblem) -> Result<Self> {
        let rows = independent_equalities(prob)?;
        let mut g = DMatrix::zeros(rows.len(), prob.n_vars);
        let mut h = DVector::zeros(rows.len());
        for (r, &idx) in rows.iter().enumerate() {
            let e = &prob.equalities[idx];
            for (v, c) in &e.terms {
                g[(r, *v)] += rational::to_f64(c);
            }
            h[r] = rational::to_f64(&e.rhs);
        }
        Ok(Self { g, h })
    }

    /// Cholesky factor of `G diag(w) G^T`.
    fn weighted_gram(&self, w: &DVector<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
        let gw = DMatrix::from_fn(self.g.nrows(), self.g.ncols(), |i, j| self.g[(i, j)] * w[j]);
        Cholesky::new(&gw * self.g.transpose())
    }
}

fn project_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let clamped = eig.eigenvalues.map(|v| v.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose()
}

/// ADMM on `maximize c·y` with splitting `M(y) = Z ⪰ 0`, `y_N = s ≥ 0` and the
/// equalities kept inside the `y` step.
///
/// The `y` step is an equality-constrained quadratic with diagonal Hessian
/// `rho (n_w + [w ∈ N])`, `n_w` being the number of matrix entries holding `y[w]`; it is
/// solved through a cached Cholesky factor of `G D^{-1} G^T`.
pub fn solve_sdp(prob: &MomentMatrixProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    let size = prob.size;
    let m = prob.n_vars;
    let cons = Constraints::new(prob)?;
    let c = prob.objective_vector();

    let mut counts = DVector::zeros(m);
    for v in prob.entries.iter().flatten() {
        counts[*v] += 1.0;
    }
    let mut mask = DVector::zeros(m);
    for &v in &prob.nonneg {
        mask[v] = 1.0;
    }

    let mut rho = opts.rho;
    let inverse_hessian = |rho: f64| (&counts + &mask).map(|v| 1.0 / (rho * v));
    let mut d_inv = inverse_hessian(rho);
    let mut chol = factor(&cons, &d_inv)?;

    let mut y = DVector::zeros(m);
    let mut z = DMatrix::zeros(size, size);
    let mut u = DMatrix::zeros(size, size);
    let mut s = DVector::zeros(m);
    let mut v = DVector::zeros(m);
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        let q = &c + (prob.adjoint(&(&z - &u)) + (&s - &v).component_mul(&mask)) * rho;
        y = match &chol {
            Some(ch) => {
                let rhs = &cons.g * q.component_mul(&d_inv) - &cons.h;
                let lambda = ch.solve(&rhs);
                (q - cons.g.transpose() * lambda).component_mul(&d_inv)
            }
            None => q.component_mul(&d_inv),
        };
        let my = prob.matrix(y.as_slice());
        let z_prev = std::mem::replace(&mut z, project_psd(&(&my + &u)));
        let s_prev = std::mem::replace(&mut s, (&y + &v).component_mul(&mask).map(|t| t.max(0.0)));
        let r_matrix = &my - &z;
        let r_vec = (&y - &s).component_mul(&mask);
        u += &r_matrix;
        v += &r_vec;

        primal = (r_matrix.norm_squared() + r_vec.norm_squared()).sqrt();
        dual = rho * (prob.adjoint(&(&z - &z_prev)).norm_squared() + (&s - &s_prev).norm_squared()).sqrt();
        if primal <= opts.tol && dual <= opts.tol {
            break;
        }
        if iterations % opts.balance_every == 0 {
            let factor_change = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            if factor_change != 1.0 {
                rho *= factor_change;
                u /= factor_change;
                v /= factor_change;
                d_inv = inverse_hessian(rho);
                chol = factor(&cons, &d_inv)?;
            }
        }
    }

    let status = if primal <= opts.tol && dual <= opts.tol {
        SdpStatus::Converged
    } else {
        SdpStatus::MaxIters
    };
    let moments: Vec<f64> = y.iter().copied().collect();
    let solution = SdpSolution {
        matrix: prob.matrix(&moments),
        objective_value: prob.objective_value(&moments),
        moments,
        primal_residual: primal,
        dual_residual: dual,
        iterations,
        status,
        dual_matrix: &u * (-rho),
        dual_nonneg: prob.nonneg.iter().map(|&w| -rho * v[w]).collect(),
    };
    match status {
        SdpStatus::Converged => Ok(solution),
        SdpStatus::MaxIters => Err(Error::NotConverged(Box::new(solution))),
    }
}

fn factor(cons: &Constraints, d_inv: &DVector<f64>) -> Result<Option<Cholesky<f64, nalgebra::Dyn>>> {
    if cons.g.nrows() == 0 {
        return Ok(None);
    }
    cons.weighted_gram(d_inv)
        .map(Some)
        .ok_or_else(|| Error::DimensionMismatch("equality system is numerically rank deficient".into()))
}

/// Upper bound certified from the solver's multiplier estimates.
///
/// With `S = Π_PSD(dual_matrix)`, `v = max(0, dual_nonneg)` and `λ` the least-squares
/// solution of `G^T λ ≈ g := c + M*(S) + E_N v`, every feasible `y` satisfies
/// `c·y ≤ λ·h + r·y` where `r = g - G^T λ`. Bounding `r·y` with `|y| ≤ box_bound`
/// (and `y ≥ 0` on the nonnegative set) gives a bound that holds no matter how
/// accurate the solver was.
pub fn certified_bound(prob: &MomentMatrixProblem, sol: &SdpSolution) -> Result<f64> {
    let cons = Constraints::new(prob)?;
    let s = project_psd(&sol.dual_matrix);
    let mut g = prob.objective_vector() + prob.adjoint(&s);
    for (&w, &mult) in prob.nonneg.iter().zip(&sol.dual_nonneg) {
        g[w] += mult.max(0.0);
    }
    let (lambda_h, r) = if cons.g.nrows() == 0 {
        (0.0, g)
    } else {
        let gram = Cholesky::new(&cons.g * cons.g.transpose())
            .ok_or_else(|| Error::DimensionMismatch("equality system is numerically rank deficient".into()))?;
        let lambda = gram.solve(&(&cons.g * &g));
        (lambda.dot(&cons.h), &g - cons.g.transpose() * lambda)
    };
    let mut is_nonneg = vec![false; prob.n_vars];
    for &w in &prob.nonneg {
        is_nonneg[w] = true;
    }
    let slack: f64 = r
        .iter()
        .zip(&is_nonneg)
        .map(|(&rw, &nn)| if nn { rw.max(0.0) } else { rw.abs() })
        .sum();
    Ok(lambda_h + prob.box_bound * slack)
}

#[derive(Clone, Debug)]
pub struct QcBound {
    /// `solution.objective_value + soundness_margin`.
    pub bound: f64,
    pub solution: SdpSolution,
    pub soundness_margin: f64,
}

pub fn qc_upper_bound(game: &Game, density: &Density, level: usize) -> Result<QcBound> {
    qc_upper_bound_with(game, density, level, &SdpOptions::default())
}

pub fn qc_upper_bound_with(game: &Game, density: &Density, level: usize, opts: &SdpOptions) -> Result<QcBound> {
    let prob = build_npa(game, density, level)?;
    let solution = solve_sdp(&prob, opts)?;
    let bound = certified_bound(&prob, &solution)?;
    Ok(QcBound {
        bound,
        soundness_margin: bound - solution.objective_value,
        solution,
    })
}
