//! Noncommutative polynomials in the projections `e_{x,a}`.
//!
//! The ambient algebra is generated by self-adjoint idempotents `e_{x,a}` with
//! `sum_a e_{x,a} = 1` for every input `x`. Game mode additionally kills
//! `e_{x,a} e_{y,b}` whenever the rule forbids `(a, b)` on `(x, y)`.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{Density, Game};
use crate::linalg::{self, CMatrix};
use crate::quantum::{self, Block};
use crate::rational::{self, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub input: usize,
    pub output: usize,
}

impl Letter {
    pub fn new(input: usize, output: usize) -> Self {
        Self { input, output }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e[{},{}]", self.input + 1, self.output + 1)
    }
}

/// A monomial; the empty word is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// The adjoint: letters are self-adjoint, so this reverses the word.
    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Lexicographically least rotation.
    pub fn least_rotation(&self) -> Word {
        let n = self.len();
        (0..n.max(1))
            .map(|r| Word(self.0[r.min(n)..].iter().chain(&self.0[..r.min(n)]).copied().collect()))
            .min()
            .unwrap_or_default()
    }

    /// Idempotence and same-input orthogonality between neighbours. `None` means zero.
    pub fn reduced(&self) -> Option<Word> {
        reduce_letters(&self.0, Relations::Synchronicity)
    }

    /// Applies idempotence and same-input orthogonality across the wrap-around
    /// (valid under any trace). `None` means the trace vanishes.
    pub fn cyclically_reduced(&self) -> Option<Word> {
        let mut letters = self.0.clone();
        while letters.len() >= 2 {
            let (first, last) = (letters[0], letters[letters.len() - 1]);
            if first.input != last.input {
                break;
            }
            if first.output != last.output {
                return None;
            }
            letters.pop();
        }
        Some(Word(letters))
    }

    fn in_range(&self, n_inputs: usize, n_outputs: usize) -> bool {
        self.0.iter().all(|l| l.input < n_inputs && l.output < n_outputs)
    }
}

impl Ord for Word {
    /// Length first, then lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Which relations [`NCPoly::reduce`] rewrites with.
#[derive(Clone, Copy, Debug)]
pub enum Relations<'a> {
    Synchronicity,
    Game(&'a Game),
}

/// Reduces a word free of last-outcome letters with idempotence, same-input
/// orthogonality and (in game mode) forbidden products. Scans left to right with a
/// stack, which reaches the same fixpoint as repeated leftmost rewriting.
fn reduce_letters(letters: &[Letter], relations: Relations<'_>) -> Option<Word> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        push_reduced(&mut out, l, relations)?;
    }
    Some(Word(out))
}

fn push_reduced(out: &mut Vec<Letter>, l: Letter, relations: Relations<'_>) -> Option<()> {
    if let Some(&top) = out.last() {
        if top.input == l.input {
            return if top.output == l.output { Some(()) } else { None };
        }
        if let Relations::Game(g) = relations {
            if !g.allowed(top.input, l.input, top.output, l.output) {
                return None;
            }
        }
    }
    out.push(l);
    Some(())
}

/// A polynomial with exact rational coefficients; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCPoly {
    n_inputs: usize,
    n_outputs: usize,
    terms: BTreeMap<Word, Rational>,
}

impl NCPoly {
    pub fn zero(n_inputs: usize, n_outputs: usize) -> Self {
        Self {
            n_inputs,
            n_outputs,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_inputs: usize, n_outputs: usize, c: Rational) -> Self {
        Self::monomial(n_inputs, n_outputs, Word::unit(), c)
    }

    pub fn one(n_inputs: usize, n_outputs: usize) -> Self {
        Self::constant(n_inputs, n_outputs, rational::one())
    }

    pub fn generator(n_inputs: usize, n_outputs: usize, x: usize, a: usize) -> Self {
        Self::monomial(
            n_inputs,
            n_outputs,
            Word(vec![Letter::new(x, a)]),
            rational::one(),
        )
    }

    /// # Panics
    /// If a letter is outside the ambient dimensions.
    pub fn monomial(n_inputs: usize, n_outputs: usize, word: Word, c: Rational) -> Self {
        assert!(word.in_range(n_inputs, n_outputs), "letter out of range in {word}");
        let mut p = Self::zero(n_inputs, n_outputs);
        p.add_term(word, c);
        p
    }

    pub fn from_terms(
        n_inputs: usize,
        n_outputs: usize,
        terms: impl IntoIterator<Item = (Word, Rational)>,
    ) -> Result<Self> {
        let mut p = Self::zero(n_inputs, n_outputs);
        for (w, c) in terms {
            if !w.in_range(n_inputs, n_outputs) {
                return Err(Error::DimensionMismatch(format!(
                    "word {w} outside {n_inputs} inputs x {n_outputs} outputs"
                )));
            }
            p.add_term(w, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, word: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n_inputs, self.n_outputs)
    }

    /// Terms in length-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &Word) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn same_dims(&self, other: &Self) {
        assert_eq!(self.dims(), other.dims(), "polynomials over different generators");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_dims(other);
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&rational::int(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.n_inputs, self.n_outputs);
        for (w, v) in &self.terms {
            out.add_term(w.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_dims(other);
        let mut out = Self::zero(self.n_inputs, self.n_outputs);
        for (u, cu) in &self.terms {
            for (v, cv) in &other.terms {
                out.add_term(u.concat(v), cu * cv);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n_inputs, self.n_outputs);
        for (w, c) in &self.terms {
            out.add_term(w.reversed(), c.clone());
        }
        out
    }

    /// `h = sum_{x,y} pi(x,y) sum_{a,b} lambda(x,y,a,b) e_{x,a} e_{y,b}`, unreduced.
    pub fn game_polynomial(game: &Game, density: &Density) -> Result<Self> {
        density.check_game(game)?;
        let (n, k) = (game.n_inputs(), game.n_outputs());
        let mut out = Self::zero(n, k);
        for (x, y, w) in density.support() {
            for (a, b) in game.allowed_set(x, y) {
                out.add_term(Word(vec![Letter::new(x, a), Letter::new(y, b)]), w.clone());
            }
        }
        Ok(out)
    }

    /// Rewrites to a fixed normal form: every last-outcome letter `e_{x,k-1}` is first
    /// replaced by `1 - sum_{a<k-1} e_{x,a}`, then idempotence, same-input orthogonality
    /// and (game mode) forbidden products are applied until nothing changes.
    pub fn reduce(&self, relations: Relations<'_>) -> Self {
        let last = self.n_outputs - 1;
        let mut out = Self::zero(self.n_inputs, self.n_outputs);
        for (w, c) in &self.terms {
            // Expand last-outcome letters, reducing prefixes as we go.
            let mut partial: Vec<(Vec<Letter>, Rational)> = vec![(Vec::new(), c.clone())];
            for &l in w.letters() {
                let replacements: Vec<(Option<Letter>, Rational)> = if l.output == last {
                    std::iter::once((None, rational::one()))
                        .chain((0..last).map(|a| (Some(Letter::new(l.input, a)), rational::int(-1))))
                        .collect()
                } else {
                    vec![(Some(l), rational::one())]
                };
                let mut next = Vec::with_capacity(partial.len() * replacements.len());
                for (prefix, coeff) in &partial {
                    for (rep, sign) in &replacements {
                        let mut word = prefix.clone();
                        if let Some(r) = rep {
                            if push_reduced(&mut word, *r, relations).is_none() {
                                continue;
                            }
                        }
                        next.push((word, coeff * sign));
                    }
                }
                partial = next;
            }
            for (letters, coeff) in partial {
                if let Some(word) = reduce_letters(&letters, relations) {
                    out.add_term(word, coeff);
                }
            }
        }
        out
    }

    /// Replaces each word by its least rotation after cyclic reduction and merges
    /// coefficients. Equal outputs imply equal values under every trace.
    pub fn cyclic_normal_form(&self) -> Self {
        let mut out = Self::zero(self.n_inputs, self.n_outputs);
        for (w, c) in &self.terms {
            if let Some(r) = w.cyclically_reduced() {
                out.add_term(r.least_rotation(), c.clone());
            }
        }
        out
    }

    /// Substitutes `e_{x,a} -> P[x][a]` of one block.
    pub fn evaluate(&self, block: &Block) -> Result<CMatrix> {
        if block.n_inputs() != self.n_inputs || block.n_outputs() != self.n_outputs {
            return Err(Error::DimensionMismatch(format!(
                "block acts on {}x{} generators, polynomial on {}x{}",
                block.n_inputs(),
                block.n_outputs(),
                self.n_inputs,
                self.n_outputs
            )));
        }
        let d = block.dim();
        let mut acc = CMatrix::zeros(d, d);
        for (w, c) in &self.terms {
            let mut m = linalg::identity(d);
            for l in w.letters() {
                m = &m * block.projection(l.input, l.output);
            }
            acc += m * Complex64::new(rational::to_f64(c), 0.0);
        }
        Ok(acc)
    }

    /// Normalized trace of [`NCPoly::evaluate`].
    pub fn trace_on(&self, block: &Block) -> Result<f64> {
        Ok(linalg::normalized_trace(&self.evaluate(block)?).re)
    }
}

impl fmt::Display for NCPoly {
    /// Terms in length-lex order, `n/d` coefficients, 1-based letters.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0/1");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if w.is_empty() {
                write!(f, "{}", rational::render(c))?;
            } else {
                write!(f, "{}*{}", rational::render(c), w)?;
            }
        }
        Ok(())
    }
}

/// Randomized identity test on random finite-dimensional realizations of the
/// synchronicity algebra. Deterministic for a fixed seed.
#[derive(Clone, Debug)]
pub struct IdentityOracle {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
}

impl Default for IdentityOracle {
    fn default() -> Self {
        Self {
            trials: 30,
            dims: vec![2, 3, 4],
            seed: 0,
            tol: 1e-9,
        }
    }
}

impl IdentityOracle {
    fn for_each_block(&self, n: usize, k: usize, mut check: impl FnMut(&Block) -> bool) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for &d in &self.dims {
            for _ in 0..self.trials {
                let block = quantum::random_pvm_block(n, k, d, &mut rng);
                if !check(&block) {
                    return false;
                }
            }
        }
        true
    }

    fn check_dims(p1: &NCPoly, p2: &NCPoly) -> Result<()> {
        if p1.dims() != p2.dims() {
            return Err(Error::DimensionMismatch("polynomials over different generators".into()));
        }
        Ok(())
    }

    /// `p1 - p2` vanishes in operator norm on every sampled realization.
    pub fn operator_equal(&self, p1: &NCPoly, p2: &NCPoly) -> Result<bool> {
        Self::check_dims(p1, p2)?;
        let diff = p1.sub(p2);
        let (n, k) = diff.dims();
        Ok(self.for_each_block(n, k, |b| {
            linalg::op_norm(&diff.evaluate(b).expect("dims checked")) <= self.tol
        }))
    }

    /// `p1` and `p2` have equal normalized traces on every sampled realization.
    pub fn trace_equal(&self, p1: &NCPoly, p2: &NCPoly) -> Result<bool> {
        Self::check_dims(p1, p2)?;
        let diff = p1.sub(p2);
        let (n, k) = diff.dims();
        Ok(self.for_each_block(n, k, |b| {
            linalg::normalized_trace(&diff.evaluate(b).expect("dims checked")).norm() <= self.tol
        }))
    }
}
