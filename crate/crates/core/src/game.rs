//! Synchronous games, question densities and their products.
//!
//! A game on `n` inputs and `k` outputs is a boolean rule table `allowed(x, y, a, b)`.
//! Products pair indices row-major: the pair `(i1, i2)` of a product of
//! factors with `n2` elements in the second coordinate has index `i1 * n2 + i2`.
//! Every module uses this encoding.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Row-major index of the pair `(first, second)` when the second coordinate ranges over `n_second`.
#[inline]
pub fn pair_index(first: usize, second: usize, n_second: usize) -> usize {
    first * n_second + second
}

/// Inverse of [`pair_index`].
#[inline]
pub fn split_index(index: usize, n_second: usize) -> (usize, usize) {
    (index / n_second, index % n_second)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Game {
    n_inputs: usize,
    n_outputs: usize,
    allowed: Vec<bool>,
}

impl Game {
    /// Builds a game from the list of allowed `(x, y, a, b)` tuples (0-based).
    pub fn new(
        n_inputs: usize,
        n_outputs: usize,
        allowed_pairs: &[(usize, usize, usize, usize)],
    ) -> Result<Self> {
        let mut game = Self::empty(n_inputs, n_outputs)?;
        for &(x, y, a, b) in allowed_pairs {
            Error::check_index("x", x, n_inputs)?;
            Error::check_index("y", y, n_inputs)?;
            Error::check_index("a", a, n_outputs)?;
            Error::check_index("b", b, n_outputs)?;
            let i = game.offset(x, y, a, b);
            game.allowed[i] = true;
        }
        game.check_synchronous()?;
        Ok(game)
    }

    /// Builds a game from a rule predicate.
    pub fn from_rule(
        n_inputs: usize,
        n_outputs: usize,
        rule: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let mut game = Self::empty(n_inputs, n_outputs)?;
        for x in 0..n_inputs {
            for y in 0..n_inputs {
                for a in 0..n_outputs {
                    for b in 0..n_outputs {
                        let i = game.offset(x, y, a, b);
                        game.allowed[i] = rule(x, y, a, b);
                    }
                }
            }
        }
        game.check_synchronous()?;
        Ok(game)
    }

    fn empty(n_inputs: usize, n_outputs: usize) -> Result<Self> {
        if n_inputs == 0 {
            return Err(Error::EmptyDimension("n_inputs"));
        }
        if n_outputs == 0 {
            return Err(Error::EmptyDimension("n_outputs"));
        }
        Ok(Self {
            n_inputs,
            n_outputs,
            allowed: vec![false; n_inputs * n_inputs * n_outputs * n_outputs],
        })
    }

    /// The game whose only rule is that equal questions get equal answers.
    pub fn synchronicity(n_inputs: usize, n_outputs: usize) -> Result<Self> {
        Self::from_rule(n_inputs, n_outputs, |x, y, a, b| x != y || a == b)
    }

    fn check_synchronous(&self) -> Result<()> {
        for x in 0..self.n_inputs {
            for a in 0..self.n_outputs {
                for b in 0..self.n_outputs {
                    if a != b && self.allowed(x, x, a, b) {
                        return Err(Error::SynchronicityViolation { input: x, a, b });
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn offset(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.n_inputs + y) * self.n_outputs + a) * self.n_outputs + b
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    #[inline]
    pub fn allowed(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.allowed[self.offset(x, y, a, b)]
    }

    /// The answer set `E_{x,y}`, in lexicographic order.
    pub fn allowed_set(&self, x: usize, y: usize) -> Vec<(usize, usize)> {
        let k = self.n_outputs;
        (0..k)
            .flat_map(|a| (0..k).map(move |b| (a, b)))
            .filter(|&(a, b)| self.allowed(x, y, a, b))
            .collect()
    }

    /// All allowed tuples `(x, y, a, b)` in lexicographic order.
    pub fn allowed_tuples(&self) -> Vec<(usize, usize, usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n_inputs {
            for y in 0..self.n_inputs {
                for (a, b) in self.allowed_set(x, y) {
                    out.push((x, y, a, b));
                }
            }
        }
        out
    }

    /// Copy with a single rule bit changed. Fails if the change breaks synchronicity.
    pub fn with_rule(&self, x: usize, y: usize, a: usize, b: usize, value: bool) -> Result<Self> {
        Error::check_index("x", x, self.n_inputs)?;
        Error::check_index("y", y, self.n_inputs)?;
        Error::check_index("a", a, self.n_outputs)?;
        Error::check_index("b", b, self.n_outputs)?;
        let mut game = self.clone();
        let i = game.offset(x, y, a, b);
        game.allowed[i] = value;
        game.check_synchronous()?;
        Ok(game)
    }

    /// Conjunctive product: both coordinates must be won.
    pub fn product(&self, other: &Game) -> Game {
        let (n1, k1) = (self.n_inputs, self.n_outputs);
        let (n2, k2) = (other.n_inputs, other.n_outputs);
        Game::from_rule(n1 * n2, k1 * k2, |x, y, a, b| {
            let (x1, x2) = split_index(x, n2);
            let (y1, y2) = split_index(y, n2);
            let (a1, a2) = split_index(a, k2);
            let (b1, b2) = split_index(b, k2);
            self.allowed(x1, y1, a1, b1) && other.allowed(x2, y2, a2, b2)
        })
        .expect("product of synchronous games is synchronous")
    }

    /// `allowed(x, y, a, b) == allowed(y, x, b, a)` for every tuple.
    pub fn is_symmetric(&self) -> bool {
        let (n, k) = (self.n_inputs, self.n_outputs);
        (0..n).all(|x| {
            (0..n).all(|y| {
                (0..k).all(|a| (0..k).all(|b| self.allowed(x, y, a, b) == self.allowed(y, x, b, a)))
            })
        })
    }
}

/// Probability distribution on question pairs, held exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    n_inputs: usize,
    weights: Vec<Rational>,
}

impl Density {
    /// Weights are indexed `x * n_inputs + y`.
    pub fn new(n_inputs: usize, weights: Vec<Rational>) -> Result<Self> {
        if n_inputs == 0 {
            return Err(Error::EmptyDimension("n_inputs"));
        }
        if weights.len() != n_inputs * n_inputs {
            return Err(Error::DimensionMismatch(format!(
                "density on {} inputs needs {} weights, got {}",
                n_inputs,
                n_inputs * n_inputs,
                weights.len()
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.is_negative() {
                return Err(Error::NegativeDensity {
                    x: i / n_inputs,
                    y: i % n_inputs,
                });
            }
        }
        let total: Rational = weights.iter().sum();
        if total != rational::one() {
            return Err(Error::DensityNotNormalized(rational::render(&total)));
        }
        Ok(Self { n_inputs, weights })
    }

    pub fn uniform(n_inputs: usize) -> Result<Self> {
        if n_inputs == 0 {
            return Err(Error::EmptyDimension("n_inputs"));
        }
        let w = rational::ratio(1, (n_inputs * n_inputs) as i64);
        Ok(Self {
            n_inputs,
            weights: vec![w; n_inputs * n_inputs],
        })
    }

    /// Unit mass on the single question pair `(x, y)`.
    pub fn point_mass(n_inputs: usize, x: usize, y: usize) -> Result<Self> {
        Error::check_index("x", x, n_inputs)?;
        Error::check_index("y", y, n_inputs)?;
        let mut weights = vec![rational::zero(); n_inputs * n_inputs];
        weights[x * n_inputs + y] = rational::one();
        Self::new(n_inputs, weights)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn weight(&self, x: usize, y: usize) -> &Rational {
        &self.weights[x * self.n_inputs + y]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let w = rational::ratio(1, (self.n_inputs * self.n_inputs) as i64);
        self.weights.iter().all(|v| *v == w)
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.n_inputs;
        (0..n).all(|x| (0..n).all(|y| self.weight(x, y) == self.weight(y, x)))
    }

    /// Pairs `(x, y)` with nonzero weight.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        let n = self.n_inputs;
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(move |(i, w)| (i / n, i % n, w))
    }

    /// `pi1 x pi2`, indexed row-major over input pairs.
    pub fn product(&self, other: &Density) -> Density {
        let (n1, n2) = (self.n_inputs, other.n_inputs);
        let n = n1 * n2;
        let mut weights = vec![rational::zero(); n * n];
        for x1 in 0..n1 {
            for y1 in 0..n1 {
                let w1 = self.weight(x1, y1);
                for x2 in 0..n2 {
                    for y2 in 0..n2 {
                        let x = pair_index(x1, x2, n2);
                        let y = pair_index(y1, y2, n2);
                        weights[x * n + y] = w1 * other.weight(x2, y2);
                    }
                }
            }
        }
        Density {
            n_inputs: n,
            weights,
        }
    }

    pub(crate) fn check_game(&self, game: &Game) -> Result<()> {
        if self.n_inputs != game.n_inputs() {
            return Err(Error::DimensionMismatch(format!(
                "density has {} inputs but game has {}",
                self.n_inputs,
                game.n_inputs()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn to_zero_based(e: &[(usize, usize, usize, usize)]) -> Vec<(usize, usize, usize, usize)> {
        e.iter().map(|&(x, y, a, b)| (x - 1, y - 1, a - 1, b - 1)).collect()
    }

    #[test]
    fn example1_sets() {
        let g = catalog::example1();
        assert_eq!(g.allowed_set(0, 0), vec![(0, 0), (1, 1)]);
        assert_eq!(g.allowed_set(1, 1), vec![(0, 0), (1, 1)]);
        assert_eq!(g.allowed_set(0, 1), vec![(0, 0)]);
        assert_eq!(g.allowed_set(1, 0), vec![(0, 1)]);
    }

    #[test]
    fn example2_sets() {
        let g = catalog::example2();
        assert_eq!((g.n_inputs(), g.n_outputs()), (3, 2));
        assert_eq!(g.allowed_set(0, 2), vec![(1, 0)]);
        assert_eq!(g.allowed_set(2, 0), vec![(1, 0)]);
        assert_eq!(g.allowed_set(1, 2), vec![(0, 1)]);
    }

    #[test]
    fn rejects_asynchronous_rules() {
        let err = Game::new(2, 2, &to_zero_based(&[(1, 1, 1, 2)])).unwrap_err();
        assert!(matches!(err, Error::SynchronicityViolation { input: 0, a: 0, b: 1 }));
        let err = Game::new(2, 2, &[(0, 2, 0, 0)]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { .. }));
    }

    #[test]
    fn synchronicity_game_sets() {
        let g = Game::synchronicity(2, 2).unwrap();
        assert_eq!(g.allowed_set(0, 0), vec![(0, 0), (1, 1)]);
        assert_eq!(g.allowed_set(0, 1).len(), 4);

        let g = Game::synchronicity(1, 1).unwrap();
        assert!(g.allowed(0, 0, 0, 0));

        let g = Game::synchronicity(3, 2).unwrap();
        assert_eq!(g.allowed_set(0, 1).len(), 4);
        assert_eq!(g.allowed_set(0, 0).len(), 2);
    }

    #[test]
    fn example1_squared_sets() {
        let g = catalog::example1();
        let gg = g.product(&g);
        assert_eq!((gg.n_inputs(), gg.n_outputs()), (4, 4));
        // (x1, x2) = (1, 1) and (y1, y2) = (2, 2) in 1-based pair notation.
        let x = pair_index(0, 0, 2);
        let y = pair_index(1, 1, 2);
        assert_eq!(gg.allowed_set(x, y), vec![(pair_index(0, 0, 2), pair_index(0, 0, 2))]);
        let x = pair_index(0, 1, 2);
        let y = pair_index(1, 0, 2);
        assert_eq!(gg.allowed_set(x, y), vec![(pair_index(0, 0, 2), pair_index(0, 1, 2))]);
    }

    #[test]
    fn product_with_trivial_game_is_a_relabeling() {
        let g = catalog::example2();
        let one = Game::synchronicity(1, 1).unwrap();
        assert_eq!(g.product(&one), g);
        assert_eq!(one.product(&g), g);
    }

    #[test]
    fn symmetry() {
        assert!(!catalog::example1().is_symmetric());
        // E_{1,2} = {(1,2)} but E_{2,1} = {(1,2)} rather than {(2,1)}.
        assert!(!catalog::example2().is_symmetric());
        assert!(Game::synchronicity(3, 2).unwrap().is_symmetric());
        // The rule only depends on the unordered question pair.
        let g = catalog::example2();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(g.allowed_set(x, y), g.allowed_set(y, x));
            }
        }
    }

    #[test]
    fn uniform_densities() {
        assert!(Density::uniform(2).unwrap().weights().iter().all(|w| *w == ratio(1, 4)));
        assert!(Density::uniform(3).unwrap().weights().iter().all(|w| *w == ratio(1, 9)));
        assert_eq!(Density::uniform(1).unwrap().weights(), &[ratio(1, 1)]);
    }

    #[test]
    fn product_densities() {
        let d = Density::uniform(2).unwrap();
        let dd = d.product(&d);
        assert_eq!(dd.n_inputs(), 4);
        assert!(dd.weights().iter().all(|w| *w == ratio(1, 16)));

        let d3 = Density::uniform(3).unwrap();
        assert!(d3.product(&d3).weights().iter().all(|w| *w == ratio(1, 81)));

        let point = Density::point_mass(2, 1, 0).unwrap();
        let prod = d3.product(&point);
        for x1 in 0..3 {
            for y1 in 0..3 {
                for x2 in 0..2 {
                    for y2 in 0..2 {
                        let w = prod.weight(pair_index(x1, x2, 2), pair_index(y1, y2, 2));
                        let expected = if (x2, y2) == (1, 0) { ratio(1, 9) } else { ratio(0, 1) };
                        assert_eq!(*w, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            Density::new(1, vec![ratio(1, 2)]),
            Err(Error::DensityNotNormalized(_))
        ));
        assert!(matches!(
            Density::new(2, vec![ratio(1, 1), ratio(1, 2), ratio(-1, 2), ratio(0, 1)]),
            Err(Error::NegativeDensity { x: 1, y: 0 })
        ));
    }

    pub(crate) fn arb_game(max_n: usize, max_k: usize) -> impl Strategy<Value = Game> {
        (1..=max_n, 1..=max_k).prop_flat_map(|(n, k)| {
            proptest::collection::vec(any::<bool>(), n * n * k * k).prop_map(move |bits| {
                Game::from_rule(n, k, |x, y, a, b| {
                    if x == y && a != b {
                        false
                    } else {
                        bits[((x * n + y) * k + a) * k + b]
                    }
                })
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn product_invariants(g1 in arb_game(3, 2), g2 in arb_game(2, 3)) {
            let p = g1.product(&g2);
            let n2 = g2.n_inputs();
            for x1 in 0..g1.n_inputs() {
                for y1 in 0..g1.n_inputs() {
                    for x2 in 0..n2 {
                        for y2 in 0..n2 {
                            let size = p.allowed_set(pair_index(x1, x2, n2), pair_index(y1, y2, n2)).len();
                            prop_assert_eq!(size, g1.allowed_set(x1, y1).len() * g2.allowed_set(x2, y2).len());
                        }
                    }
                }
            }
            if g1.is_symmetric() && g2.is_symmetric() {
                prop_assert!(p.is_symmetric());
            }
        }

        #[test]
        fn product_density_sums_to_one(a in 1u32..5, b in 1u32..5, n1 in 1usize..4, n2 in 1usize..4) {
            // Point-mass mixtures with rational weights.
            let mk = |n: usize, s: u32| {
                let mut w = vec![ratio(0, 1); n * n];
                let total: i64 = (1..=(n * n) as i64).map(|i| i * s as i64).sum();
                for (i, v) in w.iter_mut().enumerate() {
                    *v = ratio((i as i64 + 1) * s as i64, total);
                }
                Density::new(n, w).unwrap()
            };
            let d = mk(n1, a).product(&mk(n2, b));
            let total: Rational = d.weights().iter().sum();
            prop_assert_eq!(total, ratio(1, 1));
        }
    }
}
