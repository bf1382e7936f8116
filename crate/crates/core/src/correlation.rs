//! Correlations `p(a, b | x, y)` on synchronous question and answer sets.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{pair_index, split_index, Density, Game};
use crate::rational::{self, Rational};

/// Default tolerance for the membership predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A classical strategy `f : X -> A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicStrategy(Vec<usize>);

impl DeterministicStrategy {
    pub fn new(assignment: Vec<usize>, n_outputs: usize) -> Result<Self> {
        for &a in &assignment {
            Error::check_index("assignment", a, n_outputs)?;
        }
        Ok(Self(assignment))
    }

    /// Strategy number `index` in lexicographic order (first input most significant).
    pub fn from_index(mut index: u64, n_inputs: usize, n_outputs: usize) -> Self {
        let mut f = vec![0; n_inputs];
        for slot in f.iter_mut().rev() {
            *slot = (index % n_outputs as u64) as usize;
            index /= n_outputs as u64;
        }
        Self(f)
    }

    pub fn assignment(&self) -> &[usize] {
        &self.0
    }

    pub fn n_inputs(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn output(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `(f1 x f2)(x1, x2) = (f1(x1), f2(x2))`, row-major on both sides.
    pub fn product(&self, other: &Self, n_outputs_other: usize) -> Self {
        let n2 = other.n_inputs();
        let mut f = vec![0; self.n_inputs() * n2];
        for x1 in 0..self.n_inputs() {
            for x2 in 0..n2 {
                f[pair_index(x1, x2, n2)] =
                    pair_index(self.output(x1), other.output(x2), n_outputs_other);
            }
        }
        Self(f)
    }
}

impl std::fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a + 1)?;
        }
        write!(f, ")")
    }
}

/// Expected winning probability, exact when the correlation carries an exact table.
#[derive(Clone, Debug, PartialEq)]
pub struct Score {
    pub value: f64,
    pub exact: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Correlation {
    n_inputs: usize,
    n_outputs: usize,
    values: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl Correlation {
    /// Validates nonnegativity and per-question normalization within `tol`.
    pub fn from_table(n_inputs: usize, n_outputs: usize, values: Vec<f64>, tol: f64) -> Result<Self> {
        let c = Self {
            n_inputs,
            n_outputs,
            values,
            exact: None,
        };
        c.validate(tol)?;
        Ok(c)
    }

    pub fn from_exact(n_inputs: usize, n_outputs: usize, exact: Vec<Rational>) -> Result<Self> {
        let values = exact.iter().map(rational::to_f64).collect();
        let c = Self {
            n_inputs,
            n_outputs,
            values,
            exact: Some(exact),
        };
        c.validate(0.0)?;
        let table = c.exact.as_ref().unwrap();
        for x in 0..n_inputs {
            for y in 0..n_inputs {
                let mut total = rational::zero();
                for a in 0..n_outputs {
                    for b in 0..n_outputs {
                        total += &table[c.offset(x, y, a, b)];
                    }
                }
                if total != rational::one() {
                    return Err(Error::InvalidCorrelation(format!(
                        "row ({x}, {y}) sums to {}",
                        rational::render(&total)
                    )));
                }
            }
        }
        Ok(c)
    }

    /// Wraps a table produced by a trusted numerical routine without validation.
    pub(crate) fn from_raw(n_inputs: usize, n_outputs: usize, values: Vec<f64>) -> Self {
        Self {
            n_inputs,
            n_outputs,
            values,
            exact: None,
        }
    }

    pub fn from_deterministic(f: &DeterministicStrategy, n_outputs: usize) -> Self {
        let n = f.n_inputs();
        let mut exact = vec![rational::zero(); n * n * n_outputs * n_outputs];
        for x in 0..n {
            for y in 0..n {
                exact[((x * n + y) * n_outputs + f.output(x)) * n_outputs + f.output(y)] = rational::one();
            }
        }
        Self {
            n_inputs: n,
            n_outputs,
            values: exact.iter().map(rational::to_f64).collect(),
            exact: Some(exact),
        }
    }

    fn validate(&self, tol: f64) -> Result<()> {
        let (n, k) = (self.n_inputs, self.n_outputs);
        if n == 0 || k == 0 {
            return Err(Error::EmptyDimension("correlation"));
        }
        if self.values.len() != n * n * k * k {
            return Err(Error::DimensionMismatch(format!(
                "correlation table has {} entries, expected {}",
                self.values.len(),
                n * n * k * k
            )));
        }
        for x in 0..n {
            for y in 0..n {
                let mut total = 0.0;
                for a in 0..k {
                    for b in 0..k {
                        let v = self.get(x, y, a, b);
                        if v < -tol || !v.is_finite() {
                            return Err(Error::InvalidCorrelation(format!(
                                "p({a}, {b} | {x}, {y}) = {v}"
                            )));
                        }
                        total += v;
                    }
                }
                if (total - 1.0).abs() > tol.max(1e-12) {
                    return Err(Error::InvalidCorrelation(format!("row ({x}, {y}) sums to {total}")));
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

    /// `p(a, b | x, y)`.
    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.values[self.offset(x, y, a, b)]
    }

    pub fn get_exact(&self, x: usize, y: usize, a: usize, b: usize) -> Option<&Rational> {
        self.exact.as_ref().map(|t| &t[self.offset(x, y, a, b)])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact_values(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    fn alice_marginal(&self, x: usize, y: usize, a: usize) -> f64 {
        (0..self.n_outputs).map(|b| self.get(x, y, a, b)).sum()
    }

    fn bob_marginal(&self, x: usize, y: usize, b: usize) -> f64 {
        (0..self.n_outputs).map(|a| self.get(x, y, a, b)).sum()
    }

    pub fn is_nonsignalling(&self, tol: f64) -> bool {
        let (n, k) = (self.n_inputs, self.n_outputs);
        for x in 0..n {
            for a in 0..k {
                let reference = self.alice_marginal(x, 0, a);
                if (1..n).any(|y| (self.alice_marginal(x, y, a) - reference).abs() > tol) {
                    return false;
                }
            }
        }
        for y in 0..n {
            for b in 0..k {
                let reference = self.bob_marginal(0, y, b);
                if (1..n).any(|x| (self.bob_marginal(x, y, b) - reference).abs() > tol) {
                    return false;
                }
            }
        }
        true
    }

    /// `p(a, b | x, x) = 0` whenever `a != b`.
    pub fn is_synchronous(&self, tol: f64) -> bool {
        let (n, k) = (self.n_inputs, self.n_outputs);
        (0..n).all(|x| {
            (0..k).all(|a| (0..k).all(|b| a == b || self.get(x, x, a, b).abs() <= tol))
        })
    }

    fn check_game(&self, game: &Game) -> Result<()> {
        if (self.n_inputs, self.n_outputs) != (game.n_inputs(), game.n_outputs()) {
            return Err(Error::DimensionMismatch(format!(
                "correlation is {}x{} but game is {}x{}",
                self.n_inputs,
                self.n_outputs,
                game.n_inputs(),
                game.n_outputs()
            )));
        }
        Ok(())
    }

    /// No mass on forbidden answer pairs.
    pub fn is_perfect(&self, game: &Game, tol: f64) -> Result<bool> {
        self.check_game(game)?;
        let (n, k) = (self.n_inputs, self.n_outputs);
        for x in 0..n {
            for y in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        if !game.allowed(x, y, a, b) && self.get(x, y, a, b) > tol {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn tensor(&self, other: &Correlation) -> Correlation {
        let (n1, k1) = (self.n_inputs, self.n_outputs);
        let (n2, k2) = (other.n_inputs, other.n_outputs);
        let (n, k) = (n1 * n2, k1 * k2);
        let size = n * n * k * k;
        let mut values = vec![0.0; size];
        let mut exact = match (&self.exact, &other.exact) {
            (Some(_), Some(_)) => Some(vec![rational::zero(); size]),
            _ => None,
        };
        for x in 0..n {
            let (x1, x2) = split_index(x, n2);
            for y in 0..n {
                let (y1, y2) = split_index(y, n2);
                for a in 0..k {
                    let (a1, a2) = split_index(a, k2);
                    for b in 0..k {
                        let (b1, b2) = split_index(b, k2);
                        let i = ((x * n + y) * k + a) * k + b;
                        values[i] = self.get(x1, y1, a1, b1) * other.get(x2, y2, a2, b2);
                        if let Some(table) = exact.as_mut() {
                            table[i] = self.get_exact(x1, y1, a1, b1).unwrap()
                                * other.get_exact(x2, y2, a2, b2).unwrap();
                        }
                    }
                }
            }
        }
        Correlation {
            n_inputs: n,
            n_outputs: k,
            values,
            exact,
        }
    }

    /// `p_{x2,y2}(a1, b1 | x1, y1) = sum_{a2,b2} p((a1,a2), (b1,b2) | (x1,x2), (y1,y2))`.
    ///
    /// `first` and `second` are the `(n_inputs, n_outputs)` of the two factors.
    pub fn marginal(
        &self,
        fixed_x2: usize,
        fixed_y2: usize,
        first: (usize, usize),
        second: (usize, usize),
    ) -> Result<Correlation> {
        let (n1, k1) = first;
        let (n2, k2) = second;
        if n1 * n2 != self.n_inputs || k1 * k2 != self.n_outputs {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} correlation is not a product of {n1}x{k1} and {n2}x{k2}",
                self.n_inputs, self.n_outputs
            )));
        }
        Error::check_index("x2", fixed_x2, n2)?;
        Error::check_index("y2", fixed_y2, n2)?;
        let size = n1 * n1 * k1 * k1;
        let mut values = vec![0.0; size];
        let mut exact = self.exact.as_ref().map(|_| vec![rational::zero(); size]);
        for x1 in 0..n1 {
            for y1 in 0..n1 {
                let x = pair_index(x1, fixed_x2, n2);
                let y = pair_index(y1, fixed_y2, n2);
                for a1 in 0..k1 {
                    for b1 in 0..k1 {
                        let i = ((x1 * n1 + y1) * k1 + a1) * k1 + b1;
                        for a2 in 0..k2 {
                            for b2 in 0..k2 {
                                let (a, b) = (pair_index(a1, a2, k2), pair_index(b1, b2, k2));
                                values[i] += self.get(x, y, a, b);
                                if let Some(table) = exact.as_mut() {
                                    table[i] += self.get_exact(x, y, a, b).unwrap();
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(Correlation {
            n_inputs: n1,
            n_outputs: k1,
            values,
            exact,
        })
    }

    /// `sum pi(x,y) lambda(x,y,a,b) p(a,b|x,y)`.
    pub fn expected_value(&self, game: &Game, density: &Density) -> Result<Score> {
        self.check_game(game)?;
        density.check_game(game)?;
        let k = self.n_outputs;
        let mut value = 0.0;
        let mut exact = self.exact.as_ref().map(|_| rational::zero());
        for (x, y, w) in density.support() {
            let wf = rational::to_f64(w);
            for a in 0..k {
                for b in 0..k {
                    if !game.allowed(x, y, a, b) {
                        continue;
                    }
                    value += wf * self.get(x, y, a, b);
                    if let Some(acc) = exact.as_mut() {
                        let p = self.get_exact(x, y, a, b).unwrap();
                        if !p.is_zero() {
                            *acc += w * p;
                        }
                    }
                }
            }
        }
        if let Some(e) = &exact {
            value = rational::to_f64(e);
        }
        Ok(Score { value, exact })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rational::ratio;

    fn det(f: &[usize], k: usize) -> Correlation {
        Correlation::from_deterministic(&DeterministicStrategy::new(f.to_vec(), k).unwrap(), k)
    }

    #[test]
    fn deterministic_tables() {
        let p = det(&[0, 0], 2);
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(p.get_exact(x, y, 0, 0), Some(&ratio(1, 1)));
            }
        }
        let p = det(&[0, 1], 2);
        assert_eq!(p.get(0, 1, 0, 1), 1.0);
        assert_eq!(p.get(1, 0, 1, 0), 1.0);
        assert_eq!(p.get(0, 1, 0, 0), 0.0);
        assert!(p.is_synchronous(DEFAULT_TOL));
        assert!(p.is_nonsignalling(DEFAULT_TOL));
    }

    #[test]
    fn signalling_table_is_detected() {
        // p(1,1|1,1) = 1 and p(2,2|1,2) = 1: Alice's marginal at x = 1 depends on y.
        let mut v = vec![0.0; 16];
        let idx = |x: usize, y: usize, a: usize, b: usize| ((x * 2 + y) * 2 + a) * 2 + b;
        v[idx(0, 0, 0, 0)] = 1.0;
        v[idx(0, 1, 1, 1)] = 1.0;
        v[idx(1, 0, 0, 0)] = 1.0;
        v[idx(1, 1, 0, 0)] = 1.0;
        let p = Correlation::from_table(2, 2, v, 1e-12).unwrap();
        assert!(!p.is_nonsignalling(DEFAULT_TOL));
    }

    #[test]
    fn uniform_table_is_not_synchronous() {
        let p = Correlation::from_table(2, 2, vec![0.25; 16], 1e-12).unwrap();
        assert!(!p.is_synchronous(DEFAULT_TOL));
        assert!(p.is_nonsignalling(DEFAULT_TOL));
    }

    #[test]
    fn perfectness() {
        let sync = Game::synchronicity(2, 2).unwrap();
        let p = det(&[0, 0], 2);
        assert!(p.is_perfect(&sync, DEFAULT_TOL).unwrap());
        assert!(!p.is_perfect(&catalog::example1(), DEFAULT_TOL).unwrap());
        assert!(matches!(
            p.is_perfect(&catalog::example2(), DEFAULT_TOL),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn invalid_tables_are_rejected() {
        assert!(Correlation::from_table(1, 2, vec![0.5, 0.5, 0.5, 0.0], 1e-9).is_err());
        assert!(Correlation::from_table(1, 2, vec![1.5, -0.5, 0.0, 0.0], 1e-9).is_err());
        assert!(Correlation::from_table(1, 2, vec![1.0], 1e-9).is_err());
    }

    #[test]
    fn tensor_of_deterministic_is_deterministic_product() {
        let f = DeterministicStrategy::new(vec![0, 1], 2).unwrap();
        let g = DeterministicStrategy::new(vec![2, 0, 1], 3).unwrap();
        let lhs = Correlation::from_deterministic(&f, 2).tensor(&Correlation::from_deterministic(&g, 3));
        let rhs = Correlation::from_deterministic(&f.product(&g, 3), 6);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn marginal_of_tensor_recovers_factor() {
        let p1 = det(&[0, 1], 2);
        let p2 = Correlation::from_table(3, 2, vec![0.25; 36], 1e-12).unwrap();
        let t = p1.tensor(&p2);
        for x2 in 0..3 {
            for y2 in 0..3 {
                let m = t.marginal(x2, y2, (2, 2), (3, 2)).unwrap();
                for (u, v) in m.values().iter().zip(p1.values()) {
                    assert!((u - v).abs() < 1e-15);
                }
            }
        }
        assert!(t.marginal(0, 0, (2, 2), (2, 2)).is_err());

        let f = DeterministicStrategy::new(vec![1, 0], 2).unwrap();
        let g = DeterministicStrategy::new(vec![0, 0], 2).unwrap();
        let pf = Correlation::from_deterministic(&f.product(&g, 2), 4);
        let m = pf.marginal(1, 0, (2, 2), (2, 2)).unwrap();
        assert_eq!(m, Correlation::from_deterministic(&f, 2));
    }

    #[test]
    fn expected_values() {
        let g = catalog::example1();
        let d = catalog::example1_density();
        let s = det(&[0, 0], 2).expected_value(&g, &d).unwrap();
        assert_eq!(s.exact, Some(ratio(3, 4)));

        let g = catalog::example2();
        let d = catalog::example2_density();
        let s = det(&[0, 0, 0], 2).expected_value(&g, &d).unwrap();
        assert_eq!(s.exact, Some(ratio(3, 9)));
    }

    #[test]
    fn strategy_indexing_is_lexicographic() {
        let order: Vec<_> = (0..8)
            .map(|i| DeterministicStrategy::from_index(i, 3, 2).assignment().to_vec())
            .collect();
        assert_eq!(order[0], vec![0, 0, 0]);
        assert_eq!(order[1], vec![0, 0, 1]);
        assert_eq!(order[6], vec![1, 1, 0]);
        assert_eq!(DeterministicStrategy::from_index(5, 3, 2).to_string(), "(2,1,2)");
    }
}
