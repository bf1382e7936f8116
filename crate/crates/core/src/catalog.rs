//! The two reference games and the closed-form polynomials quoted for them.
//!
//! Tuples below are written 1-based and shifted on construction.

use crate::game::{pair_index, Density, Game};
use crate::nc::{Letter, NCPoly, Word};
use crate::rational::int;

fn shifted(tuples: &[(usize, usize, usize, usize)]) -> Vec<(usize, usize, usize, usize)> {
    tuples
        .iter()
        .map(|&(x, y, a, b)| (x - 1, y - 1, a - 1, b - 1))
        .collect()
}

/// Two inputs, two outputs:
/// `E11 = E22 = {(1,1), (2,2)}`, `E12 = {(1,1)}`, `E21 = {(1,2)}`.
pub fn example1() -> Game {
    Game::new(
        2,
        2,
        &shifted(&[
            (1, 1, 1, 1),
            (1, 1, 2, 2),
            (2, 2, 1, 1),
            (2, 2, 2, 2),
            (1, 2, 1, 1),
            (2, 1, 1, 2),
        ]),
    )
    .expect("valid game")
}

/// Three inputs, two outputs:
/// `E12 = E21 = E23 = E32 = {(1,2)}`, `E13 = E31 = {(2,1)}`, `Exx = {(1,1), (2,2)}`.
pub fn example2() -> Game {
    let mut tuples = vec![];
    for x in 1..=3 {
        tuples.push((x, x, 1, 1));
        tuples.push((x, x, 2, 2));
    }
    for (x, y) in [(1, 2), (2, 1), (2, 3), (3, 2)] {
        tuples.push((x, y, 1, 2));
    }
    for (x, y) in [(1, 3), (3, 1)] {
        tuples.push((x, y, 2, 1));
    }
    Game::new(3, 2, &shifted(&tuples)).expect("valid game")
}

pub fn example1_density() -> Density {
    Density::uniform(2).expect("n > 0")
}

pub fn example2_density() -> Density {
    Density::uniform(3).expect("n > 0")
}

fn letter(x: usize, a: usize) -> Letter {
    Letter::new(x - 1, a - 1)
}

fn quadratic(n: usize, k: usize, pairs: &[((usize, usize), (usize, usize))]) -> NCPoly {
    pairs.iter().fold(NCPoly::zero(n, k), |acc, &((x, a), (y, b))| {
        acc.add(&NCPoly::monomial(
            n,
            k,
            Word::from_letters(vec![letter(x, a), letter(y, b)]),
            int(1),
        ))
    })
}

/// `2·1 + e21`: the trace-level simplification of `4·h` for [`example1`].
pub fn example1_simplified() -> NCPoly {
    NCPoly::constant(2, 2, int(2)).add(&NCPoly::generator(2, 2, 1, 0))
}

/// `2·1 + p q + q (1 - p)` with `p = e11`, `q = e21`.
pub fn example1_substituted() -> NCPoly {
    let p = NCPoly::generator(2, 2, 0, 0);
    let q = NCPoly::generator(2, 2, 1, 0);
    let one = NCPoly::one(2, 2);
    NCPoly::constant(2, 2, int(2))
        .add(&p.mul(&q))
        .add(&q.mul(&one.sub(&p)))
}

/// `3·1 + e11e22 + e21e12 + e21e32 + e31e22 + e12e31 + e32e11`, which should equal `9·h` for [`example2`].
pub fn example2_quadratic_form() -> NCPoly {
    NCPoly::constant(3, 2, int(3)).add(&quadratic(
        3,
        2,
        &[
            ((1, 1), (2, 2)),
            ((2, 1), (1, 2)),
            ((2, 1), (3, 2)),
            ((3, 1), (2, 2)),
            ((1, 2), (3, 1)),
            ((3, 2), (1, 1)),
        ],
    ))
}

/// The 15-term expansion of `16·h` quoted for the square of [`example1`].
///
/// Generators are written `e[x1x2, a1a2]`; both pairs are encoded row-major.
pub fn example1_squared_quoted_form() -> NCPoly {
    // ((x1, x2), (a1, a2)) for each factor.
    type Gen = ((usize, usize), (usize, usize));
    let terms: [(Gen, Gen); 15] = [
        (((1, 1), (1, 1)), ((1, 2), (1, 1))),
        (((1, 1), (1, 1)), ((2, 2), (1, 1))),
        (((1, 1), (1, 1)), ((2, 1), (1, 1))),
        (((1, 1), (1, 2)), ((2, 1), (1, 2))),
        (((1, 1), (1, 2)), ((1, 2), (1, 1))),
        (((1, 1), (2, 1)), ((2, 1), (1, 1))),
        (((1, 1), (2, 2)), ((2, 2), (1, 1))),
        (((1, 1), (2, 2)), ((2, 1), (1, 2))),
        (((1, 2), (2, 1)), ((2, 1), (1, 2))),
        (((1, 2), (2, 1)), ((2, 2), (1, 1))),
        (((1, 2), (2, 2)), ((2, 2), (1, 2))),
        (((2, 1), (1, 1)), ((2, 2), (1, 1))),
        (((2, 1), (2, 1)), ((2, 2), (2, 1))),
        (((2, 1), (1, 2)), ((2, 2), (1, 1))),
        (((2, 1), (2, 2)), ((2, 2), (2, 1))),
    ];
    let gen = |((x1, x2), (a1, a2)): Gen| {
        Letter::new(
            pair_index(x1 - 1, x2 - 1, 2),
            pair_index(a1 - 1, a2 - 1, 2),
        )
    };
    terms.iter().fold(NCPoly::constant(4, 4, int(4)), |acc, &(u, v)| {
        acc.add(&NCPoly::monomial(
            4,
            4,
            Word::from_letters(vec![gen(u), gen(v)]),
            int(1),
        ))
    })
}
