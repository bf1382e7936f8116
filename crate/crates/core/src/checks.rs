//! Reference checks on the two built-in games, run by the `verify` command.

use crate::catalog;
use crate::exact;
use crate::game::Game;
use crate::nc::{IdentityOracle, NCPoly, Relations};
use crate::quantum::{self, SeesawOptions};
use crate::rational::{self, int, ratio, Rational};
use crate::sdp;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub skip_sdp: bool,
    /// Game used wherever the two-input reference game is expected.
    pub example1: Game,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            skip_sdp: false,
            example1: catalog::example1(),
            seed: 7,
        }
    }
}

fn outcome(name: &'static str, result: crate::Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn exact_equals(value: &Rational, target: &Rational) -> (bool, String) {
    (
        value == target,
        format!("value = {}, expected {}", rational::render(value), rational::render(target)),
    )
}

pub fn run_checks(opts: &CheckOptions) -> Vec<CheckOutcome> {
    let g1 = &opts.example1;
    let d1 = catalog::example1_density();
    let g2 = catalog::example2();
    let d2 = catalog::example2_density();
    let g11 = g1.product(g1);
    let d11 = d1.product(&d1);
    let mut out = Vec::new();

    out.push(outcome(
        "example1-local",
        exact::local_synchronous_value(g1, &d1).map(|r| exact_equals(&r.value, &ratio(3, 4))),
    ));
    out.push(outcome(
        "example1-squared-local",
        exact::local_synchronous_value(&g11, &d11).map(|r| exact_equals(&r.value, &ratio(10, 16))),
    ));
    out.push(outcome(
        "example2-scores",
        exact::deterministic_scores(&g2, &d2).and_then(|scores| {
            let expected: Vec<Rational> = [3, 5, 5, 5, 5, 5, 5, 3].iter().map(|&v| ratio(v, 9)).collect();
            let got: Vec<Rational> = scores.into_iter().map(|(_, s)| s).collect();
            let v = exact::local_synchronous_value(&g2, &d2)?.value;
            let rendered: Vec<String> = got.iter().map(rational::render).collect();
            Ok((got == expected && v == ratio(5, 9), format!("scores = ({}), value = {}", rendered.join(", "), rational::render(&v))))
        }),
    ));
    out.push(outcome(
        "example2-squared-local",
        exact::local_synchronous_value(&g2.product(&g2), &d2.product(&d2)).map(|r| {
            (
                r.value >= ratio(27, 81),
                format!("value = {}, expected at least 27/81", rational::render(&r.value)),
            )
        }),
    ));
    out.push(outcome("witness", witness_check()));
    out.push(outcome("t-family", t_family_check()));
    out.push(outcome(
        "seesaw-example2",
        quantum::seesaw_lower_bound(
            &g2,
            &d2,
            &SeesawOptions {
                dim: 2,
                restarts: 20,
                seed: opts.seed,
                ..Default::default()
            },
        )
        .map(|r| (r.value >= 7.0 / 12.0 - 1e-6, format!("value = {:.9}, expected at least 7/12 - 1e-6", r.value))),
    ));
    out.push(outcome("ns-certificates", ns_check(g1)));
    out.push(outcome("algebra-identities", algebra_check(g1)));

    if !opts.skip_sdp {
        out.push(outcome(
            "npa1-example1",
            sdp::qc_upper_bound(g1, &d1, 1).map(|b| interval(b.bound, 0.75, 1e-6, 1e-4)),
        ));
        out.push(outcome(
            "npa1-example1-squared",
            sdp::qc_upper_bound(&g11, &d11, 1).map(|b| interval(b.bound, 10.0 / 16.0, 1e-6, 1e-3)),
        ));
        out.push(outcome(
            "npa2-example2",
            sdp::qc_upper_bound(&g2, &d2, 2).and_then(|b| {
                let prob = sdp::build_npa(&g2, &d2, 2)?;
                let w = sdp::check_witness(&prob, &quantum::example2_witness())?;
                Ok((
                    b.bound >= 7.0 / 12.0 - 1e-6 && w.max_defect() <= 1e-10,
                    format!(
                        "bound = {:.9}, gap to 7/12 = {:.3e}, witness defect = {:.3e}",
                        b.bound,
                        b.bound - 7.0 / 12.0,
                        w.max_defect()
                    ),
                ))
            }),
        ));
    }
    out
}

fn interval(bound: f64, target: f64, below: f64, above: f64) -> (bool, String) {
    (
        bound >= target - below && bound <= target + above,
        format!("bound = {bound:.9}, expected in [{:.9}, {:.9}]", target - below, target + above),
    )
}

fn witness_check() -> crate::Result<(bool, String)> {
    let w = quantum::example2_witness();
    let rep = quantum::verify_realization(&w, None, 1e-12)?;
    let b = &w.blocks()[0];
    let (p, q, r) = (b.projection(0, 0), b.projection(1, 0), b.projection(2, 0));
    let sum_defect = crate::linalg::op_norm(&(p + q + r - crate::linalg::identity(2).scale(1.5)));
    let commutator = crate::linalg::op_norm(&quantum::commutator(p, &(q + r)));
    let value = quantum::correlation_of(&w)
        .expected_value(&catalog::example2(), &catalog::example2_density())?
        .value;
    let passed = rep.passed() && sum_defect <= 1e-15 && commutator <= 1e-15 && (value - 7.0 / 12.0).abs() <= 1e-12;
    Ok((
        passed,
        format!(
            "defects = ({:.1e}, {:.1e}), |p+q+r-3/2| = {sum_defect:.1e}, |[p,q+r]| = {commutator:.1e}, value = {value:.15}",
            rep.projection_defect, rep.completeness_defect
        ),
    ))
}

fn t_family_check() -> crate::Result<(bool, String)> {
    let expected = [(ratio(3, 2), ratio(7, 12)), (int(2), ratio(5, 9)), (int(3), ratio(1, 3))];
    let mut passed = true;
    let mut parts = Vec::new();
    for (t, v) in &expected {
        let p = quantum::t_family(t)?;
        passed &= p.tau_value == *v && p.feasible;
        parts.push(format!("t={} -> {}", rational::render(t), rational::render(&p.tau_value)));
    }
    for t in [int(0), int(1)] {
        passed &= !quantum::t_family(&t)?.feasible;
    }
    passed &= quantum::t_family(&ratio(3, 2))?.ratio == ratio(1, 2);
    Ok((passed, parts.join(", ")))
}

fn ns_check(g1: &Game) -> crate::Result<(bool, String)> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (label, g, d) in [
        ("example1", g1.clone(), catalog::example1_density()),
        ("example2", catalog::example2(), catalog::example2_density()),
    ] {
        let ns = exact::ns_synchronous_value(&g, &d)?;
        let loc = exact::local_synchronous_value(&g, &d)?;
        let certified = ns.certificate.as_ref().is_some_and(|c| c.verify().is_ok());
        passed &= certified && ns.value >= loc.value;
        parts.push(format!(
            "{label}: ns = {}, local = {}, certificate {}",
            rational::render(&ns.value),
            rational::render(&loc.value),
            if certified { "verified" } else { "rejected" }
        ));
    }
    Ok((passed, parts.join("; ")))
}

fn algebra_check(g1: &Game) -> crate::Result<(bool, String)> {
    let d1 = catalog::example1_density();
    let h1 = NCPoly::game_polynomial(g1, &d1)?.scale(&int(4)).reduce(Relations::Synchronicity);
    let first = h1.cyclic_normal_form() == catalog::example1_simplified().reduce(Relations::Synchronicity).cyclic_normal_form()
        && h1 == catalog::example1_substituted().reduce(Relations::Synchronicity);

    let g11 = g1.product(g1);
    let h11 = NCPoly::game_polynomial(&g11, &d1.product(&d1))?
        .scale(&int(16))
        .reduce(Relations::Synchronicity)
        .cyclic_normal_form();
    let quoted = catalog::example1_squared_quoted_form();
    let second = IdentityOracle::default().trace_equal(&h11, &quoted)?;

    let h2 = NCPoly::game_polynomial(&catalog::example2(), &catalog::example2_density())?
        .scale(&int(9))
        .reduce(Relations::Synchronicity);
    let third = h2 == catalog::example2_quadratic_form().reduce(Relations::Synchronicity);

    let diff = h11.sub(&quoted.reduce(Relations::Synchronicity).cyclic_normal_form());
    Ok((
        first && second && third,
        format!(
            "4h reduces to 2+e[2,1]: {first}; 16h trace-equals the quoted form: {second} ({} differing cyclic terms); 9h matches: {third}",
            diff.len()
        ),
    ))
}
