//! Text formats for games and realizations.
//!
//! Game files are line oriented with `#` comments:
//!
//! ```text
//! game <name>
//! inputs <n>
//! outputs <k>
//! allow <x> <y> <a> <b>        # 1-based, one line per allowed tuple
//! density uniform              # or repeated `density <x> <y> <n/d>` lines
//! ```
//!
//! Realization files list `blocks <m>`, then per block `weight <w>`, `dim <d>`, and for
//! every input and output a line `P <x> <a>` followed by `d` rows of `d` entries `re+imi`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::game::{Density, Game};
use crate::linalg::CMatrix;
use crate::quantum::{Block, Realization};
use crate::rational::{self, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct GameFile {
    pub name: Option<String>,
    pub game: Game,
    pub density: Density,
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_count(line: usize, token: &str, what: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{token}'")))
}

fn parse_one_based(line: usize, token: &str, what: &str, limit: usize) -> Result<usize> {
    let v = parse_count(line, token, what)?;
    if v == 0 || v > limit {
        return Err(Error::parse(line, format!("{what} {v} outside 1..={limit}")));
    }
    Ok(v - 1)
}

fn expect_args(line: usize, tokens: &[&str], count: usize) -> Result<()> {
    if tokens.len() != count + 1 {
        return Err(Error::parse(
            line,
            format!("'{}' takes {count} argument(s), found {}", tokens[0], tokens.len() - 1),
        ));
    }
    Ok(())
}

pub fn parse_game(text: &str) -> Result<GameFile> {
    let mut name = None;
    let mut n: Option<usize> = None;
    let mut k: Option<usize> = None;
    let mut allowed = Vec::new();
    let mut uniform = false;
    let mut weights: Vec<(usize, usize, Rational, usize)> = Vec::new();
    let mut last_line = 0;

    for (line, tokens) in content_lines(text) {
        last_line = line;
        match tokens[0] {
            "game" => {
                if tokens.len() < 2 {
                    return Err(Error::parse(line, "'game' needs a name"));
                }
                name = Some(tokens[1..].join(" "));
            }
            "inputs" | "outputs" => {
                expect_args(line, &tokens, 1)?;
                let slot = if tokens[0] == "inputs" { &mut n } else { &mut k };
                if slot.is_some() {
                    return Err(Error::parse(line, format!("duplicate '{}'", tokens[0])));
                }
                let v = parse_count(line, tokens[1], tokens[0])?;
                if v == 0 {
                    return Err(Error::parse(line, format!("'{}' must be positive", tokens[0])));
                }
                *slot = Some(v);
            }
            "allow" => {
                expect_args(line, &tokens, 4)?;
                let (Some(n), Some(k)) = (n, k) else {
                    return Err(Error::parse(line, "'allow' before 'inputs' and 'outputs'"));
                };
                allowed.push((
                    parse_one_based(line, tokens[1], "input", n)?,
                    parse_one_based(line, tokens[2], "input", n)?,
                    parse_one_based(line, tokens[3], "output", k)?,
                    parse_one_based(line, tokens[4], "output", k)?,
                ));
            }
            "density" if tokens.len() == 2 && tokens[1] == "uniform" => {
                if uniform || !weights.is_empty() {
                    return Err(Error::parse(line, "'density uniform' mixed with other density lines"));
                }
                uniform = true;
            }
            "density" => {
                expect_args(line, &tokens, 3)?;
                let Some(n) = n else {
                    return Err(Error::parse(line, "'density' before 'inputs'"));
                };
                if uniform {
                    return Err(Error::parse(line, "'density uniform' mixed with other density lines"));
                }
                let x = parse_one_based(line, tokens[1], "input", n)?;
                let y = parse_one_based(line, tokens[2], "input", n)?;
                let w = rational::parse(tokens[3])
                    .ok_or_else(|| Error::parse(line, format!("invalid weight '{}'", tokens[3])))?;
                if weights.iter().any(|(a, b, _, _)| (*a, *b) == (x, y)) {
                    return Err(Error::parse(line, format!("duplicate density for ({}, {})", x + 1, y + 1)));
                }
                weights.push((x, y, w, line));
            }
            other => return Err(Error::parse(line, format!("unknown directive '{other}'"))),
        }
    }

    let n = n.ok_or_else(|| Error::parse(last_line, "missing 'inputs'"))?;
    let k = k.ok_or_else(|| Error::parse(last_line, "missing 'outputs'"))?;
    let game = Game::new(n, k, &allowed)?;
    let density = if uniform {
        Density::uniform(n)?
    } else if weights.is_empty() {
        return Err(Error::parse(last_line, "missing density"));
    } else {
        let mut table = vec![rational::zero(); n * n];
        for (x, y, w, _) in weights {
            table[x * n + y] = w;
        }
        Density::new(n, table)?
    };
    Ok(GameFile { name, game, density })
}

pub fn render_game(file: &GameFile) -> String {
    render_game_with_header(file, &[])
}

/// Canonical rendering, preceded by `# ` comment lines.
pub fn render_game_with_header(file: &GameFile, header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        let _ = writeln!(out, "# {line}");
    }
    if let Some(name) = &file.name {
        let _ = writeln!(out, "game {name}");
    }
    let g = &file.game;
    let _ = writeln!(out, "inputs {}", g.n_inputs());
    let _ = writeln!(out, "outputs {}", g.n_outputs());
    for (x, y, a, b) in g.allowed_tuples() {
        let _ = writeln!(out, "allow {} {} {} {}", x + 1, y + 1, a + 1, b + 1);
    }
    if file.density.is_uniform() {
        out.push_str("density uniform\n");
    } else {
        for (x, y, w) in file.density.support() {
            let _ = writeln!(out, "density {} {} {}", x + 1, y + 1, rational::render(w));
        }
    }
    out
}

fn parse_complex(line: usize, token: &str) -> Result<Complex64> {
    let bad = || Error::parse(line, format!("invalid matrix entry '{token}'"));
    let Some(body) = token.strip_suffix('i') else {
        return token.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re = body[..split].parse::<f64>().map_err(|_| bad())?;
    let im = body[split..].parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn render_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

struct BlockDraft {
    weight: f64,
    dim: usize,
    line: usize,
    matrices: Vec<(usize, usize, CMatrix, usize)>,
}

pub fn parse_realization(text: &str) -> Result<Realization> {
    let lines: Vec<(usize, Vec<&str>)> = content_lines(text).collect();
    let mut it = lines.iter().peekable();
    let Some((line, tokens)) = it.next() else {
        return Err(Error::parse(0, "empty realization file"));
    };
    if tokens[0] != "blocks" {
        return Err(Error::parse(*line, "expected 'blocks <m>'"));
    }
    expect_args(*line, tokens, 1)?;
    let m = parse_count(*line, tokens[1], "block count")?;
    let mut drafts = Vec::with_capacity(m);
    for _ in 0..m {
        let (wl, wt) = it.next().ok_or_else(|| Error::parse(*line, "missing block"))?;
        if wt[0] != "weight" {
            return Err(Error::parse(*wl, "expected 'weight <w>'"));
        }
        expect_args(*wl, wt, 1)?;
        let weight = wt[1]
            .parse::<f64>()
            .map_err(|_| Error::parse(*wl, format!("invalid weight '{}'", wt[1])))?;
        let (dl, dt) = it.next().ok_or_else(|| Error::parse(*wl, "missing 'dim'"))?;
        if dt[0] != "dim" {
            return Err(Error::parse(*dl, "expected 'dim <d>'"));
        }
        expect_args(*dl, dt, 1)?;
        let dim = parse_count(*dl, dt[1], "dimension")?;
        if dim == 0 {
            return Err(Error::parse(*dl, "dimension must be positive"));
        }
        let mut draft = BlockDraft {
            weight,
            dim,
            line: *wl,
            matrices: Vec::new(),
        };
        while let Some((pl, pt)) = it.next_if(|(_, t)| t[0] == "P") {
            expect_args(*pl, pt, 2)?;
            let x = parse_one_based(*pl, pt[1], "input", usize::MAX)?;
            let a = parse_one_based(*pl, pt[2], "output", usize::MAX)?;
            let mut m = CMatrix::zeros(dim, dim);
            for r in 0..dim {
                let (rl, rt) = it.next().ok_or_else(|| Error::parse(*pl, "matrix ends early"))?;
                if rt.len() != dim {
                    return Err(Error::parse(*rl, format!("expected {dim} entries, found {}", rt.len())));
                }
                for (c, tok) in rt.iter().enumerate() {
                    m[(r, c)] = parse_complex(*rl, tok)?;
                }
            }
            draft.matrices.push((x, a, m, *pl));
        }
        drafts.push(draft);
    }
    if let Some((l, _)) = it.next() {
        return Err(Error::parse(*l, "unexpected content after the last block"));
    }

    let mut blocks = Vec::with_capacity(drafts.len());
    for draft in drafts {
        let n = draft.matrices.iter().map(|(x, ..)| x + 1).max().unwrap_or(0);
        let k = draft.matrices.iter().map(|(_, a, ..)| a + 1).max().unwrap_or(0);
        if n * k != draft.matrices.len() {
            return Err(Error::parse(draft.line, format!("block needs all {n}x{k} projections exactly once")));
        }
        let mut grid: Vec<Vec<Option<CMatrix>>> = vec![vec![None; k]; n];
        for (x, a, m, pl) in draft.matrices {
            if grid[x][a].replace(m).is_some() {
                return Err(Error::parse(pl, format!("duplicate projection P {} {}", x + 1, a + 1)));
            }
        }
        let projections = grid
            .into_iter()
            .map(|row| row.into_iter().map(|m| m.expect("count checked")).collect())
            .collect();
        let block = Block::new(draft.weight, projections).map_err(|e| Error::parse(draft.line, e.to_string()))?;
        debug_assert_eq!(block.dim(), draft.dim);
        blocks.push(block);
    }
    Realization::new(blocks)
}

pub fn render_realization(r: &Realization) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "blocks {}", r.blocks().len());
    for block in r.blocks() {
        let _ = writeln!(out, "weight {}", block.weight());
        let _ = writeln!(out, "dim {}", block.dim());
        for x in 0..block.n_inputs() {
            for a in 0..block.n_outputs() {
                let _ = writeln!(out, "P {} {}", x + 1, a + 1);
                let p = block.projection(x, a);
                for row in 0..block.dim() {
                    let entries: Vec<String> = (0..block.dim()).map(|c| render_complex(p[(row, c)])).collect();
                    let _ = writeln!(out, "{}", entries.join(" "));
                }
            }
        }
    }
    out
}

pub fn read_game(path: &std::path::Path) -> Result<GameFile> {
    parse_game(&std::fs::read_to_string(path)?)
}

pub fn read_realization(path: &std::path::Path) -> Result<Realization> {
    parse_realization(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::game::tests::arb_game;
    use crate::quantum::{example2_witness, random_pvm_block};
    use crate::rational::ratio;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EXAMPLE1: &str = "\
# two inputs, two outputs
game example1
inputs 2
outputs 2
allow 1 1 1 1
allow 1 1 2 2
allow 2 2 1 1
allow 2 2 2 2
allow 1 2 1 1   # E12
allow 2 1 1 2   # E21
density uniform
";

    #[test]
    fn parses_example1() {
        let f = parse_game(EXAMPLE1).unwrap();
        assert_eq!(f.name.as_deref(), Some("example1"));
        assert_eq!(f.game, catalog::example1());
        assert_eq!(f.density, catalog::example1_density());
        assert_eq!(parse_game(&render_game(&f)).unwrap(), f);
    }

    #[test]
    fn density_errors() {
        let text = "inputs 2\noutputs 1\nallow 1 1 1 1\nallow 2 2 1 1\ndensity 1 1 1/2\n";
        assert!(matches!(parse_game(text), Err(Error::DensityNotNormalized(_))));
        let text = "inputs 1\noutputs 1\ndensity 1 1 1/1\ndensity 1 1 1/1\n";
        assert!(matches!(parse_game(text), Err(Error::Parse { line: 4, .. })));
        let text = "inputs 1\noutputs 1\n";
        assert!(matches!(parse_game(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn rule_and_syntax_errors() {
        let text = "inputs 2\noutputs 2\nallow 1 1 1 2\ndensity uniform\n";
        assert!(matches!(parse_game(text), Err(Error::SynchronicityViolation { .. })));
        let text = "inputs 2\noutputs 2\nallow 1 3 1 1\n";
        assert!(matches!(parse_game(text), Err(Error::Parse { line: 3, .. })));
        let text = "inputs 2\nbogus\n";
        assert!(matches!(parse_game(text), Err(Error::Parse { line: 2, .. })));
        let text = "allow 1 1 1 1\n";
        assert!(matches!(parse_game(text), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn explicit_density_round_trip() {
        let d = Density::new(2, vec![ratio(1, 3), ratio(0, 1), ratio(1, 6), ratio(1, 2)]).unwrap();
        let f = GameFile {
            name: None,
            game: catalog::example1(),
            density: d,
        };
        let text = render_game_with_header(&f, &["header".to_string()]);
        assert!(text.starts_with("# header\n"));
        assert!(text.contains("density 2 1 1/6"));
        assert_eq!(parse_game(&text).unwrap(), f);
    }

    #[test]
    fn complex_entries() {
        assert_eq!(parse_complex(1, "0.25+0i").unwrap(), Complex64::new(0.25, 0.0));
        assert_eq!(parse_complex(1, "-1e-3-2.5i").unwrap(), Complex64::new(-1e-3, -2.5));
        assert_eq!(parse_complex(1, "1.5e+2+1E-2i").unwrap(), Complex64::new(150.0, 0.01));
        assert_eq!(parse_complex(1, "3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex(7, "1+2j").is_err());
        assert_eq!(render_complex(Complex64::new(-0.5, -0.0)), "-0.5-0i");
    }

    #[test]
    fn realization_round_trip() {
        let w = example2_witness();
        assert_eq!(parse_realization(&render_realization(&w)).unwrap(), w);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b1 = random_pvm_block(2, 3, 3, &mut rng);
        let b2 = random_pvm_block(2, 3, 2, &mut rng);
        let text = render_realization(&Realization::single(b1).unwrap()).replace("weight 1", "weight 0.25");
        let text2 = render_realization(&Realization::single(b2).unwrap());
        let combined = text.replace("blocks 1", "blocks 2") + &text2.replace("blocks 1\n", "").replace("weight 1", "weight 0.75");
        let r = parse_realization(&combined).unwrap();
        assert_eq!(r.blocks().len(), 2);
        assert_eq!(parse_realization(&render_realization(&r)).unwrap(), r);
    }

    #[test]
    fn malformed_realizations() {
        let good = render_realization(&example2_witness());
        let short_row = good.replacen("1+0i 0+0i\n", "1+0i\n", 1);
        assert!(matches!(parse_realization(&short_row), Err(Error::Parse { line: 5, .. })));
        let bad_entry = good.replacen("1+0i", "1+0x", 1);
        assert!(matches!(parse_realization(&bad_entry), Err(Error::Parse { line: 5, .. })));
        let missing = good.replacen("P 3 2", "P 3 1", 1);
        assert!(matches!(parse_realization(&missing), Err(Error::Parse { .. })));
        assert!(matches!(parse_realization(""), Err(Error::Parse { .. })));
    }

    proptest! {
        #[test]
        fn game_files_round_trip(g in arb_game(3, 3), raw in prop::collection::vec(1u32..4, 9)) {
            let n = g.n_inputs();
            let total: u32 = raw[..n * n].iter().sum();
            let d = Density::new(n, raw[..n * n].iter().map(|&v| ratio(v as i64, total as i64)).collect()).unwrap();
            for density in [d, Density::uniform(n).unwrap()] {
                let f = GameFile { name: Some("random game".into()), game: g.clone(), density };
                prop_assert_eq!(parse_game(&render_game(&f)).unwrap(), f);
            }
        }
    }
}
