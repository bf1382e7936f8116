use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use syncgame::checks::{self, CheckOptions};
use syncgame::error::Error;
use syncgame::exact;
use syncgame::io::{self, GameFile};
use syncgame::quantum::{self, SeesawOptions};
use syncgame::rational;
use syncgame::sdp::{self, SdpOptions};

#[derive(Parser)]
#[command(name = "syncgame", version, about = "Values of synchronous non-local games")]
struct Cli {
    /// Omit timing lines so repeated runs print identical reports.
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Class {
    /// Exact local value by enumeration.
    Loc,
    /// Exact non-signalling value by linear programming.
    Ns,
    /// See-saw lower bound on the quantum value.
    QLower,
    /// Moment-relaxation upper bound on the quantum-commuting value.
    QcUpper,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Skippable {
    Sdp,
}

#[derive(Subcommand)]
enum Command {
    /// Compute or bound the synchronous value of a game.
    Value {
        game: PathBuf,
        #[arg(long, value_enum, default_value = "loc")]
        class: Class,
        /// Matrix dimension for q-lower.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sweeps per restart for q-lower.
        #[arg(long, default_value_t = 500)]
        sweeps: usize,
        /// Relaxation level for qc-upper (1 or 2).
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iters: usize,
    },
    /// Write the product of two games.
    Product {
        first: PathBuf,
        second: PathBuf,
        /// Output path; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the reference checks on the built-in games.
    Verify {
        #[arg(long, value_enum)]
        skip: Vec<Skippable>,
        /// Flip one rule bit `x y a b` (1-based) of the two-input game before checking.
        #[arg(long, num_args = 4, value_names = ["X", "Y", "A", "B"])]
        flip: Option<Vec<usize>>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Check a realization file against a game.
    CheckRealization {
        game: PathBuf,
        realization: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotConverged(_) => 3,
        Error::Parse { .. }
        | Error::Io(_)
        | Error::SynchronicityViolation { .. }
        | Error::DensityNotNormalized(_)
        | Error::NegativeDensity { .. }
        | Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch(_)
        | Error::EmptyDimension(_)
        | Error::InvalidLevel(_)
        | Error::InfeasibleT(_) => 2,
        _ => 1,
    }
}

struct Report {
    no_timing: bool,
    start: Instant,
}

impl Report {
    fn line(&self, key: &str, value: impl std::fmt::Display) {
        println!("{key} = {value}");
    }

    fn timing(&self) {
        if !self.no_timing {
            self.line("time_ms", self.start.elapsed().as_millis());
        }
    }
}

fn game_name(file: &GameFile, path: &std::path::Path) -> String {
    file.name
        .clone()
        .unwrap_or_else(|| path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned()))
}

fn run(cli: Cli) -> Result<u8, Error> {
    let out = Report {
        no_timing: cli.no_timing,
        start: Instant::now(),
    };
    match cli.command {
        Command::Value {
            game,
            class,
            dim,
            restarts,
            seed,
            sweeps,
            level,
            tol,
            max_iters,
        } => {
            let file = io::read_game(&game)?;
            let (g, d) = (&file.game, &file.density);
            out.line("game", game_name(&file, &game));
            match class {
                Class::Loc => {
                    let r = exact::local_synchronous_value(g, d)?;
                    out.line("class", "loc");
                    out.line("value", rational::render(&r.value));
                    out.line("method", r.method);
                    if let Some(f) = r.strategy() {
                        out.line("witness", f);
                    }
                }
                Class::Ns => {
                    let r = exact::ns_synchronous_value(g, d)?;
                    out.line("class", "ns");
                    out.line("value", rational::render(&r.value));
                    out.line("method", r.method);
                    let verified = r.certificate.as_ref().is_some_and(|c| c.verify().is_ok());
                    out.line("certificate", if verified { "verified" } else { "rejected" });
                    if let Some(c) = r.certificate.as_ref() {
                        out.line("pivots", c.solution.pivots);
                    }
                    if let Some(c) = r.correlation() {
                        let support = c.exact_values().map_or(0, |v| v.iter().filter(|p| **p != rational::zero()).count());
                        out.line("witness_support", support);
                    }
                }
                Class::QLower => {
                    let opts = SeesawOptions {
                        dim,
                        restarts,
                        seed,
                        max_iters: sweeps,
                        ..Default::default()
                    };
                    let r = quantum::seesaw_lower_bound(g, d, &opts)?;
                    out.line("class", "q-lower");
                    out.line("value", format!("{:.12}", r.value));
                    out.line("dim", dim);
                    out.line("restarts", restarts);
                    out.line("seed", seed);
                    out.line("best_restart", r.best_restart);
                }
                Class::QcUpper => {
                    let opts = SdpOptions {
                        tol,
                        max_iters,
                        ..Default::default()
                    };
                    let b = sdp::qc_upper_bound_with(g, d, level, &opts)?;
                    out.line("class", "qc-upper");
                    out.line("value", format!("{:.12}", b.bound));
                    out.line("level", level);
                    out.line("objective", format!("{:.12}", b.solution.objective_value));
                    out.line("soundness_margin", format!("{:.3e}", b.soundness_margin));
                    out.line("primal_residual", format!("{:.3e}", b.solution.primal_residual));
                    out.line("dual_residual", format!("{:.3e}", b.solution.dual_residual));
                    out.line("iterations", b.solution.iterations);
                }
            }
            out.timing();
            Ok(0)
        }
        Command::Product { first, second, output } => {
            let f1 = io::read_game(&first)?;
            let f2 = io::read_game(&second)?;
            let (n1, k1) = (f1.game.n_inputs(), f1.game.n_outputs());
            let (n2, k2) = (f2.game.n_inputs(), f2.game.n_outputs());
            let name1 = game_name(&f1, &first);
            let name2 = game_name(&f2, &second);
            let product = GameFile {
                name: Some(format!("{name1} x {name2}")),
                game: f1.game.product(&f2.game),
                density: f1.density.product(&f2.density),
            };
            let header = vec![
                format!("product of {name1} ({n1} inputs, {k1} outputs) and {name2} ({n2} inputs, {k2} outputs)"),
                format!("input (i,j) is numbered (i-1)*{n2} + j"),
                format!("output (a,b) is numbered (a-1)*{k2} + b"),
            ];
            let text = io::render_game_with_header(&product, &header);
            match output {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    out.line("written", path.display());
                }
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Verify { skip, flip, seed } => {
            let mut opts = CheckOptions {
                skip_sdp: skip.contains(&Skippable::Sdp),
                seed,
                ..Default::default()
            };
            if let Some(bits) = flip {
                let [x, y, a, b] = [bits[0], bits[1], bits[2], bits[3]];
                if [x, y, a, b].contains(&0) {
                    return Err(Error::IndexOutOfRange {
                        what: "flip index (1-based)",
                        index: 0,
                        limit: 1,
                    });
                }
                let g = &opts.example1;
                let current = g.allowed_tuples().contains(&(x - 1, y - 1, a - 1, b - 1));
                opts.example1 = g.with_rule(x - 1, y - 1, a - 1, b - 1, !current)?;
            }
            let results = checks::run_checks(&opts);
            for r in &results {
                println!("check {} = {}  # {}", r.name, if r.passed { "PASS" } else { "FAIL" }, r.detail);
            }
            let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            out.line("passed", results.len() - failed.len());
            out.line("failed", failed.len());
            if let Some(first) = failed.first() {
                out.line("first_failure", first);
            }
            out.timing();
            Ok(if failed.is_empty() { 0 } else { 1 })
        }
        Command::CheckRealization { game, realization, tol } => {
            let file = io::read_game(&game)?;
            let r = io::read_realization(&realization)?;
            let rep = quantum::verify_realization(&r, Some(&file.game), tol)?;
            let value = quantum::correlation_of(&r).expected_value(&file.game, &file.density)?;
            out.line("game", game_name(&file, &game));
            out.line("blocks", r.blocks().len());
            out.line("projection_defect", format!("{:.3e}", rep.projection_defect));
            out.line("completeness_defect", format!("{:.3e}", rep.completeness_defect));
            out.line("rule_defect", format!("{:.3e}", rep.rule_defect.unwrap_or(0.0)));
            out.line("valid", rep.is_valid());
            out.line("perfect", rep.passed());
            out.line("value", format!("{:.15}", value.value));
            out.timing();
            Ok(if rep.is_valid() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
