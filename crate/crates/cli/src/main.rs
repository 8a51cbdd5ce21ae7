//! `psn`: command-line front end for the pseudospace toolkit.
//!
//! Word commands take the dimension from `--n`; graph commands read it from
//! the space file. Exit status is 0 on success, 1 on a domain error (its
//! code is printed) and 2 on a usage error.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudospace::flags::{self, Flag};
use pseudospace::oracle::{run_suite, SuiteConfig};
use pseudospace::{ColoredSpace, Error, Result, VertexSet, Word};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "psn",
    version,
    about = "Word calculus and finite model builder for the free pseudospace"
)]
struct Cli {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Dim {
    /// Dimension N; letters are intervals of [0, N].
    #[arg(long)]
    n: usize,
}

#[derive(Args)]
struct SpaceArg {
    /// Build script or exported space (JSON); `-` reads stdin.
    space: String,
    /// Expected dimension; a mismatch with the file is an error.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reduct of a word.
    Reduce {
        #[command(flatten)]
        dim: Dim,
        word: String,
    },
    /// Normal form of a word.
    Nf {
        #[command(flatten)]
        dim: Dim,
        word: String,
    },
    /// Reduct of the product u.v.
    Product {
        #[command(flatten)]
        dim: Dim,
        u: String,
        v: String,
    },
    Inverse {
        #[command(flatten)]
        dim: Dim,
        word: String,
    },
    /// Left (default) or right stabilizer.
    Stab {
        #[command(flatten)]
        dim: Dim,
        #[arg(long, conflicts_with = "left")]
        right: bool,
        #[arg(long)]
        left: bool,
        word: String,
    },
    /// Decomposition of a product of reduced words.
    Decompose {
        #[command(flatten)]
        dim: Dim,
        /// Symmetric form with a commuting middle part.
        #[arg(long)]
        symmetric: bool,
        u: String,
        v: String,
    },
    /// Wobbling levels of u.v.
    Wobble {
        #[command(flatten)]
        dim: Dim,
        u: String,
        v: String,
    },
    /// Ordinal height and closed-form rank.
    Rank {
        #[command(flatten)]
        dim: Dim,
        word: String,
    },
    /// Strong reducts within the given bounds.
    Strong {
        #[command(flatten)]
        dim: Dim,
        #[arg(long, default_value_t = pseudospace::words::DEFAULT_SPLIT_LEN)]
        split_len: usize,
        #[arg(long, default_value_t = pseudospace::words::DEFAULT_MAX_STEPS)]
        max_steps: usize,
        word: String,
    },
    /// Replays a build script and prints the exported space.
    Build {
        #[command(flatten)]
        space: SpaceArg,
    },
    /// Graphviz rendering of a space.
    ExportDot {
        #[command(flatten)]
        space: SpaceArg,
    },
    /// Lists the flags, optionally inside a vertex set.
    Flags {
        #[command(flatten)]
        space: SpaceArg,
        #[arg(long)]
        within: Option<String>,
    },
    /// Word of a reduced flag path.
    Word {
        #[command(flatten)]
        space: SpaceArg,
        f: String,
        g: String,
    },
    /// Basepoint of a flag in a nice set.
    Basepoint {
        #[command(flatten)]
        space: SpaceArg,
        f: String,
        #[arg(long)]
        set: String,
    },
    /// Whether F and H are independent over G.
    Indep {
        #[command(flatten)]
        space: SpaceArg,
        f: String,
        g: String,
        h: String,
    },
    /// Canonical base of a flag over a nice set.
    Canbase {
        #[command(flatten)]
        space: SpaceArg,
        f: String,
        #[arg(long)]
        set: String,
    },
    /// Adds a fresh flag F with word(F, G) = u.
    Realize {
        #[command(flatten)]
        space: SpaceArg,
        g: String,
        u: String,
        /// Where to write the extended space.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stabilizer identities behind the canonical bases.
    Ample {
        #[command(flatten)]
        dim: Dim,
    },
    /// Runs a property suite.
    Verify {
        #[arg(long)]
        suite: String,
        /// Largest dimension sampled.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        cases: usize,
    },
}

/// Human text and JSON form of a result, plus whether it counts as success.
struct Output {
    text: String,
    json: Value,
    ok: bool,
}

impl Output {
    fn new(text: impl Into<String>, json: Value) -> Self {
        Output {
            text: text.into(),
            json,
            ok: true,
        }
    }
}

fn word(s: &str, n: usize) -> Result<Word> {
    Word::parse(s, n)
}

fn read_input(path: &str) -> Result<String> {
    let io = |e: std::io::Error| Error::Parse {
        what: "input file",
        msg: format!("{path}: {e}"),
    };
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(io)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

fn load(arg: &SpaceArg) -> Result<ColoredSpace> {
    let m = ColoredSpace::load_json(&read_input(&arg.space)?)?;
    match arg.n {
        Some(n) if n != m.dim() => Err(Error::DimensionMismatch {
            expected: n,
            found: m.dim(),
        }),
        _ => Ok(m),
    }
}

/// A flag given as a JSON id array or as an index into `psn flags`.
fn flag(m: &ColoredSpace, s: &str) -> Result<Flag> {
    if let Ok(i) = s.trim().parse::<usize>() {
        let all = flags::enumerate_flags(m, None);
        let count = all.len();
        return all.into_iter().nth(i).ok_or_else(|| Error::Parse {
            what: "flag",
            msg: format!("index {i} but the space has {count} flags"),
        });
    }
    let ids: Vec<usize> = serde_json::from_str(s).map_err(|e| Error::Parse {
        what: "flag",
        msg: format!("{s}: {e}"),
    })?;
    Flag::new(m, ids)
}

/// A vertex set given as a JSON array or a comma list.
fn vertex_set(s: &str) -> Result<VertexSet> {
    let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim().parse::<usize>().map_err(|e| Error::Parse {
                what: "vertex set",
                msg: format!("{s}: {e}"),
            })
        })
        .collect()
}

fn words_out(ws: &[Word]) -> Output {
    let list: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
    Output::new(list.join("\n"), json!(list))
}

fn run(cmd: Cmd) -> Result<Output> {
    Ok(match cmd {
        Cmd::Reduce { dim, word: w } => {
            let r = word(&w, dim.n)?.reduce();
            Output::new(r.to_string(), json!({ "reduct": r.to_string() }))
        }
        Cmd::Nf { dim, word: w } => {
            let r = word(&w, dim.n)?.normal_form();
            Output::new(r.to_string(), json!({ "normal_form": r.to_string() }))
        }
        Cmd::Product { dim, u, v } => {
            let r = word(&u, dim.n)?.concat_reduce(&word(&v, dim.n)?)?;
            Output::new(r.to_string(), json!({ "product": r.to_string() }))
        }
        Cmd::Inverse { dim, word: w } => {
            let r = word(&w, dim.n)?.inverse();
            Output::new(r.to_string(), json!({ "inverse": r.to_string() }))
        }
        Cmd::Stab {
            dim,
            right,
            word: w,
            ..
        } => {
            let u = word(&w, dim.n)?;
            let s = if right {
                u.right_stabilizer()
            } else {
                u.left_stabilizer()
            };
            let side = if right { "right" } else { "left" };
            Output::new(
                s.to_string(),
                json!({ "side": side, "stabilizer": s.iter().collect::<Vec<_>>() }),
            )
        }
        Cmd::Decompose {
            dim,
            symmetric,
            u,
            v,
        } => {
            let (u, v) = (word(&u, dim.n)?, word(&v, dim.n)?);
            let d = if symmetric {
                u.decompose_symmetric(&v)?
            } else {
                u.decompose_fine(&v)?
            };
            let parts = [
                ("u1", &d.u1),
                ("u'", &d.u_prime),
                ("w", &d.w),
                ("v'", &d.v_prime),
                ("v1", &d.v1),
                ("reduct", &d.reduct),
            ];
            let text = parts
                .iter()
                .map(|(k, w)| format!("{k} = {w}"))
                .collect::<Vec<_>>()
                .join("\n");
            let obj: serde_json::Map<String, Value> = parts
                .iter()
                .map(|(k, w)| (k.to_string(), json!(w.to_string())))
                .collect();
            Output::new(text, Value::Object(obj))
        }
        Cmd::Wobble { dim, u, v } => {
            let s = word(&u, dim.n)?.wobbling(&word(&v, dim.n)?);
            Output::new(
                s.to_string(),
                json!({ "wobbling": s.iter().collect::<Vec<_>>() }),
            )
        }
        Cmd::Rank { dim, word: w } => {
            let u = word(&w, dim.n)?;
            let ord = u.ord_rank();
            let rd = u.rd_closed_form().ok();
            let text = match &rd {
                Some(r) => format!("ord {ord}\nrd {r}"),
                None => format!("ord {ord}\nrd none (not a reduced monotone word)"),
            };
            Output::new(
                text,
                json!({ "ord": ord.to_string(), "rd": rd.map(|r| r.to_string()) }),
            )
        }
        Cmd::Strong {
            dim,
            split_len,
            max_steps,
            word: w,
        } => words_out(&word(&w, dim.n)?.strong_reducts_bounded(split_len, max_steps)?),
        Cmd::Build { space } => {
            let m = load(&space)?;
            let j = m.to_json();
            Output::new(serde_json::to_string_pretty(&j).unwrap(), j)
        }
        Cmd::ExportDot { space } => {
            let dot = load(&space)?.to_dot();
            Output::new(dot.trim_end(), json!({ "dot": dot }))
        }
        Cmd::Flags { space, within } => {
            let m = load(&space)?;
            let set = within.as_deref().map(vertex_set).transpose()?;
            let all = flags::enumerate_flags(&m, set.as_ref());
            let text = all
                .iter()
                .enumerate()
                .map(|(i, f)| format!("{i}: {f}"))
                .collect::<Vec<_>>()
                .join("\n");
            Output::new(text, json!(all))
        }
        Cmd::Word { space, f, g } => {
            let m = load(&space)?;
            let p = flags::flag_path(&m, &flag(&m, &f)?, &flag(&m, &g)?)?;
            let chain = p
                .flags
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            Output::new(format!("{}\n{chain}", p.word), json!(p))
        }
        Cmd::Basepoint { space, f, set } => {
            let m = load(&space)?;
            let (b, w) = flags::basepoint(&m, &flag(&m, &f)?, &vertex_set(&set)?)?;
            Output::new(
                format!("{b} {w}"),
                json!({ "basepoint": b, "word": w.to_string() }),
            )
        }
        Cmd::Indep { space, f, g, h } => {
            let m = load(&space)?;
            let r = flags::indep(&m, &flag(&m, &f)?, &flag(&m, &g)?, &flag(&m, &h)?)?;
            Output::new(r.to_string(), json!({ "independent": r }))
        }
        Cmd::Canbase { space, f, set } => {
            let m = load(&space)?;
            let c = flags::canonical_base(&m, &flag(&m, &f)?, &vertex_set(&set)?)?;
            Output::new(format!("{} mod {}", c.flag, c.modulus), json!(c))
        }
        Cmd::Realize { space, g, u, out } => {
            let mut m = load(&space)?;
            let g = flag(&m, &g)?;
            let u = word(&u, m.dim())?;
            let f = flags::realize_type(&mut m, &g, &u)?;
            let exported = m.to_json();
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&exported).unwrap();
                std::fs::write(&path, text).map_err(|e| Error::Parse {
                    what: "output file",
                    msg: format!("{}: {e}", path.display()),
                })?;
            }
            Output::new(f.to_string(), json!({ "flag": f, "space": exported }))
        }
        Cmd::Ample { dim } => {
            let report = flags::ample_report(dim.n)?;
            let text = report
                .iter()
                .map(|c| format!("{} {}", if c.pass { "ok  " } else { "FAIL" }, c.check))
                .collect::<Vec<_>>()
                .join("\n");
            let ok = report.iter().all(|c| c.pass);
            Output {
                text,
                json: json!(report),
                ok,
            }
        }
        Cmd::Verify {
            suite,
            n,
            seed,
            cases,
        } => {
            let cfg = SuiteConfig::new(&suite).n_max(n).seed(seed).cases(cases);
            let r = run_suite(&cfg)?;
            let mut text = format!(
                "{}: {} ({} cases, {} ms)",
                r.suite,
                if r.pass { "pass" } else { "FAIL" },
                r.cases_run,
                r.elapsed_ms
            );
            for l in &r.laws {
                text += &format!(
                    "\n  {:>7} checked {:>5} undecided  {}",
                    l.checked, l.undecided, l.law
                );
            }
            for f in &r.failures {
                text += &format!(
                    "\n  case {} {}: {} -> {}",
                    f.case, f.law, f.inputs, f.observed
                );
            }
            Output {
                text,
                json: json!(r),
                ok: r.pass,
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.json);
            } else if !out.text.is_empty() {
                println!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if cli.json {
                println!("{}", json!({ "error": e.code(), "message": e.to_string() }));
            }
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(1)
        }
    }
}
