//! Command-line surface for the arbdyn toolkit. Exit codes: 0 success,
//! 1 argument/precondition failure, 2 resource budget exceeded,
//! 3 verification mismatch. Errors go to stderr as one JSON object.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::json;

use arbdyn::certify::{self, parse_rat, rat_to_string, CertifyOpts, Verdict};
use arbdyn::discriminants;
use arbdyn::error::Error;
use arbdyn::exec::ExecMode;
use arbdyn::frobenius;
use arbdyn::quadmap::GenQuadMap;
use arbdyn::reference;
use arbdyn::treegroups;
use arbdyn::{certify::Certificate, sieve};

#[derive(Parser)]
#[command(name = "arbdyn", version, about = "exact arithmetic-dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify finite index (and maximality) for one k
    Certify {
        #[arg(long)]
        k: String,
        #[arg(long, default_value = "1")]
        b: String,
        /// level cap for the maximality certificate
        #[arg(long, default_value_t = 8)]
        max_level: usize,
        /// timestamp recorded in certificates (fixed default keeps output
        /// reproducible)
        #[arg(long, default_value = "1970-01-01T00:00:00Z")]
        timestamp: String,
    },
    /// Certify every integer k in a range; JSON-lines certificates
    Scan {
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// 1 forces sequential execution
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        prime_bound: u64,
        #[arg(long, default_value = "1970-01-01T00:00:00Z")]
        timestamp: String,
    },
    /// Reproduce the 23-row hard-case table and diff it
    Table1,
    /// Primes dividing some orbit numerator a_n (k = 1)
    Sigma {
        #[arg(long, default_value_t = 2000)]
        bound: u64,
    },
    /// Compare the closed-form discriminant against the direct oracle
    DiscCheck {
        #[arg(long)]
        k: Option<String>,
        #[arg(long, default_value = "1")]
        b: String,
        /// general map as p0,p1,p2/q0,q1,q2 (constant first)
        #[arg(long)]
        map: Option<String>,
        #[arg(long)]
        n: usize,
    },
    /// Post-critically finite k of bounded height
    Pcf {
        #[arg(long, default_value_t = 2)]
        height_bound: u64,
    },
    /// Exact verification report for the critical 2-cycle family
    Nonpoly {
        #[arg(long, default_value_t = 10)]
        levels: usize,
    },
    /// Fixed-point proportion table as CSV
    Density {
        #[arg(long, default_value_t = 30)]
        n_max: usize,
    },
    /// Frobenius root-density sampling
    Frobenius {
        #[arg(long)]
        k: String,
        #[arg(long, default_value = "1")]
        b: String,
        #[arg(long)]
        level: usize,
        #[arg(long, default_value_t = 3)]
        pmin: u64,
        #[arg(long)]
        pmax: u64,
        /// per-prime CSV destination (defaults to stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tree automorphism group orders
    Groups {
        #[arg(long)]
        n: usize,
        /// enumerate explicitly (n <= 4) and cross-check the orders
        #[arg(long)]
        enumerate: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.cmd) {
        let (code, kind) = match &e {
            Error::Argument(_) => (1, "argument"),
            Error::Precondition(_) => (1, "precondition"),
            Error::Resource(_) => (2, "resource"),
            Error::Verify(_) => (3, "verify"),
        };
        eprintln!("{}", json!({ "kind": kind, "message": e.to_string() }));
        std::process::exit(code);
    }
}

fn run(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Certify {
            k,
            b,
            max_level,
            timestamp,
        } => {
            let k = parse_rat(&k)?;
            let b = parse_rat(&b)?;
            let opts = CertifyOpts {
                created_at: timestamp,
                ..CertifyOpts::default()
            };
            if !b.is_integer() || b != BigRational::from_integer(1.into()) {
                return Err(Error::Precondition(
                    "certification rules require b = 1".into(),
                ));
            }
            let cert = certify::certify_finite_index(&k, &opts)?;
            println!("{}", serde_json::to_string(&cert).unwrap());
            if matches!(cert.verdict, Verdict::FiniteIndex) && max_level >= 2 {
                let maxcert = certify::certify_maximality(&k, max_level, &opts)?;
                println!("{}", serde_json::to_string(&maxcert).unwrap());
            }
            Ok(())
        }
        Cmd::Scan {
            from,
            to,
            jobs,
            out,
            prime_bound,
            timestamp,
        } => {
            let opts = CertifyOpts {
                prime_bound,
                created_at: timestamp,
                mode: if jobs == Some(1) {
                    ExecMode::Sequential
                } else {
                    ExecMode::Parallel
                },
                ..CertifyOpts::default()
            };
            let (summary, certs) = certify::scan_range(from, to, &opts)?;
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(&path).map_err(|e| {
                        Error::Argument(format!("cannot open {}: {e}", path.display()))
                    })?);
                    write_certs(&mut w, &certs)?;
                    println!("{}", serde_json::to_string(&summary).unwrap());
                }
                None => {
                    let stdout = io::stdout();
                    let mut w = stdout.lock();
                    write_certs(&mut w, &certs)?;
                    eprintln!("{}", serde_json::to_string(&summary).unwrap());
                }
            }
            Ok(())
        }
        Cmd::Table1 => {
            println!("k,p,tail,cycle,exceptional_n");
            let mut mismatches = Vec::new();
            for &(k, p, tail, cycle, exc) in reference::TABLE1.iter() {
                let kr = BigRational::from_integer((k as i64).into());
                let found = sieve::custom_search(&kr, 500);
                let (fp, ft, fc, fe) = match &found {
                    Some(r) => (
                        r.p,
                        r.report.tail_len,
                        r.report.cycle_len,
                        r.report.exceptional_levels.clone(),
                    ),
                    None => (0, 0, 0, Vec::new()),
                };
                let exc_str = fe
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(";");
                println!("{k},{fp},{ft},{fc},{exc_str}");
                if (fp, ft, fc, fe.as_slice()) != (p, tail, cycle, exc) {
                    mismatches.push(k);
                }
            }
            if mismatches.is_empty() {
                println!("{}/{} rows match", reference::TABLE1.len(), reference::TABLE1.len());
                Ok(())
            } else {
                Err(Error::Verify(format!("rows differ for k = {mismatches:?}")))
            }
        }
        Cmd::Sigma { bound } => {
            let s = certify::sigma_primes(bound)?;
            println!("p,first_hit");
            for p in &s.primes {
                println!("{p},{}", s.first_hit[p]);
            }
            Ok(())
        }
        Cmd::DiscCheck { k, b, map, n } => {
            let report = match (k, map) {
                (Some(k), None) => {
                    let k = parse_rat(&k)?;
                    let b = parse_rat(&b)?;
                    discriminants::disc_report_aut(&k, &b, n)?
                }
                (None, Some(desc)) => {
                    let m = parse_map(&desc)?;
                    discriminants::disc_closed_general(&m, n)?
                }
                _ => {
                    return Err(Error::Argument(
                        "give exactly one of --k or --map".into(),
                    ))
                }
            };
            println!(
                "{}",
                json!({
                    "n": report.n,
                    "closed_form": rat_to_string(&report.closed_form),
                    "oracle": rat_to_string(&report.oracle),
                    "k1": report.k1,
                    "k2": report.k2,
                    "k3": report.k3,
                    "matched": report.matched,
                })
            );
            if report.matched {
                Ok(())
            } else {
                Err(Error::Verify(format!(
                    "closed form and oracle differ at level {n}"
                )))
            }
        }
        Cmd::Pcf { height_bound } => {
            for k in certify::pcf_search(height_bound)? {
                println!("{}", rat_to_string(&k));
            }
            Ok(())
        }
        Cmd::Nonpoly { levels } => {
            let r = certify::nonpoly_verify(levels)?;
            println!("{}", serde_json::to_string(&r).unwrap());
            if r.all_pass {
                Ok(())
            } else {
                let failed: Vec<&str> = r
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| c.name.as_str())
                    .collect();
                Err(Error::Verify(format!("checks failed: {failed:?}")))
            }
        }
        Cmd::Density { n_max } => {
            println!("n,fixprop,n_times_fixprop");
            for n in 1..=n_max {
                let v = if n <= treegroups::EXACT_CM_CAP {
                    treegroups::fixprop(n)?.to_f64().unwrap()
                } else {
                    treegroups::fixprop_approx(n, 256)?.value.to_f64().unwrap()
                };
                println!("{n},{v},{}", n as f64 * v);
            }
            Ok(())
        }
        Cmd::Frobenius {
            k,
            b,
            level,
            pmin,
            pmax,
            out,
        } => {
            let k = parse_rat(&k)?;
            let b = parse_rat(&b)?;
            let mut csv = String::from("p,has_root,degrees,excluded\n");
            for p in arbdyn::numkernel::primes_in(pmin.max(3), pmax) {
                let s = frobenius::factor_degrees_mod_p(&k, &b, level, p)?;
                let degrees = s
                    .degrees
                    .iter()
                    .map(|(d, c)| format!("{d}x{c}"))
                    .collect::<Vec<_>>()
                    .join(";");
                csv.push_str(&format!(
                    "{p},{},{degrees},{}\n",
                    s.has_root,
                    s.excluded.unwrap_or_default()
                ));
            }
            match out {
                Some(path) => std::fs::write(&path, csv).map_err(|e| {
                    Error::Argument(format!("cannot write {}: {e}", path.display()))
                })?,
                None => print!("{csv}"),
            }
            let summary =
                frobenius::root_density_sample(&k, &b, level, pmin, pmax, ExecMode::Parallel)?;
            println!("{}", serde_json::to_string(&summary).unwrap());
            Ok(())
        }
        Cmd::Groups { n, enumerate } => {
            let r = treegroups::group_orders(n)?;
            let mut obj = json!({
                "n": r.n,
                "order_aut": r.order_aut.to_string(),
                "order_c": r.order_c.to_string(),
                "kernel_order": r.kernel_order.as_ref().map(|k| k.to_string()),
                "hausdorff": rat_to_string(&r.hausdorff),
            });
            if enumerate {
                let aut = treegroups::enumerate_aut(n)?;
                let c = treegroups::enumerate_centralizer(n)?;
                let fp = treegroups::centralizer_fixprop(n)?;
                if aut.len().to_string() != r.order_aut.to_string()
                    || c.len().to_string() != r.order_c.to_string()
                {
                    return Err(Error::Verify(
                        "enumerated orders disagree with the formulas".into(),
                    ));
                }
                obj["enumerated_aut"] = json!(aut.len());
                obj["enumerated_c"] = json!(c.len());
                obj["centralizer_fixprop"] = json!(rat_to_string(&fp));
            }
            println!("{obj}");
            Ok(())
        }
    }
}

fn write_certs<W: Write>(w: &mut W, certs: &[Certificate]) -> Result<(), Error> {
    for c in certs {
        writeln!(w, "{}", serde_json::to_string(c).unwrap())
            .map_err(|e| Error::Argument(format!("write failed: {e}")))?;
    }
    Ok(())
}

/// Parses "p0,p1,p2/q0,q1,q2" into a general quadratic map.
fn parse_map(s: &str) -> Result<GenQuadMap, Error> {
    let (ps, qs) = s
        .split_once('/')
        .ok_or_else(|| Error::Argument("map needs the form p0,p1,p2/q0,q1,q2".into()))?;
    let triple = |t: &str| -> Result<[BigRational; 3], Error> {
        let parts: Vec<&str> = t.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Argument(format!("need 3 coefficients in {t:?}")));
        }
        Ok([
            parse_rat(parts[0])?,
            parse_rat(parts[1])?,
            parse_rat(parts[2])?,
        ])
    };
    GenQuadMap::new(triple(ps)?, triple(qs)?)
}
