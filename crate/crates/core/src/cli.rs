//! Command-line front end. `run` returns the process exit code: 0 on success,
//! 2 on invalid input, 1 when an internal cross-check fails.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cech::{build_split_complex, cohomology, window_stability_check, ParityDims, WindowSpec};
use crate::classify::{atiyah_obstruction, connection, ladder, reduce_cocycle, theorem7_check, SplittingCertificate};
use crate::gluing::{
    cochain_from_json, elementary_cochain, exp, order, random_global_automorphism, twisted_complex, GluingCocycle,
};
use crate::geometry::bott_dim;
use crate::sheaf::SheafDescriptor;
use crate::spectral::{converge, theorem8_check, ConvergenceReport, Theorem8Report};

#[derive(Parser, Debug)]
#[command(name = "supersheaf", about = "Cohomology of locally free sheaves on projective superspaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// dim H^q(CP^n, O(d)).
    Bott {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        json: bool,
    },
    /// Retract decomposition gr E_p of a descriptor.
    Decompose {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Obstruction ladder H^0, H^1 of End_p gr E.
    Obstructions {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Čech cohomology of gr E, or of the sheaf glued by --cocycle.
    Cohomology {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        cocycle: Option<PathBuf>,
        #[arg(long, default_value = "auto", allow_hyphen_values = true)]
        window: WindowSpec,
        #[arg(long)]
        json: bool,
    },
    /// Spectral sequence pages and convergence checks.
    Spectral {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        cocycle: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Order, first nonzero differential and symbol comparison.
    Theorem8 {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Holomorphic connections on G = ⊕ O(g_i) over CP^1.
    Connection {
        /// Comma-separated twists of G, e.g. `--g 0,-1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        g: Vec<i64>,
        #[arg(long)]
        json: bool,
    },
    /// Built-in flagship pipeline on CP^{1|1}.
    #[command(name = "demo-cp11")]
    DemoCp11 {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_descriptor(path: &PathBuf) -> Result<SheafDescriptor, CliError> {
    SheafDescriptor::from_json(&read(path)?).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_cocycle(desc: &SheafDescriptor, path: &Option<PathBuf>) -> Result<GluingCocycle, CliError> {
    match path {
        None => Ok(GluingCocycle::identity(desc)),
        Some(p) => {
            let a = cochain_from_json(desc, &read(p)?).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
            Ok(exp(&a))
        }
    }
}

fn require_p1(desc: &SheafDescriptor) -> Result<(), CliError> {
    if desc.space().n != 1 {
        return Err(CliError::Validation(format!("this command needs n = 1, descriptor has n = {}", desc.space().n)));
    }
    Ok(())
}

fn dims_list(h: &[ParityDims]) -> String {
    h.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report serializes")
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn cmd_bott(n: usize, d: i64, q: usize, as_json: bool) -> Result<String, CliError> {
    if n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    let dim = bott_dim(n, d, q);
    Ok(if as_json { pretty(&json!({"n": n, "d": d, "q": q, "dim": dim})) } else { format!("{dim}\n") })
}

fn cmd_decompose(desc: &SheafDescriptor, as_json: bool) -> Result<String, CliError> {
    let n = desc.space().n;
    let pieces = desc.retract_decomposition();
    if as_json {
        let arr: Vec<_> = pieces
            .iter()
            .map(|p| {
                let h: Vec<_> = (0..=n).map(|q| p.twists.cohomology(n, q)).map(|(e, o)| json!({"even": e, "odd": o})).collect();
                json!({"p": p.degree, "twists": to_json(&p.twists.entries()), "h": h})
            })
            .collect();
        return Ok(pretty(&json!({"descriptor": to_json(&desc.to_file()), "pieces": arr})));
    }
    let mut out = String::new();
    writeln!(out, "{desc}").unwrap();
    writeln!(out, "{:>3}  {:<30} {}", "p", "gr E_p", (0..=n).map(|q| format!("H^{q}")).collect::<Vec<_>>().join("  ")).unwrap();
    for p in &pieces {
        let h: Vec<String> = (0..=n).map(|q| p.twists.cohomology(n, q)).map(|(e, o)| format!("{e}|{o}")).collect();
        writeln!(out, "{:>3}  {:<30} {}", p.degree, p.twists.to_string(), h.join("  ")).unwrap();
    }
    Ok(out)
}

fn cmd_obstructions(desc: &SheafDescriptor, as_json: bool) -> Result<String, CliError> {
    let l = ladder(desc);
    if as_json {
        return Ok(pretty(&to_json(&l)));
    }
    let mut out = String::new();
    writeln!(out, "{desc}").unwrap();
    writeln!(out, "{:>3}  {:<30} {:>10} {:>10}", "p", "End_p", "H^0", "H^1").unwrap();
    for row in &l.rows {
        writeln!(out, "{:>3}  {:<30} {:>10} {:>10}", row.p, desc.end_block(row.p).twists.to_string(), row.h0, row.h1).unwrap();
    }
    writeln!(out, "verdict: {}", l.verdict).unwrap();
    Ok(out)
}

fn cmd_cohomology(desc: &SheafDescriptor, a: &GluingCocycle, window: WindowSpec, as_json: bool) -> Result<String, CliError> {
    require_p1(desc)?;
    let cx = twisted_complex(desc, a, window).map_err(invalid)?;
    cx.check_invariants().map_err(CliError::Internal)?;
    let table = cohomology(&cx);
    if as_json {
        return Ok(pretty(&table.to_json()));
    }
    let mut out = String::new();
    writeln!(out, "{desc}").unwrap();
    let windows: Vec<String> = cx.windows().iter().map(ToString::to_string).collect();
    writeln!(out, "windows by exterior degree: {}", windows.join(" ")).unwrap();
    for (k, d) in table.h.iter().enumerate() {
        writeln!(out, "H^{k} = {d}").unwrap();
    }
    if let Some(b) = &table.bigraded {
        writeln!(out, "bigraded H^(p+q)(gr E_p):").unwrap();
        for ((p, q), d) in b {
            writeln!(out, "  ({p},{q}) {}", d.total()).unwrap();
        }
    }
    Ok(out)
}

fn t8_json(t: &Theorem8Report) -> serde_json::Value {
    json!({"k": t.k, "symbol_match": t.symbol_match, "first_nonzero_page": t.first_nonzero_page, "lower_pages_zero": t.lower_pages_zero})
}

fn spectral_text(rep: &ConvergenceReport, out: &mut String) {
    for page in &rep.pages {
        let cells: Vec<String> =
            page.cells.iter().filter(|(_, d)| d.total() > 0).map(|((p, q), d)| format!("({p},{q}) {d}")).collect();
        writeln!(out, "  E_{}: {}", page.r, if cells.is_empty() { "0".into() } else { cells.join("  ") }).unwrap();
    }
    let e_inf: Vec<String> =
        rep.e_infinity.iter().filter(|(_, d)| d.total() > 0).map(|((p, q), d)| format!("({p},{q}) {d}")).collect();
    writeln!(out, "  E_inf: {}", if e_inf.is_empty() { "0".into() } else { e_inf.join("  ") }).unwrap();
    writeln!(out, "  E_inf totals: {}", dims_list(&rep.e_infinity_totals())).unwrap();
    writeln!(out, "  direct H: {}", dims_list(&rep.direct_h)).unwrap();
    writeln!(out, "  corollary: {}", ok(rep.corollary_ok)).unwrap();
    writeln!(out, "  page homology: {}", ok(rep.page_homology_ok)).unwrap();
    writeln!(out, "  bidegree/parity of d_r: {}", ok(rep.differentials_ok)).unwrap();
    writeln!(out, "  E_inf = gr H: {}", ok(rep.graded_ok)).unwrap();
    writeln!(out, "  E_(q+m+2) = E_inf: {}", if rep.r0_bound_ok { "yes" } else { "no" }).unwrap();
}

fn t8_text(t: &Theorem8Report) -> String {
    let show = |x: Option<usize>| x.map_or("none".to_string(), |k| k.to_string());
    let sm = t.symbol_match.map_or("n/a".to_string(), |b| b.to_string());
    format!(
        "k={} first_nonzero_page={} lower_pages_zero={} symbol_match={}",
        show(t.k),
        show(t.first_nonzero_page),
        t.lower_pages_zero,
        sm
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAILED"
    }
}

fn cmd_spectral(desc: &SheafDescriptor, a: &GluingCocycle, as_json: bool) -> Result<String, CliError> {
    require_p1(desc)?;
    let cx = twisted_complex(desc, a, WindowSpec::Auto).map_err(invalid)?;
    let rep = converge(&cx.filtered());
    let t8 = theorem8_check(desc, a).map_err(|e| CliError::Internal(e.to_string()))?;
    let text = if as_json {
        let mut v = to_json(&rep);
        v["theorem8"] = t8_json(&t8);
        pretty(&v)
    } else {
        let mut out = String::new();
        writeln!(out, "{desc}").unwrap();
        spectral_text(&rep, &mut out);
        writeln!(out, "theorem8: {}", t8_text(&t8)).unwrap();
        out
    };
    if !rep.all_ok() {
        return Err(CliError::Internal(format!("{text}spectral cross-check failed")));
    }
    Ok(text)
}

fn cmd_theorem8(desc: &SheafDescriptor, a: &GluingCocycle, as_json: bool) -> Result<String, CliError> {
    require_p1(desc)?;
    if a.is_identity() {
        return Err(invalid("theorem8 needs a nontrivial cocycle"));
    }
    let t8 = theorem8_check(desc, a).map_err(|e| CliError::Internal(e.to_string()))?;
    let text = if as_json { pretty(&to_json(&t8)) } else { format!("{desc}\norder: {}\n{}\n", order(desc, a), t8_text(&t8)) };
    if t8.k.is_some() && (!t8.lower_pages_zero || t8.symbol_match != Some(true)) {
        return Err(CliError::Internal(format!("{text}order-k pattern violated")));
    }
    Ok(text)
}

fn cmd_connection(g: &[i64], as_json: bool) -> Result<String, CliError> {
    let report = theorem7_check(g);
    let atiyah = atiyah_obstruction(g);
    let conn = connection(g).ok();
    if as_json {
        let mut v = json!({"theorem7": to_json(&report), "atiyah": to_json(&atiyah)});
        if let Some(c) = &conn {
            v["connection"] = json!({"omega0": c.omega0.to_string(), "omega1": c.omega1.to_string()});
        }
        return finish_connection(&report, pretty(&v));
    }
    let mut out = String::new();
    let classes: Vec<String> = atiyah.summand_classes.iter().map(ToString::to_string).collect();
    writeln!(out, "G twists: {g:?}").unwrap();
    writeln!(out, "atiyah class (coefficients of z^-1 dz): [{}]", classes.join(", ")).unwrap();
    writeln!(out, "dim H^1(Hom(Θ, G ⊗ G*)) = {}", report.extension_group_dim).unwrap();
    writeln!(out, "tangent class trivial: {}", report.tangent_class_trivial).unwrap();
    writeln!(out, "sequence splits: {}", report.sequence10_splits).unwrap();
    writeln!(out, "connection exists: {}", report.connection_exists).unwrap();
    writeln!(out, "all equal: {}", report.all_equal).unwrap();
    if let Some(c) = &conn {
        write!(out, "omega0 =\n{}omega1 =\n{}", c.omega0, c.omega1).unwrap();
    }
    finish_connection(&report, out)
}

fn finish_connection(report: &crate::classify::Theorem7Report, text: String) -> Result<String, CliError> {
    if report.all_equal {
        Ok(text)
    } else {
        Err(CliError::Internal(format!("{text}the three conditions disagree")))
    }
}

/// The flagship sheaf on `CP^{1|1}`: `E_red = O(0) ⊕ ΠO(-1)` glued by
/// `exp(z^{-1} ζ1 · N)`, `N` the elementary map from the even to the odd summand.
pub fn flagship() -> (SheafDescriptor, GluingCocycle) {
    let desc = SheafDescriptor::on(1, 1, &[0], &[-1]);
    let a = exp(&elementary_cochain(&desc, 1, 0, -1, &[1]).expect("flagship cochain is valid"));
    (desc, a)
}

fn cmd_demo(seed: u64, as_json: bool) -> Result<String, CliError> {
    let (desc, a) = flagship();
    let internal = |e: &dyn std::fmt::Display| CliError::Internal(e.to_string());
    let l = ladder(&desc);
    let split = cohomology(&build_split_complex(&desc, WindowSpec::Auto).map_err(|e| internal(&e))?);
    let twisted_cx = twisted_complex(&desc, &a, WindowSpec::Auto).map_err(|e| internal(&e))?;
    let twisted = cohomology(&twisted_cx);
    let rep = converge(&twisted_cx.filtered());
    let t8 = theorem8_check(&desc, &a).map_err(|e| internal(&e))?;
    let cert = reduce_cocycle(&desc, &a).map_err(|e| internal(&e))?;
    let stable = window_stability_check(&desc, WindowSpec::Auto, 2).map_err(|e| internal(&e))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = 10;
    let mut conj_ok = true;
    for _ in 0..trials {
        let (g, g_inv) = random_global_automorphism(&desc, &mut rng);
        let b = a.conjugate(&g, &g_inv);
        let h = cohomology(&twisted_complex(&desc, &b, WindowSpec::Auto).map_err(|e| internal(&e))?).h;
        conj_ok &= h == twisted.h;
    }

    let pd = |e, o| ParityDims { even: e, odd: o };
    let checks = [
        ("obstruction H^1(End_1) = 1", l.rows.first().map(|r| r.h1) == Some(1)),
        ("split cohomology 1|0, 1|0", split.h == vec![pd(1, 0), pd(1, 0)]),
        ("twisted differs from split", twisted.h != split.h),
        ("E_inf totals = direct H", rep.corollary_ok && rep.e_infinity_totals() == twisted.h),
        ("page homology law", rep.page_homology_ok),
        ("bidegree and parity of d_r", rep.differentials_ok),
        ("E_inf = gr H", rep.graded_ok),
        ("order 1 with d_1 != 0", t8.k == Some(1) && t8.first_nonzero_page == Some(1)),
        ("symbol match", t8.symbol_match == Some(true)),
        ("reduction obstructed at degree 1", matches!(&cert, SplittingCertificate::Obstructed(s) if s.k == 1)),
        ("window stability (padding 2)", stable),
        ("conjugation invariance", conj_ok),
    ];
    let all = checks.iter().all(|(_, b)| *b);

    let text = if as_json {
        let mut spectral = to_json(&rep);
        spectral["theorem8"] = t8_json(&t8);
        let v = json!({
            "descriptor": to_json(&desc.to_file()),
            "obstructions": to_json(&l),
            "split": split.to_json(),
            "twisted": twisted.to_json(),
            "spectral": spectral,
            "seed": seed,
            "checks": checks.iter().map(|(n, b)| json!({"name": n, "ok": b})).collect::<Vec<_>>(),
            "all_ok": all,
        });
        pretty(&v)
    } else {
        let mut out = String::new();
        writeln!(out, "{}: E_red = O(0) ⊕ ΠO(-1), a = exp(z^-1 ζ1 · N)", desc.space()).unwrap();
        writeln!(out, "obstructions:").unwrap();
        for row in &l.rows {
            writeln!(out, "  p={} H^0(End_p)={} H^1(End_p)={}", row.p, row.h0, row.h1).unwrap();
        }
        writeln!(out, "  verdict: {}", l.verdict).unwrap();
        writeln!(out, "cohomology:      split   twisted").unwrap();
        for k in 0..2 {
            writeln!(out, "  H^{k}            {:<7} {}", split.h[k].to_string(), twisted.h[k]).unwrap();
        }
        writeln!(out, "spectral sequence of the twisted complex:").unwrap();
        spectral_text(&rep, &mut out);
        writeln!(out, "theorem8: {}", t8_text(&t8)).unwrap();
        writeln!(out, "checks (seed {seed}):").unwrap();
        for (name, b) in &checks {
            writeln!(out, "  {name}: {}", ok(*b)).unwrap();
        }
        out
    };
    if all {
        Ok(text)
    } else {
        Err(CliError::Internal(format!("{text}demo cross-checks failed")))
    }
}

fn dispatch(cmd: &Command) -> Result<String, CliError> {
    match cmd {
        Command::Bott { n, d, q, json } => cmd_bott(*n, *d, *q, *json),
        Command::Decompose { file, json } => cmd_decompose(&load_descriptor(file)?, *json),
        Command::Obstructions { file, json } => cmd_obstructions(&load_descriptor(file)?, *json),
        Command::Cohomology { file, cocycle, window, json } => {
            let desc = load_descriptor(file)?;
            let a = load_cocycle(&desc, cocycle)?;
            cmd_cohomology(&desc, &a, *window, *json)
        }
        Command::Spectral { file, cocycle, json } => {
            let desc = load_descriptor(file)?;
            let a = load_cocycle(&desc, cocycle)?;
            cmd_spectral(&desc, &a, *json)
        }
        Command::Theorem8 { file, cocycle, json } => {
            let desc = load_descriptor(file)?;
            let a = load_cocycle(&desc, &Some(cocycle.clone()))?;
            cmd_theorem8(&desc, &a, *json)
        }
        Command::Connection { g, json } => cmd_connection(g, *json),
        Command::DemoCp11 { seed, json } => cmd_demo(*seed, *json),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let (CliError::Validation(msg) | CliError::Internal(msg)) = &e;
            let label = if e.code() == 2 { "error" } else { "internal check failed" };
            let _ = writeln!(err, "{label}: {msg}");
            e.code()
        }
    }
}
