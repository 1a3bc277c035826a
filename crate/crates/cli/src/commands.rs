//! Command implementations. Each returns an [`Outcome`] or a domain error.

use std::time::Instant;

use koszul_core::field::rational_to_f64;
use koszul_core::io::{format_rational, load_system, system_to_value};
use koszul_core::koszul::{assemble_delta1, default_theta, theta_partition};
use koszul_core::linalg::{self, Matrix};
use koszul_core::multihomo::mhb;
use koszul_core::oracle::ff_solve;
use koszul_core::solver::{eigen_schur, extend_eigenvector, schur_data, solve_2bilinear, SolveOptions};
use koszul_core::weyman::{
    self, assembly_vector, default_box, four_degree_vectors, is_determinantal, search_degree_vectors, term_table,
};
use koszul_core::{
    fixtures, BilinearSystem, DegreeVector, Error, Exponent, FieldSpec, PrimeField, Rationals, Result,
    SymbolicResultantMatrix, SystemType,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::render::{complex_json, fmt_complex, fmt_f64, grid, Outcome};
use crate::{usage_error, Cli, Command};

const GB_SIZES: &str = include_str!("../data/gb_sizes.json");

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Dims => dims(cli),
        Command::SearchDv => search_dv(cli),
        Command::Matrix => matrix(cli),
        Command::Resultant => resultant(cli),
        Command::Solve => solve(cli),
        Command::Oracle { budget } => oracle(cli, *budget),
        Command::SelftestPaper => selftest(),
        Command::Bench { assemble_max } => bench(*assemble_max),
    }
}

fn load(cli: &Cli) -> Result<Option<BilinearSystem>> {
    cli.system.as_deref().map(load_system).transpose()
}

fn require_system(cli: &Cli) -> Result<BilinearSystem> {
    match load(cli)? {
        Some(sys) => Ok(sys),
        None => usage_error(&format!("`{}` requires --system", cli.command.name())),
    }
}

/// The type from `--type`, or from the system file when only that is given.
fn system_type(cli: &Cli, sys: Option<&BilinearSystem>) -> Result<SystemType> {
    let from_flag = cli.ty.as_deref().map(str::parse::<SystemType>).transpose()?;
    match (from_flag, sys) {
        (Some(t), Some(s)) if t != s.system_type() => {
            Err(Error::Precondition(format!("--type {t} disagrees with the system type {}", s.system_type())))
        }
        (Some(t), _) => Ok(t),
        (None, Some(s)) => Ok(s.system_type()),
        (None, None) => usage_error(&format!("`{}` requires --type or --system", cli.command.name())),
    }
}

fn field(cli: &Cli, default: FieldSpec) -> Result<FieldSpec> {
    cli.field.as_deref().map(str::parse).transpose().map(|f| f.unwrap_or(default))
}

fn theta(cli: &Cli, t: &SystemType) -> Result<Exponent> {
    match &cli.theta {
        Some(key) => Exponent::parse_key(key),
        None => Ok(default_theta(t)),
    }
}

fn require_f0(sys: &BilinearSystem) -> Result<()> {
    if sys.f0().is_none() {
        return Err(Error::Precondition("the system file has no f0".into()));
    }
    Ok(())
}

fn dims(cli: &Cli) -> Result<Outcome> {
    let sys = load(cli)?;
    let t = system_type(cli, sys.as_ref())?;
    t.validate()?;
    let mu = weyman::mu(&t)?;
    let vectors: Vec<Value> = four_degree_vectors(&t)
        .iter()
        .map(|m| {
            let c = is_determinantal(&t, *m);
            json!({"m": m.to_string(), "determinantal": c.determinantal, "dim_k1": c.dim_k1, "dim_k0": c.dim_k0})
        })
        .collect();
    let mut text =
        format!("type {t}\nn = {}\nmhb = {}\nmu = {mu}\nassembly vector {}\n", t.n(), mhb(&t), assembly_vector(&t));
    let mut csv = vec![vec!["m".to_string(), "determinantal".into(), "dim_k1".into(), "dim_k0".into()]];
    for v in &vectors {
        text.push_str(&format!(
            "  m = {:<12} determinantal {:<5}  K1 {}  K0 {}\n",
            v["m"].as_str().unwrap_or_default(),
            v["determinantal"],
            v["dim_k1"],
            v["dim_k0"]
        ));
        csv.push(
            ["m", "determinantal", "dim_k1", "dim_k0"]
                .iter()
                .map(|k| v[k].to_string().trim_matches('"').to_string())
                .collect(),
        );
    }
    let mut result = json!({
        "type": t.to_string(),
        "n": t.n(),
        "mhb": mhb(&t),
        "mu": mu,
        "assembly_vector": assembly_vector(&t).to_string(),
        "degree_vectors": vectors,
    });
    if let Some(m) = &cli.degree_vector {
        let m: DegreeVector = m.parse()?;
        let table = term_table(&t, m);
        let check = is_determinantal(&t, m);
        text.push_str(&format!("\nterms for m = {m}\n{table}"));
        result["terms"] = json!({"m": m.to_string(), "check": check, "entries": table.entries});
    }
    Ok(Outcome::new(result, text, csv))
}

fn parse_box(s: &str) -> Result<(i64, i64)> {
    let err = || Error::Parse(format!("bad box {s:?} (expected lo:hi)"));
    let (lo, hi) = s.split_once(':').ok_or_else(err)?;
    Ok((lo.trim().parse().map_err(|_| err())?, hi.trim().parse().map_err(|_| err())?))
}

fn search_dv(cli: &Cli) -> Result<Outcome> {
    let sys = load(cli)?;
    let t = system_type(cli, sys.as_ref())?;
    t.validate()?;
    let (lo, hi) = match &cli.search_box {
        Some(b) => parse_box(b)?,
        None => default_box(&t),
    };
    let known = four_degree_vectors(&t);
    let found = search_degree_vectors(&t, lo, hi);
    let rows: Vec<Value> = found
        .iter()
        .map(|m| {
            let c = is_determinantal(&t, *m);
            let linear = weyman::has_linear_differential(&term_table(&t, *m));
            json!({"m": m.to_string(), "dim": c.dim_k1, "linear": linear, "known": known.contains(m)})
        })
        .collect();
    let mut text = format!("type {t}, box [{lo}, {hi}]^3: {} determinantal vectors\n", found.len());
    let mut csv = vec![vec!["m".to_string(), "dim".into(), "linear".into(), "known".into()]];
    let mut body = Vec::new();
    for (m, r) in found.iter().zip(&rows) {
        let flag = |k: &str| r[k].as_bool().unwrap_or(false).to_string();
        body.push(vec![m.to_string(), r["dim"].to_string(), flag("linear"), flag("known")]);
        csv.push(vec![m.to_string(), r["dim"].to_string(), flag("linear"), flag("known")]);
    }
    text.push_str(&grid(Some(&csv[0]), &body));
    Ok(Outcome::new(json!({"type": t.to_string(), "box": [lo, hi], "vectors": rows}), text, csv))
}

fn assemble(cli: &Cli, t: &SystemType) -> Result<SymbolicResultantMatrix> {
    if let Some(m) = &cli.degree_vector {
        let m: DegreeVector = m.parse()?;
        if m != assembly_vector(t) {
            return Err(Error::Precondition(format!(
                "matrices are assembled for the degree vector {} only",
                assembly_vector(t)
            )));
        }
    }
    assemble_delta1(t)
}

fn dense_strings(m: &SymbolicResultantMatrix, sys: Option<&BilinearSystem>, f: FieldSpec) -> Result<Vec<Vec<String>>> {
    let n = m.size();
    match sys {
        None => {
            let mut cells = vec![vec!["0".to_string(); n]; n];
            for (r, c, e) in m.entries() {
                cells[r][c] = e.to_string();
            }
            Ok(cells)
        }
        Some(sys) => match f {
            FieldSpec::Rationals => Ok(m
                .specialize(sys, &Rationals)?
                .to_rows()
                .iter()
                .map(|r| r.iter().map(format_rational).collect())
                .collect()),
            FieldSpec::Prime(p) => Ok(m
                .specialize(sys, &PrimeField::new(p))?
                .to_rows()
                .iter()
                .map(|r| r.iter().map(u64::to_string).collect())
                .collect()),
        },
    }
}

fn matrix(cli: &Cli) -> Result<Outcome> {
    let sys = load(cli)?;
    let t = system_type(cli, sys.as_ref())?;
    if let Some(s) = &sys {
        require_f0(s)?;
    }
    let f = field(cli, FieldSpec::Rationals)?;
    let m = assemble(cli, &t)?;
    let th = theta(cli, &t)?;
    let part = theta_partition(&m, &th)?;
    let cells = dense_strings(&m, sys.as_ref(), f)?;
    let rows: Vec<String> = m.rows.iter().map(|r| r.label()).collect();
    let cols: Vec<String> = m.cols.iter().map(|c| c.label()).collect();
    let result = json!({
        "type": t.to_string(),
        "degree_vector": m.m.to_string(),
        "size": m.size(),
        "nnz": m.nnz(),
        "specialized": sys.is_some(),
        "field": f.to_string(),
        "rows": rows,
        "cols": cols,
        "entries": cells,
        "theta": {"monomial": th.key(), "split": part.split, "trailing_rows": part.trailing_rows(), "trailing_cols": part.trailing_cols()},
        "system": sys.as_ref().map(system_to_value),
    });
    let mut text = format!(
        "type {t}, degree vector {}, size {}, nonzeros {}\ntheta {}: leading block {}, trailing block {}\n\ncolumns:\n",
        m.m,
        m.size(),
        m.nnz(),
        th.key(),
        part.split,
        m.size() - part.split
    );
    for (k, c) in cols.iter().enumerate() {
        text.push_str(&format!("  c{k:<4} {c}\n"));
    }
    text.push_str("\nrows:\n");
    let mut body = Vec::with_capacity(rows.len());
    for (k, (r, cells)) in rows.iter().zip(&cells).enumerate() {
        text.push_str(&format!("  r{k:<4} {r}\n"));
        body.push(std::iter::once(format!("r{k}")).chain(cells.iter().cloned()).collect::<Vec<_>>());
    }
    let header: Vec<String> = std::iter::once(String::new()).chain((0..cols.len()).map(|k| format!("c{k}"))).collect();
    text.push('\n');
    text.push_str(&grid(Some(&header), &body));
    let csv = std::iter::once(std::iter::once("row".to_string()).chain(cols.iter().cloned()).collect())
        .chain(rows.iter().zip(&cells).map(|(r, c)| std::iter::once(r.clone()).chain(c.iter().cloned()).collect()))
        .collect();
    Ok(Outcome::new(result, text, csv))
}

fn resultant(cli: &Cli) -> Result<Outcome> {
    let sys = require_system(cli)?;
    require_f0(&sys)?;
    let t = system_type(cli, Some(&sys))?;
    let f = field(cli, FieldSpec::Rationals)?;
    let start = Instant::now();
    let m = assemble(cli, &t)?;
    let (det, bits) = match f {
        FieldSpec::Rationals => {
            let spec = m.specialize(&sys, &Rationals)?;
            (format_rational(&linalg::det_bareiss(&spec)?), Some(linalg::max_bits(&spec)))
        }
        FieldSpec::Prime(p) => {
            let field = PrimeField::new(p);
            (linalg::det_gauss(&field, &m.specialize(&sys, &field)?)?.to_string(), None)
        }
    };
    let millis = start.elapsed().as_secs_f64() * 1e3;
    let zero = det == "0";
    let text = format!("type {t}, size {}, field {f}\ndet = {det}\nvanishes: {zero}\n", m.size());
    let result = json!({
        "type": t.to_string(),
        "size": m.size(),
        "field": f.to_string(),
        "det": det,
        "vanishes": zero,
        "max_entry_bits": bits,
        "millis": millis,
        "system": system_to_value(&sys),
    });
    let csv = vec![
        vec!["type".into(), "size".into(), "field".into(), "det".into()],
        vec![t.to_string(), m.size().to_string(), f.to_string(), det],
    ];
    Ok(Outcome::new(result, text, csv))
}

fn matrix_json(m: &Matrix<BigRational>) -> Value {
    json!(m.to_rows().iter().map(|r| r.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn solve(cli: &Cli) -> Result<Outcome> {
    let sys = require_system(cli)?;
    let t = system_type(cli, Some(&sys))?;
    let mut opts = SolveOptions { seed: cli.seed, ..Default::default() };
    if let Some(tol) = cli.tol {
        opts.tol.residual = tol;
    }
    if cli.theta.is_some() {
        opts.theta = Some(theta(cli, &t)?);
    }
    let report = solve_2bilinear(&sys, &opts)?;
    let eps = opts.tol.real;
    let point = |v: &[Complex64]| v.iter().map(|c| fmt_complex(*c, eps)).collect::<Vec<_>>().join(" : ");
    let mut text = format!("type {t}: {} solutions (expected {})\n", report.solutions.len(), mhb(&t));
    let mut csv = vec![vec!["index".to_string(), "x".into(), "y".into(), "z".into(), "residual".into(), "real".into()]];
    let mut sols = Vec::new();
    for (k, p) in report.solutions.iter().enumerate() {
        let (x, y, z) = (point(&p.x), point(&p.y), point(&p.z));
        text.push_str(&format!("  ({x} ; {y} ; {z})  residual {:.2e}\n", report.residuals[k]));
        csv.push(vec![k.to_string(), x, y, z, format!("{:e}", report.residuals[k]), report.real[k].to_string()]);
        sols.push(json!({
            "x": p.x.iter().map(|c| complex_json(*c)).collect::<Vec<_>>(),
            "y": p.y.iter().map(|c| complex_json(*c)).collect::<Vec<_>>(),
            "z": p.z.iter().map(|c| complex_json(*c)).collect::<Vec<_>>(),
            "residual": report.residuals[k],
            "real": report.real[k],
        }));
    }
    text.push_str(&format!(
        "eigenvalues: {}\nseed {}, attempt seed {}, retries {}, theta {}\n",
        report.eigenpairs.iter().map(|p| fmt_complex(p.value, eps)).collect::<Vec<_>>().join(", "),
        cli.seed,
        report.attempt_seed,
        report.retries,
        report.theta.key()
    ));
    let a = &report.coordinate_change;
    let result = json!({
        "type": t.to_string(),
        "solutions": sols,
        "max_residual": report.max_residual(),
        "eigenvalues": report.eigenpairs.iter().map(|p| complex_json(p.value)).collect::<Vec<_>>(),
        "randomization": {
            "seed": cli.seed,
            "attempt_seed": report.attempt_seed,
            "retries": report.retries,
            "theta": report.theta.key(),
            "f0": report.f0.terms().map(|(e, c)| (e.key(), Value::String(format_rational(c)))).collect::<serde_json::Map<_, _>>(),
            "coordinate_change": {"x": matrix_json(&a.ax), "y": matrix_json(&a.ay), "z": matrix_json(&a.az)},
            "options": opts,
        },
        "system": system_to_value(&sys),
    });
    Ok(Outcome::new(result, text, csv))
}

fn oracle(cli: &Cli, budget: u128) -> Result<Outcome> {
    let sys = require_system(cli)?;
    let t = system_type(cli, Some(&sys))?;
    let p = match field(cli, FieldSpec::Prime(31))? {
        FieldSpec::Prime(p) => p,
        FieldSpec::Rationals => return Err(Error::Precondition("enumeration needs a prime field fp:<p>".into())),
    };
    let sols = ff_solve(&sys, &PrimeField::new(p), budget)?;
    let fmt = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" : ");
    let mut text = format!("type {t} over F_{p}: {} solutions\n", sols.len());
    let mut csv = vec![vec!["x".to_string(), "y".into(), "z".into()]];
    for s in &sols {
        text.push_str(&format!("  ({} ; {} ; {})\n", fmt(&s.x), fmt(&s.y), fmt(&s.z)));
        csv.push(vec![fmt(&s.x), fmt(&s.y), fmt(&s.z)]);
    }
    let result =
        json!({"type": t.to_string(), "field": format!("fp:{p}"), "solutions": sols, "system": system_to_value(&sys)});
    Ok(Outcome::new(result, text, csv))
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn selftest() -> Result<Outcome> {
    let t = fixtures::example_type();
    let sys = fixtures::example_system();
    let m = assemble_delta1(&t)?;
    let spec = m.specialize(&sys, &Rationals)?;
    let mut checks = Vec::new();

    let mut mismatches = 0;
    for (i, rl) in fixtures::PRINTED_ROW_LABELS.iter().enumerate() {
        for (j, cl) in fixtures::PRINTED_COL_LABELS.iter().enumerate() {
            let (r, c) = (m.row_index(rl), m.col_index(cl));
            let ok = matches!((r, c), (Some(r), Some(c)) if *spec.get(r, c) == BigRational::from_integer(fixtures::PRINTED_MATRIX[i][j].into()));
            mismatches += usize::from(!ok);
        }
    }
    checks.push(Check {
        name: "golden matrix",
        pass: mismatches == 0,
        detail: format!("{mismatches} of 100 entries differ"),
    });

    let (part, s, x) = schur_data(&m, &sys, &default_theta(&t))?;
    let expected: Vec<Vec<BigRational>> = fixtures::PRINTED_SCHUR
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
        .collect();
    checks.push(Check {
        name: "schur complement",
        pass: s.to_rows() == expected && m.size() - part.split == 2,
        detail: format!("trailing block {}, S = {}", m.size() - part.split, matrix_json(&s)),
    });

    let pairs = eigen_schur(&DMatrix::from_fn(s.rows(), s.cols(), |i, j| rational_to_f64(s.get(i, j))), 1e-7)?;
    let values: Vec<Complex64> = pairs.iter().map(|p| p.value).collect();
    let eig_ok = values.len() == 2
        && (values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-10
        && (values[1] - Complex64::new(3.0, 0.0)).norm() < 1e-10;
    let shown: Vec<String> = values.iter().map(|v| fmt_complex(*v, 1e-12)).collect();
    checks.push(Check { name: "eigenvalues", pass: eig_ok, detail: shown.join(", ") });

    let v = extend_eigenvector(&part, &x, &pairs[0].vector)?;
    let picked: Vec<Complex64> =
        fixtures::PRINTED_COL_LABELS.iter().map(|l| m.col_index(l).map_or(Complex64::zero(), |i| v[i])).collect();
    let scale = picked[0] / 4.0;
    let dev = picked
        .iter()
        .zip(fixtures::PRINTED_EIGENVECTOR)
        .map(|(a, b)| (a / scale - b as f64).norm() / (b as f64).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "eigenvector extension",
        pass: dev < 1e-8,
        detail: format!("max relative deviation {dev:.2e}"),
    });

    let report = solve_2bilinear(&sys.without_f0(), &SolveOptions::default())?;
    let roots = fixtures::example_roots();
    let matched = roots
        .iter()
        .filter(|root| {
            report.solutions.iter().zip(&report.residuals).any(|(p, res)| {
                let close = |a: &[Complex64], b: &[BigRational]| {
                    a.iter().zip(b).all(|(u, w)| (u - rational_to_f64(w)).norm() < 1e-8)
                };
                *res < 1e-8 && close(&p.x, &root.x) && close(&p.y, &root.y) && close(&p.z, &root.z)
            })
        })
        .count();
    checks.push(Check {
        name: "solutions",
        pass: matched == 2 && report.solutions.len() == 2,
        detail: format!("{matched} of 2 expected roots found, max residual {:.2e}", report.max_residual()),
    });

    let mut size_fail = Vec::new();
    for ((nx, ny, nz, r, s), size) in fixtures::SIZE_TABLE {
        let t = SystemType::new(nx, ny, nz, r, s)?;
        if weyman::mu(&t)? != size {
            size_fail.push(t.to_string());
        }
    }
    checks.push(Check {
        name: "matrix sizes",
        pass: size_fail.is_empty(),
        detail: format!("mismatches: {size_fail:?}"),
    });

    let ok = checks.iter().all(|c| c.pass);
    let text: String =
        checks.iter().map(|c| format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)).collect();
    let csv = std::iter::once(vec!["check".to_string(), "pass".into(), "detail".into()])
        .chain(checks.iter().map(|c| vec![c.name.to_string(), c.pass.to_string(), c.detail.clone()]))
        .collect();
    let result = json!({
        "checks": checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
        "all_pass": ok,
    });
    let mut out = Outcome::new(result, text, csv);
    out.ok = ok;
    Ok(out)
}

#[derive(Deserialize)]
struct Table {
    rows: Vec<TableRow>,
}

#[derive(Deserialize)]
struct TableRow {
    #[serde(rename = "type")]
    ty: [usize; 5],
    koszul: u64,
    fgb: [u64; 2],
    ratio: String,
}

/// `a` when `a ≥ 1`, `1/b` otherwise, to two decimals.
fn fmt_ratio(r: f64) -> String {
    if r >= 1.0 {
        format!("{r:.2}")
    } else {
        format!("1/{:.2}", 1.0 / r)
    }
}

fn bench(assemble_max: u64) -> Result<Outcome> {
    let table: Table = serde_json::from_str(GB_SIZES).map_err(|e| Error::Parse(format!("bundled table: {e}")))?;
    let mut rows = Vec::new();
    let mut body = Vec::new();
    let mut ok = true;
    for row in &table.rows {
        let [nx, ny, nz, r, s] = row.ty;
        let t = SystemType::new(nx, ny, nz, r, s)?;
        let mu = weyman::mu(&t)?;
        let (assembled, millis) = if mu <= assemble_max {
            let start = Instant::now();
            let m = assemble_delta1(&t)?;
            (Some(m.size() as u64), Some(start.elapsed().as_secs_f64() * 1e3))
        } else {
            (None, None)
        };
        let ratio = (row.fgb[0] * row.fgb[1]) as f64 / (mu * mu) as f64;
        let row_ok = mu == row.koszul && assembled.is_none_or(|a| a == mu);
        ok &= row_ok;
        body.push(vec![
            t.to_string(),
            mu.to_string(),
            row.koszul.to_string(),
            assembled.map_or("-".into(), |a| a.to_string()),
            millis.map_or("-".into(), fmt_f64_ms),
            format!("{}x{}", row.fgb[0], row.fgb[1]),
            fmt_ratio(ratio),
            row.ratio.clone(),
        ]);
        rows.push(json!({
            "type": t.to_string(),
            "mu": mu,
            "recorded_size": row.koszul,
            "assembled_size": assembled,
            "assembly_millis": millis,
            "fgb": row.fgb,
            "ratio": ratio,
            "recorded_ratio": row.ratio,
            "match": row_ok,
        }));
    }
    let header: Vec<String> = ["type", "mu", "recorded", "assembled", "ms", "fgb", "ratio", "recorded ratio"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let text = grid(Some(&header), &body);
    let csv = std::iter::once(header).chain(body).collect();
    let mut out = Outcome::new(json!({"rows": rows, "all_match": ok}), text, csv);
    out.ok = ok;
    Ok(out)
}

fn fmt_f64_ms(v: f64) -> String {
    fmt_f64((v * 10.0).round() / 10.0)
}
