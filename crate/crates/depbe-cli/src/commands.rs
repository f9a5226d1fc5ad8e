use serde::Serialize;
use std::path::Path;

use depbe::applications::ustat::{plugin_estimate, PluginEstimate};
use depbe::applications::volatility::{t_constant, volatility_bound, volatility_estimators, VolatilitySpec};
use depbe::applications::{u_statistic, ustat_bound, ustat_graph_bounds, Kernel, UStatGraph, UStatInputs, UStatSpec};
use depbe::bounds::{
    baseline, boundary_points, bound_delta_2_3, bound_delta_ge3, bound_linfty, bound_linfty_refined, crossover_curves,
    Baseline, BoundReport, TheoremId,
};
use depbe::cumulants::cumulant_check;
use depbe::fourier::{exact_dkol, feller_rhs, StandardizedLaw};
use depbe::generators::{random_families, FamilySpec, WindowFn};
use depbe::montecarlo::{verify_bound, TheoremSelector, VerificationReport};
use depbe::par::Exec;
use depbe::{Atom, DiscreteFamily, DiscreteLaw, FamilyJson, MomentProfile};

use crate::io::{emit, parse_json, read_column, read_json, read_text, to_csv, to_json, CliError, CliResult};
use crate::{
    BoundsArgs, Cli, Command, CumulantCheckArgs, FellerCheckArgs, Format, GenerateArgs, Kind, RegimesArgs, UstatArgs,
    VerifyArgs, VolatilityArgs,
};

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Bounds(a) => bounds(cli, a),
        Command::Regimes(a) => regimes(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::CumulantCheck(a) => cumulant_check_cmd(cli, a),
        Command::FellerCheck(a) => feller_check(cli, a),
        Command::Generate(a) => generate(cli, a),
        Command::Ustat(a) => ustat(cli, a),
        Command::Volatility(a) => volatility(cli, a),
    }
}

fn json_only(cli: &Cli, what: &str) -> CliResult<()> {
    if cli.format == Some(Format::Csv) {
        return Err(CliError::Input(format!("{what} emits JSON only")));
    }
    Ok(())
}

// bounds

#[derive(Serialize)]
struct BoundRow {
    theorem_id: String,
    raw: Option<f64>,
    clamped: Option<f64>,
    branch: String,
    valid: bool,
    notes: String,
}

#[derive(Serialize)]
#[serde(untagged)]
enum BoundEntry {
    Report(BoundReport),
    Inapplicable { theorem_id: String, valid: bool, error: String },
}

fn entry(id: TheoremId, r: depbe::Result<BoundReport>) -> BoundEntry {
    match r {
        Ok(r) => BoundEntry::Report(r),
        Err(e) => BoundEntry::Inapplicable { theorem_id: id.as_str().into(), valid: false, error: e.to_string() },
    }
}

fn bound_entries(profile: &MomentProfile, all: bool) -> Vec<BoundEntry> {
    let mut out = vec![
        entry(TheoremId::Linfty, bound_linfty(profile)),
        entry(TheoremId::LinftyRefined, bound_linfty_refined(profile)),
    ];
    let deltas = profile.deltas();
    let ge3: Vec<f64> = deltas.iter().copied().filter(|&d| d >= 3.0).collect();
    let mid: Vec<f64> = deltas.iter().copied().filter(|&d| d > 2.0 && d < 3.0).collect();
    if ge3.is_empty() {
        out.push(entry(
            TheoremId::DeltaGe3,
            Err(depbe::Error::MissingMoment("A_delta for some delta >= 3".into())),
        ));
    }
    for d in ge3 {
        out.push(entry(TheoremId::DeltaGe3, bound_delta_ge3(profile, d)));
    }
    if mid.is_empty() {
        out.push(entry(
            TheoremId::Delta2To3,
            Err(depbe::Error::MissingMoment("A_delta for some delta in (2, 3)".into())),
        ));
    }
    for d in mid {
        out.push(entry(TheoremId::Delta2To3, bound_delta_2_3(profile, d)));
    }
    if all {
        for b in Baseline::ALL {
            out.push(entry(b.theorem_id(), baseline(profile, b)));
        }
    }
    out
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> CliResult<()> {
    let profile = match (&a.profile, &a.spec) {
        (Some(p), _) => {
            let profile: MomentProfile = read_json(p)?;
            profile.validate()?;
            profile
        }
        (None, Some(s)) => load_spec(s)?.profile(&a.deltas)?,
        (None, None) => return Err(CliError::Input("one of --profile or --spec is required".into())),
    };
    let entries = bound_entries(&profile, a.all);
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&serde_json::json!({ "profile": profile, "bounds": entries }))?,
        Format::Csv => {
            let rows: Vec<BoundRow> = entries
                .iter()
                .map(|e| match e {
                    BoundEntry::Report(r) => BoundRow {
                        theorem_id: r.theorem_id.as_str().into(),
                        raw: Some(r.raw),
                        clamped: Some(r.clamped),
                        branch: r.branch.clone(),
                        valid: r.valid,
                        notes: r.notes.join("; "),
                    },
                    BoundEntry::Inapplicable { theorem_id, error, .. } => BoundRow {
                        theorem_id: theorem_id.clone(),
                        raw: None,
                        clamped: None,
                        branch: String::new(),
                        valid: false,
                        notes: error.clone(),
                    },
                })
                .collect();
            to_csv(&rows)?
        }
    };
    emit(cli.out.as_ref(), &text)
}

// regimes

fn grid(name: &str, min: f64, max: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0) || !(max >= min) {
        return Err(CliError::Input(format!("{name} grid needs step > 0 and max >= min")));
    }
    let (k0, k1) = ((min / step).round() as i64, (max / step).round() as i64);
    Ok((k0..=k1).map(|k| k as f64 * step).collect())
}

fn regimes(cli: &Cli, a: &RegimesArgs) -> CliResult<()> {
    let deltas = grid("delta", a.delta_min, a.delta_max, a.delta_step)?;
    let alphas = grid("alpha", a.alpha_min, a.alpha_max, a.alpha_step)?;
    let map = crossover_curves(&deltas, &alphas, Exec::default())?;
    if let Some(svg) = &a.svg {
        emit(Some(svg), &map.to_svg())?;
    }
    if let Some(path) = &a.boundaries {
        emit(Some(path), &to_csv(&boundary_points(&map))?)?;
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(&map.cells)?,
        Format::Json => to_json(&map)?,
    };
    emit(cli.out.as_ref(), &text)
}

// verify

#[derive(Serialize)]
struct VerifyRow {
    spec_id: String,
    theorem: String,
    n_samples: usize,
    confidence: f64,
    empirical_dkol: f64,
    dkw_margin: f64,
    theoretical_bound: f64,
    raw_bound: f64,
    pass: bool,
    trivial: bool,
    seed: u64,
}

fn verify(cli: &Cli, a: &VerifyArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec)?;
    let theorem: TheoremSelector = a.theorem.parse()?;
    let r: VerificationReport = verify_bound(&spec, theorem, a.samples, a.confidence, cli.seed, Exec::default())?;
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&r)?,
        Format::Csv => to_csv(&[VerifyRow {
            spec_id: r.spec_id.clone(),
            theorem: a.theorem.clone(),
            n_samples: r.n_samples,
            confidence: r.confidence,
            empirical_dkol: r.empirical_dkol,
            dkw_margin: r.dkw_margin,
            theoretical_bound: r.theoretical_bound,
            raw_bound: r.raw_bound,
            pass: r.pass,
            trivial: r.trivial,
            seed: r.seed,
        }])?,
    };
    emit(cli.out.as_ref(), &text)?;
    if !r.pass {
        return Err(CliError::Failed(format!(
            "empirical {} - margin {} exceeds bound {}",
            r.empirical_dkol, r.dkw_margin, r.theoretical_bound
        )));
    }
    Ok(())
}

// cumulant-check

#[derive(Serialize)]
struct CumulantRow {
    family_id: String,
    r: usize,
    delta: f64,
    exact_abs_cumulant: f64,
    bound: f64,
    ratio: f64,
    pass: bool,
}

fn cumulant_check_cmd(cli: &Cli, a: &CumulantCheckArgs) -> CliResult<()> {
    let families: Vec<(String, DiscreteFamily)> = if a.families == "random" {
        random_families(cli.seed, a.count, a.max_n)
            .into_iter()
            .enumerate()
            .map(|(i, doc)| Ok((format!("random-{i:04}"), doc.to_family()?)))
            .collect::<CliResult<_>>()?
    } else {
        let path = Path::new(&a.families);
        vec![(file_id(path), load_family(path)?)]
    };
    let mut rows = Vec::new();
    for (id, fam) in &families {
        for r in cumulant_check(fam, a.rmax, &a.deltas)? {
            rows.push(CumulantRow {
                family_id: id.clone(),
                r: r.r,
                delta: r.delta,
                exact_abs_cumulant: r.exact_abs_cumulant,
                bound: r.bound,
                ratio: r.ratio,
                pass: r.pass,
            });
        }
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(&rows)?,
        Format::Json => to_json(&rows)?,
    };
    emit(cli.out.as_ref(), &text)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} cumulant checks failed", rows.len())));
    }
    Ok(())
}

// feller-check

#[derive(Serialize)]
struct FellerRow {
    #[serde(rename = "T")]
    t: f64,
    lhs_exact_dkol: f64,
    rhs: f64,
    slack: f64,
}

fn feller_check(cli: &Cli, a: &FellerCheckArgs) -> CliResult<()> {
    let law = load_standardized(&a.law)?;
    let lhs = exact_dkol(&law);
    let mut rows = Vec::new();
    for &t in &a.t {
        if !(t > 0.0) {
            return Err(CliError::Input(format!("T = {t} must be positive")));
        }
        let rhs = feller_rhs(&law, t)?;
        rows.push(FellerRow { t, lhs_exact_dkol: lhs, rhs, slack: rhs - lhs });
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(&rows)?,
        Format::Json => to_json(&rows)?,
    };
    emit(cli.out.as_ref(), &text)?;
    if rows.iter().any(|r| r.slack < 0.0) {
        return Err(CliError::Failed("right-hand side below the exact distance".into()));
    }
    Ok(())
}

// generate

fn parse_law(s: &str) -> CliResult<DiscreteLaw> {
    let bad = || CliError::Input(format!("cannot parse law '{s}' (rademacher, bernoulli:p, point:x, x1:p1,x2:p2,...)"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if s == "rademacher" {
        return Ok(DiscreteLaw::rademacher());
    }
    if let Some(p) = s.strip_prefix("bernoulli:") {
        return Ok(DiscreteLaw::bernoulli(num(p)?)?);
    }
    if let Some(x) = s.strip_prefix("point:") {
        return Ok(DiscreteLaw::point_mass(num(x)?));
    }
    let atoms = s
        .split(',')
        .map(|pair| {
            let (x, p) = pair.split_once(':').ok_or_else(bad)?;
            Ok(Atom { x: num(x)?, p: num(p)? })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(DiscreteLaw::new(atoms)?)
}

fn generate(cli: &Cli, a: &GenerateArgs) -> CliResult<()> {
    json_only(cli, "generate")?;
    let spec = match a.kind {
        Kind::Clique => depbe::generators::clique_blocks(a.blocks, a.size, parse_law(&a.law)?)?,
        Kind::Window => {
            let window = match a.window.as_str() {
                "product" => WindowFn::Product,
                "sum" => WindowFn::Sum,
                "mean" => WindowFn::Mean,
                w => return Err(CliError::Input(format!("unknown window '{w}' (product, sum, mean)"))),
            };
            depbe::generators::m_dependent_window(a.n, a.m, parse_law(&a.law)?, window)?
        }
        Kind::ThreePoint => depbe::generators::three_point_family(a.delta, a.n)?,
        Kind::BernoulliDecay => depbe::generators::bernoulli_decay(a.n)?,
        Kind::Random => {
            let family = random_families(cli.seed, 1, a.max_n).remove(0);
            FamilySpec::Custom { family }.validated()?
        }
    };
    emit(cli.out.as_ref(), &to_json(&spec)?)
}

// ustat

#[derive(Serialize)]
struct UstatReport {
    kernel: String,
    n: usize,
    ell: usize,
    m: usize,
    u_statistic: f64,
    graph: UStatGraph,
    inputs: UStatInputs,
    /// inputs that were estimated from the data rather than supplied
    estimated: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plugin: Option<PluginEstimate>,
    bound: BoundReport,
}

fn ustat(cli: &Cli, a: &UstatArgs) -> CliResult<()> {
    json_only(cli, "ustat")?;
    let kernel: Kernel = a.kernel.parse()?;
    let data = read_column(&a.data)?;
    let spec = UStatSpec::new(kernel, data.len(), a.m)?;
    let u = u_statistic(&spec, &data)?;
    let graph = ustat_graph_bounds(spec.n, spec.ell(), a.m)?;
    let needs_plugin = a.var_vn.is_none() || (a.l.is_none() && a.a_delta.is_none());
    let plugin = if needs_plugin { Some(plugin_estimate(&spec, &data, a.delta)?) } else { None };
    let mut estimated = Vec::new();
    let var_vn = a.var_vn.unwrap_or_else(|| {
        estimated.push("var_vn");
        plugin.map_or(f64::NAN, |p| p.var_vn)
    });
    let mut a_delta = || {
        a.a_delta.unwrap_or_else(|| {
            estimated.push("a_delta");
            plugin.map_or(f64::NAN, |p| p.a_delta)
        })
    };
    let inputs = if let Some(k) = a.k {
        UStatInputs::Stationary { delta: a.delta, a_delta: a_delta(), var_vn, k }
    } else if let Some(l) = a.l {
        UStatInputs::Bounded { l, var_vn }
    } else {
        UStatInputs::Moment { delta: a.delta, a_delta: a_delta(), var_vn }
    };
    let mut bound = ustat_bound(&spec, &inputs)?;
    if !estimated.is_empty() {
        bound.valid = false;
        bound.notes.push(format!("plug-in estimates used for: {}", estimated.join(", ")));
    }
    let report = UstatReport {
        kernel: spec.kernel.name().into(),
        n: spec.n,
        ell: spec.ell(),
        m: a.m,
        u_statistic: u,
        graph,
        inputs,
        estimated,
        plugin,
        bound,
    };
    emit(cli.out.as_ref(), &to_json(&report)?)
}

// volatility

#[derive(Serialize)]
struct VolatilityReport {
    n: usize,
    t_n: f64,
    e_hat: f64,
    nu_hat: f64,
    nu_hat_unbiased: f64,
    delta: f64,
    m: usize,
    k: f64,
    t_constant: f64,
    moments_estimated: bool,
    bound: BoundReport,
}

fn volatility(cli: &Cli, a: &VolatilityArgs) -> CliResult<()> {
    json_only(cli, "volatility")?;
    let mut times = read_column(&a.times)?;
    if times.first().is_some_and(|&t| t != 0.0) {
        times.insert(0, 0.0);
    }
    let x = read_column(&a.returns)?;
    let est = volatility_estimators(&times, &x, false)?;
    let unb = volatility_estimators(&times, &x, true)?;
    let kap = depbe::applications::kappas(&times)?;
    let (moments, moments_estimated) = match &a.moments {
        Some(p) => (read_column(p)?, false),
        None => {
            let mean = x.iter().zip(&kap).map(|(x, k)| (x / k).abs().powf(a.delta)).sum::<f64>() / x.len() as f64;
            (vec![mean; x.len()], true)
        }
    };
    let spec = VolatilitySpec::new(times.clone(), a.delta, a.m, a.k, moments.clone())?;
    let mut bound = volatility_bound(&spec)?;
    if moments_estimated {
        bound.valid = false;
        bound.notes.push("moments E|X_i/kappa_i|^delta estimated by the sample mean".into());
    }
    let report = VolatilityReport {
        n: x.len(),
        t_n: times[x.len()],
        e_hat: est.e_hat,
        nu_hat: est.nu_hat,
        nu_hat_unbiased: unb.nu_hat,
        delta: a.delta,
        m: a.m,
        k: a.k,
        t_constant: t_constant(&times, &moments, a.delta)?,
        moments_estimated,
        bound,
    };
    emit(cli.out.as_ref(), &to_json(&report)?)
}

// input loading

fn file_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn load_spec(path: &Path) -> CliResult<FamilySpec> {
    let spec: FamilySpec = read_json(path)?;
    Ok(spec.validated()?)
}

enum Doc {
    Law(DiscreteLaw),
    Spec(FamilySpec),
    Family(FamilyJson),
}

/// Detects the document kind by shape, then parses it with the typed reader
/// so errors keep their line and column.
fn load_doc(path: &Path) -> CliResult<Doc> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse_json(path, &text)?;
    match &value {
        serde_json::Value::Array(_) => Ok(Doc::Law(parse_json(path, &text)?)),
        serde_json::Value::Object(o) if o.contains_key("kind") => {
            Ok(Doc::Spec(parse_json::<FamilySpec>(path, &text)?.validated()?))
        }
        serde_json::Value::Object(o) if o.contains_key("laws") => Ok(Doc::Family(parse_json(path, &text)?)),
        _ => Err(CliError::Input(format!(
            "{}: expected a list of atoms, a family spec (with \"kind\") or a family (with \"laws\")",
            path.display()
        ))),
    }
}

fn load_family(path: &Path) -> CliResult<DiscreteFamily> {
    match load_doc(path)? {
        Doc::Law(law) => Ok(DiscreteFamily::independent(vec![law], Default::default())?),
        Doc::Spec(spec) => Ok(spec.exact_family()?),
        Doc::Family(f) => Ok(f.to_family()?),
    }
}

fn load_standardized(path: &Path) -> CliResult<StandardizedLaw> {
    match load_doc(path)? {
        Doc::Law(law) => Ok(StandardizedLaw::from_atoms(law.atoms())?),
        Doc::Spec(spec) => Ok(StandardizedLaw::from_family(&spec.exact_family()?)?),
        Doc::Family(f) => Ok(StandardizedLaw::from_family(&f.to_family()?)?),
    }
}
