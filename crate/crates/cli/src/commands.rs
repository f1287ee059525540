//! One function per subcommand; each returns both renderings of its result.

use fermibox_core::analysis::{
    baseline, bulk_scaling_study, edge_scaling_study, expected_edge_limit, finite_t_bulk_study, judge, Edge, Grid2d,
    ScalingReport,
};
use fermibox_core::heatflow::{km_log_density, km_mcmc, HeatFamily, LoopEnsembleParams};
use fermibox_core::kernels::eval_grid;
use fermibox_core::sampling::{
    haar_special_orthogonal_angles, haar_unitary_angles, sample_batch, GrandCanonicalSampler, GroupModes,
    ProjectionSampler, SpectralModes,
};
use fermibox_core::spectral::{solve_spectrum, SolveOptions};
use fermibox_core::thermo::{cutoff_energy, solve_lambda, solve_mu};
use fermibox_core::{kernels, make_preset, BoundaryMatrix, GroupKind, KernelSpec, LimitKernel, RngSpec, SpectrumTarget};
use serde_json::{json, Value};

use crate::output::{num, Emit, Format, Table};
use crate::{
    BcArgs, Cli, Command, Failure, KernelCommand, KernelEvalArgs, KmCommand, KmDensityArgs, KmMcmcArgs,
    LambdaSolveArgs, MuSolveArgs, SampleArgs, SampleKind, SpectrumArgs, Study, VerifyArgs,
};

/// Result plus, for `verify`, the reason the baseline was missed.
pub type Outcome = (Emit, Option<String>);

/// Tail mass dropped from grand-canonical spectra.
const GC_EPS: f64 = 1e-14;

pub fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    let done = |e: Emit| Ok((e, None));
    match &cli.command {
        Command::Spectrum(a) => done(spectrum(a)?),
        Command::Kernel(KernelCommand::Eval(a)) => done(kernel_eval(a)?),
        Command::MuSolve(a) => done(mu_solve(a)?),
        Command::LambdaSolve(a) => done(lambda_solve(a)?),
        Command::Sample(a) => done(sample(a, cli.seed)?),
        Command::Km(KmCommand::Density(a)) => done(km_density(a)?),
        Command::Km(KmCommand::Mcmc(a)) => done(km_chain(a, cli.seed)?),
        Command::Verify(a) => verify(a),
        Command::ReproduceFigure(a) => done(crate::figures::reproduce(a, cli.seed)?),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Preset by name, or a boundary matrix / `BcSource` given as JSON.
pub fn boundary(a: &BcArgs) -> Result<BoundaryMatrix, Failure> {
    let s = a.bc.trim();
    if s.starts_with('{') {
        if !a.params.is_empty() {
            return Err(usage("--params only applies to named presets"));
        }
        if let Ok(m) = serde_json::from_str::<BoundaryMatrix>(s) {
            m.validate()?;
            return Ok(m);
        }
        let src: kernels::BcSource =
            serde_json::from_str(s).map_err(|e| usage(format!("--bc is neither a preset nor valid JSON: {e}")))?;
        return Ok(src.boundary_matrix()?);
    }
    Ok(make_preset(s, &a.params)?)
}

fn parse_json<T: serde::de::DeserializeOwned>(flag: &str, s: &str) -> Result<T, Failure> {
    serde_json::from_str(s).map_err(|e| usage(format!("malformed {flag} JSON: {e}")))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("core types serialize")
}

fn spectrum(a: &SpectrumArgs) -> Result<Emit, Failure> {
    let u = boundary(&a.bc)?;
    let target = match (a.target.count, a.target.emax) {
        (Some(n), None) if n > 0 => SpectrumTarget::Count(n),
        (Some(_), None) => return Err(usage("--count must be positive")),
        (None, Some(e)) if e.is_finite() => SpectrumTarget::Cutoff(e),
        _ => return Err(usage("give exactly one finite --count or --emax")),
    };
    let s = solve_spectrum(&u, target, &SolveOptions::default())?;
    let mut table = Table::new(&["index", "k", "E", "kind", "a_re", "a_im", "b_re", "b_im"]);
    let modes: Vec<Value> = s
        .modes
        .iter()
        .map(|m| {
            table.push([
                m.index.to_string(),
                num(m.momentum()),
                num(m.energy),
                to_value(&m.kind).as_str().unwrap_or_default().to_string(),
                num(m.a.re),
                num(m.a.im),
                num(m.b.re),
                num(m.b.im),
            ]);
            json!({
                "index": m.index,
                "k": m.momentum(),
                "E": m.energy,
                "kind": m.kind,
                "a": [m.a.re, m.a.im],
                "b": [m.b.re, m.b.im],
            })
        })
        .collect();
    Ok(Emit { json: json!({ "bc": s.bc, "e_max": s.e_max, "modes": modes }), table, default: Format::Json })
}

fn kernel_eval(a: &KernelEvalArgs) -> Result<Emit, Failure> {
    let spec: KernelSpec = parse_json("--spec", &a.spec)?;
    let grid = Grid2d::parse(&a.grid)?;
    let k = spec.build()?;
    let vals = eval_grid(k.as_ref(), &grid.xs, &grid.ys)?;
    let mut table = Table::new(&["x", "y", "re", "im"]);
    let mut rows = Vec::with_capacity(vals.len());
    for (i, &x) in grid.xs.iter().enumerate() {
        for (j, &y) in grid.ys.iter().enumerate() {
            let z = vals[i * grid.ys.len() + j];
            table.push([num(x), num(y), num(z.re), num(z.im)]);
            rows.push(json!({ "x": x, "y": y, "re": z.re, "im": z.im }));
        }
    }
    Ok(Emit { json: json!({ "spec": spec, "values": rows }), table, default: Format::Csv })
}

fn mu_solve(a: &MuSolveArgs) -> Result<Emit, Failure> {
    let u = boundary(&a.bc)?;
    let sol = solve_mu(&u, a.t, a.target, a.tol)?;
    let mut table = Table::new(&["mu", "residual"]);
    table.push([num(sol.mu), num(sol.residual)]);
    Ok(Emit { json: to_value(&sol), table, default: Format::Json })
}

fn lambda_solve(a: &LambdaSolveArgs) -> Result<Emit, Failure> {
    let sol = solve_lambda(a.c)?;
    let mut table = Table::new(&["lambda", "residual"]);
    table.push([num(sol.lambda), num(sol.residual)]);
    Ok(Emit { json: to_value(&sol), table, default: Format::Json })
}

fn group_kind(name: &str) -> Result<GroupKind, Failure> {
    serde_json::from_value(Value::String(name.to_string()))
        .map_err(|_| usage(format!("unknown group {name:?}; expected U, Sp, SO_even or SO_odd")))
}

fn need<T: Copy>(v: Option<T>, flag: &str, kind: &str) -> Result<T, Failure> {
    v.ok_or_else(|| usage(format!("--kind {kind} needs {flag}")))
}

fn sample(a: &SampleArgs, seed: u64) -> Result<Emit, Failure> {
    if a.samples == 0 {
        return Err(usage("--samples must be positive"));
    }
    let rng = RngSpec::new(seed, 0);
    let mut notes = Vec::new();
    let configs = match a.kind {
        SampleKind::Dpp => {
            let n = need(a.n, "--n", "dpp")?;
            if n == 0 {
                return Err(usage("--n must be positive"));
            }
            match &a.group {
                Some(g) => {
                    let sampler = ProjectionSampler::new(GroupModes { group: group_kind(g)?, n })?;
                    sample_batch(a.samples, &rng, |r| sampler.sample(r))?
                }
                None => {
                    let u = boundary(&a.bc)?;
                    let s = solve_spectrum(&u, SpectrumTarget::Count(n), &SolveOptions::default())?;
                    let sampler = ProjectionSampler::new(SpectralModes::lowest(&s, n)?)?;
                    sample_batch(a.samples, &rng, |r| sampler.sample(r))?
                }
            }
        }
        SampleKind::Gc => {
            let t = need(a.t, "--t", "gc")?;
            let u = boundary(&a.bc)?;
            let mu = match (a.mu, a.target) {
                (Some(mu), None) => mu,
                (None, Some(n)) => solve_mu(&u, t, n, 1e-10)?.mu,
                _ => return Err(usage("--kind gc needs exactly one of --mu or --target")),
            };
            notes.push(format!("mu: {mu:?}"));
            let s = solve_spectrum(&u, SpectrumTarget::Cutoff(cutoff_energy(t, mu, GC_EPS)), &SolveOptions::default())?;
            let sampler = GrandCanonicalSampler::new(&s, t, mu)?;
            sample_batch(a.samples, &rng, |r| sampler.sample(r))?
        }
        SampleKind::HaarU => {
            let n = need(a.n, "--n", "haar-u")?;
            sample_batch(a.samples, &rng, |r| haar_unitary_angles(n, r))?
        }
        SampleKind::HaarSo => {
            let n = need(a.n, "--n", "haar-so")?;
            sample_batch(a.samples, &rng, |r| haar_special_orthogonal_angles(n, r))?
        }
    };
    let mut table = Table::new(&["sample", "count", "points"]);
    table.notes = notes;
    for (i, c) in configs.iter().enumerate() {
        table.push([i.to_string(), c.len().to_string()].into_iter().chain(c.points.iter().map(|&x| num(x))));
    }
    let json = json!({
        "domain": configs.first().map(|c| to_value(&c.domain)),
        "samples": configs.iter().map(|c| &c.points).collect::<Vec<_>>(),
    });
    Ok(Emit { json, table, default: Format::Csv })
}

fn km_density(a: &KmDensityArgs) -> Result<Emit, Failure> {
    let p = LoopEnsembleParams::new(HeatFamily::from_name(&a.family)?, a.t, a.points.len())?;
    let d = km_log_density(&p, &a.points)?;
    let mut table = Table::new(&["log_abs", "sign"]);
    table.push([num(d.log_abs), num(d.sign)]);
    Ok(Emit { json: json!({ "params": p, "points": a.points, "log_abs": d.log_abs, "sign": d.sign }), table, default: Format::Json })
}

fn km_chain(a: &KmMcmcArgs, seed: u64) -> Result<Emit, Failure> {
    let p = LoopEnsembleParams::new(HeatFamily::from_name(&a.family)?, a.t, a.n)?;
    let chain = km_mcmc(&p, a.steps, a.step_size, &RngSpec::new(seed, 0))?;
    let mut table = Table::new(&["step", "acceptance", "points"]);
    table.notes.push("step counts single-site moves; one state per sweep of n moves".into());
    table.notes.push(format!("acceptance is the whole-chain rate; low_acceptance: {}", chain.low_acceptance));
    for (i, s) in chain.states.iter().enumerate() {
        table.push([((i + 1) * a.n).to_string(), num(chain.acceptance)].into_iter().chain(s.points.iter().map(|&x| num(x))));
    }
    Ok(Emit { json: to_value(&chain), table, default: Format::Csv })
}

/// Limit kernel from JSON or a short name.
pub fn limit_kernel(s: &str) -> Result<LimitKernel, Failure> {
    let s = s.trim();
    if s.starts_with('{') {
        return parse_json("--limit", s);
    }
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let real = |a: Option<&str>| -> Result<f64, Failure> {
        crate::parse_real(a.ok_or_else(|| usage(format!("limit {name} needs a coupling, e.g. {name}:1")))?)
            .map_err(usage)
    };
    let k = match name.to_ascii_lowercase().as_str() {
        "sine" => LimitKernel::Sine {},
        "bessel-plus" | "bessel+" => LimitKernel::BesselPlus {},
        "bessel-minus" | "bessel-" => LimitKernel::BesselMinus {},
        "robin-edge" => LimitKernel::RobinEdge { c: real(arg)? },
        "delta-edge" => LimitKernel::DeltaEdge { c: real(arg)? },
        _ => return Err(usage(format!("unknown limit kernel {s:?}"))),
    };
    Ok(k)
}

fn report_table(r: &ScalingReport) -> Table {
    let mut t = Table::new(&["N", "distance"]);
    for (n, d) in r.sizes.iter().zip(&r.distances) {
        t.push([n.to_string(), num(*d)]);
    }
    t.notes.push(format!("fitted_rate: {:?}", r.fitted_rate));
    t
}

fn verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let b = baseline();
    let default_grid = |lo: f64| Grid2d::square(lo, 2.0, 33);
    let grid = |lo: f64| -> Result<Grid2d, Failure> {
        Ok(match &a.grid {
            Some(g) => Grid2d::parse(g)?,
            None => default_grid(lo),
        })
    };
    let (mut result, report, threshold) = match a.study {
        Study::Bulk => {
            if let Some(l) = &a.limit {
                if limit_kernel(l)? != (LimitKernel::Sine {}) {
                    return Err(Failure::Usage("bulk studies compare against the sine kernel".into()));
                }
            }
            let u = boundary(&a.bc)?;
            let r = bulk_scaling_study(&u, a.x0, &a.sizes, &grid(-2.0)?)?;
            (json!({ "bc": u, "x0": a.x0, "limit": LimitKernel::Sine {} }), r, b.bulk_threshold)
        }
        Study::Edge => {
            let u = boundary(&a.bc)?;
            let edge = Edge::from_name(&a.edge)?;
            let limit = match &a.limit {
                Some(l) => limit_kernel(l)?,
                None => expected_edge_limit(&u, edge)?,
            };
            let r = edge_scaling_study(&u, edge, &limit, &a.sizes, &grid(0.1)?)?;
            (json!({ "bc": u, "edge": edge, "limit": limit }), r, b.edge_threshold)
        }
        Study::FiniteT => {
            let f = finite_t_bulk_study(a.c, &a.sizes, &grid(-2.0)?)?;
            let riemann_ok = f.riemann.iter().all(|v| (v - 1.0).abs() <= b.riemann_tolerance);
            let limit = LimitKernel::FiniteTSine { c: f.c, lambda: f.lambda };
            let extra = json!({
                "c": f.c,
                "lambda": f.lambda,
                "limit": limit,
                "riemann": f.riemann,
                "riemann_tolerance": b.riemann_tolerance,
                "riemann_pass": riemann_ok,
            });
            (extra, f.report, b.finite_t_threshold)
        }
    };
    let verdict = judge(&report, threshold);
    let riemann_ok = result.get("riemann_pass").and_then(Value::as_bool).unwrap_or(true);
    let pass = verdict.pass && riemann_ok;
    let obj = result.as_object_mut().expect("study result is an object");
    obj.insert("study".into(), to_value(&a.study));
    obj.insert("report".into(), to_value(&report));
    obj.insert("verdict".into(), to_value(&verdict));
    obj.insert("pass".into(), Value::Bool(pass));
    let mut table = report_table(&report);
    table.notes.push(format!("threshold: {threshold:?}; pass: {pass}"));
    let emit = Emit { json: result, table, default: Format::Json };
    let miss = (!pass).then(|| {
        format!(
            "baseline not met (decreasing: {}, last distance {:e} vs threshold {threshold:e}, riemann ok: {riemann_ok})",
            verdict.decreasing,
            report.last()
        )
    });
    Ok((emit, miss))
}
