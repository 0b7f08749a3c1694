use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gapmps::analysis::{average_spectra, compare_runs, gap_census, periodogram, Spectrum};
use gapmps::gap::{is_maximal, GapContext};
use gapmps::io::PointsFile;
use gapmps::mesh::{extract_mesh, mesh_stats, stats_table, MeshStats};
use gapmps::optimize::{optimize as run_optimize, OptimizeConfig, OptimizeMode};
use gapmps::sampler::{dart_throw, maximal_sample, SampleOutput, SampleStats, Timing};
use gapmps::svg::{render, SvgOptions};
use gapmps::{SiteId, WeightedSite};
use serde_json::json;

use crate::config::*;
use crate::{CensusArgs, CliError, ModeArg, OptimizeArgs, SampleArgs, SourceArgs, SpectrumArgs, StatsArgs, SvgArgs};

/// Writes through a temporary file in the target directory, so a failed run
/// never leaves a partial output behind.
fn write_atomic(path: &Path, data: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io = |e: std::io::Error| CliError::Config(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(data).map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(tmp.path(), std::fs::Permissions::from_mode(0o644)).map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn json_bytes(v: &serde_json::Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s.into_bytes()
}

fn source_config(args: &SourceArgs) -> Result<RunConfig, CliError> {
    let base: Option<RunConfig> = match &args.config {
        Some(p) => Some(serde_json::from_str(&read_text(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?),
        None => None,
    };
    let r_min = match (args.rmin, &base) {
        (Some(r), _) => r,
        (None, Some(b)) => b.r_min,
        (None, None) => return Err(CliError::Usage("missing required --rmin (or --config)".into())),
    };
    let mut run = base.unwrap_or(RunConfig {
        domain: DomainSpec::Periodic,
        density: DensitySpec::Default,
        r_min,
        r_max: None,
        seed: 0,
        k_reject: None,
        max_fill_iterations: None,
        dart_only: false,
    });
    run.r_min = r_min;
    if let Some(d) = &args.domain {
        run.domain = parse_domain(d)?;
    }
    if let Some(d) = &args.density {
        run.density = parse_density(d, args.density_range.as_deref())?;
    }
    if args.rmax.is_some() {
        run.r_max = args.rmax;
    }
    if let Some(s) = args.seed {
        run.seed = s;
    }
    if args.k_reject.is_some() {
        run.k_reject = args.k_reject;
    }
    if args.max_fill_iterations.is_some() {
        run.max_fill_iterations = args.max_fill_iterations;
    }
    Ok(run)
}

/// Sites with the fixed boundary samples first, each group in id order.
fn ordered_sites(out: &SampleOutput) -> (Vec<WeightedSite>, usize) {
    let fixed: HashSet<SiteId> = out.boundary.iter().copied().collect();
    let mut sites = out.sites();
    sites.sort_by_key(|s| (!fixed.contains(&s.id), s.id));
    (sites, fixed.len())
}

fn points_text(run: &RunConfig, opt: Option<&OptimizeSpec>, out: &SampleOutput) -> String {
    let (sites, nb) = ordered_sites(out);
    PointsFile::from_sites(provenance(run, opt, nb), &sites).to_string()
}

fn print_timing(label: &str, t: &Timing) {
    eprintln!("timing {label}: dart {:.3}s, triangulate {:.3}s, fill {:.3}s", t.dart_seconds, t.triangulate_seconds, t.fill_seconds);
}

fn stats_json(run: &RunConfig, sample: &SampleStats, mesh: &MeshStats) -> serde_json::Value {
    json!({
        "provenance": { "version": env!("CARGO_PKG_VERSION"), "seed": run.seed, "config_hash": run.hash() },
        "config": run,
        "sample": sample,
        "mesh": mesh,
    })
}

fn generate(run: &RunConfig) -> Result<(Resolved, SampleOutput), CliError> {
    let res = run.resolve()?;
    let out = if run.dart_only {
        let t0 = Instant::now();
        let dt = dart_throw(&res.domain, &res.density, &res.sampler)?;
        let dart_seconds = t0.elapsed().as_secs_f64();
        let boundary: Vec<SiteId> = dt.sites[..dt.boundary].iter().map(|s| s.id).collect();
        let t1 = Instant::now();
        let mut out = SampleOutput::from_sites(&dt.sites, &res.domain, boundary)?;
        out.stats = SampleStats {
            boundary_samples: dt.boundary,
            dart_samples: dt.sites.len() - dt.boundary,
            final_count: dt.sites.len(),
            timing: Timing { dart_seconds, triangulate_seconds: t1.elapsed().as_secs_f64(), fill_seconds: 0.0 },
            ..Default::default()
        };
        out
    } else {
        let out = maximal_sample(&res.domain, &res.density, &res.sampler)?;
        let ctx = GapContext::new(&res.domain, res.sampler.epsilon_gap);
        if !is_maximal(&out.triangulation, &ctx) {
            return Err(CliError::Runtime("gap filling finished but the set is not maximal".into()));
        }
        out
    };
    Ok((res, out))
}

pub fn sample(a: &SampleArgs, timing: bool) -> Result<(), CliError> {
    let mut run = source_config(&a.source)?;
    run.dart_only = a.dart_only;
    let (res, out) = generate(&run)?;
    if timing {
        print_timing("sample", &out.stats.timing);
    }
    let mesh = mesh_stats(&extract_mesh(&out.triangulation, &res.domain), res.sampler.r_min);
    write_atomic(&a.out, points_text(&run, None, &out).as_bytes())?;
    let stats_path = a.stats.clone().unwrap_or_else(|| a.out.with_extension("json"));
    write_atomic(&stats_path, &json_bytes(&stats_json(&run, &out.stats, &mesh)))?;
    if let Some(p) = &a.save_config {
        write_atomic(p, &json_bytes(&serde_json::to_value(&run).expect("config serializes")))?;
    }
    println!("{} points ({} boundary, {} dart, {} fill) -> {}", out.stats.final_count, out.stats.boundary_samples, out.stats.dart_samples, out.stats.fill.inserted, a.out.display());
    Ok(())
}

struct Loaded {
    file: PointsFile,
    res: Resolved,
    out: SampleOutput,
}

/// Reads a points file and rebuilds its triangulation. The run config comes
/// from the file header, then from `source`; domain flags override both.
fn load(path: &Path, domain: Option<&Vec<String>>, source: Option<&SourceArgs>) -> Result<Loaded, CliError> {
    let bad = |e: String| CliError::Config(format!("{}: {e}", path.display()));
    let file = PointsFile::parse(&read_text(path)?).map_err(|e| bad(e.to_string()))?;
    if file.points.is_empty() {
        return Err(bad("no points".into()));
    }
    let min_r = file.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut run = match header_config(&file)? {
        Some(r) => r,
        None => match source {
            Some(s) if s.rmin.is_some() || s.config.is_some() => source_config(s)?,
            _ => RunConfig {
                domain: DomainSpec::Periodic,
                density: DensitySpec::Default,
                r_min: min_r,
                r_max: None,
                seed: 0,
                k_reject: None,
                max_fill_iterations: None,
                dart_only: false,
            },
        },
    };
    if let Some(s) = source {
        if let Some(seed) = s.seed {
            run.seed = seed;
        }
    }
    if let Some(d) = domain.or(source.and_then(|s| s.domain.as_ref())) {
        run.domain = parse_domain(d)?;
    }
    let res = run.resolve()?;
    let nb = header_boundary(&file)?;
    let sites = file.sites();
    let boundary = sites.iter().take(nb).map(|s| s.id).collect();
    let out = SampleOutput::from_sites(&sites, &res.domain, boundary).map_err(|e| bad(e.to_string()))?;
    Ok(Loaded { file, res, out })
}

pub fn optimize(a: &OptimizeArgs, timing: bool) -> Result<(), CliError> {
    let (res, mut out) = match &a.input {
        Some(p) => {
            let l = load(p, None, Some(&a.source))?;
            (l.res, l.out)
        }
        None => generate(&source_config(&a.source)?)?,
    };
    let mode = match a.mode {
        ModeArg::Valence => OptimizeMode::Valence,
        ModeArg::Angle => OptimizeMode::Angle,
        ModeArg::Edge => OptimizeMode::EdgeLength,
        ModeArg::Joint => OptimizeMode::Joint,
    };
    let mut cfg = OptimizeConfig { seed: res.config.seed, ..OptimizeConfig::with_angles(a.theta_lo, a.theta_hi) };
    if let Some(l) = a.lambda_e {
        cfg.lambda_e = l;
    }
    if let Some(m) = a.max_iterations {
        cfg.max_iterations = m;
    }
    if let Some(m) = a.max_interleaves {
        cfg.max_interleaves = m;
    }
    let r_min = res.sampler.r_min;
    let before = mesh_stats(&extract_mesh(&out.triangulation, &res.domain), r_min);
    let t0 = Instant::now();
    let report = run_optimize(&mut out, &res.domain, &res.density, &res.sampler, &cfg, mode)?;
    if timing {
        eprintln!("timing optimize: {:.3}s over {} passes", t0.elapsed().as_secs_f64(), report.iterations);
    }
    let mesh = extract_mesh(&out.triangulation, &res.domain);
    let after = mesh_stats(&mesh, r_min);
    print!("{}", stats_table(&[("before", &before), ("after", &after)]));
    let spec = OptimizeSpec { mode, config: cfg };
    if let Some(p) = &a.out {
        write_atomic(p, points_text(&res.config, Some(&spec), &out).as_bytes())?;
    }
    if let Some(p) = &a.mesh {
        let text = if p.extension().is_some_and(|e| e == "off") { mesh.to_off() } else { mesh.to_obj() };
        write_atomic(p, text.as_bytes())?;
    }
    if let Some(p) = &a.stats {
        let v = json!({
            "provenance": { "version": env!("CARGO_PKG_VERSION"), "seed": res.config.seed, "config_hash": config_hash(&(&res.config, &spec)) },
            "config": res.config,
            "optimize": spec,
            "before": before,
            "after": after,
            "report": report,
        });
        write_atomic(p, &json_bytes(&v))?;
    }
    if !report.converged {
        return Err(CliError::NotConverged(format!(
            "after {} passes: valence {}, angle {}, edge {}; θ ∈ [{:.2}, {:.2}], v567 {:.2}%",
            report.iterations,
            ok(report.valence_ok),
            ok(report.angle_ok),
            ok(report.edge_ok),
            after.theta_min,
            after.theta_max,
            after.v567
        )));
    }
    println!("converged after {} passes", report.iterations);
    Ok(())
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "violated"
    }
}

fn emit(out: Option<&PathBuf>, data: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, data),
        None => {
            std::io::stdout().write_all(data).map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(())
        }
    }
}

pub fn stats(a: &StatsArgs) -> Result<(), CliError> {
    let mut runs = Vec::new();
    for p in &a.input.inputs {
        let l = load(p, a.input.domain.as_ref(), None)?;
        let r = a.rmin.unwrap_or(l.res.config.r_min);
        let s = mesh_stats(&extract_mesh(&l.out.triangulation, &l.res.domain), r);
        let key = serde_json::to_string(&(&l.res.config.domain, &l.res.config.density, r, l.res.config.r_max, l.file.header_value("optimize")))
            .expect("key serializes");
        runs.push((key, s));
    }
    if runs.len() == 1 {
        eprint!("{}", stats_table(&[("run", &runs[0].1)]));
        return emit(a.out.as_ref(), &json_bytes(&serde_json::to_value(&runs[0].1).expect("stats serialize")));
    }
    let agg = compare_runs(&runs).map_err(|e| CliError::Config(e.to_string()))?;
    eprint!("{}", agg.table(&format!("{} runs", agg.runs)));
    let v = json!({ "runs": runs.iter().map(|r| &r.1).collect::<Vec<_>>(), "aggregate": agg });
    emit(a.out.as_ref(), &json_bytes(&v))
}

pub fn spectrum(a: &SpectrumArgs, timing: bool) -> Result<(), CliError> {
    let t0 = Instant::now();
    let mut spectra = Vec::new();
    for p in &a.input.inputs {
        let file = PointsFile::parse(&read_text(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        if let Some(run) = header_config(&file)? {
            if run.domain != DomainSpec::Periodic {
                return Err(CliError::Config(format!("{}: spectra need a periodic point set", p.display())));
            }
        }
        let pts: Vec<_> = file.points.iter().map(|(q, _)| gapmps::domain::SamplingDomain::PeriodicUnitSquare.wrap(*q)).collect();
        spectra.push(periodogram(&pts, a.grid).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?);
    }
    let s = average_spectra(&spectra)?;
    if timing {
        eprintln!("timing spectrum: {:.3}s for {} sets", t0.elapsed().as_secs_f64(), spectra.len());
    }
    emit(a.out.as_ref(), s.to_csv().as_bytes())?;
    if let Some(p) = &a.plot {
        write_atomic(p, spectrum_plot(&s).as_bytes())?;
    }
    Ok(())
}

fn spectrum_plot(s: &Spectrum) -> String {
    let (w, h, pad) = (640.0, 320.0, 30.0);
    let fmax = *s.frequencies.last().unwrap_or(&1.0);
    let pmax = s.radial_power.iter().copied().fold(2.0f64, f64::max);
    let x = |f: f64| pad + (w - 2.0 * pad) * f / fmax;
    let y = |p: f64| h - pad - (h - 2.0 * pad) * p / pmax;
    let pts: Vec<String> = s.frequencies.iter().zip(&s.radial_power).map(|(f, p)| format!("{:.1},{:.1}", x(*f), y(*p))).collect();
    let mut o = String::new();
    let _ = writeln!(o, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(o, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(o, r##"<line x1="{}" y1="{:.1}" x2="{}" y2="{:.1}" stroke="#999" stroke-dasharray="4 3"/>"##, x(0.0), y(1.0), x(fmax), y(1.0));
    let _ = writeln!(o, r#"<polyline fill="none" stroke="black" stroke-width="1" points="{}"/>"#, pts.join(" "));
    let _ = writeln!(o, "</svg>");
    o
}

pub fn census(a: &CensusArgs) -> Result<(), CliError> {
    let (res, out) = match &a.input {
        Some(p) => {
            let l = load(p, None, Some(&a.source))?;
            (l.res, l.out)
        }
        None => {
            let mut run = source_config(&a.source)?;
            run.dart_only = true;
            generate(&run)?
        }
    };
    let ctx = GapContext::new(&res.domain, res.sampler.epsilon_gap);
    let c = gap_census(&out.triangulation, &ctx)?;
    let v = json!({ "points": out.triangulation.num_sites(), "gaps": c.gaps, "primitives": c.primitives, "sets": c.sets });
    emit(a.out.as_ref(), &json_bytes(&v))
}

pub fn svg(a: &SvgArgs) -> Result<(), CliError> {
    let l = load(&a.input, a.domain.as_ref(), None)?;
    let opts = SvgOptions { size: a.size, disks: !a.no_disks, centers: !a.no_centers, gaps: !a.no_gaps, mesh: a.mesh, valence: a.valence };
    let ctx = GapContext::new(&l.res.domain, l.res.sampler.epsilon_gap);
    let text = render(&l.out.triangulation, &ctx, &opts)?;
    write_atomic(&a.out, text.as_bytes())
}
