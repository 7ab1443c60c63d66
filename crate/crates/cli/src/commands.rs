use std::fs;
use std::path::Path;

use rctm::dynamics::{
    bifurcation_sample, lyapunov_curve, midpoint_grid, phase_coverage, MapKind, SweepMap,
};
use rctm::ent::ent_battery;
use rctm::nist::{nist_battery, NistParams};
use rctm::prbg::threshold;
use rctm::security::{
    correlation_sweep, entropy_sweep, histogram_uniformity, key_sensitivity_run, keyspace_report,
    SensitivityCase, SweepConfig, Vary,
};
use rctm::{iterate, make_key, pack_bytes, quantize_bytes, unpack_bytes, BitStream, MapKey};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    Command, DynamicsCommand, EntArgs, ExportArgs, Format, GenerateArgs, GridArgs, InputFormat,
    KeyArgs, KeyspaceArgs, Kind, NistArgs, ReportArgs, SourceArgs, SweepCommand, VaryArg,
};
use crate::error::CliError;
use crate::output::{self, Envelope, KeyEcho, Parsed};

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// A battery ran but missed its acceptance thresholds.
    Fail,
}

/// Trailing states that must all be equal to trigger the collapse warning.
const DEGENERACY_WINDOW: usize = 100;

pub fn run(command: Command) -> Result<Verdict, CliError> {
    match command {
        Command::Generate(args) => generate(args),
        Command::AnalyzeDynamics(cmd) => analyze_dynamics(cmd),
        Command::TestNist(args) => test_nist(args),
        Command::TestEnt(args) => test_ent(args),
        Command::Sweep(cmd) => sweep(cmd),
        Command::Keyspace(args) => keyspace(args),
        Command::Export(args) => export(args),
    }
}

fn key_from(args: &KeyArgs) -> Result<MapKey, CliError> {
    Ok(make_key(args.mu, args.x0)?)
}

/// Warns on stderr when the last states are all identical, which means the
/// finite-precision orbit has collapsed onto a fixed point.
fn check_degeneracy(states: &[f64]) -> bool {
    let Some(tail) = states
        .len()
        .checked_sub(DEGENERACY_WINDOW)
        .map(|i| &states[i..])
    else {
        return false;
    };
    let collapsed = tail.iter().all(|&x| x.to_bits() == tail[0].to_bits());
    if collapsed {
        eprintln!(
            "warning: the last {DEGENERACY_WINDOW} states are identical (x = {}); the orbit has collapsed",
            tail[0]
        );
    }
    collapsed
}

fn require_format(command: &str, format: Format, allowed: &[Format]) -> Result<(), CliError> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "{command} does not support --format {}",
            format.name()
        )))
    }
}

/// Key-derived bits plus what is needed to describe them.
struct Generated {
    key: MapKey,
    states: Vec<f64>,
    stream: BitStream,
    degenerate: bool,
}

fn generate_from(key: MapKey, n: usize, burn_in: usize) -> Result<Generated, CliError> {
    let states = iterate(&key, n, burn_in)?.into_values();
    let degenerate = check_degeneracy(&states);
    let stream = threshold(&states, Some(key.fingerprint()));
    Ok(Generated {
        key,
        states,
        stream,
        degenerate,
    })
}

fn read_input(
    path: &Path,
    format: InputFormat,
    bit_len: Option<usize>,
) -> Result<BitStream, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let stream = match format {
        InputFormat::Raw => {
            let available = bytes.len() * 8;
            let n = bit_len.unwrap_or(available);
            if n > available {
                return Err(CliError::usage(format!(
                    "--input-bits {n} exceeds the {available} bits in {}",
                    path.display()
                )));
            }
            unpack_bytes(&bytes, n)
        }
        InputFormat::AsciiBits => {
            let text = String::from_utf8(bytes).map_err(|_| {
                CliError::usage(format!("{} is not valid ascii-bits text", path.display()))
            })?;
            let stream = BitStream::from_ascii(&text).ok_or_else(|| {
                CliError::usage(format!(
                    "{} contains characters other than 0, 1 and whitespace",
                    path.display()
                ))
            })?;
            match bit_len {
                Some(n) if n > stream.len() => {
                    return Err(CliError::usage(format!(
                        "--input-bits {n} exceeds the {} bits in {}",
                        stream.len(),
                        path.display()
                    )))
                }
                Some(n) => BitStream::from_bits(stream.bits()[..n].iter().copied()),
                None => stream,
            }
        }
    };
    if stream.is_empty() {
        return Err(CliError::usage(format!("{} holds no bits", path.display())));
    }
    Ok(stream)
}

/// Where a battery's bits came from.
enum Source {
    Key(Generated),
    File(BitStream),
}

impl Source {
    fn stream(&self) -> &BitStream {
        match self {
            Source::Key(g) => &g.stream,
            Source::File(s) => s,
        }
    }

    fn echo(&self, args: &SourceArgs) -> serde_json::Value {
        match self {
            Source::Key(g) => json!({
                "key": KeyEcho::new(&g.key),
                "burn_in": args.burn_in,
                "degenerate": g.degenerate,
            }),
            Source::File(s) => json!({
                "input": args.input.as_ref().map(|p| p.display().to_string()),
                "input_format": match args.input_format {
                    InputFormat::Raw => "raw",
                    InputFormat::AsciiBits => "ascii-bits",
                },
                "input_bits": s.len(),
            }),
        }
    }
}

fn load_source(args: &SourceArgs, bits: usize) -> Result<Source, CliError> {
    if let Some(path) = &args.input {
        return read_input(path, args.input_format, args.input_bits).map(Source::File);
    }
    let (Some(mu), Some(x0)) = (args.mu, args.x0) else {
        return Err(CliError::usage(
            "either --input or both --mu and --x0 are required",
        ));
    };
    generate_from(make_key(mu, x0)?, bits, args.burn_in).map(Source::Key)
}

fn generate(args: GenerateArgs) -> Result<Verdict, CliError> {
    let g = generate_from(key_from(&args.key)?, args.bits, args.key.burn_in)?;
    let packed = pack_bytes(&g.stream);
    let meta = json!({
        "command": "generate",
        "key": KeyEcho::new(&g.key),
        "burn_in": args.key.burn_in,
        "bits": g.stream.len(),
        "ones": g.stream.ones(),
        "format": args.format.name(),
        "bit_order": "msb-first",
        "pad_bits": packed.pad_bits,
        "degenerate": g.degenerate,
    });
    let body = match args.format {
        Format::Raw => packed.bytes,
        Format::AsciiBits => output::bits(&g.stream, Format::AsciiBits),
        Format::Csv => output::csv(
            &["index", "state", "bit"],
            g.states
                .iter()
                .zip(g.stream.bits())
                .enumerate()
                .map(|(i, (x, b))| [i.to_string(), x.to_string(), b.to_string()]),
        ),
        Format::Json => output::json(&json!({
            "metadata": meta,
            "data": g.stream.to_ascii(),
        })),
    };
    output::emit(args.out.output.as_deref(), &body)?;
    if let Some(path) = &args.meta {
        output::emit(Some(path), &output::json(&meta))?;
    }
    Ok(Verdict::Pass)
}

fn map_kind(kind: Kind) -> MapKind {
    match kind {
        Kind::Classic => MapKind::Classic,
        Kind::Robust => MapKind::Robust,
    }
}

fn grid_values(grid: &GridArgs) -> Result<Vec<f64>, CliError> {
    let (lo, hi) = match grid.map {
        Kind::Classic => (0.0, 2.0),
        Kind::Robust => (2.0, 100.0),
    };
    let lo = grid.mu_min.unwrap_or(lo);
    let hi = grid.mu_max.unwrap_or(hi);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::usage(format!(
            "grid bounds must be finite with mu-min < mu-max, got [{lo}, {hi}]"
        )));
    }
    if grid.points == 0 {
        return Err(CliError::usage("--points must be at least 1"));
    }
    Ok(midpoint_grid(lo, hi, grid.points))
}

fn grid_echo(grid: &GridArgs, values: &[f64]) -> serde_json::Value {
    json!({
        "map": map_kind(grid.map),
        "mu_min": values.first(),
        "mu_max": values.last(),
        "points": values.len(),
        "x0": Parsed::new(grid.x0),
    })
}

fn dataset_format(command: &str, format: Format) -> Result<(), CliError> {
    require_format(command, format, &[Format::Csv, Format::Json])
}

fn analyze_dynamics(cmd: DynamicsCommand) -> Result<Verdict, CliError> {
    match cmd {
        DynamicsCommand::Bifurcation { grid, settle, keep } => {
            dataset_format("analyze-dynamics bifurcation", grid.format)?;
            let values = grid_values(&grid)?;
            let b = bifurcation_sample(map_kind(grid.map), &values, grid.x0, settle, keep)?;
            if !b.skipped.is_empty() {
                eprintln!("warning: skipped {} invalid grid values", b.skipped.len());
            }
            let body = match grid.format {
                Format::Csv => output::csv(
                    &["mu", "x"],
                    b.points.iter().map(|p| [p.mu.to_string(), p.x.to_string()]),
                ),
                _ => output::json(&Envelope {
                    command: "analyze-dynamics bifurcation",
                    parameters: grid_echo(&grid, &values),
                    result: &b,
                }),
            };
            output::emit(grid.out.output.as_deref(), &body)?;
        }
        DynamicsCommand::Lyapunov { grid, n, burn_in } => {
            dataset_format("analyze-dynamics lyapunov", grid.format)?;
            let values = grid_values(&grid)?;
            let curve = lyapunov_curve(map_kind(grid.map), &values, grid.x0, n, burn_in)?;
            let body = match grid.format {
                Format::Csv => output::csv(
                    &["mu", "lambda", "n_samples"],
                    curve.iter().map(|e| {
                        [
                            e.mu.to_string(),
                            e.lambda.to_string(),
                            e.n_samples.to_string(),
                        ]
                    }),
                ),
                _ => output::json(&Envelope {
                    command: "analyze-dynamics lyapunov",
                    parameters: json!({ "grid": grid_echo(&grid, &values), "n": n, "burn_in": burn_in }),
                    result: &curve,
                }),
            };
            output::emit(grid.out.output.as_deref(), &body)?;
        }
        DynamicsCommand::Coverage { grid, n, bins } => {
            dataset_format("analyze-dynamics coverage", grid.format)?;
            let values = grid_values(&grid)?;
            let kind = map_kind(grid.map);
            // Seed problems are reported; invalid grid values are skipped.
            SweepMap::new(
                kind,
                if kind == MapKind::Classic { 1.0 } else { 2.5 },
                grid.x0,
            )?;
            let rows = values
                .iter()
                .filter_map(|&mu| SweepMap::new(kind, mu, grid.x0).ok())
                .map(|m| {
                    Ok(CoveragePoint {
                        mu: rctm::ChaoticMap::mu(&m),
                        coverage: phase_coverage(&m, n, bins)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            if rows.is_empty() {
                return Err(rctm::Error::EmptyGrid.into());
            }
            let body = match grid.format {
                Format::Csv => output::csv(
                    &["mu", "coverage"],
                    rows.iter()
                        .map(|r| [r.mu.to_string(), r.coverage.to_string()]),
                ),
                _ => output::json(&Envelope {
                    command: "analyze-dynamics coverage",
                    parameters: json!({ "grid": grid_echo(&grid, &values), "n": n, "bins": bins }),
                    result: &rows,
                }),
            };
            output::emit(grid.out.output.as_deref(), &body)?;
        }
    }
    Ok(Verdict::Pass)
}

#[derive(Serialize)]
struct CoveragePoint {
    mu: f64,
    coverage: f64,
}

fn test_nist(args: NistArgs) -> Result<Verdict, CliError> {
    dataset_format("test-nist", args.format)?;
    if args.streams == 0 || args.stream_bits == 0 {
        return Err(CliError::usage(
            "--streams and --stream-bits must be at least 1",
        ));
    }
    let total = args
        .streams
        .checked_mul(args.stream_bits)
        .ok_or_else(|| CliError::usage("--streams x --stream-bits overflows"))?;
    let source = load_source(&args.source, total)?;
    let segments = source.stream().segments(args.stream_bits);
    let streams: Vec<BitStream> = segments.into_iter().take(args.streams).collect();
    if streams.len() < args.streams {
        return Err(CliError::usage(format!(
            "input holds {} bits, fewer than {} streams of {} bits",
            source.stream().len(),
            args.streams,
            args.stream_bits
        )));
    }
    let params = NistParams {
        block_frequency_m: args.block_m,
        approximate_entropy_m: args.apen_m,
        serial_m: args.serial_m,
    };
    let report = nist_battery(&streams, &params)?;
    let body = match args.format {
        Format::Csv => output::csv(
            &[
                "test",
                "passed",
                "total",
                "proportion",
                "min_proportion",
                "uniformity_p",
                "ok",
            ],
            report.summary.iter().map(|s| {
                [
                    s.test.to_string(),
                    s.passed.to_string(),
                    s.total.to_string(),
                    s.proportion.to_string(),
                    s.min_proportion.to_string(),
                    s.uniformity_p.map(|p| p.to_string()).unwrap_or_default(),
                    s.ok.to_string(),
                ]
            }),
        ),
        _ => output::json(&Envelope {
            command: "test-nist",
            parameters: json!({
                "source": source.echo(&args.source),
                "streams": args.streams,
                "stream_bits": args.stream_bits,
            }),
            result: &report,
        }),
    };
    output::emit(args.out.output.as_deref(), &body)?;
    Ok(if report.all_ok() {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}

fn test_ent(args: EntArgs) -> Result<Verdict, CliError> {
    dataset_format("test-ent", args.format)?;
    let bits = args
        .bytes
        .checked_mul(8)
        .ok_or_else(|| CliError::usage("--bytes is too large"))?;
    let source = load_source(&args.source, bits)?;
    let bytes = pack_bytes(source.stream()).bytes;
    let report = ent_battery(&bytes)?;
    let body = match args.format {
        Format::Csv => output::csv(
            &[
                "bytes",
                "entropy_bits_per_byte",
                "optimum_compression_pct",
                "chi_square",
                "chi_square_exceed_pct",
                "arithmetic_mean",
                "monte_carlo_pi",
                "monte_carlo_error_pct",
                "serial_correlation",
            ],
            [[
                report.bytes.to_string(),
                report.entropy_bits_per_byte.to_string(),
                report.optimum_compression_pct.to_string(),
                report.chi_square.to_string(),
                report.chi_square_exceed_pct.to_string(),
                report.arithmetic_mean.to_string(),
                report.monte_carlo_pi.to_string(),
                report.monte_carlo_error_pct.to_string(),
                report
                    .serial_correlation
                    .map(|r| r.to_string())
                    .unwrap_or_default(),
            ]],
        ),
        _ => output::json(&Envelope {
            command: "test-ent",
            parameters: json!({ "source": source.echo(&args.source), "bytes": bytes.len() }),
            result: &report,
        }),
    };
    output::emit(args.out.output.as_deref(), &body)?;
    Ok(if report.chi_square_plausible() {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}

fn vary(arg: VaryArg) -> Vary {
    match arg {
        VaryArg::Mu => Vary::Mu,
        VaryArg::X0 => Vary::X0,
    }
}

fn write_report<P: Serialize, R: Serialize>(
    report: &ReportArgs,
    command: &str,
    parameters: P,
    result: &R,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<(), CliError> {
    dataset_format(command, report.format)?;
    let body = match report.format {
        Format::Csv => output::csv(header, rows),
        _ => output::json(&Envelope {
            command,
            parameters,
            result,
        }),
    };
    output::emit(report.out.output.as_deref(), &body)
}

fn sweep(cmd: SweepCommand) -> Result<Verdict, CliError> {
    match cmd {
        SweepCommand::Correlation {
            key,
            vary: v,
            delta,
            pairs,
            len,
            report,
        } => {
            dataset_format("sweep correlation", report.format)?;
            let config = SweepConfig {
                base: key_from(&key)?,
                vary: vary(v),
                delta,
                pairs,
                len,
                burn_in: key.burn_in,
            };
            let r = correlation_sweep(&config)?;
            if !r.degenerate_pairs.is_empty() {
                eprintln!(
                    "warning: {} perturbed keys rounded onto the base key and were excluded",
                    r.degenerate_pairs.len()
                );
            }
            let rows = r
                .pairs
                .iter()
                .map(|p| {
                    vec![
                        p.index.to_string(),
                        p.perturbed_value.to_string(),
                        p.correlation.to_string(),
                        p.uaci_pct.to_string(),
                        p.npcr_pct.to_string(),
                    ]
                })
                .collect();
            write_report(
                &report,
                "sweep correlation",
                json!({ "key": KeyEcho::new(&config.base), "delta": Parsed::new(delta) }),
                &r,
                &[
                    "index",
                    "perturbed_value",
                    "correlation",
                    "uaci_pct",
                    "npcr_pct",
                ],
                rows,
            )?;
        }
        SweepCommand::Sensitivity {
            key,
            vary: v,
            delta,
            sequences,
            len,
            report,
        } => {
            dataset_format("sweep sensitivity", report.format)?;
            let base = key_from(&key)?;
            let case = match v {
                VaryArg::Mu => SensitivityCase::VaryMu,
                VaryArg::X0 => SensitivityCase::VaryX0,
            };
            let r = key_sensitivity_run(case, &base, delta, sequences, len)?;
            let rows = r
                .correlations
                .iter()
                .map(|p| {
                    vec![
                        p.a.to_string(),
                        p.b.to_string(),
                        p.correlation.to_string(),
                        p.identical_keys.to_string(),
                    ]
                })
                .collect();
            write_report(
                &report,
                "sweep sensitivity",
                json!({ "key": KeyEcho::new(&base), "delta": Parsed::new(delta) }),
                &r,
                &["a", "b", "correlation", "identical_keys"],
                rows,
            )?;
        }
        SweepCommand::Entropy {
            key,
            sequences,
            len,
            seed_step,
            report,
        } => {
            dataset_format("sweep entropy", report.format)?;
            let base = key_from(&key)?;
            let r = entropy_sweep(&base, sequences, len, seed_step)?;
            let rows = r
                .entropies
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    vec![
                        k.to_string(),
                        (base.x0() + k as f64 * seed_step).to_string(),
                        e.to_string(),
                    ]
                })
                .collect();
            write_report(
                &report,
                "sweep entropy",
                json!({ "key": KeyEcho::new(&base) }),
                &r,
                &["index", "x0", "entropy"],
                rows,
            )?;
        }
        SweepCommand::Histogram {
            key,
            len,
            bins,
            report,
        } => {
            dataset_format("sweep histogram", report.format)?;
            let base = key_from(&key)?;
            let states = iterate(&base, len, key.burn_in)?.into_values();
            check_degeneracy(&states);
            let r = histogram_uniformity(&quantize_bytes(&states), bins)?;
            let rows = r
                .counts
                .iter()
                .enumerate()
                .map(|(i, c)| vec![i.to_string(), c.to_string()])
                .collect();
            write_report(
                &report,
                "sweep histogram",
                json!({ "key": KeyEcho::new(&base), "burn_in": key.burn_in, "len": len }),
                &r,
                &["bin", "count"],
                rows,
            )?;
        }
    }
    Ok(Verdict::Pass)
}

fn keyspace(args: KeyspaceArgs) -> Result<Verdict, CliError> {
    let r = keyspace_report(args.precision)?;
    let c = r.component_counts;
    let rows = [("x0", c.x0), ("mu", c.mu), ("n1", c.n1), ("n2", c.n2)]
        .iter()
        .map(|(name, count)| {
            vec![
                name.to_string(),
                count.to_string(),
                count.log2().to_string(),
            ]
        })
        .collect();
    write_report(
        &args.report,
        "keyspace",
        json!({ "precision_exponent": args.precision }),
        &r,
        &["component", "count", "bits"],
        rows,
    )?;
    Ok(Verdict::Pass)
}

fn export(args: ExportArgs) -> Result<Verdict, CliError> {
    let source = load_source(&args.source, args.n)?;
    let body = match (&source, args.format) {
        (Source::Key(g), Format::Csv) => output::csv(
            &["index", "state", "byte", "bit"],
            g.states
                .iter()
                .zip(g.stream.bits())
                .enumerate()
                .map(|(i, (x, b))| {
                    [
                        i.to_string(),
                        x.to_string(),
                        rctm::prbg::quantize(*x).to_string(),
                        b.to_string(),
                    ]
                }),
        ),
        (Source::Key(g), Format::Json) => output::json(&Envelope {
            command: "export",
            parameters: source.echo(&args.source),
            result: json!({ "states": g.states, "bits": g.stream.to_ascii() }),
        }),
        (s, format) => output::bits(s.stream(), format),
    };
    output::emit(args.out.output.as_deref(), &body)?;
    Ok(Verdict::Pass)
}
