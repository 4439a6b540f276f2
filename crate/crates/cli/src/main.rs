use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qgame_core::constructions::{
    canonical, cyclic_multiplicative_family, epsilon_additive_family, fourier_counterexample, load_balancing,
};
use qgame_core::corrcomp::{
    conjecture_row, ed_row, hjmr_row, separation_row, write_csv, CorrelationMatrix, SearchOptions, SeparationRow,
};
use qgame_core::deviation::{is_qce, is_qce_pure, max_channel_incentive_pure, max_povm_incentive, Mode};
use qgame_core::game_core::{check_correlated, Game, JointDistribution};
use qgame_core::io::{
    density_to_json, distribution_from_json, distribution_to_json, game_from_json, game_to_json, pure_to_json,
    state_from_json, to_json, StateInput,
};
use qgame_core::quantum_state::{mixture_state, superposition_state};
use qgame_core::reproduce::{format_table, run_all};

#[derive(Parser)]
#[command(name = "qgame", version, about = "Quantum strategic games and correlation complexity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Classical,
    Quantum,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mapping {
    Mixture,
    Superposition,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IncentiveMode {
    Add,
    Mul,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Check a distribution (classical) or a quantum state (quantum) for equilibrium.
    Verify {
        game: PathBuf,
        /// Distribution file, or a state file in quantum mode.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = VerifyMode::Classical)]
        mode: VerifyMode,
        /// How a distribution becomes a state in quantum mode.
        #[arg(long, value_enum, default_value_t = Mapping::Mixture)]
        mapping: Mapping,
        /// Defaults to 1e-9 classically and 1e-6 for quantum channels.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum quantum incentive of one player on the superposition state of a distribution.
    Incentive {
        game: PathBuf,
        dist: PathBuf,
        #[arg(long, value_enum, default_value_t = IncentiveMode::Add)]
        mode: IncentiveMode,
        #[arg(long, default_value_t = 0)]
        player: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a named construction to a directory.
    Construct {
        /// epsilon, cyclic, fourier, load-balancing, traffic-light, battle-of-sexes
        family: String,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        c: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Output directory; without it only the predictions are printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlation-complexity bounds for instances such as `ed:8`, `hjmr:4`, `conjecture:4:2`,
    /// or `file:<dist.json>`.
    Corr {
        #[arg(required = true)]
        instances: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SearchOptions::default().restarts)]
        restarts: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every acceptance check and print a pass/fail table.
    Reproduce {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status: `Ok(true)` is 0, `Ok(false)` is 1.
type Verdict = Result<bool>;

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        stdout.write_all(b"\n")?;
    }
    if let Some(path) = out {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn check_tol(tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        bail!(qgame_core::Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    Ok(tol)
}

fn is_distribution(text: &str) -> Result<bool> {
    let v: Value = serde_json::from_str(text)?;
    Ok(v.get("probabilities").is_some())
}

fn verify(game: &Path, input: &Path, mode: VerifyMode, mapping: Mapping, tol: Option<f64>, out: Option<&Path>) -> Verdict {
    let g = game_from_json(&read(game)?)?;
    let text = read(input)?;
    match mode {
        VerifyMode::Classical => {
            let p = distribution_from_json(&text)?;
            let tol = check_tol(tol.unwrap_or(1e-9))?;
            let report = check_correlated(&g, &p, tol)?;
            emit(&to_json(&json!({"mode": "classical", "report": report}))?, out)?;
            Ok(report.verdict)
        }
        VerifyMode::Quantum => {
            let tol = check_tol(tol.unwrap_or(1e-6))?;
            let report = if is_distribution(&text)? {
                let p = distribution_from_json(&text)?;
                match mapping {
                    Mapping::Mixture => is_qce(&g, &mixture_state(&p)?, tol)?,
                    Mapping::Superposition => is_qce_pure(&g, &superposition_state(&p), tol)?,
                }
            } else {
                match state_from_json(&text)? {
                    StateInput::Pure(psi) => is_qce_pure(&g, &psi, tol)?,
                    StateInput::Density(rho) => is_qce(&g, &rho, tol)?,
                }
            };
            let incentives: Vec<f64> = report.players.iter().map(|r| r.primal_value).collect();
            emit(
                &to_json(&json!({
                    "mode": "quantum",
                    "verdict": report.verdict,
                    "tolerance": report.tolerance,
                    "incentives": incentives,
                    "players": report.players,
                }))?,
                out,
            )?;
            Ok(report.verdict)
        }
    }
}

fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|c| m.iter().map(|row| row[c]).collect()).collect()
}

fn incentive(game: &Path, dist: &Path, mode: IncentiveMode, player: usize, out: Option<&Path>) -> Verdict {
    let g = game_from_json(&read(game)?)?;
    let p = distribution_from_json(&read(dist)?)?;
    let mode = match mode {
        IncentiveMode::Add => Mode::Additive,
        IncentiveMode::Mul => Mode::Multiplicative,
    };
    let result = if g.players() == 2 {
        if player > 1 {
            bail!(qgame_core::Error::IndexOutOfRange(format!("player {player}")));
        }
        let (a, pm) = (g.payoff_matrix(player)?, p.to_matrix()?);
        // the deviating player's strategies index the rows
        let (a, pm) = if player == 0 { (a, pm) } else { (transpose(&a), transpose(&pm)) };
        max_povm_incentive(&a, &pm, mode)?
    } else if mode == Mode::Additive {
        max_channel_incentive_pure(&g, &superposition_state(&p), player)?
    } else {
        bail!(qgame_core::Error::InvalidArgument(
            "multiplicative incentive is available for two-player games".into()
        ));
    };
    let value = match mode {
        Mode::Additive => result.additive(),
        Mode::Multiplicative => result.ratio().unwrap_or(f64::NAN),
    };
    emit(&to_json(&json!({"value": value, "result": result}))?, out)?;
    Ok(true)
}

fn need(name: &str, v: Option<usize>) -> Result<usize> {
    v.ok_or_else(|| anyhow::Error::new(qgame_core::Error::InvalidArgument(format!("--{name} is required"))))
}

fn write_files(dir: Option<&Path>, files: &[(&str, String)]) -> Result<()> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, text) in files {
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn game_files(g: &Game, p: Option<&JointDistribution>) -> Result<Vec<(&'static str, String)>> {
    let mut files = vec![("game.json", game_to_json(g)?)];
    if let Some(p) = p {
        files.push(("dist.json", distribution_to_json(p)?));
    }
    Ok(files)
}

fn construct(
    family: &str,
    d: Option<usize>,
    epsilon: Option<f64>,
    c: Option<usize>,
    n: Option<usize>,
    out: Option<&Path>,
) -> Verdict {
    let (mut files, predictions) = match family {
        "epsilon" => {
            let f = epsilon_additive_family(need("d", d)?, epsilon)?;
            let sim = f.simulate()?;
            let mut files = vec![
                ("base_game.json", game_to_json(&f.base_game()?)?),
                ("base_dist.json", distribution_to_json(&f.base_distribution()?)?),
                ("base_deviation.json", to_json(&f.base_unitary)?),
            ];
            let dense = f.spec.d <= 6;
            if dense {
                files.extend(game_files(&f.game()?, Some(&f.distribution()?))?);
                files.push(("deviation.json", to_json(&f.unitary()?)?));
            }
            let pred = json!({
                "family": "epsilon",
                "spec": f.spec,
                "predicted_gain": f.spec.predicted_gain(),
                "simulated": {"old": sim.old, "new": sim.new, "gain": sim.gain()},
                "dense_files": dense,
            });
            (files, pred)
        }
        "cyclic" => {
            let f = cyclic_multiplicative_family(need("c", c)?, need("d", d)?)?;
            let sim = f.simulate()?;
            let mut files = game_files(&f.game()?, Some(&f.distribution()?))?;
            files.push(("deviation.json", to_json(&f.povm()?)?));
            let pred = json!({
                "family": "cyclic",
                "spec": f.spec,
                "exponent": f.spec.exponent(),
                "simulated": {"old": sim.old, "new": sim.new, "ratio": sim.ratio()},
            });
            (files, pred)
        }
        "fourier" => {
            let n = need("n", n)?;
            let f = fourier_counterexample(n, None)?;
            let nash = JointDistribution::product(&f.nash_factors)?;
            let mut files = game_files(&f.game, Some(&nash))?;
            files.push(("state.json", pure_to_json(&f.state)?));
            files.push(("deviation.json", to_json(&f.deviation)?));
            let pred = json!({
                "family": "fourier",
                "n": n,
                "predicted_incentive": 1.0 - 1.0 / n as f64,
            });
            (files, pred)
        }
        "load-balancing" => {
            let n = need("n", n)?;
            let g = load_balancing(n)?;
            (game_files(&g, None)?, json!({"family": "load-balancing", "n": n}))
        }
        "traffic-light" | "battle-of-sexes" => {
            let cg = canonical(&family.replace('-', "_"))?;
            let mut files = game_files(&cg.game, cg.ce.as_ref())?;
            if let Some(ce) = &cg.ce {
                files.push(("mixture_state.json", density_to_json(&mixture_state(ce)?)?));
            }
            (files, json!({"family": family}))
        }
        other => bail!(qgame_core::Error::UnknownConstruction(other.into())),
    };
    let text = to_json(&predictions)?;
    files.push(("predictions.json", text.clone()));
    write_files(out, &files)?;
    emit(&text, None)?;
    Ok(true)
}

fn parse_instance(spec: &str, opts: SearchOptions) -> Result<SeparationRow> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |k: usize| -> Result<usize> {
        parts
            .get(k)
            .ok_or_else(|| qgame_core::Error::InvalidArgument(format!("`{spec}` is missing a parameter")))?
            .parse::<usize>()
            .map_err(|e| qgame_core::Error::InvalidArgument(format!("`{spec}`: {e}")).into())
    };
    Ok(match parts[0] {
        "ed" => ed_row(num(1)?, opts)?,
        "hjmr" => hjmr_row(num(1)?, opts)?,
        "conjecture" => conjecture_row(num(1)?, num(2)?, opts.seed, opts)?,
        "file" => {
            let path = spec.strip_prefix("file:").unwrap_or_default();
            let p = distribution_from_json(&read(Path::new(path))?)?;
            let name = Path::new(path)
                .file_stem()
                .map_or_else(|| path.to_string(), |s| s.to_string_lossy().into_owned());
            separation_row(&name, &CorrelationMatrix::from_distribution(&p)?, None, opts, &[])?
        }
        other => bail!(qgame_core::Error::UnknownConstruction(other.into())),
    })
}

fn corr(instances: &[String], seed: u64, restarts: usize, format: Format, out: Option<&Path>) -> Verdict {
    let opts = SearchOptions { restarts, seed };
    let rows = instances
        .iter()
        .map(|s| parse_instance(s, opts))
        .collect::<Result<Vec<_>>>()?;
    let text = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            String::from_utf8(buf)?
        }
        Format::Json | Format::Text => to_json(&rows)?,
    };
    emit(&text, out)?;
    Ok(true)
}

fn reproduce(seed: u64, format: Format, out: Option<&Path>) -> Verdict {
    let outcomes = run_all(seed);
    let pass = outcomes.iter().all(|o| o.pass);
    let text = match format {
        Format::Text => format_table(&outcomes),
        Format::Json => to_json(
            &outcomes
                .iter()
                .map(|o| json!({"id": o.id, "title": o.title, "pass": o.pass, "detail": o.detail}))
                .collect::<Vec<_>>(),
        )?,
        Format::Csv => {
            let mut s = String::from("id,pass,title,detail\n");
            for o in &outcomes {
                s.push_str(&format!("{},{},\"{}\",\"{}\"\n", o.id, o.pass, o.title, o.detail.replace('"', "\"\"")));
            }
            s
        }
    };
    emit(&text, out)?;
    Ok(pass)
}

fn run(cli: Cli) -> Verdict {
    match cli.command {
        Command::Verify {
            game,
            input,
            mode,
            mapping,
            tol,
            out,
        } => verify(&game, &input, mode, mapping, tol, out.as_deref()),
        Command::Incentive {
            game,
            dist,
            mode,
            player,
            out,
        } => incentive(&game, &dist, mode, player, out.as_deref()),
        Command::Construct {
            family,
            d,
            epsilon,
            c,
            n,
            out,
        } => construct(&family, d, epsilon, c, n, out.as_deref()),
        Command::Corr {
            instances,
            seed,
            restarts,
            format,
            out,
        } => corr(&instances, seed, restarts, format, out.as_deref()),
        Command::Reproduce { seed, format, out } => reproduce(seed, format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<qgame_core::Error>() {
                Some(qgame_core::Error::NonConvergence(_)) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
