use rhydro::config::RunConfig;
use rhydro::output::{execute, resolve_out_dir};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const USAGE: &str = "\
rhydro — radiative Euler equations on an annulus (Lagrangian mass coordinates)

USAGE:
    rhydro run    [--config FILE] [FLAGS]    integrate the configured mode
    rhydro picard [--config FILE] [FLAGS]    shorthand for run with mode=picard
    rhydro sweep  [--config FILE] [FLAGS] --epsilons 1e-3,5e-4 [--grids 128,256]
    rhydro check                             run the acceptance suite and report

FLAGS (mirror the config keys; values as in the config file):
    --a X  --b X  --cv X  --A X  --n N  --cfl X
    --mode nonlinear|linearized|picard|radiation-off
    --t-final X  --output-every N  --nu X
    --epsilon X  --profile sine-bump|compact-bump|custom  --flatness-order N
    --amp-p X  --amp-u X  --amp-s X
    --density-profile FILE  --custom-p FILE  --custom-u FILE  --custom-s FILE
    --T X  --k-max N  --tol X
    --out DIR      output directory (joined to $RHYDRO_OUTPUT_ROOT if relative)

The written config_echo.cfg reproduces any run: rhydro run --config config_echo.cfg
";

fn flag_to_key(flag: &str) -> Option<&'static str> {
    Some(match flag {
        "--a" => "geometry.a",
        "--b" => "geometry.b",
        "--cv" => "gas.cv",
        "--A" => "gas.A",
        "--n" => "grid.n",
        "--cfl" => "grid.cfl",
        "--mode" => "run.mode",
        "--t-final" => "run.t_final",
        "--output-every" => "run.output_every",
        "--nu" => "run.nu",
        "--epsilon" => "initial.epsilon",
        "--profile" => "initial.profile",
        "--flatness-order" => "initial.flatness_order",
        "--amp-p" => "initial.amp_p",
        "--amp-u" => "initial.amp_u",
        "--amp-s" => "initial.amp_s",
        "--density-profile" => "initial.density_profile",
        "--custom-p" => "initial.custom_p",
        "--custom-u" => "initial.custom_u",
        "--custom-s" => "initial.custom_s",
        "--T" => "picard.T",
        "--k-max" => "picard.k_max",
        "--tol" => "picard.tol",
        "--out" => "output.dir",
        _ => return None,
    })
}

struct CliArgs {
    config_path: Option<PathBuf>,
    overrides: Vec<(String, String)>,
    epsilons: Vec<f64>,
    grids: Vec<usize>,
}

fn parse_args(args: &[String]) -> Result<CliArgs, String> {
    let mut parsed = CliArgs {
        config_path: None,
        overrides: Vec::new(),
        epsilons: Vec::new(),
        grids: Vec::new(),
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut take_value = |name: &str| -> Result<String, String> {
            it.next().cloned().ok_or_else(|| format!("flag {name} needs a value"))
        };
        match arg.as_str() {
            "--config" => parsed.config_path = Some(PathBuf::from(take_value("--config")?)),
            "--epsilons" => {
                let list = take_value("--epsilons")?;
                for part in list.split(',') {
                    parsed
                        .epsilons
                        .push(part.parse().map_err(|_| format!("bad epsilon `{part}`"))?);
                }
            }
            "--grids" => {
                let list = take_value("--grids")?;
                for part in list.split(',') {
                    parsed.grids.push(part.parse().map_err(|_| format!("bad grid `{part}`"))?);
                }
            }
            flag => match flag_to_key(flag) {
                Some(key) => {
                    let value = take_value(flag)?;
                    parsed.overrides.push((key.to_string(), value));
                }
                None => return Err(format!("unknown flag `{flag}`")),
            },
        }
    }
    Ok(parsed)
}

fn do_run(config: &RunConfig) -> Result<(), String> {
    let out_dir = resolve_out_dir(&config.out_dir);
    let artifacts = execute(config, &out_dir).map_err(|e| e.to_string())?;
    println!(
        "{} run finished: {} ({} steps, {:.2}s) -> {}",
        config.mode,
        artifacts.termination,
        artifacts.steps,
        artifacts.wall_seconds,
        artifacts.out_dir.display()
    );
    if artifacts.termination.contains("FAILED") {
        return Err("run terminated on a state-invalid error (partial output written)".into());
    }
    Ok(())
}

fn do_sweep(base: &RunConfig, epsilons: &[f64], grids: &[usize]) -> Result<(), String> {
    let epsilons = if epsilons.is_empty() { vec![base.epsilon] } else { epsilons.to_vec() };
    let grids = if grids.is_empty() { vec![base.n] } else { grids.to_vec() };
    let mut jobs = Vec::new();
    for &eps in &epsilons {
        for &n in &grids {
            let mut cfg = base.clone();
            cfg.epsilon = eps;
            cfg.n = n;
            cfg.out_dir = format!("{}/sweep_eps{eps:e}_n{n}", base.out_dir);
            jobs.push(cfg);
        }
    }
    // Independent runs, one thread each; every job writes to its own
    // directory.
    let errors: Vec<String> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|cfg| scope.spawn(move || do_run(cfg).err()))
            .collect();
        handles.into_iter().filter_map(|h| h.join().expect("sweep thread panicked")).collect()
    });
    if errors.is_empty() {
        println!("sweep finished: {} runs", jobs.len());
        Ok(())
    } else {
        Err(format!("{} of {} sweep runs failed: {}", errors.len(), jobs.len(), errors.join("; ")))
    }
}

fn do_check() -> Result<(), String> {
    let results = rhydro::acceptance::all();
    let mut failed = 0;
    for result in &results {
        println!("{}", result.line());
        if !result.pass {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("all {} criteria passed", results.len());
        Ok(())
    } else {
        Err(format!("{failed} of {} criteria failed", results.len()))
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(verb) = args.first().map(String::as_str) else {
        eprint!("{USAGE}");
        return ExitCode::from(2);
    };
    let rest = &args[1..];
    let outcome = match verb {
        "run" | "picard" | "sweep" => {
            let parsed = match parse_args(rest) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    eprint!("{USAGE}");
                    return ExitCode::from(2);
                }
            };
            let mut overrides = parsed.overrides.clone();
            if verb == "picard"
                && !overrides.iter().any(|(k, _)| k == "run.mode")
            {
                overrides.push(("run.mode".into(), "picard".into()));
            }
            match RunConfig::load(parsed.config_path.as_deref().map(Path::new), &overrides) {
                Ok(config) => {
                    if verb == "sweep" {
                        do_sweep(&config, &parsed.epsilons, &parsed.grids)
                    } else {
                        do_run(&config)
                    }
                }
                Err(e) => Err(e.to_string()),
            }
        }
        "check" => do_check(),
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            Ok(())
        }
        other => Err(format!("unknown verb `{other}`")),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
