//! shiftlab: decide which hyponormality classes a truncated matrix-valued
//! weighted shift verifiably belongs to, with replayable witnesses.
//!
//! Exit codes: 0 = everything requested passed, 2 = at least one requested
//! check failed (witnesses in the report), 1 = usage or validation error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use shiftlab_core::generators::{
    berger_weights, conjugate, direct_sum, random_shift, random_unitary, search, AtomicMeasure,
    RandomProfile, SearchConfig, SearchTarget,
};
use shiftlab_core::hyponormality::{
    check_2_hyponormal_blocks, check_cubic, check_hyponormal, check_k_hyponormal, check_quadratic,
    KHypForm,
};
use shiftlab_core::json::ShiftJson;
use shiftlab_core::positivity::GridSpec;
use shiftlab_core::propagation::{decompose_cubic, decompose_two_hyponormal, detect_flatness};
use shiftlab_core::shift::WeightSequence;
use shiftlab_core::Tolerances;

mod report;
use report::{replay_witnesses, verdict_line, DecompositionJson, RunReport, SearchSummary};

#[derive(Parser)]
#[command(name = "shiftlab", version, about = "Hyponormality classes of truncated matrix-valued weighted shifts")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormArg {
    BramHalmos,
    Embry,
    Commutator,
}

impl From<FormArg> for KHypForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::BramHalmos => KHypForm::BramHalmos,
            FormArg::Embry => KHypForm::Embry,
            FormArg::Commutator => KHypForm::Commutator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    TwoHyp,
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Berger,
    Random,
    DirectSum,
    Conjugate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    ConjectureBackwardCubic,
    TwoHypA0EqA1Nonflat,
}

#[derive(Subcommand)]
enum Commands {
    /// Run class testers on a weight-sequence JSON file.
    Classify {
        input: PathBuf,
        /// Check k-hyponormality for every k = 1..=K. Without the flag,
        /// k runs to 4 (the subnormality proxy), skipping orders the
        /// truncation cannot verify; an explicit K errors when unverifiable.
        #[arg(long)]
        k: Option<usize>,
        /// Block formulation for the k-hyponormality checks.
        #[arg(long, value_enum, default_value = "bram-halmos")]
        form: FormArg,
        /// Also run the specialized 2-hyponormal block criterion.
        #[arg(long)]
        blocks: bool,
        #[arg(long)]
        quadratic: bool,
        #[arg(long)]
        cubic: bool,
        /// PSD tolerance (relative); defaults to 1e-9.
        #[arg(long)]
        tol: Option<f64>,
        /// Grid points per axis for the quadratic/cubic certifications.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        smax: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        /// Write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Recorded in the report for provenance.
        #[arg(long)]
        seed: Option<u64>,
        /// Replay the failing witnesses of a previous report against this
        /// input instead of re-running the testers.
        #[arg(long)]
        verify_witness: Option<PathBuf>,
    },
    /// Run a structural decomposition.
    Decompose {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a weight-sequence JSON on stdout.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Atoms "t:w,t:w,..." for the berger family.
        #[arg(long)]
        atoms: Option<String>,
        /// Number of weights.
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// increasing | equal-pair:K | equal-from-a0 (random family).
        #[arg(long, default_value = "increasing")]
        profile: String,
        /// Comma-separated input files (direct-sum family).
        #[arg(long)]
        inputs: Option<String>,
        /// Input file (conjugate family).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Randomized search for the open propagation questions.
    Search {
        #[arg(long, value_enum)]
        target: TargetArg,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        /// Initial perturbation scale (geometric decay).
        #[arg(long, default_value_t = 0.2)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        /// Grid points per axis for margin evaluation.
        #[arg(long, default_value_t = 12)]
        grid: usize,
        /// Write the JSON-lines trace (one candidate per line) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the best candidate's weight-sequence JSON here.
        #[arg(long)]
        best: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("SHIFTLAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_input(path: &Path, tol: &Tolerances) -> anyhow::Result<(WeightSequence, String)> {
    let bytes = std::fs::read(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    let digest = format!(
        "sha256:{}",
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>()
    );
    let mut de = serde_json::Deserializer::from_slice(&bytes);
    let shift: ShiftJson = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| anyhow::anyhow!("{}: malformed JSON at `{}`: {}", path.display(), e.path(), e.inner()))?;
    let w = shift
        .to_sequence(tol)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    Ok((w, digest))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Commands::Classify {
            input,
            k,
            form,
            blocks,
            quadratic,
            cubic,
            tol,
            grid,
            smax,
            tmax,
            report,
            seed,
            verify_witness,
        } => {
            let tols = tol.map(Tolerances::with_psd_tol).unwrap_or_default();
            let (w, digest) = load_input(&input, &tols)?;

            if let Some(report_path) = verify_witness {
                return cmd_verify_witness(&report_path, &w, &tols, digest);
            }

            let grid_spec = |w: &WeightSequence| {
                let mut g = GridSpec::for_weights(w, grid.unwrap_or(64));
                if let Some(s) = smax {
                    g.s_max = s;
                }
                if let Some(t) = tmax {
                    g.t_max = t;
                }
                g
            };

            let mut rep = RunReport::new(digest, tols);
            rep.seed = seed;
            let mut wall = BTreeMap::new();

            let t0 = Instant::now();
            rep.verdicts.push(check_hyponormal(&w, &tols));
            wall.insert("hyponormal".to_string(), ms_since(t0));

            {
                let t0 = Instant::now();
                let explicit = k.is_some();
                let kmax = k.unwrap_or(4);
                for kk in 1..=kmax {
                    match check_k_hyponormal(&w, kk, form.into(), &tols) {
                        Ok(v) => rep.verdicts.push(v),
                        Err(e) if !explicit => {
                            rep.wall_time_ms
                                .insert(format!("k_hyponormal_{kk}_skipped"), 0.0);
                            let _ = e;
                            break;
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                wall.insert("k_hyponormal".to_string(), ms_since(t0));
            }
            if blocks {
                let t0 = Instant::now();
                rep.verdicts.push(check_2_hyponormal_blocks(&w, &tols)?);
                wall.insert("two_hyp_blocks".to_string(), ms_since(t0));
            }
            if quadratic {
                let t0 = Instant::now();
                rep.verdicts
                    .push(check_quadratic(&w, Some(grid_spec(&w)), &tols)?);
                wall.insert("quadratic".to_string(), ms_since(t0));
            }
            if cubic {
                let t0 = Instant::now();
                rep.verdicts.push(check_cubic(&w, Some(grid_spec(&w)), &tols)?);
                wall.insert("cubic".to_string(), ms_since(t0));
            }

            let t0 = Instant::now();
            let flatness = detect_flatness(&w, tols.eq_tol);
            wall.insert("flatness".to_string(), ms_since(t0));
            for (key, val) in rep.wall_time_ms.iter() {
                wall.insert(key.clone(), *val);
            }
            rep.wall_time_ms = wall;

            for v in &rep.verdicts {
                println!("{}", verdict_line(v));
            }
            println!(
                "flatness: pairs {:?}, flat from 1: {}, flat from 0: {}",
                flatness.flat_pairs, flatness.is_flat_from_1, flatness.is_flat_from_0
            );
            rep.flatness = Some(flatness);
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&rep)?)?;
            }
            Ok(if rep.all_passed() { 0 } else { 2 })
        }

        Commands::Decompose { input, mode, report } => {
            let tols = Tolerances::default();
            let (w, digest) = load_input(&input, &tols)?;
            let result = match mode {
                ModeArg::TwoHyp => decompose_two_hyponormal(&w, &tols),
                ModeArg::Cubic => decompose_cubic(&w, &tols),
            };
            match result {
                Ok(dec) => {
                    println!("decomposition residual: {:.12e}", dec.residual);
                    for note in &dec.notes {
                        println!("note: {note}");
                    }
                    for c in &dec.components {
                        println!("component {:?} (dim {}):", c.label, c.basis.len());
                        for v in &c.basis {
                            let coords: Vec<String> = v
                                .iter()
                                .map(|z| format!("({:.11e}, {:.11e})", z.re, z.im))
                                .collect();
                            println!("  basis: [{}]", coords.join(", "));
                        }
                        for idx in 0..c.restricted.len() {
                            let m = c.restricted.weight(idx).matrix();
                            let entries: Vec<String> = m
                                .iter()
                                .map(|z| format!("({:.11e}, {:.11e})", z.re, z.im))
                                .collect();
                            println!("  A_{idx}: [{}]", entries.join(", "));
                        }
                    }
                    if let Some(path) = report {
                        let mut rep = RunReport::new(digest, tols);
                        rep.decomposition = Some(DecompositionJson::from_result(&dec));
                        std::fs::write(&path, serde_json::to_string_pretty(&rep)?)?;
                    }
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("decomposition failed: {e}");
                    Ok(2)
                }
            }
        }

        Commands::Generate {
            family,
            atoms,
            n,
            dim,
            seed,
            profile,
            inputs,
            input,
        } => {
            let w = match family {
                FamilyArg::Berger => {
                    let spec = atoms
                        .ok_or_else(|| anyhow::anyhow!("--atoms \"t:w,t:w,...\" is required for --family berger"))?;
                    let mut parsed = Vec::new();
                    for part in spec.split(',') {
                        let (t, mass) = part
                            .split_once(':')
                            .ok_or_else(|| anyhow::anyhow!("atom `{part}` is not of the form t:w"))?;
                        parsed.push((t.trim().parse::<f64>()?, mass.trim().parse::<f64>()?));
                    }
                    let mu = AtomicMeasure::new(parsed, true)?;
                    berger_weights(&mu, n)?
                }
                FamilyArg::Random => {
                    let profile = parse_profile(&profile)?;
                    random_shift(seed, dim, n, profile)
                }
                FamilyArg::DirectSum => {
                    let list = inputs
                        .ok_or_else(|| anyhow::anyhow!("--inputs a.json,b.json is required for --family direct-sum"))?;
                    let tols = Tolerances::default();
                    let mut shifts = Vec::new();
                    for path in list.split(',') {
                        let (w, _) = load_input(Path::new(path.trim()), &tols)?;
                        shifts.push(w);
                    }
                    direct_sum(&shifts)?
                }
                FamilyArg::Conjugate => {
                    let path = input
                        .ok_or_else(|| anyhow::anyhow!("--input w.json is required for --family conjugate"))?;
                    let tols = Tolerances::default();
                    let (w, _) = load_input(&path, &tols)?;
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    let u = random_unitary(&mut rng, w.dim());
                    conjugate(&w, &u)?
                }
            };
            println!("{}", serde_json::to_string_pretty(&ShiftJson::from_sequence(&w))?);
            Ok(0)
        }

        Commands::Search {
            target,
            dim,
            n,
            iterations,
            step,
            seed,
            restarts,
            grid,
            trace,
            best,
            report,
        } => {
            let tols = Tolerances::default();
            let core_target = match target {
                TargetArg::ConjectureBackwardCubic => SearchTarget::ConjectureBackwardCubic,
                TargetArg::TwoHypA0EqA1Nonflat => SearchTarget::TwoHypA0EqA1Nonflat,
            };
            let config = SearchConfig {
                target: core_target,
                dim,
                n,
                iterations,
                step_scale: step,
                seed,
                restarts,
                grid_points: grid,
            };
            let outcome = search(&config, &tols);

            if let Some(path) = trace {
                let mut lines = String::new();
                for entry in &outcome.trace {
                    lines.push_str(&serde_json::to_string(entry)?);
                    lines.push('\n');
                }
                std::fs::write(&path, lines)?;
            }
            if let Some(path) = best {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&ShiftJson::from_sequence(&outcome.best))?,
                )?;
            }

            let summary = SearchSummary {
                target: format!("{core_target:?}"),
                iterations,
                restarts,
                seed,
                best_margin: outcome.best_margin,
                constraint_residual: outcome.constraint_residual,
                violation: outcome.violation,
                quadratic_margin: outcome.quadratic_margin,
                cubic_margin: outcome.cubic_margin,
                counterexample_found: outcome.counterexample_found,
                best_candidate: ShiftJson::from_sequence(&outcome.best),
            };
            if outcome.counterexample_found {
                println!(
                    "CANDIDATE FOUND: margin {:.6e} with constraint residual {:.3e}, violation {:.3e}; reproduce with --seed {seed} --iterations {iterations} --restarts {restarts} --dim {dim} --n {n} --grid {grid}",
                    outcome.best_margin, outcome.constraint_residual, outcome.violation
                );
            } else {
                println!(
                    "no numerical counterexample found (margin <= 0): best margin {:.6e}, constraint residual {:.3e}, violation {:.3e}",
                    outcome.best_margin, outcome.constraint_residual, outcome.violation
                );
            }
            println!(
                "cross-scores of best candidate: quadratic margin {:.6e}, cubic margin {:.6e}",
                outcome.quadratic_margin, outcome.cubic_margin
            );

            if let Some(path) = report {
                let mut rep = RunReport::new("sha256:generated".into(), tols);
                rep.search = Some(summary);
                std::fs::write(&path, serde_json::to_string_pretty(&rep)?)?;
            }
            Ok(0)
        }
    }
}

fn cmd_verify_witness(
    report_path: &Path,
    w: &WeightSequence,
    tols: &Tolerances,
    digest: String,
) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(report_path)?;
    let rep: RunReport = serde_json::from_str(&text)
        .map_err(|e| anyhow::anyhow!("{}: malformed report: {e}", report_path.display()))?;
    if rep.input_digest != digest {
        eprintln!(
            "warning: report was produced from a different input ({} vs {})",
            rep.input_digest, digest
        );
    }
    let replays = replay_witnesses(&rep, w, tols);
    if replays.is_empty() {
        println!("no failing witnesses to replay");
        return Ok(0);
    }
    let mut all_ok = true;
    for r in &replays {
        println!(
            "{}: window {:?} point {:?} recorded {:.12e} recomputed {:.12e} -> {}",
            r.class,
            r.window,
            r.point,
            r.recorded_min_eigenvalue,
            r.recomputed_min_eigenvalue,
            if r.reproduced { "REPRODUCED" } else { "MISMATCH" }
        );
        all_ok &= r.reproduced;
    }
    Ok(if all_ok { 0 } else { 2 })
}

fn parse_profile(s: &str) -> anyhow::Result<RandomProfile> {
    let norm = s.to_lowercase().replace('_', "-");
    if norm == "increasing" {
        return Ok(RandomProfile::Increasing);
    }
    if norm == "equal-from-a0" {
        return Ok(RandomProfile::EqualFromStart);
    }
    if let Some(rest) = norm.strip_prefix("equal-pair:") {
        return Ok(RandomProfile::EqualPair(rest.parse()?));
    }
    anyhow::bail!("unknown profile `{s}` (use increasing, equal-pair:K, or equal-from-a0)")
}

fn ms_since(t0: Instant) -> f64 {
    t0.elapsed().as_secs_f64() * 1e3
}
