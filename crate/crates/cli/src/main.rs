mod config;

use std::fs;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use seedsong::bundled;
use seedsong::chordgen::{detect_distinctive, DEFAULT_THRESHOLD};
use seedsong::corpusstats::{build_general_stats, build_seed_stats, load_corpus_dir, load_corpus_file, BlendParam, CorpusItem, StatTables};
use seedsong::evalharness::{report_csv, score_song};
use seedsong::melodygen::{MelodyConfig, MelodyStyle, DEFAULT_CANDIDATES, DEFAULT_RHYTHM_THRESHOLD};
use seedsong::pipeline::{run_generate, GenerationConfig, NamedSeed, PipelineSeeds};
use seedsong::songmodel::{export_midi, render_text_score, AnnotationSidecar, Song};
use seedsong::structuregen::StructureMode;

use config::ConfigFile;

#[derive(Parser)]
#[command(name = "seedsong", version, about = "Generate songs in the style of one seed song")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the statistics of a seed song.
    Analyze {
        path: String,
        /// Print the full tables as JSON instead of a summary.
        #[arg(long)]
        json: bool,
    },
    /// Corpus statistics.
    #[command(subcommand)]
    Stats(StatsCommand),
    /// Generate a song.
    Generate(GenerateArgs),
    /// Score songs under a seed's melody style and write a CSV report.
    Evaluate(EvaluateArgs),
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Build general statistics from a directory of .txt, .chords and .mid files.
    Build {
        corpus_dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// Seed song for every module: a file or `bundled:<name>`.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    melody_seed: Option<String>,
    #[arg(long)]
    chord_seed: Option<String>,
    #[arg(long)]
    bass_seed: Option<String>,
    #[arg(long)]
    structure_seed: Option<String>,
    /// `copy`, `random` or a letter string such as `ABAB`.
    #[arg(long)]
    structure: Option<String>,
    #[arg(long)]
    alpha_chords: Option<f64>,
    #[arg(long)]
    alpha_melody: Option<f64>,
    #[arg(long)]
    distinctive_threshold: Option<f64>,
    #[arg(long)]
    rhythm_threshold: Option<f64>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// General statistics (JSON); defaults to the bundled corpus.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Output path without extension; `.mid`, `.txt` and `.json` are written.
    #[arg(long)]
    out: Option<PathBuf>,
    /// TOML file with the same keys as these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    seed: String,
    /// Songs to score.
    #[arg(long, num_args = 1.., required = true)]
    candidates: Vec<String>,
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    alpha_melody: f64,
    /// CSV destination; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 3 for invariant violations, 2 for every other input problem.
fn exit_code(e: &anyhow::Error) -> u8 {
    let invariant = e
        .chain()
        .filter_map(|c| c.downcast_ref::<seedsong::Error>())
        .any(|s| s.is_invariant_violation());
    if invariant {
        3
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { path, json } => analyze(&path, json),
        Command::Stats(StatsCommand::Build { corpus_dir, output }) => {
            let items = load_corpus_dir(&corpus_dir).with_context(|| format!("loading {}", corpus_dir.display()))?;
            let stats = build_general_stats(&items)?;
            write_atomic(&output, stats.to_json().as_bytes())?;
            println!("{} items -> {}", stats.items, output.display());
            Ok(())
        }
        Command::Generate(args) => generate(args),
        Command::Evaluate(args) => evaluate(args),
    }
}

fn load_song(spec: &str) -> Result<NamedSeed> {
    if let Some(name) = spec.strip_prefix("bundled:") {
        let song = bundled::seed_song(name).ok_or_else(|| anyhow!("no bundled seed named `{name}`"))?;
        return Ok(NamedSeed::new(name, song));
    }
    let path = Path::new(spec);
    let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec).to_string();
    match load_corpus_file(path).with_context(|| format!("loading {spec}"))? {
        Some(CorpusItem::Song(song)) => Ok(NamedSeed::new(label, song)),
        Some(CorpusItem::Chords(_)) => bail!("{spec} holds chords only; a full song is needed"),
        None => bail!("{spec}: unknown file type (expected .txt, .mid or .midi)"),
    }
}

fn load_general(path: Option<&Path>) -> Result<StatTables> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(StatTables::from_json(&text)?)
        }
        None => Ok(bundled::general_stats()?),
    }
}

/// Writes through a temporary sibling file and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| anyhow!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes to standard output; a reader that closed the pipe early is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn analyze(path: &str, json: bool) -> Result<()> {
    let seed = load_song(path)?;
    let stats = build_seed_stats(&seed.song);
    if json {
        return emit(&(stats.to_json() + "\n"));
    }
    let song = &seed.song;
    let mut out = String::new();
    writeln!(out, "song {}", seed.label)?;
    writeln!(out, "tempo {} mode {} bars {}", song.tempo(), song.mode(), song.total_bars())?;
    let layout: Vec<String> = song
        .sections()
        .iter()
        .map(|s| format!("{}{}{}", s.name, s.length, if s.is_variation { "'" } else { "" }))
        .collect();
    writeln!(out, "sections {}", layout.join(" "))?;
    let line = |name: &str, counts: &[f64], label: &dyn Fn(usize) -> String| -> String {
        let cells: Vec<String> = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(i, c)| format!("{}:{}", label(i), c))
            .collect();
        format!("{name} {}\n", cells.join(" "))
    };
    out += &line("pitch", &stats.pitch_freq.counts, &|i| (i + 1).to_string());
    out += &line("interval", &stats.interval_freq.counts, &|i| (i as i32 - 14).to_string());
    out += &line("duration", &stats.dur_freq.counts, &|i| (i + 1).to_string());
    out += &line("rest", &stats.rest_dur.counts, &|i| (i + 1).to_string());
    let trans: Vec<String> = stats
        .chord_trans
        .rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.counts.iter().enumerate().filter(|(_, &c)| c > 0.0).map(move |(j, c)| {
                use seedsong::songmodel::ChordSymbol;
                format!("{}>{}:{}", ChordSymbol::from_index(i), ChordSymbol::from_index(j), c)
            })
        })
        .collect();
    writeln!(out, "chords {}", trans.join(" "))?;
    let cad: Vec<String> = stats.cadences.keys_of_len(2).map(|(k, c)| format!("{k}:{c}")).collect();
    writeln!(out, "cadences {}", cad.join(" "))?;
    let bass: Vec<String> = stats.bass_patterns.counts.iter().map(|(k, c)| format!("{k}:{c}")).collect();
    writeln!(out, "bass {}", bass.join(" "))?;
    let general = bundled::general_stats()?;
    let distinctive: Vec<String> = detect_distinctive(&stats, &general, DEFAULT_THRESHOLD)
        .iter()
        .map(|s| seedsong::songmodel::chord_key(s))
        .collect();
    writeln!(out, "distinctive {}", distinctive.join(" "))?;
    emit(&out)
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let base = pick(args.seed, file.seed);
    let part = |flag: Option<String>, from_file: Option<String>| -> Result<NamedSeed> {
        let spec = pick(flag, from_file)
            .or_else(|| base.clone())
            .ok_or_else(|| anyhow!("a seed song is required (--seed or a per-module seed)"))?;
        load_song(&spec)
    };
    let seeds = PipelineSeeds {
        structure: part(args.structure_seed, file.structure_seed)?,
        chords: part(args.chord_seed, file.chord_seed)?,
        melody: part(args.melody_seed, file.melody_seed)?,
        bass: part(args.bass_seed, file.bass_seed)?,
    };
    let structure: StructureMode = pick(args.structure, file.structure).as_deref().unwrap_or("copy").parse()?;
    let alpha = |v: Option<f64>| -> Result<BlendParam> { Ok(v.map(BlendParam::new).transpose()?.unwrap_or_default()) };
    let cfg = GenerationConfig {
        structure,
        alpha_chords: alpha(pick(args.alpha_chords, file.alpha_chords))?,
        alpha_melody: alpha(pick(args.alpha_melody, file.alpha_melody))?,
        distinctive_threshold: pick(args.distinctive_threshold, file.distinctive_threshold).unwrap_or(DEFAULT_THRESHOLD),
        melody: MelodyConfig {
            rhythm_threshold: pick(args.rhythm_threshold, file.rhythm_threshold).unwrap_or(DEFAULT_RHYTHM_THRESHOLD),
            candidates: pick(args.candidates, file.candidates).unwrap_or(DEFAULT_CANDIDATES),
        },
        rng_seed: pick(args.rng_seed, file.rng_seed).unwrap_or(0),
    };
    let general = load_general(pick(args.stats, file.stats).as_deref())?;
    let out = pick(args.out, file.out).unwrap_or_else(|| PathBuf::from("song"));

    let g = run_generate(&seeds, &general, &cfg)?;
    write_outputs(&out, &g.song)?;
    let p = &g.provenance;
    println!(
        "structure:{} chords:{} melody:{} bass:{}",
        p.structure.label, p.chords.label, p.melody.label, p.bass.label
    );
    println!(
        "{} bars, {} BPM -> {}.mid {}.txt",
        g.song.total_bars(),
        g.song.tempo(),
        out.display(),
        out.display()
    );
    Ok(())
}

fn write_outputs(out: &Path, song: &Song) -> Result<()> {
    let with_ext = |ext: &str| {
        let mut s = out.as_os_str().to_owned();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    };
    write_atomic(&with_ext("mid"), &export_midi(song))?;
    write_atomic(&with_ext("txt"), render_text_score(song).as_bytes())?;
    write_atomic(&with_ext("json"), AnnotationSidecar::for_song(song).to_json().as_bytes())?;
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let seed = load_song(&args.seed)?;
    let general = load_general(args.stats.as_deref())?;
    let style = MelodyStyle::new(
        &build_seed_stats(&seed.song),
        &general,
        BlendParam::new(args.alpha_melody)?,
        seed.song.tempo(),
    );
    let mut reports = Vec::with_capacity(args.candidates.len());
    for c in &args.candidates {
        let song = load_song(c)?;
        let mut r = score_song(&song.song, &seed.song, &style).with_context(|| format!("scoring {c}"))?;
        r.song_id = song.label;
        r.style_id = seed.label.clone();
        reports.push(r);
    }
    let csv = report_csv(&reports);
    match &args.output {
        Some(p) => write_atomic(p, csv.as_bytes())?,
        None => emit(&csv)?,
    }
    Ok(())
}
