use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use frame_extrapolation::frame_io::{export_mask_png, export_png, read_buffer};
use frame_extrapolation::metrics::{evaluate_sequence, DISPLAY_GAMMA};
use frame_extrapolation::pipeline::{extrapolate_sequence, synthesize, PipelineConfig, PoseMode};
use frame_extrapolation::scene::{SceneScript, SequenceSpec};
use frame_extrapolation::window::PixelMode;

/// Frame extrapolation lab: synthesize sequences, extrapolate, evaluate.
#[derive(Parser)]
#[command(name = "frame-extrap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthWindow {
    Display,
    Density,
    Budget,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Density,
    Budget,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pose {
    Predicted,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// Render a preset or scene file into a sequence directory.
    Synth {
        /// Preset name or path to a scene JSON file.
        #[arg(long)]
        scene: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        frames: usize,
        #[arg(long, default_value_t = 30)]
        fps_in: u32,
        #[arg(long, default_value_t = 60)]
        fps_out: u32,
        #[arg(long, default_value_t = 640)]
        width: u32,
        #[arg(long, default_value_t = 360)]
        height: u32,
        #[arg(long)]
        out: PathBuf,
        /// Render windows: the display only, or adaptive windows as the pipeline would request.
        #[arg(long, value_enum, default_value = "density")]
        window_mode: SynthWindow,
        /// Virtual plane distance for adaptive windows (`auto` = 10 x near).
        #[arg(long, default_value = "auto")]
        plane_d: String,
    },
    /// Run the extrapolation pipeline over a synthesized sequence.
    Extrapolate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 0.5)]
        eps_static: f64,
        #[arg(long, default_value = "auto")]
        plane_d: String,
        #[arg(long, value_enum, default_value = "density")]
        window_mode: Mode,
        #[arg(long, value_enum, default_value = "predicted")]
        pose: Pose,
        #[arg(long)]
        no_me: bool,
        #[arg(long)]
        no_bgc: bool,
        #[arg(long)]
        no_aw: bool,
        #[arg(long)]
        no_scn: bool,
        #[arg(long, default_value = "identity")]
        corrector: String,
        /// Also write PNG previews of color and masks.
        #[arg(long)]
        dump_masks: bool,
    },
    /// Compare an extrapolated sequence with its ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Convert a buffer file to PNG.
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        png: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

fn plane_distance(arg: &str) -> Result<Option<f64>, Failure> {
    if arg == "auto" {
        return Ok(None);
    }
    match arg.parse::<f64>() {
        Ok(d) if d.is_finite() && d > 0.0 => Ok(Some(d)),
        _ => Err(usage(format!(
            "--plane-d must be `auto` or a positive number, got `{arg}`"
        ))),
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Synth {
            scene,
            seed,
            frames,
            fps_in,
            fps_out,
            width,
            height,
            out,
            window_mode,
            plane_d,
        } => {
            let spec = SequenceSpec {
                fps_in,
                fps_out,
                frame_count: frames,
                width,
                height,
            };
            let n = spec.n().map_err(usage)?;
            let plane_d = plane_distance(&plane_d)?;
            let scene = SceneScript::resolve(&scene, seed).map_err(usage)?;
            let adaptive = match window_mode {
                SynthWindow::Display => None,
                SynthWindow::Density | SynthWindow::Budget => Some(PipelineConfig {
                    n,
                    plane_d,
                    window_mode: if matches!(window_mode, SynthWindow::Budget) {
                        PixelMode::Budget
                    } else {
                        PixelMode::Density
                    },
                    seed,
                    ..PipelineConfig::default()
                }),
            };
            let manifest = synthesize(&scene, &spec, &out, adaptive.as_ref()).map_err(data)?;
            println!(
                "wrote {} frames to {}",
                manifest.frames.len(),
                out.display()
            );
        }
        Command::Extrapolate {
            input,
            out,
            n,
            k,
            levels,
            eps_static,
            plane_d,
            window_mode,
            pose,
            no_me,
            no_bgc,
            no_aw,
            no_scn,
            corrector,
            dump_masks,
        } => {
            let config = PipelineConfig {
                n,
                k,
                levels,
                eps_static,
                plane_d: plane_distance(&plane_d)?,
                window_mode: match window_mode {
                    Mode::Density => PixelMode::Density,
                    Mode::Budget => PixelMode::Budget,
                },
                pose_mode: match pose {
                    Pose::Predicted => PoseMode::Predicted,
                    Pose::Oracle => PoseMode::Oracle,
                },
                me: !no_me,
                bgc: !no_bgc,
                aw: !no_aw,
                scn: !no_scn,
                corrector,
                ..PipelineConfig::default()
            };
            config.validate().map_err(usage)?;
            let manifest = extrapolate_sequence(&input, &out, &config, dump_masks).map_err(data)?;
            println!(
                "{}: wrote {} extrapolated frames to {}",
                config.label(),
                manifest.frames.len(),
                out.display()
            );
        }
        Command::Eval {
            pred,
            reference,
            report,
        } => {
            let r = evaluate_sequence(&pred, &reference).map_err(data)?;
            r.save(&report).map_err(data)?;
            print!("{}", r.to_text());
        }
        Command::Export { input, png } => {
            let buf = read_buffer(&input).map_err(data)?;
            match buf.channels() {
                3 => export_png(&buf, &png, DISPLAY_GAMMA),
                1 => export_mask_png(&buf, &png),
                c => return Err(data(format!("cannot export a {c}-channel buffer as PNG"))),
            }
            .map_err(data)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
