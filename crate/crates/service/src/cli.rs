//! `ctsplat` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical failure.

use crate::http::{router, AppState};
use crate::request::{parse_background, parse_mask, parse_vec3, render_png, RenderRequest, RequestError};
use crate::views::{ring_views, ViewsError, ViewsFile};
use clap::{Parser, Subcommand, ValueEnum};
use ctsplat_core::agp::{agp_initialize, AgpConfig, GroupMask};
use ctsplat_core::diff::{
    finetune_resume, load_optimizer_state, save_optimizer_state, write_trace_csv, FinetuneConfig, OptimizerState,
    DEFAULT_BASE_LR, DEFAULT_ITERS,
};
use ctsplat_core::image::{write_png, RgbImage};
use ctsplat_core::metrics::{psnr, ssim, MetricReport, ViewMetrics};
use ctsplat_core::phantom::{ct_phantom, PhantomConfig};
use ctsplat_core::raster::{RenderConfig, Renderer};
use ctsplat_core::scene_io::{load_scene, save_scene};
use ctsplat_core::volume::{load_labels, load_volume, preprocess, save_labels, save_volume, LabelKind, TfSet};
use ctsplat_core::{Scene32, Renderer32};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const PORT_ENV: &str = "CTSPLAT_PORT";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<ctsplat_core::Error> for CliError {
    fn from(e: ctsplat_core::Error) -> Self {
        use ctsplat_core::Error as E;
        match e {
            _ if e.is_io() => CliError::Io(e.to_string()),
            E::UnknownLabel(_) => CliError::Io(e.to_string()),
            E::InvalidParameter(_) | E::ShapeMismatch(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<RequestError> for CliError {
    fn from(e: RequestError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ViewsError> for CliError {
    fn from(e: ViewsError) -> Self {
        match e {
            ViewsError::Io(m) => CliError::Io(m),
            ViewsError::Invalid(m) => CliError::Usage(m),
        }
    }
}

fn io_err(what: &str, path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{what} {}: {e}", path.display()))
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "ctsplat", version, about = "6D Gaussian splatting for CT volumes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LabelsKindArg {
    /// Raw segmentation classes 0..=119, consolidated on load.
    Raw,
    /// Already one of the 12 groups.
    Consolidated,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a synthetic torso phantom (`<out>.raw/.meta` and `<out>_labels.raw/.meta`).
    Phantom {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        size: usize,
        /// Voxel spacing in mm.
        #[arg(long, default_value_t = 2.0)]
        spacing: f64,
    },
    /// Instantiate a scene from a CT volume, its labels and a transfer-function set.
    Init {
        #[arg(long)]
        volume: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum, default_value_t = LabelsKindArg::Raw)]
        labels_kind: LabelsKindArg,
        /// Preset name (seen, unseen) or a transfer-function file.
        #[arg(long, default_value = "seen")]
        tf: String,
        /// Resample to this isotropic spacing (mm) first.
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render one view of a scene to PNG.
    Render {
        #[arg(long)]
        scene: PathBuf,
        /// Camera position `x,y,z` (mm).
        #[arg(long, allow_hyphen_values = true)]
        pos: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
        target: String,
        #[arg(long, allow_hyphen_values = true, default_value = "0,1,0")]
        up: String,
        /// Vertical field of view in radians, inside (0.05, 3.0).
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        fov: f64,
        #[arg(long, default_value_t = 512)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
        /// Group bits, decimal or 0x-prefixed.
        #[arg(long, default_value = "0xfff")]
        groups: String,
        /// Background `r,g,b` in [0, 1].
        #[arg(long, default_value = "0,0,0")]
        bg: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a ring of cameras around a scene as a views file, optionally with rendered images.
    Views {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 128)]
        size: usize,
        #[arg(long, default_value_t = 0.5)]
        fov: f64,
        /// Camera distance from the scene centre; fits the bounding box by default.
        #[arg(long)]
        distance: Option<f64>,
        /// Also render each view from the scene as its reference image.
        #[arg(long)]
        render: bool,
    },
    /// Fine-tune a scene against the reference images of a views file.
    Finetune {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        views: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ITERS)]
        iters: usize,
        #[arg(long, default_value_t = DEFAULT_BASE_LR)]
        lr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Loss trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the optimizer state here, for resuming.
        #[arg(long)]
        state_out: Option<PathBuf>,
        /// Resume from an optimizer state written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// PSNR and SSIM of a scene against the reference images of a views file, as CSV.
    Metrics {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        views: PathBuf,
        #[arg(long, default_value = "0xfff")]
        groups: String,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve a scene over HTTP.
    Serve {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, env = PORT_ENV, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn labels_path(base: &Path) -> PathBuf {
    let mut s = base.with_extension("").into_os_string();
    s.push("_labels");
    PathBuf::from(s)
}

fn load_tf(spec: &str) -> CliResult<TfSet> {
    if let Some(tf) = TfSet::preset(spec) {
        return Ok(tf);
    }
    if Path::new(spec).exists() {
        return Ok(TfSet::load(spec)?);
    }
    Err(CliError::Usage(format!(
        "unknown transfer function {spec:?} (presets: {})",
        TfSet::preset_names().join(", ")
    )))
}

fn load(path: &Path) -> CliResult<Scene32> {
    Ok(load_scene::<f32>(path)?)
}

/// The rendering as it would be written to PNG, read back as floats.
fn quantized(renderer: &Renderer32, req: &RenderRequest) -> CliResult<RgbImage<f32>> {
    let img = renderer.render(&req.camera()?, req.mask)?;
    let rgba = img.to_rgba8(Some(req.background.map(|c| c as f32)));
    let data = rgba
        .chunks_exact(4)
        .flat_map(|p| [p[0], p[1], p[2]])
        .map(|b| b as f32 / 255.0)
        .collect();
    Ok(RgbImage::new(req.width, req.height, data)?)
}

fn execute(cmd: Command) -> CliResult {
    match cmd {
        Command::Phantom { out, size, spacing } => {
            if size < 2 || !(spacing > 0.0) {
                return Err(CliError::Usage("phantom needs size >= 2 and positive spacing".into()));
            }
            let (hu, labels) = ct_phantom::<f32>(&PhantomConfig { size, spacing })?;
            save_volume(&out, &hu)?;
            let lp = labels_path(&out);
            save_labels(&lp, &labels)?;
            println!("volume {}  labels {}", out.display(), lp.display());
        }
        Command::Init { volume, labels, labels_kind, tf, spacing, stride, out } => {
            let tfs = load_tf(&tf)?;
            let hu = load_volume::<f32>(&volume)?;
            let kind = match labels_kind {
                LabelsKindArg::Raw => LabelKind::Raw,
                LabelsKindArg::Consolidated => LabelKind::Consolidated,
            };
            let labels = load_labels(&labels, kind)?;
            let pre = preprocess(&hu, &labels, &tfs, spacing)?;
            let scene = agp_initialize(&pre.input, &pre.labels, &AgpConfig { stride, ..Default::default() })?;
            save_scene(&out, &scene)?;
            println!("{} primitives", scene.len());
        }
        Command::Render { scene, pos, target, up, fov, width, height, groups, bg, out } => {
            let req = RenderRequest {
                position: parse_vec3(&pos)?,
                target: parse_vec3(&target)?,
                up: parse_vec3(&up)?,
                fov_y: fov,
                width,
                height,
                mask: parse_mask(&groups)?,
                background: parse_background(&bg)?,
            };
            req.validate()?;
            let scene = load(&scene)?;
            let png = render_png(&Renderer::new(&scene, RenderConfig::default()), &req)?;
            std::fs::write(&out, png).map_err(|e| io_err("writing", &out, e))?;
        }
        Command::Views { scene, out, count, size, fov, distance, render } => {
            if count == 0 {
                return Err(CliError::Usage("--count must be positive".into()));
            }
            let scene = load(&scene)?;
            let views = ring_views(&scene, count, size, fov, distance);
            for spec in &views.views {
                spec.request(views.background)?;
            }
            if render {
                let renderer = Renderer::new(&scene, RenderConfig::default());
                for spec in &views.views {
                    let req = spec.request(views.background)?;
                    let img = renderer.render(&req.camera()?, GroupMask::all())?;
                    let rgba = img.to_rgba8(Some(req.background.map(|c| c as f32)));
                    write_png(ViewsFile::image_path(&out, spec), req.width, req.height, &rgba)?;
                }
            }
            views.save(&out).map_err(|e| io_err("writing", &out, e))?;
        }
        Command::Finetune { scene, views, out, iters, lr, seed, trace, state_out, resume } => {
            if !(lr > 0.0) || iters == 0 {
                return Err(CliError::Usage("--lr must be positive and --iters at least 1".into()));
            }
            let vf = ViewsFile::load(&views)?;
            let refs = vf.load_views(&views)?;
            let scene = load(&scene)?;
            let cfg = FinetuneConfig {
                iters,
                base_lr: lr,
                seed,
                background: vf.background,
                ..Default::default()
            };
            let state = match resume {
                Some(p) => load_optimizer_state::<f32>(&p)?,
                None => OptimizerState::new(scene.len(), lr, iters as u64, cfg.adam),
            };
            let result = finetune_resume(scene, state, &refs, &cfg)?;
            let finite = result.scene.gaussians.iter().all(|g| g.params().iter().all(|p| p.is_finite()));
            if !finite || !result.state.is_finite() {
                return Err(CliError::Numerical("fine-tuning produced non-finite parameters".into()));
            }
            save_scene(&out, &result.scene)?;
            if let Some(p) = trace {
                write_trace_csv(&p, &result.trace)?;
            }
            if let Some(p) = state_out {
                save_optimizer_state(&p, &result.state)?;
            }
            if let (Some(first), Some(last)) = (result.trace.first(), result.trace.last()) {
                eprintln!(
                    "{} iterations, loss {:.5} -> {:.5}, {} skipped",
                    result.trace.len(),
                    first.total,
                    last.total,
                    result.state.skipped
                );
            }
        }
        Command::Metrics { scene, views, groups, out } => {
            let mask = parse_mask(&groups)?;
            let vf = ViewsFile::load(&views)?;
            let refs = vf.load_views(&views)?;
            let scene = load(&scene)?;
            let renderer = Renderer::new(&scene, RenderConfig::default());
            let mut rows = Vec::with_capacity(refs.len());
            for (spec, view) in vf.views.iter().zip(&refs) {
                let mut req = spec.request(vf.background)?;
                req.mask = mask;
                let pred = quantized(&renderer, &req)?;
                rows.push(ViewMetrics {
                    psnr: psnr(&pred, &view.image, 1.0)?,
                    ssim: ssim(&pred, &view.image)?,
                });
            }
            let csv = MetricReport::from_views(rows).to_csv();
            match out {
                Some(p) => std::fs::write(&p, csv).map_err(|e| io_err("writing", &p, e))?,
                None => print!("{csv}"),
            }
        }
        Command::Serve { scene, port, host } => {
            let loaded = load(&scene)?;
            let state = AppState::new(loaded, Some(scene));
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(format!("starting runtime: {e}")))?;
            rt.block_on(async move {
                let addr = format!("{host}:{port}");
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .map_err(|e| CliError::Io(format!("binding {addr}: {e}")))?;
                eprintln!("listening on http://{}", listener.local_addr().map_err(|e| CliError::Io(e.to_string()))?);
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
                    .map_err(|e| CliError::Io(format!("serving: {e}")))
            })?;
        }
    }
    Ok(())
}
