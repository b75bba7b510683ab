use atlas_core::error::{AtlasError, Result};
use atlas_core::family::{parse_complex, Family, Parameter};
use atlas_core::orbit::Tier;
use atlas_core::records::{arc_trace_record, classify_query, phase_record, scan_record, visibility_record, ArcRequest};
use atlas_core::render::{figure_with, render_dynamical, render_parameter, FigureOptions, Rendered, TileCache, Viewport, WorldConfig};
use atlas_core::service::{serve, AppState};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "atlas", version, about = "Parameter-space atlas for the quartic Newton and antipodal cubic families")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct ArcArgs {
    #[arg(long, default_value = "newton")]
    family: Family,
    /// Center of the tricorn component, RE,IM.
    #[arg(long, allow_hyphen_values = true)]
    center: String,
    /// Ray direction out of the center, RE,IM.
    #[arg(long, allow_hyphen_values = true)]
    direction: String,
    #[arg(long)]
    period: usize,
}

impl ArcArgs {
    fn request(&self) -> Result<ArcRequest> {
        Ok(ArcRequest {
            family: self.family,
            center: parse_complex(&self.center)?,
            direction: parse_complex(&self.direction)?,
            period: self.period,
        })
    }
}

#[derive(Args, Clone)]
struct RenderArgs {
    #[arg(long, default_value = "newton")]
    family: Family,
    #[arg(long, allow_hyphen_values = true)]
    center: String,
    /// Plane units per pixel.
    #[arg(long)]
    scale: f64,
    /// WxH in pixels.
    #[arg(long, default_value = "512x512")]
    size: String,
    #[arg(long, default_value = "standard")]
    tier: Tier,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    meta: Option<PathBuf>,
}

impl RenderArgs {
    fn viewport(&self) -> Result<Viewport> {
        let bad = || AtlasError::InvalidArgument(format!("expected WxH but got '{}'", self.size));
        let (w, h) = self.size.split_once(['x', 'X']).ok_or_else(bad)?;
        Viewport::new(parse_complex(&self.center)?, self.scale, w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?)
    }

    fn write(&self, r: &Rendered) -> Result<()> {
        std::fs::write(&self.out, r.png()?)?;
        if let Some(m) = &self.meta {
            std::fs::write(m, r.meta_json())?;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the free critical orbit of one parameter.
    Classify {
        #[arg(long, default_value = "newton")]
        family: Family,
        #[arg(long, allow_hyphen_values = true)]
        param: String,
        #[arg(long, default_value = "standard")]
        tier: Tier,
    },
    /// Trace a parabolic arc to the requested Ecalle heights.
    TraceArc {
        #[command(flatten)]
        arc: ArcArgs,
        /// Comma separated heights; inf and -inf run to the cusps.
        #[arg(long, allow_hyphen_values = true, default_value = "-0.5,0,0.5")]
        targets: String,
    },
    /// Lifted phase and transit height at distances off the arc.
    Phase {
        #[command(flatten)]
        arc: ArcArgs,
        #[arg(long, default_value = "1e-3,1e-4,1e-5")]
        distances: String,
    },
    /// Boundary triple of a tricorn center and the visibility of its co-roots.
    Visibility {
        #[arg(long, default_value = "newton")]
        family: Family,
        #[arg(long, allow_hyphen_values = true)]
        param: String,
    },
    /// Classify parameters beside a traced arc.
    ScanArc {
        #[command(flatten)]
        arc: ArcArgs,
        /// Comma separated heights; defaults to the non-bifurcating window -u_h/2, 0, u_h/2.
        #[arg(long, allow_hyphen_values = true)]
        heights: Option<String>,
        #[arg(long, default_value_t = 1e-2)]
        window: f64,
        #[arg(long, default_value_t = 64)]
        offsets: usize,
    },
    /// Render a parameter plane.
    RenderParam {
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Render the dynamical plane of one parameter.
    RenderDyn {
        #[arg(long, allow_hyphen_values = true)]
        param: String,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Reproduce a standard figure.
    Figure {
        id: String,
        #[arg(long, default_value = "figures")]
        outdir: PathBuf,
        #[arg(long, default_value_t = 512)]
        size: usize,
        #[arg(long)]
        tier: Option<Tier>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Tile cache directory; falls back to $ATLAS_CACHE_DIR.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        max_zoom: u32,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| AtlasError::InvalidArgument(format!("bad number '{t}'"))))
        .collect()
}

fn emit<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v).map_err(|e| AtlasError::Io(e.to_string()))?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Classify { family, param, tier } => emit(&classify_query(&Parameter::new(family, parse_complex(&param)?), tier)?),
        Cmd::TraceArc { arc, targets } => emit(&arc_trace_record(&arc.request()?, &parse_list(&targets)?)?),
        Cmd::Phase { arc, distances } => emit(&phase_record(&arc.request()?, &parse_list(&distances)?)?),
        Cmd::Visibility { family, param } => emit(&visibility_record(&Parameter::new(family, parse_complex(&param)?))?),
        Cmd::ScanArc { arc, heights, window, offsets } => {
            let heights = heights.map(|h| parse_list(&h)).transpose()?;
            emit(&scan_record(&arc.request()?, heights.as_deref(), window, offsets)?)
        }
        Cmd::RenderParam { render } => {
            let r = render_parameter(render.family, &render.viewport()?, render.tier, false)?;
            render.write(&r)
        }
        Cmd::RenderDyn { param, render } => {
            let p = Parameter::new(render.family, parse_complex(&param)?);
            let r = render_dynamical(&p, &render.viewport()?, render.tier)?;
            render.write(&r)
        }
        Cmd::Figure { id, outdir, size, tier } => {
            let files = figure_with(&id, &outdir, &FigureOptions { size, tier })?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Cmd::Serve { port, host, cache_dir, max_zoom } => {
            let cache = match cache_dir {
                Some(d) => Some(TileCache::open(d)?),
                None => TileCache::from_env()?,
            };
            let world = WorldConfig { max_zoom, ..WorldConfig::default() };
            let addr: std::net::SocketAddr =
                format!("{host}:{port}").parse().map_err(|_| AtlasError::InvalidArgument(format!("bad address {host}:{port}")))?;
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}");
            rt.block_on(serve(addr, AppState::new(world, cache)))?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
