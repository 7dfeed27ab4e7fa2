use crate::{Classify, CmdResult, Global};
use clap::Args;
use lode_core::editor::Budgets;
use lode_service::{AppState, Models, ServiceConfig};
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, env = "LODE_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Hours without activity before a session is dropped from memory.
    #[arg(long, env = "LODE_IDLE_HOURS", default_value_t = 24.0)]
    idle_hours: f64,
    #[arg(long, env = "LODE_SNAPSHOT_SECS", default_value_t = 60)]
    snapshot_secs: u64,
    #[arg(long, env = "LODE_REFRESH_BUDGET", default_value_t = 7)]
    refresh_budget: u32,
    #[arg(long, env = "LODE_WAND_BUDGET", default_value_t = 7)]
    wand_budget: u32,
}

pub fn serve(g: &Global, a: &ServeArgs) -> CmdResult {
    if a.idle_hours.is_nan() || a.idle_hours <= 0.0 {
        return Err(crate::invalid("--idle-hours must be positive"));
    }
    let models = Models::load_dir(&g.models).invalid("loading models")?;
    let config = ServiceConfig {
        data_dir: g.data_dir.clone(),
        idle_timeout: Duration::from_secs_f64(a.idle_hours * 3600.0),
        snapshot_interval: Duration::from_secs(a.snapshot_secs.max(1)),
        budgets: Budgets {
            refreshes: a.refresh_budget,
            wand_tiles: a.wand_budget,
        },
    };
    let state = Arc::new(AppState::open(config, Some(models)).runtime("opening data directory")?);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .runtime("starting runtime")?;
    runtime
        .block_on(lode_service::serve(state, a.bind, async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        }))
        .runtime("serving")
}
