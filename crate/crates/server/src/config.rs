use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::num::NonZeroU16;
use std::path::PathBuf;

use consortium_core::AuthConfig;

pub const PORT_ENV: &str = "CONSORTIUM_PORT";
pub const DEFAULT_PORT: u16 = 8080;

/// Everything `serve` needs to start.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub host: IpAddr,
    pub port: NonZeroU16,
    pub db_path: PathBuf,
    pub auth: AuthConfig,
}

impl ServiceConfig {
    pub fn new(db_path: PathBuf, port: NonZeroU16, auth: AuthConfig) -> Self {
        ServiceConfig {
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port,
            db_path,
            auth,
        }
    }

    pub fn dev_mode(&self) -> bool {
        self.auth.dev_mode
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.host, self.port.get())
    }
}
