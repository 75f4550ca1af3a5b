use std::net::{Ipv4Addr, SocketAddr};
use std::process::ExitCode;

use alphappp_cli::service::{self, AppState};
use alphappp_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(port) = cli.serve {
        let state = AppState::new(&cli.data_dir, cli.max_upload);
        let addr = SocketAddr::from((Ipv4Addr::UNSPECIFIED, port));
        let rt = match tokio::runtime::Runtime::new() {
            Ok(rt) => rt,
            Err(e) => {
                eprintln!("alphappp: cannot start runtime: {e}");
                return ExitCode::from(1);
            }
        };
        eprintln!("alphappp: serving on http://{addr}");
        return match rt.block_on(service::serve(addr, state)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("alphappp: {e}");
                ExitCode::from(1)
            }
        };
    }
    match run(&cli) {
        Ok(s) => {
            println!(
                "{}: {} places, {} transitions{}",
                s.pnml.display(),
                s.places,
                s.transitions,
                if s.removed > 0 { format!(", {} removed", s.removed) } else { String::new() }
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("alphappp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
