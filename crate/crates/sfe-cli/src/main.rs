//! Command-line runner for the secure function evaluation toolkit.
//!
//! One process runs both endpoints by default (in-memory pipe or loopback
//! TCP). With `--listen` or `--connect` the process becomes a single
//! endpoint — Bob listens, Alice connects — over a real socket, restricted
//! to the channel-only OT backends.

use std::collections::BTreeMap;
use std::net::{TcpListener, TcpStream};
use std::process::ExitCode;

use clap::Parser;

use sfe_core::harness::smoke::{privacy_smoke, SmokeProtocol};
use sfe_core::harness::{parse_backend, parse_transport, run_cli, RunConfig, PROTOCOLS};
use sfe_core::Role;

#[derive(Parser, Debug)]
#[command(
    name = "sfe",
    about = "Two-party secure function evaluation: protocol trees, branching programs, \
             look-up-table circuits and a garbled-protocol variant over 1-of-w oblivious transfer",
    after_help = "Registered protocols: millionaires, median, hamming, equality, dfa, poswise, \
                  gind-demo, lut-sort, oram-bench, garbled-demo.\n\
                  Protocol parameters are passed as repeated `--param key=value`."
)]
struct Cli {
    /// Protocol to run.
    #[arg(long, env = "SFE_PROTOCOL")]
    protocol: Option<String>,

    /// Run seed; with the ideal backend the report is a deterministic
    /// function of it.
    #[arg(long, env = "SFE_SEED", default_value_t = 0)]
    seed: u64,

    /// Transport between the two endpoints: mem or tcp (loopback).
    #[arg(long, env = "SFE_TRANSPORT", default_value = "mem")]
    transport: String,

    /// OT backend: ideal, group, ot12, or ot12-group.
    #[arg(long = "ot", env = "SFE_OT", default_value = "ideal")]
    ot_backend: String,

    /// Security parameter in bits.
    #[arg(long, env = "SFE_K", default_value_t = 128)]
    k: usize,

    /// Protocol parameter, repeatable: --param n=16 --param x=0101
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,

    /// Act as Bob: accept one peer connection on this address.
    #[arg(long, value_name = "HOST:PORT", conflicts_with = "connect")]
    listen: Option<String>,

    /// Act as Alice: connect to a listening peer.
    #[arg(long, value_name = "HOST:PORT")]
    connect: Option<String>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    json: Option<String>,

    /// Include wall time in the report (breaks byte-for-byte determinism).
    #[arg(long, default_value_t = false)]
    timing: bool,

    /// Run a privacy smoke test instead of a protocol:
    /// gind, gind-leaky, lut, or garbled.
    #[arg(long, value_name = "PROTOCOL", conflicts_with = "protocol")]
    smoke: Option<String>,

    /// Trials per input variant for --smoke.
    #[arg(long, default_value_t = 2000)]
    trials: usize,
}

fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("--param needs KEY=VALUE, got `{pair}`"))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn emit(json: String, path: &Option<String>) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, json + "\n").map_err(|e| format!("writing report: {e}")),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn real_main() -> Result<(), String> {
    let cli = Cli::parse();

    if let Some(smoke_name) = &cli.smoke {
        let protocol = SmokeProtocol::parse(smoke_name)
            .ok_or_else(|| format!("unknown smoke protocol `{smoke_name}`"))?;
        let report = privacy_smoke(protocol, cli.trials, cli.seed).map_err(|e| e.to_string())?;
        let json = serde_json::to_string_pretty(&report).expect("smoke report serializes");
        emit(json, &cli.json)?;
        return match report.verdict {
            sfe_core::harness::smoke::SmokeVerdict::Fail => Err("privacy smoke test failed".into()),
            _ => Ok(()),
        };
    }

    let protocol = cli
        .protocol
        .clone()
        .ok_or_else(|| format!("--protocol is required; one of: {}", PROTOCOLS.join(", ")))?;
    let cfg = RunConfig {
        protocol,
        seed: cli.seed,
        transport: parse_transport(&cli.transport)
            .ok_or_else(|| format!("unknown transport `{}`", cli.transport))?,
        backend: parse_backend(&cli.ot_backend)
            .ok_or_else(|| format!("unknown OT backend `{}`", cli.ot_backend))?,
        k: cli.k,
        params: parse_params(&cli.params)?,
        timing: cli.timing,
    };

    let report = if let Some(addr) = &cli.listen {
        let listener = TcpListener::bind(addr).map_err(|e| format!("listen on {addr}: {e}"))?;
        let (stream, peer) = listener.accept().map_err(|e| format!("accept: {e}"))?;
        eprintln!("peer connected from {peer}");
        sfe_core::harness::remote::run_remote(&cfg, Role::B, stream).map_err(|e| e.to_string())?
    } else if let Some(addr) = &cli.connect {
        let stream = TcpStream::connect(addr).map_err(|e| format!("connect to {addr}: {e}"))?;
        sfe_core::harness::remote::run_remote(&cfg, Role::A, stream).map_err(|e| e.to_string())?
    } else {
        run_cli(&cfg).map_err(|e| e.to_string())?
    };

    let failed: Vec<&str> = report
        .bound_checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    emit(report.to_json(), &cli.json)?;
    if !failed.is_empty() {
        return Err(format!("bound checks failed: {}", failed.join("; ")));
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
