//! Argument vectors (NUL-separated) go through clap and config resolution
//! without running an experiment.

#![no_main]

use clap::Parser as _;
use libfuzzer_sys::fuzz_target;
use waveheat::cli::{parse_kmax, Cli};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 1024 {
        return;
    }
    let args: Vec<&str> = std::iter::once("waveheat").chain(text.split('\0')).collect();
    let _ = parse_kmax(args.last().copied().unwrap_or(""));
    if let Ok(cli) = Cli::try_parse_from(&args) {
        if let Ok(cfg) = cli.resolve(None) {
            cfg.validate().expect("resolved configs are valid");
        }
    }
});
