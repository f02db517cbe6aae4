//! Fixtures shared by the acceptance suite.

use std::path::PathBuf;

use vmac_core::synth::{synth_class_trace, ClassProfile};
use vmac_core::trace::{load_trace_dir, VideoTrace};

pub const FPS: f64 = 25.0;

/// The sample traces shipped under `traces/` at the workspace root.
pub fn bundled_traces_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../traces")
}

pub fn bundled_traces() -> Vec<VideoTrace> {
    load_trace_dir(bundled_traces_dir(), None).expect("bundled traces load")
}

/// Three sports-profile and three news-profile traces from fixed seeds.
pub fn sports_news_library() -> Vec<VideoTrace> {
    let mut lib = Vec::new();
    for (profile, base) in [(ClassProfile::sports(), 200u64), (ClassProfile::news(), 210)] {
        for k in 1..=3 {
            lib.push(synth_class_trace(&profile, 7500, FPS, base + k).expect("valid profile"));
        }
    }
    lib
}

/// Output of one in-process `vmac` invocation.
pub struct Invocation {
    pub status: u8,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

/// Runs `vmac <args>` through the same entry point as the binary.
pub fn vmac<S: AsRef<str>>(args: &[S]) -> Invocation {
    let argv = std::iter::once("vmac").chain(args.iter().map(AsRef::as_ref));
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let status = vmac_cli::run(argv, &mut stdout, &mut stderr);
    Invocation { status, stdout, stderr }
}
