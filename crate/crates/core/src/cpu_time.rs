/// CPU time consumed by the calling thread, in seconds.
///
/// Trials run concurrently, so a process-wide clock would charge one solve
/// for work done on sibling threads.
#[cfg(unix)]
pub fn thread_cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid out-pointer and the clock id is a constant.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

/// Wall-clock fallback where no per-thread CPU clock is available.
#[cfg(all(not(unix), not(target_arch = "wasm32")))]
pub fn thread_cpu_seconds() -> f64 {
    use std::sync::OnceLock;
    use std::time::Instant;
    static ORIGIN: OnceLock<Instant> = OnceLock::new();
    ORIGIN.get_or_init(Instant::now).elapsed().as_secs_f64()
}

/// `wasm32-unknown-unknown` has no clock without JS glue; timings read zero.
#[cfg(target_arch = "wasm32")]
pub fn thread_cpu_seconds() -> f64 {
    0.0
}
