//! Stimulus generators shared by the benchmarks.

use std::fmt::Write;

/// A write pass over every word followed by `sweeps` read passes, with a
/// 20 ns clock. Addresses and data change on falling edges.
pub fn write_then_sweep(words: usize, data_bits: usize, sweeps: usize) -> String {
    let addr_bits = words.trailing_zeros();
    let period = 20_000u64;
    let mut s = format!(
        "signal WE 1\nsignal WCLK 1\nsignal A {addr_bits}\nsignal D {data_bits}\nclock WCLK period {period}\n"
    );
    let mask = (1u64 << data_bits) - 1;
    let _ = writeln!(s, "at 0 WE 1");
    let mut t = 0;
    for w in 0..words as u64 {
        t = w * period;
        let _ = writeln!(s, "at {} A {w}", t + 1);
        let _ = writeln!(s, "at {} D {}", t + 1, (w * 7 + 3) & mask);
    }
    t += period;
    let _ = writeln!(s, "at {} WE 0", t + 1);
    for _ in 0..sweeps {
        for w in 0..words as u64 {
            t += period;
            let _ = writeln!(s, "at {} A {w}", t + 1);
        }
    }
    let _ = writeln!(s, "run {}", t + period);
    s
}
