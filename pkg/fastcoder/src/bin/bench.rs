//! Throughput benchmark: table construction plus encode/decode of 1e6 symbols.

use fastcoder::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1_000_000);
    let mut rng = StdRng::seed_from_u64(7);

    // distinct tables are the slow part; tile a smaller pool across n symbols
    let n_tables = (n / 20).max(1);
    let mus: Vec<f64> = (0..n_tables).map(|_| rng.gen_range(-50.0..50.0)).collect();
    let sigmas: Vec<f64> = (0..n_tables)
        .map(|_| (rng.gen_range(SIGMA_MIN.ln()..64f64.ln())).exp())
        .collect();

    let t0 = Instant::now();
    let mut pool = vec![0u32; n_tables * CDF_SIZE];
    for i in 0..n_tables {
        let row: &mut [u32; CDF_SIZE] =
            (&mut pool[i * CDF_SIZE..(i + 1) * CDF_SIZE]).try_into().unwrap();
        build_cdf(mus[i], sigmas[i], row);
    }
    let dt_tables = t0.elapsed().as_secs_f64();
    let mut tables = vec![0u32; n * CDF_SIZE];
    for i in 0..n {
        let src = (i % n_tables) * CDF_SIZE;
        tables[i * CDF_SIZE..(i + 1) * CDF_SIZE]
            .copy_from_slice(&pool[src..src + CDF_SIZE]);
    }

    let symbols: Vec<i32> = (0..n)
        .map(|i| {
            let row = &tables[i * CDF_SIZE..(i + 1) * CDF_SIZE];
            let u: u32 = rng.gen_range(0..PROB_SCALE);
            let mut lo = 0usize;
            let mut hi = CDF_SIZE - 1;
            while lo + 1 < hi {
                let mid = (lo + hi) / 2;
                if row[mid] <= u { lo = mid } else { hi = mid }
            }
            if lo == ESCAPE_INDEX { 1000 } else { (lo as i64 - SYMBOL_BOUND) as i32 }
        })
        .collect();

    let t0 = Instant::now();
    let payload = encode_stream(&symbols, &tables).unwrap();
    let dt_enc = t0.elapsed().as_secs_f64();

    let mut out = vec![0i32; n];
    let t0 = Instant::now();
    decode_stream(&payload, &tables, n, &mut out).unwrap();
    let dt_dec = t0.elapsed().as_secs_f64();
    assert_eq!(out, symbols);

    println!("symbols: {n}");
    println!("payload: {} bytes ({:.4} bits/symbol)", payload.len(),
             payload.len() as f64 * 8.0 / n as f64);
    println!("tables:  {:.3}s ({:.2e} tables/s)", dt_tables, n_tables as f64 / dt_tables);
    println!("encode:  {:.3}s ({:.2e} symbols/s)", dt_enc, n as f64 / dt_enc);
    println!("decode:  {:.3}s ({:.2e} symbols/s)", dt_dec, n as f64 / dt_dec);
}
