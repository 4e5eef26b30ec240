//! Accelerated drop-in for the reference entropy coder.
//!
//! The fixed-point CDF construction mirrors the reference implementation
//! operation-for-operation (same erfc polynomial, same hand-rolled exp, same
//! rounding and repair pass), so tables and payloads are byte-identical.
//! Everything is exposed over a C ABI taking flat buffers and returning
//! integer status codes; malformed payloads produce errors, never UB.

pub const SYMBOL_BOUND: i64 = 255;
pub const NUM_SYMBOLS: usize = (2 * SYMBOL_BOUND + 2) as usize;
pub const ESCAPE_INDEX: usize = NUM_SYMBOLS - 1;
pub const CDF_SIZE: usize = NUM_SYMBOLS + 1;
pub const PROB_BITS: u32 = 16;
pub const PROB_SCALE: u32 = 1 << PROB_BITS;
pub const RANS_L: u32 = 1 << 23;
pub const SIGMA_MIN: f64 = 1e-4;

pub const STATUS_OK: i32 = 0;
pub const STATUS_BAD_SIGMA: i32 = -1;
pub const STATUS_BUFFER_TOO_SMALL: i32 = -2;
pub const STATUS_CORRUPT: i32 = -3;
pub const STATUS_BAD_ARGS: i32 = -4;

const INV_LN2: f64 = 1.4426950408889634074;
const LN2_HI: f64 = 6.93147180369123816490e-01;
const LN2_LO: f64 = 1.90821492927058770002e-10;
const INV_SQRT2: f64 = 0.7071067811865475244;

const ERFC_P: f64 = 0.3275911;
const ERFC_A1: f64 = 0.254829592;
const ERFC_A2: f64 = -0.284496736;
const ERFC_A3: f64 = 1.421413741;
const ERFC_A4: f64 = -1.453152027;
const ERFC_A5: f64 = 1.061405429;

const EXP_C: [f64; 13] = [
    1.0,
    1.0,
    0.5,
    1.6666666666666666e-01,
    4.1666666666666664e-02,
    8.3333333333333332e-03,
    1.3888888888888889e-03,
    1.9841269841269841e-04,
    2.4801587301587302e-05,
    2.7557319223985893e-06,
    2.7557319223985888e-07,
    2.5052108385441720e-08,
    2.0876756987868100e-09,
];

/// Exact power-of-two scaling (musl-style scalbn, avoids double rounding).
fn ldexp(x: f64, n: i32) -> f64 {
    let mut y = x;
    let mut n = n;
    if n > 1023 {
        y *= f64::from_bits(0x7FE0000000000000); // 2^1023
        n -= 1023;
        if n > 1023 {
            y *= f64::from_bits(0x7FE0000000000000);
            n = (n - 1023).min(1023);
        }
    } else if n < -1022 {
        y *= f64::from_bits(0x0010000000000000) * f64::from_bits(0x4340000000000000); // 2^-1022 * 2^53
        n += 1022 - 53;
        if n < -1022 {
            y *= f64::from_bits(0x0010000000000000) * f64::from_bits(0x4340000000000000);
            n = (n + 1022 - 53).max(-1022);
        }
    }
    y * f64::from_bits(((0x3ff + n) as u64) << 52)
}

/// Deterministic exp for x <= 0 built from basic IEEE ops only.
fn det_exp(x: f64) -> f64 {
    if x < -745.0 {
        return 0.0;
    }
    let k = (x * INV_LN2 + 0.5).floor();
    let r = (x - k * LN2_HI) - k * LN2_LO;
    let mut p = EXP_C[12];
    for i in (0..12).rev() {
        p = p * r + EXP_C[i];
    }
    let k = k.clamp(-2000.0, 64.0) as i64;
    ldexp(p, k as i32)
}

/// Standard normal CDF via the fixed erfc approximation.
fn phi(x: f64) -> f64 {
    let z = x.abs() * INV_SQRT2;
    let t = 1.0 / (1.0 + ERFC_P * z);
    let poly = t * (ERFC_A1 + t * (ERFC_A2 + t * (ERFC_A3 + t * (ERFC_A4 + t * ERFC_A5))));
    let half_erfc = 0.5 * (poly * det_exp(-(z * z)));
    if x <= 0.0 {
        half_erfc
    } else {
        1.0 - half_erfc
    }
}

/// Quantised CDF for one (mu, sigma); byte-identical to the reference.
pub fn build_cdf(mu: f64, sigma: f64, out: &mut [u32; CDF_SIZE]) {
    let sigma = sigma.max(SIGMA_MIN);
    let mut freq = [0i64; NUM_SYMBOLS];
    let mut total: i64 = 0;
    for (i, f) in freq.iter_mut().enumerate().take(ESCAPE_INDEX) {
        let k = (i as i64 - SYMBOL_BOUND) as f64;
        let d = (k - mu).abs();
        let p = phi((0.5 - d) / sigma) - phi((-0.5 - d) / sigma);
        *f = ((p * PROB_SCALE as f64 + 0.5).floor() as i64).max(1);
        total += *f;
    }
    let edge = SYMBOL_BOUND as f64 + 0.5;
    let p_esc = phi((-edge - mu) / sigma) + phi((mu - edge) / sigma);
    freq[ESCAPE_INDEX] = ((p_esc * PROB_SCALE as f64 + 0.5).floor() as i64).max(1);
    total += freq[ESCAPE_INDEX];

    let mut diff = PROB_SCALE as i64 - total;
    if diff > 0 {
        let j = argmax_first(&freq);
        freq[j] += diff;
    } else {
        while diff < 0 {
            let j = argmax_first(&freq);
            let take = (freq[j] - 1).min(-diff);
            freq[j] -= take;
            diff += take;
        }
    }

    out[0] = 0;
    let mut acc: u32 = 0;
    for i in 0..NUM_SYMBOLS {
        acc += freq[i] as u32;
        out[i + 1] = acc;
    }
}

fn argmax_first(values: &[i64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug)]
pub struct CorruptStream {
    pub offset: usize,
}

/// rANS-encode symbols under per-element tables; matches the reference bytes.
pub fn encode_stream(symbols: &[i32], tables: &[u32]) -> Result<Vec<u8>, ()> {
    let n = symbols.len();
    if tables.len() != n * CDF_SIZE {
        return Err(());
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut escapes: Vec<i32> = Vec::new();
    let mut starts = vec![0u32; n];
    let mut freqs = vec![0u32; n];
    for i in 0..n {
        let s = symbols[i] as i64;
        let slot = if (-SYMBOL_BOUND..=SYMBOL_BOUND).contains(&s) {
            (s + SYMBOL_BOUND) as usize
        } else {
            escapes.push(symbols[i]);
            ESCAPE_INDEX
        };
        let row = &tables[i * CDF_SIZE..(i + 1) * CDF_SIZE];
        starts[i] = row[slot];
        freqs[i] = row[slot + 1] - row[slot];
    }

    let mut x: u32 = RANS_L;
    let mut out: Vec<u8> = Vec::with_capacity(n * 3 + 8);
    for (&start, &freq) in starts.iter().zip(freqs.iter()).rev() {
        let x_max = ((RANS_L >> PROB_BITS) << 8) * freq;
        while x >= x_max {
            out.push((x & 0xFF) as u8);
            x >>= 8;
        }
        let q = x / freq;
        x = (q << PROB_BITS) + (x - q * freq) + start;
    }
    out.push((x & 0xFF) as u8);
    out.push(((x >> 8) & 0xFF) as u8);
    out.push(((x >> 16) & 0xFF) as u8);
    out.push(((x >> 24) & 0xFF) as u8);
    out.reverse();

    let mut payload = Vec::with_capacity(out.len() + 4 + 4 * escapes.len());
    payload.extend_from_slice(&(escapes.len() as u32).to_le_bytes());
    for v in &escapes {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    payload.extend_from_slice(&out);
    Ok(payload)
}

/// Exact inverse of encode_stream; trailing bytes are ignored.
pub fn decode_stream(payload: &[u8], tables: &[u32], n: usize, out: &mut [i32])
                     -> Result<(), CorruptStream> {
    if n == 0 {
        return Ok(());
    }
    if payload.len() < 4 {
        return Err(CorruptStream { offset: payload.len() });
    }
    let n_esc = u32::from_le_bytes([payload[0], payload[1], payload[2], payload[3]]) as usize;
    let esc_end = match 4usize.checked_add(n_esc.checked_mul(4).ok_or(CorruptStream { offset: 0 })?) {
        Some(v) => v,
        None => return Err(CorruptStream { offset: 0 }),
    };
    if payload.len() < esc_end + 4 {
        return Err(CorruptStream { offset: payload.len() });
    }
    let mut pos = esc_end;
    let x0 = &payload[pos..pos + 4];
    let mut x: u32 = ((x0[0] as u32) << 24) | ((x0[1] as u32) << 16) | ((x0[2] as u32) << 8)
        | (x0[3] as u32);
    pos += 4;

    let mut esc_pos = 0usize;
    for i in 0..n {
        let cf = x & (PROB_SCALE - 1);
        let row = &tables[i * CDF_SIZE..(i + 1) * CDF_SIZE];
        // last slot with cdf[slot] <= cf (rows are strictly increasing)
        let mut lo = 0usize;
        let mut hi = CDF_SIZE - 1;
        while lo + 1 < hi {
            let mid = (lo + hi) / 2;
            if row[mid] <= cf {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let slot = lo;
        let start = row[slot];
        let freq = row[slot + 1].saturating_sub(start);
        if freq == 0 {
            return Err(CorruptStream { offset: pos });
        }
        x = freq * (x >> PROB_BITS) + cf - start;
        while x < RANS_L {
            if pos >= payload.len() {
                return Err(CorruptStream { offset: pos });
            }
            x = (x << 8) | payload[pos] as u32;
            pos += 1;
        }
        if slot == ESCAPE_INDEX {
            if esc_pos >= n_esc {
                return Err(CorruptStream { offset: pos });
            }
            let at = 4 + esc_pos * 4;
            out[i] = i32::from_le_bytes([payload[at], payload[at + 1], payload[at + 2],
                                         payload[at + 3]]);
            esc_pos += 1;
        } else {
            out[i] = (slot as i64 - SYMBOL_BOUND) as i32;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// C ABI
// ---------------------------------------------------------------------------

/// # Safety
/// `out` must point at CDF_SIZE writable u32 values.
#[no_mangle]
pub unsafe extern "C" fn fc_build_cdf(mu: f64, sigma: f64, out: *mut u32) -> i32 {
    if out.is_null() || !mu.is_finite() || !sigma.is_finite() {
        return STATUS_BAD_ARGS;
    }
    if sigma < SIGMA_MIN {
        return STATUS_BAD_SIGMA;
    }
    let out = &mut *(out as *mut [u32; CDF_SIZE]);
    build_cdf(mu, sigma, out);
    STATUS_OK
}

/// # Safety
/// `mu`/`sigma` hold n doubles; `out` holds n * CDF_SIZE writable u32 values.
#[no_mangle]
pub unsafe extern "C" fn fc_build_cdf_batch(mu: *const f64, sigma: *const f64, n: usize,
                                            out: *mut u32) -> i32 {
    if mu.is_null() || sigma.is_null() || out.is_null() {
        return STATUS_BAD_ARGS;
    }
    let mu = std::slice::from_raw_parts(mu, n);
    let sigma = std::slice::from_raw_parts(sigma, n);
    let out = std::slice::from_raw_parts_mut(out, n * CDF_SIZE);
    for i in 0..n {
        if !mu[i].is_finite() || !sigma[i].is_finite() {
            return STATUS_BAD_ARGS;
        }
        if sigma[i] < SIGMA_MIN {
            return STATUS_BAD_SIGMA;
        }
        let row: &mut [u32; CDF_SIZE] =
            (&mut out[i * CDF_SIZE..(i + 1) * CDF_SIZE]).try_into().unwrap();
        build_cdf(mu[i], sigma[i], row);
    }
    STATUS_OK
}

/// # Safety
/// `symbols`: n i32; `tables`: n * CDF_SIZE u32; `out`: out_cap writable bytes;
/// `out_len`: receives the payload length (or the required capacity on -2).
#[no_mangle]
pub unsafe extern "C" fn fc_encode(symbols: *const i32, n: usize, tables: *const u32,
                                   out: *mut u8, out_cap: usize, out_len: *mut usize) -> i32 {
    if symbols.is_null() || tables.is_null() || out_len.is_null() || (out.is_null() && out_cap > 0) {
        return STATUS_BAD_ARGS;
    }
    let symbols = std::slice::from_raw_parts(symbols, n);
    let tables = std::slice::from_raw_parts(tables, n * CDF_SIZE);
    let payload = match encode_stream(symbols, tables) {
        Ok(p) => p,
        Err(()) => return STATUS_BAD_ARGS,
    };
    *out_len = payload.len();
    if payload.len() > out_cap {
        return STATUS_BUFFER_TOO_SMALL;
    }
    std::ptr::copy_nonoverlapping(payload.as_ptr(), out, payload.len());
    STATUS_OK
}

/// # Safety
/// `payload`: payload_len bytes; `tables`: n * CDF_SIZE u32; `out`: n writable
/// i32; `err_offset` (optional) receives the byte offset of a corruption.
#[no_mangle]
pub unsafe extern "C" fn fc_decode(payload: *const u8, payload_len: usize, tables: *const u32,
                                   n: usize, out: *mut i32, err_offset: *mut usize) -> i32 {
    if (payload.is_null() && payload_len > 0) || tables.is_null() || (out.is_null() && n > 0) {
        return STATUS_BAD_ARGS;
    }
    let payload = std::slice::from_raw_parts(payload, payload_len);
    let tables = std::slice::from_raw_parts(tables, n * CDF_SIZE);
    let out = std::slice::from_raw_parts_mut(out, n);
    match decode_stream(payload, tables, n, out) {
        Ok(()) => STATUS_OK,
        Err(e) => {
            if !err_offset.is_null() {
                *err_offset = e.offset;
            }
            STATUS_CORRUPT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_tables(rng: &mut StdRng, n: usize) -> Vec<u32> {
        let mut tables = vec![0u32; n * CDF_SIZE];
        for i in 0..n {
            let mu: f64 = rng.gen_range(-50.0..50.0);
            let sigma: f64 = (rng.gen_range(SIGMA_MIN.ln()..64f64.ln())).exp();
            let row: &mut [u32; CDF_SIZE] =
                (&mut tables[i * CDF_SIZE..(i + 1) * CDF_SIZE]).try_into().unwrap();
            build_cdf(mu, sigma, row);
        }
        tables
    }

    fn sample_symbols(rng: &mut StdRng, tables: &[u32], n: usize) -> Vec<i32> {
        (0..n)
            .map(|i| {
                let row = &tables[i * CDF_SIZE..(i + 1) * CDF_SIZE];
                let u: u32 = rng.gen_range(0..PROB_SCALE);
                let mut slot = 0;
                while row[slot + 1] <= u {
                    slot += 1;
                }
                if slot == ESCAPE_INDEX {
                    rng.gen_range(300..5000)
                } else {
                    (slot as i64 - SYMBOL_BOUND) as i32
                }
            })
            .collect()
    }

    #[test]
    fn cdf_rows_are_valid() {
        let mut rng = StdRng::seed_from_u64(1);
        let tables = random_tables(&mut rng, 500);
        for i in 0..500 {
            let row = &tables[i * CDF_SIZE..(i + 1) * CDF_SIZE];
            assert_eq!(row[0], 0);
            assert_eq!(row[CDF_SIZE - 1], PROB_SCALE);
            for w in row.windows(2) {
                assert!(w[1] > w[0]); // freq >= 1 everywhere
            }
        }
    }

    #[test]
    fn round_trip_exact() {
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..20 {
            let n = rng.gen_range(1..400usize);
            let tables = random_tables(&mut rng, n);
            let symbols = sample_symbols(&mut rng, &tables, n);
            let payload = encode_stream(&symbols, &tables).unwrap();
            let mut out = vec![0i32; n];
            decode_stream(&payload, &tables, n, &mut out).unwrap();
            assert_eq!(out, symbols);
        }
    }

    #[test]
    fn empty_stream() {
        let payload = encode_stream(&[], &[]).unwrap();
        assert!(payload.is_empty());
        let mut out: Vec<i32> = vec![];
        decode_stream(&payload, &[], 0, &mut out).unwrap();
    }

    #[test]
    fn malformed_payloads_error_not_panic() {
        let mut rng = StdRng::seed_from_u64(3);
        let n = 64;
        let tables = random_tables(&mut rng, n);
        let mut out = vec![0i32; n];
        for len in 0..32 {
            let junk: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let _ = decode_stream(&junk, &tables, n, &mut out);
        }
        for _ in 0..200 {
            let len = rng.gen_range(0..512usize);
            let junk: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let _ = decode_stream(&junk, &tables, n, &mut out); // may err or decode garbage
        }
        // truncations of a valid stream
        let symbols = sample_symbols(&mut rng, &tables, n);
        let payload = encode_stream(&symbols, &tables).unwrap();
        for cut in 0..payload.len() {
            let _ = decode_stream(&payload[..cut], &tables, n, &mut out);
        }
    }
}
