#![no_main]

use libfuzzer_sys::fuzz_target;
use oneparticle::linalg::{c, ComplexMatrix};
use oneparticle::reduction::{trace_out, IndexSet};
use oneparticle::OneParticleState;

// first byte: mode count; rest: little-endian (re, im) pairs, row-major
fuzz_target!(|data: &[u8]| {
    let Some((&head, rest)) = data.split_first() else {
        return;
    };
    let n = (head % 6) as usize + 1;
    let d = n + 1;
    let values: Vec<f64> = rest
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    if values.len() < 2 * d * d {
        return;
    }
    let m = ComplexMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        c(values[k], values[k + 1])
    });
    if let Ok(s) = OneParticleState::disassemble(&m) {
        let back = s.assemble();
        assert_eq!(back.nrows(), d);
        let traced = IndexSet::new(vec![1]).unwrap();
        if n > 1 {
            let _ = trace_out(&s, &traced);
        }
    }
});
