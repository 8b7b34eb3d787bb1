//! Rate-1/3 parallel concatenated convolutional code.
//!
//! Two 8-state recursive systematic encoders (feedback `1 + D^2 + D^3`, feedforward
//! `1 + D + D^3`) are joined by a quadratic permutation polynomial interleaver.
//! Each encoder is terminated with three tail steps, so a block of `K` bits
//! becomes `3K + 12` coded bits laid out as
//! `[systematic K | parity-1 K | parity-2 K | tail 12]`.
//!
//! The tail holds `x, z` pairs for the three termination steps of encoder 1 followed
//! by those of encoder 2.
//!
//! Decoding is iterative max-log-MAP with scaled extrinsic exchange.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, shape, Result};

const STATES: usize = 8;
const TAIL_STEPS: usize = 3;
const NEG_INF: f64 = -1e300;

/// Code and decoder parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TurboConfig {
    /// Information block length.
    pub k: usize,
    pub f1: usize,
    pub f2: usize,
    pub max_iterations: usize,
    pub early_stop: bool,
    /// Multiplier applied to extrinsic information before it is passed on.
    pub extrinsic_scale: f64,
}

impl Default for TurboConfig {
    /// K = 616, the block used by the link simulations (614 payload bits plus 2 filler bits).
    fn default() -> Self {
        Self {
            k: 616,
            f1: 333,
            f2: 154,
            max_iterations: 8,
            early_stop: true,
            extrinsic_scale: 0.75,
        }
    }
}

impl TurboConfig {
    pub fn new(k: usize, f1: usize, f2: usize) -> Result<Self> {
        let cfg = Self {
            k,
            f1,
            f2,
            ..Self::default()
        };
        qpp_permutation(&cfg)?;
        Ok(cfg)
    }

    pub fn coded_len(&self) -> usize {
        3 * self.k + 4 * TAIL_STEPS
    }
}

/// Quadratic permutation `pi(i) = (f1 i + f2 i^2) mod K`.
pub fn qpp_permutation(cfg: &TurboConfig) -> Result<Vec<usize>> {
    let k = cfg.k;
    if k < 8 {
        return Err(invalid(format!("interleaver size {k} is too small")));
    }
    if cfg.f1.is_multiple_of(2) {
        return Err(invalid(format!("f1 = {} must be odd", cfg.f1)));
    }
    let (k128, f1, f2) = (k as u128, cfg.f1 as u128, cfg.f2 as u128);
    let perm: Vec<usize> = (0..k as u128)
        .map(|i| ((f1 * i + f2 * i * i) % k128) as usize)
        .collect();
    let mut seen = vec![false; k];
    for &p in &perm {
        if seen[p] {
            return Err(invalid(format!(
                "(K, f1, f2) = ({k}, {}, {}) does not define a permutation",
                cfg.f1, cfg.f2
            )));
        }
        seen[p] = true;
    }
    Ok(perm)
}

/// Trellis of one constituent encoder.
///
/// State bits hold `(a[k-1], a[k-2], a[k-3])` of the feedback register, MSB first.
struct Trellis {
    next: [[usize; 2]; STATES],
    parity: [[u8; 2]; STATES],
    /// Input that drives the register towards zero.
    tail_input: [u8; STATES],
}

const TRELLIS: Trellis = build_trellis();

const fn build_trellis() -> Trellis {
    let mut next = [[0usize; 2]; STATES];
    let mut parity = [[0u8; 2]; STATES];
    let mut tail_input = [0u8; STATES];
    let mut st = 0;
    while st < STATES {
        let s0 = (st >> 2) & 1;
        let s1 = (st >> 1) & 1;
        let s2 = st & 1;
        let mut u = 0;
        while u < 2 {
            let a = u ^ s1 ^ s2;
            parity[st][u] = (a ^ s0 ^ s2) as u8;
            next[st][u] = (a << 2) | (s0 << 1) | s1;
            u += 1;
        }
        tail_input[st] = (s1 ^ s2) as u8;
        st += 1;
    }
    Trellis {
        next,
        parity,
        tail_input,
    }
}

/// Encodes `input`; returns parity bits and the 3 (x, z) tail pairs.
fn rsc_encode(input: impl Iterator<Item = u8>, parity: &mut Vec<u8>) -> [u8; 2 * TAIL_STEPS] {
    let mut st = 0;
    for u in input {
        parity.push(TRELLIS.parity[st][u as usize]);
        st = TRELLIS.next[st][u as usize];
    }
    let mut tail = [0u8; 2 * TAIL_STEPS];
    for t in 0..TAIL_STEPS {
        let u = TRELLIS.tail_input[st] as usize;
        tail[2 * t] = u as u8;
        tail[2 * t + 1] = TRELLIS.parity[st][u];
        st = TRELLIS.next[st][u];
    }
    debug_assert_eq!(st, 0);
    tail
}

/// Encodes `K` information bits into `3K + 12` coded bits.
pub fn turbo_encode(bits: &[u8], cfg: &TurboConfig) -> Result<Vec<u8>> {
    TurboCodec::new(cfg.clone())?.encode(bits)
}

/// Decodes `3K + 12` LLRs (positive favours bit 0).
pub fn turbo_decode(llrs: &[f64], cfg: &TurboConfig) -> Result<DecodeOutput> {
    TurboCodec::new(cfg.clone())?.decode(llrs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    pub bits: Vec<u8>,
    pub iterations: usize,
}

/// Encoder/decoder pair with the interleaver precomputed.
#[derive(Debug, Clone)]
pub struct TurboCodec {
    cfg: TurboConfig,
    perm: Vec<usize>,
}

impl TurboCodec {
    pub fn new(cfg: TurboConfig) -> Result<Self> {
        if cfg.max_iterations == 0 {
            return Err(invalid("max_iterations must be at least 1"));
        }
        let perm = qpp_permutation(&cfg)?;
        Ok(Self { cfg, perm })
    }

    pub fn config(&self) -> &TurboConfig {
        &self.cfg
    }

    pub fn encode(&self, bits: &[u8]) -> Result<Vec<u8>> {
        let k = self.cfg.k;
        if bits.len() != k {
            return Err(shape(format!(
                "encoder expects {k} bits, got {}",
                bits.len()
            )));
        }
        let mut out = Vec::with_capacity(self.cfg.coded_len());
        out.extend_from_slice(bits);
        let tail1 = rsc_encode(bits.iter().copied(), &mut out);
        let tail2 = rsc_encode(self.perm.iter().map(|&p| bits[p]), &mut out);
        out.extend_from_slice(&tail1);
        out.extend_from_slice(&tail2);
        Ok(out)
    }

    pub fn decode(&self, llrs: &[f64]) -> Result<DecodeOutput> {
        let k = self.cfg.k;
        if llrs.len() != self.cfg.coded_len() {
            return Err(shape(format!(
                "decoder expects {} LLRs, got {}",
                self.cfg.coded_len(),
                llrs.len()
            )));
        }
        let n = k + TAIL_STEPS;
        let tail = &llrs[3 * k..];
        let mut sys1 = Vec::with_capacity(n);
        let mut par1 = Vec::with_capacity(n);
        let mut sys2 = Vec::with_capacity(n);
        let mut par2 = Vec::with_capacity(n);
        sys1.extend_from_slice(&llrs[..k]);
        par1.extend_from_slice(&llrs[k..2 * k]);
        sys2.extend(self.perm.iter().map(|&p| llrs[p]));
        par2.extend_from_slice(&llrs[2 * k..3 * k]);
        for t in 0..TAIL_STEPS {
            sys1.push(tail[2 * t]);
            par1.push(tail[2 * t + 1]);
            sys2.push(tail[2 * TAIL_STEPS + 2 * t]);
            par2.push(tail[2 * TAIL_STEPS + 2 * t + 1]);
        }

        let scale = self.cfg.extrinsic_scale;
        let mut work = Workspace::new(n);
        let mut apriori1 = vec![0.0; k];
        let mut apriori2 = vec![0.0; k];
        let mut post1 = vec![0.0; k];
        let mut post2 = vec![0.0; k];
        let mut bits = vec![0u8; k];
        let mut iterations = 0;

        for it in 1..=self.cfg.max_iterations {
            iterations = it;
            work.run(&sys1, &par1, &apriori1, &mut post1);
            for (i, &p) in self.perm.iter().enumerate() {
                apriori2[i] = scale * (post1[p] - sys1[p] - apriori1[p]);
            }
            work.run(&sys2, &par2, &apriori2, &mut post2);
            let mut agree = true;
            for (i, &p) in self.perm.iter().enumerate() {
                apriori1[p] = scale * (post2[i] - sys2[i] - apriori2[i]);
                let b = u8::from(post2[i] < 0.0);
                agree &= b == u8::from(post1[p] < 0.0);
                bits[p] = b;
            }
            if self.cfg.early_stop && agree {
                break;
            }
        }
        Ok(DecodeOutput { bits, iterations })
    }
}

/// Scratch buffers for one constituent max-log-MAP pass.
struct Workspace {
    alpha: Vec<[f64; STATES]>,
}

impl Workspace {
    fn new(steps: usize) -> Self {
        Self {
            alpha: vec![[NEG_INF; STATES]; steps + 1],
        }
    }

    /// Writes a-posteriori LLRs of the `K` information bits into `post`.
    fn run(&mut self, sys: &[f64], par: &[f64], apriori: &[f64], post: &mut [f64]) {
        let k = apriori.len();
        let n = sys.len();
        let alpha = &mut self.alpha;
        alpha[0] = [NEG_INF; STATES];
        alpha[0][0] = 0.0;

        for t in 0..n {
            let mut next = [NEG_INF; STATES];
            let la = if t < k { apriori[t] } else { 0.0 };
            let us = 0.5 * (sys[t] + la);
            let ps = 0.5 * par[t];
            for st in 0..STATES {
                let a = alpha[t][st];
                if a <= NEG_INF {
                    continue;
                }
                for u in 0..2 {
                    if t >= k && u as u8 != TRELLIS.tail_input[st] {
                        continue;
                    }
                    let g = branch(us, ps, u, TRELLIS.parity[st][u]);
                    let ns = TRELLIS.next[st][u];
                    next[ns] = next[ns].max(a + g);
                }
            }
            let m = next.iter().copied().fold(NEG_INF, f64::max);
            for v in next.iter_mut() {
                if *v > NEG_INF {
                    *v -= m;
                }
            }
            alpha[t + 1] = next;
        }

        let mut beta = [NEG_INF; STATES];
        beta[0] = 0.0;
        for t in (0..n).rev() {
            let la = if t < k { apriori[t] } else { 0.0 };
            let us = 0.5 * (sys[t] + la);
            let ps = 0.5 * par[t];
            let mut prev = [NEG_INF; STATES];
            let mut best = [NEG_INF; 2];
            for st in 0..STATES {
                for u in 0..2 {
                    if t >= k && u as u8 != TRELLIS.tail_input[st] {
                        continue;
                    }
                    let b = beta[TRELLIS.next[st][u]];
                    if b <= NEG_INF {
                        continue;
                    }
                    let g = branch(us, ps, u, TRELLIS.parity[st][u]) + b;
                    prev[st] = prev[st].max(g);
                    if t < k && alpha[t][st] > NEG_INF {
                        best[u] = best[u].max(alpha[t][st] + g);
                    }
                }
            }
            if t < k {
                post[t] = best[0] - best[1];
            }
            let m = prev.iter().copied().fold(NEG_INF, f64::max);
            for v in prev.iter_mut() {
                if *v > NEG_INF {
                    *v -= m;
                }
            }
            beta = prev;
        }
    }
}

#[inline]
fn branch(us: f64, ps: f64, u: usize, p: u8) -> f64 {
    let a = if u == 0 { us } else { -us };
    let b = if p == 0 { ps } else { -ps };
    a + b
}
