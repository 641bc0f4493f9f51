//! Exact error probability, entropy gap and variational-distance security of a
//! finite protocol on a [`DiscreteSurrogate`], and the hash-averaged check of
//! the privacy-amplification bound.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::fmt12;
use crate::protocol::hash::UniversalHash;
use crate::rng::WordStream;

use super::{DiscreteSurrogate, SurrogateError, MAX_BLOCK_LEN, MAX_TERMS};

/// A map between finite index sets, stored as its image table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMap {
    pub image: Vec<u32>,
    pub range: usize,
}

impl FiniteMap {
    pub fn from_hash(hash: &UniversalHash, domain: usize, range: usize) -> Self {
        FiniteMap { image: (0..domain as u64).map(|q| hash.apply(q) as u32).collect(), range }
    }

    pub fn constant(domain: usize) -> Self {
        FiniteMap { image: vec![0; domain], range: 1 }
    }

    #[inline]
    pub fn at(&self, i: usize) -> usize {
        self.image[i] as usize
    }

    /// `s ↦ s mod range`, a balanced coarsening when `range` divides the old range.
    pub fn coarsen(&self, range: usize) -> Self {
        FiniteMap { image: self.image.iter().map(|s| s % range as u32).collect(), range }
    }
}

/// Quantizer codebook `Q` (sequences of U-cells), quantizer `g` and binning `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProtocol {
    pub n: usize,
    pub cells: usize,
    /// `|Q|·n` U-cell symbols, codeword after codeword.
    pub codebook: Vec<u16>,
    /// X-cell sequence index → codeword index.
    pub g: FiniteMap,
    /// Codeword index → public message.
    pub phi: FiniteMap,
}

/// Little-endian digits of a sequence index.
#[inline]
fn digit(index: usize, i: usize, cells: usize) -> usize {
    (index / cells.pow(i as u32)) % cells
}

fn argmax_lowest(scores: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

fn ln_or_neg_inf(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

impl FiniteProtocol {
    /// Codebook of `size_q` distinct U-cell sequences (all of them when
    /// `size_q = cellsⁿ`, otherwise i.i.d. draws from `p(u)` without repeats),
    /// `g` picking the codeword of largest `ln p(uⁿ|xⁿ)/p(uⁿ)`, and `φ` an
    /// affine hash onto `size_c` messages.
    pub fn build(
        sur: &DiscreteSurrogate,
        n: usize,
        size_q: usize,
        size_c: usize,
        seed: u64,
    ) -> Result<Self, SurrogateError> {
        if !(1..=MAX_BLOCK_LEN).contains(&n) {
            return Err(SurrogateError::InvalidBlockLength(n));
        }
        let c = sur.cells;
        let seqs = c.pow(n as u32);
        if size_q == 0 || size_q > seqs || size_c == 0 {
            return Err(SurrogateError::InvalidSizes(format!(
                "|Q| = {size_q}, |C| = {size_c} with {seqs} sequences"
            )));
        }
        let pu = sur.marginal([true, false, false, false]);
        let ux = sur.marginal([true, true, false, false]);
        let px = sur.marginal([false, true, false, false]);

        let mut chosen: Vec<usize> = Vec::with_capacity(size_q);
        if size_q == seqs {
            chosen.extend(0..seqs);
        } else {
            let mut taken = vec![false; seqs];
            let mut words = WordStream::new(seed, 0);
            let mut attempts = 0;
            while chosen.len() < size_q && attempts < 1_000_000 {
                attempts += 1;
                let mut idx = 0;
                for i in 0..n {
                    let r = words.unit();
                    let mut acc = 0.0;
                    let mut sym = c - 1;
                    for (k, p) in pu.iter().enumerate() {
                        acc += p;
                        if r < acc {
                            sym = k;
                            break;
                        }
                    }
                    idx += sym * c.pow(i as u32);
                }
                if !taken[idx] {
                    taken[idx] = true;
                    chosen.push(idx);
                }
            }
            for idx in 0..seqs {
                if chosen.len() == size_q {
                    break;
                }
                if !taken[idx] {
                    taken[idx] = true;
                    chosen.push(idx);
                }
            }
        }
        let codebook: Vec<u16> =
            chosen.iter().flat_map(|&idx| (0..n).map(move |i| digit(idx, i, c) as u16)).collect();

        // ln p(u|x) − ln p(u) per symbol pair
        let score: Vec<f64> = (0..c * c)
            .map(|k| {
                let (u, x) = (k / c, k % c);
                ln_or_neg_inf(ux[k] / px[x]) - ln_or_neg_inf(pu[u])
            })
            .collect();
        let g = (0..seqs)
            .map(|xs| {
                argmax_lowest((0..size_q).map(|q| {
                    let s = (0..n).map(|i| score[codebook[q * n + i] as usize * c + digit(xs, i, c)]).sum();
                    (q, s)
                }))
                .expect("non-empty codebook") as u32
            })
            .collect();
        let hash = UniversalHash::draw(size_q as u64, size_c as u64, &mut WordStream::new(seed, 1));
        Ok(FiniteProtocol {
            n,
            cells: c,
            codebook,
            g: FiniteMap { image: g, range: size_q },
            phi: FiniteMap::from_hash(&hash, size_q, size_c),
        })
    }

    pub fn size_q(&self) -> usize {
        self.g.range
    }

    pub fn size_c(&self) -> usize {
        self.phi.range
    }

    fn sequences(&self) -> usize {
        self.cells.pow(self.n as u32)
    }

    pub fn codeword(&self, q: usize) -> &[u16] {
        &self.codebook[q * self.n..(q + 1) * self.n]
    }

    /// Product probabilities `p(aⁿ, bⁿ)` for a two-variable single-letter law.
    fn pair_law(&self, single: &[f64]) -> Vec<f64> {
        let (c, seqs) = (self.cells, self.sequences());
        let mut out = vec![0.0; seqs * seqs];
        for a in 0..seqs {
            for b in 0..seqs {
                out[a * seqs + b] =
                    (0..self.n).map(|i| single[digit(a, i, c) * c + digit(b, i, c)]).product();
            }
        }
        out
    }

    /// Bob's decoder: in bin `message`, the codeword maximizing `p(yⁿ|uⁿ)`.
    fn decoder_table(&self, sur: &DiscreteSurrogate) -> Vec<Option<u32>> {
        let (c, seqs) = (self.cells, self.sequences());
        let uy = sur.marginal([true, false, true, false]);
        let pu = sur.marginal([true, false, false, false]);
        let ll: Vec<f64> = (0..c * c).map(|k| ln_or_neg_inf(uy[k] / pu[k / c])).collect();
        let mut out = vec![None; self.size_c() * seqs];
        for m in 0..self.size_c() {
            let members: Vec<usize> = (0..self.size_q()).filter(|&q| self.phi.at(q) == m).collect();
            for ys in 0..seqs {
                out[m * seqs + ys] = argmax_lowest(members.iter().map(|&q| {
                    let u = self.codeword(q);
                    (q, (0..self.n).map(|i| ll[u[i] as usize * c + digit(ys, i, c)]).sum())
                }))
                .map(|q| q as u32);
            }
        }
        out
    }

    /// `W[z][q] = Pr{Zⁿ = zⁿ, g(Xⁿ) = q}`.
    fn codeword_mass_by_z(&self, sur: &DiscreteSurrogate) -> Vec<Vec<f64>> {
        let seqs = self.sequences();
        let xz = self.pair_law(&sur.marginal([false, true, false, true]));
        (0..seqs)
            .into_par_iter()
            .map(|zs| {
                let mut w = vec![0.0; self.size_q()];
                for xs in 0..seqs {
                    w[self.g.at(xs)] += xz[xs * seqs + zs];
                }
                w
            })
            .collect()
    }

    fn check_terms(&self, size_s: usize) -> Result<(), SurrogateError> {
        let seqs = self.sequences() as f64;
        let terms = 3.0 * seqs * seqs
            + self.size_c() as f64 * seqs * self.size_q() as f64
            + seqs * (size_s * self.size_c()) as f64;
        if terms > MAX_TERMS {
            return Err(SurrogateError::StateSpaceTooLarge { terms, cap: MAX_TERMS });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityMetrics {
    /// `∫ p(zⁿ)·‖P(s, c | zⁿ) − P_unif(s)·P(c | zⁿ)‖₁`.
    pub mu_exact: f64,
    /// `ln|S| − H(S | C, Zⁿ)`, nats.
    pub nu_exact: f64,
    /// `Pr{S ≠ S'}`.
    pub epsilon_exact: f64,
}

/// `(μ, H(S|C,Zⁿ))` from the per-`zⁿ` codeword masses.
fn mu_and_entropy(w: &[Vec<f64>], phi: &FiniteMap, f: &FiniteMap) -> (f64, f64) {
    let (size_s, size_c) = (f.range, phi.range);
    let per_z: Vec<(f64, f64)> = w
        .par_iter()
        .map(|wz| {
            let mut joint = vec![0.0; size_s * size_c];
            for (q, m) in wz.iter().enumerate() {
                joint[f.at(q) * size_c + phi.at(q)] += m;
            }
            let mut mu = 0.0;
            let mut h = 0.0;
            for cc in 0..size_c {
                let pc: f64 = (0..size_s).map(|s| joint[s * size_c + cc]).sum();
                for s in 0..size_s {
                    let p = joint[s * size_c + cc];
                    mu += (p - pc / size_s as f64).abs();
                    if p > 0.0 {
                        h -= p * (p / pc).ln();
                    }
                }
            }
            (mu, h)
        })
        .collect();
    // Sequential sum keeps the result independent of the thread count.
    per_z.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// Exact `ε`, `ν` and `μ` of `(g, φ, f)` on `sur`, by enumerating every
/// `(xⁿ, zⁿ)` and `(xⁿ, yⁿ)`.
pub fn exact_security(
    sur: &DiscreteSurrogate,
    proto: &FiniteProtocol,
    f: &FiniteMap,
) -> Result<SecurityMetrics, SurrogateError> {
    if f.image.len() != proto.size_q() || proto.cells != sur.cells {
        return Err(SurrogateError::InvalidSizes("key map or cells do not match the protocol".into()));
    }
    proto.check_terms(f.range)?;
    let w = proto.codeword_mass_by_z(sur);
    let (mu, h) = mu_and_entropy(&w, &proto.phi, f);

    let seqs = proto.sequences();
    let xy = proto.pair_law(&sur.marginal([false, true, true, false]));
    let dec = proto.decoder_table(sur);
    let per_x: Vec<f64> = (0..seqs)
        .into_par_iter()
        .map(|xs| {
            let q = proto.g.at(xs);
            let m = proto.phi.at(q);
            let key = f.at(q);
            (0..seqs)
                .filter(|&ys| dec[m * seqs + ys].is_none_or(|d| f.at(d as usize) != key))
                .fold(0.0, |acc, ys| acc + xy[xs * seqs + ys])
        })
        .collect();
    // Folding from +0.0: an empty float sum is −0.0.
    let epsilon = per_x.iter().fold(0.0, |a, b| a + b);
    Ok(SecurityMetrics { mu_exact: mu, nu_exact: (f.range as f64).ln() - h, epsilon_exact: epsilon })
}

/// Result of checking the privacy-amplification bound over a hash family.
#[derive(Debug, Clone, PartialEq)]
pub struct PaLemmaReport {
    pub size_q: usize,
    pub size_c: usize,
    pub size_s: usize,
    pub n: usize,
    pub beta: f64,
    /// `√(|S||C|e^{−βn}) + 2·Pr{(g(Xⁿ),Xⁿ,Zⁿ) ∉ B_n}`.
    pub bound: f64,
    pub p_not_b: f64,
    pub avg_mu: f64,
    pub best_mu: f64,
    pub worst_mu: f64,
    pub hashes: usize,
    /// Whether every member of the family was evaluated (the average is then exact).
    pub exhaustive: bool,
}

/// Slack allowed on the averaged clause.
pub const AVERAGE_SLACK: f64 = 1e-9;

impl PaLemmaReport {
    pub fn average_holds(&self) -> bool {
        self.avg_mu <= self.bound + AVERAGE_SLACK
    }

    pub fn existence_holds(&self) -> bool {
        self.best_mu <= self.bound
    }

    pub fn to_text(&self) -> String {
        let verdict = |b: bool| if b { "PASS" } else { "FAIL" };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n", self.n.to_string());
        kv("size_q", self.size_q.to_string());
        kv("size_c", self.size_c.to_string());
        kv("size_s", self.size_s.to_string());
        kv("beta", fmt12(self.beta));
        kv("hashes", self.hashes.to_string());
        kv("exhaustive", self.exhaustive.to_string());
        kv("bound", fmt12(self.bound));
        kv("avg_mu", fmt12(self.avg_mu));
        kv("best_mu", fmt12(self.best_mu));
        kv("worst_mu", fmt12(self.worst_mu));
        kv("p_not_b", fmt12(self.p_not_b));
        kv("average_clause", verdict(self.average_holds()).into());
        kv("existence_clause", verdict(self.existence_holds()).into());
        s
    }
}

/// `Pr{(g(Xⁿ), Xⁿ, Zⁿ) ∉ B_n}` with `B_n = {(1/n)·ln p(xⁿ|uⁿ,zⁿ)/p(xⁿ|zⁿ) ≥ β}`.
pub fn prob_not_b(sur: &DiscreteSurrogate, proto: &FiniteProtocol, beta: f64) -> f64 {
    let (c, n, seqs) = (sur.cells, proto.n, proto.sequences());
    let uxz = sur.marginal([true, true, false, true]);
    let uz = sur.marginal([true, false, false, true]);
    let xz = sur.marginal([false, true, false, true]);
    let pz = sur.marginal([false, false, false, true]);
    let xz_law = proto.pair_law(&xz);
    // ln p(x|u,z) − ln p(x|z) per symbol triple
    let ratio = |u: usize, x: usize, z: usize| {
        ln_or_neg_inf(uxz[(u * c + x) * c + z] / uz[u * c + z]) - ln_or_neg_inf(xz[x * c + z] / pz[z])
    };
    let per_x: Vec<f64> = (0..seqs)
        .into_par_iter()
        .map(|xs| {
            let u = proto.codeword(proto.g.at(xs));
            (0..seqs)
                .filter(|&zs| {
                    let d: f64 = (0..n).map(|i| ratio(u[i] as usize, digit(xs, i, c), digit(zs, i, c))).sum();
                    !(d / n as f64 >= beta)
                })
                .fold(0.0, |acc, zs| acc + xz_law[xs * seqs + zs])
        })
        .collect();
    per_x.iter().fold(0.0, |a, b| a + b)
}

/// Draws `trials` members of the affine family `Q → S` (or takes the whole
/// family when `trials` covers it) and compares the exact `μ` of each against
/// `√(|S||C|e^{−βn}) + 2·Pr{B_nᶜ}`.
pub fn verify_pa_lemma(
    sur: &DiscreteSurrogate,
    proto: &FiniteProtocol,
    size_s: usize,
    beta: f64,
    trials: usize,
    seed: u64,
) -> Result<PaLemmaReport, SurrogateError> {
    if size_s == 0 || trials == 0 {
        return Err(SurrogateError::InvalidSizes("|S| and trials must be positive".into()));
    }
    proto.check_terms(size_s)?;
    let (q, s) = (proto.size_q() as u64, size_s as u64);
    let (family, exhaustive): (Vec<UniversalHash>, bool) = if s >= q {
        (vec![UniversalHash::Identity], true)
    } else if trials as u64 >= UniversalHash::family_size(q) {
        (UniversalHash::family(q, s).collect(), true)
    } else {
        let mut words = WordStream::new(seed, 0);
        ((0..trials).map(|_| UniversalHash::draw(q, s, &mut words)).collect(), false)
    };
    let w = proto.codeword_mass_by_z(sur);
    let mus: Vec<f64> = family
        .par_iter()
        .map(|h| mu_and_entropy(&w, &proto.phi, &FiniteMap::from_hash(h, q as usize, size_s)).0)
        .collect();
    let p_not_b = prob_not_b(sur, proto, beta);
    let n = proto.n;
    let bound = (size_s as f64 * proto.size_c() as f64 * (-beta * n as f64).exp()).sqrt() + 2.0 * p_not_b;
    Ok(PaLemmaReport {
        size_q: proto.size_q(),
        size_c: proto.size_c(),
        size_s,
        n,
        beta,
        bound,
        p_not_b,
        avg_mu: mus.iter().sum::<f64>() / mus.len() as f64,
        best_mu: mus.iter().copied().fold(f64::INFINITY, f64::min),
        worst_mu: mus.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        hashes: mus.len(),
        exhaustive,
    })
}
