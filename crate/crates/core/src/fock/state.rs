//! Two-mode state in a truncated Fock basis, `|n_a, n_b>` with `n_a, n_b <= cutoff`.
//!
//! Every operation used here maps a sector of fixed `d = n_a - n_b` into a single sector,
//! so the density matrix is stored as blocks `rho[d, d']`. A pure state is kept as a
//! vector until the first damping channel. Blocks with `d - d' < 0` are implied by
//! Hermiticity. Damping shifts `d` and `d'` by the same amount and the squeezer preserves
//! both, so a state can be told to drop coherences with `d - d'` beyond a given band:
//! nothing outside the band ever flows back into it.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{s, Array2};
use num_complex::Complex64;

use super::expm::expm;
use crate::error::{invalid, Error, Result};

/// Default limit on the probability lost to truncation before an operation is refused.
pub const DEFAULT_BUDGET: f64 = 1e-7;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// sectors (or blocks) with all amplitudes below this are zeroed instead of propagated
const NEGLIGIBLE: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

#[derive(Debug, Clone)]
enum Repr {
    /// Amplitudes indexed `n_a * (cutoff + 1) + n_b`.
    Pure(Vec<Complex64>),
    /// `blocks[o][s - o]` holds `rho[d, d - o]` with `s = d + cutoff`.
    Mixed(Vec<Vec<Array2<Complex64>>>),
}

#[derive(Debug, Clone)]
pub struct TruncatedState {
    cutoff: usize,
    band: usize,
    repr: Repr,
    deficit: f64,
    budget: f64,
}

/// First and second moments of the two modes, normalized by the retained trace.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FockMoments {
    pub a: Complex64,
    pub a_sq: Complex64,
    pub b: Complex64,
    pub b_sq: Complex64,
    pub n_a: f64,
    pub n_a_sq: f64,
    pub n_b: f64,
    pub n_b_sq: f64,
    pub ab: Complex64,
    pub a_bdag: Complex64,
    pub n_a_n_b: f64,
}

/// Coordinates of sector `d` in a basis truncated at `cutoff`.
#[derive(Debug, Clone, Copy)]
struct Sector {
    d: isize,
    len: usize,
    shift_a: usize,
    shift_b: usize,
}

impl Sector {
    fn new(d: isize, cutoff: usize) -> Self {
        let abs = d.unsigned_abs();
        let (shift_a, shift_b) = if d >= 0 { (abs, 0) } else { (0, abs) };
        Sector { d, len: cutoff + 1 - abs, shift_a, shift_b }
    }

    fn from_index(s: usize, cutoff: usize) -> Self {
        Self::new(s as isize - cutoff as isize, cutoff)
    }

    /// `(n_a, n_b)` of the `j`-th state.
    fn occupations(&self, j: usize) -> (usize, usize) {
        (j + self.shift_a, j + self.shift_b)
    }
}

/// Position of `|n_a, n_b>` as (sector index, index within sector).
fn locate(na: usize, nb: usize, cutoff: usize) -> (usize, usize) {
    (na + cutoff - nb, na.min(nb))
}

impl TruncatedState {
    /// `|alpha> (x) |0>`, refused when `|alpha|^2 > cutoff / 2`.
    pub fn coherent_vacuum(alpha: Complex64, cutoff: usize) -> Result<Self> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(invalid("alpha", "must be finite"));
        }
        let alpha_sq = alpha.norm_sqr();
        if cutoff == 0 || alpha_sq > cutoff as f64 / 2.0 {
            return Err(Error::TruncationRejected { alpha_sq, cutoff });
        }
        let dim = cutoff + 1;
        let mut psi = vec![ZERO; dim * dim];
        let mut amp = Complex64::new((-alpha_sq / 2.0).exp(), 0.0);
        let mut kept = 0.0;
        for n in 0..dim {
            if n > 0 {
                amp *= alpha / (n as f64).sqrt();
            }
            psi[n * dim] = amp;
            kept += amp.norm_sqr();
        }
        Ok(TruncatedState {
            cutoff,
            band: 2 * cutoff,
            repr: Repr::Pure(psi),
            deficit: (1.0 - kept).max(0.0),
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: f64) -> Self {
        self.budget = budget;
        self
    }

    /// Drop coherences between sectors whose `n_a - n_b` differ by more than `max_offset`.
    /// Moments of total order up to `max_offset` are unaffected.
    pub fn with_coherence_band(mut self, max_offset: usize) -> Self {
        self.band = max_offset.min(2 * self.cutoff);
        if let Repr::Mixed(blocks) = &mut self.repr {
            blocks.truncate(self.band + 1);
        }
        self
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Probability lost to truncation so far.
    pub fn trace_deficit(&self) -> f64 {
        self.deficit
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Pure(psi) => psi.iter().map(|x| x.norm_sqr()).sum(),
            Repr::Mixed(blocks) => blocks[0].iter().map(|b| b.diag().iter().map(|x| x.re).sum::<f64>()).sum(),
        }
    }

    fn dim(&self) -> usize {
        self.cutoff + 1
    }

    fn check_budget(self) -> Result<Self> {
        if self.deficit > self.budget {
            Err(Error::TruncationOverflow { deficit: self.deficit, budget: self.budget, cutoff: self.cutoff })
        } else {
            Ok(self)
        }
    }

    /// Conjugation by `exp(xi a^dag b^dag - xi^* a b)` with `xi = g e^{i theta}`.
    pub fn two_mode_squeeze(mut self, g: f64, theta: f64) -> Result<Self> {
        if !(g.is_finite() && g >= 0.0) {
            return Err(invalid("g", format!("must be finite and non-negative, got {g}")));
        }
        if !theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        if g == 0.0 {
            return Ok(self);
        }
        let cutoff = self.cutoff;
        let props = squeeze_blocks(g, cutoff);
        let phase: Vec<Complex64> = (0..=cutoff).map(|j| Complex64::from_polar(1.0, theta * j as f64)).collect();
        let before = self.trace();
        match &mut self.repr {
            Repr::Pure(psi) => squeeze_vector(psi, cutoff, &props, &phase),
            Repr::Mixed(blocks) => {
                for (o, row) in blocks.iter_mut().enumerate() {
                    for (i, block) in row.iter_mut().enumerate() {
                        let (left, right) = (Sector::from_index(i + o, cutoff), Sector::from_index(i, cutoff));
                        if block.iter().all(|x| x.norm() < NEGLIGIBLE) {
                            block.fill(ZERO);
                            continue;
                        }
                        squeeze_block(
                            block,
                            props.block(left.d.unsigned_abs()),
                            props.block(right.d.unsigned_abs()),
                            &phase,
                        );
                    }
                }
            }
        }
        self.deficit += (before - self.trace()).max(0.0);
        self.check_budget()
    }

    /// Conjugation by `exp(i phi n_a)`.
    pub fn phase_shift_a(mut self, phi: f64) -> Self {
        let dim = self.dim();
        let cutoff = self.cutoff;
        let phases: Vec<Complex64> = (0..dim).map(|n| Complex64::from_polar(1.0, phi * n as f64)).collect();
        match &mut self.repr {
            Repr::Pure(psi) => {
                for (na, row) in psi.chunks_mut(dim).enumerate() {
                    for x in row {
                        *x *= phases[na];
                    }
                }
            }
            Repr::Mixed(blocks) => {
                for (o, row) in blocks.iter_mut().enumerate() {
                    for (i, block) in row.iter_mut().enumerate() {
                        let (left, right) = (Sector::from_index(i + o, cutoff), Sector::from_index(i, cutoff));
                        for ((j, k), x) in block.indexed_iter_mut() {
                            *x *= phases[left.occupations(j).0] * phases[right.occupations(k).0].conj();
                        }
                    }
                }
            }
        }
        self
    }

    fn into_blocks(self) -> Vec<Vec<Array2<Complex64>>> {
        let cutoff = self.cutoff;
        let dim = self.dim();
        match self.repr {
            Repr::Mixed(blocks) => blocks,
            Repr::Pure(psi) => {
                let parts: Vec<Vec<Complex64>> = (0..2 * cutoff + 1)
                    .map(|s| {
                        let sec = Sector::from_index(s, cutoff);
                        (0..sec.len)
                            .map(|j| {
                                let (na, nb) = sec.occupations(j);
                                psi[na * dim + nb]
                            })
                            .collect()
                    })
                    .collect();
                (0..=self.band)
                    .map(|o| {
                        (o..2 * cutoff + 1)
                            .map(|s| {
                                let (u, v) = (&parts[s], &parts[s - o]);
                                Array2::from_shape_fn((u.len(), v.len()), |(j, k)| u[j] * v[k].conj())
                            })
                            .collect()
                    })
                    .collect()
            }
        }
    }

    /// Amplitude damping of one mode keeping a fraction `eta` of the energy.
    pub fn amplitude_damp(self, mode: Mode, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid("eta", format!("must lie in [0, 1], got {eta}")));
        }
        if eta == 1.0 {
            return Ok(self);
        }
        let cutoff = self.cutoff;
        let dim = self.dim();
        let kraus = damping_table(dim, eta);
        let (band, deficit, budget) = (self.band, self.deficit, self.budget);
        let old = self.into_blocks();

        let mut new: Vec<Vec<Array2<Complex64>>> =
            old.iter().map(|row| row.iter().map(|b| Array2::zeros(b.raw_dim())).collect()).collect();
        for (o, row) in old.iter().enumerate() {
            for (i, block) in row.iter().enumerate() {
                let (left, right) = (Sector::from_index(i + o, cutoff), Sector::from_index(i, cutoff));
                for ((j, k), &x) in block.indexed_iter() {
                    if x.norm() < NEGLIGIBLE {
                        continue;
                    }
                    let (la, lb) = left.occupations(j);
                    let (ra, rb) = right.occupations(k);
                    let (ln, rn) = match mode {
                        Mode::A => (la, ra),
                        Mode::B => (lb, rb),
                    };
                    for q in 0..=ln.min(rn) {
                        let c = kraus[ln * dim + q] * kraus[rn * dim + q];
                        let ((ls, lj), (rs, rj)) = match mode {
                            Mode::A => (locate(la - q, lb, cutoff), locate(ra - q, rb, cutoff)),
                            Mode::B => (locate(la, lb - q, cutoff), locate(ra, rb - q, cutoff)),
                        };
                        debug_assert_eq!(ls - rs, o);
                        new[o][rs][[lj, rj]] += x * c;
                    }
                }
            }
        }
        Ok(TruncatedState { cutoff, band, repr: Repr::Mixed(new), deficit, budget })
    }

    /// Element `<x| rho |y>`, `None` outside the retained band.
    fn element(&self, x: (usize, usize), y: (usize, usize)) -> Option<Complex64> {
        match &self.repr {
            Repr::Pure(psi) => {
                let dim = self.dim();
                Some(psi[x.0 * dim + x.1] * psi[y.0 * dim + y.1].conj())
            }
            Repr::Mixed(blocks) => {
                let (sx, jx) = locate(x.0, x.1, self.cutoff);
                let (sy, jy) = locate(y.0, y.1, self.cutoff);
                if sx >= sy {
                    blocks.get(sx - sy).map(|row| row[sy][[jx, jy]])
                } else {
                    blocks.get(sy - sx).map(|row| row[sx][[jy, jx]].conj())
                }
            }
        }
    }

    /// Dense density matrix over the `(cutoff + 1)^2` basis, index `n_a * (cutoff + 1) + n_b`.
    /// `None` when coherences have been dropped.
    pub fn density_matrix(&self) -> Option<Array2<Complex64>> {
        if !self.is_pure() && self.band < 2 * self.cutoff {
            return None;
        }
        let dim = self.dim();
        let mut rho = Array2::zeros((dim * dim, dim * dim));
        for x in 0..dim * dim {
            for y in 0..dim * dim {
                rho[[x, y]] = self.element((x / dim, x % dim), (y / dim, y % dim))?;
            }
        }
        Some(rho)
    }

    /// Moments up to second order; needs a coherence band of at least 2.
    pub fn moments(&self) -> FockMoments {
        let dim = self.dim();
        let sq: Vec<f64> = (0..=dim).map(|n| (n as f64).sqrt()).collect();
        let mut m = FockMoments::default();
        let mut tr = 0.0;
        let rho = |x, y| self.element(x, y).unwrap_or(ZERO);
        for na in 0..dim {
            for nb in 0..dim {
                let p = rho((na, nb), (na, nb)).re;
                let (fa, fb) = (na as f64, nb as f64);
                tr += p;
                m.n_a += fa * p;
                m.n_a_sq += fa * fa * p;
                m.n_b += fb * p;
                m.n_b_sq += fb * fb * p;
                m.n_a_n_b += fa * fb * p;
                // <O> = sum_{x,y} rho[x, y] <y|O|x>
                if na >= 1 {
                    m.a += rho((na, nb), (na - 1, nb)) * sq[na];
                    if nb >= 1 {
                        m.ab += rho((na, nb), (na - 1, nb - 1)) * (sq[na] * sq[nb]);
                    }
                    if nb + 1 < dim {
                        m.a_bdag += rho((na, nb), (na - 1, nb + 1)) * (sq[na] * sq[nb + 1]);
                    }
                }
                if na >= 2 {
                    m.a_sq += rho((na, nb), (na - 2, nb)) * (sq[na] * sq[na - 1]);
                }
                if nb >= 1 {
                    m.b += rho((na, nb), (na, nb - 1)) * sq[nb];
                }
                if nb >= 2 {
                    m.b_sq += rho((na, nb), (na, nb - 2)) * (sq[nb] * sq[nb - 1]);
                }
            }
        }
        if tr > 0.0 {
            let inv = 1.0 / tr;
            for c in [&mut m.a, &mut m.a_sq, &mut m.b, &mut m.b_sq, &mut m.ab, &mut m.a_bdag] {
                *c *= inv;
            }
            for r in [&mut m.n_a, &mut m.n_a_sq, &mut m.n_b, &mut m.n_b_sq, &mut m.n_a_n_b] {
                *r *= inv;
            }
        }
        m
    }
}

// row n, column k: sqrt(C(n, k) (1 - eta)^k eta^(n - k)), built in log space
fn damping_table(dim: usize, eta: f64) -> Vec<f64> {
    let mut ln_fact = vec![0.0f64; dim];
    for n in 1..dim {
        ln_fact[n] = ln_fact[n - 1] + (n as f64).ln();
    }
    let mut t = vec![0.0; dim * dim];
    for n in 0..dim {
        for k in 0..=n {
            let lost = if k == 0 { 0.0 } else { k as f64 * (1.0 - eta).ln() };
            let kept = if n == k {
                0.0
            } else if eta == 0.0 {
                f64::NEG_INFINITY
            } else {
                (n - k) as f64 * eta.ln()
            };
            let ln_c = ln_fact[n] - ln_fact[k] - ln_fact[n - k];
            t[n * dim + k] = (0.5 * (ln_c + lost + kept)).exp();
        }
    }
    t
}

/// Propagators of `exp(g (a^dag b^dag - a b))` restricted to each sector, computed
/// lazily. Entry `[j, k]` of sector `|d|` maps the `k`-th state to the `j`-th.
pub(crate) struct SqueezeBlocks {
    g: f64,
    cutoff: usize,
    blocks: Vec<OnceLock<Array2<f64>>>,
}

impl SqueezeBlocks {
    fn block(&self, abs_d: usize) -> &Array2<f64> {
        self.blocks[abs_d].get_or_init(|| sector_propagator(self.g, self.cutoff, abs_d))
    }
}

/// Extra levels simulated past the cutoff so that amplitude leaving the retained space
/// is lost rather than reflected back into it.
fn padding(g: f64, cutoff: usize) -> usize {
    let per_level = -(g.tanh().ln());
    let by_gain = if per_level > 0.0 { (36.0 / per_level).ceil() } else { f64::INFINITY };
    (by_gain.min(256.0) as usize).max(16).max(cutoff / 4)
}

pub(crate) fn sector_propagator(g: f64, cutoff: usize, abs_d: usize) -> Array2<f64> {
    let n = cutoff - abs_d + 1;
    let m = n + padding(g, cutoff);
    let mut gen = Array2::<f64>::zeros((m, m));
    for j in 0..m - 1 {
        let w = g * (((j + abs_d + 1) * (j + 1)) as f64).sqrt();
        gen[[j + 1, j]] = w;
        gen[[j, j + 1]] = -w;
    }
    expm(&gen).slice(s![..n, ..n]).to_owned()
}

const CACHE_CAPACITY: usize = 64;

type SqueezeCache = Mutex<HashMap<(u64, usize), Arc<SqueezeBlocks>>>;

fn squeeze_blocks(g: f64, cutoff: usize) -> Arc<SqueezeBlocks> {
    static CACHE: OnceLock<SqueezeCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    if map.len() >= CACHE_CAPACITY && !map.contains_key(&(g.to_bits(), cutoff)) {
        map.clear();
    }
    map.entry((g.to_bits(), cutoff))
        .or_insert_with(|| {
            Arc::new(SqueezeBlocks { g, cutoff, blocks: (0..=cutoff).map(|_| OnceLock::new()).collect() })
        })
        .clone()
}

// the phase theta enters as U = P O P^dag with P = diag(e^{i j theta})
fn squeeze_vector(psi: &mut [Complex64], cutoff: usize, props: &SqueezeBlocks, phase: &[Complex64]) {
    let dim = cutoff + 1;
    let mut gathered = vec![ZERO; dim];
    let mut result = vec![ZERO; dim];
    for s in 0..2 * cutoff + 1 {
        let sec = Sector::from_index(s, cutoff);
        let index = |j: usize| {
            let (na, nb) = sec.occupations(j);
            na * dim + nb
        };
        let mut occupied = false;
        for k in 0..sec.len {
            let x = psi[index(k)];
            occupied |= x.norm() >= NEGLIGIBLE;
            gathered[k] = x * phase[k].conj();
        }
        if !occupied {
            for k in 0..sec.len {
                psi[index(k)] = ZERO;
            }
            continue;
        }
        let block = props.block(sec.d.unsigned_abs());
        for j in 0..sec.len {
            let mut acc = ZERO;
            for (k, &o) in block.row(j).iter().enumerate() {
                acc += gathered[k] * o;
            }
            result[j] = acc * phase[j];
        }
        for j in 0..sec.len {
            psi[index(j)] = result[j];
        }
    }
}

fn squeeze_block(block: &mut Array2<Complex64>, left: &Array2<f64>, right: &Array2<f64>, phase: &[Complex64]) {
    let (n, m) = block.dim();
    let inner = |(j, k): (usize, usize)| block[[j, k]] * phase[j].conj() * phase[k];
    let re = Array2::from_shape_fn((n, m), |jk| inner(jk).re);
    let im = Array2::from_shape_fn((n, m), |jk| inner(jk).im);
    let re = left.dot(&re).dot(&right.t());
    let im = left.dot(&im).dot(&right.t());
    for ((j, k), x) in block.indexed_iter_mut() {
        *x = Complex64::new(re[[j, k]], im[[j, k]]) * phase[j] * phase[k].conj();
    }
}
