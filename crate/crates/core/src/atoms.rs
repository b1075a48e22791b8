//! Constructive atomic decomposition of `H^1` functions: level sets of the
//! Peetre square function, half-measure cube selection, Whitney cubes, atoms
//! `b_W` with weights `gamma_{W,kappa}`, and the two stopping-time rules.
//!
//! Dyadic cubes are anchored to the grid. A cube of level `l` has side `2^l` in
//! box units; with spacing `h = 2^o` the cell exponent is `l - o`, ranging over
//! `0..=log2 n`.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{lp_norm, Field, GridSpec};
use crate::littlewood_paley::{peetre_square_function, BumpFamily};
use crate::maximal::{hl_max, map_lines, window_sum};
use crate::spectral::{forward_transform, inverse_transform};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    /// Side `2^level` in box units.
    pub level: i32,
    /// Lower corner divided by the side, per axis.
    pub coords: Vec<usize>,
}

impl DyadicCube {
    pub fn volume(&self) -> f64 {
        2f64.powi(self.level * self.coords.len() as i32)
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube { level: self.level + 1, coords: self.coords.iter().map(|c| c / 2).collect() }
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        if other.level > self.level || other.coords.len() != self.coords.len() {
            return false;
        }
        let shift = (self.level - other.level) as u32;
        other.coords.iter().zip(&self.coords).all(|(&c, &w)| c >> shift == w)
    }

    fn label(&self) -> String {
        self.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(":")
    }
}

/// Tunables of the level-set construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSystemOptions {
    /// `Omega~ = {M(chi_Omega) > threshold}`.
    pub threshold: f64,
    /// Whitney cubes satisfy `Dil_enlargement(W) ⊂ Omega~`.
    pub enlargement: f64,
}

impl Default for LevelSystemOptions {
    fn default() -> Self {
        Self { threshold: 100f64.powi(-6), enlargement: 20.0 }
    }
}

#[derive(Debug, Clone)]
pub struct KappaLevel {
    pub kappa: i32,
    /// `S_max(f) > 2^kappa`.
    pub omega: Vec<bool>,
    pub omega_tilde: Vec<bool>,
    /// Selected cubes `B_kappa^j`, indexed by cell exponent.
    pub selected: Vec<Vec<DyadicCube>>,
    pub whitney: Vec<DyadicCube>,
}

impl KappaLevel {
    fn measure(mask: &[bool], cell: f64) -> f64 {
        mask.iter().filter(|&&b| b).count() as f64 * cell
    }
}

#[derive(Debug, Clone)]
pub struct LevelSetSystem {
    grid: GridSpec,
    offset: i32,
    options: LevelSystemOptions,
    smax: Field,
    source: u64,
    levels: Vec<KappaLevel>,
}

impl LevelSetSystem {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `log2 h`, the level of a single cell.
    pub fn offset(&self) -> i32 {
        self.offset
    }

    pub fn options(&self) -> LevelSystemOptions {
        self.options
    }

    pub fn levels(&self) -> &[KappaLevel] {
        &self.levels
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn smax(&self) -> &Field {
        &self.smax
    }

    /// Clipped `(kappa_min, kappa_max)`, or `None` for an empty system.
    pub fn kappa_range(&self) -> Option<(i32, i32)> {
        Some((self.levels.first()?.kappa, self.levels.last()?.kappa))
    }

    pub fn omega_measure(&self, i: usize) -> f64 {
        KappaLevel::measure(&self.levels[i].omega, self.grid.cell_volume())
    }

    pub fn omega_tilde_measure(&self, i: usize) -> f64 {
        KappaLevel::measure(&self.levels[i].omega_tilde, self.grid.cell_volume())
    }
}

fn fingerprint(f: &Field) -> u64 {
    let mut h = DefaultHasher::new();
    f.grid().dim().hash(&mut h);
    f.grid().n().hash(&mut h);
    f.grid().box_length().to_bits().hash(&mut h);
    for v in f.values() {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

fn cell_offset(grid: &GridSpec) -> Result<i32> {
    let l = grid.spacing().log2();
    if l.fract() != 0.0 {
        return Err(Error::Config(format!("grid spacing {} is not a power of two", grid.spacing())));
    }
    Ok(l as i32)
}

fn check_family(grid: &GridSpec, fam: &BumpFamily, offset: i32) -> Result<()> {
    if fam.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let top = grid.n().trailing_zeros() as i32;
    if fam.j_min() < offset || fam.j_max() > offset + top {
        return Err(Error::Scales(format!(
            "scales {}..={} exceed the dyadic cube levels {}..={}",
            fam.j_min(),
            fam.j_max(),
            offset,
            offset + top
        )));
    }
    Ok(())
}

/// Counts of `mask` cells in every aligned dyadic cube, per cell exponent.
fn pooled_counts(grid: &GridSpec, mask: &[bool]) -> Vec<Vec<u32>> {
    let d = grid.dim();
    let top = grid.n().trailing_zeros();
    let mut out = vec![mask.iter().map(|&b| b as u32).collect::<Vec<u32>>()];
    let mut side = grid.n();
    for _ in 0..top {
        let half = side / 2;
        let fine = out.last().unwrap();
        let mut coarse = vec![0u32; half.pow(d as u32)];
        let mut idx = vec![0usize; d];
        for (flat, &c) in fine.iter().enumerate() {
            let mut rem = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rem % side;
                rem /= side;
            }
            let parent = idx.iter().fold(0, |acc, &i| acc * half + i / 2);
            coarse[parent] += c;
        }
        out.push(coarse);
        side = half;
    }
    out
}

fn unravel_side(mut flat: usize, side: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % side;
        flat /= side;
    }
}

/// Maximal dyadic cubes whose concentric enlargement lies inside `tilde`.
fn whitney_cubes(grid: &GridSpec, tilde: &[bool], enlargement: f64, offset: i32) -> Vec<DyadicCube> {
    let d = grid.dim();
    let n = grid.n();
    let top = n.trailing_zeros();
    let comp: Vec<f64> = tilde.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect();
    let total_comp: f64 = comp.iter().sum();
    let mut out = Vec::new();
    // covered[c] at the current level: some ancestor was chosen.
    let mut covered = vec![false; 1];
    let mut idx = vec![0usize; d];
    for e in (0..=top).rev() {
        let side_cells = 1usize << e;
        let cubes_per_axis = n >> e;
        if e < top {
            let parent_side = cubes_per_axis / 2;
            let mut next = vec![false; cubes_per_axis.pow(d as u32)];
            for (flat, slot) in next.iter_mut().enumerate() {
                unravel_side(flat, cubes_per_axis, &mut idx);
                let p = idx.iter().fold(0, |acc, &i| acc * parent_side + i / 2);
                *slot = covered[p];
            }
            covered = next;
        }
        let margin = ((enlargement - 1.0) / 2.0 * side_cells as f64).ceil().max(0.0) as usize;
        let span = side_cells + 2 * margin;
        let counts: Option<Vec<f64>> = if span >= n {
            None
        } else {
            let mut cur = comp.clone();
            for axis in 0..d {
                cur = map_lines(grid, &cur, axis, |line, o| {
                    window_sum(line, -(margin as isize), (side_cells + margin) as isize - 1, o)
                });
            }
            Some(cur)
        };
        for flat in 0..covered.len() {
            if covered[flat] {
                continue;
            }
            unravel_side(flat, cubes_per_axis, &mut idx);
            let outside = match &counts {
                None => total_comp,
                Some(c) => {
                    let corner: Vec<usize> = idx.iter().map(|&i| i * side_cells).collect();
                    c[grid.ravel(&corner)]
                }
            };
            if outside < 0.5 {
                covered[flat] = true;
                out.push(DyadicCube { level: e as i32 + offset, coords: idx.clone() });
            }
        }
    }
    out
}

pub fn build_level_system(f: &Field, fam: &BumpFamily) -> Result<LevelSetSystem> {
    build_level_system_with(f, fam, LevelSystemOptions::default())
}

pub fn build_level_system_with(f: &Field, fam: &BumpFamily, options: LevelSystemOptions) -> Result<LevelSetSystem> {
    let grid = *f.grid();
    let offset = cell_offset(&grid)?;
    check_family(&grid, fam, offset)?;
    let smax = peetre_square_function(f, fam)?;
    let mut sys = LevelSetSystem { grid, offset, options, smax, source: fingerprint(f), levels: Vec::new() };
    let top = sys.smax.max_value();
    if top <= 0.0 {
        return Ok(sys);
    }
    let min_pos = sys.smax.values().iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    // Lowest kept level is the largest one still covering every positive cell;
    // the first empty level is dropped.
    let kappa_lo = min_pos.log2().ceil() as i32 - 1;
    let kappa_hi = top.log2().ceil() as i32;
    let kappas: Vec<i32> = (kappa_lo..kappa_hi).collect();

    let levels: Vec<KappaLevel> = kappas
        .par_iter()
        .map(|&kappa| {
            let t = 2f64.powi(kappa);
            let omega: Vec<bool> = sys.smax.values().iter().map(|&v| v > t).collect();
            let chi = Field::from_parts(grid, omega.iter().map(|&b| b as u8 as f64).collect());
            let omega_tilde: Vec<bool> = hl_max(&chi).values().iter().map(|&v| v > options.threshold).collect();
            let whitney = whitney_cubes(&grid, &omega_tilde, options.enlargement, offset);
            KappaLevel { kappa, omega, omega_tilde, selected: Vec::new(), whitney }
        })
        .filter(|l| l.omega.iter().any(|&b| b))
        .collect();
    sys.levels = levels;
    select_cubes(&mut sys);
    Ok(sys)
}

/// Assigns each dyadic cube `R` to the unique `kappa` with
/// `|R ∩ Omega_kappa| >= |R|/2 > |R ∩ Omega_{kappa+1}|`.
fn select_cubes(sys: &mut LevelSetSystem) {
    let grid = sys.grid;
    let d = grid.dim();
    let top = grid.n().trailing_zeros() as usize;
    let counts: Vec<Vec<Vec<u32>>> = sys.levels.iter().map(|l| pooled_counts(&grid, &l.omega)).collect();
    for level in sys.levels.iter_mut() {
        level.selected = vec![Vec::new(); top + 1];
    }
    let mut idx = vec![0usize; d];
    for e in 0..=top {
        let volume = 1u64 << (e * d);
        let per_axis = grid.n() >> e;
        for flat in 0..per_axis.pow(d as u32) {
            let winner = (0..sys.levels.len()).rev().find(|&i| 2 * counts[i][e][flat] as u64 >= volume);
            if let Some(i) = winner {
                unravel_side(flat, per_axis, &mut idx);
                sys.levels[i].selected[e].push(DyadicCube { level: e as i32 + sys.offset, coords: idx.clone() });
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Atom {
    pub cube: DyadicCube,
    pub kappa: i32,
    /// `b_{W,j} = f_j restricted to the selected cubes of level j inside W`.
    pub pieces: Vec<(i32, Field)>,
    /// `b_W = sum_{j <= l(W)} phi_j * phi_j * b_{W,j}`.
    pub assembled: Field,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct AtomSet {
    pub atoms: Vec<Atom>,
    /// Selected cubes not contained in any Whitney cube of their level set.
    pub orphans: usize,
    pub offset: i32,
    pub enlargement: f64,
}

impl AtomSet {
    pub fn sum(&self, grid: &GridSpec) -> Field {
        let mut acc = vec![0.0; grid.len()];
        for a in &self.atoms {
            for (x, v) in acc.iter_mut().zip(a.assembled.values()) {
                *x += v;
            }
        }
        Field::from_parts(*grid, acc)
    }
}

fn cube_cells(grid: &GridSpec, cube: &DyadicCube, offset: i32) -> impl Iterator<Item = usize> {
    let grid = *grid;
    let d = grid.dim();
    let e = (cube.level - offset) as u32;
    let side = 1usize << e;
    let corner: Vec<usize> = cube.coords.iter().map(|&c| c * side).collect();
    let count = side.pow(d as u32);
    let mut idx = vec![0usize; d];
    (0..count).map(move |flat| {
        unravel_side(flat, side, &mut idx);
        for (i, c) in idx.iter_mut().zip(&corner) {
            *i += c;
        }
        grid.ravel(&idx)
    })
}

pub fn build_atoms(sys: &LevelSetSystem, f: &Field, fam: &BumpFamily) -> Result<AtomSet> {
    let grid = *f.grid();
    if sys.grid != grid || sys.source != fingerprint(f) {
        return Err(Error::Inconsistent);
    }
    let offset = sys.offset;
    check_family(&grid, fam, offset)?;
    let spectrum = forward_transform(f);
    let phis: HashMap<i32, Vec<f64>> = fam.scales().map(|j| (j, fam.phi_multiplier(j))).collect();
    let bands: HashMap<i32, Field> =
        fam.scales().map(|j| (j, inverse_transform(&spectrum.multiply(&phis[&j])))).collect();

    let per_level: Vec<(Vec<Atom>, usize)> = sys
        .levels
        .par_iter()
        .map(|level| {
            let index: HashMap<&DyadicCube, usize> =
                level.whitney.iter().enumerate().map(|(i, w)| (w, i)).collect();
            // (whitney index, scale) -> selected cubes
            let mut groups: HashMap<(usize, i32), Vec<&DyadicCube>> = HashMap::new();
            let mut orphans = 0;
            for cubes in &level.selected {
                for r in cubes {
                    let j = r.level;
                    if !phis.contains_key(&j) {
                        continue;
                    }
                    let mut probe = r.clone();
                    let top = offset + grid.n().trailing_zeros() as i32;
                    let owner = loop {
                        if let Some(&i) = index.get(&probe) {
                            break Some(i);
                        }
                        if probe.level >= top {
                            break None;
                        }
                        probe = probe.parent();
                    };
                    match owner {
                        Some(i) => groups.entry((i, j)).or_default().push(r),
                        None => orphans += 1,
                    }
                }
            }
            let mut by_cube: HashMap<usize, Vec<(i32, Vec<&DyadicCube>)>> = HashMap::new();
            for ((i, j), rs) in groups {
                by_cube.entry(i).or_default().push((j, rs));
            }
            let mut atoms: Vec<Atom> = by_cube
                .into_iter()
                .map(|(i, mut parts)| {
                    parts.sort_by_key(|p| p.0);
                    let mut pieces = Vec::with_capacity(parts.len());
                    let mut acc = vec![num_complex::Complex64::default(); grid.len()];
                    let mut energy = 0.0;
                    for (j, rs) in parts {
                        let band = &bands[&j];
                        let mut vals = vec![0.0; grid.len()];
                        for r in rs {
                            for c in cube_cells(&grid, r, offset) {
                                vals[c] = band.values()[c];
                            }
                        }
                        let piece = Field::from_parts(grid, vals);
                        energy += piece.values().iter().map(|v| v * v).sum::<f64>() * grid.cell_volume();
                        let phi = &phis[&j];
                        let s = forward_transform(&piece);
                        for ((a, c), m) in acc.iter_mut().zip(s.coeffs()).zip(phi) {
                            *a += c * (m * m);
                        }
                        pieces.push((j, piece));
                    }
                    let assembled = inverse_transform(&crate::spectral::SpectralField::new(grid, acc).unwrap());
                    Atom { cube: level.whitney[i].clone(), kappa: level.kappa, pieces, assembled, gamma: energy.sqrt() }
                })
                .collect();
            atoms.sort_by(|a, b| a.cube.cmp(&b.cube));
            (atoms, orphans)
        })
        .collect();

    let mut set = AtomSet { atoms: Vec::new(), orphans: 0, offset, enlargement: sys.options.enlargement };
    for (atoms, orphans) in per_level {
        set.atoms.extend(atoms);
        set.orphans += orphans;
    }
    Ok(set)
}

/// Mask of the concentric enlargement of `cube` on the torus.
pub fn enlarged_mask(grid: &GridSpec, cube: &DyadicCube, offset: i32, enlargement: f64) -> Vec<bool> {
    let n = grid.n();
    let side = 1usize << (cube.level - offset);
    let margin = ((enlargement - 1.0) / 2.0 * side as f64).ceil().max(0.0) as usize;
    if side + 2 * margin >= n {
        return vec![true; grid.len()];
    }
    let d = grid.dim();
    let mut idx = vec![0usize; d];
    (0..grid.len())
        .map(|flat| {
            grid.unravel(flat, &mut idx);
            idx.iter().zip(&cube.coords).all(|(&i, &c)| {
                let lo = (c * side) as isize - margin as isize;
                let rel = (i as isize - lo).rem_euclid(n as isize) as usize;
                rel < side + 2 * margin
            })
        })
        .collect()
}

/// Relative L^2 energy of `b_W` outside the enlargement of `W`.
pub fn support_tail(grid: &GridSpec, atom: &Atom, offset: i32, enlargement: f64) -> f64 {
    let mask = enlarged_mask(grid, &atom.cube, offset, enlargement);
    let total: f64 = atom.assembled.values().iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    let out: f64 = atom.assembled.values().iter().zip(&mask).filter(|(_, &m)| !m).map(|(v, _)| v * v).sum();
    (out / total).sqrt()
}

/// Number of cells where `b_{W,j}` is nonzero outside `W`, over all pieces.
pub fn piece_violations(grid: &GridSpec, atom: &Atom, offset: i32) -> usize {
    let mut inside = vec![false; grid.len()];
    for c in cube_cells(grid, &atom.cube, offset) {
        inside[c] = true;
    }
    atom.pieces
        .iter()
        .map(|(_, p)| p.values().iter().zip(&inside).filter(|(v, &m)| !m && **v != 0.0).count())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `2^{tau~ (d-1)} 2^{l(W)} >= X`, `tau = max(tau~, l(W))`.
    AnnulusThick,
    /// `2^{tau~ d} delta >= X`, `tau = max(tau~, l(W) + ceil(log2(1/delta)))`.
    AnnulusThin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoppingTime {
    /// `None` stands for minus infinity (the predicate holds for every integer).
    pub tau_tilde: Option<i32>,
    pub tau: i32,
}

fn predicate(regime: Regime, d: usize, level: i32, delta: f64, x: f64, t: i32) -> bool {
    match regime {
        Regime::AnnulusThick => 2f64.powi(t * (d as i32 - 1) + level) >= x,
        Regime::AnnulusThin => 2f64.powi(t * d as i32) * delta >= x,
    }
}

/// Smallest integer `t` with the regime predicate at `X = |W|^{1/2} gamma / lambda`.
pub fn stopping_time_raw(regime: Regime, d: usize, level: i32, gamma: f64, lambda: f64, delta: f64) -> Result<StoppingTime> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::Lambda(lambda));
    }
    if d < 2 {
        return Err(Error::Dimension(d));
    }
    if regime == Regime::AnnulusThin && !(delta > 0.0 && delta < 0.5) {
        return Err(Error::Delta(delta));
    }
    let floor = match regime {
        Regime::AnnulusThick => level,
        Regime::AnnulusThin => level + (1.0 / delta).log2().ceil() as i32,
    };
    if gamma == 0.0 {
        return Ok(StoppingTime { tau_tilde: None, tau: floor });
    }
    let volume_sqrt = 2f64.powf(level as f64 * d as f64 / 2.0);
    let x = volume_sqrt * gamma / lambda;
    let guess = match regime {
        Regime::AnnulusThick => (x.log2() - level as f64) / (d as f64 - 1.0),
        Regime::AnnulusThin => (x / delta).log2() / d as f64,
    };
    let mut t = guess.ceil() as i32;
    while predicate(regime, d, level, delta, x, t - 1) {
        t -= 1;
    }
    while !predicate(regime, d, level, delta, x, t) {
        t += 1;
    }
    Ok(StoppingTime { tau_tilde: Some(t), tau: t.max(floor) })
}

pub fn stopping_time(atom: &Atom, lambda: f64, delta: f64, regime: Regime) -> Result<StoppingTime> {
    stopping_time_raw(regime, atom.cube.coords.len(), atom.cube.level, atom.gamma, lambda, delta)
}

/// Checks `predicate(tau~) && !predicate(tau~ - 1)`.
pub fn stopping_time_is_minimal(atom: &Atom, lambda: f64, delta: f64, regime: Regime, st: StoppingTime) -> bool {
    let d = atom.cube.coords.len();
    let x = atom.cube.volume().sqrt() * atom.gamma / lambda;
    match st.tau_tilde {
        None => atom.gamma == 0.0,
        Some(t) => {
            predicate(regime, d, atom.cube.level, delta, x, t)
                && !predicate(regime, d, atom.cube.level, delta, x, t - 1)
        }
    }
}

/// Tolerance on the relative energy of `b_W` outside its enlarged cube. The
/// windows are compact in frequency, so spatial support is only approximate.
pub const SUPPORT_TAIL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub residual: f64,
    pub support_violations: usize,
    pub orphans: usize,
    pub atom_count: usize,
    pub h1_norm: f64,
    /// `sum_W |W|^{1/2} ||b_W||_2 / ||f||_{H^1}`.
    pub atom_norm_constant: f64,
    /// `sum_W |W|^{1/2} (sum_j ||b_{W,j}||_2^2)^{1/2} / ||f||_{H^1}`.
    pub piece_norm_constant: f64,
    pub max_support_tail: f64,
}

impl DecompositionReport {
    pub fn pass(&self) -> bool {
        self.residual <= 1e-6 && self.support_violations == 0
    }
}

pub fn verify_decomposition(atoms: &AtomSet, f: &Field, fam: &BumpFamily) -> Result<DecompositionReport> {
    let grid = *f.grid();
    let norm_f = lp_norm(f, 2.0)?;
    let total = atoms.sum(&grid);
    let residual = if norm_f == 0.0 { lp_norm(&total, 2.0)? } else { lp_norm(&f.sub(&total)?, 2.0)? / norm_f };
    let mut violations = 0;
    let mut max_tail: f64 = 0.0;
    let (mut s_atoms, mut s_pieces) = (0.0, 0.0);
    for a in &atoms.atoms {
        let tail = support_tail(&grid, a, atoms.offset, atoms.enlargement);
        max_tail = max_tail.max(tail);
        if tail > SUPPORT_TAIL_TOLERANCE {
            violations += 1;
        }
        violations += piece_violations(&grid, a, atoms.offset);
        let vol = a.cube.volume().sqrt();
        s_atoms += vol * lp_norm(&a.assembled, 2.0)?;
        s_pieces += vol * a.gamma;
    }
    let h1 = if norm_f == 0.0 { 0.0 } else { crate::littlewood_paley::h1_norm(f, fam)? };
    let ratio = |s: f64| if h1 > 0.0 { s / h1 } else { 0.0 };
    Ok(DecompositionReport {
        residual,
        support_violations: violations,
        orphans: atoms.orphans,
        atom_count: atoms.atoms.len(),
        h1_norm: h1,
        atom_norm_constant: ratio(s_atoms),
        piece_norm_constant: ratio(s_pieces),
        max_support_tail: max_tail,
    })
}

fn tau_label(t: Option<i32>) -> String {
    t.map_or_else(|| "-inf".to_string(), |t| t.to_string())
}

/// One CSV row per atom: kappa, level, cube_coords, gamma, tau_tilde_thick,
/// tau_thick, tau_tilde_thin, tau_thin, l2_bW, support_ok.
pub fn atom_report_csv(grid: &GridSpec, atoms: &AtomSet, lambda: f64, delta: f64) -> Result<String> {
    let mut out = String::from("kappa,level,cube_coords,gamma,tau_tilde_thick,tau_thick,tau_tilde_thin,tau_thin,l2_bW,support_ok\n");
    for a in &atoms.atoms {
        let thick = stopping_time(a, lambda, delta, Regime::AnnulusThick)?;
        let thin = stopping_time(a, lambda, delta, Regime::AnnulusThin)?;
        let ok = piece_violations(grid, a, atoms.offset) == 0
            && support_tail(grid, a, atoms.offset, atoms.enlargement) <= SUPPORT_TAIL_TOLERANCE;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            a.kappa,
            a.cube.level,
            a.cube.label(),
            a.gamma,
            tau_label(thick.tau_tilde),
            thick.tau,
            tau_label(thin.tau_tilde),
            thin.tau,
            lp_norm(&a.assembled, 2.0)?,
            ok
        )
        .unwrap();
    }
    Ok(out)
}
