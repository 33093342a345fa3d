//! Raster evaluation of the capillarity energy and its exchange-move increment.

use rayon::prelude::*;

use super::CapillaryProblem;
use crate::error::{Error, Result};
use crate::geometry::interaction::{grid_pair_sum, pairwise_sum};
use crate::geometry::pv::{region_integral, PlanarKernel};
use crate::geometry::{KernelTable, Mask, QuadratureParams, RegionSpec};

/// Cells this close (in cells) to the raster edge average the exterior
/// integral over sub-cell points instead of using the cell centre.
const EDGE_BAND: usize = 2;

/// Precomputed per-cell data for one problem.
///
/// With `w` the cell-pair weight of `K₁`, the energy of `E` is
/// `∑_{x∈E} (Q(x) − P(x) + L(x))` where `Q(x) = ∑_{y∈Ω} w(x−y)`,
/// `P(x) = ∑_{y∈E} w(x−y)` and `L(x) = σ V₂(x) + h² g(x)` with
/// `V₂(x) = ∫_{cell x} ∫_{Ω^c} K₂`.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    pub(crate) omega: Mask,
    pub(crate) h: f64,
    pub(crate) sigma: f64,
    pub(crate) m: usize,
    pub(crate) table: KernelTable,
    /// Flat raster index of each `Ω` cell; cells are addressed by their
    /// position in this list ("local" index).
    pub(crate) flat: Vec<usize>,
    pub(crate) xy: Vec<(i64, i64)>,
    local: Vec<usize>,
    pub(crate) q: Vec<f64>,
    v2: Vec<f64>,
    g: Vec<f64>,
    pub(crate) l: Vec<f64>,
}

impl EnergyModel {
    pub fn new(p: &CapillaryProblem) -> Result<Self> {
        Self::with_params(p, &QuadratureParams::default())
    }

    /// Uses `q.subdivision` for near cell pairs and `q.tol` for the exterior
    /// integrals; the cell size always comes from the domain.
    pub fn with_params(p: &CapillaryProblem, q: &QuadratureParams) -> Result<Self> {
        q.validate()?;
        let d = &p.domain;
        let (w, hgt, h) = (d.width(), d.height(), d.h);
        let omega = d.omega.clone();
        let flat = omega.indices();
        let mut local = vec![usize::MAX; omega.len()];
        for (k, &f) in flat.iter().enumerate() {
            local[f] = k;
        }
        let xy: Vec<(i64, i64)> = flat
            .iter()
            .map(|&f| ((f % w) as i64, (f / w) as i64))
            .collect();
        let table = KernelTable::new(&p.k1, h, w, hgt, q.subdivision)?;
        let q_vals: Vec<f64> = xy
            .par_iter()
            .map(|&(x, y)| xy.iter().map(|&(u, v)| table.get(u - x, v - y)).sum())
            .collect();
        let v2 = if p.sigma != 0.0 {
            exterior_profile(p, &xy, q)?
        } else {
            vec![0.0; flat.len()]
        };
        let g: Vec<f64> = flat.iter().map(|&f| d.g[f]).collect();
        let h2 = h * h;
        let l = v2
            .iter()
            .zip(&g)
            .map(|(v, gv)| p.sigma * v + h2 * gv)
            .collect();
        Ok(Self {
            omega,
            h,
            sigma: p.sigma,
            m: p.m,
            table,
            flat,
            xy,
            local,
            q: q_vals,
            v2,
            g,
            l,
        })
    }

    pub fn omega(&self) -> &Mask {
        &self.omega
    }

    pub fn volume(&self) -> usize {
        self.m
    }

    pub fn cell_count(&self) -> usize {
        self.flat.len()
    }

    /// `V₂(x)` for the cell with flat index `idx`.
    pub fn exterior_weight(&self, idx: usize) -> Option<f64> {
        self.local
            .get(idx)
            .filter(|&&k| k != usize::MAX)
            .map(|&k| self.v2[k])
    }

    pub(crate) fn local_of(&self, idx: usize) -> Option<usize> {
        self.local.get(idx).copied().filter(|&k| k != usize::MAX)
    }

    #[inline]
    pub(crate) fn w(&self, a: usize, b: usize) -> f64 {
        let (ax, ay) = self.xy[a];
        let (bx, by) = self.xy[b];
        self.table.get(bx - ax, by - ay)
    }

    fn check_subset(&self, e: &Mask) -> Result<()> {
        if !e.same_shape(&self.omega) {
            return Err(Error::Invalid(
                "mask shape differs from the container".into(),
            ));
        }
        if !e.is_subset_of(&self.omega) {
            return Err(Error::Invalid(
                "set is not contained in the container".into(),
            ));
        }
        Ok(())
    }

    fn check_volume(&self, e: &Mask) -> Result<()> {
        self.check_subset(e)?;
        let c = e.count();
        if c != self.m {
            return Err(Error::Invalid(format!(
                "droplet has {c} cells, expected {}",
                self.m
            )));
        }
        Ok(())
    }

    /// `I₁(F, Ω∖F) + σ' I₂(F, Ω^c) + [h² ∑_F g]` for any `F ⊆ Ω`.
    pub fn functional(&self, f: &Mask, sigma: f64, with_g: bool) -> Result<f64> {
        self.check_subset(f)?;
        let inside = f.indices();
        let rest = self.omega.minus(f).indices();
        let i1 = grid_pair_sum(&self.table, self.omega.width(), &inside, &rest);
        let h2 = self.h * self.h;
        let cell: Vec<f64> = inside
            .iter()
            .map(|&i| {
                let k = self.local[i];
                sigma * self.v2[k] + if with_g { h2 * self.g[k] } else { 0.0 }
            })
            .collect();
        Ok(i1 + pairwise_sum(&cell))
    }

    /// `C(E)`; requires `E ⊆ Ω` and `|E| = m`.
    pub fn energy(&self, e: &Mask) -> Result<f64> {
        self.check_volume(e)?;
        self.functional(e, self.sigma, true)
    }

    /// `I₂(Ω, Ω^c)` of the raster model.
    pub fn container_exterior(&self) -> f64 {
        pairwise_sum(&self.v2)
    }

    /// `C(E') − C(E)` for `E' = E ∖ {out} ∪ {inn}` (flat indices), with
    /// `O(N)` table lookups.
    pub fn delta(&self, e: &Mask, out: usize, inn: usize) -> Result<f64> {
        self.check_volume(e)?;
        let a = self
            .local_of(out)
            .ok_or_else(|| Error::Invalid(format!("cell {out} is outside the container")))?;
        let b = self
            .local_of(inn)
            .ok_or_else(|| Error::Invalid(format!("cell {inn} is outside the container")))?;
        if !e.cells()[out] {
            return Err(Error::Invalid(format!("cell {out} is not in the droplet")));
        }
        if e.cells()[inn] {
            return Err(Error::Invalid(format!(
                "cell {inn} is already in the droplet"
            )));
        }
        let (mut pa, mut pb) = (0.0, 0.0);
        for (k, &f) in self.flat.iter().enumerate() {
            if e.cells()[f] {
                pa += self.w(a, k);
                pb += self.w(b, k);
            }
        }
        Ok(self.swap_delta(a, b, pa, pb))
    }

    /// Exchange increment from the interaction sums `P(a)`, `P(b)` with the
    /// current droplet (local indices).
    #[inline]
    pub(crate) fn swap_delta(&self, a: usize, b: usize, pa: f64, pb: f64) -> f64 {
        self.q[b] - self.q[a] + 2.0 * (pa - pb) + 2.0 * self.w(a, b) + self.l[b] - self.l[a]
    }

    /// `(C_σ(Ω∖F), C_{−σ}(F) + σ I₂(Ω, Ω^c), defect)` with `g := 0`.
    pub fn duality(&self, f: &Mask) -> Result<(f64, f64, f64)> {
        self.check_subset(f)?;
        let rest = self.omega.minus(f);
        let lhs = self.functional(&rest, self.sigma, false)?;
        let rhs = self.functional(f, -self.sigma, false)? + self.sigma * self.container_exterior();
        Ok((lhs, rhs, (lhs - rhs).abs()))
    }
}

/// `V₂` for every `Ω` cell: raster cells outside `Ω` through the `K₂` table,
/// plus the exact integral over the outside of the raster rectangle.
fn exterior_profile(
    p: &CapillaryProblem,
    xy: &[(i64, i64)],
    q: &QuadratureParams,
) -> Result<Vec<f64>> {
    let d = &p.domain;
    let (w, hgt, h) = (d.width(), d.height(), d.h);
    let t2 = KernelTable::new(&p.k2, h, w, hgt, q.subdivision)?;
    let holes: Vec<(i64, i64)> = d
        .omega
        .not()
        .indices()
        .iter()
        .map(|&f| ((f % w) as i64, (f / w) as i64))
        .collect();
    let outside = RegionSpec::rect([0.0, 0.0], [w as f64 * h, hgt as f64 * h])?.complement();
    let pk = PlanarKernel::from_spec(&p.k2)?;
    let opts = q.pv_options();
    let sub = q.subdivision.max(1);
    xy.par_iter()
        .map(|&(x, y)| {
            let raster: f64 = holes.iter().map(|&(u, v)| t2.get(u - x, v - y)).sum();
            let (xu, yu) = (x as usize, y as usize);
            let near = xu.min(w - 1 - xu) < EDGE_BAND || yu.min(hgt - 1 - yu) < EDGE_BAND;
            let n = if near { sub } else { 1 };
            let mut acc = 0.0;
            for k in 0..n * n {
                let px = h * (x as f64 + ((k % n) as f64 + 0.5) / n as f64);
                let py = h * (y as f64 + ((k / n) as f64 + 0.5) / n as f64);
                acc += region_integral([px, py], &outside, &pk, &opts)?;
            }
            Ok(raster + h * h * acc / (n * n) as f64)
        })
        .collect()
}

/// `C(E)` for a droplet mask; builds the per-cell tables on every call, so
/// repeated evaluations should go through [`EnergyModel`].
pub fn energy_eval(p: &CapillaryProblem, e: &Mask) -> Result<f64> {
    p.check_mask(e)?;
    EnergyModel::new(p)?.energy(e)
}

/// `C(E') − C(E)` for moving cell `out` (flat index, in `E`) to `inn`.
pub fn delta_energy(p: &CapillaryProblem, e: &Mask, out: usize, inn: usize) -> Result<f64> {
    EnergyModel::new(p)?.delta(e, out, inn)
}

/// `(lhs, rhs, defect)` of `C_σ(Ω∖F) = C_{−σ}(F) + σ I₂(Ω, Ω^c)` at `g = 0`.
pub fn complement_duality_check(p: &CapillaryProblem, f: &Mask) -> Result<(f64, f64, f64)> {
    EnergyModel::new(p)?.duality(f)
}

/// Number of `k`-subsets of `n` items, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Brute-force minimum over every admissible droplet; refuses problems with
/// more than `limit` configurations. Ties keep the lexicographically first mask.
pub fn exhaustive_minimum(model: &EnergyModel, limit: u128) -> Result<(Mask, f64)> {
    let n = model.cell_count();
    let m = model.volume();
    let total = binomial(n, m);
    if total > limit {
        return Err(Error::Invalid(format!(
            "{total} configurations exceed the limit {limit}"
        )));
    }
    let mut pick: Vec<usize> = (0..m).collect();
    let mut best: Option<(Mask, f64)> = None;
    loop {
        let mut e = Mask::new(model.omega.width(), model.omega.height());
        for &k in &pick {
            e.cells_mut()[model.flat[k]] = true;
        }
        let v = model.energy(&e)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((e, v));
        }
        // next combination in lexicographic order
        let mut i = m;
        while i > 0 && pick[i - 1] == n - m + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        pick[i - 1] += 1;
        for j in i..m {
            pick[j] = pick[j - 1] + 1;
        }
    }
    Ok(best.expect("at least one configuration"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::droplet::GridDomain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(w: usize, h: usize, sigma: f64, m: usize) -> CapillaryProblem {
        CapillaryProblem::isotropic(GridDomain::square(w, h).unwrap(), 0.5, 0.5, sigma, m).unwrap()
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(16, 2), 120);
        assert_eq!(binomial(36, 35), 36);
        assert_eq!(binomial(5, 0), 1);
    }

    #[test]
    fn block_beats_scattered_cells() {
        let p = problem(8, 8, 0.0, 4);
        let model = EnergyModel::new(&p).unwrap();
        let block = Mask::from_fn(8, 8, |i, j| (3..5).contains(&i) && (3..5).contains(&j));
        let scattered = Mask::from_fn(8, 8, |i, j| (i == 1 || i == 6) && (j == 1 || j == 6));
        let eb = model.energy(&block).unwrap();
        let es = model.energy(&scattered).unwrap();
        assert!(eb > 0.0 && eb < es);
    }

    #[test]
    fn constant_potential_shifts_by_volume() {
        let d = GridDomain::square(6, 6).unwrap();
        let h = d.h;
        let p0 = CapillaryProblem::isotropic(d.clone(), 0.4, 0.6, 0.3, 7).unwrap();
        let pg =
            CapillaryProblem::isotropic(d.with_g(|_, _| 2.5).unwrap(), 0.4, 0.6, 0.3, 7).unwrap();
        let (m0, mg) = (
            EnergyModel::new(&p0).unwrap(),
            EnergyModel::new(&pg).unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let mut e = Mask::new(6, 6);
            while e.count() < 7 {
                e.set(rng.gen_range(0..6), rng.gen_range(0..6), true);
            }
            let diff = mg.energy(&e).unwrap() - m0.energy(&e).unwrap();
            assert!((diff - 2.5 * 7.0 * h * h).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_matches_full_evaluation() {
        let p = problem(10, 8, 0.7, 20);
        let model = EnergyModel::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut e = Mask::new(10, 8);
        while e.count() < 20 {
            e.set(rng.gen_range(0..10), rng.gen_range(0..8), true);
        }
        for _ in 0..50 {
            let ins = e.indices();
            let outs = e.not().indices();
            let a = ins[rng.gen_range(0..ins.len())];
            let b = outs[rng.gen_range(0..outs.len())];
            let d = model.delta(&e, a, b).unwrap();
            let mut e2 = e.clone();
            e2.cells_mut()[a] = false;
            e2.cells_mut()[b] = true;
            let full = model.energy(&e2).unwrap() - model.energy(&e).unwrap();
            assert!((d - full).abs() <= 1e-9 * model.energy(&e).unwrap().abs());
            assert!(
                (model.delta(&e2, b, a).unwrap() + d).abs() <= 1e-12 * d.abs().max(1e-300) + 1e-15
            );
            e = e2;
        }
    }

    #[test]
    fn rejects_invalid_masks_and_moves() {
        let p = problem(4, 4, 0.0, 3);
        let model = EnergyModel::new(&p).unwrap();
        let e = Mask::from_fn(4, 4, |i, j| j == 0 && i < 3);
        assert!(model.energy(&Mask::from_fn(4, 4, |i, _| i == 0)).is_err());
        assert!(model.energy(&Mask::new(5, 4)).is_err());
        assert!(model.delta(&e, 5, 6).is_err());
        assert!(model.delta(&e, 0, 1).is_err());
    }

    #[test]
    fn duality_holds_on_random_masks() {
        for sigma in [-1.0, 0.5] {
            let p = problem(8, 8, sigma, 10);
            let model = EnergyModel::new(&p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let f = Mask::from_fn(8, 8, |_, _| rng.gen_bool(0.4));
            let (lhs, _, defect) = model.duality(&f).unwrap();
            assert!(defect <= 1e-9 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn exterior_weight_is_largest_at_corners() {
        let p = problem(8, 8, 1.0, 10);
        let model = EnergyModel::new(&p).unwrap();
        let corner = model.exterior_weight(0).unwrap();
        let edge = model.exterior_weight(3).unwrap();
        let centre = model.exterior_weight(8 * 4 + 4).unwrap();
        assert!(corner > edge && edge > centre && centre > 0.0);
    }

    #[test]
    fn exhaustive_finds_adjacent_pair() {
        let p = problem(4, 4, 0.0, 2);
        let model = EnergyModel::new(&p).unwrap();
        let (best, v) = exhaustive_minimum(&model, 2000).unwrap();
        let idx = best.indices();
        let (a, b) = (best.coords(idx[0]), best.coords(idx[1]));
        assert_eq!(a.0.abs_diff(b.0) + a.1.abs_diff(b.1), 1);
        assert!(v > 0.0);
        assert!(
            exhaustive_minimum(&EnergyModel::new(&problem(8, 8, 0.0, 10)).unwrap(), 2000).is_err()
        );
    }
}
