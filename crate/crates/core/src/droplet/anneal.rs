//! Simulated annealing with volume-preserving exchange moves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::energy::EnergyModel;
use super::measure::{measure_contact_angle, ContactMeasurement, Wall};
use super::CapillaryProblem;
use crate::error::{Error, Result};
use crate::geometry::{Mask, QuadratureParams};

const NONE: usize = usize::MAX;

/// Annealing schedule. Temperatures are in energy units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Initial temperature; `None` uses `|C(E₀)| / (10 m)`.
    pub t0: Option<f64>,
    /// Geometric cooling factor per sweep.
    pub cooling: f64,
    pub sweeps: usize,
    /// Proposals per sweep; `None` uses `m`.
    pub moves_per_sweep: Option<usize>,
    pub seed: u64,
    /// Share of proposals drawn among boundary cells rather than uniformly.
    pub local_fraction: f64,
    /// Cap on full pair-scan passes of the zero-temperature phase.
    pub polish_passes: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            t0: None,
            cooling: 0.995,
            sweeps: 500,
            moves_per_sweep: None,
            seed: 0,
            local_fraction: 0.5,
            polish_passes: 50,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.t0 {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!(
                    "initial temperature must be finite and ≥ 0, got {t}"
                )));
            }
        }
        if !(self.cooling > 0.0 && self.cooling <= 1.0) {
            return Err(Error::Domain(format!(
                "cooling factor must lie in (0, 1], got {}",
                self.cooling
            )));
        }
        if !(0.0..=1.0).contains(&self.local_fraction) {
            return Err(Error::Domain(format!(
                "local fraction must lie in [0, 1], got {}",
                self.local_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeOptions {
    pub schedule: Schedule,
    /// Wall for the contact-angle measurement; also anchors the default
    /// starting droplet at its midpoint.
    pub wall: Option<Wall>,
    pub window: usize,
    /// Starting droplet; defaults to the `m` cells nearest the anchor.
    pub initial: Option<Mask>,
    pub quadrature: QuadratureParams,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            schedule: Schedule::default(),
            wall: None,
            window: 8,
            initial: None,
            quadrature: QuadratureParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeReport {
    pub final_mask: Mask,
    /// Full re-evaluation of `C` on `final_mask`.
    pub final_energy: f64,
    pub initial_energy: f64,
    /// `(proposal count, running energy)` at the end of every sweep and every
    /// zero-temperature pass.
    pub energy_trace: Vec<(usize, f64)>,
    /// Index into `energy_trace` of the first zero-temperature checkpoint.
    pub zero_temperature_from: usize,
    pub accepted_moves: usize,
    pub measured_angle: Option<f64>,
    pub contact: Option<ContactMeasurement>,
    /// Share of wall cells covered by the droplet: the declared wall if any,
    /// otherwise every `Ω` cell with a neighbour outside `Ω`.
    pub wall_contact_fraction: f64,
}

/// Anneals a droplet of volume `m`. Deterministic for a given seed.
pub fn minimize(p: &CapillaryProblem, opts: &MinimizeOptions) -> Result<MinimizeReport> {
    let model = EnergyModel::with_params(p, &opts.quadrature)?;
    minimize_with_model(&model, opts)
}

/// [`minimize`] on prebuilt tables.
pub fn minimize_with_model(model: &EnergyModel, opts: &MinimizeOptions) -> Result<MinimizeReport> {
    let sched = &opts.schedule;
    sched.validate()?;
    let start = match &opts.initial {
        Some(e) => e.clone(),
        None => default_start(model, opts.wall),
    };
    let initial_energy = model.energy(&start)?;
    let m = model.volume();
    let mut chain = Chain::new(model, &start);
    let mut rng = ChaCha8Rng::seed_from_u64(sched.seed);
    let t0 = sched.t0.unwrap_or(initial_energy.abs() / (10.0 * m as f64));
    let per_sweep = sched.moves_per_sweep.unwrap_or(m).max(1);

    let mut trace = vec![(0, chain.energy)];
    let mut best = (chain.energy, chain.mask.clone());
    let mut proposals = 0usize;
    let mut accepted = 0usize;
    let mut temp = t0;
    for _ in 0..sched.sweeps {
        if temp <= 0.0 {
            break;
        }
        for _ in 0..per_sweep {
            proposals += 1;
            let local = rng.gen::<f64>() < sched.local_fraction;
            let (a, b) = chain.propose(&mut rng, local);
            let d = chain.delta(a, b);
            if d <= 0.0 || rng.gen::<f64>() < (-d / temp).exp() {
                chain.apply(a, b, d);
                accepted += 1;
            }
        }
        trace.push((proposals, chain.energy));
        if chain.energy < best.0 {
            best = (chain.energy, chain.mask.clone());
        }
        temp *= sched.cooling;
    }

    // zero temperature: restart from the best state and accept only strict
    // improvements, scanning every exchange pair
    if chain.energy > best.0 {
        chain = Chain::new(model, &best.1);
    }
    let zero_from = trace.len();
    trace.push((proposals, chain.energy));
    for _ in 0..sched.polish_passes {
        let (improved, scanned) = chain.greedy_pass();
        proposals += scanned;
        accepted += improved;
        trace.push((proposals, chain.energy));
        if improved == 0 {
            break;
        }
    }

    let final_mask = chain.mask.clone();
    assert_eq!(final_mask.count(), m, "exchange moves preserve the volume");
    let final_energy = model.energy(&final_mask)?;
    let (contact, fraction) = match opts.wall {
        Some(w) => match measure_contact_angle(&final_mask, model.omega(), w, opts.window) {
            Ok(c) => {
                let f = c.contact_fraction;
                (Some(c), f)
            }
            Err(_) => (None, wall_fraction(&final_mask, model.omega(), Some(w))),
        },
        None => (None, wall_fraction(&final_mask, model.omega(), None)),
    };
    Ok(MinimizeReport {
        final_mask,
        final_energy,
        initial_energy,
        energy_trace: trace,
        zero_temperature_from: zero_from,
        accepted_moves: accepted,
        measured_angle: contact.as_ref().map(|c| c.angle),
        contact,
        wall_contact_fraction: fraction,
    })
}

/// The `m` container cells nearest the wall midpoint (or the container
/// centroid), ties broken by raster index.
fn default_start(model: &EnergyModel, wall: Option<Wall>) -> Mask {
    let om = model.omega();
    let (w, h) = (om.width() as f64, om.height() as f64);
    let anchor = match wall {
        Some(Wall::Bottom) => [w / 2.0, 0.0],
        Some(Wall::Top) => [w / 2.0, h],
        Some(Wall::Left) => [0.0, h / 2.0],
        Some(Wall::Right) => [w, h / 2.0],
        None => {
            let n = model.xy.len() as f64;
            let cx = model.xy.iter().map(|c| c.0 as f64 + 0.5).sum::<f64>() / n;
            let cy = model.xy.iter().map(|c| c.1 as f64 + 0.5).sum::<f64>() / n;
            [cx, cy]
        }
    };
    let mut order: Vec<(f64, usize)> = model
        .xy
        .iter()
        .zip(&model.flat)
        .map(|(&(x, y), &f)| {
            (
                (x as f64 + 0.5 - anchor[0]).hypot(y as f64 + 0.5 - anchor[1]),
                f,
            )
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut e = Mask::new(om.width(), om.height());
    for &(_, f) in order.iter().take(model.volume()) {
        e.cells_mut()[f] = true;
    }
    e
}

fn wall_fraction(e: &Mask, om: &Mask, wall: Option<Wall>) -> f64 {
    let (w, h) = (om.width(), om.height());
    let on_wall = |i: usize, j: usize| match wall {
        Some(Wall::Bottom) => j == 0,
        Some(Wall::Top) => j + 1 == h,
        Some(Wall::Left) => i == 0,
        Some(Wall::Right) => i + 1 == w,
        None => {
            let (ii, jj) = (i as i64, j as i64);
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| !om.get_signed(ii + dx, jj + dy))
        }
    };
    let (mut total, mut wet) = (0usize, 0usize);
    for j in 0..h {
        for i in 0..w {
            if om.get(i, j) && on_wall(i, j) {
                total += 1;
                wet += e.get(i, j) as usize;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        wet as f64 / total as f64
    }
}

/// Mutable annealing state in local (container-cell) indices.
struct Chain<'a> {
    model: &'a EnergyModel,
    mask: Mask,
    member: Vec<bool>,
    inside: Vec<usize>,
    outside: Vec<usize>,
    pos: Vec<usize>,
    /// `P(x) = ∑_{y∈E} w(x − y)` for every container cell.
    p: Vec<f64>,
    neighbours: Vec<[usize; 4]>,
    energy: f64,
}

impl<'a> Chain<'a> {
    fn new(model: &'a EnergyModel, e: &Mask) -> Self {
        let n = model.cell_count();
        let member: Vec<bool> = model.flat.iter().map(|&f| e.cells()[f]).collect();
        let (mut inside, mut outside, mut pos) = (Vec::new(), Vec::new(), vec![0; n]);
        for k in 0..n {
            let list = if member[k] { &mut inside } else { &mut outside };
            pos[k] = list.len();
            list.push(k);
        }
        let p: Vec<f64> = (0..n)
            .map(|x| inside.iter().map(|&y| model.w(x, y)).sum())
            .collect();
        let om = model.omega();
        let neighbours = model
            .xy
            .iter()
            .map(|&(x, y)| {
                let mut nb = [NONE; 4];
                for (slot, (dx, dy)) in [(1, 0), (-1, 0), (0, 1), (0, -1)].into_iter().enumerate() {
                    if om.get_signed(x + dx, y + dy) {
                        let f = om.index((x + dx) as usize, (y + dy) as usize);
                        nb[slot] = model.local_of(f).unwrap_or(NONE);
                    }
                }
                nb
            })
            .collect();
        let energy = model.energy(e).expect("chain starts from a valid droplet");
        Self {
            model,
            mask: e.clone(),
            member,
            inside,
            outside,
            pos,
            p,
            neighbours,
            energy,
        }
    }

    fn touches(&self, k: usize, want: bool) -> bool {
        self.neighbours[k]
            .iter()
            .any(|&nb| nb != NONE && self.member[nb] == want)
    }

    fn propose(&self, rng: &mut ChaCha8Rng, local: bool) -> (usize, usize) {
        let pick_in = |rng: &mut ChaCha8Rng| self.inside[rng.gen_range(0..self.inside.len())];
        let pick_out = |rng: &mut ChaCha8Rng| self.outside[rng.gen_range(0..self.outside.len())];
        if !local {
            return (pick_in(rng), pick_out(rng));
        }
        let mut a = pick_in(rng);
        for _ in 0..16 {
            if self.touches(a, false) {
                break;
            }
            a = pick_in(rng);
        }
        let mut b = pick_out(rng);
        for _ in 0..16 {
            if self.touches(b, true) {
                break;
            }
            b = pick_out(rng);
        }
        (a, b)
    }

    #[inline]
    fn delta(&self, a: usize, b: usize) -> f64 {
        self.model.swap_delta(a, b, self.p[a], self.p[b])
    }

    fn apply(&mut self, a: usize, b: usize, d: f64) {
        let (pa, pb) = (self.pos[a], self.pos[b]);
        self.inside[pa] = b;
        self.outside[pb] = a;
        self.pos[a] = pb;
        self.pos[b] = pa;
        self.member[a] = false;
        self.member[b] = true;
        self.mask.cells_mut()[self.model.flat[a]] = false;
        self.mask.cells_mut()[self.model.flat[b]] = true;
        for x in 0..self.p.len() {
            self.p[x] += self.model.w(x, b) - self.model.w(x, a);
        }
        self.energy += d;
        assert_eq!(self.inside.len(), self.model.volume());
    }

    /// One first-improvement scan over all exchange pairs; returns
    /// `(moves applied, pairs examined)`.
    fn greedy_pass(&mut self) -> (usize, usize) {
        let threshold = -1e-13 * self.energy.abs().max(f64::MIN_POSITIVE);
        let (mut moved, mut scanned) = (0, 0);
        let mut i = 0;
        while i < self.inside.len() {
            let a = self.inside[i];
            let mut best: Option<(usize, f64)> = None;
            for &b in &self.outside {
                scanned += 1;
                let d = self.delta(a, b);
                if d < threshold && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((b, d));
                }
            }
            if let Some((b, d)) = best {
                self.apply(a, b, d);
                moved += 1;
            }
            i += 1;
        }
        (moved, scanned)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::droplet::energy::exhaustive_minimum;
    use crate::droplet::GridDomain;

    fn quick(seed: u64) -> MinimizeOptions {
        MinimizeOptions {
            schedule: Schedule {
                sweeps: 200,
                seed,
                ..Schedule::default()
            },
            ..MinimizeOptions::default()
        }
    }

    #[test]
    fn tiny_problem_matches_exhaustive() {
        let p = CapillaryProblem::isotropic(GridDomain::square(4, 4).unwrap(), 0.5, 0.5, 0.0, 2)
            .unwrap();
        let model = EnergyModel::new(&p).unwrap();
        let (_, best) = exhaustive_minimum(&model, 2000).unwrap();
        let r = minimize_with_model(&model, &quick(1)).unwrap();
        assert!((r.final_energy - best).abs() <= 1e-12 * best);
        assert!(r.final_energy <= r.initial_energy);
    }

    #[test]
    fn deterministic_for_seed() {
        let p = CapillaryProblem::isotropic(GridDomain::square(8, 8).unwrap(), 0.5, 0.5, 0.4, 12)
            .unwrap();
        let model = EnergyModel::new(&p).unwrap();
        let a = minimize_with_model(&model, &quick(7)).unwrap();
        let b = minimize_with_model(&model, &quick(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_temperature_trace_is_monotone() {
        let p =
            CapillaryProblem::isotropic(GridDomain::square(10, 10).unwrap(), 0.3, 0.6, -0.5, 30)
                .unwrap();
        let model = EnergyModel::new(&p).unwrap();
        let r = minimize_with_model(&model, &quick(3)).unwrap();
        let tail = &r.energy_trace[r.zero_temperature_from..];
        assert!(tail.windows(2).all(|w| w[1].1 <= w[0].1));
        assert_eq!(r.final_mask.count(), 30);
        let drift = (tail.last().unwrap().1 - r.final_energy).abs();
        assert!(drift <= 1e-9 * r.final_energy.abs());
    }

    #[test]
    fn rejects_bad_schedule() {
        let p = CapillaryProblem::isotropic(GridDomain::square(4, 4).unwrap(), 0.5, 0.5, 0.0, 2)
            .unwrap();
        let mut o = quick(0);
        o.schedule.cooling = 1.5;
        assert!(minimize(&p, &o).is_err());
    }
}
