//! Generalized Schottky groups with one parabolic generator: validation of
//! the arc-disjointness condition, the Bowen-Series boundary map, and the
//! induced countable-alphabet coding.
//!
//! The induced alphabet consists of the hyperbolic letters `h` and the
//! collapsed parabolic blocks `gamma^l h` (`l >= 1`). A block symbol carries
//! cusp-winding weight `a1 = l - 1` and inducing time `tau = l + 1`; its
//! branch map is the composition `h ∘ gamma^l` and its cylinder arc is the
//! single pullback `gamma^{-l}(Delta(h))`, which the ping-pong inclusions
//! make exact. Parabolic powers use the closed form `I + l N` of a
//! trace-normalized parabolic matrix, so arbitrarily deep cusp excursions
//! cost O(1) each.

use crate::geometry::{angular_distance, Arc, GeometryError, MapClass, MobiusMap};

const INVERSE_TOL: f64 = 1e-10;
const PARABOLIC_CONTACT_TOL: f64 = 1e-9;
const MEMBERSHIP_TOL: f64 = 1e-12;
/// Iteration cap distinguishing conical points from parabolic-orbit points.
const PARABOLIC_RUN_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchottkyError {
    #[error("at least one hyperbolic generator pair is required")]
    NoHyperbolicPairs,
    #[error("generator in hyperbolic pair {pair} does not classify as hyperbolic")]
    NotHyperbolic { pair: usize },
    #[error("parabolic generator does not classify as parabolic")]
    NotParabolic,
    #[error("listed inverse of {which} is not the matrix inverse")]
    InverseMismatch { which: String },
    #[error("isometry arcs of generator pairs {i} and {j} are not disjoint")]
    ArcsOverlap { i: usize, j: usize },
    #[error("boundary angle {theta} lies in no isometry arc")]
    OutsideDomain { theta: f64 },
    #[error("orbit never leaves the parabolic arcs (parabolic fixed-point preimage)")]
    ParabolicTail,
    #[error("cylinder intersection is empty (inadmissible word or numeric failure)")]
    EmptyCylinder,
    #[error("distortion constant did not stabilize: K({half}) = {k_half}, K({full}) = {k_full}")]
    Unstable {
        half: u64,
        full: u64,
        k_half: f64,
        k_full: f64,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One of the `2n` hyperbolic generator letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HypLetter {
    pub pair: usize,
    pub inv: bool,
}

impl HypLetter {
    pub fn inverse(self) -> Self {
        Self {
            pair: self.pair,
            inv: !self.inv,
        }
    }

    /// Dense index in `0..2n`.
    pub fn index(self) -> usize {
        self.pair * 2 + usize::from(self.inv)
    }
}

/// A generator letter of the original (non-induced) alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    Hyp(HypLetter),
    Par { inv: bool },
}

/// A letter of the induced alphabet: a bare hyperbolic generator, or a
/// maximal parabolic run of length `power` capped by a hyperbolic letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Hyp(HypLetter),
    Par {
        inv: bool,
        power: u32,
        terminal: HypLetter,
    },
}

impl Symbol {
    /// Cusp-winding weight of the symbol.
    pub fn a1(&self) -> u64 {
        match self {
            Symbol::Hyp(_) => 0,
            Symbol::Par { power, .. } => u64::from(*power) - 1,
        }
    }

    /// Inducing time: number of Bowen-Series steps the symbol spans.
    pub fn tau(&self) -> u64 {
        match self {
            Symbol::Hyp(_) => 1,
            Symbol::Par { power, .. } => u64::from(*power) + 1,
        }
    }

    pub fn first_letter(&self) -> Letter {
        match self {
            Symbol::Hyp(h) => Letter::Hyp(*h),
            Symbol::Par { inv, .. } => Letter::Par { inv: *inv },
        }
    }

    pub fn last_letter(&self) -> HypLetter {
        match self {
            Symbol::Hyp(h) => *h,
            Symbol::Par { terminal, .. } => *terminal,
        }
    }
}

/// `true` when symbol `b` may follow symbol `a`: the first letter of `b`
/// must not cancel the terminal hyperbolic letter of `a`. Parabolic-headed
/// symbols follow everything.
pub fn admissible(a: &Symbol, b: &Symbol) -> bool {
    match b.first_letter() {
        Letter::Par { .. } => true,
        Letter::Hyp(h) => h != a.last_letter().inverse(),
    }
}

/// A finite induced word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub symbols: Vec<Symbol>,
}

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_admissible(&self) -> bool {
        self.symbols.windows(2).all(|w| admissible(&w[0], &w[1]))
    }

    pub fn a1_sum(&self) -> u64 {
        self.symbols.iter().map(Symbol::a1).sum()
    }
}

/// Interval enclosure of the Birkhoff sum of `log |f'|` over a cylinder,
/// together with the (exact) cusp-winding sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderBounds {
    pub log_deriv: (f64, f64),
    pub a1_sum: u64,
}

/// A validated generator system: hyperbolic pairs, the parabolic pair, their
/// isometry arcs, the parabolic fixed point and the reported gap/expansion
/// constants.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    hyp: Vec<(MobiusMap, MobiusMap)>,
    par: (MobiusMap, MobiusMap),
    hyp_arcs: Vec<(Arc, Arc)>,
    par_arcs: (Arc, Arc),
    parabolic_fixed_angle: f64,
    delta_gap: f64,
    expansion_lower: f64,
    expansion_upper: f64,
}

impl GeneratorSet {
    /// Checks the full Schottky predicate and assembles the system.
    pub fn validate_generators(
        hyp_pairs: Vec<(MobiusMap, MobiusMap)>,
        par_pair: (MobiusMap, MobiusMap),
    ) -> Result<Self, SchottkyError> {
        if hyp_pairs.is_empty() {
            return Err(SchottkyError::NoHyperbolicPairs);
        }
        for (i, (h, h_inv)) in hyp_pairs.iter().enumerate() {
            for g in [h, h_inv] {
                match g.classify() {
                    Ok(MapClass::Hyperbolic) => {}
                    _ => return Err(SchottkyError::NotHyperbolic { pair: i }),
                }
            }
            if !h.compose(h_inv).approx_eq(&MobiusMap::identity(), INVERSE_TOL) {
                return Err(SchottkyError::InverseMismatch {
                    which: format!("hyperbolic pair {i}"),
                });
            }
        }
        let (gam_raw, gam_inv_raw) = par_pair;
        for g in [&gam_raw, &gam_inv_raw] {
            match g.classify() {
                Ok(MapClass::Parabolic) => {}
                _ => return Err(SchottkyError::NotParabolic),
            }
        }
        if !gam_raw
            .compose(&gam_inv_raw)
            .approx_eq(&MobiusMap::identity(), INVERSE_TOL)
        {
            return Err(SchottkyError::InverseMismatch {
                which: "parabolic pair".to_string(),
            });
        }
        let gam = gam_raw.parabolic_normalized()?;
        let gam_inv = gam_inv_raw.parabolic_normalized()?;

        let hyp_arcs: Vec<(Arc, Arc)> = hyp_pairs
            .iter()
            .map(|(h, hi)| Ok((h.isometry_arc()?, hi.isometry_arc()?)))
            .collect::<Result<_, GeometryError>>()?;
        let par_arcs = (gam.isometry_arc()?, gam_inv.isometry_arc()?);

        let p = gam.fixed_points()?[0];
        let p_angle = p.arg().rem_euclid(std::f64::consts::TAU);
        if (gam.deriv_mod(p)? - 1.0).abs() > PARABOLIC_CONTACT_TOL {
            return Err(SchottkyError::NotParabolic);
        }
        // Both parabolic arcs must carry p as an endpoint and meet only there.
        for arc in [&par_arcs.0, &par_arcs.1] {
            let endpoint_dist = angular_distance(arc.start(), p_angle)
                .min(angular_distance(arc.end(), p_angle));
            if endpoint_dist > PARABOLIC_CONTACT_TOL {
                return Err(SchottkyError::NotParabolic);
            }
        }
        let n = hyp_pairs.len();
        if let Some(overlap) = par_arcs.0.intersect(&par_arcs.1) {
            if overlap.length() > PARABOLIC_CONTACT_TOL {
                return Err(SchottkyError::ArcsOverlap { i: n, j: n });
            }
        }

        // Pairwise disjointness across generator pairs (parabolic pair is
        // index n), plus disjointness inside each hyperbolic pair.
        let pair_arcs = |i: usize| -> [&Arc; 2] {
            if i < n {
                [&hyp_arcs[i].0, &hyp_arcs[i].1]
            } else {
                [&par_arcs.0, &par_arcs.1]
            }
        };
        let mut delta_gap = f64::INFINITY;
        for i in 0..=n {
            for j in (i + 1)..=n {
                for a in pair_arcs(i) {
                    for b in pair_arcs(j) {
                        let gap = a.gap_to(b);
                        if gap <= 0.0 {
                            return Err(SchottkyError::ArcsOverlap { i, j });
                        }
                        delta_gap = delta_gap.min(gap);
                    }
                }
            }
            if i < n {
                let gap = hyp_arcs[i].0.gap_to(&hyp_arcs[i].1);
                if gap <= 0.0 {
                    return Err(SchottkyError::ArcsOverlap { i, j: i });
                }
                delta_gap = delta_gap.min(gap);
            }
        }

        let mut set = Self {
            hyp: hyp_pairs,
            par: (gam, gam_inv),
            hyp_arcs,
            par_arcs,
            parabolic_fixed_angle: p_angle,
            delta_gap,
            expansion_lower: f64::NAN,
            expansion_upper: f64::NAN,
        };
        let (z, w) = set.expansion_bounds_over_two_cylinders();
        set.expansion_lower = z;
        set.expansion_upper = w;
        Ok(set)
    }

    /// Uniform expansion constants of the Bowen-Series map on the hyperbolic
    /// arcs, restricted to points with an admissible continuation (the
    /// two-cylinder union; bare arc endpoints have derivative exactly 1 and
    /// never meet the limit set).
    fn expansion_bounds_over_two_cylinders(&self) -> (f64, f64) {
        let mut z = f64::INFINITY;
        let mut w = 0.0f64;
        for le in self.hyp_letters() {
            let m = self.letter_map(Letter::Hyp(le));
            let arc = self.letter_arc(Letter::Hyp(le));
            w = w.max(m.deriv_mod_range(arc).1);
            let forbidden = Letter::Hyp(le.inverse());
            for next in self.all_letters() {
                if next == forbidden {
                    continue;
                }
                let sub = m
                    .pullback_arc(self.letter_arc(next))
                    .expect("boundary-preserving pullback");
                z = z.min(m.deriv_mod_range(&sub).0);
            }
        }
        (z, w)
    }

    /// Builds the standard test group: half-plane translation `w -> w + t`
    /// (parabolic, disc fixed point at angle 0) and a hyperbolic of
    /// multiplier `lambda` with half-plane fixed points at `-u` (attracting)
    /// and `u` (repelling), both conjugated to the disc.
    pub fn example_group(u: f64, t: f64, lambda: f64) -> Result<Self, SchottkyError> {
        Self::example_group_multi(1, u, t, lambda)
    }

    /// Variant with `k` hyperbolic pairs: copies of the base pair conjugated
    /// by disc rotations, fanned out symmetrically away from the cusp arcs.
    pub fn example_group_multi(
        k: usize,
        u: f64,
        t: f64,
        lambda: f64,
    ) -> Result<Self, SchottkyError> {
        if k == 0 {
            return Err(SchottkyError::NoHyperbolicPairs);
        }
        let gam = MobiusMap::from_half_plane(1.0, t, 0.0, 1.0)?;
        let gam_inv = MobiusMap::from_half_plane(1.0, -t, 0.0, 1.0)?;

        let mu = lambda.abs().sqrt();
        let diag = (mu + 1.0 / mu) / 2.0;
        let off = (mu - 1.0 / mu) / 2.0;
        let h = MobiusMap::from_half_plane(diag, -u * off, -off / u, diag);
        let h = match h {
            Ok(h) => h,
            Err(_) => return Err(SchottkyError::NotHyperbolic { pair: 0 }),
        };
        let h_inv = MobiusMap::from_half_plane(diag, u * off, off / u, diag)
            .map_err(|_| SchottkyError::NotHyperbolic { pair: 0 })?;

        let spread = 0.5;
        let mut pairs = Vec::with_capacity(k);
        for j in 0..k {
            let phi = (j as f64 - (k as f64 - 1.0) / 2.0) * spread;
            let rot = MobiusMap::rotation(phi);
            let rot_inv = rot.inverse();
            pairs.push((
                rot.compose(&h).compose(&rot_inv),
                rot.compose(&h_inv).compose(&rot_inv),
            ));
        }
        Self::validate_generators(pairs, (gam, gam_inv))
    }

    pub fn hyp_pair_count(&self) -> usize {
        self.hyp.len()
    }

    /// Number of hyperbolic letters, `2n`.
    pub fn hyp_letter_count(&self) -> usize {
        2 * self.hyp.len()
    }

    pub fn hyp_letters(&self) -> impl Iterator<Item = HypLetter> + '_ {
        (0..self.hyp.len()).flat_map(|pair| {
            [false, true]
                .into_iter()
                .map(move |inv| HypLetter { pair, inv })
        })
    }

    pub fn all_letters(&self) -> Vec<Letter> {
        let mut v: Vec<Letter> = self.hyp_letters().map(Letter::Hyp).collect();
        v.push(Letter::Par { inv: false });
        v.push(Letter::Par { inv: true });
        v
    }

    pub fn letter_map(&self, letter: Letter) -> &MobiusMap {
        match letter {
            Letter::Hyp(HypLetter { pair, inv: false }) => &self.hyp[pair].0,
            Letter::Hyp(HypLetter { pair, inv: true }) => &self.hyp[pair].1,
            Letter::Par { inv: false } => &self.par.0,
            Letter::Par { inv: true } => &self.par.1,
        }
    }

    pub fn letter_arc(&self, letter: Letter) -> &Arc {
        match letter {
            Letter::Hyp(HypLetter { pair, inv: false }) => &self.hyp_arcs[pair].0,
            Letter::Hyp(HypLetter { pair, inv: true }) => &self.hyp_arcs[pair].1,
            Letter::Par { inv: false } => &self.par_arcs.0,
            Letter::Par { inv: true } => &self.par_arcs.1,
        }
    }

    /// Boundary angle of the parabolic fixed point.
    pub fn parabolic_fixed_angle(&self) -> f64 {
        self.parabolic_fixed_angle
    }

    /// Minimal angular gap between distinct arc families.
    pub fn delta_gap(&self) -> f64 {
        self.delta_gap
    }

    /// Uniform bounds `Z <= |f'| <= W` on the hyperbolic arcs (coding-relevant part).
    pub fn expansion_bounds(&self) -> (f64, f64) {
        (self.expansion_lower, self.expansion_upper)
    }

    pub fn parabolic_power(&self, inv: bool, l: u64) -> MobiusMap {
        let g = if inv { &self.par.1 } else { &self.par.0 };
        g.parabolic_power(l)
            .expect("validated parabolic generator has the closed-form power")
    }

    /// Branch map of an induced symbol (`h ∘ gamma^l` for block symbols).
    pub fn symbol_map(&self, sym: &Symbol) -> MobiusMap {
        match sym {
            Symbol::Hyp(h) => *self.letter_map(Letter::Hyp(*h)),
            Symbol::Par {
                inv,
                power,
                terminal,
            } => self
                .letter_map(Letter::Hyp(*terminal))
                .compose(&self.parabolic_power(*inv, u64::from(*power))),
        }
    }

    /// Exact cylinder arc of a single induced symbol.
    pub fn symbol_arc(&self, sym: &Symbol) -> Arc {
        match sym {
            Symbol::Hyp(h) => *self.letter_arc(Letter::Hyp(*h)),
            Symbol::Par {
                inv,
                power,
                terminal,
            } => {
                let pow = self.parabolic_power(*inv, u64::from(*power));
                pow.pullback_arc(self.letter_arc(Letter::Hyp(*terminal)))
                    .expect("pullback of a proper arc stays proper")
            }
        }
    }

    /// One Bowen-Series step: the unique generator whose arc contains the
    /// angle (tie at the parabolic fixed point broken toward `gamma`), and
    /// the image angle.
    pub fn bowen_series_step(&self, theta: f64) -> Result<(Letter, f64), SchottkyError> {
        let letter = self.locate(theta)?;
        let image = self.letter_map(letter).apply_angle(theta)?;
        Ok((letter, image))
    }

    fn locate(&self, theta: f64) -> Result<Letter, SchottkyError> {
        if angular_distance(theta, self.parabolic_fixed_angle) < MEMBERSHIP_TOL {
            return Ok(Letter::Par { inv: false });
        }
        let mut best: Option<(f64, Letter)> = None;
        for letter in self.all_letters() {
            let arc = self.letter_arc(letter);
            let excess = angular_distance(theta, arc.center()) - arc.halfwidth();
            if best.map_or(true, |(e, _)| excess < e) {
                best = Some((excess, letter));
            }
        }
        match best {
            Some((excess, letter)) if excess <= MEMBERSHIP_TOL => Ok(letter),
            _ => Err(SchottkyError::OutsideDomain { theta }),
        }
    }

    /// First `depth` induced symbols of the orbit of `theta`: maximal
    /// parabolic runs collapse with their terminal hyperbolic letter.
    pub fn encode(&self, theta: f64, depth: usize) -> Result<Word, SchottkyError> {
        let mut symbols = Vec::with_capacity(depth);
        let mut angle = theta;
        while symbols.len() < depth {
            let letter = self.locate(angle)?;
            match letter {
                Letter::Hyp(h) => {
                    angle = self.letter_map(letter).apply_angle(angle)?;
                    symbols.push(Symbol::Hyp(h));
                }
                Letter::Par { inv } => {
                    let mut power: u64 = 0;
                    loop {
                        angle = self.letter_map(Letter::Par { inv }).apply_angle(angle)?;
                        power += 1;
                        if power > PARABOLIC_RUN_CAP {
                            return Err(SchottkyError::ParabolicTail);
                        }
                        match self.locate(angle)? {
                            Letter::Par { inv: next_inv } if next_inv == inv => continue,
                            Letter::Par { .. } => return Err(SchottkyError::ParabolicTail),
                            Letter::Hyp(h) => {
                                angle = self.letter_map(Letter::Hyp(h)).apply_angle(angle)?;
                                symbols.push(Symbol::Par {
                                    inv,
                                    power: power as u32,
                                    terminal: h,
                                });
                                break;
                            }
                        }
                    }
                }
            }
        }
        Ok(Word::new(symbols))
    }

    /// Cylinder arc of an induced word, by right-to-left pullbacks through
    /// the branch maps, intersecting with each symbol's own cylinder.
    pub fn cylinder_arc(&self, word: &Word) -> Result<Arc, SchottkyError> {
        let last = word.symbols.last().ok_or(SchottkyError::EmptyCylinder)?;
        let mut arc = self.symbol_arc(last);
        for sym in word.symbols.iter().rev().skip(1) {
            let pulled = self.symbol_map(sym).pullback_arc(&arc)?;
            arc = pulled
                .intersect(&self.symbol_arc(sym))
                .ok_or(SchottkyError::EmptyCylinder)?;
        }
        Ok(arc)
    }

    /// Enclosure of the Birkhoff sum of `log |f'|` over the word's cylinder:
    /// per-position exact derivative ranges over the suffix cylinders.
    pub fn cylinder_bounds(&self, word: &Word) -> Result<CylinderBounds, SchottkyError> {
        if word.is_empty() {
            return Err(SchottkyError::EmptyCylinder);
        }
        let k = word.len();
        // Suffix cylinder arcs, right to left.
        let mut suffix_arcs = vec![self.symbol_arc(&word.symbols[k - 1])];
        for sym in word.symbols.iter().rev().skip(1) {
            let pulled = self.symbol_map(sym).pullback_arc(suffix_arcs.last().unwrap())?;
            let arc = pulled
                .intersect(&self.symbol_arc(sym))
                .ok_or(SchottkyError::EmptyCylinder)?;
            suffix_arcs.push(arc);
        }
        suffix_arcs.reverse();
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (sym, arc) in word.symbols.iter().zip(&suffix_arcs) {
            let (dmin, dmax) = self.symbol_map(sym).deriv_mod_range(arc);
            lo += dmin.ln();
            hi += dmax.ln();
        }
        Ok(CylinderBounds {
            log_deriv: (lo, hi),
            a1_sum: word.a1_sum(),
        })
    }

    /// Composed branch map of a word (equals the induced map iterated
    /// `word.len()` times on the word's cylinder).
    pub fn word_map(&self, word: &Word) -> MobiusMap {
        let mut m = MobiusMap::identity();
        for sym in &word.symbols {
            m = self.symbol_map(sym).compose(&m);
        }
        m
    }

    /// Smallest `K >= 1` with `l^2 / K^2 <= |(gamma^l)'| <= K^2 l^2` on every
    /// block cylinder with `l <= max_power`; errors when the estimate still
    /// drifts by more than 5% between `max_power / 2` and `max_power`.
    pub fn distortion_estimate(&self, max_power: u64) -> Result<f64, SchottkyError> {
        assert!(max_power >= 2, "need at least two powers to check stability");
        let mut k_sq = 1.0f64;
        let mut k_half = 1.0f64;
        for l in 1..=max_power {
            for inv in [false, true] {
                let pow = self.parabolic_power(inv, l);
                for h in self.hyp_letters() {
                    let cyl = self.symbol_arc(&Symbol::Par {
                        inv,
                        power: l as u32,
                        terminal: h,
                    });
                    let (dmin, dmax) = pow.deriv_mod_range(&cyl);
                    let lsq = (l * l) as f64;
                    k_sq = k_sq.max(dmax / lsq).max(lsq / dmin);
                }
            }
            if l == max_power / 2 {
                k_half = k_sq;
            }
        }
        let k_full = k_sq.sqrt();
        let k_half = k_half.sqrt();
        if k_full > 1.05 * k_half {
            return Err(SchottkyError::Unstable {
                half: max_power / 2,
                full: max_power,
                k_half,
                k_full,
            });
        }
        Ok(k_full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::wrap_angle;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{PI, TAU};

    fn defaults() -> GeneratorSet {
        GeneratorSet::example_group(1.0, 6.0, 9.0).unwrap()
    }

    fn h_letter() -> HypLetter {
        HypLetter {
            pair: 0,
            inv: false,
        }
    }

    #[test]
    fn default_group_validates_with_expected_geometry() {
        let g = defaults();
        assert!(g.parabolic_fixed_angle().min(TAU - g.parabolic_fixed_angle()) < 1e-9);
        // Gap between the cusp arc end arccos-derived positions.
        let expected_gap = (PI / 2.0 - (0.8f64).acos()) - 2.0 * (6.0 / 40.0f64.sqrt()).acos();
        assert!((g.delta_gap() - expected_gap).abs() < 1e-9, "{}", g.delta_gap());
        let (z, w) = g.expansion_bounds();
        assert!(z > 1.0, "Z = {z}");
        // max |h'| over its arc is (|a| + |b|)^2 = 9 for the base pair.
        assert!((w - 9.0).abs() < 1e-9);
    }

    #[test]
    fn overlap_and_classification_failures() {
        // Tiny parabolic strength makes the cusp arcs swallow the circle.
        match GeneratorSet::example_group(1.0, 0.01, 9.0) {
            Err(SchottkyError::ArcsOverlap { .. }) => {}
            other => panic!("expected ArcsOverlap, got {other:?}"),
        }
        // lambda = 1 degenerates the hyperbolic pair to the identity.
        match GeneratorSet::example_group(1.0, 6.0, 1.0) {
            Err(SchottkyError::NotHyperbolic { pair: 0 }) => {}
            other => panic!("expected NotHyperbolic, got {other:?}"),
        }
    }

    #[test]
    fn inverse_mismatch_detected() {
        let gam = MobiusMap::from_half_plane(1.0, 6.0, 0.0, 1.0).unwrap();
        let not_inverse = MobiusMap::from_half_plane(1.0, -5.0, 0.0, 1.0).unwrap();
        let mu = 3.0f64;
        let diag = (mu + 1.0 / mu) / 2.0;
        let off = (mu - 1.0 / mu) / 2.0;
        let h = MobiusMap::from_half_plane(diag, -off, -off, diag).unwrap();
        let h_inv = MobiusMap::from_half_plane(diag, off, off, diag).unwrap();
        match GeneratorSet::validate_generators(vec![(h, h_inv)], (gam, not_inverse)) {
            Err(SchottkyError::InverseMismatch { .. }) => {}
            other => panic!("expected InverseMismatch, got {other:?}"),
        }
    }

    #[test]
    fn multi_pair_groups_validate() {
        for k in 1..=3 {
            let g = GeneratorSet::example_group_multi(k, 1.0, 6.0, 100.0).unwrap();
            assert_eq!(g.hyp_pair_count(), k);
            assert!(g.delta_gap() > 0.0);
        }
    }

    #[test]
    fn admissibility_rules() {
        let h = h_letter();
        let sym_h = Symbol::Hyp(h);
        let sym_h_inv = Symbol::Hyp(h.inverse());
        let par_then_h = Symbol::Par {
            inv: false,
            power: 3,
            terminal: h,
        };
        let par_neg = Symbol::Par {
            inv: true,
            power: 2,
            terminal: h,
        };
        assert!(!admissible(&sym_h, &sym_h_inv));
        assert!(!admissible(&par_then_h, &sym_h_inv));
        assert!(admissible(&sym_h, &par_neg));
        assert!(admissible(&sym_h, &sym_h));
    }

    #[test]
    fn symbol_weights_and_times() {
        let h = h_letter();
        assert_eq!(Symbol::Hyp(h).a1(), 0);
        assert_eq!(Symbol::Hyp(h).tau(), 1);
        let p = Symbol::Par {
            inv: false,
            power: 5,
            terminal: h,
        };
        assert_eq!(p.a1(), 4);
        assert_eq!(p.tau(), 6);
    }

    #[test]
    fn bowen_step_fixed_points_and_gaps() {
        let g = defaults();
        // The repelling fixed point of h lies in Delta(h) and is fixed by the step.
        let h_map = g.letter_map(Letter::Hyp(h_letter()));
        let fps = h_map.fixed_points().unwrap();
        let repelling = fps
            .iter()
            .copied()
            .find(|&z| h_map.deriv_mod(z).unwrap() > 1.0)
            .unwrap();
        let theta = wrap_angle(repelling.arg());
        let (letter, image) = g.bowen_series_step(theta).unwrap();
        assert_eq!(letter, Letter::Hyp(h_letter()));
        assert!(angular_distance(image, theta) < 1e-9);

        // Tie at the parabolic fixed point goes to gamma and stays put.
        let (letter, image) = g.bowen_series_step(g.parabolic_fixed_angle()).unwrap();
        assert_eq!(letter, Letter::Par { inv: false });
        assert!(angular_distance(image, g.parabolic_fixed_angle()) < 1e-9);

        // pi lies in the gap between arcs for the default group.
        match g.bowen_series_step(PI) {
            Err(SchottkyError::OutsideDomain { .. }) => {}
            other => panic!("expected OutsideDomain, got {other:?}"),
        }
    }

    #[test]
    fn encode_fixed_point_and_cusp() {
        let g = defaults();
        let h_map = g.letter_map(Letter::Hyp(h_letter()));
        let repelling = h_map
            .fixed_points()
            .unwrap()
            .into_iter()
            .find(|&z| h_map.deriv_mod(z).unwrap() > 1.0)
            .unwrap();
        let w = g.encode(wrap_angle(repelling.arg()), 3).unwrap();
        assert_eq!(w.symbols, vec![Symbol::Hyp(h_letter()); 3]);
        assert_eq!(w.a1_sum(), 0);

        match g.encode(g.parabolic_fixed_angle(), 1) {
            Err(SchottkyError::ParabolicTail) => {}
            other => panic!("expected ParabolicTail, got {other:?}"),
        }
    }

    #[test]
    fn encode_recovers_cylinder_midpoints() {
        let g = defaults();
        for inv in [false, true] {
            for power in [1u32, 2, 7] {
                for terminal in g.hyp_letters() {
                    let sym = Symbol::Par {
                        inv,
                        power,
                        terminal,
                    };
                    let arc = g.symbol_arc(&sym);
                    let w = g.encode(arc.center(), 1).unwrap();
                    assert_eq!(w.symbols, vec![sym]);
                }
            }
        }
    }

    #[test]
    fn block_cylinders_match_iterated_pullbacks() {
        let g = defaults();
        let h = h_letter();
        for inv in [false, true] {
            let gam = g.letter_map(Letter::Par { inv });
            let gam_arc = *g.letter_arc(Letter::Par { inv });
            for l in 1..=20u32 {
                // Oracle: iterate Delta(gamma) ∩ gamma^{-1}(...) l times.
                let mut arc = *g.letter_arc(Letter::Hyp(h));
                for _ in 0..l {
                    arc = gam
                        .pullback_arc(&arc)
                        .unwrap()
                        .intersect(&gam_arc)
                        .expect("nonempty block cylinder");
                }
                let fast = g.symbol_arc(&Symbol::Par {
                    inv,
                    power: l,
                    terminal: h,
                });
                assert!(
                    angular_distance(arc.center(), fast.center()) < 1e-8
                        && (arc.halfwidth() - fast.halfwidth()).abs() < 1e-8,
                    "l = {l}"
                );
            }
        }
    }

    #[test]
    fn block_cylinders_shrink_toward_cusp() {
        let g = defaults();
        let p = g.parabolic_fixed_angle();
        let mut last_dist = f64::INFINITY;
        let mut last_len = f64::INFINITY;
        for l in 1..=50u32 {
            let arc = g.symbol_arc(&Symbol::Par {
                inv: false,
                power: l,
                terminal: h_letter(),
            });
            let dist = angular_distance(arc.center(), p);
            assert!(dist < last_dist);
            assert!(arc.length() < last_len);
            last_dist = dist;
            last_len = arc.length();
        }
        // Centers close in on the cusp like 1/l, lengths like 1/l^2.
        assert!(last_dist < 0.01);
        assert!(last_len < 1e-4);
    }

    #[test]
    fn cylinder_arc_errors_on_inadmissible_words() {
        let g = defaults();
        let h = h_letter();
        let bad = Word::new(vec![Symbol::Hyp(h), Symbol::Hyp(h.inverse())]);
        assert!(!bad.is_admissible());
        match g.cylinder_arc(&bad) {
            Err(SchottkyError::EmptyCylinder) => {}
            other => panic!("expected EmptyCylinder, got {other:?}"),
        }
    }

    #[test]
    fn cylinder_containment_in_prefix() {
        let g = defaults();
        let h = h_letter();
        let w1 = Word::new(vec![Symbol::Hyp(h)]);
        let w2 = Word::new(vec![
            Symbol::Hyp(h),
            Symbol::Par {
                inv: true,
                power: 2,
                terminal: h,
            },
        ]);
        let a1 = g.cylinder_arc(&w1).unwrap();
        let a2 = g.cylinder_arc(&w2).unwrap();
        assert!(a1.contains_arc(&a2, 1e-10));
    }

    #[test]
    fn cylinder_bounds_brackets() {
        let g = defaults();
        let (z, w) = g.expansion_bounds();
        let h = h_letter();

        let hyp = g
            .cylinder_bounds(&Word::new(vec![Symbol::Hyp(h)]))
            .unwrap();
        assert!(hyp.log_deriv.0 >= -1e-12 && hyp.log_deriv.1 <= w.ln() + 1e-12);
        assert_eq!(hyp.a1_sum, 0);
        let _ = z;

        // Block symbols: log-derivative grows like 2 log l up to the
        // distortion constant.
        let k_hat = g.distortion_estimate(600).unwrap();
        let slack = 2.0 * k_hat.ln() + w.ln() + 1.0;
        for l in [1u32, 5, 20, 100] {
            let b = g
                .cylinder_bounds(&Word::new(vec![Symbol::Par {
                    inv: false,
                    power: l,
                    terminal: h,
                }]))
                .unwrap();
            let expect = 2.0 * f64::from(l).ln();
            assert!(b.log_deriv.0 >= expect - slack, "l={l}: {:?}", b.log_deriv);
            assert!(b.log_deriv.1 <= expect + slack, "l={l}: {:?}", b.log_deriv);
            assert_eq!(b.a1_sum, u64::from(l) - 1);
        }

        // Two-symbol word: the interval sits inside the sum of the
        // single-symbol intervals.
        let s1 = Symbol::Hyp(h);
        let s2 = Symbol::Par {
            inv: false,
            power: 3,
            terminal: h,
        };
        let b1 = g.cylinder_bounds(&Word::new(vec![s1])).unwrap();
        let b2 = g.cylinder_bounds(&Word::new(vec![s2])).unwrap();
        let b12 = g.cylinder_bounds(&Word::new(vec![s1, s2])).unwrap();
        assert!(b12.log_deriv.0 >= b1.log_deriv.0 + b2.log_deriv.0 - 1e-9);
        assert!(b12.log_deriv.1 <= b1.log_deriv.1 + b2.log_deriv.1 + 1e-9);
        assert_eq!(b12.a1_sum, 2);
    }

    #[test]
    fn uniform_expansion_of_induced_map() {
        // Bare arc endpoints carry derivative exactly 1 but never meet the
        // limit set; restrict each symbol to the part with an admissible
        // continuation, as the expansion bounds do.
        let g = defaults();
        let (z, _) = g.expansion_bounds();
        let mut symbols: Vec<Symbol> = g.hyp_letters().map(Symbol::Hyp).collect();
        for h in g.hyp_letters() {
            for inv in [false, true] {
                for l in 1..=30u32 {
                    symbols.push(Symbol::Par {
                        inv,
                        power: l,
                        terminal: h,
                    });
                }
            }
        }
        let mut min_log = f64::INFINITY;
        for x in &symbols {
            let m = g.symbol_map(x);
            for letter in g.all_letters() {
                if letter == Letter::Hyp(x.last_letter().inverse()) {
                    continue;
                }
                let sub = m.pullback_arc(g.letter_arc(letter)).unwrap();
                min_log = min_log.min(m.deriv_mod_range(&sub).0.ln());
            }
        }
        assert!(min_log > 0.0, "induced map not uniformly expanding: {min_log}");
        assert!(min_log >= z.ln() - 1e-9, "{min_log} vs log Z = {}", z.ln());
    }

    #[test]
    fn distortion_constants() {
        let g = defaults();
        let k_500 = g.distortion_estimate(500).unwrap();
        let k_1000 = g.distortion_estimate(1000).unwrap();
        assert!(k_1000 >= 1.0);
        let ratio = k_500 / k_1000;
        assert!(ratio > 0.95 && ratio < 1.05, "K(500)/K(1000) = {ratio}");

        // l = 1 block: |gamma'| >= 1 on the cylinder while the distortion
        // band [1/K^2, K^2] straddles 1.
        let cyl = g.symbol_arc(&Symbol::Par {
            inv: false,
            power: 1,
            terminal: h_letter(),
        });
        let (dmin, dmax) = g.parabolic_power(false, 1).deriv_mod_range(&cyl);
        assert!(dmin >= 1.0 - 1e-12);
        assert!(dmin >= 1.0 / (k_1000 * k_1000) && dmax <= k_1000 * k_1000);
    }

    fn random_coding_angle(g: &GeneratorSet, rng: &mut StdRng, depth: usize) -> Option<f64> {
        // Random angles in the coding domain that survive `depth` induced steps.
        for _ in 0..64 {
            let theta = rng.gen_range(0.0..TAU);
            if g.encode(theta, depth).is_ok() {
                return Some(theta);
            }
        }
        None
    }

    #[test]
    fn coding_matches_cylinders_and_shift() {
        let g = defaults();
        let mut rng = StdRng::seed_from_u64(42);
        let mut tested = 0;
        while tested < 100 {
            let Some(theta) = random_coding_angle(&g, &mut rng, 5) else {
                continue;
            };
            let w = g.encode(theta, 4).unwrap();
            assert!(w.is_admissible());
            // Geometry consistency: theta lies in the coded cylinder.
            let cyl = g.cylinder_arc(&w).unwrap();
            assert!(cyl.contains(theta, 1e-7), "theta {theta} outside {cyl:?}");
            // Shift compatibility: the first branch map sends theta onto a
            // point coded by the tail.
            let image = g
                .symbol_map(&w.symbols[0])
                .apply_angle(theta)
                .unwrap();
            let tail = g.encode(image, 3).unwrap();
            assert_eq!(tail.symbols[..], w.symbols[1..]);
            // a1 stationarity along the induced orbit.
            let mut angle = theta;
            for sym in &w.symbols {
                let step = g.encode(angle, 1).unwrap();
                assert_eq!(step.symbols[0].a1(), sym.a1());
                angle = g.symbol_map(sym).apply_angle(angle).unwrap();
            }
            tested += 1;
        }
    }

    #[test]
    fn length_two_cylinders_tile_disjointly() {
        let g = defaults();
        let mut symbols = Vec::new();
        for h in g.hyp_letters() {
            symbols.push(Symbol::Hyp(h));
            for inv in [false, true] {
                for l in 1..=5u32 {
                    symbols.push(Symbol::Par {
                        inv,
                        power: l,
                        terminal: h,
                    });
                }
            }
        }
        let mut arcs = Vec::new();
        for a in &symbols {
            for b in &symbols {
                if admissible(a, b) {
                    arcs.push(g.cylinder_arc(&Word::new(vec![*a, *b])).unwrap());
                }
            }
        }
        for (i, a) in arcs.iter().enumerate() {
            for b in &arcs[i + 1..] {
                if let Some(overlap) = a.intersect(b) {
                    assert!(overlap.length() < 1e-9, "cylinders overlap: {overlap:?}");
                }
            }
        }
    }
}
