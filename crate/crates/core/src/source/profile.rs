/// Conditional masses of `X^n` given one side-information value (or a type
/// class of values sharing the same multiset of masses), sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProfile {
    weight: f64,
    groups: Vec<MassGroup>,
    cum_count: Vec<u64>,
    cum_mass: Vec<f64>,
}

/// `count` tuples sharing conditional mass `mass` and information value `info = -ln mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassGroup {
    pub mass: f64,
    pub info: f64,
    pub count: u64,
}

impl ConditionalProfile {
    /// `weight` is the total side-information probability carried by this
    /// profile; `groups` yields `(mass, info, count)` in any order.
    pub fn new(weight: f64, groups: impl Iterator<Item = (f64, f64, u64)>) -> Self {
        let mut groups: Vec<MassGroup> = groups
            .filter(|g| g.2 > 0)
            .map(|(mass, info, count)| MassGroup { mass, info, count })
            .collect();
        groups.sort_by(|a, b| b.mass.total_cmp(&a.mass).then(a.info.total_cmp(&b.info)));
        // merge exact ties
        let mut merged: Vec<MassGroup> = Vec::with_capacity(groups.len());
        for g in groups {
            match merged.last_mut() {
                Some(last) if last.mass == g.mass && (last.info == g.info || g.mass == 0.0) => {
                    last.count += g.count
                }
                _ => merged.push(g),
            }
        }
        let mut cum_count = Vec::with_capacity(merged.len());
        let mut cum_mass = Vec::with_capacity(merged.len());
        let (mut c, mut m) = (0u64, 0.0f64);
        for g in &merged {
            c += g.count;
            m += g.count as f64 * g.mass;
            cum_count.push(c);
            cum_mass.push(m);
        }
        Self {
            weight,
            groups: merged,
            cum_count,
            cum_mass,
        }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn groups(&self) -> &[MassGroup] {
        &self.groups
    }

    /// Number of `x^n` tuples covered, `|X|^n`.
    pub fn total_count(&self) -> u64 {
        self.cum_count.last().copied().unwrap_or(0)
    }

    pub fn total_mass(&self) -> f64 {
        self.cum_mass.last().copied().unwrap_or(0.0)
    }

    /// Sum of the `k` largest conditional masses.
    pub fn top_mass(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let i = self.cum_count.partition_point(|&c| c < k);
        if i >= self.groups.len() {
            return self.total_mass();
        }
        let (before_c, before_m) = if i == 0 {
            (0, 0.0)
        } else {
            (self.cum_count[i - 1], self.cum_mass[i - 1])
        };
        if k == self.cum_count[i] {
            self.cum_mass[i]
        } else {
            before_m + (k - before_c) as f64 * self.groups[i].mass
        }
    }

    /// Number of tuples with conditional mass at least `threshold`.
    pub fn count_at_least(&self, threshold: f64) -> u64 {
        let j = self.groups.partition_point(|g| g.mass >= threshold);
        if j == 0 {
            0
        } else {
            self.cum_count[j - 1]
        }
    }

    /// `sum_{i <= m} |p_(i) - 1/m| + (1 - sum_{i <= m} p_(i))`: twice the
    /// distance contribution of the flat top-`m` family, per unit weight.
    pub fn flat_distance(&self, m: u64) -> f64 {
        let inv = 1.0 / m as f64;
        let top_m = self.top_mass(m);
        let a = self.count_at_least(inv).min(m);
        let top_a = self.top_mass(a);
        let above = top_a - a as f64 * inv;
        let below = (m - a) as f64 * inv - (top_m - top_a);
        above + below + (self.total_mass() - top_m)
    }
}
