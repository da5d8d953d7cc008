//! Minkowski vector fields reduced to radially symmetric (t, r) grids.
//!
//! In spherical symmetry the rotations annihilate the field and the boosts
//! contract to K = r ∂_t + t ∂_r, so the grid alphabet is {S, K, ∂_t, ∂_r}
//! with S = t ∂_t + r ∂_r. Derivatives use centered second-order stencils;
//! each application invalidates one ring of the (t, r) window, marked NaN.

use crate::error::{Error, Result};
use crate::reports::InequalityReport;

/// One radial vector field of the reduced family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum VectorFieldId {
    /// Scaling t ∂_t + r ∂_r.
    S,
    /// Radial boost r ∂_t + t ∂_r (ω-contraction of Ω_{0i}).
    K,
    /// ∂_t.
    Dt,
    /// ∂_r.
    Dr,
}

pub const FIELD_ALPHABET: [VectorFieldId; 4] = [
    VectorFieldId::S,
    VectorFieldId::K,
    VectorFieldId::Dt,
    VectorFieldId::Dr,
];

/// Commutator constants of the family: [Z, □] = -C_Z □ with C_S = 2 and zero
/// otherwise, plus the first-order table [Z, ∂_α] = C_{Zα}^β ∂_β (α, β over
/// {t, r}).
#[derive(Debug, Clone, Copy)]
pub struct CommutatorTable {
    pub c_box: [f64; 4],
    pub first_order: [[[f64; 2]; 2]; 4],
}

impl CommutatorTable {
    pub fn c_z(&self, z: VectorFieldId) -> f64 {
        self.c_box[z as usize]
    }
}

pub fn commutator_table() -> CommutatorTable {
    let mut first_order = [[[0.0; 2]; 2]; 4];
    // [S, ∂_t] = -∂_t, [S, ∂_r] = -∂_r.
    first_order[VectorFieldId::S as usize][0][0] = -1.0;
    first_order[VectorFieldId::S as usize][1][1] = -1.0;
    // [K, ∂_t] = -∂_r, [K, ∂_r] = -∂_t.
    first_order[VectorFieldId::K as usize][0][1] = -1.0;
    first_order[VectorFieldId::K as usize][1][0] = -1.0;
    CommutatorTable {
        c_box: [2.0, 0.0, 0.0, 0.0],
        first_order,
    }
}

/// Field samples on a window of consecutive time levels over a uniform
/// r-grid. Invalid points are NaN; stencil arithmetic propagates them.
#[derive(Debug, Clone)]
pub struct GridField2D {
    levels: Vec<Vec<f64>>,
    pub dt: f64,
    pub dr: f64,
    /// Time of the middle level (level count is kept odd).
    pub t_center: f64,
    /// Radius of grid point 0.
    pub r_first: f64,
}

impl GridField2D {
    pub fn new(
        levels: Vec<Vec<f64>>,
        dt: f64,
        dr: f64,
        t_center: f64,
        r_first: f64,
    ) -> Result<Self> {
        if levels.is_empty() || levels.len() % 2 == 0 {
            return Err(Error::GridTooSmall(format!(
                "need an odd positive level count, got {}",
                levels.len()
            )));
        }
        let nr = levels[0].len();
        if nr < 8 {
            return Err(Error::GridTooSmall(format!("Nr = {nr} < 8")));
        }
        if levels.iter().any(|l| l.len() != nr) {
            return Err(Error::GridTooSmall("ragged level lengths".into()));
        }
        if !(dr > 0.0) || !(dt > 0.0) {
            return Err(Error::GridTooSmall(format!("dr = {dr}, dt = {dt}")));
        }
        Ok(GridField2D {
            levels,
            dt,
            dr,
            t_center,
            r_first,
        })
    }

    /// Sample an analytic f(t, r) on a (n_levels x nr) window.
    pub fn sample(
        f: impl Fn(f64, f64) -> f64,
        n_levels: usize,
        nr: usize,
        dt: f64,
        dr: f64,
        t_center: f64,
        r_first: f64,
    ) -> Result<Self> {
        let half = (n_levels / 2) as isize;
        let levels = (0..n_levels as isize)
            .map(|i| {
                let t = t_center + (i - half) as f64 * dt;
                (0..nr).map(|j| f(t, r_first + j as f64 * dr)).collect()
            })
            .collect();
        Self::new(levels, dt, dr, t_center, r_first)
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn nr(&self) -> usize {
        self.levels[0].len()
    }

    pub fn r_at(&self, j: usize) -> f64 {
        self.r_first + j as f64 * self.dr
    }

    pub fn t_at(&self, level: usize) -> f64 {
        let half = (self.levels.len() / 2) as isize;
        self.t_center + (level as isize - half) as f64 * self.dt
    }

    pub fn value(&self, level: usize, j: usize) -> f64 {
        self.levels[level][j]
    }

    /// Values of the middle level.
    pub fn center(&self) -> &[f64] {
        &self.levels[self.levels.len() / 2]
    }

    /// Apply one vector field by centered differences. The result loses the
    /// outermost time level on each side and one r point on each side (NaN).
    pub fn apply(&self, z: VectorFieldId) -> Result<GridField2D> {
        apply_field(self, z)
    }

    /// Drop outer time levels symmetrically down to `n` levels (same center).
    /// Lets one wide window serve several stencil depths.
    pub fn trim_levels(&self, n: usize) -> Result<GridField2D> {
        if n > self.levels.len() || n % 2 != self.levels.len() % 2 {
            return Err(Error::InsufficientWindow {
                needed: n,
                have: self.levels.len(),
            });
        }
        let skip = (self.levels.len() - n) / 2;
        GridField2D::new(
            self.levels[skip..skip + n].to_vec(),
            self.dt,
            self.dr,
            self.t_center,
            self.r_first,
        )
    }
}

/// Apply a vector field to a grid window with centered second-order stencils.
pub fn apply_field(f: &GridField2D, z: VectorFieldId) -> Result<GridField2D> {
    let n = f.n_levels();
    if n < 3 {
        return Err(Error::InsufficientWindow { needed: 3, have: n });
    }
    let nr = f.nr();
    let mut out = Vec::with_capacity(n - 2);
    for lvl in 1..n - 1 {
        let t = f.t_at(lvl);
        let mut row = vec![f64::NAN; nr];
        for j in 1..nr - 1 {
            let dtv = (f.value(lvl + 1, j) - f.value(lvl - 1, j)) / (2.0 * f.dt);
            let drv = (f.value(lvl, j + 1) - f.value(lvl, j - 1)) / (2.0 * f.dr);
            let r = f.r_at(j);
            row[j] = match z {
                VectorFieldId::S => t * dtv + r * drv,
                VectorFieldId::K => r * dtv + t * drv,
                VectorFieldId::Dt => dtv,
                VectorFieldId::Dr => drv,
            };
        }
        out.push(row);
    }
    GridField2D::new(out, f.dt, f.dr, f.t_center, f.r_first)
}

/// Apply an ordered word of vector fields, rightmost first. The supplier is
/// asked for a window wide enough that every nested time stencil is centered;
/// the valid margin shrinks by one ring per application.
pub fn apply_multi(
    supplier: &mut dyn FnMut(usize) -> Result<GridField2D>,
    word: &[VectorFieldId],
) -> Result<GridField2D> {
    let needed = (1 + 2 * word.len()).max(3);
    let mut field = supplier(needed)?;
    if field.n_levels() < needed {
        return Err(Error::InsufficientWindow {
            needed,
            have: field.n_levels(),
        });
    }
    for z in word.iter().rev() {
        field = apply_field(&field, *z)?;
    }
    Ok(field)
}

/// All ordered words over the 4-letter alphabet with length min..=max.
pub fn field_words(min_len: usize, max_len: usize) -> Vec<Vec<VectorFieldId>> {
    let mut words: Vec<Vec<VectorFieldId>> = vec![vec![]];
    let mut out = Vec::new();
    if min_len == 0 {
        out.push(vec![]);
    }
    for len in 1..=max_len {
        let mut next = Vec::with_capacity(words.len() * 4);
        for w in &words {
            for z in FIELD_ALPHABET {
                let mut v = w.clone();
                v.push(z);
                next.push(v);
            }
        }
        words = next;
        if len >= min_len {
            out.extend(words.iter().cloned());
        }
    }
    out
}

/// Words over the coordinate-derivative alphabet {Dt, Dr}.
pub fn partial_words(min_len: usize, max_len: usize) -> Vec<Vec<VectorFieldId>> {
    let alphabet = [VectorFieldId::Dt, VectorFieldId::Dr];
    let mut words: Vec<Vec<VectorFieldId>> = vec![vec![]];
    let mut out = Vec::new();
    if min_len == 0 {
        out.push(vec![]);
    }
    for len in 1..=max_len {
        let mut next = Vec::with_capacity(words.len() * 2);
        for w in &words {
            for z in alphabet {
                let mut v = w.clone();
                v.push(z);
                next.push(v);
            }
        }
        words = next;
        if len >= min_len {
            out.extend(words.iter().cloned());
        }
    }
    out
}

struct CenterRow {
    values: Vec<f64>,
}

fn center_of(
    supplier: &mut dyn FnMut(usize) -> Result<GridField2D>,
    word: &[VectorFieldId],
) -> Result<CenterRow> {
    let f = apply_multi(supplier, word)?;
    Ok(CenterRow {
        values: f.center().to_vec(),
    })
}

/// Measured constants for the tangential-derivative inequalities relating
/// ∂̄ = ∂_t + ∂_r (angular parts vanish radially), the full gradient, and
/// the vector fields. Returns one report per inequality; the reported
/// min_constant is the smallest C making the inequality hold on the window.
pub fn tangential_bound_report(
    supplier: &mut dyn FnMut(usize) -> Result<GridField2D>,
) -> Result<Vec<InequalityReport>> {
    let base = supplier(3)?;
    let t = base.t_center;
    let nr = base.nr();

    let dt_row = center_of(supplier, &[VectorFieldId::Dt])?;
    let dr_row = center_of(supplier, &[VectorFieldId::Dr])?;
    let z1: Vec<CenterRow> = field_words(1, 1)
        .iter()
        .map(|w| center_of(supplier, w))
        .collect::<Result<_>>()?;
    let z_le2: Vec<CenterRow> = field_words(0, 2)
        .iter()
        .map(|w| center_of(supplier, w))
        .collect::<Result<_>>()?;
    let d2: Vec<CenterRow> = partial_words(2, 2)
        .iter()
        .map(|w| center_of(supplier, w))
        .collect::<Result<_>>()?;

    let mut tan_z = InequalityReport::new("tanZ");
    let mut der_z = InequalityReport::new("derZ");
    let mut der_frame_1 = InequalityReport::new("derframeZ_k1");
    let mut der_frame_2 = InequalityReport::new("derframeZ_k2");

    let mut any_valid = false;
    for j in 0..nr {
        let r = base.r_at(j);
        let ft = dt_row.values[j];
        let fr = dr_row.values[j];
        if !ft.is_finite() || !fr.is_finite() {
            continue;
        }
        let z1_sum: f64 = z1.iter().map(|row| row.values[j].abs()).sum();
        let z2_sum: f64 = z_le2.iter().map(|row| row.values[j].abs()).sum();
        let d2_norm: f64 = {
            // |∂²f|² summed over the 2x2 coordinate Hessian.
            let s: f64 = d2.iter().map(|row| row.values[j] * row.values[j]).sum();
            s.sqrt()
        };
        if !z1_sum.is_finite() || !z2_sum.is_finite() || !d2_norm.is_finite() {
            continue;
        }
        any_valid = true;

        let grad = (ft * ft + fr * fr).sqrt();
        let tangential = (ft + fr).abs();
        let dq = 0.5 * (fr - ft);
        let weight_out = 1.0 + t + r;
        let weight_in = 1.0 + (t - r).abs();

        tan_z.push(t, weight_out * tangential + weight_in * grad, z1_sum);
        der_z.push(t, weight_out * grad, r.abs() * dq.abs() + z1_sum);
        der_frame_1.push(t, weight_in * grad, z1_sum + base.center()[j].abs());
        der_frame_2.push(t, weight_in * weight_in * d2_norm, z2_sum);
    }
    if !any_valid {
        return Err(Error::EmptyValidRegion(
            "no interior points with finite stencils".into(),
        ));
    }
    Ok(vec![tan_z, der_z, der_frame_1, der_frame_2])
}
