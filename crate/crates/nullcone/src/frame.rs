//! Exact algebra of the Minkowski null frame {L, L̄, S1, S2}.
//!
//! Contravariant tensors are stored; indices are lowered with the Minkowski
//! metric m = diag(-1, 1, 1, 1) throughout. All operations here are pure and
//! exact up to double-precision roundoff; the companion tests assert the
//! frame identities at 1e-12.

use crate::error::{Error, Result};

/// Tolerance for exact algebraic identities (double-precision headroom).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Spacetime vector, index 0 = time, geometric units (c = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub fn zero() -> Self {
        FourVector([0.0; 4])
    }

    /// Lower the index with the Minkowski metric: V_α = m_{αβ} V^β.
    pub fn lower(&self) -> [f64; 4] {
        [-self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    /// Minkowski inner product m(V, W) = m_{αβ} V^α W^β.
    pub fn minkowski_dot(&self, other: &FourVector) -> f64 {
        -self.0[0] * other.0[0]
            + self.0[1] * other.0[1]
            + self.0[2] * other.0[2]
            + self.0[3] * other.0[3]
    }

    pub fn scale(&self, s: f64) -> FourVector {
        FourVector([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }

    pub fn add(&self, other: &FourVector) -> FourVector {
        FourVector([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
            self.0[3] + other.0[3],
        ])
    }
}

/// Symmetric rank-2 contravariant tensor; 10 independent entries, symmetry
/// holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor4 {
    // Upper-triangle storage, row-major: (0,0),(0,1),(0,2),(0,3),(1,1),...,(3,3).
    entries: [f64; 10],
}

const SYM_IDX: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]];

impl SymTensor4 {
    pub fn zero() -> Self {
        SymTensor4 { entries: [0.0; 10] }
    }

    /// Minkowski metric m^{αβ} = diag(-1, 1, 1, 1).
    pub fn minkowski() -> Self {
        let mut t = Self::zero();
        t.set(0, 0, -1.0);
        t.set(1, 1, 1.0);
        t.set(2, 2, 1.0);
        t.set(3, 3, 1.0);
        t
    }

    /// Isotropic spatial tensor s·δ^{ij} with vanishing time components.
    pub fn spatial_isotropic(s: f64) -> Self {
        let mut t = Self::zero();
        t.set(1, 1, s);
        t.set(2, 2, s);
        t.set(3, 3, s);
        t
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[SYM_IDX[a][b]]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        self.entries[SYM_IDX[a][b]] = v;
    }

    pub fn add(&self, other: &SymTensor4) -> SymTensor4 {
        let mut e = [0.0; 10];
        for (i, v) in e.iter_mut().enumerate() {
            *v = self.entries[i] + other.entries[i];
        }
        SymTensor4 { entries: e }
    }

    pub fn sub(&self, other: &SymTensor4) -> SymTensor4 {
        let mut e = [0.0; 10];
        for (i, v) in e.iter_mut().enumerate() {
            *v = self.entries[i] - other.entries[i];
        }
        SymTensor4 { entries: e }
    }

    pub fn scale(&self, s: f64) -> SymTensor4 {
        let mut e = self.entries;
        for v in e.iter_mut() {
            *v *= s;
        }
        SymTensor4 { entries: e }
    }

    /// Symmetrized outer product ½(U^α V^β + V^α U^β) scaled by `s`.
    pub fn sym_outer(u: &FourVector, v: &FourVector, s: f64) -> SymTensor4 {
        let mut t = Self::zero();
        for a in 0..4 {
            for b in a..4 {
                t.set(a, b, s * 0.5 * (u.0[a] * v.0[b] + v.0[a] * u.0[b]));
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &SymTensor4) -> f64 {
        self.sub(other).max_abs()
    }

    /// Full contraction g^{αβ} h_{αβ} against a symmetric covariant table
    /// (e.g. a Hessian of second derivatives), no index lowering.
    pub fn contract_full(&self, h: &SymTensor4) -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += self.get(a, b) * h.get(a, b);
            }
        }
        s
    }
}

/// The Minkowski null frame at a direction ω: L = (1, ω), L̄ = (1, -ω) and an
/// orthonormal tangential pair S1, S2.
#[derive(Debug, Clone, Copy)]
pub struct NullFrame {
    pub omega: [f64; 3],
    pub l: FourVector,
    pub lbar: FourVector,
    pub s1: FourVector,
    pub s2: FourVector,
}

/// The ten frame components of a symmetric tensor at a direction ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullComponents {
    /// g^{LL}
    pub ll: f64,
    /// g^{LL̄}
    pub llbar: f64,
    /// g^{L̄L̄}
    pub lbarlbar: f64,
    /// g^{LA}, A = S1, S2
    pub la: [f64; 2],
    /// g^{L̄A}
    pub lbar_a: [f64; 2],
    /// g^{AB}, symmetric 2x2
    pub ab: [[f64; 2]; 2],
}

impl NullComponents {
    /// tr̄ g = δ_{AB} g^{AB}.
    pub fn trace_tangential(&self) -> f64 {
        self.ab[0][0] + self.ab[1][1]
    }
}

/// Decomposition g = -½(L₁ L̄ + L̄ L₁) + γ of a perturbed metric g = m + H.
#[derive(Debug, Clone, Copy)]
pub struct FrameDecomposition {
    pub l1: FourVector,
    pub gamma: SymTensor4,
    /// ℓ = tr̄ H + H_{LL̄} - ½ H_{LL}
    pub ell: f64,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Build the null frame at a unit direction ω.
///
/// S1 = normalize(e_k × ω) with k the axis least aligned with ω; exact ties
/// pick the highest such index so the coordinate axes come out canonical
/// (ω = e_z gives S1 = e_x, S2 = e_y). S2 = ω × S1.
pub fn frame_at(omega: [f64; 3]) -> Result<NullFrame> {
    let n = norm3(omega);
    if n == 0.0 {
        return Err(Error::InvalidDirection("zero vector".into()));
    }
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDirection(format!(
            "|omega| = {n}, expected unit vector"
        )));
    }
    let omega = [omega[0] / n, omega[1] / n, omega[2] / n];

    let mut k = 0;
    for i in 1..3 {
        if omega[i].abs() <= omega[k].abs() {
            k = i;
        }
    }
    let mut e = [0.0; 3];
    e[k] = 1.0;
    let s1v = cross(e, omega);
    let s1n = norm3(s1v);
    let s1 = [s1v[0] / s1n, s1v[1] / s1n, s1v[2] / s1n];
    let s2 = cross(omega, s1);

    Ok(NullFrame {
        omega,
        l: FourVector([1.0, omega[0], omega[1], omega[2]]),
        lbar: FourVector([1.0, -omega[0], -omega[1], -omega[2]]),
        s1: FourVector([0.0, s1[0], s1[1], s1[2]]),
        s2: FourVector([0.0, s2[0], s2[1], s2[2]]),
    })
}

/// Contraction g_{UV} = g^{αβ} U_α V_β (indices lowered with m).
pub fn contract(g: &SymTensor4, u: &FourVector, v: &FourVector) -> f64 {
    let ul = u.lower();
    let vl = v.lower();
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            s += g.get(a, b) * ul[a] * vl[b];
        }
    }
    s
}

/// Frame components of a symmetric tensor from its contractions:
/// g^{LL̄} = ¼ g_{L̄L}, g^{LL} = ¼ g_{L̄L̄}, g^{L̄L̄} = ¼ g_{LL},
/// g^{LA} = -½ g_{L̄A}, g^{L̄A} = -½ g_{LA}, g^{AB} = g_{AB}.
pub fn decompose(g: &SymTensor4, omega: [f64; 3]) -> Result<NullComponents> {
    let f = frame_at(omega)?;
    let tang = [f.s1, f.s2];
    let mut la = [0.0; 2];
    let mut lbar_a = [0.0; 2];
    let mut ab = [[0.0; 2]; 2];
    for (i, a) in tang.iter().enumerate() {
        la[i] = -0.5 * contract(g, &f.lbar, a);
        lbar_a[i] = -0.5 * contract(g, &f.l, a);
        for (j, b) in tang.iter().enumerate() {
            ab[i][j] = contract(g, a, b);
        }
    }
    Ok(NullComponents {
        ll: 0.25 * contract(g, &f.lbar, &f.lbar),
        llbar: 0.25 * contract(g, &f.lbar, &f.l),
        lbarlbar: 0.25 * contract(g, &f.l, &f.l),
        la,
        lbar_a,
        ab,
    })
}

/// Rebuild g^{αβ} = g^{UV} U^α V^β from frame components.
pub fn reconstruct(c: &NullComponents, omega: [f64; 3]) -> Result<SymTensor4> {
    let f = frame_at(omega)?;
    let tang = [f.s1, f.s2];
    let mut g = SymTensor4::sym_outer(&f.l, &f.l, c.ll);
    g = g.add(&SymTensor4::sym_outer(&f.l, &f.lbar, 2.0 * c.llbar));
    g = g.add(&SymTensor4::sym_outer(&f.lbar, &f.lbar, c.lbarlbar));
    for (i, a) in tang.iter().enumerate() {
        g = g.add(&SymTensor4::sym_outer(&f.l, a, 2.0 * c.la[i]));
        g = g.add(&SymTensor4::sym_outer(&f.lbar, a, 2.0 * c.lbar_a[i]));
        for (j, b) in tang.iter().enumerate() {
            g = g.add(&SymTensor4::sym_outer(a, b, c.ab[i][j]));
        }
    }
    Ok(g)
}

/// Split g = m + H as g = -½(L₁ L̄ + L̄ L₁) + γ, with
/// L₁^α = -½ g_{LL̄} L^α - ¼ g_{LL} L̄^α + g_{LA} A^α and
/// γ = g^{LL} L L + g^{LA}(A L + L A) + g^{AB} A B.
pub fn frame_decomposition(h: &SymTensor4, omega: [f64; 3]) -> Result<FrameDecomposition> {
    let f = frame_at(omega)?;
    let g = SymTensor4::minkowski().add(h);
    let comp = decompose(&g, omega)?;
    let tang = [f.s1, f.s2];

    let g_ll = contract(&g, &f.l, &f.l);
    let g_llbar = contract(&g, &f.l, &f.lbar);
    let mut l1 = f.l.scale(-0.5 * g_llbar).add(&f.lbar.scale(-0.25 * g_ll));
    for a in tang.iter() {
        l1 = l1.add(&a.scale(contract(&g, &f.l, a)));
    }

    let mut gamma = SymTensor4::sym_outer(&f.l, &f.l, comp.ll);
    for (i, a) in tang.iter().enumerate() {
        gamma = gamma.add(&SymTensor4::sym_outer(a, &f.l, 2.0 * comp.la[i]));
        for (j, b) in tang.iter().enumerate() {
            gamma = gamma.add(&SymTensor4::sym_outer(a, b, comp.ab[i][j]));
        }
    }

    let hcomp = decompose(h, omega)?;
    let h_llbar = contract(h, &f.l, &f.lbar);
    let h_ll = contract(h, &f.l, &f.l);
    // tr̄ H uses the lowered tangential components, which equal H^{AB}.
    let ell = hcomp.trace_tangential() + h_llbar - 0.5 * h_ll;

    Ok(FrameDecomposition { l1, gamma, ell })
}

/// Rebuild a tensor from its frame split: -½(L₁ L̄ + L̄ L₁) + γ.
pub fn frame_recompose(d: &FrameDecomposition, omega: [f64; 3]) -> Result<SymTensor4> {
    let f = frame_at(omega)?;
    Ok(SymTensor4::sym_outer(&d.l1, &f.lbar, -1.0).add(&d.gamma))
}

/// Defect of the transversal reduction of the wave operator:
/// g^{αβ} ∂_α∂_β φ - g_{LL} ∂_q² φ, given the full table of second
/// derivatives at a point. ∂_q = ½(∂_r - ∂_t) = -½ L̄^α ∂_α, so
/// ∂_q²φ = ¼ L̄^α L̄^β ∂_α∂_β φ.
pub fn wave_operator_residual(
    h: &SymTensor4,
    omega: [f64; 3],
    second_derivatives: &SymTensor4,
) -> Result<f64> {
    let f = frame_at(omega)?;
    let g = SymTensor4::minkowski().add(h);
    let g_ll = contract(&g, &f.l, &f.l);
    let mut dq2 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            dq2 += 0.25 * f.lbar.0[a] * f.lbar.0[b] * second_derivatives.get(a, b);
        }
    }
    Ok(g.contract_full(second_derivatives) - g_ll * dq2)
}
