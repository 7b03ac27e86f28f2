//! Finite-dimensional real Lie algebras given by structure constants, their duals,
//! coadjoint actions and subspace bases.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RANK_TOL};

/// Coordinates of an element of the algebra in the basis `e_i`.
pub type AlgebraVector = DVector<f64>;
/// Coordinates of an element of the dual in the dual basis.
pub type CoalgebraVector = DVector<f64>;

const STRUCTURE_TOL: f64 = 1e-12;

/// Structure constants `c[i][j][k]` with `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraSpec {
    pub name: String,
    dim: usize,
    constants: Vec<f64>,
}

impl LieAlgebraSpec {
    /// Builds from a sparse list of `(i, j, k, value)` entries (zero-based). Entries are
    /// taken literally, so both `(i, j, k)` and `(j, i, k)` must be listed.
    pub fn from_entries(
        name: impl Into<String>,
        dim: usize,
        entries: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let mut constants = vec![0.0; dim * dim * dim];
        for &(i, j, k, v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::InvalidAlgebra(format!(
                    "index ({i}, {j}, {k}) out of range for dimension {dim}"
                )));
            }
            constants[(i * dim + j) * dim + k] += v;
        }
        Self::from_constants(name, dim, constants)
    }

    pub fn from_constants(name: impl Into<String>, dim: usize, constants: Vec<f64>) -> Result<Self> {
        if constants.len() != dim * dim * dim {
            return Err(Error::dim("structure constants", dim * dim * dim, constants.len()));
        }
        let spec = LieAlgebraSpec {
            name: name.into(),
            dim,
            constants,
        };
        let scale = spec.constants.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let anti = spec.antisymmetry_residual();
        if anti > STRUCTURE_TOL * scale {
            return Err(Error::InvalidAlgebra(format!(
                "antisymmetry residual {anti:e}"
            )));
        }
        let jac = spec.jacobi_residual();
        if jac > STRUCTURE_TOL * scale * scale {
            return Err(Error::InvalidAlgebra(format!("Jacobi residual {jac:e}")));
        }
        Ok(spec)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebraSpec {
            name: format!("r{dim}"),
            dim,
            constants: vec![0.0; dim * dim * dim],
        }
    }

    /// so(3) with `[e_i, e_j] = eps_ijk e_k` (cross product).
    pub fn so3() -> Self {
        let mut entries = Vec::new();
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            entries.push((i, j, k, 1.0));
            entries.push((j, i, k, -1.0));
        }
        Self::from_entries("so3", 3, &entries).expect("so(3) constants are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants[(i * self.dim + j) * self.dim + k]
    }

    pub fn entries(&self) -> Vec<(usize, usize, usize, f64)> {
        let d = self.dim;
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let v = self.constant(i, j, k);
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.iter().all(|&c| c == 0.0)
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut r = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    r = r.max((self.constant(i, j, k) + self.constant(j, i, k)).abs());
                }
            }
        }
        r
    }

    /// Largest coefficient of `[e_a,[e_b,e_c]] + [e_b,[e_c,e_a]] + [e_c,[e_a,e_b]]`.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let mut r = 0.0_f64;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for m in 0..d {
                        let mut s = 0.0;
                        for l in 0..d {
                            s += self.constant(b, c, l) * self.constant(a, l, m)
                                + self.constant(c, a, l) * self.constant(b, l, m)
                                + self.constant(a, b, l) * self.constant(c, l, m);
                        }
                        r = r.max(s.abs());
                    }
                }
            }
        }
        r
    }

    fn check(&self, v: &DVector<f64>, what: &str) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::dim(what, self.dim, v.len()));
        }
        Ok(())
    }

    pub fn bracket(&self, a: &AlgebraVector, b: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(a, "bracket")?;
        self.check(b, "bracket")?;
        Ok(self.ad_matrix(a) * b)
    }

    /// Matrix of `ad_a = [a, .]`.
    pub fn ad_matrix(&self, a: &AlgebraVector) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |k, j| {
            (0..d).map(|i| a[i] * self.constant(i, j, k)).sum()
        })
    }

    /// `ad*_lambda mu`, defined by `<ad*_lambda mu, eta> = <mu, [lambda, eta]>`.
    pub fn coadjoint(&self, lambda: &AlgebraVector, mu: &CoalgebraVector) -> Result<CoalgebraVector> {
        self.check(lambda, "coadjoint")?;
        self.check(mu, "coadjoint")?;
        Ok(self.ad_matrix(lambda).transpose() * mu)
    }

    /// Basis of `g_mu = { lambda : ad*_lambda mu = 0 }`.
    pub fn momentum_isotropy_algebra(&self, mu: &CoalgebraVector, rel_tol: f64) -> Result<SubspaceBasis> {
        self.check(mu, "momentum isotropy")?;
        let d = self.dim;
        let mut l = DMatrix::zeros(d, d);
        for i in 0..d {
            let e = DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
            l.set_column(i, &self.coadjoint(&e, mu)?);
        }
        let kernel = linalg::null_space(&l, rel_tol);
        SubspaceBasis::new(Ambient::Algebra, kernel, RANK_TOL)
    }

    /// Inner product on the algebra from a parameter list: up to `dim` values give a
    /// diagonal padded with ones; `dim(dim+1)/2` values (when that exceeds `dim`) give a
    /// packed upper triangle, row by row.
    pub fn invariant_inner_product_family(&self, params: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let packed = d * (d + 1) / 2;
        let g = if params.len() <= d {
            DMatrix::from_fn(d, d, |i, j| {
                if i != j {
                    0.0
                } else {
                    params.get(i).copied().unwrap_or(1.0)
                }
            })
        } else if params.len() == packed {
            let mut g = DMatrix::zeros(d, d);
            let mut it = params.iter();
            for i in 0..d {
                for j in i..d {
                    let v = *it.next().expect("length checked");
                    g[(i, j)] = v;
                    g[(j, i)] = v;
                }
            }
            g
        } else {
            return Err(Error::InvalidInnerProduct(format!(
                "expected at most {d} or exactly {packed} parameters, got {}",
                params.len()
            )));
        };
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInnerProduct("non-finite entry".into()));
        }
        let eigs = linalg::sym_eigenvalues(&g);
        let max = eigs.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
        if eigs.first().map_or(true, |&e| e <= 1e-12 * max.max(1.0)) && d > 0 {
            return Err(Error::InvalidInnerProduct(format!("eigenvalues {eigs:?}")));
        }
        Ok(g)
    }

    /// Largest violation of `Ad`-invariance at the algebra level:
    /// `G ad_e + ad_e^T G` over basis vectors `e`.
    pub fn ad_invariance_residual(&self, g: &DMatrix<f64>) -> f64 {
        let d = self.dim;
        (0..d)
            .map(|i| {
                let e = DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 });
                let ad = self.ad_matrix(&e);
                linalg::max_abs(&(g * &ad + ad.transpose() * g))
            })
            .fold(0.0, f64::max)
    }
}

pub fn unit(d: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 })
}

/// Which space a basis lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ambient {
    Algebra,
    Coalgebra,
    Tangent,
    Phase,
}

/// Linearly independent vectors stored as the columns of a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub ambient: Ambient,
    pub ambient_dim: usize,
    #[serde(with = "rows")]
    pub vectors: DMatrix<f64>,
    pub gram_tol: f64,
}

impl SubspaceBasis {
    pub fn new(ambient: Ambient, vectors: DMatrix<f64>, gram_tol: f64) -> Result<Self> {
        let k = vectors.ncols();
        if k > 0 {
            let (s, _) = linalg::right_singular(&vectors);
            let smax = s[0];
            let smin = s[k - 1];
            if !(smin > gram_tol * smax) {
                return Err(Error::Inconsistency(format!(
                    "basis vectors are dependent (sigma_min {smin:e}, sigma_max {smax:e})"
                )));
            }
        }
        Ok(SubspaceBasis {
            ambient,
            ambient_dim: vectors.nrows(),
            vectors,
            gram_tol,
        })
    }

    pub fn empty(ambient: Ambient, ambient_dim: usize) -> Self {
        SubspaceBasis {
            ambient,
            ambient_dim,
            vectors: DMatrix::zeros(ambient_dim, 0),
            gram_tol: RANK_TOL,
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }

    pub fn iter(&self) -> impl Iterator<Item = DVector<f64>> + '_ {
        (0..self.dim()).map(|i| self.vector(i))
    }
}

/// Serializes a matrix as the list of its columns, each written as a row.
pub(crate) mod rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Rows {
        ambient_rows: usize,
        rows: Vec<Vec<f64>>,
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows = (0..m.ncols())
            .map(|j| m.column(j).iter().copied().collect())
            .collect();
        Rows {
            ambient_rows: m.nrows(),
            rows,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let r = Rows::deserialize(d)?;
        let mut m = DMatrix::zeros(r.ambient_rows, r.rows.len());
        for (j, row) in r.rows.iter().enumerate() {
            if row.len() != r.ambient_rows {
                return Err(serde::de::Error::custom("ragged basis rows"));
            }
            for (i, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }
}

/// Plain square matrix as a list of rows.
pub(crate) mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect();
        (m.ncols(), rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let (ncols, rows): (usize, Vec<Vec<f64>>) = Deserialize::deserialize(d)?;
        let mut m = DMatrix::zeros(rows.len(), ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(serde::de::Error::custom("ragged matrix rows"));
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }
}
