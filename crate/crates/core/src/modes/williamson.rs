use nalgebra::{Complex, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Block-diagonal symplectic form ⊕ [[0, 1], [−1, 0]].
pub fn symplectic_form(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// S with S H Sᵀ = diag(ω_1, ω_1, ω_2, ω_2, …) and S 𝕁 Sᵀ = 𝕁, frequencies ascending.
#[derive(Debug, Clone)]
pub struct Williamson {
    pub symplectic: DMatrix<f64>,
    pub frequencies: Vec<f64>,
}

impl Williamson {
    /// diag(ω_1, ω_1, ω_2, ω_2, …)
    pub fn diagonal(&self) -> DMatrix<f64> {
        let d: Vec<f64> = self.frequencies.iter().flat_map(|&w| [w, w]).collect();
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
    }

    /// S⁻¹ = −𝕁 Sᵀ 𝕁
    pub fn inverse(&self) -> DMatrix<f64> {
        let j = symplectic_form(self.symplectic.nrows());
        -(&j * self.symplectic.transpose() * &j)
    }

    /// H = S⁻¹ W S⁻ᵀ
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let inv = self.inverse();
        &inv * self.diagonal() * inv.transpose()
    }
}

/// Williamson normal form of a real symmetric positive-definite matrix of even size.
///
/// With K = H^{1/2} 𝕁 H^{1/2}, the Hermitian matrix iK has eigenpairs (±ω, v). Each
/// v = x + iy with ω > 0 gives an orthonormal pair (√2 y, √2 x) bringing K to ω 𝕁;
/// collecting them in O, S = Ω^{1/2} Oᵀ H^{-1/2}.
pub fn williamson(h: &DMatrix<f64>) -> Result<Williamson> {
    let n = h.nrows();
    if n != h.ncols() || !n.is_multiple_of(2) || n == 0 {
        return Err(Error::DimensionMismatch(format!("{}x{} is not an even square matrix", n, h.ncols())));
    }
    let sym = (h + h.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    if let Some((index, &value)) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, v)| !(**v > 0.0))
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        return Err(Error::NotPositiveDefinite { index, value });
    }
    let q = &eig.eigenvectors;
    let sqrt = q * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * q.transpose();
    let inv_sqrt = q * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt())) * q.transpose();

    let j = symplectic_form(n);
    let k = &sqrt * &j * &sqrt;
    let ik: DMatrix<Complex<f64>> = k.map(|v| Complex::new(0.0, v));
    let ik = (&ik + ik.adjoint()) * Complex::new(0.5, 0.0);
    let ceig = SymmetricEigen::new(ik);

    let mut positive: Vec<usize> = (0..n).filter(|&i| ceig.eigenvalues[i] > 0.0).collect();
    if positive.len() != n / 2 {
        return Err(Error::NotPositiveDefinite { index: 0, value: 0.0 });
    }
    positive.sort_by(|&a, &b| ceig.eigenvalues[a].total_cmp(&ceig.eigenvalues[b]));

    let mut o = DMatrix::zeros(n, n);
    let mut frequencies = Vec::with_capacity(n / 2);
    for (m, &i) in positive.iter().enumerate() {
        let v = ceig.eigenvectors.column(i);
        for r in 0..n {
            o[(r, 2 * m)] = std::f64::consts::SQRT_2 * v[r].im;
            o[(r, 2 * m + 1)] = std::f64::consts::SQRT_2 * v[r].re;
        }
        frequencies.push(ceig.eigenvalues[i]);
    }
    let root: Vec<f64> = frequencies.iter().flat_map(|&w| [w.sqrt(), w.sqrt()]).collect();
    let mut symplectic = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(root)) * o.transpose() * inv_sqrt;
    // First-order correction: with E = S𝕁Sᵀ − 𝕁, (1 + E𝕁/2) S is symplectic to O(E²).
    let e = &symplectic * &j * symplectic.transpose() - &j;
    symplectic += (e * &j * 0.5) * &symplectic;
    Ok(Williamson { symplectic, frequencies })
}

/// Moduli of the eigenvalues of 𝕁H, one per ± pair, ascending.
pub fn symplectic_eigenvalues_direct(h: &DMatrix<f64>) -> Vec<f64> {
    let jh = symplectic_form(h.nrows()) * h;
    let mut w: Vec<f64> = jh.complex_eigenvalues().iter().filter(|z| z.im > 0.0).map(|z| z.norm()).collect();
    w.sort_by(f64::total_cmp);
    w
}
