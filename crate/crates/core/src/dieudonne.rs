//! The filtered φ-module D_p(E) with basis (ω, η), its alternating pairing,
//! and the vectors built from the Frobenius eigenbasis.
//!
//! Vectors are coordinate pairs on (ω, η). With a_p = 0 the Frobenius φ has
//! characteristic polynomial x² + 1/p, so φ(η) is determined by φ(ω).

use serde::Serialize;

use crate::curve::CurveFixture;
use crate::error::{Error, Result};
use crate::padic::PadicElement;
use crate::scalar::Scalar;

pub type Vector<S> = [S; 2];

pub(crate) fn lin<S: Scalar>(a: &S, x: &Vector<S>, b: &S, y: &Vector<S>) -> Vector<S> {
    [a.clone() * &x[0] + b.clone() * &y[0], a.clone() * &x[1] + b.clone() * &y[1]]
}

pub(crate) fn scale<S: Scalar>(a: &S, x: &Vector<S>) -> Vector<S> {
    [a.clone() * &x[0], a.clone() * &x[1]]
}

pub fn vec_approx_eq<S: Scalar>(x: &Vector<S>, y: &Vector<S>) -> bool {
    x[0].approx_eq(&y[0]) && x[1].approx_eq(&y[1])
}

#[derive(Clone, Debug)]
pub struct DieudonneData<S> {
    pub p: u32,
    /// Columns φ(ω), φ(η).
    pub phi: [Vector<S>; 2],
    /// [ω, η].
    pub gram: S,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivedVectors<S> {
    pub nu_alpha: Vector<S>,
    pub nu_beta: Vector<S>,
    pub eta_alpha: Vector<S>,
    pub eta_beta: Vector<S>,
    pub n_minus: Vector<S>,
    pub n_plus: Vector<S>,
    pub nu_minus: Vector<S>,
    pub nu_plus: Vector<S>,
}

impl<S: Scalar> DieudonneData<S> {
    /// From φ(ω) = uω + vη; φ(η) = cω − uη with c = (−1/p − u²)/v, which makes
    /// trace φ = 0 and det φ = 1/p.
    pub fn from_frobenius_on_omega(p: u32, u: S, v: S) -> Result<Self> {
        if !v.is_certified_nonzero() {
            return Err(Error::Hypothesis("[ω, φω] = 0: φ(ω) lies in Fil⁰".into()));
        }
        let c = (-S::from_ratio(1, p as i64) - u.clone() * &u).try_div(&v)?;
        Ok(DieudonneData { p, phi: [[u.clone(), v], [c, -u]], gram: S::one() })
    }

    pub fn alpha(&self) -> S {
        S::sqrt_neg_p(self.p)
    }

    pub fn beta(&self) -> S {
        -self.alpha()
    }

    pub fn omega(&self) -> Vector<S> {
        [S::one(), S::zero()]
    }

    pub fn eta(&self) -> Vector<S> {
        [S::zero(), S::one()]
    }

    pub fn pairing(&self, x: &Vector<S>, y: &Vector<S>) -> S {
        self.gram.clone() * &(x[0].clone() * &y[1] - x[1].clone() * &y[0])
    }

    pub fn apply_phi(&self, x: &Vector<S>) -> Vector<S> {
        lin(&x[0], &self.phi[0], &x[1], &self.phi[1])
    }

    pub fn phi_omega(&self) -> Vector<S> {
        self.phi[0].clone()
    }

    /// (1 − φ)² x.
    pub fn one_minus_phi_sq(&self, x: &Vector<S>) -> Vector<S> {
        let y = self.apply_phi(x);
        let y = [x[0].clone() - &y[0], x[1].clone() - &y[1]];
        let z = self.apply_phi(&y);
        [y[0].clone() - &z[0], y[1].clone() - &z[1]]
    }

    /// φ² = −1/p, [φx, φy] = [x, y]/p, [ω, φω] ≠ 0.
    pub fn check_invariants(&self) -> Result<()> {
        let minus_inv_p = -S::from_ratio(1, self.p as i64);
        for b in [self.omega(), self.eta()] {
            let lhs = self.apply_phi(&self.apply_phi(&b));
            if !vec_approx_eq(&lhs, &scale(&minus_inv_p, &b)) {
                return Err(Error::Invalid("φ² ≠ −1/p".into()));
            }
        }
        let lhs = self.pairing(&self.phi[0], &self.phi[1]);
        let rhs = self.gram.clone() * &S::from_ratio(1, self.p as i64);
        if !lhs.approx_eq(&rhs) {
            return Err(Error::Invalid("[φω, φη] ≠ [ω, η]/p".into()));
        }
        if !self.pairing(&self.omega(), &self.phi[0]).is_certified_nonzero() {
            return Err(Error::Hypothesis("[ω, φω] is not certified nonzero".into()));
        }
        Ok(())
    }

    /// ν_α = ½(ω − βφω), ν_β = ½(ω − αφω).
    pub fn eigenvectors(&self) -> (Vector<S>, Vector<S>) {
        let half = S::from_ratio(1, 2);
        let w = self.omega();
        let f = self.phi_omega();
        let na = lin(&half, &w, &(-(half.clone() * &self.beta())), &f);
        let nb = lin(&half, &w, &(-(half.clone() * &self.alpha())), &f);
        (na, nb)
    }

    /// η_α = (−1/[βφω, ω])(ω − βφω), and η_β likewise with α.
    pub fn eta_basis(&self) -> Result<(Vector<S>, Vector<S>)> {
        let w = self.omega();
        let f = self.phi_omega();
        let one = S::one();
        let make = |root: S| -> Result<Vector<S>> {
            let d = self.pairing(&scale(&root, &f), &w);
            if !d.is_certified_nonzero() {
                return Err(Error::Hypothesis("[ω, φω] = 0 violates weak admissibility".into()));
            }
            let c = (-S::one()).try_div(&d)?;
            Ok(scale(&c, &lin(&one, &w, &(-root), &f)))
        };
        Ok((make(self.beta())?, make(self.alpha())?))
    }

    /// Z_log = (1/p)·[[1, 1], [α, β]], row-major.
    pub fn z_log(&self) -> [[S; 2]; 2] {
        let ip = S::from_ratio(1, self.p as i64);
        [[ip.clone(), ip.clone()], [self.alpha() * &ip, self.beta() * &ip]]
    }

    /// (N₋, N₊) = (ν_β, −ν_α)·diag((1−α⁻¹)², (1−β⁻¹)²)·adj(p·Z_log).
    pub fn n_vectors(&self) -> Result<(Vector<S>, Vector<S>)> {
        let (na, nb) = self.eigenvectors();
        let a = self.alpha();
        let b = self.beta();
        let one = S::one();
        let ea = one.clone() - &one.try_div(&a)?;
        let eb = one.clone() - &one.try_div(&b)?;
        let x = scale(&(ea.clone() * &ea), &nb);
        let y = scale(&(-(eb.clone() * &eb)), &na);
        // adj(p·Z_log) = [[β, −1], [−α, 1]]
        let n_minus = lin(&b, &x, &(-a), &y);
        let n_plus = lin(&(-S::one()), &x, &one, &y);
        Ok((n_minus, n_plus))
    }

    /// N₋ = 2ω + (1 − p)φω, N₊ = (1/p − 1)ω − 2φω.
    pub fn n_vectors_closed(&self) -> (Vector<S>, Vector<S>) {
        let w = self.omega();
        let f = self.phi_omega();
        let p = S::from_ratio(self.p as i64, 1);
        let one = S::one();
        let two = S::from_ratio(2, 1);
        let n_minus = lin(&two, &w, &(one.clone() - &p), &f);
        let n_plus = lin(&(S::from_ratio(1, self.p as i64) - &one), &w, &(-two), &f);
        (n_minus, n_plus)
    }

    /// (ν₋, ν₊) = Z_log·(ν_α, ν_β).
    pub fn nu_pm(&self) -> (Vector<S>, Vector<S>) {
        let (na, nb) = self.eigenvectors();
        let z = self.z_log();
        (lin(&z[0][0], &na, &z[0][1], &nb), lin(&z[1][0], &na, &z[1][1], &nb))
    }

    pub fn derived(&self) -> Result<DerivedVectors<S>> {
        let (nu_alpha, nu_beta) = self.eigenvectors();
        let (eta_alpha, eta_beta) = self.eta_basis()?;
        let (n_minus, n_plus) = self.n_vectors()?;
        let (nu_minus, nu_plus) = self.nu_pm();
        Ok(DerivedVectors { nu_alpha, nu_beta, eta_alpha, eta_beta, n_minus, n_plus, nu_minus, nu_plus })
    }

    /// Solve [X, ν]·[ω, ν]^{r−1} = Reg_ν for X from the first two (ν, Reg_ν)
    /// pairs; further pairs are returned as consistency residuals.
    pub fn reg_pr(&self, values: &[(Vector<S>, S)], r: u32) -> Result<(Vector<S>, Vec<S>)> {
        if values.len() < 2 || r == 0 {
            return Err(Error::Invalid("need two vectors and r ≥ 1".into()));
        }
        let w = self.omega();
        let tilde = |(nu, reg): &(Vector<S>, S)| -> Result<S> {
            let wn = self.pairing(&w, nu);
            if !wn.is_certified_nonzero() {
                return Err(Error::Hypothesis("ν lies in Fil⁰".into()));
            }
            reg.try_div(&wn.powu(r - 1))
        };
        // [X, ν] = g(X0 ν1 − X1 ν0)
        let (n1, n2) = (&values[0].0, &values[1].0);
        let (t1, t2) = (tilde(&values[0])?, tilde(&values[1])?);
        let g = self.gram.clone();
        let m = [[g.clone() * &n1[1], -(g.clone() * &n1[0])], [g.clone() * &n2[1], -(g * &n2[0])]];
        let det = m[0][0].clone() * &m[1][1] - m[0][1].clone() * &m[1][0];
        if !det.is_certified_nonzero() {
            return Err(Error::Invalid("the two vectors are proportional".into()));
        }
        let x0 = (t1.clone() * &m[1][1] - m[0][1].clone() * &t2).try_div(&det)?;
        let x1 = (m[0][0].clone() * &t2 - t1 * &m[1][0]).try_div(&det)?;
        let x = [x0, x1];
        let residuals = values[2..]
            .iter()
            .map(|pair| Ok(self.pairing(&x, &pair.0) - &tilde(pair)?))
            .collect::<Result<Vec<_>>>()?;
        Ok((x, residuals))
    }

    /// (c₊, c₋) = (2·Reg_{N₊}/[ω, N₊]^r, (p − 1)·Reg_{N₋}/[ω, N₋]^r).
    pub fn modified_reg_coords(&self, reg_n_plus: &S, reg_n_minus: &S, r: u32) -> Result<(S, S)> {
        let (n_minus, n_plus) = self.n_vectors()?;
        let w = self.omega();
        let cp = (S::from_ratio(2, 1) * reg_n_plus).try_div(&self.pairing(&w, &n_plus).powu(r))?;
        let cm = (S::from_ratio(self.p as i64 - 1, 1) * reg_n_minus).try_div(&self.pairing(&w, &n_minus).powu(r))?;
        Ok((cp, cm))
    }

    /// Coordinates (c₊, c₋) of (1 − φ)²X in the basis (ν₊, ν₋).
    pub fn coords_in_nu_pm(&self, x: &Vector<S>) -> Result<(S, S)> {
        let y = self.one_minus_phi_sq(x);
        let (nm, np) = self.nu_pm();
        // y = c₊ν₊ + c₋ν₋
        let det = np[0].clone() * &nm[1] - nm[0].clone() * &np[1];
        if !det.is_certified_nonzero() {
            return Err(Error::Undecidable("[ν₋, ν₊] at working precision".into()));
        }
        let cp = (y[0].clone() * &nm[1] - nm[0].clone() * &y[1]).try_div(&det)?;
        let cm = (np[0].clone() * &y[1] - y[0].clone() * &np[1]).try_div(&det)?;
        Ok((cp, cm))
    }
}

impl DieudonneData<PadicElement> {
    /// Frobenius data from a fixture; an ingested φ(η) must agree with the derived one.
    pub fn from_fixture(fx: &CurveFixture) -> Result<Self> {
        let [u, v] = fx.frobenius_omega()?;
        let d = Self::from_frobenius_on_omega(fx.p, u, v)?;
        if let Some(eta) = fx.frobenius_eta()? {
            if !vec_approx_eq(&eta, &d.phi[1]) {
                return Err(Error::Invalid(format!("{}: ingested φ(η) disagrees with the derived one", fx.label)));
            }
        }
        d.check_invariants()?;
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{HalfInt, PadicElement};
    use crate::quad::QuadRational;
    use crate::selftest::{check_identities, dieudonne_suite, random_exact};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn randomized_identity_suite() {
        let rep = dieudonne_suite(7, &[5, 7, 13], 20, 20);
        assert!(rep.passed(), "{:?}", rep.failures);
    }

    #[test]
    fn exact_and_padic_modes_agree() {
        let mut rng = StdRng::seed_from_u64(3);
        let p = 7;
        let d = random_exact(p, &mut rng);
        let to_p = |q: &QuadRational| PadicElement::exact(q.clone()).with_precision(p, HalfInt::int(30));
        let dp = DieudonneData { p, phi: d.phi.clone().map(|c| c.map(|x| to_p(&x))), gram: to_p(&d.gram) };
        let (a, b) = (d.derived().unwrap(), dp.derived().unwrap());
        for (x, y) in [(a.n_plus, b.n_plus), (a.n_minus, b.n_minus), (a.eta_alpha, b.eta_alpha), (a.nu_plus, b.nu_plus)] {
            assert!(vec_approx_eq(&x.map(|c| to_p(&c)), &y));
        }
    }

    #[test]
    fn fixtures_are_admissible() {
        for entry in std::fs::read_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).unwrap() {
            let fx = CurveFixture::load(&entry.unwrap().path()).unwrap();
            let d = DieudonneData::from_fixture(&fx).unwrap();
            check_identities(&d).unwrap();
            let mut bad = fx.clone();
            bad.frobenius_on_eta.as_mut().unwrap()[1] = format!("1 + 0*s mod {}^10", fx.p);
            assert!(DieudonneData::from_fixture(&bad).is_err());
        }
    }

    #[test]
    fn substitution_examples() {
        // φ(ω) = cη with c a unit: ν_α = ½ω − (βc/2)η
        let p = 5;
        let c = QuadRational::from_ratio(3, 1);
        let d = DieudonneData::from_frobenius_on_omega(p, QuadRational::from_ratio(0, 1), c.clone()).unwrap();
        let (na, _) = d.eigenvectors();
        let half = QuadRational::from_ratio(1, 2);
        assert_eq!(na, [half.clone(), -(d.beta() * &c * &half)]);
        // Z_log at p = 5 and its determinant (β − α)/p²
        let z = d.z_log();
        let det = z[0][0].clone() * &z[1][1] - z[0][1].clone() * &z[1][0];
        assert_eq!(det, (d.beta() - d.alpha()) * QuadRational::from_ratio(1, 25));
        assert_eq!(z[1][1], -(d.alpha() * QuadRational::from_ratio(1, 5)));
        // r = 1 with Reg_ν = c·[ω, ν]: Reg^PR = c·ω
        let k = QuadRational::from_ratio(4, 3);
        let w = d.omega();
        let vals: Vec<_> = [d.eta(), [QuadRational::from_ratio(1, 1), QuadRational::from_ratio(1, 1)]]
            .into_iter()
            .map(|nu| (nu.clone(), k.clone() * d.pairing(&w, &nu)))
            .collect();
        let (x, _) = d.reg_pr(&vals, 1).unwrap();
        assert_eq!(x, [k, QuadRational::from_ratio(0, 1)]);
        // proportional vectors are rejected
        let e = d.eta();
        let vals = vec![(e.clone(), QuadRational::from_ratio(1, 1)), (scale(&QuadRational::from_ratio(2, 1), &e), QuadRational::from_ratio(2, 1))];
        assert!(d.reg_pr(&vals, 1).is_err());
        // degenerate Frobenius rejected
        assert!(DieudonneData::from_frobenius_on_omega(p, c, QuadRational::from_ratio(0, 1)).is_err());
    }
}
