//! Benchmark Hamiltonians with their groupings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{jordan_wigner, Axis, FermionFactor, FermionOp, PauliString, PauliSum, Spin};
use crate::product_formula::GroupedHamiltonian;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    HeisenbergNn,
    PowerLaw,
    Tfi,
    FermiHubbard,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Xyz,
    EvenOdd,
    Xz,
    NnLi,
    FhTri,
}

/// Couplings; unused ones are ignored by each model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Couplings {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub h: f64,
    pub alpha: f64,
    pub j: f64,
    pub u: f64,
    pub v: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Couplings {
            jx: 1.0,
            jy: 1.0,
            jz: 1.0,
            h: 0.0,
            alpha: 4.0,
            j: 1.0,
            u: 1.0,
            v: -1.0,
        }
    }
}

/// A model choice. `n` counts sites: qubits for spin models, lattice sites
/// (two qubits each) for Fermi-Hubbard.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub model: ModelKind,
    pub n: usize,
    #[serde(default)]
    pub couplings: Couplings,
    /// Defaults per model when absent.
    #[serde(default)]
    pub boundary: Option<Boundary>,
    #[serde(default)]
    pub grouping: Option<Grouping>,
}

impl ModelParams {
    pub fn new(model: ModelKind, n: usize) -> Self {
        ModelParams {
            model,
            n,
            couplings: Couplings::default(),
            boundary: None,
            grouping: None,
        }
    }

    pub fn boundary(mut self, b: Boundary) -> Self {
        self.boundary = Some(b);
        self
    }

    pub fn grouping(mut self, g: Grouping) -> Self {
        self.grouping = Some(g);
        self
    }

    pub fn couplings(mut self, c: Couplings) -> Self {
        self.couplings = c;
        self
    }

    pub fn effective_boundary(&self) -> Boundary {
        self.boundary.unwrap_or(match (self.model, self.grouping) {
            (ModelKind::HeisenbergNn, Some(Grouping::EvenOdd)) => Boundary::Open,
            (ModelKind::HeisenbergNn, _) | (ModelKind::Tfi, _) => Boundary::Periodic,
            _ => Boundary::Open,
        })
    }

    pub fn effective_grouping(&self) -> Grouping {
        self.grouping.unwrap_or(match self.model {
            ModelKind::HeisenbergNn | ModelKind::PowerLaw => Grouping::Xyz,
            ModelKind::Tfi => Grouping::Xz,
            ModelKind::FermiHubbard => Grouping::FhTri,
        })
    }

    pub fn n_qubits(&self) -> usize {
        match self.model {
            ModelKind::FermiHubbard => 2 * self.n,
            _ => self.n,
        }
    }

    fn incompatible(&self) -> Error {
        Error::IncompatibleGrouping {
            model: format!("{:?}", self.model),
            grouping: format!("{:?}", self.effective_grouping()),
        }
    }
}

/// A built model: the grouped Hamiltonian and, for power-law models, the
/// nearest-neighbour / long-range split of `H`.
#[derive(Clone, Debug)]
pub struct Model {
    pub params: ModelParams,
    pub hamiltonian: GroupedHamiltonian,
    pub split: Option<(PauliSum, PauliSum)>,
}

pub fn build_model(params: &ModelParams) -> Result<Model> {
    if params.n < 2 {
        return Err(Error::invalid(format!("need at least 2 sites, got {}", params.n)));
    }
    let (hamiltonian, split) = match params.model {
        ModelKind::HeisenbergNn => (heisenberg_nn(params)?, None),
        ModelKind::PowerLaw => {
            let (h, s) = power_law_heisenberg(params)?;
            (h, Some(s))
        }
        ModelKind::Tfi => (tfi(params)?, None),
        ModelKind::FermiHubbard => (fermi_hubbard_1d(params)?, None),
    };
    Ok(Model {
        params: params.clone(),
        hamiltonian,
        split,
    })
}

fn two_site(n: usize, j: usize, k: usize, axis: Axis, coeff: f64) -> PauliSum {
    let p = PauliString::identity().with(j, axis).with(k, axis);
    PauliSum::from_term(n, p, num_complex::Complex64::new(coeff, 0.0))
}

fn one_site(n: usize, j: usize, axis: Axis, coeff: f64) -> PauliSum {
    PauliSum::from_term(n, PauliString::single(j, axis), num_complex::Complex64::new(coeff, 0.0))
}

/// Bonds `(j, j+1)` of a chain; the wrap bond is added for periodic chains
/// longer than two sites.
pub fn chain_bonds(n: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    let mut bonds: Vec<_> = (0..n - 1).map(|j| (j, j + 1)).collect();
    if boundary == Boundary::Periodic && n > 2 {
        bonds.push((n - 1, 0));
    }
    bonds
}

fn check_groups(groups: &[PauliSum]) -> Result<()> {
    for (i, g) in groups.iter().enumerate() {
        if !g.terms_commute() {
            return Err(Error::NonCommutingGroup(i));
        }
    }
    Ok(())
}

/// Nearest-neighbour XYZ chain with a Z field.
pub fn heisenberg_nn(params: &ModelParams) -> Result<GroupedHamiltonian> {
    let n = params.n;
    let c = &params.couplings;
    let boundary = params.effective_boundary();
    let bonds = chain_bonds(n, boundary);
    let groups = match params.effective_grouping() {
        Grouping::Xyz => {
            let mut hx = PauliSum::zero(n);
            let mut hy = PauliSum::zero(n);
            let mut hz = PauliSum::zero(n);
            for &(j, k) in &bonds {
                hx += &two_site(n, j, k, Axis::X, c.jx);
                hy += &two_site(n, j, k, Axis::Y, c.jy);
                hz += &two_site(n, j, k, Axis::Z, c.jz);
            }
            for j in 0..n {
                hz += &one_site(n, j, Axis::Z, c.h);
            }
            vec![hx, hy, hz]
        }
        Grouping::EvenOdd => {
            if boundary == Boundary::Periodic && n % 2 == 1 {
                return Err(params.incompatible());
            }
            // Every bond carries the field of its left site, so an open chain
            // has no field on its last site. Z_j anticommutes with X_jX_k and
            // Y_jY_k, so any nonzero field is rejected by `check_groups`.
            let mut even = PauliSum::zero(n);
            let mut odd = PauliSum::zero(n);
            for &(j, k) in &bonds {
                let target = if j % 2 == 0 { &mut even } else { &mut odd };
                for (axis, jc) in [(Axis::X, c.jx), (Axis::Y, c.jy), (Axis::Z, c.jz)] {
                    *target += &two_site(n, j, k, axis, jc);
                }
                *target += &one_site(n, j, Axis::Z, c.h);
            }
            vec![even, odd]
        }
        _ => return Err(params.incompatible()),
    };
    check_groups(&groups)?;
    GroupedHamiltonian::new(groups, format!("heisenberg_nn n={n} {boundary:?}"))
}

/// Open chain with `1/|j−k|^α` couplings on XX, YY and ZZ and no field.
/// Returns the grouped Hamiltonian and the split `(H_nn, H_li)`.
pub fn power_law_heisenberg(params: &ModelParams) -> Result<(GroupedHamiltonian, (PauliSum, PauliSum))> {
    let n = params.n;
    let alpha = params.couplings.alpha;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let axes = [Axis::X, Axis::Y, Axis::Z];
    // parts[axis][0] nearest-neighbour, parts[axis][1] long-range.
    let mut parts = vec![[PauliSum::zero(n), PauliSum::zero(n)]; 3];
    for j in 0..n {
        for k in j + 1..n {
            let coeff = 1.0 / ((k - j) as f64).powf(alpha);
            let range = usize::from(k - j > 1);
            for (a, &axis) in axes.iter().enumerate() {
                parts[a][range] += &two_site(n, j, k, axis, coeff);
            }
        }
    }
    let mut nn = PauliSum::zero(n);
    let mut li = PauliSum::zero(n);
    for p in &parts {
        nn += &p[0];
        li += &p[1];
    }
    let groups = match params.effective_grouping() {
        Grouping::Xyz => parts.iter().map(|p| &p[0] + &p[1]).collect::<Vec<_>>(),
        Grouping::NnLi => parts
            .iter()
            .map(|p| p[0].clone())
            .chain(parts.iter().map(|p| p[1].clone()))
            .filter(|g| !g.is_empty())
            .collect(),
        _ => return Err(params.incompatible()),
    };
    check_groups(&groups)?;
    let ham = GroupedHamiltonian::new(groups, format!("power_law n={n} alpha={alpha}"))?;
    Ok((ham, (nn, li)))
}

/// Transverse-field Ising chain `J Σ X_j X_{j+1} + h Σ Z_j`, groups `[H_x, H_z]`.
pub fn tfi(params: &ModelParams) -> Result<GroupedHamiltonian> {
    if params.effective_grouping() != Grouping::Xz {
        return Err(params.incompatible());
    }
    let n = params.n;
    let c = &params.couplings;
    let boundary = params.effective_boundary();
    let mut hx = PauliSum::zero(n);
    let mut hz = PauliSum::zero(n);
    for (j, k) in chain_bonds(n, boundary) {
        hx += &two_site(n, j, k, Axis::X, c.j);
    }
    for j in 0..n {
        hz += &one_site(n, j, Axis::Z, c.h);
    }
    GroupedHamiltonian::new(vec![hx, hz], format!("tfi n={n} {boundary:?}"))
}

/// One-dimensional Fermi-Hubbard chain of `L = n` sites on `2L` qubits:
/// `H_even` (hopping `v` on bonds starting at even 0-based sites), `H_odd`,
/// and the on-site interaction `u Σ n_↑ n_↓` as `H_int`.
pub fn fermi_hubbard_1d(params: &ModelParams) -> Result<GroupedHamiltonian> {
    if params.effective_grouping() != Grouping::FhTri {
        return Err(params.incompatible());
    }
    if params.effective_boundary() != Boundary::Open {
        return Err(Error::invalid("the Fermi-Hubbard chain is open"));
    }
    let l = params.n;
    let modes = 2 * l;
    let c = &params.couplings;
    let mut even = FermionOp::zero(modes);
    let mut odd = FermionOp::zero(modes);
    let mut int = FermionOp::zero(modes);
    for j in 0..l - 1 {
        let target = if j % 2 == 0 { &mut even } else { &mut odd };
        for spin in [Spin::Up, Spin::Down] {
            let hop = FermionOp::hopping(modes, spin.mode(j), spin.mode(j + 1))?;
            for m in hop.terms() {
                target.push(c.v * m.coeff, m.factors.clone())?;
            }
        }
    }
    for j in 0..l {
        int.push(
            c.u,
            vec![
                FermionFactor::Number(Spin::Up.mode(j)),
                FermionFactor::Number(Spin::Down.mode(j)),
            ],
        )?;
    }
    let groups = vec![jordan_wigner(&even)?, jordan_wigner(&odd)?, jordan_wigner(&int)?];
    check_groups(&groups)?;
    GroupedHamiltonian::new(groups, format!("fermi_hubbard L={l}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(s: &PauliSum, weight: u32) -> usize {
        s.iter().filter(|(p, _)| p.weight() == weight).count()
    }

    #[test]
    fn heisenberg_open_counts() {
        let p = ModelParams::new(ModelKind::HeisenbergNn, 3)
            .boundary(Boundary::Open)
            .couplings(Couplings {
                h: 0.5,
                ..Couplings::default()
            });
        let h = heisenberg_nn(&p).unwrap();
        assert_eq!(h.groups()[0].len(), 2);
        assert_eq!(count(&h.groups()[2], 2), 2);
        assert_eq!(count(&h.groups()[2], 1), 3);
    }

    #[test]
    fn even_odd_bonds() {
        let p = ModelParams::new(ModelKind::HeisenbergNn, 4).grouping(Grouping::EvenOdd);
        let h = heisenberg_nn(&p).unwrap();
        let even_xx: Vec<String> = h.groups()[0]
            .iter()
            .filter(|(p, _)| p.word(4).matches('X').count() == 2)
            .map(|(p, _)| p.word(4))
            .collect();
        assert_eq!(even_xx, vec!["XXII", "IIXX"]);
        let odd_xx = h.groups()[1].coeff(&PauliString::parse("IXXI").unwrap());
        assert_eq!(odd_xx.re, 1.0);
    }

    #[test]
    fn odd_periodic_even_odd_is_rejected() {
        let p = ModelParams::new(ModelKind::HeisenbergNn, 5)
            .grouping(Grouping::EvenOdd)
            .boundary(Boundary::Periodic);
        assert!(matches!(heisenberg_nn(&p), Err(Error::IncompatibleGrouping { .. })));
    }

    #[test]
    fn power_law_coefficients() {
        let p = ModelParams::new(ModelKind::PowerLaw, 3);
        let (h, (nn, li)) = power_law_heisenberg(&p).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.groups()[0].coeff(&PauliString::parse("XIX").unwrap()).re, 0.0625);
        assert!(nn.try_add(&li).unwrap().distance(h.total()) < 1e-15);
        let mut bad = p.clone();
        bad.couplings.alpha = 0.0;
        assert!(power_law_heisenberg(&bad).is_err());
        let nnli = power_law_heisenberg(&p.clone().grouping(Grouping::NnLi)).unwrap().0;
        assert_eq!(nnli.len(), 6);
    }

    #[test]
    fn tfi_two_sites_single_bond() {
        let c = Couplings {
            j: 1.0,
            h: 1.0,
            ..Couplings::default()
        };
        let h = tfi(&ModelParams::new(ModelKind::Tfi, 2).couplings(c)).unwrap();
        assert_eq!(h.groups()[0].len(), 1);
        assert_eq!(h.groups()[1].len(), 2);
        let zero_field = tfi(&ModelParams::new(ModelKind::Tfi, 4)).unwrap();
        assert!(zero_field.groups_commute());
    }

    #[test]
    fn hubbard_two_sites() {
        let h = fermi_hubbard_1d(&ModelParams::new(ModelKind::FermiHubbard, 2)).unwrap();
        assert_eq!(h.len(), 3);
        assert_eq!(h.n_qubits(), 4);
        // One bond per spin, each giving an XZX and a YZY string.
        assert_eq!(h.groups()[0].len(), 4);
        assert!(h.groups()[1].is_empty());
        assert!(h.groups()[2].iter().all(|(p, _)| p.x_mask() == 0));
    }

    #[test]
    fn incompatible_grouping() {
        let p = ModelParams::new(ModelKind::Tfi, 4).grouping(Grouping::Xyz);
        assert!(matches!(tfi(&p), Err(Error::IncompatibleGrouping { .. })));
    }
}
