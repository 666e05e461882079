//! Two-row and two-column Young frames, stabilizer-induced characters,
//! irreducible characters, immanants and order-2 para-statistics traces.
//!
//! Characters are stored per cycle type. The closed form for the induced
//! character of a two-row frame `(N−j, j)` counts the σ-invariant `j`-subsets,
//! i.e. the ways to pick whole cycles of σ with total length `j`.

use crate::alpha_linalg::{
    all_permutations, factorial, for_each_permutation, partitions, vere_jones_coefficients, CycleType,
    Permutation, SquareMatrix, TraceSource, PARTITION_MAX_N,
};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

/// Cap for brute-force conjugation sums and immanants.
pub const BRUTE_FORCE_MAX_N: usize = 8;
/// Cap for explicit group-algebra arithmetic.
pub const GROUP_ALGEBRA_MAX_N: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Frame `(N−j, j)`.
    Rows,
    /// Frame `(2^j, 1^{N−2j})`, the transpose of `(N−j, j)`.
    Columns,
}

/// A Young frame with at most two rows, or its transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YoungFrame2 {
    n: usize,
    j: usize,
    orientation: Orientation,
}

impl YoungFrame2 {
    pub fn new(n: usize, j: usize, orientation: Orientation) -> Result<Self> {
        if n == 0 || 2 * j > n {
            return Err(Error::InvalidInput(format!("no two-row frame with N={n}, j={j}")));
        }
        Ok(YoungFrame2 { n, j, orientation })
    }

    pub fn rows(n: usize, j: usize) -> Result<Self> {
        Self::new(n, j, Orientation::Rows)
    }

    pub fn columns(n: usize, j: usize) -> Result<Self> {
        Self::new(n, j, Orientation::Columns)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn transpose(&self) -> Self {
        let orientation = match self.orientation {
            Orientation::Rows => Orientation::Columns,
            Orientation::Columns => Orientation::Rows,
        };
        YoungFrame2 { orientation, ..*self }
    }

    /// Row lengths, top to bottom, zero rows omitted.
    pub fn row_lengths(&self) -> Vec<usize> {
        match self.orientation {
            Orientation::Rows => [self.n - self.j, self.j].into_iter().filter(|&l| l > 0).collect(),
            Orientation::Columns => {
                let mut v = vec![2; self.j];
                v.extend(std::iter::repeat_n(1, self.n - 2 * self.j));
                v
            }
        }
    }

    /// Dimension of the irreducible representation, `C(N, j) − C(N, j−1)`.
    pub fn dimension(&self) -> u64 {
        let b = |k: usize| -> u64 {
            let mut r: u64 = 1;
            for i in 0..k {
                r = r * (self.n - i) as u64 / (i + 1) as u64;
            }
            r
        };
        if self.j == 0 {
            1
        } else {
            b(self.j) - b(self.j - 1)
        }
    }
}

/// A numbering of the boxes of a [`YoungFrame2`] by {0, …, N−1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau2 {
    frame: YoungFrame2,
    rows: Vec<Vec<usize>>,
}

impl Tableau2 {
    /// Row-major filling 0, 1, 2, ….
    pub fn canonical(frame: YoungFrame2) -> Self {
        let mut next = 0;
        let rows = frame
            .row_lengths()
            .into_iter()
            .map(|l| {
                let r: Vec<usize> = (next..next + l).collect();
                next += l;
                r
            })
            .collect();
        Tableau2 { frame, rows }
    }

    /// Canonical filling relabelled by `pi`.
    pub fn relabelled(frame: YoungFrame2, pi: &Permutation) -> Result<Self> {
        if pi.n() != frame.n {
            return Err(Error::InvalidInput("relabelling has the wrong size".into()));
        }
        let mut t = Self::canonical(frame);
        for row in &mut t.rows {
            for x in row.iter_mut() {
                *x = pi.apply(*x);
            }
        }
        Ok(t)
    }

    pub fn frame(&self) -> YoungFrame2 {
        self.frame
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn columns(&self) -> Vec<Vec<usize>> {
        let width = self.rows.first().map_or(0, |r| r.len());
        (0..width)
            .map(|c| self.rows.iter().filter_map(|r| r.get(c).copied()).collect())
            .collect()
    }

    /// Transposed tableau: rows become columns.
    pub fn transpose(&self) -> Self {
        Tableau2 { frame: self.frame.transpose(), rows: self.columns() }
    }

    fn block_of(blocks: &[Vec<usize>], n: usize) -> Vec<usize> {
        let mut of = vec![0; n];
        for (b, block) in blocks.iter().enumerate() {
            for &x in block {
                of[x] = b;
            }
        }
        of
    }

    /// True if σ maps every row into itself.
    pub fn in_row_stabilizer(&self, sigma: &Permutation) -> bool {
        let of = Self::block_of(&self.rows, self.frame.n);
        (0..self.frame.n).all(|i| of[i] == of[sigma.apply(i)])
    }

    /// True if σ maps every column into itself.
    pub fn in_column_stabilizer(&self, sigma: &Permutation) -> bool {
        let of = Self::block_of(&self.columns(), self.frame.n);
        (0..self.frame.n).all(|i| of[i] == of[sigma.apply(i)])
    }

    pub fn row_stabilizer_order(&self) -> f64 {
        self.rows.iter().map(|r| factorial(r.len())).product()
    }

    pub fn column_stabilizer_order(&self) -> f64 {
        self.columns().iter().map(|c| factorial(c.len())).product()
    }
}

/// A function on S_N that is constant on conjugacy classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassFunction {
    n: usize,
    values: BTreeMap<CycleType, i64>,
}

impl ClassFunction {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, class: &CycleType) -> i64 {
        self.values.get(class).copied().unwrap_or(0)
    }

    pub fn at(&self, sigma: &Permutation) -> i64 {
        self.value(&sigma.cycle_type())
    }

    pub fn values(&self) -> &BTreeMap<CycleType, i64> {
        &self.values
    }

    /// `Σ_σ self(σ) other(σ)`.
    pub fn inner(&self, other: &ClassFunction) -> f64 {
        self.values
            .iter()
            .map(|(c, &v)| c.class_size() * v as f64 * other.value(c) as f64)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum CharacterKind {
    Induced,
    Irreducible,
}

type Cache = RwLock<HashMap<(YoungFrame2, CharacterKind), Arc<ClassFunction>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Number of subsets of the cycles of a class with total length `j`.
fn invariant_subsets(class: &CycleType, j: usize) -> i64 {
    let mut ways = vec![0i64; j + 1];
    ways[0] = 1;
    for &l in class.parts() {
        for t in (l..=j).rev() {
            ways[t] += ways[t - l];
        }
    }
    ways[j]
}

fn build(frame: YoungFrame2, kind: CharacterKind) -> Result<ClassFunction> {
    if frame.n > PARTITION_MAX_N {
        return Err(Error::DimensionTooLarge { what: "character table", n: frame.n, cap: PARTITION_MAX_N });
    }
    let mut values = BTreeMap::new();
    for class in partitions(frame.n)? {
        let row_value = match kind {
            CharacterKind::Induced => invariant_subsets(&class, frame.j),
            CharacterKind::Irreducible => {
                invariant_subsets(&class, frame.j) - if frame.j > 0 { invariant_subsets(&class, frame.j - 1) } else { 0 }
            }
        };
        let v = match frame.orientation {
            Orientation::Rows => row_value,
            Orientation::Columns => class.sign() as i64 * row_value,
        };
        values.insert(class, v);
    }
    Ok(ClassFunction { n: frame.n, values })
}

fn cached(frame: YoungFrame2, kind: CharacterKind) -> Result<Arc<ClassFunction>> {
    if let Some(cf) = cache().read().expect("character cache poisoned").get(&(frame, kind)) {
        return Ok(cf.clone());
    }
    let cf = Arc::new(build(frame, kind)?);
    let mut w = cache().write().expect("character cache poisoned");
    Ok(w.entry((frame, kind)).or_insert(cf).clone())
}

/// Induced character as a class function.
///
/// For a row frame `(N−j, j)` this is the character induced from the trivial
/// representation of the row stabilizer. For a column frame it is the
/// character induced from the sign representation of the column stabilizer,
/// which equals `sgn · ψ` of the transposed row frame.
pub fn psi_class_function(frame: YoungFrame2) -> Result<Arc<ClassFunction>> {
    cached(frame, CharacterKind::Induced)
}

/// Irreducible character of the frame as a class function.
pub fn chi_class_function(frame: YoungFrame2) -> Result<Arc<ClassFunction>> {
    cached(frame, CharacterKind::Irreducible)
}

fn check_size(frame: &YoungFrame2, sigma: &Permutation) -> Result<()> {
    if sigma.n() != frame.n {
        return Err(Error::InvalidInput(format!("permutation of {} points for a frame of {}", sigma.n(), frame.n)));
    }
    Ok(())
}

/// Induced character value at σ (see [`psi_class_function`]).
pub fn psi_character(frame: YoungFrame2, sigma: &Permutation) -> Result<i64> {
    check_size(&frame, sigma)?;
    Ok(psi_class_function(frame)?.at(sigma))
}

/// Irreducible character value at σ.
pub fn chi_character(frame: YoungFrame2, sigma: &Permutation) -> Result<i64> {
    check_size(&frame, sigma)?;
    Ok(chi_class_function(frame)?.at(sigma))
}

/// `(1/#R(T)) #{τ : τ^{−1}στ ∈ R(T)}` by enumeration of S_N.
pub fn row_induced_bruteforce(t: &Tableau2, sigma: &Permutation) -> Result<f64> {
    let n = t.frame.n;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::DimensionTooLarge { what: "brute-force character", n, cap: BRUTE_FORCE_MAX_N });
    }
    let mut count = 0usize;
    for_each_permutation(n, |tau| {
        let tau = Permutation::new(tau.to_vec()).expect("enumerated permutation");
        let conj = tau.inverse().compose(sigma).compose(&tau);
        if t.in_row_stabilizer(&conj) {
            count += 1;
        }
    });
    Ok(count as f64 / t.row_stabilizer_order())
}

/// `(1/#C(T)) Σ_{τ : τ^{−1}στ ∈ C(T)} sgn(τ^{−1}στ)` by enumeration of S_N.
pub fn column_sign_induced_bruteforce(t: &Tableau2, sigma: &Permutation) -> Result<f64> {
    let n = t.frame.n;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::DimensionTooLarge { what: "brute-force character", n, cap: BRUTE_FORCE_MAX_N });
    }
    let mut total = 0i64;
    for_each_permutation(n, |tau| {
        let tau = Permutation::new(tau.to_vec()).expect("enumerated permutation");
        let conj = tau.inverse().compose(sigma).compose(&tau);
        if t.in_column_stabilizer(&conj) {
            total += conj.sign() as i64;
        }
    });
    Ok(total as f64 / t.column_stabilizer_order())
}

/// Immanant `Σ_σ χ(σ) Π_i A[i][σ(i)]`.
pub fn immanant(a: &SquareMatrix, frame: YoungFrame2) -> Result<Complex64> {
    let n = a.n();
    if n != frame.n {
        return Err(Error::InvalidInput(format!("{n}x{n} matrix for a frame of {} boxes", frame.n)));
    }
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::DimensionTooLarge { what: "immanant", n, cap: BRUTE_FORCE_MAX_N });
    }
    let chi = chi_class_function(frame)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_permutation(n, |p| {
        let sigma = Permutation::new(p.to_vec()).expect("enumerated permutation");
        let c = chi.at(&sigma);
        if c != 0 {
            let mut prod = Complex64::new(c as f64, 0.0);
            for (i, &j) in p.iter().enumerate() {
                prod *= a.get(i, j);
            }
            acc += prod;
        }
    });
    Ok(acc)
}

/// Order-2 para-statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParaKind {
    Boson2,
    Fermion2,
}

/// `Tr[(⊗^N G) U(a(T_{⌊N/2⌋}))]` for para-bosons, or the column analogue with
/// `b(T'_{⌊N/2⌋})` for para-fermions, as a product of two symmetric (resp.
/// antisymmetric) traces of sizes ⌈N/2⌉ and ⌊N/2⌋ computed by Newton's
/// identities on the power sums of the spectrum.
pub fn para_trace(spectrum: &[f64], n: usize, kind: ParaKind) -> f64 {
    let hi = n.div_ceil(2);
    let lo = n / 2;
    let alpha = match kind {
        ParaKind::Boson2 => 1.0,
        ParaKind::Fermion2 => -1.0,
    };
    let p = TraceSource::Spectrum(spectrum).power_traces(hi);
    let c = vere_jones_coefficients(&p, alpha, hi);
    c[hi].re * c[lo].re
}

/// The same trace as [`para_trace`] via the character sum
/// `(1/N!) Σ_σ w(σ) Π_{cycles} Tr G^ℓ`, with `w` the induced character of the
/// frame `(⌈N/2⌉, ⌊N/2⌋)` (or its sign-twisted transpose).
pub fn para_trace_characters(spectrum: &[f64], n: usize, kind: ParaKind) -> Result<f64> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::DimensionTooLarge { what: "para_trace character path", n, cap: BRUTE_FORCE_MAX_N });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let frame = match kind {
        ParaKind::Boson2 => YoungFrame2::rows(n, n / 2)?,
        ParaKind::Fermion2 => YoungFrame2::columns(n, n / 2)?,
    };
    let w = psi_class_function(frame)?;
    let p = TraceSource::Spectrum(spectrum).power_traces(n);
    let mut acc = 0.0;
    for class in partitions(n)? {
        let mut term = class.class_size() * w.value(&class) as f64;
        for &l in class.parts() {
            term *= p[l - 1].re;
        }
        acc += term;
    }
    Ok(acc / factorial(n))
}

/// Elements of the group algebra C[S_N] as coefficient vectors over an
/// enumeration of S_N, with multiplication `(fg)(σ) = Σ_{ab=σ} f(a) g(b)`.
pub struct GroupAlgebra {
    n: usize,
    perms: Vec<Permutation>,
    index: HashMap<Vec<usize>, usize>,
    table: Vec<usize>,
}

impl GroupAlgebra {
    pub fn new(n: usize) -> Result<Self> {
        if n > GROUP_ALGEBRA_MAX_N {
            return Err(Error::DimensionTooLarge { what: "group algebra", n, cap: GROUP_ALGEBRA_MAX_N });
        }
        let perms = all_permutations(n);
        let index: HashMap<Vec<usize>, usize> =
            perms.iter().enumerate().map(|(i, p)| (p.images().to_vec(), i)).collect();
        let m = perms.len();
        let mut table = vec![0; m * m];
        for (i, a) in perms.iter().enumerate() {
            for (j, b) in perms.iter().enumerate() {
                table[i * m + j] = index[a.compose(b).images()];
            }
        }
        Ok(GroupAlgebra { n, perms, index, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn index_of(&self, p: &Permutation) -> usize {
        self.index[p.images()]
    }

    pub fn mul(&self, f: &[f64], g: &[f64]) -> Vec<f64> {
        let m = self.order();
        let mut out = vec![0.0; m];
        for (i, &fi) in f.iter().enumerate() {
            if fi == 0.0 {
                continue;
            }
            for (j, &gj) in g.iter().enumerate() {
                if gj != 0.0 {
                    out[self.table[i * m + j]] += fi * gj;
                }
            }
        }
        out
    }

    /// `a(T) = (1/#R) Σ_{σ∈R(T)} σ`.
    pub fn row_symmetrizer(&self, t: &Tableau2) -> Vec<f64> {
        let w = 1.0 / t.row_stabilizer_order();
        self.perms.iter().map(|p| if t.in_row_stabilizer(p) { w } else { 0.0 }).collect()
    }

    /// `b(T) = (1/#C) Σ_{σ∈C(T)} sgn(σ) σ`.
    pub fn column_antisymmetrizer(&self, t: &Tableau2) -> Vec<f64> {
        let w = 1.0 / t.column_stabilizer_order();
        self.perms
            .iter()
            .map(|p| if t.in_column_stabilizer(p) { w * p.sign() as f64 } else { 0.0 })
            .collect()
    }

    /// Young symmetrizer `e(T) = c · a(T) b(T)` with `c = d #R #C / N!`.
    pub fn young_idempotent(&self, t: &Tableau2) -> Vec<f64> {
        let c = t.frame.dimension() as f64 * t.row_stabilizer_order() * t.column_stabilizer_order()
            / factorial(self.n);
        self.mul(&self.row_symmetrizer(t), &self.column_antisymmetrizer(t))
            .into_iter()
            .map(|x| c * x)
            .collect()
    }

    /// `d(T) = e(T) a(T)`.
    pub fn projector(&self, t: &Tableau2) -> Vec<f64> {
        self.mul(&self.young_idempotent(t), &self.row_symmetrizer(t))
    }

    /// `χ_g(σ) = Σ_τ g(τ^{−1} σ τ)`.
    pub fn character_of(&self, g: &[f64], sigma: &Permutation) -> f64 {
        self.perms
            .iter()
            .map(|tau| g[self.index_of(&tau.inverse().compose(sigma).compose(tau))])
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::from_one_based(v).unwrap()
    }

    #[test]
    fn psi_examples() {
        let f = YoungFrame2::rows(4, 0).unwrap();
        for p in all_permutations(4) {
            assert_eq!(psi_character(f, &p).unwrap(), 1);
        }
        let f = YoungFrame2::rows(2, 1).unwrap();
        assert_eq!(psi_character(f, &Permutation::identity(2)).unwrap(), 2);
        assert_eq!(psi_character(f, &perm(&[2, 1])).unwrap(), 0);
        let f = YoungFrame2::rows(3, 1).unwrap();
        assert_eq!(psi_character(f, &Permutation::identity(3)).unwrap(), 3);
    }

    #[test]
    fn chi_examples() {
        let f = YoungFrame2::rows(5, 0).unwrap();
        assert_eq!(chi_character(f, &Permutation::identity(5)).unwrap(), 1);
        let sign2 = YoungFrame2::rows(2, 0).unwrap().transpose();
        assert_eq!(chi_character(sign2, &perm(&[2, 1])).unwrap(), -1);
        let f = YoungFrame2::rows(3, 1).unwrap();
        let vals: Vec<i64> = [perm(&[1, 2, 3]), perm(&[2, 1, 3]), perm(&[2, 3, 1])]
            .iter()
            .map(|p| chi_character(f, p).unwrap())
            .collect();
        assert_eq!(vals, vec![2, 0, -1]);
    }

    #[test]
    fn closed_form_matches_bruteforce() {
        for n in 1..=6 {
            for j in 0..=n / 2 {
                let f = YoungFrame2::rows(n, j).unwrap();
                let t = Tableau2::canonical(f);
                let tp = t.transpose();
                for class in partitions(n).unwrap() {
                    let s = class.representative();
                    let psi = psi_character(f, &s).unwrap() as f64;
                    assert_eq!(row_induced_bruteforce(&t, &s).unwrap(), psi);
                    assert_eq!(column_sign_induced_bruteforce(&tp, &s).unwrap(), s.sign() as f64 * psi);
                    assert_eq!(psi_character(f.transpose(), &s).unwrap() as f64, s.sign() as f64 * psi);
                }
            }
        }
    }

    #[test]
    fn transpose_swaps_stabilizers() {
        let t = Tableau2::canonical(YoungFrame2::rows(5, 2).unwrap());
        let tp = t.transpose();
        assert_eq!(tp.transpose(), t);
        for p in all_permutations(5) {
            assert_eq!(tp.in_row_stabilizer(&p), t.in_column_stabilizer(&p));
            assert_eq!(tp.in_column_stabilizer(&p), t.in_row_stabilizer(&p));
        }
    }

    #[test]
    fn immanant_examples() {
        let a = SquareMatrix::from_real_row_major(2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let det_frame = YoungFrame2::rows(2, 0).unwrap().transpose();
        assert!((immanant(&a, det_frame).unwrap() - Complex64::new(-2.0, 0.0)).norm() < 1e-14);
        let i3 = SquareMatrix::identity(3);
        assert_eq!(immanant(&i3, YoungFrame2::rows(3, 1).unwrap()).unwrap(), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn para_trace_small() {
        let g = [0.8, 0.3];
        assert!((para_trace(&g, 1, ParaKind::Boson2) - 1.1).abs() < 1e-15);
        assert!((para_trace(&g, 1, ParaKind::Fermion2) - 1.1).abs() < 1e-15);
        assert!((para_trace(&g, 2, ParaKind::Boson2) - 1.21).abs() < 1e-14);
    }

    #[test]
    fn young_projectors_are_idempotent() {
        let ga = GroupAlgebra::new(4).unwrap();
        let t = Tableau2::canonical(YoungFrame2::rows(4, 1).unwrap());
        let a = ga.row_symmetrizer(&t);
        let aa = ga.mul(&a, &a);
        assert!(a.iter().zip(&aa).all(|(x, y)| (x - y).abs() < 1e-14));
        let e = ga.young_idempotent(&t);
        let ee = ga.mul(&e, &e);
        assert!(e.iter().zip(&ee).all(|(x, y)| (x - y).abs() < 1e-13));
    }
}
