//! Fixed-point formulas: the equivariant index, the CM cocycle of the crossed
//! product and the short-time limit of the JLO cocycle, evaluated from stratum
//! data at quadrature nodes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use crate::char_forms::{a_hat, ch_phi, NormalAction};
use crate::error::{Error, Result};
use crate::graded_algebra::Ext;
use crate::mehler::ModelCurvature;
use crate::scalar::{inv_factorial, minus_i_pow, Coeff, PiScaled};

/// Value and stratum-frame differential of a function at a node.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<C> {
    pub value: C,
    /// Components of df in the ambient frame; entries past the stratum
    /// dimension are normal components.
    pub grad: Vec<C>,
}

impl<C: Coeff> Jet<C> {
    pub fn constant(value: C) -> Self {
        Jet {
            value,
            grad: Vec::new(),
        }
    }

    fn one_form(&self, n: usize) -> Result<Ext<C>> {
        if self.grad.len() > n {
            return Err(Error::SizeMismatch(format!(
                "gradient of length {} in dimension {n}",
                self.grad.len()
            )));
        }
        let mut w = Ext::zero(n);
        for (i, c) in self.grad.iter().enumerate() {
            w.add_term(1 << i, c.clone());
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointNode<C> {
    pub weight: f64,
    pub mc: ModelCurvature<C>,
    /// ±1: orientation of the normal frame relative to the ambient orientation.
    pub orientation: i8,
    pub jets: BTreeMap<String, Jet<C>>,
}

impl<C: Coeff> FixedPointNode<C> {
    pub fn new(weight: f64, mc: ModelCurvature<C>) -> Self {
        FixedPointNode {
            weight,
            mc,
            orientation: 1,
            jets: BTreeMap::new(),
        }
    }

    pub fn with_orientation(mut self, orientation: i8) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_jet(mut self, id: &str, jet: Jet<C>) -> Self {
        self.jets.insert(id.to_string(), jet);
        self
    }

    fn jet(&self, id: &str) -> Result<&Jet<C>> {
        self.jets.get(id).ok_or_else(|| Error::MissingJet(id.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointStratum<C> {
    pub a: usize,
    pub nodes: Vec<FixedPointNode<C>>,
}

impl<C: Coeff> FixedPointStratum<C> {
    pub fn new(a: usize, nodes: Vec<FixedPointNode<C>>) -> Result<Self> {
        if a % 2 == 1 {
            return Err(Error::OddDimension(a));
        }
        for node in &nodes {
            if node.mc.a_dim() != a {
                return Err(Error::InvalidStratumDim { a, n: node.mc.dim() });
            }
            if !(node.weight > 0.0) {
                return Err(Error::Invalid(format!("non-positive quadrature weight {}", node.weight)));
            }
            if node.orientation != 1 && node.orientation != -1 {
                return Err(Error::Invalid("orientation must be ±1".into()));
            }
        }
        Ok(FixedPointStratum { a, nodes })
    }
}

/// Sum of π-scaled exact values, keyed by the π half-power.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PiSum<C> {
    pub parts: BTreeMap<i32, C>,
}

impl<C: Coeff> PiSum<C> {
    pub fn new() -> Self {
        PiSum {
            parts: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, v: PiScaled<C>) {
        let e = self.parts.remove(&v.pi_half_pow);
        let s = match e {
            Some(old) => old + v.value,
            None => v.value,
        };
        if !s.is_zero() {
            self.parts.insert(v.pi_half_pow, s);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn to_c64(&self) -> Complex64 {
        self.parts
            .iter()
            .map(|(p, v)| PiScaled::new(*p, v.clone()).to_c64())
            .sum()
    }
}

fn check_node<C: Coeff>(node: &FixedPointNode<C>, a: usize, n: usize) -> Result<()> {
    if node.mc.dim() != n {
        return Err(Error::DimensionMismatch(node.mc.dim(), n));
    }
    if node.mc.a_dim() != a {
        return Err(Error::InvalidStratumDim { a, n });
    }
    Ok(())
}

/// `(−i)^{n/2} (2π)^{−a/2} ε |ω ∧ Â(R′) ∧ ν_φ(R″) ∧ Ch_φ(F)|^{(a,0)}` at one node.
fn node_density<C: Coeff>(node: &FixedPointNode<C>, a: usize, n: usize, omega: &Ext<C>) -> Result<PiScaled<C>> {
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    check_node(node, a, n)?;
    let mc = &node.mc;
    let det_inv_sqrt = mc.normal.det_sqrt_one_minus().inv().ok_or(Error::SingularNormal)?;
    let form = omega
        .wedge(&a_hat(&mc.rp)?)?
        .wedge(&mc.nu_reduced()?)?
        .wedge(&ch_phi(&mc.twist)?)?;
    let b = form.berezin_horizontal(a)?;
    // (2π)^{−a/2} = π^{−a/2} 2^{−a/2}
    let two = C::from_ratio(1, 2).powi((a / 2) as i64).expect("nonzero");
    let sign = C::from_i64(node.orientation as i64);
    Ok(PiScaled::new(
        -(a as i32),
        minus_i_pow::<C>(n / 2) * two * det_inv_sqrt * sign * b,
    ))
}

/// Local index density at a node (unit weight).
pub fn node_index_density<C: Coeff>(node: &FixedPointNode<C>, a: usize, n: usize) -> Result<PiScaled<C>> {
    node_density(node, a, n, &Ext::one(n))
}

fn weight_to_coeff<C: Coeff>(w: f64) -> C {
    if w == 1.0 {
        C::one()
    } else {
        C::from_f64(w)
    }
}

/// Equivariant index with exact node densities; weights enter as exact binary values.
pub fn equivariant_index_exact<C: Coeff>(strata: &[FixedPointStratum<C>], n: usize) -> Result<PiSum<C>> {
    let mut out = PiSum::new();
    for s in strata {
        for node in &s.nodes {
            let d = node_index_density(node, s.a, n)?;
            out.add(PiScaled::new(d.pi_half_pow, d.value * weight_to_coeff::<C>(node.weight)));
        }
    }
    Ok(out)
}

/// `(−i)^{n/2} Σ_a (2π)^{−a/2} ∫_{M_a^φ} Â ∧ ν_φ ∧ Ch_φ`.
pub fn equivariant_index<C: Coeff>(strata: &[FixedPointStratum<C>], n: usize) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for s in strata {
        for node in &s.nodes {
            total += node_index_density(node, s.a, n)?.to_c64() * node.weight;
        }
    }
    Ok(total)
}

/// Finite group given by its multiplication table, with the action on a set of
/// named functions by pullback.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupTable {
    pub identity: String,
    pub products: BTreeMap<(String, String), String>,
    /// `(f, g) ↦ f∘g` as a function id.
    pub pullbacks: BTreeMap<(String, String), String>,
}

impl GroupTable {
    /// Trivial group `{id}`.
    pub fn trivial(identity: &str) -> Self {
        let mut products = BTreeMap::new();
        products.insert((identity.to_string(), identity.to_string()), identity.to_string());
        GroupTable {
            identity: identity.to_string(),
            products,
            pullbacks: BTreeMap::new(),
        }
    }

    pub fn elements(&self) -> Vec<String> {
        let mut v: Vec<String> = self.products.keys().map(|(a, _)| a.clone()).collect();
        v.dedup();
        v
    }

    pub fn compose(&self, g: &str, h: &str) -> Result<String> {
        if g == self.identity {
            return Ok(h.to_string());
        }
        if h == self.identity {
            return Ok(g.to_string());
        }
        self.products
            .get(&(g.to_string(), h.to_string()))
            .cloned()
            .ok_or_else(|| Error::Word(format!("product {g}·{h} not in table")))
    }

    pub fn inverse(&self, g: &str) -> Result<String> {
        for e in self.elements() {
            if self.compose(g, &e)? == self.identity {
                return Ok(e);
            }
        }
        Err(Error::Word(format!("{g} has no inverse")))
    }

    /// `f∘g`.
    pub fn pullback(&self, f: &str, g: &str) -> Result<String> {
        if g == self.identity {
            return Ok(f.to_string());
        }
        self.pullbacks
            .get(&(f.to_string(), g.to_string()))
            .cloned()
            .ok_or_else(|| Error::Word(format!("pullback of {f} by {g} not in table")))
    }

    /// Closure and associativity of the listed products.
    pub fn validate(&self) -> Result<()> {
        let els = self.elements();
        for a in &els {
            for b in &els {
                let ab = self.compose(a, b)?;
                if !els.contains(&ab) {
                    return Err(Error::Word(format!("{a}·{b} = {ab} is not an element")));
                }
                for c in &els {
                    if self.compose(&ab, c)? != self.compose(a, &self.compose(b, c)?)? {
                        return Err(Error::Word(format!("({a}{b}){c} ≠ {a}({b}{c})")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `f⁰U_{φ₀} ⊗ ⋯ ⊗ f^{2q}U_{φ_{2q}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupWord {
    pub factors: Vec<(String, String)>,
}

/// Composite `φ_{(2q)} = φ₀∘⋯∘φ_{2q}` and the functions `f̂^j = f^j∘φ_{(j−1)}^{−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedWord {
    pub composite: String,
    pub functions: Vec<String>,
}

impl GroupWord {
    pub fn new(factors: &[(&str, &str)]) -> Self {
        GroupWord {
            factors: factors
                .iter()
                .map(|(f, g)| (f.to_string(), g.to_string()))
                .collect(),
        }
    }

    pub fn resolve(&self, table: &GroupTable) -> Result<ResolvedWord> {
        let mut functions = Vec::with_capacity(self.factors.len());
        let mut acc = table.identity.clone();
        for (j, (f, g)) in self.factors.iter().enumerate() {
            if j == 0 {
                functions.push(f.clone());
            } else {
                functions.push(table.pullback(f, &table.inverse(&acc)?)?);
            }
            acc = table.compose(&acc, g)?;
        }
        Ok(ResolvedWord {
            composite: acc,
            functions,
        })
    }
}

/// Shared display of the CM cocycle and the JLO limit:
/// `(−i)^{n/2}/(2q)! Σ_a (2π)^{−a/2} ∫ f̂⁰ df̂¹∧⋯∧df̂^{2q} ∧ Â ∧ ν_φ ∧ Ch_φ`.
fn cocycle_display<C: Coeff>(
    q: usize,
    functions: &[String],
    strata: &[FixedPointStratum<C>],
    n: usize,
) -> Result<PiSum<C>> {
    if functions.len() != 2 * q + 1 {
        return Err(Error::Word(format!(
            "word of length {} for degree 2q = {}",
            functions.len(),
            2 * q
        )));
    }
    let fact = inv_factorial::<C>(2 * q);
    let mut out = PiSum::new();
    for s in strata {
        for node in &s.nodes {
            let f0 = node.jet(&functions[0])?.value.clone();
            let mut omega = Ext::scalar(n, f0);
            for f in &functions[1..] {
                omega = omega.wedge(&node.jet(f)?.one_form(n)?)?;
            }
            let d = node_density(node, s.a, n, &omega)?;
            out.add(PiScaled::new(
                d.pi_half_pow,
                d.value * fact.clone() * weight_to_coeff::<C>(node.weight),
            ));
        }
    }
    Ok(out)
}

/// CM cocycle on `f⁰U_{φ₀}, …, f^{2q}U_{φ_{2q}}`; `strata` are the fixed strata of the composite.
pub fn cm_cocycle<C: Coeff>(
    q: usize,
    word: &GroupWord,
    table: &GroupTable,
    strata: &[FixedPointStratum<C>],
    n: usize,
) -> Result<PiSum<C>> {
    let r = word.resolve(table)?;
    cocycle_display(q, &r.functions, strata, n)
}

/// Short-time limit of the JLO cocycle; same display as the CM cocycle at the composite.
pub fn jlo_limit<C: Coeff>(
    q: usize,
    word: &GroupWord,
    table: &GroupTable,
    strata: &[FixedPointStratum<C>],
    n: usize,
) -> Result<PiSum<C>> {
    let r = word.resolve(table)?;
    cocycle_display(q, &r.functions, strata, n)
}

/// `(−1)^{|α|} (q−1)! |α|! / (α! ∏_j (α_j + j))`.
pub fn cm_constants(q: usize, alpha: &[u32]) -> Result<BigRational> {
    if q == 0 {
        return Err(Error::Invalid("q must be at least 1".into()));
    }
    if alpha.len() != 2 * q {
        return Err(Error::SizeMismatch(format!(
            "multi-index of length {} for q = {q}",
            alpha.len()
        )));
    }
    let fact = |k: u64| (1..=k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i));
    let total: u64 = alpha.iter().map(|&a| a as u64).sum();
    let mut num = fact(q as u64 - 1) * fact(total);
    let mut den = BigInt::from(1);
    for (j, &a) in alpha.iter().enumerate() {
        den *= fact(a as u64) * BigInt::from(a as u64 + j as u64 + 1);
    }
    if total % 2 == 1 {
        num = -num;
    }
    Ok(BigRational::new(num, den))
}

/// `(−i)^{n/2} 2^{a/2} det^{1/2}(1−φ^N) tr(φ^E) |I_{Q_(m)}(0,1)|^{(a,0)}`.
pub fn gamma_phi_volterra<C: Coeff>(
    i_model: &PiScaled<Ext<C>>,
    normal: &NormalAction<C>,
    phi_e: &[C],
    a: usize,
    n: usize,
) -> Result<PiScaled<C>> {
    if a % 2 == 1 || n % 2 == 1 {
        return Err(Error::OddDimension(if a % 2 == 1 { a } else { n }));
    }
    if a + normal.codim() != n {
        return Err(Error::InvalidStratumDim { a, n });
    }
    let p = (phi_e.len() as f64).sqrt() as usize;
    if p * p != phi_e.len() {
        return Err(Error::SizeMismatch("phi_e must be square".into()));
    }
    let tr = (0..p).fold(C::zero(), |acc, i| acc + phi_e[i * p + i].clone());
    let b = i_model.value.berezin_horizontal(a)?;
    let scalar = minus_i_pow::<C>(n / 2) * C::from_i64(1i64 << (a / 2)) * normal.det_sqrt_one_minus() * tr;
    Ok(PiScaled::new(i_model.pi_half_pow, scalar * b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::char_forms::TwistData;
    use crate::scalar::{qc, QC};

    #[test]
    fn constants_examples() {
        let r = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(cm_constants(1, &[0, 0]).unwrap(), r(1, 2));
        assert_eq!(cm_constants(1, &[1, 0]).unwrap(), r(-1, 4));
        assert!(cm_constants(2, &[0, 0]).is_err());
    }

    #[test]
    fn sphere_rotation_cancels() {
        // Poles of a rotation by θ with Pythagorean half angle (3/5, 4/5).
        let normal = NormalAction::from_half_angles(alloc::vec![(qc(3, 5), qc(4, 5))]).unwrap();
        let mc = ModelCurvature::flat(2, normal).unwrap();
        let north = FixedPointNode::new(1.0, mc.clone()).with_orientation(-1);
        let south = FixedPointNode::new(1.0, mc);
        let s = FixedPointStratum::new(0, alloc::vec![north, south]).unwrap();
        assert!(equivariant_index_exact(&[s], 2).unwrap().is_zero());
    }

    #[test]
    fn word_resolution() {
        let mut t = GroupTable::trivial("e");
        t.products.insert(("g".into(), "g".into()), "e".into());
        t.products.insert(("g".into(), "e".into()), "g".into());
        t.products.insert(("e".into(), "g".into()), "g".into());
        t.pullbacks.insert(("f".into(), "g".into()), "fg".into());
        t.pullbacks.insert(("b".into(), "g".into()), "bg".into());
        t.validate().unwrap();
        let w = GroupWord::new(&[("a", "g"), ("f", "e"), ("b", "g")]);
        let r = w.resolve(&t).unwrap();
        assert_eq!(r.composite, "e");
        assert_eq!(r.functions, alloc::vec!["a", "fg", "bg"]);
    }

    #[test]
    fn missing_jet_reported() {
        let mc = ModelCurvature::<QC>::new(
            crate::graded_algebra::FormMatrix::zeros(2, 2),
            crate::graded_algebra::FormMatrix::zeros(2, 0),
            NormalAction::trivial(),
            TwistData::trivial(2),
        )
        .unwrap();
        let s = FixedPointStratum::new(2, alloc::vec![FixedPointNode::new(1.0, mc)]).unwrap();
        let w = GroupWord::new(&[("f0", "e")]);
        let r = cm_cocycle(0, &w, &GroupTable::trivial("e"), &[s], 2);
        assert_eq!(r, Err(Error::MissingJet("f0".into())));
    }
}
