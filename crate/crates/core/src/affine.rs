//! Affine-group structure shared by both realizations: the splitting
//! `g = b(g) s^{phi(g)}`, the semi-norm `|g|`, and cylinder sets.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tree::{graph_distance, AffineTree};

/// `|g| = d(g o, o)`.
pub fn elem_norm<T: AffineTree>(tree: &T, g: &T::Elem) -> Result<u64> {
    let o = tree.origin();
    Ok(graph_distance(tree, &tree.act_vertex(g, &o)?, &o))
}

/// `g = b(g) s^{phi(g)}` with `b(g)` horocyclic; returns `(b(g), phi(g))`.
pub fn decompose<T: AffineTree>(tree: &T, g: &T::Elem) -> Result<(T::Elem, i64)> {
    let n = tree.phi(g);
    let s_inv = tree.power(&tree.homothety(), -n)?;
    Ok((tree.compose(g, &s_inv)?, n))
}

pub fn recompose<T: AffineTree>(tree: &T, b: &T::Elem, n: i64) -> Result<T::Elem> {
    tree.compose(b, &tree.power(&tree.homothety(), n)?)
}

pub fn is_horocyclic<T: AffineTree>(tree: &T, g: &T::Elem) -> bool {
    tree.phi(g) == 0
}

/// `V(x -> y) = { g : g x_i = y_i for all i }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder<V> {
    sources: Vec<V>,
    targets: Vec<V>,
    level: Option<i64>,
}

impl<V: Clone + PartialEq> Cylinder<V> {
    /// A cylinder whose pairs disagree on the height shift is empty.
    pub fn new<T: AffineTree<Vertex = V>>(tree: &T, sources: Vec<V>, targets: Vec<V>) -> Result<Self> {
        if sources.is_empty() || sources.len() != targets.len() {
            return Err(Error::InvalidCylinder(
                "sources and targets must be non-empty lists of equal length".to_string(),
            ));
        }
        let mut shifts = sources
            .iter()
            .zip(&targets)
            .map(|(x, y)| tree.height(y) - tree.height(x));
        let first = shifts.next().expect("non-empty");
        let level = shifts.all(|d| d == first).then_some(first);
        Ok(Self {
            sources,
            targets,
            level,
        })
    }

    pub fn single<T: AffineTree<Vertex = V>>(tree: &T, source: V, target: V) -> Self {
        Self::new(tree, alloc::vec![source], alloc::vec![target]).expect("one pair")
    }

    pub fn sources(&self) -> &[V] {
        &self.sources
    }

    pub fn targets(&self) -> &[V] {
        &self.targets
    }

    /// The common value of `phi` on the cylinder; `None` when it is empty.
    pub fn level(&self) -> Option<i64> {
        self.level
    }

    pub fn is_empty(&self) -> bool {
        self.level.is_none()
    }

    pub fn contains<T: AffineTree<Vertex = V>>(&self, tree: &T, g: &T::Elem) -> Result<bool> {
        if self.level != Some(tree.phi(g)) {
            return Ok(false);
        }
        for (x, y) in self.sources.iter().zip(&self.targets) {
            if !tree.maps_to(g, x, y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `g V(x -> y) = V(x -> g y)`.
    pub fn translate<T: AffineTree<Vertex = V>>(&self, tree: &T, g: &T::Elem) -> Result<Self> {
        let targets = self
            .targets
            .iter()
            .map(|y| tree.act_vertex(g, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sources: self.sources.clone(),
            targets,
            level: self.level.map(|l| l + tree.phi(g)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{PrecisionBudget, Qp};
    use crate::padic_tree::PAdicTree;

    fn tree() -> PAdicTree {
        PAdicTree::new(Qp::new(2, PrecisionBudget::new(32, 8).unwrap()).unwrap())
    }

    #[test]
    fn decomposition_round_trips() {
        let t = tree();
        let g = t.element_from_rationals((3, 4), (8, 3)).unwrap();
        let (b, n) = decompose(&t, &g).unwrap();
        assert_eq!(n, 3);
        assert!(is_horocyclic(&t, &b));
        assert!(t.same_element(&recompose(&t, &b, n).unwrap(), &g));
    }

    #[test]
    fn norm_of_the_homothety_is_one() {
        let t = tree();
        assert_eq!(elem_norm(&t, &t.homothety()).unwrap(), 1);
        assert_eq!(elem_norm(&t, &t.identity()).unwrap(), 0);
        let tr = t.element_from_rationals((1, 4), (1, 1)).unwrap();
        assert_eq!(elem_norm(&t, &tr).unwrap(), 4);
    }

    #[test]
    fn cylinder_membership_and_levels() {
        let t = tree();
        let o = t.origin();
        let so = t.main_branch(1).unwrap();
        let c = Cylinder::single(&t, o, so);
        assert_eq!(c.level(), Some(1));
        assert!(c.contains(&t, &t.homothety()).unwrap());
        assert!(!c.contains(&t, &t.identity()).unwrap());
        let empty = Cylinder::new(&t, alloc::vec![o, o], alloc::vec![so, o]).unwrap();
        assert!(empty.is_empty());
        assert!(Cylinder::<crate::padic_tree::Disc>::new(&t, alloc::vec![], alloc::vec![]).is_err());
    }
}
