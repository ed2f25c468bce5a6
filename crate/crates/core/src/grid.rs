//! Uniform grids, per-cell quadrature rules and the RK4 submeshes that
//! contain the quadrature nodes.

use crate::scalar::{idx, lit, Real};
use crate::Error;

/// Uniform partition of `[a, b]` into `n_cells` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid<T> {
    a: T,
    b: T,
    n_cells: usize,
    dx: T,
}

impl<T: Real> Grid<T> {
    pub fn new(a: T, b: T, n_cells: usize) -> Result<Self, Error> {
        if n_cells == 0 {
            return Err(Error::Config("grid needs at least one cell".into()));
        }
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::Config(format!("invalid domain [{a}, {b}]")));
        }
        let dx = (b - a) / T::from_usize(n_cells).unwrap();
        Ok(Self { a, b, n_cells, dx })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    /// Left interface of cell `i` (`x_{i-1/2}`); `i` may address ghost cells.
    #[inline]
    pub fn interface(&self, i: isize) -> T {
        self.a + idx::<T>(i) * self.dx
    }

    #[inline]
    pub fn center(&self, i: isize) -> T {
        self.a + (idx::<T>(i) + lit(0.5)) * self.dx
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.n_cells as isize).map(|i| self.center(i)).collect()
    }
}

/// Quadrature rule used for cell averages and source integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuadratureRule {
    /// One node at the cell center; exact for degree 1.
    Midpoint,
    /// Two-point Gauss-Legendre; exact for degree 3.
    Gauss2,
}

impl QuadratureRule {
    /// Normalized nodes on `[0, 1]` and weights summing to one.
    fn reference<T: Real>(self) -> (Vec<T>, Vec<T>) {
        match self {
            QuadratureRule::Midpoint => (vec![lit(0.5)], vec![T::one()]),
            QuadratureRule::Gauss2 => {
                let h = T::one() / (lit::<T>(2.0) * lit::<T>(3.0).sqrt());
                let half = lit::<T>(0.5);
                (vec![half - h, half + h], vec![half, half])
            }
        }
    }

    pub fn n_nodes(self) -> usize {
        match self {
            QuadratureRule::Midpoint => 1,
            QuadratureRule::Gauss2 => 2,
        }
    }
}

/// Quadrature layout shared by all cells of a uniform grid.
///
/// Offsets are measured from the left interface of a cell. Between
/// consecutive anchors `{x_{i-1/2}, x_0, .., x_M, x_{i+1/2}}` the submesh has
/// `n_sub` uniform intervals, giving `n_sub (M + 2) + 1` nodes.
///
/// State trajectories are marched on the submesh refined twice
/// ([`Layout::state_offsets`]) so that adjoint RK4 stages, which run on the
/// submesh itself, find exact state values at their half steps.
#[derive(Clone, Debug)]
pub struct Layout<T> {
    grid: Grid<T>,
    rule: QuadratureRule,
    n_sub: usize,
    weights: Vec<T>,
    quad_offsets: Vec<T>,
    submesh_offsets: Vec<T>,
    state_offsets: Vec<T>,
}

fn subdivide<T: Real>(anchors: &[T], per_interval: usize) -> Vec<T> {
    let mut out = Vec::with_capacity((anchors.len() - 1) * per_interval + 1);
    let m = T::from_usize(per_interval).unwrap();
    for w in anchors.windows(2) {
        for s in 0..per_interval {
            let frac = T::from_usize(s).unwrap() / m;
            out.push(w[0] + (w[1] - w[0]) * frac);
        }
    }
    out.push(*anchors.last().unwrap());
    out
}

/// Builds the quadrature layout of `grid` for `rule` with `n_sub`
/// subintervals between consecutive anchor points.
pub fn build_layout<T: Real>(grid: &Grid<T>, rule: QuadratureRule, n_sub: usize) -> Result<Layout<T>, Error> {
    if n_sub == 0 {
        return Err(Error::Config("N_p must be at least 1".into()));
    }
    let dx = grid.dx();
    let (ref_nodes, weights) = rule.reference::<T>();
    let quad_offsets: Vec<T> = ref_nodes.iter().map(|s| *s * dx).collect();
    let mut anchors = Vec::with_capacity(quad_offsets.len() + 2);
    anchors.push(T::zero());
    anchors.extend_from_slice(&quad_offsets);
    anchors.push(dx);
    let submesh_offsets = subdivide(&anchors, n_sub);
    let state_offsets = subdivide(&anchors, 2 * n_sub);
    Ok(Layout { grid: *grid, rule, n_sub, weights, quad_offsets, submesh_offsets, state_offsets })
}

impl<T: Real> Layout<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// `N_p`
    pub fn n_sub(&self) -> usize {
        self.n_sub
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn n_quad(&self) -> usize {
        self.weights.len()
    }

    pub fn submesh_len(&self) -> usize {
        self.submesh_offsets.len()
    }

    pub fn state_len(&self) -> usize {
        self.state_offsets.len()
    }

    /// Quadrature node offsets from the left interface.
    pub fn quad_offsets(&self) -> &[T] {
        &self.quad_offsets
    }

    pub fn state_offsets(&self) -> &[T] {
        &self.state_offsets
    }

    /// Position of quadrature node `l` inside the submesh.
    pub fn quad_submesh_index(&self, l: usize) -> usize {
        self.n_sub * (l + 1)
    }

    /// Position of quadrature node `l` inside the state mesh.
    pub fn quad_state_index(&self, l: usize) -> usize {
        2 * self.n_sub * (l + 1)
    }

    pub fn cell(&self, i: isize) -> CellLayout<'_, T> {
        CellLayout { layout: self, index: i, x_left: self.grid.interface(i), x_right: self.grid.interface(i + 1) }
    }
}

/// Absolute positions of one cell's quadrature nodes and meshes.
#[derive(Clone, Copy, Debug)]
pub struct CellLayout<'a, T> {
    layout: &'a Layout<T>,
    index: isize,
    x_left: T,
    x_right: T,
}

impl<'a, T: Real> CellLayout<'a, T> {
    pub fn layout(&self) -> &'a Layout<T> {
        self.layout
    }

    pub fn index(&self) -> isize {
        self.index
    }

    pub fn x_left(&self) -> T {
        self.x_left
    }

    pub fn x_right(&self) -> T {
        self.x_right
    }

    pub fn dx(&self) -> T {
        self.layout.grid.dx()
    }

    pub fn weights(&self) -> &'a [T] {
        &self.layout.weights
    }

    fn absolute(&self, offsets: &[T], k: usize) -> T {
        if k == 0 {
            self.x_left
        } else if k + 1 == offsets.len() {
            self.x_right
        } else {
            self.x_left + offsets[k]
        }
    }

    pub fn quad_node(&self, l: usize) -> T {
        self.absolute(&self.layout.state_offsets, self.layout.quad_state_index(l))
    }

    pub fn quad_nodes(&self) -> Vec<T> {
        (0..self.layout.n_quad()).map(|l| self.quad_node(l)).collect()
    }

    /// RK4 submesh with `N_p` intervals between anchors.
    pub fn submesh(&self) -> Vec<T> {
        let offs = &self.layout.submesh_offsets;
        (0..offs.len()).map(|k| self.absolute(offs, k)).collect()
    }

    /// Submesh refined twice, used for state trajectories.
    pub fn state_nodes(&self) -> Vec<T> {
        let offs = &self.layout.state_offsets;
        (0..offs.len()).map(|k| self.absolute(offs, k)).collect()
    }

    /// `Δx Σ α_l g(x_l)`
    pub fn integrate(&self, g: impl Fn(T) -> T) -> T {
        let s = self
            .weights()
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (l, w)| acc + *w * g(self.quad_node(l)));
        s * self.dx()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid() -> Grid<f64> {
        Grid::new(0.0, 1.0, 1).unwrap()
    }

    #[test]
    fn midpoint_layout_on_unit_cell() {
        let g = unit_grid();
        let lay = build_layout(&g, QuadratureRule::Midpoint, 1).unwrap();
        let c = lay.cell(0);
        assert_eq!(c.quad_nodes(), vec![0.5]);
        assert_eq!(lay.weights(), &[1.0]);
        assert_eq!(c.submesh(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn gauss2_layout_on_unit_cell() {
        let g = unit_grid();
        let lay = build_layout(&g, QuadratureRule::Gauss2, 1).unwrap();
        let c = lay.cell(0);
        let h = 1.0 / (2.0 * 3f64.sqrt());
        let q = c.quad_nodes();
        assert!((q[0] - (0.5 - h)).abs() < 1e-15);
        assert!((q[1] - (0.5 + h)).abs() < 1e-15);
        assert_eq!(lay.weights(), &[0.5, 0.5]);
        assert_eq!(c.submesh().len(), 4);
        // degree three is integrated exactly
        let i3 = c.integrate(|x| x * x * x);
        assert!((i3 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn submesh_count_with_three_subintervals() {
        let g = unit_grid();
        let lay = build_layout(&g, QuadratureRule::Gauss2, 3).unwrap();
        assert_eq!(lay.cell(0).submesh().len(), 10);
        assert_eq!(lay.cell(0).state_nodes().len(), 19);
    }

    #[test]
    fn quadrature_nodes_are_mesh_nodes() {
        let g = Grid::<f64>::new(-1.0, 1.0, 7).unwrap();
        for rule in [QuadratureRule::Midpoint, QuadratureRule::Gauss2] {
            for np in 1..=4 {
                let lay = build_layout(&g, rule, np).unwrap();
                let c = lay.cell(3);
                let sub = c.submesh();
                let st = c.state_nodes();
                for l in 0..lay.n_quad() {
                    assert_eq!(st[lay.quad_state_index(l)], c.quad_node(l));
                    assert!((sub[lay.quad_submesh_index(l)] - c.quad_node(l)).abs() < 1e-15);
                }
                // state mesh contains the submesh at even positions
                for (k, x) in sub.iter().enumerate() {
                    assert!((st[2 * k] - x).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn works_in_single_precision() {
        let g = Grid::<f32>::new(0.0, 1.0, 1).unwrap();
        let lay = build_layout(&g, QuadratureRule::Gauss2, 2).unwrap();
        let i3 = lay.cell(0).integrate(|x| x * x * x);
        assert!((i3 - 0.25).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Grid::new(1.0, 0.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 0).is_err());
        let g = unit_grid();
        assert!(build_layout(&g, QuadratureRule::Midpoint, 0).is_err());
    }
}
