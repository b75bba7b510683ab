//! Pointwise basin classification in the dynamical plane and raster component labelling.

use crate::family::{Family, MapKernel, Parameter, C64};
use crate::orbit::Target;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointClass {
    Target(Target),
    /// Basin of the periodic cycle; slot s means the orbit of z shadows the orbit of points[s].
    Slot(usize),
    Undecided,
}

/// Parabolic petal test at the first cycle point: u = -1/(A (z - z1)) far out and near the real axis.
#[derive(Clone, Copy, Debug)]
pub struct PetalTest {
    pub z1: C64,
    pub a: C64,
    pub radius: f64,
}

impl PetalTest {
    pub fn contains(&self, z: C64) -> bool {
        let u = -(self.a * (z - self.z1)).inv();
        u.norm() > self.radius && u.arg().abs() < 0.5
    }
}

#[derive(Clone, Debug)]
pub struct BasinClassifier {
    kern: MapKernel,
    targets: Vec<(Target, C64)>,
    infinity: bool,
    cycle: Vec<C64>,
    petal: Option<PetalTest>,
    pub budget: usize,
    pub capture_tol: f64,
}

impl BasinClassifier {
    pub fn new(param: Parameter, cycle: Vec<C64>, budget: usize) -> Self {
        let targets = Target::all(param.family)
            .iter()
            .filter_map(|t| t.point(&param).map(|p| (*t, p)))
            .collect();
        BasinClassifier {
            kern: MapKernel::new(param),
            targets,
            infinity: param.family == Family::AntipodalCubic,
            cycle,
            petal: None,
            budget,
            capture_tol: 1e-7,
        }
    }

    /// Treats the cycle as parabolic: slot membership is detected in the attracting petal of points[0].
    pub fn with_petal(mut self, petal: PetalTest) -> Self {
        self.petal = Some(petal);
        self
    }

    pub fn kernel(&self) -> &MapKernel {
        &self.kern
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    /// Class and the number of map steps it took to decide.
    pub fn classify(&self, z: C64) -> (PointClass, usize) {
        let p = self.cycle.len();
        let mut w = z;
        for t in 0..self.budget {
            for &(target, pt) in &self.targets {
                if (w - pt).norm() < self.capture_tol {
                    return (PointClass::Target(target), t);
                }
            }
            if self.infinity && w.norm() > 1.0 / self.capture_tol {
                return (PointClass::Target(Target::Infinity), t);
            }
            if p > 0 {
                match &self.petal {
                    Some(petal) => {
                        if petal.contains(w) {
                            return (PointClass::Slot((p - t % p) % p), t);
                        }
                    }
                    None => {
                        for (j, c) in self.cycle.iter().enumerate() {
                            if (w - c).norm() < 1e-6 {
                                return (PointClass::Slot((j + p - t % p) % p), t);
                            }
                        }
                    }
                }
            }
            w = self.kern.map(w);
            if !(w.re.is_finite() && w.im.is_finite()) {
                if self.infinity {
                    return (PointClass::Target(Target::Infinity), t + 1);
                }
                return (PointClass::Undecided, t + 1);
            }
        }
        (PointClass::Undecided, self.budget)
    }
}

/// Connected components (4-neighbour) of cells with equal nonnegative labels; negative cells are skipped.
/// Returns per-cell component ids (usize::MAX for skipped cells) and the component count.
pub fn label_components(grid: &[i32], width: usize, height: usize, wrap_x: bool) -> (Vec<usize>, usize) {
    let mut comp = vec![usize::MAX; grid.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..grid.len() {
        if grid[start] < 0 || comp[start] != usize::MAX {
            continue;
        }
        let class = grid[start];
        comp[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % width, i / width);
            let mut push = |j: usize| {
                if grid[j] == class && comp[j] == usize::MAX {
                    comp[j] = count;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                push(i - 1);
            } else if wrap_x {
                push(i + width - 1);
            }
            if x + 1 < width {
                push(i + 1);
            } else if wrap_x {
                push(i + 1 - width);
            }
            if y > 0 {
                push(i - width);
            }
            if y + 1 < height {
                push(i + width);
            }
        }
        count += 1;
    }
    (comp, count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_two_blobs_and_wraps() {
        #[rustfmt::skip]
        let g = vec![
            1, 1, -1, 1,
            -1, -1, -1, -1,
            2, -1, 2, 2,
        ];
        let (_, n) = label_components(&g, 4, 3, false);
        assert_eq!(n, 4);
        let (c, n) = label_components(&g, 4, 3, true);
        assert_eq!(n, 2);
        assert_eq!(c[0], c[3]);
        assert_eq!(c[8], c[11]);
    }

    #[test]
    fn newton_real_axis_points_fall_into_root_basins() {
        let cls = BasinClassifier::new(Parameter::newton(C64::new(0.0, 2.0)), vec![], 2000);
        assert_eq!(cls.classify(C64::new(5.0, 0.0)).0, PointClass::Target(Target::One));
        assert_eq!(cls.classify(C64::new(-5.0, 0.0)).0, PointClass::Target(Target::MinusOne));
    }
}
