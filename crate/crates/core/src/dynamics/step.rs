use crate::error::Result;
use crate::model::{Configuration, Geometry};
use crate::queueing::{collapse_classes, expand_classes, CoupledConfig, MultiLineConfig, MulticlassConfig};

/// A state that can be advanced by one space-time point.
pub trait HarrisState: Clone {
    fn geometry(&self) -> &Geometry;

    /// Number of lines (or classes) tracked for dual points and export.
    fn line_count(&self) -> usize;

    /// The lines or classes, in order.
    fn line(&self, k: usize) -> &Configuration;

    /// Applies a point at `x`. `jumps[k]` receives the position line `k`
    /// occupied before it jumped, or `None` if line `k` did not move.
    fn apply_point(&mut self, x: f64, jumps: &mut Vec<Option<f64>>) -> Result<()>;
}

impl HarrisState for Configuration {
    fn geometry(&self) -> &Geometry {
        Configuration::geometry(self)
    }

    fn line_count(&self) -> usize {
        1
    }

    fn line(&self, _k: usize) -> &Configuration {
        self
    }

    fn apply_point(&mut self, x: f64, jumps: &mut Vec<Option<f64>>) -> Result<()> {
        jumps.clear();
        jumps.push(self.jump_from_left(x)?);
        Ok(())
    }
}

impl HarrisState for CoupledConfig {
    fn geometry(&self) -> &Geometry {
        CoupledConfig::geometry(self)
    }

    fn line_count(&self) -> usize {
        self.depth()
    }

    fn line(&self, k: usize) -> &Configuration {
        &self.lines()[k]
    }

    fn apply_point(&mut self, x: f64, jumps: &mut Vec<Option<f64>>) -> Result<()> {
        jumps.clear();
        for line in self.lines_mut() {
            jumps.push(line.jump_from_left(x)?);
        }
        Ok(())
    }
}

impl HarrisState for MulticlassConfig {
    fn geometry(&self) -> &Geometry {
        MulticlassConfig::geometry(self)
    }

    fn line_count(&self) -> usize {
        self.class_count()
    }

    fn line(&self, k: usize) -> &Configuration {
        &self.classes()[k]
    }

    /// Jumps are reported per line of the coupled representation.
    fn apply_point(&mut self, x: f64, jumps: &mut Vec<Option<f64>>) -> Result<()> {
        let mut eta = expand_classes(self)?;
        eta.apply_point(x, jumps)?;
        *self = collapse_classes(&eta)?;
        Ok(())
    }
}

impl HarrisState for MultiLineConfig {
    fn geometry(&self) -> &Geometry {
        MultiLineConfig::geometry(self)
    }

    fn line_count(&self) -> usize {
        self.depth()
    }

    fn line(&self, k: usize) -> &Configuration {
        &self.lines()[k]
    }

    /// The cascade `J`: line `n` jumps to `x`, then each line below jumps
    /// to the position just vacated above it.
    fn apply_point(&mut self, x: f64, jumps: &mut Vec<Option<f64>>) -> Result<()> {
        jumps.clear();
        jumps.resize(self.depth(), None);
        let mut target = x;
        for k in (0..self.depth()).rev() {
            match self.lines_mut()[k].jump_from_left(target)? {
                Some(old) => {
                    jumps[k] = Some(old);
                    target = old;
                }
                None => break,
            }
        }
        Ok(())
    }
}

/// One HAD move of a single line.
pub fn had_step(eta: &Configuration, x: f64) -> Result<Configuration> {
    let mut next = eta.clone();
    next.jump_from_left(x)?;
    Ok(next)
}

/// Every line takes an independent HAD move at the same `x`.
pub fn coupled_step(eta: &CoupledConfig, x: f64) -> Result<CoupledConfig> {
    let mut next = eta.clone();
    next.apply_point(x, &mut Vec::new())?;
    Ok(next)
}

/// The multiclass move, defined through the coupled representation.
pub fn multiclass_step(xi: &MulticlassConfig, x: f64) -> Result<MulticlassConfig> {
    collapse_classes(&coupled_step(&expand_classes(xi)?, x)?)
}

/// The multi-line jump `J`. Returns the new stack and the vacated
/// positions `x^1, …, x^n`.
pub fn multiline_step(alpha: &MultiLineConfig, x: f64) -> Result<(MultiLineConfig, Vec<Option<f64>>)> {
    let mut next = alpha.clone();
    let mut jumps = Vec::new();
    next.apply_point(x, &mut jumps)?;
    Ok((next, jumps))
}

/// The reverse jump `J*`: line 1 takes the nearest particle right of `y`
/// to `y`, and each line above does the same at the position vacated below
/// it. Returns the new stack and `y^1, …, y^n`.
pub fn multiline_reverse_step(alpha: &MultiLineConfig, y: f64) -> Result<(MultiLineConfig, Vec<Option<f64>>)> {
    let mut next = alpha.clone();
    let mut jumps = vec![None; alpha.depth()];
    let mut target = y;
    for k in 0..alpha.depth() {
        match next.lines_mut()[k].jump_from_right(target)? {
            Some(old) => {
                jumps[k] = Some(old);
                target = old;
            }
            None => break,
        }
    }
    Ok((next, jumps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::model::RngStream;
    use crate::queueing::build_coupled;
    use proptest::prelude::*;
    use rand::Rng;

    fn cfg(n: f64, ps: &[f64]) -> Configuration {
        Configuration::new(Geometry::cycle(n).unwrap(), ps.to_vec()).unwrap()
    }

    fn random_stack(seed: u64, n: usize) -> MultiLineConfig {
        let g = Geometry::cycle(50.0).unwrap();
        let mut rng = RngStream::new(seed, 7).rng();
        let mut count = 0;
        let lines = (0..n)
            .map(|_| {
                count += rng.random_range(1..10);
                Configuration::sample_count(g, count, &mut rng)
            })
            .collect();
        MultiLineConfig::new(lines).unwrap()
    }

    #[test]
    fn had_step_examples() {
        assert_eq!(had_step(&cfg(10.0, &[1.0, 3.0, 5.0]), 4.0).unwrap(), cfg(10.0, &[1.0, 4.0, 5.0]));
        assert_eq!(had_step(&cfg(10.0, &[1.0, 3.0, 5.0]), 0.5).unwrap(), cfg(10.0, &[0.5, 1.0, 3.0]));
        assert!(matches!(had_step(&cfg(10.0, &[]), 1.0), Err(Error::EmptyConfiguration)));
        assert!(matches!(had_step(&cfg(10.0, &[1.0]), 1.0), Err(Error::PositionCollision(_))));
    }

    #[test]
    fn coupled_step_example() {
        let eta = CoupledConfig::new(vec![cfg(10.0, &[3.0]), cfg(10.0, &[1.0, 3.0])]).unwrap();
        let next = coupled_step(&eta, 4.0).unwrap();
        assert_eq!(next.lines(), &[cfg(10.0, &[4.0]), cfg(10.0, &[1.0, 4.0])]);
    }

    #[test]
    fn coupled_equal_lines_stay_equal() {
        let line = cfg(10.0, &[1.0, 2.0, 7.0]);
        let eta = CoupledConfig::new(vec![line.clone(), line.clone(), line]).unwrap();
        let next = coupled_step(&eta, 0.5).unwrap();
        assert!(next.lines().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn multiline_example() {
        let alpha = MultiLineConfig::new(vec![cfg(4.0, &[0.5, 2.5]), cfg(4.0, &[1.0, 3.0])]).unwrap();
        let (next, jumps) = multiline_step(&alpha, 3.5).unwrap();
        assert_eq!(next.lines(), &[cfg(4.0, &[0.5, 3.0]), cfg(4.0, &[1.0, 3.5])]);
        assert_eq!(jumps, vec![Some(2.5), Some(3.0)]);
    }

    #[test]
    fn single_line_cases_reduce_to_had() {
        let eta = cfg(10.0, &[1.0, 3.0, 5.0]);
        let alpha = MultiLineConfig::new(vec![eta.clone()]).unwrap();
        let (next, jumps) = multiline_step(&alpha, 4.0).unwrap();
        assert_eq!(next.lines()[0], had_step(&eta, 4.0).unwrap());
        assert_eq!(jumps, vec![Some(3.0)]);
        let xi = MulticlassConfig::new(vec![eta.clone()]).unwrap();
        assert_eq!(multiclass_step(&xi, 4.0).unwrap().classes()[0], had_step(&eta, 4.0).unwrap());
        let (back, ys) = multiline_reverse_step(&alpha, 4.0).unwrap();
        assert_eq!(back.lines()[0], cfg(10.0, &[1.0, 3.0, 4.0]));
        assert_eq!(ys, vec![Some(5.0)]);
    }

    #[test]
    fn interval_cascade_stops() {
        let g = Geometry::interval(10.0).unwrap();
        let alpha = MultiLineConfig::new(vec![
            Configuration::new(g, vec![5.0]).unwrap(),
            Configuration::new(g, vec![2.0, 6.0]).unwrap(),
        ])
        .unwrap();
        let (next, jumps) = multiline_step(&alpha, 3.0).unwrap();
        assert_eq!(jumps, vec![None, Some(2.0)]);
        assert_eq!(next.lines()[0].positions(), &[5.0]);
        assert_eq!(next.lines()[1].positions(), &[3.0, 6.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn reverse_undoes_forward(seed in any::<u64>(), n in 1usize..5, x in 0.0f64..50.0) {
            let alpha = random_stack(seed, n);
            prop_assume!(alpha.lines().iter().all(|l| !l.contains(x)));
            let (fwd, xs) = multiline_step(&alpha, x).unwrap();
            let (back, ys) = multiline_reverse_step(&fwd, xs[0].unwrap()).unwrap();
            prop_assert_eq!(&back, &alpha);
            // The reverse cascade retraces the forward one.
            let mut expected: Vec<Option<f64>> = xs[1..].to_vec();
            expected.push(Some(x));
            prop_assert_eq!(ys, expected);
        }

        #[test]
        fn forward_undoes_reverse(seed in any::<u64>(), n in 1usize..5, y in 0.0f64..50.0) {
            let alpha = random_stack(seed, n);
            prop_assume!(alpha.lines().iter().all(|l| !l.contains(y)));
            let (rev, ys) = multiline_reverse_step(&alpha, y).unwrap();
            let (back, _) = multiline_step(&rev, ys[n - 1].unwrap()).unwrap();
            prop_assert_eq!(back, alpha);
        }

        #[test]
        fn one_step_commutes_with_c(seed in any::<u64>(), n in 1usize..5, x in 0.0f64..50.0) {
            let alpha = random_stack(seed, n);
            prop_assume!(alpha.lines().iter().all(|l| !l.contains(x)));
            let (next, _) = multiline_step(&alpha, x).unwrap();
            let lhs = coupled_step(&build_coupled(&alpha).unwrap(), x).unwrap();
            prop_assert_eq!(lhs, build_coupled(&next).unwrap());
        }

        #[test]
        fn steps_preserve_counts_and_nesting(seed in any::<u64>(), n in 1usize..5, x in 0.0f64..50.0) {
            let alpha = random_stack(seed, n);
            prop_assume!(alpha.lines().iter().all(|l| !l.contains(x)));
            let (next, _) = multiline_step(&alpha, x).unwrap();
            prop_assert_eq!(next.counts(), alpha.counts());
            let eta = build_coupled(&alpha).unwrap();
            let stepped = coupled_step(&eta, x).unwrap();
            prop_assert!(stepped.is_nested());
            let xi = collapse_classes(&eta).unwrap();
            let moved = multiclass_step(&xi, x).unwrap();
            let before: Vec<usize> = xi.classes().iter().map(Configuration::len).collect();
            let after: Vec<usize> = moved.classes().iter().map(Configuration::len).collect();
            prop_assert_eq!(before, after);
        }
    }
}
