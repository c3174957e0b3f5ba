use std::io::Write;

use super::step::HarrisState;
use crate::error::{Error, Result};
use crate::model::{Point, PointField};

/// A finished run of the graphical construction.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub initial: S,
    pub points: PointField,
    /// `(s, state after every point with t <= s)`, in the requested order.
    pub snapshots: Vec<(f64, S)>,
    pub final_state: S,
    /// `duals[k]` holds `(position of line k before the jump, t)` for every
    /// point that moved line `k`.
    pub duals: Vec<PointField>,
}

impl<S: HarrisState> Trajectory<S> {
    /// The points that move line `k` on their own: the duals of line
    /// `k + 1` for a multi-line stack, `ω` itself for the top line.
    pub fn driving_points(&self, k: usize) -> &PointField {
        if k + 1 < self.duals.len() {
            &self.duals[k + 1]
        } else {
            &self.points
        }
    }

    /// Snapshot rows `time,line,position`, lines 1-based.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "line", "position"])?;
        for (s, state) in &self.snapshots {
            for k in 0..state.line_count() {
                for &p in state.line(k).positions() {
                    w.serialize((s, k + 1, p))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Dual point rows `line,x,t`, lines 1-based.
    pub fn write_duals_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["line", "x", "t"])?;
        for (k, field) in self.duals.iter().enumerate() {
            for p in field.points() {
                w.serialize((k + 1, p.x, p.t))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Applies every point of `omega` to `state` in time order.
pub fn run<S: HarrisState>(state: &mut S, omega: &PointField) -> Result<()> {
    if state.geometry() != omega.geometry() {
        return Err(Error::GeometryMismatch);
    }
    let mut jumps = Vec::with_capacity(state.line_count());
    for p in omega.points() {
        state.apply_point(p.x, &mut jumps)?;
    }
    Ok(())
}

/// Runs the graphical construction from `initial` through `omega`,
/// recording snapshots at the sorted, nonnegative `times` and the dual
/// points of every line.
pub fn evolve<S: HarrisState>(initial: &S, omega: &PointField, times: &[f64]) -> Result<Trajectory<S>> {
    if initial.geometry() != omega.geometry() {
        return Err(Error::GeometryMismatch);
    }
    if let Some(&s) = times.iter().find(|&&s| !(s >= 0.0)) {
        return Err(Error::NegativeHorizon(s));
    }
    if let Some(i) = times.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::TimesNotSorted(i + 1));
    }
    let lines = initial.line_count();
    let mut duals: Vec<Vec<Point>> = vec![Vec::new(); lines];
    let mut snapshots = Vec::with_capacity(times.len());
    let mut next_time = times.iter().peekable();
    let mut state = initial.clone();
    let mut jumps = Vec::with_capacity(lines);
    for p in omega.points() {
        while let Some(&&s) = next_time.peek() {
            if s >= p.t {
                break;
            }
            snapshots.push((s, state.clone()));
            next_time.next();
        }
        state.apply_point(p.x, &mut jumps)?;
        for (k, jump) in jumps.iter().enumerate() {
            if let Some(x) = jump {
                duals[k].push(Point { x: *x, t: p.t });
            }
        }
    }
    snapshots.extend(next_time.map(|&s| (s, state.clone())));
    let geometry = *omega.geometry();
    Ok(Trajectory {
        initial: initial.clone(),
        points: omega.clone(),
        snapshots,
        final_state: state,
        duals: duals.into_iter().map(|d| PointField::from_sorted_unchecked(geometry, d)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Configuration, Geometry, RngStream};
    use crate::queueing::{build_coupled, map_multiclass, MultiLineConfig};
    use proptest::prelude::*;
    use rand::Rng;

    fn cycle(n: f64, ps: &[f64]) -> Configuration {
        Configuration::new(Geometry::cycle(n).unwrap(), ps.to_vec()).unwrap()
    }

    fn random_stack(seed: u64, n: usize) -> MultiLineConfig {
        let g = Geometry::cycle(50.0).unwrap();
        let mut rng = RngStream::new(seed, 11).rng();
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
    fn empty_field_keeps_initial_state() {
        let eta = cycle(10.0, &[1.0, 3.0]);
        let tr = evolve(&eta, &PointField::empty(*eta.geometry()), &[0.0]).unwrap();
        assert_eq!(tr.snapshots, vec![(0.0, eta.clone())]);
        assert_eq!(tr.final_state, eta);
        assert!(tr.duals[0].is_empty());
    }

    #[test]
    fn one_point_records_dual() {
        let eta = cycle(10.0, &[1.0, 3.0, 5.0]);
        let omega = PointField::new(*eta.geometry(), vec![Point { x: 4.0, t: 0.7 }]).unwrap();
        let tr = evolve(&eta, &omega, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(tr.snapshots[0].1, eta);
        assert_eq!(tr.snapshots[1].1, eta);
        assert_eq!(tr.snapshots[2].1, cycle(10.0, &[1.0, 4.0, 5.0]));
        assert_eq!(tr.duals[0].points(), &[Point { x: 3.0, t: 0.7 }]);
    }

    #[test]
    fn snapshot_includes_point_at_its_time() {
        let eta = cycle(10.0, &[1.0]);
        let omega = PointField::new(*eta.geometry(), vec![Point { x: 4.0, t: 1.0 }]).unwrap();
        let tr = evolve(&eta, &omega, &[1.0]).unwrap();
        assert_eq!(tr.snapshots[0].1, cycle(10.0, &[4.0]));
    }

    #[test]
    fn bad_snapshot_times_rejected() {
        let eta = cycle(10.0, &[1.0]);
        let omega = PointField::empty(*eta.geometry());
        assert!(matches!(evolve(&eta, &omega, &[2.0, 1.0]), Err(Error::TimesNotSorted(1))));
        assert!(matches!(evolve(&eta, &omega, &[-1.0]), Err(Error::NegativeHorizon(_))));
    }

    #[test]
    fn csv_exports() {
        let eta = cycle(10.0, &[1.0, 3.0, 5.0]);
        let omega = PointField::new(*eta.geometry(), vec![Point { x: 4.0, t: 0.5 }]).unwrap();
        let tr = evolve(&eta, &omega, &[1.0]).unwrap();
        let mut a = Vec::new();
        tr.write_csv(&mut a).unwrap();
        assert_eq!(String::from_utf8(a).unwrap(), "time,line,position\n1.0,1,1.0\n1.0,1,4.0\n1.0,1,5.0\n");
        let mut b = Vec::new();
        tr.write_duals_csv(&mut b).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "line,x,t\n1,3.0,0.5\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn semigroup(seed in any::<u64>(), s in 0.0f64..5.0) {
            let g = Geometry::cycle(30.0).unwrap();
            let mut rng = RngStream::new(seed, 0).rng();
            let eta = Configuration::sample_count(g, 12, &mut rng);
            let omega = PointField::sample(g, 5.0, &mut rng).unwrap();
            let whole = evolve(&eta, &omega, &[5.0]).unwrap().final_state;
            let mut split = eta.clone();
            run(&mut split, &omega.until(s)).unwrap();
            run(&mut split, &omega.shifted_after(s)).unwrap();
            prop_assert_eq!(split, whole);
        }

        #[test]
        fn evolution_commutes_with_c_and_m(seed in any::<u64>(), n in 1usize..5) {
            let alpha = random_stack(seed, n);
            let mut rng = RngStream::new(seed, 12).rng();
            let omega = PointField::sample(*alpha.geometry(), 5.0, &mut rng).unwrap();
            let mut psi = alpha.clone();
            run(&mut psi, &omega).unwrap();
            let mut phi = build_coupled(&alpha).unwrap();
            run(&mut phi, &omega).unwrap();
            prop_assert_eq!(build_coupled(&psi).unwrap(), phi);
            let mut upsilon = map_multiclass(&alpha).unwrap();
            run(&mut upsilon, &omega).unwrap();
            prop_assert_eq!(map_multiclass(&psi).unwrap(), upsilon);
        }

        #[test]
        fn duals_drive_lower_lines(seed in any::<u64>(), n in 1usize..5) {
            let alpha = random_stack(seed, n);
            let mut rng = RngStream::new(seed, 13).rng();
            let omega = PointField::sample(*alpha.geometry(), 5.0, &mut rng).unwrap();
            let tr = evolve(&alpha, &omega, &[1.0, 3.0, 5.0]).unwrap();
            for k in 0..n {
                prop_assert_eq!(tr.duals[k].len(), omega.len());
                let alone = evolve(&alpha.lines()[k], tr.driving_points(k), &[1.0, 3.0, 5.0]).unwrap();
                for (a, b) in alone.snapshots.iter().zip(&tr.snapshots) {
                    prop_assert_eq!(&a.1, &b.1.lines()[k]);
                }
                prop_assert_eq!(&alone.duals[0], &tr.duals[k]);
            }
        }
    }
}
