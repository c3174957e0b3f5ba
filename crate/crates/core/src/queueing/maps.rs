use super::engine::{run_queue, split_departures_unused, tandem_departures, Outcome};
use super::stacks::{CoupledConfig, MultiLineConfig, MulticlassConfig};
use crate::error::{Error, Result};
use crate::model::Configuration;

/// The map `C`: line `k` of the result is the departure process of the
/// tandem fed by `α^k` and served successively by `α^{k+1}, …, α^n`.
pub fn build_coupled(alpha: &MultiLineConfig) -> Result<CoupledConfig> {
    let lines = alpha.lines();
    let eta = (0..lines.len()).map(|k| tandem_departures(&lines[k..])).collect::<Result<Vec<_>>>()?;
    Ok(CoupledConfig::from_lines_unchecked(eta))
}

/// The map `R`: class `k` is `η^k \ η^{k-1}`.
pub fn collapse_classes(eta: &CoupledConfig) -> Result<MulticlassConfig> {
    if !eta.is_nested() {
        let k = eta.lines().windows(2).position(|w| !w[0].is_subset(&w[1])).unwrap_or(0);
        return Err(Error::NotNested(k + 1));
    }
    let lines = eta.lines();
    let mut classes = Vec::with_capacity(lines.len());
    classes.push(lines[0].clone());
    classes.extend(lines.windows(2).map(|w| w[1].difference(&w[0])));
    Ok(MulticlassConfig::from_classes_unchecked(classes))
}

/// The inverse of `R`: line `k` is the union of classes `1..=k`.
pub fn expand_classes(xi: &MulticlassConfig) -> Result<CoupledConfig> {
    let classes = xi.classes();
    let mut lines: Vec<Configuration> = Vec::with_capacity(classes.len());
    for (k, class) in classes.iter().enumerate() {
        let line = match lines.last() {
            None => class.clone(),
            Some(prev) => prev.union(class).map_err(|e| match e {
                Error::PositionCollision(_) => Error::NotDisjoint(
                    classes[..k].iter().position(|c| !c.is_disjoint(class)).map_or(k, |j| j + 1),
                    k + 1,
                ),
                other => other,
            })?,
        };
        lines.push(line);
    }
    Ok(CoupledConfig::from_lines_unchecked(lines))
}

/// One system of the multiclass tandem: customers of classes
/// `1..=arrivals.len()` arrive at `arrivals[j]` and are served with strict
/// priority at the instants of `services`. Returns the per-class departure
/// times and the unused services, which together partition `services`.
///
/// The result is computed twice: once by running the priority queue
/// directly, once by letting each class in turn use the services the higher
/// classes left over (with the unused services taken from the merged
/// queue). A disagreement is reported as [`Error::RecursionMismatch`].
pub fn class_departures(arrivals: &[Configuration], services: &Configuration) -> Result<(Vec<Configuration>, Configuration)> {
    let g = *services.geometry();
    let refs: Vec<&Configuration> = arrivals.iter().collect();
    let mut departures = vec![Vec::new(); arrivals.len()];
    let mut unused = Vec::new();
    run_queue(&refs, services, |s| match s.outcome {
        Outcome::Departure { class, .. } => departures[class].push(s.t),
        Outcome::Unused => unused.push(s.t),
        Outcome::Arrival { .. } => {}
    })?;
    let departures: Vec<Configuration> =
        departures.into_iter().map(|d| Configuration::from_sorted_unchecked(g, d)).collect();
    let unused = Configuration::from_sorted_unchecked(g, unused);

    let mut leftover = services.clone();
    for (class, arrived) in arrivals.iter().enumerate() {
        let (d, rest) = split_departures_unused(arrived, &leftover)?;
        if d != departures[class] {
            return Err(Error::RecursionMismatch(arrivals.len() + 1));
        }
        leftover = rest;
    }
    let merged = arrivals
        .iter()
        .try_fold(Configuration::empty(g), |acc, a| acc.union(a))?;
    let (_, merged_unused) = split_departures_unused(&merged, services)?;
    if leftover != unused || merged_unused != unused {
        return Err(Error::RecursionMismatch(arrivals.len() + 1));
    }
    Ok((departures, unused))
}

/// The map `M`: runs the multiclass tandem recursion. System 1 serves
/// infinitely many class-1 customers at `α^1`; system `k` receives the
/// classes `1..k-1` leaving system `k - 1`, serves them with priority at
/// `α^k`, and its unused services become class `k`.
pub fn map_multiclass(alpha: &MultiLineConfig) -> Result<MulticlassConfig> {
    let lines = alpha.lines();
    let mut xi = vec![lines[0].clone()];
    for services in &lines[1..] {
        let (mut departures, unused) = class_departures(&xi, services)?;
        departures.push(unused);
        xi = departures;
    }
    Ok(MulticlassConfig::from_classes_unchecked(xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Geometry, RngStream};
    use proptest::prelude::*;

    fn cyc(ps: &[f64]) -> Configuration {
        Configuration::new(Geometry::cycle(4.0).unwrap(), ps.to_vec()).unwrap()
    }

    fn random_stack(seed: u64, n: usize, geometry: Geometry, max: usize) -> MultiLineConfig {
        let mut rng = RngStream::new(seed, 1).rng();
        let mut counts: Vec<usize> = Vec::new();
        for k in 0..n {
            let lo = counts.last().map_or(0, |c| c + 1);
            let hi = max - (n - 1 - k);
            counts.push(lo + (seed as usize / (k + 1)) % (hi - lo + 1));
        }
        MultiLineConfig::new(counts.iter().map(|&c| Configuration::sample_count(geometry, c, &mut rng)).collect()).unwrap()
    }

    #[test]
    fn single_line_maps_are_identity() {
        let a = MultiLineConfig::new(vec![cyc(&[1.0, 2.0])]).unwrap();
        assert_eq!(build_coupled(&a).unwrap().lines(), a.lines());
        assert_eq!(map_multiclass(&a).unwrap().classes(), a.lines());
    }

    #[test]
    fn two_line_example() {
        let a = MultiLineConfig::new(vec![cyc(&[1.0]), cyc(&[0.5, 2.0])]).unwrap();
        let eta = build_coupled(&a).unwrap();
        assert_eq!(eta.lines(), &[cyc(&[2.0]), cyc(&[0.5, 2.0])]);
        assert!(eta.is_nested());
        let xi = map_multiclass(&a).unwrap();
        assert_eq!(xi.classes(), &[cyc(&[2.0]), cyc(&[0.5])]);
    }

    #[test]
    fn collapse_and_expand_examples() {
        let eta = CoupledConfig::new(vec![cyc(&[2.0]), cyc(&[0.5, 2.0])]).unwrap();
        let xi = collapse_classes(&eta).unwrap();
        assert_eq!(xi.classes(), &[cyc(&[2.0]), cyc(&[0.5])]);
        assert_eq!(expand_classes(&xi).unwrap(), eta);
        assert!(matches!(CoupledConfig::new(vec![cyc(&[1.0]), cyc(&[2.0])]), Err(Error::NotNested(1))));
        assert!(matches!(MulticlassConfig::new(vec![cyc(&[1.0]), cyc(&[1.0])]), Err(Error::NotDisjoint(1, 2))));
    }

    #[test]
    fn single_class_departures_reduce_to_split() {
        let g = Geometry::cycle(25.0).unwrap();
        let mut rng = RngStream::new(3, 0).rng();
        let a = Configuration::sample_count(g, 6, &mut rng);
        let s = Configuration::sample_count(g, 10, &mut rng);
        let (deps, unused) = class_departures(std::slice::from_ref(&a), &s).unwrap();
        let (d, u) = split_departures_unused(&a, &s).unwrap();
        assert_eq!(deps, vec![d]);
        assert_eq!(unused, u);
    }

    #[test]
    fn unstable_stack_propagates() {
        let a = MultiLineConfig::new(vec![cyc(&[1.0, 3.0]), cyc(&[0.5, 2.0])]).unwrap();
        assert!(matches!(build_coupled(&a), Err(Error::UnstableQueue { .. })));
        assert!(matches!(map_multiclass(&a), Err(Error::UnstableQueue { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn m_equals_r_after_c(seed in any::<u64>(), n in 1usize..5) {
            let alpha = random_stack(seed, n, Geometry::cycle(50.0).unwrap(), 40);
            let via_rc = collapse_classes(&build_coupled(&alpha).unwrap()).unwrap();
            prop_assert_eq!(map_multiclass(&alpha).unwrap(), via_rc);
        }

        #[test]
        fn coupled_is_nested_and_keeps_counts(seed in any::<u64>(), n in 1usize..5) {
            let alpha = random_stack(seed, n, Geometry::cycle(50.0).unwrap(), 40);
            let eta = build_coupled(&alpha).unwrap();
            prop_assert!(eta.is_nested());
            let counts: Vec<usize> = eta.lines().iter().map(Configuration::len).collect();
            prop_assert_eq!(counts, alpha.counts());
            prop_assert_eq!(expand_classes(&collapse_classes(&eta).unwrap()).unwrap(), eta);
        }

        #[test]
        fn split_partitions_services(seed in any::<u64>(), na in 0usize..30, extra in 1usize..20) {
            let g = Geometry::cycle(40.0).unwrap();
            let mut rng = RngStream::new(seed, 2).rng();
            let a = Configuration::sample_count(g, na, &mut rng);
            let s = Configuration::sample_count(g, na + extra, &mut rng);
            let (d, u) = split_departures_unused(&a, &s).unwrap();
            prop_assert!(d.is_disjoint(&u));
            prop_assert_eq!(d.union(&u).unwrap(), s);
            prop_assert_eq!(d.len(), a.len());
        }

        #[test]
        fn departures_monotone_in_arrivals(seed in any::<u64>(), na in 1usize..30) {
            let g = Geometry::interval(40.0).unwrap();
            let mut rng = RngStream::new(seed, 3).rng();
            let a = Configuration::sample_count(g, na, &mut rng);
            let s = Configuration::sample_count(g, na + 5, &mut rng);
            let keep: Vec<f64> = a.positions().iter().copied().enumerate().filter(|(i, _)| (seed >> (i % 64)) & 1 == 1).map(|(_, p)| p).collect();
            let sub = Configuration::new(g, keep).unwrap();
            let (d_sub, _) = split_departures_unused(&sub, &s).unwrap();
            let (d, _) = split_departures_unused(&a, &s).unwrap();
            prop_assert!(d_sub.is_subset(&d));
        }

        #[test]
        fn tandem_nesting_chain(seed in any::<u64>(), n in 2usize..5) {
            let alpha = random_stack(seed, n, Geometry::cycle(50.0).unwrap(), 40);
            let lines = alpha.lines();
            for k in 0..n - 1 {
                let outer = tandem_departures(&lines[k..]).unwrap();
                let inner = tandem_departures(&lines[k + 1..]).unwrap();
                prop_assert!(outer.is_subset(&inner));
            }
        }

        #[test]
        fn priority_union_matches_merged_split(seed in any::<u64>(), n in 3usize..5) {
            let alpha = random_stack(seed, n, Geometry::cycle(50.0).unwrap(), 40);
            let xi = map_multiclass(&MultiLineConfig::new(alpha.lines()[..n - 1].to_vec()).unwrap()).unwrap();
            let services = &alpha.lines()[n - 1];
            let (deps, unused) = class_departures(xi.classes(), services).unwrap();
            let merged = deps.iter().try_fold(Configuration::empty(*services.geometry()), |a, d| a.union(d)).unwrap();
            let all_arrivals = xi.classes().iter().try_fold(Configuration::empty(*services.geometry()), |a, d| a.union(d)).unwrap();
            let (d, u) = split_departures_unused(&all_arrivals, services).unwrap();
            prop_assert_eq!(merged, d);
            prop_assert_eq!(&unused, &u);
            // Every class queue is empty at unused services.
            let tr = super::super::queue_trajectory(xi.classes(), services).unwrap();
            for &t in unused.positions() {
                let i = tr.times.partition_point(|&s| s < t);
                prop_assert!(tr.before(i).iter().all(|&q| q == 0));
            }
            prop_assert!(tr.satisfies_jump_identity());
            for j in 0..n - 1 {
                let d = tr.departures(j);
                prop_assert_eq!(d.as_slice(), deps[j].positions());
            }
        }

        #[test]
        fn fifo_preserves_order_within_class(seed in any::<u64>(), n in 2usize..5) {
            let alpha = random_stack(seed, n, Geometry::cycle(50.0).unwrap(), 40);
            let xi = map_multiclass(&MultiLineConfig::new(alpha.lines()[..n - 1].to_vec()).unwrap()).unwrap();
            let m = super::super::fifo_links(xi.classes(), &alpha.lines()[n - 1]).unwrap();
            for class in 0..n - 1 {
                let links: Vec<_> = m.links.iter().filter(|l| l.class == class).collect();
                prop_assert_eq!(links.len(), xi.classes()[class].len());
                // Departure order follows arrival order cyclically: at most
                // one descent in the departure sequence.
                let descents = links.windows(2).filter(|w| w[1].departure < w[0].departure).count();
                prop_assert!(descents <= 1);
            }
        }
    }
}
