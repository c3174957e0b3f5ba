use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Configuration, Geometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    /// Arrival of a customer of the given class (0-based).
    Arrival(usize),
    Service,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    t: f64,
    kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Outcome {
    Arrival { class: usize },
    Departure { class: usize, arrived: f64 },
    Unused,
}

pub(crate) struct Step<'a> {
    pub t: f64,
    pub outcome: Outcome,
    /// Waiting customers per class (their arrival times), after the event.
    pub queues: &'a [VecDeque<f64>],
}

fn merge_events(arrivals: &[&Configuration], services: &Configuration) -> Result<Vec<Event>> {
    let geometry = services.geometry();
    if arrivals.iter().any(|a| a.geometry() != geometry) {
        return Err(Error::GeometryMismatch);
    }
    let total = services.len() + arrivals.iter().map(|a| a.len()).sum::<usize>();
    let mut events = Vec::with_capacity(total);
    for (class, a) in arrivals.iter().enumerate() {
        events.extend(a.positions().iter().map(|&t| Event { t, kind: EventKind::Arrival(class) }));
    }
    events.extend(services.positions().iter().map(|&t| Event { t, kind: EventKind::Service }));
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    if let Some(w) = events.windows(2).find(|w| w[0].t == w[1].t) {
        return Err(Error::PositionCollision(w[0].t));
    }
    Ok(events)
}

/// Index of the service at which the one-period walk first attains its
/// minimum. That service is a record-down time of the periodic walk, so the
/// queue is empty just before it.
fn cyclic_anchor(events: &[Event]) -> usize {
    let mut z: i64 = 0;
    let mut best = (i64::MAX, 0);
    for (i, e) in events.iter().enumerate() {
        z += match e.kind {
            EventKind::Arrival(_) => 1,
            EventKind::Service => -1,
        };
        if z < best.0 {
            best = (z, i);
        }
    }
    best.1
}

fn apply(event: &Event, queues: &mut [VecDeque<f64>]) -> Outcome {
    match event.kind {
        EventKind::Arrival(class) => {
            queues[class].push_back(event.t);
            Outcome::Arrival { class }
        }
        EventKind::Service => match queues.iter_mut().enumerate().find(|(_, q)| !q.is_empty()) {
            Some((class, q)) => Outcome::Departure { class, arrived: q.pop_front().expect("nonempty") },
            None => Outcome::Unused,
        },
    }
}

/// Runs the priority FIFO queue fed by `arrivals[j]` (class `j`, lower index
/// served first) and served at the instants of `services`, visiting events
/// in increasing time. Returns the waiting customers at the left edge of the
/// domain: empty on an interval, the periodic (minimal) state on a cycle.
pub(crate) fn run_queue<F>(arrivals: &[&Configuration], services: &Configuration, mut visit: F) -> Result<Vec<VecDeque<f64>>>
where
    F: FnMut(&Step<'_>),
{
    let events = merge_events(arrivals, services)?;
    let classes = arrivals.len();
    let mut queues = vec![VecDeque::new(); classes];
    if services.geometry().is_cycle() {
        let total: usize = arrivals.iter().map(|a| a.len()).sum();
        if services.len() <= total {
            return Err(Error::UnstableQueue { arrivals: total, services: services.len() });
        }
        // Empty just before the anchor; run to the end of the period to get
        // the state at the origin.
        for e in &events[cyclic_anchor(&events)..] {
            apply(e, &mut queues);
        }
    }
    let initial = queues.clone();
    for e in &events {
        let outcome = apply(e, &mut queues);
        visit(&Step { t: e.t, outcome, queues: &queues });
    }
    debug_assert!(
        !services.geometry().is_cycle() || queues == initial,
        "cyclic queue is not periodic"
    );
    Ok(initial)
}

/// Splits the services `S` into departures `D(A, S)` and unused services
/// `U(A, S)`.
///
/// An unused service is a time at which the walk that steps up at arrivals
/// and down at services hits a strict new minimum; equivalently the queue is
/// empty just before it. On an interval the queue starts empty at the left
/// edge. On a cycle the services must outnumber the arrivals and the queue is
/// the periodic one.
pub fn split_departures_unused(arrivals: &Configuration, services: &Configuration) -> Result<(Configuration, Configuration)> {
    let mut departures = Vec::with_capacity(arrivals.len());
    let mut unused = Vec::with_capacity(services.len().saturating_sub(arrivals.len()));
    run_queue(&[arrivals], services, |s| match s.outcome {
        Outcome::Departure { .. } => departures.push(s.t),
        Outcome::Unused => unused.push(s.t),
        Outcome::Arrival { .. } => {}
    })?;
    let g = *services.geometry();
    Ok((
        Configuration::from_sorted_unchecked(g, departures),
        Configuration::from_sorted_unchecked(g, unused),
    ))
}

/// Departures from `n - 1` queues in tandem: `lines[0]` arrives at the first
/// queue, `lines[k]` serves the k-th, and each queue's departures feed the
/// next. A single line is returned unchanged.
pub fn tandem_departures(lines: &[Configuration]) -> Result<Configuration> {
    let (first, rest) = lines.split_first().ok_or_else(|| Error::InvalidParameters("tandem needs at least one line".into()))?;
    rest.iter().try_fold(first.clone(), |arrivals, services| {
        split_departures_unused(&arrivals, services).map(|(d, _)| d)
    })
}

/// Piecewise-constant path of a (priority) queue, sampled just after each
/// event.
#[derive(Debug, Clone, Serialize)]
pub struct QueueTrajectory {
    pub geometry: Geometry,
    /// Queue length per class at the left edge, before any event.
    pub initial_queue: Vec<u32>,
    pub times: Vec<f64>,
    pub kinds: Vec<EventKind>,
    /// Walk value after each event; the walk starts at 0 at the left edge.
    pub walk: Vec<i64>,
    /// Queue length per class after each event.
    pub queue: Vec<Vec<u32>>,
}

impl QueueTrajectory {
    pub fn classes(&self) -> usize {
        self.initial_queue.len()
    }

    /// Queue lengths just before event `i`.
    pub fn before(&self, i: usize) -> &[u32] {
        if i == 0 {
            &self.initial_queue
        } else {
            &self.queue[i - 1]
        }
    }

    /// Queue lengths at time `t` (right-continuous).
    pub fn at(&self, t: f64) -> &[u32] {
        let k = self.times.partition_point(|&s| s <= t);
        self.before(k)
    }

    /// Service times at which a customer of `class` departed.
    pub fn departures(&self, class: usize) -> Vec<f64> {
        (0..self.times.len())
            .filter(|&i| self.kinds[i] == EventKind::Service && self.queue[i][class] < self.before(i)[class])
            .map(|i| self.times[i])
            .collect()
    }

    /// Service times at which every class queue was empty.
    pub fn unused(&self) -> Vec<f64> {
        (0..self.times.len())
            .filter(|&i| self.kinds[i] == EventKind::Service && self.before(i).iter().all(|&q| q == 0))
            .map(|i| self.times[i])
            .collect()
    }

    /// Checks the jump identity at every event: a class-`j` arrival adds one
    /// class-`j` customer, and a service removes one class-`j` customer iff
    /// all higher-priority queues were empty and class `j` was not.
    pub fn satisfies_jump_identity(&self) -> bool {
        (0..self.times.len()).all(|i| {
            let before = self.before(i);
            let after = &self.queue[i];
            (0..self.classes()).all(|j| {
                let arrival = u32::from(self.kinds[i] == EventKind::Arrival(j));
                let served = u32::from(
                    self.kinds[i] == EventKind::Service && before[..j].iter().all(|&q| q == 0) && before[j] > 0,
                );
                i64::from(after[j]) - i64::from(before[j]) == i64::from(arrival) - i64::from(served)
            })
        })
    }

    /// Rows `time,event,walk,q1,…,qk`; `event` is `arrival-j` (1-based class)
    /// or `service`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string(), "event".to_string(), "walk".to_string()];
        header.extend((1..=self.classes()).map(|j| format!("q{j}")));
        w.write_record(&header)?;
        for i in 0..self.times.len() {
            let event = match self.kinds[i] {
                EventKind::Arrival(j) => format!("arrival-{}", j + 1),
                EventKind::Service => "service".to_string(),
            };
            let mut row = vec![self.times[i].to_string(), event, self.walk[i].to_string()];
            row.extend(self.queue[i].iter().map(u32::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Full trajectory of the priority queue fed by `arrivals` (class order =
/// priority order) and served at `services`.
pub fn queue_trajectory(arrivals: &[Configuration], services: &Configuration) -> Result<QueueTrajectory> {
    let refs: Vec<&Configuration> = arrivals.iter().collect();
    let cap = services.len() + arrivals.iter().map(|a| a.len()).sum::<usize>();
    let mut times = Vec::with_capacity(cap);
    let mut kinds = Vec::with_capacity(cap);
    let mut walk = Vec::with_capacity(cap);
    let mut queue = Vec::with_capacity(cap);
    let mut z = 0i64;
    let initial = run_queue(&refs, services, |s| {
        let kind = match s.outcome {
            Outcome::Arrival { class } => EventKind::Arrival(class),
            _ => EventKind::Service,
        };
        z += if kind == EventKind::Service { -1 } else { 1 };
        times.push(s.t);
        kinds.push(kind);
        walk.push(z);
        queue.push(s.queues.iter().map(|q| q.len() as u32).collect());
    })?;
    Ok(QueueTrajectory {
        geometry: *services.geometry(),
        initial_queue: initial.iter().map(|q| q.len() as u32).collect(),
        times,
        kinds,
        walk,
        queue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Link {
    pub arrival: f64,
    pub departure: f64,
    pub class: usize,
}

/// FIFO pairing of each arrival with the service time that carries it out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FifoMatching {
    /// Sorted by class, then by arrival time.
    pub links: Vec<Link>,
    /// Customers still waiting at the right edge of an interval.
    pub unmatched: usize,
}

impl FifoMatching {
    pub fn to_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["arrival", "departure", "class"])?;
        for l in &self.links {
            w.write_record([l.arrival.to_string(), l.departure.to_string(), (l.class + 1).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Links each arrival to its departure under FIFO order within each class.
/// On a cycle, customers waiting at the origin arrived late in the previous
/// period, so their links wrap (`arrival > departure`).
pub fn fifo_links(arrivals: &[Configuration], services: &Configuration) -> Result<FifoMatching> {
    let refs: Vec<&Configuration> = arrivals.iter().collect();
    let mut links = Vec::with_capacity(arrivals.iter().map(|a| a.len()).sum());
    let mut remaining = 0;
    let cycle = services.geometry().is_cycle();
    run_queue(&refs, services, |s| {
        if let Outcome::Departure { class, arrived } = s.outcome {
            links.push(Link { arrival: arrived, departure: s.t, class });
        }
        remaining = s.queues.iter().map(VecDeque::len).sum();
    })?;
    links.sort_by(|a, b| a.class.cmp(&b.class).then(a.arrival.total_cmp(&b.arrival)));
    Ok(FifoMatching { links, unmatched: if cycle { 0 } else { remaining } })
}
