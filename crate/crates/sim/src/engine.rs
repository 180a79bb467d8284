//! Event loop for the master/worker stream.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::config::{Scheduling, ServiceModel, SimConfig};
use crate::error::Result;

/// Outcome of one job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobRecord {
    pub arrival: f64,
    /// Time the first mini-job was released, if the job was ever started.
    pub start: Option<f64>,
    /// `D(r)`: delay from arrival to completion of resolution `r`.
    pub delays: Vec<Option<f64>>,
    pub terminated: bool,
}

impl JobRecord {
    pub fn delay(&self, r: usize) -> Option<f64> {
        self.delays.get(r.checked_sub(1)?).copied().flatten()
    }

    /// Time from start to completion of resolution `r`, excluding the wait.
    pub fn computation_time(&self, r: usize) -> Option<f64> {
        Some(self.delay(r)? - (self.start? - self.arrival))
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Arrival(usize),
    TaskDone { worker: usize, epoch: u64 },
    Deadline(usize),
}

#[derive(Debug)]
struct Event {
    time: f64,
    seq: u64,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the max-heap pops the earliest event, FIFO among equal times.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Default)]
struct Worker {
    busy: bool,
    /// Bumped on purge so that in-flight completions are discarded.
    epoch: u64,
    /// Tasks assigned to this worker and not yet started.
    assigned: usize,
}

#[derive(Debug, Clone)]
struct Active {
    job: usize,
    start: f64,
    minijob: usize,
    completed: usize,
    shared: usize,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    ratios: Vec<f64>,
    events: BinaryHeap<Event>,
    seq: u64,
    workers: Vec<Worker>,
    waiting: VecDeque<usize>,
    active: Option<Active>,
    records: Vec<JobRecord>,
    service_rng: ChaCha8Rng,
}

/// Runs the stream described by `cfg` and returns one record per job in
/// arrival order. Identical configurations give identical records.
pub fn simulate(cfg: &SimConfig) -> Result<Vec<JobRecord>> {
    cfg.validate()?;
    let ratios = cfg.minijob_ratios()?;
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    arrival_rng.set_stream(1);
    let mut service_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    service_rng.set_stream(2);

    let gaps = Exp::new(cfg.arrival_rate).expect("validated rate");
    let mut t = 0.0;
    let records: Vec<JobRecord> = (0..cfg.num_jobs)
        .map(|_| {
            t += gaps.sample(&mut arrival_rng);
            JobRecord {
                arrival: t,
                start: None,
                delays: vec![None; ratios.len()],
                terminated: false,
            }
        })
        .collect();

    let mut engine = Engine {
        cfg,
        ratios,
        events: BinaryHeap::new(),
        seq: 0,
        workers: vec![Worker::default(); cfg.worker_rates.len()],
        waiting: VecDeque::new(),
        active: None,
        records,
        service_rng,
    };
    for j in 0..cfg.num_jobs {
        let at = engine.records[j].arrival;
        engine.push(at, Kind::Arrival(j));
    }
    engine.run();
    Ok(engine.records)
}

impl Engine<'_> {
    fn push(&mut self, time: f64, kind: Kind) {
        self.seq += 1;
        self.events.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }

    fn run(&mut self) {
        while let Some(Event { time, kind, .. }) = self.events.pop() {
            match kind {
                Kind::Arrival(j) => {
                    self.waiting.push_back(j);
                    let overdue = match (&self.active, self.cfg.deadline) {
                        (Some(a), Some(d)) => time >= a.start + d,
                        _ => false,
                    };
                    if overdue {
                        self.terminate();
                    }
                    if self.active.is_none() {
                        self.start_next(time);
                    }
                }
                Kind::Deadline(j) => {
                    if self.active.as_ref().is_some_and(|a| a.job == j) && !self.waiting.is_empty()
                    {
                        self.terminate();
                        self.start_next(time);
                    }
                }
                Kind::TaskDone { worker, epoch } => {
                    if self.workers[worker].epoch != epoch {
                        continue;
                    }
                    self.workers[worker].busy = false;
                    let active = self.active.as_mut().expect("task of an active job");
                    active.completed += 1;
                    if active.completed == self.cfg.tasks_per_job {
                        self.finish_minijob(time);
                    }
                    self.dispatch(time);
                }
            }
        }
    }

    fn start_next(&mut self, now: f64) {
        let Some(job) = self.waiting.pop_front() else {
            return;
        };
        self.records[job].start = Some(now);
        self.active = Some(Active {
            job,
            start: now,
            minijob: 0,
            completed: 0,
            shared: 0,
        });
        if let Some(d) = self.cfg.deadline {
            self.push(now + d, Kind::Deadline(job));
        }
        self.release(1, now);
    }

    fn release(&mut self, minijob: usize, now: f64) {
        let total = self.cfg.tasks_per_job + self.cfg.redundancy;
        let active = self.active.as_mut().expect("release needs an active job");
        active.minijob = minijob;
        active.completed = 0;
        match self.cfg.scheduling {
            Scheduling::GreedyPull => active.shared = total,
            Scheduling::RateProportional => {
                for (w, n) in self
                    .workers
                    .iter_mut()
                    .zip(proportional_split(total, &self.cfg.worker_rates))
                {
                    w.assigned = n;
                }
            }
        }
        self.dispatch(now);
    }

    fn finish_minijob(&mut self, now: f64) {
        let active = self.active.clone().expect("active job");
        let record = &mut self.records[active.job];
        record.delays[active.minijob - 1] = Some(now - record.arrival);
        self.purge();
        if active.minijob < self.ratios.len() {
            self.release(active.minijob + 1, now);
        } else {
            self.active = None;
            self.start_next(now);
        }
    }

    fn terminate(&mut self) {
        if let Some(a) = self.active.take() {
            self.records[a.job].terminated = true;
            self.purge();
        }
    }

    /// Drops every outstanding task of the current mini-job.
    fn purge(&mut self) {
        for w in &mut self.workers {
            if w.busy {
                w.busy = false;
                w.epoch += 1;
            }
            w.assigned = 0;
        }
        if let Some(a) = self.active.as_mut() {
            a.shared = 0;
        }
    }

    fn dispatch(&mut self, now: f64) {
        let Some(active) = self.active.as_mut() else {
            return;
        };
        let mean_work = self.ratios[active.minijob - 1] * self.cfg.job_complexity;
        for (p, w) in self.workers.iter_mut().enumerate() {
            if w.busy {
                continue;
            }
            if w.assigned > 0 {
                w.assigned -= 1;
            } else if active.shared > 0 {
                active.shared -= 1;
            } else {
                continue;
            }
            w.busy = true;
            let mean = mean_work / self.cfg.worker_rates[p];
            let service = match self.cfg.service {
                ServiceModel::Deterministic => mean,
                ServiceModel::Exponential => Exp::new(1.0 / mean)
                    .expect("positive mean")
                    .sample(&mut self.service_rng),
            };
            let epoch = w.epoch;
            self.seq += 1;
            self.events.push(Event {
                time: now + service,
                seq: self.seq,
                kind: Kind::TaskDone { worker: p, epoch },
            });
        }
    }
}

/// Splits `total` tasks in proportion to `rates`, rounding down and giving
/// the remainder one each to the fastest workers.
pub fn proportional_split(total: usize, rates: &[f64]) -> Vec<usize> {
    let sum: f64 = rates.iter().sum();
    let mut counts: Vec<usize> = rates
        .iter()
        .map(|r| (total as f64 * r / sum).floor() as usize)
        .collect();
    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| rates[b].total_cmp(&rates[a]).then(a.cmp(&b)));
    let mut left = total - counts.iter().sum::<usize>();
    for &p in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[p] += 1;
        left -= 1;
    }
    counts
}
