//! Fluid time-sharing of a host's cores.
//!
//! With `n` active tasks on `C` cores every task progresses at
//! `speed * min(1, C / n)` flop/s; rates are piecewise constant between
//! membership changes. This reproduces `T'_comp = T_comp * n / C` exactly
//! while membership is fixed.

use crate::platform::{power_draw, HostId, HostSpec};

/// Opaque identifier of one execution on a host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaskKey(pub u64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpuTask {
    pub key: TaskKey,
    pub work: f64,
    pub remaining: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub key: TaskKey,
    pub at: f64,
}

// Slack for treating a scheduled completion instant as reached.
const TIME_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct HostCpuState {
    pub host_id: HostId,
    spec: HostSpec,
    cores: u32,
    speed: f64,
    tasks: Vec<CpuTask>,
    last_update: f64,
    energy_j: f64,
    busy_core_seconds: f64,
}

impl HostCpuState {
    pub fn new(host: &HostSpec, now: f64) -> Self {
        Self {
            host_id: host.id,
            spec: host.clone(),
            cores: host.cores,
            speed: host.speed,
            tasks: Vec::new(),
            last_update: now,
            energy_j: 0.0,
            busy_core_seconds: 0.0,
        }
    }

    pub fn n_active(&self) -> usize {
        self.tasks.len()
    }

    pub fn tasks(&self) -> &[CpuTask] {
        &self.tasks
    }

    pub fn last_update(&self) -> f64 {
        self.last_update
    }

    /// Joules drawn since creation, idle floor included.
    pub fn energy_j(&self) -> f64 {
        self.energy_j
    }

    pub fn busy_core_seconds(&self) -> f64 {
        self.busy_core_seconds
    }

    pub fn utilization(&self) -> f64 {
        (self.tasks.len() as f64 / self.cores as f64).min(1.0)
    }

    /// Flop/s each active task receives right now.
    pub fn rate_per_task(&self) -> f64 {
        let n = self.tasks.len().max(1) as f64;
        self.speed * (self.cores as f64 / n).min(1.0)
    }

    /// Absolute time at which the next task would finish if nothing changes.
    pub fn next_completion(&self) -> Option<f64> {
        let min = self
            .tasks
            .iter()
            .map(|t| t.remaining)
            .min_by(f64::total_cmp)?;
        Some(self.last_update + min / self.rate_per_task())
    }

    fn integrate(&mut self, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        let busy = (self.tasks.len() as f64).min(self.cores as f64);
        let power = power_draw(&self.spec, busy / self.cores as f64, true)
            .expect("utilization within [0, 1]");
        self.energy_j += power * dt;
        self.busy_core_seconds += busy * dt;
        let progress = self.rate_per_task() * dt;
        for t in &mut self.tasks {
            t.remaining -= progress;
        }
    }

    /// Integrates up to `now`, finishing tasks at the exact instants their
    /// work runs out and re-deriving the shared rate after each departure.
    pub fn advance(&mut self, now: f64) -> Vec<Completion> {
        let mut done = Vec::new();
        debug_assert!(now + TIME_EPS >= self.last_update, "clock moved backwards");
        loop {
            let Some(next) = self.next_completion() else { break };
            if next > now + TIME_EPS {
                break;
            }
            let at = next.max(self.last_update).min(now.max(self.last_update));
            let rate = self.rate_per_task();
            let min_remaining = self
                .tasks
                .iter()
                .map(|t| t.remaining)
                .fold(f64::INFINITY, f64::min);
            self.integrate(at - self.last_update);
            self.last_update = at;
            // The argmin lands exactly on zero; peers within rounding of it go too.
            let tol = min_remaining.abs() * 1e-12 + rate * TIME_EPS;
            let mut i = 0;
            while i < self.tasks.len() {
                if self.tasks[i].remaining <= tol {
                    let t = self.tasks.swap_remove(i);
                    done.push(Completion { key: t.key, at });
                } else {
                    i += 1;
                }
            }
        }
        if now > self.last_update {
            self.integrate(now - self.last_update);
            self.last_update = now;
        }
        self.tasks.sort_by_key(|t| t.key);
        done.sort_by(|a, b| a.at.total_cmp(&b.at).then(a.key.cmp(&b.key)));
        done
    }

    /// Advances to `now`, then adds a task. Returns anything that finished on
    /// the way.
    pub fn start(&mut self, now: f64, key: TaskKey, work: f64) -> Vec<Completion> {
        let done = self.advance(now);
        self.tasks.push(CpuTask {
            key,
            work,
            remaining: work,
        });
        self.tasks.sort_by_key(|t| t.key);
        done
    }
}

/// Free-function form of [`HostCpuState::advance`].
pub fn advance_cpu(state: &mut HostCpuState, now: f64) -> Vec<Completion> {
    state.advance(now)
}

/// `min(λ, A) / C`, capped at 1 for reporting.
pub fn utilization_bound(lambda_concurrent: f64, actors: f64, cores: f64) -> f64 {
    if cores <= 0.0 {
        return 0.0;
    }
    (lambda_concurrent.min(actors) / cores).clamp(0.0, 1.0)
}
