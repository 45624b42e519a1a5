//! Decoy-based secret transmission.
//!
//! The sender and receiver each ramp a private contribution onto the shared
//! channel and hold it at a private target. The receiver, knowing his own
//! contribution, reads the stable public total and subtracts. An observer
//! of the total alone faces every split of it that the domain allows.
//!
//! Tick layout: at tick 0 the receiver announces `in-business` (the sender
//! of the wave variant first announces the shared frequency and phase).
//! Ramps start at tick 1. Within a tick, participants act in the order
//! sender, receiver, adversary; then the channel is measured and the
//! measurement appended to the transcript; then the terminating party
//! (receiver, or an impersonator standing in for him) checks for
//! stabilization.

use rand::Rng;
use serde::Serialize;

use crate::channel::ChannelState;
use crate::error::{Error, Result};
use crate::sim::{streams, Interval, RampModel, RngStream, Scenario, Transcript};

pub const IN_BUSINESS: &str = "in-business";
pub const SENDER_ID: &str = "alice";
pub const RECEIVER_ID: &str = "bob";
pub const ADVERSARY_ID: &str = "adversary";

/// First tick on which any ramp may be non-zero.
pub const RAMP_START_TICK: u64 = 1;

/// A party's contribution over time: zero before `start_tick`, non-decreasing,
/// and pinned at `target` from `stabilize_tick` on.
#[derive(Debug, Clone, PartialEq)]
pub struct RampProcess {
    target: f64,
    start_tick: u64,
    stabilize_tick: u64,
    /// Values for ticks `start_tick..=stabilize_tick`.
    schedule: Vec<f64>,
}

impl RampProcess {
    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn start_tick(&self) -> u64 {
        self.start_tick
    }

    pub fn stabilize_tick(&self) -> u64 {
        self.stabilize_tick
    }

    pub fn value_at(&self, tick: u64) -> f64 {
        if tick < self.start_tick {
            0.0
        } else if tick >= self.stabilize_tick {
            self.target
        } else {
            self.schedule[(tick - self.start_tick) as usize]
        }
    }
}

pub fn generate_ramp(
    rng: &mut RngStream,
    model: RampModel,
    target: f64,
    start_tick: u64,
    max_ramp_ticks: u64,
) -> Result<RampProcess> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidTarget(target));
    }
    if max_ramp_ticks == 0 {
        return Err(Error::invalid("max_ramp_ticks", "must be positive"));
    }
    let schedule = match model {
        RampModel::Synchronous => vec![target],
        RampModel::RandomRamp => {
            let len = rng.random_range(0..=max_ramp_ticks) as usize;
            // Strictly positive increments, rescaled so the last lands on target.
            let mut cum = Vec::with_capacity(len + 1);
            let mut acc = 0.0;
            for _ in 0..=len {
                acc += 1.0 - rng.random::<f64>();
                cum.push(acc);
            }
            let total = acc;
            let mut schedule: Vec<f64> = cum
                .iter()
                .map(|c| (target * c / total).min(target))
                .collect();
            *schedule.last_mut().unwrap() = target;
            schedule
        }
        RampModel::DeterministicRamp => {
            let steps = target.ceil() as usize;
            (1..=steps).map(|k| (k as f64).min(target)).collect()
        }
    };
    let stabilize_tick = start_tick + schedule.len() as u64 - 1;
    Ok(RampProcess {
        target,
        start_tick,
        stabilize_tick,
        schedule,
    })
}

/// True iff the last `hold_ticks` values all lie within `epsilon_stab` of
/// their mean. A few ulps of slack absorb the rounding of the mean itself.
pub fn detect_stabilization(window: &[f64], epsilon_stab: f64, hold_ticks: usize) -> bool {
    if hold_ticks == 0 || window.len() < hold_ticks {
        return false;
    }
    let tail = &window[window.len() - hold_ticks..];
    let mean = mean(tail);
    let slack = 4.0 * f64::EPSILON * mean.abs().max(1.0);
    tail.iter()
        .all(|v| (v - mean).abs() <= epsilon_stab + slack)
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Nearest element of `domain` to `total - own_key`, ties rounding down.
pub fn recover_secret(total: f64, own_key: f64, domain: Interval, noise_sigma: f64) -> Result<u64> {
    if !total.is_finite() {
        return Err(Error::NonFiniteValue(total));
    }
    if !own_key.is_finite() {
        return Err(Error::NonFiniteValue(own_key));
    }
    let x = total - own_key;
    let nearest = if x <= domain.n1 as f64 {
        domain.n1
    } else if x >= domain.n2 as f64 {
        domain.n2
    } else {
        let floor = x.floor();
        if x - floor > 0.5 {
            floor as u64 + 1
        } else {
            floor as u64
        }
    };
    let distance = (x - nearest as f64).abs();
    if distance > 0.5 + 4.0 * noise_sigma {
        return Err(Error::OutOfDomain {
            value: x,
            nearest,
            distance,
        });
    }
    Ok(nearest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Sender,
    Receiver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartyState {
    pub role: Role,
    pub secret: u64,
    pub ramp: Option<RampProcess>,
    pub announced_in_business: bool,
    pub observed_confirmation: bool,
}

impl PartyState {
    fn new(role: Role, secret: u64) -> Self {
        Self {
            role,
            secret,
            ramp: None,
            announced_in_business: false,
            observed_confirmation: false,
        }
    }
}

/// What a participant does on one tick.
#[derive(Debug, Default)]
pub(crate) struct Action {
    pub contribution: f64,
    pub announcements: Vec<String>,
}

pub(crate) trait Participant {
    fn id(&self) -> &'static str;

    fn act(&mut self, tick: u64, public: &Transcript) -> Result<Action>;

    /// Called after the tick's measurement is recorded. `Some` ends the run
    /// with this participant's reading of the secret.
    fn observe(&mut self, _tick: u64, _public: &Transcript) -> Option<Result<u64>> {
        None
    }
}

pub(crate) struct Sender {
    pub state: PartyState,
    rng: RngStream,
    model: RampModel,
    max_ramp_ticks: u64,
    wait_for_confirmation: bool,
    wave_announcement: Option<String>,
}

impl Sender {
    pub fn from_scenario(s: &Scenario) -> Self {
        let wave_announcement = (s.protocol == crate::sim::Protocol::DecoyWave)
            .then(|| format!("wave omega={} phi={}", s.wave.omega, s.wave.phi));
        Self {
            state: PartyState::new(Role::Sender, s.party_secrets.alice),
            rng: RngStream::new(s.seed, streams::SENDER),
            model: s.ramp_model,
            max_ramp_ticks: s.max_ramp_ticks,
            wait_for_confirmation: s.defense_enabled,
            wave_announcement,
        }
    }

    pub fn stabilize_tick(&self) -> Option<u64> {
        self.state.ramp.as_ref().map(RampProcess::stabilize_tick)
    }
}

impl Participant for Sender {
    fn id(&self) -> &'static str {
        SENDER_ID
    }

    fn act(&mut self, tick: u64, public: &Transcript) -> Result<Action> {
        let mut action = Action::default();
        if tick == 0 {
            action.announcements.extend(self.wave_announcement.take());
        }
        if self.state.ramp.is_none() && tick >= RAMP_START_TICK {
            if self.wait_for_confirmation {
                self.state.observed_confirmation = public.announcement_tick(IN_BUSINESS).is_some();
            }
            if !self.wait_for_confirmation || self.state.observed_confirmation {
                self.state.ramp = Some(generate_ramp(
                    &mut self.rng,
                    self.model,
                    self.state.secret as f64,
                    tick,
                    self.max_ramp_ticks,
                )?);
            }
        }
        action.contribution = self.state.ramp.as_ref().map_or(0.0, |r| r.value_at(tick));
        Ok(action)
    }
}

pub(crate) struct Receiver {
    pub state: PartyState,
    ramp: RampProcess,
    domain: Interval,
    epsilon_stab: f64,
    hold_ticks: usize,
    noise_sigma: f64,
}

impl Receiver {
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        let key = s.bob_secret()?;
        let model = match s.ramp_model {
            RampModel::DeterministicRamp => RampModel::Synchronous,
            m => m,
        };
        let mut rng = RngStream::new(s.seed, streams::RECEIVER);
        let ramp = generate_ramp(
            &mut rng,
            model,
            key as f64,
            RAMP_START_TICK,
            s.max_ramp_ticks,
        )?;
        let mut state = PartyState::new(Role::Receiver, key);
        state.ramp = Some(ramp.clone());
        Ok(Self {
            state,
            ramp,
            domain: s.secret_domain,
            epsilon_stab: s.epsilon_stab,
            hold_ticks: s.hold_ticks as usize,
            noise_sigma: s.noise_sigma,
        })
    }
}

impl Participant for Receiver {
    fn id(&self) -> &'static str {
        RECEIVER_ID
    }

    fn act(&mut self, tick: u64, _public: &Transcript) -> Result<Action> {
        let mut action = Action {
            contribution: self.ramp.value_at(tick),
            ..Action::default()
        };
        if tick == 0 {
            action.announcements.push(IN_BUSINESS.to_string());
            self.state.announced_in_business = true;
        }
        Ok(action)
    }

    fn observe(&mut self, tick: u64, public: &Transcript) -> Option<Result<u64>> {
        // Only test windows that lie entirely inside our own stable phase,
        // where our contribution is exactly the key.
        if tick + 1 < self.ramp.stabilize_tick() + self.hold_ticks as u64 {
            return None;
        }
        let key = self.state.secret as f64;
        let window = public.last_measurements(self.hold_ticks);
        let residual: Vec<f64> = window.iter().map(|m| m - key).collect();
        if !detect_stabilization(&residual, self.epsilon_stab, self.hold_ticks) {
            return None;
        }
        Some(recover_secret(
            mean(&window),
            key,
            self.domain,
            self.noise_sigma,
        ))
    }
}

pub(crate) struct Finished {
    pub tick: u64,
    pub result: Result<u64>,
    pub transcript: Transcript,
}

/// Step the participants until one of them terminates the run.
pub(crate) fn run_engine(
    s: &Scenario,
    participants: &mut [&mut dyn Participant],
) -> Result<Finished> {
    let mut channel = ChannelState::new(s.noise_sigma);
    let mut noise = RngStream::new(s.seed, streams::CHANNEL_NOISE);
    let mut transcript = Transcript::new();
    for tick in 0..s.max_ticks {
        for p in participants.iter_mut() {
            let action = p.act(tick, &transcript)?;
            channel.set_contribution(p.id(), action.contribution)?;
            for tag in action.announcements {
                transcript.announce(tick, tag);
            }
        }
        transcript.record_measurement(tick, channel.measure(&mut noise));
        for p in participants.iter_mut() {
            if let Some(result) = p.observe(tick, &transcript) {
                log::trace!("{} terminated the run at tick {tick}", p.id());
                return Ok(Finished {
                    tick,
                    result,
                    transcript,
                });
            }
        }
    }
    Err(Error::ProtocolTimeout {
        max_ticks: s.max_ticks,
        transcript: Box::new(transcript),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoyOutcome {
    pub recovered: Result<u64, Error>,
    pub sender_secret: u64,
    /// Tick at which the receiver detected stabilization.
    pub detected_at: u64,
    pub announcement_tick: Option<u64>,
    pub sender_stabilize_tick: Option<u64>,
    pub transcript: Transcript,
}

impl DecoyOutcome {
    pub fn success(&self) -> bool {
        self.recovered.as_ref().ok() == Some(&self.sender_secret)
    }
}

/// Honest run of the transmission protocol (the `adversary` field is not
/// consulted; active attacks live in [`crate::adversary`]).
pub fn run_decoy_transmission(s: &Scenario) -> Result<DecoyOutcome> {
    if !s.protocol.is_decoy() {
        return Err(Error::invalid("protocol", "not a decoy protocol"));
    }
    let mut sender = Sender::from_scenario(s);
    let mut receiver = Receiver::from_scenario(s)?;
    let finished = run_engine(s, &mut [&mut sender, &mut receiver])?;
    Ok(DecoyOutcome {
        recovered: finished.result,
        sender_secret: s.party_secrets.alice,
        detected_at: finished.tick,
        announcement_tick: finished.transcript.announcement_tick(IN_BUSINESS),
        sender_stabilize_tick: sender.stabilize_tick(),
        transcript: finished.transcript,
    })
}
