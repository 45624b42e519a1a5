//! Active attacks on the decoy transmission: jamming and receiver
//! impersonation.

use serde::Serialize;

use super::posterior::{passive_posterior, SplitPosterior};
use crate::decoy::{
    detect_stabilization, mean, recover_secret, run_engine, Action, Participant, Receiver, Sender,
    ADVERSARY_ID, IN_BUSINESS, RAMP_START_TICK,
};
use crate::error::{Error, Result};
use crate::sim::{AdversaryKind, Interval, Scenario, Transcript};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackOutcome {
    pub kind: AdversaryKind,
    pub sender_secret: u64,
    /// What the legitimate receiver ended up with; `None` when he is absent.
    pub recovered: Option<Result<u64, Error>>,
    pub receiver_error_raised: bool,
    /// The receiver finished with something other than the sender's secret.
    pub mismatch: bool,
    pub adversary_estimate: Option<u64>,
    pub adversary_learned: bool,
    pub adversary_posterior: Option<SplitPosterior>,
    pub transcript: Transcript,
}

/// Adds `jam_value` to the channel once the total has been flat for two ticks.
struct Jammer {
    jam_value: f64,
    epsilon_stab: f64,
    started_at: Option<u64>,
}

impl Participant for Jammer {
    fn id(&self) -> &'static str {
        ADVERSARY_ID
    }

    fn act(&mut self, tick: u64, public: &Transcript) -> Result<Action> {
        if self.started_at.is_none() {
            let last = public.last_measurements(2);
            if detect_stabilization(&last, self.epsilon_stab, 2) && mean(&last) > self.epsilon_stab
            {
                log::debug!("jammer starts at tick {tick}");
                self.started_at = Some(tick);
            }
        }
        Ok(Action {
            contribution: if self.started_at.is_some() {
                self.jam_value
            } else {
                0.0
            },
            ..Action::default()
        })
    }
}

/// Stands in for the receiver. With a forged key it announces
/// `in-business` and holds the key; without one it stays silent.
struct Impersonator {
    forged_key: Option<f64>,
    domain: Interval,
    epsilon_stab: f64,
    hold_ticks: usize,
    noise_sigma: f64,
}

impl Participant for Impersonator {
    fn id(&self) -> &'static str {
        ADVERSARY_ID
    }

    fn act(&mut self, tick: u64, _public: &Transcript) -> Result<Action> {
        let mut action = Action::default();
        if let Some(key) = self.forged_key {
            if tick == 0 {
                action.announcements.push(IN_BUSINESS.to_string());
            }
            if tick >= RAMP_START_TICK {
                action.contribution = key;
            }
        }
        Ok(action)
    }

    fn observe(&mut self, tick: u64, public: &Transcript) -> Option<Result<u64>> {
        if tick + 1 < RAMP_START_TICK + self.hold_ticks as u64 {
            return None;
        }
        let own = self.forged_key.unwrap_or(0.0);
        let window = public.last_measurements(self.hold_ticks);
        let residual: Vec<f64> = window.iter().map(|m| m - own).collect();
        // Wait for a flat signal that can be the sender's, not silence.
        let floor = self.domain.n1 as f64 - 0.5 - 4.0 * self.noise_sigma;
        if !detect_stabilization(&residual, self.epsilon_stab, self.hold_ticks)
            || mean(&residual) < floor
        {
            return None;
        }
        Some(recover_secret(
            mean(&window),
            own,
            self.domain,
            self.noise_sigma,
        ))
    }
}

fn require(s: &Scenario, kind: AdversaryKind) -> Result<()> {
    if !s.protocol.is_decoy() {
        return Err(Error::invalid(
            "protocol",
            "attacks target the decoy protocols",
        ));
    }
    if s.adversary != kind {
        return Err(Error::invalid("adversary", format!("expected {kind:?}")));
    }
    Ok(())
}

/// Honest sender and receiver with a jammer on the channel.
pub fn attack_jam(s: &Scenario) -> Result<AttackOutcome> {
    require(s, AdversaryKind::Jammer)?;
    let mut sender = Sender::from_scenario(s);
    let mut receiver = Receiver::from_scenario(s)?;
    let mut jammer = Jammer {
        jam_value: s.jam_value,
        epsilon_stab: s.epsilon_stab,
        started_at: None,
    };
    let finished = run_engine(s, &mut [&mut sender, &mut receiver, &mut jammer])?;
    let secret = s.party_secrets.alice;
    let own = if jammer.started_at.is_some() {
        s.jam_value
    } else {
        0.0
    };
    let posterior = passive_posterior(
        &finished.transcript,
        s.secret_domain,
        s.hold_ticks as usize,
        own,
    );
    let adversary_learned = posterior
        .as_ref()
        .is_some_and(|p| p.max_prob == 1.0 && p.posterior.contains_key(&secret));
    Ok(AttackOutcome {
        kind: AdversaryKind::Jammer,
        sender_secret: secret,
        receiver_error_raised: finished.result.is_err(),
        mismatch: finished.result.as_ref().ok() != Some(&secret),
        recovered: Some(finished.result),
        adversary_estimate: adversary_learned.then_some(secret),
        adversary_learned,
        adversary_posterior: posterior,
        transcript: finished.transcript,
    })
}

/// The sender talks to an impersonator; the real receiver is absent.
/// A silent impersonator against the defended sender times out.
pub fn attack_impersonate(s: &Scenario) -> Result<AttackOutcome> {
    require(s, AdversaryKind::Impersonator)?;
    let mut sender = Sender::from_scenario(s);
    let mut adversary = Impersonator {
        forged_key: s.forged_key,
        domain: s.secret_domain,
        epsilon_stab: s.epsilon_stab,
        hold_ticks: s.hold_ticks as usize,
        noise_sigma: s.noise_sigma,
    };
    let finished = run_engine(s, &mut [&mut sender, &mut adversary])?;
    let secret = s.party_secrets.alice;
    let estimate = finished.result.ok();
    Ok(AttackOutcome {
        kind: AdversaryKind::Impersonator,
        sender_secret: secret,
        recovered: None,
        receiver_error_raised: false,
        mismatch: false,
        adversary_estimate: estimate,
        adversary_learned: estimate == Some(secret),
        adversary_posterior: None,
        transcript: finished.transcript,
    })
}
