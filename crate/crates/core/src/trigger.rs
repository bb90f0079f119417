//! Handover causes and the point at which each is typically initiated.

use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::ids::{Tick, UeId};
use crate::procedures::Initiator;
use crate::slice::SNssai;
use crate::switching::ReleaseTiming;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
pub enum CauseGroup {
    SliceSpecificConditions,
    ServiceAppRequirements,
    SliceOwnerPreferences,
    IntraInterTechHandovers,
    UserPreferences,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
pub enum Initiation {
    UeInitiated,
    NetworkTriggered,
    Either,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
pub enum TriggerName {
    AccessNetworkConditions,
    SliceDelay,
    SliceBandwidth,
    Reliability,
    SliceStability,
    QosRequirements,
    SliceStressLoad,
    SubscriptionPolicies,
    PricingBilling,
    HorizontalHandover,
    VerticalHandover,
    MonetaryCosts,
    SliceIsolationLevel,
    SliceSecurity,
    SlicePolicies,
}

/// (trigger, cause group, typical initiation point)
const TABLE: [(TriggerName, CauseGroup, Initiation); 15] = {
    use CauseGroup::*;
    use Initiation::*;
    use TriggerName::*;
    [
        (AccessNetworkConditions, SliceSpecificConditions, UeInitiated),
        (SliceDelay, SliceSpecificConditions, UeInitiated),
        (SliceBandwidth, SliceSpecificConditions, NetworkTriggered),
        (Reliability, SliceSpecificConditions, UeInitiated),
        (SliceStability, SliceSpecificConditions, Either),
        (QosRequirements, ServiceAppRequirements, UeInitiated),
        (SliceStressLoad, SliceOwnerPreferences, NetworkTriggered),
        (SubscriptionPolicies, SliceOwnerPreferences, NetworkTriggered),
        (PricingBilling, SliceOwnerPreferences, NetworkTriggered),
        (HorizontalHandover, IntraInterTechHandovers, UeInitiated),
        (VerticalHandover, IntraInterTechHandovers, UeInitiated),
        (MonetaryCosts, UserPreferences, UeInitiated),
        (SliceIsolationLevel, UserPreferences, UeInitiated),
        (SliceSecurity, UserPreferences, UeInitiated),
        (SlicePolicies, UserPreferences, UeInitiated),
    ]
};

impl TriggerName {
    pub const ALL: [TriggerName; 15] = {
        let mut out = [TriggerName::AccessNetworkConditions; 15];
        let mut i = 0;
        while i < 15 {
            out[i] = TABLE[i].0;
            i += 1;
        }
        out
    };

    fn row(self) -> &'static (TriggerName, CauseGroup, Initiation) {
        TABLE.iter().find(|r| r.0 == self).expect("every trigger has a row")
    }

    pub fn cause_group(self) -> CauseGroup {
        self.row().1
    }

    pub fn typical_initiation(self) -> Initiation {
        self.row().2
    }
}

impl fmt::Display for TriggerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// True iff `initiation` is a valid initiation point for `name`. Rows marked
/// `Either` accept every value.
pub fn validate_initiation(name: TriggerName, initiation: Initiation) -> bool {
    match name.typical_initiation() {
        Initiation::Either => true,
        fixed => fixed == initiation,
    }
}

/// How a network-triggered switch reaches the UE.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkVia {
    #[default]
    Ucu,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mechanism {
    UcuCommand,
    NetworkRelease,
    UeDecision,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TriggerError {
    #[error("trigger {0} has initiation Either; the scenario must pick one")]
    AmbiguousInitiation(TriggerName),
}

/// One scripted trigger with its initiation point already resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerSpec {
    pub cause_group: CauseGroup,
    pub trigger_name: TriggerName,
    pub initiation: Initiation,
    pub fire_at: Tick,
    pub ue_id: UeId,
    /// Slice the trigger is about: the one the UE is leaving.
    pub snssai: SNssai,
    pub via: NetworkVia,
    /// Initiator of the release for `via = Release`.
    pub release_initiator: Initiator,
    pub tentative: bool,
    /// Overrides the scenario-wide release timing of UE-initiated cases.
    pub release_timing: Option<ReleaseTiming>,
    /// Forces the target slice instead of asking the selection policy.
    pub target: Option<SNssai>,
}

impl TriggerSpec {
    pub fn new(trigger_name: TriggerName, fire_at: Tick, ue_id: UeId, snssai: SNssai) -> Self {
        Self {
            cause_group: trigger_name.cause_group(),
            trigger_name,
            initiation: trigger_name.typical_initiation(),
            fire_at,
            ue_id,
            snssai,
            via: NetworkVia::default(),
            release_initiator: Initiator::Smf,
            tentative: false,
            release_timing: None,
            target: None,
        }
    }

    pub fn mechanism(&self) -> Result<Mechanism, TriggerError> {
        match (self.initiation, self.via) {
            (Initiation::UeInitiated, _) => Ok(Mechanism::UeDecision),
            (Initiation::NetworkTriggered, NetworkVia::Ucu) => Ok(Mechanism::UcuCommand),
            (Initiation::NetworkTriggered, NetworkVia::Release) => Ok(Mechanism::NetworkRelease),
            (Initiation::Either, _) => Err(TriggerError::AmbiguousInitiation(self.trigger_name)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiredTrigger<'a> {
    pub index: usize,
    pub spec: &'a TriggerSpec,
    pub mechanism: Mechanism,
}

/// Every trigger of the (fire_at-sorted) script that fires at `now`.
pub fn evaluate_triggers(script: &[TriggerSpec], now: Tick) -> Result<Vec<FiredTrigger<'_>>, TriggerError> {
    let start = script.partition_point(|t| t.fire_at < now);
    script[start..]
        .iter()
        .enumerate()
        .take_while(|(_, t)| t.fire_at == now)
        .map(|(i, spec)| {
            Ok(FiredTrigger {
                index: start + i,
                spec,
                mechanism: spec.mechanism()?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::ServiceType;

    fn spec(name: TriggerName, at: Tick) -> TriggerSpec {
        TriggerSpec::new(name, at, "u1".into(), SNssai::new(ServiceType::Embb, "A").unwrap())
    }

    #[test]
    fn table_examples() {
        assert!(validate_initiation(TriggerName::PricingBilling, Initiation::NetworkTriggered));
        assert!(!validate_initiation(TriggerName::MonetaryCosts, Initiation::NetworkTriggered));
        assert!(validate_initiation(TriggerName::SliceStability, Initiation::UeInitiated));
    }

    #[test]
    fn all_is_table_order() {
        assert_eq!(TriggerName::ALL.len(), 15);
        assert_eq!(TriggerName::ALL[0], TriggerName::AccessNetworkConditions);
        assert_eq!(TriggerName::ALL[14], TriggerName::SlicePolicies);
    }

    #[test]
    fn stress_load_fires_network_triggered() {
        let script = [spec(TriggerName::SliceStressLoad, 10)];
        let fired = evaluate_triggers(&script, 10).unwrap();
        assert_eq!(fired.len(), 1);
        assert_eq!(fired[0].spec.initiation, Initiation::NetworkTriggered);
        assert_eq!(fired[0].mechanism, Mechanism::UcuCommand);
        assert!(evaluate_triggers(&script, 9).unwrap().is_empty());
    }

    #[test]
    fn empty_script_never_fires() {
        for t in 0..100 {
            assert!(evaluate_triggers(&[], t).unwrap().is_empty());
        }
    }

    #[test]
    fn either_with_override() {
        let mut s = spec(TriggerName::SliceStability, 3);
        assert_eq!(s.mechanism(), Err(TriggerError::AmbiguousInitiation(TriggerName::SliceStability)));
        s.initiation = Initiation::UeInitiated;
        assert_eq!(s.mechanism(), Ok(Mechanism::UeDecision));
    }

    #[test]
    fn via_release() {
        let mut s = spec(TriggerName::SliceBandwidth, 0);
        s.via = NetworkVia::Release;
        assert_eq!(s.mechanism(), Ok(Mechanism::NetworkRelease));
    }

    #[test]
    fn fires_all_at_same_tick_in_script_order() {
        let script = [
            spec(TriggerName::SliceDelay, 1),
            spec(TriggerName::SliceStressLoad, 2),
            spec(TriggerName::PricingBilling, 2),
            spec(TriggerName::SliceDelay, 5),
        ];
        let fired = evaluate_triggers(&script, 2).unwrap();
        assert_eq!(fired.iter().map(|f| f.index).collect::<Vec<_>>(), vec![1, 2]);
    }
}
