use std::fmt;
use std::str::FromStr;

use crate::ids::{MsgId, NfId, RunId, Tick, UeId};
use crate::nf::SliceAnalytics;
use crate::procedures::FailureReason;
use crate::slice::SNssai;

macro_rules! message_names {
    ($($name:ident),+ $(,)?) => {
        /// Name token of a signaling message.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum MessageName {
            $($name),+
        }

        impl MessageName {
            /// Every message name, in declaration order (also the metrics column order).
            pub const ALL: &'static [MessageName] = &[$(MessageName::$name),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(MessageName::$name => stringify!($name)),+
                }
            }
        }
    };
}

message_names!(
    UeConfigurationUpdateCommand,
    UeConfigurationUpdateComplete,
    RegistrationRequest,
    SubscriptionDataRequest,
    SubscriptionDataResponse,
    NssaiSelectionRequest,
    NssaiSelectionResponse,
    AmfContextTransfer,
    RegistrationAccept,
    RegistrationReject,
    PduSessionReleaseRequest,
    SmContextReleaseRequest,
    PolicyTerminationNotify,
    N4SessionReleaseRequest,
    N4SessionReleaseResponse,
    N1N2MessageTransfer,
    N2PduSessionResourceReleaseCommand,
    PduSessionReleaseCommand,
    PduSessionReleaseComplete,
    PduSessionEstablishmentRequest,
    SmContextCreateRequest,
    SmSubscriptionDataRequest,
    SmSubscriptionDataResponse,
    SmContextCreateResponse,
    DnAuthRequest,
    DnAuthResponse,
    PolicyRetrievalRequest,
    PolicyRetrievalResponse,
    N4SessionEstablishmentRequest,
    N4SessionEstablishmentResponse,
    N2PduSessionResourceSetupRequest,
    PduSessionEstablishmentAccept,
    RrcReconfigurationComplete,
    N2PduSessionResourceSetupResponse,
    SmContextUpdateRequest,
    RouterAdvertisement,
    AnalyticsRequest,
    AnalyticsResponse,
    ProcedureFailure,
);

impl fmt::Display for MessageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown message name {0:?}")]
pub struct UnknownMessageName(pub String);

impl FromStr for MessageName {
    type Err = UnknownMessageName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| UnknownMessageName(s.to_owned()))
    }
}

/// Message-specific data. Most procedure parameters travel with the
/// [`crate::procedures::ProcedureRun`] the message correlates to.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    None,
    Verdict(bool),
    SmSubscription { found: bool, dn_authorization: bool },
    Failure(FailureReason),
    Query(SNssai),
    Analytics(Option<SliceAnalytics>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalingMessage {
    pub msg_id: MsgId,
    pub name: MessageName,
    pub src: NfId,
    pub dst: NfId,
    pub ue: UeId,
    pub sent_at: Tick,
    pub delivered_at: Tick,
    pub correlates: Option<RunId>,
    pub payload: Payload,
}
