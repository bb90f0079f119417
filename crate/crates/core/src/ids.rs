//! Identifier newtypes shared across the simulator.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Simulation time in integer ticks.
pub type Tick = u64;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

string_id!(
    /// Identifier of a node on the signaling bus. UEs are nodes too.
    NfId
);
string_id!(
    /// Identifier of a user equipment.
    UeId
);
string_id!(
    /// Identifier of a PDU session, unique within the simulated PLMN.
    SessionId
);

impl From<&UeId> for NfId {
    fn from(ue: &UeId) -> Self {
        NfId(ue.0.clone())
    }
}

macro_rules! numeric_id {
    ($(#[$meta:meta])* $name:ident($inner:ty)) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub struct $name(pub $inner);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

numeric_id!(
    /// Index of a [`crate::procedures::ProcedureRun`], starting at 1.
    RunId(u32)
);
numeric_id!(
    /// Index of one executed switching case, starting at 1.
    SwitchId(u32)
);
numeric_id!(MsgId(u64));
