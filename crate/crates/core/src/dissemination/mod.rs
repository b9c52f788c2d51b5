//! SSID beacon codec and the opportunistic dissemination simulator.

mod packet;
mod sim;

pub use packet::{
    decode_packet, encode_packet, AnomalyReport, EncodeOutcome, PacketEntry, SsidPacket, FLAG_CLAMPED,
    FLAG_TRUNCATED, MAX_ENTRIES, OFFSET_STEP_M, PACKET_BYTES, PACKET_VERSION, SSID_CHARS,
};
pub use sim::{read_scenario, write_log_csv, Delivery, NodeMode, NodeSpec, SimConfig, SimNode, Simulation};
