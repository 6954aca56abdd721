#pragma once

#include <array>
#include <cstring>
#include <span>
#include <vector>

#include "privfair/prg.hpp"
#include "privfair/ring.hpp"

namespace privfair {

// 128-bit session nonce carried in every frame.
struct SessionId {
  std::array<u8, 16> bytes{};

  static SessionId from_prg(Prg& g) {
    SessionId id;
    store_le64(g.next_u64(), id.bytes.data());
    store_le64(g.next_u64(), id.bytes.data() + 8);
    return id;
  }

  friend bool operator==(const SessionId& a, const SessionId& b) {
    return a.bytes == b.bytes;
  }
  friend bool operator!=(const SessionId& a, const SessionId& b) {
    return !(a == b);
  }
};

// Well-known party ids. Compute servers are 1..3; the other roles sit on
// fixed ids so one byte identifies any peer.
inline constexpr u8 kDealerId = 0;
inline constexpr u8 kOwnerId = 10;
inline constexpr u8 kInvestigatorId = 11;

// One round-stamped message. (session, round, sender) identifies a frame
// uniquely; the payload is packed ring elements, so its length is always a
// multiple of 8 bytes.
struct WireFrame {
  SessionId session;
  u32 round = 0;
  u8 sender = 0;
  std::vector<u8> payload;
};

inline constexpr char kWireMagic[4] = {'P', 'F', 'W', '1'};
inline constexpr size_t kWireHeaderSize = 4 + 16 + 4 + 1 + 4;

inline std::vector<u8> encode_frame(const WireFrame& f) {
  std::vector<u8> out;
  out.reserve(kWireHeaderSize + f.payload.size());
  out.insert(out.end(), kWireMagic, kWireMagic + 4);
  out.insert(out.end(), f.session.bytes.begin(), f.session.bytes.end());
  u8 tmp[4];
  store_le32(f.round, tmp);
  out.insert(out.end(), tmp, tmp + 4);
  out.push_back(f.sender);
  store_le32(static_cast<u32>(f.payload.size()), tmp);
  out.insert(out.end(), tmp, tmp + 4);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

// Parses a full frame; `bytes` must contain exactly one frame.
inline WireFrame decode_frame(std::span<const u8> bytes) {
  if (bytes.size() < kWireHeaderSize || std::memcmp(bytes.data(), kWireMagic, 4) != 0) {
    throw ProtocolAbort("wire: bad frame header");
  }
  WireFrame f;
  std::memcpy(f.session.bytes.data(), bytes.data() + 4, 16);
  f.round = load_le32(bytes.data() + 20);
  f.sender = bytes[24];
  const u32 len = load_le32(bytes.data() + 25);
  if (bytes.size() != kWireHeaderSize + len || len % 8 != 0) {
    throw ProtocolAbort("wire: bad payload length");
  }
  f.payload.assign(bytes.begin() + kWireHeaderSize, bytes.end());
  return f;
}

}  // namespace privfair
