#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "privfair/transport.hpp"
#include "privfair/wire.hpp"

namespace privfair {

struct SessionConfig {
  SchemeKind scheme = SchemeKind::replicated3;
  u8 party_id = 1;  // own id (servers 1..n, or a client/dealer id)
  FixedPointCodec codec{};
  SessionId sid{};
  u64 seed = 0;  // seed material for local randomness and pairwise PRFs
  std::chrono::milliseconds round_timeout{30000};

  int num_parties() const { return static_cast<int>(scheme); }
};

// Reconstruction events, logged to the transcript. `masked` openings
// reveal only uniformly masked values (Beaver differences, x+r) and are
// the only kind a compute server may perform; `output` openings reveal a
// semantic value and happen at the investigator alone.
enum class OpenKind : u8 { masked = 1, output = 2 };

struct TranscriptEvent {
  enum Type : u8 { frame_sent = 1, frame_received = 2, opening = 3 };
  Type type;
  std::vector<u8> bytes;  // frame bytes, or [kind, count-le32] for openings
};

// Per-party protocol endpoint: owns the round counter, the transcript and
// the instrumentation counters. One session runs one protocol execution as
// a single logical thread; independent sessions share nothing.
class Session {
 public:
  Session(SessionConfig cfg, Transport& transport)
      : cfg_(cfg), transport_(transport) {}

  const SessionConfig& config() const { return cfg_; }
  u8 party() const { return cfg_.party_id; }
  int num_parties() const { return cfg_.num_parties(); }
  u32 round() const { return round_; }

  // Bulk-synchronous round: every live party calls this with the same
  // round number, sends its per-recipient payloads, and returns only once
  // every expected payload has arrived. Round counters advance in step.
  std::map<u8, std::vector<Ring>> exchange(
      const std::vector<std::pair<u8, std::vector<Ring>>>& outgoing,
      const std::vector<u8>& expect_from) {
    for (const auto& [to, rings] : outgoing) {
      WireFrame f{cfg_.sid, round_, cfg_.party_id, pack_rings(rings)};
      transport_.send(to, f);
      log_frame(TranscriptEvent::frame_sent, f);
    }
    std::map<u8, std::vector<Ring>> received;
    for (u8 from : expect_from) {
      WireFrame f = recv_checked(from, true);
      received[from] = unpack_rings(f.payload);
    }
    ++round_;
    return received;
  }

  // Unsynchronized client traffic (input submission, output release).
  // Frames are still session-checked and logged, but carry no round
  // agreement: clients are not part of the bulk-synchronous schedule.
  void send_async(u8 to, std::span<const Ring> rings) {
    WireFrame f{cfg_.sid, round_, cfg_.party_id, pack_rings(rings)};
    transport_.send(to, f);
    log_frame(TranscriptEvent::frame_sent, f);
  }

  std::vector<Ring> recv_async(u8 from) {
    WireFrame f = recv_checked(from, false);
    return unpack_rings(f.payload);
  }

  // --- instrumentation -----------------------------------------------------

  void push_label(const std::string& label) { labels_.push_back(label); }
  void pop_label() { labels_.pop_back(); }
  const std::string& current_label() const {
    static const std::string kDefault = "unlabeled";
    return labels_.empty() ? kDefault : labels_.back();
  }

  void count_muls(size_t n) {
    mul_by_label_[current_label()] += n;
    mul_total_ += n;
  }
  void count_divs(size_t n) {
    div_by_label_[current_label()] += n;
    div_total_ += n;
  }
  void count_mul_opened_elements(size_t n) { mul_opened_elements_ += n; }

  u64 mul_count(const std::string& label) const {
    auto it = mul_by_label_.find(label);
    return it == mul_by_label_.end() ? 0 : it->second;
  }
  u64 mul_total() const { return mul_total_; }
  u64 div_count(const std::string& label) const {
    auto it = div_by_label_.find(label);
    return it == div_by_label_.end() ? 0 : it->second;
  }
  u64 div_total() const { return div_total_; }
  u64 mul_opened_elements() const { return mul_opened_elements_; }

  void log_opening(OpenKind kind, size_t count) {
    TranscriptEvent ev;
    ev.type = TranscriptEvent::opening;
    ev.bytes.push_back(static_cast<u8>(kind));
    u8 tmp[4];
    store_le32(static_cast<u32>(count), tmp);
    ev.bytes.insert(ev.bytes.end(), tmp, tmp + 4);
    transcript_.push_back(std::move(ev));
  }

  size_t opening_count(OpenKind kind) const {
    size_t n = 0;
    for (const auto& ev : transcript_) {
      if (ev.type == TranscriptEvent::opening &&
          ev.bytes.at(0) == static_cast<u8>(kind)) {
        ++n;
      }
    }
    return n;
  }

  const std::vector<TranscriptEvent>& transcript() const { return transcript_; }

  // Flat byte serialization, for determinism comparisons and dumps.
  std::vector<u8> transcript_bytes() const {
    std::vector<u8> out;
    for (const auto& ev : transcript_) {
      out.push_back(static_cast<u8>(ev.type));
      u8 tmp[4];
      store_le32(static_cast<u32>(ev.bytes.size()), tmp);
      out.insert(out.end(), tmp, tmp + 4);
      out.insert(out.end(), ev.bytes.begin(), ev.bytes.end());
    }
    return out;
  }

 private:
  WireFrame recv_checked(u8 from, bool check_round) {
    WireFrame f;
    try {
      f = transport_.recv(from, cfg_.round_timeout);
    } catch (const RecvTimeout&) {
      throw ProtocolAbort("round " + std::to_string(round_) +
                          ": timeout waiting for party " + std::to_string(from));
    }
    if (f.session != cfg_.sid) {
      throw ProtocolAbort("round " + std::to_string(round_) +
                          ": frame from foreign session");
    }
    if (f.sender != from) {
      throw ProtocolAbort("round " + std::to_string(round_) +
                          ": sender mismatch, expected " + std::to_string(from));
    }
    if (check_round && f.round != round_) {
      throw ProtocolAbort("round " + std::to_string(round_) +
                          ": got frame for round " + std::to_string(f.round) +
                          " from party " + std::to_string(from));
    }
    log_frame(TranscriptEvent::frame_received, f);
    return f;
  }

  void log_frame(TranscriptEvent::Type type, const WireFrame& f) {
    transcript_.push_back({type, encode_frame(f)});
  }

  SessionConfig cfg_;
  Transport& transport_;
  u32 round_ = 1;
  std::vector<TranscriptEvent> transcript_;
  std::vector<std::string> labels_;
  std::map<std::string, u64> mul_by_label_;
  std::map<std::string, u64> div_by_label_;
  u64 mul_total_ = 0;
  u64 div_total_ = 0;
  u64 mul_opened_elements_ = 0;
};

// RAII call-site label for the multiplication/division counters.
class OpScope {
 public:
  OpScope(Session& s, const std::string& label) : s_(s) { s_.push_label(label); }
  ~OpScope() { s_.pop_label(); }
  OpScope(const OpScope&) = delete;
  OpScope& operator=(const OpScope&) = delete;

 private:
  Session& s_;
};

}  // namespace privfair
