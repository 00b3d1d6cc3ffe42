#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace execsim {

using Tick = std::int64_t;     // prices are integer ticks
using Qty = std::int64_t;      // quantities are integer shares
using OrderId = std::uint64_t; // 1-based, sequential per book
using Seq = std::uint64_t;     // logical event-sequence number

enum class Side : std::uint8_t { Buy, Sell };
enum class Owner : std::uint8_t { Background, Agent };

inline Side opposite(Side s) { return s == Side::Buy ? Side::Sell : Side::Buy; }

// +1 for buys, -1 for sells; used to orient execution-quality metrics.
inline double side_sign(Side s) { return s == Side::Buy ? 1.0 : -1.0; }

inline const char* to_string(Side s) { return s == Side::Buy ? "buy" : "sell"; }
inline const char* to_string(Owner o) { return o == Owner::Agent ? "agent" : "background"; }

// Configuration / input-file problems. Carries the offending key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that the operation does not support.
class UnsupportedError : public std::invalid_argument {
 public:
  explicit UnsupportedError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace execsim
