#pragma once
// Binary instruction vectors: the decision encoding for plant schedules.
//
// A schedule over H hours is a flat bit string of length (H*2)*3: one group
// of 3 bits per 0.5h time step. Within a group, index 0 commands a
// purification start, index 1 a reaction start, index 2 a mixing start.
// (The position-to-process map is a named constant; flipping it re-runs
// every experiment under the alternative convention.)

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowbatch/rng.hpp"

namespace flowbatch {

// Bit-group layout: offset of each process within a 3-bit time step group.
struct BitLayout {
  int purification = 0;
  int reaction = 1;
  int mixing = 2;
};
inline constexpr BitLayout kBitLayout{};

struct InstructionVector {
  std::vector<std::uint8_t> bits;  // values 0/1
  double horizon_hours = 0.0;

  static int steps_for(double horizon_hours) {
    const double steps = horizon_hours * 2.0;
    const double rounded = std::round(steps);
    if (!(horizon_hours > 0.0) || std::abs(steps - rounded) > 1e-9)
      throw std::invalid_argument(
          "horizon must be a positive multiple of 0.5 hours");
    return static_cast<int>(rounded);
  }

  int steps() const { return steps_for(horizon_hours); }
  std::size_t expected_length() const {
    return static_cast<std::size_t>(steps()) * 3;
  }

  bool valid() const {
    if (bits.size() != expected_length()) return false;
    for (auto b : bits)
      if (b > 1) return false;
    return true;
  }

  void require_valid() const {
    if (!valid())
      throw std::invalid_argument(
          "instruction vector malformed: need (horizon*2)*3 bits of 0/1");
  }

  static InstructionVector zeros(double horizon_hours) {
    InstructionVector v;
    v.horizon_hours = horizon_hours;
    v.bits.assign(static_cast<std::size_t>(steps_for(horizon_hours)) * 3, 0);
    return v;
  }

  std::uint8_t& at(int step, int offset) {
    return bits[static_cast<std::size_t>(step) * 3 +
                static_cast<std::size_t>(offset)];
  }
  std::uint8_t at(int step, int offset) const {
    return bits[static_cast<std::size_t>(step) * 3 +
                static_cast<std::size_t>(offset)];
  }

  bool operator==(const InstructionVector& o) const {
    return horizon_hours == o.horizon_hours && bits == o.bits;
  }

  // Canonical text form: "H=<hours>" header line + one line of '0'/'1'.
  std::string to_text() const {
    std::ostringstream os;
    os << "H=" << horizon_hours << "\n" << bit_line() << "\n";
    return os.str();
  }

  std::string bit_line() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
  }

  static InstructionVector from_text(const std::string& text) {
    std::istringstream is(text);
    std::string header, line;
    if (!std::getline(is, header) || header.rfind("H=", 0) != 0)
      throw std::invalid_argument("instruction text: missing H= header");
    if (!std::getline(is, line))
      throw std::invalid_argument("instruction text: missing bit line");
    return from_bit_line(std::stod(header.substr(2)), line);
  }

  static InstructionVector from_bit_line(double horizon_hours,
                                         const std::string& line) {
    InstructionVector v;
    v.horizon_hours = horizon_hours;
    v.bits.reserve(line.size());
    for (char c : line) {
      if (c == '0' || c == '1')
        v.bits.push_back(static_cast<std::uint8_t>(c - '0'));
      else
        throw std::invalid_argument("instruction bit line: expected 0/1");
    }
    v.require_valid();
    return v;
  }
};

struct TimestepCommand {
  double time = 0.0;  // hours
  bool start_purification = false;
  bool start_reaction = false;
  bool start_mixing = false;
};

inline std::vector<TimestepCommand> decode(const InstructionVector& v) {
  v.require_valid();
  const int n = v.steps();
  std::vector<TimestepCommand> cmds(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    auto& c = cmds[static_cast<std::size_t>(k)];
    c.time = 0.5 * k;
    c.start_purification = v.at(k, kBitLayout.purification) != 0;
    c.start_reaction = v.at(k, kBitLayout.reaction) != 0;
    c.start_mixing = v.at(k, kBitLayout.mixing) != 0;
  }
  return cmds;
}

inline InstructionVector encode(const std::vector<TimestepCommand>& cmds,
                                double horizon_hours) {
  auto v = InstructionVector::zeros(horizon_hours);
  if (cmds.size() != static_cast<std::size_t>(v.steps()))
    throw std::invalid_argument("encode: wrong number of commands");
  for (int k = 0; k < v.steps(); ++k) {
    const auto& c = cmds[static_cast<std::size_t>(k)];
    v.at(k, kBitLayout.purification) = c.start_purification ? 1 : 0;
    v.at(k, kBitLayout.reaction) = c.start_reaction ? 1 : 0;
    v.at(k, kBitLayout.mixing) = c.start_mixing ? 1 : 0;
  }
  return v;
}

// Random schedule with at most half the bits set: the number of ones k is
// drawn uniformly from {0, ..., L/2}, then k positions uniformly without
// replacement.
inline InstructionVector random_init(double horizon_hours, Rng& rng) {
  auto v = InstructionVector::zeros(horizon_hours);
  const std::size_t length = v.bits.size();
  const std::uint64_t k = rng.next_below(length / 2 + 1);
  const auto positions =
      rng.sample_indices(length, static_cast<std::size_t>(k));
  for (auto p : positions) v.bits[p] = 1;
  return v;
}

}  // namespace flowbatch
