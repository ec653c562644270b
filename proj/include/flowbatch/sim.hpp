#pragma once
// Deterministic discrete-event simulator for the three-stage flowshop.
//
// Time advances on a 0.5h grid. Each tick settles to a fixpoint of
// [deposits; starts], downstream-first, so that a deposit that frees a unit,
// a withdrawal that frees storage space, and the starts they enable all
// resolve within the same instant:
//
//   * A batch that finishes processing is deposited into its output state;
//     whatever exceeds the storage limit stays in the unit (the unit remains
//     occupied until its discharge fully drains).
//   * A schedule bit at step t is a start request. A request that can run at
//     its own step does so immediately, drawing whatever is available. Each
//     unit also carries a one-deep command queue: a request that cannot run
//     at its own step (unit occupied, or nothing to draw) waits in the queue
//     and fires at the first step where the unit is idle and at least half a
//     full load is on hand — a deferred start holds out for a worthwhile
//     batch instead of grabbing scraps, so one early request per run keeps a
//     pipeline fed without starving the unit's next cycle. A request arriving
//     while the queue is already holding one is refused and recorded as
//     `skipped` (never raised as an error), as is a request still queued at
//     the horizon.
//   * A start withdraws
//     batch = min(unit capacity, upstream state level + the upstream unit's
//     completed-but-undelivered discharge). The part beyond the state level
//     is drawn straight from the upstream unit's discharge — the same-instant
//     net flow that lets a full reactor batch pass through a small buffer.
//
// A deposit landing at exactly t = horizon still counts; batches still
// processing at the horizon contribute nothing to yield (they appear in the
// mass audit as in-flight). Starts only happen strictly before the horizon.

#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <vector>

#include "flowbatch/encoding.hpp"
#include "flowbatch/plant.hpp"

namespace flowbatch {

struct InFlightBatch {
  double amount = 0.0;           // material still inside the unit
  double completion_time = 0.0;  // when processing finishes
  bool complete_recorded = false;
};

struct SimState {
  double clock = 0.0;
  std::array<double, 4> state_amounts{};   // state1..state4
  std::array<double, 3> unit_busy_until{};  // mixer, reactor, purificator
  std::array<InFlightBatch, 3> in_flight{};
};

enum class EventAction { start, complete, skipped };

inline const char* to_string(EventAction a) {
  switch (a) {
    case EventAction::start: return "start";
    case EventAction::complete: return "complete";
    case EventAction::skipped: return "skipped";
  }
  return "?";
}

struct SimEvent {
  double time = 0.0;
  int unit = 0;  // 0 mixer, 1 reactor, 2 purificator
  EventAction action{};
  double amount = 0.0;
};

struct SimOutcome {
  double yield_amount = 0.0;  // state4 at the horizon: the objective value
  std::vector<SimEvent> events;
  double total_drawn = 0.0;   // withdrawn from state1
};

struct SimResult {
  SimOutcome outcome;
  SimState final_state;
};

// Batch size for a commanded start given plain state amounts:
// min(unit capacity, upstream available). Unlimited upstream (state1) makes
// mixing capacity-bound. The simulator additionally lets a start draw from
// the upstream unit's completed discharge (see simulate_full); this function
// is the rule on state amounts alone.
inline double start_amount(const PlantConfig& config, ProcessKind process,
                           const std::array<double, 4>& state_amounts) {
  const auto u = static_cast<std::size_t>(process);
  const double upstream = state_amounts[u];
  return std::min(config.units[u].capacity, upstream);
}

inline SimResult simulate_full(const PlantConfig& config,
                               const InstructionVector& schedule,
                               double horizon_hours) {
  config.validate();
  const int total_steps = InstructionVector::steps_for(horizon_hours);
  if (schedule.bits.size() != static_cast<std::size_t>(total_steps) * 3 ||
      !schedule.valid())
    throw std::invalid_argument(
        "simulate: schedule must hold (horizon*2)*3 bits of 0/1");

  SimState st;
  for (std::size_t s = 0; s < 4; ++s)
    st.state_amounts[s] = config.initial_amount_of(s);

  SimOutcome out;
  out.total_drawn = 0.0;

  // Start order within a tick: purification, reaction, mixing. Unit index =
  // static_cast<int>(kind): mixer 0, reactor 1, purificator 2.
  static constexpr std::array<int, 3> start_order = {2, 1, 0};

  const auto bit_offset = [](int unit) {
    switch (unit) {
      case 0: return kBitLayout.mixing;
      case 1: return kBitLayout.reaction;
      default: return kBitLayout.purification;
    }
  };

  // One-deep command queues: a queued request fires at the first instant the
  // unit is idle with at least half a full load to draw.
  std::array<bool, 3> queued{};

  for (int t = 0; t <= total_steps; ++t) {
    st.clock = 0.5 * t;
    std::array<bool, 3> started{false, false, false};
    std::array<bool, 3> bit_used{false, false, false};

    bool changed = true;
    int guard = 0;
    while (changed) {
      if (++guard > 64)
        throw std::logic_error("simulate: tick fixpoint failed to settle");
      changed = false;

      // Deposits, downstream-first. Unit u feeds state u+1.
      for (int u = 2; u >= 0; --u) {
        auto& f = st.in_flight[static_cast<std::size_t>(u)];
        if (f.amount <= 0.0 || f.completion_time > st.clock) continue;
        if (!f.complete_recorded) {
          out.events.push_back(
              {f.completion_time, u, EventAction::complete, f.amount});
          f.complete_recorded = true;
        }
        const std::size_t dst = static_cast<std::size_t>(u) + 1;
        const double space =
            config.storage_limit_of(dst) - st.state_amounts[dst];
        const double d = std::min(f.amount, std::max(space, 0.0));
        if (d > 0.0) {
          st.state_amounts[dst] += d;
          f.amount -= d;
          changed = true;
        }
      }

      // Starts, downstream-first; each unit starts at most once per tick.
      if (t < total_steps) {
        for (int u : start_order) {
          const std::size_t src = static_cast<std::size_t>(u);
          const bool fresh = schedule.at(t, bit_offset(u)) && !bit_used[src];
          if (!queued[src] && !fresh) continue;
          if (started[src]) continue;
          if (st.in_flight[src].amount > 0.0)
            continue;  // occupied (processing or draining); may free later
                       // in this fixpoint

          double pool = st.state_amounts[src];
          double* pull_from = nullptr;
          if (u > 0) {
            auto& up = st.in_flight[static_cast<std::size_t>(u - 1)];
            if (up.amount > 0.0 && up.completion_time <= st.clock) {
              pool += up.amount;
              pull_from = &up.amount;
            }
          }
          const double cap = config.units[src].capacity;
          const double batch = std::min(cap, pool);
          bool use_queue = queued[src];
          if (use_queue && pool < 0.5 * cap) {
            if (fresh)
              use_queue = false;  // the step's own request may still run small
            else
              continue;  // deferred start holds out for a half load
          }
          if (batch <= 0.0) continue;  // nothing to draw; may change later

          const double take = std::min(batch, st.state_amounts[src]);
          if (st.state_amounts[src] !=
              std::numeric_limits<double>::infinity())
            st.state_amounts[src] -= take;
          const double pulled = batch - take;
          if (pulled > 0.0) *pull_from -= pulled;

          auto& f = st.in_flight[static_cast<std::size_t>(u)];
          f.amount = batch;
          f.completion_time =
              st.clock + config.units[src].processing_time;
          f.complete_recorded = false;
          st.unit_busy_until[static_cast<std::size_t>(u)] = f.completion_time;
          out.events.push_back({st.clock, u, EventAction::start, batch});
          if (u == 0) out.total_drawn += batch;
          started[static_cast<std::size_t>(u)] = true;
          if (use_queue)
            queued[src] = false;  // oldest request first
          else
            bit_used[src] = true;
          changed = true;
        }
      }
    }

    // Internal invariant: storage safety at every event boundary.
    for (std::size_t s = 0; s < 4; ++s) {
      const double lim = config.storage_limit_of(s);
      if (st.state_amounts[s] < -1e-9 || st.state_amounts[s] > lim + 1e-9)
        throw std::logic_error("simulate: storage bound violated");
    }

    // A unit still draining cannot start before the next tick.
    for (std::size_t u = 0; u < 3; ++u) {
      const auto& f = st.in_flight[u];
      if (f.amount > 0.0 && f.completion_time <= st.clock)
        st.unit_busy_until[u] = std::max(st.unit_busy_until[u], st.clock + 0.5);
    }

    // Resolve this tick's unconsumed requests: a unit whose queue already
    // holds one refuses the request (skipped); otherwise it is queued.
    if (t < total_steps) {
      for (int u : start_order) {
        const auto s = static_cast<std::size_t>(u);
        if (!schedule.at(t, bit_offset(u)) || bit_used[s]) continue;
        if (queued[s])
          out.events.push_back({st.clock, u, EventAction::skipped, 0.0});
        else
          queued[s] = true;
      }
    }
  }

  // Requests still queued at the horizon never found a feasible start.
  for (int u : start_order)
    if (queued[static_cast<std::size_t>(u)])
      out.events.push_back({st.clock, u, EventAction::skipped, 0.0});

  out.yield_amount = st.state_amounts[3];
  return {std::move(out), st};
}

inline SimOutcome simulate(const PlantConfig& config,
                           const InstructionVector& schedule,
                           double horizon_hours) {
  return simulate_full(config, schedule, horizon_hours).outcome;
}

// Mass audit: everything drawn from state1 is accounted for at the horizon —
// sitting in a state or still inside a unit (conversion ratio 1.0).
inline bool audit_mass(const SimOutcome& outcome,
                       const SimState& final_state) {
  double accounted = final_state.state_amounts[1] +
                     final_state.state_amounts[2] +
                     final_state.state_amounts[3];
  for (const auto& f : final_state.in_flight) accounted += f.amount;
  return std::abs(outcome.total_drawn - accounted) <= 1e-6;
}

}  // namespace flowbatch
