#pragma once

#include <stdexcept>
#include <string>

namespace twin {

// Configuration / usage problems: reported and the run aborts cleanly.
struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A protocol or accounting invariant failed. Always fatal: the simulator
// exits nonzero rather than producing results from a corrupt schedule.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace twin

#define TWIN_CHECK(cond, msg)                                 \
  do {                                                        \
    if (!(cond)) throw ::twin::InvariantViolation(msg);       \
  } while (false)
