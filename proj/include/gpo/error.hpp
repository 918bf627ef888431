#pragma once

#include <stdexcept>

namespace gpo {

/// Malformed input file (Matrix Market, ordering, checkpoint).
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument violates a documented precondition.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Elimination of a node that is not live.
struct invalid_action : std::logic_error {
  using std::logic_error::logic_error;
};

/// Operation undefined on the current state (e.g. forward on an empty graph).
struct invalid_state : std::logic_error {
  using std::logic_error::logic_error;
};

} // namespace gpo
