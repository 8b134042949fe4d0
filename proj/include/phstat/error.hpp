#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phstat {

enum class Errc {
  invalid_parameter,
  resource_limit,
  empty_input,
  degenerate_input,
  support,
  convergence,
  index,
  empty_sims,
  all_candidates_failed,
  io,
};

/// Machine-readable name used in CLI error payloads.
inline std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::resource_limit: return "resource-limit";
    case Errc::empty_input: return "empty-input";
    case Errc::degenerate_input: return "degenerate-input";
    case Errc::support: return "support";
    case Errc::convergence: return "convergence";
    case Errc::index: return "index";
    case Errc::empty_sims: return "empty-sims";
    case Errc::all_candidates_failed: return "all-candidates-failed";
    case Errc::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {

inline void require(bool condition, Errc code, const char* message) {
  if (!condition) throw Error(code, message);
}

}  // namespace detail
}  // namespace phstat
