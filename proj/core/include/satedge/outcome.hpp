#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace satedge {

/// Raised for malformed scenario documents, unknown override keys and bad
/// command-line configuration. Infeasibility is never reported this way.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An assignment (or scenario) for which no bandwidth plan satisfies the
/// constraints. `violation` is the smallest achievable worst-case scaled
/// residual, so callers can rank infeasible candidates.
struct Infeasibility {
  std::string constraint;
  double violation = 0.0;
  std::string detail;
};

template <class T>
class Outcome {
 public:
  Outcome(T value) : state_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Outcome(Infeasibility why) : state_(std::move(why)) {}  // NOLINT(google-explicit-constructor)

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Outcome::value on infeasible result: " + infeasibility().constraint);
    return std::get<T>(state_);
  }
  T& value() & {
    if (!ok()) throw std::logic_error("Outcome::value on infeasible result: " + infeasibility().constraint);
    return std::get<T>(state_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Outcome::value on infeasible result: " + infeasibility().constraint);
    return std::get<T>(std::move(state_));
  }
  const Infeasibility& infeasibility() const { return std::get<Infeasibility>(state_); }

  const T* operator->() const { return &value(); }
  const T& operator*() const& { return value(); }

 private:
  std::variant<T, Infeasibility> state_;
};

}  // namespace satedge
