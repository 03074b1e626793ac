#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace crpq {

using u64 = std::uint64_t;

inline constexpr u64 kInfinity = std::numeric_limits<u64>::max();

/// Raised when an input violates the grammar; carries a 1-based position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A desk-scale guardrail was hit; the computation could not finish exactly.
class CapExceeded : public std::runtime_error {
 public:
  explicit CapExceeded(const std::string& what) : std::runtime_error("cap exceeded: " + what) {}
};

/// Precondition violation on an otherwise well-formed input.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Caps {
  u64 expansions = 100'000;          // left-hand expansions checked by the boundedness loop
  u64 materialized_atoms = 1'000'000;
  u64 dp_length = 1'000'000;         // exact-length dynamic program horizon
  u64 search_steps = 200'000;        // backtracking steps per embedding search
  u64 candidates = 200'000;          // candidate runs generated for one variable
  u64 cycle_sets = 1u << 16;         // simple-path x cycle-set combinations in a length set
  u64 branch_blowup = 4096;          // sums-of-terms normalization of one expression
  double time_budget_ms = 0;         // 0 disables the wall-clock budget
};

struct Stats {
  u64 expansions_checked = 0;
  u64 nfa_calls = 0;
  u64 search_steps = 0;
  u64 zplus_uncertified = 0;
};

// Wall-clock deadline shared by one analysis run.
class Deadline {
 public:
  Deadline() = default;
  explicit Deadline(double budget_ms) {
    if (budget_ms > 0) {
      active_ = true;
      end_ = std::chrono::steady_clock::now() + std::chrono::microseconds(static_cast<long long>(budget_ms * 1000));
    }
  }
  bool expired() const { return active_ && std::chrono::steady_clock::now() > end_; }
  void check() const {
    if (expired()) throw CapExceeded("time budget");
  }

 private:
  bool active_ = false;
  std::chrono::steady_clock::time_point end_{};
};

inline u64 mul_checked(u64 a, u64 b) {
  if (a != 0 && b > kInfinity / a) throw CapExceeded("64-bit overflow in bound arithmetic");
  return a * b;
}

inline u64 add_checked(u64 a, u64 b) {
  if (b > kInfinity - a) throw CapExceeded("64-bit overflow in bound arithmetic");
  return a + b;
}

// Saturating variants for ranges that may legitimately be unbounded.
inline u64 mul_sat(u64 a, u64 b) { return (a != 0 && b > kInfinity / a) ? kInfinity : a * b; }
inline u64 add_sat(u64 a, u64 b) { return b > kInfinity - a ? kInfinity : a + b; }

/// Number of binary digits charged for an exponent; 0 and 1 both cost one symbol.
inline u64 ceil_log2(u64 n) {
  if (n <= 2) return 1;
  u64 bits = 0;
  u64 v = n - 1;
  while (v > 0) {
    ++bits;
    v >>= 1;
  }
  return bits;
}

}  // namespace crpq
