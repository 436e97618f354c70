#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace trivac {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Bad parameters or an inconsistent configuration. CLI maps this to exit code 1.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical stage failed to converge or produced an unusable result.
/// CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Truncated Fock space overflowed (population leaked into the top level).
struct TruncationError : NumericalError {
  using NumericalError::NumericalError;
};

/// State collapsed below the trace floor; normalization is meaningless.
struct DegenerateStateError : NumericalError {
  using NumericalError::NumericalError;
};

enum class Det : int { A = 0, B = 1, C = 2 };

inline char det_name(Det d) { return "ABC"[static_cast<int>(d)]; }

inline Det det_from_char(char c) {
  switch (c) {
    case 'A': case 'a': return Det::A;
    case 'B': case 'b': return Det::B;
    case 'C': case 'c': return Det::C;
  }
  throw ConfigError(std::string("unknown detector id '") + c + "'");
}

/// splitmix64: tiny deterministic PRNG. All stochastic pieces (optimizer
/// multi-starts) draw from this so runs are reproducible across platforms,
/// independent of libstdc++ distribution internals.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace trivac
