#pragma once

#include "ftprl/feasible_set.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ftprl {

/// splitmix64 finalizer applied to seed + golden-ratio * (stream + 1). Used
/// to derive an independent 64-bit seed for each trace row.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seedable generator with a fixed, documented state transition:
/// std::mt19937_64 (whose output sequence the standard pins exactly), with
/// doubles built from the top 53 bits. Distribution objects from <random> are
/// avoided because their algorithms vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal by Box-Muller (one draw per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// How a row of a trace turns into a round's loss.
enum class LossShape {
  Linear,     // the row is the subgradient g_t
  Quadratic,  // the row is a center c_t of f_t(x) = ||x - c_t||^2
};

/// Produces row t of a trace on demand. Implementations are pure functions
/// of their parameters, so any number of cursors may read concurrently.
class RowSource {
 public:
  virtual ~RowSource() = default;
  virtual Vector row(std::size_t t) const = 0;
  virtual std::string describe() const = 0;
};

/// Ordered sequence of T rows of length n.
class GradientTrace {
 public:
  GradientTrace(std::size_t n, std::size_t rounds, std::shared_ptr<const RowSource> source,
                LossShape shape = LossShape::Linear);

  static GradientTrace from_rows(std::size_t n, std::vector<Vector> rows,
                                 LossShape shape = LossShape::Linear,
                                 std::string label = "rows");

  std::size_t dimension() const { return n_; }
  std::size_t rounds() const { return rounds_; }
  LossShape loss_shape() const { return shape_; }
  std::string describe() const { return source_->describe(); }

  /// Row t, 0-based.
  Vector row(std::size_t t) const;

  std::vector<Vector> materialize() const;

 private:
  std::size_t n_;
  std::size_t rounds_;
  std::shared_ptr<const RowSource> source_;
  LossShape shape_;
};

/// Coordinate i (1-based) is 1 with probability i^{-alpha}, else 0.
struct HeavyTail {
  double alpha;
};
/// Blocked +-1 schedule on a box; see gen_bad_family.
struct BadFamily {};
/// Directions uniform on the unit sphere.
struct RandomSphere {};
/// Entries uniform on [-1, 1].
struct UniformCube {};
/// Quadratic losses whose centers drift linearly between two random points
/// in [-1, 1]^n, with per-round uniform jitter of the given amplitude.
struct QuadraticDrift {
  double jitter;
};

struct GeneratorSpec {
  using Kind = std::variant<HeavyTail, BadFamily, RandomSphere, UniformCube, QuadraticDrift>;
  Kind kind;
  std::uint64_t seed = 0;
  std::size_t n = 1;
  std::size_t rounds = 1;
};

GradientTrace gen_heavy_tail(const GeneratorSpec& spec);

/// Family in which a global learning rate starves late coordinates.
/// n = ceil(T^{1/3}) coordinates; the horizon is split into n equal blocks
/// (the last takes the remainder) and coordinate b is active only in block b,
/// with gradient -1 with probability (1 + bias_b) / 2 and +1 otherwise, where
/// bias_b = 1 - b / (2n) decays from 1 towards 1/2. The feasible set is the
/// cube of half-width T^{1/6} / 2, so every width is T^{1/6}. spec.n is
/// ignored. Requires T >= 8.
std::pair<GradientTrace, FeasibleSet> gen_bad_family(const GeneratorSpec& spec);

GradientTrace gen_random_sphere(const GeneratorSpec& spec);
GradientTrace gen_uniform_cube(const GeneratorSpec& spec);
GradientTrace gen_quadratic_drift(const GeneratorSpec& spec);

/// Dispatches on spec.kind. For BadFamily the emitted set is returned too.
std::pair<GradientTrace, std::optional<FeasibleSet>> generate(const GeneratorSpec& spec);

/// Malformed trace file; the message names the offending line.
class TraceParseError : public InvalidArgument {
 public:
  TraceParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Text format: a header `# n=<int> T=<int>` (optionally followed by
/// ` loss=quadratic`), then T lines of n comma-separated decimals. Values are
/// written in shortest round-trip form.
void write_trace(const GradientTrace& trace, const std::filesystem::path& path);
void write_trace(const GradientTrace& trace, std::ostream& out);
GradientTrace read_trace(const std::filesystem::path& path);
GradientTrace read_trace(std::istream& in, const std::string& name = "<stream>");

}  // namespace ftprl
