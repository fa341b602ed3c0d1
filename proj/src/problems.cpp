#include "ftprl/problems.hpp"

#include "overloaded.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string_view>

namespace ftprl {

namespace {

using detail::Overloaded;

class InMemorySource final : public RowSource {
 public:
  InMemorySource(std::vector<Vector> rows, std::string label)
      : rows_(std::move(rows)), label_(std::move(label)) {}
  Vector row(std::size_t t) const override { return rows_.at(t); }
  std::string describe() const override { return label_; }

 private:
  std::vector<Vector> rows_;
  std::string label_;
};

class HeavyTailSource final : public RowSource {
 public:
  HeavyTailSource(std::size_t n, double alpha, std::uint64_t seed)
      : alpha_(alpha), seed_(seed), probs_(static_cast<Eigen::Index>(n)) {
    for (std::size_t i = 0; i < n; ++i) {
      probs_[static_cast<Eigen::Index>(i)] = std::pow(static_cast<double>(i + 1), -alpha);
    }
  }
  Vector row(std::size_t t) const override {
    Rng rng(mix_seed(seed_, t));
    Vector g(probs_.size());
    for (Eigen::Index i = 0; i < probs_.size(); ++i) g[i] = rng.uniform() < probs_[i] ? 1.0 : 0.0;
    return g;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "heavy-tail(alpha=" << alpha_ << ",seed=" << seed_ << ")";
    return os.str();
  }

 private:
  double alpha_;
  std::uint64_t seed_;
  Vector probs_;
};

class BadFamilySource final : public RowSource {
 public:
  BadFamilySource(std::size_t n, std::size_t rounds, std::uint64_t seed)
      : n_(n), block_(rounds / n), seed_(seed) {}
  Vector row(std::size_t t) const override {
    const std::size_t b = std::min(t / block_, n_ - 1);
    const double bias = 1.0 - static_cast<double>(b) / (2.0 * static_cast<double>(n_));
    Rng rng(mix_seed(seed_, t));
    Vector g = Vector::Zero(static_cast<Eigen::Index>(n_));
    g[static_cast<Eigen::Index>(b)] = rng.uniform() < 0.5 * (1.0 + bias) ? -1.0 : 1.0;
    return g;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "bad-family(inspired,blocks=" << n_ << ",seed=" << seed_ << ")";
    return os.str();
  }

 private:
  std::size_t n_;
  std::size_t block_;
  std::uint64_t seed_;
};

class SphereSource final : public RowSource {
 public:
  SphereSource(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {}
  Vector row(std::size_t t) const override {
    Rng rng(mix_seed(seed_, t));
    Vector g(static_cast<Eigen::Index>(n_));
    do {
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
    } while (g.norm() == 0.0);
    return g / g.norm();
  }
  std::string describe() const override {
    return "sphere(seed=" + std::to_string(seed_) + ")";
  }

 private:
  std::size_t n_;
  std::uint64_t seed_;
};

class UniformSource final : public RowSource {
 public:
  UniformSource(std::size_t n, std::uint64_t seed) : n_(n), seed_(seed) {}
  Vector row(std::size_t t) const override {
    Rng rng(mix_seed(seed_, t));
    Vector g(static_cast<Eigen::Index>(n_));
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.uniform(-1.0, 1.0);
    return g;
  }
  std::string describe() const override {
    return "uniform(seed=" + std::to_string(seed_) + ")";
  }

 private:
  std::size_t n_;
  std::uint64_t seed_;
};

class DriftSource final : public RowSource {
 public:
  DriftSource(std::size_t n, std::size_t rounds, double jitter, std::uint64_t seed)
      : rounds_(rounds), jitter_(jitter), seed_(seed) {
    // Endpoints come from a stream no row uses.
    Rng rng(mix_seed(seed, ~std::uint64_t{0}));
    start_.resize(static_cast<Eigen::Index>(n));
    end_.resize(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < start_.size(); ++i) start_[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < end_.size(); ++i) end_[i] = rng.uniform(-1.0, 1.0);
  }
  Vector row(std::size_t t) const override {
    const double frac = rounds_ > 1 ? static_cast<double>(t) / static_cast<double>(rounds_ - 1) : 0.0;
    Vector c = start_ + frac * (end_ - start_);
    Rng rng(mix_seed(seed_, t));
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] += rng.uniform(-jitter_, jitter_);
    return c;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "quadratic-drift(jitter=" << jitter_ << ",seed=" << seed_ << ")";
    return os.str();
  }

 private:
  std::size_t rounds_;
  double jitter_;
  std::uint64_t seed_;
  Vector start_;
  Vector end_;
};

void require_shape(const GeneratorSpec& spec) {
  if (spec.n == 0) throw InvalidArgument("generator: n must be at least 1");
  if (spec.rounds == 0) throw InvalidArgument("generator: T must be at least 1");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::size_t parse_count(std::string_view token, std::string_view key, std::size_t line) {
  if (token.substr(0, key.size()) != key) {
    throw TraceParseError(line, "expected header field '" + std::string(key) + "'");
  }
  token.remove_prefix(key.size());
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw TraceParseError(line, "malformed header value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

GradientTrace::GradientTrace(std::size_t n, std::size_t rounds,
                             std::shared_ptr<const RowSource> source, LossShape shape)
    : n_(n), rounds_(rounds), source_(std::move(source)), shape_(shape) {
  if (!source_) throw InvalidArgument("GradientTrace: missing row source");
}

GradientTrace GradientTrace::from_rows(std::size_t n, std::vector<Vector> rows, LossShape shape,
                                       std::string label) {
  for (const Vector& r : rows) {
    if (static_cast<std::size_t>(r.size()) != n) {
      throw InvalidArgument("GradientTrace: row length differs from n");
    }
    require_finite(r, "GradientTrace row");
  }
  const std::size_t rounds = rows.size();
  return GradientTrace(n, rounds, std::make_shared<InMemorySource>(std::move(rows), std::move(label)), shape);
}

Vector GradientTrace::row(std::size_t t) const {
  if (t >= rounds_) throw InvalidArgument("GradientTrace: row index out of range");
  return source_->row(t);
}

std::vector<Vector> GradientTrace::materialize() const {
  std::vector<Vector> rows;
  rows.reserve(rounds_);
  for (std::size_t t = 0; t < rounds_; ++t) rows.push_back(row(t));
  return rows;
}

GradientTrace gen_heavy_tail(const GeneratorSpec& spec) {
  require_shape(spec);
  const auto* p = std::get_if<HeavyTail>(&spec.kind);
  if (!p) throw InvalidArgument("gen_heavy_tail: spec is not heavy-tail");
  if (!(p->alpha >= 1.0 && p->alpha < 2.0)) {
    throw InvalidArgument("gen_heavy_tail: alpha must lie in [1, 2)");
  }
  return GradientTrace(spec.n, spec.rounds,
                       std::make_shared<HeavyTailSource>(spec.n, p->alpha, spec.seed));
}

std::pair<GradientTrace, FeasibleSet> gen_bad_family(const GeneratorSpec& spec) {
  if (spec.rounds < 8) throw InvalidArgument("gen_bad_family: T must be at least 8");
  const double rounds = static_cast<double>(spec.rounds);
  const auto n = static_cast<std::size_t>(std::ceil(std::cbrt(rounds) - 1e-9));
  const double half_width = 0.5 * std::pow(rounds, 1.0 / 6.0);
  GradientTrace trace(n, spec.rounds, std::make_shared<BadFamilySource>(n, spec.rounds, spec.seed));
  return {std::move(trace), FeasibleSet::cube(n, half_width)};
}

GradientTrace gen_random_sphere(const GeneratorSpec& spec) {
  require_shape(spec);
  return GradientTrace(spec.n, spec.rounds, std::make_shared<SphereSource>(spec.n, spec.seed));
}

GradientTrace gen_uniform_cube(const GeneratorSpec& spec) {
  require_shape(spec);
  return GradientTrace(spec.n, spec.rounds, std::make_shared<UniformSource>(spec.n, spec.seed));
}

GradientTrace gen_quadratic_drift(const GeneratorSpec& spec) {
  require_shape(spec);
  const auto* p = std::get_if<QuadraticDrift>(&spec.kind);
  if (!p) throw InvalidArgument("gen_quadratic_drift: spec is not quadratic-drift");
  if (!(p->jitter >= 0.0) || !std::isfinite(p->jitter)) {
    throw InvalidArgument("gen_quadratic_drift: jitter must be finite and nonnegative");
  }
  return GradientTrace(spec.n, spec.rounds,
                       std::make_shared<DriftSource>(spec.n, spec.rounds, p->jitter, spec.seed),
                       LossShape::Quadratic);
}

std::pair<GradientTrace, std::optional<FeasibleSet>> generate(const GeneratorSpec& spec) {
  return std::visit(
      Overloaded{
          [&](const HeavyTail&) -> std::pair<GradientTrace, std::optional<FeasibleSet>> {
            return {gen_heavy_tail(spec), std::nullopt};
          },
          [&](const BadFamily&) -> std::pair<GradientTrace, std::optional<FeasibleSet>> {
            auto [trace, set] = gen_bad_family(spec);
            return {std::move(trace), std::move(set)};
          },
          [&](const RandomSphere&) -> std::pair<GradientTrace, std::optional<FeasibleSet>> {
            return {gen_random_sphere(spec), std::nullopt};
          },
          [&](const UniformCube&) -> std::pair<GradientTrace, std::optional<FeasibleSet>> {
            return {gen_uniform_cube(spec), std::nullopt};
          },
          [&](const QuadraticDrift&) -> std::pair<GradientTrace, std::optional<FeasibleSet>> {
            return {gen_quadratic_drift(spec), std::nullopt};
          },
      },
      spec.kind);
}

TraceParseError::TraceParseError(std::size_t line, const std::string& what)
    : InvalidArgument("trace line " + std::to_string(line) + ": " + what), line_(line) {}

void write_trace(const GradientTrace& trace, std::ostream& out) {
  out << "# n=" << trace.dimension() << " T=" << trace.rounds();
  if (trace.loss_shape() == LossShape::Quadratic) out << " loss=quadratic";
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < trace.rounds(); ++t) {
    const Vector r = trace.row(t);
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      if (i > 0) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), r[i]);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

void write_trace(const GradientTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path.string());
  write_trace(trace, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing trace file: " + path.string());
}

GradientTrace read_trace(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw TraceParseError(1, "missing header in " + name);
  std::string_view header = trim(line);
  if (header.substr(0, 2) != "# ") throw TraceParseError(1, "header must start with '# '");
  header.remove_prefix(2);

  std::vector<std::string_view> fields;
  while (!header.empty()) {
    header = trim(header);
    const auto space = header.find(' ');
    fields.push_back(header.substr(0, space));
    header = space == std::string_view::npos ? std::string_view{} : header.substr(space + 1);
  }
  if (fields.size() < 2 || fields.size() > 3) {
    throw TraceParseError(1, "header must be '# n=<int> T=<int>'");
  }
  const std::size_t n = parse_count(fields[0], "n=", 1);
  const std::size_t rounds = parse_count(fields[1], "T=", 1);
  LossShape shape = LossShape::Linear;
  if (fields.size() == 3) {
    if (fields[2] == "loss=quadratic") {
      shape = LossShape::Quadratic;
    } else if (fields[2] != "loss=linear") {
      throw TraceParseError(1, "unknown header field '" + std::string(fields[2]) + "'");
    }
  }
  if (n == 0) throw TraceParseError(1, "n must be positive");

  std::vector<Vector> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view rest = trim(line);
    if (rows.size() == rounds) {
      throw TraceParseError(lineno, "more rows than the header's T=" + std::to_string(rounds));
    }
    Vector row(static_cast<Eigen::Index>(n));
    std::size_t count = 0;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view field = trim(rest.substr(0, comma));
      if (count == n) {
        throw TraceParseError(lineno, "expected " + std::to_string(n) + " fields, got more");
      }
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw TraceParseError(lineno, "non-numeric field '" + std::string(field) + "'");
      }
      if (!std::isfinite(value)) throw TraceParseError(lineno, "non-finite field");
      row[static_cast<Eigen::Index>(count++)] = value;
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (count != n) {
      throw TraceParseError(lineno, "expected " + std::to_string(n) + " fields, got " +
                                        std::to_string(count));
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != rounds) {
    throw TraceParseError(lineno, "header promises T=" + std::to_string(rounds) + " rows, found " +
                                      std::to_string(rows.size()));
  }
  return GradientTrace::from_rows(n, std::move(rows), shape, name);
}

GradientTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
  return read_trace(in, path.string());
}

}  // namespace ftprl
