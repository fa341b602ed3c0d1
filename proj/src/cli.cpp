#include "ftprl/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace ftprl {

namespace {

using Json = nlohmann::ordered_json;

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view text, std::string_view field) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw InvalidArgument(std::string(field) + ": expected a finite number, got '" +
                          std::string(text) + "'");
  }
  return value;
}

std::size_t parse_size(std::string_view text, std::string_view field) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument(std::string(field) + ": expected a nonnegative integer, got '" +
                          std::string(text) + "'");
  }
  return value;
}

NormExponent parse_exponent(std::string_view text) {
  if (text == "inf") return NormExponent::infinity();
  return NormExponent(parse_double(text, "--set p"));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

SymPD parse_matrix(std::string_view text) {
  const auto rows = split(text, ';');
  if (rows.size() == 1) {
    const auto parts = split(rows[0], ',');
    Vector d(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) {
      d[static_cast<Eigen::Index>(i)] = parse_double(parts[i], "--set A");
    }
    return SymPD::diagonal(d);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto parts = split(rows[static_cast<std::size_t>(i)], ',');
    if (static_cast<Eigen::Index>(parts.size()) != n) {
      throw InvalidArgument("--set A: row " + std::to_string(i + 1) + " needs " +
                            std::to_string(n) + " entries");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = parse_double(parts[static_cast<std::size_t>(j)], "--set A");
    }
  }
  if (!m.isApprox(m.transpose(), 1e-12)) throw InvalidArgument("--set A: matrix is not symmetric");
  return SymPD(m);
}

std::string format_matrix(const SymPD& a) {
  const Matrix& m = a.matrix();
  std::string text;
  if (a.is_diagonal()) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i > 0) text += ',';
      text += format_double(m(i, i));
    }
    return text;
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) text += ';';
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) text += ',';
      text += format_double(m(i, j));
    }
  }
  return text;
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json optimizer_json(const PosthocResult& r) {
  if (const auto* alpha = std::get_if<double>(&r.optimizer)) return *alpha;
  const Vector& d = std::get<DiagPSD>(r.optimizer).diag();
  return std::vector<double>(d.data(), d.data() + d.size());
}

struct Options {
  std::string config;
  std::string learner;
  std::string learners;
  std::string set;
  std::string trace;
  std::string generator;
  std::uint64_t seed = 0;
  std::size_t rounds = 1000;
  std::size_t dim = 10;
  std::string out;
  std::string per_round_csv;
  std::size_t sample_every = 1;
  std::string family;
  double epsilon_seed = 1e-6;
  std::string ogd_schedule = "adaptive";
  double ogd_rate = 1.0;
  bool serial = false;
};

struct Problem {
  GradientTrace trace;
  std::optional<FeasibleSet> set;
  bool inspired = false;
};

Problem load_problem(const Options& o) {
  if (o.trace.empty() == o.generator.empty()) {
    throw InvalidArgument("exactly one of --trace and --generator is required");
  }
  if (!o.trace.empty()) {
    Problem p{read_trace(std::filesystem::path(o.trace)), std::nullopt, false};
    if (!o.set.empty()) p.set = parse_set_spec(o.set);
    return p;
  }
  const GeneratorSpec spec = parse_generator_spec(o.generator, o.seed, o.dim, o.rounds);
  auto [trace, emitted] = generate(spec);
  Problem p{std::move(trace), std::move(emitted), std::holds_alternative<BadFamily>(spec.kind)};
  if (!o.set.empty()) p.set = parse_set_spec(o.set);
  return p;
}

const FeasibleSet& require_set(const Problem& p) {
  if (!p.set) throw InvalidArgument("--set is required");
  return *p.set;
}

LearnerConfig make_config(LearnerKind kind, const FeasibleSet& set, const Options& o) {
  LearnerConfig config(kind, set, o.epsilon_seed);
  if (o.ogd_schedule == "adaptive") {
    config.ogd_schedule = OgdSchedule::Adaptive;
  } else if (o.ogd_schedule == "constant") {
    config.ogd_schedule = OgdSchedule::Constant;
  } else if (o.ogd_schedule == "inverse-sqrt") {
    config.ogd_schedule = OgdSchedule::InverseSqrt;
  } else {
    throw InvalidArgument("--ogd-schedule: expected adaptive, constant or inverse-sqrt, got '" +
                          o.ogd_schedule + "'");
  }
  config.ogd_rate = o.ogd_rate;
  return config;
}

LearnerKind require_learner(std::string_view name) {
  const auto kind = parse_learner_kind(name);
  if (!kind) {
    throw InvalidArgument("--learner: unknown learner '" + std::string(name) +
                          "' (expected diag, const, scale or ogd)");
  }
  return *kind;
}

void emit(const Json& doc, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << doc.dump(2) << '\n';
    return;
  }
  std::ofstream file(o.out);
  if (!file) throw InvalidArgument("--out: cannot open '" + o.out + "' for writing");
  file << doc.dump(2) << '\n';
  if (!file) throw InvalidArgument("--out: failed writing '" + o.out + "'");
}

Json tagged_report(const RegretReport& report, bool inspired) {
  Json j = report_to_json(report);
  if (inspired) j["note"] = "inspired lower-bound family; not an exact reconstruction";
  return j;
}

int cmd_run(const Options& o, std::ostream& out) {
  const LearnerKind kind = require_learner(o.learner);
  const Problem problem = load_problem(o);
  const LearnerConfig config = make_config(kind, require_set(problem), o);

  RunOptions options;
  options.sample_every = o.sample_every;
  std::ofstream csv;
  if (!o.per_round_csv.empty()) {
    csv.open(o.per_round_csv);
    if (!csv) throw InvalidArgument("--per-round-csv: cannot open '" + o.per_round_csv + "'");
    csv << "t,loss,regret,B_R\n";
    options.on_sample = [&csv](const RoundSample& s) {
      csv << s.t << ',' << format_double(s.loss) << ',' << format_double(s.regret) << ',';
      if (s.tracked_bound) csv << format_double(*s.tracked_bound);
      csv << '\n';
    };
  }
  const RegretReport report = run_learner(config, problem.trace, options);
  emit(tagged_report(report, problem.inspired), o, out);
  return kExitOk;
}

int cmd_bound(const Options& o, std::ostream& out) {
  const Problem problem = load_problem(o);
  const FeasibleSet& set = require_set(problem);
  if (problem.trace.loss_shape() != LossShape::Linear) {
    throw InvalidArgument("bound: needs a linear-loss trace; quadratic gradients depend on the learner");
  }
  if (problem.trace.dimension() != set.dimension()) {
    throw InvalidArgument("bound: trace dimension does not match --set");
  }
  PosthocFamily family;
  if (o.family == "const") {
    family = PosthocFamily::Const;
  } else if (o.family == "diag") {
    family = PosthocFamily::Diag;
  } else if (o.family == "full") {
    family = PosthocFamily::FullPSD;
  } else {
    throw InvalidArgument("--family: expected const, diag or full, got '" + o.family + "'");
  }

  const auto n = static_cast<Eigen::Index>(set.dimension());
  Vector g_sq = Vector::Zero(n);
  double transformed_mass = 0.0;
  const auto* t = set.as<TransformedBall>();
  for (std::size_t r = 0; r < problem.trace.rounds(); ++r) {
    const Vector g = problem.trace.row(r);
    g_sq += g.cwiseAbs2();
    if (t) transformed_mass += t->a.apply_inverse(g).squaredNorm();
  }

  PosthocResult result;
  if (family == PosthocFamily::FullPSD && t && t->p.value() == 2.0 && !t->a.is_diagonal()) {
    result = posthoc_fullpsd_sphere(transformed_mass);
  } else {
    result = posthoc_on_set(set, family, g_sq);
  }
  Json doc;
  doc["schema"] = 1;
  doc["family"] = std::string(to_string(result.family));
  doc["set"] = set.describe();
  doc["trace"] = problem.trace.describe();
  doc["rounds"] = problem.trace.rounds();
  doc["posthoc_bound"] = result.bound_value;
  doc["optimizer"] = optimizer_json(result);
  emit(doc, o, out);
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
  std::vector<LearnerKind> kinds;
  for (const auto name : split(o.learners, ',')) kinds.push_back(require_learner(name));
  if (kinds.size() < 2) throw InvalidArgument("--learners: name at least two learners");
  const Problem problem = load_problem(o);
  const FeasibleSet& set = require_set(problem);
  std::vector<LearnerConfig> configs;
  for (const LearnerKind kind : kinds) configs.push_back(make_config(kind, set, o));

  std::vector<RegretReport> reports;
  if (o.serial) {
    for (const auto& c : configs) reports.push_back(run_learner(c, problem.trace));
  } else {
    std::vector<std::future<RegretReport>> tasks;
    for (const auto& c : configs) {
      tasks.push_back(std::async(std::launch::async,
                                 [&c, &problem] { return run_learner(c, problem.trace); }));
    }
    for (auto& task : tasks) reports.push_back(task.get());
  }

  Json doc;
  doc["schema"] = 1;
  doc["set"] = set.describe();
  doc["trace"] = problem.trace.describe();
  Json list = Json::array();
  for (const auto& r : reports) list.push_back(tagged_report(r, problem.inspired));
  doc["reports"] = std::move(list);

  const auto* t = set.as<TransformedBall>();
  if (t && t->p.value() == 2.0 && problem.trace.loss_shape() == LossShape::Linear) {
    double g_total = 0.0;
    double g_hat_total = 0.0;
    for (std::size_t r = 0; r < problem.trace.rounds(); ++r) {
      const Vector g = problem.trace.row(r);
      g_total += g.squaredNorm();
      g_hat_total += t->a.apply_inverse(g).squaredNorm();
    }
    Json pair;
    pair["const_closed_form"] = 2.0 * l2_diameter(set) * std::sqrt(g_total);
    pair["scale_closed_form"] = 4.0 * std::sqrt(g_hat_total);
    doc["ellipsoid_bounds"] = std::move(pair);
  }
  emit(doc, o, out);
  return kExitOk;
}

int cmd_gen(const Options& o, std::ostream& out) {
  if (o.generator.empty()) throw InvalidArgument("--generator is required");
  if (o.out.empty()) throw InvalidArgument("--out: gen needs a trace path");
  const GeneratorSpec spec = parse_generator_spec(o.generator, o.seed, o.dim, o.rounds);
  auto [trace, emitted] = generate(spec);
  write_trace(trace, std::filesystem::path(o.out));
  Json doc;
  doc["schema"] = 1;
  doc["trace"] = o.out;
  doc["n"] = trace.dimension();
  doc["rounds"] = trace.rounds();
  doc["generator"] = trace.describe();
  doc["set"] = emitted ? Json(format_set_spec(*emitted)) : Json(nullptr);
  out << doc.dump(2) << '\n';
  return kExitOk;
}

// Rewrites `args` so that the entries of any --config file come first,
// right after the subcommand; later flags then override them.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path || args.empty()) return args;
  std::ifstream probe(*path);
  if (!probe) throw InvalidArgument("--config: cannot open '" + *path + "'");
  std::vector<std::string> expanded{args[0]};
  for (const auto& item : CLI::ConfigINI().from_file(*path)) {
    std::string value;
    for (std::size_t k = 0; k < item.inputs.size(); ++k) {
      if (k > 0) value += ',';
      value += item.inputs[k];
    }
    expanded.push_back("--" + item.fullname() + "=" + value);
  }
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

}  // namespace

FeasibleSet parse_set_spec(std::string_view text) {
  const std::size_t colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view rest = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  const auto fields = split(rest, ':');
  auto expect = [&](std::size_t count, const char* form) {
    if (colon == std::string_view::npos || fields.size() != count) {
      throw InvalidArgument(std::string("--set: expected ") + form + ", got '" + std::string(text) + "'");
    }
  };
  if (kind == "cube") {
    expect(2, "cube:<n>:<half-width>");
    return FeasibleSet::cube(parse_size(fields[0], "--set n"), parse_double(fields[1], "--set half-width"));
  }
  if (kind == "box") {
    expect(1, "box:<lo>..<hi>,...");
    const auto ranges = split(fields[0], ',');
    Vector lo(static_cast<Eigen::Index>(ranges.size()));
    Vector hi(lo.size());
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      const std::size_t dots = ranges[i].find("..");
      if (dots == std::string_view::npos) {
        throw InvalidArgument("--set: box range '" + std::string(ranges[i]) + "' needs the form lo..hi");
      }
      lo[static_cast<Eigen::Index>(i)] = parse_double(ranges[i].substr(0, dots), "--set lo");
      hi[static_cast<Eigen::Index>(i)] = parse_double(ranges[i].substr(dots + 2), "--set hi");
    }
    return FeasibleSet::box(lo, hi);
  }
  if (kind == "l2ball") {
    expect(2, "l2ball:<n>:<radius>");
    return FeasibleSet::l2_ball(parse_size(fields[0], "--set n"), parse_double(fields[1], "--set radius"));
  }
  if (kind == "lpball") {
    expect(3, "lpball:<n>:<p>:<radius>");
    return FeasibleSet::lp_ball(parse_size(fields[0], "--set n"), parse_exponent(fields[1]),
                                parse_double(fields[2], "--set radius"));
  }
  if (kind == "ellipsoid") {
    expect(1, "ellipsoid:<a1>,<a2>,...");
    return FeasibleSet::transformed_ball(parse_matrix(fields[0]), NormExponent(2.0));
  }
  if (kind == "tball") {
    expect(2, "tball:<p>:<a1>,<a2>,...");
    return FeasibleSet::transformed_ball(parse_matrix(fields[1]), parse_exponent(fields[0]));
  }
  throw InvalidArgument("--set: unknown set kind '" + std::string(kind) +
                        "' (expected cube, box, l2ball, lpball, ellipsoid or tball)");
}

std::string format_set_spec(const FeasibleSet& set) {
  if (const auto* b = set.as<Box>()) {
    const bool cube = b->lo.size() > 0 && (b->hi.array() == b->hi[0]).all() &&
                      (b->lo.array() == -b->hi[0]).all();
    if (cube) return "cube:" + std::to_string(b->hi.size()) + ":" + format_double(b->hi[0]);
    std::string text = "box:";
    for (Eigen::Index i = 0; i < b->lo.size(); ++i) {
      if (i > 0) text += ',';
      text += format_double(b->lo[i]) + ".." + format_double(b->hi[i]);
    }
    return text;
  }
  if (const auto* l2 = set.as<L2Ball>()) {
    return "l2ball:" + std::to_string(l2->n) + ":" + format_double(l2->radius);
  }
  if (const auto* lp = set.as<LpBall>()) {
    return "lpball:" + std::to_string(lp->n) + ":" + format_exponent(lp->p) + ":" +
           format_double(lp->radius);
  }
  const auto* t = set.as<TransformedBall>();
  if (t->p.value() == 2.0) return "ellipsoid:" + format_matrix(t->a);
  return "tball:" + format_exponent(t->p) + ":" + format_matrix(t->a);
}

GeneratorSpec parse_generator_spec(std::string_view text, std::uint64_t seed, std::size_t n,
                                   std::size_t rounds) {
  const std::size_t colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::optional<std::string_view> arg =
      colon == std::string_view::npos ? std::nullopt : std::optional(text.substr(colon + 1));
  GeneratorSpec spec;
  spec.seed = seed;
  spec.n = n;
  spec.rounds = rounds;
  auto no_arg = [&] {
    if (arg) throw InvalidArgument("--generator: '" + std::string(kind) + "' takes no parameter");
  };
  if (kind == "heavy-tail") {
    spec.kind = HeavyTail{arg ? parse_double(*arg, "--generator alpha") : 1.5};
  } else if (kind == "bad-family") {
    no_arg();
    spec.kind = BadFamily{};
  } else if (kind == "sphere") {
    no_arg();
    spec.kind = RandomSphere{};
  } else if (kind == "uniform") {
    no_arg();
    spec.kind = UniformCube{};
  } else if (kind == "quadratic-drift") {
    spec.kind = QuadraticDrift{arg ? parse_double(*arg, "--generator jitter") : 0.1};
  } else {
    throw InvalidArgument("--generator: unknown generator '" + std::string(kind) +
                          "' (expected heavy-tail, bad-family, sphere, uniform or quadratic-drift)");
  }
  return spec;
}

Json report_to_json(const RegretReport& report) {
  Json j;
  j["schema"] = 1;
  j["learner"] = report.learner;
  j["set"] = report.set;
  j["trace"] = report.trace;
  j["rounds"] = report.rounds;
  j["cumulative_loss"] = report.cumulative_loss;
  j["comparator_loss"] = report.comparator_loss;
  j["regret"] = report.regret;
  j["tracked_bound_BR"] = optional_number(report.tracked_bound);
  j["closed_form_bound"] = optional_number(report.closed_form_bound);
  j["posthoc_bound"] = report.posthoc ? Json(report.posthoc->bound_value) : Json(nullptr);
  j["posthoc_family"] =
      report.posthoc ? Json(std::string(to_string(report.posthoc->family))) : Json(nullptr);
  j["kappa"] = optional_number(report.kappa);
  j["regularized_bound"] = optional_number(report.regularized_bound);
  j["regularizer_at_comparator"] = optional_number(report.regularizer_at_comparator);
  j["dual_norm_sum"] = optional_number(report.dual_norm_sum);
  j["wall_time_ms"] = report.wall_time_ms;
  return j;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app("Online learning with adaptive quadratic regularization", "ftprl");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key=value file; flags override its entries");
    sub->add_option("--set", o.set, "feasible set, e.g. cube:3:0.5 or ellipsoid:1,2");
    sub->add_option("--trace", o.trace, "trace file");
    sub->add_option("--generator", o.generator, "synthetic generator, e.g. heavy-tail:1.5");
    sub->add_option("--seed", o.seed, "generator seed");
    sub->add_option("--rounds", o.rounds, "generator rounds T");
    sub->add_option("--dim", o.dim, "generator dimension n");
    sub->add_option("--out", o.out, "output path (default stdout)");
  };
  auto add_learner_opts = [&](CLI::App* sub) {
    sub->add_option("--epsilon-seed", o.epsilon_seed, "virtual first-round gradient magnitude");
    sub->add_option("--ogd-schedule", o.ogd_schedule, "adaptive, constant or inverse-sqrt");
    sub->add_option("--ogd-rate", o.ogd_rate, "rate for the constant and inverse-sqrt schedules");
  };

  auto* run = app.add_subcommand("run", "stream a trace through one learner");
  add_common(run);
  add_learner_opts(run);
  run->add_option("--learner", o.learner, "diag, const, scale or ogd");
  run->add_option("--per-round-csv", o.per_round_csv, "write t,loss,regret,B_R rows here");
  run->add_option("--sample-every", o.sample_every, "CSV row every k rounds");

  auto* bound = app.add_subcommand("bound", "post-hoc optimal bound for a trace");
  add_common(bound);
  bound->add_option("--family", o.family, "const, diag or full");

  auto* compare = app.add_subcommand("compare", "run several learners on one trace");
  add_common(compare);
  add_learner_opts(compare);
  compare->add_option("--learners", o.learners, "comma-separated learner names");
  compare->add_flag("--serial", o.serial, "run learners one after another");

  auto* gen = app.add_subcommand("gen", "write a synthetic trace to --out");
  add_common(gen);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitConfig;
    }
    if (o.sample_every == 0) throw InvalidArgument("--sample-every: must be at least 1");
    if (run->parsed()) return cmd_run(o, out);
    if (bound->parsed()) return cmd_bound(o, out);
    if (compare->parsed()) return cmd_compare(o, out);
    return cmd_gen(o, out);
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace ftprl
