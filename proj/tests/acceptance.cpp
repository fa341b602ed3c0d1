// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are fixed here.

#include "support.hpp"

#include "ftprl/runner.hpp"

#include <chrono>
#include <cstdio>
#include <string>

using namespace ftprl;
using namespace ftprl::testing;

namespace {

constexpr double kFtrlSlack = 1e-6;
constexpr double kClosedFormSlack = 1e-9;
constexpr double kCompetitiveSlack = 1e-6;
constexpr double kLazySlack = 1e-6;
constexpr double kRoundSlack = 1e-9;
constexpr double kPosthocGap = 1e-3;
constexpr double kConstantRel = 1e-6;
constexpr double kLossMatch = 1e-9;
constexpr double kBtlSlack = 1e-9;
constexpr double kBtrlSlack = 1e-6;
constexpr double kSuiteSeconds = 30.0;
constexpr double kHeavyTailSeconds = 120.0;

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct SuiteCase {
  FeasibleSet set;
  std::vector<Vector> rows;
};

std::vector<SuiteCase> make_suite() {
  Rng rng(mix_seed(2024, 1));
  const SetKind kinds[] = {SetKind::Box, SetKind::L2Ball, SetKind::DiagEllipsoid, SetKind::FullEllipsoid};
  std::vector<SuiteCase> suite;
  for (int k = 0; k < 500; ++k) {
    const std::size_t n = uniform_int(rng, 1, 10);
    const std::size_t rounds = uniform_int(rng, 1, 200);
    FeasibleSet f = random_set(rng, kinds[k % 4], n);
    suite.push_back({std::move(f), uniform_rows(rng, n, rounds)});
  }
  return suite;
}

GradientTrace as_trace(const SuiteCase& c) {
  return GradientTrace::from_rows(c.set.dimension(), c.rows);
}

// 1, 2 and 3 share the random suite.
void suite_criteria() {
  const auto start = std::chrono::steady_clock::now();
  const auto suite = make_suite();
  int runs = 0;
  int ftrl_bad = 0;
  double ftrl_worst = -1e300;
  int diag_runs = 0;
  int closed_bad = 0;
  double closed_worst = -1e300;
  int box_runs = 0;
  int sphere_runs = 0;
  int competitive_bad = 0;
  double kappa_worst = 0.0;

  for (const auto& c : suite) {
    const GradientTrace trace = as_trace(c);
    std::vector<LearnerKind> kinds{LearnerKind::Diag, LearnerKind::Const};
    if (c.set.as<TransformedBall>()) kinds.push_back(LearnerKind::Scale);
    for (LearnerKind kind : kinds) {
      const LearnerConfig config(kind, c.set, 1e-6);
      const RegretReport r = run_learner(config, trace);
      const BoundCheck oracle = check_run(config, c.rows);
      ++runs;
      const double rhs = oracle.reg_at_comparator + oracle.dual_sum;
      ftrl_worst = std::max(ftrl_worst, r.regret - rhs);
      if (r.regret > rhs + kFtrlSlack || std::abs(*r.regularized_bound - rhs) > 1e-9 * std::max(1.0, rhs) ||
          std::abs(r.regret - oracle.regret) > 1e-9) {
        ++ftrl_bad;
      }
      if (kind == LearnerKind::Diag) {
        ++diag_runs;
        const double closed = *r.closed_form_bound;
        closed_worst = std::max({closed_worst, r.regret - closed, *r.tracked_bound - closed});
        if (r.regret > closed || *r.tracked_bound > closed + kClosedFormSlack) ++closed_bad;
        if (c.set.is_box()) {
          ++box_runs;
          const Learner probe = [&] {
            Learner l(config);
            for (const auto& g : c.rows) l.step(g);
            return l;
          }();
          const double posthoc = posthoc_diag_box(widths(c.set), probe.accumulator().grad_sq_sum).bound_value;
          kappa_worst = std::max(kappa_worst, *r.tracked_bound / posthoc);
          if (*r.tracked_bound > std::sqrt(2.0) * posthoc + kCompetitiveSlack) ++competitive_bad;
        }
      }
    }
    // Const on the unit sphere of the same dimension.
    const FeasibleSet sphere = FeasibleSet::l2_ball(c.set.dimension(), 1.0);
    const RegretReport s = run_learner(LearnerConfig(LearnerKind::Const, sphere, 1e-6), trace);
    ++sphere_runs;
    Vector g_sq = Vector::Constant(static_cast<Eigen::Index>(sphere.dimension()), 1e-12);
    for (const auto& g : c.rows) g_sq += g.cwiseAbs2();
    const double posthoc = posthoc_const_sphere(2.0, g_sq.sum()).bound_value;
    kappa_worst = std::max(kappa_worst, *s.tracked_bound / posthoc);
    if (*s.tracked_bound > std::sqrt(2.0) * posthoc + kCompetitiveSlack) ++competitive_bad;
  }
  const double elapsed = seconds_since(start);
  report(1, ftrl_bad == 0 && elapsed < kSuiteSeconds,
         fmt("regret <= r(x*) + sum dual norms on %.0f runs over 500 traces; violations %.0f; ", runs, ftrl_bad) +
             fmt("max regret - bound %.3g; %.1fs (limit 30s)", ftrl_worst, elapsed));
  report(2, closed_bad == 0,
         fmt("diag regret and tracked B_R <= 2 sum D_i sqrt(G_i) on %.0f runs; violations %.0f; max excess %.3g",
             diag_runs, closed_bad, closed_worst));
  report(3, competitive_bad == 0,
         fmt("tracked B_R <= sqrt2 * post-hoc on %.0f box and %.0f unit-sphere runs; violations %.0f; ", box_runs,
             sphere_runs, competitive_bad) +
             fmt("max ratio %.6f (sqrt2 = 1.414214)", kappa_worst));
}

void lazy_projection_criterion() {
  Rng rng(mix_seed(2024, 4));
  const SetKind kinds[] = {SetKind::Box, SetKind::L2Ball, SetKind::DiagEllipsoid, SetKind::FullEllipsoid};
  int instances = 0;
  int bad = 0;
  double worst = 0.0;
  for (SetKind kind : kinds) {
    for (int k = 0; k < 200; ++k) {
      const std::size_t n = uniform_int(rng, 1, 3);
      const auto m = static_cast<Eigen::Index>(n);
      const FeasibleSet f = random_set(rng, kind, n);
      const Vector q = uniform_vector(rng, m, 0.1, 10.0);
      const Vector h = uniform_vector(rng, m, -10.0, 10.0);
      auto objective = [&](const Vector& x) { return h.dot(x) + 0.5 * x.dot(q.cwiseProduct(x)); };
      const Vector lazy = project(f, DiagPSD(q.cwiseSqrt()), Vector(-h.cwiseQuotient(q)));
      const Vector direct = fista_quadratic(f, Matrix(q.asDiagonal()), h);
      const double gap = std::abs(objective(lazy) - objective(direct));
      worst = std::max(worst, gap);
      ++instances;
      if (gap > kLazySlack || !f.contains(lazy)) ++bad;
    }
  }
  report(4, bad == 0,
         fmt("lazy projection vs direct constrained minimizer on %.0f instances (4 set variants, n<=3); "
             "mismatches %.0f; max objective gap %.3g",
             instances, bad, worst));
}

void contraction_criterion() {
  Rng rng(mix_seed(2024, 5));
  long checks = 0;
  long bad = 0;
  double worst = -1e300;
  while (checks < 50000) {
    const std::size_t n = uniform_int(rng, 1, 5);
    const auto m = static_cast<Eigen::Index>(n);
    const FeasibleSet sets[] = {random_set(rng, SetKind::Box, n), random_set(rng, SetKind::L2Ball, n),
                                random_set(rng, SetKind::DiagEllipsoid, n),
                                random_set(rng, SetKind::FullEllipsoid, n),
                                FeasibleSet::lp_ball(n, NormExponent::infinity(), rng.uniform(0.5, 2.0))};
    for (const auto& f : sets) {
      for (int k = 0; k < 10; ++k) {
        const Vector w = uniform_vector(rng, m, 0.05, 5.0);
        const Vector u1 = uniform_vector(rng, m, -4.0, 4.0);
        const Vector u2 = uniform_vector(rng, m, -4.0, 4.0);
        const Vector x1 = project(f, DiagPSD(w), u1);
        const Vector x2 = project(f, DiagPSD(w), u2);
        const double excess = w.cwiseProduct(x2 - x1).norm() - w.cwiseProduct(u1 - u2).norm();
        worst = std::max(worst, excess);
        if (excess > kRoundSlack) ++bad;
        ++checks;
      }
    }
  }
  long rounds = 0;
  const LearnerKind kinds[] = {LearnerKind::Diag, LearnerKind::Const, LearnerKind::Scale};
  const SetKind set_kinds[] = {SetKind::Box, SetKind::L2Ball, SetKind::DiagEllipsoid, SetKind::FullEllipsoid};
  int run = 0;
  while (rounds < 50000) {
    const LearnerKind kind = kinds[run % 3];
    const SetKind sk = kind == LearnerKind::Scale ? set_kinds[2 + run % 2] : set_kinds[(run / 3) % 4];
    ++run;
    const std::size_t n = uniform_int(rng, 1, 8);
    const FeasibleSet f = random_set(rng, sk, n);
    Learner learner(LearnerConfig(kind, f, 1e-6));
    const std::size_t len = uniform_int(rng, 1, 300);
    for (std::size_t t = 0; t < len; ++t) {
      const RoundRecord rec = learner.step(uniform_vector(rng, static_cast<Eigen::Index>(n), -1.0, 1.0));
      const double gap =
          rec.analysis_gradient.dot(rec.analysis_played - rec.analysis_next) - rec.dual_norm_sq;
      worst = std::max(worst, gap);
      if (gap > kRoundSlack || !f.contains(rec.next)) ++bad;
      ++rounds;
    }
  }
  report(5, bad == 0,
         fmt("%.0f projection contraction checks + %.0f per-round g(x_t - x_t+1) <= ||A_t^-1 g||^2 checks; ",
             static_cast<double>(checks), static_cast<double>(rounds)) +
             fmt("violations %.0f; max excess %.3g", static_cast<double>(bad), worst));
}

void posthoc_criterion() {
  const NormExponent p4(4.0);
  Vector g(2);
  g << 1.0, 16.0;
  const PosthocResult numeric = posthoc_lp_diag(p4, g);
  const double q = 2.0;  // p / (p - 2)
  // Best constant: 2 alpha n^{1/q} + sum G / alpha.
  const double best_const = 2.0 * std::sqrt(2.0 * std::pow(2.0, 1.0 / q) * g.sum());
  double grid = 1e300;
  for (int a = 0; a < 1500; ++a) {
    for (int b = 0; b < 1500; ++b) {
      const double l1 = 0.01 * std::pow(1e4, a / 1499.0);
      const double l2 = 0.01 * std::pow(1e4, b / 1499.0);
      grid = std::min(grid, 2.0 * std::sqrt(l1 * l1 + l2 * l2) + g[0] / l1 + g[1] / l2);
    }
  }
  const bool beats = numeric.bound_value <= best_const - kPosthocGap;
  const bool grid_agrees = grid <= best_const - kPosthocGap && numeric.bound_value <= grid + 1e-9 &&
                           (grid - numeric.bound_value) <= 1e-3 * grid;
  double spread = 0.0;
  Rng rng(mix_seed(2024, 6));
  for (double p : {1.0, 1.5, 2.0}) {
    for (int k = 0; k < 20; ++k) {
      const Vector gk = k == 0 ? g : uniform_vector(rng, static_cast<Eigen::Index>(uniform_int(rng, 2, 6)), 0.01, 50.0);
      const Vector l = std::get<DiagPSD>(posthoc_lp_diag(NormExponent(p), gk).optimizer).diag();
      spread = std::max(spread, l.maxCoeff() / l.minCoeff() - 1.0);
    }
  }
  report(6, beats && grid_agrees && spread <= kConstantRel,
         fmt("p=4 G=(1,16): diagonal post-hoc %.6f vs best constant %.6f (grid %.6f); ", numeric.bound_value,
             best_const, grid) +
             fmt("p in {1,1.5,2}: max relative spread of optimizer %.3g", spread));
}

void transform_criterion() {
  Vector a_diag(2);
  a_diag << 1.0, 2.0;
  const SymPD a = SymPD::diagonal(a_diag);
  const FeasibleSet f = FeasibleSet::transformed_ball(a, NormExponent(2.0));
  const FeasibleSet unit = FeasibleSet::l2_ball(2, 1.0);
  Rng rng(mix_seed(2024, 7));
  double loss_worst = 0.0;
  int bound_bad = 0;
  for (int k = 0; k < 100; ++k) {
    const auto rows = uniform_rows(rng, 2, uniform_int(rng, 1, 200));
    Learner scale(LearnerConfig(LearnerKind::Scale, f, 1e-6));
    Learner cst(LearnerConfig(LearnerKind::Const, unit, 1e-6));
    double g_total = 0.0;
    double scaled_total = 0.0;
    for (const auto& g : rows) {
      const Vector g_hat = a.apply_inverse(g);
      loss_worst = std::max(loss_worst, std::abs(scale.step(g).loss - cst.step(g_hat).loss));
      g_total += g.squaredNorm();
      // a_i = 1 / A_ii in the {||diag(1/a) x|| <= 1} parametrization.
      scaled_total += (g.cwiseQuotient(a_diag)).squaredNorm();
    }
    const double scale_bound = 4.0 * std::sqrt(scaled_total);
    const double const_bound = 4.0 * std::sqrt(g_total);
    const RegretReport rs = run_learner(LearnerConfig(LearnerKind::Scale, f, 1e-6), GradientTrace::from_rows(2, rows));
    const RegretReport rc = run_learner(LearnerConfig(LearnerKind::Const, f, 1e-6), GradientTrace::from_rows(2, rows));
    if (scale_bound > const_bound || *rs.closed_form_bound > *rc.closed_form_bound) ++bound_bad;
  }
  report(7, loss_worst <= kLossMatch && bound_bad == 0,
         fmt("A=diag(1,2), 100 traces: max |scale loss - transformed const loss| %.3g; "
             "scale closed form > const closed form on %.0f traces",
             loss_worst, bound_bad));
}

void heavy_tail_criterion() {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = 1000;
  const std::size_t rounds = 10000;
  const double alpha = 1.5;
  double expected = 0.0;
  for (std::size_t i = 1; i <= n; ++i) expected += std::sqrt(rounds * std::pow(static_cast<double>(i), -alpha));
  bool ok = true;
  double ratio_lo = 1e300;
  double ratio_hi = 0.0;
  double margin = 1e300;
  const FeasibleSet cube = FeasibleSet::cube(n, 0.5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorSpec spec;
    spec.kind = HeavyTail{alpha};
    spec.seed = seed;
    spec.n = n;
    spec.rounds = rounds;
    const GradientTrace trace = gen_heavy_tail(spec);
    Vector g_sq = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < rounds; ++t) g_sq += trace.row(t).cwiseAbs2();
    const double ratio = g_sq.cwiseSqrt().sum() / expected;
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
    const double diag = run_learner(LearnerConfig(LearnerKind::Diag, cube), trace).regret;
    const double cst = run_learner(LearnerConfig(LearnerKind::Const, cube), trace).regret;
    margin = std::min(margin, cst - diag);
    ok = ok && ratio >= 0.5 && ratio <= 2.0 && diag < cst;
  }
  const double elapsed = seconds_since(start);
  report(8, ok && elapsed < kHeavyTailSeconds,
         fmt("heavy tail alpha=1.5 n=1000 T=1e4, 5 seeds: sum sqrt(G_i) / expected in [%.3f, %.3f]; ", ratio_lo,
             ratio_hi) +
             fmt("min (const - diag) regret %.3f; %.1fs (limit 120s)", margin, elapsed));
}

void bad_family_criterion() {
  bool ok = true;
  std::string detail = "ogd/diag regret ratio at T=1e3,1e4,1e5:";
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    double prev = 0.0;
    detail += " seed " + std::to_string(seed) + " (";
    for (std::size_t rounds : {1000u, 10000u, 100000u}) {
      GeneratorSpec spec;
      spec.kind = BadFamily{};
      spec.seed = seed;
      spec.rounds = rounds;
      auto [trace, set] = gen_bad_family(spec);
      const double ogd = run_learner(LearnerConfig(LearnerKind::OGD, set), trace).regret;
      const double diag = run_learner(LearnerConfig(LearnerKind::Diag, set), trace).regret;
      const double ratio = ogd / diag;
      if (!(diag > 0.0) || !(ratio > prev)) ok = false;
      detail += fmt(rounds == 1000 ? "%.3f" : " %.3f", ratio);
      prev = ratio;
    }
    detail += ")";
  }
  report(9, ok, detail + " [inspired family]");
}

void lemma_criterion() {
  Rng rng(mix_seed(2024, 10));
  long sum_bad = 0;
  for (int k = 0; k < 100000; ++k) {
    Vector x = uniform_vector(rng, static_cast<Eigen::Index>(uniform_int(rng, 1, 100)), 0.0, 1.0);
    if (k % 3 == 1) x = x.array().pow(6.0);
    if (k % 3 == 2) x = (x.array() < 0.5).select(0.0, x);
    const auto [lhs, rhs] = lemma_sum_check(x);
    if (lhs > rhs * (1.0 + 1e-12)) ++sum_bad;
  }
  long btl_bad = 0;
  long btrl_bad = 0;
  double btl_worst = -1e300;
  double btrl_worst = -1e300;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = uniform_int(rng, 1, 5);
    const SetKind sk = k % 2 ? SetKind::Box : SetKind::L2Ball;
    const FeasibleSet f = random_set(rng, sk, n);
    const auto rows = uniform_rows(rng, n, uniform_int(rng, 1, 40));
    Vector g_sum = Vector::Zero(static_cast<Eigen::Index>(n));
    double leader = 0.0;
    for (const auto& g : rows) {
      g_sum += g;
      leader += g.dot(linear_minimizer(f, g_sum));
    }
    const double btl = leader - g_sum.dot(linear_minimizer(f, g_sum));
    btl_worst = std::max(btl_worst, btl);
    if (btl > kBtlSlack) ++btl_bad;
    const BoundCheck c = check_run(LearnerConfig(k % 4 < 2 ? LearnerKind::Diag : LearnerKind::Const, f), rows);
    btrl_worst = std::max(btrl_worst, c.btrl_regret - c.reg_at_comparator);
    if (c.btrl_regret > c.reg_at_comparator + kBtrlSlack) ++btrl_bad;
  }
  report(10, sum_bad == 0 && btl_bad == 0 && btrl_bad == 0,
         fmt("sum inequality on 1e5 vectors: violations %.0f; ", static_cast<double>(sum_bad)) +
             fmt("be-the-leader on 1e4 sequences: violations %.0f (max regret %.3g); ", static_cast<double>(btl_bad),
                 btl_worst) +
             fmt("be-the-regularized-leader: violations %.0f (max excess %.3g)", static_cast<double>(btrl_bad),
                 btrl_worst));
}

}  // namespace

int main() {
  suite_criteria();
  lazy_projection_criterion();
  contraction_criterion();
  posthoc_criterion();
  transform_criterion();
  heavy_tail_criterion();
  bad_family_criterion();
  lemma_criterion();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
