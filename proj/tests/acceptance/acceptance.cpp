// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gfield/analysis.hpp"
#include "gfield/decomp.hpp"
#include "gfield/measures.hpp"
#include "gfield/sampler.hpp"

using namespace gfield;

namespace {

constexpr double kOffDiagonalRel = 1e-8;
constexpr double kMinPivot = -1e-10;
constexpr double kDualTol = 1e-12;
constexpr double kSigmas = 4.0;
constexpr double kOracleFloor = 0.02;
constexpr double kExponentTol = 0.1;
constexpr double kSandwichTol = 1e-12;
constexpr double kTraceTol = 1e-3;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::vector<double> column(const RowMatrix& m, long c) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (long r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m(r, c);
  return v;
}

const std::vector<std::vector<double>> kPoints = {{0.0}, {0.25}, {0.5}};

// Shared by criteria 3 and 4: decomposition targets and their Monte-Carlo estimates.
struct CovarianceRun {
  Eigen::MatrixXd target;
  Eigen::MatrixXd estimate;
  Eigen::MatrixXd std_error;
};

CovarianceRun decomposition_covariances() {
  const Decomposition d = biorthogonalize(tensor_coefficients(parse_kernel("exp-alpha:0.5", 1), 1, 5, 0.5));
  std::vector<CoefficientFunctional> fs;
  for (const auto& p : kPoints) fs.push_back(CoefficientFunctional::dirac(p));
  const Eigen::MatrixXd table = pairing_table(d, fs);
  const RowMatrix z = sample_pairings(d.lambdas, table, 20240601, 200000);
  CovarianceRun r;
  const long n = static_cast<long>(kPoints.size());
  r.target = r.estimate = r.std_error = Eigen::MatrixXd::Zero(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      for (std::size_t t = 0; t < d.terms(); ++t) r.target(i, j) += d.lambdas[t] * table(static_cast<long>(t), i) * table(static_cast<long>(t), j);
      const Estimate e = cross_moment(column(z, i), column(z, j));
      r.estimate(i, j) = e.value;
      r.std_error(i, j) = e.std_error;
    }
  return r;
}

Outcome criterion1() {
  const auto tc = tensor_coefficients(parse_kernel("exp-alpha:0.5", 1), 1, 6, 0.5);
  const Decomposition d = biorthogonalize(tc);
  const BiorthogonalityReport rep = verify_biorthogonality(d, tc);
  const double bound = kOffDiagonalRel * d.lambdas.front();
  const bool pass = tc.size() == 65 && rep.max_off_diagonal <= bound && rep.min_pivot_before_clamp >= kMinPivot;
  return {pass, "M=" + std::to_string(tc.size()) + " max_off_diagonal=" + fmt(rep.max_off_diagonal) + " (<= " + fmt(bound) +
                    ") min_pivot=" + fmt(rep.min_pivot_before_clamp) + " (>= " + fmt(kMinPivot) + ")"};
}

Outcome criterion2() {
  const DyadicBasis b(1, 6, 0.5);
  double worst = 0.0;
  for (std::size_t p = 0; p < b.size(); ++p) {
    const CoefficientFunctional mu = b.functional(p);
    for (std::size_t q = 0; q < b.size(); ++q) {
      const double v = apply_functional(mu, [&](std::span<const double> x) { return b.eval(q, x); });
      worst = std::max(worst, std::abs(v - (p == q ? 1.0 : 0.0)));
    }
  }
  return {b.size() == 65 && worst <= kDualTol,
          std::to_string(b.size()) + "x" + std::to_string(b.size()) + " pairs, max deviation=" + fmt(worst) + " (<= " +
              fmt(kDualTol) + ")"};
}

Outcome criterion3() {
  const CovarianceRun r = decomposition_covariances();
  int failures = 0;
  double worst = 0.0;
  for (long i = 0; i < r.target.rows(); ++i)
    for (long j = 0; j < r.target.cols(); ++j) {
      const double z = std::abs(r.estimate(i, j) - r.target(i, j)) / r.std_error(i, j);
      worst = std::max(worst, z);
      if (z > kSigmas) ++failures;
    }
  return {failures == 0, "9 pairs, N=200000, worst deviation=" + fmt(worst) + " stderr (<= " + fmt(kSigmas) + "), failing pairs=" +
                             std::to_string(failures)};
}

Outcome criterion4() {
  const CovarianceRun dec = decomposition_covariances();
  const KernelSpec spec = parse_kernel("exp-alpha:0.5", 1);
  const PointKernel k = point_kernel(spec);
  const NystromDecomposition nd = nystrom_mercer(k, 1, 512);
  const std::size_t rank = nystrom_rank(nd);
  const Eigen::MatrixXd table = nystrom_table(nd, k, kPoints, rank);
  const std::vector<double> lambdas(nd.eigenvalues.begin(), nd.eigenvalues.begin() + static_cast<long>(rank));
  const RowMatrix z = sample_pairings(lambdas, table, 20240602, 200000);
  int failures = 0;
  double worst = 0.0;
  for (long i = 0; i < 3; ++i)
    for (long j = 0; j < 3; ++j) {
      const Estimate e = cross_moment(column(z, i), column(z, j));
      const double tol = std::max(kOracleFloor, kSigmas * std::hypot(e.std_error, dec.std_error(i, j)));
      const double dev = std::abs(e.value - dec.target(i, j));
      worst = std::max(worst, dev / tol);
      if (dev > tol) ++failures;
    }
  return {failures == 0, "Nystrom N=512 rank=" + std::to_string(rank) + ", worst deviation/tolerance=" + fmt(worst) +
                             ", failing pairs=" + std::to_string(failures)};
}

Outcome criterion5() {
  Outcome o;
  for (double a : {0.3, 0.5, 0.7}) {
    const KernelSpec spec = parse_kernel("exp-alpha:" + format_double(a), 1);
    // The sample law does not depend on the lambda norm; the Euclidean one is cheap at M = 1025.
    const Decomposition d = biorthogonalize(tensor_coefficients(spec, 1, 10, a), 0.0, NormMode::coefficient_euclidean);
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) sum += estimate_holder_exponent(SampledField(draw_sample(d, 77, s), d).on_grid(10));
    const double mean = sum / 20.0;
    const bool ok = std::abs(mean - a) <= kExponentTol;
    o.pass = o.pass && ok;
    o.detail += (o.detail.empty() ? "" : ", ") + ("alpha=" + fmt(a) + " mean=" + fmt(mean) + (ok ? "" : " (out of band)"));
  }
  o.detail += "; band alpha +- " + fmt(kExponentTol);
  return o;
}

Outcome criterion6() {
  const KernelSpec spec = parse_kernel("exp-alpha:0.5", 1);
  Outcome o;
  for (double g : {0.4, 0.6}) {
    const auto r = level_ratios(besov_partial_sums(spec, 1, 7, g));
    std::string list;
    for (int k = 3; k <= 7; ++k) {
      const double v = r[static_cast<std::size_t>(k)];
      o.pass = o.pass && (g < 0.5 ? v < 1.0 : v >= 1.0);
      list += (k > 3 ? "," : "") + fmt(v);
    }
    o.detail += (o.detail.empty() ? "" : "; ") + ("gamma=" + fmt(g) + (g < 0.5 ? " (need <1)" : " (need >=1)") +
                                                    " ratios K=3..7: " + list);
  }
  return o;
}

Outcome criterion7() {
  const BaseMeasure leb{Lebesgue{}};
  const Decomposition d = whitenoise_decomposition(leb, 1, 4);
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  const PointFunction x = [](std::span<const double> p) { return p[0]; };
  const RowMatrix z = sample_pairings(d.lambdas, measure_pairing_table(d, leb, {one, x}), 20240607, 100000);
  const std::vector<double> a = column(z, 0), b = column(z, 1);
  const Estimate est[3] = {cross_moment(a, a), cross_moment(a, b), cross_moment(b, b)};
  const double target[3] = {1.0, 0.5, 1.0 / 3.0};
  const char* name[3] = {"Var<1>", "Cov<1,x>", "Var<x>"};
  Outcome o;
  for (int k = 0; k < 3; ++k) {
    const double z_score = std::abs(est[k].value - target[k]) / est[k].std_error;
    o.pass = o.pass && z_score <= kSigmas;
    o.detail += std::string(k ? ", " : "") + name[k] + "=" + fmt(est[k].value) + " (target " + fmt(target[k]) + ", " +
                fmt(z_score) + " stderr)";
  }
  return o;
}

Outcome criterion8() {
  const auto triples = random_triples(1, 10000, 8);
  Outcome o;
  for (double a : {0.25, 0.5, 0.75}) {
    const SandwichReport r = sandwich_check(a, triples, kSandwichTol);
    o.pass = o.pass && r.lower_violations == 0 && r.upper_violations == 0;
    o.detail += (o.detail.empty() ? "" : "; ") + ("alpha=" + fmt(a) + " lower violations=" + std::to_string(r.lower_violations) +
                                                    " (max " + fmt(r.max_lower_violation) + "), upper violations=" +
                                                    std::to_string(r.upper_violations));
  }
  return o;
}

Outcome criterion9() {
  const NystromDecomposition nd = nystrom_mercer(parse_kernel("exp-alpha:0.5", 1), 512);
  double sum = 0.0;
  for (double l : nd.eigenvalues) sum += l;
  return {std::abs(sum - 1.0) <= kTraceTol, "eigenvalue sum=" + format_double(sum) + " (|sum-1| <= " + fmt(kTraceTol) + ")"};
}

Outcome criterion10() {
  const Decomposition d = biorthogonalize(tensor_coefficients(parse_kernel("exp-alpha:0.5", 1), 1, 5, 0.5));
  const DyadicBasis b = basis_of(d);
  const std::vector<CoefficientFunctional> fs = {
      CoefficientFunctional::dirac({0.5}),
      CoefficientFunctional::dirac({0.3}),
      CoefficientFunctional::dirac({1.0}) + CoefficientFunctional::dirac({0.0}, -1.0),
      b.functional(*b.position(DyadicIndex({Dyadic::make(1, 2)}))),
      CoefficientFunctional({{{0.1}, 0.5}, {{0.6}, 2.0}, {{0.9}, -1.0}}),
  };
  const RowMatrix z = sample_pairings(d.lambdas, pairing_table(d, fs), 20240610, 100000);
  Outcome o;
  double worst = 0.0;
  for (long f = 0; f < 5; ++f) {
    const MomentSummary m = moments(column(z, f));
    worst = std::max({worst, std::abs(m.skewness) / m.skewness_se, std::abs(m.excess_kurtosis) / m.kurtosis_se});
  }
  o.pass = worst <= kSigmas;
  o.detail = "5 functionals, N=100000, worst |skewness| or |excess kurtosis| = " + fmt(worst) + " sigma (<= " + fmt(kSigmas) + ")";
  return o;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome criterion11(const std::string& gfield, const std::filesystem::path& work) {
  if (gfield.empty()) return {false, "no --gfield binary given"};
  std::filesystem::create_directories(work);
  const auto cfg = work / "reproducibility.cfg";
  std::ofstream(cfg) << "kernel = exp-alpha:0.5\nk_max = 5\nseed = 42\nn_samples = 200000\n";
  std::string files[2][2];
  for (int run = 0; run < 2; ++run) {
    const auto csv = work / ("validate_cov_" + std::to_string(run) + ".csv");
    const auto json = work / ("validate_cov_" + std::to_string(run) + ".json");
    const auto log = work / ("validate_cov_" + std::to_string(run) + ".log");
    std::filesystem::remove(csv);
    std::filesystem::remove(json);
    const std::string cmd = quote(gfield) + " validate-cov --config " + quote(cfg.string()) + " --out " + quote(csv.string()) +
                            " --report-json " + quote(json.string()) + " > " + quote(log.string()) + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1 || !std::filesystem::exists(csv)) return {false, "validate-cov run " + std::to_string(run) + " produced no report"};
    files[run][0] = slurp(csv);
    files[run][1] = slurp(json);
  }
  const bool same = files[0][0] == files[1][0] && files[0][1] == files[1][1] && !files[0][0].empty();
  return {same, std::string("two validate-cov runs: CSV ") + (files[0][0] == files[1][0] ? "identical" : "differ") + ", JSON " +
                    (files[0][1] == files[1][1] ? "identical" : "differ") + " (" + std::to_string(files[0][0].size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int only = 0;
  std::string gfield;
  std::string workdir = "acceptance_work";
  app.add_option("--criterion", only, "Run one criterion (1-11); 0 runs all")->check(CLI::Range(0, 11));
  app.add_option("--gfield", gfield, "Path to the gfield executable (criterion 11)");
  app.add_option("--workdir", workdir, "Scratch directory for criterion 11");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> checks = {
      criterion1, criterion2, criterion3, criterion4, criterion5, criterion6,
      criterion7, criterion8, criterion9, criterion10,
      [&] { return criterion11(gfield, workdir); },
  };
  bool all = true;
  for (int n = 1; n <= 11; ++n) {
    if (only != 0 && n != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = checks[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << " [" << fmt(secs) << " s]"
              << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
