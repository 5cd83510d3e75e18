#include "gfield/cli.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "gfield/analysis.hpp"
#include "gfield/decomp.hpp"
#include "gfield/measures.hpp"
#include "gfield/report.hpp"
#include "gfield/sampler.hpp"
#include "json.hpp"

namespace gfield {

namespace {

struct ValidationFailed {};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || !std::isfinite(x))
      throw std::invalid_argument("malformed number '" + item + "' in " + what);
    v.push_back(x);
  }
  if (v.empty()) throw std::invalid_argument(what + " must not be empty");
  return v;
}

std::vector<std::vector<double>> make_points(const RunConfig& c) {
  std::vector<std::vector<double>> pts;
  for (double p : parse_list(c.points, "points")) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("points must lie in [0,1]");
    pts.emplace_back(static_cast<std::size_t>(c.dim), p);
  }
  return pts;
}

std::string point_label(const std::vector<double>& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ":" : "") + format_double(p[i]);
  return s;
}

void apply_threads() {
  if (const char* env = std::getenv("GFIELD_NUM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) throw std::invalid_argument("GFIELD_NUM_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
  }
}

void check_common(const RunConfig& c) {
  if (c.dim < 1 || c.dim > 4) throw std::invalid_argument("dim must lie in 1..4");
  if (c.k_max < 0 || c.k_max > 20) throw std::invalid_argument("k_max must lie in 0..20");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0,1]");
  if (!(c.energy_cutoff >= 0.0 && c.energy_cutoff < 1.0)) throw std::invalid_argument("energy_cutoff must lie in [0,1)");
  if (!(c.pivot_tol >= 0.0)) throw std::invalid_argument("pivot_tol must be >= 0");
  if (c.norm_mode != "auto") parse_norm_mode(c.norm_mode);
  if (c.grid_resolution < -1 || c.grid_resolution > 24) throw std::invalid_argument("grid resolution must lie in 0..24");
}

NormMode resolve_norm(const RunConfig& c, const KernelSpec& spec) {
  if (c.norm_mode != "auto") return parse_norm_mode(c.norm_mode);
  return spec.pointwise() ? NormMode::grid_hoelder : NormMode::total_variation;
}

void warn_alpha(double alpha, std::ostream& err) {
  if (alpha == 1.0) err << "warning: alpha = 1 uses the plain Lipschitz normalisation; the predual argument needs alpha < 1\n";
}

struct Built {
  TensorCoefficients tc;
  Decomposition d;
};

Built build(const RunConfig& c, const std::string& kernel, double alpha, std::ostream& err) {
  const KernelSpec spec = parse_kernel(kernel, c.dim);
  validate(spec);
  if (spec.pointwise()) warn_alpha(alpha, err);
  Built b;
  b.tc = tensor_coefficients(spec, c.dim, c.k_max, alpha, TensorOptions{c.cap, Execution::parallel});
  b.d = biorthogonalize(b.tc, c.pivot_tol, resolve_norm(c, spec));
  if (c.energy_cutoff > 0.0) b.d = truncate_energy(b.d, c.energy_cutoff);
  return b;
}

void print_report(const Report& r, std::ostream& out) {
  for (const auto& m : r.metrics())
    out << (m.pass ? "PASS " : "FAIL ") << m.name << " [" << m.parameters << "] value=" << format_double(m.value)
        << " tolerance=" << format_double(m.tolerance) << '\n';
}

void finish(const Report& r, const RunConfig& c, std::ostream& out) {
  print_report(r, out);
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot write '" + c.out + "'");
    r.write_csv(f);
  }
  if (!c.report_json.empty()) {
    std::ofstream f(c.report_json);
    if (!f) throw std::runtime_error("cannot write '" + c.report_json + "'");
    r.write_json(f);
  }
  if (!r.all_pass()) throw ValidationFailed{};
}

void add_biorthogonality(Report& r, const Decomposition& d, const std::string& params) {
  const double l1 = d.lambdas.empty() ? 0.0 : d.lambdas.front();
  r.add({"biorthogonality_max_off_diagonal", params, d.report.max_off_diagonal, 1e-8 * l1,
         d.report.max_off_diagonal <= 1e-8 * l1});
  r.add({"min_pivot_before_clamp", params, d.report.min_pivot_before_clamp, -1e-10,
         d.report.min_pivot_before_clamp >= -1e-10});
}

// ---------------------------------------------------------------- commands

void cmd_decompose(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.out.empty()) throw std::invalid_argument("--out is required");
  const Built b = build(c, c.kernel, c.alpha, err);
  save_decomposition(b.d, c.out);
  out << "basis_size " << b.d.basis_size() << "\nterms " << b.d.terms() << "\nlambda_1 "
      << format_double(b.d.lambdas.empty() ? 0.0 : b.d.lambdas.front()) << "\nsum_sqrt_lambda "
      << format_double(b.d.sqrt_lambda_sum()) << '\n';
  Report r;
  add_biorthogonality(r, b.d, "kernel=" + c.kernel + ";k_max=" + std::to_string(c.k_max));
  print_report(r, out);
  if (!r.all_pass()) throw ValidationFailed{};
}

void cmd_sample(const RunConfig& c, std::ostream& out) {
  if (c.decomp.empty()) throw std::invalid_argument("--decomp is required");
  if (c.out.empty()) throw std::invalid_argument("--out is required");
  Decomposition d = load_decomposition(c.decomp);
  if (c.energy_cutoff > 0.0) d = truncate_energy(d, c.energy_cutoff);
  const int res = c.grid_resolution >= 0 ? c.grid_resolution : 8;
  std::ofstream f(c.out);
  if (!f) throw std::runtime_error("cannot write '" + c.out + "'");
  if (d.space == Space::measure) {
    const KernelSpec spec = parse_kernel(d.kernel, d.meta.dim);
    const BaseMeasure base = std::get<WhiteNoise>(spec.family).base;
    std::vector<MeasureSample> ms;
    for (std::size_t s = 0; s < c.n_samples; ++s) ms.push_back(sample_measure_field(d, base, c.seed, s));
    write_measure_csv(f, ms, res);
  } else {
    std::vector<GridValues> grids;
    for (std::size_t s = 0; s < c.n_samples; ++s)
      grids.push_back(SampledField(draw_sample(d, c.seed, s), d).on_grid(res));
    write_grid_csv(f, grids);
  }
  if (!f) throw std::runtime_error("write failed for '" + c.out + "'");
  std::ofstream meta(c.out + ".meta");
  if (!meta) throw std::runtime_error("cannot write '" + c.out + ".meta'");
  meta << "{\"seed\": " << c.seed << ", \"streams\": [0, " << c.n_samples << "], \"rng\": "
       << nlohmann::json(NormalStream::kAlgorithm).dump() << ", \"normal_method\": "
       << nlohmann::json(NormalStream::kNormalMethod).dump() << ", \"kernel\": " << nlohmann::json(d.kernel).dump()
       << ", \"dim\": " << d.meta.dim << ", \"k_max\": " << d.meta.k_max << ", \"terms\": " << d.terms()
       << ", \"grid_resolution\": " << res << "}\n";
  out << "wrote " << c.n_samples << " samples to " << c.out << '\n';
}

void cmd_validate_cov(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Built b = build(c, c.kernel, c.alpha, err);
  if (b.d.space != Space::hoelder) throw std::invalid_argument("validate-cov needs a pointwise kernel");
  const auto pts = make_points(c);
  std::vector<CoefficientFunctional> fs;
  for (const auto& p : pts) fs.push_back(CoefficientFunctional::dirac(p));
  const Eigen::MatrixXd table = pairing_table(b.d, fs);
  const RowMatrix z = sample_pairings(b.d.lambdas, table, c.seed, c.n_samples);
  Report r;
  const std::string base = "kernel=" + c.kernel + ";k_max=" + std::to_string(c.k_max) + ";n=" + std::to_string(c.n_samples);
  add_biorthogonality(r, b.d, base);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const Eigen::VectorXd a = z.col(static_cast<long>(i)), bb = z.col(static_cast<long>(j));
      const Estimate e = cross_moment(std::span<const double>(a.data(), a.size()), std::span<const double>(bb.data(), bb.size()));
      double target = 0.0;
      for (std::size_t t = 0; t < b.d.terms(); ++t)
        target += b.d.lambdas[t] * table(static_cast<long>(t), static_cast<long>(i)) * table(static_cast<long>(t), static_cast<long>(j));
      const double dev = std::abs(e.value - target);
      r.add({"covariance_deviation", base + ";x=" + point_label(pts[i]) + ";y=" + point_label(pts[j]) +
                                         ";estimate=" + format_double(e.value) + ";target=" + format_double(target),
             dev, 4.0 * e.std_error, dev <= 4.0 * e.std_error});
    }
  finish(r, c, out);
}

void cmd_holder(const RunConfig& c, std::ostream& out, std::ostream& err) {
  Report r;
  const int res = c.grid_resolution >= 0 ? c.grid_resolution : c.k_max;
  for (double a : parse_list(c.alphas, "alphas")) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("alphas must lie in (0,1)");
    const std::string kernel = "exp-alpha:" + format_double(a);
    const Built b = build(c, kernel, a, err);
    double sum = 0.0;
    std::vector<double> est;
    for (std::size_t s = 0; s < c.n_samples; ++s) {
      const GridValues g = SampledField(draw_sample(b.d, c.seed, s), b.d).on_grid(res);
      est.push_back(estimate_holder_exponent(g));
      sum += est.back();
    }
    const double mean = sum / static_cast<double>(c.n_samples);
    r.add({"holder_exponent_mean",
           "alpha=" + format_double(a) + ";k_max=" + std::to_string(c.k_max) + ";resolution=" + std::to_string(res) +
               ";samples=" + std::to_string(c.n_samples),
           mean, 0.1, std::abs(mean - a) <= 0.1});
  }
  finish(r, c, out);
}

void cmd_besov(const RunConfig& c, std::ostream& out) {
  const KernelSpec spec = parse_kernel(c.kernel, c.dim);
  validate(spec);
  const auto* ea = std::get_if<ExpAlpha>(&spec.family);
  Report r;
  for (double g : parse_list(c.gammas, "gammas")) {
    if (!(g > 0.0 && g < 1.0)) throw std::invalid_argument("gammas must lie in (0,1)");
    const auto sums = besov_partial_sums(spec, c.dim, c.k_max, g);
    const auto ratios = level_ratios(sums);
    const std::string p = "kernel=" + c.kernel + ";gamma=" + format_double(g);
    for (int k = 0; k <= c.k_max; ++k)
      r.add({"besov_level_sum", p + ";K=" + std::to_string(k), sums[static_cast<std::size_t>(k)], 0.0, true});
    for (int k = 3; k <= c.k_max; ++k) {
      const double v = ratios[static_cast<std::size_t>(k)];
      // Decay is expected below the kernel exponent and fails at or above it.
      const bool pass = ea == nullptr ? true : (g < ea->alpha ? v < 1.0 : v >= 1.0);
      r.add({"besov_level_ratio", p + ";K=" + std::to_string(k), v, 1.0, pass});
    }
  }
  finish(r, c, out);
}

void cmd_whitenoise(const RunConfig& c, std::ostream& out) {
  const std::string kernel = c.kernel.rfind("white-noise", 0) == 0 ? c.kernel : "white-noise:lebesgue";
  const KernelSpec spec = parse_kernel(kernel, c.dim);
  validate(spec);
  const BaseMeasure base = std::get<WhiteNoise>(spec.family).base;
  const Decomposition d = whitenoise_decomposition(base, c.dim, c.k_max, TensorOptions{c.cap, Execution::parallel});
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  const PointFunction lin = [](std::span<const double> x) { return x[0]; };
  const Eigen::MatrixXd table = measure_pairing_table(d, base, {one, lin});
  const RowMatrix z = sample_pairings(d.lambdas, table, c.seed, c.n_samples);
  const QuadratureOptions q = measure_quadrature(base, c.k_max);
  const double targets[3] = {l2_pairing(base, c.dim, one, one, q), l2_pairing(base, c.dim, one, lin, q),
                             l2_pairing(base, c.dim, lin, lin, q)};
  const char* names[3] = {"var_pair_1", "cov_pair_1_x", "var_pair_x"};
  const int cols[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  Report r;
  const std::string p = "kernel=" + kernel + ";k_max=" + std::to_string(c.k_max) + ";n=" + std::to_string(c.n_samples);
  add_biorthogonality(r, d, p);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd a = z.col(cols[k][0]), b = z.col(cols[k][1]);
    const Estimate e = cross_moment(std::span<const double>(a.data(), a.size()), std::span<const double>(b.data(), b.size()));
    const double dev = std::abs(e.value - targets[k]);
    r.add({names[k], p + ";estimate=" + format_double(e.value) + ";target=" + format_double(targets[k]), dev,
           4.0 * e.std_error, dev <= 4.0 * e.std_error});
  }
  if (!c.density_out.empty()) {
    std::ofstream f(c.density_out);
    if (!f) throw std::runtime_error("cannot write '" + c.density_out + "'");
    write_measure_csv(f, {sample_measure_field(d, base, c.seed, 0)}, c.grid_resolution >= 0 ? c.grid_resolution : c.k_max + 2);
  }
  finish(r, c, out);
}

void cmd_mercer(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const KernelSpec spec = parse_kernel(c.kernel, c.dim);
  validate(spec);
  if (!spec.pointwise()) throw std::invalid_argument("mercer-oracle needs a pointwise kernel");
  if (c.nystrom_n < 2) throw std::invalid_argument("nystrom_n must be >= 2");
  const PointKernel kern = point_kernel(spec);
  const NystromDecomposition nd = nystrom_mercer(kern, c.dim, c.nystrom_n);
  Report r;
  const std::string p = "kernel=" + c.kernel + ";N=" + std::to_string(c.nystrom_n);
  double sum = 0.0;
  for (double l : nd.eigenvalues) sum += l;
  const PointFunction diag = [&](std::span<const double> x) { return eval_kernel(spec, x, x); };
  const PointFunction one = [](std::span<const double>) { return 1.0; };
  const double trace = l2_pairing(BaseMeasure{Lebesgue{}}, c.dim, diag, one);
  r.add({"mercer_trace_deviation", p + ";eigenvalue_sum=" + format_double(sum) + ";trace=" + format_double(trace),
         std::abs(sum - trace), 1e-3, std::abs(sum - trace) <= 1e-3});
  r.add({"mercer_min_eigenvalue", p, nd.eigenvalues.back(), -1e-10, nd.eigenvalues.back() >= -1e-10});

  const Built b = build(c, c.kernel, c.alpha, err);
  const auto pts = make_points(c);
  std::vector<CoefficientFunctional> fs;
  for (const auto& pt : pts) fs.push_back(CoefficientFunctional::dirac(pt));
  const Eigen::MatrixXd dt = pairing_table(b.d, fs);
  const RowMatrix zd = sample_pairings(b.d.lambdas, dt, c.seed, c.n_samples);
  const std::size_t rank = nystrom_rank(nd, 1e-10);
  const Eigen::MatrixXd nt = nystrom_table(nd, kern, pts, rank);
  const std::vector<double> nl(nd.eigenvalues.begin(), nd.eigenvalues.begin() + static_cast<long>(rank));
  // Separate streams keep the two Monte-Carlo runs independent.
  const RowMatrix zn = sample_pairings(nl, nt, c.seed, c.n_samples, Execution::parallel, c.n_samples);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) {
      auto col = [](const RowMatrix& m, std::size_t k) { return Eigen::VectorXd(m.col(static_cast<long>(k))); };
      const Eigen::VectorXd a = col(zd, i), bb = col(zd, j), x = col(zn, i), y = col(zn, j);
      const Estimate ed = cross_moment(std::span<const double>(a.data(), a.size()), std::span<const double>(bb.data(), bb.size()));
      const Estimate en = cross_moment(std::span<const double>(x.data(), x.size()), std::span<const double>(y.data(), y.size()));
      const double tol = std::max(0.02, 4.0 * std::hypot(ed.std_error, en.std_error));
      const double dev = std::abs(ed.value - en.value);
      r.add({"oracle_covariance_deviation",
             p + ";k_max=" + std::to_string(c.k_max) + ";x=" + point_label(pts[i]) + ";y=" + point_label(pts[j]) +
                 ";decomposition=" + format_double(ed.value) + ";nystrom=" + format_double(en.value),
             dev, tol, dev <= tol});
    }
  finish(r, c, out);
}

void cmd_sandwich(const RunConfig& c, bool alpha_given, std::ostream& out) {
  const std::vector<double> alphas = alpha_given ? std::vector<double>{c.alpha} : parse_list(c.alphas, "alphas");
  const auto triples = random_triples(c.dim, c.n_triples, c.seed);
  Report r;
  for (double a : alphas) {
    const SandwichReport s = sandwich_check(a, triples);
    const std::string p = "alpha=" + format_double(a) + ";triples=" + std::to_string(s.evaluated) +
                          ";skipped=" + std::to_string(s.skipped);
    r.add({"sandwich_lower_violations", p + ";max_violation=" + format_double(s.max_lower_violation),
           static_cast<double>(s.lower_violations), 0.0, s.lower_violations == 0});
    r.add({"sandwich_upper_violations", p + ";max_violation=" + format_double(s.max_upper_violation),
           static_cast<double>(s.upper_violations), 0.0, s.upper_violations == 0});
  }
  finish(r, c, out);
}

// ---------------------------------------------------------------- parsing

constexpr const char* kFormats = R"(File formats:
  decomposition  JSON: format, version, metadata {kernel, space, alpha, dim, k_max,
                 norm_mode, pivot_tol}, basis_size, terms, lambdas, phis and etas
                 (row-major terms x basis_size), pivots, report.
  grid samples   CSV header x1[,x2...],value; one row per node, first axis slowest;
                 several samples are consecutive blocks. A JSON sidecar <out>.meta
                 records seed, streams and generator.
  measure samples CSV with '# key = value' lines (base, seed, streams, rng), header
                 x1[,...],density (or weight for counting bases).
  reports        CSV header metric,parameters,value,tolerance,pass; --report-json
                 writes the same records as JSON.
  config         --config FILE with 'key = value' lines and '#' comments; keys are
                 the flag names with '_' for '-' (n_samples for --n, grid_resolution
                 for --grid). Flags override file values. GFIELD_NUM_THREADS sets
                 the OpenMP thread count.
Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.)";

struct Flags {
  CLI::App* app;
  RunConfig* c;
  std::string config_path;
  std::size_t n_default = 0;

  void kernel() { app->add_option("--kernel", c->kernel, "Kernel: exp-alpha:A | gaussian-se:S | white-noise:lebesgue | white-noise:counting:X;X | white-noise:density:affine:C0,..,Cn | grid-kernel:PATH")->capture_default_str(); }
  void dim() { app->add_option("--dim", c->dim, "Dimension of the unit cube")->capture_default_str(); }
  void k_max() { app->add_option("--k-max", c->k_max, "Finest dyadic level")->capture_default_str(); }
  void alpha() { app->add_option("--alpha", c->alpha, "Hoelder renormalisation exponent in (0,1]")->capture_default_str(); }
  void decomposition() {
    kernel();
    dim();
    k_max();
    alpha();
    app->add_option("--pivot-tol", c->pivot_tol, "Pivot tolerance (0: 1e-12 x largest diagonal)")->capture_default_str();
    app->add_option("--norm-mode", c->norm_mode, "auto | grid-hoelder | coefficient-euclidean | total-variation")->capture_default_str();
    app->add_option("--energy-cutoff", c->energy_cutoff, "Keep the smallest prefix with (1-eps) of the lambda sum")->capture_default_str();
    app->add_option("--cap", c->cap, "Largest basis size allowed")->capture_default_str();
  }
  void seed() { app->add_option("--seed", c->seed, "Generator seed")->capture_default_str(); }
  void n(std::size_t def) {
    n_default = def;
    app->add_option("--n", c->n_samples, "Number of samples (default " + std::to_string(def) + ")")
        ->check(CLI::PositiveNumber);
  }
  void grid(const char* help) { app->add_option("--grid", c->grid_resolution, help); }
  void out(const char* help) { app->add_option("--out", c->out, help); }
  void report_json() { app->add_option("--report-json", c->report_json, "Also write the report as JSON"); }
  void points() { app->add_option("--points", c->points, "Comma-separated coordinates; each gives the point (p,...,p)")->capture_default_str(); }
  void config() { app->add_option("--config", config_path, "Config file of 'key = value' lines"); }
};

}  // namespace

const std::map<std::string, std::string>& config_keys() {
  static const std::map<std::string, std::string> keys = {
      {"kernel", "--kernel"},       {"dim", "--dim"},
      {"k_max", "--k-max"},         {"alpha", "--alpha"},
      {"alphas", "--alphas"},       {"gammas", "--gammas"},
      {"seed", "--seed"},           {"n_samples", "--n"},
      {"grid_resolution", "--grid"}, {"pivot_tol", "--pivot-tol"},
      {"norm_mode", "--norm-mode"}, {"energy_cutoff", "--energy-cutoff"},
      {"points", "--points"},       {"n_triples", "--n-triples"},
      {"nystrom_n", "--nystrom-n"}, {"cap", "--cap"},
      {"out", "--out"},             {"decomp", "--decomp"},
      {"report_json", "--report-json"}, {"density_out", "--density-out"}};
  return keys;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!config_keys().count(key)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (kv.count(key)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    if (value.empty()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty value for '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Gaussian random fields on Hoelder spaces and spaces of measures", "gfield"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.footer(kFormats);
  std::string config_path;

  auto sub = [&](const char* name, const char* desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->footer(kFormats);
    return Flags{s, &c, {}};
  };

  Flags decompose = sub("decompose", "Build the tensor coefficients of a kernel and biorthogonalise them");
  decompose.decomposition();
  decompose.out("Decomposition JSON output (required)");

  Flags sample = sub("sample", "Draw samples from a stored decomposition and write them on a dyadic grid");
  sample.app->add_option("--decomp", c.decomp, "Decomposition JSON input (required)");
  sample.seed();
  sample.n(1);
  sample.grid("Grid resolution r (2^r + 1 points per axis; default 8)");
  sample.app->add_option("--energy-cutoff", c.energy_cutoff, "Truncate to (1-eps) of the lambda sum")->capture_default_str();
  sample.out("Sample CSV output (required)");

  Flags vcov = sub("validate-cov", "Compare Monte-Carlo point covariances with the decomposition");
  vcov.decomposition();
  vcov.seed();
  vcov.n(200000);
  vcov.points();
  vcov.out("Report CSV output");
  vcov.report_json();

  Flags holder = sub("holder", "Estimate Hoelder exponents of samples from exp-alpha kernels");
  holder.dim();
  holder.k_max();
  holder.app->add_option("--alphas", c.alphas, "Comma-separated kernel exponents")->capture_default_str();
  holder.app->add_option("--pivot-tol", c.pivot_tol, "Pivot tolerance")->capture_default_str();
  holder.app->add_option("--norm-mode", c.norm_mode, "auto | grid-hoelder | coefficient-euclidean")->capture_default_str();
  holder.app->add_option("--cap", c.cap, "Largest basis size allowed")->capture_default_str();
  holder.seed();
  holder.n(20);
  holder.grid("Grid resolution for the increment regression (default k_max)");
  holder.out("Report CSV output");
  holder.report_json();

  Flags besov = sub("besov", "Per-level l1 sums of gamma-renormalised tensor coefficients");
  besov.kernel();
  besov.dim();
  besov.k_max();
  besov.app->add_option("--gammas", c.gammas, "Comma-separated smoothness exponents")->capture_default_str();
  besov.out("Report CSV output");
  besov.report_json();

  Flags wn = sub("whitenoise", "Sample white noise on measures and check pairing covariances");
  wn.kernel();
  wn.dim();
  wn.k_max();
  wn.app->add_option("--cap", c.cap, "Largest basis size allowed")->capture_default_str();
  wn.seed();
  wn.n(100000);
  wn.grid("Resolution of --density-out (default k_max + 2)");
  wn.app->add_option("--density-out", c.density_out, "Write the first sample's density CSV here");
  wn.out("Report CSV output");
  wn.report_json();

  Flags mercer = sub("mercer-oracle", "Compare the decomposition with a Nystrom/Mercer eigendecomposition");
  mercer.decomposition();
  mercer.app->add_option("--nystrom-n", c.nystrom_n, "Nystrom points per axis")->capture_default_str();
  mercer.seed();
  mercer.n(200000);
  mercer.points();
  mercer.out("Report CSV output");
  mercer.report_json();

  Flags sandwich = sub("sandwich", "Check the two-sided difference-quotient bound for exp kernels");
  sandwich.dim();
  sandwich.alpha();
  sandwich.app->add_option("--alphas", c.alphas, "Comma-separated exponents (ignored when --alpha is given)")->capture_default_str();
  sandwich.app->add_option("--n-triples", c.n_triples, "Number of random triples")->capture_default_str();
  sandwich.seed();
  sandwich.out("Report CSV output");
  sandwich.report_json();

  for (Flags* f : {&decompose, &sample, &vcov, &holder, &besov, &wn, &mercer, &sandwich}) f->config();

  // Config values become flags placed before the user's own, so flags win.
  std::vector<std::string> args(argv, argv + argc);
  try {
    if (args.size() >= 2) {
      CLI::App* target = nullptr;
      for (auto* s : app.get_subcommands([](CLI::App*) { return true; }))
        if (s->get_name() == args[1]) target = s;
      std::vector<std::string> rest;
      std::string path;
      for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
          path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
          path = args[i].substr(9);
        } else {
          rest.push_back(args[i]);
        }
      }
      if (target != nullptr && !path.empty()) {
        std::vector<std::string> merged = {args[0], args[1]};
        for (const auto& [key, value] : read_config_file(path)) {
          const std::string& flag = config_keys().at(key);
          if (target->get_option_no_throw(flag) == nullptr) continue;
          merged.push_back(flag);
          merged.push_back(value);
        }
        merged.insert(merged.end(), rest.begin(), rest.end());
        args = std::move(merged);
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  std::vector<const char*> cargv;
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (Flags* f : {&sample, &vcov, &holder, &wn, &mercer})
    if (f->app->parsed() && f->app->count("--n") == 0) c.n_samples = f->n_default;

  try {
    apply_threads();
    check_common(c);
    if (decompose.app->parsed()) cmd_decompose(c, out, err);
    else if (sample.app->parsed()) cmd_sample(c, out);
    else if (vcov.app->parsed()) cmd_validate_cov(c, out, err);
    else if (holder.app->parsed()) cmd_holder(c, out, err);
    else if (besov.app->parsed()) cmd_besov(c, out);
    else if (wn.app->parsed()) cmd_whitenoise(c, out);
    else if (mercer.app->parsed()) cmd_mercer(c, out, err);
    else if (sandwich.app->parsed()) cmd_sandwich(c, sandwich.app->count("--alpha") > 0, out);
  } catch (const ValidationFailed&) {
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace gfield
