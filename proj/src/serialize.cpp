#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "gfield/decomp.hpp"
#include "json.hpp"

namespace gfield {

namespace {

constexpr const char* kFormat = "gfield-decomposition";
constexpr int kVersion = 1;

std::string num(double v) {
  if (!std::isfinite(v)) throw std::runtime_error("cannot serialise a non-finite value");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

void write_array(std::ostream& out, const double* data, std::size_t n) {
  out << '[';
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out << ',';
    out << num(data[i]);
  }
  out << ']';
}

RowMatrix read_matrix(const nlohmann::json& arr, long rows, long cols) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(rows * cols))
    throw std::runtime_error("decomposition matrix has the wrong size");
  RowMatrix m(rows, cols);
  for (long i = 0; i < rows * cols; ++i) m.data()[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return m;
}

}  // namespace

void write_decomposition(const Decomposition& d, std::ostream& out) {
  const auto& r = d.report;
  out << "{\n";
  out << "  \"format\": " << quoted(kFormat) << ",\n";
  out << "  \"version\": " << kVersion << ",\n";
  out << "  \"metadata\": {\"kernel\": " << quoted(d.kernel) << ", \"space\": " << quoted(to_string(d.space))
      << ", \"alpha\": " << num(d.meta.alpha) << ", \"dim\": " << d.meta.dim << ", \"k_max\": " << d.meta.k_max
      << ", \"norm_mode\": " << quoted(to_string(d.norm_mode)) << ", \"pivot_tol\": " << num(d.pivot_tol) << "},\n";
  out << "  \"basis_size\": " << d.basis_size() << ",\n";
  out << "  \"terms\": " << d.terms() << ",\n";
  out << "  \"lambdas\": ";
  write_array(out, d.lambdas.data(), d.lambdas.size());
  out << ",\n  \"phis\": ";
  write_array(out, d.phis.data(), static_cast<std::size_t>(d.phis.size()));
  out << ",\n  \"etas\": ";
  write_array(out, d.etas.data(), static_cast<std::size_t>(d.etas.size()));
  out << ",\n  \"pivots\": ";
  write_array(out, d.pivots.data(), d.pivots.size());
  out << ",\n  \"report\": {\"max_off_diagonal\": " << num(r.max_off_diagonal)
      << ", \"max_diagonal_error\": " << num(r.max_diagonal_error) << ", \"lambda_min\": " << num(r.lambda_min)
      << ", \"lambda_max\": " << num(r.lambda_max) << ", \"reconstruction_residual\": "
      << num(r.reconstruction_residual) << ", \"min_pivot_before_clamp\": " << num(r.min_pivot_before_clamp)
      << ", \"clamped\": " << r.clamped << "}\n";
  out << "}\n";
}

Decomposition read_decomposition(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed decomposition file: ") + e.what());
  }
  try {
    if (j.at("format") != kFormat) throw std::runtime_error("not a decomposition file");
    if (j.at("version").get<int>() != kVersion) throw std::runtime_error("unsupported decomposition version");
    Decomposition d;
    const auto& meta = j.at("metadata");
    d.kernel = meta.at("kernel").get<std::string>();
    d.space = parse_space(meta.at("space").get<std::string>());
    d.meta.alpha = meta.at("alpha").get<double>();
    d.meta.dim = meta.at("dim").get<int>();
    d.meta.k_max = meta.at("k_max").get<int>();
    d.norm_mode = parse_norm_mode(meta.at("norm_mode").get<std::string>());
    d.pivot_tol = meta.at("pivot_tol").get<double>();
    const long m = j.at("basis_size").get<long>();
    const long r = j.at("terms").get<long>();
    if (static_cast<std::size_t>(m) != dyadic_count(d.meta.dim, d.meta.k_max))
      throw std::runtime_error("basis_size does not match dim and k_max");
    d.lambdas = j.at("lambdas").get<std::vector<double>>();
    if (static_cast<long>(d.lambdas.size()) != r) throw std::runtime_error("lambdas length mismatch");
    d.phis = read_matrix(j.at("phis"), r, m);
    d.etas = read_matrix(j.at("etas"), r, m);
    d.pivots = j.at("pivots").get<std::vector<double>>();
    const auto& rep = j.at("report");
    d.report.max_off_diagonal = rep.at("max_off_diagonal").get<double>();
    d.report.max_diagonal_error = rep.at("max_diagonal_error").get<double>();
    d.report.lambda_min = rep.at("lambda_min").get<double>();
    d.report.lambda_max = rep.at("lambda_max").get<double>();
    d.report.reconstruction_residual = rep.at("reconstruction_residual").get<double>();
    d.report.min_pivot_before_clamp = rep.at("min_pivot_before_clamp").get<double>();
    d.report.clamped = rep.at("clamped").get<std::size_t>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed decomposition file: ") + e.what());
  }
}

void save_decomposition(const Decomposition& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_decomposition(d, out);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Decomposition load_decomposition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return read_decomposition(in);
}

}  // namespace gfield
