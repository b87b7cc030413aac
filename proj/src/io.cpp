#include "proxphase/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace proxphase::io {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string &s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return {};
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_real(const std::string &token, const fs::path &path,
                  std::size_t line) {
  const std::string t = trim(token);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(path.string() + ":" + std::to_string(line) +
                ": malformed number '" + t + "'");
  }
  return value;
}

std::ifstream open_input(const fs::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  return in;
}

std::ofstream open_output(const fs::path &path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  return out;
}

std::vector<std::string> split(const std::string &line, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) {
    parts.push_back(item);
  }
  return parts;
}

} // namespace

std::string format_real(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) {
    throw Error("format_real: conversion failed");
  }
  return std::string(buf.data(), ptr);
}

Vector read_vector_csv(const fs::path &path) {
  std::ifstream in = open_input(path);
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      continue;
    }
    values.push_back(parse_real(line, path, lineno));
  }
  if (values.empty()) {
    throw Error(path.string() + ": no values");
  }
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<Index>(values.size()));
}

void write_vector_csv(const fs::path &path, const Vector &v) {
  std::ofstream out = open_output(path);
  for (Index i = 0; i < v.size(); ++i) {
    out << format_real(v(i)) << '\n';
  }
}

Matrix read_matrix_csv(const fs::path &path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      continue;
    }
    std::vector<double> row;
    for (const auto &tok : split(line, ',')) {
      row.push_back(parse_real(tok, path, lineno));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(path.string() + ":" + std::to_string(lineno) +
                  ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw Error(path.string() + ": no rows");
  }
  Matrix a(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return a;
}

void write_matrix_csv(const fs::path &path, const Matrix &a) {
  std::ofstream out = open_output(path);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) {
        out << ',';
      }
      out << format_real(a(i, j));
    }
    out << '\n';
  }
}

Mask read_mask_csv(const fs::path &path) {
  std::ifstream in = open_input(path);
  std::vector<bool> flags;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) {
      continue;
    }
    if (t != "0" && t != "1") {
      throw Error(path.string() + ":" + std::to_string(lineno) +
                  ": mask entries must be 0 or 1");
    }
    flags.push_back(t == "1");
  }
  Mask mask(static_cast<Index>(flags.size()));
  for (std::size_t i = 0; i < flags.size(); ++i) {
    mask(static_cast<Index>(i)) = flags[i];
  }
  return mask;
}

void write_mask_csv(const fs::path &path, const Mask &mask) {
  std::ofstream out = open_output(path);
  for (Index i = 0; i < mask.size(); ++i) {
    out << (mask(i) ? '1' : '0') << '\n';
  }
}

void write_bundle(const fs::path &dir, const ProblemBundle &bundle) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create " + dir.string() + ": " + ec.message());
  }
  if (bundle.signal) {
    write_vector_csv(dir / "signal.csv", *bundle.signal);
  }
  write_vector_csv(dir / "b.csv", bundle.b);
  write_mask_csv(dir / "mask.csv", bundle.mask);
  if (bundle.ensemble.is_dense()) {
    write_matrix_csv(dir / "ensemble.csv", bundle.ensemble.matrix());
    fs::remove(dir / "ensemble_hadamard.csv", ec);
  } else {
    const Matrix &signs = bundle.ensemble.sign_diagonals();
    std::ofstream out = open_output(dir / "ensemble_hadamard.csv");
    out << "k=" << signs.cols() << " n=" << signs.rows() << '\n';
    for (Index l = 0; l < signs.cols(); ++l) {
      for (Index j = 0; j < signs.rows(); ++j) {
        if (j > 0) {
          out << ',';
        }
        out << (signs(j, l) > 0 ? "1" : "-1");
      }
      out << '\n';
    }
    fs::remove(dir / "ensemble.csv", ec);
  }
}

namespace {

MeasurementEnsemble read_hadamard(const fs::path &path) {
  std::ifstream in = open_input(path);
  std::string header;
  std::getline(in, header);
  long long k = 0;
  long long n = 0;
  {
    std::istringstream hs(header);
    std::string kt;
    std::string nt;
    hs >> kt >> nt;
    if (kt.rfind("k=", 0) != 0 || nt.rfind("n=", 0) != 0) {
      throw Error(path.string() + ": header must be 'k=<int> n=<int>'");
    }
    try {
      k = std::stoll(kt.substr(2));
      n = std::stoll(nt.substr(2));
    } catch (const std::exception &) {
      throw Error(path.string() + ": header must be 'k=<int> n=<int>'");
    }
  }
  if (k <= 0 || n <= 0) {
    throw Error(path.string() + ": k and n must be positive");
  }
  Matrix signs(n, k);
  std::string line;
  for (long long l = 0; l < k; ++l) {
    if (!std::getline(in, line)) {
      throw Error(path.string() + ": expected " + std::to_string(k) +
                  " sign rows");
    }
    const auto parts = split(line, ',');
    if (static_cast<long long>(parts.size()) != n) {
      throw Error(path.string() + ":" + std::to_string(l + 2) +
                  ": expected " + std::to_string(n) + " entries");
    }
    for (long long j = 0; j < n; ++j) {
      signs(j, l) = parse_real(parts[static_cast<std::size_t>(j)], path,
                               static_cast<std::size_t>(l + 2));
    }
  }
  return MeasurementEnsemble(HadamardSensing{std::move(signs)});
}

} // namespace

ProblemBundle read_bundle(const fs::path &dir) {
  if (!fs::is_directory(dir)) {
    throw Error("bundle directory not found: " + dir.string());
  }
  std::optional<MeasurementEnsemble> ensemble;
  if (fs::exists(dir / "ensemble.csv")) {
    ensemble.emplace(DenseSensing{read_matrix_csv(dir / "ensemble.csv")});
  } else if (fs::exists(dir / "ensemble_hadamard.csv")) {
    ensemble.emplace(read_hadamard(dir / "ensemble_hadamard.csv"));
  } else {
    throw Error("bundle has neither ensemble.csv nor ensemble_hadamard.csv");
  }
  Vector b = read_vector_csv(dir / "b.csv");
  require_same_size(b.size(), ensemble->rows(), "bundle b.csv vs ensemble rows");

  Mask mask = fs::exists(dir / "mask.csv") ? read_mask_csv(dir / "mask.csv")
                                           : Mask::Constant(b.size(), false);
  require_same_size(mask.size(), b.size(), "bundle mask.csv vs b.csv");

  std::optional<Vector> signal;
  if (fs::exists(dir / "signal.csv")) {
    signal = read_vector_csv(dir / "signal.csv");
    require_same_size(signal->size(), ensemble->cols(),
                      "bundle signal.csv vs ensemble columns");
  }
  return {std::move(*ensemble), std::move(b), std::move(mask), std::move(signal)};
}

} // namespace proxphase::io
