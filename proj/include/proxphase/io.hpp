#ifndef PROXPHASE_IO_HPP
#define PROXPHASE_IO_HPP

#include "proxphase/sensing.hpp"
#include "proxphase/types.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace proxphase::io {

/// Shortest round-tripping decimal form of a double.
std::string format_real(double value);

Vector read_vector_csv(const std::filesystem::path &path);
void write_vector_csv(const std::filesystem::path &path, const Vector &v);

/// Comma-separated rows, no header.
Matrix read_matrix_csv(const std::filesystem::path &path);
void write_matrix_csv(const std::filesystem::path &path, const Matrix &a);

/// One 0/1 per line.
Mask read_mask_csv(const std::filesystem::path &path);
void write_mask_csv(const std::filesystem::path &path, const Mask &mask);

/// A problem on disk:
///   signal.csv                 ground truth (optional on read)
///   b.csv                      observations
///   mask.csv                   outlier mask
///   ensemble.csv               dense matrix, or
///   ensemble_hadamard.csv      "k=<int> n=<int>" then k lines of +-1 values
struct ProblemBundle {
  MeasurementEnsemble ensemble;
  Vector b;
  Mask mask;
  std::optional<Vector> signal;
};

void write_bundle(const std::filesystem::path &dir, const ProblemBundle &bundle);
ProblemBundle read_bundle(const std::filesystem::path &dir);

} // namespace proxphase::io

#endif // PROXPHASE_IO_HPP
