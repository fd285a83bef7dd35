#pragma once

#include "petrels/metrics.hpp"
#include "petrels/tracker.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>

namespace petrels {

enum class ColumnOrder { uniform_random, cyclic };

std::string to_string(ColumnOrder order);
ColumnOrder parse_column_order(const std::string& text);

struct McRun {
  Index budget = 0;  // number of streamed columns; 0 means 10 * N
  ColumnOrder column_order = ColumnOrder::uniform_random;
  TrackerOptions tracker;  // ambient_dim is taken from the matrix
  std::uint64_t seed = 1;
  Index trace_every = 0;  // matrix_error sampling period in steps; 0 means N
};

struct McResult {
  Mat<Real> subspace;
  Mat<Real> reconstruction;
  MetricTrace trace{"matrix_error"};
  Index skipped_columns = 0;   // streamed columns with no observed entry
  Index empty_columns = 0;     // columns reconstructed as zero
  Index underdetermined_columns = 0;  // fewer observed rows than the rank
};

struct Reconstruction {
  Mat<Real> matrix;
  Index empty_columns = 0;
};

/// Column j of the result is D a_j with a_j the minimum-norm masked LS fit of
/// the observed entries of column j. Columns parallelize.
Reconstruction reconstruct_matrix(const Mat<Real>& subspace, const Mat<Real>& observed,
                                  const MaskMat& mask);

/// Streams columns of the masked matrix through a tracker and reconstructs it.
/// `truth`, when given, drives the matrix_error trace.
McResult run_online_mc(const Mat<Real>& observed, const MaskMat& mask, const McRun& run,
                       const std::optional<Mat<Real>>& truth = std::nullopt);

// ---------------------------------------------------------------------------
// Coordinate triplet text format:
//   first non-comment line: "<rows> <cols> <nnz>"
//   then nnz lines "<row> <col> <value>" with 0-based indices.
// Lines starting with '#' are comments.

struct TripletMatrix {
  Mat<Real> values;  // zero where unobserved
  MaskMat mask;
};

TripletMatrix read_triplets(std::istream& is);
void write_triplets(std::ostream& os, const Mat<Real>& values, const MaskMat& mask);

// Dense binary: 8-byte magic "PTRLSMAT", uint64 rows, uint64 cols, then
// rows*cols little-endian IEEE doubles in column-major order.
void write_dense_binary(std::ostream& os, const Mat<Real>& matrix);
Mat<Real> read_dense_binary(std::istream& is);

}  // namespace petrels
