#include "petrels/mc.hpp"

#include "petrels/linalg.hpp"
#include "petrels/rng.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace petrels {

std::string to_string(ColumnOrder order) {
  return order == ColumnOrder::cyclic ? "cyclic" : "uniform_random";
}

ColumnOrder parse_column_order(const std::string& text) {
  if (text == "cyclic") return ColumnOrder::cyclic;
  if (text == "uniform_random" || text == "random") return ColumnOrder::uniform_random;
  throw std::invalid_argument("unknown column order '" + text + "'");
}

namespace {

ObservedSample<Real> column_sample(const Mat<Real>& observed, const MaskMat& mask, Index j,
                                   std::int64_t t) {
  ObservedSample<Real> s;
  s.t = t;
  s.mask = mask.col(j);
  s.values = observed.col(j).cwiseProduct(mask.col(j).cast<Real>().matrix());
  return s;
}

void check_shapes(const Mat<Real>& observed, const MaskMat& mask) {
  if (observed.rows() != mask.rows() || observed.cols() != mask.cols()) {
    throw std::invalid_argument("matrix and mask shapes differ");
  }
}

}  // namespace

Reconstruction reconstruct_matrix(const Mat<Real>& subspace, const Mat<Real>& observed,
                                  const MaskMat& mask) {
  check_shapes(observed, mask);
  if (subspace.rows() != observed.rows()) {
    throw std::invalid_argument("reconstruct_matrix: subspace rows differ from matrix rows");
  }
  Reconstruction out;
  out.matrix = Mat<Real>::Zero(observed.rows(), observed.cols());
  const Index cols = observed.cols();
  Index empty = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : empty)
  for (Index j = 0; j < cols; ++j) {
    const auto rows = observed_indices(mask.col(j));
    if (rows.empty()) {
      ++empty;
      continue;
    }
    Vec<Real> y(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Index>(i)) = observed(rows[i], j);
    const Vec<Real> a = min_norm_solve<Real>(gather_rows(subspace, rows), y);
    out.matrix.col(j) = subspace * a;
  }
  out.empty_columns = empty;
  return out;
}

McResult run_online_mc(const Mat<Real>& observed, const MaskMat& mask, const McRun& run,
                       const std::optional<Mat<Real>>& truth) {
  check_shapes(observed, mask);
  if (requires_full_observation(run.tracker.kind) && !mask.all()) {
    throw std::invalid_argument("run_online_mc: PAST cannot consume partially observed columns");
  }
  if (truth && (truth->rows() != observed.rows() || truth->cols() != observed.cols())) {
    throw std::invalid_argument("run_online_mc: truth shape differs");
  }
  const Index rows = observed.rows();
  const Index cols = observed.cols();
  const Index budget = run.budget > 0 ? run.budget : 10 * cols;
  const Index trace_every = run.trace_every > 0 ? run.trace_every : cols;

  TrackerOptions opts = run.tracker;
  opts.config.ambient_dim = rows;
  auto tracker = make_tracker<Real>(opts, run.seed);

  McResult result;
  for (Index j = 0; j < cols; ++j) {
    if (mask.col(j).count() < opts.config.rank) ++result.underdetermined_columns;
  }

  Rng order_rng(run.seed, rng_stream::kColumns, 0);
  std::int64_t t = 0;
  for (Index step = 0; step < budget; ++step) {
    const Index j = run.column_order == ColumnOrder::cyclic
                        ? step % cols
                        : static_cast<Index>(order_rng.below(static_cast<std::uint64_t>(cols)));
    if (mask.col(j).count() == 0) {
      ++result.skipped_columns;
      continue;
    }
    tracker->step(column_sample(observed, mask, j, ++t));
    if (truth && (step + 1) % trace_every == 0) {
      result.trace.push(t, matrix_error<Real>(
                               reconstruct_matrix(tracker->subspace(), observed, mask).matrix,
                               *truth));
    }
  }
  result.subspace = tracker->subspace();
  auto rec = reconstruct_matrix(result.subspace, observed, mask);
  result.reconstruction = std::move(rec.matrix);
  result.empty_columns = rec.empty_columns;
  if (truth && (result.trace.empty() || result.trace.points().back().first != t)) {
    result.trace.push(t, matrix_error<Real>(result.reconstruction, *truth));
  }
  return result;
}

// ---------------------------------------------------------------------------

TripletMatrix read_triplets(std::istream& is) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  if (!next_line()) throw std::runtime_error("triplets: missing dims header");
  Index rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream hdr(line);
    if (!(hdr >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0) {
      throw std::runtime_error("triplets: malformed header '" + line + "'");
    }
  }
  TripletMatrix out{Mat<Real>::Zero(rows, cols), MaskMat::Constant(rows, cols, false)};
  for (Index k = 0; k < nnz; ++k) {
    if (!next_line()) throw std::runtime_error("triplets: fewer entries than declared");
    std::istringstream row(line);
    Index i = 0, j = 0;
    std::string value;
    if (!(row >> i >> j >> value)) throw std::runtime_error("triplets: malformed entry '" + line + "'");
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw std::runtime_error("triplets: index out of range in '" + line + "'");
    }
    out.values(i, j) = parse_double(value);
    out.mask(i, j) = true;
  }
  return out;
}

void write_triplets(std::ostream& os, const Mat<Real>& values, const MaskMat& mask) {
  check_shapes(values, mask);
  os << values.rows() << ' ' << values.cols() << ' ' << mask.count() << '\n';
  for (Index j = 0; j < values.cols(); ++j) {
    for (Index i = 0; i < values.rows(); ++i) {
      if (mask(i, j)) os << i << ' ' << j << ' ' << format_double(values(i, j)) << '\n';
    }
  }
}

namespace {
constexpr char kDenseMagic[8] = {'P', 'T', 'R', 'L', 'S', 'M', 'A', 'T'};

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host assumed");
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("dense binary: truncated input");
  return value;
}
}  // namespace

void write_dense_binary(std::ostream& os, const Mat<Real>& matrix) {
  os.write(kDenseMagic, sizeof(kDenseMagic));
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(matrix.rows()));
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(matrix.cols()));
  os.write(reinterpret_cast<const char*>(matrix.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(matrix.size())));
}

Mat<Real> read_dense_binary(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kDenseMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("dense binary: bad magic");
  }
  const auto rows = static_cast<Index>(get_le<std::uint64_t>(is));
  const auto cols = static_cast<Index>(get_le<std::uint64_t>(is));
  Mat<Real> out(rows, cols);
  is.read(reinterpret_cast<char*>(out.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(out.size())));
  if (!is) throw std::runtime_error("dense binary: truncated payload");
  return out;
}

}  // namespace petrels
