#include "petrels/checkpoint.hpp"

#include "petrels/metrics.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace petrels {

namespace {

constexpr const char* kMagic = "PETRELS-CHECKPOINT";

template <typename S>
void write_value(std::ostream& os, S v) {
  if constexpr (is_complex_v<S>) {
    os << format_double(v.real()) << ' ' << format_double(v.imag());
  } else {
    os << format_double(v);
  }
}

template <typename S>
S read_value(std::istream& is) {
  std::string re;
  is >> re;
  if constexpr (is_complex_v<S>) {
    std::string im;
    is >> im;
    if (!is) throw std::runtime_error("checkpoint: truncated block");
    return {parse_double(re), parse_double(im)};
  } else {
    if (!is) throw std::runtime_error("checkpoint: truncated block");
    return parse_double(re);
  }
}

std::string expect_word(std::istream& is, const char* what) {
  std::string word;
  if (!(is >> word)) throw std::runtime_error(std::string("checkpoint: missing ") + what);
  return word;
}

}  // namespace

template <typename S>
double Checkpoint<S>::scalar(const std::string& name) const {
  for (const auto& [k, v] : scalars) {
    if (k == name) return v;
  }
  throw std::runtime_error("checkpoint: missing scalar '" + name + "'");
}

template <typename S>
bool Checkpoint<S>::has_scalar(const std::string& name) const {
  for (const auto& kv : scalars) {
    if (kv.first == name) return true;
  }
  return false;
}

template <typename S>
const std::vector<Mat<S>>& Checkpoint<S>::block(const std::string& name) const {
  for (const auto& [k, v] : blocks) {
    if (k == name) return v;
  }
  throw std::runtime_error("checkpoint: missing block '" + name + "'");
}

template <typename S>
bool Checkpoint<S>::has_block(const std::string& name) const {
  for (const auto& kv : blocks) {
    if (kv.first == name) return true;
  }
  return false;
}

template <typename S>
void write_checkpoint(std::ostream& os, const Checkpoint<S>& ckpt) {
  os << kMagic << " 1\n";
  os << "variant " << ckpt.variant << '\n';
  os << "field " << to_string(field_of<S>()) << '\n';
  for (const auto& [name, value] : ckpt.scalars) {
    os << "scalar " << name << ' ' << format_double(value) << '\n';
  }
  for (const auto& [name, mats] : ckpt.blocks) {
    const Index rows = mats.empty() ? 0 : mats.front().rows();
    const Index cols = mats.empty() ? 0 : mats.front().cols();
    os << "block " << name << ' ' << mats.size() << ' ' << rows << ' ' << cols << '\n';
    for (const auto& m : mats) {
      if (m.rows() != rows || m.cols() != cols) {
        throw std::invalid_argument("checkpoint: ragged block '" + name + "'");
      }
      for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
          if (j > 0) os << ' ';
          write_value<S>(os, m(i, j));
        }
        os << '\n';
      }
    }
  }
  os << "end\n";
}

template <typename S>
Checkpoint<S> read_checkpoint(std::istream& is) {
  if (expect_word(is, "magic") != kMagic) throw std::runtime_error("checkpoint: bad magic");
  if (expect_word(is, "version") != "1") throw std::runtime_error("checkpoint: unknown version");
  Checkpoint<S> ckpt;
  if (expect_word(is, "variant tag") != "variant") throw std::runtime_error("checkpoint: no variant");
  ckpt.variant = expect_word(is, "variant");
  if (expect_word(is, "field tag") != "field") throw std::runtime_error("checkpoint: no field");
  if (parse_scalar_field(expect_word(is, "field")) != field_of<S>()) {
    throw std::runtime_error("checkpoint: scalar field does not match the requested type");
  }
  for (;;) {
    const std::string tag = expect_word(is, "record");
    if (tag == "end") break;
    if (tag == "scalar") {
      const std::string name = expect_word(is, "scalar name");
      ckpt.scalars.emplace_back(name, parse_double(expect_word(is, "scalar value")));
    } else if (tag == "block") {
      const std::string name = expect_word(is, "block name");
      std::size_t count = 0;
      Index rows = 0;
      Index cols = 0;
      if (!(is >> count >> rows >> cols)) throw std::runtime_error("checkpoint: bad block header");
      std::vector<Mat<S>> mats(count, Mat<S>(rows, cols));
      for (auto& m : mats) {
        for (Index i = 0; i < rows; ++i) {
          for (Index j = 0; j < cols; ++j) m(i, j) = read_value<S>(is);
        }
      }
      ckpt.blocks.emplace_back(name, std::move(mats));
    } else {
      throw std::runtime_error("checkpoint: unknown record '" + tag + "'");
    }
  }
  return ckpt;
}

ScalarField peek_checkpoint_field(std::istream& is) {
  const auto pos = is.tellg();
  std::string magic, version, vtag, variant, ftag, field;
  is >> magic >> version >> vtag >> variant >> ftag >> field;
  is.clear();
  is.seekg(pos);
  if (magic != kMagic || ftag != "field") throw std::runtime_error("checkpoint: bad header");
  return parse_scalar_field(field);
}

template struct Checkpoint<Real>;
template struct Checkpoint<Complex>;
template void write_checkpoint<Real>(std::ostream&, const Checkpoint<Real>&);
template void write_checkpoint<Complex>(std::ostream&, const Checkpoint<Complex>&);
template Checkpoint<Real> read_checkpoint<Real>(std::istream&);
template Checkpoint<Complex> read_checkpoint<Complex>(std::istream&);

}  // namespace petrels
