#pragma once

// Text checkpoint container shared by every tracker variant:
//
//   PETRELS-CHECKPOINT 1
//   variant <petrels|simplified|regularized|grouse|past>
//   field <real|complex>
//   scalar <name> <value>            (any number of lines)
//   block <name> <count> <rows> <cols>
//   <rows * count lines, row-major; complex entries as "re im" pairs>
//   end
//
// Values are written with shortest round-trip formatting, so a
// save/load cycle reproduces the state bitwise.

#include "petrels/types.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace petrels {

template <typename S>
struct Checkpoint {
  std::string variant;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, std::vector<Mat<S>>>> blocks;

  double scalar(const std::string& name) const;
  bool has_scalar(const std::string& name) const;
  const std::vector<Mat<S>>& block(const std::string& name) const;
  bool has_block(const std::string& name) const;
};

template <typename S>
void write_checkpoint(std::ostream& os, const Checkpoint<S>& ckpt);

/// Reads a checkpoint; throws std::runtime_error on malformed input or when
/// the stored scalar field differs from S.
template <typename S>
Checkpoint<S> read_checkpoint(std::istream& is);

/// Scalar field recorded in a checkpoint stream (peeks the header only).
ScalarField peek_checkpoint_field(std::istream& is);

}  // namespace petrels
