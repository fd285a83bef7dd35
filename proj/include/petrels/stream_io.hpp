#pragma once

// Columnar stream dump, one sample per line:
//
//   # petrels-stream 1 field=<real|complex> ambient_dim=<M>
//   t,runs,values
//   17,0:3 10:2,<v0> <v1> <v2> <v10> <v11>
//
// `runs` lists the observed entries as space-separated 0-based
// "start:length" runs in ascending order; `values` lists the observed values
// in the same order (complex entries as two numbers "re im"). Ground truth is
// not stored.

#include "petrels/types.hpp"

#include <iosfwd>
#include <vector>

namespace petrels {

template <typename S>
void write_stream_header(std::ostream& os, Index ambient_dim);

template <typename S>
void write_stream_sample(std::ostream& os, const ObservedSample<S>& sample);

template <typename S>
void write_stream(std::ostream& os, const std::vector<ObservedSample<S>>& samples);

template <typename S>
std::vector<ObservedSample<S>> read_stream(std::istream& is);

}  // namespace petrels
