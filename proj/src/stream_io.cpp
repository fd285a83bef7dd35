#include "petrels/stream_io.hpp"

#include "petrels/metrics.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace petrels {

template <typename S>
void write_stream_header(std::ostream& os, Index ambient_dim) {
  os << "# petrels-stream 1 field=" << to_string(field_of<S>()) << " ambient_dim=" << ambient_dim
     << '\n';
  os << "t,runs,values\n";
}

template <typename S>
void write_stream_sample(std::ostream& os, const ObservedSample<S>& sample) {
  os << sample.t << ',';
  bool first = true;
  for (Index m = 0; m < sample.size();) {
    if (!sample.mask(m)) {
      ++m;
      continue;
    }
    Index end = m;
    while (end < sample.size() && sample.mask(end)) ++end;
    if (!first) os << ' ';
    os << m << ':' << (end - m);
    first = false;
    m = end;
  }
  os << ',';
  first = true;
  for (Index m = 0; m < sample.size(); ++m) {
    if (!sample.mask(m)) continue;
    if (!first) os << ' ';
    if constexpr (is_complex_v<S>) {
      os << format_double(sample.values(m).real()) << ' ' << format_double(sample.values(m).imag());
    } else {
      os << format_double(sample.values(m));
    }
    first = false;
  }
  os << '\n';
}

template <typename S>
void write_stream(std::ostream& os, const std::vector<ObservedSample<S>>& samples) {
  write_stream_header<S>(os, samples.empty() ? 0 : samples.front().size());
  for (const auto& s : samples) write_stream_sample(os, s);
}

template <typename S>
std::vector<ObservedSample<S>> read_stream(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# petrels-stream 1", 0) != 0) {
    throw std::runtime_error("stream: missing header");
  }
  const auto field_pos = line.find("field=");
  const auto dim_pos = line.find("ambient_dim=");
  if (field_pos == std::string::npos || dim_pos == std::string::npos) {
    throw std::runtime_error("stream: malformed header");
  }
  const std::string field = line.substr(field_pos + 6, line.find(' ', field_pos) - field_pos - 6);
  if (parse_scalar_field(field) != field_of<S>()) {
    throw std::runtime_error("stream: scalar field does not match the requested type");
  }
  const Index dim = std::stoll(line.substr(dim_pos + 12));
  if (!std::getline(is, line) || line != "t,runs,values") {
    throw std::runtime_error("stream: missing column header");
  }

  std::vector<ObservedSample<S>> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error("stream: malformed row '" + line + "'");
    }
    ObservedSample<S> s;
    s.t = std::stoll(line.substr(0, c1));
    s.mask = MaskVec::Constant(dim, false);
    s.values = Vec<S>::Zero(dim);

    std::vector<Index> positions;
    std::istringstream runs(line.substr(c1 + 1, c2 - c1 - 1));
    std::string run;
    while (runs >> run) {
      const auto colon = run.find(':');
      if (colon == std::string::npos) throw std::runtime_error("stream: malformed run '" + run + "'");
      const Index start = std::stoll(run.substr(0, colon));
      const Index len = std::stoll(run.substr(colon + 1));
      if (start < 0 || len <= 0 || start + len > dim) {
        throw std::runtime_error("stream: run out of range '" + run + "'");
      }
      for (Index m = start; m < start + len; ++m) positions.push_back(m);
    }
    std::istringstream vals(line.substr(c2 + 1));
    for (Index m : positions) {
      std::string re;
      if (!(vals >> re)) throw std::runtime_error("stream: too few values at t=" + std::to_string(s.t));
      if constexpr (is_complex_v<S>) {
        std::string im;
        if (!(vals >> im)) throw std::runtime_error("stream: truncated complex value");
        s.values(m) = S(parse_double(re), parse_double(im));
      } else {
        s.values(m) = parse_double(re);
      }
      s.mask(m) = true;
    }
    std::string extra;
    if (vals >> extra) throw std::runtime_error("stream: too many values at t=" + std::to_string(s.t));
    out.push_back(std::move(s));
  }
  return out;
}

#define PETRELS_INSTANTIATE(S)                                                               \
  template void write_stream_header<S>(std::ostream&, Index);                                \
  template void write_stream_sample<S>(std::ostream&, const ObservedSample<S>&);             \
  template void write_stream<S>(std::ostream&, const std::vector<ObservedSample<S>>&);       \
  template std::vector<ObservedSample<S>> read_stream<S>(std::istream&);

PETRELS_INSTANTIATE(Real)
PETRELS_INSTANTIATE(Complex)
#undef PETRELS_INSTANTIATE

}  // namespace petrels
